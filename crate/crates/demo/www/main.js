// Built with: wasm-pack build crates/demo --target web --out-dir www/pkg
import init, { simulate, reconstruct, noncausal } from "./pkg/arsense_demo.js";

const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e"];

function list(text) {
  return text.split(",").map(s => s.trim()).filter(s => s.length).map(Number);
}

function read(form, lists) {
  const params = {};
  for (const input of form.querySelectorAll("input")) {
    params[input.name] = lists.includes(input.name) ? list(input.value) : Number(input.value);
  }
  return params;
}

// series: [{ name, values, stem }]
function plot(target, series) {
  const w = 900, h = 180, pad = 6;
  const n = Math.max(...series.map(s => s.values.length));
  const all = series.flatMap(s => s.values);
  let lo = Math.min(0, ...all), hi = Math.max(0, ...all);
  if (hi === lo) hi = lo + 1;
  const sx = i => pad + (i / Math.max(n - 1, 1)) * (w - 2 * pad);
  const sy = v => h - pad - ((v - lo) / (hi - lo)) * (h - 2 * pad);
  let body = `<line x1="0" x2="${w}" y1="${sy(0)}" y2="${sy(0)}" stroke="#bbb"/>`;
  series.forEach((s, j) => {
    const c = COLORS[j % COLORS.length];
    if (s.stem) {
      s.values.forEach((v, i) => {
        if (v !== 0) body += `<line x1="${sx(i)}" x2="${sx(i)}" y1="${sy(0)}" y2="${sy(v)}" stroke="${c}" stroke-width="2"/>`;
      });
    } else {
      const pts = s.values.map((v, i) => `${sx(i).toFixed(1)},${sy(v).toFixed(1)}`).join(" ");
      body += `<polyline fill="none" stroke="${c}" stroke-width="1.5" ${j ? 'stroke-dasharray="4 3"' : ""} points="${pts}"/>`;
    }
  });
  const legend = series.map((s, j) => `<span style="color:${COLORS[j % COLORS.length]}">■ ${s.name}</span>`).join("");
  target.innerHTML = `<svg viewBox="0 0 ${w} ${h}" preserveAspectRatio="none">${body}</svg><div class="legend">${legend}</div>`;
}

function fmt(v) {
  return v.map(x => x.toFixed(4)).join(", ");
}

const OPS = {
  simulate: {
    lists: ["poles"],
    call: simulate,
    show(r) {
      return {
        series: [{ name: "x", values: r.x }, { name: "u", values: r.u, stem: true }],
        status: `a = [${fmt(r.a)}]  stable: ${r.stable}  largest pole |z| = ${r.max_pole_modulus.toFixed(4)}\n` +
          `required spike gap: ${r.required_separation === null ? "n/a" : r.required_separation.toFixed(2)}`,
      };
    },
  },
  reconstruct: {
    lists: ["poles"],
    call: reconstruct,
    show(r) {
      return {
        series: [{ name: "x", values: r.x }, { name: "x̂", values: r.x_hat }, { name: "û", values: r.u_hat, stem: true }],
        status: `a* = [${fmt(r.a_star)}]  â = [${fmt(r.a_hat)}]\nresult: ${r.success}  max |x̂ − x| = ${r.x_error.toExponential(2)}`,
      };
    },
  },
  noncausal: {
    lists: ["forward", "backward"],
    call: noncausal,
    show(r) {
      return {
        series: [{ name: "x", values: r.x }, { name: "x̂", values: r.x_hat }, { name: "û", values: r.u_hat, stem: true }],
        status: `â = [${fmt(r.a_hat)}]  max |x̂ − x| = ${r.x_error.toExponential(2)}`,
      };
    },
  },
};

await init();

for (const [id, op] of Object.entries(OPS)) {
  const form = document.getElementById(id);
  const status = form.querySelector(".status");
  const run = () => {
    try {
      const result = JSON.parse(op.call(JSON.stringify(read(form, op.lists))));
      const view = op.show(result);
      plot(form.querySelector(".plot"), view.series);
      status.textContent = view.status;
    } catch (e) {
      status.textContent = `error: ${e.message ?? e}`;
    }
  };
  form.querySelector("button").addEventListener("click", run);
  run();
}
