use serde::{Deserialize, Serialize};

use crate::signal::{fit_decay_envelope, ArModel, DecayEnvelope, DEFAULT_ENVELOPE_SAFETY};

/// Impulse-response samples used when fitting the decay envelope.
pub const ENVELOPE_HORIZON: usize = 2000;

/// The separation constant
/// `l = (ln(2/(1−ρ)) + p·ln(6·β_max·M/β_min)) / ln(1/ρ) + p`.
pub fn required_separation(p: usize, envelope: &DecayEnvelope, beta_min: f64, beta_max: f64) -> f64 {
    let DecayEnvelope { m, rho } = *envelope;
    let p = p as f64;
    ((2.0 / (1.0 - rho)).ln() + p * (6.0 * beta_max * m / beta_min).ln()) / (1.0 / rho).ln() + p
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub p: usize,
    pub max_pole_modulus: f64,
    pub stable: bool,
    pub envelope: Option<DecayEnvelope>,
    pub k: usize,
    pub beta_min: f64,
    pub beta_max: f64,
    pub amplitudes_ok: bool,
    pub l_required: Option<f64>,
    /// Smallest gap between consecutive spikes (`None` for fewer than two).
    pub l_actual: Option<usize>,
    pub separation_ok: bool,
    pub s: usize,
    /// `min(S/l, S/3)`.
    pub sparsity_bound: Option<f64>,
    pub sparsity_ok: bool,
    /// `β_min(1−ρ^l)/(β_max M) − ρ^l`.
    pub r: Option<f64>,
    /// `β_min/(3 β_max M)`.
    pub r_threshold: Option<f64>,
    /// Whether `ρ^l ≤ r_threshold`, the case in which `r ≥ r_threshold` is claimed.
    pub r_check_applies: bool,
    pub r_ok: bool,
    pub all_pass: bool,
}

/// Evaluates the stability, decay, separation, amplitude and sparsity
/// assumptions for `(model, u_star)` with RIP level `s`.
pub fn check_theorem1_assumptions(model: &ArModel, u_star: &[f64], s: usize) -> AssumptionReport {
    let p = model.order();
    let max_pole_modulus = model.max_pole_modulus();
    let stable = model.is_stable();
    let support: Vec<usize> = (0..u_star.len()).filter(|&i| u_star[i] != 0.0).collect();
    let k = support.len();
    let (beta_min, beta_max) = support.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &i| {
        (lo.min(u_star[i].abs()), hi.max(u_star[i].abs()))
    });
    let (beta_min, beta_max) = if k == 0 { (0.0, 0.0) } else { (beta_min, beta_max) };
    let amplitudes_ok = k == 0 || (beta_min > 0.0 && beta_min.is_finite() && beta_max.is_finite());
    let l_actual = support.windows(2).map(|w| w[1] - w[0]).min();

    let envelope = if stable {
        fit_decay_envelope(model, ENVELOPE_HORIZON, DEFAULT_ENVELOPE_SAFETY).ok()
    } else {
        None
    };
    let (ref_min, ref_max) = if k == 0 { (1.0, 1.0) } else { (beta_min, beta_max) };
    let l_required = envelope.map(|e| required_separation(p, &e, ref_min, ref_max));
    let separation_ok = match (l_required, l_actual) {
        (Some(l), Some(gap)) => gap as f64 > l,
        (Some(_), None) => true,
        (None, _) => false,
    };
    let s_f = s as f64;
    let sparsity_bound = l_required.map(|l| (s_f / l).min(s_f / 3.0));
    let sparsity_ok = sparsity_bound.is_some_and(|b| k as f64 <= b);

    let (r, r_threshold, r_check_applies, r_ok) = match (envelope, l_required) {
        (Some(e), Some(l)) => {
            let rho_l = e.rho.powf(l);
            let r = ref_min * (1.0 - rho_l) / (ref_max * e.m) - rho_l;
            let thr = ref_min / (3.0 * ref_max * e.m);
            let applies = rho_l <= thr;
            (Some(r), Some(thr), applies, !applies || r >= thr)
        }
        _ => (None, None, false, false),
    };
    let all_pass = stable && amplitudes_ok && separation_ok && sparsity_ok && r_ok;
    AssumptionReport {
        p,
        max_pole_modulus,
        stable,
        envelope,
        k,
        beta_min,
        beta_max,
        amplitudes_ok,
        l_required,
        l_actual,
        separation_ok,
        s,
        sparsity_bound,
        sparsity_ok,
        r,
        r_threshold,
        r_check_applies,
        r_ok,
        all_pass,
    }
}

/// The three restricted-isometry requirements that appear in the
/// recovery argument; which one binds is left to the caller.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct RipConditions {
    /// `δ_S / (1 − 3δ_S) < 1`.
    pub ratio_ok: bool,
    /// `δ_2S ≤ 1/3`.
    pub double_ok: bool,
    /// `√(3k/S) ≤ 1`.
    pub sparsity_ok: bool,
}

pub fn check_rip_conditions(delta_s: f64, delta_2s: f64, k: usize, s: usize) -> RipConditions {
    let denom = 1.0 - 3.0 * delta_s;
    RipConditions {
        ratio_ok: denom > 0.0 && delta_s / denom < 1.0,
        double_ok: delta_2s <= 1.0 / 3.0,
        sparsity_ok: s > 0 && (3.0 * k as f64 / s as f64).sqrt() <= 1.0,
    }
}
