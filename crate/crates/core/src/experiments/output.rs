use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::run::{DemoRecord, ExperimentOutput, ExperimentResult, SuccessCurve, TrajectoryRecord};
use super::svg::{render, Panel, Series, Style};
use crate::error::Result;
use crate::io::{write_json, write_text};

pub const CURVE_HEADER: &str = "sweep_value,trials,successes,frequency,ci_lo,ci_hi,mean_runtime_ms";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Svg,
    Both,
}

impl OutputFormat {
    fn csv(self) -> bool {
        matches!(self, OutputFormat::Csv | OutputFormat::Both)
    }

    fn svg(self) -> bool {
        matches!(self, OutputFormat::Svg | OutputFormat::Both)
    }
}

impl std::str::FromStr for OutputFormat {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "svg" => Ok(OutputFormat::Svg),
            "both" => Ok(OutputFormat::Both),
            other => Err(crate::Error::InvalidArgument(format!("unknown format {other:?} (csv, svg or both)"))),
        }
    }
}

fn fixed(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.6}")
    } else {
        "NA".into()
    }
}

/// One row per sweep point. With `approx` the counts are of trials whose
/// support was recovered. Runtimes are `NA` unless timings were recorded.
pub fn curve_csv(curve: &SuccessCurve, approx: bool) -> String {
    let mut out = String::from(CURVE_HEADER);
    out.push('\n');
    for p in &curve.points {
        let (successes, freq, lo, hi) = if approx {
            (p.approx_successes, p.approx_frequency, p.approx_ci_lo, p.approx_ci_hi)
        } else {
            (p.successes, p.frequency, p.ci_lo, p.ci_hi)
        };
        let runtime = p.mean_runtime_ms.map_or_else(|| "NA".to_string(), |r| format!("{r:.3}"));
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            p.sweep_value,
            p.trials,
            successes,
            fixed(freq),
            fixed(lo),
            fixed(hi),
            runtime
        );
    }
    out
}

pub fn trajectory_csv(record: &TrajectoryRecord) -> String {
    let q = record.b_true.len();
    let mut out = String::from("run,seed,round,stage,epsilon");
    for i in 1..=q {
        let _ = write!(out, ",b{i}");
    }
    out.push_str(",residual_norm\n");
    for run in &record.runs {
        for pt in &run.points {
            let _ = write!(out, "{},{},{},{},{}", run.run, run.seed, pt.round, pt.stage, pt.epsilon);
            for i in 0..q {
                let _ = write!(out, ",{}", pt.b.get(i).map_or_else(|| "NA".to_string(), |v| fixed(*v)));
            }
            let _ = writeln!(out, ",{}", fixed(pt.residual_norm));
        }
    }
    out
}

pub fn demo_csv(record: &DemoRecord) -> String {
    let mut out = String::from("index,u_star,u_hat,x,x_hat\n");
    for i in 0..record.u_star.len() {
        let _ = writeln!(
            out,
            "{i},{},{},{},{}",
            fixed(record.u_star[i]),
            fixed(record.u_hat[i]),
            fixed(record.x[i]),
            fixed(record.x_hat[i])
        );
    }
    out
}

fn curves_svg(title: &str, curves: &[SuccessCurve]) -> String {
    let sweep = curves.first().map_or("k", |c| c.sweep_name.as_str());
    let series = curves
        .iter()
        .map(|c| Series {
            label: if c.outside_theorem {
                format!("{} (unstable model)", c.label)
            } else {
                c.label.clone()
            },
            points: c.points.iter().map(|p| (p.sweep_value as f64, p.frequency)).collect(),
            style: Style::LineMarkers,
        })
        .collect();
    render(&[Panel {
        title: title.to_string(),
        x_label: sweep.to_string(),
        y_label: "success rate".into(),
        series,
        y_range: Some((-0.02, 1.02)),
    }])
}

fn trajectory_svg(title: &str, record: &TrajectoryRecord) -> String {
    let mut series = Vec::new();
    if record.b_true.len() >= 2 {
        for (stage, eps) in record.stage_epsilons.iter().enumerate() {
            let points = record
                .runs
                .iter()
                .flat_map(|r| r.points.iter().filter(|p| p.stage == stage).map(|p| (p.b[0], p.b[1])))
                .collect();
            series.push(Series {
                label: format!("eps = {eps}"),
                points,
                style: Style::Markers,
            });
        }
        series.push(Series {
            label: "true b".into(),
            points: vec![(record.b_true[0], record.b_true[1])],
            style: Style::Markers,
        });
        render(&[Panel {
            title: title.to_string(),
            x_label: "b1".into(),
            y_label: "b2".into(),
            series,
            y_range: None,
        }])
    } else {
        for run in &record.runs {
            series.push(Series {
                label: format!("run {}", run.run),
                points: run.points.iter().map(|p| (p.round as f64, p.b.first().copied().unwrap_or(0.0))).collect(),
                style: Style::Line,
            });
        }
        render(&[Panel {
            title: title.to_string(),
            x_label: "round".into(),
            y_label: "b1".into(),
            series,
            y_range: None,
        }])
    }
}

fn demo_svg(title: &str, record: &DemoRecord) -> String {
    let idx = |v: &[f64]| v.iter().enumerate().map(|(i, &y)| (i as f64, y)).collect::<Vec<_>>();
    render(&[
        Panel {
            title: format!("{title}: spike train"),
            x_label: "t".into(),
            y_label: "u".into(),
            series: vec![
                Series {
                    label: "true".into(),
                    points: idx(&record.u_star),
                    style: Style::Stems,
                },
                Series {
                    label: "recovered".into(),
                    points: idx(&record.u_hat),
                    style: Style::Markers,
                },
            ],
            y_range: None,
        },
        Panel {
            title: format!("{title}: filtered process"),
            x_label: "t".into(),
            y_label: "x".into(),
            series: vec![
                Series {
                    label: "true".into(),
                    points: idx(&record.x),
                    style: Style::Line,
                },
                Series {
                    label: "reconstructed".into(),
                    points: idx(&record.x_hat),
                    style: Style::Line,
                },
            ],
            y_range: None,
        },
    ])
}

/// Writes the CSV tables and SVG plots of `result` into `dir`, plus a
/// `result.json` record, and returns the paths written.
pub fn emit_outputs(result: &ExperimentResult, dir: &Path, format: OutputFormat) -> Result<Vec<PathBuf>> {
    let name = &result.config.name;
    let mut written = Vec::new();
    let mut put = |file: String, text: String| -> Result<()> {
        let path = dir.join(file);
        write_text(&path, &text)?;
        written.push(path);
        Ok(())
    };
    match &result.output {
        ExperimentOutput::Curves { curves } => {
            if format.csv() {
                for c in curves {
                    put(format!("{name}_{}.csv", c.label), curve_csv(c, false))?;
                    put(format!("{name}_{}_approx.csv", c.label), curve_csv(c, true))?;
                }
            }
            if format.svg() {
                put(format!("{name}.svg"), curves_svg(name, curves))?;
            }
        }
        ExperimentOutput::Trajectory(record) => {
            if format.csv() {
                put(format!("{name}_trajectory.csv"), trajectory_csv(record))?;
            }
            if format.svg() {
                put(format!("{name}.svg"), trajectory_svg(name, record))?;
            }
        }
        ExperimentOutput::Demo(record) => {
            if format.csv() {
                put(format!("{name}_demo.csv"), demo_csv(record))?;
            }
            if format.svg() {
                put(format!("{name}.svg"), demo_svg(name, record))?;
            }
        }
    }
    let json = dir.join("result.json");
    write_json(&json, result)?;
    written.push(json);
    Ok(written)
}
