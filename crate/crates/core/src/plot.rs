//! Static SVG plots of trajectory logs and evaluation reports. Output is a
//! pure function of the input, so identical inputs give identical bytes.
//!
//! Scene plots map north up and east right: SVG `x` is easting and SVG `y`
//! is negated northing, in metres.

use crate::env::{read_log, Scenario, StepRecord};
use crate::eval::EvalReport;
use crate::sensing::Shape;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PlotError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: neither an evaluation report nor a trajectory log: {message}")]
    Format { path: String, message: String },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PlotOutput {
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

fn num(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

/// Screen coordinates of a NED point.
fn xy(x_n: f64, y_e: f64) -> (f64, f64) {
    (y_e, -x_n)
}

#[derive(Debug, Clone, Copy)]
struct Bbox {
    min: (f64, f64),
    max: (f64, f64),
}

impl Bbox {
    fn new() -> Self {
        Self {
            min: (f64::INFINITY, f64::INFINITY),
            max: (f64::NEG_INFINITY, f64::NEG_INFINITY),
        }
    }

    fn add(&mut self, p: (f64, f64)) {
        self.min = (self.min.0.min(p.0), self.min.1.min(p.1));
        self.max = (self.max.0.max(p.0), self.max.1.max(p.1));
    }

    fn padded(self) -> Self {
        let span = (self.max.0 - self.min.0)
            .max(self.max.1 - self.min.1)
            .max(1.0);
        let m = 0.05 * span;
        Self {
            min: (self.min.0 - m, self.min.1 - m),
            max: (self.max.0 + m, self.max.1 + m),
        }
    }
}

fn polyline(points: &[(f64, f64)]) -> String {
    points
        .iter()
        .map(|(x, y)| format!("{},{}", num(*x), num(*y)))
        .collect::<Vec<_>>()
        .join(" ")
}

fn empty_svg(message: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"360\" viewBox=\"0 0 640 360\">\n\
         <text x=\"320\" y=\"180\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">{message}</text>\n</svg>\n"
    )
}

/// Top-down scene: path dashed black, own track dashed blue ending in a
/// single own-ship marker, target tracks red.
pub fn scene_svg(records: &[StepRecord], scenario: Option<&Scenario>) -> String {
    if records.is_empty() {
        return empty_svg("empty trajectory log");
    }
    let own: Vec<(f64, f64)> = records.iter().map(|r| xy(r.x_n, r.y_n)).collect();
    let mut targets: BTreeMap<u32, Vec<(f64, f64)>> = BTreeMap::new();
    for r in records {
        for t in &r.targets {
            targets
                .entry(t.id)
                .or_default()
                .push(xy(t.position.x, t.position.y));
        }
    }
    let path: Vec<(f64, f64)> = scenario
        .map(|s| s.waypoints.iter().map(|p| xy(p.x, p.y)).collect())
        .unwrap_or_default();

    let mut bb = Bbox::new();
    own.iter()
        .chain(targets.values().flatten())
        .chain(&path)
        .for_each(|&p| bb.add(p));
    let bb = bb.padded();
    let (w, h) = (bb.max.0 - bb.min.0, bb.max.1 - bb.min.1);
    let stroke = w.max(h) / 400.0;
    let (px, py) = (800.0, (800.0 * h / w).round().clamp(200.0, 1600.0));

    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{px}\" height=\"{py}\" viewBox=\"{} {} {} {}\" preserveAspectRatio=\"xMidYMid meet\">",
        num(bb.min.0),
        num(bb.min.1),
        num(w),
        num(h)
    );
    let _ = writeln!(
        s,
        "<rect class=\"water\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"#eef4fa\"/>",
        num(bb.min.0),
        num(bb.min.1),
        num(w),
        num(h)
    );
    if let Some(sc) = scenario {
        for ob in &sc.obstacles {
            match &ob.shape {
                Shape::Circle { center, radius } => {
                    let (cx, cy) = xy(center.x, center.y);
                    let _ = writeln!(s, "<circle class=\"obstacle\" cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"#9a9a8a\"/>", num(cx), num(cy), num(*radius));
                }
                shape @ Shape::Polygon { .. } => {
                    let mut d = String::new();
                    for ring in shape.rings() {
                        for (k, p) in ring.iter().enumerate() {
                            let (x, y) = xy(p.x, p.y);
                            let _ = write!(
                                d,
                                "{}{},{} ",
                                if k == 0 { "M" } else { "L" },
                                num(x),
                                num(y)
                            );
                        }
                        d.push_str("Z ");
                    }
                    let _ = writeln!(s, "<path class=\"obstacle\" d=\"{}\" fill=\"#9a9a8a\" fill-rule=\"evenodd\"/>", d.trim_end());
                }
            }
        }
        let _ = writeln!(
            s,
            "<polyline class=\"path\" points=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"{}\" stroke-dasharray=\"{} {}\"/>",
            polyline(&path),
            num(stroke),
            num(4.0 * stroke),
            num(3.0 * stroke)
        );
    }
    for (id, pts) in &targets {
        let _ = writeln!(
            s,
            "<polyline class=\"target-track\" data-id=\"{id}\" points=\"{}\" fill=\"none\" stroke=\"red\" stroke-width=\"{}\" stroke-dasharray=\"{} {}\"/>",
            polyline(pts),
            num(stroke),
            num(stroke),
            num(2.0 * stroke)
        );
        let (x, y) = pts[pts.len() - 1];
        let _ = writeln!(s, "<circle class=\"target-marker\" data-id=\"{id}\" cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"red\"/>", num(x), num(y), num(3.0 * stroke));
    }
    let _ = writeln!(
        s,
        "<polyline class=\"own-track\" points=\"{}\" fill=\"none\" stroke=\"blue\" stroke-width=\"{}\" stroke-dasharray=\"{} {}\"/>",
        polyline(&own),
        num(stroke),
        num(3.0 * stroke),
        num(2.0 * stroke)
    );
    let (x, y) = own[own.len() - 1];
    let _ = writeln!(
        s,
        "<circle class=\"own-marker\" cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"blue\"/>",
        num(x),
        num(y),
        num(3.0 * stroke)
    );
    s.push_str("</svg>\n");
    s
}

/// Line chart of `(x, y)` samples on a fixed 640 x 360 canvas.
pub fn series_svg(title: &str, x_label: &str, y_label: &str, points: &[(f64, f64)]) -> String {
    if points.is_empty() {
        return empty_svg(&format!("{title}: no data"));
    }
    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for &(x, y) in points {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let (left, right, top, bottom) = (70.0, 620.0, 40.0, 310.0);
    let sx = |x: f64| left + (x - x0) / (x1 - x0) * (right - left);
    let sy = |y: f64| bottom - (y - y0) / (y1 - y0) * (bottom - top);
    let pts: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (sx(x), sy(y))).collect();
    let mut s = String::new();
    s.push_str("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"360\" viewBox=\"0 0 640 360\" font-family=\"sans-serif\" font-size=\"11\">\n");
    let _ = writeln!(
        s,
        "<text x=\"320\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">{title}</text>"
    );
    let _ = writeln!(s, "<polyline class=\"axes\" points=\"{left},{top} {left},{bottom} {right},{bottom}\" fill=\"none\" stroke=\"black\"/>");
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>",
        left - 4.0,
        bottom,
        num(y0)
    );
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>",
        left - 4.0,
        top + 8.0,
        num(y1)
    );
    let _ = writeln!(
        s,
        "<text x=\"{left}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
        bottom + 16.0,
        num(x0)
    );
    let _ = writeln!(
        s,
        "<text x=\"{right}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
        bottom + 16.0,
        num(x1)
    );
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{x_label}</text>",
        (left + right) / 2.0,
        bottom + 34.0
    );
    let _ = writeln!(s, "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{y_label}</text>", (top + bottom) / 2.0, (top + bottom) / 2.0);
    let _ = writeln!(s, "<polyline class=\"series\" points=\"{}\" fill=\"none\" stroke=\"#1f4e9a\" stroke-width=\"1.5\"/>", polyline(&pts));
    s.push_str("</svg>\n");
    s
}

/// Horizontal bar chart of labelled counts.
pub fn bars_svg(title: &str, bars: &[(String, usize)]) -> String {
    let max = bars.iter().map(|b| b.1).max().unwrap_or(0).max(1) as f64;
    let height = 60 + 26 * bars.len();
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"{height}\" viewBox=\"0 0 640 {height}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    );
    let _ = writeln!(
        s,
        "<text x=\"320\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">{title}</text>"
    );
    for (k, (label, count)) in bars.iter().enumerate() {
        let y = 40 + 26 * k;
        let w = 380.0 * *count as f64 / max;
        let _ = writeln!(
            s,
            "<text x=\"170\" y=\"{}\" text-anchor=\"end\">{label}</text>",
            y + 14
        );
        let _ = writeln!(
            s,
            "<rect class=\"bar\" x=\"180\" y=\"{y}\" width=\"{}\" height=\"18\" fill=\"#1f4e9a\"/>",
            num(w)
        );
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\">{count}</text>",
            num(186.0 + w),
            y + 14
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Named SVG documents for a trajectory log.
pub fn log_plots(
    records: &[StepRecord],
    scenario: Option<&Scenario>,
) -> Vec<(&'static str, String)> {
    let reward: Vec<(f64, f64)> = records.iter().map(|r| (r.t, r.reward)).collect();
    let cte: Vec<(f64, f64)> = records
        .iter()
        .map(|r| (r.t, r.cross_track_error.abs()))
        .collect();
    vec![
        ("scene.svg", scene_svg(records, scenario)),
        (
            "reward.svg",
            series_svg("Step reward", "time (s)", "reward", &reward),
        ),
        (
            "cross_track.svg",
            series_svg("Cross-track error", "time (s)", "|e| (m)", &cte),
        ),
    ]
}

/// Named SVG documents for an evaluation report.
pub fn report_plots(report: &EvalReport) -> Vec<(&'static str, String)> {
    let a = &report.aggregate;
    let outcomes = vec![
        ("goal".to_string(), a.goal),
        ("collision".to_string(), a.collision),
        ("timeout".to_string(), a.timeout),
        ("left world".to_string(), a.left_world),
    ];
    let encounters: Vec<(String, usize)> = a
        .encounter_outcomes
        .iter()
        .map(|(k, v)| (k.clone(), *v))
        .collect();
    let rewards: Vec<(f64, f64)> = report
        .episodes
        .iter()
        .map(|e| (e.index as f64, e.total_reward))
        .collect();
    vec![
        (
            "outcomes.svg",
            bars_svg(
                &format!("Episode outcomes ({})", report.scenario_set),
                &outcomes,
            ),
        ),
        (
            "encounters.svg",
            bars_svg("Encounter outcomes", &encounters),
        ),
        (
            "episode_reward.svg",
            series_svg("Episode reward", "episode", "total reward", &rewards),
        ),
    ]
}

/// Plots a report (`.json`) or trajectory log (`.jsonl`) into `out_dir`.
pub fn plot_file(
    input: &Path,
    scenario: Option<&Scenario>,
    out_dir: &Path,
) -> Result<PlotOutput, PlotError> {
    let io = |path: &Path, source| PlotError::Io {
        path: path.display().to_string(),
        source,
    };
    let text = std::fs::read_to_string(input).map_err(|e| io(input, e))?;
    let mut out = PlotOutput::default();
    let docs = if let Ok(report) = serde_json::from_str::<EvalReport>(&text) {
        report_plots(&report)
    } else {
        let records = read_log(&text).map_err(|e| PlotError::Format {
            path: input.display().to_string(),
            message: e.to_string(),
        })?;
        if records.is_empty() {
            out.warnings.push(format!(
                "{}: empty trajectory log, plots are blank",
                input.display()
            ));
        }
        log_plots(&records, scenario)
    };
    std::fs::create_dir_all(out_dir).map_err(|e| io(out_dir, e))?;
    for (name, svg) in docs {
        let path = out_dir.join(name);
        std::fs::write(&path, svg).map_err(|e| io(&path, e))?;
        out.files.push(path);
    }
    Ok(out)
}
