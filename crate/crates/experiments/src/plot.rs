//! SVG charts rendered from CSV text only.
//!
//! Every chart is a pure function of the CSV it is given, so identical CSV
//! produces identical SVG bytes.

use std::fmt::Write as _;

use anyhow::{bail, Result};

use crate::record::Table;
use crate::runner::GRADCHECK_THRESHOLD;

const PANEL_W: f64 = 420.0;
const PANEL_H: f64 = 300.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 45.0;
const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

/// A data series with a symmetric band (`lo`, `hi`) around `y`.
struct Series {
    label: String,
    x: Vec<f64>,
    y: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

#[derive(Clone, Copy)]
struct Axis {
    min: f64,
    max: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Self {
        let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values.filter(|v| v.is_finite() && (!log || *v > 0.0)) {
            let v = if log { v.log10() } else { v };
            min = min.min(v);
            max = max.max(v);
        }
        if !min.is_finite() {
            (min, max) = (0.0, 1.0);
        }
        if max - min < 1e-12 * max.abs().max(1.0) {
            let pad = 0.5 * max.abs().max(1.0);
            (min, max) = (min - pad, max + pad);
        }
        let pad = 0.05 * (max - min);
        Self {
            min: min - pad,
            max: max + pad,
            log,
        }
    }

    fn frac(&self, v: f64) -> f64 {
        let v = if self.log {
            v.max(f64::MIN_POSITIVE).log10()
        } else {
            v
        };
        ((v - self.min) / (self.max - self.min)).clamp(-0.05, 1.05)
    }

    fn tick_label(&self, f: f64) -> String {
        let v = self.min + f * (self.max - self.min);
        if self.log {
            format!("1e{v:.1}")
        } else {
            format!("{v:.3}")
        }
    }
}

struct Panel {
    x0: f64,
    title: String,
    x_label: String,
    y_label: String,
    xa: Axis,
    ya: Axis,
}

impl Panel {
    fn px(&self, x: f64) -> f64 {
        self.x0 + MARGIN_L + self.xa.frac(x) * (PANEL_W - MARGIN_L - MARGIN_R)
    }

    fn py(&self, y: f64) -> f64 {
        MARGIN_T + (1.0 - self.ya.frac(y)) * (PANEL_H - MARGIN_T - MARGIN_B)
    }

    fn frame(&self, out: &mut String) {
        let (l, r) = (self.x0 + MARGIN_L, self.x0 + PANEL_W - MARGIN_R);
        let (t, b) = (MARGIN_T, PANEL_H - MARGIN_B);
        let _ = writeln!(
            out,
            r##"<rect x="{l:.2}" y="{t:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#333"/>"##,
            r - l,
            b - t
        );
        for i in 0..=4 {
            let f = i as f64 / 4.0;
            let x = l + f * (r - l);
            let y = b - f * (b - t);
            let _ = writeln!(
                out,
                r##"<text x="{x:.2}" y="{:.2}" font-size="10" text-anchor="middle">{}</text>"##,
                b + 14.0,
                self.xa.tick_label(f)
            );
            let _ = writeln!(
                out,
                r##"<text x="{:.2}" y="{:.2}" font-size="10" text-anchor="end">{}</text>"##,
                l - 4.0,
                y + 3.0,
                self.ya.tick_label(f)
            );
        }
        let cx = (l + r) / 2.0;
        let _ = writeln!(
            out,
            r##"<text x="{cx:.2}" y="18" font-size="13" text-anchor="middle">{}</text>"##,
            escape(&self.title)
        );
        let _ = writeln!(
            out,
            r##"<text x="{cx:.2}" y="{:.2}" font-size="11" text-anchor="middle">{}</text>"##,
            PANEL_H - 8.0,
            escape(&self.x_label)
        );
        let cy = (t + b) / 2.0;
        let _ = writeln!(
            out,
            r##"<text x="{:.2}" y="{cy:.2}" font-size="11" text-anchor="middle" transform="rotate(-90 {:.2} {cy:.2})">{}</text>"##,
            self.x0 + 14.0,
            self.x0 + 14.0,
            escape(&self.y_label)
        );
    }

    fn band_and_line(&self, out: &mut String, s: &Series, color: &str) {
        let mut band = String::new();
        for (x, hi) in s.x.iter().zip(&s.hi) {
            let _ = write!(band, "{:.2},{:.2} ", self.px(*x), self.py(*hi));
        }
        for (x, lo) in s.x.iter().zip(&s.lo).rev() {
            let _ = write!(band, "{:.2},{:.2} ", self.px(*x), self.py(*lo));
        }
        let _ = writeln!(
            out,
            r#"<polygon points="{}" fill="{color}" fill-opacity="0.18" stroke="none"/>"#,
            band.trim_end()
        );
        let line: Vec<String> =
            s.x.iter()
                .zip(&s.y)
                .map(|(x, y)| format!("{:.2},{:.2}", self.px(*x), self.py(*y)))
                .collect();
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            line.join(" ")
        );
    }

    fn legend(&self, out: &mut String, labels: &[(String, &str)]) {
        let x = self.x0 + PANEL_W - MARGIN_R - 90.0;
        for (i, (label, color)) in labels.iter().enumerate() {
            let y = MARGIN_T + 14.0 + 14.0 * i as f64;
            let _ = writeln!(
                out,
                r#"<rect x="{x:.2}" y="{:.2}" width="10" height="10" fill="{color}"/>"#,
                y - 9.0
            );
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{y:.2}" font-size="10">{}</text>"#,
                x + 14.0,
                escape(label)
            );
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn document(width: f64, body: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{PANEL_H:.0}\" viewBox=\"0 0 {width:.0} {PANEL_H:.0}\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{body}</svg>\n"
    )
}

/// Renders the chart for `experiment` from its CSV: the aggregate table for
/// `convergence` and `tradeoff`, the raw per-trial table for `gradcheck`.
pub fn render_svg(experiment: &str, csv: &str) -> Result<String> {
    let table = Table::parse_csv(csv)?;
    match experiment {
        "convergence" => convergence_svg(&table),
        "tradeoff" => tradeoff_svg(&table),
        "gradcheck" => gradcheck_svg(&table),
        other => bail!("no chart for experiment {other:?}"),
    }
}

fn convergence_svg(t: &Table) -> Result<String> {
    let ns = t.column_str("n_samples")?;
    let iters = t.column_f64("iter")?;
    let (mo, so) = (
        t.column_f64("mean_neg_objective")?,
        t.column_f64("std_neg_objective")?,
    );
    let (mg, sg) = (
        t.column_f64("mean_grad_norm")?,
        t.column_f64("std_grad_norm")?,
    );
    let mut groups: Vec<&str> = Vec::new();
    for n in &ns {
        if !groups.contains(n) {
            groups.push(n);
        }
    }
    let collect = |mean: &[f64], std: &[f64], log: bool| -> Vec<Series> {
        groups
            .iter()
            .map(|g| {
                let idx: Vec<usize> = (0..ns.len()).filter(|&i| ns[i] == *g).collect();
                let lo = idx
                    .iter()
                    .map(|&i| {
                        if log {
                            (mean[i] - std[i]).max(mean[i] * 1e-3)
                        } else {
                            mean[i] - std[i]
                        }
                    })
                    .collect();
                Series {
                    label: format!("N = {g}"),
                    x: idx.iter().map(|&i| iters[i]).collect(),
                    y: idx.iter().map(|&i| mean[i]).collect(),
                    lo,
                    hi: idx.iter().map(|&i| mean[i] + std[i]).collect(),
                }
            })
            .collect()
    };
    let obj = collect(&mo, &so, false);
    let grad = collect(&mg, &sg, true);
    let xa = Axis::fit(iters.iter().copied(), false);
    let panels = [
        (
            obj,
            "Objective convergence",
            "-f (mean ± 1 std)",
            0.0,
            false,
        ),
        (
            grad,
            "Riemannian gradient norm",
            "‖grad f‖ (log scale)",
            PANEL_W,
            true,
        ),
    ];
    let mut body = String::new();
    for (series, title, y_label, x0, log) in panels {
        let ya = Axis::fit(
            series
                .iter()
                .flat_map(|s| s.lo.iter().chain(&s.hi).copied()),
            log,
        );
        let p = Panel {
            x0,
            title: title.into(),
            x_label: "iteration".into(),
            y_label: y_label.into(),
            xa,
            ya,
        };
        p.frame(&mut body);
        let mut labels = Vec::new();
        for (i, s) in series.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            p.band_and_line(&mut body, s, color);
            labels.push((s.label.clone(), color));
        }
        p.legend(&mut body, &labels);
    }
    Ok(document(2.0 * PANEL_W, &body))
}

fn tradeoff_svg(t: &Table) -> Result<String> {
    let alphas = t.column_str("alpha")?;
    let (ms, ss) = (t.column_f64("mean_sensing")?, t.column_f64("std_sensing")?);
    let (mc, sc) = (t.column_f64("mean_comm")?, t.column_f64("std_comm")?);
    let xa = Axis::fit(mc.iter().zip(&sc).flat_map(|(m, s)| [m - s, m + s]), false);
    let ya = Axis::fit(ms.iter().zip(&ss).flat_map(|(m, s)| [m - s, m + s]), false);
    let p = Panel {
        x0: 0.0,
        title: "Sensing / communication trade-off".into(),
        x_label: "f_c (mean ± 1 std)".into(),
        y_label: "f_s (mean ± 1 std)".into(),
        xa,
        ya,
    };
    let mut body = String::new();
    p.frame(&mut body);
    let color = COLORS[0];
    let line: Vec<String> = mc
        .iter()
        .zip(&ms)
        .map(|(x, y)| format!("{:.2},{:.2}", p.px(*x), p.py(*y)))
        .collect();
    let _ = writeln!(
        body,
        r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1"/>"#,
        line.join(" ")
    );
    for i in 0..alphas.len() {
        let (x, y) = (p.px(mc[i]), p.py(ms[i]));
        let _ = writeln!(
            body,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{color}" stroke-opacity="0.5"/>"#,
            p.px(mc[i] - sc[i]),
            p.px(mc[i] + sc[i])
        );
        let _ = writeln!(
            body,
            r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="{color}" stroke-opacity="0.5"/>"#,
            p.py(ms[i] - ss[i]),
            p.py(ms[i] + ss[i])
        );
        let _ = writeln!(
            body,
            r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="{color}"/>"#
        );
        let _ = writeln!(
            body,
            r#"<text x="{:.2}" y="{:.2}" font-size="9">α={}</text>"#,
            x + 5.0,
            y - 5.0,
            escape(alphas[i])
        );
    }
    Ok(document(PANEL_W, &body))
}

fn gradcheck_svg(t: &Table) -> Result<String> {
    let trials = t.column_f64("trial")?;
    let errors = t.column_f64("rel_error")?;
    let xa = Axis::fit(trials.iter().copied().chain([0.0]), false);
    let ya = Axis::fit(errors.iter().copied().chain([GRADCHECK_THRESHOLD]), true);
    let p = Panel {
        x0: 0.0,
        title: "Gradient check".into(),
        x_label: "trial".into(),
        y_label: "relative error (log scale)".into(),
        xa,
        ya,
    };
    let mut body = String::new();
    p.frame(&mut body);
    let y = p.py(GRADCHECK_THRESHOLD);
    let _ = writeln!(
        body,
        r##"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#d62728" stroke-dasharray="4 3"/>"##,
        p.px(xa.min),
        p.px(xa.max)
    );
    for (x, e) in trials.iter().zip(&errors) {
        let _ = writeln!(
            body,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{}"/>"#,
            p.px(*x),
            p.py(*e),
            COLORS[0]
        );
    }
    Ok(document(PANEL_W, &body))
}
