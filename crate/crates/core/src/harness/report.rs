use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::compare::ComparisonReport;
use super::efficiency::EfficiencyReport;
use crate::error::{Error, Result};

/// A report with JSON, CSV and (when non-empty) SVG renderings.
pub trait Report: Serialize {
    /// File stem used for every rendering.
    fn stem(&self) -> &'static str;
    fn to_csv(&self) -> String;
    fn to_svg(&self) -> Option<String>;

    fn to_json_pretty(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| format!("{v}"))
}

impl Report for ComparisonReport {
    fn stem(&self) -> &'static str {
        "comparison"
    }

    fn to_csv(&self) -> String {
        let mut out = String::from(
            "condition,n,mean_accuracy,stderr,best_sequence_accuracy,t_vs_optimum,p_vs_optimum\n",
        );
        for c in &self.conditions {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                c.name,
                c.n,
                c.mean_accuracy,
                c.stderr,
                c.best_sequence_accuracy,
                opt(c.t_vs_optimum),
                opt(c.p_vs_optimum)
            );
        }
        out
    }

    fn to_svg(&self) -> Option<String> {
        if self.conditions.is_empty() {
            return None;
        }
        let bars: Vec<Bar> = self
            .conditions
            .iter()
            .map(|c| Bar {
                label: c.name.clone(),
                value: c.mean_accuracy,
                err: c.stderr,
                marker: Some(c.best_sequence_accuracy),
            })
            .collect();
        Some(bar_chart("Average test accuracy", "accuracy", &bars))
    }
}

impl Report for EfficiencyReport {
    fn stem(&self) -> &'static str {
        "efficiency"
    }

    fn to_csv(&self) -> String {
        let mut out = String::from("k,reps,mean,q25,q75,best_rep,best_test_accuracy\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.k, r.reps, r.mean, r.q25, r.q75, r.best.rep, r.best.test_accuracy
            );
        }
        out
    }

    fn to_svg(&self) -> Option<String> {
        if self.rows.is_empty() {
            return None;
        }
        let points: Vec<(f64, f64, f64, f64)> = self
            .rows
            .iter()
            .map(|r| (r.k as f64, r.mean, r.q25, r.q75))
            .collect();
        Some(line_chart("Efficiency by pool size", "K", "c / K", &points))
    }
}

/// Write `<stem>.json`, `<stem>.csv` and, for non-empty reports,
/// `<stem>.svg` into `dir`. Returns the written paths.
pub fn emit_reports<R: Report>(report: &R, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = vec![
        (format!("{}.json", report.stem()), report.to_json_pretty()),
        (format!("{}.csv", report.stem()), report.to_csv()),
    ];
    if let Some(svg) = report.to_svg() {
        files.push((format!("{}.svg", report.stem()), svg));
    }
    let mut written = Vec::new();
    for (name, body) in files {
        let path = dir.join(name);
        fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

pub(crate) fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

struct Bar {
    label: String,
    value: f64,
    err: f64,
    marker: Option<f64>,
}

const W: f64 = 640.0;
const H: f64 = 400.0;
const LEFT: f64 = 60.0;
const BOTTOM: f64 = 60.0;
const TOP: f64 = 40.0;

fn svg_open(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        W / 2.0,
        escape(title)
    );
    s
}

fn axes(s: &mut String, y_label: &str, lo: f64, hi: f64) {
    let (x0, y0, y1) = (LEFT, H - BOTTOM, TOP);
    let _ = writeln!(
        s,
        r#"<line x1="{x0}" y1="{y0}" x2="{}" y2="{y0}" stroke="black"/>"#,
        W - 20.0
    );
    let _ = writeln!(
        s,
        r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>"#
    );
    for i in 0..=4 {
        let v = lo + (hi - lo) * f64::from(i) / 4.0;
        let y = y0 - (y0 - y1) * f64::from(i) / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.1}" text-anchor="end">{v:.3}</text>"#,
            x0 - 5.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="15" y="{}" transform="rotate(-90 15 {})" text-anchor="middle">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(y_label)
    );
}

fn y_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let hi = values.fold(0.0f64, f64::max);
    (0.0, if hi > 0.0 { hi * 1.1 } else { 1.0 })
}

fn bar_chart(title: &str, y_label: &str, bars: &[Bar]) -> String {
    let (lo, hi) = y_range(
        bars.iter()
            .flat_map(|b| [b.value + b.err, b.marker.unwrap_or(0.0)]),
    );
    let scale = |v: f64| (H - BOTTOM) - (H - BOTTOM - TOP) * (v - lo) / (hi - lo);
    let mut s = svg_open(title);
    axes(&mut s, y_label, lo, hi);
    let slot = (W - 20.0 - LEFT) / bars.len() as f64;
    for (i, b) in bars.iter().enumerate() {
        let cx = LEFT + slot * (i as f64 + 0.5);
        let bw = slot * 0.6;
        let top = scale(b.value);
        let _ = writeln!(
            s,
            r##"<rect x="{:.1}" y="{top:.1}" width="{bw:.1}" height="{:.1}" fill="#7fa7d6"/>"##,
            cx - bw / 2.0,
            (H - BOTTOM) - top
        );
        let (e0, e1) = (scale(b.value - b.err), scale(b.value + b.err));
        let _ = writeln!(
            s,
            r#"<line x1="{cx:.1}" y1="{e0:.1}" x2="{cx:.1}" y2="{e1:.1}" stroke="black"/>"#
        );
        for e in [e0, e1] {
            let _ = writeln!(
                s,
                r#"<line x1="{:.1}" y1="{e:.1}" x2="{:.1}" y2="{e:.1}" stroke="black"/>"#,
                cx - 5.0,
                cx + 5.0
            );
        }
        if let Some(m) = b.marker {
            let _ = writeln!(
                s,
                r#"<text x="{cx:.1}" y="{:.1}" text-anchor="middle" font-size="16">*</text>"#,
                scale(m) + 6.0
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{cx:.1}" y="{}" text-anchor="middle">{}</text>"#,
            H - BOTTOM + 18.0,
            escape(&b.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn line_chart(
    title: &str,
    x_label: &str,
    y_label: &str,
    points: &[(f64, f64, f64, f64)],
) -> String {
    let (lo, hi) = y_range(points.iter().map(|p| p.3.max(p.1)));
    let (xmin, xmax) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| {
            (a.min(p.0), b.max(p.0))
        });
    let span = if xmax > xmin { xmax - xmin } else { 1.0 };
    let sx = |x: f64| LEFT + 20.0 + (W - 60.0 - LEFT) * (x - xmin) / span;
    let sy = |v: f64| (H - BOTTOM) - (H - BOTTOM - TOP) * (v - lo) / (hi - lo);
    let mut s = svg_open(title);
    axes(&mut s, y_label, lo, hi);
    let path: Vec<String> = points
        .iter()
        .map(|p| format!("{:.1},{:.1}", sx(p.0), sy(p.1)))
        .collect();
    let _ = writeln!(
        s,
        r##"<polyline points="{}" fill="none" stroke="#2a5d9f" stroke-width="2"/>"##,
        path.join(" ")
    );
    for &(x, m, q25, q75) in points {
        let cx = sx(x);
        let _ = writeln!(
            s,
            r#"<line x1="{cx:.1}" y1="{:.1}" x2="{cx:.1}" y2="{:.1}" stroke="black"/>"#,
            sy(q25),
            sy(q75)
        );
        let _ = writeln!(
            s,
            r##"<circle cx="{cx:.1}" cy="{:.1}" r="3" fill="#2a5d9f"/>"##,
            sy(m)
        );
        let _ = writeln!(
            s,
            r#"<text x="{cx:.1}" y="{}" text-anchor="middle">{x}</text>"#,
            H - BOTTOM + 18.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        W / 2.0,
        H - 15.0,
        escape(x_label)
    );
    s.push_str("</svg>\n");
    s
}
