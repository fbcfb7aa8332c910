//! CSV, fit report and SVG output. All writers are byte-deterministic.

use std::fmt::Write as _;
use std::path::Path;

use aggrates_core::harness::{fit_rate, worst_candidate, WorstPoint};
use aggrates_core::{RateFit, RegretRecord};

use crate::error::{AppError, Result};

pub const CSV_HEADER: &str = "scenario,candidate,procedure,loss,M,n,rep,seed,regret,oracle_excess,bayes_risk";

pub fn csv_string(records: &[RegretRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.scenario, r.candidate, r.procedure, r.loss, r.m, r.n, r.rep, r.seed, r.regret,
            r.oracle_excess, r.bayes_risk
        );
    }
    out
}

fn write(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| AppError::io(path, e))
}

pub fn emit_csv(records: &[RegretRecord], path: &Path) -> Result<()> {
    write(path, &csv_string(records))
}

/// Worst-candidate mean regret per n, grouped by procedure in order of
/// first appearance.
pub fn series(records: &[RegretRecord]) -> Vec<(String, Vec<WorstPoint>)> {
    let mut out: Vec<(String, Vec<WorstPoint>)> = Vec::new();
    let Ok(points) = worst_candidate(records) else {
        return out;
    };
    for p in points {
        match out.iter_mut().find(|(name, _)| *name == p.procedure) {
            Some((_, v)) => v.push(p),
            None => out.push((p.procedure.clone(), vec![p])),
        }
    }
    for (_, v) in &mut out {
        v.sort_by_key(|p| p.n);
    }
    out
}

pub fn fits(series: &[(String, Vec<WorstPoint>)]) -> Vec<(String, aggrates_core::Result<RateFit>)> {
    series
        .iter()
        .map(|(name, pts)| {
            let ns: Vec<usize> = pts.iter().map(|p| p.n).collect();
            let means: Vec<f64> = pts.iter().map(|p| p.mean).collect();
            (name.clone(), fit_rate(&ns, &means))
        })
        .collect()
}

/// One `procedure slope intercept r2 n_points` line per fitted procedure;
/// procedures that cannot be fitted get a comment line with the reason.
pub fn fit_report_string(fits: &[(String, aggrates_core::Result<RateFit>)]) -> String {
    let mut out = String::from("# procedure slope intercept r2 n_points\n");
    for (name, fit) in fits {
        match fit {
            Ok(f) => {
                let _ = writeln!(out, "{name} {} {} {} {}", f.slope, f.intercept, f.r_squared, f.points_used);
            }
            Err(e) => {
                let _ = writeln!(out, "# {name}: not fitted: {e}");
            }
        }
    }
    out
}

pub fn emit_fit_report(fits: &[(String, aggrates_core::Result<RateFit>)], path: &Path) -> Result<()> {
    write(path, &fit_report_string(fits))
}

const W: f64 = 720.0;
const H: f64 = 460.0;
const LEFT: f64 = 90.0;
const RIGHT: f64 = 190.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Log-log line chart of worst-candidate mean regret against n, one
/// polyline per procedure. Non-positive means cannot be drawn on a log
/// axis and are left out (the legend says how many).
pub fn svg_string(series: &[(String, Vec<WorstPoint>)]) -> String {
    let positive = |p: &&WorstPoint| p.mean > 0.0;
    let all: Vec<&WorstPoint> = series.iter().flat_map(|(_, v)| v.iter()).filter(positive).collect();
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let (x0, x1, y0, y1) = (LEFT, W - RIGHT, H - BOTTOM, TOP);
    let _ = writeln!(
        out,
        r#"<path d="M{x0:.2} {y1:.2} L{x0:.2} {y0:.2} L{x1:.2} {y0:.2}" stroke="black" fill="none"/>"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">n (log scale)</text>"#,
        (x0 + x1) / 2.0,
        H - 15.0
    );
    let _ = writeln!(
        out,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">worst-candidate mean regret (log scale)</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );
    if !all.is_empty() {
        let lx = |n: usize| (n as f64).ln();
        let (mut nx0, mut nx1) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut ny0, mut ny1) = (f64::INFINITY, f64::NEG_INFINITY);
        for p in &all {
            nx0 = nx0.min(lx(p.n));
            nx1 = nx1.max(lx(p.n));
            ny0 = ny0.min(p.mean.ln());
            ny1 = ny1.max(p.mean.ln());
        }
        let span = |a: f64, b: f64| if b > a { b - a } else { 1.0 };
        let px = |n: usize| x0 + (lx(n) - nx0) / span(nx0, nx1) * (x1 - x0);
        let py = |m: f64| y0 - (m.ln() - ny0) / span(ny0, ny1) * (y0 - y1);

        let mut ns: Vec<usize> = all.iter().map(|p| p.n).collect();
        ns.sort_unstable();
        ns.dedup();
        for n in ns {
            let x = px(n);
            let _ = writeln!(out, r#"<line x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#, y0 + 5.0);
            let _ = writeln!(out, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{n}</text>"#, y0 + 20.0);
        }
        for v in [ny0.exp(), ny1.exp()] {
            let y = py(v);
            let _ = writeln!(out, r#"<line x1="{:.2}" y1="{y:.2}" x2="{x0:.2}" y2="{y:.2}" stroke="black"/>"#, x0 - 5.0);
            let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{v:.3e}</text>"#, x0 - 8.0, y + 4.0);
        }
        for (i, (name, pts)) in series.iter().enumerate() {
            let colour = PALETTE[i % PALETTE.len()];
            let drawn: Vec<String> =
                pts.iter().filter(positive).map(|p| format!("{:.2},{:.2}", px(p.n), py(p.mean))).collect();
            if !drawn.is_empty() {
                let _ = writeln!(
                    out,
                    r#"<polyline points="{}" stroke="{colour}" stroke-width="2" fill="none"/>"#,
                    drawn.join(" ")
                );
            }
            let dropped = pts.len() - drawn.len();
            let label = if dropped == 0 { name.clone() } else { format!("{name} ({dropped} pts <= 0)") };
            let ly = TOP + 10.0 + 20.0 * i as f64;
            let _ = writeln!(
                out,
                r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{colour}" stroke-width="2"/>"#,
                x1 + 15.0,
                x1 + 35.0
            );
            let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, x1 + 40.0, ly + 4.0, escape(&label));
        }
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn emit_svg(series: &[(String, Vec<WorstPoint>)], path: &Path) -> Result<()> {
    write(path, &svg_string(series))
}
