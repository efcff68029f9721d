use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::run::BenchResult;
use crate::error::{MkcError, Result};
use crate::kernel::MkcParams;
use crate::params::{median, robust_scale};

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Writes `summary.csv`, `runs.csv`, `convergence.csv`, `convergence.svg` and,
/// when an MMKCC arm ran, `density.svg` into `dir` (created if missing).
pub fn emit_report(result: &BenchResult, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| MkcError::io(dir, e))?;

    let mut summary = String::from("name,mean_rmse,std_rmse,mean_time_sec\n");
    for s in &result.summaries {
        writeln!(summary, "{},{},{},{}", s.criterion, s.mean_rmse, s.std_rmse, s.mean_time_sec).unwrap();
    }
    write(dir, "summary.csv", &summary)?;

    let mut runs = String::from("run,seed,criterion,rmse,iterations,time_sec\n");
    for r in &result.records {
        writeln!(runs, "{},{},{},{},{},{}", r.run, r.seed, r.criterion, r.rmse, r.iterations, r.time_sec).unwrap();
    }
    write(dir, "runs.csv", &runs)?;

    let rows = result.convergence();
    let mut conv = String::from("iteration,criterion,mean_rmse\n");
    for (i, c, v) in &rows {
        writeln!(conv, "{i},{c},{v}").unwrap();
    }
    write(dir, "convergence.csv", &conv)?;

    let series: Vec<(String, Vec<(f64, f64)>)> = result
        .criteria
        .iter()
        .map(|c| {
            let pts = rows
                .iter()
                .filter(|(_, rc, _)| rc == c)
                .map(|(i, _, v)| (*i as f64, *v))
                .collect();
            (c.to_string(), pts)
        })
        .collect();
    write(dir, "convergence.svg", &line_plot_svg("Mean RMSE per iteration", "iteration", "RMSE", &series))?;

    if let Some(d) = &result.density {
        write(dir, "density.svg", &histogram_svg("Errors and fitted multi-Gaussian", &d.errors, &d.params, 60))?;
    }
    Ok(())
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| MkcError::io(path, e))
}

struct Frame {
    width: f64,
    height: f64,
    left: f64,
    right: f64,
    top: f64,
    bottom: f64,
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn new(x: (f64, f64), y: (f64, f64)) -> Self {
        let widen = |(lo, hi): (f64, f64)| if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
        Frame {
            width: 640.0,
            height: 400.0,
            left: 70.0,
            right: 20.0,
            top: 40.0,
            bottom: 50.0,
            x: widen(x),
            y: widen(y),
        }
    }

    fn px(&self, x: f64) -> f64 {
        self.left + (x - self.x.0) / (self.x.1 - self.x.0) * (self.width - self.left - self.right)
    }

    fn py(&self, y: f64) -> f64 {
        self.height - self.bottom - (y - self.y.0) / (self.y.1 - self.y.0) * (self.height - self.top - self.bottom)
    }

    fn open(&self, title: &str, xlabel: &str, ylabel: &str) -> String {
        let mut s = String::new();
        writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#,
            w = self.width,
            h = self.height
        )
        .unwrap();
        writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
        writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, self.width / 2.0, escape(title)).unwrap();
        let (x0, x1, y0, y1) = (self.left, self.width - self.right, self.top, self.height - self.bottom);
        writeln!(s, r#"<path d="M{x0},{y0} L{x0},{y1} L{x1},{y1}" fill="none" stroke="black"/>"#).unwrap();
        for (v, anchor) in [(self.x.0, x0), (self.x.1, x1)] {
            writeln!(s, r#"<text x="{anchor:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, y1 + 16.0, tick(v)).unwrap();
        }
        for (v, anchor) in [(self.y.0, y1), (self.y.1, y0)] {
            writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#, x0 - 6.0, anchor + 4.0, tick(v)).unwrap();
        }
        writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, (x0 + x1) / 2.0, self.height - 12.0, escape(xlabel)).unwrap();
        writeln!(
            s,
            r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
            (y0 + y1) / 2.0,
            (y0 + y1) / 2.0,
            escape(ylabel)
        )
        .unwrap();
        s
    }

    fn polyline(&self, pts: &[(f64, f64)], color: &str) -> String {
        let coords: Vec<String> = pts
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", self.px(x), self.py(y)))
            .collect();
        format!(r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, coords.join(" ")) + "\n"
    }
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// Line plot with one polyline and legend entry per series.
pub fn line_plot_svg(title: &str, xlabel: &str, ylabel: &str, series: &[(String, Vec<(f64, f64)>)]) -> String {
    let all = || series.iter().flat_map(|(_, p)| p.iter());
    let (mut xr, mut yr) = (bounds(all().map(|p| p.0)), bounds(all().map(|p| p.1)));
    if !xr.0.is_finite() {
        xr = (0.0, 1.0);
        yr = (0.0, 1.0);
    }
    yr.0 = yr.0.min(0.0);
    let frame = Frame::new(xr, yr);
    let mut s = frame.open(title, xlabel, ylabel);
    for (k, (name, pts)) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        if pts.len() > 1 {
            s += &frame.polyline(pts, color);
        } else if let Some(&(x, y)) = pts.first() {
            writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, frame.px(x), frame.py(y)).unwrap();
        }
        let ly = frame.top + 14.0 * k as f64;
        let lx = frame.width - frame.right - 110.0;
        writeln!(s, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, lx + 20.0).unwrap();
        writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, lx + 26.0, ly + 4.0, escape(name)).unwrap();
    }
    s += "</svg>\n";
    s
}

/// Density-normalized histogram of `errors` with the curve of `params`
/// overlaid. The range covers the median plus or minus six robust scale
/// units, so far outliers fall outside the plot.
pub fn histogram_svg(title: &str, errors: &[f64], params: &MkcParams, bins: usize) -> String {
    let bins = bins.max(1);
    let center = median(errors);
    let mut half = 6.0 * robust_scale(errors);
    if !(half > 0.0 && half.is_finite()) {
        half = 1.0;
    }
    let (lo, hi) = if center.is_finite() { (center - half, center + half) } else { (-1.0, 1.0) };
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &e in errors {
        if e >= lo && e < hi {
            counts[(((e - lo) / width) as usize).min(bins - 1)] += 1;
        }
    }
    let total = errors.len().max(1) as f64;
    let heights: Vec<f64> = counts.iter().map(|&c| c as f64 / (total * width)).collect();
    let curve: Vec<(f64, f64)> = (0..=400)
        .map(|i| {
            let x = lo + (hi - lo) * i as f64 / 400.0;
            (x, params.density(x))
        })
        .collect();
    let ymax = heights.iter().copied().chain(curve.iter().map(|p| p.1)).fold(0.0, f64::max);
    let ymin = curve.iter().map(|p| p.1).fold(0.0, f64::min);
    let frame = Frame::new((lo, hi), (ymin, ymax));
    let mut s = frame.open(title, "error", "density");
    for (b, &h) in heights.iter().enumerate() {
        let x0 = frame.px(lo + b as f64 * width);
        let x1 = frame.px(lo + (b + 1) as f64 * width);
        let (ytop, ybase) = (frame.py(h), frame.py(0.0));
        writeln!(
            s,
            r##"<rect x="{x0:.2}" y="{ytop:.2}" width="{:.2}" height="{:.2}" fill="#c7d7ea" stroke="#7f9fc0"/>"##,
            x1 - x0,
            ybase - ytop
        )
        .unwrap();
    }
    s += &frame.polyline(&curve, PALETTE[1]);
    s += "</svg>\n";
    s
}
