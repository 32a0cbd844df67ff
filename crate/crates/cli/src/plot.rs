//! Static SVG plots of reports: margin histograms and attached curves.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use bicomb::{PropertyReport, Series};

const W: f64 = 640.0;
const H: f64 = 400.0;
const PAD: f64 = 56.0;
const COLORS: [&str; 4] = ["#1f5fa8", "#c0392b", "#2e8b57", "#8e44ad"];

fn header(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\" text-anchor=\"middle\">{}</text>\n",
        W / 2.0,
        escape(title)
    )
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn range(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) =
        vals.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= f64::EPSILON * (1.0 + lo.abs()) {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

fn axes(svg: &mut String, x_label: &str, y_label: &str, (x0, x1): (f64, f64), (y0, y1): (f64, f64)) {
    let _ = writeln!(
        svg,
        "<g stroke=\"black\"><line x1=\"{PAD}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\"/><line x1=\"{PAD}\" y1=\"{PAD}\" x2=\"{PAD}\" y2=\"{b}\"/></g>",
        b = H - PAD,
        r = W - PAD / 2.0
    );
    let text = |svg: &mut String, x: f64, y: f64, anchor: &str, s: &str| {
        let _ = writeln!(
            svg,
            "<text x=\"{x:.1}\" y=\"{y:.1}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"{anchor}\">{}</text>",
            escape(s)
        );
    };
    text(svg, PAD, H - PAD + 16.0, "start", &format!("{x0:.3e}"));
    text(svg, W - PAD / 2.0, H - PAD + 16.0, "end", &format!("{x1:.3e}"));
    text(svg, PAD - 4.0, H - PAD, "end", &format!("{y0:.2e}"));
    text(svg, PAD - 4.0, PAD + 4.0, "end", &format!("{y1:.2e}"));
    text(svg, W / 2.0, H - 14.0, "middle", x_label);
    let _ = writeln!(
        svg,
        "<text x=\"14\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\" transform=\"rotate(-90 14 {:.1})\">{}</text>",
        H / 2.0,
        H / 2.0,
        escape(y_label)
    );
}

fn sx(x: f64, (x0, x1): (f64, f64)) -> f64 {
    PAD + (x - x0) / (x1 - x0) * (W - 1.5 * PAD)
}

fn sy(y: f64, (y0, y1): (f64, f64)) -> f64 {
    H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD)
}

/// Histogram of `rhs - lhs` margins; bars left of zero are violations.
pub fn histogram(title: &str, margins: &[f64], bins: usize) -> String {
    let xr = range(margins.iter().copied().chain([0.0]));
    let mut counts = vec![0usize; bins];
    for &m in margins.iter().filter(|m| m.is_finite()) {
        let k = (((m - xr.0) / (xr.1 - xr.0)) * bins as f64) as usize;
        counts[k.min(bins - 1)] += 1;
    }
    let yr = (0.0, *counts.iter().max().unwrap_or(&1).max(&1) as f64);
    let mut svg = header(title);
    axes(&mut svg, "margin (rhs - lhs)", "count", xr, yr);
    let width = (xr.1 - xr.0) / bins as f64;
    for (k, &c) in counts.iter().enumerate() {
        let left = xr.0 + k as f64 * width;
        let color = if left + width <= 0.0 { COLORS[1] } else { COLORS[0] };
        let (x, y) = (sx(left, xr), sy(c as f64, yr));
        let _ = writeln!(
            svg,
            "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{color}\"/>",
            (sx(left + width, xr) - x - 1.0).max(0.5),
            sy(0.0, yr) - y
        );
    }
    let zx = sx(0.0, xr);
    let _ = writeln!(
        svg,
        "<line x1=\"{zx:.2}\" y1=\"{PAD}\" x2=\"{zx:.2}\" y2=\"{}\" stroke=\"black\" stroke-dasharray=\"4 3\"/>",
        H - PAD
    );
    svg.push_str("</svg>\n");
    svg
}

/// Polylines of one or more series sharing axes; `log_x` plots log10 x.
pub fn line_chart(title: &str, series: &[&Series], log_x: bool) -> String {
    let tx = |x: f64| if log_x { x.log10() } else { x };
    let xr = range(series.iter().flat_map(|s| s.points.iter().map(|p| tx(p.0))));
    let yr = range(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
    let mut svg = header(title);
    let x_label = series.first().map(|s| s.x_label.clone()).unwrap_or_default();
    let y_label = series.iter().map(|s| s.y_label.as_str()).collect::<Vec<_>>().join(", ");
    axes(&mut svg, &if log_x { format!("log10 {x_label}") } else { x_label }, &y_label, xr, yr);
    for (i, s) in series.iter().enumerate() {
        let pts: Vec<String> = s
            .points
            .iter()
            .filter(|p| tx(p.0).is_finite() && p.1.is_finite())
            .map(|p| format!("{:.2},{:.2}", sx(tx(p.0), xr), sy(p.1, yr)))
            .collect();
        let color = COLORS[i % COLORS.len()];
        let _ = writeln!(
            svg,
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>",
            pts.join(" ")
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" fill=\"{color}\">{}</text>",
            W - PAD * 2.5,
            PAD + 14.0 * i as f64,
            escape(&s.label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn read_report(path: &Path) -> Result<PropertyReport> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("{} is not a report", path.display()))
}

/// Plot every report into `out`. All reports are parsed before anything is
/// written; any malformed report or an empty list is an error.
pub fn cmd(reports: &[PathBuf], out: &Path) -> Result<Vec<PathBuf>> {
    if reports.is_empty() {
        bail!("no reports given");
    }
    let parsed = reports.iter().map(|p| read_report(p).map(|r| (p, r))).collect::<Result<Vec<_>>>()?;
    fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
    let mut written = Vec::new();
    let mut emit = |name: String, body: String| -> Result<()> {
        let path = out.join(name);
        fs::write(&path, body).with_context(|| format!("cannot write {}", path.display()))?;
        written.push(path);
        Ok(())
    };
    for (path, rep) in parsed {
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("report").to_string();
        let title = format!("{} on {}", rep.check, rep.space);
        if !rep.margins.is_empty() {
            emit(format!("{stem}__hist.svg"), histogram(&title, &rep.margins, 40))?;
        }
        let positive_x = rep.series.iter().all(|s| s.points.iter().all(|p| p.0 > 0.0));
        if !rep.series.is_empty() && rep.series.iter().all(|s| s.x_label == "delta") && positive_x {
            let all: Vec<&Series> = rep.series.iter().collect();
            emit(format!("{stem}__constants.svg"), line_chart(&title, &all, true))?;
            continue;
        }
        for (i, s) in rep.series.iter().enumerate() {
            emit(format!("{stem}__curve_{i}.svg"), line_chart(&format!("{title}: {}", s.label), &[s], false))?;
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn histogram_marks_violations() {
        let svg = histogram("t", &[-1.0, 0.5, 1.0, 2.0], 4);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains(COLORS[1]));
    }

    #[test]
    fn chart_escapes_labels() {
        let s = Series {
            label: "a<b".into(),
            x_label: "t".into(),
            y_label: "y".into(),
            points: vec![(0.0, 1.0), (1.0, 2.0)],
        };
        let svg = line_chart("x & y", &[&s], false);
        assert!(svg.contains("a&lt;b") && svg.contains("x &amp; y"));
    }
}
