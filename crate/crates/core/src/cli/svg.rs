//! Minimal SVG emitters: line plots, class heatmaps and curve overlays.

use std::fmt::Write;

use crate::bifurcation::{BifurcationCurve, SweepGrid, XbarClass};

const W: f64 = 640.0;
const H: f64 = 480.0;
const MARGIN: f64 = 56.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn new(x: (f64, f64), y: (f64, f64)) -> Self {
        let pad = |(lo, hi): (f64, f64)| if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
        Self { x: pad(x), y: pad(y) }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x.0) / (self.x.1 - self.x.0) * (W - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        H - MARGIN - (y - self.y.0) / (self.y.1 - self.y.0) * (H - 2.0 * MARGIN)
    }

    fn open(&self, title: &str, xlabel: &str, ylabel: &str) -> String {
        let mut s = format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n\
             <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
             <text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">{}</text>\n",
            W / 2.0,
            escape(title)
        );
        let _ = write!(
            s,
            "<rect x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
            W - 2.0 * MARGIN,
            H - 2.0 * MARGIN
        );
        let label = |s: &mut String, x: f64, y: f64, anchor: &str, text: String| {
            let _ = writeln!(
                s,
                "<text x=\"{x:.1}\" y=\"{y:.1}\" text-anchor=\"{anchor}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>",
                escape(&text)
            );
        };
        label(&mut s, MARGIN, H - MARGIN + 16.0, "start", format!("{:.3}", self.x.0));
        label(&mut s, W - MARGIN, H - MARGIN + 16.0, "end", format!("{:.3}", self.x.1));
        label(&mut s, W / 2.0, H - 12.0, "middle", xlabel.to_string());
        label(&mut s, MARGIN - 6.0, H - MARGIN, "end", format!("{:.3}", self.y.0));
        label(&mut s, MARGIN - 6.0, MARGIN + 10.0, "end", format!("{:.3}", self.y.1));
        label(&mut s, 14.0, H / 2.0, "middle", ylabel.to_string());
        s
    }

    fn polyline(&self, pts: impl Iterator<Item = (f64, f64)>, color: &str, dashed: bool) -> String {
        let coords: Vec<String> = pts
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|(x, y)| format!("{:.2},{:.2}", self.px(x), self.py(y)))
            .collect();
        format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"{} points=\"{}\"/>\n",
            if dashed { " stroke-dasharray=\"6 4\"" } else { "" },
            coords.join(" ")
        )
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

fn legend(s: &mut String, i: usize, name: &str, color: &str) {
    let y = MARGIN + 16.0 + 14.0 * i as f64;
    let _ = writeln!(
        s,
        "<text x=\"{:.1}\" y=\"{y:.1}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" fill=\"{color}\">{}</text>",
        W - MARGIN - 6.0,
        escape(name)
    );
}

/// Several series against a shared abscissa.
pub fn line_plot(title: &str, xlabel: &str, xs: &[f64], series: &[(&str, Vec<f64>)]) -> String {
    let xb = bounds(xs.iter().copied());
    let yb = bounds(series.iter().flat_map(|(_, v)| v.iter().copied()));
    let frame = Frame::new(xb, yb);
    let mut s = frame.open(title, xlabel, "");
    for (k, (name, ys)) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        s.push_str(&frame.polyline(xs.iter().copied().zip(ys.iter().copied()), color, false));
        legend(&mut s, k, name, color);
    }
    s.push_str("</svg>\n");
    s
}

pub fn class_color(c: XbarClass) -> &'static str {
    match c {
        XbarClass::Trivial => "#b7e4a7",
        XbarClass::Equilibrium => "#2e7d32",
        XbarClass::Cycle => "#f39c34",
        XbarClass::Divergent => "#9e9e9e",
    }
}

/// Cells of a sweep coloured by class.
pub fn heatmap(grid: &SweepGrid, classes: &[XbarClass]) -> String {
    let frame = Frame::new((grid.p_axis.lo, grid.p_axis.hi), (grid.r_axis.lo, grid.r_axis.hi));
    let mut s = frame.open("x-bar classes", "p", "r");
    let dp = (grid.p_axis.hi - grid.p_axis.lo) / grid.p_axis.n as f64;
    let dr = (grid.r_axis.hi - grid.r_axis.lo) / grid.r_axis.n as f64;
    for j in 0..grid.r_axis.n {
        for i in 0..grid.p_axis.n {
            let (p, r) = grid.p_r(i, j);
            let (x0, x1) = (frame.px(p - dp), frame.px(p));
            let (y0, y1) = (frame.py(r), frame.py(r - dr));
            let _ = writeln!(
                s,
                "<rect x=\"{x0:.2}\" y=\"{y0:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\"/>",
                x1 - x0,
                y1 - y0,
                class_color(classes[grid.index(i, j)])
            );
        }
    }
    let names = [
        (XbarClass::Trivial, "trivial"),
        (XbarClass::Equilibrium, "equilibrium"),
        (XbarClass::Cycle, "cycle"),
        (XbarClass::Divergent, "divergent"),
    ];
    for (k, (c, name)) in names.iter().enumerate() {
        legend(&mut s, k, name, class_color(*c));
    }
    s.push_str("</svg>\n");
    s
}

/// Curves in the `(p, r)` plane; traced curves are drawn dashed.
pub fn curves_plot(title: &str, curves: &[BifurcationCurve]) -> String {
    let xb = bounds(curves.iter().flat_map(|c| c.points.iter().map(|p| p.0)));
    let yb = bounds(curves.iter().flat_map(|c| c.points.iter().map(|p| p.1)));
    let frame = Frame::new(xb, yb);
    let mut s = frame.open(title, "p", "r");
    for (k, c) in curves.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let dashed = c.provenance == crate::bifurcation::Provenance::Traced;
        s.push_str(&frame.polyline(c.points.iter().copied(), color, dashed));
        legend(&mut s, k, &format!("{} ({})", c.name, c.kind.as_str()), color);
    }
    s.push_str("</svg>\n");
    s
}
