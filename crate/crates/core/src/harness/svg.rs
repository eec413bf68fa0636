use std::fmt::Write as _;
use std::path::Path;

use super::{LossField, RateFit};
use crate::error::{Error, Result};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 190.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

/// Theoretical rate through the largest-n median: `n^{-1/2}` for the RMSE
/// and average losses, `√(log n / n)` for the ℓ₂→∞ loss and `n^{1/2}` for
/// the operator-norm deviation. Returned as `(n, value)` at the fitted n.
pub fn reference_curve(fit: &RateFit) -> Vec<(f64, f64)> {
    let shape = |n: f64| match fit.field {
        LossField::Rmse | LossField::Avg => n.powf(-0.5),
        LossField::TwoInf => (n.ln() / n).sqrt(),
        LossField::OpnormDev => n.sqrt(),
    };
    let Some((&n_last, &m_last)) = fit.n.last().zip(fit.median.last()) else {
        return Vec::new();
    };
    let c = m_last / shape(n_last as f64);
    fit.n.iter().map(|&n| (n as f64, c * shape(n as f64))).collect()
}

struct Axes {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Axes {
    fn px(&self, n: f64) -> f64 {
        LEFT + (n.log10() - self.x0) / (self.x1 - self.x0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, v: f64) -> f64 {
        HEIGHT - BOTTOM - (v.log10() - self.y0) / (self.y1 - self.y0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn polyline(points: impl Iterator<Item = (f64, f64)>) -> String {
    let mut s = String::new();
    for (i, (x, y)) in points.enumerate() {
        if i > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{x:.2},{y:.2}");
    }
    s
}

/// Log-log plot with one polyline of medians per fit, its 10-90% band and a
/// dashed reference curve.
pub fn render_svg(fits: &[RateFit], title: &str) -> String {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for f in fits {
        xs.extend(f.n.iter().map(|&n| (n as f64).log10()));
        ys.extend(f.band_lo.iter().chain(&f.band_hi).filter(|v| **v > 0.0).map(|v| v.log10()));
        ys.extend(reference_curve(f).iter().map(|p| p.1.log10()));
    }
    let span = |v: &[f64]| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !lo.is_finite() {
            (0.0, 1.0)
        } else if hi - lo < 1e-9 {
            (lo - 0.5, hi + 0.5)
        } else {
            let pad = 0.05 * (hi - lo);
            (lo - pad, hi + pad)
        }
    };
    let (x0, x1) = span(&xs);
    let (y0, y1) = span(&ys);
    let ax = Axes { x0, x1, y0, y1 };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{LEFT}" y="18" font-size="14">{}</text>"#, escape(title));
    let (bx, by) = (LEFT, HEIGHT - BOTTOM);
    let _ = writeln!(
        s,
        r#"<path d="M{bx},{TOP} L{bx},{by} L{},{by}" fill="none" stroke="black"/>"#,
        WIDTH - RIGHT
    );

    let mut ticks: Vec<usize> = fits.iter().flat_map(|f| f.n.iter().copied()).collect();
    ticks.sort_unstable();
    ticks.dedup();
    for n in ticks {
        let x = ax.px(n as f64);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{by}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{n}</text>"#,
            by + 5.0,
            by + 20.0
        );
    }
    for e in (y0.ceil() as i32)..=(y1.floor() as i32) {
        let y = ax.py(10f64.powi(e));
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{bx}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">1e{e}</text>"#,
            bx - 5.0,
            bx - 8.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">n</text>"#,
        (LEFT + WIDTH - RIGHT) / 2.0,
        HEIGHT - 12.0
    );
    if let Some(f) = fits.first() {
        let _ = writeln!(
            s,
            r#"<text transform="translate(16,{:.2}) rotate(-90)" text-anchor="middle">{}</text>"#,
            (TOP + HEIGHT - BOTTOM) / 2.0,
            f.field.tag()
        );
    }

    for (i, f) in fits.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let upper = f.n.iter().zip(&f.band_hi).map(|(&n, &v)| (ax.px(n as f64), ax.py(v)));
        let lower = f.n.iter().zip(&f.band_lo).rev().map(|(&n, &v)| (ax.px(n as f64), ax.py(v)));
        if f.band_lo.iter().all(|&v| v > 0.0) {
            let _ = writeln!(
                s,
                r#"<polygon class="band" points="{}" fill="{color}" fill-opacity="0.18" stroke="none"/>"#,
                polyline(upper.chain(lower))
            );
        }
        let med = f.n.iter().zip(&f.median).map(|(&n, &v)| (ax.px(n as f64), ax.py(v)));
        let _ = writeln!(
            s,
            r#"<polyline class="median" points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            polyline(med)
        );
        let reference = reference_curve(f);
        let _ = writeln!(
            s,
            r#"<polyline class="reference" points="{}" fill="none" stroke="black" stroke-dasharray="6,4"/>"#,
            polyline(reference.iter().map(|&(n, v)| (ax.px(n), ax.py(v))))
        );
        let ly = TOP + 16.0 * i as f64 + 10.0;
        let lx = WIDTH - RIGHT + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{} (slope {:.3})</text>"#,
            lx + 18.0,
            lx + 22.0,
            ly + 4.0,
            escape(&f.group.label()),
            f.slope
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn emit_svg_plot(fits: &[RateFit], title: &str, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, render_svg(fits, title)).map_err(|e| Error::io(path, e))
}
