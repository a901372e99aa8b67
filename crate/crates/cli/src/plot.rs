//! SVG rendering of tail and scan tables. Pure functions of their input: coordinates are
//! printed with fixed precision so identical tables give identical bytes.

use std::fmt::Write;

use hexloop::couplings::{critical_x_conjectured, epsilon_of};

use crate::tables::{ScanRow, TailRow};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn header(svg: &mut String, title: &str, x_label: &str, y_label: &str, frame: &Frame) {
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{:.1}" y="18" text-anchor="middle">{title}</text>"#, WIDTH / 2.0);
    let (l, r, t, b) = (LEFT, WIDTH - RIGHT, TOP, HEIGHT - BOTTOM);
    let _ = writeln!(svg, r#"<rect class="axes" x="{l:.1}" y="{t:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="black"/>"#, r - l, b - t);
    for i in 0..=4 {
        let fx = frame.x0 + (frame.x1 - frame.x0) * i as f64 / 4.0;
        let fy = frame.y0 + (frame.y1 - frame.y0) * i as f64 / 4.0;
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{fx:.3}</text>"#, frame.px(fx), b + 16.0);
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{fy:.3}</text>"#, l - 6.0, frame.py(fy) + 4.0);
    }
    let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{x_label}</text>"#, (l + r) / 2.0, HEIGHT - 10.0);
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{y_label}</text>"#,
        (t + b) / 2.0,
        (t + b) / 2.0
    );
}

/// Unweighted least squares y = a + b k.
fn line_fit(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let b = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx;
    Some((my - b * mx, b))
}

/// Semilog plot of log10 P(stat ≥ k) with a least-squares line.
pub fn tail_svg(rows: &[TailRow]) -> String {
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.estimate > 0.0)
        .map(|r| (r.k as f64, r.estimate.log10()))
        .collect();
    let k_max = rows.iter().map(|r| r.k).max().unwrap_or(1).max(1) as f64;
    let y_min = points.iter().map(|p| p.1).fold(0.0f64, f64::min).floor().min(-1.0);
    let frame = Frame { x0: 0.0, x1: k_max, y0: y_min, y1: 0.0 };
    let mut svg = String::new();
    header(&mut svg, "tail P(stat >= k)", "k", "log10 P", &frame);
    for (k, y) in &points {
        let _ = writeln!(svg, r##"<circle class="point" cx="{:.2}" cy="{:.2}" r="3" fill="#1f4e99"/>"##, frame.px(*k), frame.py(*y));
    }
    if let Some((a, b)) = line_fit(&points) {
        let (k0, k1) = (points[0].0, points[points.len() - 1].0);
        let _ = writeln!(
            svg,
            r##"<line class="fit" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#c0392b" stroke-width="1.5"/>"##,
            frame.px(k0),
            frame.py((a + b * k0).clamp(y_min, 0.0)),
            frame.px(k1),
            frame.py((a + b * k1).clamp(y_min, 0.0))
        );
        let _ = writeln!(svg, r#"<text class="slope" x="{:.1}" y="{:.1}" text-anchor="end">slope {:.4} per k (log10)</text>"#, WIDTH - RIGHT - 6.0, TOP + 16.0, b);
    }
    svg.push_str("</svg>\n");
    svg
}

fn color_for(c: Option<f64>, c_max: f64) -> String {
    match c {
        Some(c) if c_max > 0.0 => {
            let t = (c / c_max).clamp(0.0, 1.0);
            let r = (255.0 * (1.0 - t)).round() as u8;
            let b = (255.0 * t).round() as u8;
            format!("#{r:02x}40{b:02x}")
        }
        _ => "#999999".to_string(),
    }
}

fn polyline(svg: &mut String, name: &str, color: &str, pts: &[(f64, f64)], frame: &Frame) {
    let coords: Vec<String> = pts.iter().map(|(a, b)| format!("{:.2},{:.2}", frame.px(*a), frame.py(*b))).collect();
    let _ = writeln!(
        svg,
        r#"<polyline class="curve" data-name="{name}" points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
        coords.join(" ")
    );
}

/// (n, x) markers coloured by fitted rate, with x = 1/√3, x = 1/√3 + ε(n) and x_c(n).
pub fn scan_svg(rows: &[ScanRow]) -> String {
    let n_max = rows.iter().map(|r| r.n).fold(2.0f64, f64::max) + 0.1;
    let frame = Frame { x0: 1.0, x1: n_max, y0: 0.0, y1: 1.0 };
    let c_max = rows.iter().filter_map(|r| r.c).fold(0.0f64, f64::max);
    let mut svg = String::new();
    header(&mut svg, "fitted decay rate over (n, x)", "n", "x", &frame);
    const SAMPLES: usize = 64;
    let inv_sqrt3 = 1.0 / 3f64.sqrt();
    polyline(&mut svg, "inv_sqrt3", "#555555", &[(frame.x0, inv_sqrt3), (frame.x1, inv_sqrt3)], &frame);
    let grid = |lo: f64, hi: f64| (0..=SAMPLES).map(move |i| lo + (hi - lo) * i as f64 / SAMPLES as f64);
    let eps: Vec<(f64, f64)> = grid(frame.x0 + 1e-3, frame.x1)
        .filter_map(|n| epsilon_of(n).ok().map(|e| (n, (inv_sqrt3 + e).min(1.0))))
        .collect();
    polyline(&mut svg, "threshold", "#2e8b57", &eps, &frame);
    let xc: Vec<(f64, f64)> = grid(frame.x0, 2.0)
        .filter_map(|n| critical_x_conjectured(n).ok().map(|x| (n, x)))
        .collect();
    polyline(&mut svg, "x_c", "#8e44ad", &xc, &frame);
    for r in rows {
        let _ = writeln!(
            svg,
            r#"<circle class="marker" cx="{:.2}" cy="{:.2}" r="5" fill="{}" stroke="black"><title>n={} x={} c={}</title></circle>"#,
            frame.px(r.n),
            frame.py(r.x),
            color_for(r.c, c_max),
            r.n,
            r.x,
            r.c.map_or("none".to_string(), |c| format!("{c:.4}"))
        );
    }
    svg.push_str("</svg>\n");
    svg
}
