//! Top-down SVG scatter of landmark positions.

use std::fmt::Write as _;

use crate::io::MapFile;
use crate::landmarks::Verdict;

const SIZE: f64 = 600.0;
const PAD: f64 = 60.0;
pub const LANDMARK_COLOR: &str = "#1f4fff";
pub const OTHER_COLOR: &str = "#ff6fb1";
const UNKNOWN_COLOR: &str = "#888888";

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c if (c as u32) < 0x20 && c != '\t' && c != '\n' => {}
            c => out.push(c),
        }
    }
    out
}

/// World x to the right, world z upward. Landmarks blue, other records pink,
/// undistilled grey.
pub fn render_map_svg(map: &MapFile) -> String {
    let points: Vec<(f64, f64, String, Verdict)> = map
        .landmarks
        .iter()
        .filter_map(|lm| {
            let p = lm.position?;
            let label = lm
                .canonical_name
                .clone()
                .unwrap_or_else(|| format!("class {}", lm.class_id));
            Some((p.x, p.z, label, lm.verdict))
        })
        .collect();

    let (mut x0, mut x1, mut z0, mut z1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (x, z, _, _) in &points {
        x0 = x0.min(*x);
        x1 = x1.max(*x);
        z0 = z0.min(*z);
        z1 = z1.max(*z);
    }
    if points.is_empty() {
        (x0, x1, z0, z1) = (-1.0, 1.0, -1.0, 1.0);
    }
    let span = (x1 - x0).max(z1 - z0).max(1e-6);
    let scale = (SIZE - 2.0 * PAD) / span;
    let to_px = |x: f64, z: f64| (PAD + (x - x0) * scale, SIZE - PAD - (z - z0) * scale);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}" font-family="sans-serif" font-size="13">"#
    );
    let _ = writeln!(s, r#"  <rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"  <text x="10" y="20">top view: x right, z up ({} positions)</text>"#, points.len());
    for (x, z, label, verdict) in &points {
        let (px, py) = to_px(*x, *z);
        let color = match verdict {
            Verdict::Landmark => LANDMARK_COLOR,
            Verdict::NotLandmark => OTHER_COLOR,
            Verdict::Unknown => UNKNOWN_COLOR,
        };
        let _ = writeln!(s, r#"  <circle cx="{px:.2}" cy="{py:.2}" r="5" fill="{color}"/>"#);
        let _ = writeln!(
            s,
            r#"  <text x="{:.2}" y="{:.2}" fill="{color}">{}</text>"#,
            px + 8.0,
            py + 4.0,
            escape(label)
        );
    }
    s.push_str("</svg>\n");
    s
}
