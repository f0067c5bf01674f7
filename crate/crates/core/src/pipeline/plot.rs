use std::fmt::Write as _;

const PANEL: f64 = 300.0;
const MARGIN: f64 = 40.0;

fn bounds(front: &[Vec<f64>], k: usize) -> (f64, f64) {
    let lo = front.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min);
    let hi = front.iter().map(|p| p[k]).fold(f64::NEG_INFINITY, f64::max);
    if hi > lo {
        (lo, hi)
    } else {
        (lo - 1.0, hi + 1.0)
    }
}

/// Scatter plots of every pair of objectives, side by side, as SVG.
pub fn front_svg(front: &[Vec<f64>]) -> String {
    let k = front.first().map_or(0, Vec::len);
    let pairs: Vec<(usize, usize)> = (0..k)
        .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
        .collect();
    let cell = PANEL + 2.0 * MARGIN;
    let width = cell * pairs.len().max(1) as f64;
    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{cell:.0}" font-family="sans-serif" font-size="11">"#
    )
    .unwrap();
    writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    for (panel, &(a, b)) in pairs.iter().enumerate() {
        let ox = panel as f64 * cell + MARGIN;
        let oy = MARGIN;
        let (xa, xb) = bounds(front, a);
        let (ya, yb) = bounds(front, b);
        writeln!(
            svg,
            r#"<rect x="{ox:.1}" y="{oy:.1}" width="{PANEL:.1}" height="{PANEL:.1}" fill="none" stroke="black"/>"#
        )
        .unwrap();
        writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">C{}</text>"#,
            ox + PANEL / 2.0,
            oy + PANEL + 28.0,
            a + 1
        )
        .unwrap();
        writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" transform="rotate(-90 {:.1} {:.1})">C{}</text>"#,
            ox - 24.0,
            oy + PANEL / 2.0,
            ox - 24.0,
            oy + PANEL / 2.0,
            b + 1
        )
        .unwrap();
        for (v, x, anchor) in [(xa, ox, "start"), (xb, ox + PANEL, "end")] {
            writeln!(
                svg,
                r#"<text x="{x:.1}" y="{:.1}" text-anchor="{anchor}">{v:.4}</text>"#,
                oy + PANEL + 14.0
            )
            .unwrap();
        }
        for (v, y) in [(ya, oy + PANEL), (yb, oy + 10.0)] {
            writeln!(
                svg,
                r#"<text x="{:.1}" y="{y:.1}" text-anchor="end">{v:.4}</text>"#,
                ox - 4.0
            )
            .unwrap();
        }
        for p in front {
            let px = ox + (p[a] - xa) / (xb - xa) * PANEL;
            let py = oy + PANEL - (p[b] - ya) / (yb - ya) * PANEL;
            writeln!(
                svg,
                r#"<circle cx="{px:.2}" cy="{py:.2}" r="2.5" fill="steelblue"/>"#
            )
            .unwrap();
        }
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_panel_per_pair() {
        let front = vec![vec![1.0, 2.0, 3.0], vec![3.0, 2.0, 1.0]];
        let svg = front_svg(&front);
        assert_eq!(svg.matches("fill=\"none\"").count(), 3);
        assert_eq!(svg.matches("<circle").count(), 6);
        assert_eq!(svg, front_svg(&front));
    }
}
