//! Ternary diagram of three-currency scores.

use std::fmt::Write;

use crate::analysis::require_ternary;
use crate::dynamics::{Currency, ScoreVector};
use crate::error::Result;

/// Blue, gold, red for the three-currency case.
pub const TERNARY_PALETTE: [&str; 3] = ["#1f4e9c", "#d4a017", "#c0392b"];

/// Categorical palette used when more than three currencies are reported.
pub const CATEGORICAL_PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

pub fn currency_color(k: usize, c: Currency) -> &'static str {
    if k == 3 {
        TERNARY_PALETTE[c.id()]
    } else {
        CATEGORICAL_PALETTE[c.id() % CATEGORICAL_PALETTE.len()]
    }
}

const WIDTH: f64 = 600.0;
const HEIGHT: f64 = 560.0;
const MARGIN: f64 = 60.0;

/// Vertices: currency 0 at the apex, 1 bottom left, 2 bottom right. Lines of
/// constant score of currency 0 are horizontal.
fn vertices() -> [(f64, f64); 3] {
    let side = WIDTH - 2.0 * MARGIN;
    let h = side * 3f64.sqrt() / 2.0;
    let bottom = MARGIN + h;
    [
        (WIDTH / 2.0, MARGIN),
        (MARGIN, bottom),
        (WIDTH - MARGIN, bottom),
    ]
}

/// Barycentric to canvas coordinates.
pub fn ternary_point(z: &[f64]) -> (f64, f64) {
    let v = vertices();
    let x = z[0] * v[0].0 + z[1] * v[1].0 + z[2] * v[2].0;
    let y = z[0] * v[0].1 + z[1] * v[1].1 + z[2] * v[2].1;
    (x, y)
}

pub struct TernaryRow<'a> {
    pub code: &'a str,
    pub scores: &'a ScoreVector,
    pub tcp: Currency,
}

/// One circle per country with defined scores, colored by its TCP.
pub fn render_ternary(rows: &[TernaryRow<'_>], currencies: &[String]) -> Result<String> {
    require_ternary(currencies.len())?;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let v = vertices();

    for step in 1..10 {
        let t = step as f64 / 10.0;
        for axis in 0..3 {
            // line of constant score t on `axis`
            let (a, b) = ((axis + 1) % 3, (axis + 2) % 3);
            let mut p = [0.0; 3];
            let mut q = [0.0; 3];
            p[axis] = t;
            p[a] = 1.0 - t;
            q[axis] = t;
            q[b] = 1.0 - t;
            let (x1, y1) = ternary_point(&p);
            let (x2, y2) = ternary_point(&q);
            let _ = writeln!(
                s,
                r#"<line x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}" stroke="{}" stroke-opacity="0.35" stroke-dasharray="4 3" stroke-width="0.8"/>"#,
                TERNARY_PALETTE[axis]
            );
        }
    }
    let _ = writeln!(
        s,
        r#"<polygon points="{:.3},{:.3} {:.3},{:.3} {:.3},{:.3}" fill="none" stroke="black" stroke-width="1.5"/>"#,
        v[0].0, v[0].1, v[1].0, v[1].1, v[2].0, v[2].1
    );
    let label_pos = [
        (v[0].0, v[0].1 - 14.0),
        (v[1].0 - 10.0, v[1].1 + 24.0),
        (v[2].0 + 10.0, v[2].1 + 24.0),
    ];
    for (i, (x, y)) in label_pos.iter().enumerate() {
        let _ = writeln!(
            s,
            r#"<text x="{x:.3}" y="{y:.3}" text-anchor="middle" font-family="sans-serif" font-size="16" fill="{}">Z {}</text>"#,
            TERNARY_PALETTE[i],
            xml_escape(&currencies[i])
        );
    }
    for row in rows.iter().filter(|r| r.scores.defined) {
        let (x, y) = ternary_point(&row.scores.z);
        let _ = writeln!(
            s,
            r#"<circle cx="{x:.3}" cy="{y:.3}" r="4" fill="{}" fill-opacity="0.8" stroke="black" stroke-width="0.4"><title>{}</title></circle>"#,
            currency_color(3, row.tcp),
            xml_escape(row.code)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn xml_escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vertices_and_centroid() {
        let v = vertices();
        assert_eq!(ternary_point(&[1.0, 0.0, 0.0]), v[0]);
        assert_eq!(ternary_point(&[0.0, 1.0, 0.0]), v[1]);
        let (x, y) = ternary_point(&[1.0 / 3.0; 3]);
        let cx = (v[0].0 + v[1].0 + v[2].0) / 3.0;
        let cy = (v[0].1 + v[1].1 + v[2].1) / 3.0;
        assert!((x - cx).abs() < 1e-9 && (y - cy).abs() < 1e-9);
    }

    #[test]
    fn constant_first_score_is_horizontal() {
        let (_, y1) = ternary_point(&[0.4, 0.6, 0.0]);
        let (_, y2) = ternary_point(&[0.4, 0.1, 0.5]);
        assert!((y1 - y2).abs() < 1e-9);
    }

    #[test]
    fn renders_deterministically_and_rejects_other_k() {
        let z = ScoreVector {
            z: vec![0.2, 0.3, 0.5],
            defined: true,
        };
        let undefined = ScoreVector {
            z: vec![0.0; 3],
            defined: false,
        };
        let rows = [
            TernaryRow {
                code: "FR",
                scores: &z,
                tcp: Currency(2),
            },
            TernaryRow {
                code: "XX",
                scores: &undefined,
                tcp: Currency(0),
            },
        ];
        let cur: Vec<String> = ["USD", "EUR", "BRI"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let a = render_ternary(&rows, &cur).unwrap();
        assert_eq!(a, render_ternary(&rows, &cur).unwrap());
        assert_eq!(a.matches("<circle").count(), 1);
        assert!(a.contains("#c0392b"));
        assert!(render_ternary(&rows, &cur[..2]).is_err());
    }
}
