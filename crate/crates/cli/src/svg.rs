//! Minimal static SVG line charts. Every plotted point carries its series
//! name and the raw x and y strings from the table it came from.

use std::fmt::Write;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;
const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

pub struct Series {
    pub name: String,
    /// Raw (x, y) fields as they appear in the CSV.
    pub points: Vec<(String, String)>,
}

pub struct LineChart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    /// Draw as right-continuous steps instead of straight segments.
    pub step: bool,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn parse(p: &(String, String)) -> Option<(f64, f64)> {
    let x = p.0.parse::<f64>().ok()?;
    let y = p.1.parse::<f64>().ok()?;
    (x.is_finite() && y.is_finite()).then_some((x, y))
}

fn span(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

impl LineChart {
    pub fn render(&self) -> String {
        let pts: Vec<(f64, f64)> = self.series.iter().flat_map(|s| s.points.iter().filter_map(parse)).collect();
        let fold = |f: fn(&(f64, f64)) -> f64| {
            pts.iter()
                .map(f)
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
        };
        let (x0, x1) = if pts.is_empty() { (0.0, 1.0) } else { span(fold(|p| p.0).0, fold(|p| p.0).1) };
        let (y0, y1) = if pts.is_empty() { (0.0, 1.0) } else { span(fold(|p| p.1).0, fold(|p| p.1).1) };
        let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
        let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(out, r#"<text x="{}" y="24" text-anchor="middle" font-size="16">{}</text>"#, WIDTH / 2.0, escape(&self.title));
        let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
        let _ = writeln!(out, r#"<path d="M{l},{t} L{l},{b} L{r},{b}" fill="none" stroke="black"/>"#);
        for (v, anchor_y) in [(x0, b + 16.0), (x1, b + 16.0)] {
            let _ = writeln!(out, r#"<text x="{}" y="{anchor_y}" text-anchor="middle">{}</text>"#, sx(v), tick(v));
        }
        for v in [y0, y1] {
            let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, l - 4.0, sy(v) + 4.0, tick(v));
        }
        let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, WIDTH / 2.0, HEIGHT - 16.0, escape(&self.x_label));
        let _ = writeln!(
            out,
            r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            escape(&self.y_label)
        );

        for (k, s) in self.series.iter().enumerate() {
            let color = PALETTE[k % PALETTE.len()];
            let name = escape(&s.name);
            let _ = writeln!(out, r#"<g class="series" data-series="{name}" stroke="{color}" fill="{color}">"#);
            let coords: Vec<(f64, f64)> = s.points.iter().filter_map(parse).map(|(x, y)| (sx(x), sy(y))).collect();
            if coords.len() > 1 {
                let mut d = format!("M{:.2},{:.2}", coords[0].0, coords[0].1);
                for w in coords.windows(2) {
                    if self.step {
                        let _ = write!(d, " L{:.2},{:.2}", w[1].0, w[0].1);
                    }
                    let _ = write!(d, " L{:.2},{:.2}", w[1].0, w[1].1);
                }
                let _ = writeln!(out, r#"<path d="{d}" fill="none" stroke-width="1.5"/>"#);
            }
            for p in &s.points {
                if let Some((x, y)) = parse(p) {
                    let _ = writeln!(
                        out,
                        r#"<circle class="point" cx="{:.2}" cy="{:.2}" r="2" data-series="{name}" data-x="{}" data-y="{}"/>"#,
                        sx(x),
                        sy(y),
                        escape(&p.0),
                        escape(&p.1)
                    );
                }
            }
            let _ = writeln!(out, "</g>");
            let ly = MARGIN + 14.0 * k as f64;
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{ly}" fill="{color}" text-anchor="end">{name}</text>"#,
                WIDTH - MARGIN
            );
        }
        out.push_str("</svg>\n");
        out
    }
}

fn tick(v: f64) -> String {
    if v.abs() >= 1000.0 || v == v.trunc() {
        format!("{v:.0}")
    } else {
        format!("{v:.3}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_keep_raw_fields() {
        let chart = LineChart {
            title: "t <1>".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            series: vec![Series {
                name: "a&b".into(),
                points: vec![("1".into(), "0.1".into()), ("2".into(), "".into()), ("3".into(), "2.5e-3".into())],
            }],
            step: true,
        };
        let svg = chart.render();
        assert_eq!(svg.matches("class=\"point\"").count(), 2);
        assert!(svg.contains(r#"data-series="a&amp;b" data-x="3" data-y="2.5e-3""#));
        assert!(svg.contains("t &lt;1&gt;"));
    }
}
