//! SVG scatter of `λ_G` against `λ_D` for sweep results.

use std::fmt::Write as _;

use crate::sweep::{Phase, SweepRow};

#[derive(Debug, Clone, PartialEq)]
pub struct PlotOptions {
    pub width: f64,
    pub height: f64,
    /// Outline the convex hull of all plotted points.
    pub hull: bool,
    pub title: Option<String>,
}

impl Default for PlotOptions {
    fn default() -> Self {
        PlotOptions {
            width: 640.0,
            height: 560.0,
            hull: true,
            title: None,
        }
    }
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Convex hull by Andrew's monotone chain, counter-clockwise from the
/// lowest-leftmost point. Collinear boundary points are dropped.
pub fn convex_hull(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|p| p.0.is_finite() && p.1.is_finite())
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<(f64, f64)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(f64, f64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

struct Frame {
    left: f64,
    top: f64,
    plot_w: f64,
    plot_h: f64,
    x_max: f64,
    y_max: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        self.left + v / self.x_max * self.plot_w
    }

    fn y(&self, v: f64) -> f64 {
        self.top + self.plot_h - v / self.y_max * self.plot_h
    }
}

fn axis_max(values: impl Iterator<Item = f64>) -> f64 {
    let m = values.fold(1.0f64, f64::max);
    (m * 1.05 / 0.5).ceil() * 0.5
}

fn style(phase: Phase) -> (&'static str, &'static str) {
    match phase {
        Phase::Fec => ("#2a9d3f", "FEC"),
        Phase::Bcs => ("#d4a017", "BCS"),
        Phase::Ec => ("#1f5fbf", "EC"),
        Phase::None => ("#808080", "NONE"),
    }
}

fn marker(out: &mut String, phase: Phase, x: f64, y: f64) {
    let (color, _) = style(phase);
    let r = 4.0;
    let _ = match phase {
        Phase::Fec => writeln!(
            out,
            r#"<path class="pt-FEC" d="M{:.2} {:.2}L{:.2} {:.2}M{:.2} {:.2}L{:.2} {:.2}" stroke="{color}" stroke-width="1.6"/>"#,
            x - r,
            y - r,
            x + r,
            y + r,
            x - r,
            y + r,
            x + r,
            y - r
        ),
        Phase::Bcs => writeln!(
            out,
            r#"<path class="pt-BCS" d="M{:.2} {:.2}L{:.2} {:.2}M{:.2} {:.2}L{:.2} {:.2}" stroke="{color}" stroke-width="1.6"/>"#,
            x - r,
            y,
            x + r,
            y,
            x,
            y - r,
            x,
            y + r
        ),
        Phase::Ec => writeln!(
            out,
            r#"<rect class="pt-EC" x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="{color}" stroke-width="1.4"/>"#,
            x - r * 0.8,
            y - r * 0.8,
            r * 1.6,
            r * 1.6
        ),
        Phase::None => writeln!(
            out,
            r#"<circle class="pt-NONE" cx="{x:.2}" cy="{y:.2}" r="{:.2}" fill="none" stroke="{color}" stroke-width="1.2"/>"#,
            r * 0.8
        ),
    };
}

/// Renders non-failed rows. Identical input gives identical bytes.
pub fn render_svg(rows: &[SweepRow], opts: &PlotOptions) -> String {
    let pts: Vec<(f64, f64, Phase)> = rows
        .iter()
        .filter(|r| !r.failed() && r.lambda_d.is_finite() && r.lambda_g.is_finite())
        .map(|r| (r.lambda_d, r.lambda_g, r.phase))
        .collect();
    let frame = Frame {
        left: 64.0,
        top: if opts.title.is_some() { 40.0 } else { 20.0 },
        plot_w: opts.width - 64.0 - 110.0,
        plot_h: opts.height - 56.0 - if opts.title.is_some() { 40.0 } else { 20.0 },
        x_max: axis_max(pts.iter().map(|p| p.0)),
        y_max: axis_max(pts.iter().map(|p| p.1)),
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#,
        w = opts.width,
        h = opts.height
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    if let Some(title) = &opts.title {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
            frame.left + frame.plot_w / 2.0,
            escape(title)
        );
    }

    // Axes and ticks.
    let (x0, y0) = (frame.x(0.0), frame.y(0.0));
    let (x1, y1) = (frame.x(frame.x_max), frame.y(frame.y_max));
    let _ = writeln!(
        s,
        r#"<path class="axes" d="M{x0:.2} {y1:.2}L{x0:.2} {y0:.2}L{x1:.2} {y0:.2}" fill="none" stroke="black"/>"#
    );
    for k in 0..=(frame.x_max / 0.5).round() as usize {
        let v = k as f64 * 0.5;
        let x = frame.x(v);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{v:.1}</text>"#,
            y0 + 4.0,
            y0 + 18.0
        );
    }
    for k in 0..=(frame.y_max / 0.5).round() as usize {
        let v = k as f64 * 0.5;
        let y = frame.y(v);
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{x0:.2}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{v:.1}</text>"#,
            x0 - 4.0,
            x0 - 7.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">λ_D</text>"#,
        frame.left + frame.plot_w / 2.0,
        y0 + 40.0
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">λ_G</text>"#,
        frame.top + frame.plot_h / 2.0,
        frame.top + frame.plot_h / 2.0
    );

    // Unit thresholds.
    let _ = writeln!(
        s,
        r##"<path class="threshold" d="M{:.2} {y0:.2}L{:.2} {y1:.2}M{x0:.2} {:.2}L{x1:.2} {:.2}" stroke="#444" stroke-dasharray="5 4" fill="none"/>"##,
        frame.x(1.0),
        frame.x(1.0),
        frame.y(1.0),
        frame.y(1.0)
    );

    if opts.hull {
        let hull = convex_hull(&pts.iter().map(|p| (p.0, p.1)).collect::<Vec<_>>());
        if hull.len() >= 2 {
            let points: Vec<String> = hull
                .iter()
                .map(|&(a, b)| format!("{:.2},{:.2}", frame.x(a), frame.y(b)))
                .collect();
            let _ = writeln!(
                s,
                r##"<polygon class="hull" points="{}" fill="#2a9d3f" fill-opacity="0.06" stroke="#555" stroke-width="1"/>"##,
                points.join(" ")
            );
        }
    }

    for &(a, b, phase) in &pts {
        marker(&mut s, phase, frame.x(a), frame.y(b));
    }

    // Legend.
    let lx = frame.left + frame.plot_w + 24.0;
    for (i, phase) in Phase::ALL.into_iter().enumerate() {
        let ly = frame.top + 16.0 + 22.0 * i as f64;
        let count = pts.iter().filter(|p| p.2 == phase).count();
        marker(&mut s, phase, lx, ly);
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}">{} ({count})</text>"#,
            lx + 12.0,
            ly + 4.0,
            style(phase).1
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonians::ModelParams;

    fn row(ld: f64, lg: f64, phase: Phase) -> SweepRow {
        SweepRow {
            params: ModelParams::fec(4, 0.0, 0.0, 0.0, 0.0).unwrap(),
            energy: 0.0,
            lambda_d: ld,
            lambda_g: lg,
            phase,
            degenerate: false,
            failure: None,
        }
    }

    #[test]
    fn hull_of_square_with_interior_point() {
        let h = convex_hull(&[(0.0, 0.0), (1.0, 0.0), (0.5, 0.5), (1.0, 1.0), (0.0, 1.0), (0.5, 0.0)]);
        assert_eq!(h, vec![(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]);
        assert_eq!(convex_hull(&[(1.0, 1.0)]), vec![(1.0, 1.0)]);
    }

    #[test]
    fn one_marker_style_per_phase() {
        let rows = vec![
            row(1.3, 1.3, Phase::Fec),
            row(1.5, 0.6, Phase::Bcs),
            row(0.5, 2.0, Phase::Ec),
            row(0.9, 0.9, Phase::None),
        ];
        let svg = render_svg(&rows, &PlotOptions::default());
        for class in ["pt-FEC", "pt-BCS", "pt-EC", "pt-NONE"] {
            // One data point plus one legend entry each.
            assert_eq!(svg.matches(&format!("class=\"{class}\"")).count(), 2, "{class}");
        }
        assert!(svg.contains("class=\"hull\""));
        assert_eq!(svg, render_svg(&rows, &PlotOptions::default()));
    }

    #[test]
    fn failed_rows_are_skipped() {
        let mut bad = row(f64::NAN, f64::NAN, Phase::None);
        bad.failure = Some("x".into());
        let svg = render_svg(&[bad], &PlotOptions::default());
        assert_eq!(svg.matches("class=\"pt-NONE\"").count(), 1);
        assert!(!svg.contains("class=\"hull\""));
    }
}
