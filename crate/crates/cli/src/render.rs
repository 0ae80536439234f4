//! Static SVG phase diagrams.
//!
//! One panel per checkpoint. Each sample is a circle at (a₀, b): blue for
//! mean belief above zero, red below, black at exactly zero. Marker area is
//! proportional to |⟨d⟩| / 4. Filled circles mark runs that halted on the
//! exit criterion by that checkpoint; the rest are drawn as rings.

use std::fmt::Write;

use reward_sim::sweep::{Classification, PhasePoint, Sampling};

const PANEL_W: f64 = 380.0;
const PANEL_H: f64 = 340.0;
const MARGIN_L: f64 = 56.0;
const MARGIN_R: f64 = 16.0;
const MARGIN_T: f64 = 34.0;
const MARGIN_B: f64 = 46.0;
const MAX_RADIUS: f64 = 6.0;
const MIN_RADIUS: f64 = 1.2;
const COLUMNS: usize = 2;

pub fn color(class: Classification) -> &'static str {
    match class {
        Classification::Belief => "#1f4bd8",
        Classification::Disbelief => "#d62728",
        Classification::Undecided => "#000000",
    }
}

/// Marker radius for a mean belief magnitude in [0, 4].
pub fn radius(magnitude: f64) -> f64 {
    (MAX_RADIUS * (magnitude.clamp(0.0, 4.0) / 4.0).sqrt()).max(MIN_RADIUS)
}

/// Axis extents `(a0_lo, a0_hi, b_lo, b_hi)` covering the sampled region.
pub fn extents(sampling: &Sampling) -> (f64, f64, f64, f64) {
    let (a_lo, a_hi, b_lo, b_hi) = match sampling {
        Sampling::Random { a0_range, b_range, .. } => (a0_range[0], a0_range[1], b_range[0], b_range[1]),
        Sampling::Grid { a0_values, b_values, .. } => {
            let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
            let max = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (min(a0_values), max(a0_values), min(b_values), max(b_values))
        }
    };
    let widen = |lo: f64, hi: f64| if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
    let (a_lo, a_hi) = widen(a_lo, a_hi);
    let (b_lo, b_hi) = widen(b_lo, b_hi);
    (a_lo, a_hi, b_lo, b_hi)
}

struct Panel {
    x0: f64,
    y0: f64,
    a: (f64, f64),
    b: (f64, f64),
}

impl Panel {
    fn plot_w(&self) -> f64 {
        PANEL_W - MARGIN_L - MARGIN_R
    }

    fn plot_h(&self) -> f64 {
        PANEL_H - MARGIN_T - MARGIN_B
    }

    fn x(&self, a0: f64) -> f64 {
        self.x0 + MARGIN_L + (a0 - self.a.0) / (self.a.1 - self.a.0) * self.plot_w()
    }

    fn y(&self, b: f64) -> f64 {
        self.y0 + MARGIN_T + (1.0 - (b - self.b.0) / (self.b.1 - self.b.0)) * self.plot_h()
    }
}

fn axes(out: &mut String, p: &Panel, title: &str) {
    let (left, top) = (p.x0 + MARGIN_L, p.y0 + MARGIN_T);
    let _ = writeln!(
        out,
        r##"<rect x="{left:.2}" y="{top:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#444"/>"##,
        p.plot_w(),
        p.plot_h()
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="14">{title}</text>"#,
        left + p.plot_w() / 2.0,
        p.y0 + 20.0
    );
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let a = p.a.0 + t * (p.a.1 - p.a.0);
        let b = p.b.0 + t * (p.b.1 - p.b.0);
        let (x, y) = (p.x(a), p.y(b));
        let bottom = top + p.plot_h();
        let _ = writeln!(
            out,
            r##"<line x1="{x:.2}" y1="{bottom:.2}" x2="{x:.2}" y2="{:.2}" stroke="#444"/><text x="{x:.2}" y="{:.2}" text-anchor="middle" font-size="10">{a:.3}</text>"##,
            bottom + 4.0,
            bottom + 16.0
        );
        let _ = writeln!(
            out,
            r##"<line x1="{:.2}" y1="{y:.2}" x2="{left:.2}" y2="{y:.2}" stroke="#444"/><text x="{:.2}" y="{:.2}" text-anchor="end" font-size="10">{b:.2}</text>"##,
            left - 4.0,
            left - 6.0,
            y + 3.5
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="12">a0</text>"#,
        left + p.plot_w() / 2.0,
        p.y0 + PANEL_H - 8.0
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="12" transform="rotate(-90 {:.2} {:.2})">b</text>"#,
        p.x0 + 16.0,
        top + p.plot_h() / 2.0,
        p.x0 + 16.0,
        top + p.plot_h() / 2.0
    );
}

/// Render the sweep as one SVG document with a panel per checkpoint. With no
/// checkpoints, a single panel shows the final state.
pub fn render_phase_svg(points: &[PhasePoint], checkpoints: &[usize], sampling: &Sampling) -> String {
    let (a_lo, a_hi, b_lo, b_hi) = extents(sampling);
    let panels: Vec<Option<usize>> = if checkpoints.is_empty() {
        vec![None]
    } else {
        checkpoints.iter().copied().map(Some).collect()
    };
    let cols = panels.len().min(COLUMNS);
    let rows = panels.len().div_ceil(COLUMNS);
    let width = PANEL_W * cols as f64;
    let height = PANEL_H * rows as f64;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);

    for (k, checkpoint) in panels.iter().enumerate() {
        let panel = Panel {
            x0: (k % COLUMNS) as f64 * PANEL_W,
            y0: (k / COLUMNS) as f64 * PANEL_H,
            a: (a_lo, a_hi),
            b: (b_lo, b_hi),
        };
        let title = match checkpoint {
            Some(j) => format!("j = {j}"),
            None => "final".to_string(),
        };
        axes(&mut out, &panel, &title);
        let _ = writeln!(out, "<g>");
        for p in points {
            let (mean, halted) = match checkpoint {
                Some(j) => (p.mean_at(*j).unwrap_or(p.final_mean), p.halted_by_stability && p.halt_step <= *j),
                None => (p.final_mean, p.halted_by_stability),
            };
            let c = color(Classification::of(mean));
            let fill = if halted { c } else { "none" };
            let _ = writeln!(
                out,
                r#"<circle cx="{:.2}" cy="{:.2}" r="{:.2}" fill="{fill}" stroke="{c}" stroke-width="0.8"/>"#,
                panel.x(p.a0),
                panel.y(p.b),
                radius(mean.value().abs())
            );
        }
        let _ = writeln!(out, "</g>");
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use reward_sim::MeanBelief;

    fn point(a0: f64, b: f64, sum: i64, halted: bool) -> PhasePoint {
        let m = MeanBelief { sum, count: 20 };
        PhasePoint {
            sample_index: 0,
            a0,
            b,
            seed: 0,
            checkpoint_means: vec![(10, m)],
            final_mean: m,
            halted_by_stability: halted,
            halt_step: 5,
            classification: Classification::of(m),
            magnitude: m.value().abs(),
        }
    }

    #[test]
    fn marker_area_tracks_magnitude() {
        assert_eq!(radius(4.0), MAX_RADIUS);
        let (r1, r2) = (radius(1.0), radius(2.0));
        assert!((r2 * r2 / (r1 * r1) - 2.0).abs() < 1e-12);
        assert_eq!(radius(0.0), MIN_RADIUS);
    }

    #[test]
    fn circles_carry_class_colors_and_fill() {
        let sampling = Sampling::Random { count: 3, a0_range: [0.0, 0.3], b_range: [0.0, 1.2] };
        let pts = vec![point(0.1, 0.2, 40, true), point(0.2, 1.0, -80, false), point(0.15, 0.6, 0, false)];
        let svg = render_phase_svg(&pts, &[10], &sampling);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<circle").count(), 3);
        assert!(svg.contains(r##"fill="#1f4bd8" stroke="#1f4bd8""##));
        assert!(svg.contains(r##"fill="none" stroke="#d62728""##));
        assert!(svg.contains(r##"fill="none" stroke="#000000""##));
    }

    #[test]
    fn one_panel_per_checkpoint() {
        let sampling = Sampling::Grid { a0_values: vec![0.1], b_values: vec![0.5], replicates: 1 };
        let svg = render_phase_svg(&[point(0.1, 0.5, 1, false)], &[1, 10, 100, 1000], &sampling);
        for j in [1, 10, 100, 1000] {
            assert!(svg.contains(&format!(">j = {j}<")));
        }
        assert_eq!(svg.matches("<circle").count(), 4);
    }
}
