//! CSV and SVG artifact writers.

use std::fmt::Write as _;
use std::io::{self, Write};

use dadc_core::centers::{CriticalPoint, PointRole, NOISE};
use dadc_core::ensemble::TraceRow;
use dadc_core::{Dataset, DensityProfile, Scalar};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 48.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

pub fn write_labels<W: Write>(labels: &[i64], mut out: W) -> io::Result<()> {
    writeln!(out, "id,cluster")?;
    for (i, l) in labels.iter().enumerate() {
        writeln!(out, "{i},{l}")?;
    }
    Ok(())
}

pub fn write_decision_graph_csv<T: Scalar, W: Write>(
    profile: &DensityProfile<T>,
    roles: &[PointRole],
    mut out: W,
) -> io::Result<()> {
    writeln!(out, "id,adaptive_density,delta,role")?;
    for (i, role) in roles.iter().enumerate() {
        writeln!(
            out,
            "{i},{},{},{}",
            profile.adaptive_density[i],
            profile.delta[i],
            role.as_str()
        )?;
    }
    Ok(())
}

pub fn write_fusion_trace<T: Scalar, W: Write>(trace: &[TraceRow<T>], mut out: W) -> io::Result<()> {
    writeln!(out, "round,a,b,ids,ccd,cds_ratio,cfd,merged")?;
    for r in trace {
        let c = &r.candidate;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.round, c.a, c.b, c.ids, c.ccd, c.cds_ratio, c.cfd, r.merged
        )?;
    }
    Ok(())
}

/// Maps a data range onto a pixel range, padding a degenerate range.
#[derive(Clone, Copy)]
struct Axis {
    lo: f64,
    hi: f64,
    px_lo: f64,
    px_hi: f64,
}

impl Axis {
    fn new(values: impl Iterator<Item = f64>, px_lo: f64, px_hi: f64) -> Self {
        let (mut lo, mut hi) = values
            .filter(|v| v.is_finite())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        if !lo.is_finite() {
            lo = 0.0;
            hi = 1.0;
        }
        if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
            lo -= 0.5;
            hi += 0.5;
        }
        Axis { lo, hi, px_lo, px_hi }
    }

    fn map(&self, v: f64) -> f64 {
        self.px_lo + (v - self.lo) / (self.hi - self.lo) * (self.px_hi - self.px_lo)
    }
}

fn svg_open(s: &mut String, title: &str, style: &str) {
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(s, "<!-- dadc {} -->", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = writeln!(s, "<title>{title}</title>");
    let _ = writeln!(s, "<style>{style}</style>");
    let _ = writeln!(s, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");
}

fn frame(s: &mut String) {
    let (l, r, t, b) = (MARGIN, WIDTH - MARGIN / 2.0, MARGIN / 2.0, HEIGHT - MARGIN);
    let _ = writeln!(s, "<line class=\"axis\" x1=\"{l}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\"/>");
    let _ = writeln!(s, "<line class=\"axis\" x1=\"{l}\" y1=\"{b}\" x2=\"{l}\" y2=\"{t}\"/>");
}

fn axes(x: impl Iterator<Item = f64>, y: impl Iterator<Item = f64>) -> (Axis, Axis) {
    (
        Axis::new(x, MARGIN, WIDTH - MARGIN / 2.0),
        Axis::new(y, HEIGHT - MARGIN, MARGIN / 2.0),
    )
}

/// Decision graph: one circle per point, the two threshold guides through the
/// critical point and the point itself.
pub fn decision_graph_svg<T: Scalar>(
    x: &[T],
    delta: &[T],
    roles: &[PointRole],
    cp: &CriticalPoint<T>,
    x_label: &str,
) -> String {
    let mut s = String::new();
    svg_open(
        &mut s,
        "decision graph",
        ".axis{stroke:#333}.threshold{stroke:#888;stroke-dasharray:4 3}.center{fill:#d62728}\
         .outlier{fill:#222}.remaining{fill:#1f77b4;fill-opacity:0.6}.critical-point{fill:none;stroke:#2ca02c;stroke-width:2}",
    );
    let (cpx, cpy) = (cp.x.to_f64_lossy(), cp.y.to_f64_lossy());
    let (ax, ay) = axes(
        x.iter().map(|v| v.to_f64_lossy()).chain([0.0, cpx]),
        delta.iter().map(|v| v.to_f64_lossy()).chain([0.0, cpy]),
    );
    frame(&mut s);
    let (px, py) = (ax.map(cpx), ay.map(cpy));
    let _ = writeln!(
        s,
        "<line class=\"threshold\" x1=\"{px:.2}\" y1=\"{:.2}\" x2=\"{px:.2}\" y2=\"{:.2}\"/>",
        ay.px_lo, ay.px_hi
    );
    let _ = writeln!(
        s,
        "<line class=\"threshold\" x1=\"{:.2}\" y1=\"{py:.2}\" x2=\"{:.2}\" y2=\"{py:.2}\"/>",
        ax.px_lo, ax.px_hi
    );
    for ((xi, di), role) in x.iter().zip(delta).zip(roles) {
        let _ = writeln!(
            s,
            "<circle class=\"{}\" cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\"/>",
            role.as_str(),
            ax.map(xi.to_f64_lossy()),
            ay.map(di.to_f64_lossy())
        );
    }
    let _ = writeln!(
        s,
        "<path class=\"critical-point\" d=\"M{:.2},{py:.2} L{px:.2},{:.2} L{:.2},{py:.2} L{px:.2},{:.2} Z\"/>",
        px - 6.0,
        py - 6.0,
        px + 6.0,
        py + 6.0
    );
    let _ = writeln!(
        s,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{x_label}</text>",
        WIDTH / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        s,
        "<text x=\"14\" y=\"{:.2}\" transform=\"rotate(-90 14 {:.2})\" text-anchor=\"middle\">delta</text>",
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    s.push_str("</svg>\n");
    s
}

/// Scatter of the first two coordinates colored by cluster; noise is drawn as
/// small black crosses.
pub fn cluster_plot_svg<T: Scalar>(dataset: &Dataset<T>, labels: &[i64]) -> String {
    let mut s = String::new();
    let mut style = String::from(".axis{stroke:#333}.noise{stroke:#000;stroke-width:1}");
    for (i, c) in PALETTE.iter().enumerate() {
        let _ = write!(style, ".c{i}{{fill:{c}}}");
    }
    svg_open(&mut s, "clusters", &style);
    let coord = |p: &[T], d: usize| p.get(d).map(|v| v.to_f64_lossy()).unwrap_or(0.0);
    let (ax, ay) = axes(
        dataset.points().iter().map(|p| coord(&p.coords, 0)),
        dataset.points().iter().map(|p| coord(&p.coords, 1)),
    );
    frame(&mut s);
    for (p, &l) in dataset.points().iter().zip(labels) {
        let (cx, cy) = (ax.map(coord(&p.coords, 0)), ay.map(coord(&p.coords, 1)));
        if l == NOISE {
            let _ = writeln!(
                s,
                "<path class=\"noise\" d=\"M{:.2},{:.2} L{:.2},{:.2} M{:.2},{:.2} L{:.2},{:.2}\"/>",
                cx - 2.0,
                cy - 2.0,
                cx + 2.0,
                cy + 2.0,
                cx - 2.0,
                cy + 2.0,
                cx + 2.0,
                cy - 2.0
            );
        } else {
            let _ = writeln!(
                s,
                "<circle class=\"c{}\" cx=\"{cx:.2}\" cy=\"{cy:.2}\" r=\"2.5\"/>",
                l as usize % PALETTE.len()
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_csv() {
        let mut buf = Vec::new();
        write_labels(&[0, -1, 1], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "id,cluster\n0,0\n1,-1\n2,1\n");
    }

    #[test]
    fn decision_graph_svg_structure() {
        let x = [1.0, 0.2, 0.1];
        let d = [5.0, 4.0, 0.5];
        let roles = [PointRole::Center, PointRole::Outlier, PointRole::Remaining];
        let svg = decision_graph_svg(&x, &d, &roles, &CriticalPoint { x: 0.5, y: 1.25 }, "domain density");
        assert_eq!(svg.matches("<circle").count(), 3);
        assert_eq!(svg.matches("class=\"threshold\"").count(), 2);
        assert_eq!(svg.matches("class=\"critical-point\"").count(), 1);
        assert!(svg.contains("<circle class=\"center\""));
        assert!(svg.contains("<!-- dadc "));
    }

    #[test]
    fn degenerate_ranges_render() {
        let svg = decision_graph_svg(&[1.0f64; 2], &[0.0; 2], &[PointRole::Center; 2], &CriticalPoint { x: 0.5, y: 0.0 }, "x");
        assert!(!svg.contains("NaN"));
    }
}
