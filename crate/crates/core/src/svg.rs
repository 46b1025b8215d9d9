//! SVG rendering of partition trees.

use std::fmt::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{ConvexPolygon, Point2};
use crate::iterated::PartitionTree;

const PALETTE: [&str; 10] =
    ["#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"];
const WIDTH: f64 = 600.0;

struct Frame {
    lo: Point2,
    scale: f64,
    height: f64,
    margin: f64,
}

impl Frame {
    fn map(&self, p: Point2) -> (f64, f64) {
        (self.margin + (p.x - self.lo.x) * self.scale, self.margin + self.height - (p.y - self.lo.y) * self.scale)
    }
}

fn points_attr(frame: &Frame, poly: &ConvexPolygon) -> Vec<(f64, f64)> {
    poly.vertices().iter().map(|&p| frame.map(p)).collect()
}

/// One `<path>` per leaf, filled by top-level cell, a `<circle>` per site at
/// every level and the body outline.
pub fn render_svg(partition: &PartitionTree) -> String {
    let (mut lo, mut hi) = partition.body.bounding_box();
    for (_, p) in partition.all_sites() {
        lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let span = (hi.x - lo.x).max(hi.y - lo.y).max(1e-12);
    let scale = WIDTH / span;
    let margin = 20.0;
    let frame = Frame { lo, scale, height: (hi.y - lo.y) * scale, margin };
    let w = (hi.x - lo.x) * scale + 2.0 * margin;
    let h = frame.height + 2.0 * margin;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.2}" height="{h:.2}" viewBox="0 0 {w:.2} {h:.2}">"#
    );
    let owners = partition.top_level_of_leaf();
    for (leaf, cell) in partition.leaves().iter().enumerate() {
        let pts = points_attr(&frame, cell);
        let mut d = String::new();
        for (i, (x, y)) in pts.iter().enumerate() {
            let _ = write!(d, "{}{x:.4},{y:.4} ", if i == 0 { "M" } else { "L" });
        }
        d.push('Z');
        let _ = writeln!(
            s,
            r##"  <path d="{d}" fill="{}" fill-opacity="0.75" stroke="#222" stroke-width="1"/>"##,
            PALETTE[owners[leaf] % PALETTE.len()]
        );
    }
    let outline: Vec<String> =
        points_attr(&frame, &partition.body).iter().map(|(x, y)| format!("{x:.4},{y:.4}")).collect();
    let _ = writeln!(s, r##"  <polygon points="{}" fill="none" stroke="#000" stroke-width="2"/>"##, outline.join(" "));
    for (depth, p) in partition.all_sites() {
        let (x, y) = frame.map(p);
        let r = (4.0 - depth as f64).max(1.5);
        let _ = writeln!(s, r##"  <circle cx="{x:.4}" cy="{y:.4}" r="{r:.1}" fill="#000"/>"##);
    }
    s.push_str("</svg>\n");
    s
}

pub fn emit_svg(partition: &PartitionTree, path: &Path) -> Result<()> {
    std::fs::write(path, render_svg(partition)).map_err(|source| Error::Io { path: path.display().to_string(), source })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iterated::{iterated_partition, SiteTree};
    use crate::measure::DensityField;
    use crate::power::SiteConfiguration;

    #[test]
    fn two_cells() {
        let tree =
            SiteTree::leaf(SiteConfiguration::new(vec![Point2::new(0.25, 0.5), Point2::new(0.75, 0.5)]).unwrap());
        let p = iterated_partition(
            &ConvexPolygon::unit_square(),
            &DensityField::uniform(1.0).unwrap(),
            &tree,
            &Default::default(),
        )
        .unwrap();
        let svg = render_svg(&p);
        assert_eq!(svg.matches("<path").count(), 2);
        assert_eq!(svg.matches("<circle").count(), 2);
        assert_eq!(svg, render_svg(&p));
    }
}
