//! Planar convex polygons: construction, half-plane clipping, area and
//! perimeter, and the Hausdorff / symmetric-difference metrics on convex
//! bodies.
//!
//! Polygons are stored as counter-clockwise vertex lists. Clipping never fails:
//! an intersection with (numerically) empty interior is reported as `None`.

use std::ops::{Add, Mul, Neg, Sub};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Vertices closer than this to a clipping line count as lying on it.
pub const ON_LINE_EPS: f64 = 1e-12;
/// Minimum separation of consecutive vertices.
pub const MIN_EDGE: f64 = 1e-12;
/// Clip results below this area collapse to the empty marker.
pub const MIN_AREA: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, o: Point2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, o: Point2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, o: Point2) -> f64 {
        (self - o).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<[f64; 2]> for Point2 {
    fn from([x, y]: [f64; 2]) -> Self {
        Point2 { x, y }
    }
}

impl From<Point2> for [f64; 2] {
    fn from(p: Point2) -> Self {
        [p.x, p.y]
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

/// Closed half-plane `{p : <a, p> + b >= 0}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HalfPlane {
    a: Point2,
    b: f64,
}

impl HalfPlane {
    pub fn new(a: Point2, b: f64) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidInput("half-plane coefficients must be finite".into()));
        }
        if a.norm() <= 0.0 {
            return Err(Error::InvalidInput("half-plane normal must be nonzero".into()));
        }
        Ok(Self { a, b })
    }

    pub fn normal(&self) -> Point2 {
        self.a
    }

    pub fn offset(&self) -> f64 {
        self.b
    }

    /// `<a, p> + b`
    pub fn eval(&self, p: Point2) -> f64 {
        self.a.dot(p) + self.b
    }

    /// Euclidean signed distance of `p` to the boundary line, positive inside.
    pub fn signed_distance(&self, p: Point2) -> f64 {
        self.eval(p) / self.a.norm()
    }

    /// The opposite closed half-plane.
    pub fn complement(&self) -> HalfPlane {
        HalfPlane { a: -self.a, b: -self.b }
    }

    /// Half-plane to the left of the directed line `p -> q`.
    pub fn left_of(p: Point2, q: Point2) -> Result<Self> {
        let e = q - p;
        let n = Point2::new(-e.y, e.x);
        HalfPlane::new(n, -n.dot(p))
    }
}

/// A convex polygon with nonempty interior, vertices counter-clockwise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolygonRepr", into = "PolygonRepr")]
pub struct ConvexPolygon {
    vertices: Vec<Point2>,
}

#[derive(Serialize, Deserialize)]
struct PolygonRepr {
    vertices: Vec<Point2>,
}

impl TryFrom<PolygonRepr> for ConvexPolygon {
    type Error = Error;
    fn try_from(r: PolygonRepr) -> Result<Self> {
        ConvexPolygon::new(r.vertices)
    }
}

impl From<ConvexPolygon> for PolygonRepr {
    fn from(p: ConvexPolygon) -> Self {
        PolygonRepr { vertices: p.vertices }
    }
}

impl ConvexPolygon {
    /// Validates a CCW convex vertex list.
    pub fn new(vertices: Vec<Point2>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::InvalidPolygon(format!("need at least 3 vertices, got {n}")));
        }
        if let Some(i) = vertices.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidPolygon(format!("vertex {i} is not finite")));
        }
        for i in 0..n {
            let (p, q) = (vertices[i], vertices[(i + 1) % n]);
            if p.dist(q) < MIN_EDGE {
                return Err(Error::InvalidPolygon(format!("vertices {i} and {} coincide", (i + 1) % n)));
            }
        }
        for i in 0..n {
            let e1 = vertices[(i + 1) % n] - vertices[i];
            let e2 = vertices[(i + 2) % n] - vertices[(i + 1) % n];
            if e1.cross(e2) < -1e-12 * e1.norm() * e2.norm() {
                return Err(Error::InvalidPolygon(format!("not convex counter-clockwise at vertex {}", (i + 1) % n)));
            }
        }
        let poly = ConvexPolygon { vertices };
        if poly.signed_area() <= 0.0 {
            return Err(Error::InvalidPolygon("signed area must be positive".into()));
        }
        Ok(poly)
    }

    pub(crate) fn from_raw(vertices: Vec<Point2>) -> Self {
        ConvexPolygon { vertices }
    }

    /// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        ConvexPolygon::new(vec![Point2::new(x0, y0), Point2::new(x1, y0), Point2::new(x1, y1), Point2::new(x0, y1)])
    }

    pub fn unit_square() -> Self {
        ConvexPolygon::rectangle(0.0, 0.0, 1.0, 1.0).expect("unit square is valid")
    }

    pub fn regular(sides: usize, center: Point2, circumradius: f64) -> Result<Self> {
        let verts = (0..sides)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / sides as f64;
                center + Point2::new(t.cos(), t.sin()) * circumradius
            })
            .collect();
        ConvexPolygon::new(verts)
    }

    /// Convex hull of a point cloud (collinear points dropped).
    pub fn hull(points: &[Point2]) -> Result<Self> {
        ConvexPolygon::new(convex_hull(points))
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn signed_area(&self) -> f64 {
        0.5 * self.edges().map(|(p, q)| p.cross(q)).sum::<f64>()
    }

    pub fn area(&self) -> f64 {
        self.signed_area().max(0.0)
    }

    pub fn perimeter(&self) -> f64 {
        self.edges().map(|(p, q)| p.dist(q)).sum()
    }

    pub fn centroid(&self) -> Point2 {
        let mut c = Point2::default();
        let mut a2 = 0.0;
        for (p, q) in self.edges() {
            let w = p.cross(q);
            a2 += w;
            c = c + (p + q) * w;
        }
        c * (1.0 / (3.0 * a2))
    }

    /// `(min, max)` corners of the bounding box.
    pub fn bounding_box(&self) -> (Point2, Point2) {
        let mut lo = self.vertices[0];
        let mut hi = self.vertices[0];
        for p in &self.vertices[1..] {
            lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        (lo, hi)
    }

    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, p) in self.vertices.iter().enumerate() {
            for q in &self.vertices[i + 1..] {
                d = d.max(p.dist(*q));
            }
        }
        d
    }

    pub fn contains(&self, p: Point2) -> bool {
        self.edges().all(|(a, b)| (b - a).cross(p - a) >= -ON_LINE_EPS * (b - a).norm())
    }

    /// Euclidean distance from `p` to the polygon (zero inside).
    pub fn distance_to(&self, p: Point2) -> f64 {
        if self.contains(p) {
            return 0.0;
        }
        self.edges().map(|(a, b)| point_segment_distance(p, a, b)).fold(f64::INFINITY, f64::min)
    }

    /// Applies `f` to every vertex and re-validates.
    pub fn map_vertices(&self, f: impl FnMut(&Point2) -> Point2) -> Result<Self> {
        ConvexPolygon::new(self.vertices.iter().map(f).collect())
    }

    pub fn translate(&self, by: Point2) -> Self {
        ConvexPolygon::from_raw(self.vertices.iter().map(|p| *p + by).collect())
    }

    /// `self ∩ h`, or `None` when the intersection has no interior.
    pub fn clip(&self, h: &HalfPlane) -> Option<ConvexPolygon> {
        clip_halfplane(self, h)
    }

    /// `self ∩ other`, or `None` when the intersection has no interior.
    pub fn intersect(&self, other: &ConvexPolygon) -> Option<ConvexPolygon> {
        let mut acc = self.clone();
        for (p, q) in other.edges() {
            let h = HalfPlane::left_of(p, q).expect("polygon edges have positive length");
            acc = acc.clip(&h)?;
        }
        Some(acc)
    }
}

fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let ab = b - a;
    let len_sq = ab.norm_sq();
    if len_sq == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(ab) / len_sq).clamp(0.0, 1.0);
    p.dist(a + ab * t)
}

/// Sutherland–Hodgman step specialised to convex input.
pub fn clip_halfplane(poly: &ConvexPolygon, h: &HalfPlane) -> Option<ConvexPolygon> {
    let verts = poly.vertices();
    let s: Vec<f64> = verts.iter().map(|p| h.signed_distance(*p)).collect();
    if s.iter().all(|&v| v >= -ON_LINE_EPS) {
        return Some(poly.clone());
    }
    if s.iter().all(|&v| v <= ON_LINE_EPS) {
        return None;
    }
    let n = verts.len();
    let mut out: Vec<Point2> = Vec::with_capacity(n + 2);
    for i in 0..n {
        let j = (i + 1) % n;
        let (sc, sn) = (s[i], s[j]);
        if sc >= -ON_LINE_EPS {
            out.push(verts[i]);
        }
        if (sc > ON_LINE_EPS && sn < -ON_LINE_EPS) || (sc < -ON_LINE_EPS && sn > ON_LINE_EPS) {
            let t = sc / (sc - sn);
            out.push(verts[i] + (verts[j] - verts[i]) * t);
        }
    }
    finish(out)
}

fn finish(mut pts: Vec<Point2>) -> Option<ConvexPolygon> {
    pts.dedup_by(|b, a| a.dist(*b) < MIN_EDGE);
    while pts.len() > 1 && pts[0].dist(pts[pts.len() - 1]) < MIN_EDGE {
        pts.pop();
    }
    if pts.len() < 3 {
        return None;
    }
    let poly = ConvexPolygon::from_raw(pts);
    (poly.signed_area() >= MIN_AREA).then_some(poly)
}

/// Andrew's monotone chain; returns CCW hull without collinear points.
pub fn convex_hull(points: &[Point2]) -> Vec<Point2> {
    let mut pts: Vec<Point2> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<Point2> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point2>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &p in iter {
            while hull.len() >= start + 2 {
                let a = hull[hull.len() - 2];
                let b = hull[hull.len() - 1];
                if (b - a).cross(p - a) <= 0.0 {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// Hausdorff distance between two convex polygons.
///
/// For convex sets the distance function to the other body is convex, so each
/// directed supremum is attained at a vertex; the result is exact up to
/// rounding.
pub fn hausdorff_distance(p1: &ConvexPolygon, p2: &ConvexPolygon) -> f64 {
    let directed =
        |a: &ConvexPolygon, b: &ConvexPolygon| a.vertices().iter().map(|v| b.distance_to(*v)).fold(0.0, f64::max);
    directed(p1, p2).max(directed(p2, p1))
}

/// Lebesgue measure of `p1 △ p2`.
pub fn symmetric_difference_area(p1: &ConvexPolygon, p2: &ConvexPolygon) -> f64 {
    let common = p1.intersect(p2).map_or(0.0, |c| c.area());
    (p1.area() + p2.area() - 2.0 * common).max(0.0)
}

/// Same as [`symmetric_difference_area`] but treats `None` as the empty set.
pub fn symmetric_difference_opt(p1: Option<&ConvexPolygon>, p2: Option<&ConvexPolygon>) -> f64 {
    match (p1, p2) {
        (Some(a), Some(b)) => symmetric_difference_area(a, b),
        (Some(a), None) | (None, Some(a)) => a.area(),
        (None, None) => 0.0,
    }
}

/// Deterministic random convex polygon with exactly `vertex_count` vertices.
///
/// Points are drawn in an annulus of outer radius `scale`; hulls with fewer
/// than `vertex_count` vertices or short edges are rejected and redrawn.
pub fn random_convex_polygon(seed: u64, vertex_count: usize, scale: f64) -> Result<ConvexPolygon> {
    if vertex_count < 3 {
        return Err(Error::InvalidInput(format!("vertex_count must be >= 3, got {vertex_count}")));
    }
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::InvalidInput(format!("scale must be positive, got {scale}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let min_edge = 0.05 * scale / vertex_count as f64;
    for _ in 0..10_000 {
        let pts: Vec<Point2> = (0..vertex_count)
            .map(|_| {
                let t = rng.gen_range(0.0..std::f64::consts::TAU);
                let r = scale * rng.gen_range(0.6..1.0);
                Point2::new(r * t.cos(), r * t.sin())
            })
            .collect();
        let hull = convex_hull(&pts);
        if hull.len() < vertex_count {
            continue;
        }
        let n = hull.len();
        if (0..n).any(|i| hull[i].dist(hull[(i + 1) % n]) < min_edge) {
            continue;
        }
        if let Ok(poly) = ConvexPolygon::new(hull) {
            return Ok(poly);
        }
    }
    Err(Error::InvalidInput(format!("could not draw a convex {vertex_count}-gon for seed {seed}")))
}
