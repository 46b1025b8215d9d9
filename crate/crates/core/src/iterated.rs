//! Iterated partitions of level k and type (n_1, ..., n_k), the iterated
//! representation W_k(d; n) and the test map Φ_k.
//!
//! Conventions used throughout the crate:
//! * the root body is split into `n_k` cells, each recursively by type
//!   `(n_1, ..., n_{k-1})`;
//! * leaves are ordered depth first, so leaf `b * n' + j` is leaf `j` of
//!   top-level cell `b`, where `n' = n_1 ⋯ n_{k-1}`;
//! * inside a WVector the `d - 1` functional blocks come in functional-major
//!   order, after the child vectors.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ConvexPolygon, Point2};
use crate::measure::DensityField;
use crate::power::{regular_equipartition, SiteConfiguration, WeightSolverOptions};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct PartitionType(Vec<usize>);

impl TryFrom<Vec<usize>> for PartitionType {
    type Error = Error;
    fn try_from(ns: Vec<usize>) -> Result<Self> {
        PartitionType::new(ns)
    }
}

impl From<PartitionType> for Vec<usize> {
    fn from(t: PartitionType) -> Self {
        t.0
    }
}

impl PartitionType {
    pub fn new(ns: Vec<usize>) -> Result<Self> {
        if ns.is_empty() {
            return Err(Error::InvalidInput("partition type needs at least one level".into()));
        }
        if let Some(n) = ns.iter().find(|&&n| n < 2) {
            return Err(Error::InvalidInput(format!("every n_i must be >= 2, got {n}")));
        }
        if ns.iter().try_fold(1usize, |acc, &n| acc.checked_mul(n)).is_none() {
            return Err(Error::Overflow(format!("leaf count of type {ns:?} overflows")));
        }
        Ok(PartitionType(ns))
    }

    pub fn ns(&self) -> &[usize] {
        &self.0
    }

    /// Level `k`.
    pub fn k(&self) -> usize {
        self.0.len()
    }

    /// Number of leaves `n = n_1 ⋯ n_k`.
    pub fn n(&self) -> usize {
        self.0.iter().product()
    }

    /// `n_k`, the number of top-level cells.
    pub fn top(&self) -> usize {
        *self.0.last().expect("nonempty type")
    }

    /// The type `(n_1, ..., n_{k-1})` of each top-level cell, if `k >= 2`.
    pub fn inner(&self) -> Option<PartitionType> {
        (self.k() >= 2).then(|| PartitionType(self.0[..self.k() - 1].to_vec()))
    }

    /// Number of sites in a SiteTree of this type.
    pub fn site_count(&self) -> usize {
        self.0.iter().fold(0, |acc, &n| n * acc + n)
    }
}

impl FromStr for PartitionType {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let ns = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidInput(format!("bad partition type entry {t:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        PartitionType::new(ns)
    }
}

impl fmt::Display for PartitionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|n| n.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

pub(crate) fn check_d(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::InvalidInput(format!("dimension d must be >= 2, got {d}")));
    }
    Ok(())
}

/// Element of the wreath configuration space `C_k(d; n_1, ..., n_k)` for d = 2.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SiteTreeRepr", into = "SiteTreeRepr")]
pub struct SiteTree {
    pub children: Vec<SiteTree>,
    pub sites: SiteConfiguration,
}

#[derive(Serialize, Deserialize)]
struct SiteTreeRepr {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    children: Vec<SiteTree>,
    sites: SiteConfiguration,
}

impl TryFrom<SiteTreeRepr> for SiteTree {
    type Error = Error;
    fn try_from(r: SiteTreeRepr) -> Result<Self> {
        let tree = SiteTree { children: r.children, sites: r.sites };
        tree.partition_type()?;
        Ok(tree)
    }
}

impl From<SiteTree> for SiteTreeRepr {
    fn from(t: SiteTree) -> Self {
        SiteTreeRepr { children: t.children, sites: t.sites }
    }
}

impl SiteTree {
    pub fn leaf(sites: SiteConfiguration) -> Self {
        SiteTree { children: Vec::new(), sites }
    }

    pub fn node(children: Vec<SiteTree>, sites: SiteConfiguration) -> Result<Self> {
        let t = SiteTree { children, sites };
        t.partition_type()?;
        Ok(t)
    }

    /// Infers the type from the shape; all siblings must share one type.
    pub fn partition_type(&self) -> Result<PartitionType> {
        let top = self.sites.len();
        if self.children.is_empty() {
            return PartitionType::new(vec![top]);
        }
        if self.children.len() != top {
            return Err(Error::ShapeMismatch(format!("node has {top} sites but {} children", self.children.len())));
        }
        let inner = self.children[0].partition_type()?;
        for (i, c) in self.children.iter().enumerate().skip(1) {
            let t = c.partition_type().map_err(|e| e.at(i))?;
            if t != inner {
                return Err(Error::ShapeMismatch(format!("child {i} has type {t}, expected {inner}")));
            }
        }
        let mut ns = inner.0;
        ns.push(top);
        PartitionType::new(ns)
    }

    pub fn check_type(&self, ptype: &PartitionType) -> Result<()> {
        let t = self.partition_type()?;
        if &t != ptype {
            return Err(Error::ShapeMismatch(format!("site tree has type {t}, expected {ptype}")));
        }
        Ok(())
    }

    /// All sites, children first (depth first), then the node's own sites.
    pub fn flatten(&self) -> Vec<Point2> {
        let mut out = Vec::new();
        self.flatten_into(&mut out);
        out
    }

    fn flatten_into(&self, out: &mut Vec<Point2>) {
        for c in &self.children {
            c.flatten_into(out);
        }
        out.extend_from_slice(self.sites.points());
    }

    /// Inverse of [`SiteTree::flatten`].
    pub fn from_flat(ptype: &PartitionType, points: &[Point2]) -> Result<Self> {
        if points.len() != ptype.site_count() {
            return Err(Error::ShapeMismatch(format!(
                "type {ptype} needs {} sites, got {}",
                ptype.site_count(),
                points.len()
            )));
        }
        let mut pos = 0;
        Self::build_flat(ptype, points, &mut pos)
    }

    fn build_flat(ptype: &PartitionType, points: &[Point2], pos: &mut usize) -> Result<Self> {
        let mut children = Vec::new();
        if let Some(inner) = ptype.inner() {
            for i in 0..ptype.top() {
                children.push(Self::build_flat(&inner, points, pos).map_err(|e| e.at(i))?);
            }
        }
        let sites = SiteConfiguration::new(points[*pos..*pos + ptype.top()].to_vec())?;
        *pos += ptype.top();
        Ok(SiteTree { children, sites })
    }
}

/// The ranked tree of bodies produced by [`iterated_partition`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionTree {
    pub body: ConvexPolygon,
    pub sites: Vec<Point2>,
    pub weights: Vec<f64>,
    pub cells: Vec<ConvexPolygon>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<PartitionTree>,
}

impl PartitionTree {
    /// Leaf cells in canonical order.
    pub fn leaves(&self) -> Vec<&ConvexPolygon> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a ConvexPolygon>) {
        if self.children.is_empty() {
            out.extend(self.cells.iter());
        } else {
            for c in &self.children {
                c.collect_leaves(out);
            }
        }
    }

    /// Leaf index ranges of the top-level cells.
    pub fn top_level_of_leaf(&self) -> Vec<usize> {
        let per = if self.children.is_empty() { 1 } else { self.children[0].leaves().len() };
        (0..self.cells.len() * per).map(|l| l / per).collect()
    }

    pub fn leaf_perimeters(&self) -> Vec<f64> {
        self.leaves().iter().map(|c| c.perimeter()).collect()
    }

    /// Every site at every level, with its depth (0 for the root's sites).
    pub fn all_sites(&self) -> Vec<(usize, Point2)> {
        let mut out = Vec::new();
        self.collect_sites(0, &mut out);
        out
    }

    fn collect_sites(&self, depth: usize, out: &mut Vec<(usize, Point2)>) {
        out.extend(self.sites.iter().map(|&p| (depth, p)));
        for c in &self.children {
            c.collect_sites(depth + 1, out);
        }
    }

    /// Visits every node with its depth.
    pub fn visit(&self, f: &mut impl FnMut(usize, &PartitionTree)) {
        self.visit_at(0, f);
    }

    fn visit_at(&self, depth: usize, f: &mut impl FnMut(usize, &PartitionTree)) {
        f(depth, self);
        for c in &self.children {
            c.visit_at(depth + 1, f);
        }
    }
}

/// Partitions `body` recursively along `tree`; failures carry the tree path.
pub fn iterated_partition(
    body: &ConvexPolygon,
    field: &DensityField,
    tree: &SiteTree,
    opts: &WeightSolverOptions,
) -> Result<PartitionTree> {
    tree.partition_type()?;
    partition_node(body, field, tree, opts)
}

fn partition_node(
    body: &ConvexPolygon,
    field: &DensityField,
    tree: &SiteTree,
    opts: &WeightSolverOptions,
) -> Result<PartitionTree> {
    let (w, cp) = regular_equipartition(body, field, &tree.sites, opts)?;
    let cells: Vec<ConvexPolygon> = cp.cells.into_iter().map(|c| c.expect("regular cells are nonempty")).collect();
    let children = tree
        .children
        .iter()
        .zip(&cells)
        .enumerate()
        .map(|(i, (child, cell))| partition_node(cell, field, child, opts).map_err(|e| e.at(i)))
        .collect::<Result<Vec<_>>>()?;
    Ok(PartitionTree {
        body: body.clone(),
        sites: tree.sites.points().to_vec(),
        weights: w.values().to_vec(),
        cells,
        children,
    })
}

/// Element of `W_k(d; n)`: child vectors (empty when k = 1) and `d - 1`
/// zero-sum blocks of length `n_k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WVector {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<WVector>,
    pub blocks: Vec<Vec<f64>>,
}

impl WVector {
    pub fn zeros(ptype: &PartitionType, d: usize) -> WVector {
        WVector {
            children: match ptype.inner() {
                Some(inner) => (0..ptype.top()).map(|_| WVector::zeros(&inner, d)).collect(),
                None => Vec::new(),
            },
            blocks: vec![vec![0.0; ptype.top()]; d.saturating_sub(1)],
        }
    }

    /// Checks shape and zero block sums (within 1e-9 of the block scale).
    pub fn validate(&self, ptype: &PartitionType, d: usize) -> Result<()> {
        if self.blocks.len() != d - 1 || self.blocks.iter().any(|b| b.len() != ptype.top()) {
            return Err(Error::ShapeMismatch(format!("WVector blocks do not match type {ptype}, d = {d}")));
        }
        for b in &self.blocks {
            let s: f64 = b.iter().sum();
            let scale = b.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
            if s.abs() > 1e-9 * scale {
                return Err(Error::InvalidInput(format!("WVector block sums to {s:e}")));
            }
        }
        match ptype.inner() {
            None if self.children.is_empty() => Ok(()),
            Some(inner) if self.children.len() == ptype.top() => {
                self.children.iter().enumerate().try_for_each(|(i, c)| c.validate(&inner, d).map_err(|e| e.at(i)))
            }
            _ => Err(Error::ShapeMismatch(format!("WVector children do not match type {ptype}"))),
        }
    }

    /// Every stored entry, children first.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        self.flat_into(&mut out);
        out
    }

    fn flat_into(&self, out: &mut Vec<f64>) {
        for c in &self.children {
            c.flat_into(out);
        }
        for b in &self.blocks {
            out.extend_from_slice(b);
        }
    }

    /// Coordinates in the basis `e_i - e_m` of each block: the first `m - 1`
    /// entries of every block. Length equals [`wvector_dim`].
    pub fn coords(&self) -> Vec<f64> {
        let mut out = Vec::new();
        self.coords_into(&mut out);
        out
    }

    fn coords_into(&self, out: &mut Vec<f64>) {
        for c in &self.children {
            c.coords_into(out);
        }
        for b in &self.blocks {
            out.extend_from_slice(&b[..b.len() - 1]);
        }
    }

    /// Inverse of [`WVector::coords`].
    pub fn from_coords(ptype: &PartitionType, d: usize, coords: &[f64]) -> Result<WVector> {
        let dim = wvector_dim(ptype, d)?;
        if coords.len() != dim {
            return Err(Error::ShapeMismatch(format!("expected {dim} coordinates, got {}", coords.len())));
        }
        let mut pos = 0;
        Ok(Self::build_coords(ptype, d, coords, &mut pos))
    }

    fn build_coords(ptype: &PartitionType, d: usize, coords: &[f64], pos: &mut usize) -> WVector {
        let children = match ptype.inner() {
            Some(inner) => (0..ptype.top()).map(|_| Self::build_coords(&inner, d, coords, pos)).collect(),
            None => Vec::new(),
        };
        let m = ptype.top();
        let blocks = (0..d - 1)
            .map(|_| {
                let mut b = coords[*pos..*pos + m - 1].to_vec();
                *pos += m - 1;
                b.push(-b.iter().sum::<f64>());
                b
            })
            .collect();
        WVector { children, blocks }
    }

    pub fn is_zero(&self) -> bool {
        self.to_flat().iter().all(|v| *v == 0.0)
    }
}

/// Euclidean norm of the flattened vector.
pub fn wvector_norm(v: &WVector) -> f64 {
    v.to_flat().iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `dim W_k(d; n) = (d - 1)(n_1 ⋯ n_k - 1)`.
pub fn wvector_dim(ptype: &PartitionType, d: usize) -> Result<usize> {
    check_d(d)?;
    (d - 1)
        .checked_mul(ptype.n() - 1)
        .ok_or_else(|| Error::Overflow(format!("dimension of W for type {ptype}, d = {d}")))
}

/// `v - mean(v)`; exactly zero when all entries coincide.
fn centered(v: &[f64]) -> Vec<f64> {
    if v.iter().all(|x| *x == v[0]) {
        return vec![0.0; v.len()];
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| x - mean).collect()
}

/// `Φ_k` of per-leaf value tuples (each of length `d - 1`, canonical leaf order).
pub fn test_map(values: &[Vec<f64>], ptype: &PartitionType, d: usize) -> Result<WVector> {
    check_d(d)?;
    if values.len() != ptype.n() {
        return Err(Error::ShapeMismatch(format!(
            "type {ptype} has {} leaves, got {} values",
            ptype.n(),
            values.len()
        )));
    }
    if let Some(v) = values.iter().find(|v| v.len() != d - 1) {
        return Err(Error::ShapeMismatch(format!("leaf value tuples must have length {}, got {}", d - 1, v.len())));
    }
    Ok(test_map_rec(values, ptype, d))
}

fn test_map_rec(values: &[Vec<f64>], ptype: &PartitionType, d: usize) -> WVector {
    match ptype.inner() {
        None => WVector {
            children: Vec::new(),
            blocks: (0..d - 1).map(|f| centered(&values.iter().map(|v| v[f]).collect::<Vec<_>>())).collect(),
        },
        Some(inner) => {
            let per = inner.n();
            let chunks: Vec<&[Vec<f64>]> = values.chunks(per).collect();
            WVector {
                children: chunks.iter().map(|c| test_map_rec(c, &inner, d)).collect(),
                blocks: (0..d - 1)
                    .map(|f| {
                        let sums: Vec<f64> = chunks.iter().map(|c| c.iter().map(|v| v[f]).sum()).collect();
                        centered(&sums)
                    })
                    .collect(),
            }
        }
    }
}

/// Φ_k of scalar per-leaf values (d = 2), e.g. leaf perimeters.
pub fn test_map_scalar(values: &[f64], ptype: &PartitionType) -> Result<WVector> {
    let tuples: Vec<Vec<f64>> = values.iter().map(|v| vec![*v]).collect();
    test_map(&tuples, ptype, 2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> PartitionType {
        s.parse().unwrap()
    }

    fn conf(v: &[(f64, f64)]) -> SiteConfiguration {
        SiteConfiguration::new(v.iter().map(|&(x, y)| Point2::new(x, y)).collect()).unwrap()
    }

    #[test]
    fn type_parsing() {
        let p = t("3,2");
        assert_eq!(p.ns(), &[3, 2]);
        assert_eq!(p.n(), 6);
        assert_eq!(p.top(), 2);
        assert_eq!(p.inner().unwrap().ns(), &[3]);
        assert_eq!(p.site_count(), 2 * 3 + 2);
        assert_eq!(p.to_string(), "3,2");
        assert!("1,2".parse::<PartitionType>().is_err());
        assert!("".parse::<PartitionType>().is_err());
        assert!("2,x".parse::<PartitionType>().is_err());
    }

    #[test]
    fn dimensions() {
        assert_eq!(wvector_dim(&t("3,2"), 2).unwrap(), 5);
        assert_eq!(wvector_dim(&t("2,2,2"), 3).unwrap(), 14);
        assert!(wvector_dim(&t("2"), 1).is_err());
    }

    #[test]
    fn test_map_examples() {
        let v = test_map_scalar(&[3.0, 5.0], &t("2")).unwrap();
        assert_eq!(v.blocks, vec![vec![-1.0, 1.0]]);
        let v = test_map_scalar(&[1.0, 3.0, 2.0, 2.0], &t("2,2")).unwrap();
        assert_eq!(v.children[0].blocks, vec![vec![-1.0, 1.0]]);
        assert_eq!(v.children[1].blocks, vec![vec![0.0, 0.0]]);
        assert_eq!(v.blocks, vec![vec![0.0, 0.0]]);
        assert!(!v.is_zero());
        let z = test_map_scalar(&[0.1; 6], &t("3,2")).unwrap();
        assert!(z.is_zero());
        assert!(test_map_scalar(&[1.0; 5], &t("3,2")).is_err());
    }

    #[test]
    fn coords_round_trip() {
        let p = t("3,2");
        let c: Vec<f64> = (0..10).map(|i| i as f64 - 3.5).collect();
        let v = WVector::from_coords(&p, 3, &c).unwrap();
        v.validate(&p, 3).unwrap();
        assert_eq!(v.coords(), c);
        assert_eq!(v.to_flat().len(), 2 * (2 * 3) + 2 * 2);
    }

    #[test]
    fn site_tree_flatten_round_trip() {
        let child = |dx: f64| SiteTree::leaf(conf(&[(dx, 0.0), (dx, 1.0)]));
        let tree = SiteTree::node(vec![child(0.0), child(1.0)], conf(&[(0.0, 0.5), (1.0, 0.5)])).unwrap();
        let p = tree.partition_type().unwrap();
        assert_eq!(p, t("2,2"));
        let flat = tree.flatten();
        assert_eq!(flat.len(), 6);
        assert_eq!(SiteTree::from_flat(&p, &flat).unwrap(), tree);
        let json = serde_json::to_string(&tree).unwrap();
        assert_eq!(serde_json::from_str::<SiteTree>(&json).unwrap(), tree);
        let leaf_json = serde_json::to_string(&child(0.0)).unwrap();
        assert_eq!(leaf_json, r#"{"sites":[[0.0,0.0],[0.0,1.0]]}"#);
    }

    #[test]
    fn mismatched_children_rejected() {
        let a = SiteTree::leaf(conf(&[(0.0, 0.0), (0.0, 1.0)]));
        let b = SiteTree::leaf(conf(&[(0.0, 0.0), (0.0, 1.0), (1.0, 1.0)]));
        assert!(SiteTree::node(vec![a.clone(), b], conf(&[(0.0, 0.5), (1.0, 0.5)])).is_err());
        assert!(SiteTree::node(vec![a], conf(&[(0.0, 0.5), (1.0, 0.5)])).is_err());
    }

    #[test]
    fn quarters() {
        let k = ConvexPolygon::unit_square();
        let f = DensityField::uniform(1.0).unwrap();
        let tree = SiteTree::node(
            vec![
                SiteTree::leaf(conf(&[(0.25, 0.25), (0.25, 0.75)])),
                SiteTree::leaf(conf(&[(0.75, 0.25), (0.75, 0.75)])),
            ],
            conf(&[(0.25, 0.5), (0.75, 0.5)]),
        )
        .unwrap();
        let p = iterated_partition(&k, &f, &tree, &Default::default()).unwrap();
        let leaves = p.leaves();
        assert_eq!(leaves.len(), 4);
        for l in &leaves {
            assert!((l.area() - 0.25).abs() < 1e-12);
        }
        assert!(leaves[0].contains(Point2::new(0.1, 0.1)));
        assert!(leaves[1].contains(Point2::new(0.1, 0.9)));
        assert!(leaves[2].contains(Point2::new(0.9, 0.1)));
        assert_eq!(p.top_level_of_leaf(), vec![0, 0, 1, 1]);
        assert_eq!(p.all_sites().len(), 6);
    }
}
