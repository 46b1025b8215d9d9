//! Power (generalised Voronoi) diagrams clipped to a convex body, and the
//! equal-measure weight solver.
//!
//! The i-th power cell is `{p : |p - x_i|^2 - w_i <= |p - x_j|^2 - w_j ∀j}`.
//! Quadratic terms cancel, so each cell is an intersection of `n - 1`
//! half-planes and the clipped cell `K_i(x, w)` is a convex polygon or empty.
//!
//! Weights live in the zero-sum hyperplane `W_n`; adding a constant to all
//! weights does not change the diagram.

use log::{debug, trace};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ConvexPolygon, HalfPlane, Point2};
use crate::measure::{measure_opt, measure_polygon, validate_positive_on, DensityField};

/// Minimum pairwise distance of sites.
pub const MIN_SITE_SEPARATION: f64 = 1e-9;
/// Smallest admissible target fraction.
pub const MIN_LAMBDA: f64 = 1e-6;

/// Pairwise distinct sites `x ∈ F(R², n)`, `n >= 2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point2>", into = "Vec<Point2>")]
pub struct SiteConfiguration(Vec<Point2>);

impl TryFrom<Vec<Point2>> for SiteConfiguration {
    type Error = Error;
    fn try_from(v: Vec<Point2>) -> Result<Self> {
        SiteConfiguration::new(v)
    }
}

impl From<SiteConfiguration> for Vec<Point2> {
    fn from(s: SiteConfiguration) -> Self {
        s.0
    }
}

impl SiteConfiguration {
    pub fn new(sites: Vec<Point2>) -> Result<Self> {
        if sites.len() < 2 {
            return Err(Error::InvalidInput(format!("need at least 2 sites, got {}", sites.len())));
        }
        if sites.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidInput("site coordinates must be finite".into()));
        }
        if let Some((i, j, d)) = closest_pair(&sites) {
            if d < MIN_SITE_SEPARATION {
                return Err(Error::InvalidInput(format!(
                    "sites {i} and {j} are {d:.3e} apart (minimum {MIN_SITE_SEPARATION:e})"
                )));
            }
        }
        Ok(SiteConfiguration(sites))
    }

    pub fn points(&self) -> &[Point2] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `σ · x`: the site at position `i` moves to position `σ(i)`.
    pub fn permuted(&self, images: &[usize]) -> SiteConfiguration {
        let mut out = self.0.clone();
        for (i, &j) in images.iter().enumerate() {
            out[j] = self.0[i];
        }
        SiteConfiguration(out)
    }
}

/// Closest pair of points, brute force.
pub fn closest_pair(points: &[Point2]) -> Option<(usize, usize, f64)> {
    let mut best: Option<(usize, usize, f64)> = None;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let d = points[i].dist(points[j]);
            if best.map_or(true, |(_, _, b)| d < b) {
                best = Some((i, j, d));
            }
        }
    }
    best
}

/// Weight vector in `W_n` (zero coordinate sum).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WeightsRepr", into = "WeightsRepr")]
pub struct WeightVector(Vec<f64>);

#[derive(Serialize, Deserialize)]
struct WeightsRepr {
    w: Vec<f64>,
}

impl TryFrom<WeightsRepr> for WeightVector {
    type Error = Error;
    fn try_from(r: WeightsRepr) -> Result<Self> {
        WeightVector::new(r.w)
    }
}

impl From<WeightVector> for WeightsRepr {
    fn from(w: WeightVector) -> Self {
        WeightsRepr { w: w.0 }
    }
}

impl WeightVector {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("weights must be finite".into()));
        }
        let sum: f64 = w.iter().sum();
        let scale = w.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        if sum.abs() > 1e-9 * scale {
            return Err(Error::InvalidInput(format!("weights must sum to zero, got {sum:e}")));
        }
        Ok(WeightVector(w))
    }

    /// Orthogonal projection onto `W_n`.
    pub fn projected(mut w: Vec<f64>) -> Self {
        let mean = w.iter().sum::<f64>() / w.len().max(1) as f64;
        for v in &mut w {
            *v -= mean;
        }
        WeightVector(w)
    }

    pub fn zeros(n: usize) -> Self {
        WeightVector(vec![0.0; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn permuted(&self, images: &[usize]) -> WeightVector {
        let mut out = self.0.clone();
        for (i, &j) in images.iter().enumerate() {
            out[j] = self.0[i];
        }
        WeightVector(out)
    }
}

/// The clipped cells `K_i(x, w) = K ∩ C_i(x, w)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellPartition {
    pub parent: ConvexPolygon,
    pub cells: Vec<Option<ConvexPolygon>>,
}

impl CellPartition {
    pub fn areas(&self) -> Vec<f64> {
        self.cells.iter().map(|c| c.as_ref().map_or(0.0, |p| p.area())).collect()
    }

    pub fn measures(&self, field: &DensityField) -> Vec<f64> {
        self.cells.iter().map(|c| measure_opt(field, c.as_ref())).collect()
    }

    /// Largest pairwise overlap area between cells.
    pub fn max_overlap(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.cells.iter().enumerate() {
            for b in &self.cells[i + 1..] {
                if let (Some(a), Some(b)) = (a, b) {
                    worst = worst.max(a.intersect(b).map_or(0.0, |c| c.area()));
                }
            }
        }
        worst
    }
}

/// Half-plane where site `i` beats site `j` in the power distance.
pub fn power_halfplane(xi: Point2, xj: Point2, wi: f64, wj: f64) -> HalfPlane {
    let a = (xi - xj) * 2.0;
    let mid = (xi + xj) * 0.5;
    HalfPlane::new(a, -a.dot(mid) + (wi - wj)).expect("distinct sites give a nonzero normal")
}

fn cell(k: &ConvexPolygon, x: &[Point2], w: &[f64], i: usize) -> Option<ConvexPolygon> {
    let mut acc = k.clone();
    for j in 0..x.len() {
        if j != i {
            acc = acc.clip(&power_halfplane(x[i], x[j], w[i], w[j]))?;
        }
    }
    Some(acc)
}

/// Clips `k` to the power diagram of `(x, w)`.
pub fn power_cells(k: &ConvexPolygon, x: &SiteConfiguration, w: &WeightVector) -> Result<CellPartition> {
    if x.len() != w.len() {
        return Err(Error::ShapeMismatch(format!("{} sites but {} weights", x.len(), w.len())));
    }
    Ok(CellPartition { parent: k.clone(), cells: (0..x.len()).map(|i| cell(k, x.points(), w.values(), i)).collect() })
}

#[derive(Clone, Debug)]
pub struct WeightSolverOptions {
    /// Relative tolerance on cell measures: `|μ(K_i) - λ_i μ(K)| <= tol·μ(K)`.
    pub tol: f64,
    pub max_iter: usize,
    /// Starting weights; plain Voronoi (`w = 0`) when absent.
    pub initial: Option<WeightVector>,
}

impl Default for WeightSolverOptions {
    fn default() -> Self {
        Self { tol: 1e-9, max_iter: 10_000, initial: None }
    }
}

impl WeightSolverOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

#[derive(Clone, Debug)]
pub struct WeightSolution {
    pub weights: WeightVector,
    /// Final `max_i |μ(K_i) - λ_i μ(K)| / μ(K)`.
    pub residual: f64,
    pub iterations: usize,
}

pub fn uniform_lambda(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}

fn validate_lambda(lambda: &[f64], n: usize) -> Result<()> {
    if lambda.len() != n {
        return Err(Error::InvalidInput(format!("lambda has {} entries for {n} sites", lambda.len())));
    }
    if let Some(l) = lambda.iter().find(|l| !(l.is_finite() && **l >= MIN_LAMBDA && **l <= 1.0)) {
        return Err(Error::InvalidInput(format!("lambda entries must lie in [{MIN_LAMBDA:e}, 1], got {l}")));
    }
    let s: f64 = lambda.iter().sum();
    if (s - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!("lambda must sum to 1, got {s}")));
    }
    Ok(())
}

struct Problem<'a> {
    body: &'a ConvexPolygon,
    field: &'a DensityField,
    sites: &'a [Point2],
    targets: Vec<f64>,
}

impl Problem<'_> {
    fn masses(&self, w: &[f64]) -> Vec<f64> {
        (0..self.sites.len()).map(|i| measure_opt(self.field, cell(self.body, self.sites, w, i).as_ref())).collect()
    }

    fn residual(&self, m: &[f64]) -> Vec<f64> {
        self.targets.iter().zip(m).map(|(t, m)| t - m).collect()
    }

    /// Central-difference Jacobian `∂μ(K_i)/∂w_j`.
    fn jacobian(&self, w: &[f64], h: f64) -> Vec<Vec<f64>> {
        let n = w.len();
        let mut jac = vec![vec![0.0; n]; n];
        let mut probe = w.to_vec();
        for j in 0..n {
            probe[j] = w[j] + h;
            let up = self.masses(&probe);
            probe[j] = w[j] - h;
            let down = self.masses(&probe);
            probe[j] = w[j];
            for i in 0..n {
                jac[i][j] = (up[i] - down[i]) / (2.0 * h);
            }
        }
        jac
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn center(v: &mut [f64]) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    for x in v {
        *x -= mean;
    }
}

/// Gaussian elimination with partial pivoting; `None` on a singular pivot.
#[allow(clippy::needless_range_loop)]
pub(crate) fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 || !a[piv][col].is_finite() {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for c in col..n {
                    a[row][c] -= f * a[col][c];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|c| a[row][c] * x[c]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Finds weights `w ∈ W_n` with `μ(K_i(x, w)) = λ_i μ(K)` for every `i`.
///
/// Each iteration takes a step on the concave transport dual, whose gradient
/// is the residual `λ_i μ(K) - μ(K_i)`. The step is preconditioned by a
/// finite-difference Jacobian of the cell measures (a graph Laplacian,
/// regularised on its kernel) and accepted by backtracking on the residual
/// norm; plain gradient steps are the fallback when the preconditioned
/// direction does not decrease the residual.
pub fn solve_weights_detailed(
    body: &ConvexPolygon,
    field: &DensityField,
    x: &SiteConfiguration,
    lambda: &[f64],
    opts: &WeightSolverOptions,
) -> Result<WeightSolution> {
    let n = x.len();
    validate_lambda(lambda, n)?;
    if !(opts.tol.is_finite() && opts.tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {}", opts.tol)));
    }
    validate_positive_on(field, body)?;
    let total = measure_polygon(field, body);
    let problem = Problem { body, field, sites: x.points(), targets: lambda.iter().map(|l| l * total).collect() };

    // Weights are squared lengths; beyond span² every cell is empty or full.
    let (mut lo, mut hi) = body.bounding_box();
    for p in x.points() {
        lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let span_sq = (hi - lo).norm_sq();
    let fd_step = 1e-7 * span_sq;

    let mut w: Vec<f64> = match &opts.initial {
        Some(w0) if w0.len() == n => w0.values().to_vec(),
        Some(w0) => {
            return Err(Error::ShapeMismatch(format!("initial weights have {} entries for {n} sites", w0.len())))
        }
        None => vec![0.0; n],
    };
    center(&mut w);

    let mut r = problem.residual(&problem.masses(&w));
    let mut rel = max_abs(&r) / total;
    for iter in 0..opts.max_iter {
        if rel <= opts.tol {
            return Ok(WeightSolution { weights: WeightVector(w), residual: rel, iterations: iter });
        }
        trace!("weights iter {iter}: residual {rel:.3e}");

        let jac = problem.jacobian(&w, fd_step);
        let trace_j: f64 = (0..n).map(|i| jac[i][i]).sum::<f64>();
        let diag = if trace_j > 0.0 { trace_j / n as f64 } else { total / span_sq };
        let mut a = jac;
        for (i, row) in a.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v += diag / n as f64;
                if i == j {
                    *v += 1e-10 * diag;
                }
            }
        }
        let newton = solve_dense(a, r.clone()).map(|mut d| {
            center(&mut d);
            d
        });
        let gradient: Vec<f64> = r.iter().map(|v| v * span_sq / total).collect();

        let base = norm2(&r);
        let mut accepted = false;
        for dir in newton.iter().chain(std::iter::once(&gradient)) {
            let mut dir = dir.clone();
            let big = max_abs(&dir);
            if big > span_sq {
                dir.iter_mut().for_each(|v| *v *= span_sq / big);
            }
            let mut alpha = 1.0;
            for _ in 0..60 {
                let trial: Vec<f64> = w.iter().zip(&dir).map(|(wi, di)| wi + alpha * di).collect();
                let rt = problem.residual(&problem.masses(&trial));
                if norm2(&rt) < (1.0 - 1e-4 * alpha) * base {
                    w = trial;
                    center(&mut w);
                    r = rt;
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if accepted {
                break;
            }
        }
        rel = max_abs(&r) / total;
        if !accepted {
            debug!("weight solver stalled at iteration {iter}, residual {rel:.3e}");
            if rel <= opts.tol {
                break;
            }
            return Err(Error::NonConvergence { iterations: iter + 1, residual: rel });
        }
    }
    if rel <= opts.tol {
        Ok(WeightSolution { weights: WeightVector(w), residual: rel, iterations: opts.max_iter })
    } else {
        Err(Error::NonConvergence { iterations: opts.max_iter, residual: rel })
    }
}

/// See [`solve_weights_detailed`].
pub fn solve_weights(
    body: &ConvexPolygon,
    field: &DensityField,
    x: &SiteConfiguration,
    lambda: &[f64],
    opts: &WeightSolverOptions,
) -> Result<WeightVector> {
    solve_weights_detailed(body, field, x, lambda, opts).map(|s| s.weights)
}

/// The regular equipartition `K(x) = K(x, w_K(x))` together with its weights.
pub fn regular_equipartition(
    body: &ConvexPolygon,
    field: &DensityField,
    x: &SiteConfiguration,
    opts: &WeightSolverOptions,
) -> Result<(WeightVector, CellPartition)> {
    let w = solve_weights(body, field, x, &uniform_lambda(x.len()), opts)?;
    let cells = power_cells(body, x, &w)?;
    if let Some(i) = cells.cells.iter().position(Option::is_none) {
        return Err(Error::Verification(format!("cell {i} is empty after solving")));
    }
    Ok((w, cells))
}
