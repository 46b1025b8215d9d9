//! Numerical search for iterated partitions whose leaves have equal area and
//! equal perimeter: multi-start Nelder–Mead over the flattened site
//! coordinates, minimising `‖Φ_k(leaf perimeters)‖²`, with a Gauss–Newton
//! polish on `Φ_k = 0` whenever the simplex collapses.

use std::cell::RefCell;

use log::{debug, info};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ConvexPolygon, Point2};
use crate::iterated::{iterated_partition, test_map_scalar, wvector_norm, PartitionTree, PartitionType, SiteTree};
use crate::measure::{validate_positive_on, DensityField};
use crate::power::{solve_dense, SiteConfiguration, WeightSolverOptions, MIN_SITE_SEPARATION};

/// Separation enforced by the collision repair (well above the hard minimum).
pub const REPAIR_SEPARATION: f64 = 1e-7;
const REPAIR_ATTEMPTS: usize = 100;
/// Unproductive simplex rebuilds before a Nelder–Mead run gives up.
pub const MAX_KICKS: usize = 25;
const KICK_FACTOR: f64 = 4.0;
/// Jacobian difference step relative to the body diameter.
const GN_STEP: f64 = 1e-7;
const GN_MAX_ITER: usize = 30;
const GN_BACKTRACK: usize = 20;

/// One objective evaluation.
#[derive(Clone, Debug)]
pub struct Evaluation {
    /// `‖Φ_k‖²` of the leaf perimeters.
    pub value: f64,
    pub spread: f64,
    pub partition: PartitionTree,
}

fn spread(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    max - min
}

/// Partitions along `tree` and scores the leaf perimeters; `None` when the
/// partition cannot be computed.
pub fn evaluate(
    body: &ConvexPolygon,
    field: &DensityField,
    tree: &SiteTree,
    weight_opts: &WeightSolverOptions,
) -> Option<Evaluation> {
    let ptype = tree.partition_type().ok()?;
    let partition = match iterated_partition(body, field, tree, weight_opts) {
        Ok(p) => p,
        Err(e) => {
            debug!("objective penalty: {e}");
            return None;
        }
    };
    let perimeters = partition.leaf_perimeters();
    let phi = test_map_scalar(&perimeters, &ptype).ok()?;
    let norm = wvector_norm(&phi);
    Some(Evaluation { value: norm * norm, spread: spread(&perimeters), partition })
}

/// `‖Φ_k(leaf perimeters)‖²`, or `+∞` when the partition fails.
pub fn objective(body: &ConvexPolygon, field: &DensityField, tree: &SiteTree) -> f64 {
    evaluate(body, field, tree, &NrrOptions::default().weight_options()).map_or(f64::INFINITY, |e| e.value)
}

#[derive(Clone, Debug)]
pub struct NrrOptions {
    pub seed: u64,
    pub restarts: usize,
    /// Success threshold on the leaf perimeter spread.
    pub tol: f64,
    /// Objective evaluations per restart.
    pub budget: usize,
    /// Restarts run concurrently; results do not depend on it.
    pub jobs: usize,
    /// Relative tolerance of the inner weight solves.
    pub weight_tol: f64,
}

impl Default for NrrOptions {
    fn default() -> Self {
        Self { seed: 0, restarts: 8, tol: 1e-6, budget: 20_000, jobs: 1, weight_tol: 1e-12 }
    }
}

impl NrrOptions {
    fn weight_options(&self) -> WeightSolverOptions {
        WeightSolverOptions { tol: self.weight_tol, ..WeightSolverOptions::default() }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveReport {
    pub partition_type: PartitionType,
    pub seed: u64,
    pub success: bool,
    /// `‖Φ_k‖` at the best tree.
    pub residual: f64,
    pub perimeter_spread: f64,
    pub leaf_perimeters: Vec<f64>,
    pub leaf_areas: Vec<f64>,
    pub restarts_used: usize,
    pub evaluations: usize,
    pub best_tree: SiteTree,
    pub best_partition: PartitionTree,
}

struct RestartOutcome {
    best: Option<(SiteTree, Evaluation)>,
    evaluations: usize,
}

impl RestartOutcome {
    fn success(&self, tol: f64) -> bool {
        self.best.as_ref().is_some_and(|(_, e)| e.spread <= tol)
    }
}

/// Multi-start search. Restarts run in index order (in batches of `jobs`) and
/// stop after the first success; the report is the best of restarts
/// `0..=first success`, ties going to the lower index.
pub fn solve_nrr(
    body: &ConvexPolygon,
    field: &DensityField,
    ptype: &PartitionType,
    opts: &NrrOptions,
) -> Result<SolveReport> {
    if opts.restarts == 0 {
        return Err(Error::InvalidInput("restarts must be >= 1".into()));
    }
    if !(opts.tol.is_finite() && opts.tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {}", opts.tol)));
    }
    if opts.budget == 0 || opts.jobs == 0 {
        return Err(Error::InvalidInput("budget and jobs must be >= 1".into()));
    }
    validate_positive_on(field, body)?;
    let jobs = opts.jobs;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidInput(format!("cannot start {jobs} worker threads: {e}")))?;

    let mut outcomes: Vec<RestartOutcome> = Vec::new();
    let mut start = 0;
    while start < opts.restarts {
        let end = (start + jobs).min(opts.restarts);
        let batch: Vec<RestartOutcome> =
            pool.install(|| (start..end).into_par_iter().map(|r| run_restart(body, field, ptype, opts, r)).collect());
        let first_success = batch.iter().position(|o| o.success(opts.tol));
        match first_success {
            Some(i) => {
                outcomes.extend(batch.into_iter().take(i + 1));
                break;
            }
            None => outcomes.extend(batch),
        }
        start = end;
    }

    let evaluations = outcomes.iter().map(|o| o.evaluations).sum();
    let restarts_used = outcomes.len();
    let mut best: Option<(SiteTree, Evaluation)> = None;
    for o in outcomes {
        if let Some((tree, ev)) = o.best {
            if best.as_ref().map_or(true, |(_, b)| ev.value < b.value) {
                best = Some((tree, ev));
            }
        }
    }
    let (best_tree, ev) = best.ok_or(Error::NonConvergence { iterations: evaluations, residual: f64::INFINITY })?;
    let leaf_perimeters = ev.partition.leaf_perimeters();
    let leaf_areas = ev.partition.leaves().iter().map(|c| c.area()).collect();
    let report = SolveReport {
        partition_type: ptype.clone(),
        seed: opts.seed,
        success: ev.spread <= opts.tol,
        residual: ev.value.sqrt(),
        perimeter_spread: ev.spread,
        leaf_perimeters,
        leaf_areas,
        restarts_used,
        evaluations,
        best_tree,
        best_partition: ev.partition,
    };
    info!(
        "solve {}: spread {:.3e}, residual {:.3e}, {} restarts, {} evaluations",
        ptype, report.perimeter_spread, report.residual, report.restarts_used, report.evaluations
    );
    Ok(report)
}

fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64 + 1);
    rng
}

/// Objective evaluations of one restart, tracking the best point seen.
struct Search<'a> {
    body: &'a ConvexPolygon,
    field: &'a DensityField,
    ptype: &'a PartitionType,
    weight_opts: WeightSolverOptions,
    tol: f64,
    best: Option<(SiteTree, Evaluation)>,
    best_x: Vec<f64>,
    done: bool,
    evaluations: usize,
}

impl Search<'_> {
    /// `‖Φ‖²` and the coordinates of `Φ` at `x`.
    fn probe(&mut self, x: &[f64]) -> Option<(f64, Vec<f64>)> {
        self.evaluations += 1;
        let tree = tree_from_coords(self.ptype, x)?;
        let ev = evaluate(self.body, self.field, &tree, &self.weight_opts)?;
        let residual = test_map_scalar(&ev.partition.leaf_perimeters(), self.ptype).ok()?.coords();
        let value = ev.value;
        self.done |= ev.spread <= self.tol;
        if self.best.as_ref().map_or(true, |(_, b)| value < b.value) {
            self.best_x = x.to_vec();
            self.best = Some((tree, ev));
        }
        Some((value, residual))
    }

    fn value(&mut self, x: &[f64]) -> f64 {
        self.probe(x).map_or(f64::INFINITY, |(v, _)| v)
    }
}

fn run_restart(
    body: &ConvexPolygon,
    field: &DensityField,
    ptype: &PartitionType,
    opts: &NrrOptions,
    restart: usize,
) -> RestartOutcome {
    let mut rng = restart_rng(opts.seed, restart);
    let Some(initial) = random_site_tree(body, ptype, &mut rng) else {
        return RestartOutcome { best: None, evaluations: 0 };
    };
    let x0: Vec<f64> = initial.flatten().iter().flat_map(|p| [p.x, p.y]).collect();
    let search = Search {
        body,
        field,
        ptype,
        weight_opts: opts.weight_options(),
        tol: opts.tol,
        best: None,
        best_x: x0.clone(),
        done: false,
        evaluations: 0,
    };
    let step = 0.25 * body.diameter();
    let h = GN_STEP * body.diameter();
    let search = RefCell::new(search);
    nelder_mead_polished(
        &mut |x: &[f64]| {
            let mut s = search.borrow_mut();
            (s.value(x), s.done)
        },
        &mut |x: &[f64], remaining: usize| {
            let mut s = search.borrow_mut();
            let before = s.evaluations;
            let found = gauss_newton(&mut s, x, h, before + remaining);
            (found, s.evaluations - before)
        },
        &x0,
        step,
        opts.budget,
        &mut rng,
    );
    let search = search.into_inner();
    debug!(
        "restart {restart}: best spread {:.3e} after {} evaluations",
        search.best.as_ref().map_or(f64::INFINITY, |(_, e)| e.spread),
        search.evaluations
    );
    RestartOutcome { best: search.best, evaluations: search.evaluations }
}

/// Minimum-norm Gauss–Newton on `Φ(x) = 0` with a forward-difference
/// Jacobian of step `h`. Stops on success, stagnation, a failed line search,
/// [`GN_MAX_ITER`] iterations or the evaluation budget.
fn gauss_newton(search: &mut Search<'_>, x0: &[f64], h: f64, budget: usize) -> Option<(Vec<f64>, f64)> {
    let n = x0.len();
    let mut x = x0.to_vec();
    let (mut value, mut r) = search.probe(&x)?;
    let initial = value;
    let result = |x: Vec<f64>, value: f64| (value < initial).then_some((x, value));
    for _ in 0..GN_MAX_ITER {
        if search.done || search.evaluations + n + 1 > budget {
            return result(x, value);
        }
        let m = r.len();
        let mut jac = vec![vec![0.0; n]; m];
        for j in 0..n {
            let mut xp = x.clone();
            xp[j] += h;
            let Some((_, rp)) = search.probe(&xp) else { return result(x, value) };
            for i in 0..m {
                jac[i][j] = (rp[i] - r[i]) / h;
            }
        }
        // (J Jᵀ + μ I) y = r, step = -Jᵀ y.
        let mut a: Vec<Vec<f64>> =
            (0..m).map(|i| (0..m).map(|k| jac[i].iter().zip(&jac[k]).map(|(p, q)| p * q).sum()).collect()).collect();
        let trace: f64 = (0..m).map(|i| a[i][i]).sum();
        if !(trace.is_finite() && trace > 0.0) {
            return result(x, value);
        }
        for (i, row) in a.iter_mut().enumerate() {
            row[i] += 1e-12 * trace / m as f64;
        }
        let Some(y) = solve_dense(a, r.clone()) else { return result(x, value) };
        let step: Vec<f64> = (0..n).map(|j| -(0..m).map(|i| jac[i][j] * y[i]).sum::<f64>()).collect();

        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..GN_BACKTRACK {
            if search.evaluations >= budget {
                return result(x, value);
            }
            let xt: Vec<f64> = x.iter().zip(&step).map(|(a, b)| a + t * b).collect();
            if let Some((vt, rt)) = search.probe(&xt) {
                if vt < value {
                    let progress = vt < value * (1.0 - 1e-3);
                    x = xt;
                    value = vt;
                    r = rt;
                    accepted = progress;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    result(x, value)
}

/// Rebuilds a site tree from flattened coordinates, repairing collisions.
fn tree_from_coords(ptype: &PartitionType, x: &[f64]) -> Option<SiteTree> {
    if x.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let mut points: Vec<Point2> = x.chunks(2).map(|c| Point2::new(c[0], c[1])).collect();
    let mut pos = 0;
    repair_groups(ptype, &mut points, &mut pos)?;
    SiteTree::from_flat(ptype, &points).ok()
}

fn repair_groups(ptype: &PartitionType, points: &mut [Point2], pos: &mut usize) -> Option<()> {
    if let Some(inner) = ptype.inner() {
        for _ in 0..ptype.top() {
            repair_groups(&inner, points, pos)?;
        }
    }
    let group = &mut points[*pos..*pos + ptype.top()];
    *pos += ptype.top();
    repair_collisions(group).then_some(())
}

/// Pushes sites closer than [`REPAIR_SEPARATION`] apart along their
/// connecting ray; returns false if that does not settle.
pub fn repair_collisions(points: &mut [Point2]) -> bool {
    for _ in 0..REPAIR_ATTEMPTS {
        let mut moved = false;
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                let diff = points[j] - points[i];
                let d = diff.norm();
                if d < REPAIR_SEPARATION {
                    let dir = if d > 0.0 { diff * (1.0 / d) } else { unit_direction(i, j) };
                    points[j] = points[i] + dir * (2.0 * REPAIR_SEPARATION);
                    moved = true;
                }
            }
        }
        if !moved {
            return true;
        }
    }
    false
}

fn unit_direction(i: usize, j: usize) -> Point2 {
    let angle = 2.399_963_229_728_653 * (i * 31 + j) as f64;
    Point2::new(angle.cos(), angle.sin())
}

fn sample_in(body: &ConvexPolygon, rng: &mut ChaCha8Rng) -> Option<Point2> {
    let (lo, hi) = body.bounding_box();
    for _ in 0..10_000 {
        let p = Point2::new(rng.gen_range(lo.x..=hi.x), rng.gen_range(lo.y..=hi.y));
        if body.contains(p) {
            return Some(p);
        }
    }
    None
}

/// Random site tree with every site inside `body`.
pub fn random_site_tree(body: &ConvexPolygon, ptype: &PartitionType, rng: &mut ChaCha8Rng) -> Option<SiteTree> {
    let children = match ptype.inner() {
        Some(inner) => (0..ptype.top()).map(|_| random_site_tree(body, &inner, rng)).collect::<Option<Vec<_>>>()?,
        None => Vec::new(),
    };
    for _ in 0..REPAIR_ATTEMPTS {
        let pts = (0..ptype.top()).map(|_| sample_in(body, rng)).collect::<Option<Vec<_>>>()?;
        if let Ok(sites) = SiteConfiguration::new(pts) {
            return Some(SiteTree { children, sites });
        }
    }
    None
}

/// Moves every site by a uniform random vector of length at most
/// `magnitude`; configurations that collide are redrawn.
pub fn perturb_tree(tree: &SiteTree, seed: u64, magnitude: f64) -> Result<SiteTree> {
    if !(magnitude.is_finite() && magnitude >= 0.0) {
        return Err(Error::InvalidInput(format!("magnitude must be >= 0, got {magnitude}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    perturb_rec(tree, magnitude, &mut rng)
}

fn perturb_rec(tree: &SiteTree, magnitude: f64, rng: &mut ChaCha8Rng) -> Result<SiteTree> {
    let children = tree
        .children
        .iter()
        .enumerate()
        .map(|(i, c)| perturb_rec(c, magnitude, rng).map_err(|e| e.at(i)))
        .collect::<Result<Vec<_>>>()?;
    for _ in 0..REPAIR_ATTEMPTS {
        let pts: Vec<Point2> = tree
            .sites
            .points()
            .iter()
            .map(|&p| {
                let r = magnitude * rng.gen::<f64>().sqrt();
                let a = rng.gen_range(0.0..std::f64::consts::TAU);
                p + Point2::new(r * a.cos(), r * a.sin())
            })
            .collect();
        if let Ok(sites) = SiteConfiguration::new(pts) {
            return Ok(SiteTree { children, sites });
        }
    }
    Err(Error::InvalidInput(format!(
        "could not keep sites {MIN_SITE_SEPARATION:e} apart after {REPAIR_ATTEMPTS} attempts"
    )))
}

/// Nelder–Mead with dimension-adaptive coefficients. `f` returns the value
/// and whether to stop. When the simplex collapses it is rebuilt around the
/// best vertex: small if the last cycle made progress, otherwise a large
/// randomly signed simplex that can leave a shallow local minimum. Stops after
/// `budget` evaluations or [`MAX_KICKS`] unproductive cycles. Returns the
/// evaluations used.
pub fn nelder_mead(
    f: &mut impl FnMut(&[f64]) -> (f64, bool),
    x0: &[f64],
    step: f64,
    budget: usize,
    rng: &mut impl Rng,
) -> usize {
    nelder_mead_polished(f, &mut |_: &[f64], _: usize| (None, 0), x0, step, budget, rng)
}

/// [`nelder_mead`] that offers the best vertex of every collapsed simplex to
/// `polish(x, remaining)`, which returns a better point with its value (if
/// found) and the evaluations it spent.
fn nelder_mead_polished(
    f: &mut impl FnMut(&[f64]) -> (f64, bool),
    polish: &mut impl FnMut(&[f64], usize) -> (Option<(Vec<f64>, f64)>, usize),
    x0: &[f64],
    step: f64,
    budget: usize,
    rng: &mut impl Rng,
) -> usize {
    let n = x0.len();
    let nf = n as f64;
    let (alpha, beta, gamma, delta) = (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf);
    let mut evals = 0;
    let mut stop = false;
    let mut eval = |x: &[f64], evals: &mut usize, stop: &mut bool| -> f64 {
        *evals += 1;
        let (v, s) = f(x);
        *stop |= s;
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut center = x0.to_vec();
    let mut scale = vec![step; n];
    let mut kicks = 0;
    while evals < budget && !stop {
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
        let fc = eval(&center, &mut evals, &mut stop);
        simplex.push((center.clone(), fc));
        for i in 0..n {
            if stop || evals >= budget {
                break;
            }
            let mut x = center.clone();
            x[i] += scale[i];
            let v = eval(&x, &mut evals, &mut stop);
            simplex.push((x, v));
        }
        if simplex.len() < n + 1 {
            break;
        }
        let f_start = fc;

        while evals < budget && !stop {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let size = simplex[1..]
                .iter()
                .map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
                .fold(0.0, f64::max);
            if size < 1e-14 * step.max(1e-300) {
                break;
            }
            let centroid: Vec<f64> = (0..n).map(|j| simplex[..n].iter().map(|(x, _)| x[j]).sum::<f64>() / nf).collect();
            let worst = simplex[n].clone();
            let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&worst.0).map(|(c, w)| c + t * (c - w)).collect() };

            let xr = along(alpha);
            let fr = eval(&xr, &mut evals, &mut stop);
            if fr < simplex[0].1 {
                let xe = along(alpha * beta);
                let fe = eval(&xe, &mut evals, &mut stop);
                simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            } else if fr < simplex[n - 1].1 {
                simplex[n] = (xr, fr);
            } else {
                let (xc, fc) = if fr < worst.1 {
                    let xc = along(alpha * gamma);
                    let fc = eval(&xc, &mut evals, &mut stop);
                    (xc, fc)
                } else {
                    let xc = along(-gamma);
                    let fc = eval(&xc, &mut evals, &mut stop);
                    (xc, fc)
                };
                if fc < fr.min(worst.1) {
                    simplex[n] = (xc, fc);
                } else {
                    let best = simplex[0].0.clone();
                    for v in simplex.iter_mut().skip(1) {
                        if stop || evals >= budget {
                            break;
                        }
                        v.0 = best.iter().zip(&v.0).map(|(b, x)| b + delta * (x - b)).collect();
                        v.1 = eval(&v.0, &mut evals, &mut stop);
                    }
                }
            }
        }
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let moved = simplex[0].0.iter().zip(&center).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let mut improved = simplex[0].1 < f_start * (1.0 - 1e-6);
        center = simplex[0].0.clone();
        if !stop && evals < budget {
            let (found, used) = polish(&center, budget - evals);
            evals += used;
            if let Some((x, v)) = found {
                improved |= v < f_start * (1.0 - 1e-6);
                center = x;
            }
        }
        if improved {
            scale = vec![moved.clamp(1e-8 * step, step); n];
        } else {
            kicks += 1;
            if kicks > MAX_KICKS {
                break;
            }
            scale = (0..n)
                .map(|_| {
                    let s = KICK_FACTOR * step * rng.gen_range(0.5..1.0);
                    if rng.gen::<bool>() {
                        s
                    } else {
                        -s
                    }
                })
                .collect();
        }
    }
    evals
}
