//! C ABI over the `equipart` library.
//!
//! Objects are opaque handles created by `eq_*_new`-style functions and
//! released with the matching `eq_*_free`. Every fallible function returns an
//! [`EqStatus`]; on failure a message is available from
//! [`eq_last_error_message`] on the same thread. Panics are caught at the
//! boundary and reported as `EQ_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use equipart::geometry::{ConvexPolygon, Point2};
use equipart::iterated::{iterated_partition, wvector_dim, PartitionTree, PartitionType, SiteTree};
use equipart::measure::DensityField;
use equipart::power::{solve_weights_detailed, uniform_lambda, SiteConfiguration, WeightSolverOptions};
use equipart::wreath::decide_obstruction;
use equipart::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EqStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NonConvergence = 3,
    Parse = 4,
    Panic = 5,
    BufferTooSmall = 6,
}

/// Convex polygon handle.
pub struct EqPolygon(ConvexPolygon);

/// Density field handle.
pub struct EqDensity(DensityField);

/// Iterated partition handle.
pub struct EqPartition {
    tree: PartitionTree,
    leaves: Vec<ConvexPolygon>,
}

/// Result of [`eq_decide_obstruction`].
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EqVerdict {
    /// 1 if the equivariant map exists, 0 otherwise.
    pub exists_map: u8,
    pub gcd: u64,
    /// The common prime when `exists_map == 0`, else 0.
    pub prime: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(EqStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            _ if e.residual().is_some() => EqStatus::NonConvergence,
            Error::Json(_) => EqStatus::Parse,
            _ => EqStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(EqStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> EqStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EqStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            EqStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn reference<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn points(xy: &[f64]) -> Vec<Point2> {
    xy.chunks_exact(2).map(|c| Point2::new(c[0], c[1])).collect()
}

unsafe fn partition_type(ns: *const usize, k: usize) -> Result<PartitionType, Failure> {
    Ok(PartitionType::new(slice(ns, k, "ns")?.to_vec())?)
}

/// Message of the last failed call on this thread, or NULL. The pointer stays
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn eq_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn eq_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a polygon from `n_vertices` counter-clockwise `(x, y)` pairs.
///
/// # Safety
/// `xy` must point to `2 * n_vertices` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eq_polygon_new(xy: *const f64, n_vertices: usize, out: *mut *mut EqPolygon) -> EqStatus {
    guard(|| {
        let coords = slice(xy, 2 * n_vertices, "xy")?;
        let poly = ConvexPolygon::new(points(coords))?;
        write(out, Box::into_raw(Box::new(EqPolygon(poly))), "out")
    })
}

/// Parses `{"vertices": [[x, y], ...]}`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eq_polygon_from_json(json: *const c_char, out: *mut *mut EqPolygon) -> EqStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        let text =
            CStr::from_ptr(json).to_str().map_err(|e| Failure(EqStatus::Parse, format!("json is not UTF-8: {e}")))?;
        let poly: ConvexPolygon = serde_json::from_str(text).map_err(|e| {
            let status = if e.is_data() { EqStatus::InvalidArgument } else { EqStatus::Parse };
            Failure(status, e.to_string())
        })?;
        write(out, Box::into_raw(Box::new(EqPolygon(poly))), "out")
    })
}

/// # Safety
/// `p` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn eq_polygon_free(p: *mut EqPolygon) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// # Safety
/// `p` must be a live polygon handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eq_polygon_area(p: *const EqPolygon, out: *mut f64) -> EqStatus {
    guard(|| write(out, reference(p, "polygon")?.0.area(), "out"))
}

/// # Safety
/// `p` must be a live polygon handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eq_polygon_perimeter(p: *const EqPolygon, out: *mut f64) -> EqStatus {
    guard(|| write(out, reference(p, "polygon")?.0.perimeter(), "out"))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eq_density_uniform(value: f64, out: *mut *mut EqDensity) -> EqStatus {
    guard(|| {
        let d = DensityField::uniform(value)?;
        write(out, Box::into_raw(Box::new(EqDensity(d))), "out")
    })
}

/// Piecewise-constant density on a `rows x cols` grid of square cells;
/// `values` is row-major with row 0 at the bottom.
///
/// # Safety
/// `values` must point to `rows * cols` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eq_density_grid(
    origin_x: f64,
    origin_y: f64,
    cell_size: f64,
    values: *const f64,
    rows: usize,
    cols: usize,
    out: *mut *mut EqDensity,
) -> EqStatus {
    guard(|| {
        let count =
            rows.checked_mul(cols).ok_or_else(|| Failure(EqStatus::InvalidArgument, "grid size overflows".into()))?;
        let v = slice(values, count, "values")?;
        let grid = if cols == 0 { Vec::new() } else { v.chunks(cols).map(<[f64]>::to_vec).collect() };
        let d = DensityField::grid(Point2::new(origin_x, origin_y), cell_size, grid)?;
        write(out, Box::into_raw(Box::new(EqDensity(d))), "out")
    })
}

/// # Safety
/// `d` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn eq_density_free(d: *mut EqDensity) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Solves for weights giving cell measures `lambda_i * mu(body)`.
///
/// `lambda` may be NULL for equal fractions. `max_iter == 0` selects the
/// default budget. `residual_out` may be NULL; when given it receives the
/// final relative residual, also on non-convergence.
///
/// # Safety
/// `sites_xy` must hold `2 * n` doubles, `lambda` (if not NULL) and
/// `weights_out` `n` doubles each.
#[no_mangle]
pub unsafe extern "C" fn eq_solve_weights(
    body: *const EqPolygon,
    density: *const EqDensity,
    sites_xy: *const f64,
    n: usize,
    lambda: *const f64,
    tol: f64,
    max_iter: usize,
    weights_out: *mut f64,
    residual_out: *mut f64,
) -> EqStatus {
    guard(|| {
        let body = &reference(body, "body")?.0;
        let field = &reference(density, "density")?.0;
        let sites = SiteConfiguration::new(points(slice(sites_xy, 2 * n, "sites_xy")?))?;
        let lambda = if lambda.is_null() { uniform_lambda(n) } else { slice(lambda, n, "lambda")?.to_vec() };
        if weights_out.is_null() {
            return Err(null("weights_out"));
        }
        let mut opts = WeightSolverOptions::with_tol(tol);
        if max_iter > 0 {
            opts.max_iter = max_iter;
        }
        match solve_weights_detailed(body, field, &sites, &lambda, &opts) {
            Ok(sol) => {
                std::slice::from_raw_parts_mut(weights_out, n).copy_from_slice(sol.weights.values());
                if !residual_out.is_null() {
                    residual_out.write(sol.residual);
                }
                Ok(())
            }
            Err(e) => {
                if let (false, Some(r)) = (residual_out.is_null(), e.residual()) {
                    residual_out.write(r);
                }
                Err(e.into())
            }
        }
    })
}

/// Iterated partition of type `(ns[0], ..., ns[k-1])`.
///
/// `sites_xy` lists every site of the site tree depth first: the sites of
/// top-level cell 0's subtree, then cell 1's, ..., then the root's own
/// `ns[k-1]` sites; recursively the same inside each subtree.
///
/// # Safety
/// `ns` must hold `k` entries and `sites_xy` `2 * n_sites` doubles.
#[no_mangle]
pub unsafe extern "C" fn eq_iterated_partition(
    body: *const EqPolygon,
    density: *const EqDensity,
    ns: *const usize,
    k: usize,
    sites_xy: *const f64,
    n_sites: usize,
    tol: f64,
    out: *mut *mut EqPartition,
) -> EqStatus {
    guard(|| {
        let body = &reference(body, "body")?.0;
        let field = &reference(density, "density")?.0;
        let ptype = partition_type(ns, k)?;
        let tree = SiteTree::from_flat(&ptype, &points(slice(sites_xy, 2 * n_sites, "sites_xy")?))?;
        let tree = iterated_partition(body, field, &tree, &WeightSolverOptions::with_tol(tol))?;
        let leaves = tree.leaves().into_iter().cloned().collect();
        write(out, Box::into_raw(Box::new(EqPartition { tree, leaves })), "out")
    })
}

/// # Safety
/// `p` must be a live partition handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eq_partition_leaf_count(p: *const EqPartition, out: *mut usize) -> EqStatus {
    guard(|| write(out, reference(p, "partition")?.leaves.len(), "out"))
}

/// Copies the vertices of leaf `leaf` into `xy_out` (room for `capacity`
/// vertices). `n_vertices_out` always receives the vertex count; if it
/// exceeds `capacity` nothing is copied and `EQ_STATUS_BUFFER_TOO_SMALL` is
/// returned.
///
/// # Safety
/// `xy_out` must hold `2 * capacity` doubles (may be NULL if `capacity` is 0).
#[no_mangle]
pub unsafe extern "C" fn eq_partition_leaf_vertices(
    p: *const EqPartition,
    leaf: usize,
    xy_out: *mut f64,
    capacity: usize,
    n_vertices_out: *mut usize,
) -> EqStatus {
    guard(|| {
        let part = reference(p, "partition")?;
        let cell = part.leaves.get(leaf).ok_or_else(|| {
            Failure(EqStatus::InvalidArgument, format!("leaf {leaf} out of range ({} leaves)", part.leaves.len()))
        })?;
        let verts = cell.vertices();
        write(n_vertices_out, verts.len(), "n_vertices_out")?;
        if verts.len() > capacity {
            return Err(Failure(
                EqStatus::BufferTooSmall,
                format!("leaf has {} vertices, buffer holds {capacity}", verts.len()),
            ));
        }
        if xy_out.is_null() {
            return Err(null("xy_out"));
        }
        let dst = std::slice::from_raw_parts_mut(xy_out, 2 * verts.len());
        for (i, v) in verts.iter().enumerate() {
            dst[2 * i] = v.x;
            dst[2 * i + 1] = v.y;
        }
        Ok(())
    })
}

/// # Safety
/// `p` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn eq_partition_free(p: *mut EqPartition) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// # Safety
/// `ns` must hold `k` entries; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eq_decide_obstruction(ns: *const usize, k: usize, d: usize, out: *mut EqVerdict) -> EqStatus {
    guard(|| {
        let v = decide_obstruction(&partition_type(ns, k)?, d)?;
        let verdict = EqVerdict { exists_map: u8::from(v.exists_map), gcd: v.gcd, prime: v.prime.unwrap_or(0) };
        write(out, verdict, "out")
    })
}

/// `(d - 1)(n_1 ⋯ n_k - 1)`.
///
/// # Safety
/// `ns` must hold `k` entries; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eq_wvector_dim(ns: *const usize, k: usize, d: usize, out: *mut usize) -> EqStatus {
    guard(|| write(out, wvector_dim(&partition_type(ns, k)?, d)?, "out"))
}

impl EqPartition {
    /// The full partition tree.
    pub fn tree(&self) -> &PartitionTree {
        &self.tree
    }
}
