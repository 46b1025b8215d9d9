use std::ffi::{CStr, CString};
use std::ptr;

use equipart_ffi::*;

fn last_error() -> String {
    let p = eq_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn square() -> *mut EqPolygon {
    let xy = [0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0];
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { eq_polygon_new(xy.as_ptr(), 4, &mut p) }, EqStatus::Ok);
    p
}

fn uniform() -> *mut EqDensity {
    let mut d = ptr::null_mut();
    assert_eq!(unsafe { eq_density_uniform(1.0, &mut d) }, EqStatus::Ok);
    d
}

#[test]
fn polygon_lifecycle() {
    let p = square();
    let (mut a, mut per) = (0.0, 0.0);
    unsafe {
        assert_eq!(eq_polygon_area(p, &mut a), EqStatus::Ok);
        assert_eq!(eq_polygon_perimeter(p, &mut per), EqStatus::Ok);
        eq_polygon_free(p);
        eq_polygon_free(ptr::null_mut());
    }
    assert!((a - 1.0).abs() < 1e-15);
    assert!((per - 4.0).abs() < 1e-15);
}

#[test]
fn polygon_from_json() {
    let json = CString::new(r#"{"vertices":[[0,0],[2,0],[0,2]]}"#).unwrap();
    let mut p = ptr::null_mut();
    let mut a = 0.0;
    unsafe {
        assert_eq!(eq_polygon_from_json(json.as_ptr(), &mut p), EqStatus::Ok);
        assert_eq!(eq_polygon_area(p, &mut a), EqStatus::Ok);
        eq_polygon_free(p);
    }
    assert!((a - 2.0).abs() < 1e-15);

    let bad = CString::new("{not json").unwrap();
    assert_eq!(unsafe { eq_polygon_from_json(bad.as_ptr(), &mut p) }, EqStatus::Parse);
    let clockwise = CString::new(r#"{"vertices":[[0,0],[0,1],[1,0]]}"#).unwrap();
    assert_eq!(unsafe { eq_polygon_from_json(clockwise.as_ptr(), &mut p) }, EqStatus::InvalidArgument);
    assert!(!last_error().is_empty());
}

#[test]
fn invalid_polygon_reports_message() {
    let xy = [0.0, 0.0, 1.0, 1.0, 2.0, 2.0];
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { eq_polygon_new(xy.as_ptr(), 3, &mut p) }, EqStatus::InvalidArgument);
    assert!(p.is_null());
    assert!(!last_error().is_empty());
}

#[test]
fn null_pointers_rejected() {
    let mut a = 0.0;
    unsafe {
        assert_eq!(eq_polygon_area(ptr::null(), &mut a), EqStatus::NullPointer);
        assert_eq!(eq_polygon_new(ptr::null(), 3, &mut ptr::null_mut()), EqStatus::NullPointer);
        let p = square();
        assert_eq!(eq_polygon_area(p, ptr::null_mut()), EqStatus::NullPointer);
        eq_polygon_free(p);
    }
    assert!(last_error().contains("null"));
}

#[test]
fn success_clears_error() {
    let mut a = 0.0;
    unsafe { eq_polygon_area(ptr::null(), &mut a) };
    assert!(!eq_last_error_message().is_null());
    let p = square();
    assert!(eq_last_error_message().is_null());
    unsafe { eq_polygon_free(p) };
}

#[test]
fn weights_two_sites_symmetric() {
    let (p, d) = (square(), uniform());
    let sites = [0.25, 0.5, 0.75, 0.5];
    let mut w = [f64::NAN; 2];
    let mut r = f64::NAN;
    let st = unsafe { eq_solve_weights(p, d, sites.as_ptr(), 2, ptr::null(), 1e-10, 0, w.as_mut_ptr(), &mut r) };
    assert_eq!(st, EqStatus::Ok);
    assert!(w[0].abs() < 1e-9 && w[1].abs() < 1e-9);
    assert!(r <= 1e-10);
    unsafe {
        eq_polygon_free(p);
        eq_density_free(d);
    }
}

#[test]
fn weights_unequal_lambda_on_grid() {
    let p = square();
    let mut d = ptr::null_mut();
    let values = [1.0, 1.0, 3.0, 3.0];
    assert_eq!(unsafe { eq_density_grid(0.0, 0.0, 0.5, values.as_ptr(), 2, 2, &mut d) }, EqStatus::Ok);
    let sites = [0.2, 0.3, 0.8, 0.6, 0.4, 0.9];
    let lambda = [0.5, 0.3, 0.2];
    let mut w = [0.0; 3];
    let st = unsafe {
        eq_solve_weights(p, d, sites.as_ptr(), 3, lambda.as_ptr(), 1e-10, 0, w.as_mut_ptr(), ptr::null_mut())
    };
    assert_eq!(st, EqStatus::Ok);
    assert!(w.iter().sum::<f64>().abs() < 1e-9);
    unsafe {
        eq_polygon_free(p);
        eq_density_free(d);
    }
}

#[test]
fn weights_budget_exhausted() {
    let (p, d) = (square(), uniform());
    let sites = [0.1, 0.1, 0.9, 0.2, 0.5, 0.95];
    let mut w = [0.0; 3];
    let mut r = f64::NAN;
    let st = unsafe { eq_solve_weights(p, d, sites.as_ptr(), 3, ptr::null(), 1e-14, 1, w.as_mut_ptr(), &mut r) };
    assert_eq!(st, EqStatus::NonConvergence);
    assert!(r.is_finite() && r > 1e-14);
    unsafe {
        eq_polygon_free(p);
        eq_density_free(d);
    }
}

#[test]
fn bad_grid_rejected() {
    let mut d = ptr::null_mut();
    let values = [0.0; 4];
    assert_eq!(unsafe { eq_density_grid(0.0, 0.0, 0.5, values.as_ptr(), 2, 2, &mut d) }, EqStatus::InvalidArgument);
    assert_eq!(unsafe { eq_density_uniform(-1.0, &mut d) }, EqStatus::InvalidArgument);
}

#[test]
fn iterated_partition_leaves() {
    let (p, d) = (square(), uniform());
    let ns = [2usize, 2];
    // Leaves of cell 0, leaves of cell 1, then the root sites.
    let sites = [0.25, 0.2, 0.25, 0.8, 0.75, 0.2, 0.75, 0.8, 0.25, 0.5, 0.75, 0.5];
    let mut part = ptr::null_mut();
    let st = unsafe { eq_iterated_partition(p, d, ns.as_ptr(), 2, sites.as_ptr(), 6, 1e-10, &mut part) };
    assert_eq!(st, EqStatus::Ok, "{}", last_error());
    let mut count = 0;
    assert_eq!(unsafe { eq_partition_leaf_count(part, &mut count) }, EqStatus::Ok);
    assert_eq!(count, 4);

    let mut total = 0.0;
    for leaf in 0..count {
        let mut nv = 0;
        let st = unsafe { eq_partition_leaf_vertices(part, leaf, ptr::null_mut(), 0, &mut nv) };
        assert_eq!(st, EqStatus::BufferTooSmall);
        let mut buf = vec![0.0; 2 * nv];
        let st = unsafe { eq_partition_leaf_vertices(part, leaf, buf.as_mut_ptr(), nv, &mut nv) };
        assert_eq!(st, EqStatus::Ok);
        let mut xy = ptr::null_mut();
        unsafe { eq_polygon_new(buf.as_ptr(), nv, &mut xy) };
        let mut a = 0.0;
        unsafe {
            eq_polygon_area(xy, &mut a);
            eq_polygon_free(xy);
        }
        assert!((a - 0.25).abs() < 1e-8, "leaf {leaf} area {a}");
        total += a;
    }
    assert!((total - 1.0).abs() < 1e-8);
    let mut nv = 0;
    assert_eq!(unsafe { eq_partition_leaf_vertices(part, 9, ptr::null_mut(), 0, &mut nv) }, EqStatus::InvalidArgument);
    assert_eq!(unsafe { (*part).tree().leaves().len() }, 4);
    unsafe {
        eq_partition_free(part);
        eq_polygon_free(p);
        eq_density_free(d);
    }
}

#[test]
fn iterated_partition_wrong_site_count() {
    let (p, d) = (square(), uniform());
    let ns = [2usize, 2];
    let sites = [0.25, 0.2, 0.25, 0.8];
    let mut part = ptr::null_mut();
    let st = unsafe { eq_iterated_partition(p, d, ns.as_ptr(), 2, sites.as_ptr(), 2, 1e-10, &mut part) };
    assert_eq!(st, EqStatus::InvalidArgument);
    unsafe {
        eq_polygon_free(p);
        eq_density_free(d);
    }
}

#[test]
fn obstruction_verdicts() {
    let mut v = EqVerdict::default();
    let ns = [2usize, 2];
    assert_eq!(unsafe { eq_decide_obstruction(ns.as_ptr(), 2, 2, &mut v) }, EqStatus::Ok);
    assert_eq!(v, EqVerdict { exists_map: 0, gcd: 2, prime: 2 });
    let ns = [2usize, 3];
    assert_eq!(unsafe { eq_decide_obstruction(ns.as_ptr(), 2, 2, &mut v) }, EqStatus::Ok);
    assert_eq!(v, EqVerdict { exists_map: 1, gcd: 1, prime: 0 });
    let ns = [1usize, 3];
    assert_eq!(unsafe { eq_decide_obstruction(ns.as_ptr(), 2, 2, &mut v) }, EqStatus::InvalidArgument);
}

#[test]
fn wvector_dimension() {
    let ns = [3usize, 2];
    let mut dim = 0;
    assert_eq!(unsafe { eq_wvector_dim(ns.as_ptr(), 2, 3, &mut dim) }, EqStatus::Ok);
    assert_eq!(dim, 2 * (6 - 1));
    assert_eq!(unsafe { eq_wvector_dim(ns.as_ptr(), 2, 1, &mut dim) }, EqStatus::InvalidArgument);
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(eq_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/equipart.h")).unwrap();
    let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/src/lib.rs")).unwrap();
    let exports: Vec<&str> = src.split("extern \"C\" fn ").skip(1).map(|s| s.split('(').next().unwrap()).collect();
    assert!(exports.len() >= 15);
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(header.contains("typedef struct EqPolygon EqPolygon;"));
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = which_cc() else { return };
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use_header.c");
    std::fs::write(
        &src,
        "#include \"equipart.h\"\nint main(void) { EqPolygon *p = 0; EqVerdict v; (void)v; return p == 0 ? EQ_STATUS_OK : 1; }\n",
    )
    .unwrap();
    let status = std::process::Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(concat!(env!("CARGO_MANIFEST_DIR"), "/include"))
        .arg(&src)
        .status()
        .unwrap();
    assert!(status.success());
}

fn which_cc() -> Result<&'static str, ()> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| std::process::Command::new(c).arg("--version").output().is_ok_and(|o| o.status.success()))
        .ok_or(())
}
