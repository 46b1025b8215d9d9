//! Absolutely continuous measures on the plane with piecewise-constant
//! densities, integrated exactly over convex polygons.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ConvexPolygon, HalfPlane, Point2};

/// Density of a measure with respect to Lebesgue measure.
///
/// The grid variant is constant on each square cell; `values[row][col]` covers
/// `[ox + col*s, ox + (col+1)*s] x [oy + row*s, oy + (row+1)*s]`, so row 0 is
/// the bottom row. The density vanishes outside the grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DensityRepr", into = "DensityRepr")]
pub enum DensityField {
    Uniform { value: f64 },
    Grid { origin: Point2, cell_size: f64, values: Vec<Vec<f64>> },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum DensityRepr {
    Uniform { value: f64 },
    Grid { origin: Point2, cell_size: f64, values: Vec<Vec<f64>> },
}

impl TryFrom<DensityRepr> for DensityField {
    type Error = Error;
    fn try_from(r: DensityRepr) -> Result<Self> {
        match r {
            DensityRepr::Uniform { value } => DensityField::uniform(value),
            DensityRepr::Grid { origin, cell_size, values } => DensityField::grid(origin, cell_size, values),
        }
    }
}

impl From<DensityField> for DensityRepr {
    fn from(f: DensityField) -> Self {
        match f {
            DensityField::Uniform { value } => DensityRepr::Uniform { value },
            DensityField::Grid { origin, cell_size, values } => DensityRepr::Grid { origin, cell_size, values },
        }
    }
}

impl DensityField {
    pub fn uniform(value: f64) -> Result<Self> {
        if !(value.is_finite() && value >= 0.0) {
            return Err(Error::InvalidInput(format!("uniform density must be finite and >= 0, got {value}")));
        }
        Ok(DensityField::Uniform { value })
    }

    pub fn grid(origin: Point2, cell_size: f64, values: Vec<Vec<f64>>) -> Result<Self> {
        if !origin.is_finite() {
            return Err(Error::InvalidInput("grid origin must be finite".into()));
        }
        if !(cell_size.is_finite() && cell_size > 0.0) {
            return Err(Error::InvalidInput(format!("grid cell_size must be positive, got {cell_size}")));
        }
        let cols = values.first().map_or(0, Vec::len);
        if values.is_empty() || cols == 0 {
            return Err(Error::InvalidInput("grid must have at least one cell".into()));
        }
        if values.iter().any(|row| row.len() != cols) {
            return Err(Error::InvalidInput("grid rows must have equal length".into()));
        }
        if values.iter().flatten().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidInput("grid values must be finite and >= 0".into()));
        }
        if !values.iter().flatten().any(|v| *v > 0.0) {
            return Err(Error::InvalidInput("grid needs at least one positive value".into()));
        }
        Ok(DensityField::Grid { origin, cell_size, values })
    }

    fn grid_dims(values: &[Vec<f64>]) -> (usize, usize) {
        (values.len(), values[0].len())
    }

    /// Density at a point (cell boundaries resolve to the upper/right cell).
    pub fn density_at(&self, p: Point2) -> f64 {
        match self {
            DensityField::Uniform { value } => *value,
            DensityField::Grid { origin, cell_size, values } => {
                let (rows, cols) = Self::grid_dims(values);
                let fx = ((p.x - origin.x) / cell_size).floor();
                let fy = ((p.y - origin.y) / cell_size).floor();
                if fx < 0.0 || fy < 0.0 || fx >= cols as f64 || fy >= rows as f64 {
                    0.0
                } else {
                    values[fy as usize][fx as usize]
                }
            }
        }
    }

    /// Returns a copy with every density value multiplied by `s`.
    pub fn scaled(&self, s: f64) -> DensityField {
        match self {
            DensityField::Uniform { value } => DensityField::Uniform { value: value * s },
            DensityField::Grid { origin, cell_size, values } => DensityField::Grid {
                origin: *origin,
                cell_size: *cell_size,
                values: values.iter().map(|r| r.iter().map(|v| v * s).collect()).collect(),
            },
        }
    }
}

fn cell_rect(origin: Point2, s: f64, row: usize, col: usize) -> [HalfPlane; 4] {
    let x0 = origin.x + col as f64 * s;
    let y0 = origin.y + row as f64 * s;
    let (x1, y1) = (x0 + s, y0 + s);
    [
        HalfPlane::new(Point2::new(1.0, 0.0), -x0).expect("unit normal"),
        HalfPlane::new(Point2::new(-1.0, 0.0), x1).expect("unit normal"),
        HalfPlane::new(Point2::new(0.0, 1.0), -y0).expect("unit normal"),
        HalfPlane::new(Point2::new(0.0, -1.0), y1).expect("unit normal"),
    ]
}

/// Calls `f(row, col, value, piece)` for every grid cell meeting `poly` in a
/// set with interior.
#[allow(clippy::needless_range_loop)]
fn for_each_piece(
    origin: Point2,
    s: f64,
    values: &[Vec<f64>],
    poly: &ConvexPolygon,
    mut f: impl FnMut(usize, usize, f64, &ConvexPolygon),
) {
    let (rows, cols) = DensityField::grid_dims(values);
    let (lo, hi) = poly.bounding_box();
    let c0 = (((lo.x - origin.x) / s).floor().max(0.0)) as usize;
    let r0 = (((lo.y - origin.y) / s).floor().max(0.0)) as usize;
    let c1 = (((hi.x - origin.x) / s).ceil().max(0.0) as usize).min(cols);
    let r1 = (((hi.y - origin.y) / s).ceil().max(0.0) as usize).min(rows);
    for row in r0..r1 {
        for col in c0..c1 {
            let mut piece = Some(poly.clone());
            for h in &cell_rect(origin, s, row, col) {
                piece = piece.and_then(|p| p.clip(h));
            }
            if let Some(piece) = piece {
                f(row, col, values[row][col], &piece);
            }
        }
    }
}

/// `μ(poly) = ∫_poly f dλ`, exact for piecewise-constant densities.
pub fn measure_polygon(field: &DensityField, poly: &ConvexPolygon) -> f64 {
    match field {
        DensityField::Uniform { value } => value * poly.area(),
        DensityField::Grid { origin, cell_size, values } => {
            let mut total = 0.0;
            for_each_piece(*origin, *cell_size, values, poly, |_, _, v, piece| {
                if v > 0.0 {
                    total += v * piece.area();
                }
            });
            total
        }
    }
}

/// Measure of an optional polygon; `None` is the empty set.
pub fn measure_opt(field: &DensityField, poly: Option<&ConvexPolygon>) -> f64 {
    poly.map_or(0.0, |p| measure_polygon(field, p))
}

/// Rescales `field` so that `support` has measure one.
pub fn normalize(field: &DensityField, support: &ConvexPolygon) -> Result<DensityField> {
    let total = measure_polygon(field, support);
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::InvalidInput("density has zero mass on the support".into()));
    }
    Ok(field.scaled(1.0 / total))
}

/// Rejects densities that vanish on some open subset of `body`.
pub fn validate_positive_on(field: &DensityField, body: &ConvexPolygon) -> Result<()> {
    match field {
        DensityField::Uniform { value } => {
            if *value > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidInput("uniform density must be positive on the body".into()))
            }
        }
        DensityField::Grid { origin, cell_size, values } => {
            let (rows, cols) = DensityField::grid_dims(values);
            let covered: f64 = {
                let mut a = 0.0;
                for_each_piece(*origin, *cell_size, values, body, |_, _, _, piece| a += piece.area());
                a
            };
            let area = body.area();
            if covered < area * (1.0 - 1e-12) {
                return Err(Error::InvalidInput(format!("body extends outside the {rows}x{cols} density grid")));
            }
            let mut bad = None;
            for_each_piece(*origin, *cell_size, values, body, |row, col, v, _| {
                if v <= 0.0 && bad.is_none() {
                    bad = Some((row, col));
                }
            });
            match bad {
                Some((row, col)) => Err(Error::InvalidInput(format!(
                    "density vanishes in grid cell (row {row}, col {col}) inside the body"
                ))),
                None => Ok(()),
            }
        }
    }
}
