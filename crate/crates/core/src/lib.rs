//! Equal-measure convex partitions of planar bodies by power diagrams,
//! iterated partitions of type (n_1, ..., n_k), a numerical solver for
//! equal-area/equal-perimeter partitions, and the wreath-group arithmetic that
//! decides when the associated equivariant map exists.

pub mod cli;
pub mod error;
pub mod geometry;
pub mod iterated;
pub mod measure;
pub mod power;
pub mod solver;
pub mod svg;
pub mod wreath;

pub use error::{Error, Result};
pub use geometry::{ConvexPolygon, HalfPlane, Point2};
pub use iterated::{iterated_partition, test_map, PartitionTree, PartitionType, SiteTree, WVector};
pub use measure::DensityField;
pub use power::{power_cells, regular_equipartition, solve_weights, CellPartition, SiteConfiguration, WeightVector};
pub use solver::{solve_nrr, NrrOptions, SolveReport};
pub use wreath::{decide_obstruction, GroupElement, Verdict};
