//! Wreath-group combinatorics and the obstruction arithmetic.

pub mod boundary;
pub mod group;
pub mod obstruction;
pub mod perm;
pub mod poset;
pub mod sylow;

pub use boundary::{boundary_size, enumerate_boundary, BoundaryEntry, BoundaryIndex, Stratum};
pub use group::{
    act_on_leaves, act_on_tree, act_on_values, act_on_wvector, determinant, enumerate_group, group_order, orient,
    random_element, wvector_action_matrix, GroupElement,
};
pub use obstruction::{decide_obstruction, BezoutTerm, Verdict};
pub use perm::Perm;
pub use poset::{build_poset, verify_automorphism, Poset, PosetNode};
pub use sylow::{closure, sylow_fixed_vector, sylow_generators};
