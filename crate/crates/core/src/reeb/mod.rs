//! Measured contour trees and the Calabi-type quasimorphisms built on them.
//!
//! A sphere carrying a PL function is reduced to its contour tree; the area
//! form pushes forward to a measure on the tree (atoms on flat patches,
//! densities on arcs). The median of that measure gives the Calabi
//! quasimorphism of the sphere, and pulling back along the annulus
//! embeddings gives `rho`.

mod calabi;
mod median;
mod tree;

pub use calabi::{
    cal_j, calabi_disk, calabi_sphere, puncture_chart_field, rho_normalized, rho_raw, rho_vector,
    ReebOptions,
};
pub use median::{find_median, MedianLocation, MedianPoint};
pub use tree::{
    build_contour_tree, MeasuredReebTree, TreeArc, TreeNode, TreePosition, DEFAULT_SLABS,
};
