//! Locally refined trivariate T-meshes with adjustable grading.
//!
//! The crate provides an exact geometric kernel for meshes obtained by
//! m-graded subdivision of a tensor-product grid of unit cubes, the closure
//! and refinement algorithms that keep such meshes admissible, checkers for
//! analysis-suitability and dual-compatibility of the induced T-splines,
//! blending-function construction with dual functionals, and the experiment
//! harness for the linear-complexity bound on refinement overhead.
//!
//! All mesh geometry and all combinatorial predicates are exact (m-adic
//! rational arithmetic with arbitrary-precision numerators); only spline
//! evaluation and the dual functionals use floating point.

pub mod asuit;
pub mod cli;
pub mod complexity;
pub mod dual;
mod error;
pub mod index;
pub mod io;
pub mod madic;
pub mod mesh;
pub mod poly;
pub mod rect;
pub mod refine;
pub mod spline;

pub use error::{Error, Result};
pub use madic::{Axis, HalfMadic, Madic, Point3};
pub use mesh::{dist_elements, dist_to_point, patch_radius, size_of_level, Element, Mesh};
