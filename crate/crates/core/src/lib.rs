//! Certified Hausdorff dimension brackets for attractors of one-dimensional
//! iterated function systems.
//!
//! The dimension `s*` of the attractor is the zero of `s ↦ log r(L_s)` for the
//! transfer operator `L_s`. Piecewise linear collocation with a-priori bounds
//! on the eigenfunction gives matrices `A_s`, `B_s` with
//! `r(A_s) ≤ r(L_s) ≤ r(B_s)`, so any `s` with `r(B_s) ≤ 1` bounds `s*` from
//! above and any `s` with `r(A_s) ≥ 1` bounds it from below.
//!
//! ```
//! use hausdim::{bracket_dimension, Mesh, MapFamily, SolverOptions};
//!
//! let cantor = MapFamily::cantor(0.0).unwrap();
//! let mesh = Mesh::uniform(0.0, 1.0, 100).unwrap();
//! let b = bracket_dimension(&cantor, &mesh, &SolverOptions::default()).unwrap();
//! assert!(b.contains(2f64.ln() / 3f64.ln()));
//! ```
//!
//! Everything is generic over [`Real`] (`f32`, `f64`); the `*F64` aliases
//! fix the scalar type.

// `!(x > 0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod discretize;
pub mod error;
pub mod higher_order;
pub mod ifs;
pub mod jet;
pub mod scalar;
pub mod solver;
pub mod sparse;
pub mod spectral;

pub use bounds::{
    cantor_constants, general_constants, interpolation_bounds, mobius_ratio_bounds, sign_certificate, BoundConstants,
    InterpolationBounds, RatioBoundPair, SupremumOptions,
};
pub use discretize::{
    assemble, assemble_one, family_mesh, interp_weights, Assembled, DomainMode, ErrorModel, Interp, Mesh, Which,
};
pub use error::{Error, Result};
pub use higher_order::{assemble_highorder, highorder_dimension, HighOrderEstimate, HighOrderMatrix};
pub use ifs::{continuants, Continuants, Contraction, FamilyKind, Interval, MapFamily, MapSpec, SmoothMap};
pub use jet::Jet3;
pub use scalar::Real;
pub use solver::{
    bracket_dimension, convergence_study, solve_root, ConvergenceStudy, DimensionBracket, RadiusEvaluator,
    SolverOptions,
};
pub use sparse::{row_sums, SparseNonnegMatrix};
pub use spectral::{
    collatz_wielandt, cone_membership, hilbert_metric, logconvex_check, power_enclosure, ConeParams, PowerOptions,
    SpectralEnclosure,
};

pub type MapFamilyF64 = MapFamily<f64>;
pub type MeshF64 = Mesh<f64>;
pub type ErrorModelF64 = ErrorModel<f64>;
pub type SparseMatrixF64 = SparseNonnegMatrix<f64>;
pub type SpectralEnclosureF64 = SpectralEnclosure<f64>;
pub type DimensionBracketF64 = DimensionBracket<f64>;
pub type BoundConstantsF64 = BoundConstants<f64>;
pub type SolverOptionsF64 = SolverOptions<f64>;

pub type MapFamilyF32 = MapFamily<f32>;
pub type MeshF32 = Mesh<f32>;
pub type DimensionBracketF32 = DimensionBracket<f32>;
