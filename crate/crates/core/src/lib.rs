//! Grid-based solver and verification tools for nonlocal double obstacle problems
//!
//! ```text
//! max{ min{ −Iu − f, u − ψ⁻ }, u − ψ⁺ } = 0  in U,   u = φ  outside U,
//! ```
//!
//! where I is a linear, extremal (Pucci) or inf-sup nonlocal operator of order 2s.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Index loops over parallel node arrays read better than zipped iterators here.
#![allow(clippy::needless_range_loop)]

pub mod analysis;
pub mod error;
pub mod exec;
pub mod field;
pub mod geometry;
pub mod kernel;
pub mod nonlocal_op;
pub mod obstacles;
pub mod penalty;
pub mod presets;
pub mod quadrature;
pub mod solver;

pub use error::{Error, Result};
pub use exec::Execution;
pub use field::{constant_fn, scalar_fn, Field, ScalarFn};
pub use geometry::{Domain, Grid, Point};
pub use kernel::{frac_kernel, EllipticityParams, KernelSpec};
pub use nonlocal_op::{DiscreteOperator, OperatorSpec};
pub use penalty::PenaltyFn;
pub use solver::{Problem, SolutionField, SolveConfig};
