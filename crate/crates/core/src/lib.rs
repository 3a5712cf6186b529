//! Spline discrete quasi-interpolants on non-uniform partitions.
//!
//! The crate builds B-spline spaces of arbitrary degree on clamped knot
//! vectors and constructs local approximation operators
//!
//! ```text
//! Qf = sum_i mu_i(f) B_i,    mu_i(f) = sum_s lambda_i(s) f(theta_{i+s})
//! ```
//!
//! whose coefficient functionals use point values at the Greville abscissae.
//! Besides the closed-form three-point operators that reproduce quadratics,
//! it solves the local l1 problems `min |lambda_i|_1` subject to polynomial
//! exactness with a small dense simplex, and can certify the three-point
//! weights optimal through an explicit dual vector.
//!
//! Everything here is `no_std` + `alloc`. File formats, reports and the
//! command line front-end live in the `qispline` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod applications;
pub mod bspline;
mod error;
pub mod knots;
mod linalg;
pub mod nearbest;
pub mod quasi_interp;
mod simplex;

pub use applications::{
    convergence_study, differentiation_matrix, differentiation_study, fit_order,
    quadrature_from_qi, ConvergenceReport, ConvergenceRow, DifferentiationMatrix, OperatorRecipe,
    QuadratureRule, TestFunction,
};
pub use bspline::{SplineFunction, SplineSpace};
pub use error::{Error, Result};
pub use knots::{
    generate_partition, greville_grid, make_clamped_knots, GrevilleGrid, KnotVector,
    PartitionFamily, PartitionSpec,
};
pub use nearbest::{
    assemble_constraints, assemble_window, build_nearbest_qi, build_watson_form, knot_condition,
    local_solves, solve_l1, watson_certificate, Certificate, ConstraintSystem, L1Solution,
    L1Status, LocalSolve, WatsonForm,
};
pub use quasi_interp::{
    apply_dqi, apply_qi, build_q2star, build_qp2star, build_three_point, dqi_coefficients,
    norm_upper_bound, theoretical_bound, DerivativeOracle, DifferentialQi, OperatorKind,
    QuasiInterpolant, Stencil,
};
