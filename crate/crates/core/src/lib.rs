//! Numerical laboratory for the Gordon-type equations (sine-Gordon,
//! sinh-Gordon and their elliptic versions).
//!
//! The crate integrates the six Backlund transformations that relate them,
//! composes solutions with the algebraic superposition formulas, and builds the
//! associated constant-curvature surfaces in R^3 and in Lorentz-Minkowski space.
//! Runnable walkthroughs live in `examples/`; the `blc-lab` binary exposes the
//! same pipeline on the command line.

pub mod backlund;
pub mod case;
pub mod cli;
pub mod error;
pub mod field;
pub mod geometry;
pub mod io;
pub mod pde;
pub mod seeds;
pub mod superpose;

pub use backlund::{bt_gradient, bt_residual, integrate_bt, BtSystem, IntegrateOptions, Sheet, SweepOrder};
pub use case::{congruence_params, derive_case, gen_trig, CaseConfig, CaseId, CongruenceParams, GordonEquation, IndexFlag};
pub use error::{Error, Result};
pub use field::{AnalyticSolution, Axis, FieldSource, Grid, Operand, ScalarField};
pub use geometry::{
    builtin_surface, congruence_check, numerical_curvature, pseudo_dot, transform_surface, BuiltinSurface,
    SurfaceMesh, Vec3,
};
pub use pde::{pde_residual, Derivatives};
pub use seeds::{example_solution, kink_seed, zero_seed, SeedKind, SeedSpec};
pub use superpose::{
    bianchi_lattice, singularity_mask, superpose_elliptic_sine, superpose_elliptic_sinh, superpose_hyperbolic,
    Lattice, SuperposeInput, SuperposeOptions,
};
