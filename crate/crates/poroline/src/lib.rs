//! Quasi-static linear Biot poroelasticity in 3D with right-hand sides
//! concentrated on 1D line segments.
//!
//! The pressure and Darcy flux induced by a line source are singular on the
//! segment, which ruins naive finite element approximation. This crate
//! removes the singularity explicitly: the closed-form line potential G
//! (with -ΔG = δ_Λ weakly) provides singular fields p_s = fG/κ and
//! w_s = -κ∇p_s, and the flow equations are reformulated for the smooth
//! remainders. The reformulated coupled system is then advanced with
//! backward Euler and decoupled per time step by fixed-stress splitting with
//! the tuning parameter β_FS = α²/K_dr; mixed lowest-order elements
//! (P1 vector / P0 / RT0) discretize displacement, pressure, and flux.
//!
//! Module map:
//! - [`mesh`]: structured Kuhn tetrahedral mesh of the unit cube with
//!   globally oriented faces,
//! - [`greens`]: the line potential, its gradient, the singular fields, and
//!   the regularized source ψ_r,
//! - [`fem`]: dof maps, assembly, interpolation, error norms,
//! - [`linsolve`]: sparse direct factorizations (Cholesky / LU / flux Schur
//!   complement),
//! - [`biot`]: the fixed-stress time stepper and the monolithic oracle,
//! - [`harness`]: manufactured solutions, convergence studies, JSON
//!   configuration, VTK export, verification suite.
//!
//! See the crate examples for runnable entry points; the `poroline` binary
//! exposes the `converge`, `solve`, and `verify` subcommands.

// indexed loops over cells/faces/dofs keep the parallel-array assembly code
// aligned with the math; iterator rewrites obscure it
#![allow(clippy::needless_range_loop)]

pub mod biot;
pub mod error;
pub mod fem;
pub mod geom;
pub mod greens;
pub mod harness;
pub mod linsolve;
pub mod mesh;
pub mod quadrature;

pub use biot::{BiotSystem, DiscreteState, SolverConfig, StepLoads, Trajectory};
pub use error::{Error, Result};
pub use fem::{DofMaps, MaterialParams};
pub use geom::Vec3;
pub use greens::{LineSegment, LineSourceNetwork};
pub use harness::Config;
pub use mesh::{build_structured_tet_mesh, Mesh};
