//! Finite element layer: dof layout, material parameters, sparse assembly of
//! all bilinear/linear forms, canonical interpolation, and L² error norms
//! for the P1-vector / P0 / RT0 triple.

pub mod assembly;
pub mod dofs;
pub mod interpolate;
pub mod materials;
pub mod norms;
pub mod sparse;

pub use assembly::{
    assemble_boundary_pressure_flux, assemble_coupling_div_u, assemble_div, assemble_elasticity,
    assemble_load_p0, assemble_load_p1v, assemble_load_rt0, assemble_p_mass,
    assemble_pressure_div_term, assemble_rt0_mass, shape_gradients,
};
pub use dofs::DofMaps;
pub use interpolate::{interpolate_p0, interpolate_ps_p0, interpolate_rt0, interpolate_ws_rt0};
pub use materials::MaterialParams;
pub use norms::{eval_p1v, eval_rt0, l2_error_p0, l2_error_p1v, l2_error_rt0};
pub use sparse::{CsrMatrix, SparseMatrix};
