//! Building a solver run from a configuration: the physical line-source
//! problem with homogeneous pressure/displacement boundary data, pulsative
//! intensity f(t) = sin t, and no background source or body force.
//!
//! In remainder variables the total-pressure condition p = 0 on ∂Ω becomes
//! p_r = -p_s on ∂Ω, imposed naturally through the boundary term of the
//! mixed flux equation.

use crate::biot::{BiotSystem, DiscreteState, StepLoads, Trajectory};
use crate::error::{Error, Result};
use crate::fem::{assemble_boundary_pressure_flux, assemble_load_p0, assemble_load_rt0};
use crate::greens::LineSourceNetwork;
use crate::mesh::build_structured_tet_mesh;

use super::config::Config;

/// Assembles the discrete system described by a configuration.
pub fn build_system(config: &Config) -> Result<BiotSystem> {
    let mesh = build_structured_tet_mesh(config.mesh_n)?;
    let params = config.material_params()?;
    let segment = config.segment()?;
    let network = LineSourceNetwork::time_only(vec![segment], |t| t.sin(), |t| t.cos());
    BiotSystem::new(mesh, params, Some(network), config.solver_config())
}

/// Load vectors of the physical problem at time t.
pub fn physical_step_loads(system: &BiotSystem, t: f64) -> Result<StepLoads> {
    let mesh = system.mesh();
    let dofs = system.dofs();
    let params = system.params();
    let cfg = system.config();
    let network = system
        .network()
        .ok_or_else(|| Error::InvalidConfig("physical run needs a line-source network".into()))?;

    // ψ ≡ 0 background; ψ_r carries the singular corrections
    let psi_r = assemble_load_p0(
        mesh,
        dofs,
        &|x| network.eval_psi_r(x, t, params.kappa, params.biot_modulus, &|_, _| 0.0),
        cfg.singular_quad_degree,
    )?;

    // flux rhs: ⟨ρ_f g, z⟩ − ∮ p_r (z·n) dS with trace p_r = −p_s
    let grav = params.rho_f * params.gravity;
    let mut flux = assemble_load_rt0(mesh, dofs, &|_| Ok(grav), cfg.load_quad_degree)?;
    let bc = assemble_boundary_pressure_flux(
        mesh,
        dofs,
        &|x| network.eval_ps(x, t, params.kappa).map(|v| -v),
        cfg.singular_quad_degree,
    )?;
    for (f, b) in flux.iter_mut().zip(&bc) {
        *f -= b;
    }

    Ok(StepLoads {
        psi_r,
        flux,
        mech_body: vec![0.0; dofs.n_u],
    })
}

/// Runs the physical problem from rest to T.
pub fn run_physical(system: &BiotSystem) -> Result<Trajectory> {
    let initial = DiscreteState::zeros(system.dofs(), 0.0);
    system.run(initial, &|t| physical_step_loads(system, t))
}
