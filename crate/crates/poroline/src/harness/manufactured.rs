//! Manufactured solution for the convergence study: closed-form remainder
//! pressure/flux, a polynomial displacement, and the consistent source terms
//! for the reformulated flow and mechanics equations.
//!
//! Fields (pulsative intensity f(t) = sin t on one straight segment):
//!
//!   p_r = (1/4πκ) f(t) (r_a - r_b)
//!   w_r = -κ ∇p_r + κ ρ_f g
//!   u   = t·x(1-x)y(1-y)z(1-z)·[1 1 1]ᵀ
//!
//! The flow source is ψ_r = ∂_t(p_r/M + α ∇·u) + ∇·w_r in closed form, using
//! Δ‖x-c‖ = 2/‖x-c‖. The mechanics load pairs by parts,
//! ⟨f_body, v⟩ = ⟨-∇·σ(u), v⟩ - ⟨α(p_s + p_r), ∇·v⟩, so only the integrable
//! pressure itself is evaluated, never its non-L² gradient; valid because
//! v = 0 on ∂Ω.

use crate::biot::{BiotSystem, StepLoads};
use crate::error::{Error, Result};
use crate::fem::{
    assemble_boundary_pressure_flux, assemble_load_p0, assemble_load_p1v, assemble_load_rt0,
    assemble_pressure_div_term, MaterialParams,
};
use crate::geom::Vec3;
use crate::greens::{LineSegment, LineSourceNetwork};

const FRAC_1_4PI: f64 = 1.0 / (4.0 * std::f64::consts::PI);

/// The analytic test case tied to one segment and one parameter set.
#[derive(Clone, Debug)]
pub struct ManufacturedCase {
    pub segment: LineSegment,
    pub params: MaterialParams,
}

impl ManufacturedCase {
    pub fn new(segment: LineSegment, params: MaterialParams) -> Self {
        ManufacturedCase { segment, params }
    }

    /// The standard segment a = (0.5, 0.8, 0.5), b = (0.5, 0.2, 0.5).
    pub fn standard(params: MaterialParams) -> Self {
        let segment = LineSegment::new(Vec3::new(0.5, 0.8, 0.5), Vec3::new(0.5, 0.2, 0.5)).unwrap();
        ManufacturedCase { segment, params }
    }

    pub fn intensity(&self, t: f64) -> f64 {
        t.sin()
    }

    pub fn network(&self) -> LineSourceNetwork {
        LineSourceNetwork::time_only(vec![self.segment.clone()], |t| t.sin(), |t| t.cos())
    }

    fn radii(&self, x: Vec3) -> Result<(f64, f64)> {
        let ra = (x - self.segment.a).norm();
        let rb = (x - self.segment.b).norm();
        if ra == 0.0 || rb == 0.0 {
            return Err(Error::OnSegment);
        }
        Ok((ra, rb))
    }

    /// Remainder pressure p_r.
    pub fn pr(&self, x: Vec3, t: f64) -> Result<f64> {
        let (ra, rb) = self.radii(x)?;
        Ok(FRAC_1_4PI / self.params.kappa * self.intensity(t) * (ra - rb))
    }

    /// Remainder flux w_r = -κ∇p_r + κ ρ_f g.
    pub fn wr(&self, x: Vec3, t: f64) -> Result<Vec3> {
        let (ra, rb) = self.radii(x)?;
        let grad = (x - self.segment.a) * (1.0 / ra) - (x - self.segment.b) * (1.0 / rb);
        let shift = self.params.kappa * self.params.rho_f * self.params.gravity;
        Ok(grad * (-FRAC_1_4PI * self.intensity(t)) + shift)
    }

    /// Displacement u = t·φ(x)·[1 1 1]ᵀ with φ = x(1-x)y(1-y)z(1-z).
    pub fn u(&self, x: Vec3, t: f64) -> Vec3 {
        let phi = bump(x.x) * bump(x.y) * bump(x.z);
        Vec3::new(t * phi, t * phi, t * phi)
    }

    /// ∇·u = t·(X'YZ + XY'Z + XYZ').
    pub fn div_u(&self, x: Vec3, t: f64) -> f64 {
        t * self.div_u_profile(x)
    }

    fn div_u_profile(&self, x: Vec3) -> f64 {
        let (bx, by, bz) = (bump(x.x), bump(x.y), bump(x.z));
        dbump(x.x) * by * bz + bx * dbump(x.y) * bz + bx * by * dbump(x.z)
    }

    /// ∇·w_r = -κΔp_r = -(f/4π)(2/r_a - 2/r_b).
    pub fn div_wr(&self, x: Vec3, t: f64) -> Result<f64> {
        let (ra, rb) = self.radii(x)?;
        Ok(-FRAC_1_4PI * self.intensity(t) * (2.0 / ra - 2.0 / rb))
    }

    /// Manufactured flow source ψ_r = ∂_t(p_r/M + α ∇·u) + ∇·w_r.
    pub fn psi_r(&self, x: Vec3, t: f64) -> Result<f64> {
        let (ra, rb) = self.radii(x)?;
        let dt_pr = FRAC_1_4PI / self.params.kappa * t.cos() * (ra - rb);
        Ok(dt_pr / self.params.biot_modulus
            + self.params.alpha * self.div_u_profile(x)
            + self.div_wr(x, t)?)
    }

    /// Body force -∇·σ(u) = -(μ Δu + (μ+λ) ∇(∇·u)).
    pub fn body_force(&self, x: Vec3, t: f64) -> Vec3 {
        let (bx, by, bz) = (bump(x.x), bump(x.y), bump(x.z));
        let (dx, dy, dz) = (dbump(x.x), dbump(x.y), dbump(x.z));
        // Δφ, with bump'' = -2
        let lap_phi = -2.0 * (by * bz + bx * bz + bx * by);
        // ∂_i (∇·u / t)
        let grad_div = Vec3::new(
            -2.0 * by * bz + dx * (dy * bz + by * dz),
            -2.0 * bx * bz + dy * (dx * bz + bx * dz),
            -2.0 * bx * by + dz * (dx * by + bx * dy),
        );
        let mu = self.params.mu;
        let ml = self.params.mu + self.params.lambda;
        Vec3::new(
            -t * (mu * lap_phi + ml * grad_div.x),
            -t * (mu * lap_phi + ml * grad_div.y),
            -t * (mu * lap_phi + ml * grad_div.z),
        )
    }

    /// Full exact pressure p_s + p_r; log-singular on the segment.
    pub fn p_full(&self, network: &LineSourceNetwork, x: Vec3, t: f64) -> Result<f64> {
        Ok(network.eval_ps(x, t, self.params.kappa)? + self.pr(x, t)?)
    }

    /// Assembles the three load vectors of one time level for a system built
    /// on this case. The singular pressure in the mechanics load is evaluated
    /// directly at quadrature points; with the same quadrature degree used
    /// for the p_s,h interpolant the two contributions cancel in the coupled
    /// equations exactly as they do in the continuous identity.
    pub fn step_loads(&self, system: &BiotSystem, t: f64) -> Result<StepLoads> {
        let mesh = system.mesh();
        let dofs = system.dofs();
        let cfg = system.config();
        let network = system.network().ok_or_else(|| {
            Error::InvalidConfig("manufactured loads need the line-source network".into())
        })?;

        let psi_r = assemble_load_p0(mesh, dofs, &|x| self.psi_r(x, t), cfg.singular_quad_degree)?;

        // flux rhs: ⟨ρ_f g, z⟩ − ∮ p_r,ex (z·n) dS (manufactured natural BC)
        let grav = self.params.rho_f * self.params.gravity;
        let mut flux = assemble_load_rt0(mesh, dofs, &|_| Ok(grav), cfg.load_quad_degree)?;
        let bc =
            assemble_boundary_pressure_flux(mesh, dofs, &|x| self.pr(x, t), cfg.load_quad_degree)?;
        for (f, b) in flux.iter_mut().zip(&bc) {
            *f -= b;
        }

        // mechanics rhs: ⟨-∇·σ(u_ex), v⟩ − ⟨α(p_s + p_r,ex), ∇·v⟩
        let mut mech_body = assemble_load_p1v(
            mesh,
            dofs,
            &|x| Ok(self.body_force(x, t)),
            cfg.load_quad_degree,
        )?;
        let p_ex = assemble_pressure_div_term(
            mesh,
            dofs,
            &|x| self.p_full(network, x, t),
            cfg.singular_quad_degree,
        )?;
        for (mb, p) in mech_body.iter_mut().zip(&p_ex) {
            *mb -= self.params.alpha * p;
        }
        Ok(StepLoads {
            psi_r,
            flux,
            mech_body,
        })
    }
}

#[inline]
fn bump(x: f64) -> f64 {
    x * (1.0 - x)
}

#[inline]
fn dbump(x: f64) -> f64 {
    1.0 - 2.0 * x
}
