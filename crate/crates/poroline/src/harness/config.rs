//! JSON run configuration. Every key is optional and defaults to the tissue
//! parameter set of the test case; unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::biot::SolverConfig;
use crate::error::{Error, Result};
use crate::fem::MaterialParams;
use crate::geom::Vec3;
use crate::greens::LineSegment;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    /// Permeability over viscosity κ (mm² mPa⁻¹ s⁻¹).
    pub kappa: f64,
    /// Biot modulus M (mPa).
    pub biot_modulus: f64,
    /// Biot coefficient α.
    pub alpha: f64,
    /// Young's modulus E (mPa).
    pub youngs_modulus: f64,
    /// Poisson's ratio ν.
    pub poisson_ratio: f64,
    /// Fluid density ρ_f (mg mm⁻³).
    pub rho_f: f64,
    /// Gravity vector (mm s⁻²).
    pub gravity: [f64; 3],
    /// Final time T (s).
    pub final_time: f64,
    /// Time step τ (s).
    pub time_step: f64,
    /// Absolute fixed-stress tolerance ε_a.
    pub eps_abs: f64,
    /// Relative fixed-stress tolerance ε_r.
    pub eps_rel: f64,
    /// Fixed-stress iteration cap.
    pub max_iters: usize,
    /// Mesh subdivisions per axis.
    pub mesh_n: usize,
    /// Line-source segment endpoints (mm).
    pub segment_a: [f64; 3],
    pub segment_b: [f64; 3],
    /// Optional output path for field export.
    pub output_path: Option<String>,
    /// Quadrature degree for smooth loads.
    pub load_quad_degree: usize,
    /// Quadrature degree for integrands involving the singular fields.
    pub singular_quad_degree: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            kappa: 1.57e-2,
            biot_modulus: 3.9e7,
            alpha: 1.0,
            youngs_modulus: 1.5e6,
            poisson_ratio: 0.2,
            rho_f: 1.0,
            gravity: [0.0, 0.0, 0.0],
            final_time: 1.0,
            time_step: 0.1,
            eps_abs: 1e-6,
            eps_rel: 1e-6,
            max_iters: 100,
            mesh_n: 8,
            segment_a: [0.5, 0.8, 0.5],
            segment_b: [0.5, 0.2, 0.5],
            output_path: None,
            load_quad_degree: 5,
            singular_quad_degree: 5,
        }
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn material_params(&self) -> Result<MaterialParams> {
        MaterialParams::new(
            self.kappa,
            self.biot_modulus,
            self.alpha,
            self.youngs_modulus,
            self.poisson_ratio,
            self.rho_f,
            Vec3::from(self.gravity),
        )
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            tau: self.time_step,
            t_final: self.final_time,
            eps_abs: self.eps_abs,
            eps_rel: self.eps_rel,
            max_iters: self.max_iters,
            load_quad_degree: self.load_quad_degree,
            singular_quad_degree: self.singular_quad_degree,
            solve_tol: 1e-10,
        }
    }

    pub fn segment(&self) -> Result<LineSegment> {
        LineSegment::new(Vec3::from(self.segment_a), Vec3::from(self.segment_b))
    }
}
