//! Physical coefficients of the poroelastic medium.
//!
//! Units follow the mm / mPa / s system of the tissue test case.

use crate::error::{Error, Result};
use crate::geom::Vec3;

#[derive(Clone, Debug)]
pub struct MaterialParams {
    /// Permeability divided by fluid viscosity (mm² mPa⁻¹ s⁻¹).
    pub kappa: f64,
    /// Biot modulus M (mPa).
    pub biot_modulus: f64,
    /// Biot coefficient α (dimensionless).
    pub alpha: f64,
    /// Young's modulus E (mPa).
    pub youngs_modulus: f64,
    /// Poisson's ratio ν (dimensionless).
    pub poisson_ratio: f64,
    /// First Lamé parameter μ = E / (2(1+ν)) (mPa).
    pub mu: f64,
    /// Second Lamé parameter λ = Eν / ((1+ν)(1-2ν)) (mPa).
    pub lambda: f64,
    /// Fluid density (mg mm⁻³).
    pub rho_f: f64,
    /// Gravity vector (mm s⁻²).
    pub gravity: Vec3,
    /// Drained bulk modulus K_dr = (d/2)(μ+λ) with d = 3 (mPa).
    pub k_dr: f64,
    /// Fixed-stress stabilization β_FS = α²/K_dr (mPa⁻¹).
    pub beta_fs: f64,
}

impl MaterialParams {
    pub fn new(
        kappa: f64,
        biot_modulus: f64,
        alpha: f64,
        youngs_modulus: f64,
        poisson_ratio: f64,
        rho_f: f64,
        gravity: Vec3,
    ) -> Result<Self> {
        for (name, v) in [
            ("kappa", kappa),
            ("biot_modulus", biot_modulus),
            ("alpha", alpha),
            ("youngs_modulus", youngs_modulus),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if !(poisson_ratio > -1.0 && poisson_ratio < 0.5) {
            return Err(Error::InvalidParameter(format!(
                "poisson_ratio must lie in (-1, 1/2), got {poisson_ratio}"
            )));
        }
        if !gravity.is_finite() || !rho_f.is_finite() {
            return Err(Error::InvalidParameter(
                "rho_f and gravity must be finite".into(),
            ));
        }
        let mu = youngs_modulus / (2.0 * (1.0 + poisson_ratio));
        let lambda =
            youngs_modulus * poisson_ratio / ((1.0 + poisson_ratio) * (1.0 - 2.0 * poisson_ratio));
        if !(mu > 0.0 && lambda > 0.0) {
            return Err(Error::InvalidParameter(
                "derived Lamé parameters must be positive".into(),
            ));
        }
        let k_dr = 1.5 * (mu + lambda);
        let beta_fs = alpha * alpha / k_dr;
        Ok(MaterialParams {
            kappa,
            biot_modulus,
            alpha,
            youngs_modulus,
            poisson_ratio,
            mu,
            lambda,
            rho_f,
            gravity,
            k_dr,
            beta_fs,
        })
    }
}
