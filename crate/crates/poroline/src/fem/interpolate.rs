//! Canonical interpolation onto the discrete spaces, and the discrete
//! singular-field coefficients used by the reconstruction step.

use crate::error::Result;
use crate::geom::Vec3;
use crate::greens::LineSourceNetwork;
use crate::mesh::Mesh;
use crate::quadrature::{tet_rule, tri_rule};

use super::dofs::DofMaps;

/// P0 interpolant: cell averages by volume quadrature.
pub fn interpolate_p0(
    mesh: &Mesh,
    dofs: &DofMaps,
    f: &dyn Fn(Vec3) -> Result<f64>,
    degree: usize,
) -> Result<Vec<f64>> {
    let rule = tet_rule(degree);
    let mut coeffs = vec![0.0; dofs.n_p];
    for c in 0..mesh.n_cells() {
        let mut acc = 0.0;
        for (r, w) in rule.points.iter().zip(&rule.weights) {
            acc += w * f(mesh.map_ref_to_cell(c, *r))?;
        }
        // reference weights sum to 1/6; the average needs weights summing to 1
        coeffs[c] = 6.0 * acc;
    }
    Ok(coeffs)
}

/// RT0 interpolant: normal flux integrals ∫_F w·n dS with respect to the
/// global face orientation, by face quadrature.
pub fn interpolate_rt0(
    mesh: &Mesh,
    dofs: &DofMaps,
    w: &dyn Fn(Vec3) -> Result<Vec3>,
    degree: usize,
) -> Result<Vec<f64>> {
    let rule = tri_rule(degree);
    let mut coeffs = vec![0.0; dofs.n_w];
    for f in 0..mesh.n_faces() {
        let normal = mesh.face_unit_normal(f);
        let area = mesh.face_area(f);
        let mut acc = 0.0;
        for (r, wq) in rule.points.iter().zip(&rule.weights) {
            acc += wq * w(mesh.map_ref_to_face(f, *r))?.dot(normal);
        }
        coeffs[f] = 2.0 * area * acc; // ref weights sum to 1/2
    }
    Ok(coeffs)
}

/// Discrete singular pressure p_s,h: P0 cell averages of f·G/κ.
///
/// Quadrature points are strictly interior to each cell, so for the meshes
/// built here they avoid the segments; an exact hit is reported as an
/// on-segment error by the greens module.
pub fn interpolate_ps_p0(
    mesh: &Mesh,
    dofs: &DofMaps,
    network: &LineSourceNetwork,
    t: f64,
    kappa: f64,
    degree: usize,
) -> Result<Vec<f64>> {
    interpolate_p0(mesh, dofs, &|x| network.eval_ps(x, t, kappa), degree)
}

/// Discrete singular flux w_s,h: RT0 face flux integrals of -κ∇p_s.
pub fn interpolate_ws_rt0(
    mesh: &Mesh,
    dofs: &DofMaps,
    network: &LineSourceNetwork,
    t: f64,
    degree: usize,
) -> Result<Vec<f64>> {
    interpolate_rt0(mesh, dofs, &|x| network.eval_ws(x, t), degree)
}
