//! L² error norms between discrete fields and analytic callbacks, plus
//! point evaluation of discrete fields inside cells.

use crate::error::Result;
use crate::geom::Vec3;
use crate::mesh::Mesh;
use crate::quadrature::tet_rule;

use super::dofs::DofMaps;

/// Evaluates a P1 vector field inside a cell at reference point r.
pub fn eval_p1v(mesh: &Mesh, dofs: &DofMaps, coeffs: &[f64], cell: usize, r: [f64; 3]) -> Vec3 {
    let bary = [1.0 - r[0] - r[1] - r[2], r[0], r[1], r[2]];
    let ids = &mesh.cells[cell];
    let mut val = Vec3::ZERO;
    for i in 0..4 {
        let v = Vec3::new(
            coeffs[dofs.u_dof(ids[i], 0)],
            coeffs[dofs.u_dof(ids[i], 1)],
            coeffs[dofs.u_dof(ids[i], 2)],
        );
        val += v * bary[i];
    }
    val
}

/// Evaluates an RT0 field inside a cell at physical point x.
pub fn eval_rt0(mesh: &Mesh, coeffs: &[f64], cell: usize, x: Vec3) -> Vec3 {
    let vol = mesh.cell_volume(cell);
    let inv_3v = 1.0 / (3.0 * vol);
    let ids = &mesh.cells[cell];
    let mut val = Vec3::ZERO;
    for (slot, &(f, sgn)) in mesh.cell_faces[cell].iter().enumerate() {
        val += (x - mesh.vertices[ids[slot]]) * (inv_3v * sgn as f64 * coeffs[f]);
    }
    val
}

/// ‖exact - p_h‖_L² for a P0 field.
pub fn l2_error_p0(
    mesh: &Mesh,
    _dofs: &DofMaps,
    coeffs: &[f64],
    exact: &dyn Fn(Vec3) -> Result<f64>,
    degree: usize,
) -> Result<f64> {
    let rule = tet_rule(degree);
    let mut err2 = 0.0;
    for c in 0..mesh.n_cells() {
        let jac = 6.0 * mesh.cell_volume(c);
        for (r, w) in rule.points.iter().zip(&rule.weights) {
            let d = exact(mesh.map_ref_to_cell(c, *r))? - coeffs[c];
            err2 += jac * w * d * d;
        }
    }
    Ok(err2.sqrt())
}

/// ‖exact - w_h‖_L² for an RT0 field.
pub fn l2_error_rt0(
    mesh: &Mesh,
    _dofs: &DofMaps,
    coeffs: &[f64],
    exact: &dyn Fn(Vec3) -> Result<Vec3>,
    degree: usize,
) -> Result<f64> {
    let rule = tet_rule(degree);
    let mut err2 = 0.0;
    for c in 0..mesh.n_cells() {
        let jac = 6.0 * mesh.cell_volume(c);
        for (r, w) in rule.points.iter().zip(&rule.weights) {
            let x = mesh.map_ref_to_cell(c, *r);
            let d = exact(x)? - eval_rt0(mesh, coeffs, c, x);
            err2 += jac * w * d.norm_sq();
        }
    }
    Ok(err2.sqrt())
}

/// ‖exact - u_h‖_L² for a P1 vector field.
pub fn l2_error_p1v(
    mesh: &Mesh,
    dofs: &DofMaps,
    coeffs: &[f64],
    exact: &dyn Fn(Vec3) -> Result<Vec3>,
    degree: usize,
) -> Result<f64> {
    let rule = tet_rule(degree);
    let mut err2 = 0.0;
    for c in 0..mesh.n_cells() {
        let jac = 6.0 * mesh.cell_volume(c);
        for (r, w) in rule.points.iter().zip(&rule.weights) {
            let x = mesh.map_ref_to_cell(c, *r);
            let d = exact(x)? - eval_p1v(mesh, dofs, coeffs, c, *r);
            err2 += jac * w * d.norm_sq();
        }
    }
    Ok(err2.sqrt())
}
