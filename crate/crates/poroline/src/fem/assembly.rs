//! Element assembly for the three spaces: linear elasticity on P1 vectors,
//! mass/divergence operators for P0 and RT0, coupling blocks, and load
//! vectors (with quadrature-point nudging when an integrand is singular on a
//! line-source segment).

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::mesh::Mesh;
use crate::quadrature::{tet_rule, tri_rule};

use super::dofs::DofMaps;
use super::sparse::SparseMatrix;

/// Barycentric gradients of a cell: g[i] = ∇λ_i (constant on the cell).
pub fn shape_gradients(mesh: &Mesh, cell_id: usize) -> [Vec3; 4] {
    let cell = &mesh.cells[cell_id];
    let p0 = mesh.vertices[cell[0]];
    let e1 = mesh.vertices[cell[1]] - p0;
    let e2 = mesh.vertices[cell[2]] - p0;
    let e3 = mesh.vertices[cell[3]] - p0;
    let det = e1.cross(e2).dot(e3);
    // rows of the inverse edge matrix
    let g1 = e2.cross(e3) * (1.0 / det);
    let g2 = e3.cross(e1) * (1.0 / det);
    let g3 = e1.cross(e2) * (1.0 / det);
    [-(g1 + g2 + g3), g1, g2, g3]
}

/// ⟨2μ ε(u), ε(v)⟩ + ⟨λ ∇·u, ∇·v⟩ on P1 vectors, without boundary
/// conditions. The pre-BC kernel is spanned by the six rigid-body modes;
/// apply [`SparseMatrix::apply_dirichlet`] for the essential condition.
pub fn assemble_elasticity(mesh: &Mesh, dofs: &DofMaps, mu: f64, lambda: f64) -> SparseMatrix {
    let mut mat = SparseMatrix::with_capacity(dofs.n_u, dofs.n_u, mesh.n_cells() * 144);
    for c in 0..mesh.n_cells() {
        let g = shape_gradients(mesh, c);
        let vol = mesh.cell_volume(c);
        let cell = &mesh.cells[c];
        for i in 0..4 {
            for j in 0..4 {
                let gij = g[i].dot(g[j]);
                for a in 0..3 {
                    let row = dofs.u_dof(cell[i], a);
                    for b in 0..3 {
                        let col = dofs.u_dof(cell[j], b);
                        let strain = g[i].comp(b) * g[j].comp(a) + if a == b { gij } else { 0.0 };
                        let val = vol * (mu * strain + lambda * g[i].comp(a) * g[j].comp(b));
                        mat.add(row, col, val);
                    }
                }
            }
        }
    }
    mat
}

/// Diagonal P0 mass ⟨coefficient·p, q⟩; entries coefficient·|K|.
pub fn assemble_p_mass(mesh: &Mesh, dofs: &DofMaps, coefficient: f64) -> SparseMatrix {
    let mut mat = SparseMatrix::with_capacity(dofs.n_p, dofs.n_p, dofs.n_p);
    for c in 0..mesh.n_cells() {
        mat.add(c, c, coefficient * mesh.cell_volume(c));
    }
    mat
}

/// RT0 basis for face slot `s` of a cell: φ(x) = (x - v_opp)/(3|K|), whose
/// normal flux integral is 1 over its own face (outward) and 0 elsewhere.
#[inline]
fn rt0_basis(vertex_opp: Vec3, inv_3v: f64, x: Vec3) -> Vec3 {
    (x - vertex_opp) * inv_3v
}

/// ⟨κ⁻¹ w, z⟩ on RT0 with global-orientation signs.
pub fn assemble_rt0_mass(mesh: &Mesh, dofs: &DofMaps, inv_kappa: f64) -> SparseMatrix {
    let rule = tet_rule(2);
    let mut mat = SparseMatrix::with_capacity(dofs.n_w, dofs.n_w, mesh.n_cells() * 16);
    for c in 0..mesh.n_cells() {
        let vol = mesh.cell_volume(c);
        let inv_3v = 1.0 / (3.0 * vol);
        let cell = &mesh.cells[c];
        let jac = 6.0 * vol;
        // φ values at quadrature points for each of the 4 local faces
        let mut phi = [[Vec3::ZERO; 4]; 4];
        for (q, r) in rule.points.iter().enumerate() {
            let x = mesh.map_ref_to_cell(c, *r);
            for slot in 0..4 {
                phi[q][slot] = rt0_basis(mesh.vertices[cell[slot]], inv_3v, x);
            }
        }
        for si in 0..4 {
            let (fi, sgn_i) = mesh.cell_faces[c][si];
            for sj in 0..4 {
                let (fj, sgn_j) = mesh.cell_faces[c][sj];
                let mut acc = 0.0;
                for (q, w) in rule.weights.iter().enumerate() {
                    acc += w * phi[q][si].dot(phi[q][sj]);
                }
                let val = inv_kappa * (sgn_i as f64) * (sgn_j as f64) * jac * acc;
                mat.add(fi, fj, val);
            }
        }
    }
    mat
}

/// Divergence moments ⟨∇·w, q⟩ mapping RT0 coefficients to P0 moments. With
/// flux-integral dofs the row of cell K holds the orientation signs of its
/// four faces: ∫_K ∇·w = Σ_F σ_{K,F} w_F.
pub fn assemble_div(mesh: &Mesh, dofs: &DofMaps) -> SparseMatrix {
    let mut mat = SparseMatrix::with_capacity(dofs.n_p, dofs.n_w, mesh.n_cells() * 4);
    for c in 0..mesh.n_cells() {
        for &(f, sgn) in &mesh.cell_faces[c] {
            mat.add(c, f, sgn as f64);
        }
    }
    mat
}

/// Coupling ⟨α ∇·u, q⟩ mapping P1-vector coefficients to P0 moments; exact
/// because ∇·u is cell-wise constant.
pub fn assemble_coupling_div_u(mesh: &Mesh, dofs: &DofMaps, alpha: f64) -> SparseMatrix {
    let mut mat = SparseMatrix::with_capacity(dofs.n_p, dofs.n_u, mesh.n_cells() * 12);
    for c in 0..mesh.n_cells() {
        let g = shape_gradients(mesh, c);
        let vol = mesh.cell_volume(c);
        let cell = &mesh.cells[c];
        for i in 0..4 {
            for a in 0..3 {
                mat.add(c, dofs.u_dof(cell[i], a), alpha * vol * g[i].comp(a));
            }
        }
    }
    mat
}

/// Evaluates a possibly singular callback at a quadrature point, retrying
/// once with the point nudged by 1e-12·h if it lands on a segment.
fn eval_nudged<T>(f: &dyn Fn(Vec3) -> Result<T>, x: Vec3, h: f64) -> Result<T> {
    match f(x) {
        Err(Error::OnSegment) => {
            log::warn!("quadrature point on a line-source segment; perturbing by 1e-12 h");
            f(x + Vec3::new(1e-12 * h, 1e-12 * h, 1e-12 * h))
        }
        other => other,
    }
}

/// ⟨f, q⟩ for P0: per-cell integrals of a scalar field.
pub fn assemble_load_p0(
    mesh: &Mesh,
    dofs: &DofMaps,
    f: &dyn Fn(Vec3) -> Result<f64>,
    degree: usize,
) -> Result<Vec<f64>> {
    let rule = tet_rule(degree);
    let mut load = vec![0.0; dofs.n_p];
    for c in 0..mesh.n_cells() {
        let jac = 6.0 * mesh.cell_volume(c);
        let mut acc = 0.0;
        for (r, w) in rule.points.iter().zip(&rule.weights) {
            acc += w * eval_nudged(f, mesh.map_ref_to_cell(c, *r), mesh.h)?;
        }
        load[c] = jac * acc;
    }
    Ok(load)
}

/// ⟨f, v⟩ for P1 vectors.
pub fn assemble_load_p1v(
    mesh: &Mesh,
    dofs: &DofMaps,
    f: &dyn Fn(Vec3) -> Result<Vec3>,
    degree: usize,
) -> Result<Vec<f64>> {
    let rule = tet_rule(degree);
    let mut load = vec![0.0; dofs.n_u];
    for c in 0..mesh.n_cells() {
        let jac = 6.0 * mesh.cell_volume(c);
        let cell = &mesh.cells[c];
        for (r, w) in rule.points.iter().zip(&rule.weights) {
            let x = mesh.map_ref_to_cell(c, *r);
            let val = eval_nudged(f, x, mesh.h)?;
            let bary = [1.0 - r[0] - r[1] - r[2], r[0], r[1], r[2]];
            for i in 0..4 {
                let s = jac * w * bary[i];
                for a in 0..3 {
                    load[dofs.u_dof(cell[i], a)] += s * val.comp(a);
                }
            }
        }
    }
    Ok(load)
}

/// ⟨f, z⟩ for RT0.
pub fn assemble_load_rt0(
    mesh: &Mesh,
    dofs: &DofMaps,
    f: &dyn Fn(Vec3) -> Result<Vec3>,
    degree: usize,
) -> Result<Vec<f64>> {
    let rule = tet_rule(degree);
    let mut load = vec![0.0; dofs.n_w];
    for c in 0..mesh.n_cells() {
        let vol = mesh.cell_volume(c);
        let inv_3v = 1.0 / (3.0 * vol);
        let jac = 6.0 * vol;
        let cell = &mesh.cells[c];
        for (r, w) in rule.points.iter().zip(&rule.weights) {
            let x = mesh.map_ref_to_cell(c, *r);
            let val = eval_nudged(f, x, mesh.h)?;
            for slot in 0..4 {
                let (fid, sgn) = mesh.cell_faces[c][slot];
                let phi = rt0_basis(mesh.vertices[cell[slot]], inv_3v, x);
                load[fid] += (sgn as f64) * jac * w * val.dot(phi);
            }
        }
    }
    Ok(load)
}

/// ⟨p, ∇·v⟩ for P1 vectors: g_i[a]·∫_K p per cell; used to assemble
/// manufactured mechanics loads by parts without differentiating p.
pub fn assemble_pressure_div_term(
    mesh: &Mesh,
    dofs: &DofMaps,
    p: &dyn Fn(Vec3) -> Result<f64>,
    degree: usize,
) -> Result<Vec<f64>> {
    let rule = tet_rule(degree);
    let mut load = vec![0.0; dofs.n_u];
    for c in 0..mesh.n_cells() {
        let jac = 6.0 * mesh.cell_volume(c);
        let mut cell_int = 0.0;
        for (r, w) in rule.points.iter().zip(&rule.weights) {
            cell_int += w * eval_nudged(p, mesh.map_ref_to_cell(c, *r), mesh.h)?;
        }
        cell_int *= jac;
        let g = shape_gradients(mesh, c);
        let cell = &mesh.cells[c];
        for i in 0..4 {
            for a in 0..3 {
                load[dofs.u_dof(cell[i], a)] += g[i].comp(a) * cell_int;
            }
        }
    }
    Ok(load)
}

/// Boundary term ∮_{∂Ω} p (z·n) dS of the mixed flow form, as an RT0 vector.
/// With flux-integral dofs the basis of boundary face F contributes
/// σ_{K,F}·(mean of p over F).
pub fn assemble_boundary_pressure_flux(
    mesh: &Mesh,
    dofs: &DofMaps,
    p: &dyn Fn(Vec3) -> Result<f64>,
    degree: usize,
) -> Result<Vec<f64>> {
    let rule = tri_rule(degree);
    let mut load = vec![0.0; dofs.n_w];
    // locate the owning cell's sign for each boundary face
    let mut sign = vec![0i8; dofs.n_w];
    for cf in &mesh.cell_faces {
        for &(f, s) in cf {
            if mesh.boundary_face[f] {
                sign[f] = s;
            }
        }
    }
    for f in mesh.boundary_faces() {
        // mean of p over the face: ref weights sum to 1/2, |detJ| = 2·area
        let mut mean = 0.0;
        for (r, w) in rule.points.iter().zip(&rule.weights) {
            mean += w * eval_nudged(p, mesh.map_ref_to_face(f, *r), mesh.h)?;
        }
        mean *= 2.0;
        load[f] = (sign[f] as f64) * mean;
    }
    Ok(load)
}
