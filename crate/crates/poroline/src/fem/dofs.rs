//! Degree-of-freedom layout for the three discrete spaces.
//!
//! Displacement: continuous piecewise-linear vectors, 3 dofs per vertex,
//! ordered (vertex, component); homogeneous essential values on ∂Ω.
//! Pressure: piecewise constants, 1 dof per cell.
//! Flux: lowest-order Raviart–Thomas, 1 dof per face, valued as the normal
//! flux integral ∫_F w·n dS with respect to the global face orientation. No
//! essential condition is placed on the flux: the pressure boundary condition
//! is natural in the mixed form.

use crate::mesh::Mesh;

#[derive(Clone, Debug)]
pub struct DofMaps {
    /// Total displacement dofs (3 per vertex, boundary included).
    pub n_u: usize,
    /// Pressure dofs (= cell count).
    pub n_p: usize,
    /// Flux dofs (= face count).
    pub n_w: usize,
    /// Flag per displacement dof: essential boundary condition.
    pub u_boundary: Vec<bool>,
    /// Dimension of the displacement space after constraints.
    pub n_u_interior: usize,
}

impl DofMaps {
    pub fn new(mesh: &Mesh) -> Self {
        let n_u = 3 * mesh.n_vertices();
        let mut u_boundary = vec![false; n_u];
        for (v, &on) in mesh.boundary_vertex.iter().enumerate() {
            if on {
                for c in 0..3 {
                    u_boundary[3 * v + c] = true;
                }
            }
        }
        let n_u_interior = u_boundary.iter().filter(|&&b| !b).count();
        DofMaps {
            n_u,
            n_p: mesh.n_cells(),
            n_w: mesh.n_faces(),
            u_boundary,
            n_u_interior,
        }
    }

    #[inline]
    pub fn u_dof(&self, vertex: usize, component: usize) -> usize {
        3 * vertex + component
    }
}
