//! Structured tetrahedral mesh of the unit cube with globally oriented faces.
//!
//! Each of the n³ sub-cubes is split into six tetrahedra sharing the main
//! diagonal (Kuhn decomposition). The split is applied identically in every
//! sub-cube, which makes the global mesh conforming: the diagonal drawn on a
//! shared cube face is the same from both sides.
//!
//! Faces carry a global orientation so that flux degrees of freedom are
//! unambiguous: a face is keyed by its ascending vertex triple (v0, v1, v2)
//! and its global unit normal is the normalized (x1-x0) x (x2-x0). Each cell
//! records, per face, whether the global normal points out of the cell.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geom::Vec3;

/// Conforming tetrahedral mesh of the unit cube.
///
/// Immutable after construction; shared read access is safe.
#[derive(Clone, Debug)]
pub struct Mesh {
    /// Vertex coordinates (mm).
    pub vertices: Vec<Vec3>,
    /// Cells as vertex-id 4-tuples, positively oriented.
    pub cells: Vec<[usize; 4]>,
    /// Faces as ascending vertex-id triples; index is the global face id.
    pub faces: Vec<[usize; 3]>,
    /// Per cell: the four face ids with +1 if the global face normal points
    /// out of the cell, -1 otherwise.
    pub cell_faces: Vec<[(usize, i8); 4]>,
    /// `true` for faces on the domain boundary.
    pub boundary_face: Vec<bool>,
    /// `true` for vertices on the domain boundary.
    pub boundary_vertex: Vec<bool>,
    /// Nominal mesh size 1/n.
    pub h: f64,
    /// Subdivisions per axis.
    pub n: usize,
}

/// Geometry of one cell: volume, affine map, and outward face data.
#[derive(Clone, Debug)]
pub struct CellGeometry {
    /// Cell volume (mm³).
    pub volume: f64,
    /// Columns are the edge vectors x1-x0, x2-x0, x3-x0.
    pub jacobian: [[f64; 3]; 3],
    /// Outward unit normal and area for each of the four faces, ordered as
    /// in `cell_faces`.
    pub face_normals_and_areas: [(Vec3, f64); 4],
}

/// Builds the Kuhn 6-tetrahedra decomposition of the unit cube with n
/// subdivisions per axis: (n+1)³ vertices and 6n³ cells.
pub fn build_structured_tet_mesh(n: usize) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::InvalidMeshSize("n must be at least 1".into()));
    }
    // (n+1)^3 vertices and 6 n^3 cells must fit comfortably in memory
    let nv = (n + 1)
        .checked_pow(3)
        .filter(|&v| v <= 1 << 28)
        .ok_or_else(|| {
            Error::InvalidMeshSize(format!("n = {n} is too large for an in-memory mesh"))
        })?;
    let nc = 6 * n * n * n;

    let hn = n as f64;
    let mut vertices = Vec::with_capacity(nv);
    for k in 0..=n {
        for j in 0..=n {
            for i in 0..=n {
                vertices.push(Vec3::new(i as f64 / hn, j as f64 / hn, k as f64 / hn));
            }
        }
    }
    let vid = |i: usize, j: usize, k: usize| (k * (n + 1) + j) * (n + 1) + i;

    // The six tetrahedra of a sub-cube: walk from the low corner to the high
    // corner one axis at a time, one permutation of (x,y,z) per cell.
    const PERMS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];

    let mut cells = Vec::with_capacity(nc);
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                let base = [i, j, k];
                for perm in PERMS {
                    let mut walk = base;
                    let v0 = vid(walk[0], walk[1], walk[2]);
                    walk[perm[0]] += 1;
                    let v1 = vid(walk[0], walk[1], walk[2]);
                    walk[perm[1]] += 1;
                    let v2 = vid(walk[0], walk[1], walk[2]);
                    let v3 = vid(i + 1, j + 1, k + 1);
                    let mut cell = [v0, v1, v2, v3];
                    if signed_volume(&vertices, &cell) < 0.0 {
                        cell.swap(1, 2);
                    }
                    cells.push(cell);
                }
            }
        }
    }

    // Collect faces; key = ascending vertex triple.
    let mut face_ids: HashMap<[usize; 3], usize> = HashMap::with_capacity(2 * nc);
    let mut faces: Vec<[usize; 3]> = Vec::with_capacity(2 * nc + 3 * n * n);
    let mut incidence: Vec<u8> = Vec::new();
    let mut cell_faces = Vec::with_capacity(nc);
    for cell in &cells {
        let mut entry = [(0usize, 0i8); 4];
        for (slot, local) in LOCAL_FACES.iter().enumerate() {
            let tri = [cell[local[0]], cell[local[1]], cell[local[2]]];
            let mut key = tri;
            key.sort_unstable();
            let fid = *face_ids.entry(key).or_insert_with(|| {
                faces.push(key);
                incidence.push(0);
                faces.len() - 1
            });
            incidence[fid] += 1;
            // outward normal of this face within the cell vs global normal
            let outward = outward_normal(&vertices, cell, local);
            let global = face_normal_unnormalized(&vertices, &key);
            let sign = if outward.dot(global) > 0.0 { 1 } else { -1 };
            entry[slot] = (fid, sign);
        }
        cell_faces.push(entry);
    }

    let boundary_face: Vec<bool> = incidence.iter().map(|&c| c == 1).collect();
    debug_assert!(incidence.iter().all(|&c| c == 1 || c == 2));

    let mut boundary_vertex = vec![false; vertices.len()];
    for (fid, tri) in faces.iter().enumerate() {
        if boundary_face[fid] {
            for &v in tri {
                boundary_vertex[v] = true;
            }
        }
    }

    Ok(Mesh {
        vertices,
        cells,
        faces,
        cell_faces,
        boundary_face,
        boundary_vertex,
        h: 1.0 / hn,
        n,
    })
}

/// Local faces of a tetrahedron; face `slot` is opposite vertex `slot`.
const LOCAL_FACES: [[usize; 3]; 4] = [[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]];

fn signed_volume(vertices: &[Vec3], cell: &[usize; 4]) -> f64 {
    let a = vertices[cell[1]] - vertices[cell[0]];
    let b = vertices[cell[2]] - vertices[cell[0]];
    let c = vertices[cell[3]] - vertices[cell[0]];
    a.cross(b).dot(c) / 6.0
}

/// Area-weighted normal of face `local` pointing out of the cell.
fn outward_normal(vertices: &[Vec3], cell: &[usize; 4], local: &[usize; 3]) -> Vec3 {
    let p0 = vertices[cell[local[0]]];
    let p1 = vertices[cell[local[1]]];
    let p2 = vertices[cell[local[2]]];
    let opp_local = (0..4).find(|i| !local.contains(i)).unwrap();
    let opp = vertices[cell[opp_local]];
    let n = (p1 - p0).cross(p2 - p0);
    if n.dot(opp - p0) > 0.0 {
        -n
    } else {
        n
    }
}

/// Area-weighted global normal of a face keyed by its ascending triple.
fn face_normal_unnormalized(vertices: &[Vec3], key: &[usize; 3]) -> Vec3 {
    let p0 = vertices[key[0]];
    let p1 = vertices[key[1]];
    let p2 = vertices[key[2]];
    (p1 - p0).cross(p2 - p0)
}

impl Mesh {
    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    /// Ids of the boundary faces.
    pub fn boundary_faces(&self) -> impl Iterator<Item = usize> + '_ {
        self.boundary_face
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i)
    }

    pub fn cell_volume(&self, cell_id: usize) -> f64 {
        signed_volume(&self.vertices, &self.cells[cell_id]).abs()
    }

    pub fn cell_centroid(&self, cell_id: usize) -> Vec3 {
        let c = &self.cells[cell_id];
        (self.vertices[c[0]] + self.vertices[c[1]] + self.vertices[c[2]] + self.vertices[c[3]])
            * 0.25
    }

    pub fn face_area(&self, face_id: usize) -> f64 {
        0.5 * face_normal_unnormalized(&self.vertices, &self.faces[face_id]).norm()
    }

    /// Global unit normal of a face (fixed by the ascending-triple rule).
    pub fn face_unit_normal(&self, face_id: usize) -> Vec3 {
        face_normal_unnormalized(&self.vertices, &self.faces[face_id])
            .normalized()
            .expect("mesh faces are non-degenerate")
    }

    pub fn face_centroid(&self, face_id: usize) -> Vec3 {
        let f = &self.faces[face_id];
        (self.vertices[f[0]] + self.vertices[f[1]] + self.vertices[f[2]]) * (1.0 / 3.0)
    }

    /// Volume, affine map and outward face data of one cell.
    pub fn cell_geometry(&self, cell_id: usize) -> Result<CellGeometry> {
        if cell_id >= self.cells.len() {
            return Err(Error::InvalidIndex(format!(
                "cell id {cell_id} out of range (mesh has {} cells)",
                self.cells.len()
            )));
        }
        let cell = &self.cells[cell_id];
        let p0 = self.vertices[cell[0]];
        let e1 = self.vertices[cell[1]] - p0;
        let e2 = self.vertices[cell[2]] - p0;
        let e3 = self.vertices[cell[3]] - p0;
        let volume = e1.cross(e2).dot(e3) / 6.0;
        let mut fna = [(Vec3::ZERO, 0.0); 4];
        for (slot, local) in LOCAL_FACES.iter().enumerate() {
            let nvec = outward_normal(&self.vertices, cell, local);
            let area = 0.5 * nvec.norm();
            fna[slot] = (nvec.normalized().expect("non-degenerate face"), area);
        }
        Ok(CellGeometry {
            volume,
            jacobian: [[e1.x, e2.x, e3.x], [e1.y, e2.y, e3.y], [e1.z, e2.z, e3.z]],
            face_normals_and_areas: fna,
        })
    }

    /// Maps a reference-tet point to physical coordinates within a cell.
    #[inline]
    pub fn map_ref_to_cell(&self, cell_id: usize, r: [f64; 3]) -> Vec3 {
        let cell = &self.cells[cell_id];
        let p0 = self.vertices[cell[0]];
        let e1 = self.vertices[cell[1]] - p0;
        let e2 = self.vertices[cell[2]] - p0;
        let e3 = self.vertices[cell[3]] - p0;
        p0 + e1 * r[0] + e2 * r[1] + e3 * r[2]
    }

    /// Maps a reference-triangle point to physical coordinates within a face.
    #[inline]
    pub fn map_ref_to_face(&self, face_id: usize, r: [f64; 2]) -> Vec3 {
        let f = &self.faces[face_id];
        let p0 = self.vertices[f[0]];
        let e1 = self.vertices[f[1]] - p0;
        let e2 = self.vertices[f[2]] - p0;
        p0 + e1 * r[0] + e2 * r[1]
    }
}
