//! Legacy-VTK (ASCII unstructured grid) export of reconstructed fields:
//! full pressure and full flux magnitude as cell data, displacement as
//! point data.

use std::io::Write;
use std::path::Path;

use crate::biot::{BiotSystem, DiscreteState};
use crate::error::Result;
use crate::fem::eval_rt0;

/// Writes the reconstructed fields of one state to a legacy VTK file.
pub fn export_fields(system: &BiotSystem, state: &DiscreteState, path: &Path) -> Result<()> {
    let mesh = system.mesh();
    let dofs = system.dofs();
    let (p_full, w_full) = system.reconstruct_full(state)?;

    let mut flux_mag = Vec::with_capacity(mesh.n_cells());
    for c in 0..mesh.n_cells() {
        let w = eval_rt0(mesh, &w_full, c, mesh.cell_centroid(c));
        flux_mag.push(w.norm());
    }

    let file = std::fs::File::create(path)?;
    let mut out = std::io::BufWriter::new(file);
    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "poroline reconstructed fields at t = {}", state.t)?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET UNSTRUCTURED_GRID")?;

    writeln!(out, "POINTS {} double", mesh.n_vertices())?;
    for v in &mesh.vertices {
        writeln!(out, "{} {} {}", v.x, v.y, v.z)?;
    }

    writeln!(out, "CELLS {} {}", mesh.n_cells(), 5 * mesh.n_cells())?;
    for cell in &mesh.cells {
        writeln!(out, "4 {} {} {} {}", cell[0], cell[1], cell[2], cell[3])?;
    }
    writeln!(out, "CELL_TYPES {}", mesh.n_cells())?;
    for _ in 0..mesh.n_cells() {
        writeln!(out, "10")?;
    }

    writeln!(out, "CELL_DATA {}", mesh.n_cells())?;
    writeln!(out, "SCALARS pressure double 1")?;
    writeln!(out, "LOOKUP_TABLE default")?;
    for p in &p_full {
        writeln!(out, "{p}")?;
    }
    writeln!(out, "SCALARS flux_magnitude double 1")?;
    writeln!(out, "LOOKUP_TABLE default")?;
    for f in &flux_mag {
        writeln!(out, "{f}")?;
    }

    writeln!(out, "POINT_DATA {}", mesh.n_vertices())?;
    writeln!(out, "VECTORS displacement double")?;
    for v in 0..mesh.n_vertices() {
        writeln!(
            out,
            "{} {} {}",
            state.u[dofs.u_dof(v, 0)],
            state.u[dofs.u_dof(v, 1)],
            state.u[dofs.u_dof(v, 2)]
        )?;
    }
    out.flush()?;
    Ok(())
}
