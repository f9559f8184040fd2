//! Single simulation of the physical problem: a pulsative line source inside
//! the unit cube of tissue, zero total pressure and displacement on the
//! boundary. Writes the reconstructed fields to `line_source.vtk`.

use std::path::Path;

use poroline::harness::{build_system, export_fields, run_physical};
use poroline::{Config, Result};

fn main() -> Result<()> {
    let config = Config {
        mesh_n: 8,
        ..Config::default()
    };
    let system = build_system(&config)?;
    println!(
        "mesh n = {}: {} cells, {} faces, {} vertices",
        config.mesh_n,
        system.mesh().n_cells(),
        system.mesh().n_faces(),
        system.mesh().n_vertices()
    );
    let trajectory = run_physical(&system)?;
    for (k, iters) in trajectory.iterations.iter().enumerate() {
        println!(
            "step {:2} (t = {:.1}): {} fixed-stress iterations",
            k + 1,
            (k + 1) as f64 * config.time_step,
            iters
        );
    }
    let last = trajectory.states.last().unwrap();
    let (p_full, _) = system.reconstruct_full(last)?;
    let max_p = p_full.iter().cloned().fold(f64::MIN, f64::max);
    println!("max reconstructed pressure at T: {max_p:.4} mPa");
    let path = Path::new("line_source.vtk");
    export_fields(&system, last, path)?;
    println!("fields written to {}", path.display());
    Ok(())
}
