//! Manufactured-solution convergence study over a mesh ladder.
//!
//! Usage: `cargo run --release --example convergence_table [-- 8,16,32]`
//! (default ladder 4,8,16 to keep the demo quick; the reference experiment
//! uses 8,16,32 with τ = 0.1 and T = 1).

use poroline::harness::run_convergence_study;
use poroline::{Config, Result};

fn main() -> Result<()> {
    let levels: Vec<usize> = std::env::args()
        .nth(1)
        .map(|s| {
            s.split(',')
                .map(|t| t.trim().parse().expect("level"))
                .collect()
        })
        .unwrap_or_else(|| vec![4, 8, 16]);
    let config = Config::default();
    let report =
        run_convergence_study(&levels, &config.material_params()?, &config.solver_config())?;
    print!("{}", report.table());
    Ok(())
}
