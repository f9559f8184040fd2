//! Oracle checks for the line-source potential: the closed form against
//! adaptive single-layer quadrature, the analytic gradient against central
//! differences, and harmonicity off the segment.

use poroline::harness::checks;

fn main() {
    for result in [
        checks::greens_quadrature_oracle_check(),
        checks::greens_gradient_fd_check(),
        checks::harmonicity_check(),
    ] {
        println!(
            "{}: {} — {}",
            if result.passed { "PASS" } else { "FAIL" },
            result.name,
            result.detail
        );
    }
}
