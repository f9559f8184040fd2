//! Verifies the weak identity ∫_Ω ∇G·∇v dΩ = ∫_Λ v dS under quadrature
//! refinement for a polynomial test function vanishing on the boundary.

use poroline::greens::{
    verify_weak_laplacian, LineSegment, LineSourceNetwork, WeakLaplacianQuadrature,
};
use poroline::{Result, Vec3};

fn main() -> Result<()> {
    let seg = LineSegment::new(Vec3::new(0.5, 0.8, 0.5), Vec3::new(0.5, 0.2, 0.5))?;
    let net = LineSourceNetwork::time_only(vec![seg], |t| t.sin(), |t| t.cos());
    let v = |x: Vec3| x.x * (1.0 - x.x) * x.y * (1.0 - x.y) * x.z * (1.0 - x.z);
    let grad_v = |x: Vec3| {
        let fx = x.x * (1.0 - x.x);
        let fy = x.y * (1.0 - x.y);
        let fz = x.z * (1.0 - x.z);
        Vec3::new(
            (1.0 - 2.0 * x.x) * fy * fz,
            fx * (1.0 - 2.0 * x.y) * fz,
            fx * fy * (1.0 - 2.0 * x.z),
        )
    };
    println!("subdivisions   residual");
    for m in [2usize, 4, 8, 16, 32] {
        let quad = WeakLaplacianQuadrature {
            subdivisions: m,
            gauss_points: 4,
            line_points: 24,
        };
        let res = verify_weak_laplacian(&net, &v, &grad_v, &quad)?;
        println!("{m:12}   {res:.6e}");
    }
    Ok(())
}
