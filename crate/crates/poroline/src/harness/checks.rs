//! Oracle verification suite shared by the `verify` subcommand and the
//! acceptance tests: quadrature and finite-difference oracles for the
//! line-source potential, the weak-Dirac identity, and the assembly property
//! checks.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::fem::sparse::norm2;
use crate::fem::{
    assemble_boundary_pressure_flux, assemble_div, assemble_elasticity, assemble_load_p0,
    assemble_p_mass, assemble_rt0_mass, interpolate_p0, interpolate_rt0, DofMaps, SparseMatrix,
};
use crate::geom::Vec3;
use crate::greens::{
    verify_weak_laplacian, LineSegment, LineSourceNetwork, WeakLaplacianQuadrature,
};
use crate::linsolve::{solve, LinearSystem, SpdFactor, SystemKind};
use crate::mesh::build_structured_tet_mesh;
use crate::quadrature::adaptive_simpson;

/// Outcome of one verification check.
#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        CheckResult {
            name: name.into(),
            passed,
            detail,
        }
    }
}

fn standard_network() -> LineSourceNetwork {
    let seg = LineSegment::new(Vec3::new(0.5, 0.8, 0.5), Vec3::new(0.5, 0.2, 0.5)).unwrap();
    LineSourceNetwork::time_only(vec![seg], |t| t.sin(), |t| t.cos())
}

/// Independent single-layer potential: adaptive quadrature of
/// ∫_Λ 1/(4π‖x-y‖) ds, summed over segments.
pub fn single_layer_by_quadrature(network: &LineSourceNetwork, x: Vec3) -> f64 {
    let mut total = 0.0;
    for seg in &network.segments {
        let f = |s: f64| 1.0 / (4.0 * std::f64::consts::PI * (x - seg.point_at(s)).norm());
        total += adaptive_simpson(&f, 0.0, seg.length, 1e-14);
    }
    total
}

fn random_point_at_distance(rng: &mut ChaCha8Rng, net: &LineSourceNetwork, min_dist: f64) -> Vec3 {
    loop {
        let x = Vec3::new(
            rng.random::<f64>(),
            rng.random::<f64>(),
            rng.random::<f64>(),
        );
        if net.distance(x) >= min_dist {
            return x;
        }
    }
}

/// |eval_G − quadrature| < 1e-10 at 100 random points with distance ≥ 0.05.
pub fn greens_quadrature_oracle_check() -> CheckResult {
    let net = standard_network();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let x = random_point_at_distance(&mut rng, &net, 0.05);
        let g = net.eval_g(x).expect("off segment");
        let oracle = single_layer_by_quadrature(&net, x);
        worst = worst.max((g - oracle).abs());
    }
    CheckResult::new(
        "greens quadrature oracle",
        worst < 1e-10,
        format!("max |G - single-layer quadrature| = {worst:.3e} (bound 1e-10)"),
    )
}

/// ∇G matches central finite differences to 1e-6 relative at 100 random
/// points with distance ≥ 0.05.
pub fn greens_gradient_fd_check() -> CheckResult {
    let net = standard_network();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let x = random_point_at_distance(&mut rng, &net, 0.05);
        let d = net.distance(x);
        let h = 1e-5 * d;
        let grad = net.grad_g(x).expect("off segment");
        let mut fd = Vec3::ZERO;
        let e = [
            Vec3::new(h, 0.0, 0.0),
            Vec3::new(0.0, h, 0.0),
            Vec3::new(0.0, 0.0, h),
        ];
        for (i, ei) in e.iter().enumerate() {
            let v = (net.eval_g(x + *ei).unwrap() - net.eval_g(x - *ei).unwrap()) / (2.0 * h);
            match i {
                0 => fd.x = v,
                1 => fd.y = v,
                _ => fd.z = v,
            }
        }
        worst = worst.max((grad - fd).norm() / grad.norm());
    }
    CheckResult::new(
        "greens gradient vs finite differences",
        worst < 1e-6,
        format!("max relative deviation = {worst:.3e} (bound 1e-6)"),
    )
}

/// 7-point FD Laplacian of G has magnitude < 1e-4·|G| at distance ≥ 0.1.
///
/// The stencil spacing is 5e-5: the FD truncation error scales like δ²/ρ⁴
/// for a log-singular potential, so coarser spacings fail the bound near
/// ρ = 0.1 regardless of how G is implemented.
pub fn harmonicity_check() -> CheckResult {
    let net = standard_network();
    let delta = 5e-5;
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut worst = 0.0f64;
    let eval = |x: Vec3| {
        let e = [
            Vec3::new(delta, 0.0, 0.0),
            Vec3::new(0.0, delta, 0.0),
            Vec3::new(0.0, 0.0, delta),
        ];
        let mut s = -6.0 * net.eval_g(x).unwrap();
        for ei in e {
            s += net.eval_g(x + ei).unwrap() + net.eval_g(x - ei).unwrap();
        }
        let lap = (s / (delta * delta)).abs();
        lap / (1e-4 * net.eval_g(x).unwrap().abs())
    };
    for _ in 0..100 {
        let x = random_point_at_distance(&mut rng, &net, 0.1);
        worst = worst.max(eval(x));
    }
    // adversarial ring at exactly the minimum distance
    for k in 0..16 {
        let th = 2.0 * std::f64::consts::PI * k as f64 / 16.0;
        let x = Vec3::new(0.5 + 0.1 * th.cos(), 0.5, 0.5 + 0.1 * th.sin());
        worst = worst.max(eval(x));
    }
    CheckResult::new(
        "harmonicity of G off the segment",
        worst < 1.0,
        format!("max |FD Laplacian| / (1e-4·|G|) = {worst:.3} (bound 1)"),
    )
}

/// Weak-Dirac identity: residual of ∫∇G·∇v = ∫_Λ v decreases monotonically
/// under quadrature refinement and drops below 1e-4 for
/// v = x(1-x)y(1-y)z(1-z).
pub fn weak_dirac_check() -> (CheckResult, Vec<f64>) {
    let net = standard_network();
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
    let ladder = [4usize, 8, 16, 32];
    let mut residuals = Vec::new();
    for m in ladder {
        let quad = WeakLaplacianQuadrature {
            subdivisions: m,
            gauss_points: 4,
            line_points: 24,
        };
        residuals.push(verify_weak_laplacian(&net, &v, &grad_v, &quad).expect("quadrature"));
    }
    let monotone = residuals.windows(2).all(|w| w[1] < w[0]);
    let last = *residuals.last().unwrap();
    let passed = monotone && last < 1e-4;
    let shown: Vec<String> = residuals.iter().map(|r| format!("{r:.3e}")).collect();
    (
        CheckResult::new(
            "weak-Dirac identity under quadrature refinement",
            passed,
            format!(
                "residuals [{}], final {last:.3e} (bound 1e-4, monotone: {monotone})",
                shown.join(", ")
            ),
        ),
        residuals,
    )
}

/// Assembly property suite on a coarse mesh: rigid-body kernel, symmetry,
/// P0/RT0 exactness, coupling transpose identity, mixed-Darcy lowest-order
/// exactness, and SPD factorization of the constrained elasticity.
pub fn assembly_properties_check() -> Vec<CheckResult> {
    let mesh = build_structured_tet_mesh(2).unwrap();
    let dofs = DofMaps::new(&mesh);
    let mut results = Vec::new();

    // rigid-body kernel
    let elasticity = assemble_elasticity(&mesh, &dofs, 625_000.0, 416_666.666_666_67);
    let csr = elasticity.to_csr();
    let scale = csr.vals.iter().fold(0f64, |m, v| m.max(v.abs()));
    let mut worst = 0.0f64;
    let mut modes: Vec<Vec<f64>> = Vec::new();
    for a in 0..3 {
        let mut m = vec![0.0; dofs.n_u];
        for v in 0..mesh.n_vertices() {
            m[dofs.u_dof(v, a)] = 1.0;
        }
        modes.push(m);
    }
    for ax in [
        Vec3::new(1.0, 0.0, 0.0),
        Vec3::new(0.0, 1.0, 0.0),
        Vec3::new(0.0, 0.0, 1.0),
    ] {
        let mut m = vec![0.0; dofs.n_u];
        for v in 0..mesh.n_vertices() {
            let r = ax.cross(mesh.vertices[v]);
            for a in 0..3 {
                m[dofs.u_dof(v, a)] = r.comp(a);
            }
        }
        modes.push(m);
    }
    for mode in &modes {
        worst = worst.max(norm2(&csr.matvec(mode)));
    }
    results.push(CheckResult::new(
        "elasticity rigid-body kernel (6 modes)",
        worst < 1e-10 * scale,
        format!("max residual {worst:.3e} vs bound {:.3e}", 1e-10 * scale),
    ));

    // symmetry
    let kappa = 1.57e-2;
    let rt0 = assemble_rt0_mass(&mesh, &dofs, 1.0 / kappa);
    let asym = elasticity.asymmetry().max(rt0.asymmetry());
    results.push(CheckResult::new(
        "mass/stiffness symmetry",
        asym < 1e-12,
        format!("max relative asymmetry {asym:.3e} (bound 1e-12)"),
    ));

    // P0 exactness: mass diagonal = volumes, load of 1 = volumes
    let pm = assemble_p_mass(&mesh, &dofs, 1.0).to_csr();
    let load1 = assemble_load_p0(&mesh, &dofs, &|_| Ok(1.0), 2).unwrap();
    let mut p0_err = 0.0f64;
    for c in 0..dofs.n_p {
        let vol = mesh.cell_volume(c);
        p0_err = p0_err
            .max((pm.row(c).1[0] - vol).abs())
            .max((load1[c] - vol).abs());
    }
    results.push(CheckResult::new(
        "P0 exactness on constants",
        p0_err < 1e-14,
        format!("max deviation {p0_err:.3e}"),
    ));

    // RT0 exactness: constants interpolate exactly, divergence moments exact
    let field = Vec3::new(0.7, -0.2, 1.1);
    let w_const = interpolate_rt0(&mesh, &dofs, &|_| Ok(field), 2).unwrap();
    let div = assemble_div(&mesh, &dofs);
    let div_const = div.to_csr().matvec(&w_const);
    let w_x = interpolate_rt0(&mesh, &dofs, &|x| Ok(x), 2).unwrap();
    let div_x = div.to_csr().matvec(&w_x);
    let mut rt0_err = div_const.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for (c, v) in div_x.iter().enumerate() {
        rt0_err = rt0_err.max((v - 3.0 * mesh.cell_volume(c)).abs());
    }
    let l2 = crate::fem::l2_error_rt0(&mesh, &dofs, &w_const, &|_| Ok(field), 2).unwrap();
    results.push(CheckResult::new(
        "RT0 exactness on constant and linear fields",
        rt0_err < 1e-12 && l2 < 1e-12,
        format!("divergence deviation {rt0_err:.3e}, interpolation error {l2:.3e}"),
    ));

    // coupling transpose identity (bit-exact)
    let c_mat = crate::fem::assemble_coupling_div_u(&mesh, &dofs, 1.0);
    let ct = c_mat.transpose().to_csr();
    let c_csr = c_mat.to_csr();
    let mut transpose_exact = true;
    'outer: for i in 0..dofs.n_p {
        let (cols, vals) = c_csr.row(i);
        for (col, val) in cols.iter().zip(vals) {
            let (tc, tv) = ct.row(*col);
            match tc.iter().position(|&x| x == i) {
                Some(k) if tv[k] == *val => {}
                _ => {
                    transpose_exact = false;
                    break 'outer;
                }
            }
        }
    }
    results.push(CheckResult::new(
        "coupling adjointness ⟨α∇·u, q⟩ = ⟨αq, ∇·u⟩ᵀ",
        transpose_exact,
        "entrywise transpose identity".into(),
    ));

    // mixed-Darcy lowest-order exactness with the natural boundary term
    results.push(mixed_darcy_exactness(&mesh, &dofs, kappa));

    // SPD elasticity after constraints: Cholesky must succeed
    let mut bc = elasticity.clone();
    let mut rhs = vec![0.0; dofs.n_u];
    bc.apply_dirichlet(&mut rhs, &dofs.u_boundary, &vec![0.0; dofs.n_u]);
    let spd = SpdFactor::new(&bc).is_ok();
    results.push(CheckResult::new(
        "constrained elasticity is SPD (Cholesky succeeds)",
        spd,
        "factorization of the eliminated system".into(),
    ));

    results
}

fn mixed_darcy_exactness(mesh: &crate::mesh::Mesh, dofs: &DofMaps, kappa: f64) -> CheckResult {
    // manufactured linear pressure / constant flux
    let c = Vec3::new(0.4, -1.3, 0.9);
    let p_exact = move |x: Vec3| c.dot(x) + 0.7;
    let w_exact = c * (-kappa);

    let mw = assemble_rt0_mass(mesh, dofs, 1.0 / kappa);
    let div = assemble_div(mesh, dofs);
    let n_w = dofs.n_w;
    let n_p = dofs.n_p;
    let system = SparseMatrix::from_blocks(
        n_w + n_p,
        n_w + n_p,
        &[
            (0, 0, 1.0, &mw),
            (0, n_w, -1.0, &div.transpose()),
            (n_w, 0, 1.0, &div),
        ],
    );
    let bc_term = assemble_boundary_pressure_flux(mesh, dofs, &|x| Ok(p_exact(x)), 4).unwrap();
    let mut rhs = vec![0.0; n_w + n_p];
    for (r, b) in rhs.iter_mut().zip(&bc_term) {
        *r = -b;
    }
    let x = match solve(
        &LinearSystem {
            matrix: system,
            rhs,
            kind: SystemKind::SaddlePoint,
        },
        1e-10,
    ) {
        Ok(x) => x,
        Err(e) => {
            return CheckResult::new("mixed-Darcy lowest-order exactness", false, e.to_string())
        }
    };
    let w_interp = interpolate_rt0(mesh, dofs, &|_| Ok(w_exact), 2).unwrap();
    let p_interp = interpolate_p0(mesh, dofs, &|y| Ok(p_exact(y)), 2).unwrap();
    let mut err = 0.0f64;
    for (a, b) in x[..n_w].iter().zip(&w_interp) {
        err = err.max((a - b).abs());
    }
    for (a, b) in x[n_w..].iter().zip(&p_interp) {
        err = err.max((a - b).abs());
    }
    CheckResult::new(
        "mixed-Darcy lowest-order exactness",
        err < 1e-9,
        format!("max dof deviation from interpolants {err:.3e}"),
    )
}

/// Runs the whole verification suite.
pub fn run_all() -> Vec<CheckResult> {
    let mut results = vec![
        greens_quadrature_oracle_check(),
        greens_gradient_fd_check(),
        harmonicity_check(),
        weak_dirac_check().0,
    ];
    results.extend(assembly_properties_check());
    results
}

/// Convenience: true when every check passed.
pub fn all_passed(results: &[CheckResult]) -> bool {
    results.iter().all(|r| r.passed)
}
