//! Quadrature rules: Gauss–Legendre on intervals, and rules on the reference
//! tetrahedron / triangle built either from classical point sets (low degree)
//! or from Duffy-collapsed tensor Gauss rules (arbitrary degree, all points
//! strictly interior, all weights positive).

/// Gauss–Legendre nodes and weights on [0, 1].
///
/// Nodes are computed by Newton iteration on the Legendre polynomial; this is
/// accurate to machine precision for any practical point count.
pub fn gauss_legendre_01(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1, "need at least one Gauss point");
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        // initial guess (Chebyshev-like)
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_and_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_and_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // map [-1,1] -> [0,1]
        out.push(((1.0 - x) / 2.0, w / 2.0));
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    out
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Quadrature rule on the reference tetrahedron {x,y,z >= 0, x+y+z <= 1}.
/// Weights sum to the reference volume 1/6.
#[derive(Clone, Debug)]
pub struct TetRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

/// Quadrature rule on the reference triangle {x,y >= 0, x+y <= 1}.
/// Weights sum to the reference area 1/2.
#[derive(Clone, Debug)]
pub struct TriRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

/// Rule exact for polynomials of total degree `degree` on the reference tet.
/// All points are strictly interior.
pub fn tet_rule(degree: usize) -> TetRule {
    if degree <= 2 {
        // classical 4-point rule
        let a = (5.0 + 3.0 * 5f64.sqrt()) / 20.0;
        let b = (5.0 - 5f64.sqrt()) / 20.0;
        let w = 1.0 / 24.0;
        TetRule {
            points: vec![[a, b, b], [b, a, b], [b, b, a], [b, b, b]],
            weights: vec![w; 4],
            degree: 2,
        }
    } else {
        // Duffy-collapsed tensor Gauss: exactness requires 2m-1 >= degree+2
        let m = (degree + 4) / 2; // ceil((degree+3)/2)
        let g = gauss_legendre_01(m);
        let mut points = Vec::with_capacity(m * m * m);
        let mut weights = Vec::with_capacity(m * m * m);
        for &(u, wu) in &g {
            for &(v, wv) in &g {
                for &(t, wt) in &g {
                    let x = u;
                    let y = v * (1.0 - u);
                    let z = t * (1.0 - u) * (1.0 - v);
                    let jac = (1.0 - u) * (1.0 - u) * (1.0 - v);
                    points.push([x, y, z]);
                    weights.push(wu * wv * wt * jac);
                }
            }
        }
        TetRule {
            points,
            weights,
            degree,
        }
    }
}

/// Rule exact for polynomials of total degree `degree` on the reference
/// triangle. All points are strictly interior.
pub fn tri_rule(degree: usize) -> TriRule {
    if degree <= 2 {
        TriRule {
            points: vec![
                [1.0 / 6.0, 1.0 / 6.0],
                [2.0 / 3.0, 1.0 / 6.0],
                [1.0 / 6.0, 2.0 / 3.0],
            ],
            weights: vec![1.0 / 6.0; 3],
            degree: 2,
        }
    } else {
        let m = (degree + 3) / 2; // ceil((degree+2)/2)
        let g = gauss_legendre_01(m);
        let mut points = Vec::with_capacity(m * m);
        let mut weights = Vec::with_capacity(m * m);
        for &(u, wu) in &g {
            for &(v, wv) in &g {
                let x = u;
                let y = v * (1.0 - u);
                points.push([x, y]);
                weights.push(wu * wv * (1.0 - u));
            }
        }
        TriRule {
            points,
            weights,
            degree,
        }
    }
}

/// Adaptive Simpson quadrature on [a, b] to absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_recurse(f, a, b, fa, fb, fm, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_recurse(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    fm: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_recurse(f, a, m, fa, fm, flm, left, 0.5 * tol, depth - 1)
            + simpson_recurse(f, m, b, fm, fb, frm, right, 0.5 * tol, depth - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Exact integral of x^p y^q z^r over the reference tetrahedron.
    fn exact_tet_monomial(p: u32, q: u32, r: u32) -> f64 {
        fn fact(n: u32) -> f64 {
            (1..=n).map(|k| k as f64).product::<f64>().max(1.0)
        }
        fact(p) * fact(q) * fact(r) / fact(p + q + r + 3)
    }

    fn exact_tri_monomial(p: u32, q: u32) -> f64 {
        fn fact(n: u32) -> f64 {
            (1..=n).map(|k| k as f64).product::<f64>().max(1.0)
        }
        fact(p) * fact(q) / fact(p + q + 2)
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for n in 1..=12 {
            let rule = gauss_legendre_01(n);
            for d in 0..(2 * n) {
                let approx: f64 = rule.iter().map(|&(x, w)| w * x.powi(d as i32)).sum();
                let exact = 1.0 / (d as f64 + 1.0);
                assert!(
                    (approx - exact).abs() < 1e-13,
                    "n={n} degree={d}: {approx} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn tet_rules_exact_to_stated_degree() {
        for degree in [1usize, 2, 3, 4, 5, 7] {
            let rule = tet_rule(degree);
            let wsum: f64 = rule.weights.iter().sum();
            assert!((wsum - 1.0 / 6.0).abs() < 1e-14, "weights must sum to 1/6");
            for p in 0..=degree as u32 {
                for q in 0..=(degree as u32 - p) {
                    for r in 0..=(degree as u32 - p - q) {
                        let approx: f64 = rule
                            .points
                            .iter()
                            .zip(&rule.weights)
                            .map(|(pt, w)| {
                                w * pt[0].powi(p as i32)
                                    * pt[1].powi(q as i32)
                                    * pt[2].powi(r as i32)
                            })
                            .sum();
                        let exact = exact_tet_monomial(p, q, r);
                        assert!(
                            (approx - exact).abs() < 1e-13,
                            "deg {degree} monomial ({p},{q},{r}): {approx} vs {exact}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn tri_rules_exact_to_stated_degree() {
        for degree in [1usize, 2, 3, 5, 6] {
            let rule = tri_rule(degree);
            for p in 0..=degree as u32 {
                for q in 0..=(degree as u32 - p) {
                    let approx: f64 = rule
                        .points
                        .iter()
                        .zip(&rule.weights)
                        .map(|(pt, w)| w * pt[0].powi(p as i32) * pt[1].powi(q as i32))
                        .sum();
                    let exact = exact_tri_monomial(p, q);
                    assert!(
                        (approx - exact).abs() < 1e-14,
                        "deg {degree} monomial ({p},{q}): {approx} vs {exact}"
                    );
                }
            }
        }
    }

    #[test]
    fn rule_points_strictly_interior_with_positive_weights() {
        for degree in [2usize, 5, 8] {
            let rule = tet_rule(degree);
            for (pt, w) in rule.points.iter().zip(&rule.weights) {
                assert!(*w > 0.0);
                assert!(pt[0] > 0.0 && pt[1] > 0.0 && pt[2] > 0.0);
                assert!(pt[0] + pt[1] + pt[2] < 1.0);
            }
            let tri = tri_rule(degree);
            for (pt, w) in tri.points.iter().zip(&tri.weights) {
                assert!(*w > 0.0);
                assert!(pt[0] > 0.0 && pt[1] > 0.0 && pt[0] + pt[1] < 1.0);
            }
        }
    }

    #[test]
    fn adaptive_simpson_smooth() {
        let f = |x: f64| (3.0 * x).sin().exp();
        let val = adaptive_simpson(&f, 0.0, 2.0, 1e-12);
        // reference from a fine fixed Gauss rule
        let rule = gauss_legendre_01(60);
        let reference: f64 = rule.iter().map(|&(x, w)| 2.0 * w * f(2.0 * x)).sum();
        assert!((val - reference).abs() < 1e-10);
    }
}
