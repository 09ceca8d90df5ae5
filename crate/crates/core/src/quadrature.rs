//! Gauss rules on intervals and triangles.

use nalgebra::{DMatrix, SymmetricEigen};
use statrs::function::gamma::ln_gamma;

/// Nodes and weights of a one-dimensional rule.
#[derive(Clone, Debug)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    /// Affinely maps a rule on `[−1, 1]` with unit weight to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> Rule {
        let h = 0.5 * (b - a);
        Rule {
            nodes: self.nodes.iter().map(|x| a + h * (x + 1.0)).collect(),
            weights: self.weights.iter().map(|w| w * h).collect(),
        }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(*x)).sum()
    }
}

/// Gauss–Legendre rule with `n` points on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> Rule {
    gauss_jacobi(n, 0.0, 0.0)
}

/// Gauss–Jacobi rule on `[−1, 1]` for the weight `(1 − x)^a (1 + x)^b`,
/// computed by the Golub–Welsch eigenvalue method.
pub fn gauss_jacobi(n: usize, a: f64, b: f64) -> Rule {
    assert!(n >= 1 && a > -1.0 && b > -1.0);
    let mut t = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        let s = 2.0 * kf + a + b;
        t[(k, k)] = if k == 0 {
            (b - a) / (a + b + 2.0)
        } else {
            (b * b - a * a) / (s * (s + 2.0))
        };
        if k + 1 < n {
            let j = kf + 1.0;
            let s = 2.0 * j + a + b;
            let beta = if k == 0 {
                4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + a + b).powi(2) * (3.0 + a + b))
            } else {
                4.0 * j * (j + a) * (j + b) * (j + a + b) / (s * s * (s + 1.0) * (s - 1.0))
            };
            t[(k, k + 1)] = beta.sqrt();
            t[(k + 1, k)] = beta.sqrt();
        }
    }
    let mu0 = ((a + b + 1.0) * std::f64::consts::LN_2 + ln_gamma(a + 1.0) + ln_gamma(b + 1.0)
        - ln_gamma(a + b + 2.0))
        .exp();
    let eig = SymmetricEigen::new(t);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| (eig.eigenvalues[i], mu0 * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    Rule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    }
}

/// Rule on `[0, 1]` for the weight `s^c`, `c > −1`.
pub fn radial_jacobi(n: usize, c: f64) -> Rule {
    let r = gauss_jacobi(n, 0.0, c);
    let scale = 0.5f64.powf(c + 1.0);
    Rule {
        nodes: r.nodes.iter().map(|x| 0.5 * (x + 1.0)).collect(),
        weights: r.weights.iter().map(|w| w * scale).collect(),
    }
}

/// Seven-point degree-five rule on the reference triangle, as barycentric
/// coordinates and weights summing to one.
pub fn triangle_rule7() -> Vec<([f64; 3], f64)> {
    let s15 = 15f64.sqrt();
    let a1 = (6.0 - s15) / 21.0;
    let b1 = (9.0 + 2.0 * s15) / 21.0;
    let w1 = (155.0 - s15) / 1200.0;
    let a2 = (6.0 + s15) / 21.0;
    let b2 = (9.0 - 2.0 * s15) / 21.0;
    let w2 = (155.0 + s15) / 1200.0;
    vec![
        ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 9.0 / 40.0),
        ([b1, a1, a1], w1),
        ([a1, b1, a1], w1),
        ([a1, a1, b1], w1),
        ([b2, a2, a2], w2),
        ([a2, b2, a2], w2),
        ([a2, a2, b2], w2),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        let r = gauss_legendre(6);
        for p in 0..12 {
            let exact = if p % 2 == 0 { 2.0 / (p as f64 + 1.0) } else { 0.0 };
            assert!((r.integrate(|x| x.powi(p)) - exact).abs() < 1e-14, "degree {p}");
        }
    }

    #[test]
    fn jacobi_weight_moments() {
        let c = -0.4;
        let r = radial_jacobi(8, c);
        for p in 0..10 {
            let exact = 1.0 / (p as f64 + c + 1.0);
            assert!((r.integrate(|s| s.powi(p)) - exact).abs() < 1e-13, "moment {p}");
        }
    }

    #[test]
    fn symmetric_jacobi_matches_beta_function() {
        let nu = 0.37;
        let r = gauss_jacobi(10, nu, nu);
        let exact = (2.0 * nu + 1.0) * std::f64::consts::LN_2 + 2.0 * ln_gamma(nu + 1.0)
            - ln_gamma(2.0 * nu + 2.0);
        assert!((r.integrate(|_| 1.0) - exact.exp()).abs() < 1e-13);
    }

    #[test]
    fn triangle_rule_degree_five() {
        let rule = triangle_rule7();
        // ∫ λ1^a λ2^b over the unit-area simplex equals 2·a!b!/(a+b+2)!.
        let fact = |n: u32| (1..=n).map(|k| k as f64).product::<f64>();
        for a in 0..=5u32 {
            for b in 0..=(5 - a) {
                let q: f64 = rule
                    .iter()
                    .map(|(l, w)| w * l[0].powi(a as i32) * l[1].powi(b as i32))
                    .sum();
                let exact = 2.0 * fact(a) * fact(b) / fact(a + b + 2);
                assert!((q - exact).abs() < 1e-14, "{a} {b}");
            }
        }
    }
}
