//! Weighted factorization of monic polynomials.
//!
//! A cone point of parameter `β_0 > 1` splitting into `J` points with weights
//! `𝔟_j` is described, to leading order, by the map sending the positions
//! `z_1..z_J` to the coefficients `A_1..A_J` of the monic polynomial
//! `P(A; z) = z^J + A_1 z^{J−1} + … + A_J` whose log-modulus matches
//! `Σ 𝔟_j log|z − z_j|` up to `O(|z_j|^{J+1})`. This module evaluates that map,
//! all `J!` of its local inverses, the asymptotic expansion of the inverses
//! along rays, and the explicit `J = 2` blow-up chart.

mod chart;
mod cluster;
mod expansion;
mod homotopy;
pub(crate) mod roots;

pub use chart::{blowup_chart_j2, ChartJ2};
pub use cluster::{cluster_tree, ClusterNode};
pub use expansion::{expansion_coeffs, lower_order_monomial, ExpansionData};
pub use homotopy::{inverse_map, ContinuationOptions, InverseResult};
pub use roots::polynomial_roots;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for the weight-sum and subset-sum conditions on weights.
pub const WEIGHT_TOL: f64 = 1e-9;

/// Condition number above which a configuration is flagged as close to the
/// weighted discriminant.
pub const NEAR_DISCRIMINANT_COND: f64 = 1e8;

/// Samples closer than this factor times `max|z_j|` are rejected by
/// [`multiplicative_error`].
pub const EXCLUSION_FACTOR: f64 = 1.1;

/// Nonzero weights summing to `J` with no vanishing nonempty subset sum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    b: Vec<f64>,
}

impl WeightVector {
    pub fn new(b: Vec<f64>) -> Result<Self> {
        let j = b.len();
        if j == 0 {
            return Err(Error::InvalidInput("weight vector is empty".into()));
        }
        if j > 20 {
            return Err(Error::InvalidInput("at most 20 weights are supported".into()));
        }
        if b.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("weights must be finite".into()));
        }
        let sum: f64 = b.iter().sum();
        if (sum - j as f64).abs() > WEIGHT_TOL * j as f64 {
            return Err(Error::InvalidInput(format!(
                "weights must sum to J = {j}, got {sum}"
            )));
        }
        for mask in 1u32..(1u32 << j) {
            let s: f64 = (0..j).filter(|i| mask >> i & 1 == 1).map(|i| b[i]).sum();
            if s.abs() <= WEIGHT_TOL {
                let members: Vec<usize> = (0..j).filter(|i| mask >> i & 1 == 1).collect();
                return Err(Error::InvalidInput(format!(
                    "weights over indices {members:?} sum to zero"
                )));
            }
        }
        Ok(Self { b })
    }

    /// All weights equal to one.
    pub fn equal(j: usize) -> Self {
        Self { b: vec![1.0; j] }
    }

    /// Weights `J(B_i − 1)/(β_0 − 1)` for a cluster of target angles.
    pub fn from_targets(beta0: f64, targets: &[f64]) -> Result<Self> {
        let j = targets.len() as f64;
        Self::new(targets.iter().map(|x| j * (x - 1.0) / (beta0 - 1.0)).collect())
    }

    pub fn len(&self) -> usize {
        self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.b
    }

    pub fn is_equal_weight(&self) -> bool {
        self.b.iter().all(|x| (x - 1.0).abs() <= WEIGHT_TOL)
    }
}

/// One solution of the weighted power-sum system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootConfiguration {
    pub z: Vec<Complex64>,
    pub branch_id: usize,
    /// Smallest pairwise distance between the points.
    pub min_separation: f64,
    pub distinct: bool,
    /// Condition number of the Jacobian at this configuration.
    pub condition: f64,
    pub near_discriminant: bool,
}

impl RootConfiguration {
    pub(crate) fn new(z: Vec<Complex64>, branch_id: usize, b: &WeightVector) -> Self {
        let min_separation = min_separation(&z);
        let condition = jacobian(&z, b).condition;
        Self {
            distinct: min_separation > 1e-12 * (1.0 + z.iter().map(|x| x.norm()).fold(0.0, f64::max)),
            z,
            branch_id,
            min_separation,
            near_discriminant: !(condition <= NEAR_DISCRIMINANT_COND),
            condition,
        }
    }
}

fn min_separation(z: &[Complex64]) -> f64 {
    let mut m = f64::INFINITY;
    for i in 0..z.len() {
        for j in (i + 1)..z.len() {
            m = m.min((z[i] - z[j]).norm());
        }
    }
    m
}

/// Generalized binomial coefficient `C(b, n)`.
fn binomial(b: f64, n: usize) -> f64 {
    (0..n).fold(1.0, |acc, k| acc * (b - k as f64) / (k as f64 + 1.0))
}

/// Coefficients `A_1..A_J` of `Π (z − z_j)^{𝔟_j}` expanded in powers of
/// `1/z`, truncated after the `z^{−J}` term relative to the leading `z^J`.
pub fn forward_map(z: &[Complex64], b: &WeightVector) -> Result<Vec<Complex64>> {
    let j = b.len();
    if z.len() != j {
        return Err(Error::ShapeMismatch(format!(
            "{} points for {j} weights",
            z.len()
        )));
    }
    // Series in w = 1/z of Π (1 − z_i w)^{𝔟_i}, kept to degree J.
    let mut acc = vec![Complex64::new(0.0, 0.0); j + 1];
    acc[0] = Complex64::new(1.0, 0.0);
    for (zi, bi) in z.iter().zip(b.as_slice()) {
        let factor: Vec<Complex64> = (0..=j)
            .map(|n| binomial(*bi, n) * (-zi).powu(n as u32))
            .collect();
        let mut next = vec![Complex64::new(0.0, 0.0); j + 1];
        for (p, ap) in acc.iter().enumerate() {
            for (q, fq) in factor.iter().enumerate().take(j + 1 - p) {
                next[p + q] += ap * fq;
            }
        }
        acc = next;
    }
    Ok(acc[1..].to_vec())
}

/// Power sums `R_ℓ = Σ λ^ℓ` of the roots of `P(A; ·)`, `ℓ = 1..J`, by the
/// Newton recursion `R_ℓ = −ℓ A_ℓ − Σ_{i<ℓ} A_i R_{ℓ−i}`.
pub fn power_sums(a: &[Complex64]) -> Vec<Complex64> {
    let j = a.len();
    let mut r = vec![Complex64::new(0.0, 0.0); j];
    for l in 1..=j {
        let mut v = -(l as f64) * a[l - 1];
        for i in 1..l {
            v -= a[i - 1] * r[l - i - 1];
        }
        r[l - 1] = v;
    }
    r
}

/// Weighted power sums `Σ 𝔟_j z_j^ℓ`, `ℓ = 1..n`.
pub fn weighted_power_sums(z: &[Complex64], b: &[Complex64], n: usize) -> Vec<Complex64> {
    (1..=n)
        .map(|l| z.iter().zip(b).map(|(zi, bi)| bi * zi.powu(l as u32)).sum())
        .collect()
}

/// Jacobian `[ℓ 𝔟_j z_j^{ℓ−1}]` of the weighted power sums.
#[derive(Clone, Debug)]
pub struct JacobianReport {
    pub matrix: DMatrix<Complex64>,
    /// Ratio of extreme singular values; infinite when singular.
    pub condition: f64,
    pub rank: usize,
}

pub fn jacobian(z: &[Complex64], b: &WeightVector) -> JacobianReport {
    let bc: Vec<Complex64> = b.as_slice().iter().map(|x| Complex64::new(*x, 0.0)).collect();
    jacobian_complex(z, &bc)
}

pub(crate) fn jacobian_complex(z: &[Complex64], b: &[Complex64]) -> JacobianReport {
    let j = z.len();
    let matrix = DMatrix::from_fn(j, j, |row, col| {
        let l = row + 1;
        l as f64 * b[col] * z[col].powu(row as u32)
    });
    let sv = matrix.clone().svd(false, false).singular_values;
    let smax = sv.max();
    let smin = sv.min();
    let rank = sv.iter().filter(|s| **s > 1e-12 * smax).count();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    JacobianReport {
        matrix,
        condition,
        rank,
    }
}

/// `sup | log|P(A; z)| − Σ 𝔟_j log|z − z_j| |` over the sample points.
pub fn multiplicative_error(
    a: &[Complex64],
    z: &[Complex64],
    b: &WeightVector,
    samples: &[Complex64],
) -> Result<f64> {
    if a.len() != b.len() || z.len() != b.len() {
        return Err(Error::ShapeMismatch("A, Z and weights must have length J".into()));
    }
    let rmax = z.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let mut sup: f64 = 0.0;
    for s in samples {
        let r = s.norm();
        if r <= EXCLUSION_FACTOR * rmax || r >= 1.0 {
            return Err(Error::InvalidInput(format!(
                "sample {s} lies outside the annulus {:.3e} < |z| < 1",
                EXCLUSION_FACTOR * rmax
            )));
        }
        let p = a.iter().fold(Complex64::new(1.0, 0.0), |acc, ai| acc * s + ai);
        let lhs = p.norm().ln();
        let rhs: f64 = z
            .iter()
            .zip(b.as_slice())
            .map(|(zi, bi)| bi * (s - zi).norm().ln())
            .sum();
        sup = sup.max((lhs - rhs).abs());
    }
    Ok(sup)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Coefficients of `Π (1 − z_i w)^{𝔟_i}` through the exponential of the
    /// logarithmic series, independent of the binomial expansion.
    fn exp_log_oracle(z: &[Complex64], b: &[f64], j: usize) -> Vec<Complex64> {
        let p: Vec<Complex64> = (1..=j)
            .map(|n| z.iter().zip(b).map(|(zi, bi)| *bi * zi.powu(n as u32)).sum())
            .collect();
        let mut d = vec![c(0.0, 0.0); j + 1];
        d[0] = c(1.0, 0.0);
        for n in 1..=j {
            let mut s = c(0.0, 0.0);
            for k in 1..=n {
                s += p[k - 1] * d[n - k];
            }
            d[n] = -s / n as f64;
        }
        d[1..].to_vec()
    }

    #[test]
    fn forward_map_examples() {
        let a = forward_map(&[c(1.0, 0.0), c(-1.0, 0.0)], &WeightVector::equal(2)).unwrap();
        assert!((a[0] - c(0.0, 0.0)).norm() < 1e-15 && (a[1] - c(-1.0, 0.0)).norm() < 1e-15);

        let tau = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
        let a = forward_map(&[c(1.0, 0.0), tau, tau * tau], &WeightVector::equal(3)).unwrap();
        assert!(a[0].norm() < 1e-14 && a[1].norm() < 1e-14);
        assert!((a[2] - c(-1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn forward_map_weighted_matches_series_oracle() {
        let b = WeightVector::new(vec![1.5, 0.5]).unwrap();
        let z = [c(0.1, 0.0), c(-0.1, 0.0)];
        let a = forward_map(&z, &b).unwrap();
        // (1 − 0.1w)^{3/2}(1 + 0.1w)^{1/2} = 1 − 0.1w − 0.005w² + …
        let oracle = exp_log_oracle(&z, b.as_slice(), 2);
        for (x, y) in a.iter().zip(&oracle) {
            assert!((x - y).norm() < 1e-15);
        }
        assert!((a[0] - c(-0.1, 0.0)).norm() < 1e-15);
        assert!((a[1] - c(-0.005, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn power_sum_examples() {
        let (a1, a2, a3) = (c(0.3, -0.2), c(-0.1, 0.4), c(0.25, 0.05));
        let r = power_sums(&[a1, a2]);
        assert!((r[0] + a1).norm() < 1e-15);
        assert!((r[1] - (a1 * a1 - 2.0 * a2)).norm() < 1e-15);
        let r = power_sums(&[a1, a2, a3]);
        let r3 = -a1 * a1 * a1 + 3.0 * a1 * a2 - 3.0 * a3;
        assert!((r[2] - r3).norm() < 1e-15);
        assert!(power_sums(&[c(0.0, 0.0); 4]).iter().all(|x| x.norm() == 0.0));
    }

    #[test]
    fn power_sums_match_roots() {
        let roots = [c(0.2, 0.1), c(-0.3, 0.05), c(0.1, -0.4)];
        let a = forward_map(&roots, &WeightVector::equal(3)).unwrap();
        let r = power_sums(&a);
        let ones = [c(1.0, 0.0); 3];
        for (x, y) in r.iter().zip(weighted_power_sums(&roots, &ones, 3)) {
            assert!((x - y).norm() < 1e-14);
        }
    }

    #[test]
    fn jacobian_examples() {
        let b = WeightVector::equal(2);
        let j = jacobian(&[c(1.0, 0.0), c(-1.0, 0.0)], &b);
        let det = j.matrix[(0, 0)] * j.matrix[(1, 1)] - j.matrix[(0, 1)] * j.matrix[(1, 0)];
        assert!((det - c(-4.0, 0.0)).norm() < 1e-14);
        assert_eq!(j.rank, 2);

        let j = jacobian(&[c(0.3, 0.1), c(0.3, 0.1), c(-0.2, 0.0)], &WeightVector::equal(3));
        assert!(j.rank < 3);
        assert!(j.condition > NEAR_DISCRIMINANT_COND);

        let b = WeightVector::new(vec![1.5, 0.5, 1.0]).unwrap();
        let j = jacobian(&[c(0.0, 0.0), c(0.2, 0.0), c(-0.1, 0.3)], &b);
        for col in 0..3 {
            assert_eq!(j.matrix[(0, col)].re, b.as_slice()[col]);
        }
    }

    #[test]
    fn weight_validation() {
        assert!(WeightVector::new(vec![1.5, 0.5]).is_ok());
        assert!(WeightVector::new(vec![1.5, 0.6]).is_err());
        assert!(WeightVector::new(vec![3.0, -1.0, 1.0]).is_err());
        assert!(WeightVector::new(vec![0.0, 2.0]).is_err());
    }

    #[test]
    fn multiplicative_error_exact_roots() {
        let z = [c(0.05, 0.02), c(-0.03, 0.04)];
        let b = WeightVector::equal(2);
        let a = forward_map(&z, &b).unwrap();
        let samples: Vec<Complex64> = (0..16)
            .map(|k| Complex64::from_polar(0.5, k as f64 * 0.39))
            .collect();
        assert!(multiplicative_error(&a, &z, &b, &samples).unwrap() < 1e-14);
        assert!(multiplicative_error(&a, &z, &b, &[c(0.01, 0.0)]).is_err());
        let zero = [c(0.0, 0.0); 2];
        assert!(multiplicative_error(&zero, &zero, &b, &samples).unwrap() < 1e-15);
    }
}
