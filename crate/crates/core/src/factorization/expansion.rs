use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{inverse_map, WeightVector};
use crate::error::{Error, Result};

/// Coefficients `c_{ik}` of `z_i = Σ_k c_{ik} ρ^k + O(ρ^{J+1})` along the
/// family `A_ℓ = ρ^J Ã_ℓ`, `Ã_J = e^{iθ}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionData {
    /// `c[i][k−1]` is the coefficient of `ρ^k` in `z_i`.
    pub c: Vec<Vec<Complex64>>,
    pub theta: f64,
    pub branch_id: usize,
}

impl ExpansionData {
    /// Truncated series `Σ_{k≤J} c_{ik} ρ^k` for every point.
    pub fn evaluate(&self, rho: f64) -> Vec<Complex64> {
        self.c
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .map(|(k, ck)| ck * rho.powi(k as i32 + 1))
                    .sum()
            })
            .collect()
    }

    /// Column `k` (1-based) as a vector over points.
    pub fn column(&self, k: usize) -> Vec<Complex64> {
        self.c.iter().map(|row| row[k - 1]).collect()
    }
}

/// Visits every `(ℓ_1..ℓ_k)` with `Σ ℓ_j = total` and `Σ j ℓ_j = weight`.
fn compositions(k: usize, total: usize, weight: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(
        j: usize,
        k: usize,
        left: usize,
        wleft: usize,
        cur: &mut Vec<usize>,
        f: &mut impl FnMut(&[usize]),
    ) {
        if j > k {
            if left == 0 && wleft == 0 {
                f(cur);
            }
            return;
        }
        for n in 0..=left.min(wleft / j) {
            cur.push(n);
            rec(j + 1, k, left - n, wleft - j * n, cur, f);
            cur.pop();
        }
    }
    rec(1, k, total, weight, &mut Vec::with_capacity(k), f);
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|x| x as f64).product()
}

/// `Q_{ℓ,k}(c_1..c_k)`: the coefficient of `ρ^{ℓ+k}` in `(Σ_{m≤k} c_m ρ^m)^ℓ`,
/// summed over exponent tuples by multinomial enumeration. `c` holds
/// `c_1..c_k`.
pub fn lower_order_monomial(ell: usize, c: &[Complex64]) -> Complex64 {
    let k = c.len();
    let mut sum = Complex64::new(0.0, 0.0);
    if ell == 0 {
        return sum;
    }
    compositions(k, ell, ell + k, &mut |e| {
        let coeff = factorial(ell) / e.iter().map(|&n| factorial(n)).product::<f64>();
        let mono = e
            .iter()
            .zip(c)
            .fold(Complex64::new(1.0, 0.0), |acc, (&n, cm)| acc * cm.powu(n as u32));
        sum += coeff * mono;
    });
    sum
}

/// Expansion coefficients for the branch `branch` of the family with
/// normalized lower coefficients `atilde = (Ã_1..Ã_{J−1})`.
pub fn expansion_coeffs(
    theta: f64,
    atilde: &[Complex64],
    b: &WeightVector,
    branch: usize,
) -> Result<ExpansionData> {
    let j = b.len();
    if atilde.len() + 1 != j {
        return Err(Error::ShapeMismatch(format!(
            "expected {} normalized coefficients, got {}",
            j - 1,
            atilde.len()
        )));
    }
    let count: usize = (1..=j).product();
    if branch >= count {
        return Err(Error::InvalidInput(format!("branch {branch} out of range 0..{count}")));
    }
    let mut top = vec![Complex64::new(0.0, 0.0); j];
    top[j - 1] = Complex64::from_polar(1.0, theta);
    // The leading system Σ𝔟 c^ℓ = −J e^{iθ} δ_{ℓJ} is the power-sum system at ρ = 1.
    let c1 = inverse_map(&top, b)?.branches[branch].z.clone();
    for p in 0..j {
        for q in (p + 1)..j {
            if (c1[p] - c1[q]).norm() <= 1e-10 {
                return Err(Error::Singular(format!(
                    "leading coefficients of points {} and {} coincide",
                    p + 1,
                    q + 1
                )));
            }
        }
    }
    let w = b.as_slice();
    let t = DMatrix::from_fn(j, j, |row, col| w[col] * c1[col].powu(row as u32));
    let lu = t.lu();
    let mut cols: Vec<Vec<Complex64>> = vec![c1];
    for k in 2..=j {
        let y = DVector::from_fn(j, |row, _| {
            let ell = row + 1;
            let mut v = Complex64::new(0.0, 0.0);
            if ell == j - k + 1 {
                v -= atilde[ell - 1];
            }
            let q: Complex64 = (0..j)
                .map(|i| {
                    let prev: Vec<Complex64> = cols.iter().map(|col| col[i]).collect();
                    w[i] * lower_order_monomial(ell, &prev)
                })
                .sum();
            v - q / ell as f64
        });
        let x = lu
            .solve(&y)
            .ok_or_else(|| Error::Singular("Vandermonde system is singular".into()))?;
        cols.push(x.iter().copied().collect());
    }
    let c = (0..j).map(|i| cols.iter().map(|col| col[i]).collect()).collect();
    Ok(ExpansionData {
        c,
        theta,
        branch_id: branch,
    })
}
