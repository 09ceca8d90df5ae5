//! Branch tracking for the weighted power-sum system.
//!
//! Every solution of `Σ 𝔟_j z_j^ℓ = R_ℓ(A)` is reached from an ordering of the
//! roots of `P(A; ·)` by continuing in the weights from `1⃗` to `𝔟`.

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{polynomial_roots, power_sums, RootConfiguration, WeightVector, WEIGHT_TOL};
use crate::error::{Error, Result};

/// Step control for the continuation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuationOptions {
    pub initial_step: f64,
    pub max_step: f64,
    pub min_step: f64,
    /// Newton corrector tolerance on the scaled unknowns.
    pub newton_tol: f64,
    /// A corrector move larger than this multiple of the predictor move is
    /// treated as a branch jump.
    pub jump_factor: f64,
    /// Imaginary amplitude of the detour path.
    pub detour_amplitude: f64,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        Self {
            initial_step: 0.02,
            max_step: 0.1,
            min_step: 1e-8,
            newton_tol: 1e-12,
            jump_factor: 10.0,
            detour_amplitude: 0.5,
        }
    }
}

/// Which weight path produced the branches.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightPath {
    /// No continuation needed (all weights equal to one, or `A = 0`).
    Direct,
    /// The real segment from `1⃗` to `𝔟`.
    Straight,
    /// A complex arc with the same endpoints avoiding vanishing subset sums.
    Detour,
}

/// All `J!` solutions of the weighted power-sum system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InverseResult {
    pub branches: Vec<RootConfiguration>,
    /// Two branches coincide to within `1e−8` of the root scale.
    pub collapsed: bool,
    pub path: WeightPath,
}

/// Solves `Σ 𝔟_j z_j^ℓ = R_ℓ(A)`, `ℓ = 1..J`, returning all `J!` branches.
pub fn inverse_map(a: &[Complex64], b: &WeightVector) -> Result<InverseResult> {
    inverse_map_with(a, b, &ContinuationOptions::default())
}

pub fn inverse_map_with(
    a: &[Complex64],
    b: &WeightVector,
    opts: &ContinuationOptions,
) -> Result<InverseResult> {
    let j = b.len();
    if a.len() != j {
        return Err(Error::ShapeMismatch(format!("{} coefficients for {j} weights", a.len())));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("coefficients must be finite".into()));
    }
    // The system is homogeneous under z ↦ σz, A_ℓ ↦ σ^ℓ A_ℓ, so work at unit scale.
    let sigma = a
        .iter()
        .enumerate()
        .map(|(i, x)| x.norm().powf(1.0 / (i + 1) as f64))
        .fold(0.0, f64::max);
    if sigma == 0.0 {
        let zero = vec![Complex64::new(0.0, 0.0); j];
        let count = (1..=j).product::<usize>();
        return Ok(InverseResult {
            branches: (0..count).map(|id| RootConfiguration::new(zero.clone(), id, b)).collect(),
            collapsed: j > 1,
            path: WeightPath::Direct,
        });
    }
    let scaled: Vec<Complex64> = a
        .iter()
        .enumerate()
        .map(|(i, x)| x / sigma.powi(i as i32 + 1))
        .collect();
    let r = power_sums(&scaled);
    let roots = polynomial_roots(&scaled);
    let starts: Vec<Vec<Complex64>> = roots.iter().copied().permutations(j).collect();
    let target: Vec<Complex64> = b.as_slice().iter().map(|x| Complex64::new(*x, 0.0)).collect();

    let (solutions, path) = if b.is_equal_weight() {
        let polished = starts
            .iter()
            .map(|z| polish(z.clone(), &target, &r))
            .collect::<Vec<_>>();
        (polished, WeightPath::Direct)
    } else {
        let straight_ok = all_subset_sums_positive(b.as_slice());
        let mut attempts: Vec<(WeightPath, f64)> = Vec::new();
        if straight_ok {
            attempts.push((WeightPath::Straight, 0.0));
        }
        attempts.push((WeightPath::Detour, opts.detour_amplitude));
        attempts.push((WeightPath::Detour, -opts.detour_amplitude));
        let mut last_err = None;
        let mut found = None;
        // Refining the step bounds repairs branch jumps that merge two paths.
        'outer: for refine in 0..3 {
            let mut o = opts.clone();
            let shrink = 0.25f64.powi(refine);
            o.initial_step *= shrink;
            o.max_step *= shrink;
            for &(kind, kappa) in &attempts {
                let weights = WeightHomotopy::new(b.as_slice(), kappa);
                let tracked: Result<Vec<Vec<Complex64>>> = starts
                    .par_iter()
                    .enumerate()
                    .map(|(id, z0)| track(z0, &weights, &r, &o, id))
                    .collect();
                match tracked {
                    Ok(sols) => {
                        let distinct = !has_duplicates(&sols, 1e-8);
                        if distinct || found.is_none() {
                            found = Some((sols, kind));
                        }
                        if distinct {
                            break 'outer;
                        }
                        log::debug!("branches merged along {kind:?}; refining");
                    }
                    Err(e) => {
                        log::debug!("continuation along {kind:?} failed: {e}");
                        last_err = Some(e);
                    }
                }
            }
        }
        match found {
            Some(f) => f,
            None => return Err(last_err.expect("at least one attempt")),
        }
    };

    let branches: Vec<RootConfiguration> = solutions
        .into_iter()
        .enumerate()
        .map(|(id, z)| RootConfiguration::new(z.iter().map(|x| x * sigma).collect(), id, b))
        .collect();
    let collapsed = detect_collapse(&branches, sigma);
    Ok(InverseResult {
        branches,
        collapsed,
        path,
    })
}

fn all_subset_sums_positive(b: &[f64]) -> bool {
    let j = b.len();
    (1u32..(1u32 << j)).all(|mask| {
        (0..j).filter(|i| mask >> i & 1 == 1).map(|i| b[i]).sum::<f64>() > WEIGHT_TOL
    })
}

fn has_duplicates(sols: &[Vec<Complex64>], tol: f64) -> bool {
    sols.iter().tuple_combinations().any(|(p, q)| {
        p.iter().zip(q).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) <= tol
    })
}

fn detect_collapse(branches: &[RootConfiguration], sigma: f64) -> bool {
    let z: Vec<Vec<Complex64>> = branches.iter().map(|b| b.z.clone()).collect();
    has_duplicates(&z, 1e-8 * sigma)
}

/// `b(s) = (1−s)1⃗ + s𝔟 + iκ s(1−s) d` with a fixed generic `d`, `Σ d = 0`.
struct WeightHomotopy {
    target: Vec<f64>,
    kappa: f64,
    d: Vec<f64>,
}

impl WeightHomotopy {
    fn new(target: &[f64], kappa: f64) -> Self {
        // Square roots of distinct primes are rationally independent, so no
        // proper subset of d sums to zero.
        const PRIMES: [f64; 20] = [
            2., 3., 5., 7., 11., 13., 17., 19., 23., 29., 31., 37., 41., 43., 47., 53., 59., 61.,
            67., 71.,
        ];
        let raw: Vec<f64> = PRIMES[..target.len()].iter().map(|p| p.sqrt()).collect();
        let mean = raw.iter().sum::<f64>() / raw.len() as f64;
        Self {
            target: target.to_vec(),
            kappa,
            d: raw.iter().map(|x| x - mean).collect(),
        }
    }

    fn at(&self, s: f64) -> Vec<Complex64> {
        self.target
            .iter()
            .zip(&self.d)
            .map(|(t, d)| Complex64::new((1.0 - s) + s * t, self.kappa * s * (1.0 - s) * d))
            .collect()
    }

    fn derivative(&self, s: f64) -> Vec<Complex64> {
        self.target
            .iter()
            .zip(&self.d)
            .map(|(t, d)| Complex64::new(t - 1.0, self.kappa * (1.0 - 2.0 * s) * d))
            .collect()
    }
}

fn system_matrix(z: &[Complex64], b: &[Complex64]) -> DMatrix<Complex64> {
    let j = z.len();
    DMatrix::from_fn(j, j, |row, col| (row + 1) as f64 * b[col] * z[col].powu(row as u32))
}

fn residual(z: &[Complex64], b: &[Complex64], r: &[Complex64]) -> DVector<Complex64> {
    DVector::from_fn(z.len(), |row, _| {
        let l = row as u32 + 1;
        z.iter().zip(b).map(|(zi, bi)| bi * zi.powu(l)).sum::<Complex64>() - r[row]
    })
}

fn solve(m: DMatrix<Complex64>, rhs: DVector<Complex64>) -> Option<Vec<Complex64>> {
    let x = m.lu().solve(&rhs)?;
    if x.iter().all(|v| v.is_finite()) {
        Some(x.iter().copied().collect())
    } else {
        None
    }
}

fn sup_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// Tangent `dz/ds = −J_z⁻¹ ∂_s H`.
fn tangent(z: &[Complex64], s: f64, w: &WeightHomotopy) -> Option<Vec<Complex64>> {
    let b = w.at(s);
    let db = w.derivative(s);
    let hs = DVector::from_fn(z.len(), |row, _| {
        let l = row as u32 + 1;
        -z.iter().zip(&db).map(|(zi, di)| di * zi.powu(l)).sum::<Complex64>()
    });
    solve(system_matrix(z, &b), hs)
}

fn newton(
    mut z: Vec<Complex64>,
    b: &[Complex64],
    r: &[Complex64],
    tol: f64,
    max_iter: usize,
) -> Option<Vec<Complex64>> {
    for _ in 0..max_iter {
        let dz = solve(system_matrix(&z, b), -residual(&z, b, r))?;
        for (zi, d) in z.iter_mut().zip(&dz) {
            *zi += d;
        }
        if sup_norm(&dz) <= tol * (1.0 + sup_norm(&z)) {
            return Some(z);
        }
    }
    None
}

fn polish(z: Vec<Complex64>, b: &[Complex64], r: &[Complex64]) -> Vec<Complex64> {
    let mut z = z;
    for _ in 0..4 {
        let Some(dz) = solve(system_matrix(&z, b), -residual(&z, b, r)) else {
            break;
        };
        if sup_norm(&dz) > 1e-6 * (1.0 + sup_norm(&z)) {
            break;
        }
        for (zi, d) in z.iter_mut().zip(&dz) {
            *zi += d;
        }
        if sup_norm(&dz) <= 1e-15 * (1.0 + sup_norm(&z)) {
            break;
        }
    }
    z
}

fn track(
    z0: &[Complex64],
    w: &WeightHomotopy,
    r: &[Complex64],
    opts: &ContinuationOptions,
    branch: usize,
) -> Result<Vec<Complex64>> {
    let mut z = z0.to_vec();
    let mut s = 0.0;
    let mut ds = opts.initial_step;
    let fail = |s: f64, step: f64| Error::Continuation { branch, s, step };
    while s < 1.0 {
        let h = ds.min(1.0 - s);
        let accepted = (|| {
            let k1 = tangent(&z, s, w)?;
            let shift = |k: &[Complex64], f: f64| -> Vec<Complex64> {
                z.iter().zip(k).map(|(zi, ki)| zi + f * ki).collect()
            };
            let k2 = tangent(&shift(&k1, 0.5 * h), s + 0.5 * h, w)?;
            let k3 = tangent(&shift(&k2, 0.5 * h), s + 0.5 * h, w)?;
            let k4 = tangent(&shift(&k3, h), s + h, w)?;
            let predicted: Vec<Complex64> = (0..z.len())
                .map(|i| z[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
                .collect();
            let corrected = newton(predicted.clone(), &w.at(s + h), r, opts.newton_tol, 8)?;
            let move_pred = predicted
                .iter()
                .zip(&z)
                .map(|(p, q)| (p - q).norm())
                .fold(0.0, f64::max);
            let move_corr = corrected
                .iter()
                .zip(&predicted)
                .map(|(p, q)| (p - q).norm())
                .fold(0.0, f64::max);
            let sep = super::min_separation(&corrected);
            if move_corr > opts.jump_factor * move_pred.max(1e-10) || move_corr > 0.1 * sep {
                return None;
            }
            Some(corrected)
        })();
        match accepted {
            Some(next) => {
                z = next;
                s = if h >= 1.0 - s { 1.0 } else { s + h };
                ds = (1.5 * ds).min(opts.max_step);
            }
            None => {
                ds *= 0.5;
                if ds < opts.min_step {
                    return Err(fail(s, ds));
                }
            }
        }
    }
    let b = w.at(1.0);
    Ok(polish(z, &b, r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factorization::{forward_map, weighted_power_sums};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn equal_weights_give_root_orderings() {
        let res = inverse_map(&[c(0.0, 0.0), c(-1.0, 0.0)], &WeightVector::equal(2)).unwrap();
        assert_eq!(res.branches.len(), 2);
        assert_eq!(res.path, WeightPath::Direct);
        let mut firsts: Vec<f64> = res.branches.iter().map(|br| br.z[0].re).collect();
        firsts.sort_by(f64::total_cmp);
        assert!((firsts[0] + 1.0).abs() < 1e-14 && (firsts[1] - 1.0).abs() < 1e-14);
        assert!(!res.collapsed);
    }

    #[test]
    fn weighted_two_point_example() {
        let b = WeightVector::new(vec![1.5, 0.5]).unwrap();
        let res = inverse_map(&[c(0.0, 0.0), c(-1.0, 0.0)], &b).unwrap();
        let want = [c(1.0 / 3f64.sqrt(), 0.0), c(-3f64.sqrt(), 0.0)];
        let hit = res.branches.iter().any(|br| {
            br.z.iter().zip(&want).all(|(x, y)| (x - y).norm() < 1e-12)
                || br.z.iter().zip(&want).all(|(x, y)| (x + y).norm() < 1e-12)
        });
        assert!(hit, "{:?}", res.branches);
    }

    #[test]
    fn branches_roundtrip_with_negative_weight() {
        let b = WeightVector::new(vec![2.5, -0.7, 1.2]).unwrap();
        let a = [c(0.1, -0.05), c(-0.02, 0.08), c(0.03, 0.01)];
        let res = inverse_map(&a, &b).unwrap();
        assert_eq!(res.branches.len(), 6);
        assert_eq!(res.path, WeightPath::Detour);
        let target = power_sums(&a);
        let bc: Vec<Complex64> = b.as_slice().iter().map(|x| c(*x, 0.0)).collect();
        for br in &res.branches {
            let back = forward_map(&br.z, &b).unwrap();
            for (x, y) in back.iter().zip(&a) {
                assert!((x - y).norm() < 1e-11, "{x} vs {y}");
            }
            for (x, y) in weighted_power_sums(&br.z, &bc, 3).iter().zip(&target) {
                assert!((x - y).norm() < 1e-11);
            }
        }
        assert!(!res.collapsed);
    }

    #[test]
    fn zero_coefficients_collapse() {
        let res = inverse_map(&[c(0.0, 0.0); 3], &WeightVector::equal(3)).unwrap();
        assert_eq!(res.branches.len(), 6);
        assert!(res.collapsed);
        assert!(res.branches.iter().all(|br| !br.distinct));
    }

    #[test]
    fn small_scale_is_resolved() {
        let b = WeightVector::new(vec![1.3, 0.7]).unwrap();
        let t: f64 = 1e-10;
        let a = [c(0.2 * t, 0.0), c(0.1 * t, 0.3 * t)];
        let res = inverse_map(&a, &b).unwrap();
        for br in &res.branches {
            let back = forward_map(&br.z, &b).unwrap();
            for (x, y) in back.iter().zip(&a) {
                assert!((x - y).norm() < 1e-9 * y.norm().max(t));
            }
        }
    }
}
