//! The acceptance suite: twelve numbered checks, each producing a pass/fail
//! line with the measured quantities.

use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factorization::{
    expansion_coeffs, forward_map, inverse_map, multiplicative_error, WeightVector, EXCLUSION_FACTOR,
};
use crate::fit::log_log_slope;
use crate::liouville::eigen::{spectrum_near_two, DEFAULT_WINDOW};
use crate::liouville::friedrichs::{friedrichs_fit, FitOptions};
use crate::liouville::{solve_liouville, ConicProblem, MeshParams};
use crate::pairing::{
    boundary_pairing_integral, classify_case, closed_form_pairing, extract_all, pairing_matrix,
    solution_space, surviving_derivative_error, total_k, total_k0, vdot_vanishing_check, Case,
    Expansion,
};
use crate::spectrum::{
    eigenvalue_flow, football_lambda, linear_path, radial_sturm_liouville_extrapolated,
    RADIAL_EIGENVALUES,
};

pub const DEFAULT_SEED: u64 = 20_240_601;
pub const CRITERIA: usize = 12;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: usize,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl std::fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "criterion {:>2} {:<28} {} ({:.2} s) {}",
            self.id,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.seconds,
            self.detail
        )
    }
}

pub fn criterion_name(id: usize) -> &'static str {
    match id {
        1 => "football spectrum",
        2 => "count at two",
        3 => "factorization roundtrip",
        4 => "two-point radicals",
        5 => "three-point expansion",
        6 => "multiplicative error",
        7 => "v-dot vanishing",
        8 => "gauss-bonnet convergence",
        9 => "friedrichs regularity",
        10 => "pairing closed form",
        11 => "football degeneracy",
        12 => "spectral flow",
        _ => "unknown",
    }
}

/// Runs criterion `id` with the given seed for its random inputs.
pub fn run_criterion(id: usize, seed: u64) -> Result<CriterionResult> {
    let start = Instant::now();
    let outcome = match id {
        1 => football_spectrum(),
        2 => count_at_two(),
        3 => factorization_roundtrip(seed),
        4 => two_point_radicals(seed),
        5 => three_point_expansion(),
        6 => multiplicative_error_law(seed),
        7 => vdot_vanishing(),
        8 => gauss_bonnet_convergence(),
        9 => friedrichs_regularity(),
        10 => pairing_closed_form(seed),
        11 => football_degeneracy(),
        12 => spectral_flow(),
        _ => return Err(Error::InvalidInput(format!("criteria are numbered 1 to {CRITERIA}, got {id}"))),
    };
    let (passed, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
    Ok(CriterionResult {
        id,
        name: criterion_name(id).to_string(),
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    })
}

pub fn run_all(seed: u64) -> Vec<CriterionResult> {
    (1..=CRITERIA)
        .map(|id| run_criterion(id, seed).expect("id in range"))
        .collect()
}

type Outcome = Result<(bool, String)>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn football_spectrum() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for beta in [0.5, 1.5, 2.7] {
        for j in 0..=3u32 {
            let ev = radial_sturm_liouville_extrapolated(beta, j, 256, 4)?;
            for (ell, v) in ev.iter().enumerate().take(RADIAL_EIGENVALUES) {
                let want = football_lambda(beta, j, ell as u32);
                worst = worst.max((v - want).abs() / want.max(1.0));
            }
        }
    }
    let t = start.elapsed().as_secs_f64();
    Ok((worst <= 1e-6 && t < 10.0, format!("max relative error {worst:.2e}, {t:.2} s")))
}

/// Counts `λ ≤ 2` from the extrapolated radial eigenvalues with multiplicity.
fn numeric_count(beta: f64) -> Result<u32> {
    let mut n = 0;
    let mut j = 0u32;
    loop {
        let ev = radial_sturm_liouville_extrapolated(beta, j, 256, 4)?;
        let k = ev.iter().filter(|v| **v <= 2.0 + 1e-6).count() as u32;
        if k == 0 {
            break;
        }
        n += k * if j == 0 { 1 } else { 2 };
        j += 1;
    }
    Ok(n)
}

fn count_at_two() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for beta in [1.5, 2.5, 3.5] {
        let n = numeric_count(beta)?;
        let want = 2 + 2 * beta.floor() as u32;
        ok &= n == want;
        parts.push(format!("β={beta}: {n}/{want}"));
    }
    Ok((ok, parts.join(", ")))
}

fn random_weights(rng: &mut ChaCha8Rng, j: usize) -> Result<WeightVector> {
    let raw: Vec<f64> = (0..j).map(|_| rng.random_range(0.2..1.8)).collect();
    let s: f64 = raw.iter().sum();
    WeightVector::new(raw.iter().map(|x| x * j as f64 / s).collect())
}

fn random_coeffs(rng: &mut ChaCha8Rng, j: usize, bound: f64) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..j)
        .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let scale = bound * rng.random_range(0.1..1.0) / norm;
    v.iter().map(|x| x * scale).collect()
}

fn factorization_roundtrip(seed: u64) -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut count_failures = 0;
    let mut near = 0;
    for _ in 0..200 {
        let j = rng.random_range(1..=4usize);
        let b = random_weights(&mut rng, j)?;
        let a = random_coeffs(&mut rng, j, 0.3);
        let res = inverse_map(&a, &b)?;
        let scale = a.iter().map(|x| x.norm()).fold(0.0, f64::max);
        for br in &res.branches {
            let back = forward_map(&br.z, &b)?;
            let err = back.iter().zip(&a).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale;
            worst = worst.max(err);
        }
        let factorial: usize = (1..=j).product();
        if res.branches.iter().any(|br| br.near_discriminant) {
            near += 1;
        } else if res.branches.len() != factorial || res.collapsed {
            count_failures += 1;
        }
    }
    let t = start.elapsed().as_secs_f64();
    Ok((
        worst <= 1e-9 && count_failures == 0 && t < 30.0,
        format!(
            "max relative residual {worst:.2e}, branch-count failures {count_failures}, near-discriminant samples {near}, {t:.2} s"
        ),
    ))
}

fn two_point_radicals(seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x2);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let b = random_weights(&mut rng, 2)?;
        let a = random_coeffs(&mut rng, 2, 0.3);
        let (b1, b2) = (b.as_slice()[0], b.as_slice()[1]);
        let disc = a[0] * a[0] - 4.0 * a[1];
        let s12 = (disc * (b2 / b1)).sqrt();
        let s21 = (disc * (b1 / b2)).sqrt();
        let radicals = [
            [(-a[0] + s12) / 2.0, (-a[0] - s21) / 2.0],
            [(-a[0] - s12) / 2.0, (-a[0] + s21) / 2.0],
        ];
        let res = inverse_map(&a, &b)?;
        if res.branches.len() != 2 {
            return Ok((false, format!("{} branches for J = 2", res.branches.len())));
        }
        for br in &res.branches {
            let d = radicals
                .iter()
                .map(|r| (br.z[0] - r[0]).norm().max((br.z[1] - r[1]).norm()))
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(d);
        }
    }
    Ok((worst <= 1e-12, format!("max deviation {worst:.2e}")))
}

fn three_point_expansion() -> Outcome {
    let theta = 0.9;
    let at = [c(0.35, -0.15), c(-0.4, 0.25)];
    let b = WeightVector::equal(3);
    let w = Complex64::from_polar(1.0, theta / 3.0);
    let tau = c(-0.5, 3f64.sqrt() / 2.0);
    let s3 = 3f64.sqrt();
    let e = Complex64::from_polar(1.0, -theta / 3.0);
    let want1: Vec<Complex64> = (1..=3u32).map(|j| -w * tau.powu(j)).collect();
    let want2 = [
        -c(1.0, s3) / 6.0 * at[1] * e,
        c(s3, 3.0) / (3.0 * c(s3, -3.0)) * at[1] * e,
        at[1] * e / 3.0,
    ];
    let want3 = -at[0] / 3.0;
    let mut best = f64::INFINITY;
    for branch in 0..6 {
        let ex = expansion_coeffs(theta, &at, &b, branch)?;
        let (c1, c2, c3) = (ex.column(1), ex.column(2), ex.column(3));
        let d1 = c1.iter().zip(&want1).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        if d1 > 1e-6 {
            continue;
        }
        let d2 = c2.iter().zip(&want2).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        let d3 = c3.iter().map(|x| (x - want3).norm()).fold(0.0, f64::max);
        best = best.min(d1.max(d2).max(d3));
    }
    Ok((best <= 1e-10, format!("max coefficient deviation {best:.2e}")))
}

fn multiplicative_error_law(seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6);
    let samples: Vec<Complex64> = (0..64)
        .map(|k| Complex64::from_polar(0.5, 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / 64.0))
        .collect();
    let ts = [1e-2, 5e-3, 2.5e-3, 1.25e-3];
    let mut slopes = Vec::new();
    for j in [2usize, 3, 3] {
        let b = random_weights(&mut rng, j)?;
        let a0 = random_coeffs(&mut rng, j, 1.0);
        let mut errs = Vec::new();
        for &t in &ts {
            let a: Vec<Complex64> = a0.iter().map(|x| x * t).collect();
            let z = inverse_map(&a, &b)?.branches[0].z.clone();
            let rmax = z.iter().map(|x| x.norm()).fold(0.0, f64::max);
            if EXCLUSION_FACTOR * rmax >= 0.5 {
                return Err(Error::InvalidInput("roots too large for the sample circle".into()));
            }
            errs.push(multiplicative_error(&a, &z, &b, &samples)?);
        }
        slopes.push(log_log_slope(&ts, &errs));
    }
    let ok = slopes.iter().all(|s| *s >= 1.2);
    Ok((ok, format!("slopes {slopes:.3?} (need ≥ 1.2)")))
}

fn vdot_vanishing() -> Outcome {
    let hs = [0.04, 0.02, 0.01];
    let mut ok = true;
    let mut parts = Vec::new();
    for j in [2usize, 3] {
        let a: Vec<Complex64> = (0..j)
            .map(|k| c(0.3 - 0.1 * k as f64, 0.05 + 0.07 * k as f64))
            .collect();
        for k in 1..j {
            let r: Vec<f64> = hs.iter().map(|&h| vdot_vanishing_check(&a, k, h)).collect::<Result<_>>()?;
            // Residuals at rounding level have no measurable rate; h² then holds trivially.
            let floor = 1e-10;
            let pass = if r.iter().all(|x| *x <= floor) {
                true
            } else {
                log_log_slope(&hs, &r.iter().map(|x| x.max(floor)).collect::<Vec<_>>()) >= 1.8
            };
            ok &= pass;
            let shown: Vec<String> = r.iter().map(|x| format!("{x:.1e}")).collect();
            parts.push(format!("J={j} k={k} residuals [{}]", shown.join(", ")));
        }
        let d = surviving_derivative_error(&a, 0.02)?;
        ok &= d <= 1e-6;
        parts.push(format!("J={j} k=J error {d:.1e}"));
    }
    Ok((ok, parts.join("; ")))
}

fn triple_problem() -> Result<ConicProblem> {
    let s = 3f64.sqrt() / 2.0;
    ConicProblem::sphere(
        vec![[1.0, 0.0, 0.0], [-0.5, s, 0.0], [-0.5, -s, 0.1]],
        vec![0.6, 0.6, 0.6],
        1,
    )
}

fn area_order(problem: &ConicProblem, params: [MeshParams; 2]) -> Result<(f64, f64, f64)> {
    let mut hs = Vec::new();
    let mut errs = Vec::new();
    let mut slowest: f64 = 0.0;
    for p in &params {
        let t = Instant::now();
        let m = solve_liouville(problem, p)?;
        slowest = slowest.max(t.elapsed().as_secs_f64());
        let target = m
            .diagnostics
            .gauss_bonnet_area
            .ok_or_else(|| Error::InvalidInput("no Gauss-Bonnet area for this problem".into()))?;
        hs.push(m.h());
        errs.push((m.diagnostics.area - target).abs());
    }
    Ok((log_log_slope(&hs, &errs), errs[1], slowest))
}

fn gauss_bonnet_convergence() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for beta in [0.5, 1.5, 2.7] {
        let p = ConicProblem::football(beta)?;
        let mk = |cells| MeshParams {
            radial_cells: cells,
            ..Default::default()
        };
        let (order, err, t) = area_order(&p, [mk(100), mk(200)])?;
        ok &= order >= 1.8 && t < 60.0;
        parts.push(format!("football β={beta}: order {order:.2}, error {err:.1e}"));
    }
    let p = triple_problem()?;
    let mk = |refinement| MeshParams {
        refinement,
        ..Default::default()
    };
    let (order, err, t) = area_order(&p, [mk(2), mk(3)])?;
    ok &= order >= 1.8 && t < 60.0;
    parts.push(format!("(0.6,0.6,0.6): order {order:.2}, error {err:.1e}, slowest solve {t:.1} s"));
    Ok((ok, parts.join("; ")))
}

fn friedrichs_regularity() -> Outcome {
    let p = triple_problem()?;
    let m = solve_liouville(
        &p,
        &MeshParams {
            refinement: 3,
            ..Default::default()
        },
    )?;
    let slopes: Vec<f64> = (0..3)
        .map(|k| friedrichs_fit(&m, k, &FitOptions::for_beta(0.6)).map(|f| f.slope))
        .collect::<Result<_>>()?;
    Ok((slopes.iter().all(|s| *s >= 1.9), format!("remainder slopes {slopes:.3?} (need ≥ 1.9)")))
}

fn pairing_closed_form(seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xa);
    let eps = [0.3, 0.2, 0.1];
    let mut worst: f64 = 0.0;
    let mut variation: f64 = 0.0;
    for _ in 0..20 {
        let beta = rng.random_range(0.3..4.0);
        let m = crate::pairing::pair_count(beta);
        let mut pairs = || -> Vec<(f64, f64)> {
            (0..m)
                .map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect()
        };
        let (a, e) = (pairs(), pairs());
        let phi = Expansion::indicial(beta, 0.7, &a, 1.0);
        let vdot = Expansion::indicial(beta, -0.4, &e, -1.0);
        let lim = boundary_pairing_integral(&phi, &vdot, beta, &eps)?;
        let exact = closed_form_pairing(&a, &e);
        worst = worst.max((lim.limit - exact).abs());
        variation = variation.max(lim.variation);
    }
    Ok((
        worst <= 1e-8 && variation <= 1e-10,
        format!("max closed-form gap {worst:.1e}, max ε-variation {variation:.1e}"),
    ))
}

fn football_degeneracy() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for beta in [2.5, 3.3] {
        let p = ConicProblem::football(beta)?;
        let m = solve_liouville(&p, &MeshParams::default())?;
        let fiber = spectrum_near_two(&m, DEFAULT_WINDOW)?;
        let coeffs = extract_all(&m, &fiber)?;
        let largest = coeffs
            .rows
            .iter()
            .flatten()
            .flat_map(|c| c.pairs.iter().flat_map(|(x, y)| [x.abs(), y.abs()]))
            .fold(0.0, f64::max);
        let b = pairing_matrix(&coeffs)?;
        let space = solution_space(&b);
        let k = total_k(&p.beta);
        let class = classify_case(fiber.ell, k, total_k0(&p.beta), space.rank)?;
        let pass = fiber.ell >= 1
            && largest < 1e-8
            && space.rank == 0
            && class.kernel_dim == 2 * k
            && class.case == Case::PartialRigidity;
        ok &= pass;
        parts.push(format!(
            "β={beta}: ℓ={}, largest coefficient {largest:.1e}, dim V={} of 2K={}",
            fiber.ell,
            class.kernel_dim,
            2 * k
        ));
    }
    Ok((ok, parts.join("; ")))
}

fn spectral_flow() -> Outcome {
    let r = eigenvalue_flow(&linear_path(1.5, 3.5, 41), 6)?;
    let found: Vec<(f64, u32)> = r.crossings.iter().map(|c| (c.beta_cross, c.j)).collect();
    let ok = found == vec![(2.0, 2), (3.0, 3)];
    Ok((ok, format!("crossings (β, j) = {found:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cheap_criteria_pass() {
        for id in [2, 4, 5, 7, 10, 11, 12] {
            let r = run_criterion(id, DEFAULT_SEED).unwrap();
            assert!(r.passed, "{r}");
        }
    }

    #[test]
    fn unknown_id_is_rejected() {
        assert!(run_criterion(0, 1).is_err());
        assert!(run_criterion(13, 1).is_err());
    }
}
