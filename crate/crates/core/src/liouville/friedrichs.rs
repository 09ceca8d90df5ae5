//! Fits of the expansion of a solution at a cone point.
//!
//! In the stereographic chart `z` centred at a cone point (with the
//! background scaled to `|dz|²` at the point) the factor of a constant
//! curvature metric is `(β − 1) log|z| + a₀ + Σ_{1≤j≤J} r^{j/β}(a_j cos jθ +
//! b_j sin jθ) + 𝒪(r²)` with `r = |z|^β / β` and `J` the largest integer
//! below `2β`. The fit removes the indicial terms and measures how fast the
//! remainder decays.

use serde::{Deserialize, Serialize};

use super::mesh::{norm, normalize, sub};
use super::{frame, Background, DiscreteConicMetric};
use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FitOptions {
    /// Smallest and largest `r` of the sample circles.
    pub r_min: f64,
    pub r_max: f64,
    pub circles: usize,
    pub samples_per_circle: usize,
}

impl FitOptions {
    /// Circles spanning `|z| ∈ [0.04, 0.3]`, where a P1 solution on the
    /// default meshes is resolved.
    pub fn for_beta(beta: f64) -> Self {
        let r = |z: f64| z.powf(beta) / beta;
        Self {
            r_min: r(0.04),
            r_max: r(0.3),
            circles: 8,
            samples_per_circle: 64,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FriedrichsFit {
    pub point: usize,
    pub beta: f64,
    /// Highest indicial mode `J`.
    pub modes: usize,
    pub a0: f64,
    /// `(a_j, b_j)` for `j = 1..=J`.
    pub coefficients: Vec<(f64, f64)>,
    pub radii: Vec<f64>,
    /// `max_θ` of the remainder on each circle.
    pub remainder: Vec<f64>,
    /// Least-squares slope of `log remainder` against `log r`.
    pub slope: f64,
}

/// Largest integer strictly below `2β`.
pub fn indicial_modes(beta: f64) -> usize {
    ((2.0 * beta).ceil() - 1.0).max(0.0) as usize
}

/// `U − (β − 1) log|z|` at chart coordinates `(|z|, θ)`, where `U` is the
/// factor relative to `|dz|²`.
fn chart_value(metric: &DiscreteConicMetric, point: usize, zabs: f64, theta: f64) -> Result<f64> {
    let prob = &metric.problem;
    let p = prob.points[point];
    let (x, rel) = match prob.background {
        Background::Sphere => {
            // z = 2 tan(d/2) e^{iθ}; the round metric is 4|dz|²/(1+|z|²)²
            // once z is halved, which here is 16|dz|²/(4+|z|²)².
            let d = 2.0 * (0.5 * zabs).atan();
            let (e1, e2) = frame(p);
            let dir = [0, 1, 2].map(|k| theta.cos() * e1[k] + theta.sin() * e2[k]);
            let x = normalize([0, 1, 2].map(|k| d.cos() * p[k] + d.sin() * dir[k]));
            (x, (16.0f64).ln() * 0.5 - (4.0 + zabs * zabs).ln())
        }
        Background::Disk => (
            [p[0] + zabs * theta.cos(), p[1] + zabs * theta.sin(), 0.0],
            0.0,
        ),
    };
    let w = metric
        .bounded_part(x)
        .ok_or_else(|| Error::InvalidInput(format!("sample {x:?} is off the grid")))?;
    let logs: f64 = prob
        .points
        .iter()
        .zip(&prob.beta)
        .enumerate()
        .map(|(k, (q, b))| {
            if k == point {
                (b - 1.0) * (norm(sub(x, *q)) / zabs).ln()
            } else {
                (b - 1.0) * norm(sub(x, *q)).ln()
            }
        })
        .sum();
    Ok(w + logs + rel)
}

/// Least-squares fit on circles between `r_min` and `r_max`.
pub fn friedrichs_fit(metric: &DiscreteConicMetric, point: usize, opts: &FitOptions) -> Result<FriedrichsFit> {
    if point >= metric.problem.points.len() {
        return Err(Error::InvalidInput(format!("no cone point {point}")));
    }
    if !(opts.r_min > 0.0 && opts.r_max > opts.r_min && opts.circles >= 3 && opts.samples_per_circle >= 8) {
        return Err(Error::InvalidInput("bad fit options".into()));
    }
    let beta = metric.problem.beta[point];
    let jmax = indicial_modes(beta);
    let radii: Vec<f64> = (0..opts.circles)
        .map(|k| opts.r_min * (opts.r_max / opts.r_min).powf(k as f64 / (opts.circles - 1) as f64))
        .collect();
    let ns = opts.samples_per_circle;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut rhs = Vec::new();
    let mut samples = Vec::new();
    for &r in &radii {
        let zabs = (beta * r).powf(1.0 / beta);
        for s in 0..ns {
            let theta = 2.0 * std::f64::consts::PI * s as f64 / ns as f64;
            let v = chart_value(metric, point, zabs, theta)?;
            // Indicial terms first, then the r² tails.
            let mut row = vec![1.0];
            for j in 1..=jmax {
                let rj = r.powf(j as f64 / beta);
                row.push(rj * (j as f64 * theta).cos());
                row.push(rj * (j as f64 * theta).sin());
            }
            row.push(r * r);
            for j in 1..=jmax {
                let rj = r.powf(j as f64 / beta + 2.0);
                row.push(rj * (j as f64 * theta).cos());
                row.push(rj * (j as f64 * theta).sin());
            }
            rows.push(row);
            rhs.push(v);
            samples.push((r, theta, v));
        }
    }
    let ncol = rows[0].len();
    let a = nalgebra::DMatrix::from_fn(rows.len(), ncol, |i, k| rows[i][k]);
    let b = nalgebra::DVector::from_vec(rhs);
    let coef = a
        .svd(true, true)
        .solve(&b, 1e-13)
        .map_err(|e| Error::Singular(format!("fit failed: {e}")))?;
    let a0 = coef[0];
    let coefficients: Vec<(f64, f64)> = (0..jmax).map(|j| (coef[1 + 2 * j], coef[2 + 2 * j])).collect();
    let indicial = |r: f64, theta: f64| -> f64 {
        let mut v = a0;
        for (j, (aj, bj)) in coefficients.iter().enumerate() {
            let jj = (j + 1) as f64;
            v += r.powf(jj / beta) * (aj * (jj * theta).cos() + bj * (jj * theta).sin());
        }
        v
    };
    let remainder: Vec<f64> = radii
        .iter()
        .enumerate()
        .map(|(k, _)| {
            samples[k * ns..(k + 1) * ns]
                .iter()
                .map(|(r, t, v)| (v - indicial(*r, *t)).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    let xs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = remainder.iter().map(|r| r.max(1e-300).ln()).collect();
    let slope = crate::fit::slope(&xs, &ys);
    Ok(FriedrichsFit {
        point,
        beta,
        modes: jmax,
        a0,
        coefficients,
        radii,
        remainder,
        slope,
    })
}
