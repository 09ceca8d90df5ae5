//! Solutions modulo the eigenvalue-2 space.
//!
//! Solves `F(w₀ + u) = Σ Λ_i M φ_i` with `u` orthogonal to every `φ_i` in
//! `L²(g₀)`, by Newton's method on the bordered system
//! `[J, −Mφ; (Mφ)ᵀ, 0]`.

use serde::{Deserialize, Serialize};

use super::eigen::{linearized_operator, ObstructionBundleFiber};
use super::newton::{newton, scaled_sup, Dofs, NodalSystem};
use super::sparse::{Csr, SparseLu};
use super::{
    axisym::AxisymSystem, Background, DiscreteConicMetric, FemSystem, MetricGrid, NEWTON_TOL,
};
use crate::error::{Error, Result};

const MAX_ITER: usize = 40;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProjectedSolution {
    /// Correction `u`, orthogonal to the fiber.
    pub u: Vec<f64>,
    /// `w₀ + u`.
    pub w: Vec<f64>,
    /// Coefficients of the right side in the fiber basis.
    pub lambda: Vec<f64>,
    pub iterations: usize,
    /// Scaled sup norm of `F − Σ Λ_i M φ_i`.
    pub residual: f64,
    /// `max_i |⟨u, φ_i⟩|`.
    pub orthogonality: f64,
}

/// Projected solve starting from the metric's own `w`.
pub fn projected_solve(metric: &DiscreteConicMetric, fiber: &ObstructionBundleFiber) -> Result<ProjectedSolution> {
    projected_solve_from(metric, &metric.w, fiber)
}

/// Projected solve from an arbitrary starting factor `w₀` on the metric's
/// grid; the fiber and its inner product are taken from `metric`.
pub fn projected_solve_from(
    metric: &DiscreteConicMetric,
    w0: &[f64],
    fiber: &ObstructionBundleFiber,
) -> Result<ProjectedSolution> {
    let chi = metric.problem.chi();
    let k = metric.problem.curvature as f64;
    match &metric.grid {
        MetricGrid::Triangulated(d) => {
            let sys = FemSystem {
                disc: d,
                chi,
                curvature: k,
                background: metric.problem.background,
            };
            let dofs = match metric.problem.background {
                Background::Sphere => Dofs::all(d.n()),
                Background::Disk => Dofs::without(&d.mesh.boundary),
            };
            let basis: Vec<usize> = (0..fiber.ell).collect();
            run(metric, &sys, &dofs, w0, fiber, &basis)
        }
        MetricGrid::Radial(g) => {
            let sys = AxisymSystem { grid: g, chi, curvature: k };
            // Only axisymmetric eigenfunctions can appear in an axisymmetric right side.
            let basis: Vec<usize> = (0..fiber.ell)
                .filter(|&i| fiber.harmonics[i].is_none_or(|h| h.j == 0))
                .collect();
            run(metric, &sys, &Dofs::all(g.n()), w0, fiber, &basis)
        }
    }
}

fn run(
    metric: &DiscreteConicMetric,
    sys: &impl NodalSystem,
    dofs: &Dofs,
    w0: &[f64],
    fiber: &ObstructionBundleFiber,
    basis: &[usize],
) -> Result<ProjectedSolution> {
    let n = sys.n();
    if w0.len() != n {
        return Err(Error::ShapeMismatch(format!("{} values for {n} nodes", w0.len())));
    }
    let mut lambda = vec![0.0; fiber.ell];
    if basis.is_empty() {
        let (w, rep) = newton(sys, w0.to_vec(), dofs, NEWTON_TOL, super::NEWTON_MAX_ITER)?;
        return Ok(ProjectedSolution {
            u: w.iter().zip(w0).map(|(a, b)| a - b).collect(),
            w,
            lambda,
            iterations: rep.iterations,
            residual: rep.residual,
            orthogonality: 0.0,
        });
    }
    let op = linearized_operator(metric);
    // Columns M φ_i restricted to free nodes.
    let cols: Vec<Vec<f64>> = basis
        .iter()
        .map(|&i| {
            let mut c = op.mass.matvec(&fiber.eigenvectors[i]);
            c.iter_mut().for_each(|x| *x *= op.norm_factor);
            c
        })
        .collect();
    let nb = basis.len();
    let nr = dofs.n_red;
    let mut w = w0.to_vec();
    let mut lam = vec![0.0; nb];
    let total = |w: &[f64], lam: &[f64]| -> Vec<f64> {
        let mut f = sys.residual(w);
        for (c, l) in cols.iter().zip(lam) {
            f.iter_mut().zip(c).for_each(|(x, y)| *x -= l * y);
        }
        f
    };
    let constraint = |w: &[f64]| -> Vec<f64> {
        cols.iter()
            .map(|c| {
                c.iter()
                    .zip(w.iter().zip(w0))
                    .map(|(ci, (a, b))| ci * (a - b))
                    .sum()
            })
            .collect()
    };
    let mut iterations = 0;
    let mut res = f64::INFINITY;
    for it in 0..=MAX_ITER {
        let f = total(&w, &lam);
        res = scaled_sup(sys, &f, dofs);
        let g = constraint(&w);
        let gmax = g.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        iterations = it;
        if res < NEWTON_TOL && gmax < 1e-12 {
            break;
        }
        if it == MAX_ITER || !res.is_finite() {
            return Err(Error::Contraction { iterations: it, residual: res });
        }
        let jac = dofs.reduce_mat(&sys.jacobian(&w));
        let mut trip = Vec::with_capacity(jac.val.len() + 2 * nb * nr);
        for i in 0..nr {
            for p in jac.row_ptr[i]..jac.row_ptr[i + 1] {
                trip.push((i, jac.col[p], jac.val[p]));
            }
        }
        for (b, c) in cols.iter().enumerate() {
            let cr = dofs.reduce_vec(c);
            for (i, v) in cr.iter().enumerate() {
                if *v != 0.0 {
                    trip.push((i, nr + b, -v));
                    trip.push((nr + b, i, *v));
                }
            }
        }
        let big = Csr::from_triplets(nr + nb, &trip);
        let mut rhs: Vec<f64> = dofs.reduce_vec(&f).iter().map(|v| -v).collect();
        rhs.extend(g.iter().map(|v| -v));
        let x = SparseLu::new(&big)?.solve(&rhs)?;
        let step = dofs.expand(&x[..nr]);
        w.iter_mut().zip(&step).for_each(|(a, b)| *a += b);
        lam.iter_mut().zip(&x[nr..]).for_each(|(a, b)| *a += b);
    }
    for (b, &i) in basis.iter().enumerate() {
        lambda[i] = lam[b];
    }
    let u: Vec<f64> = w.iter().zip(w0).map(|(a, b)| a - b).collect();
    let orthogonality = basis
        .iter()
        .map(|&i| op.inner(&u, &fiber.eigenvectors[i]).abs())
        .fold(0.0, f64::max);
    Ok(ProjectedSolution {
        u,
        w,
        lambda,
        iterations,
        residual: res,
        orthogonality,
    })
}
