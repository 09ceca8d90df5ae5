//! The linearized operator `L = Δ_g − 2` and eigenpairs of `Δ_g` near 2.
//!
//! Eigenproblems are posed as pencils `S φ = λ M φ` with `S` the stiffness
//! of the background metric and `M` the mass of `g`, so the P1 space imposes
//! the Friedrichs condition at cone points by itself. On radial grids each
//! angular mode `cos jθ`, `sin jθ` is a separate pencil with the poles held
//! at zero for `j ≥ 1`.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::sparse::{Csr, SparseLu};
use super::{DiscreteConicMetric, MetricGrid};
use crate::error::{Error, Result};

/// Relative Ritz residual accepted as converged.
pub const EIGEN_TOL: f64 = 1e-10;
/// Default half-width of the window around 2.
pub const DEFAULT_WINDOW: f64 = 0.1;
const MAX_LANCZOS: usize = 300;

/// Angular dependence of a radial eigenfunction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Harmonic {
    pub j: usize,
    /// `sin jθ` rather than `cos jθ`.
    pub sine: bool,
}

/// Discrete `L = Δ_g − 2` as the pencil `(S, M)`.
#[derive(Clone, Debug)]
pub struct LinearizedOperator {
    pub stiffness: Csr,
    pub mass: Csr,
    /// Row sums of `mass`.
    pub lumped: Vec<f64>,
    /// Nodes held at zero.
    pub fixed: Vec<bool>,
    /// Angular mode on radial grids.
    pub mode: Option<usize>,
    /// Factor turning `φᵀ M φ` into the `L²(g)` norm.
    pub norm_factor: f64,
}

impl LinearizedOperator {
    pub fn n(&self) -> usize {
        self.stiffness.n
    }

    /// `M_lumped⁻¹ S φ − 2φ`, pointwise at free nodes.
    pub fn apply(&self, phi: &[f64]) -> Vec<f64> {
        let s = self.stiffness.matvec(phi);
        (0..self.n())
            .map(|i| {
                if self.fixed[i] {
                    0.0
                } else {
                    s[i] / self.lumped[i] - 2.0 * phi[i]
                }
            })
            .collect()
    }

    /// The symmetric matrix `S − 2M` of the weak form.
    pub fn weak_form(&self) -> Csr {
        self.stiffness.combine(1.0, &self.mass, -2.0)
    }

    /// Weighted `L²(g)` inner product.
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        let mb = self.mass.matvec(b);
        self.norm_factor * a.iter().zip(&mb).map(|(x, y)| x * y).sum::<f64>()
    }
}

/// `L` for a converged metric; on radial grids the axisymmetric mode.
pub fn linearized_operator(metric: &DiscreteConicMetric) -> LinearizedOperator {
    linearized_operator_mode(metric, 0)
}

/// `L` restricted to angular mode `j` (ignored on triangulations).
pub fn linearized_operator_mode(metric: &DiscreteConicMetric, j: usize) -> LinearizedOperator {
    match &metric.grid {
        MetricGrid::Triangulated(d) => {
            let mass = d.weighted_mass(&metric.w);
            let lumped = mass.row_sums();
            LinearizedOperator {
                stiffness: d.stiffness.clone(),
                mass,
                lumped,
                fixed: d.mesh.boundary.clone().into_iter().chain(std::iter::repeat(false)).take(d.n()).collect(),
                mode: None,
                norm_factor: 1.0,
            }
        }
        MetricGrid::Radial(g) => {
            let n = g.n();
            let mut stiffness = g.stiffness().clone();
            let mut fixed = vec![false; n];
            if j > 0 {
                stiffness = stiffness.combine(1.0, &g.angular_term(), (j * j) as f64);
                fixed[0] = true;
                fixed[n - 1] = true;
            }
            let lumped = g.metric_mass(&metric.w);
            let diag: Vec<(usize, usize, f64)> = lumped.iter().enumerate().map(|(i, m)| (i, i, *m)).collect();
            LinearizedOperator {
                stiffness,
                mass: Csr::from_triplets(n, &diag),
                lumped,
                fixed,
                mode: Some(j),
                norm_factor: if j == 0 {
                    2.0 * std::f64::consts::PI
                } else {
                    std::f64::consts::PI
                },
            }
        }
    }
}

/// Eigenpairs of `Δ_g` with `|λ − 2| < window`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ObstructionBundleFiber {
    pub eigenvalues_near_2: Vec<f64>,
    /// Nodal values, orthonormal in `L²(g)`.
    pub eigenvectors: Vec<Vec<f64>>,
    /// Angular factor of each eigenvector on radial grids.
    pub harmonics: Vec<Option<Harmonic>>,
    /// `‖(S − λM)φ‖ / ‖Mφ‖`.
    pub residuals: Vec<f64>,
    pub ell: usize,
    pub window: f64,
}

/// Which eigenvalues a shift-invert run should return.
#[derive(Clone, Copy, Debug)]
pub enum Select {
    /// All with `|λ − σ| < w`.
    Window(f64),
    /// The `k` nearest to `σ`.
    Nearest(usize),
}

/// Shift-invert Lanczos on `(A, M)` at `σ` with full reorthogonalization
/// and restarts deflated against converged vectors, so repeated eigenvalues
/// are found with their multiplicity. Fixed nodes are removed first.
pub fn shift_invert(
    a: &Csr,
    m: &Csr,
    fixed: &[bool],
    sigma: f64,
    select: Select,
) -> Result<Vec<(f64, Vec<f64>)>> {
    let keep: Vec<bool> = fixed.iter().map(|f| !f).collect();
    let (ar, idx) = a.restrict(&keep);
    let (mr, _) = m.restrict(&keep);
    let n = ar.n;
    let shifted = ar.combine(1.0, &mr, -sigma);
    let lu = SparseLu::new(&shifted)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut locked: Vec<(f64, Vec<f64>)> = Vec::new();
    let want = |theta: f64| match select {
        Select::Window(w) => theta.abs() * w > 1.0,
        Select::Nearest(_) => true,
    };
    for _round in 0..32 {
        let room = n.saturating_sub(locked.len());
        if room == 0 {
            break;
        }
        let start: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        let found = lanczos_round(&lu, &mr, start, &locked, room.min(MAX_LANCZOS), select, &want)?;
        let new: Vec<(f64, Vec<f64>)> = found.into_iter().filter(|(t, _)| want(*t)).collect();
        let done = match select {
            Select::Window(_) => new.is_empty(),
            Select::Nearest(k) => new.is_empty() || locked.len() + new.len() > k,
        };
        locked.extend(new);
        if done {
            break;
        }
    }
    let mut out: Vec<(f64, Vec<f64>)> = locked
        .into_iter()
        .map(|(theta, v)| {
            let mut full = vec![0.0; fixed.len()];
            for (k, &i) in idx.iter().enumerate() {
                full[i] = v[k];
            }
            (sigma + 1.0 / theta, full)
        })
        .collect();
    out.sort_by(|x, y| (x.0 - sigma).abs().total_cmp(&(y.0 - sigma).abs()));
    if let Select::Nearest(k) = select {
        out.truncate(k);
    }
    Ok(out)
}

fn m_dot(m: &Csr, a: &[f64], b: &[f64]) -> f64 {
    let mb = m.matvec(b);
    a.iter().zip(&mb).map(|(x, y)| x * y).sum()
}

fn m_orthogonalize(m: &Csr, v: &mut [f64], basis: &[&[f64]]) {
    for _ in 0..2 {
        for q in basis {
            let c = m_dot(m, v, q);
            for (x, y) in v.iter_mut().zip(q.iter()) {
                *x -= c * y;
            }
        }
    }
}

/// One Lanczos run; returns converged Ritz pairs `(θ, v)` of `(A − σM)⁻¹M`,
/// largest `|θ|` first, stopping at the first unconverged one.
fn lanczos_round(
    lu: &SparseLu,
    m: &Csr,
    start: Vec<f64>,
    locked: &[(f64, Vec<f64>)],
    max_steps: usize,
    select: Select,
    want: &dyn Fn(f64) -> bool,
) -> Result<Vec<(f64, Vec<f64>)>> {
    let locked_refs: Vec<&[f64]> = locked.iter().map(|(_, v)| v.as_slice()).collect();
    let mut q0 = start;
    m_orthogonalize(m, &mut q0, &locked_refs);
    let nrm = m_dot(m, &q0, &q0).sqrt();
    if nrm == 0.0 || !nrm.is_finite() {
        return Ok(Vec::new());
    }
    q0.iter_mut().for_each(|x| *x /= nrm);
    let mut qs: Vec<Vec<f64>> = vec![q0];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let needed = match select {
        Select::Window(_) => 1,
        Select::Nearest(k) => k.saturating_sub(locked.len()).max(1),
    };
    loop {
        let k = qs.len() - 1;
        let mq = m.matvec(&qs[k]);
        let mut z = lu.solve(&mq)?;
        let a = m_dot(m, &z, &qs[k]);
        alpha.push(a);
        {
            let mut basis: Vec<&[f64]> = locked_refs.clone();
            basis.extend(qs.iter().map(|q| q.as_slice()));
            m_orthogonalize(m, &mut z, &basis);
        }
        let b = m_dot(m, &z, &z).sqrt();
        let steps = alpha.len();
        let exhausted = b < 1e-14 * a.abs().max(1e-300) || steps >= max_steps;
        if steps >= 8 && (steps % 5 == 0 || exhausted) {
            let t = tridiag(&alpha, &beta);
            let eig = SymmetricEigen::new(t);
            let mut order: Vec<usize> = (0..steps).collect();
            order.sort_by(|&x, &y| eig.eigenvalues[y].abs().total_cmp(&eig.eigenvalues[x].abs()));
            let mut conv = Vec::new();
            let mut all_wanted_converged = true;
            for &i in &order {
                let theta = eig.eigenvalues[i];
                let err = (b * eig.eigenvectors[(steps - 1, i)]).abs();
                let ok = err <= EIGEN_TOL * theta.abs() || exhausted && err <= 1e-6 * theta.abs();
                if !ok {
                    all_wanted_converged = !want(theta) && !conv.is_empty() || exhausted;
                    break;
                }
                conv.push(i);
                if !want(theta) {
                    break;
                }
            }
            let enough = match select {
                Select::Window(_) => all_wanted_converged && !conv.is_empty(),
                Select::Nearest(_) => conv.len() >= needed,
            };
            if enough || exhausted {
                return Ok(conv
                    .into_iter()
                    .map(|i| {
                        let mut v = vec![0.0; qs[0].len()];
                        for (j, q) in qs.iter().enumerate().take(steps) {
                            let c = eig.eigenvectors[(j, i)];
                            v.iter_mut().zip(q).for_each(|(x, y)| *x += c * y);
                        }
                        (eig.eigenvalues[i], v)
                    })
                    .collect());
            }
        }
        if exhausted {
            return Ok(Vec::new());
        }
        beta.push(b);
        z.iter_mut().for_each(|x| *x /= b);
        qs.push(z);
    }
}

fn tridiag(alpha: &[f64], beta: &[f64]) -> DMatrix<f64> {
    let k = alpha.len();
    let mut t = DMatrix::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alpha[i];
        if i + 1 < k {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    t
}

fn pencil_residual(a: &Csr, m: &Csr, lambda: f64, v: &[f64]) -> f64 {
    let av = a.matvec(v);
    let mv = m.matvec(v);
    let num: f64 = av.iter().zip(&mv).map(|(x, y)| (x - lambda * y).powi(2)).sum::<f64>().sqrt();
    let den: f64 = mv.iter().map(|y| y * y).sum::<f64>().sqrt();
    num / (den * lambda.abs().max(1.0))
}

/// Eigenpairs of `(S, M)` for one operator inside the window around 2.
fn near_two(op: &LinearizedOperator, window: f64) -> Result<Vec<(f64, Vec<f64>, f64)>> {
    // Collect a slightly wider band so eigenvalues near the edge are seen.
    let pairs = shift_invert(&op.stiffness, &op.mass, &op.fixed, 2.0, Select::Window(1.2 * window))?;
    Ok(pairs
        .into_iter()
        .map(|(l, mut v)| {
            let nrm = op.inner(&v, &v).sqrt();
            v.iter_mut().for_each(|x| *x /= nrm);
            let r = pencil_residual(&op.stiffness, &op.mass, l, &v);
            (l, v, r)
        })
        .collect())
}

/// All eigenpairs of `Δ_g` with `|λ − 2| < window`, by shift-invert at 2.
///
/// If an eigenvalue sits within `0.1 · window` of the window edge the window
/// is enlarged by half once; a second near miss is an error.
pub fn spectrum_near_two(metric: &DiscreteConicMetric, window: f64) -> Result<ObstructionBundleFiber> {
    if !(window > 0.0 && window < 2.0) {
        return Err(Error::InvalidInput(format!("window must lie in (0, 2), got {window}")));
    }
    let mut w = window;
    for attempt in 0..2 {
        let mut found: Vec<(f64, Vec<f64>, f64, Option<Harmonic>)> = Vec::new();
        match &metric.grid {
            MetricGrid::Triangulated(_) => {
                let op = linearized_operator(metric);
                for (l, v, r) in near_two(&op, w)? {
                    found.push((l, v, r, None));
                }
            }
            MetricGrid::Radial(_) => {
                let beta = metric.problem.beta[0];
                // The lowest eigenvalue of mode j is about (j/β)(j/β + 1).
                let mut j = 0;
                while (j as f64 / beta) * (j as f64 / beta + 1.0) < 2.0 + 1.5 * w {
                    let op = linearized_operator_mode(metric, j);
                    for (l, v, r) in near_two(&op, w)? {
                        found.push((l, v.clone(), r, Some(Harmonic { j, sine: false })));
                        if j > 0 {
                            found.push((l, v, r, Some(Harmonic { j, sine: true })));
                        }
                    }
                    j += 1;
                }
            }
        }
        let near_edge = found
            .iter()
            .any(|(l, ..)| ((l - 2.0).abs() - w).abs() < 0.1 * w);
        if near_edge {
            if attempt == 0 {
                w *= 1.5;
                continue;
            }
            return Err(Error::Eigen(format!(
                "an eigenvalue lies within 10% of the window edge at width {w}"
            )));
        }
        found.retain(|(l, ..)| (l - 2.0).abs() < w);
        found.sort_by(|a, b| a.0.total_cmp(&b.0));
        return Ok(ObstructionBundleFiber {
            ell: found.len(),
            eigenvalues_near_2: found.iter().map(|f| f.0).collect(),
            residuals: found.iter().map(|f| f.2).collect(),
            harmonics: found.iter().map(|f| f.3).collect(),
            eigenvectors: found.into_iter().map(|f| f.1).collect(),
            window: w,
        });
    }
    unreachable!("loop returns on its second pass")
}

/// The `count` smallest eigenvalues of `Δ_g` in mode `j` (or overall on
/// triangulations).
pub fn lowest_eigenvalues(metric: &DiscreteConicMetric, j: usize, count: usize) -> Result<Vec<f64>> {
    let op = linearized_operator_mode(metric, j);
    let mut vals: Vec<f64> = shift_invert(&op.stiffness, &op.mass, &op.fixed, -0.5, Select::Nearest(count))?
        .into_iter()
        .map(|p| p.0)
        .collect();
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

#[cfg(test)]
mod tests {
    use super::super::{solve_liouville, ConicProblem, MeshParams};
    use super::*;
    use crate::spectrum::football_lambda;

    #[test]
    fn constants_map_to_minus_two() {
        let m = solve_liouville(&ConicProblem::football(1.5).unwrap(), &MeshParams::default()).unwrap();
        let op = linearized_operator(&m);
        let l1 = op.apply(&vec![1.0; op.n()]);
        // Cancellation in S·1 is relative to the row size over the nodal mass.
        for (i, v) in l1.iter().enumerate() {
            let row: f64 = (op.stiffness.row_ptr[i]..op.stiffness.row_ptr[i + 1])
                .map(|k| op.stiffness.val[k].abs())
                .sum();
            assert!((v + 2.0).abs() < 1e-10 + 1e-14 * row / op.lumped[i], "node {i}: {v}");
        }
    }

    #[test]
    fn radial_football_spectrum() {
        let beta = 1.5;
        let params = MeshParams {
            radial_cells: 400,
            ..MeshParams::default()
        };
        let m = solve_liouville(&ConicProblem::football(beta).unwrap(), &params).unwrap();
        for j in 0..3 {
            let vals = lowest_eigenvalues(&m, j, 3).unwrap();
            for (k, v) in vals.iter().enumerate() {
                let exact = football_lambda(beta, j as u32, k as u32);
                assert!((v - exact).abs() < 2e-3 * exact.max(1.0), "j={j} k={k}: {v} vs {exact}");
            }
        }
    }

    #[test]
    fn football_fiber_counts() {
        let fiber = |beta: f64| {
            let m = solve_liouville(&ConicProblem::football(beta).unwrap(), &MeshParams::default()).unwrap();
            spectrum_near_two(&m, DEFAULT_WINDOW).unwrap()
        };
        let f = fiber(1.5);
        assert_eq!(f.ell, 1);
        assert!((f.eigenvalues_near_2[0] - 2.0).abs() < 1e-3);
        let f = fiber(2.0);
        assert_eq!(f.ell, 3, "{:?}", f.eigenvalues_near_2);
    }

    #[test]
    fn weak_form_is_symmetric() {
        let s3 = 3f64.sqrt() / 2.0;
        let p = ConicProblem::sphere(vec![[1.0, 0.0, 0.0], [-0.5, s3, 0.0], [-0.5, -s3, 0.1]], vec![0.6; 3], 1).unwrap();
        let params = MeshParams {
            refinement: 1,
            ..MeshParams::default()
        };
        let m = solve_liouville(&p, &params).unwrap();
        let l = linearized_operator(&m).weak_form();
        assert!(l.asymmetry() < 1e-12);
    }

    #[test]
    fn cos_r_is_in_the_kernel_on_footballs() {
        let beta: f64 = 1.5;
        let m = solve_liouville(&ConicProblem::football(beta).unwrap(), &MeshParams::default()).unwrap();
        let g = match &m.grid {
            MetricGrid::Radial(g) => g,
            _ => unreachable!(),
        };
        // r = 2 atan(|z|^β) with |z| = tan(s/2).
        let phi: Vec<f64> = g
            .nodes
            .iter()
            .map(|s| {
                let (a, b) = ((0.5 * s).sin().powf(2.0 * beta), (0.5 * s).cos().powf(2.0 * beta));
                (b - a) / (b + a)
            })
            .collect();
        let op = linearized_operator(&m);
        let lphi = op.weak_form().matvec(&phi);
        let sphi = op.stiffness.matvec(&phi);
        let num: f64 = lphi.iter().map(|x| x * x).sum::<f64>().sqrt();
        let den: f64 = sphi.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(num < 1e-3 * den, "{num} vs {den}");
    }
}
