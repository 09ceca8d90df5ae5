//! The obstruction pairing between eigenfunctions with eigenvalue 2 and
//! splitting directions.
//!
//! Near a cone point of parameter `β`, with `r = |z|^β / β`, an eigenfunction
//! behaves like `a₀ + Σ_{m≤[β]} (a′_m cos mθ + a″_m sin mθ) r^{m/β} + …` and a
//! splitting direction like `Σ_m (e′_m cos mθ + e″_m sin mθ) r^{−m/β}`. For
//! `β < 1` a single pair with `m = 1` plays both roles. The pairing is
//! `B(φ, v̇) = Σ_j Σ_m m (a′_{jm} e′_{jm} + a″_{jm} e″_{jm})`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::angles::floor_tol;
use crate::error::{Error, Result};
use crate::factorization::roots::polynomial_roots;
use crate::liouville::eigen::ObstructionBundleFiber;
use crate::liouville::{frame, DiscreteConicMetric, MetricGrid};
use crate::quadrature::gauss_legendre;
use crate::spectrum::FootballEigenfunction;

/// Inner and outer extraction annuli in `r`.
pub const ANNULI: [(f64, f64); 2] = [(0.05, 0.1), (0.1, 0.2)];
/// Fits worse than this are flagged.
pub const FIT_TOL: f64 = 1e-4;
/// Relative singular value threshold for the rank.
pub const RANK_TOL: f64 = 1e-8;
/// Absolute threshold: coefficients of unit-norm eigenfunctions below this
/// are indistinguishable from discretization noise.
pub const RANK_ABS_TOL: f64 = 1e-8;

/// Number of indicial pairs at a cone point, `max([β], 1)`.
pub fn pair_count(beta: f64) -> usize {
    (floor_tol(beta).max(1)) as usize
}

/// `K = Σ max([β_j], 1)`.
pub fn total_k(beta: &[f64]) -> usize {
    beta.iter().map(|b| pair_count(*b)).sum()
}

/// `K₀ = Σ_{β_j > 1} [β_j]`.
pub fn total_k0(beta: &[f64]) -> usize {
    beta.iter()
        .filter(|b| **b > 1.0)
        .map(|b| floor_tol(*b) as usize)
        .sum()
}

/// Expansion coefficients of one eigenfunction at one cone point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeCoeffs {
    pub beta: f64,
    /// `a₀`, or `c′₀` when `β < 1`.
    pub constant: f64,
    /// `(a′_m, a″_m)` for `m = 1..=max([β], 1)`; `(c′₁, c″₁)` when `β < 1`.
    pub pairs: Vec<(f64, f64)>,
    /// RMS misfit relative to the sample scale.
    pub residual: f64,
    /// Largest difference between the two annuli's indicial pairs.
    pub disagreement: f64,
    pub reliable: bool,
}

/// Coefficients per eigenfunction (rows) and cone point (columns).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenCoeffs {
    pub rows: Vec<Vec<ConeCoeffs>>,
}

/// `(e′_m, e″_m)` per cone point, `(d′₁, d″₁)` when `β < 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionCoeffs {
    pub per_point: Vec<Vec<(f64, f64)>>,
}

impl DirectionCoeffs {
    pub fn zeros(beta: &[f64]) -> Self {
        Self {
            per_point: beta.iter().map(|b| vec![(0.0, 0.0); pair_count(*b)]).collect(),
        }
    }

    /// Flattened `(e′, e″)` vector in `ℝ^{2K}`.
    pub fn to_vec(&self) -> Vec<f64> {
        self.per_point
            .iter()
            .flatten()
            .flat_map(|(a, b)| [*a, *b])
            .collect()
    }

    /// Inverse of [`Self::to_vec`] for the layout of `beta`.
    pub fn from_vec(beta: &[f64], v: &[f64]) -> Result<Self> {
        if v.len() != 2 * total_k(beta) {
            return Err(Error::ShapeMismatch(format!(
                "direction vector has {} entries, expected {}",
                v.len(),
                2 * total_k(beta)
            )));
        }
        let mut it = v.chunks(2);
        Ok(Self {
            per_point: beta
                .iter()
                .map(|b| {
                    (0..pair_count(*b))
                        .map(|_| {
                            let c = it.next().expect("length checked");
                            (c[0], c[1])
                        })
                        .collect()
                })
                .collect(),
        })
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self {
            per_point: self
                .per_point
                .iter()
                .map(|p| p.iter().map(|(a, b)| (t * a, t * b)).collect())
                .collect(),
        }
    }
}

/// Inverts `A_m = β₀^{m/β₀} (e′_m + i e″_m)`.
pub fn direction_coeffs(a: &[Complex64], beta0: f64) -> Result<Vec<(f64, f64)>> {
    if !(beta0.is_finite() && beta0 > 0.0) {
        return Err(Error::InvalidInput(format!("cone parameter must be positive, got {beta0}")));
    }
    let j = pair_count(beta0);
    if a.len() != j {
        return Err(Error::ShapeMismatch(format!(
            "β₀ = {beta0} needs {j} coefficients, got {}",
            a.len()
        )));
    }
    Ok(a.iter()
        .enumerate()
        .map(|(m, am)| {
            let e = am / beta0.powf((m + 1) as f64 / beta0);
            (e.re, e.im)
        })
        .collect())
}

/// Rows of `B` as an `ℓ × 2K` matrix acting on [`DirectionCoeffs::to_vec`].
pub fn pairing_matrix(eig: &EigenCoeffs) -> Result<DMatrix<f64>> {
    let ell = eig.rows.len();
    let width = eig
        .rows
        .first()
        .map(|r| 2 * r.iter().map(|c| c.pairs.len()).sum::<usize>())
        .unwrap_or(0);
    let mut b = DMatrix::zeros(ell, width);
    for (i, row) in eig.rows.iter().enumerate() {
        let w = 2 * row.iter().map(|c| c.pairs.len()).sum::<usize>();
        if w != width {
            return Err(Error::ShapeMismatch("eigenfunction rows have different layouts".into()));
        }
        let mut col = 0;
        for cone in row {
            for (m, (a1, a2)) in cone.pairs.iter().enumerate() {
                let weight = (m + 1) as f64;
                b[(i, col)] = weight * a1;
                b[(i, col + 1)] = weight * a2;
                col += 2;
            }
        }
    }
    Ok(b)
}

/// `B(φ_i, v̇)` for every eigenfunction `i`.
pub fn pairing_b(eig: &EigenCoeffs, dir: &DirectionCoeffs) -> Result<Vec<f64>> {
    for row in &eig.rows {
        if row.len() != dir.per_point.len()
            || row.iter().zip(&dir.per_point).any(|(c, d)| c.pairs.len() != d.len())
        {
            return Err(Error::ShapeMismatch(
                "eigenfunction and direction coefficients have different layouts".into(),
            ));
        }
    }
    let b = pairing_matrix(eig)?;
    if b.nrows() == 0 {
        return Ok(Vec::new());
    }
    let v = DVector::from_vec(dir.to_vec());
    Ok((b * v).iter().cloned().collect())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolutionSpace {
    pub rank: usize,
    pub dim: usize,
    pub singular_values: Vec<f64>,
    /// Orthonormal basis of the kernel in `ℝ^{2K}`.
    pub kernel: Vec<Vec<f64>>,
}

/// Kernel of `B` by SVD; singular values below `RANK_TOL · σ_max` or
/// `RANK_ABS_TOL` count as zero.
pub fn solution_space(b: &DMatrix<f64>) -> SolutionSpace {
    let n = b.ncols();
    if n == 0 {
        return SolutionSpace {
            rank: 0,
            dim: 0,
            singular_values: Vec::new(),
            kernel: Vec::new(),
        };
    }
    // Pad to a square matrix so the SVD returns a full right basis.
    let rows = b.nrows().max(n);
    let mut padded = DMatrix::zeros(rows, n);
    padded.view_mut((0, 0), (b.nrows(), n)).copy_from(b);
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let nonzero: Vec<bool> = svd
        .singular_values
        .iter()
        .map(|s| *s > (RANK_TOL * smax).max(RANK_ABS_TOL))
        .collect();
    let rank = nonzero.iter().filter(|x| **x).count();
    let kernel: Vec<Vec<f64>> = (0..n)
        .filter(|&k| !nonzero[k])
        .map(|k| vt.row(k).iter().cloned().collect())
        .collect();
    let mut sv: Vec<f64> = svd.singular_values.iter().cloned().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv.truncate(b.nrows().min(n));
    SolutionSpace {
        rank,
        dim: n - rank,
        singular_values: sv,
        kernel,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Case {
    Unobstructed,
    PartialRigidity,
    Rigidity,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub case: Case,
    /// `2K − ℓ`, the dimension of the family of nearby solutions.
    pub solution_dim: usize,
    /// `2K − rank`, the dimension of the kernel of `B`.
    pub kernel_dim: usize,
}

/// Deformation case from `ℓ = dim E₂`, `K`, `K₀` and the rank of `B`.
pub fn classify_case(ell: usize, k: usize, k0: usize, rank: usize) -> Result<Classification> {
    if k0 > k {
        return Err(Error::InvalidInput(format!("K₀ = {k0} exceeds K = {k}")));
    }
    if ell > 2 * k {
        return Err(Error::InvalidInput(format!(
            "ℓ = {ell} exceeds 2K = {}; the eigenspace bound is violated",
            2 * k
        )));
    }
    if rank > ell || rank > 2 * k {
        return Err(Error::InvalidInput(format!("rank {rank} exceeds ℓ = {ell} or 2K")));
    }
    let case = if ell == 0 {
        Case::Unobstructed
    } else if k == k0 && ell == 2 * k0 {
        Case::Rigidity
    } else {
        Case::PartialRigidity
    };
    Ok(Classification {
        case,
        solution_dim: 2 * k - ell,
        kernel_dim: 2 * k - rank,
    })
}

/// One term `(c cos jθ + s sin jθ) r^γ` of a conic expansion.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionTerm {
    pub exponent: f64,
    pub j: usize,
    pub cos: f64,
    pub sin: f64,
}

/// A finite sum of [`ExpansionTerm`]s.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Expansion {
    pub terms: Vec<ExpansionTerm>,
}

impl Expansion {
    /// `c + Σ_m (a′_m cos mθ + a″_m sin mθ) r^{sign·m/β}`.
    pub fn indicial(beta: f64, constant: f64, pairs: &[(f64, f64)], sign: f64) -> Self {
        let mut terms = vec![ExpansionTerm {
            exponent: 0.0,
            j: 0,
            cos: constant,
            sin: 0.0,
        }];
        for (m, (a, b)) in pairs.iter().enumerate() {
            let j = m + 1;
            terms.push(ExpansionTerm {
                exponent: sign * j as f64 / beta,
                j,
                cos: *a,
                sin: *b,
            });
        }
        Self { terms }
    }

    pub fn eval(&self, r: f64, theta: f64) -> (f64, f64) {
        let mut v = 0.0;
        let mut dv = 0.0;
        for t in &self.terms {
            let ang = t.cos * (t.j as f64 * theta).cos() + t.sin * (t.j as f64 * theta).sin();
            let p = r.powf(t.exponent);
            v += ang * p;
            dv += ang * t.exponent * p / r;
        }
        (v, dv)
    }
}

/// `∮_{r=ε} (v̇ ∂_r φ − φ ∂_r v̇) β r dθ`, the flux through the geodesic
/// circle of the cone metric `dr² + β² r² dθ²`.
pub fn boundary_flux(phi: &Expansion, vdot: &Expansion, beta: f64, eps: f64) -> f64 {
    let jmax = phi
        .terms
        .iter()
        .chain(&vdot.terms)
        .map(|t| t.j)
        .max()
        .unwrap_or(0);
    // The trapezoid rule is exact for trigonometric polynomials of this degree.
    let n = 4 * jmax + 8;
    let mut sum = 0.0;
    for k in 0..n {
        let theta = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
        let (p, dp) = phi.eval(eps, theta);
        let (v, dv) = vdot.eval(eps, theta);
        sum += v * dp - p * dv;
    }
    sum * 2.0 * std::f64::consts::PI / n as f64 * beta * eps
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairingLimit {
    pub limit: f64,
    pub values: Vec<f64>,
    /// `max − min` of the values over the radii.
    pub variation: f64,
    /// Positive powers of `ε` removed by the extrapolation.
    pub exponents: Vec<f64>,
}

/// Evaluates [`boundary_flux`] on each radius and extrapolates to `ε → 0`
/// using the powers of `ε` produced by same-harmonic term pairs.
pub fn boundary_pairing_integral(
    phi: &Expansion,
    vdot: &Expansion,
    beta: f64,
    epsilons: &[f64],
) -> Result<PairingLimit> {
    if epsilons.is_empty() || epsilons.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::InvalidInput("radii must be positive".into()));
    }
    let mut exps: Vec<f64> = Vec::new();
    for a in &phi.terms {
        for b in &vdot.terms {
            if a.j != b.j || (a.exponent == 0.0 && b.exponent == 0.0) {
                continue;
            }
            let g = a.exponent + b.exponent;
            if g.abs() < 1e-12 {
                continue;
            }
            if g < 0.0 {
                return Err(Error::Extrapolation(format!(
                    "term pair with total exponent {g} diverges as ε → 0"
                )));
            }
            if !exps.iter().any(|e| (e - g).abs() < 1e-9) {
                exps.push(g);
            }
        }
    }
    exps.sort_by(f64::total_cmp);
    let values: Vec<f64> = epsilons.iter().map(|&e| boundary_flux(phi, vdot, beta, e)).collect();
    let variation = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - values.iter().cloned().fold(f64::INFINITY, f64::min);
    if epsilons.len() < exps.len() + 1 {
        return Err(Error::Extrapolation(format!(
            "{} radii cannot remove {} correction terms",
            epsilons.len(),
            exps.len()
        )));
    }
    let e0 = epsilons.iter().cloned().fold(0.0, f64::max);
    let a = DMatrix::from_fn(epsilons.len(), exps.len() + 1, |i, c| {
        if c == 0 {
            1.0
        } else {
            (epsilons[i] / e0).powf(exps[c - 1])
        }
    });
    let sol = a
        .svd(true, true)
        .solve(&DVector::from_vec(values.clone()), 1e-14)
        .map_err(|e| Error::Extrapolation(e.to_string()))?;
    Ok(PairingLimit {
        limit: sol[0],
        values,
        variation,
        exponents: exps,
    })
}

/// `2π Σ_m m (a′_m e′_m + a″_m e″_m)` for one cone point.
pub fn closed_form_pairing(phi_pairs: &[(f64, f64)], vdot_pairs: &[(f64, f64)]) -> f64 {
    2.0 * std::f64::consts::PI
        * phi_pairs
            .iter()
            .zip(vdot_pairs)
            .enumerate()
            .map(|(m, (a, e))| (m + 1) as f64 * (a.0 * e.0 + a.1 * e.1))
            .sum::<f64>()
}

/// Exponents `(j + 2p)/β + 2q` that can occur in harmonic `j`, smallest six
/// within `j/β + 2`, merged when closer than 0.05.
fn harmonic_exponents(beta: f64, j: usize) -> Vec<f64> {
    let base = j as f64 / beta;
    let mut e = Vec::new();
    for p in 0..12 {
        for q in 0..3 {
            let g = (j + 2 * p) as f64 / beta + 2.0 * q as f64;
            if g <= base + 2.0 + 1e-12 {
                e.push(g);
            }
        }
    }
    e.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::new();
    for g in e {
        if out.last().is_none_or(|l| g - l > 0.05) {
            out.push(g);
        }
    }
    out.truncate(6);
    out
}

/// Leading coefficients of harmonics `0..=m` fitted on one annulus.
/// Returns `(constant, pairs, rms)`.
fn fit_annulus(
    f: &dyn Fn(f64, f64) -> Result<f64>,
    beta: f64,
    m: usize,
    annulus: (f64, f64),
) -> Result<(f64, Vec<(f64, f64)>, f64)> {
    let nr = 12;
    let nt = 8 * (m + 4);
    let radii = gauss_legendre(nr).mapped(annulus.0, annulus.1).nodes;
    // Fourier coefficients per radius.
    let mut fc = vec![vec![(0.0f64, 0.0f64); m + 1]; nr];
    let mut samples = vec![vec![0.0; nt]; nr];
    let mut scale: f64 = 0.0;
    for (ir, &r) in radii.iter().enumerate() {
        for it in 0..nt {
            let th = 2.0 * std::f64::consts::PI * it as f64 / nt as f64;
            let v = f(r, th)?;
            samples[ir][it] = v;
            scale = scale.max(v.abs());
            for j in 0..=m {
                let w = if j == 0 { 1.0 } else { 2.0 } / nt as f64;
                fc[ir][j].0 += w * v * (j as f64 * th).cos();
                fc[ir][j].1 += w * v * (j as f64 * th).sin();
            }
        }
    }
    let mut constant = 0.0;
    let mut pairs = Vec::new();
    let mut model = vec![vec![0.0; nt]; nr];
    for j in 0..=m {
        let ex = harmonic_exponents(beta, j);
        let a = DMatrix::from_fn(nr, ex.len(), |i, k| (radii[i] / annulus.1).powf(ex[k]));
        let svd = a.clone().svd(true, true);
        let mut lead = (0.0, 0.0);
        for part in 0..2 {
            if j == 0 && part == 1 {
                continue;
            }
            let rhs = DVector::from_iterator(nr, (0..nr).map(|i| if part == 0 { fc[i][j].0 } else { fc[i][j].1 }));
            let c = svd
                .solve(&rhs, 1e-15)
                .map_err(|e| Error::Singular(format!("coefficient fit: {e}")))?;
            let fitted = &a * &c;
            for i in 0..nr {
                for it in 0..nt {
                    let th = 2.0 * std::f64::consts::PI * it as f64 / nt as f64;
                    let trig = if part == 0 { (j as f64 * th).cos() } else { (j as f64 * th).sin() };
                    model[i][it] += fitted[i] * trig;
                }
            }
            let value = c[0] / annulus.1.powf(ex[0]);
            if part == 0 {
                lead.0 = value;
            } else {
                lead.1 = value;
            }
        }
        if j == 0 {
            constant = lead.0;
        } else {
            pairs.push(lead);
        }
    }
    let mut ss = 0.0;
    for i in 0..nr {
        for it in 0..nt {
            ss += (samples[i][it] - model[i][it]).powi(2);
        }
    }
    let rms = (ss / (nr * nt) as f64).sqrt() / scale.max(1e-300);
    Ok((constant, pairs, rms))
}

/// Least-squares extraction of the indicial coefficients of `f(r, θ)` on the
/// two annuli of [`ANNULI`]; the reported values come from the inner one.
pub fn extract_coeffs(f: &dyn Fn(f64, f64) -> Result<f64>, beta: f64) -> Result<ConeCoeffs> {
    let m = pair_count(beta);
    let (c_in, p_in, r_in) = fit_annulus(f, beta, m, ANNULI[0])?;
    let (_, p_out, r_out) = fit_annulus(f, beta, m, ANNULI[1])?;
    let mut disagreement: f64 = 0.0;
    for (a, b) in p_in.iter().zip(&p_out) {
        disagreement = disagreement.max((a.0 - b.0).abs()).max((a.1 - b.1).abs());
    }
    let residual = r_in.max(r_out);
    Ok(ConeCoeffs {
        beta,
        constant: c_in,
        pairs: p_in,
        residual,
        disagreement,
        reliable: residual <= FIT_TOL && disagreement <= FIT_TOL,
    })
}

/// Coefficients of fiber eigenfunction `i` at cone point `point`, in the
/// stereographic chart `z = 2 tan(d/2) e^{iθ}` with `r = |z|^β/β`.
pub fn extract_eigf_coeffs(
    metric: &DiscreteConicMetric,
    fiber: &ObstructionBundleFiber,
    i: usize,
    point: usize,
) -> Result<ConeCoeffs> {
    if i >= fiber.ell || point >= metric.problem.points.len() {
        return Err(Error::InvalidInput(format!("no eigenfunction {i} or cone point {point}")));
    }
    let beta = metric.problem.beta[point];
    let p = metric.problem.points[point];
    let (e1, e2) = frame(p);
    let phi = &fiber.eigenvectors[i];
    let sampler = |r: f64, th: f64| -> Result<f64> {
        let zabs = (beta * r).powf(1.0 / beta);
        match &metric.grid {
            MetricGrid::Radial(g) => {
                let mut s = 2.0 * (0.5 * zabs).atan();
                // The angle is measured around the chosen pole.
                if point == 1 {
                    s = std::f64::consts::PI - s;
                }
                let radial = g.eval(phi, s);
                Ok(match fiber.harmonics[i] {
                    Some(h) if h.j > 0 => {
                        let a = h.j as f64 * th;
                        radial * if h.sine { a.sin() } else { a.cos() }
                    }
                    _ => radial,
                })
            }
            MetricGrid::Triangulated(d) => {
                let dist = match metric.problem.background {
                    crate::liouville::Background::Sphere => 2.0 * (0.5 * zabs).atan(),
                    crate::liouville::Background::Disk => zabs,
                };
                let x = match metric.problem.background {
                    crate::liouville::Background::Sphere => {
                        [0, 1, 2].map(|k| dist.cos() * p[k] + dist.sin() * (th.cos() * e1[k] + th.sin() * e2[k]))
                    }
                    crate::liouville::Background::Disk => [p[0] + dist * th.cos(), p[1] + dist * th.sin(), 0.0],
                };
                d.interpolate(phi, x)
                    .ok_or_else(|| Error::InvalidInput(format!("sample {x:?} is off the grid")))
            }
        }
    };
    extract_coeffs(&sampler, beta)
}

/// [`extract_eigf_coeffs`] for every eigenfunction and cone point.
pub fn extract_all(metric: &DiscreteConicMetric, fiber: &ObstructionBundleFiber) -> Result<EigenCoeffs> {
    let rows = (0..fiber.ell)
        .map(|i| {
            (0..metric.problem.points.len())
                .map(|j| extract_eigf_coeffs(metric, fiber, i, j))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EigenCoeffs { rows })
}

/// Weights of the centred difference for the `k`-th derivative on the
/// smallest symmetric stencil, second-order accurate.
pub fn central_difference_weights(k: usize) -> (Vec<i64>, Vec<f64>) {
    let p = (k as i64 + 1) / 2;
    let offsets: Vec<i64> = (-p..=p).collect();
    let n = offsets.len();
    let a = DMatrix::from_fn(n, n, |row, col| (offsets[col] as f64).powi(row as i32));
    let mut rhs = DVector::zeros(n);
    rhs[k] = (1..=k).map(|x| x as f64).product::<f64>();
    let w = a.lu().solve(&rhs).expect("Vandermonde matrix is invertible");
    (offsets, w.iter().cloned().collect())
}

/// `log|z^J + ρ^J (A₁ z^{J−1} + … + A_J)|`.
pub fn split_potential(a: &[Complex64], rho: f64, z: Complex64) -> f64 {
    let j = a.len();
    let mut p = Complex64::new(0.0, 0.0);
    for ai in a {
        p = p * z + ai;
    }
    (z.powu(j as u32) + p * rho.powi(j as i32)).norm().ln()
}

/// Sup over `|z| = 0.5` of the `k`-th centred difference in `ρ` at `ρ = 0`
/// of [`split_potential`], with step `h`.
pub fn vdot_vanishing_check(a: &[Complex64], k: usize, h: f64) -> Result<f64> {
    if a.is_empty() || k == 0 || !(h > 0.0) {
        return Err(Error::InvalidInput("need J ≥ 1, k ≥ 1 and h > 0".into()));
    }
    let (offsets, weights) = central_difference_weights(k);
    let mut worst: f64 = 0.0;
    for s in 0..64 {
        let z = Complex64::from_polar(0.5, 2.0 * std::f64::consts::PI * (s as f64 + 0.25) / 64.0);
        let d: f64 = offsets
            .iter()
            .zip(&weights)
            .map(|(o, w)| w * split_potential(a, *o as f64 * h, z))
            .sum::<f64>()
            / h.powi(k as i32);
        worst = worst.max(d.abs());
    }
    Ok(worst)
}

/// `J! Re Σ A_ℓ z^{−ℓ}`, the first surviving `ρ`-derivative.
pub fn first_surviving_derivative(a: &[Complex64], z: Complex64) -> f64 {
    let j = a.len();
    let fact: f64 = (1..=j).map(|x| x as f64).product();
    let s: Complex64 = a.iter().enumerate().map(|(l, al)| al / z.powu(l as u32 + 1)).sum();
    fact * s.re
}

/// Sup over `|z| = 0.5` of the gap between the Richardson-extrapolated
/// `J`-th difference and [`first_surviving_derivative`].
pub fn surviving_derivative_error(a: &[Complex64], h: f64) -> Result<f64> {
    let j = a.len();
    let (offsets, weights) = central_difference_weights(j);
    let hs = [h, h / 2.0, h / 4.0];
    let mut worst: f64 = 0.0;
    for s in 0..64 {
        let z = Complex64::from_polar(0.5, 2.0 * std::f64::consts::PI * (s as f64 + 0.25) / 64.0);
        let vals: Vec<f64> = hs
            .iter()
            .map(|&hh| {
                offsets
                    .iter()
                    .zip(&weights)
                    .map(|(o, w)| w * split_potential(a, *o as f64 * hh, z))
                    .sum::<f64>()
                    / hh.powi(j as i32)
            })
            .collect();
        let d = crate::spectrum::richardson(&hs, &vals, &[2.0, 4.0])?;
        worst = worst.max((d - first_surviving_derivative(a, z)).abs());
    }
    Ok(worst)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FlatnessReport {
    pub beta: f64,
    pub j: usize,
    pub rhos: Vec<f64>,
    /// `λ_ρ` at each `ρ`.
    pub lambda_rho: Vec<f64>,
    /// Log-log slope of `|λ_ρ|` in `ρ`.
    pub slope: f64,
    /// `slope + 1`, the fitted vanishing order of `λ − 2`.
    pub order: f64,
    /// Whether `order ≥ J`.
    pub flat: bool,
}

/// `λ_ρ = −2λ ∫ v̂_ρ |φ|² dA` for the football eigenfunction `cos r` with one
/// pole split by `A⃗`.
///
/// In the chart `z` at the split pole, `v̂_ρ = Re F` with `F = Jρ^{J−1} P/Q`,
/// `Q = z^J + ρ^J P`. Its circle means are sums of residues of `F/z`, so only
/// the roots of `Q` contribute, each weighted by the eigenfunction mass
/// inside its radius; that mass is integrated by Gauss rules in `r`.
pub fn eigenvalue_flatness_check(beta: f64, a: &[Complex64], rhos: &[f64]) -> Result<FlatnessReport> {
    let j = a.len();
    if j == 0 || j > pair_count(beta) {
        return Err(Error::InvalidInput(format!(
            "a split of β = {beta} has at most {} coefficients",
            pair_count(beta)
        )));
    }
    if rhos.len() < 2 || rhos.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::InvalidInput("need at least two positive ρ".into()));
    }
    let phi = FootballEigenfunction::new(beta, 0, 1)?;
    let lambda = phi.lambda;
    // Mass of φ² within geodesic radius R, with area element β sin r dr dθ.
    let mass = |big_r: f64| -> Result<f64> {
        let rule = gauss_legendre(24).mapped(0.0, big_r);
        let mut s = 0.0;
        for (r, w) in rule.nodes.iter().zip(&rule.weights) {
            s += w * phi.radial(*r)?.powi(2) * beta * r.sin();
        }
        Ok(2.0 * std::f64::consts::PI * s)
    };
    let xi = polynomial_roots(a);
    let mut lambda_rho = Vec::with_capacity(rhos.len());
    for &rho in rhos {
        let mut total = 0.0;
        for x in &xi {
            let zeta = x * rho;
            if zeta.norm() == 0.0 {
                continue;
            }
            let (mut p, mut dp) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
            for ai in a {
                dp = dp * zeta + p;
                p = p * zeta + ai;
            }
            let dq = zeta.powu(j as u32 - 1) * j as f64 + dp * rho.powi(j as i32);
            let res = p * (j as f64 * rho.powi(j as i32 - 1)) / (zeta * dq);
            // Geodesic radius of |z| on the football.
            let big_r = 2.0 * zeta.norm().powf(beta).atan();
            total += res.re * mass(big_r)?;
        }
        lambda_rho.push(2.0 * lambda * total);
    }
    let slope = crate::fit::log_log_slope(rhos, &lambda_rho.iter().map(|v| v.abs().max(1e-300)).collect::<Vec<_>>());
    let order = slope + 1.0;
    Ok(FlatnessReport {
        beta,
        j,
        rhos: rhos.to_vec(),
        lambda_rho,
        slope,
        order,
        flat: order >= j as f64 - 1e-6,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn direction_examples() {
        let b0 = 2.5;
        let e = direction_coeffs(&[c(1.0, 0.0), c(0.0, 0.0)], b0).unwrap();
        assert!((e[0].0 - b0.powf(-1.0 / b0)).abs() < 1e-15 && e[0].1 == 0.0);
        assert!(direction_coeffs(&[c(0.0, 0.0); 2], b0).unwrap().iter().all(|p| *p == (0.0, 0.0)));
        let e = direction_coeffs(&[c(0.0, 2.0), c(0.0, -1.0)], b0).unwrap();
        assert!(e.iter().all(|p| p.0 == 0.0));
        assert!(direction_coeffs(&[c(1.0, 0.0)], b0).is_err());
    }

    fn coeffs(beta: f64, pairs: Vec<(f64, f64)>) -> ConeCoeffs {
        ConeCoeffs {
            beta,
            constant: 0.0,
            pairs,
            residual: 0.0,
            disagreement: 0.0,
            reliable: true,
        }
    }

    #[test]
    fn pairing_examples() {
        let eig = EigenCoeffs {
            rows: vec![vec![coeffs(1.5, vec![(1.0, 0.0)])]],
        };
        let dir = DirectionCoeffs {
            per_point: vec![vec![(1.0, 0.0)]],
        };
        assert_eq!(pairing_b(&eig, &dir).unwrap(), vec![1.0]);
        let scaled = pairing_b(&eig, &dir.scaled(3.0)).unwrap();
        assert_eq!(scaled, vec![3.0]);
        let zero = EigenCoeffs {
            rows: vec![vec![coeffs(2.5, vec![(0.0, 0.0); 2]); 2]],
        };
        let b = pairing_matrix(&zero).unwrap();
        let space = solution_space(&b);
        assert_eq!((space.rank, space.dim), (0, 8));
        let bad = DirectionCoeffs {
            per_point: vec![vec![(1.0, 0.0); 2]],
        };
        assert!(pairing_b(&eig, &bad).is_err());
    }

    #[test]
    fn kernel_dimensions() {
        let b = DMatrix::from_row_slice(1, 4, &[1.0, 2.0, 0.0, -1.0]);
        let s = solution_space(&b);
        assert_eq!((s.rank, s.dim), (1, 3));
        for v in &s.kernel {
            let r: f64 = b.row(0).iter().zip(v).map(|(x, y)| x * y).sum();
            assert!(r.abs() < 1e-14);
        }
    }

    #[test]
    fn classification_examples() {
        let f = classify_case(1, 4, 4, 1).unwrap();
        assert_eq!(f.case, Case::PartialRigidity);
        assert_eq!(f.solution_dim, 7);
        assert_eq!(classify_case(0, 3, 1, 0).unwrap().case, Case::Unobstructed);
        assert_eq!(classify_case(4, 2, 2, 4).unwrap().case, Case::Rigidity);
        assert!(classify_case(9, 4, 4, 1).is_err());
    }

    #[test]
    fn boundary_integral_examples() {
        let beta = 1.7;
        let phi = Expansion::indicial(beta, 0.0, &[(1.0, 0.0)], 1.0);
        let vdot = Expansion::indicial(beta, 0.0, &[(1.0, 0.0)], -1.0);
        let l = boundary_pairing_integral(&phi, &vdot, beta, &[0.3, 0.2, 0.1]).unwrap();
        assert!((l.limit - 2.0 * std::f64::consts::PI).abs() < 1e-12);
        assert!(l.variation < 1e-12);
        let sine = Expansion::indicial(beta, 0.0, &[(0.0, 1.0)], -1.0);
        let l = boundary_pairing_integral(&phi, &sine, beta, &[0.3, 0.2]).unwrap();
        assert!(l.limit.abs() < 1e-14);
        let c1 = Expansion::indicial(beta, 2.0, &[], 1.0);
        let c2 = Expansion::indicial(beta, -1.0, &[], -1.0);
        assert!(boundary_pairing_integral(&c1, &c2, beta, &[0.2]).unwrap().limit.abs() < 1e-15);
    }

    #[test]
    fn extraction_of_manufactured_functions() {
        let beta: f64 = 1.7;
        let f = |r: f64, th: f64| Ok(r.powf(1.0 / beta) * th.cos());
        let e = extract_coeffs(&f, beta).unwrap();
        assert!((e.pairs[0].0 - 1.0).abs() < 1e-10 && e.pairs[0].1.abs() < 1e-10 && e.constant.abs() < 1e-10);
        let beta: f64 = 0.6;
        let f = |r: f64, th: f64| Ok(3.0 + r.powf(1.0 / beta) * th.sin());
        let e = extract_coeffs(&f, beta).unwrap();
        assert!((e.constant - 3.0).abs() < 1e-10 && (e.pairs[0].1 - 1.0).abs() < 1e-10);
        assert!(e.reliable);
    }

    #[test]
    fn central_weights() {
        let (o, w) = central_difference_weights(2);
        assert_eq!(o, vec![-1, 0, 1]);
        assert!((w[0] - 1.0).abs() < 1e-14 && (w[1] + 2.0).abs() < 1e-14);
    }

    #[test]
    fn vdot_vanishes_below_order_j() {
        let a = [c(0.2, -0.1), c(0.05, 0.1), c(-0.1, 0.02)];
        let r1 = vdot_vanishing_check(&a, 2, 0.02).unwrap();
        let r2 = vdot_vanishing_check(&a, 2, 0.01).unwrap();
        assert!(r2 < 0.3 * r1 || r2 < 1e-10, "{r1} {r2}");
        assert!(surviving_derivative_error(&a, 0.02).unwrap() < 1e-6);
    }

    #[test]
    fn flatness_is_at_least_j() {
        let rep = eigenvalue_flatness_check(2.5, &[c(0.0, 0.0), c(0.3, 0.1)], &[0.1, 0.05, 0.025]).unwrap();
        assert!(rep.flat, "{rep:?}");
    }

    use proptest::prelude::*;

    fn eig_from(beta: f64, rows: &[Vec<(f64, f64)>]) -> EigenCoeffs {
        EigenCoeffs {
            rows: rows.iter().map(|r| vec![coeffs(beta, r.clone())]).collect(),
        }
    }

    proptest! {
        #[test]
        fn pairing_is_bilinear(
            a in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2),
            e in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2),
            t in -3.0f64..3.0,
        ) {
            let eig = eig_from(2.4, &[a.clone()]);
            let dir = DirectionCoeffs { per_point: vec![e] };
            let base = pairing_b(&eig, &dir).unwrap()[0];
            let scaled_dir = pairing_b(&eig, &dir.scaled(t)).unwrap()[0];
            let scaled_eig = eig_from(2.4, &[a.iter().map(|(x, y)| (t * x, t * y)).collect()]);
            let scaled_phi = pairing_b(&scaled_eig, &dir).unwrap()[0];
            prop_assert!((scaled_dir - t * base).abs() <= 1e-14 * (1.0 + base.abs()));
            prop_assert!((scaled_phi - t * base).abs() <= 1e-14 * (1.0 + base.abs()));
        }

        #[test]
        fn rank_plus_kernel_is_width(
            ell in 1usize..5,
            k in 2usize..5,
            entries in proptest::collection::vec(-1.0f64..1.0, 40),
        ) {
            let b = DMatrix::from_fn(ell, 2 * k, |i, j| entries[(i * 2 * k + j) % entries.len()]);
            let s = solution_space(&b);
            prop_assert_eq!(s.rank + s.dim, 2 * k);
            prop_assert_eq!(s.kernel.len(), s.dim);
        }

        #[test]
        fn random_full_rank_kernel(seed in 0u64..1000, ell in 1usize..4) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let b = DMatrix::from_fn(ell, 8, |_, _| rng.random_range(-1.0f64..1.0));
            // Full rank oracle: the Gram determinant is bounded away from zero.
            let gram = &b * b.transpose();
            prop_assume!(gram.determinant().abs() > 1e-6);
            prop_assert_eq!(solution_space(&b).dim, 8 - ell);
        }

        #[test]
        fn closed_form_matches_limit(
            beta in 0.3f64..4.5,
            vals in proptest::collection::vec(-1.0f64..1.0, 16),
        ) {
            let m = pair_count(beta);
            let a: Vec<(f64, f64)> = (0..m).map(|i| (vals[2 * i], vals[2 * i + 1])).collect();
            let e: Vec<(f64, f64)> = (0..m).map(|i| (vals[8 + 2 * i % 8], vals[9 + 2 * i % 7])).collect();
            let phi = Expansion::indicial(beta, vals[0], &a, 1.0);
            let vdot = Expansion::indicial(beta, vals[1], &e, -1.0);
            let lim = boundary_pairing_integral(&phi, &vdot, beta, &[0.3, 0.2, 0.1]).unwrap();
            prop_assert!((lim.limit - closed_form_pairing(&a, &e)).abs() < 1e-8);
            prop_assert!(lim.variation < 1e-10);
        }
    }
}
