//! Spectra of conic Laplacians on footballs and doubled triangles.
//!
//! On the football `dr² + β² sin² r dθ²` separation of variables gives the
//! closed form `λ = (j/β + ℓ)(j/β + ℓ + 1)` with radial profiles
//! `sin^ν r · C_ℓ^{(ν+½)}(cos r)`, `ν = j/β`, where `C` is a Gegenbauer
//! polynomial. A finite-volume discretization of the radial problem serves as
//! an independent check of the closed form.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Tolerance for deciding `λ ≤ 2` and `λ < 2`, and for `β` hitting an integer.
pub const SPECTRAL_TOL: f64 = 1e-9;

/// Football with cone angle `2πβ` at both poles.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FootballSpec {
    pub beta: f64,
}

impl FootballSpec {
    pub fn new(beta: f64) -> Result<Self> {
        check_beta(beta)?;
        Ok(Self { beta })
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::InvalidInput(format!("β must be positive, got {beta}")));
    }
    Ok(())
}

/// One separated eigenvalue. `multiplicity` is 2 for `j > 0` (cosine and sine).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenMode {
    pub j: u32,
    pub ell: u32,
    pub lambda: f64,
    pub multiplicity: u32,
}

pub fn football_lambda(beta: f64, j: u32, ell: u32) -> f64 {
    let x = j as f64 / beta + ell as f64;
    x * (x + 1.0)
}

/// All football modes with `λ ≤ λ_max`, sorted by eigenvalue.
pub fn football_eigenvalues(beta: f64, lambda_max: f64) -> Result<Vec<EigenMode>> {
    check_beta(beta)?;
    if !(lambda_max.is_finite() && lambda_max >= 0.0) {
        return Err(Error::InvalidInput("λ_max must be nonnegative".into()));
    }
    let cap = lambda_max + SPECTRAL_TOL;
    let mut modes = Vec::new();
    let mut j = 0u32;
    while football_lambda(beta, j, 0) <= cap {
        let mut ell = 0u32;
        loop {
            let lambda = football_lambda(beta, j, ell);
            if lambda > cap {
                break;
            }
            modes.push(EigenMode {
                j,
                ell,
                lambda,
                multiplicity: if j == 0 { 1 } else { 2 },
            });
            ell += 1;
        }
        j += 1;
    }
    modes.sort_by(|a, b| {
        a.lambda
            .total_cmp(&b.lambda)
            .then(a.j.cmp(&b.j))
            .then(a.ell.cmp(&b.ell))
    });
    Ok(modes)
}

/// Eigenvalue counts at the threshold 2, with multiplicity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountAtTwo {
    /// `#{λ ≤ 2}`.
    pub at_most: u32,
    /// `#{λ < 2}`.
    pub below: u32,
}

fn count_modes(modes: &[EigenMode]) -> CountAtTwo {
    let mut c = CountAtTwo { at_most: 0, below: 0 };
    for m in modes {
        if m.lambda <= 2.0 + SPECTRAL_TOL {
            c.at_most += m.multiplicity;
        }
        if m.lambda < 2.0 - SPECTRAL_TOL {
            c.below += m.multiplicity;
        }
    }
    c
}

pub fn football_count(beta: f64) -> Result<CountAtTwo> {
    Ok(count_modes(&football_eigenvalues(beta, 2.0)?))
}

/// Normalized separated eigenfunction `N R(r) cos(jθ)` (or `N R(r)` for
/// `j = 0`) with unit `L²` norm for the area element `β sin r dr dθ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FootballEigenfunction {
    pub beta: f64,
    pub j: u32,
    pub ell: u32,
    pub nu: f64,
    pub lambda: f64,
    /// Factor `N` making the eigenfunction unit-normalized.
    pub norm: f64,
}

/// Gegenbauer polynomial `C_n^{(α)}(x)` and its derivative by recurrence.
pub fn gegenbauer(n: u32, alpha: f64, x: f64) -> (f64, f64) {
    // d/dx C_n^{(α)} = 2α C_{n−1}^{(α+1)}.
    let value = |n: u32, a: f64| -> f64 {
        let mut c0 = 1.0;
        if n == 0 {
            return c0;
        }
        let mut c1 = 2.0 * a * x;
        for k in 2..=n {
            let kf = k as f64;
            let c2 = (2.0 * x * (kf + a - 1.0) * c1 - (kf + 2.0 * a - 2.0) * c0) / kf;
            c0 = c1;
            c1 = c2;
        }
        c1
    };
    let d = if n == 0 { 0.0 } else { 2.0 * alpha * value(n - 1, alpha + 1.0) };
    (value(n, alpha), d)
}

/// `ln ∫_{−1}^{1} (1 − t²)^{α−½} C_n^{(α)}(t)² dt`.
fn ln_gegenbauer_norm(n: u32, alpha: f64) -> f64 {
    let nf = n as f64;
    std::f64::consts::PI.ln() + (1.0 - 2.0 * alpha) * std::f64::consts::LN_2 + ln_gamma(nf + 2.0 * alpha)
        - ln_gamma(nf + 1.0)
        - (nf + alpha).ln()
        - 2.0 * ln_gamma(alpha)
}

impl FootballEigenfunction {
    pub fn new(beta: f64, j: u32, ell: u32) -> Result<Self> {
        check_beta(beta)?;
        let nu = j as f64 / beta;
        let alpha = nu + 0.5;
        let angular = if j == 0 { 2.0 * std::f64::consts::PI } else { std::f64::consts::PI };
        let ln_radial = ln_gegenbauer_norm(ell, alpha);
        let norm = (-0.5 * (ln_radial + (beta * angular).ln())).exp();
        Ok(Self {
            beta,
            j,
            ell,
            nu,
            lambda: football_lambda(beta, j, ell),
            norm,
        })
    }

    /// Normalized radial profile at `r ∈ [0, π]`.
    pub fn radial(&self, r: f64) -> Result<f64> {
        Ok(self.radial_with_derivative(r)?.0)
    }

    /// Profile and its `r`-derivative.
    pub fn radial_with_derivative(&self, r: f64) -> Result<(f64, f64)> {
        if !(0.0..=std::f64::consts::PI).contains(&r) {
            return Err(Error::InvalidInput(format!("r = {r} outside [0, π]")));
        }
        let (s, c) = r.sin_cos();
        let (g, dg) = gegenbauer(self.ell, self.nu + 0.5, c);
        let sn = if self.nu == 0.0 { 1.0 } else { s.abs().powf(self.nu) };
        let value = self.norm * sn * g;
        // d/dr [sin^ν r · g(cos r)] = ν sin^{ν−1} r cos r · g − sin^{ν+1} r · g'.
        let dsn = if self.nu == 0.0 {
            0.0
        } else if s == 0.0 {
            if self.nu == 1.0 {
                c
            } else if self.nu > 1.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            self.nu * s.powf(self.nu - 1.0) * c
        };
        let deriv = self.norm * (dsn * g - sn * s * dg);
        Ok((value, deriv))
    }

    /// Full eigenfunction value at `(r, θ)`, the cosine member for `j > 0`.
    pub fn eval(&self, r: f64, theta: f64) -> Result<f64> {
        Ok(self.radial(r)? * (self.j as f64 * theta).cos())
    }
}

pub fn football_eigenfunction(beta: f64, j: u32, ell: u32) -> Result<FootballEigenfunction> {
    FootballEigenfunction::new(beta, j, ell)
}

/// Number of eigenvalues reported by the radial discretization.
pub const RADIAL_EIGENVALUES: usize = 5;

/// Lowest eigenvalues of the radial problem for angular index `j`, by a
/// cell-centred finite-volume scheme on `n_grid` cells.
///
/// With `R = sin^ν r · S` the radial equation becomes
/// `−(w S')'/w = (λ − ν(ν+1)) S`, `w = sin^{2ν+1} r`, which carries the
/// Friedrichs condition at both poles as a natural (zero-flux) condition.
pub fn radial_sturm_liouville(beta: f64, j: u32, n_grid: usize) -> Result<Vec<f64>> {
    check_beta(beta)?;
    if n_grid < 64 {
        return Err(Error::InvalidInput("n_grid must be at least 64".into()));
    }
    let nu = j as f64 / beta;
    let p = 2.0 * nu + 1.0;
    let h = std::f64::consts::PI / n_grid as f64;
    let w = |r: f64| r.sin().powf(p);
    // Cell masses by two-point Gauss per cell; face weights exact.
    let g = 0.5 / 3f64.sqrt();
    let mass: Vec<f64> = (0..n_grid)
        .map(|i| {
            let c = (i as f64 + 0.5) * h;
            0.5 * h * (w(c - g * h) + w(c + g * h))
        })
        .collect();
    let face: Vec<f64> = (1..n_grid).map(|i| w(i as f64 * h) / h).collect();
    // Symmetric tridiagonal M^{−1/2} K M^{−1/2}.
    let mut diag = vec![0.0; n_grid];
    let mut off = vec![0.0; n_grid - 1];
    for i in 0..n_grid {
        let mut k = 0.0;
        if i > 0 {
            k += face[i - 1];
        }
        if i + 1 < n_grid {
            k += face[i];
        }
        diag[i] = k / mass[i];
    }
    for i in 0..n_grid - 1 {
        off[i] = -face[i] / (mass[i] * mass[i + 1]).sqrt();
    }
    let shift = nu * (nu + 1.0);
    Ok((0..RADIAL_EIGENVALUES)
        .map(|k| tridiagonal_eigenvalue(&diag, &off, k) + shift)
        .collect())
}

/// Number of eigenvalues below `x` of a symmetric tridiagonal matrix.
fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut d = diag[0] - x;
    if d < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        let prev = if d == 0.0 { f64::EPSILON * off[i - 1].abs().max(1e-300) } else { d };
        d = diag[i] - x - off[i - 1] * off[i - 1] / prev;
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// The `k`-th smallest eigenvalue (0-based) by bisection on Sturm counts.
fn tridiagonal_eigenvalue(diag: &[f64], off: &[f64], k: usize) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..diag.len() {
        let r = if i > 0 { off[i - 1].abs() } else { 0.0 } + if i < off.len() { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(diag, off, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Generalized Richardson extrapolation: fits
/// `v(h) = v_0 + Σ_m a_m h^{p_m}` through the samples and returns `v_0`.
pub fn richardson(hs: &[f64], values: &[f64], exponents: &[f64]) -> Result<f64> {
    let n = hs.len();
    if values.len() != n || exponents.len() + 1 != n {
        return Err(Error::Extrapolation(
            "need one more sample than correction exponents".into(),
        ));
    }
    let h0 = hs.iter().cloned().fold(0.0, f64::max);
    let m = DMatrix::from_fn(n, n, |i, c| {
        if c == 0 {
            1.0
        } else {
            (hs[i] / h0).powf(exponents[c - 1])
        }
    });
    let rhs = DVector::from_column_slice(values);
    let sol = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Extrapolation("degenerate exponent set".into()))?;
    Ok(sol[0])
}

/// Error exponents of the radial scheme: even powers of `h` plus the
/// endpoint powers `h^{2ν+2+2m}`.
fn radial_exponents(nu: f64, count: usize) -> Vec<f64> {
    let mut e: Vec<f64> = Vec::new();
    for m in 0..count {
        e.push(2.0 * (m + 1) as f64);
        e.push(2.0 * nu + 2.0 + 2.0 * m as f64);
    }
    e.sort_by(f64::total_cmp);
    e.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
    e.retain(|x| *x > 0.0);
    e.truncate(count);
    e
}

/// Radial eigenvalues extrapolated from grids `n_grid·2^i`, `i < levels`.
pub fn radial_sturm_liouville_extrapolated(
    beta: f64,
    j: u32,
    n_grid: usize,
    levels: usize,
) -> Result<Vec<f64>> {
    if levels < 2 {
        return Err(Error::InvalidInput("at least two levels are needed".into()));
    }
    let grids: Vec<usize> = (0..levels).map(|i| n_grid << i).collect();
    let runs: Vec<Vec<f64>> = grids
        .iter()
        .map(|&n| radial_sturm_liouville(beta, j, n))
        .collect::<Result<_>>()?;
    let hs: Vec<f64> = grids.iter().map(|&n| std::f64::consts::PI / n as f64).collect();
    let exps = radial_exponents(j as f64 / beta, levels - 1);
    (0..RADIAL_EIGENVALUES)
        .map(|k| {
            let v: Vec<f64> = runs.iter().map(|r| r[k]).collect();
            richardson(&hs, &v, &exps)
        })
        .collect()
}

/// Dirichlet mode of the doubled `(π/2, π/2, πβ)` triangle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriangleMode {
    pub j: u32,
    pub ell: u32,
    pub lambda: f64,
}

/// `{(j/β + 2ℓ)(j/β + 2ℓ + 1) : j ≥ 1, ℓ ≥ 0}` up to `λ_max`, sorted.
pub fn triangle_dirichlet_eigenvalues(beta: f64, lambda_max: f64) -> Result<Vec<TriangleMode>> {
    check_beta(beta)?;
    let cap = lambda_max + SPECTRAL_TOL;
    let lam = |j: u32, ell: u32| {
        let x = j as f64 / beta + 2.0 * ell as f64;
        x * (x + 1.0)
    };
    let mut out = Vec::new();
    let mut j = 1u32;
    while lam(j, 0) <= cap {
        let mut ell = 0;
        while lam(j, ell) <= cap {
            out.push(TriangleMode {
                j,
                ell,
                lambda: lam(j, ell),
            });
            ell += 1;
        }
        j += 1;
    }
    out.sort_by(|a, b| a.lambda.total_cmp(&b.lambda).then(a.j.cmp(&b.j)));
    Ok(out)
}

pub fn triangle_count(beta: f64) -> Result<CountAtTwo> {
    let modes = triangle_dirichlet_eigenvalues(beta, 2.0)?;
    Ok(CountAtTwo {
        at_most: modes.iter().filter(|m| m.lambda <= 2.0 + SPECTRAL_TOL).count() as u32,
        below: modes.iter().filter(|m| m.lambda < 2.0 - SPECTRAL_TOL).count() as u32,
    })
}

/// Count `#{λ < 2}` along a path of footballs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowSample {
    pub beta: f64,
    pub below_two: u32,
}

/// A mode crossing `λ = 2` between consecutive samples.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    /// Index of the first sample of the interval.
    pub interval: usize,
    pub beta_from: f64,
    pub beta_to: f64,
    /// Where the mode equals 2 exactly.
    pub beta_cross: f64,
    pub j: u32,
    pub ell: u32,
    /// Change in `#{λ < 2}` caused by this mode.
    pub delta: i32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowReport {
    pub samples: Vec<FlowSample>,
    pub crossings: Vec<Crossing>,
}

/// Evenly spaced path `a → b` with `n` samples.
pub fn linear_path(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![a];
    }
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Tracks `#{λ < 2}` over modes with `j ≤ j_max` along a football path and
/// attributes every jump to the mode responsible.
pub fn eigenvalue_flow(path: &[f64], j_max: u32) -> Result<FlowReport> {
    if path.is_empty() {
        return Err(Error::InvalidInput("empty path".into()));
    }
    for b in path {
        check_beta(*b)?;
    }
    let below = |beta: f64, j: u32, ell: u32| football_lambda(beta, j, ell) < 2.0 - SPECTRAL_TOL;
    let samples: Vec<FlowSample> = path
        .iter()
        .map(|&beta| {
            let mut n = if below(beta, 0, 0) { 1 } else { 0 };
            for j in 1..=j_max {
                // Only ℓ = 0 can lie below 2 when j ≥ 1.
                if below(beta, j, 0) {
                    n += 2;
                }
            }
            FlowSample { beta, below_two: n }
        })
        .collect();
    let mut crossings = Vec::new();
    for (i, w) in path.windows(2).enumerate() {
        let (b0, b1) = (w[0], w[1]);
        for j in 1..=j_max {
            let (s0, s1) = (below(b0, j, 0), below(b1, j, 0));
            if s0 != s1 {
                crossings.push(Crossing {
                    interval: i,
                    beta_from: b0,
                    beta_to: b1,
                    beta_cross: j as f64,
                    j,
                    ell: 0,
                    delta: if s1 { 2 } else { -2 },
                });
            }
        }
    }
    Ok(FlowReport { samples, crossings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::gauss_legendre;

    #[test]
    fn round_sphere_low_modes() {
        let m = football_eigenvalues(1.0, 2.0).unwrap();
        let total: u32 = m.iter().map(|x| x.multiplicity).sum();
        assert_eq!(total, 4);
        assert_eq!(m[0].lambda, 0.0);
        assert!(m[1..].iter().all(|x| (x.lambda - 2.0).abs() < 1e-15));
    }

    #[test]
    fn count_formula() {
        for beta in [1.5, 2.5, 3.5, 4.25] {
            let c = football_count(beta).unwrap();
            assert_eq!(c.at_most, 2 + 2 * beta.floor() as u32, "β = {beta}");
        }
        let c = football_count(2.0).unwrap();
        assert_eq!((c.at_most, c.below), (6, 3));
    }

    #[test]
    fn cos_r_is_the_two_mode() {
        let f = football_eigenfunction(2.7, 0, 1).unwrap();
        assert_eq!(f.lambda, 2.0);
        let ratio = f.radial(0.3).unwrap() / 0.3f64.cos();
        for r in [0.1, 0.9, 2.0, 3.0] {
            assert!((f.radial(r).unwrap() / r.cos() - ratio).abs() < 1e-14);
        }
    }

    #[test]
    fn sin_profile_on_round_sphere() {
        let f = football_eigenfunction(1.0, 1, 0).unwrap();
        let ratio = f.radial(0.5).unwrap() / 0.5f64.sin();
        for r in [0.2, 1.0, 2.5] {
            assert!((f.radial(r).unwrap() / r.sin() - ratio).abs() < 1e-14);
        }
    }

    /// `∫∫ f g β sin r dr dθ` by composite Gauss–Legendre in `r`.
    fn inner(f: &FootballEigenfunction, g: &FootballEigenfunction) -> f64 {
        let rule = gauss_legendre(20);
        let panels = 64;
        let mut s = 0.0;
        for p in 0..panels {
            let a = std::f64::consts::PI * p as f64 / panels as f64;
            let b = std::f64::consts::PI * (p + 1) as f64 / panels as f64;
            s += rule.mapped(a, b).integrate(|r| {
                f.radial(r).unwrap() * g.radial(r).unwrap() * f.beta * r.sin()
            });
        }
        let ang = if f.j == 0 { 2.0 * std::f64::consts::PI } else { std::f64::consts::PI };
        s * ang
    }

    #[test]
    fn normalization_and_orthogonality() {
        for (beta, j) in [(1.5, 0), (1.5, 1), (2.7, 2), (0.5, 1)] {
            let fs: Vec<_> = (0..4).map(|l| football_eigenfunction(beta, j, l).unwrap()).collect();
            for a in 0..4 {
                for b in 0..4 {
                    let v = inner(&fs[a], &fs[b]);
                    let want = if a == b { 1.0 } else { 0.0 };
                    assert!((v - want).abs() < 1e-8, "β={beta} j={j} {a},{b}: {v}");
                }
            }
        }
    }

    #[test]
    fn profile_solves_radial_equation() {
        for (beta, j, ell) in [(1.5, 1, 2), (2.7, 3, 1), (0.5, 1, 0), (3.3, 0, 3)] {
            let f = football_eigenfunction(beta, j, ell).unwrap();
            let nu2 = (j as f64 / beta).powi(2);
            let h = 1e-4;
            let mut sup: f64 = 0.0;
            for k in 1..40 {
                let r = 0.2 + 2.7 * k as f64 / 40.0;
                let (u, du) = f.radial_with_derivative(r).unwrap();
                let up = f.radial(r + h).unwrap();
                let um = f.radial(r - h).unwrap();
                let d2 = (up - 2.0 * u + um) / (h * h);
                let res = -d2 - r.cos() / r.sin() * du + nu2 / r.sin().powi(2) * u - f.lambda * u;
                sup = sup.max(res.abs());
            }
            assert!(sup < 1e-5, "β={beta} j={j} ℓ={ell} residual {sup}");
        }
    }

    #[test]
    fn radial_oracle_round_sphere() {
        let ev = radial_sturm_liouville_extrapolated(1.0, 0, 256, 4).unwrap();
        for (l, v) in ev.iter().enumerate() {
            let want = (l * (l + 1)) as f64;
            assert!((v - want).abs() < 1e-6, "ℓ={l}: {v}");
        }
    }

    #[test]
    fn radial_oracle_fractional_order() {
        let ev = radial_sturm_liouville_extrapolated(1.5, 1, 256, 4).unwrap();
        for (l, v) in ev.iter().enumerate() {
            let want = football_lambda(1.5, 1, l as u32);
            assert!((v - want).abs() < 1e-6, "ℓ={l}: {v} vs {want}");
        }
        let ev = radial_sturm_liouville(0.5, 1, 2048).unwrap();
        assert!((ev[0] - 6.0).abs() < 1e-3);
    }

    #[test]
    fn triangle_examples() {
        let c = triangle_count(5.0).unwrap();
        assert_eq!((c.at_most, c.below), (5, 4));
        let t = triangle_dirichlet_eigenvalues(1.0, 2.0).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].lambda, 2.0);
        let t = triangle_dirichlet_eigenvalues(2.5, 1.99).unwrap();
        assert_eq!(t.iter().map(|m| m.j).collect::<Vec<_>>(), vec![1, 2]);
    }

    #[test]
    fn flow_crossings() {
        let r = eigenvalue_flow(&linear_path(1.5, 2.5, 11), 6).unwrap();
        assert_eq!(r.crossings.len(), 1);
        assert_eq!((r.crossings[0].j, r.crossings[0].beta_cross), (2, 2.0));
        assert!(eigenvalue_flow(&[1.7; 5], 6).unwrap().crossings.is_empty());
        let r = eigenvalue_flow(&linear_path(0.5, 3.5, 31), 6).unwrap();
        let js: Vec<u32> = r.crossings.iter().map(|c| c.j).collect();
        assert_eq!(js, vec![1, 2, 3]);
        let r = eigenvalue_flow(&linear_path(3.5, 1.5, 9), 6).unwrap();
        assert!(r.crossings.iter().all(|c| c.delta == -2));
    }

    #[test]
    fn richardson_recovers_limit() {
        let hs = [0.1, 0.05, 0.025];
        let f = |h: f64| 3.0 + 2.0 * h * h - h.powf(2.6);
        let v: Vec<f64> = hs.iter().map(|h| f(*h)).collect();
        assert!((richardson(&hs, &v, &[2.0, 2.6]).unwrap() - 3.0).abs() < 1e-13);
    }
}
