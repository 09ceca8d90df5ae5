//! Rotationally symmetric solves on the sphere with antipodal cone points.
//!
//! With `s` the polar angle, the problem reduces to piecewise-linear elements
//! in `s` with weight `sin s`. The cone factor `ρ = (2 sin s)^{2β−2}` is the
//! product of the chordal distances to both poles, and every integral that
//! touches a pole uses a Gauss–Jacobi rule for `s^{2β−1}`.

use serde::{Deserialize, Serialize};

use super::newton::NodalSystem;
use super::sparse::Csr;
use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, radial_jacobi, Rule};

const QUAD_NODES: usize = 8;

/// Nodes on `[0, π]`, symmetric about the equator, graded toward both poles.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AxisymGrid {
    pub beta: f64,
    pub nodes: Vec<f64>,
    /// `∫ sin s ψ_i`.
    pub m0: Vec<f64>,
    /// `∫ ρ sin s ψ_i`.
    pub mrho: Vec<f64>,
    #[serde(skip)]
    stiffness: Option<Csr>,
}

/// Grading exponent `p` with nodes `∝ (i/m)^p` near each pole. The
/// interpolation error of `s^{2β}` weighted by `s^{2β−1}` on the first
/// element is `h^{4βp}`, so `p ≥ 1/(2β)` keeps it second order.
pub fn grading_exponent(beta: f64) -> f64 {
    (0.6 / beta).max(1.0)
}

impl AxisymGrid {
    /// `half_cells` elements between a pole and the equator.
    pub fn new(beta: f64, half_cells: usize) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::InvalidInput(format!("cone parameter must be positive, got {beta}")));
        }
        if half_cells < 4 {
            return Err(Error::InvalidInput("radial grid needs at least 4 cells".into()));
        }
        let p = grading_exponent(beta);
        let m = half_cells;
        let half: Vec<f64> = (0..=m)
            .map(|i| std::f64::consts::FRAC_PI_2 * (i as f64 / m as f64).powf(p))
            .collect();
        let mut nodes = half.clone();
        for i in (0..m).rev() {
            nodes.push(std::f64::consts::PI - half[i]);
        }
        let n = nodes.len();
        let mut grid = Self {
            beta,
            nodes,
            m0: vec![0.0; n],
            mrho: vec![0.0; n],
            stiffness: None,
        };
        let mut trip = Vec::with_capacity(4 * n);
        for e in 0..n - 1 {
            let (a, b) = (grid.nodes[e], grid.nodes[e + 1]);
            let h = b - a;
            let k = 2.0 * (0.5 * (a + b)).sin() * (0.5 * h).sin() / (h * h);
            trip.extend([(e, e, k), (e, e + 1, -k), (e + 1, e, -k), (e + 1, e + 1, k)]);
            let (m0a, m0b) = grid.element_moments(e, |s| s.sin());
            grid.m0[e] += m0a;
            grid.m0[e + 1] += m0b;
            let (ra, rb) = grid.weighted_moments(e, |_| 1.0);
            grid.mrho[e] += ra;
            grid.mrho[e + 1] += rb;
        }
        grid.stiffness = Some(Csr::from_triplets(n, &trip));
        Ok(grid)
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn stiffness(&self) -> &Csr {
        self.stiffness.as_ref().expect("assembled at construction")
    }

    /// Largest element length.
    pub fn h(&self) -> f64 {
        self.nodes.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    /// Node index mirrored through the equator.
    pub fn mirror(&self, i: usize) -> usize {
        self.n() - 1 - i
    }

    pub fn rho(&self, s: f64) -> f64 {
        (2.0 * s.sin()).powf(2.0 * self.beta - 2.0)
    }

    /// Rule for `∫_e f(s) ρ(s) sin s ds` as nodes and weights with the
    /// weight folded in.
    fn weighted_rule(&self, e: usize) -> Rule {
        let (a, b) = (self.nodes[e], self.nodes[e + 1]);
        let pi = std::f64::consts::PI;
        // Near a pole, ∫_a^b = ∫_0^b − ∫_0^a with rules exact for s^{2β−1}.
        if a < 0.5 * b {
            let mut r = self.pole_rule(b, false);
            if a > 0.0 {
                let inner = self.pole_rule(a, false);
                r.nodes.extend(inner.nodes);
                r.weights.extend(inner.weights.iter().map(|w| -w));
            }
            return r;
        }
        if pi - b < 0.5 * (pi - a) {
            let mut r = self.pole_rule(pi - a, true);
            if pi - b > 0.0 {
                let inner = self.pole_rule(pi - b, true);
                r.nodes.extend(inner.nodes);
                r.weights.extend(inner.weights.iter().map(|w| -w));
            }
            return r;
        }
        let r = gauss_legendre(QUAD_NODES).mapped(a, b);
        Rule {
            weights: r
                .nodes
                .iter()
                .zip(&r.weights)
                .map(|(s, w)| w * self.rho(*s) * s.sin())
                .collect(),
            nodes: r.nodes,
        }
    }

    /// `∫_0^len f ρ sin` from the north pole, or from the south pole when
    /// `south`, as a rule in `s`.
    fn pole_rule(&self, len: f64, south: bool) -> Rule {
        let c = 2.0 * self.beta - 1.0;
        // ρ sin s = 2^{2β−2} t^{2β−1} (sin t / t)^{2β−1} with t the pole distance.
        let smooth = |t: f64| if t == 0.0 { 1.0 } else { (t.sin() / t).powf(c) };
        let pre = 2f64.powf(2.0 * self.beta - 2.0) * len.powf(c + 1.0);
        let r = radial_jacobi(QUAD_NODES, c);
        Rule {
            nodes: r
                .nodes
                .iter()
                .map(|x| if south { std::f64::consts::PI - len * x } else { len * x })
                .collect(),
            weights: r
                .nodes
                .iter()
                .zip(&r.weights)
                .map(|(x, w)| w * pre * smooth(len * x))
                .collect(),
        }
    }

    fn hats(&self, e: usize, s: f64) -> (f64, f64) {
        let (a, b) = (self.nodes[e], self.nodes[e + 1]);
        let t = (s - a) / (b - a);
        (1.0 - t, t)
    }

    fn element_moments(&self, e: usize, f: impl Fn(f64) -> f64) -> (f64, f64) {
        let r = gauss_legendre(QUAD_NODES).mapped(self.nodes[e], self.nodes[e + 1]);
        let mut out = (0.0, 0.0);
        for (s, w) in r.nodes.iter().zip(&r.weights) {
            let (pa, pb) = self.hats(e, *s);
            out.0 += w * f(*s) * pa;
            out.1 += w * f(*s) * pb;
        }
        out
    }

    fn weighted_moments(&self, e: usize, f: impl Fn(f64) -> f64) -> (f64, f64) {
        let r = self.weighted_rule(e);
        let mut out = (0.0, 0.0);
        for (s, w) in r.nodes.iter().zip(&r.weights) {
            let (pa, pb) = self.hats(e, *s);
            out.0 += w * f(*s) * pa;
            out.1 += w * f(*s) * pb;
        }
        out
    }

    /// Piecewise-linear interpolant of nodal values.
    pub fn eval(&self, w: &[f64], s: f64) -> f64 {
        let s = s.clamp(0.0, std::f64::consts::PI);
        let e = match self.nodes.partition_point(|x| *x <= s) {
            0 => 0,
            k => (k - 1).min(self.n() - 2),
        };
        let (pa, pb) = self.hats(e, s);
        pa * w[e] + pb * w[e + 1]
    }

    /// Area `2π ∫ ρ e^{2w_h} sin s ds` of the interpolated metric.
    pub fn area(&self, w: &[f64]) -> f64 {
        let mut total = 0.0;
        for e in 0..self.n() - 1 {
            let r = self.weighted_rule(e);
            for (s, wt) in r.nodes.iter().zip(&r.weights) {
                let (pa, pb) = self.hats(e, *s);
                total += wt * (2.0 * (pa * w[e] + pb * w[e + 1])).exp();
            }
        }
        2.0 * std::f64::consts::PI * total
    }

    /// `∫ ψ_i ψ_k / sin s` restricted to nodes off the poles, for angular
    /// mode `j ≥ 1` where the poles carry Dirichlet conditions.
    pub fn angular_term(&self) -> Csr {
        let n = self.n();
        let mut trip = Vec::with_capacity(4 * n);
        for e in 0..n - 1 {
            let r = gauss_legendre(QUAD_NODES).mapped(self.nodes[e], self.nodes[e + 1]);
            let mut m = [0.0; 4];
            for (s, w) in r.nodes.iter().zip(&r.weights) {
                let (pa, pb) = self.hats(e, *s);
                let inv = w / s.sin();
                m[0] += inv * pa * pa;
                m[1] += inv * pa * pb;
                m[3] += inv * pb * pb;
            }
            let pole = |i: usize| i == 0 || i == n - 1;
            let entries = [(e, e, m[0]), (e, e + 1, m[1]), (e + 1, e, m[1]), (e + 1, e + 1, m[3])];
            for (i, k, v) in entries {
                if !pole(i) && !pole(k) {
                    trip.push((i, k, v));
                }
            }
        }
        Csr::from_triplets(n, &trip)
    }

    /// Lumped metric mass `ρ e^{2w} sin s ψ_i` at the nodes.
    pub fn metric_mass(&self, w: &[f64]) -> Vec<f64> {
        self.mrho.iter().zip(w).map(|(m, x)| m * (2.0 * x).exp()).collect()
    }

    /// Nodal samples of the bounded part of the exact football factor.
    pub fn exact_football(&self) -> Vec<f64> {
        self.nodes.iter().map(|&s| football_w(self.beta, s)).collect()
    }
}

/// Bounded part `u − (β−1) log(2 sin s)` of the football conformal factor
/// relative to the round metric,
/// `log β − (β−1) log 4 − log(sin^{2β}(s/2) + cos^{2β}(s/2))`.
pub fn football_w(beta: f64, s: f64) -> f64 {
    let (sn, cs) = (0.5 * s).sin_cos();
    beta.ln() - (beta - 1.0) * 4f64.ln() - (sn.abs().powf(2.0 * beta) + cs.abs().powf(2.0 * beta)).ln()
}

/// The reduced Liouville residual on an [`AxisymGrid`].
pub(crate) struct AxisymSystem<'a> {
    pub grid: &'a AxisymGrid,
    pub chi: f64,
    pub curvature: f64,
}

impl NodalSystem for AxisymSystem<'_> {
    fn n(&self) -> usize {
        self.grid.n()
    }

    fn residual(&self, w: &[f64]) -> Vec<f64> {
        let mut f = self.grid.stiffness().matvec(w);
        for i in 0..f.len() {
            f[i] += 0.5 * self.chi * self.grid.m0[i]
                - self.curvature * self.grid.mrho[i] * (2.0 * w[i]).exp();
        }
        f
    }

    fn jacobian(&self, w: &[f64]) -> Csr {
        let diag: Vec<(usize, usize, f64)> = (0..w.len())
            .map(|i| (i, i, -2.0 * self.curvature * self.grid.mrho[i] * (2.0 * w[i]).exp()))
            .collect();
        self.grid.stiffness().combine(1.0, &Csr::from_triplets(w.len(), &diag), 1.0)
    }

    fn scale(&self) -> &[f64] {
        &self.grid.m0
    }
}
