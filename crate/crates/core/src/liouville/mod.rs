//! Constant-curvature conic metrics `e^{2u} h₀` by Newton's method.
//!
//! The conformal factor is written `u = Σ(β_j − 1) log|x − p_j| + w` with the
//! chordal distance, and only the bounded part `w` is discretized. General
//! configurations use P1 elements on a graded triangulation. Antipodal pairs
//! with equal angles are solved on a radial grid, which avoids the kernel
//! that the rotations and dilations of a football put into the 2D Jacobian.

pub mod axisym;
pub mod eigen;
pub mod fem;
pub mod friedrichs;
pub mod mesh;
mod newton;
pub mod projected;
pub mod sparse;

use serde::{Deserialize, Serialize};

use crate::angles::{subcritical_check, troyanov_check, AngleVector};
use crate::error::{Error, Result};
use axisym::{AxisymGrid, AxisymSystem};
use fem::Discretization;
use mesh::{build_mesh, dot, norm, normalize, sub, MeshSpec, Surface};
pub use newton::NewtonReport;
use newton::{newton, Dofs, NodalSystem};
use sparse::Csr;

/// Stopping tolerance on `max |F_i| / m0_i`.
pub const NEWTON_TOL: f64 = 1e-9;
pub const NEWTON_MAX_ITER: usize = 60;
/// Default cutoff radius of [`singular_background`].
pub const CUTOFF_RADIUS: f64 = 0.2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Background {
    /// Unit sphere with its round metric of area `4π`.
    Sphere,
    /// Flat unit disk with Dirichlet data on the boundary circle.
    Disk,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConicProblem {
    pub background: Background,
    /// Unit vectors for the sphere; `[x, y, 0]` inside the unit disk.
    pub points: Vec<[f64; 3]>,
    pub beta: Vec<f64>,
    /// Target curvature, one of −1, 0, 1.
    pub curvature: i32,
    /// Constant Dirichlet value of `u` on the disk boundary.
    #[serde(default)]
    pub boundary_value: f64,
}

/// Which existence regime a positive-curvature sphere problem falls in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Regime {
    pub troyanov: bool,
    pub subcritical: bool,
    pub axisymmetric: bool,
}

impl ConicProblem {
    /// Sphere problem; points are normalized onto the unit sphere.
    pub fn sphere(points: Vec<[f64; 3]>, beta: Vec<f64>, curvature: i32) -> Result<Self> {
        let p = Self {
            background: Background::Sphere,
            points: points.into_iter().map(normalize).collect(),
            beta,
            curvature,
            boundary_value: 0.0,
        };
        p.validate()?;
        Ok(p)
    }

    /// Disk problem from planar positions.
    pub fn disk(points: Vec<[f64; 2]>, beta: Vec<f64>, curvature: i32) -> Result<Self> {
        let p = Self {
            background: Background::Disk,
            points: points.into_iter().map(|q| [q[0], q[1], 0.0]).collect(),
            beta,
            curvature,
            boundary_value: 0.0,
        };
        p.validate()?;
        Ok(p)
    }

    /// Two antipodal cone points of equal angle on the sphere.
    pub fn football(beta: f64) -> Result<Self> {
        Self::sphere(vec![[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]], vec![beta, beta], 1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points.len() != self.beta.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} points but {} angles",
                self.points.len(),
                self.beta.len()
            )));
        }
        if !(-1..=1).contains(&self.curvature) {
            return Err(Error::InvalidInput(format!(
                "curvature must be −1, 0 or 1, got {}",
                self.curvature
            )));
        }
        if let Some(b) = self.beta.iter().find(|b| !(b.is_finite() && **b > 0.0)) {
            return Err(Error::InvalidInput(format!("cone parameter must be positive, got {b}")));
        }
        for p in &self.points {
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput("non-finite cone position".into()));
            }
            if self.background == Background::Disk && (p[0].hypot(p[1]) >= 1.0 || p[2] != 0.0) {
                return Err(Error::InvalidInput(format!("{p:?} is not inside the unit disk")));
            }
        }
        for i in 0..self.points.len() {
            for j in i + 1..self.points.len() {
                if norm(sub(self.points[i], self.points[j])) < 1e-9 {
                    return Err(Error::InvalidInput(format!("cone points {i} and {j} coincide")));
                }
            }
        }
        Ok(())
    }

    /// `χ(M) + Σ(β_j − 1)` with `χ = 2` for the sphere and `1` for the disk.
    pub fn chi(&self) -> f64 {
        let base = match self.background {
            Background::Sphere => 2.0,
            Background::Disk => 1.0,
        };
        base + self.beta.iter().map(|b| b - 1.0).sum::<f64>()
    }

    pub fn is_axisymmetric(&self) -> bool {
        self.background == Background::Sphere
            && self.points.len() == 2
            && norm(sub(self.points[0], mesh::scale(self.points[1], -1.0))) < 1e-12
            && (self.beta[0] - self.beta[1]).abs() < 1e-12
    }

    pub fn regime(&self) -> Regime {
        let av = AngleVector::sphere(self.beta.clone()).ok();
        let troyanov = match &av {
            Some(av) if self.background == Background::Sphere => {
                troyanov_check(av).unwrap_or(false)
            }
            _ => false,
        };
        let subcritical = self.background == Background::Sphere
            && av.as_ref().is_some_and(subcritical_check);
        Regime {
            troyanov,
            subcritical,
            axisymmetric: self.is_axisymmetric(),
        }
    }

    /// `2πχ / K` for closed surfaces with `K ≠ 0`.
    pub fn gauss_bonnet_area(&self) -> Option<f64> {
        (self.background == Background::Sphere && self.curvature != 0)
            .then(|| 2.0 * std::f64::consts::PI * self.chi() / self.curvature as f64)
    }

    fn surface(&self) -> Surface {
        match self.background {
            Background::Sphere => Surface::Sphere,
            Background::Disk => Surface::Plane,
        }
    }

    /// `Σ(β_j − 1) log|x − p_j|`.
    pub fn log_part(&self, x: [f64; 3]) -> f64 {
        self.points
            .iter()
            .zip(&self.beta)
            .map(|(p, b)| (b - 1.0) * norm(sub(x, *p)).ln())
            .sum()
    }
}

/// Discretization parameters for [`solve_liouville`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeshParams {
    pub base_level: usize,
    pub refinement: usize,
    pub grading_radius: Option<f64>,
    /// Elements between a pole and the equator on the radial grid.
    pub radial_cells: usize,
    /// Demand the radial solver; fails unless the problem is axisymmetric.
    pub axisymmetric: bool,
}

impl Default for MeshParams {
    fn default() -> Self {
        let m = MeshSpec::default();
        Self {
            base_level: m.base_level,
            refinement: m.refinement,
            grading_radius: m.grading_radius,
            radial_cells: 200,
            axisymmetric: false,
        }
    }
}

impl MeshParams {
    pub fn mesh_spec(&self) -> MeshSpec {
        MeshSpec {
            base_level: self.base_level,
            refinement: self.refinement,
            grading_radius: self.grading_radius,
        }
    }
}

/// The grid a solution lives on.
#[derive(Clone, Debug)]
pub enum MetricGrid {
    Triangulated(Box<Discretization>),
    /// Radial grid in the polar angle from `points[0]`.
    Radial(AxisymGrid),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveDiagnostics {
    pub area: f64,
    pub gauss_bonnet_area: Option<f64>,
    pub chi: f64,
    pub residual: f64,
    pub iterations: usize,
    /// Longest element before grading (triangles) or longest element (radial).
    pub h: f64,
    pub nodes: usize,
    pub regime: Regime,
}

/// A converged solution: `u = Σ(β_j − 1) log|x − p_j| + w`.
#[derive(Clone, Debug)]
pub struct DiscreteConicMetric {
    pub problem: ConicProblem,
    pub grid: MetricGrid,
    /// Nodal values of the bounded part.
    pub w: Vec<f64>,
    pub diagnostics: SolveDiagnostics,
}

/// Nonlinear residual on a triangulation.
pub(crate) struct FemSystem<'a> {
    pub disc: &'a Discretization,
    pub chi: f64,
    pub curvature: f64,
    pub background: Background,
}

impl NodalSystem for FemSystem<'_> {
    fn n(&self) -> usize {
        self.disc.n()
    }

    fn residual(&self, w: &[f64]) -> Vec<f64> {
        let mut f = self.disc.stiffness.matvec(w);
        let load = self.disc.load(w);
        let k0 = match self.background {
            Background::Sphere => 0.5 * self.chi,
            Background::Disk => 0.0,
        };
        for i in 0..f.len() {
            f[i] += k0 * self.disc.m0[i] - self.curvature * load[i];
        }
        f
    }

    fn jacobian(&self, w: &[f64]) -> Csr {
        self.disc
            .stiffness
            .combine(1.0, &self.disc.weighted_mass(w), -2.0 * self.curvature)
    }

    fn scale(&self) -> &[f64] {
        &self.disc.m0
    }
}

impl DiscreteConicMetric {
    /// Coefficients `β_j − 1` of the logarithmic part, in point order.
    pub fn singular_part(&self) -> Vec<f64> {
        self.problem.beta.iter().map(|b| b - 1.0).collect()
    }

    pub fn h(&self) -> f64 {
        self.diagnostics.h
    }

    /// The bounded part at a point of the surface.
    pub fn bounded_part(&self, x: [f64; 3]) -> Option<f64> {
        match &self.grid {
            MetricGrid::Radial(g) => {
                let s = dot(normalize(x), self.problem.points[0]).clamp(-1.0, 1.0).acos();
                Some(g.eval(&self.w, s))
            }
            MetricGrid::Triangulated(d) => d.interpolate(&self.w, x),
        }
    }

    /// `u` at a point of the surface away from the cone points.
    pub fn conformal_factor(&self, x: [f64; 3]) -> Option<f64> {
        let x = match self.problem.background {
            Background::Sphere => normalize(x),
            Background::Disk => x,
        };
        Some(self.problem.log_part(x) + self.bounded_part(x)?)
    }

    /// Node positions with `w` and `u` (infinite at cone points).
    pub fn samples(&self) -> Vec<([f64; 3], f64, f64)> {
        let pos: Vec<[f64; 3]> = match &self.grid {
            MetricGrid::Triangulated(d) => d.mesh.vertices.clone(),
            MetricGrid::Radial(g) => {
                let (e1, e2) = frame(self.problem.points[0]);
                let p = self.problem.points[0];
                g.nodes
                    .iter()
                    .map(|s| {
                        let (sn, cs) = s.sin_cos();
                        [0, 1, 2].map(|k| cs * p[k] + sn * e1[k] + 0.0 * e2[k])
                    })
                    .collect()
            }
        };
        pos.into_iter()
            .zip(&self.w)
            .map(|(x, w)| (x, *w, self.problem.log_part(x) + w))
            .collect()
    }
}

/// An orthonormal pair perpendicular to the unit vector `p`.
pub(crate) fn frame(p: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let a = if p[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let e1 = normalize(sub(a, mesh::scale(p, dot(a, p))));
    let e2 = mesh::cross(p, e1);
    (e1, e2)
}

/// Solves `Δ_{h₀} u + K_{h₀} − K e^{2u} = 0` with the prescribed cone
/// singularities, to a scaled nodal residual below [`NEWTON_TOL`].
pub fn solve_liouville(problem: &ConicProblem, params: &MeshParams) -> Result<DiscreteConicMetric> {
    problem.validate()?;
    let regime = problem.regime();
    let chi = problem.chi();
    let k = problem.curvature as f64;
    if problem.background == Background::Sphere {
        if problem.curvature == 0 && chi.abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "a flat metric on the sphere needs χ = 0, got {chi}"
            )));
        }
        if (problem.curvature as f64) * chi < 0.0 || (problem.curvature != 0 && chi == 0.0) {
            return Err(Error::InvalidInput(format!(
                "curvature {} is incompatible with χ = {chi}",
                problem.curvature
            )));
        }
        if problem.curvature == 1 && !(regime.axisymmetric || regime.subcritical) {
            return Err(Error::InvalidInput(
                "positive curvature is supported for subcritical or axisymmetric problems only".into(),
            ));
        }
    }
    if params.axisymmetric && !regime.axisymmetric {
        return Err(Error::InvalidInput(
            "the radial solver needs two antipodal points with equal angles".into(),
        ));
    }
    if regime.axisymmetric {
        let grid = AxisymGrid::new(problem.beta[0], params.radial_cells)?;
        let sys = AxisymSystem { grid: &grid, chi, curvature: k };
        // Equatorial symmetry removes the kernel of the full Jacobian.
        let n = grid.n();
        let half = n / 2;
        let dofs = Dofs {
            map: (0..n).map(|i| Some(i.min(n - 1 - i))).collect(),
            n_red: half + 1,
        };
        let w0 = constant_guess(chi, k, grid.m0.iter().sum(), grid.mrho.iter().sum());
        let (w, rep) = newton(&sys, vec![w0; n], &dofs, NEWTON_TOL, NEWTON_MAX_ITER)?;
        let diagnostics = SolveDiagnostics {
            area: grid.area(&w),
            gauss_bonnet_area: problem.gauss_bonnet_area(),
            chi,
            residual: rep.residual,
            iterations: rep.iterations,
            h: grid.h(),
            nodes: n,
            regime,
        };
        return Ok(DiscreteConicMetric {
            problem: problem.clone(),
            grid: MetricGrid::Radial(grid),
            w,
            diagnostics,
        });
    }
    let mesh = build_mesh(problem.surface(), &problem.points, &params.mesh_spec())?;
    let disc = Discretization::new(mesh, &problem.beta)?;
    let sys = FemSystem {
        disc: &disc,
        chi,
        curvature: k,
        background: problem.background,
    };
    let n = disc.n();
    let (w, rep) = match problem.background {
        Background::Sphere if problem.curvature == 0 => {
            // S w = 0: a constant, fixed by the round area.
            let c = 0.5 * (4.0 * std::f64::consts::PI / disc.surface_area(&vec![0.0; n])).ln();
            (vec![c; n], NewtonReport { iterations: 0, residual: 0.0 })
        }
        Background::Sphere => {
            let c = constant_guess(chi, k, disc.m0.iter().sum(), disc.rho_integral());
            newton(&sys, vec![c; n], &Dofs::all(n), NEWTON_TOL, NEWTON_MAX_ITER)?
        }
        Background::Disk => {
            let mut w0 = vec![0.0; n];
            for (i, on) in disc.mesh.boundary.iter().enumerate() {
                if *on {
                    w0[i] = problem.boundary_value - problem.log_part(disc.mesh.vertices[i]);
                }
            }
            let dofs = Dofs::without(&disc.mesh.boundary);
            newton(&sys, w0, &dofs, NEWTON_TOL, NEWTON_MAX_ITER)?
        }
    };
    let diagnostics = SolveDiagnostics {
        area: disc.surface_area(&w),
        gauss_bonnet_area: problem.gauss_bonnet_area(),
        chi,
        residual: rep.residual,
        iterations: rep.iterations,
        h: disc.mesh.h,
        nodes: n,
        regime,
    };
    Ok(DiscreteConicMetric {
        problem: problem.clone(),
        grid: MetricGrid::Triangulated(Box::new(disc)),
        w,
        diagnostics,
    })
}

/// Constant `w` satisfying the discrete Gauss–Bonnet balance
/// `(χ/2) Σ m0 = K e^{2c} ∫ ρ`.
fn constant_guess(chi: f64, k: f64, m0_total: f64, rho_total: f64) -> f64 {
    let ratio = chi * m0_total / (2.0 * k * rho_total);
    if ratio > 0.0 && ratio.is_finite() {
        0.5 * ratio.ln()
    } else {
        0.0
    }
}

/// Places the bounded part of the exact football factor on a triangulation
/// of the problem's sphere, for comparisons against the 2D discretization.
pub fn football_on_mesh(beta: f64, params: &MeshParams) -> Result<DiscreteConicMetric> {
    let problem = ConicProblem::football(beta)?;
    let mesh = build_mesh(Surface::Sphere, &problem.points, &params.mesh_spec())?;
    let disc = Discretization::new(mesh, &problem.beta)?;
    let w: Vec<f64> = disc
        .mesh
        .vertices
        .iter()
        .map(|x| axisym::football_w(beta, x[2].clamp(-1.0, 1.0).acos()))
        .collect();
    let diagnostics = SolveDiagnostics {
        area: disc.surface_area(&w),
        gauss_bonnet_area: problem.gauss_bonnet_area(),
        chi: problem.chi(),
        residual: f64::NAN,
        iterations: 0,
        h: disc.mesh.h,
        nodes: disc.n(),
        regime: problem.regime(),
    };
    Ok(DiscreteConicMetric {
        problem,
        grid: MetricGrid::Triangulated(Box::new(disc)),
        w,
        diagnostics,
    })
}

/// The singular background field with logarithms cut off away from the
/// cone points.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SingularBackground {
    pub background: Background,
    pub points: Vec<[f64; 3]>,
    pub coefficients: Vec<f64>,
    /// Distance beyond which a point's term vanishes.
    pub cutoff: f64,
}

/// `C²` step: 1 on `[0, 1/2]`, 0 on `[1, ∞)`.
fn cutoff_profile(t: f64) -> f64 {
    if t <= 0.5 {
        1.0
    } else if t >= 1.0 {
        0.0
    } else {
        let x = 2.0 * (1.0 - t);
        x * x * x * (10.0 - 15.0 * x + 6.0 * x * x)
    }
}

impl SingularBackground {
    pub fn eval(&self, x: [f64; 3]) -> f64 {
        let surface = match self.background {
            Background::Sphere => Surface::Sphere,
            Background::Disk => Surface::Plane,
        };
        self.points
            .iter()
            .zip(&self.coefficients)
            .map(|(p, c)| {
                let d = mesh::surface_distance(surface, x, *p);
                let chi = cutoff_profile(d / self.cutoff);
                if chi == 0.0 {
                    0.0
                } else {
                    c * chi * norm(sub(x, *p)).ln()
                }
            })
            .sum()
    }
}

/// `Σ(β_j − 1) χ_j log|x − p_j|` with cutoffs of radius [`CUTOFF_RADIUS`],
/// shrunk when cone points are closer than one cutoff radius.
pub fn singular_background(problem: &ConicProblem) -> Result<SingularBackground> {
    problem.validate()?;
    let surface = problem.surface();
    let mut cutoff = CUTOFF_RADIUS;
    let mut sep = f64::INFINITY;
    for i in 0..problem.points.len() {
        for j in i + 1..problem.points.len() {
            sep = sep.min(mesh::surface_distance(surface, problem.points[i], problem.points[j]));
        }
    }
    if sep < cutoff {
        cutoff = 0.5 * sep;
        log::warn!("cone neighbourhoods overlap; cutoff radius reduced to {cutoff:.3e}");
    }
    Ok(SingularBackground {
        background: problem.background,
        points: problem.points.clone(),
        coefficients: problem.beta.iter().map(|b| b - 1.0).collect(),
        cutoff,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_background_vanishes() {
        let p = ConicProblem::sphere(vec![], vec![], 1).unwrap();
        let v = singular_background(&p).unwrap();
        assert_eq!(v.eval([0.0, 0.0, 1.0]), 0.0);
    }

    #[test]
    fn single_disk_point_is_log() {
        let p = ConicProblem::disk(vec![[0.0, 0.0]], vec![2.0], 0).unwrap();
        let v = singular_background(&p).unwrap();
        for r in [1e-3, 0.01, 0.09] {
            assert!((v.eval([r, 0.0, 0.0]) - r.ln()).abs() < 1e-15);
        }
        assert_eq!(v.eval([0.5, 0.0, 0.0]), 0.0);
    }

    #[test]
    fn background_matches_football_singularity() {
        let beta = 1.7;
        let p = ConicProblem::football(beta).unwrap();
        let v = singular_background(&p).unwrap();
        // The exact factor minus the background tends to a constant at the pole.
        let diff = |s: f64| {
            let x = [s.sin(), 0.0, s.cos()];
            axisym::football_w(beta, s) + (beta - 1.0) * (2.0 * s.sin()).ln() - v.eval(x)
        };
        assert!((diff(1e-4) - diff(1e-6)).abs() < 1e-6);
    }

    #[test]
    fn close_points_shrink_cutoff() {
        let p = ConicProblem::sphere(
            vec![[0.0, 0.0, 1.0], normalize([0.1, 0.0, 1.0]), [0.0, 0.0, -1.0]],
            vec![0.6, 0.6, 0.6],
            1,
        )
        .unwrap();
        assert!(singular_background(&p).unwrap().cutoff < 0.06);
    }

    #[test]
    fn rejects_bad_problems() {
        assert!(ConicProblem::sphere(vec![[0.0, 0.0, 1.0]], vec![0.5, 0.5], 1).is_err());
        assert!(ConicProblem::disk(vec![[1.2, 0.0]], vec![0.5], 0).is_err());
        assert!(ConicProblem::sphere(vec![[0.0, 0.0, 1.0]; 2], vec![0.5, 0.5], 1).is_err());
        let p = ConicProblem::sphere(vec![[0.0, 0.0, 1.0], [1.0, 0.0, 0.0]], vec![0.5, 0.7], 1).unwrap();
        assert!(solve_liouville(&p, &MeshParams::default()).is_err());
    }

    #[test]
    fn flat_cone_in_disk() {
        let beta = 1.6;
        let p = ConicProblem::disk(vec![[0.0, 0.0]], vec![beta], 0).unwrap();
        let m = solve_liouville(&p, &MeshParams::default()).unwrap();
        assert!(m.w.iter().all(|w| w.abs() < 1e-12));
        let u = m.conformal_factor([0.3, 0.2, 0.0]).unwrap();
        assert!((u - (beta - 1.0) * 0.3f64.hypot(0.2).ln()).abs() < 1e-12);
    }

    #[test]
    fn football_area_from_radial_solve() {
        for beta in [0.5, 1.5] {
            let p = ConicProblem::football(beta).unwrap();
            let m = solve_liouville(&p, &MeshParams::default()).unwrap();
            let target = 2.0 * std::f64::consts::PI * 2.0 * beta;
            assert!(m.diagnostics.residual < NEWTON_TOL);
            assert!((m.diagnostics.area - target).abs() < 1e-3 * target, "{beta}: {:?}", m.diagnostics);
        }
    }

    #[test]
    fn jacobian_matches_central_differences() {
        let s3 = 3f64.sqrt() / 2.0;
        let p = ConicProblem::sphere(vec![[1.0, 0.0, 0.0], [-0.5, s3, 0.0], [-0.5, -s3, 0.1]], vec![0.6; 3], 1).unwrap();
        let params = MeshParams {
            refinement: 1,
            ..MeshParams::default()
        };
        let m = solve_liouville(&p, &params).unwrap();
        let MetricGrid::Triangulated(d) = &m.grid else { unreachable!() };
        let sys = FemSystem {
            disc: d,
            chi: p.chi(),
            curvature: 1.0,
            background: Background::Sphere,
        };
        let dir: Vec<f64> = d.mesh.vertices.iter().map(|x| (3.0 * x[0]).sin() + x[1] * x[2]).collect();
        let t = 1e-4;
        let shift = |sgn: f64| -> Vec<f64> { m.w.iter().zip(&dir).map(|(a, b)| a + sgn * t * b).collect() };
        let fp = sys.residual(&shift(1.0));
        let fm = sys.residual(&shift(-1.0));
        let jd = sys.jacobian(&m.w).matvec(&dir);
        let num: f64 = fp.iter().zip(&fm).zip(&jd).map(|((a, b), c)| ((a - b) / (2.0 * t) - c).powi(2)).sum::<f64>().sqrt();
        let den: f64 = jd.iter().map(|c| c * c).sum::<f64>().sqrt();
        assert!(num < 1e-5 * den, "{num} {den}");
    }

    #[test]
    fn subcritical_triple_satisfies_gauss_bonnet() {
        let s3 = 3f64.sqrt() / 2.0;
        let p = ConicProblem::sphere(vec![[1.0, 0.0, 0.0], [-0.5, s3, 0.0], [-0.5, -s3, 0.1]], vec![0.6; 3], 1).unwrap();
        let m = solve_liouville(&p, &MeshParams::default()).unwrap();
        let target = 2.0 * std::f64::consts::PI * 0.8;
        assert!(m.diagnostics.residual < NEWTON_TOL);
        assert!((m.diagnostics.area - target).abs() < 5e-3, "{}", m.diagnostics.area);
        assert!(m.diagnostics.regime.subcritical);
    }
}
