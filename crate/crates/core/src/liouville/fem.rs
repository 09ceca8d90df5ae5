//! Piecewise-linear finite elements on a cone-adapted triangulation.
//!
//! The conformal factor is split as `u = Σ(β_j − 1) log|x − p_j| + w` with the
//! log taken in the ambient (chordal) distance, so only `w` is discretized.
//! The factor `ρ = Π|x − p_j|^{2β_j−2}` is integrated exactly at cone vertices
//! by a Duffy map with Gauss–Jacobi nodes in the radial direction.

use std::collections::HashMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::mesh::{cross, dot, norm, normalize, scale, sub, Surface, TriMesh};
use super::sparse::Csr;
use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, radial_jacobi, triangle_rule7};

/// One quadrature node with `ρ` folded into its weights.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct QuadPoint {
    pub tri: u32,
    pub lam: [f64; 3],
    /// Weight on the flat triangle times `ρ` at the flat point.
    pub flat: f64,
    /// Weight on the surface itself (radially projected for the sphere)
    /// times `ρ` at the projected point.
    pub surface: f64,
}

/// Stiffness, lumped areas and quadrature for a mesh and a set of cones.
#[derive(Clone, Debug)]
pub struct Discretization {
    pub mesh: TriMesh,
    pub beta: Vec<f64>,
    pub stiffness: Csr,
    /// `Σ |T|/3` over the star of each vertex.
    pub m0: Vec<f64>,
    pub quad: Vec<QuadPoint>,
    locator: OnceLock<Locator>,
}

/// Radial and angular node counts of the Duffy rule.
const DUFFY_NODES: (usize, usize) = (10, 10);

pub(crate) fn rho_at(x: [f64; 3], points: &[[f64; 3]], beta: &[f64]) -> f64 {
    points
        .iter()
        .zip(beta)
        .map(|(p, b)| norm(sub(x, *p)).powf(2.0 * b - 2.0))
        .product()
}

impl Discretization {
    pub fn new(mesh: TriMesh, beta: &[f64]) -> Result<Self> {
        let n = mesh.n_vertices();
        let points: Vec<[f64; 3]> = mesh.cone_vertex.iter().map(|&v| mesh.vertices[v]).collect();
        let mut trip = Vec::with_capacity(mesh.triangles.len() * 9);
        let mut m0 = vec![0.0; n];
        let mut quad = Vec::with_capacity(mesh.triangles.len() * 7);
        let rule7 = triangle_rule7();
        for (t, tri) in mesh.triangles.iter().enumerate() {
            let x = [mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]];
            let area = 0.5 * norm(cross(sub(x[1], x[0]), sub(x[2], x[0])));
            if area <= 0.0 {
                return Err(Error::InvalidInput(format!("degenerate triangle {t}")));
            }
            for a in 0..3 {
                let ea = sub(x[(a + 2) % 3], x[(a + 1) % 3]);
                for b in 0..3 {
                    let eb = sub(x[(b + 2) % 3], x[(b + 1) % 3]);
                    trip.push((tri[a], tri[b], dot(ea, eb) / (4.0 * area)));
                }
                m0[tri[a]] += area / 3.0;
            }
            let cones: Vec<usize> = (0..3).filter(|&a| mesh.cone_at(tri[a]).is_some()).collect();
            if cones.len() > 1 {
                return Err(Error::InvalidInput(
                    "two cone points share a triangle; refine the mesh".into(),
                ));
            }
            let jac = surface_jacobian(mesh.surface, &x);
            let mut push = |lam: [f64; 3], w_flat: f64, sing: Option<(usize, f64)>| {
                let xf = combo(&x, lam);
                let (xs, js) = match mesh.surface {
                    Surface::Sphere => (normalize(xf), jac.1 / norm(xf).powi(3)),
                    Surface::Plane => (xf, 1.0),
                };
                // With a cone vertex at a, the weight already carries s^{2β−2}.
                let (rf, rs) = match sing {
                    None => (rho_at(xf, &points, beta), rho_at(xs, &points, beta)),
                    Some((cone, s)) => {
                        let p = points[cone];
                        let b = beta[cone];
                        let others = |y: [f64; 3]| -> f64 {
                            points
                                .iter()
                                .zip(beta)
                                .enumerate()
                                .filter(|(k, _)| *k != cone)
                                .map(|(_, (q, bb))| norm(sub(y, *q)).powf(2.0 * bb - 2.0))
                                .product()
                        };
                        (
                            (norm(sub(xf, p)) / s).powf(2.0 * b - 2.0) * others(xf),
                            (norm(sub(xs, p)) / s).powf(2.0 * b - 2.0) * others(xs),
                        )
                    }
                };
                quad.push(QuadPoint {
                    tri: t as u32,
                    lam,
                    flat: w_flat * rf,
                    surface: w_flat * js * rs,
                });
            };
            if let Some(&a) = cones.first() {
                let b = beta[mesh.cone_at(tri[a]).unwrap()];
                let cone = mesh.cone_at(tri[a]).unwrap();
                let rs = radial_jacobi(DUFFY_NODES.0, 2.0 * b - 1.0);
                let rt = gauss_legendre(DUFFY_NODES.1).mapped(0.0, 1.0);
                for (s, ws) in rs.nodes.iter().zip(&rs.weights) {
                    for (tt, wt) in rt.nodes.iter().zip(&rt.weights) {
                        let mut lam = [0.0; 3];
                        lam[a] = 1.0 - s;
                        lam[(a + 1) % 3] = s * (1.0 - tt);
                        lam[(a + 2) % 3] = s * tt;
                        push(lam, 2.0 * area * ws * wt, Some((cone, *s)));
                    }
                }
            } else if near_cone(&x, &points, area) {
                // Subdivide twice and use the 7-point rule on each piece.
                for sub_lam in subdivided_rule(&rule7, 2) {
                    push(sub_lam.0, area * sub_lam.1, None);
                }
            } else {
                for (lam, w) in &rule7 {
                    push(*lam, area * w, None);
                }
            }
        }
        Ok(Self {
            stiffness: Csr::from_triplets(n, &trip),
            mesh,
            beta: beta.to_vec(),
            m0,
            quad,
            locator: OnceLock::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.mesh.n_vertices()
    }

    fn value_at(&self, q: &QuadPoint, w: &[f64]) -> f64 {
        let tri = self.mesh.triangles[q.tri as usize];
        q.lam[0] * w[tri[0]] + q.lam[1] * w[tri[1]] + q.lam[2] * w[tri[2]]
    }

    /// `∫ ρ e^{2w} ψ_i` on the flat mesh.
    pub fn load(&self, w: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n()];
        for q in &self.quad {
            let e = (2.0 * self.value_at(q, w)).exp() * q.flat;
            let tri = self.mesh.triangles[q.tri as usize];
            for a in 0..3 {
                out[tri[a]] += e * q.lam[a];
            }
        }
        out
    }

    /// `∫ ρ e^{2w} ψ_i ψ_k` on the flat mesh.
    pub fn weighted_mass(&self, w: &[f64]) -> Csr {
        let mut trip = Vec::with_capacity(self.mesh.triangles.len() * 9);
        let mut acc = vec![[0.0f64; 9]; self.mesh.triangles.len()];
        for q in &self.quad {
            let e = (2.0 * self.value_at(q, w)).exp() * q.flat;
            let m = &mut acc[q.tri as usize];
            for a in 0..3 {
                for b in 0..3 {
                    m[3 * a + b] += e * q.lam[a] * q.lam[b];
                }
            }
        }
        for (t, m) in acc.iter().enumerate() {
            let tri = self.mesh.triangles[t];
            for a in 0..3 {
                for b in 0..3 {
                    trip.push((tri[a], tri[b], m[3 * a + b]));
                }
            }
        }
        Csr::from_triplets(self.n(), &trip)
    }

    /// `∫ ρ` over the flat mesh.
    pub fn rho_integral(&self) -> f64 {
        self.quad.iter().map(|q| q.flat).sum()
    }

    /// Area `∫ ρ e^{2w}` measured on the true surface.
    pub fn surface_area(&self, w: &[f64]) -> f64 {
        self.quad
            .iter()
            .map(|q| (2.0 * self.value_at(q, w)).exp() * q.surface)
            .sum()
    }

    /// Value of the P1 interpolant at a surface point, found by radial
    /// projection onto the triangles of the sphere.
    pub fn interpolate(&self, w: &[f64], x: [f64; 3]) -> Option<f64> {
        let loc = self.locator.get_or_init(|| Locator::new(&self.mesh));
        let (t, lam) = loc.locate(&self.mesh, x)?;
        let tri = self.mesh.triangles[t];
        Some(lam[0] * w[tri[0]] + lam[1] * w[tri[1]] + lam[2] * w[tri[2]])
    }

    /// Lumped metric mass `∫ ρ e^{2w} ψ_i`, identical to [`Self::load`].
    pub fn lumped_metric_mass(&self, w: &[f64]) -> Vec<f64> {
        self.load(w)
    }
}

/// Uniform bucket grid over triangle bounding boxes.
#[derive(Clone, Debug)]
struct Locator {
    cell: f64,
    buckets: HashMap<[i64; 3], Vec<u32>>,
}

impl Locator {
    fn new(mesh: &TriMesh) -> Self {
        let cell = mesh.h.max(1e-6);
        // Sphere points sit off the chord planes by at most the sagitta.
        let pad = 0.5 * mesh.h * mesh.h + 1e-12;
        let key = |v: f64| (v / cell).floor() as i64;
        let mut buckets: HashMap<[i64; 3], Vec<u32>> = HashMap::new();
        for (t, tri) in mesh.triangles.iter().enumerate() {
            let mut lo = [f64::INFINITY; 3];
            let mut hi = [f64::NEG_INFINITY; 3];
            for &v in tri {
                for k in 0..3 {
                    lo[k] = lo[k].min(mesh.vertices[v][k] - pad);
                    hi[k] = hi[k].max(mesh.vertices[v][k] + pad);
                }
            }
            for i in key(lo[0])..=key(hi[0]) {
                for j in key(lo[1])..=key(hi[1]) {
                    for k in key(lo[2])..=key(hi[2]) {
                        buckets.entry([i, j, k]).or_default().push(t as u32);
                    }
                }
            }
        }
        Self { cell, buckets }
    }

    fn locate(&self, mesh: &TriMesh, x: [f64; 3]) -> Option<(usize, [f64; 3])> {
        let k = [0, 1, 2].map(|i| (x[i] / self.cell).floor() as i64);
        let cands = self.buckets.get(&k)?;
        let mut best: Option<(usize, [f64; 3], f64)> = None;
        for &t in cands {
            let tri = mesh.triangles[t as usize];
            let a = mesh.vertices[tri[0]];
            let b = mesh.vertices[tri[1]];
            let c = mesh.vertices[tri[2]];
            let n = cross(sub(b, a), sub(c, a));
            let y = match mesh.surface {
                Surface::Plane => x,
                Surface::Sphere => {
                    let denom = dot(n, x);
                    if denom <= 0.0 {
                        continue;
                    }
                    scale(x, dot(n, a) / denom)
                }
            };
            let nn = dot(n, n);
            let lam = [
                dot(n, cross(sub(b, y), sub(c, y))) / nn,
                dot(n, cross(sub(c, y), sub(a, y))) / nn,
                dot(n, cross(sub(a, y), sub(b, y))) / nn,
            ];
            let worst = lam[0].min(lam[1]).min(lam[2]);
            if best.as_ref().is_none_or(|bst| worst > bst.2) {
                best = Some((t as usize, lam, worst));
            }
        }
        let (t, lam, worst) = best?;
        (worst > -1e-9).then_some((t, lam))
    }
}

fn combo(x: &[[f64; 3]; 3], lam: [f64; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for a in 0..3 {
        for k in 0..3 {
            out[k] += lam[a] * x[a][k];
        }
    }
    out
}

/// For the sphere, the distance from the origin to the triangle's plane; the
/// radial projection has area element `d / |x|³`.
fn surface_jacobian(surface: Surface, x: &[[f64; 3]; 3]) -> (f64, f64) {
    match surface {
        Surface::Plane => (1.0, 1.0),
        Surface::Sphere => {
            let mut n = normalize(cross(sub(x[1], x[0]), sub(x[2], x[0])));
            if dot(n, x[0]) < 0.0 {
                n = scale(n, -1.0);
            }
            (1.0, dot(n, x[0]))
        }
    }
}

fn near_cone(x: &[[f64; 3]; 3], points: &[[f64; 3]], area: f64) -> bool {
    let diam = norm(sub(x[0], x[1]))
        .max(norm(sub(x[1], x[2])))
        .max(norm(sub(x[2], x[0])))
        .max(area.sqrt());
    points
        .iter()
        .any(|p| x.iter().map(|v| norm(sub(*v, *p))).fold(f64::INFINITY, f64::min) < 4.0 * diam)
}

/// The rule applied on each of the `4^levels` congruent sub-triangles.
fn subdivided_rule(rule: &[([f64; 3], f64)], levels: u32) -> Vec<([f64; 3], f64)> {
    let mut tris: Vec<[[f64; 3]; 3]> = vec![[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]];
    for _ in 0..levels {
        let mut next = Vec::with_capacity(tris.len() * 4);
        for [a, b, c] in tris {
            let m = |p: [f64; 3], q: [f64; 3]| [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1]), 0.5 * (p[2] + q[2])];
            let (ab, bc, ca) = (m(a, b), m(b, c), m(c, a));
            next.extend([[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
        }
        tris = next;
    }
    let share = 1.0 / tris.len() as f64;
    let mut out = Vec::with_capacity(tris.len() * rule.len());
    for t in &tris {
        for (l, w) in rule {
            out.push((combo(t, *l), w * share));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::mesh::{build_mesh, MeshSpec};
    use super::*;

    #[test]
    fn smooth_sphere_area_and_stiffness_kernel() {
        let mesh = build_mesh(Surface::Sphere, &[], &MeshSpec::default()).unwrap();
        let d = Discretization::new(mesh, &[]).unwrap();
        let area = d.surface_area(&vec![0.0; d.n()]);
        assert!((area - 4.0 * std::f64::consts::PI).abs() < 1e-9, "{area}");
        let s1 = d.stiffness.matvec(&vec![1.0; d.n()]);
        assert!(s1.iter().all(|v| v.abs() < 1e-12));
        assert!(d.stiffness.asymmetry() < 1e-14);
    }

    #[test]
    fn cone_weight_integral_converges() {
        // ∫_{S²} |x − p|^{2β−2} dA = π · 2^{2β} / β for the unit sphere.
        let beta = 0.6;
        let exact = std::f64::consts::PI * 2f64.powf(2.0 * beta) / beta;
        let p = [0.0, 0.0, 1.0];
        let mut errs = Vec::new();
        for refinement in [2, 3] {
            let spec = MeshSpec {
                refinement,
                ..MeshSpec::default()
            };
            let mesh = build_mesh(Surface::Sphere, &[p], &spec).unwrap();
            let d = Discretization::new(mesh, &[beta]).unwrap();
            let area = d.surface_area(&vec![0.0; d.n()]);
            errs.push((area - exact).abs());
        }
        assert!(errs[1] < 1e-8, "{errs:?}");
    }

    #[test]
    fn interpolation_reproduces_linear_functions() {
        let mesh = build_mesh(Surface::Sphere, &[[0.0, 0.0, 1.0]], &MeshSpec::default()).unwrap();
        let d = Discretization::new(mesh, &[0.7]).unwrap();
        let w: Vec<f64> = d.mesh.vertices.iter().map(|v| 2.0 * v[0] - v[2]).collect();
        for x in [[0.3, 0.4, 0.5], [0.0, 0.0, 1.0], [-1.0, 0.2, -0.1], [0.01, -0.02, 1.0]] {
            let xs = normalize(x);
            let val = d.interpolate(&w, xs).unwrap();
            // Exact on the chord plane; the radial offset is second order.
            assert!((val - (2.0 * xs[0] - xs[2])).abs() < 5e-3, "{x:?}");
        }
    }

    #[test]
    fn disk_flat_cone_area() {
        // ∫_{|z|<1} |z|^{2β−2} = π/β.
        let beta = 1.7;
        let mesh = build_mesh(Surface::Plane, &[[0.0, 0.0, 0.0]], &MeshSpec::default()).unwrap();
        let d = Discretization::new(mesh, &[beta]).unwrap();
        let a = d.surface_area(&vec![0.0; d.n()]);
        // The polygonal boundary loses O(h²) area.
        assert!((a - std::f64::consts::PI / beta).abs() < 2e-2, "{a}");
    }
}
