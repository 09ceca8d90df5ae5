//! Triangulations of the sphere and the unit disk with cone points at
//! vertices and radial grading toward them.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which surface the vertices live on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Surface {
    /// Unit sphere in ℝ³; triangles are flat chords.
    Sphere,
    /// The plane `z = 0`, used for the unit disk.
    Plane,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TriMesh {
    pub surface: Surface,
    pub vertices: Vec<[f64; 3]>,
    pub triangles: Vec<[usize; 3]>,
    /// Vertex carrying each cone point, in problem order.
    pub cone_vertex: Vec<usize>,
    /// Dirichlet vertices (disk boundary); empty on the sphere.
    pub boundary: Vec<bool>,
    /// Longest edge before grading.
    pub h: f64,
}

pub(crate) fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn scale(a: [f64; 3], s: f64) -> [f64; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub(crate) fn normalize(a: [f64; 3]) -> [f64; 3] {
    scale(a, 1.0 / norm(a))
}

/// Distance measured along the surface: great-circle angle or planar length.
pub(crate) fn surface_distance(surface: Surface, a: [f64; 3], b: [f64; 3]) -> f64 {
    match surface {
        Surface::Sphere => {
            let c = cross(a, b);
            norm(c).atan2(dot(a, b))
        }
        Surface::Plane => norm(sub(a, b)),
    }
}

impl TriMesh {
    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        let (pa, pb, pc) = (self.vertices[a], self.vertices[b], self.vertices[c]);
        0.5 * norm(cross(sub(pb, pa), sub(pc, pa)))
    }

    /// Longest edge over the graded mesh.
    pub fn max_edge(&self) -> f64 {
        let mut m: f64 = 0.0;
        for t in &self.triangles {
            for k in 0..3 {
                m = m.max(norm(sub(self.vertices[t[k]], self.vertices[t[(k + 1) % 3]])));
            }
        }
        m
    }

    /// Triangles having `v` as a vertex.
    pub fn star(&self, v: usize) -> Vec<usize> {
        (0..self.triangles.len())
            .filter(|&t| self.triangles[t].contains(&v))
            .collect()
    }

    /// Cone index of a vertex, if any.
    pub fn cone_at(&self, v: usize) -> Option<usize> {
        self.cone_vertex.iter().position(|&c| c == v)
    }
}

struct Builder {
    vertices: Vec<[f64; 3]>,
    triangles: Vec<[usize; 3]>,
    on_boundary: Vec<bool>,
}

impl Builder {
    fn refine(&mut self, surface: Surface) {
        let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(self.triangles.len() * 4);
        let tris = std::mem::take(&mut self.triangles);
        for [a, b, c] in tris {
            let mut mid = |i: usize, j: usize, this: &mut Builder| -> usize {
                let key = (i.min(j), i.max(j));
                if let Some(&m) = cache.get(&key) {
                    return m;
                }
                let (p, q) = (this.vertices[i], this.vertices[j]);
                let mut m = scale([p[0] + q[0], p[1] + q[1], p[2] + q[2]], 0.5);
                let both = this.on_boundary[i] && this.on_boundary[j];
                match surface {
                    Surface::Sphere => m = normalize(m),
                    Surface::Plane if both => m = normalize(m),
                    Surface::Plane => {}
                }
                this.vertices.push(m);
                this.on_boundary.push(both);
                let id = this.vertices.len() - 1;
                cache.insert(key, id);
                id
            };
            let ab = mid(a, b, self);
            let bc = mid(b, c, self);
            let ca = mid(c, a, self);
            next.push([a, ab, ca]);
            next.push([ab, b, bc]);
            next.push([ca, bc, c]);
            next.push([ab, bc, ca]);
        }
        self.triangles = next;
    }
}

fn icosahedron() -> Builder {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let raw = [
        [-1.0, phi, 0.0],
        [1.0, phi, 0.0],
        [-1.0, -phi, 0.0],
        [1.0, -phi, 0.0],
        [0.0, -1.0, phi],
        [0.0, 1.0, phi],
        [0.0, -1.0, -phi],
        [0.0, 1.0, -phi],
        [phi, 0.0, -1.0],
        [phi, 0.0, 1.0],
        [-phi, 0.0, -1.0],
        [-phi, 0.0, 1.0],
    ];
    let triangles = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    Builder {
        vertices: raw.iter().map(|v| normalize(*v)).collect(),
        triangles,
        on_boundary: vec![false; 12],
    }
}

fn hexagon() -> Builder {
    let mut vertices = vec![[0.0, 0.0, 0.0]];
    for k in 0..6 {
        let a = std::f64::consts::PI / 3.0 * k as f64;
        vertices.push([a.cos(), a.sin(), 0.0]);
    }
    let triangles = (0..6).map(|k| [0, 1 + k, 1 + (k + 1) % 6]).collect();
    let mut on_boundary = vec![true; 7];
    on_boundary[0] = false;
    Builder {
        vertices,
        triangles,
        on_boundary,
    }
}

/// Mesh construction parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshSpec {
    /// Refinement levels before cone points are snapped to vertices.
    pub base_level: usize,
    /// Uniform refinements after snapping.
    pub refinement: usize,
    /// Grading radius; `None` picks `min(0.5, 0.4 · min separation)`.
    pub grading_radius: Option<f64>,
}

impl Default for MeshSpec {
    fn default() -> Self {
        Self {
            base_level: 2,
            refinement: 3,
            grading_radius: None,
        }
    }
}

/// `f(t) = 2t² − t³`: quadratic at the cone, `C¹`-matched to the identity at 1.
fn grading(t: f64) -> f64 {
    2.0 * t * t - t * t * t
}

/// Builds a graded triangulation with every cone point on its own vertex.
pub fn build_mesh(surface: Surface, points: &[[f64; 3]], spec: &MeshSpec) -> Result<TriMesh> {
    let min_sep = min_point_separation(surface, points);
    let radius = spec
        .grading_radius
        .unwrap_or_else(|| (0.4 * min_sep).min(0.5));
    if surface == Surface::Plane {
        for p in points {
            if p[0].hypot(p[1]) + radius >= 1.0 - 1e-9 {
                return Err(Error::InvalidInput(format!(
                    "cone point {p:?} too close to the disk boundary"
                )));
            }
        }
    }
    let mut level = spec.base_level;
    let (mut b, cone_vertex) = loop {
        let mut b = match surface {
            Surface::Sphere => icosahedron(),
            Surface::Plane => hexagon(),
        };
        for _ in 0..level {
            b.refine(surface);
        }
        let mut chosen: Vec<usize> = Vec::new();
        for p in points {
            let v = (0..b.vertices.len())
                .filter(|&v| !b.on_boundary[v])
                .min_by(|&x, &y| {
                    surface_distance(surface, b.vertices[x], *p)
                        .total_cmp(&surface_distance(surface, b.vertices[y], *p))
                })
                .expect("mesh has interior vertices");
            chosen.push(v);
        }
        let mut sorted = chosen.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() == chosen.len() {
            for (p, &v) in points.iter().zip(&chosen) {
                b.vertices[v] = *p;
            }
            break (b, chosen);
        }
        level += 1;
        if level > 8 {
            return Err(Error::InvalidInput("cone points are too close to separate".into()));
        }
    };
    for _ in 0..spec.refinement {
        b.refine(surface);
    }
    let mut mesh = TriMesh {
        surface,
        h: 0.0,
        vertices: b.vertices,
        triangles: b.triangles,
        cone_vertex,
        boundary: match surface {
            Surface::Sphere => Vec::new(),
            Surface::Plane => b.on_boundary,
        },
    };
    mesh.h = mesh.max_edge();
    grade(&mut mesh, points, radius);
    Ok(mesh)
}

fn min_point_separation(surface: Surface, points: &[[f64; 3]]) -> f64 {
    let mut m = f64::INFINITY;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            m = m.min(surface_distance(surface, points[i], points[j]));
        }
    }
    m
}

/// Pulls vertices within `radius` of a cone point toward it along geodesics.
fn grade(mesh: &mut TriMesh, points: &[[f64; 3]], radius: f64) {
    if radius <= 0.0 || points.is_empty() {
        return;
    }
    for v in 0..mesh.vertices.len() {
        if mesh.cone_at(v).is_some() || mesh.boundary.get(v).copied().unwrap_or(false) {
            continue;
        }
        let x = mesh.vertices[v];
        for p in points {
            let d = surface_distance(mesh.surface, x, *p);
            if d > 0.0 && d < radius {
                let target = radius * grading(d / radius);
                mesh.vertices[v] = match mesh.surface {
                    Surface::Plane => {
                        let dir = scale(sub(x, *p), 1.0 / d);
                        [p[0] + target * dir[0], p[1] + target * dir[1], 0.0]
                    }
                    Surface::Sphere => {
                        // Unit tangent at p toward x.
                        let t = normalize(sub(x, scale(*p, dot(x, *p))));
                        let (s, c) = target.sin_cos();
                        normalize([
                            c * p[0] + s * t[0],
                            c * p[1] + s * t[1],
                            c * p[2] + s * t[2],
                        ])
                    }
                };
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn icosphere_counts_and_area() {
        let spec = MeshSpec {
            base_level: 1,
            refinement: 2,
            grading_radius: Some(0.0),
        };
        let m = build_mesh(Surface::Sphere, &[], &spec).unwrap();
        assert_eq!(m.vertices.len(), 10 * 4usize.pow(3) + 2);
        assert_eq!(m.triangles.len(), 20 * 4usize.pow(3));
        let area: f64 = (0..m.triangles.len()).map(|t| m.triangle_area(t)).sum();
        assert!((area - 4.0 * std::f64::consts::PI).abs() < 0.1, "{area}");
        // Euler characteristic V − E + F = 2 with E = 3F/2.
        let v = m.vertices.len() as i64;
        let f = m.triangles.len() as i64;
        assert_eq!(v - 3 * f / 2 + f, 2);
    }

    #[test]
    fn cones_snap_to_distinct_vertices() {
        let pts = [[0.0, 0.0, 1.0], normalize([1.0, 0.2, 0.1]), normalize([-0.3, -1.0, 0.2])];
        let m = build_mesh(Surface::Sphere, &pts, &MeshSpec::default()).unwrap();
        for (p, &v) in pts.iter().zip(&m.cone_vertex) {
            assert!(norm(sub(m.vertices[v], *p)) < 1e-15);
        }
        for x in &m.vertices {
            assert!((norm(*x) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn grading_shrinks_cone_stars() {
        let pts = [[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]];
        let spec = MeshSpec::default();
        let graded = build_mesh(Surface::Sphere, &pts, &spec).unwrap();
        let flat = build_mesh(
            Surface::Sphere,
            &pts,
            &MeshSpec {
                grading_radius: Some(0.0),
                ..spec
            },
        )
        .unwrap();
        let star_size = |m: &TriMesh| {
            let v = m.cone_vertex[0];
            m.star(v).iter().map(|&t| m.triangle_area(t)).sum::<f64>()
        };
        assert!(star_size(&graded) < 0.3 * star_size(&flat));
        let min_area = (0..graded.triangles.len())
            .map(|t| graded.triangle_area(t))
            .fold(f64::INFINITY, f64::min);
        assert!(min_area > 0.0);
    }

    #[test]
    fn disk_boundary_on_circle() {
        let m = build_mesh(Surface::Plane, &[[0.0, 0.0, 0.0]], &MeshSpec::default()).unwrap();
        for (x, &b) in m.vertices.iter().zip(&m.boundary) {
            if b {
                assert!((x[0].hypot(x[1]) - 1.0).abs() < 1e-14);
            } else {
                assert!(x[0].hypot(x[1]) < 1.0);
            }
        }
        assert_eq!(m.cone_vertex, vec![0]);
    }
}
