use kodama::{linkage, Method};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A node of the merge hierarchy. Singletons are implicit: `children` lists
/// only the subclusters with at least two members.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterNode {
    /// Zero-based point indices, sorted.
    pub members: Vec<usize>,
    /// Diameter of the member set.
    pub radius: f64,
    pub children: Vec<ClusterNode>,
}

impl ClusterNode {
    /// All nodes in pre-order.
    pub fn nodes(&self) -> Vec<&ClusterNode> {
        let mut out = vec![self];
        for ch in &self.children {
            out.extend(ch.nodes());
        }
        out
    }
}

fn diameter(points: &[Complex64], members: &[usize]) -> f64 {
    let mut d: f64 = 0.0;
    for (a, &i) in members.iter().enumerate() {
        for &j in &members[a + 1..] {
            d = d.max((points[i] - points[j]).norm());
        }
    }
    d
}

/// Single-linkage merge tree of the points. Merges at equal linkage height
/// are reported as one node.
pub fn cluster_tree(points: &[Complex64]) -> Result<ClusterNode> {
    let n = points.len();
    if n < 2 {
        return Err(Error::InvalidInput("clustering needs at least two points".into()));
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(Error::InvalidInput("points must be finite".into()));
    }
    let mut condensed = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            condensed.push((points[i] - points[j]).norm());
        }
    }
    let dend = linkage(&mut condensed, n, Method::Single);
    // Node label ≥ n refers to step label − n.
    struct Raw {
        height: f64,
        parts: [usize; 2],
    }
    let steps: Vec<Raw> = dend
        .steps()
        .iter()
        .map(|s| Raw {
            height: s.dissimilarity,
            parts: [s.cluster1, s.cluster2],
        })
        .collect();
    let scale = condensed.iter().cloned().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    fn leaves(label: usize, n: usize, steps: &[Raw], out: &mut Vec<usize>) {
        if label < n {
            out.push(label);
        } else {
            for p in steps[label - n].parts {
                leaves(p, n, steps, out);
            }
        }
    }
    fn build(label: usize, n: usize, steps: &[Raw], points: &[Complex64], tol: f64) -> ClusterNode {
        let height = steps[label - n].height;
        // Descend through merges at the same height.
        let mut frontier = vec![label];
        let mut kids = Vec::new();
        while let Some(l) = frontier.pop() {
            for p in steps[l - n].parts {
                if p >= n && (steps[p - n].height - height).abs() <= tol {
                    frontier.push(p);
                } else if p >= n {
                    kids.push(p);
                }
            }
        }
        let mut members = Vec::new();
        leaves(label, n, steps, &mut members);
        members.sort_unstable();
        let mut children: Vec<ClusterNode> =
            kids.into_iter().map(|k| build(k, n, steps, points, tol)).collect();
        children.sort_by(|a, b| a.members.cmp(&b.members));
        ClusterNode {
            radius: diameter(points, &members),
            members,
            children,
        }
    }
    let root = n + steps.len() - 1;
    Ok(build(root, n, &steps, points, 1e-12 * scale))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn two_scale_cluster() {
        let eps = 1e-3;
        let t = cluster_tree(&[c(0.0, 0.0), c(eps, 0.0), c(1.0, 0.0)]).unwrap();
        assert_eq!(t.members, vec![0, 1, 2]);
        assert!((t.radius - 1.0).abs() < 1e-15);
        assert_eq!(t.children.len(), 1);
        assert_eq!(t.children[0].members, vec![0, 1]);
        assert!((t.children[0].radius - eps).abs() < 1e-18);
    }

    #[test]
    fn coincident_points_single_node() {
        let t = cluster_tree(&[c(0.5, 0.5); 4]).unwrap();
        assert_eq!(t.members.len(), 4);
        assert_eq!(t.radius, 0.0);
        assert!(t.children.is_empty());
    }

    #[test]
    fn quadratic_collision_nests_first_and_third() {
        let t = 1e-2;
        let tree = cluster_tree(&[c(0.0, 0.0), c(t, 0.0), c(t * t, 0.0)]).unwrap();
        assert_eq!(tree.children.len(), 1);
        assert_eq!(tree.children[0].members, vec![0, 2]);
        assert!((tree.children[0].radius - t * t).abs() < 1e-18);
    }

    #[test]
    fn square_merges_at_equal_height() {
        let pts = [c(0.0, 0.0), c(1.0, 0.0), c(1.0, 1.0), c(0.0, 1.0)];
        let t = cluster_tree(&pts).unwrap();
        assert!(t.children.is_empty());
        assert!((t.radius - 2f64.sqrt()).abs() < 1e-15);
    }
}
