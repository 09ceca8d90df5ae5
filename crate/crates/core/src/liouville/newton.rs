//! Damped Newton iteration shared by the triangulated and radial solvers.

use serde::{Deserialize, Serialize};

use super::sparse::{Csr, SparseLu};
use crate::error::{Error, Result};

/// A nodal residual with its Jacobian.
pub(crate) trait NodalSystem {
    fn n(&self) -> usize;
    fn residual(&self, w: &[f64]) -> Vec<f64>;
    fn jacobian(&self, w: &[f64]) -> Csr;
    /// Positive nodal weights; the stopping test uses `max |F_i| / scale_i`.
    fn scale(&self) -> &[f64];
}

/// Maps nodes to reduced unknowns; `None` marks a node held fixed.
#[derive(Clone, Debug)]
pub(crate) struct Dofs {
    pub map: Vec<Option<usize>>,
    pub n_red: usize,
}

impl Dofs {
    pub fn all(n: usize) -> Self {
        Self {
            map: (0..n).map(Some).collect(),
            n_red: n,
        }
    }

    /// Every node free except the masked ones.
    pub fn without(fixed: &[bool]) -> Self {
        let mut k = 0;
        let map = fixed
            .iter()
            .map(|&f| {
                if f {
                    None
                } else {
                    k += 1;
                    Some(k - 1)
                }
            })
            .collect();
        Self { map, n_red: k }
    }

    pub fn reduce_vec(&self, f: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_red];
        for (i, m) in self.map.iter().enumerate() {
            if let Some(r) = m {
                out[*r] += f[i];
            }
        }
        out
    }

    pub fn reduce_mat(&self, a: &Csr) -> Csr {
        let mut t = Vec::with_capacity(a.val.len());
        for i in 0..a.n {
            let Some(ri) = self.map[i] else { continue };
            for k in a.row_ptr[i]..a.row_ptr[i + 1] {
                if let Some(rk) = self.map[a.col[k]] {
                    t.push((ri, rk, a.val[k]));
                }
            }
        }
        Csr::from_triplets(self.n_red, &t)
    }

    pub fn expand(&self, x: &[f64]) -> Vec<f64> {
        self.map
            .iter()
            .map(|m| m.map(|r| x[r]).unwrap_or(0.0))
            .collect()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NewtonReport {
    pub iterations: usize,
    pub residual: f64,
}

pub(crate) fn scaled_sup(sys: &impl NodalSystem, f: &[f64], dofs: &Dofs) -> f64 {
    f.iter()
        .zip(sys.scale())
        .zip(&dofs.map)
        .filter(|(_, m)| m.is_some())
        .map(|((v, s), _)| v.abs() / s)
        .fold(0.0, f64::max)
}

/// Newton with step halving on the scaled sup norm of the residual.
pub(crate) fn newton(
    sys: &impl NodalSystem,
    mut w: Vec<f64>,
    dofs: &Dofs,
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, NewtonReport)> {
    let mut f = sys.residual(&w);
    let mut res = scaled_sup(sys, &f, dofs);
    for it in 0..max_iter {
        if res < tol {
            return Ok((w, NewtonReport { iterations: it, residual: res }));
        }
        let jac = dofs.reduce_mat(&sys.jacobian(&w));
        let rhs: Vec<f64> = dofs.reduce_vec(&f).iter().map(|v| -v).collect();
        let step = dofs.expand(&SparseLu::new(&jac)?.solve(&rhs)?);
        let mut t = 1.0;
        loop {
            let trial: Vec<f64> = w.iter().zip(&step).map(|(a, b)| a + t * b).collect();
            let ft = sys.residual(&trial);
            let rt = scaled_sup(sys, &ft, dofs);
            if rt.is_finite() && (rt < (1.0 - 1e-4 * t) * res || t < 1.0 / 1024.0) {
                w = trial;
                f = ft;
                res = rt;
                break;
            }
            t *= 0.5;
        }
        if !res.is_finite() {
            break;
        }
    }
    if res < tol {
        return Ok((w, NewtonReport { iterations: max_iter, residual: res }));
    }
    Err(Error::NewtonDivergence {
        iterations: max_iter,
        residual: res,
    })
}
