use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::WeightVector;
use crate::error::{Error, Result};

/// Blow-up coordinates `(R, φ, z_0^{(2)})` of the two-point splitting, with
/// their leading-order values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartJ2 {
    pub rho: f64,
    pub theta: f64,
    /// The branch `(z_1, z_2)` the chart is evaluated on.
    pub z: [Complex64; 2],
    pub r: f64,
    /// Phase of `z̃_1` relative to the leading direction `i·½(b̄ + b̄⁻¹)`.
    pub phi: f64,
    pub z0_2: Complex64,
    /// `|½(b̄ + b̄⁻¹)|`, the slope of `R` in `ρ`.
    pub c_prime: f64,
    /// Limit of `z_0/R` as `ρ → 0`.
    pub c: Complex64,
    pub r_leading: f64,
    /// `θ/2`, meaningful modulo `π`.
    pub phi_leading: f64,
    pub z0_2_leading: Complex64,
}

impl ChartJ2 {
    /// `|φ − θ/2|` measured modulo `π`.
    pub fn phi_discrepancy(&self) -> f64 {
        let d = (self.phi - self.phi_leading).rem_euclid(std::f64::consts::PI);
        d.min(std::f64::consts::PI - d)
    }
}

/// Evaluates the explicit two-point chart at `A = (A_1, A_2)`.
pub fn blowup_chart_j2(a: &[Complex64], b: &WeightVector) -> Result<ChartJ2> {
    if b.len() != 2 || a.len() != 2 {
        return Err(Error::ShapeMismatch("the explicit chart needs J = 2".into()));
    }
    if a[1].norm() == 0.0 {
        return Err(Error::InvalidInput("A_2 = 0 lies outside the chart domain".into()));
    }
    let (b1, b2) = (b.as_slice()[0], b.as_slice()[1]);
    let bbar = Complex64::new(b2 / b1, 0.0).sqrt();
    let rho = a[1].norm().sqrt();
    let theta = a[1].arg();
    let at1 = a[0] / (rho * rho);
    // s² = A_1² − 4A_2, with the branch continuous in ρ at ρ = 0.
    let q = -Complex64::from_polar(1.0, theta);
    let sq = q.sqrt();
    let s = 2.0 * rho * sq * (1.0 + rho * rho * at1 * at1 / (4.0 * q)).sqrt();
    let z1 = (-a[0] + bbar * s) / 2.0;
    let z2 = (-a[0] - s / bbar) / 2.0;
    let z0 = 0.5 * (z1 + z2);
    let zt1 = 0.5 * (z1 - z2);
    let half_sum = 0.5 * (bbar + bbar.inv());
    let gamma = (bbar - bbar.inv()) / (bbar + bbar.inv());
    let w = half_sum * sq;
    let c = gamma * w / w.norm();
    let r = zt1.norm();
    let lead_dir = Complex64::new(0.0, 1.0) * half_sum;
    let phi = (zt1 / lead_dir).arg();
    let z0_2 = (z0 / r - c) / r;
    let c_prime = half_sum.norm();
    Ok(ChartJ2 {
        rho,
        theta,
        z: [z1, z2],
        r,
        phi,
        z0_2,
        c_prime,
        c,
        r_leading: c_prime * rho,
        phi_leading: theta / 2.0,
        z0_2_leading: -0.5 * at1 / (c_prime * c_prime),
    })
}
