//! Arithmetic tests on cone-angle data.
//!
//! Angles are stored as the parameters `β_j` (the cone angle divided by `2π`).
//! Everything here is exact arithmetic on `f64` inputs, with a fixed
//! integrality tolerance where the tests need to decide whether an angle is an
//! integer.

use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used to decide whether a real angle parameter is an integer.
pub const INTEGRALITY_TOL: f64 = 1e-9;

/// Largest denominator accepted when recovering a rational from a float.
const MAX_DENOMINATOR: i64 = 10_000;

/// Largest split cluster whose subclusters are enumerated exhaustively.
const MAX_SUBCLUSTER_ENUMERATION: usize = 24;

/// Genus plus ordered cone-angle parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleVector {
    pub genus: u32,
    pub beta: Vec<f64>,
}

impl AngleVector {
    pub fn new(genus: u32, beta: Vec<f64>) -> Result<Self> {
        if beta.is_empty() {
            return Err(Error::InvalidInput("angle list is empty".into()));
        }
        if let Some((i, b)) = beta
            .iter()
            .enumerate()
            .find(|(_, b)| !(b.is_finite() && **b > 0.0))
        {
            return Err(Error::InvalidInput(format!(
                "angle {} must be positive and finite, got {b}",
                i + 1
            )));
        }
        Ok(Self { genus, beta })
    }

    /// Genus-zero convenience constructor.
    pub fn sphere(beta: Vec<f64>) -> Result<Self> {
        Self::new(0, beta)
    }

    pub fn k(&self) -> usize {
        self.beta.len()
    }
}

/// Returns true when `x` is within [`INTEGRALITY_TOL`] of an integer.
pub fn is_integer(x: f64) -> bool {
    (x - x.round()).abs() <= INTEGRALITY_TOL
}

/// Integer part `[x]`, snapping values within tolerance of an integer.
pub fn floor_tol(x: f64) -> i64 {
    if is_integer(x) {
        x.round() as i64
    } else {
        x.floor() as i64
    }
}

/// The conic Euler characteristic `(2 − 2g) + Σ(β_j − 1)`.
pub fn conic_euler_char(av: &AngleVector) -> f64 {
    (2.0 - 2.0 * av.genus as f64) + av.beta.iter().map(|b| b - 1.0).sum::<f64>()
}

/// Existence test for positive-curvature metrics with angles below `2π`.
///
/// For genus zero and `k ≥ 3` every `β_j − 1` must exceed the sum of the
/// others. Two cone points need equal angles. A single cone point on the
/// sphere is only admissible when it is not a cone point at all (`β = 1`).
pub fn troyanov_check(av: &AngleVector) -> Result<bool> {
    let chi = conic_euler_char(av);
    if chi <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "conic Euler characteristic must be positive, got {chi}"
        )));
    }
    if av.genus > 0 {
        return Ok(true);
    }
    let x: Vec<f64> = av.beta.iter().map(|b| b - 1.0).collect();
    Ok(match x.len() {
        1 => x[0].abs() <= INTEGRALITY_TOL,
        2 => (av.beta[0] - av.beta[1]).abs() <= INTEGRALITY_TOL,
        _ => {
            let total: f64 = x.iter().sum();
            x.iter().all(|&xj| xj > total - xj)
        }
    })
}

/// Position of `β − 1` relative to the region `d_1(β − 1, ℤ^k_odd) ≥ 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MpMembership {
    Interior,
    Boundary,
    Outside,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MpReport {
    pub distance: f64,
    pub membership: MpMembership,
    /// A nearest lattice point with odd coordinate sum.
    pub nearest: Vec<i64>,
}

/// ℓ¹ distance from `β − 1` to the integer vectors with odd coordinate sum.
pub fn mp_distance(av: &AngleVector) -> Result<MpReport> {
    if av.genus != 0 {
        return Err(Error::InvalidInput(
            "the odd-lattice distance is defined for genus 0 only".into(),
        ));
    }
    let x: Vec<f64> = av.beta.iter().map(|b| b - 1.0).collect();
    let (distance, nearest) = odd_lattice_distance(&x);
    let membership = if (distance - 1.0).abs() <= INTEGRALITY_TOL {
        MpMembership::Boundary
    } else if distance > 1.0 {
        MpMembership::Interior
    } else {
        MpMembership::Outside
    };
    Ok(MpReport {
        distance,
        membership,
        nearest,
    })
}

/// Rounds every coordinate and, if the rounded sum is even, moves the
/// coordinate whose parity flip is cheapest to its other neighbouring integer.
pub fn odd_lattice_distance(x: &[f64]) -> (f64, Vec<i64>) {
    let mut n: Vec<i64> = x.iter().map(|v| v.round() as i64).collect();
    let mut d: f64 = x.iter().zip(&n).map(|(v, m)| (v - *m as f64).abs()).sum();
    let parity: i64 = n.iter().sum();
    if parity.rem_euclid(2) == 0 {
        let (idx, cost) = x
            .iter()
            .zip(&n)
            .map(|(v, m)| 1.0 - 2.0 * (v - *m as f64).abs())
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, c)| if c < acc.1 { (i, c) } else { acc });
        let f = x[idx] - n[idx] as f64;
        n[idx] += if f >= 0.0 { 1 } else { -1 };
        d += cost;
    }
    (d, n)
}

/// `χ < min{2, 2·min β_j}`, evaluated literally.
pub fn subcritical_check(av: &AngleVector) -> bool {
    let min_beta = av.beta.iter().cloned().fold(f64::INFINITY, f64::min);
    conic_euler_char(av) < 2.0f64.min(2.0 * min_beta)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoaxialStatus {
    Coaxial,
    NotCoaxial,
    /// The sign and parity conditions hold but the normalization condition
    /// cannot be evaluated because the relevant angle ratios are irrational.
    Indeterminate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoaxialCase {
    IntegerAngles,
    Mixed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoaxialWitness {
    /// Signs `ε_i = ±1` over the non-integer angles, in input order.
    pub signs: Vec<i8>,
    pub k_prime: i64,
    pub k_double_prime: i64,
    /// Primitive integer vector `b` with `(β_1..β_m, 1, …, 1) = η·b`, when it exists.
    pub b: Option<Vec<i64>>,
    pub eta: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoaxialReport {
    pub status: CoaxialStatus,
    pub case: CoaxialCase,
    pub witness: Option<CoaxialWitness>,
}

/// Coaxiality conditions for genus-zero angle data.
pub fn coaxial_check(av: &AngleVector) -> Result<CoaxialReport> {
    if av.genus != 0 {
        return Err(Error::InvalidInput("coaxial conditions need genus 0".into()));
    }
    let n = av.k() as i64;
    let (non_int, int): (Vec<f64>, Vec<f64>) = av.beta.iter().partition(|b| !is_integer(**b));

    if non_int.is_empty() {
        let x: Vec<f64> = av.beta.iter().map(|b| b.round() - 1.0).collect();
        let (d, _) = odd_lattice_distance(&x);
        let max = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = x.iter().sum();
        let ok = (d - 1.0).abs() <= INTEGRALITY_TOL && 2.0 * max <= sum + INTEGRALITY_TOL;
        return Ok(CoaxialReport {
            status: if ok {
                CoaxialStatus::Coaxial
            } else {
                CoaxialStatus::NotCoaxial
            },
            case: CoaxialCase::IntegerAngles,
            witness: None,
        });
    }

    let m = non_int.len();
    let int_sum: i64 = int.iter().map(|b| b.round() as i64).sum();
    let int_max = int.iter().map(|b| b.round() as i64).max();
    let mut indeterminate: Option<CoaxialWitness> = None;

    // Lexicographic order with `+` before `−`, first angle most significant.
    for mask in 0u64..(1u64 << m) {
        let signs: Vec<i8> = (0..m)
            .map(|i| if mask >> (m - 1 - i) & 1 == 1 { -1 } else { 1 })
            .collect();
        let kp: f64 = non_int.iter().zip(&signs).map(|(b, s)| *s as f64 * b).sum();
        if !is_integer(kp) {
            continue;
        }
        let kp = kp.round() as i64;
        if kp < 0 {
            continue;
        }
        let kpp = int_sum - n - kp + 2;
        if kpp < 0 || kpp.is_odd() {
            continue;
        }
        let ones = (kp + kpp) as usize;
        let mut v = non_int.clone();
        v.extend(std::iter::repeat(1.0).take(ones));
        match primitive_integer_direction(&v) {
            Some((b, eta)) => {
                let total: i64 = b.iter().sum();
                let ok = int_max.map_or(true, |mx| 2 * mx <= total);
                if ok {
                    return Ok(CoaxialReport {
                        status: CoaxialStatus::Coaxial,
                        case: CoaxialCase::Mixed,
                        witness: Some(CoaxialWitness {
                            signs,
                            k_prime: kp,
                            k_double_prime: kpp,
                            b: Some(b),
                            eta: Some(eta),
                        }),
                    });
                }
            }
            None => {
                if indeterminate.is_none() {
                    indeterminate = Some(CoaxialWitness {
                        signs,
                        k_prime: kp,
                        k_double_prime: kpp,
                        b: None,
                        eta: None,
                    });
                }
            }
        }
    }
    Ok(match indeterminate {
        Some(w) => CoaxialReport {
            status: CoaxialStatus::Indeterminate,
            case: CoaxialCase::Mixed,
            witness: Some(w),
        },
        None => CoaxialReport {
            status: CoaxialStatus::NotCoaxial,
            case: CoaxialCase::Mixed,
            witness: None,
        },
    })
}

/// Best rational approximation `p/q` of `x` with `|x − p/q| ≤ tol`, found by
/// continued fractions, or `None` if the denominator would exceed the cap.
pub fn rationalize(x: f64, tol: f64) -> Option<(i64, i64)> {
    let (mut h0, mut h1) = (0i64, 1i64);
    let (mut k0, mut k1) = (1i64, 0i64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a.abs() > 1e15 {
            return None;
        }
        let a = a as i64;
        let h2 = a.checked_mul(h1)?.checked_add(h0)?;
        let k2 = a.checked_mul(k1)?.checked_add(k0)?;
        if k2 > MAX_DENOMINATOR {
            return None;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        if (x - h1 as f64 / k1 as f64).abs() <= tol {
            return Some((h1, k1));
        }
        let frac = r - a as f64;
        if frac.abs() < 1e-15 {
            return None;
        }
        r = 1.0 / frac;
    }
    None
}

/// Writes `v = η·b` with `b` a primitive integer vector, if all ratios
/// `v_i / v_0` are rational.
fn primitive_integer_direction(v: &[f64]) -> Option<(Vec<i64>, f64)> {
    let ratios: Vec<(i64, i64)> = v
        .iter()
        .map(|x| rationalize(x / v[0], INTEGRALITY_TOL))
        .collect::<Option<_>>()?;
    let l = ratios.iter().fold(1i64, |acc, (_, q)| acc.lcm(q));
    let mut b: Vec<i64> = ratios.iter().map(|(p, q)| p * (l / q)).collect();
    let g = b.iter().fold(0i64, |acc, x| acc.gcd(x));
    if g == 0 {
        return None;
    }
    b.iter_mut().for_each(|x| *x /= g);
    let eta = v[0] / b[0] as f64;
    Some((b, eta))
}

/// A single admissibility failure of a splitting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// The number of target angles does not match `K = Σ max([β_j], 1)`.
    CountMismatch { expected: usize, got: usize },
    /// `Σ_i (B_i − 1) ≠ β_j − 1` over a cluster.
    ClusterSum { cluster: usize, expected: f64, got: f64 },
    /// A split cluster contains a smooth point `B_i = 1`.
    UnitAngle { cluster: usize, index: usize },
    /// A nonempty subcluster `I` with `Σ_{i∈I} (B_i − 1) = 0`.
    ZeroSubcluster { cluster: usize, members: Vec<usize> },
    /// A target angle is not positive.
    NonPositive { cluster: usize, index: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::CountMismatch { expected, got } => {
                write!(f, "expected {expected} target angles, got {got}")
            }
            Violation::ClusterSum {
                cluster,
                expected,
                got,
            } => write!(
                f,
                "cluster {}: Σ(B−1) = {got} but β−1 = {expected}",
                cluster + 1
            ),
            Violation::UnitAngle { cluster, index } => {
                write!(f, "cluster {}: B_{} = 1 in a split cluster", cluster + 1, index + 1)
            }
            Violation::ZeroSubcluster { cluster, members } => {
                let m: Vec<String> = members.iter().map(|i| (i + 1).to_string()).collect();
                write!(
                    f,
                    "cluster {}: subcluster {{{}}} has Σ(B−1) = 0",
                    cluster + 1,
                    m.join(",")
                )
            }
            Violation::NonPositive { cluster, index } => {
                write!(f, "cluster {}: B_{} is not positive", cluster + 1, index + 1)
            }
        }
    }
}

/// One original cone point and the target angles it splits into.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    /// Index of the cone point in the input order.
    pub index: usize,
    /// Position of the cone point after sorting angles in descending order.
    pub sorted_rank: usize,
    pub beta: f64,
    /// `N_j = max([β_j], 1)`.
    pub size: usize,
    pub targets: Vec<f64>,
    /// `𝔟_i = [β_j](B_i − 1)/(β_j − 1)`; only defined when `β_j > 1`.
    pub weights: Option<Vec<f64>>,
}

/// A validated admissible splitting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    /// Number of cone points with `β_j > 1`.
    pub k0: usize,
    /// Total number of points after splitting.
    pub total: usize,
    /// Clusters in input order.
    pub clusters: Vec<Cluster>,
}

impl SplitSpec {
    /// `N_j` for every cone point, in input order.
    pub fn cluster_sizes(&self) -> Vec<usize> {
        self.clusters.iter().map(|c| c.size).collect()
    }
}

/// Number of points a cone point of parameter `β` splits into.
pub fn cluster_size(beta: f64) -> usize {
    floor_tol(beta).max(1) as usize
}

/// Validates a splitting of each cone point into `max([β_j], 1)` points.
///
/// `targets` lists the new angle parameters grouped by cone point in input
/// order. All violations are collected before failing.
pub fn splitting_spec(av: &AngleVector, targets: &[f64]) -> Result<SplitSpec> {
    let sizes: Vec<usize> = av.beta.iter().map(|b| cluster_size(*b)).collect();
    let total: usize = sizes.iter().sum();
    if targets.len() != total {
        return Err(Error::Inadmissible(vec![Violation::CountMismatch {
            expected: total,
            got: targets.len(),
        }]));
    }

    let mut order: Vec<usize> = (0..av.k()).collect();
    order.sort_by(|a, b| av.beta[*b].total_cmp(&av.beta[*a]).then(a.cmp(b)));
    let mut rank = vec![0; av.k()];
    for (r, i) in order.iter().enumerate() {
        rank[*i] = r;
    }

    let mut violations = Vec::new();
    let mut clusters = Vec::with_capacity(av.k());
    let mut offset = 0;
    for (j, (&beta, &size)) in av.beta.iter().zip(&sizes).enumerate() {
        let b = &targets[offset..offset + size];
        offset += size;

        for (i, x) in b.iter().enumerate() {
            if !(x.is_finite() && *x > 0.0) {
                violations.push(Violation::NonPositive { cluster: j, index: i });
            }
        }
        let got: f64 = b.iter().map(|x| x - 1.0).sum();
        if (got - (beta - 1.0)).abs() > INTEGRALITY_TOL {
            violations.push(Violation::ClusterSum {
                cluster: j,
                expected: beta - 1.0,
                got,
            });
        }
        if size >= 2 {
            for (i, x) in b.iter().enumerate() {
                if (x - 1.0).abs() <= INTEGRALITY_TOL {
                    violations.push(Violation::UnitAngle { cluster: j, index: i });
                }
            }
            if size > MAX_SUBCLUSTER_ENUMERATION {
                return Err(Error::InvalidInput(format!(
                    "cluster {} has {size} points; subcluster enumeration is capped at {}",
                    j + 1,
                    MAX_SUBCLUSTER_ENUMERATION
                )));
            }
            for mask in 1u32..(1u32 << size) {
                let members: Vec<usize> = (0..size).filter(|i| mask >> i & 1 == 1).collect();
                if members.len() == 1 {
                    continue;
                }
                let s: f64 = members.iter().map(|i| b[*i] - 1.0).sum();
                if s.abs() <= INTEGRALITY_TOL {
                    violations.push(Violation::ZeroSubcluster { cluster: j, members });
                }
            }
        }

        let weights = (beta > 1.0 + INTEGRALITY_TOL).then(|| {
            let fl = floor_tol(beta) as f64;
            b.iter().map(|x| fl * (x - 1.0) / (beta - 1.0)).collect()
        });
        clusters.push(Cluster {
            index: j,
            sorted_rank: rank[j],
            beta,
            size,
            targets: b.to_vec(),
            weights,
        });
    }

    if !violations.is_empty() {
        return Err(Error::Inadmissible(violations));
    }
    let k0 = av.beta.iter().filter(|b| **b > 1.0 + INTEGRALITY_TOL).count();
    Ok(SplitSpec {
        k0,
        total,
        clusters,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force_distance(x: &[f64]) -> f64 {
        let base: Vec<i64> = x.iter().map(|v| v.round() as i64).collect();
        let k = x.len();
        let mut best = f64::INFINITY;
        let total = 5usize.pow(k as u32);
        for code in 0..total {
            let mut c = code;
            let mut n = Vec::with_capacity(k);
            for b in &base {
                n.push(b + (c % 5) as i64 - 2);
                c /= 5;
            }
            if n.iter().sum::<i64>().rem_euclid(2) == 1 {
                let d: f64 = x.iter().zip(&n).map(|(v, m)| (v - *m as f64).abs()).sum();
                best = best.min(d);
            }
        }
        best
    }

    #[test]
    fn euler_characteristic_examples() {
        let f = |g, b: Vec<f64>| conic_euler_char(&AngleVector::new(g, b).unwrap());
        assert_eq!(f(0, vec![1.0, 1.0]), 2.0);
        assert_eq!(f(0, vec![0.5, 0.5]), 1.0);
        assert_eq!(f(1, vec![1.5]), 0.5);
    }

    #[test]
    fn troyanov_examples() {
        let t = |b: Vec<f64>| troyanov_check(&AngleVector::sphere(b).unwrap()).unwrap();
        assert!(t(vec![0.5, 0.5, 0.5]));
        assert!(t(vec![0.5, 0.5]));
        assert!(!t(vec![0.5, 0.6]));
        assert!(!t(vec![0.25, 0.5, 0.75]));
        assert!(troyanov_check(&AngleVector::new(1, vec![1.5]).unwrap()).unwrap());
    }

    #[test]
    fn troyanov_rejects_nonpositive_chi() {
        let av = AngleVector::new(1, vec![0.25]).unwrap();
        assert!(troyanov_check(&av).is_err());
    }

    #[test]
    fn odd_lattice_distance_examples() {
        let r = mp_distance(&AngleVector::sphere(vec![1.0, 1.0, 1.0]).unwrap()).unwrap();
        assert_eq!(r.distance, 1.0);
        assert_eq!(r.membership, MpMembership::Boundary);
        let r = mp_distance(&AngleVector::sphere(vec![0.5, 0.5]).unwrap()).unwrap();
        assert!((r.distance - 1.0).abs() < 1e-15);
        assert_eq!(r.membership, MpMembership::Boundary);
        let r = mp_distance(&AngleVector::sphere(vec![1.2, 1.2, 1.2]).unwrap()).unwrap();
        assert!((r.distance - brute_force_distance(&[0.2, 0.2, 0.2])).abs() < 1e-12);
        assert!((r.distance - 1.2).abs() < 1e-12);
        assert_eq!(r.membership, MpMembership::Interior);
    }

    #[test]
    fn nearest_point_is_odd_and_attains_distance() {
        let x = [0.3, -0.7, 1.45, 2.1];
        let (d, n) = odd_lattice_distance(&x);
        assert_eq!(n.iter().sum::<i64>().rem_euclid(2), 1);
        let dn: f64 = x.iter().zip(&n).map(|(v, m)| (v - *m as f64).abs()).sum();
        assert!((d - dn).abs() < 1e-12);
    }

    #[test]
    fn subcritical_examples() {
        let s = |g, b: Vec<f64>| subcritical_check(&AngleVector::new(g, b).unwrap());
        assert!(s(0, vec![0.5, 0.5, 0.5]));
        assert!(!s(0, vec![3.0, 3.0]));
        assert!(s(1, vec![0.25]));
    }

    #[test]
    fn coaxial_examples() {
        let c = |b: Vec<f64>| coaxial_check(&AngleVector::sphere(b).unwrap()).unwrap();
        let r = c(vec![2.0, 2.0, 2.0, 2.0]);
        assert_eq!(r.status, CoaxialStatus::Coaxial);
        assert_eq!(r.case, CoaxialCase::IntegerAngles);

        let r = c(vec![0.5, 0.5]);
        assert_eq!(r.status, CoaxialStatus::Coaxial);
        let w = r.witness.unwrap();
        assert_eq!(w.signs, vec![1, -1]);
        assert_eq!((w.k_prime, w.k_double_prime), (0, 0));

        assert_eq!(c(vec![1.0 / 3.0, 0.5, 5.0]).status, CoaxialStatus::NotCoaxial);
    }

    #[test]
    fn coaxial_irrational_ratio_is_indeterminate() {
        let s = 2f64.sqrt();
        let r = coaxial_check(&AngleVector::sphere(vec![s, s, 5.0]).unwrap()).unwrap();
        assert_eq!(r.status, CoaxialStatus::Indeterminate);
    }

    #[test]
    fn rationalize_recovers_simple_fractions() {
        assert_eq!(rationalize(0.5, 1e-12), Some((1, 2)));
        assert_eq!(rationalize(-1.0 / 3.0, 1e-12), Some((-1, 3)));
        assert_eq!(rationalize(7.0, 1e-12), Some((7, 1)));
        assert_eq!(rationalize(std::f64::consts::PI, 1e-12), None);
    }

    #[test]
    fn splitting_examples() {
        let av = AngleVector::sphere(vec![2.5]).unwrap();
        let s = splitting_spec(&av, &[1.75, 1.75]).unwrap();
        assert_eq!(s.total, 2);
        assert_eq!(s.clusters[0].weights, Some(vec![1.0, 1.0]));

        match splitting_spec(&av, &[2.5, 1.0]) {
            Err(Error::Inadmissible(v)) => {
                assert!(v.contains(&Violation::UnitAngle { cluster: 0, index: 1 }))
            }
            other => panic!("expected rejection, got {other:?}"),
        }

        let av = AngleVector::sphere(vec![3.5]).unwrap();
        match splitting_spec(&av, &[1.5, 0.5, 2.5]) {
            Err(Error::Inadmissible(v)) => assert!(v.contains(&Violation::ZeroSubcluster {
                cluster: 0,
                members: vec![0, 1]
            })),
            other => panic!("expected rejection, got {other:?}"),
        }
    }

    #[test]
    fn splitting_keeps_input_order_and_ranks() {
        let av = AngleVector::sphere(vec![0.5, 2.5, 1.5]).unwrap();
        let s = splitting_spec(&av, &[0.5, 1.25, 2.25, 1.5]).unwrap();
        assert_eq!(s.k0, 2);
        assert_eq!(s.cluster_sizes(), vec![1, 2, 1]);
        let ranks: Vec<usize> = s.clusters.iter().map(|c| c.sorted_rank).collect();
        assert_eq!(ranks, vec![2, 0, 1]);
        let w = s.clusters[1].weights.as_ref().unwrap();
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-12);
        assert!(s.clusters[0].weights.is_none());
    }
}
