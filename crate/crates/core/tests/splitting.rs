use conemetric::angles::{splitting_spec, AngleVector};
use conemetric::factorization::{forward_map, inverse_map, multiplicative_error, WeightVector};
use num_complex::Complex64;
use proptest::prelude::*;

#[test]
fn split_pipeline_from_angles() {
    let av = AngleVector::sphere(vec![2.5, 0.6, 0.9]).unwrap();
    let spec = splitting_spec(&av, &[1.7, 1.8, 0.6, 0.9]).unwrap();
    assert_eq!(spec.cluster_sizes(), vec![2, 1, 1]);
    let b = WeightVector::from_targets(2.5, &spec.clusters[0].targets).unwrap();
    let a = [Complex64::new(0.01, -0.02), Complex64::new(0.004, 0.003)];
    let res = inverse_map(&a, &b).unwrap();
    assert_eq!(res.branches.len(), 2);
    let samples: Vec<Complex64> = (0..32).map(|k| Complex64::from_polar(0.6, 0.2 * k as f64)).collect();
    for br in &res.branches {
        let back = forward_map(&br.z, &b).unwrap();
        for (x, y) in back.iter().zip(&a) {
            assert!((x - y).norm() < 1e-14);
        }
        assert!(multiplicative_error(&a, &br.z, &b, &samples).unwrap() < 1e-3);
    }
}

fn weights(raw: &[f64]) -> WeightVector {
    let s: f64 = raw.iter().sum();
    WeightVector::new(raw.iter().map(|x| x * raw.len() as f64 / s).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn every_branch_maps_back(
        raw in proptest::collection::vec(0.2f64..1.8, 1..=4),
        coeffs in proptest::collection::vec((-0.2f64..0.2, -0.2f64..0.2), 4),
    ) {
        let b = weights(&raw);
        let a: Vec<Complex64> = coeffs[..raw.len()].iter().map(|(x, y)| Complex64::new(*x, *y)).collect();
        prop_assume!(a.iter().any(|x| x.norm() > 1e-3));
        let res = inverse_map(&a, &b).unwrap();
        let factorial: usize = (1..=raw.len()).product();
        prop_assert_eq!(res.branches.len(), factorial);
        let scale = a.iter().map(|x| x.norm()).fold(0.0, f64::max);
        for br in &res.branches {
            let back = forward_map(&br.z, &b).unwrap();
            for (x, y) in back.iter().zip(&a) {
                prop_assert!((x - y).norm() <= 1e-9 * scale);
            }
        }
    }

    #[test]
    fn roots_scale_like_coefficients(
        raw in proptest::collection::vec(0.3f64..1.7, 2..=3),
        coeffs in proptest::collection::vec((-0.2f64..0.2, -0.2f64..0.2), 3),
    ) {
        let b = weights(&raw);
        let a: Vec<Complex64> = coeffs[..raw.len()].iter().map(|(x, y)| Complex64::new(*x, *y)).collect();
        let bound = a
            .iter()
            .enumerate()
            .map(|(i, x)| x.norm().powf(1.0 / (i + 1) as f64))
            .fold(0.0, f64::max);
        prop_assume!(bound > 1e-3);
        let res = inverse_map(&a, &b).unwrap();
        for br in &res.branches {
            for z in &br.z {
                prop_assert!(z.norm() <= 20.0 * bound);
            }
        }
    }
}
