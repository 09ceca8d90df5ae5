use conemetric::liouville::eigen::{lowest_eigenvalues, spectrum_near_two, DEFAULT_WINDOW};
use conemetric::liouville::{solve_liouville, ConicProblem, MeshParams};
use conemetric::spectrum::{
    eigenvalue_flow, football_count, football_lambda, linear_path, radial_sturm_liouville_extrapolated,
};
use proptest::prelude::*;

#[test]
fn radial_oracle_agrees_with_closed_form() {
    for beta in [0.5, 2.7] {
        for j in [0, 2] {
            let ev = radial_sturm_liouville_extrapolated(beta, j, 256, 4).unwrap();
            for (ell, v) in ev.iter().enumerate() {
                let want = football_lambda(beta, j, ell as u32);
                assert!((v - want).abs() < 1e-6 * want.max(1.0), "β={beta} j={j} ℓ={ell}");
            }
        }
    }
}

#[test]
fn discrete_football_has_the_predicted_fiber() {
    for (beta, ell) in [(1.5, 1), (2.5, 1), (2.0, 3)] {
        let p = ConicProblem::football(beta).unwrap();
        let m = solve_liouville(&p, &MeshParams::default()).unwrap();
        let area = m.diagnostics.area;
        assert!((area - 4.0 * std::f64::consts::PI * beta).abs() < 1e-3 * area);
        let fiber = spectrum_near_two(&m, DEFAULT_WINDOW).unwrap();
        assert_eq!(fiber.ell, ell, "β = {beta}");
        assert_eq!(football_count(beta).unwrap().at_most as usize, 2 + 2 * beta.floor() as usize);
    }
}

#[test]
fn discrete_radial_modes_track_the_closed_form() {
    let p = ConicProblem::football(1.5).unwrap();
    let m = solve_liouville(&p, &MeshParams::default()).unwrap();
    for j in 0..=2u32 {
        let ev = lowest_eigenvalues(&m, j as usize, 3).unwrap();
        for (ell, v) in ev.iter().enumerate() {
            let want = football_lambda(1.5, j, ell as u32);
            assert!((v - want).abs() < 5e-3 * want.max(1.0), "j={j} ℓ={ell}: {v} vs {want}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn flow_count_changes_only_at_integers(a in 0.3f64..4.7, len in 0.05f64..1.5) {
        let b = a + len;
        let r = eigenvalue_flow(&linear_path(a, b, 23), 8).unwrap();
        for c in &r.crossings {
            prop_assert!((c.beta_cross - c.j as f64).abs() < 1e-12);
            prop_assert!(c.beta_cross > a - 1e-12 && c.beta_cross <= b + 1e-12);
        }
        let first = r.samples.first().unwrap().below_two as i64;
        let last = r.samples.last().unwrap().below_two as i64;
        let net: i64 = r.crossings.iter().map(|c| c.delta as i64).sum();
        prop_assert_eq!(first + net, last);
    }
}
