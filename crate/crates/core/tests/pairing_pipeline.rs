use conemetric::liouville::eigen::{spectrum_near_two, DEFAULT_WINDOW};
use conemetric::liouville::projected::projected_solve;
use conemetric::liouville::{solve_liouville, ConicProblem, MeshParams};
use conemetric::pairing::{
    classify_case, direction_coeffs, extract_all, pairing_b, pairing_matrix, solution_space, total_k,
    total_k0, Case, DirectionCoeffs,
};
use num_complex::Complex64;

#[test]
fn football_pairing_vanishes_for_every_direction() {
    let beta = 2.5;
    let p = ConicProblem::football(beta).unwrap();
    let m = solve_liouville(&p, &MeshParams::default()).unwrap();
    let fiber = spectrum_near_two(&m, DEFAULT_WINDOW).unwrap();
    let coeffs = extract_all(&m, &fiber).unwrap();
    let split = [Complex64::new(0.3, -0.1), Complex64::new(0.05, 0.2)];
    let e = direction_coeffs(&split, beta).unwrap();
    let dir = DirectionCoeffs {
        per_point: vec![e.clone(), e],
    };
    for v in pairing_b(&coeffs, &dir).unwrap() {
        assert!(v.abs() < 1e-8);
    }
    let space = solution_space(&pairing_matrix(&coeffs).unwrap());
    let class = classify_case(fiber.ell, total_k(&p.beta), total_k0(&p.beta), space.rank).unwrap();
    assert_eq!(class.case, Case::PartialRigidity);
    assert_eq!((class.solution_dim, class.kernel_dim), (7, 8));
}

#[test]
fn projected_solve_is_orthogonal_to_the_fiber() {
    let p = ConicProblem::football(1.5).unwrap();
    let m = solve_liouville(&p, &MeshParams::default()).unwrap();
    let fiber = spectrum_near_two(&m, DEFAULT_WINDOW).unwrap();
    let sol = projected_solve(&m, &fiber).unwrap();
    assert!(sol.orthogonality < 1e-8, "{}", sol.orthogonality);
    assert_eq!(sol.lambda.len(), fiber.ell);
}

#[test]
fn subcritical_triple_has_no_obstruction() {
    let s = 3f64.sqrt() / 2.0;
    let p = ConicProblem::sphere(
        vec![[1.0, 0.0, 0.0], [-0.5, s, 0.0], [-0.5, -s, 0.1]],
        vec![0.6, 0.6, 0.6],
        1,
    )
    .unwrap();
    let m = solve_liouville(&p, &MeshParams::default()).unwrap();
    let fiber = spectrum_near_two(&m, DEFAULT_WINDOW).unwrap();
    assert_eq!(fiber.ell, 0);
    let class = classify_case(0, total_k(&p.beta), total_k0(&p.beta), 0).unwrap();
    assert_eq!(class.case, Case::Unobstructed);
    assert_eq!(class.solution_dim, 6);
}
