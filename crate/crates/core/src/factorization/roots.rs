use num_complex::Complex64;

/// Roots of the monic polynomial `z^J + a_1 z^{J−1} + … + a_J` by the
/// Aberth–Ehrlich iteration followed by Newton polishing, sorted by real then
/// imaginary part.
pub fn polynomial_roots(a: &[Complex64]) -> Vec<Complex64> {
    let n = a.len();
    if n == 0 {
        return Vec::new();
    }
    let eval = |z: Complex64| -> (Complex64, Complex64) {
        let mut p = Complex64::new(1.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for ai in a {
            dp = dp * z + p;
            p = p * z + ai;
        }
        (p, dp)
    };
    // Cauchy bound for the root radius.
    let radius = 1.0 + a.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(0.5 * radius, 0.4 + 2.0 * std::f64::consts::PI * k as f64 / n as f64))
        .collect();
    for _ in 0..500 {
        let mut max_step: f64 = 0.0;
        for i in 0..n {
            let (p, dp) = eval(z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let sum: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let d = z[i] - z[j];
                    if d.norm() == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        d.inv()
                    }
                })
                .sum();
            let denom = Complex64::new(1.0, 0.0) - ratio * sum;
            let step = if denom.norm() == 0.0 { ratio } else { ratio / denom };
            if step.is_finite() {
                z[i] -= step;
                max_step = max_step.max(step.norm());
            }
        }
        if max_step <= 1e-16 * radius {
            break;
        }
    }
    for zi in z.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = eval(*zi);
            if dp.norm() == 0.0 {
                break;
            }
            let step = p / dp;
            if !step.is_finite() {
                break;
            }
            *zi -= step;
        }
    }
    z.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    z
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_known_roots() {
        let roots = [
            Complex64::new(0.2, -0.1),
            Complex64::new(-0.05, 0.3),
            Complex64::new(0.1, 0.1),
            Complex64::new(-0.25, -0.2),
        ];
        let a = crate::factorization::forward_map(&roots, &crate::factorization::WeightVector::equal(4)).unwrap();
        let found = polynomial_roots(&a);
        for r in &roots {
            let d = found.iter().map(|f| (f - r).norm()).fold(f64::INFINITY, f64::min);
            assert!(d < 1e-13, "{r} missed by {d}");
        }
    }

    #[test]
    fn cube_roots_of_minus_one() {
        let a = [Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
        for z in polynomial_roots(&a) {
            assert!((z.powu(3) + 1.0).norm() < 1e-14);
        }
    }
}
