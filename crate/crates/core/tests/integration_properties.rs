mod common;

use common::{all_specs, bounded_indices, rng};
use hartogs_bergman::{
    integrate_mc, integrate_quad, phi, phi_inv, sample, volume_by_rejection, CPoint, Complex64,
    DomainSpec, MultiIndex, QuadratureRule,
};
use rand::Rng;
use rand_distr::StandardNormal;

/// `Σ c_j e_{a_j} conj(e_{b_j})` with 1 to 3 terms.
fn random_integrand<R: Rng>(
    r: &mut R,
    pool: &[MultiIndex],
) -> Vec<(Complex64, MultiIndex, MultiIndex)> {
    (0..r.random_range(1..=3))
        .map(|_| {
            let c = Complex64::new(r.sample(StandardNormal), r.sample(StandardNormal));
            let a = pool[r.random_range(0..pool.len())].clone();
            let b = pool[r.random_range(0..pool.len())].clone();
            (c, a, b)
        })
        .collect()
}

fn eval(terms: &[(Complex64, MultiIndex, MultiIndex)], p: &CPoint) -> Complex64 {
    terms
        .iter()
        .map(|(c, a, b)| c * a.eval(p) * b.eval(p).conj())
        .sum()
}

#[test]
fn quadrature_and_monte_carlo_agree() {
    // exact for these integrands; see the doubling test below
    let rule = QuadratureRule::new(8, 16).unwrap();
    for (si, spec) in all_specs().iter().enumerate() {
        let pool = bounded_indices(spec, 3);
        let mut r = rng(400 + si as u64);
        for i in 0..10 {
            let f = random_integrand(&mut r, &pool);
            let q = integrate_quad(spec, |p| eval(&f, p), &rule).unwrap();
            let m = integrate_mc(spec, |p| eval(&f, p), 500 + 10 * si as u64 + i, 100_000).unwrap();
            assert!(
                m.combined_z(&q) <= 3.0,
                "{spec} integrand {i}: {m:?} vs {q:?}"
            );
        }
    }
}

#[test]
fn refining_the_rule_leaves_polynomial_integrals_unchanged() {
    let rule = QuadratureRule::new(8, 16).unwrap();
    for (si, spec) in all_specs().iter().enumerate() {
        let pool = bounded_indices(spec, 2);
        let mut r = rng(600 + si as u64);
        for _ in 0..3 {
            let f = random_integrand(&mut r, &pool);
            // the diagonal part keeps the integral away from zero
            let g = |p: &CPoint| eval(&f, p) + p.base().norm_sqr();
            let coarse = integrate_quad(spec, g, &rule).unwrap().value;
            let fine = integrate_quad(spec, g, &rule.doubled()).unwrap().value;
            assert!(
                (coarse - fine).norm() <= 1e-13 * fine.norm(),
                "{spec}: {coarse} vs {fine}"
            );
        }
    }
}

#[test]
fn rejection_volume_matches_closed_form() {
    for (si, spec) in all_specs().iter().enumerate() {
        let e = volume_by_rejection(spec, 700 + si as u64, 400_000).unwrap();
        assert!(
            e.z_score(Complex64::new(spec.volume(), 0.0)) <= 3.0,
            "{spec}: {e:?}"
        );
    }
}

#[test]
fn phi_round_trip() {
    for (si, spec) in all_specs().iter().enumerate() {
        let points = sample(spec, 800 + si as u64, 10_000).unwrap().to_vec();
        for p in &points {
            let back = phi_inv(spec, &phi(spec, p).unwrap()).unwrap();
            for (a, b) in back.coords().iter().zip(p.coords()) {
                assert!((a - b).norm() <= 1e-12, "{spec}: {p} -> {back}");
            }
        }
    }
}

#[test]
fn boundary_points_are_outside() {
    let o = DomainSpec::hartogs_polydisc(2, 2).unwrap();
    assert!(!o.contains(&CPoint::real(&[0.5, 0.25, 0.0])).unwrap());
    assert!(o.contains(&CPoint::real(&[0.5, 0.2499, 0.0])).unwrap());
    let h = DomainSpec::hartogs_ball(2, 1).unwrap();
    assert!(!h.contains(&CPoint::real(&[0.5, 0.3, 0.4])).unwrap());
}

#[test]
fn samples_are_reproducible() {
    let spec = DomainSpec::hartogs_ball(2, 2).unwrap();
    assert_eq!(
        sample(&spec, 5, 9000).unwrap().to_vec(),
        sample(&spec, 5, 9000).unwrap().to_vec()
    );
}
