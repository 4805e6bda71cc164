#![allow(dead_code)]

use std::f64::consts::PI;

use hartogs_bergman::{enumerate, CPoint, Complex64, DomainKind, DomainSpec, MultiIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn families(n: u32, k: u32) -> [DomainSpec; 2] {
    [
        DomainSpec::hartogs_polydisc(n, k).unwrap(),
        DomainSpec::hartogs_ball(n, k).unwrap(),
    ]
}

/// Both families for every `(n, k)` in `{(1,1), (1,2), (2,1), (2,2)}`.
pub fn all_specs() -> Vec<DomainSpec> {
    [(1, 1), (1, 2), (2, 1), (2, 2)]
        .into_iter()
        .flat_map(|(n, k)| families(n, k))
        .collect()
}

/// Interior point with base modulus in `[base_min, base_max]` and fiber at
/// most `fiber_frac` of its bound, with uniform angles.
pub fn random_point<R: Rng>(
    rng: &mut R,
    spec: &DomainSpec,
    base_min: f64,
    base_max: f64,
    fiber_frac: f64,
) -> CPoint {
    let r = base_min + (base_max - base_min) * rng.random::<f64>();
    let x = Complex64::from_polar(r, 2.0 * PI * rng.random::<f64>());
    let bound = r.powi(spec.k() as i32);
    let n = spec.n() as usize;
    let mut coords = vec![x];
    match spec.kind() {
        DomainKind::HartogsBall => {
            let dir: Vec<Complex64> = (0..n)
                .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                .collect();
            let norm = dir.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            let radius = fiber_frac * bound * rng.random::<f64>();
            coords.extend(dir.iter().map(|c| c * (radius / norm)));
        }
        _ => {
            for _ in 0..n {
                let m = fiber_frac * bound * rng.random::<f64>();
                coords.push(Complex64::from_polar(m, 2.0 * PI * rng.random::<f64>()));
            }
        }
    }
    let p = CPoint::new(coords);
    assert!(spec.contains(&p).unwrap());
    p
}

/// Admissible indices whose monomials are bounded on the domain, i.e. with
/// shifted degree at least `kn`.
pub fn bounded_indices(spec: &DomainSpec, cap: u32) -> Vec<MultiIndex> {
    let kn = i64::from(spec.kn());
    enumerate(spec, cap)
        .unwrap()
        .into_iter()
        .filter(|m| m.shifted_degree(spec) >= kn)
        .collect()
}

pub fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}
