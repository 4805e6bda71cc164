//! Fixtures shared by the benchmarks.

use hartogs_bergman::{CPoint, DomainSpec};

/// Both families at `(n, k) = (1, 1)` and `(2, 2)`.
pub fn specs() -> Vec<DomainSpec> {
    vec![
        DomainSpec::hartogs_polydisc(1, 1).unwrap(),
        DomainSpec::hartogs_ball(1, 1).unwrap(),
        DomainSpec::hartogs_polydisc(2, 2).unwrap(),
        DomainSpec::hartogs_ball(2, 2).unwrap(),
    ]
}

/// Two interior points well away from the boundary and the cusp.
pub fn point_pair(spec: &DomainSpec) -> (CPoint, CPoint) {
    let k = spec.k() as i32;
    let mut p = vec![0.0; spec.dim()];
    let mut q = vec![0.0; spec.dim()];
    p[0] = 0.55;
    q[0] = 0.45;
    for j in 1..spec.dim() {
        p[j] = 0.3 * 0.55f64.powi(k) / spec.n() as f64;
        q[j] = -0.2 * 0.45f64.powi(k) / spec.n() as f64;
    }
    (CPoint::real(&p), CPoint::real(&q))
}
