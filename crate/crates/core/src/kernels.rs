//! Bergman kernels in closed form, as orthogonal series, and through the
//! biholomorphic transformation law.
//!
//! With `η = z·x̄` and `ν_j = w_j·ȳ_j` for `p = (z, w)`, `q = (x, y)`:
//!
//! ```text
//! K_{Ω_k}(p, q) =       η^{kn} / ( π^{n+1} (1-η)² ∏_j (η^k - ν_j)² )
//! K_{H_k}(p, q) = n! ·  η^{k}  / ( π^{n+1} (1-η)² (η^k - Σ_j ν_j)^{n+1} )
//! ```
//!
//! Both follow from `K_Ω(p, q) = det φ'(p) · K_{𝔻×F}(φ(p), φ(q)) · conj(det φ'(q))`
//! with `F` the unit polydisc or ball. The `n!` in the ball-fibered kernel
//! is the normalisation of `K_{𝔹_n}` carried through that identity.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::basis::fiber_norm_factor;
use crate::domains::{cpowi, factorial, phi, phi_jacobian_det, CPoint, DomainKind, DomainSpec};
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn nonzero(d: Complex64, what: &str) -> Result<Complex64> {
    if d == ZERO {
        Err(Error::Pole(format!("{what} vanishes")))
    } else {
        Ok(d)
    }
}

/// `K_𝔻(z, x) = 1 / (π (1 - z x̄)²)`.
pub fn disc_kernel(z: Complex64, x: Complex64) -> Result<Complex64> {
    let d = nonzero(ONE - z * x.conj(), "1 - z·conj(x)")?;
    Ok((d * d).inv() / PI)
}

/// `K_{𝔻^n}(z, x) = π^{-n} ∏_j (1 - z_j x̄_j)^{-2}`.
pub fn polydisc_kernel(z: &[Complex64], x: &[Complex64]) -> Result<Complex64> {
    z.iter()
        .zip(x)
        .try_fold(ONE, |acc, (a, b)| Ok(acc * disc_kernel(*a, *b)?))
}

/// `K_{𝔹_n}(z, x) = n!/π^n · (1 - ⟨z, x⟩)^{-(n+1)}`.
pub fn ball_kernel(z: &[Complex64], x: &[Complex64]) -> Result<Complex64> {
    let n = z.len() as u32;
    let inner: Complex64 = z.iter().zip(x).map(|(a, b)| a * b.conj()).sum();
    let d = nonzero(ONE - inner, "1 - <z, x>")?;
    Ok(factorial(n) / PI.powi(n as i32) * cpowi(d, -(i64::from(n) + 1)))
}

/// Closed-form Bergman kernel `K(p, q)`.
///
/// Only the dimensions are checked: evaluation is allowed arbitrarily close
/// to poles, and an exactly vanishing denominator is reported as
/// [`Error::Pole`]. Use [`KernelQuery`] to also enforce interior points.
pub fn kernel_closed(spec: &DomainSpec, p: &CPoint, q: &CPoint) -> Result<Complex64> {
    spec.check_dim(p)?;
    spec.check_dim(q)?;
    let (a, b) = (p.coords(), q.coords());
    match spec.kind() {
        DomainKind::UnitDisc | DomainKind::PuncturedDisc => disc_kernel(a[0], b[0]),
        DomainKind::Polydisc => polydisc_kernel(a, b),
        DomainKind::Ball => ball_kernel(a, b),
        DomainKind::HartogsPolydisc | DomainKind::HartogsBall => hartogs_closed(spec, p, q),
    }
}

fn hartogs_closed(spec: &DomainSpec, p: &CPoint, q: &CPoint) -> Result<Complex64> {
    let n = spec.n();
    let k = i64::from(spec.k());
    let eta = p.base() * q.base().conj();
    let eta_k = cpowi(eta, k);
    let one_minus = nonzero(ONE - eta, "1 - eta")?;
    let nu = p.fiber().iter().zip(q.fiber()).map(|(w, y)| w * y.conj());
    let prefactor = (one_minus * one_minus).inv() / PI.powi(n as i32 + 1);
    if spec.kind() == DomainKind::HartogsPolydisc {
        let mut denom = ONE;
        for v in nu {
            let d = nonzero(eta_k - v, "eta^k - nu_j")?;
            denom *= d * d;
        }
        Ok(cpowi(eta, k * i64::from(n)) * prefactor / denom)
    } else {
        let d = nonzero(eta_k - nu.sum::<Complex64>(), "eta^k - sum(nu)")?;
        Ok(factorial(n) * eta_k * prefactor * cpowi(d, -(i64::from(n) + 1)))
    }
}

/// A kernel evaluation whose arguments were checked to be interior points.
#[derive(Clone, Debug)]
pub struct KernelQuery {
    spec: DomainSpec,
    p: CPoint,
    q: CPoint,
}

impl KernelQuery {
    pub fn new(spec: DomainSpec, p: CPoint, q: CPoint) -> Result<Self> {
        spec.require_interior(&p, "first argument")?;
        spec.require_interior(&q, "second argument")?;
        Ok(KernelQuery { spec, p, q })
    }

    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    pub fn p(&self) -> &CPoint {
        &self.p
    }

    pub fn q(&self) -> &CPoint {
        &self.q
    }

    /// `η = z·x̄`.
    pub fn eta(&self) -> Complex64 {
        self.p.base() * self.q.base().conj()
    }

    /// `ν_j = w_j·ȳ_j`.
    pub fn nu(&self) -> Vec<Complex64> {
        self.p
            .fiber()
            .iter()
            .zip(self.q.fiber())
            .map(|(w, y)| w * y.conj())
            .collect()
    }

    pub fn closed(&self) -> Result<Complex64> {
        kernel_closed(&self.spec, &self.p, &self.q)
    }
}

/// Truncation control for [`kernel_series_with`].
#[derive(Clone, Copy, Debug)]
pub struct SeriesOptions {
    /// Relative size of a frontier below which the sum is accepted.
    pub tol: f64,
    /// Give up after this many frontiers.
    pub max_frontiers: usize,
}

impl SeriesOptions {
    pub fn new(tol: f64) -> Self {
        SeriesOptions {
            tol,
            max_frontiers: 1000,
        }
    }
}

/// Outcome of a truncated orthogonal-series evaluation.
#[derive(Clone, Copy, Debug)]
pub struct SeriesSum {
    pub value: Complex64,
    /// Number of frontiers summed.
    pub frontiers: usize,
    pub terms: usize,
}

/// Bergman kernel as `Σ_m e_m(p) conj(e_m(q)) / ‖e_m‖²` over the admissible
/// monomial basis, summed frontier by frontier in total degree
/// `N = (α + k(|β|+n)) + |β|`.
pub fn kernel_series(spec: &DomainSpec, p: &CPoint, q: &CPoint, tol: f64) -> Result<Complex64> {
    kernel_series_with(spec, p, q, SeriesOptions::new(tol)).map(|s| s.value)
}

pub fn kernel_series_with(
    spec: &DomainSpec,
    p: &CPoint,
    q: &CPoint,
    opts: SeriesOptions,
) -> Result<SeriesSum> {
    spec.require_hartogs("kernel_series")?;
    spec.check_dim(p)?;
    spec.check_dim(q)?;
    if opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(Error::contract(format!(
            "tolerance must be positive, got {}",
            opts.tol
        )));
    }
    if p.base() == ZERO || q.base() == ZERO {
        return Err(Error::Pole(
            "series terms z^alpha with alpha < 0 at a zero base".into(),
        ));
    }
    spec.require_interior(p, "first argument")?;
    spec.require_interior(q, "second argument")?;

    let n = spec.n() as usize;
    let k = i64::from(spec.k());
    let eta = p.base() * q.base().conj();
    // e_m(p) conj(e_m(q)) = η^{α+k|β|} Π (ν_j/η^k)^{β_j}; both factors stay
    // bounded where η^α and ν^β separately overflow.
    let eta_k = cpowi(eta, k);
    let ratio: Vec<Complex64> = p
        .fiber()
        .iter()
        .zip(q.fiber())
        .map(|(w, y)| w * y.conj() / eta_k)
        .collect();
    let kn = i64::from(spec.kn());

    let mut factors: HashMap<Vec<u32>, f64> = HashMap::new();
    let mut sum = ZERO;
    let mut terms = 0usize;
    let mut quiet = 0;
    for frontier in 0..opts.max_frontiers {
        let mut contribution = ZERO;
        let mut magnitude = 0.0;
        for fiber_deg in 0..=frontier as u32 {
            let shifted = frontier as i64 - i64::from(fiber_deg);
            let eta_part = cpowi(eta, shifted - kn) * (shifted + 1) as f64;
            for beta in crate::basis::compositions(fiber_deg, n) {
                let nu_part = ratio
                    .iter()
                    .zip(&beta)
                    .fold(ONE, |acc, (v, &b)| acc * cpowi(*v, i64::from(b)));
                let factor = *factors
                    .entry(beta)
                    .or_insert_with_key(|b| fiber_norm_factor(spec, b));
                let term = eta_part * nu_part / factor;
                contribution += term;
                magnitude += term.norm();
                terms += 1;
            }
        }
        sum += contribution;
        if !sum.is_finite() {
            return Err(Error::ConvergenceFailure {
                frontiers: frontier + 1,
            });
        }
        if magnitude < opts.tol * sum.norm() {
            quiet += 1;
            if quiet == 2 {
                return Ok(SeriesSum {
                    value: sum,
                    frontiers: frontier + 1,
                    terms,
                });
            }
        } else {
            quiet = 0;
        }
    }
    Err(Error::ConvergenceFailure {
        frontiers: opts.max_frontiers,
    })
}

/// Kernel through the transformation law under `φ`, using the disc kernel
/// on the base and the polydisc or ball kernel on the fiber.
pub fn kernel_via_transform(spec: &DomainSpec, p: &CPoint, q: &CPoint) -> Result<Complex64> {
    spec.require_hartogs("kernel_via_transform")?;
    let (fp, fq) = (phi(spec, p)?, phi(spec, q)?);
    let (jp, jq) = (phi_jacobian_det(spec, p)?, phi_jacobian_det(spec, q)?);
    let base = disc_kernel(fp.base(), fq.base())?;
    let fiber = match spec.kind() {
        DomainKind::HartogsPolydisc => polydisc_kernel(fp.fiber(), fq.fiber())?,
        _ => ball_kernel(fp.fiber(), fq.fiber())?,
    };
    Ok(jp * base * fiber * jq.conj())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn origin_values() {
        let o = CPoint::real(&[0.0]);
        let v = kernel_closed(&DomainSpec::unit_disc(), &o, &o).unwrap();
        assert_relative_eq!(v.re, 1.0 / PI, max_relative = 1e-15);
        assert!((v.re - 0.31830989).abs() < 5e-9);
        let o2 = CPoint::real(&[0.0, 0.0]);
        let v = kernel_closed(&DomainSpec::ball(2).unwrap(), &o2, &o2).unwrap();
        assert_relative_eq!(v.re, 2.0 / (PI * PI), max_relative = 1e-15);
        let v = kernel_closed(&DomainSpec::polydisc(2).unwrap(), &o2, &o2).unwrap();
        assert_relative_eq!(v.re, 1.0 / (PI * PI), max_relative = 1e-15);
    }

    #[test]
    fn hartogs_ball_example() {
        let spec = DomainSpec::hartogs_ball(1, 1).unwrap();
        let p = CPoint::real(&[0.5, 0.1]);
        let v = kernel_closed(&spec, &p, &p).unwrap();
        let expected = 0.25 / (PI * PI * 0.5625 * 0.0576);
        assert_relative_eq!(v.re, expected, max_relative = 1e-14);
        assert!((v.re - 0.78181).abs() < 2e-5);
        assert!(v.im.abs() < 1e-15);
    }

    #[test]
    fn series_matches_closed_form_examples() {
        let p = CPoint::real(&[0.5, 0.1]);
        let o1 = DomainSpec::hartogs_polydisc(1, 1).unwrap();
        let h1 = DomainSpec::hartogs_ball(1, 1).unwrap();
        let closed = kernel_closed(&o1, &p, &p).unwrap();
        let series = kernel_series(&o1, &p, &p, 1e-8).unwrap();
        assert!(rel(series, closed) < 1e-6);
        let series_h = kernel_series(&h1, &p, &p, 1e-8).unwrap();
        assert!(rel(series_h, series) < 1e-12);
    }

    #[test]
    fn series_detects_ball_normalisation() {
        // The n! factor is what makes the series and the closed form agree
        // for n >= 2.
        let spec = DomainSpec::hartogs_ball(2, 1).unwrap();
        let p = CPoint::new(vec![c(0.6, 0.1), c(0.1, 0.05), c(-0.05, 0.1)]);
        let q = CPoint::new(vec![c(0.4, -0.2), c(0.05, 0.0), c(0.1, 0.1)]);
        let closed = kernel_closed(&spec, &p, &q).unwrap();
        let series = kernel_series(&spec, &p, &q, 1e-10).unwrap();
        assert!(rel(series, closed) < 1e-8, "{series} vs {closed}");
    }

    #[test]
    fn series_pole_at_zero_base() {
        let spec = DomainSpec::hartogs_polydisc(1, 1).unwrap();
        let p = CPoint::real(&[0.5, 0.1]);
        let q = CPoint::real(&[0.0, 0.0]);
        assert!(matches!(
            kernel_series(&spec, &p, &q, 1e-8),
            Err(Error::Pole(_))
        ));
        // closed form at eta = 0 with nu = 0 is a 0/0 pole as well
        assert!(matches!(kernel_closed(&spec, &p, &q), Err(Error::Pole(_))));
    }

    #[test]
    fn series_convergence_guard() {
        let spec = DomainSpec::hartogs_polydisc(1, 1).unwrap();
        let p = CPoint::real(&[0.99, 0.98]);
        let opts = SeriesOptions {
            tol: 1e-12,
            max_frontiers: 5,
        };
        assert!(matches!(
            kernel_series_with(&spec, &p, &p, opts),
            Err(Error::ConvergenceFailure { frontiers: 5 })
        ));
        assert!(kernel_series(&spec, &p, &p, 0.0).is_err());
    }

    #[test]
    fn exact_poles_error() {
        let disc = DomainSpec::unit_disc();
        let one = CPoint::real(&[1.0]);
        assert!(matches!(
            kernel_closed(&disc, &one, &one),
            Err(Error::Pole(_))
        ));
        let spec = DomainSpec::hartogs_polydisc(1, 1).unwrap();
        // eta^k = nu on the boundary |w| = |z|^k
        let b = CPoint::real(&[0.5, 0.5]);
        assert!(matches!(kernel_closed(&spec, &b, &b), Err(Error::Pole(_))));
        // close to the pole the value is large but finite
        let near = CPoint::real(&[0.5, 0.5 - 1e-9]);
        let v = kernel_closed(&spec, &near, &near).unwrap();
        assert!(v.re.is_finite() && v.re > 1e12);
    }

    #[test]
    fn dimension_mismatch() {
        let spec = DomainSpec::hartogs_ball(2, 1).unwrap();
        let p = CPoint::real(&[0.5, 0.1]);
        assert!(matches!(
            kernel_closed(&spec, &p, &p),
            Err(Error::ContractViolation(_))
        ));
    }

    #[test]
    fn transform_examples() {
        let cases = [
            (
                DomainSpec::hartogs_polydisc(1, 1).unwrap(),
                CPoint::real(&[0.5, 0.1]),
                CPoint::real(&[0.5, 0.1]),
            ),
            (
                DomainSpec::hartogs_ball(2, 1).unwrap(),
                CPoint::new(vec![c(0.6, 0.0), c(0.1, 0.0), c(0.0, 0.2)]),
                CPoint::real(&[0.5, 0.05, 0.1]),
            ),
            (
                DomainSpec::hartogs_polydisc(1, 2).unwrap(),
                CPoint::real(&[0.7, 0.2]),
                CPoint::real(&[0.7, 0.2]),
            ),
        ];
        for (spec, p, q) in cases {
            let a = kernel_via_transform(&spec, &p, &q).unwrap();
            let b = kernel_closed(&spec, &p, &q).unwrap();
            assert!(rel(a, b) < 1e-12, "{spec}: {a} vs {b}");
        }
    }

    #[test]
    fn query_requires_interior() {
        let spec = DomainSpec::hartogs_polydisc(1, 1).unwrap();
        assert!(
            KernelQuery::new(spec, CPoint::real(&[0.5, 0.6]), CPoint::real(&[0.5, 0.1])).is_err()
        );
        let q =
            KernelQuery::new(spec, CPoint::real(&[0.5, 0.1]), CPoint::real(&[0.5, 0.1])).unwrap();
        assert_relative_eq!(q.eta().re, 0.25);
        assert_relative_eq!(q.nu()[0].re, 0.01, max_relative = 1e-15);
        assert!(q.closed().unwrap().re > 0.0);
    }
}
