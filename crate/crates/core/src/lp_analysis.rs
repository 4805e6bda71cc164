//! `L^p` mapping range of the Bergman projection, the radial integrals that
//! witness unboundedness, and the Schur-test experiment.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::domains::{derive_seed, factorial, CPoint, DomainKind, DomainSpec};
use crate::error::{Error, Result};
use crate::integrate::{integrate_mc_graded, FiberedPoint, Grading, IntegralEstimate};
use crate::kernels::kernel_closed;

pub type Exponent = Ratio<i64>;

/// Parses an exponent written as an integer, a decimal (`3.999`) or a
/// fraction (`4/3`).
pub fn parse_exponent(text: &str) -> Result<Exponent> {
    let text = text.trim();
    let bad = || Error::Parse(format!("invalid exponent {text:?}"));
    if let Some((num, den)) = text.split_once('/') {
        let num: i64 = num.trim().parse().map_err(|_| bad())?;
        let den: i64 = den.trim().parse().map_err(|_| bad())?;
        if den == 0 {
            return Err(bad());
        }
        return Ok(Ratio::new(num, den));
    }
    let (neg, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.strip_prefix('+').unwrap_or(text)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty()
        || !int.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit())
        || frac.len() > 15
    {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    let num: i64 = digits.parse().map_err(|_| bad())?;
    let value = Ratio::new(num, 10i64.pow(frac.len() as u32));
    Ok(if neg { -value } else { value })
}

pub fn exponent_to_f64(p: &Exponent) -> f64 {
    p.to_f64().unwrap_or(f64::NAN)
}

/// Hölder conjugate `p / (p - 1)`.
pub fn conjugate_exponent(p: &Exponent) -> Result<Exponent> {
    if *p <= Ratio::one() {
        return Err(Error::contract(format!(
            "exponent {p} has no finite conjugate"
        )));
    }
    Ok(p / (p - Ratio::one()))
}

/// Open interval of exponents on which the projection is bounded.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExponentInterval {
    pub p_low: Exponent,
    pub p_high: Exponent,
}

impl ExponentInterval {
    pub fn contains(&self, p: &Exponent) -> bool {
        self.p_low < *p && *p < self.p_high
    }
}

impl fmt::Display for ExponentInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.p_low, self.p_high)
    }
}

fn check_nk(n: u32, k: u32) -> Result<i64> {
    if n == 0 || k == 0 {
        return Err(Error::contract(format!(
            "n and k must be at least 1, got n={n}, k={k}"
        )));
    }
    Ok(i64::from(n) * i64::from(k))
}

/// `((2nk+2)/(nk+2), (2nk+2)/nk)`, exact.
pub fn critical_interval(n: u32, k: u32) -> Result<ExponentInterval> {
    let nk = check_nk(n, k)?;
    Ok(ExponentInterval {
        p_low: Ratio::new(2 * nk + 2, nk + 2),
        p_high: Ratio::new(2 * nk + 2, nk),
    })
}

/// Strict membership of `p` in [`critical_interval`]; requires `p > 1`.
pub fn is_bounded(p: &Exponent, n: u32, k: u32) -> Result<bool> {
    if *p <= Ratio::one() {
        return Err(Error::contract(format!("exponent must exceed 1, got {p}")));
    }
    Ok(critical_interval(n, k)?.contains(p))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "status", content = "value", rename_all = "lowercase")]
pub enum RadialIntegral {
    Finite(f64),
    Divergent,
}

impl RadialIntegral {
    pub fn is_finite(&self) -> bool {
        matches!(self, RadialIntegral::Finite(_))
    }

    pub fn value(&self) -> Option<f64> {
        match *self {
            RadialIntegral::Finite(v) => Some(v),
            RadialIntegral::Divergent => None,
        }
    }
}

/// `2π^{n+1} ∫₀¹ r^{1-pnk+2nk} dr`, which is `2π^{n+1}/(2 - pnk + 2nk)` when
/// that denominator is positive. The sign is decided in exact arithmetic.
pub fn radial_lp_integral(p: &Exponent, n: u32, k: u32) -> Result<RadialIntegral> {
    let nk = check_nk(n, k)?;
    if !p.is_positive() {
        return Err(Error::contract(format!(
            "exponent must be positive, got {p}"
        )));
    }
    let denom = Ratio::from_integer(2 + 2 * nk) - p * nk;
    if denom <= Ratio::zero() {
        return Ok(RadialIntegral::Divergent);
    }
    let pi_power = std::f64::consts::PI.powi(n as i32 + 1);
    Ok(RadialIntegral::Finite(
        2.0 * pi_power / exponent_to_f64(&denom),
    ))
}

/// `∫ |x|^{-pkn} dV` over a Hartogs domain: the radial integral, divided by
/// `n!` on `H_k`.
pub fn lp_norm_closed(spec: &DomainSpec, p: &Exponent) -> Result<RadialIntegral> {
    spec.require_hartogs("lp_norm_closed")?;
    Ok(match radial_lp_integral(p, spec.n(), spec.k())? {
        RadialIntegral::Finite(v) if spec.kind() == DomainKind::HartogsBall => {
            RadialIntegral::Finite(v / factorial(spec.n()))
        }
        other => other,
    })
}

// Extra draws near x = 0. The estimator has finite variance for
// p < 2 + (2 - LP_ORIGIN_POWER) / (kn) whenever the integral converges there.
const LP_ORIGIN_POWER: f64 = 0.25;

/// Monte Carlo estimate of `∫ |x|^{-pkn} dV`.
pub fn mc_lp_norm(spec: &DomainSpec, p: f64, seed: u64, count: usize) -> Result<IntegralEstimate> {
    spec.require_hartogs("mc_lp_norm")?;
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::contract(format!(
            "exponent must be positive, got {p}"
        )));
    }
    let power = -0.5 * p * f64::from(spec.kn());
    let grading = Grading {
        base_origin: Some(LP_ORIGIN_POWER),
        ..Grading::uniform()
    };
    integrate_mc_graded(
        spec,
        |q| num_complex::Complex64::new(q.base_sq.powf(power), 0.0),
        &grading,
        seed,
        count,
    )
}

#[derive(Clone, Debug, Serialize)]
pub struct DivergenceCheck {
    pub p: f64,
    pub small: IntegralEstimate,
    pub large: IntegralEstimate,
    /// `(large - small) / hypot(σ_small, σ_large)`.
    pub growth_sigmas: f64,
    pub triggered: bool,
}

/// Runs [`mc_lp_norm`] with `count` and `4·count` samples from the same seed
/// and flags growth beyond three combined standard errors.
pub fn divergence_diagnostic(
    spec: &DomainSpec,
    p: f64,
    seed: u64,
    count: usize,
) -> Result<DivergenceCheck> {
    let small = mc_lp_norm(spec, p, seed, count)?;
    let large = mc_lp_norm(spec, p, seed, 4 * count)?;
    let sigma = small.std_error.hypot(large.std_error);
    let growth = large.value.re - small.value.re;
    let growth_sigmas = if sigma > 0.0 {
        growth / sigma
    } else {
        f64::INFINITY * growth.signum()
    };
    Ok(DivergenceCheck {
        p,
        small,
        large,
        growth_sigmas,
        triggered: growth_sigmas > 3.0,
    })
}

/// Which weight is used on which domain family.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum SchurPairing {
    /// Ball-deficit weight on `H_k`, product-deficit weight on `Ω_k`.
    #[default]
    Natural,
    /// Ball-deficit weight on `Ω_k`, product-deficit weight on `H_k`.
    Swapped,
}

impl FromStr for SchurPairing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "natural" => Ok(SchurPairing::Natural),
            "swapped" => Ok(SchurPairing::Swapped),
            other => Err(Error::Parse(format!("unknown pairing {other:?}"))),
        }
    }
}

fn uses_ball_weight(spec: &DomainSpec, pairing: SchurPairing) -> bool {
    (spec.kind() == DomainKind::HartogsBall) == (pairing == SchurPairing::Natural)
}

/// Test weight at an interior point, with the natural pairing.
///
/// Ball deficit: `h = (1-|x|²) |x|^{2k(n-1)} (|x|^{2k} - Σ|y_j|²)`.
/// Product deficit: `g = (1-|x|²) Π (|x|^{2k} - |y_j|²)`.
pub fn schur_weight(spec: &DomainSpec, q: &CPoint) -> Result<f64> {
    schur_weight_with(spec, q, SchurPairing::Natural)
}

pub fn schur_weight_with(spec: &DomainSpec, q: &CPoint, pairing: SchurPairing) -> Result<f64> {
    spec.require_hartogs("schur_weight")?;
    spec.require_interior(q, "weight point")?;
    let s = q.base().norm_sqr();
    let sk = s.powi(spec.k() as i32);
    let fiber = q.fiber();
    let w = if uses_ball_weight(spec, pairing) {
        let sum: f64 = fiber.iter().map(|y| y.norm_sqr()).sum();
        (1.0 - s) * sk.powi(spec.n() as i32 - 1) * (sk - sum)
    } else {
        (1.0 - s) * fiber.iter().map(|y| sk - y.norm_sqr()).product::<f64>()
    };
    if w > 0.0 {
        Ok(w)
    } else {
        Err(Error::contract(format!(
            "weight is not positive at {q} on {spec}"
        )))
    }
}

/// Weight in fibered coordinates, `(1-s) s^{kn} D(u)`, using exact deficits
/// where the sampler provides them.
fn fibered_weight(kn: i32, ball: bool, native: bool, q: &FiberedPoint) -> f64 {
    let fiber = if native {
        q.fiber_deficits.iter().product::<f64>()
    } else if ball {
        1.0 - q.fiber.iter().map(|u| u.norm_sqr()).sum::<f64>()
    } else {
        q.fiber.iter().map(|u| 1.0 - u.norm_sqr()).product::<f64>()
    };
    q.base_deficit * q.base_sq.powi(kn) * fiber
}

/// A validated Schur exponent for one domain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SchurWeightSpec {
    epsilon: f64,
    domain: DomainSpec,
}

impl SchurWeightSpec {
    /// Accepts `1/2 ≤ ε < (kn+2)/(2kn)`.
    pub fn new(domain: DomainSpec, epsilon: f64) -> Result<Self> {
        domain.require_hartogs("SchurWeightSpec")?;
        let upper = Self::upper_bound(&domain);
        if !(0.5..upper).contains(&epsilon) {
            return Err(Error::contract(format!(
                "epsilon {epsilon} outside [1/2, {upper}) for {domain}"
            )));
        }
        Ok(SchurWeightSpec { epsilon, domain })
    }

    /// `(kn+2)/(2kn)`, the excluded upper end of the range.
    pub fn upper_bound(domain: &DomainSpec) -> f64 {
        let kn = f64::from(domain.kn());
        (kn + 2.0) / (2.0 * kn)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SchurEstimate {
    pub query: CPoint,
    /// `weight(query)^ε ∫ |K(query, ·)| weight^{-ε} dV`.
    pub ratio: f64,
    pub std_error: f64,
    pub weight: f64,
    pub integral: IntegralEstimate,
}

/// Schur ratio at one query point with the natural pairing.
pub fn schur_ratio(
    spec: &DomainSpec,
    eps: f64,
    query: &CPoint,
    seed: u64,
    count: usize,
) -> Result<SchurEstimate> {
    let ws = SchurWeightSpec::new(*spec, eps)?;
    schur_ratio_with(&ws, query, SchurPairing::Natural, seed, count)
}

/// Schur ratio for any `ε ≥ 1/2`, including exponents past the admissible
/// range (used to observe the growth there). For `ε ≥ 1` the integral is
/// infinite and the estimates do not settle.
pub fn schur_ratio_unchecked(
    spec: &DomainSpec,
    eps: f64,
    query: &CPoint,
    pairing: SchurPairing,
    seed: u64,
    count: usize,
) -> Result<SchurEstimate> {
    spec.require_hartogs("schur_ratio")?;
    if !(eps >= 0.5 && eps.is_finite()) {
        return Err(Error::contract(format!(
            "epsilon must be at least 1/2, got {eps}"
        )));
    }
    let ball = uses_ball_weight(spec, pairing);
    if ball && spec.kind() == DomainKind::HartogsPolydisc && spec.n() > 1 {
        return Err(Error::contract(format!(
            "ball-deficit weight is not positive on all of {spec}"
        )));
    }
    let weight = schur_weight_with(spec, query, pairing)?;
    let kn = spec.kn() as i32;
    let native = ball == (spec.kind() == DomainKind::HartogsBall);
    let edge = (1.0 - eps).max(0.05);
    let grading = Grading {
        base_origin: Some((1.0 + f64::from(spec.kn()) * (0.5 - eps)).clamp(0.05, 1.0)),
        base_edge: Some(edge),
        fiber_edge: Some(edge),
    };
    let integral = integrate_mc_graded(
        spec,
        |q| {
            let k = kernel_closed(spec, query, &q.point)
                .map(|v| v.norm())
                .unwrap_or(f64::NAN);
            let w = fibered_weight(kn, ball, native, q);
            num_complex::Complex64::new(k * w.powf(-eps), 0.0)
        },
        &grading,
        seed,
        count,
    )?;
    let scale = weight.powf(eps);
    Ok(SchurEstimate {
        query: query.clone(),
        ratio: integral.value.re * scale,
        std_error: integral.std_error * scale,
        weight,
        integral,
    })
}

pub fn schur_ratio_with(
    ws: &SchurWeightSpec,
    query: &CPoint,
    pairing: SchurPairing,
    seed: u64,
    count: usize,
) -> Result<SchurEstimate> {
    schur_ratio_unchecked(&ws.domain, ws.epsilon, query, pairing, seed, count)
}

/// Query points `(r, f·r^k, 0, …)` for every radius `r` and fiber fraction
/// `f`, radius-major.
pub fn schur_query_grid(
    spec: &DomainSpec,
    radii: &[f64],
    fractions: &[f64],
) -> Result<Vec<CPoint>> {
    spec.require_hartogs("schur_query_grid")?;
    let mut out = Vec::with_capacity(radii.len() * fractions.len());
    for &r in radii {
        for &f in fractions {
            let mut coords = vec![0.0; spec.dim()];
            coords[0] = r;
            coords[1] = f * r.powi(spec.k() as i32);
            let q = CPoint::real(&coords);
            spec.require_interior(&q, "query point")?;
            out.push(q);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct SchurSweep {
    pub epsilon: f64,
    pub rows: Vec<SchurEstimate>,
}

impl SchurSweep {
    /// Row with the largest ratio.
    pub fn max(&self) -> Option<&SchurEstimate> {
        self.rows.iter().max_by(|a, b| a.ratio.total_cmp(&b.ratio))
    }
}

/// [`schur_ratio_unchecked`] over `queries`, query `i` drawing from
/// `derive_seed(seed, i)`.
pub fn schur_sweep(
    spec: &DomainSpec,
    eps: f64,
    queries: &[CPoint],
    pairing: SchurPairing,
    seed: u64,
    count: usize,
) -> Result<SchurSweep> {
    let rows = queries
        .iter()
        .enumerate()
        .map(|(i, q)| {
            schur_ratio_unchecked(spec, eps, q, pairing, derive_seed(seed, i as u64), count)
        })
        .collect::<Result<_>>()?;
    Ok(SchurSweep { epsilon: eps, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn r(n: i64, d: i64) -> Exponent {
        Ratio::new(n, d)
    }

    #[test]
    fn interval_examples() {
        let i11 = critical_interval(1, 1).unwrap();
        assert_eq!((i11.p_low, i11.p_high), (r(4, 3), r(4, 1)));
        assert_eq!(
            critical_interval(1, 2).unwrap(),
            ExponentInterval {
                p_low: r(3, 2),
                p_high: r(3, 1)
            }
        );
        assert_eq!(
            critical_interval(2, 1).unwrap(),
            critical_interval(1, 2).unwrap()
        );
        assert!(critical_interval(0, 1).is_err());
    }

    #[test]
    fn boundedness_examples() {
        for (n, k) in [(1, 1), (2, 3), (6, 6)] {
            assert!(is_bounded(&r(2, 1), n, k).unwrap());
        }
        assert!(!is_bounded(&r(4, 1), 1, 1).unwrap());
        assert!(!is_bounded(&r(4, 3), 1, 1).unwrap());
        assert!(is_bounded(&r(3999, 1000), 1, 1).unwrap());
        assert!(is_bounded(&r(1, 1), 1, 1).is_err());
    }

    #[test]
    fn parses_exponents() {
        assert_eq!(parse_exponent("4/3").unwrap(), r(4, 3));
        assert_eq!(parse_exponent("3.999").unwrap(), r(3999, 1000));
        assert_eq!(parse_exponent(" 2 ").unwrap(), r(2, 1));
        assert_eq!(parse_exponent(".5").unwrap(), r(1, 2));
        for bad in ["", "a", "1/0", "1e3", "1.2.3", "."] {
            assert!(parse_exponent(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn radial_integral_examples() {
        let two = radial_lp_integral(&r(2, 1), 1, 1).unwrap();
        assert_relative_eq!(two.value().unwrap(), PI * PI, max_relative = 1e-15);
        assert_eq!(
            radial_lp_integral(&r(4, 1), 1, 1).unwrap(),
            RadialIntegral::Divergent
        );
        // 2 - pnk + 2nk = 0.001 at p = 3.999
        let near = radial_lp_integral(&r(3999, 1000), 1, 1)
            .unwrap()
            .value()
            .unwrap();
        assert_relative_eq!(near, 2.0 * PI * PI / 0.001, max_relative = 1e-12);
    }

    #[test]
    fn radial_integral_matches_midpoint_rule() {
        // ∫₀¹ r^e dr by composite midpoint on a smooth integrand
        let e = 1.0 - 2.5 * 2.0 + 2.0 * 2.0;
        let m = 200_000;
        let h = 1.0 / m as f64;
        let quad: f64 = (0..m).map(|i| ((i as f64 + 0.5) * h).powf(e) * h).sum();
        let v = radial_lp_integral(&r(5, 2), 1, 2).unwrap().value().unwrap();
        assert_relative_eq!(v, 2.0 * PI * PI * quad, max_relative = 1e-6);
    }

    #[test]
    fn closed_norm_on_ball_carries_factorial() {
        let h = DomainSpec::hartogs_ball(2, 1).unwrap();
        let o = DomainSpec::hartogs_polydisc(2, 1).unwrap();
        let vh = lp_norm_closed(&h, &r(2, 1)).unwrap().value().unwrap();
        let vo = lp_norm_closed(&o, &r(2, 1)).unwrap().value().unwrap();
        assert_relative_eq!(vo, 2.0 * vh, max_relative = 1e-15);
        assert!(lp_norm_closed(&DomainSpec::ball(2).unwrap(), &r(2, 1)).is_err());
    }

    #[test]
    fn weight_examples() {
        let q = CPoint::real(&[0.5, 0.1]);
        let h1 = DomainSpec::hartogs_ball(1, 1).unwrap();
        let o1 = DomainSpec::hartogs_polydisc(1, 1).unwrap();
        assert_relative_eq!(schur_weight(&h1, &q).unwrap(), 0.18, max_relative = 1e-14);
        assert_relative_eq!(schur_weight(&o1, &q).unwrap(), 0.18, max_relative = 1e-14);
        let near = CPoint::real(&[0.5, 0.5 - 1e-9]);
        assert!(schur_weight(&o1, &near).unwrap() < 1e-9);
        assert!(schur_weight(&o1, &CPoint::real(&[0.5, 0.6]))
            .unwrap_err()
            .is_contract());
    }

    #[test]
    fn swapped_pairing_can_lose_positivity() {
        let o2 = DomainSpec::hartogs_polydisc(2, 1).unwrap();
        let q = CPoint::real(&[0.6, 0.5, 0.5]);
        assert!(schur_weight(&o2, &q).unwrap() > 0.0);
        assert!(schur_weight_with(&o2, &q, SchurPairing::Swapped)
            .unwrap_err()
            .is_contract());
        assert!(schur_ratio_unchecked(
            &o2,
            0.6,
            &CPoint::real(&[0.5, 0.1, 0.1]),
            SchurPairing::Swapped,
            0,
            100
        )
        .is_err());
        let h2 = DomainSpec::hartogs_ball(2, 1).unwrap();
        let qh = CPoint::real(&[0.6, 0.3, 0.3]);
        assert!(schur_weight_with(&h2, &qh, SchurPairing::Swapped).unwrap() > 0.0);
    }

    #[test]
    fn epsilon_range() {
        let o1 = DomainSpec::hartogs_polydisc(1, 1).unwrap();
        assert!(SchurWeightSpec::new(o1, 0.5).is_ok());
        assert!(SchurWeightSpec::new(o1, 1.49).is_ok());
        assert!(SchurWeightSpec::new(o1, 1.5).is_err());
        assert!(SchurWeightSpec::new(o1, 0.49).is_err());
        let o22 = DomainSpec::hartogs_polydisc(2, 2).unwrap();
        assert!(SchurWeightSpec::new(o22, 0.75).is_err());
        assert!(schur_ratio(&o1, 0.4, &CPoint::real(&[0.5, 0.1]), 0, 100).is_err());
    }

    #[test]
    fn mc_lp_norm_small_exponent_approaches_volume() {
        let o1 = DomainSpec::hartogs_polydisc(1, 1).unwrap();
        let e = mc_lp_norm(&o1, 1e-9, 1, 20_000).unwrap();
        assert!(
            e.z_score(num_complex::Complex64::new(PI * PI / 2.0, 0.0)) < 3.0,
            "{e:?}"
        );
        assert!(mc_lp_norm(&o1, 0.0, 1, 100).is_err());
    }

    #[test]
    fn mc_lp_norm_reproducible() {
        let o1 = DomainSpec::hartogs_polydisc(1, 1).unwrap();
        let a = mc_lp_norm(&o1, 2.0, 9, 10_000).unwrap();
        let b = mc_lp_norm(&o1, 2.0, 9, 10_000).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn query_grid_shape() {
        let o1 = DomainSpec::hartogs_polydisc(1, 2).unwrap();
        let g = schur_query_grid(&o1, &[0.3, 0.7], &[0.0, 0.5, 0.9]).unwrap();
        assert_eq!(g.len(), 6);
        assert_eq!(g[5].base().re, 0.7);
        assert_relative_eq!(g[5].fiber()[0].re, 0.9 * 0.49, max_relative = 1e-15);
        assert!(schur_query_grid(&o1, &[0.5], &[1.0]).is_err());
    }
}
