//! The Laurent-monomial orthogonal basis `z^α w^β` of the Bergman space of
//! `Ω_k` and `H_k`, with exact squared norms.
//!
//! A monomial is square integrable exactly when `β_j ≥ 0` and
//! `α ≥ -k(|β| + n)`. Writing `a = α + k(|β| + n)` for the shifted degree,
//! integration in polar coordinates on the base and the scaled fiber gives
//!
//! ```text
//! Ω_k:  ‖z^α w^β‖² = (2π)^{n+1} / ( ∏_j (2β_j + 2) · (2a + 2) )
//! H_k:  ‖z^α w^β‖² = π^{n+1} · β! / (n + |β|)! / (a + 1)
//! ```
//!
//! The fiber integral of `|w^β|²` over the polydisc (resp. ball) of radius
//! `|z|^k` contributes `|z|^{2k(|β|+n)}` times the unit-fiber norm, and the
//! remaining base integral is `2π ∫₀¹ r^{2a+1} dr = π/(a+1)`.

use std::cmp::Ordering;

use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::domains::{cpowi, CPoint, DomainKind, DomainSpec};
use crate::error::{Error, Result};

/// Exponent of the monomial `z^alpha · w_1^{beta_1} ⋯ w_n^{beta_n}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiIndex {
    pub alpha: i64,
    pub beta: Vec<u32>,
}

impl MultiIndex {
    pub fn new(alpha: i64, beta: Vec<u32>) -> Self {
        MultiIndex { alpha, beta }
    }

    /// Pure base monomial `z^alpha` in a fiber of dimension `n`.
    pub fn base(alpha: i64, n: u32) -> Self {
        MultiIndex {
            alpha,
            beta: vec![0; n as usize],
        }
    }

    /// `|β|`.
    pub fn fiber_degree(&self) -> u64 {
        self.beta.iter().map(|&b| u64::from(b)).sum()
    }

    /// `α + k(|β| + n)`, non-negative exactly for admissible indices.
    pub fn shifted_degree(&self, spec: &DomainSpec) -> i64 {
        self.alpha + i64::from(spec.k()) * (self.fiber_degree() as i64 + i64::from(spec.n()))
    }

    /// Evaluates the monomial at `p = (z, w)`. Non-finite when `z = 0` and
    /// `alpha < 0`.
    pub fn eval(&self, p: &CPoint) -> Complex64 {
        let mut v = cpowi(p.base(), self.alpha);
        for (w, &b) in p.fiber().iter().zip(&self.beta) {
            if b > 0 {
                v *= cpowi(*w, i64::from(b));
            }
        }
        v
    }

    fn order_key(&self, spec: &DomainSpec) -> (i64, u64) {
        (self.shifted_degree(spec), self.fiber_degree())
    }

    /// Total order used by [`enumerate`]: shifted degree, then `|β|`, then
    /// `β` lexicographically, then `α`.
    pub fn cmp_in(&self, other: &Self, spec: &DomainSpec) -> Ordering {
        self.order_key(spec)
            .cmp(&other.order_key(spec))
            .then_with(|| self.beta.cmp(&other.beta))
            .then_with(|| self.alpha.cmp(&other.alpha))
    }
}

/// Whether `m` indexes a square-integrable monomial of a Hartogs domain.
/// Always false for non-Hartogs specs or a fiber of the wrong length.
pub fn is_admissible(spec: &DomainSpec, m: &MultiIndex) -> bool {
    spec.is_hartogs() && m.beta.len() == spec.n() as usize && m.shifted_degree(spec) >= 0
}

fn require_admissible(spec: &DomainSpec, m: &MultiIndex) -> Result<()> {
    spec.require_hartogs("basis")?;
    if is_admissible(spec, m) {
        Ok(())
    } else {
        Err(Error::contract(format!(
            "index (alpha={}, beta={:?}) is not admissible for {spec}",
            m.alpha, m.beta
        )))
    }
}

fn factorial_big(n: u64) -> BigUint {
    (2..=n).fold(BigUint::one(), |acc, i| acc * i)
}

/// `(n + |β|)! / β!`, an integer, computed exactly.
fn ball_multinomial(n: u32, beta: &[u32]) -> BigUint {
    let total: u64 = beta.iter().map(|&b| u64::from(b)).sum::<u64>() + u64::from(n);
    let denom = beta
        .iter()
        .fold(BigUint::one(), |acc, &b| acc * factorial_big(u64::from(b)));
    factorial_big(total) / denom
}

/// The part of `‖z^α w^β‖²` that depends on `β` only; the norm is this
/// factor divided by `shifted_degree + 1`.
pub(crate) fn fiber_norm_factor(spec: &DomainSpec, beta: &[u32]) -> f64 {
    let n = spec.n() as i32;
    match spec.kind() {
        DomainKind::HartogsPolydisc => {
            let denom = beta
                .iter()
                .fold(BigUint::one(), |acc, &b| acc * (2 * u64::from(b) + 2));
            (2.0 * PI).powi(n + 1) / 2.0 / denom.to_f64().unwrap_or(f64::INFINITY)
        }
        DomainKind::HartogsBall => {
            let ratio = ball_multinomial(spec.n(), beta);
            PI.powi(n + 1) / ratio.to_f64().unwrap_or(f64::INFINITY)
        }
        _ => unreachable!("fiber_norm_factor on a non-Hartogs domain"),
    }
}

/// `‖z^α w^β‖²` in closed form.
pub fn norm_sq(spec: &DomainSpec, m: &MultiIndex) -> Result<f64> {
    require_admissible(spec, m)?;
    Ok(fiber_norm_factor(spec, &m.beta) / (m.shifted_degree(spec) + 1) as f64)
}

/// All `β ∈ ℤ_{≥0}^n` with `|β| = total`, in lexicographic order.
pub(crate) fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    fn rec(rest: u32, parts: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if parts == 1 {
            prefix.push(rest);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for b in 0..=rest {
            prefix.push(b);
            rec(rest - b, parts - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if parts > 0 {
        rec(total, parts, &mut Vec::with_capacity(parts), &mut out);
    }
    out
}

/// Admissible indices with `|β| ≤ cap` and `α + kn ≤ cap`, each once,
/// sorted by [`MultiIndex::cmp_in`].
///
/// Along each fiber exponent the base exponent runs from the admissibility
/// bound `-k(|β| + n)` up to `cap - kn`, so raising `cap` only ever adds
/// indices.
pub fn enumerate(spec: &DomainSpec, cap: u32) -> Result<Vec<MultiIndex>> {
    spec.require_hartogs("enumerate")?;
    let k = i64::from(spec.k());
    let n = i64::from(spec.n());
    let top = i64::from(cap) - k * n;
    let mut out = Vec::new();
    for total in 0..=cap {
        for beta in compositions(total, spec.n() as usize) {
            let low = -k * (i64::from(total) + n);
            for alpha in low..=top {
                out.push(MultiIndex::new(alpha, beta.clone()));
            }
        }
    }
    out.sort_by(|a, b| a.cmp_in(b, spec));
    Ok(out)
}
