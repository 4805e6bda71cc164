//! Integration over the supported domains.
//!
//! Deterministic rules work in fibered coordinates: the base `x = √s·e^{iθ}`
//! and the fiber `y = |x|^k·u` with `u` in the unit polydisc or ball. In
//! these coordinates `dV = ½ s^{kn} ds dθ · dV(u)` and every domain becomes a
//! product, so a tensor rule never straddles the cusp at `x = 0`.
//!
//! Radial variables use Gauss–Legendre in the squared radius on `(0, 1)`;
//! the base weight `s^{kn}` is folded into the integrand. Ball fibers use
//! collapsed (Duffy) coordinates on the simplex of squared moduli. Angles use
//! the trapezoid rule, exact for trigonometric polynomials of degree below
//! `angular_order`.
//!
//! Monte Carlo reductions are done chunk by chunk over a fixed chunking of
//! the sample stream and merged pairwise in index order, so results do not
//! depend on the thread count.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::domains::{
    ball_point_with_radius, chunk_rng, open01, CPoint, DomainSpec, Fiber, Layout, SampleStream,
    SAMPLE_CHUNK,
};
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Tensor-product rule: `radial_order` Gauss–Legendre points per radial
/// variable and `angular_order` trapezoid points per angle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuadratureRule {
    pub radial_order: usize,
    pub angular_order: usize,
}

impl QuadratureRule {
    pub fn new(radial_order: usize, angular_order: usize) -> Result<Self> {
        if radial_order < 2 || angular_order < 4 {
            return Err(Error::contract(format!(
                "quadrature orders must satisfy radial >= 2, angular >= 4 (got {radial_order}, {angular_order})"
            )));
        }
        Ok(QuadratureRule {
            radial_order,
            angular_order,
        })
    }

    /// The rule with both orders doubled.
    pub fn doubled(&self) -> Self {
        QuadratureRule {
            radial_order: 2 * self.radial_order,
            angular_order: 2 * self.angular_order,
        }
    }
}

impl Default for QuadratureRule {
    fn default() -> Self {
        QuadratureRule {
            radial_order: 16,
            angular_order: 32,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IntegralEstimate {
    pub value: Complex64,
    /// Zero for deterministic rules.
    pub std_error: f64,
    pub node_count: usize,
    /// Non-finite Monte Carlo draws left out of the mean.
    pub excluded: usize,
}

impl IntegralEstimate {
    /// `|self - target|` in units of the standard error; infinite when the
    /// error is zero and the values differ.
    pub fn z_score(&self, target: Complex64) -> f64 {
        let d = (self.value - target).norm();
        if d == 0.0 {
            0.0
        } else {
            d / self.std_error
        }
    }

    /// `|self - other| / sqrt(σ₁² + σ₂²)`.
    pub fn combined_z(&self, other: &IntegralEstimate) -> f64 {
        let d = (self.value - other.value).norm();
        if d == 0.0 {
            0.0
        } else {
            d / self.std_error.hypot(other.std_error)
        }
    }
}

// ---------------------------------------------------------------------------
// Reductions
// ---------------------------------------------------------------------------

pub(crate) fn pairwise_sum(xs: &[Complex64]) -> Complex64 {
    match xs.len() {
        0 => ZERO,
        1 => xs[0],
        len if len <= 8 => xs.iter().sum(),
        len => {
            let (a, b) = xs.split_at(len / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

fn pairwise_sum_real(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        len if len <= 8 => xs.iter().sum(),
        len => {
            let (a, b) = xs.split_at(len / 2);
            pairwise_sum_real(a) + pairwise_sum_real(b)
        }
    }
}

/// Running sample statistics of complex values: count, mean and
/// `Σ |x - mean|²`.
#[derive(Clone, Copy, Debug)]
struct Moments {
    n: usize,
    mean: Complex64,
    m2: f64,
    excluded: usize,
}

impl Moments {
    fn from_values(values: &[Complex64]) -> Self {
        let finite: Vec<Complex64> = values.iter().copied().filter(|v| v.is_finite()).collect();
        let excluded = values.len() - finite.len();
        if finite.is_empty() {
            return Moments {
                n: 0,
                mean: ZERO,
                m2: 0.0,
                excluded,
            };
        }
        let mean = pairwise_sum(&finite) / finite.len() as f64;
        let dev: Vec<f64> = finite.iter().map(|v| (v - mean).norm_sqr()).collect();
        Moments {
            n: finite.len(),
            mean,
            m2: pairwise_sum_real(&dev),
            excluded,
        }
    }

    fn merge(a: Moments, b: Moments) -> Moments {
        let n = a.n + b.n;
        let excluded = a.excluded + b.excluded;
        if a.n == 0 {
            return Moments { excluded, ..b };
        }
        if b.n == 0 {
            return Moments { excluded, ..a };
        }
        let delta = b.mean - a.mean;
        let (na, nb, nt) = (a.n as f64, b.n as f64, n as f64);
        Moments {
            n,
            mean: a.mean + delta * (nb / nt),
            m2: a.m2 + b.m2 + delta.norm_sqr() * na * nb / nt,
            excluded,
        }
    }

    fn tree(parts: &[Moments]) -> Moments {
        match parts.len() {
            0 => Moments {
                n: 0,
                mean: ZERO,
                m2: 0.0,
                excluded: 0,
            },
            1 => parts[0],
            len => {
                let (a, b) = parts.split_at(len / 2);
                Moments::merge(Moments::tree(a), Moments::tree(b))
            }
        }
    }

    fn into_estimate(self, scale: f64, count: usize) -> Result<IntegralEstimate> {
        let budget = count / 1000;
        if self.excluded > budget || self.n < 2 {
            return Err(Error::ExcessNonFinite {
                excluded: self.excluded,
                count,
                budget,
            });
        }
        let var = self.m2 / (self.n - 1) as f64;
        Ok(IntegralEstimate {
            value: self.mean * scale,
            std_error: scale * (var / self.n as f64).sqrt(),
            node_count: count,
            excluded: self.excluded,
        })
    }
}

// ---------------------------------------------------------------------------
// Deterministic tensor rule
// ---------------------------------------------------------------------------

/// Gauss–Legendre nodes and weights on `(0, 1)`.
pub fn gauss_legendre_unit(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let nf = order as f64;
    for i in 0..order.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // P_n(x) and P_n'(x) by the three-term recurrence
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=order {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if order == 1 { x } else { p1 };
            let pm = if order == 1 { 1.0 } else { p0 };
            dp = nf * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = 0.5 * (1.0 - x);
        weights[i] = 0.5 * w;
        nodes[order - 1 - i] = 0.5 * (1.0 + x);
        weights[order - 1 - i] = 0.5 * w;
    }
    (nodes, weights)
}

/// One tensor node of the radial variables.
#[derive(Clone, Debug)]
pub(crate) struct RadialNode {
    /// Squared base radius (unused without a base).
    pub s: f64,
    /// Squared moduli of the unit-fiber coordinates.
    pub t: Vec<f64>,
    pub weight: f64,
}

/// Radial tensor nodes and the angular grid of a rule on a domain.
pub(crate) struct QuadGrid {
    pub layout: Layout,
    pub radial: Vec<RadialNode>,
    pub angular_order: usize,
    /// Number of angle variables.
    pub angle_dims: usize,
    /// `e^{2πij/angular_order}`.
    roots: Vec<Complex64>,
}

impl QuadGrid {
    pub fn new(spec: &DomainSpec, rule: &QuadratureRule) -> Self {
        let layout = spec.layout();
        let (x, w) = gauss_legendre_unit(rule.radial_order);
        let order = rule.radial_order;

        // fiber tuples (t, weight)
        let nf = layout.fiber.dim();
        let mut fiber_nodes: Vec<(Vec<f64>, f64)> = Vec::new();
        let total = order.pow(nf as u32);
        for flat in 0..total {
            let mut idx = flat;
            let mut tau = Vec::with_capacity(nf);
            let mut weight = 0.5f64.powi(nf as i32);
            for _ in 0..nf {
                tau.push(x[idx % order]);
                weight *= w[idx % order];
                idx /= order;
            }
            let t = match layout.fiber {
                Fiber::Polydisc(_) => tau,
                Fiber::Ball(_) => {
                    // collapsed coordinates of the simplex Σ t_j < 1
                    let mut rest = 1.0;
                    let mut t = Vec::with_capacity(nf);
                    for &tj in &tau {
                        t.push(rest * tj);
                        weight *= rest;
                        rest *= 1.0 - tj;
                    }
                    t
                }
            };
            fiber_nodes.push((t, weight));
        }

        let radial = match layout.base {
            None => fiber_nodes
                .into_iter()
                .map(|(t, weight)| RadialNode { s: 0.0, t, weight })
                .collect(),
            Some(base) => {
                let mut out = Vec::with_capacity(order * fiber_nodes.len());
                for (&s, &ws) in x.iter().zip(&w) {
                    let bw = 0.5 * ws * s.powi(base.kn as i32);
                    for (t, fw) in &fiber_nodes {
                        out.push(RadialNode {
                            s,
                            t: t.clone(),
                            weight: bw * fw,
                        });
                    }
                }
                out
            }
        };
        let angle_dims = nf + usize::from(layout.base.is_some());
        QuadGrid {
            layout,
            radial,
            angular_order: rule.angular_order,
            roots: (0..rule.angular_order)
                .map(|j| {
                    Complex64::from_polar(1.0, 2.0 * PI * j as f64 / rule.angular_order as f64)
                })
                .collect(),
            angle_dims,
        }
    }

    pub fn angular_count(&self) -> usize {
        self.angular_order.pow(self.angle_dims as u32)
    }

    pub fn angular_weight(&self) -> f64 {
        (2.0 * PI / self.angular_order as f64).powi(self.angle_dims as i32)
    }

    pub fn node_count(&self) -> usize {
        self.radial.len() * self.angular_count()
    }

    /// Point at radial node `r` and flat angular index `a`. The first angle
    /// is the base angle when there is a base; the flat index runs with the
    /// last angle fastest.
    pub fn point(&self, r: &RadialNode, a: usize) -> CPoint {
        let m = self.angular_order;
        let mut coords = vec![Complex64::new(0.0, 0.0); self.angle_dims];
        let mut idx = a;
        for slot in coords.iter_mut().rev() {
            *slot = self.roots[idx % m];
            idx /= m;
        }
        let offset = usize::from(self.layout.base.is_some());
        for (c, &t) in coords[offset..].iter_mut().zip(&r.t) {
            *c *= t.sqrt();
        }
        if let Some(base) = self.layout.base {
            let radius = r.s.sqrt();
            let scale = radius.powi(base.k as i32);
            coords[0] *= radius;
            for c in &mut coords[1..] {
                *c *= scale;
            }
        }
        CPoint::new(coords)
    }
}

/// Tensor-rule estimate of `∫ f dV` over `spec`. Refuses non-finite node
/// values.
pub fn integrate_quad<F>(spec: &DomainSpec, f: F, rule: &QuadratureRule) -> Result<IntegralEstimate>
where
    F: Fn(&CPoint) -> Complex64 + Sync,
{
    let mut out = integrate_quad_vec(spec, 1, |p, buf| buf[0] = f(p), rule)?;
    Ok(out.remove(0))
}

/// Vector-valued version of [`integrate_quad`]: `f` fills `dim` values per
/// node, all integrated on the same nodes.
pub fn integrate_quad_vec<F>(
    spec: &DomainSpec,
    dim: usize,
    f: F,
    rule: &QuadratureRule,
) -> Result<Vec<IntegralEstimate>>
where
    F: Fn(&CPoint, &mut [Complex64]) + Sync,
{
    let grid = QuadGrid::new(spec, rule);
    let per_radial = grid.angular_count();
    let partial: Vec<Vec<Complex64>> = grid
        .radial
        .par_iter()
        .enumerate()
        .map(|(ri, node)| {
            let mut cols = vec![Vec::with_capacity(per_radial); dim];
            let mut buf = vec![ZERO; dim];
            for a in 0..per_radial {
                let p = grid.point(node, a);
                f(&p, &mut buf);
                for (col, &v) in cols.iter_mut().zip(&buf) {
                    if !v.is_finite() {
                        return Err(Error::NonFinite {
                            index: ri * per_radial + a,
                        });
                    }
                    col.push(v);
                }
            }
            Ok(cols.iter().map(|c| pairwise_sum(c) * node.weight).collect())
        })
        .collect::<Result<_>>()?;
    let scale = grid.angular_weight();
    Ok((0..dim)
        .map(|d| {
            let col: Vec<Complex64> = partial.iter().map(|row| row[d]).collect();
            IntegralEstimate {
                value: pairwise_sum(&col) * scale,
                std_error: 0.0,
                node_count: grid.node_count(),
                excluded: 0,
            }
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Uniform Monte Carlo
// ---------------------------------------------------------------------------

/// `volume × mean(f)` over `count` uniform points drawn from `seed`.
///
/// Non-finite draws are excluded up to 0.1% of `count`; beyond that the
/// estimate is refused.
pub fn integrate_mc<F>(spec: &DomainSpec, f: F, seed: u64, count: usize) -> Result<IntegralEstimate>
where
    F: Fn(&CPoint) -> Complex64 + Sync,
{
    let mut out = integrate_mc_vec(spec, 1, |p, buf| buf[0] = f(p), seed, count)?;
    Ok(out.remove(0))
}

/// Vector-valued [`integrate_mc`]; every component sees the same points.
pub fn integrate_mc_vec<F>(
    spec: &DomainSpec,
    dim: usize,
    f: F,
    seed: u64,
    count: usize,
) -> Result<Vec<IntegralEstimate>>
where
    F: Fn(&CPoint, &mut [Complex64]) + Sync,
{
    if count < 2 {
        return Err(Error::contract("Monte Carlo needs at least 2 samples"));
    }
    let stream = SampleStream::new(*spec, seed, count)?;
    let chunks: Vec<Vec<Moments>> = (0..stream.chunk_count())
        .into_par_iter()
        .map(|c| {
            let len = stream.chunk_len(c);
            let mut cols = vec![Vec::with_capacity(len); dim];
            let mut buf = vec![ZERO; dim];
            for p in stream.chunk_points(c) {
                f(&p, &mut buf);
                for (col, &v) in cols.iter_mut().zip(&buf) {
                    col.push(v);
                }
            }
            cols.iter().map(|col| Moments::from_values(col)).collect()
        })
        .collect();
    finish(chunks, dim, spec.volume(), count)
}

fn finish(
    chunks: Vec<Vec<Moments>>,
    dim: usize,
    scale: f64,
    count: usize,
) -> Result<Vec<IntegralEstimate>> {
    (0..dim)
        .map(|d| {
            let parts: Vec<Moments> = chunks.iter().map(|c| c[d]).collect();
            Moments::tree(&parts).into_estimate(scale, count)
        })
        .collect()
}

/// Hit-or-miss volume estimate: uniform points of the enclosing unit
/// polydisc of `ℂ^dim`, counted when they fall in `spec`.
pub fn volume_by_rejection(spec: &DomainSpec, seed: u64, count: usize) -> Result<IntegralEstimate> {
    if count < 2 {
        return Err(Error::contract("Monte Carlo needs at least 2 samples"));
    }
    let dim = spec.dim();
    let chunks = count.div_ceil(SAMPLE_CHUNK);
    let hits: Vec<usize> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c);
            let len = (count - c * SAMPLE_CHUNK).min(SAMPLE_CHUNK);
            (0..len)
                .filter(|_| {
                    let p = CPoint::new(
                        (0..dim)
                            .map(|_| crate::domains::unit_disc_point(&mut rng).0)
                            .collect(),
                    );
                    spec.contains(&p).unwrap_or(false)
                })
                .count()
        })
        .collect();
    let hit: usize = hits.iter().sum();
    let frac = hit as f64 / count as f64;
    let box_volume = PI.powi(dim as i32);
    Ok(IntegralEstimate {
        value: Complex64::new(box_volume * frac, 0.0),
        std_error: box_volume * (frac * (1.0 - frac) / count as f64).sqrt(),
        node_count: count,
        excluded: 0,
    })
}

// ---------------------------------------------------------------------------
// Graded Monte Carlo in fibered coordinates
// ---------------------------------------------------------------------------

/// Extra mass near the ends of the radial variables of a Hartogs domain.
///
/// Each radial variable is drawn from an equal-weight mixture of its
/// uniform-measure density and power laws concentrated at the requested
/// ends; draws are reweighted by the density ratio, so the estimator stays
/// unbiased. A power `a` at the origin of the squared base radius `s` has
/// density `a s^{a-1}`; a power `b` at an edge has density `b v^{b-1}` in
/// the deficit `v = 1 - s` (or `1 - |u|²` for the fiber).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Grading {
    pub base_origin: Option<f64>,
    pub base_edge: Option<f64>,
    pub fiber_edge: Option<f64>,
}

impl Grading {
    pub fn uniform() -> Self {
        Grading::default()
    }

    fn validate(&self) -> Result<()> {
        for v in [self.base_origin, self.base_edge, self.fiber_edge]
            .into_iter()
            .flatten()
        {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::contract(format!(
                    "grading powers must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// A Monte Carlo draw in fibered coordinates. The deficits are exact, not
/// recomputed from the rounded ambient coordinates.
#[derive(Clone, Debug)]
pub struct FiberedPoint {
    pub point: CPoint,
    /// `|x|²`.
    pub base_sq: f64,
    /// `1 - |x|²`.
    pub base_deficit: f64,
    /// Unit-fiber coordinates `u = y / |x|^k`.
    pub fiber: Vec<Complex64>,
    /// `1 - |u_j|²` per coordinate for polydisc fibers; the single
    /// `1 - |u|²` for ball fibers.
    pub fiber_deficits: Vec<f64>,
}

enum Component {
    Power { exponent: f64 },
    Origin(f64),
    Edge(f64),
}

/// Draws `(x, 1 - x)` on `(0,1)` from an equal mixture of `components` and
/// returns the ratio `density(target) / density(mixture)` where the target is
/// the first component.
fn draw_mixture<R: Rng>(rng: &mut R, components: &[Component]) -> (f64, f64, f64) {
    let pick = (rng.random::<f64>() * components.len() as f64) as usize;
    let u = open01(rng);
    let (x, v) = match components[pick.min(components.len() - 1)] {
        Component::Power { exponent } => {
            let x = u.powf(1.0 / (exponent + 1.0));
            (x, 1.0 - x)
        }
        Component::Origin(a) => {
            let x = u.powf(1.0 / a);
            (x, 1.0 - x)
        }
        Component::Edge(b) => {
            let v = u.powf(1.0 / b);
            (1.0 - v, v)
        }
    };
    let density = |c: &Component| match *c {
        Component::Power { exponent } => (exponent + 1.0) * x.powf(exponent),
        Component::Origin(a) => a * x.powf(a - 1.0),
        Component::Edge(b) => b * v.powf(b - 1.0),
    };
    let mix: f64 = components.iter().map(density).sum::<f64>() / components.len() as f64;
    (x, v, density(&components[0]) / mix)
}

/// Importance-sampled `∫ f dV` over a Hartogs domain with the given grading.
pub fn integrate_mc_graded<F>(
    spec: &DomainSpec,
    f: F,
    grading: &Grading,
    seed: u64,
    count: usize,
) -> Result<IntegralEstimate>
where
    F: Fn(&FiberedPoint) -> Complex64 + Sync,
{
    let mut out = integrate_mc_graded_vec(spec, 1, |q, buf| buf[0] = f(q), grading, seed, count)?;
    Ok(out.remove(0))
}

/// Vector-valued [`integrate_mc_graded`]; every component sees the same
/// draws and weights.
pub fn integrate_mc_graded_vec<F>(
    spec: &DomainSpec,
    dim: usize,
    f: F,
    grading: &Grading,
    seed: u64,
    count: usize,
) -> Result<Vec<IntegralEstimate>>
where
    F: Fn(&FiberedPoint, &mut [Complex64]) + Sync,
{
    spec.require_hartogs("graded Monte Carlo")?;
    grading.validate()?;
    if count < 2 {
        return Err(Error::contract("Monte Carlo needs at least 2 samples"));
    }
    let layout = spec.layout();
    let kn = f64::from(spec.kn());
    let mut base_parts = vec![Component::Power { exponent: kn }];
    base_parts.extend(grading.base_origin.map(Component::Origin));
    base_parts.extend(grading.base_edge.map(Component::Edge));
    let (fiber_exponent, per_coordinate) = match layout.fiber {
        Fiber::Polydisc(_) => (0.0, true),
        Fiber::Ball(n) => (n as f64 - 1.0, false),
    };
    let mut fiber_parts = vec![Component::Power {
        exponent: fiber_exponent,
    }];
    fiber_parts.extend(grading.fiber_edge.map(Component::Edge));
    let n = layout.fiber.dim();

    let chunks: Vec<Vec<Moments>> = (0..count.div_ceil(SAMPLE_CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c);
            let len = (count - c * SAMPLE_CHUNK).min(SAMPLE_CHUNK);
            let mut cols = vec![Vec::with_capacity(len); dim];
            let mut buf = vec![ZERO; dim];
            for _ in 0..len {
                {
                    let (s, base_deficit, mut weight) = draw_mixture(&mut rng, &base_parts);
                    let theta = 2.0 * PI * rng.random::<f64>();
                    let (fiber, fiber_deficits) = if per_coordinate {
                        let mut u = Vec::with_capacity(n);
                        let mut d = Vec::with_capacity(n);
                        for _ in 0..n {
                            let (t, v, w) = draw_mixture(&mut rng, &fiber_parts);
                            weight *= w;
                            let psi = 2.0 * PI * rng.random::<f64>();
                            u.push(Complex64::from_polar(t.sqrt(), psi));
                            d.push(v);
                        }
                        (u, d)
                    } else {
                        let (t, v, w) = draw_mixture(&mut rng, &fiber_parts);
                        weight *= w;
                        (ball_point_with_radius(&mut rng, n, t), vec![v])
                    };
                    let point = layout.assemble(s, theta, &fiber);
                    let fp = FiberedPoint {
                        point,
                        base_sq: s,
                        base_deficit,
                        fiber,
                        fiber_deficits,
                    };
                    f(&fp, &mut buf);
                    for (col, &v) in cols.iter_mut().zip(&buf) {
                        col.push(v * weight);
                    }
                }
            }
            cols.iter().map(|col| Moments::from_values(col)).collect()
        })
        .collect();
    finish(chunks, dim, spec.volume(), count)
}
