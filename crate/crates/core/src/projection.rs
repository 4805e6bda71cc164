//! The Bergman projection applied to test functions, by orthogonal-series
//! expansion and by integration against the kernel.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::basis::{enumerate, is_admissible, norm_sq, MultiIndex};
use crate::domains::{cpowi, CPoint, DomainSpec};
use crate::error::{Error, Result};
use crate::integrate::{
    integrate_mc_graded_vec, pairwise_sum, Grading, IntegralEstimate, QuadGrid, QuadratureRule,
};
use crate::kernels::kernel_closed;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A finite Laurent series `Σ c_m z^α w^β` over admissible indices.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesFunction {
    spec: DomainSpec,
    coeffs: BTreeMap<MultiIndex, Complex64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesTerm {
    pub alpha: i64,
    pub beta: Vec<u32>,
    pub coeff: [f64; 2],
}

impl SeriesFunction {
    pub fn new(spec: DomainSpec) -> Result<Self> {
        spec.require_hartogs("SeriesFunction")?;
        Ok(SeriesFunction {
            spec,
            coeffs: BTreeMap::new(),
        })
    }

    pub fn from_terms(
        spec: DomainSpec,
        terms: impl IntoIterator<Item = (MultiIndex, Complex64)>,
    ) -> Result<Self> {
        let mut f = SeriesFunction::new(spec)?;
        for (m, c) in terms {
            f.insert(m, c)?;
        }
        Ok(f)
    }

    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    /// Sets the coefficient of `m`, replacing any previous value.
    pub fn insert(&mut self, m: MultiIndex, c: Complex64) -> Result<()> {
        if !is_admissible(&self.spec, &m) {
            return Err(Error::contract(format!(
                "index (alpha={}, beta={:?}) is not admissible for {}",
                m.alpha, m.beta, self.spec
            )));
        }
        self.coeffs.insert(m, c);
        Ok(())
    }

    pub fn coeff(&self, m: &MultiIndex) -> Complex64 {
        self.coeffs.get(m).copied().unwrap_or(ZERO)
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Terms in the basis enumeration order.
    pub fn terms(&self) -> Vec<(&MultiIndex, Complex64)> {
        let mut out: Vec<_> = self.coeffs.iter().map(|(m, c)| (m, *c)).collect();
        out.sort_by(|a, b| a.0.cmp_in(b.0, &self.spec));
        out
    }

    /// Terms whose coefficient modulus exceeds `threshold`.
    pub fn significant(&self, threshold: f64) -> Vec<(&MultiIndex, Complex64)> {
        self.terms()
            .into_iter()
            .filter(|(_, c)| c.norm() > threshold)
            .collect()
    }

    pub fn eval(&self, p: &CPoint) -> Complex64 {
        self.coeffs.iter().map(|(m, c)| c * m.eval(p)).sum()
    }

    pub fn to_terms(&self) -> Vec<SeriesTerm> {
        self.terms()
            .into_iter()
            .map(|(m, c)| SeriesTerm {
                alpha: m.alpha,
                beta: m.beta.clone(),
                coeff: [c.re, c.im],
            })
            .collect()
    }

    /// JSON list of `{alpha, beta, coeff: [re, im]}`.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_terms()).expect("series terms serialize")
    }

    pub fn from_json(spec: DomainSpec, json: &str) -> Result<Self> {
        let terms: Vec<SeriesTerm> =
            serde_json::from_str(json).map_err(|e| Error::Parse(format!("series: {e}")))?;
        SeriesFunction::from_terms(
            spec,
            terms.into_iter().map(|t| {
                (
                    MultiIndex::new(t.alpha, t.beta),
                    Complex64::new(t.coeff[0], t.coeff[1]),
                )
            }),
        )
    }
}

/// In-place forward DFT along every axis of a row-major cube of side `m`.
fn fft_cube(buf: &mut [Complex64], m: usize, dims: usize, fft: &dyn Fft<f64>) {
    let mut line = vec![ZERO; m];
    for axis in 0..dims {
        let stride = m.pow((dims - 1 - axis) as u32);
        let outer = buf.len() / (m * stride);
        for o in 0..outer {
            for i in 0..stride {
                let start = o * m * stride + i;
                for (j, slot) in line.iter_mut().enumerate() {
                    *slot = buf[start + j * stride];
                }
                fft.process(&mut line);
                for (j, v) in line.iter().enumerate() {
                    buf[start + j * stride] = *v;
                }
            }
        }
    }
}

/// Projects `f` onto the span of `enumerate(spec, cap)`.
///
/// The coefficient of `e_m` is `⟨f, e_m⟩ / ‖e_m‖²`. Inner products are
/// computed on the tensor rule: at each radial node the angular samples of
/// `f` are Fourier transformed once, and the bin at frequency `(α, β)` gives
/// the angular part of `⟨f, e_m⟩` for every index at the same time. The
/// angular order must exceed twice every frequency in the enumeration.
pub fn project_series<F>(
    spec: &DomainSpec,
    f: F,
    cap: u32,
    rule: &QuadratureRule,
) -> Result<SeriesFunction>
where
    F: Fn(&CPoint) -> Complex64 + Sync,
{
    let indices = enumerate(spec, cap)?;
    let m = rule.angular_order;
    let max_freq = indices
        .iter()
        .flat_map(|ix| {
            std::iter::once(ix.alpha.unsigned_abs()).chain(ix.beta.iter().map(|&b| u64::from(b)))
        })
        .max()
        .unwrap_or(0);
    if (m as u64) <= 2 * max_freq {
        return Err(Error::contract(format!(
            "angular order {m} cannot resolve basis frequency {max_freq}; need more than {}",
            2 * max_freq
        )));
    }

    let grid = QuadGrid::new(spec, rule);
    let k = i64::from(spec.k());
    let dims = grid.angle_dims;
    let fft = FftPlanner::new().plan_fft_forward(m);
    let bin = |ix: &MultiIndex| -> usize {
        let mut flat = (ix.alpha.rem_euclid(m as i64)) as usize;
        for &b in &ix.beta {
            flat = flat * m + (b as usize % m);
        }
        flat
    };
    let bins: Vec<usize> = indices.iter().map(bin).collect();

    let per_node: Vec<Vec<Complex64>> = grid
        .radial
        .par_iter()
        .enumerate()
        .map(|(ri, node)| {
            let count = grid.angular_count();
            let mut buf = Vec::with_capacity(count);
            for a in 0..count {
                let v = f(&grid.point(node, a));
                if !v.is_finite() {
                    return Err(Error::NonFinite {
                        index: ri * count + a,
                    });
                }
                buf.push(v);
            }
            fft_cube(&mut buf, m, dims, fft.as_ref());
            let r = node.s.sqrt();
            Ok(indices
                .iter()
                .zip(&bins)
                .map(|(ix, &b)| {
                    let mut radial = r.powi((ix.alpha + k * ix.fiber_degree() as i64) as i32);
                    for (&t, &beta) in node.t.iter().zip(&ix.beta) {
                        radial *= t.sqrt().powi(beta as i32);
                    }
                    buf[b] * (radial * node.weight)
                })
                .collect())
        })
        .collect::<Result<_>>()?;

    let scale = grid.angular_weight();
    let mut out = SeriesFunction::new(*spec)?;
    for (j, ix) in indices.into_iter().enumerate() {
        let column: Vec<Complex64> = per_node.iter().map(|row| row[j]).collect();
        let inner = pairwise_sum(&column) * scale;
        let c = inner / norm_sq(spec, &ix)?;
        out.coeffs.insert(ix, c);
    }
    Ok(out)
}

/// Monte Carlo estimate of `(P f)(eval_at) = ∫ K(eval_at, q) f(q) dV(q)`
/// over a Hartogs domain.
pub fn project_kernel<F>(
    spec: &DomainSpec,
    f: F,
    eval_at: &CPoint,
    seed: u64,
    count: usize,
) -> Result<IntegralEstimate>
where
    F: Fn(&CPoint) -> Complex64 + Sync,
{
    let mut out = project_kernel_many(spec, &[&f], std::slice::from_ref(eval_at), seed, count)?;
    Ok(out.remove(0).remove(0))
}

/// [`project_kernel`] for several functions and evaluation points on one
/// shared sample stream. Entry `[i][j]` is `(P f_j)(points[i])`.
pub fn project_kernel_many(
    spec: &DomainSpec,
    fs: &[&(dyn Fn(&CPoint) -> Complex64 + Sync)],
    points: &[CPoint],
    seed: u64,
    count: usize,
) -> Result<Vec<Vec<IntegralEstimate>>> {
    for p in points {
        spec.require_interior(p, "evaluation point")?;
    }
    spec.require_hartogs("project_kernel")?;
    let nf = fs.len();
    // K(p, ·) grows like |x|^{-kn} at the cusp; drawing s = |x|² with extra
    // uniform mass there keeps the weighted integrand bounded.
    let grading = Grading {
        base_origin: Some(1.0),
        ..Grading::uniform()
    };
    let flat = integrate_mc_graded_vec(
        spec,
        points.len() * nf,
        |fq, buf| {
            let q = &fq.point;
            let values: Vec<Complex64> = fs.iter().map(|f| f(q)).collect();
            for (i, p) in points.iter().enumerate() {
                let kv = kernel_closed(spec, p, q).unwrap_or(Complex64::new(f64::NAN, 0.0));
                for (j, v) in values.iter().enumerate() {
                    buf[i * nf + j] = kv * v;
                }
            }
        },
        &grading,
        seed,
        count,
    )?;
    Ok(flat.chunks(nf.max(1)).map(|c| c.to_vec()).collect())
}

/// `conj(z)^{kn}`, the test function whose projection decides the upper
/// end of the `L^p` range.
pub fn conj_base_power(spec: &DomainSpec) -> impl Fn(&CPoint) -> Complex64 + Sync {
    let kn = i64::from(spec.kn());
    move |p: &CPoint| cpowi(p.base().conj(), kn)
}

/// Exact projection of `conj(z)^{kn}`: the single term `C·z^{-kn}`.
///
/// Angular orthogonality leaves only the index `(α = -kn, β = 0)`, with
/// `C = ⟨conj(z)^{kn}, z^{-kn}⟩ / ‖z^{-kn}‖² = volume / ‖z^{-kn}‖²`, which
/// is `1/(kn+1)` on both `Ω_k` and `H_k`.
pub fn project_conj_monomial(spec: &DomainSpec) -> Result<SeriesFunction> {
    spec.require_hartogs("project_conj_monomial")?;
    let m = MultiIndex::base(-i64::from(spec.kn()), spec.n());
    let c = spec.volume() / norm_sq(spec, &m)?;
    SeriesFunction::from_terms(*spec, [(m, Complex64::new(c, 0.0))])
}
