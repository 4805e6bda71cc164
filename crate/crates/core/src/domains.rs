//! The supported domains, points in them, exact volumes, uniform sampling,
//! and the fibering map `φ(z, w) = (z, w / z^k)` that straightens a
//! generalized Hartogs triangle into `𝔻* × fiber`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::distr::{Distribution, Open01};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DomainKind {
    UnitDisc,
    PuncturedDisc,
    Polydisc,
    Ball,
    /// `Ω_k = {|w_j| < |z|^k < 1 for all j}`.
    HartogsPolydisc,
    /// `H_k = {|w_1|² + … + |w_n|² < |z|^{2k} < 1}`.
    HartogsBall,
}

/// Descriptor of one supported domain.
///
/// `n` is the fiber dimension (always 1 for the disc kinds) and `k` the
/// power parameter, which only matters for the Hartogs kinds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawDomainSpec", into = "RawDomainSpec")]
pub struct DomainSpec {
    kind: DomainKind,
    n: u32,
    k: u32,
}

#[derive(Serialize, Deserialize)]
struct RawDomainSpec {
    kind: DomainKind,
    #[serde(default = "one")]
    n: u32,
    #[serde(default = "one")]
    k: u32,
}

fn one() -> u32 {
    1
}

impl TryFrom<RawDomainSpec> for DomainSpec {
    type Error = Error;

    fn try_from(raw: RawDomainSpec) -> Result<Self> {
        DomainSpec::new(raw.kind, raw.n, raw.k)
    }
}

impl From<DomainSpec> for RawDomainSpec {
    fn from(spec: DomainSpec) -> Self {
        RawDomainSpec {
            kind: spec.kind,
            n: spec.n,
            k: spec.k,
        }
    }
}

impl DomainSpec {
    pub fn new(kind: DomainKind, n: u32, k: u32) -> Result<Self> {
        if n == 0 || k == 0 {
            return Err(Error::contract(format!(
                "domain parameters must be positive (n={n}, k={k})"
            )));
        }
        if matches!(kind, DomainKind::UnitDisc | DomainKind::PuncturedDisc) && n != 1 {
            return Err(Error::contract(format!("{kind:?} requires n = 1, got {n}")));
        }
        Ok(DomainSpec { kind, n, k })
    }

    pub fn unit_disc() -> Self {
        DomainSpec {
            kind: DomainKind::UnitDisc,
            n: 1,
            k: 1,
        }
    }

    pub fn punctured_disc() -> Self {
        DomainSpec {
            kind: DomainKind::PuncturedDisc,
            n: 1,
            k: 1,
        }
    }

    pub fn polydisc(n: u32) -> Result<Self> {
        Self::new(DomainKind::Polydisc, n, 1)
    }

    pub fn ball(n: u32) -> Result<Self> {
        Self::new(DomainKind::Ball, n, 1)
    }

    /// `Ω_k` with an `n`-dimensional polydisc fiber.
    pub fn hartogs_polydisc(n: u32, k: u32) -> Result<Self> {
        Self::new(DomainKind::HartogsPolydisc, n, k)
    }

    /// `H_k` with an `n`-dimensional ball fiber.
    pub fn hartogs_ball(n: u32, k: u32) -> Result<Self> {
        Self::new(DomainKind::HartogsBall, n, k)
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn kn(&self) -> u32 {
        self.k * self.n
    }

    pub fn is_hartogs(&self) -> bool {
        matches!(
            self.kind,
            DomainKind::HartogsPolydisc | DomainKind::HartogsBall
        )
    }

    /// Ambient complex dimension.
    pub fn dim(&self) -> usize {
        match self.kind {
            DomainKind::UnitDisc | DomainKind::PuncturedDisc => 1,
            DomainKind::Polydisc | DomainKind::Ball => self.n as usize,
            DomainKind::HartogsPolydisc | DomainKind::HartogsBall => 1 + self.n as usize,
        }
    }

    pub(crate) fn require_hartogs(&self, op: &str) -> Result<()> {
        if self.is_hartogs() {
            Ok(())
        } else {
            Err(Error::contract(format!(
                "{op} is defined only on Hartogs domains, got {self}"
            )))
        }
    }

    pub(crate) fn check_dim(&self, p: &CPoint) -> Result<()> {
        if p.dim() == self.dim() {
            Ok(())
        } else {
            Err(Error::contract(format!(
                "point has {} coordinates, {self} needs {}",
                p.dim(),
                self.dim()
            )))
        }
    }

    /// Strict membership test.
    pub fn contains(&self, p: &CPoint) -> Result<bool> {
        self.check_dim(p)?;
        let c = p.coords();
        Ok(match self.kind {
            DomainKind::UnitDisc => c[0].norm() < 1.0,
            DomainKind::PuncturedDisc => {
                let r = c[0].norm();
                r > 0.0 && r < 1.0
            }
            DomainKind::Polydisc => c.iter().all(|z| z.norm() < 1.0),
            DomainKind::Ball => c.iter().map(|z| z.norm_sqr()).sum::<f64>() < 1.0,
            DomainKind::HartogsPolydisc => {
                let bound = c[0].norm().powi(self.k as i32);
                bound < 1.0 && c[1..].iter().all(|w| w.norm() < bound)
            }
            DomainKind::HartogsBall => {
                let r2 = c[0].norm_sqr();
                r2 < 1.0
                    && c[1..].iter().map(|w| w.norm_sqr()).sum::<f64>() < r2.powi(self.k as i32)
            }
        })
    }

    pub(crate) fn require_interior(&self, p: &CPoint, what: &str) -> Result<()> {
        if self.contains(p)? {
            Ok(())
        } else {
            Err(Error::contract(format!(
                "{what} {p} is not interior to {self}"
            )))
        }
    }

    /// Exact Lebesgue volume.
    pub fn volume(&self) -> f64 {
        let n = self.n as i32;
        let kn = f64::from(self.kn());
        match self.kind {
            DomainKind::UnitDisc | DomainKind::PuncturedDisc => PI,
            DomainKind::Polydisc => PI.powi(n),
            DomainKind::Ball => PI.powi(n) / factorial(self.n),
            DomainKind::HartogsPolydisc => PI.powi(n + 1) / (kn + 1.0),
            DomainKind::HartogsBall => PI.powi(n + 1) / (factorial(self.n) * (kn + 1.0)),
        }
    }

    pub(crate) fn layout(&self) -> Layout {
        let n = self.n as usize;
        match self.kind {
            DomainKind::UnitDisc | DomainKind::PuncturedDisc => Layout {
                base: None,
                fiber: Fiber::Polydisc(1),
            },
            DomainKind::Polydisc => Layout {
                base: None,
                fiber: Fiber::Polydisc(n),
            },
            DomainKind::Ball => Layout {
                base: None,
                fiber: Fiber::Ball(n),
            },
            DomainKind::HartogsPolydisc => Layout {
                base: Some(Base {
                    k: self.k,
                    kn: self.kn(),
                }),
                fiber: Fiber::Polydisc(n),
            },
            DomainKind::HartogsBall => Layout {
                base: Some(Base {
                    k: self.k,
                    kn: self.kn(),
                }),
                fiber: Fiber::Ball(n),
            },
        }
    }
}

impl fmt::Display for DomainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            DomainKind::UnitDisc | DomainKind::PuncturedDisc => write!(f, "{:?}", self.kind),
            DomainKind::Polydisc | DomainKind::Ball => write!(f, "{:?}(n={})", self.kind, self.n),
            _ => write!(f, "{:?}(n={},k={})", self.kind, self.n, self.k),
        }
    }
}

impl FromStr for DomainSpec {
    type Err = Error;

    /// Parses the JSON form `{"kind": "...", "n": 1, "k": 1}`.
    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(format!("domain spec: {e}")))
    }
}

pub(crate) fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// A point of `ℂ^d`. For Hartogs domains the first coordinate is the base
/// `z` and the remaining ones are the fiber `w_1, …, w_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct CPoint(Vec<Complex64>);

impl CPoint {
    pub fn new(coords: Vec<Complex64>) -> Self {
        CPoint(coords)
    }

    /// Convenience constructor from real coordinates.
    pub fn real(coords: &[f64]) -> Self {
        CPoint(coords.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn base(&self) -> Complex64 {
        self.0[0]
    }

    pub fn fiber(&self) -> &[Complex64] {
        &self.0[1..]
    }

    pub fn into_coords(self) -> Vec<Complex64> {
        self.0
    }
}

impl From<Vec<Complex64>> for CPoint {
    fn from(coords: Vec<Complex64>) -> Self {
        CPoint(coords)
    }
}

impl fmt::Display for CPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, z) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{z}")?;
        }
        write!(f, ")")
    }
}

impl FromStr for CPoint {
    type Err = Error;

    /// Parses `(a+bi, c, di, …)`; the parentheses are optional.
    fn from_str(s: &str) -> Result<Self> {
        let trimmed = s.trim();
        let inner = trimmed
            .strip_prefix('(')
            .and_then(|t| t.strip_suffix(')'))
            .unwrap_or(trimmed);
        if inner.trim().is_empty() {
            return Err(Error::Parse(format!("empty point literal {s:?}")));
        }
        inner
            .split(',')
            .map(|tok| {
                let tok: String = tok.chars().filter(|c| !c.is_whitespace()).collect();
                Complex64::from_str(&tok)
                    .map_err(|_| Error::Parse(format!("bad complex literal {tok:?}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(CPoint)
    }
}

impl Serialize for CPoint {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = self.0.iter().map(|z| [z.re, z.im]).collect();
        pairs.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CPoint {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(deserializer)?;
        Ok(CPoint(
            pairs
                .into_iter()
                .map(|[re, im]| Complex64::new(re, im))
                .collect(),
        ))
    }
}

/// `z^e` for integer `e` by binary exponentiation; never goes through
/// `exp`/`log`, so there is no branch cut.
pub fn cpowi(z: Complex64, e: i64) -> Complex64 {
    let mut base = z;
    let mut exp = e.unsigned_abs();
    let mut acc = Complex64::new(1.0, 0.0);
    while exp > 0 {
        if exp & 1 == 1 {
            acc *= base;
        }
        base *= base;
        exp >>= 1;
    }
    if e < 0 {
        acc.inv()
    } else {
        acc
    }
}

fn fiber_prelude(spec: &DomainSpec, p: &CPoint, op: &str) -> Result<Complex64> {
    spec.require_hartogs(op)?;
    spec.check_dim(p)?;
    let z = p.base();
    if z == Complex64::new(0.0, 0.0) {
        return Err(Error::SingularPoint(format!("{op} at z = 0")));
    }
    spec.require_interior(p, "point")?;
    Ok(z)
}

/// `φ(z, w_1, …, w_n) = (z, w_1/z^k, …, w_n/z^k)`, mapping `Ω_k` onto
/// `𝔻* × 𝔻^n` and `H_k` onto `𝔻* × 𝔹_n`.
pub fn phi(spec: &DomainSpec, p: &CPoint) -> Result<CPoint> {
    let z = fiber_prelude(spec, p, "phi")?;
    let inv = cpowi(z, i64::from(spec.k)).inv();
    let mut out = Vec::with_capacity(p.dim());
    out.push(z);
    out.extend(p.fiber().iter().map(|w| w * inv));
    Ok(CPoint(out))
}

/// Inverse of [`phi`]: multiplies the fiber coordinates by `z^k`.
pub fn phi_inv(spec: &DomainSpec, image: &CPoint) -> Result<CPoint> {
    spec.require_hartogs("phi_inv")?;
    spec.check_dim(image)?;
    let z = image.base();
    if z == Complex64::new(0.0, 0.0) {
        return Err(Error::SingularPoint("phi_inv at z = 0".into()));
    }
    let fiber = image.fiber();
    let inside = z.norm() < 1.0
        && match spec.kind {
            DomainKind::HartogsPolydisc => fiber.iter().all(|u| u.norm() < 1.0),
            _ => fiber.iter().map(|u| u.norm_sqr()).sum::<f64>() < 1.0,
        };
    if !inside {
        return Err(Error::contract(format!(
            "{image} is outside the image of {spec}"
        )));
    }
    let zk = cpowi(z, i64::from(spec.k));
    let mut out = Vec::with_capacity(image.dim());
    out.push(z);
    out.extend(fiber.iter().map(|u| u * zk));
    Ok(CPoint(out))
}

/// Complex Jacobian determinant of [`phi`]: the Jacobian is triangular with
/// diagonal `(1, z^{-k}, …, z^{-k})`, so the determinant is `z^{-kn}`.
pub fn phi_jacobian_det(spec: &DomainSpec, p: &CPoint) -> Result<Complex64> {
    let z = fiber_prelude(spec, p, "phi_jacobian_det")?;
    Ok(cpowi(z, -i64::from(spec.kn())))
}

// ---------------------------------------------------------------------------
// Fibered coordinates shared with the integrators
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug)]
pub(crate) struct Base {
    pub k: u32,
    pub kn: u32,
}

#[derive(Clone, Copy, Debug)]
pub(crate) enum Fiber {
    Polydisc(usize),
    Ball(usize),
}

impl Fiber {
    pub fn dim(&self) -> usize {
        match *self {
            Fiber::Polydisc(n) | Fiber::Ball(n) => n,
        }
    }
}

/// A domain seen as `base disc × fiber`, with fiber scaled by `|z|^k`.
/// Non-Hartogs kinds have no base.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Layout {
    pub base: Option<Base>,
    pub fiber: Fiber,
}

impl Layout {
    /// Builds the ambient point from the squared base radius `s`, base
    /// angle `theta` and unit-fiber coordinates `u`.
    pub fn assemble(&self, s: f64, theta: f64, u: &[Complex64]) -> CPoint {
        match self.base {
            None => CPoint(u.to_vec()),
            Some(base) => {
                let r = s.sqrt();
                let scale = r.powi(base.k as i32);
                let mut coords = Vec::with_capacity(1 + u.len());
                coords.push(Complex64::from_polar(r, theta));
                coords.extend(u.iter().map(|c| c * scale));
                CPoint(coords)
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

/// Samples per independently seeded chunk. Point `j` of a stream is always
/// drawn from chunk `j / SAMPLE_CHUNK`, whatever the thread layout.
pub(crate) const SAMPLE_CHUNK: usize = 4096;

pub(crate) fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of substream `index` of the stream seeded with `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index.wrapping_add(1)))
}

pub(crate) fn open01<R: Rng>(rng: &mut R) -> f64 {
    Open01.sample(rng)
}

/// Uniform point of the unit disc with its squared modulus.
pub(crate) fn unit_disc_point<R: Rng>(rng: &mut R) -> (Complex64, f64) {
    let t: f64 = rng.random();
    let psi = 2.0 * std::f64::consts::PI * rng.random::<f64>();
    (Complex64::from_polar(t.sqrt(), psi), t)
}

/// Point of the unit ball of `ℂ^n` with squared radius `t`.
pub(crate) fn ball_point_with_radius<R: Rng>(rng: &mut R, n: usize, t: f64) -> Vec<Complex64> {
    loop {
        let g: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
            .collect();
        let norm = g.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            let scale = t.sqrt() / norm;
            return g.into_iter().map(|c| c * scale).collect();
        }
    }
}

fn draw_uniform<R: Rng>(spec: &DomainSpec, layout: &Layout, rng: &mut R) -> CPoint {
    loop {
        let (s, theta) = match layout.base {
            Some(base) => {
                let s = open01(rng).powf(1.0 / f64::from(base.kn + 1));
                (s, 2.0 * PI * rng.random::<f64>())
            }
            None => (0.0, 0.0),
        };
        let u = match layout.fiber {
            Fiber::Polydisc(n) => (0..n).map(|_| unit_disc_point(rng).0).collect::<Vec<_>>(),
            Fiber::Ball(n) => {
                let t = rng.random::<f64>().powf(1.0 / n as f64);
                ball_point_with_radius(rng, n, t)
            }
        };
        let p = layout.assemble(s, theta, &u);
        // Rounding can put a point on the boundary with probability ~1e-16;
        // redrawing keeps the stream uniform.
        if spec.contains(&p).unwrap_or(false) {
            return p;
        }
    }
}

/// A reproducible stream of i.i.d. uniform points of a domain.
#[derive(Clone, Debug)]
pub struct SampleStream {
    spec: DomainSpec,
    seed: u64,
    count: usize,
}

impl SampleStream {
    pub fn new(spec: DomainSpec, seed: u64, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::contract("sample count must be at least 1"));
        }
        Ok(SampleStream { spec, seed, count })
    }

    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// An independent stream for parallel consumer `index`.
    pub fn substream(&self, index: u64, count: usize) -> Result<SampleStream> {
        SampleStream::new(self.spec, derive_seed(self.seed, index), count)
    }

    pub(crate) fn chunk_count(&self) -> usize {
        self.count.div_ceil(SAMPLE_CHUNK)
    }

    pub(crate) fn chunk_len(&self, chunk: usize) -> usize {
        (self.count - chunk * SAMPLE_CHUNK).min(SAMPLE_CHUNK)
    }

    /// Points of one chunk, in stream order.
    pub(crate) fn chunk_points(&self, chunk: usize) -> impl Iterator<Item = CPoint> + '_ {
        let layout = self.spec.layout();
        let mut rng = chunk_rng(self.seed, chunk);
        (0..self.chunk_len(chunk)).map(move |_| draw_uniform(&self.spec, &layout, &mut rng))
    }

    pub fn iter(&self) -> impl Iterator<Item = CPoint> + '_ {
        (0..self.chunk_count()).flat_map(move |c| self.chunk_points(c))
    }

    pub fn to_vec(&self) -> Vec<CPoint> {
        self.iter().collect()
    }
}

/// `count` uniform points of `spec`, reproducible from `seed`.
pub fn sample(spec: &DomainSpec, seed: u64, count: usize) -> Result<SampleStream> {
    SampleStream::new(*spec, seed, count)
}
