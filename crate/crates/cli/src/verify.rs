//! Invariant suites behind `bergman verify`.

use hartogs_bergman::{
    conj_base_power, conjugate_exponent, critical_interval, derive_seed, enumerate,
    integrate_mc_vec, kernel_closed, kernel_series, kernel_via_transform, lp_norm_closed,
    mc_lp_norm, norm_sq, project_conj_monomial, project_kernel_many, project_series,
    radial_lp_integral, sample, schur_ratio, schur_ratio_unchecked, CPoint, Complex64, DomainSpec,
    MultiIndex, Ratio, SchurPairing, SeriesFunction,
};

use crate::args::{RunArgs, Suite};
use crate::commands::rule;
use crate::output::VerifyRecord;
use crate::CliError;

const DEFAULT_VERIFY_COUNT: usize = 100_000;
/// Exact for the low-degree projections checked here.
const VERIFY_RULE: (usize, usize) = (8, 26);
/// Family-wise limit for Monte Carlo z-scores; each suite compares up to a
/// few hundred estimates.
const Z_LIMIT: f64 = 4.5;

fn specs() -> Vec<DomainSpec> {
    [(1, 1), (1, 2), (2, 1), (2, 2)]
        .into_iter()
        .flat_map(|(n, k)| {
            [
                DomainSpec::hartogs_polydisc(n, k).unwrap(),
                DomainSpec::hartogs_ball(n, k).unwrap(),
            ]
        })
        .collect()
}

/// Uniform draws pulled into the region `0.3 ≤ |x| ≤ 0.7` with fibers at
/// most 0.6 of their bound, where every method converges quickly.
fn interior_points(spec: &DomainSpec, seed: u64, count: usize) -> Result<Vec<CPoint>, CliError> {
    let k = spec.k() as i32;
    Ok(sample(spec, seed, count)?
        .iter()
        .map(|p| {
            let x = p.base();
            let r = x.norm();
            let r2 = 0.3 + 0.4 * r;
            let scale = 0.6 * (r2 / r).powi(k);
            let mut coords = vec![x * (r2 / r)];
            coords.extend(p.fiber().iter().map(|y| y * scale));
            CPoint::new(coords)
        })
        .collect())
}

/// Indices whose monomials are bounded on the domain.
fn bounded_indices(spec: &DomainSpec, cap: u32) -> Result<Vec<MultiIndex>, CliError> {
    let kn = i64::from(spec.kn());
    Ok(enumerate(spec, cap)?
        .into_iter()
        .filter(|m| m.shifted_degree(spec) >= kn)
        .collect())
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

struct Collector {
    suite: &'static str,
    rows: Vec<VerifyRecord>,
}

impl Collector {
    fn at_most(&mut self, check: String, value: f64, limit: f64) {
        self.rows.push(VerifyRecord {
            suite: self.suite.into(),
            check,
            value,
            limit,
            passed: value <= limit,
        });
    }
}

pub(crate) fn run_suite(suite: Suite, run: &RunArgs) -> Result<Vec<VerifyRecord>, CliError> {
    let count = run.count.unwrap_or(DEFAULT_VERIFY_COUNT);
    if count == 0 {
        return Err(CliError::Usage("--count must be positive".into()));
    }
    let all = [
        (Suite::Kernels, "kernels"),
        (Suite::Basis, "basis"),
        (Suite::Projection, "projection"),
        (Suite::Lp, "lp"),
        (Suite::Schur, "schur"),
    ];
    let mut rows = Vec::new();
    for (i, (s, name)) in all.into_iter().enumerate() {
        if suite != Suite::All && suite != s {
            continue;
        }
        let seed = derive_seed(run.seed, i as u64);
        let mut c = Collector {
            suite: name,
            rows: Vec::new(),
        };
        match s {
            Suite::Kernels => kernels(&mut c, seed)?,
            Suite::Basis => basis(&mut c, seed, count)?,
            Suite::Projection => projection(&mut c, run, seed, count)?,
            Suite::Lp => lp(&mut c, seed, count)?,
            Suite::Schur => schur(&mut c, seed, count)?,
            Suite::All => unreachable!(),
        }
        rows.extend(c.rows);
    }
    Ok(rows)
}

fn kernels(c: &mut Collector, seed: u64) -> Result<(), CliError> {
    for (si, spec) in specs().iter().enumerate() {
        let pts = interior_points(spec, derive_seed(seed, si as u64), 200)?;
        let (mut herm, mut diag, mut transform, mut series) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for (j, pair) in pts.chunks_exact(2).enumerate() {
            let (p, q) = (&pair[0], &pair[1]);
            let kpq = kernel_closed(spec, p, q)?;
            herm = herm.max(rel(kernel_closed(spec, q, p)?.conj(), kpq));
            let kpp = kernel_closed(spec, p, p)?;
            if kpp.re.is_nan() || kpp.re <= 0.0 {
                diag += 1.0;
            }
            transform = transform.max(rel(kernel_via_transform(spec, p, q)?, kpq));
            if j < 10 {
                series = series.max(rel(kernel_series(spec, p, q, 1e-12)?, kpq));
            }
        }
        c.at_most(format!("hermitian {spec}"), herm, 1e-12);
        c.at_most(format!("diagonal_nonpositive {spec}"), diag, 0.0);
        c.at_most(format!("transform_law {spec}"), transform, 1e-10);
        c.at_most(format!("series_vs_closed {spec}"), series, 1e-6);
    }
    Ok(())
}

fn basis(c: &mut Collector, seed: u64, count: usize) -> Result<(), CliError> {
    for (si, spec) in specs().iter().enumerate() {
        let pts = interior_points(spec, derive_seed(seed, si as u64), 2)?;
        let mut gap = 0.0f64;
        let basis = enumerate(spec, 40)?;
        let norms: Vec<f64> = basis
            .iter()
            .map(|m| norm_sq(spec, m))
            .collect::<Result<_, _>>()?;
        for p in &pts {
            let target = kernel_closed(spec, p, p)?.re;
            let sum: f64 = basis
                .iter()
                .zip(&norms)
                .map(|(m, nm)| m.eval(p).norm_sqr() / nm)
                .sum();
            gap = gap.max(((target - sum) / target).abs());
        }
        c.at_most(format!("parseval_gap {spec}"), gap, 1e-4);

        // Gram matrix of up to six bounded monomials
        let pool: Vec<MultiIndex> = bounded_indices(spec, 3)?.into_iter().take(6).collect();
        let pairs: Vec<(usize, usize)> = (0..pool.len())
            .flat_map(|a| (a..pool.len()).map(move |b| (a, b)))
            .collect();
        let est = integrate_mc_vec(
            spec,
            pairs.len(),
            |q, buf| {
                let vals: Vec<Complex64> = pool.iter().map(|m| m.eval(q)).collect();
                for (slot, &(a, b)) in buf.iter_mut().zip(&pairs) {
                    *slot = vals[a] * vals[b].conj();
                }
            },
            derive_seed(seed, 100 + si as u64),
            count,
        )?;
        let (mut off, mut on) = (0.0f64, 0.0f64);
        for (e, &(a, b)) in est.iter().zip(&pairs) {
            if a == b {
                on = on.max(e.z_score(Complex64::new(norm_sq(spec, &pool[a])?, 0.0)));
            } else {
                off = off.max(e.z_score(Complex64::new(0.0, 0.0)));
            }
        }
        c.at_most(format!("orthogonality_max_z {spec}"), off, Z_LIMIT);
        c.at_most(format!("norm_max_z {spec}"), on, Z_LIMIT);
    }
    Ok(())
}

fn projection(c: &mut Collector, run: &RunArgs, seed: u64, count: usize) -> Result<(), CliError> {
    let rule = rule(run, VERIFY_RULE)?;
    for (si, spec) in specs().iter().enumerate() {
        let kn = f64::from(spec.kn());
        let exact = project_conj_monomial(spec)?;
        let numeric = project_series(spec, conj_base_power(spec), 4, &rule)?;
        let coeff_err = numeric
            .terms()
            .into_iter()
            .map(|(m, v)| (v - exact.coeff(m)).norm())
            .fold(0.0, f64::max);
        c.at_most(
            format!("conj_monomial_coefficients {spec}"),
            coeff_err,
            1e-8,
        );
        let (_, lead) = exact.terms()[0];
        c.at_most(
            format!("conj_monomial_constant {spec}"),
            (lead.re - 1.0 / (kn + 1.0)).abs(),
            1e-12,
        );

        // a fixed series built from the low-degree basis
        let pool = enumerate(spec, 2)?;
        let mut f = SeriesFunction::new(*spec)?;
        for (j, m) in pool.iter().enumerate().take(5) {
            let t = (j as f64 + 1.0) * 0.7;
            f.insert(m.clone(), Complex64::new(t.cos(), t.sin() / 2.0))?;
        }
        let once = project_series(spec, |p| f.eval(p), 3, &rule)?;
        let idem = once
            .terms()
            .into_iter()
            .map(|(m, v)| (v - f.coeff(m)).norm())
            .fold(0.0, f64::max);
        c.at_most(format!("idempotence {spec}"), idem, 1e-8);

        let bounded = bounded_indices(spec, 3)?;
        let g = SeriesFunction::from_terms(
            *spec,
            bounded
                .iter()
                .take(3)
                .enumerate()
                .map(|(j, m)| (m.clone(), Complex64::new(1.0, j as f64))),
        )?;
        let points = interior_points(spec, derive_seed(seed, si as u64), 2)?;
        let gf = |q: &CPoint| g.eval(q);
        let est = project_kernel_many(
            spec,
            &[&gf],
            &points,
            derive_seed(seed, 100 + si as u64),
            count,
        )?;
        let z = points
            .iter()
            .zip(&est)
            .map(|(p, e)| e[0].z_score(g.eval(p)))
            .fold(0.0, f64::max);
        c.at_most(format!("kernel_reproduces_max_z {spec}"), z, Z_LIMIT);
    }
    Ok(())
}

fn lp(c: &mut Collector, seed: u64, count: usize) -> Result<(), CliError> {
    let mut conj_fail = 0.0;
    let mut flip_fail = 0.0;
    for n in 1..=6 {
        for k in 1..=6 {
            let iv = critical_interval(n, k)?;
            if conjugate_exponent(&iv.p_low)? != iv.p_high {
                conj_fail += 1.0;
            }
            for j in 1..=100 {
                let p = iv.p_high * Ratio::new(j, 50);
                if radial_lp_integral(&p, n, k)?.is_finite() != (p < iv.p_high) {
                    flip_fail += 1.0;
                }
            }
        }
    }
    c.at_most("endpoints_conjugate_failures".into(), conj_fail, 0.0);
    c.at_most("divergence_flip_failures".into(), flip_fail, 0.0);
    for (si, spec) in specs().iter().enumerate() {
        let closed = lp_norm_closed(spec, &Ratio::from_integer(2))?
            .value()
            .expect("p = 2 is always finite");
        let e = mc_lp_norm(spec, 2.0, derive_seed(seed, si as u64), count)?;
        c.at_most(
            format!("lp2_vs_closed_z {spec}"),
            e.z_score(Complex64::new(closed, 0.0)),
            Z_LIMIT,
        );
    }
    Ok(())
}

fn schur(c: &mut Collector, seed: u64, count: usize) -> Result<(), CliError> {
    let specs = [
        DomainSpec::hartogs_polydisc(1, 1)?,
        DomainSpec::hartogs_ball(2, 1)?,
    ];
    for (si, spec) in specs.iter().enumerate() {
        let mut coords = vec![0.0; spec.dim()];
        coords[0] = 0.5;
        coords[1] = 0.2 * 0.5f64.powi(spec.k() as i32);
        let q = CPoint::real(&coords);
        let s = derive_seed(seed, si as u64);
        let small = schur_ratio(spec, 0.5, &q, s, count)?;
        let large = schur_ratio(spec, 0.5, &q, s, 4 * count)?;
        let z = (large.ratio - small.ratio).abs() / small.std_error.hypot(large.std_error);
        c.at_most(format!("ratio_stable_eps_0.5 {spec}"), z, Z_LIMIT);
    }
    let poly = DomainSpec::hartogs_polydisc(2, 1)?;
    let q = CPoint::real(&[0.5, 0.1, 0.1]);
    let rejected = schur_ratio_unchecked(&poly, 0.5, &q, SchurPairing::Swapped, seed, 16)
        .err()
        .is_some_and(|e| e.is_contract());
    c.at_most(
        format!("swapped_ball_weight_rejected {poly}"),
        if rejected { 0.0 } else { 1.0 },
        0.0,
    );
    Ok(())
}
