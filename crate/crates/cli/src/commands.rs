use hartogs_bergman::{
    conj_base_power, critical_interval, derive_seed, divergence_diagnostic, exponent_to_f64,
    is_bounded, kernel_closed, kernel_series, kernel_via_transform, lp_norm_closed, mc_lp_norm,
    parse_exponent, project_kernel_many, project_series, radial_lp_integral, schur_query_grid,
    schur_sweep, CPoint, Complex64, DomainSpec, QuadratureRule, SchurPairing, SchurWeightSpec,
    SeriesFunction,
};

use crate::args::{Cli, Command, DomainArgs, KernelMethod, Pairing, RunArgs, TestFunction};
use crate::output::{
    CoefficientRecord, EvaluationRecord, KernelRecord, LpRecord, Records, SchurRecord,
    ThresholdRecord,
};
use crate::{verify, CliError};

const DEFAULT_PROJECT_CAP: u32 = 4;
const DEFAULT_RULE: (usize, usize) = (16, 32);
const DEFAULT_COUNT: usize = 200_000;
const DEFAULT_SCHUR_COUNT: usize = 50_000;
const SCHUR_RADII: [f64; 5] = [0.3, 0.4, 0.5, 0.6, 0.7];
const SCHUR_FRACTIONS: [f64; 5] = [0.0, 0.2, 0.4, 0.6, 0.8];

/// Outcome of one command, ready to be written.
#[derive(Clone, Debug)]
pub struct Report {
    pub command: &'static str,
    /// Set for randomized commands.
    pub seed: Option<u64>,
    pub records: Records,
    /// Set when the command completed but its checks did not all pass.
    pub failure: Option<String>,
}

impl Report {
    fn new(command: &'static str, seed: Option<u64>, records: Records) -> Self {
        Report {
            command,
            seed,
            records,
            failure: None,
        }
    }
}

pub(crate) fn domain(d: &DomainArgs) -> Result<DomainSpec, CliError> {
    match &d.spec {
        Some(json) => Ok(json.parse()?),
        None => Ok(DomainSpec::hartogs_polydisc(d.n, d.k)?),
    }
}

pub(crate) fn rule(run: &RunArgs, default: (usize, usize)) -> Result<QuadratureRule, CliError> {
    Ok(QuadratureRule::new(
        run.radial_order.unwrap_or(default.0),
        run.angular_order.unwrap_or(default.1),
    )?)
}

fn point(spec: &DomainSpec, text: &str, what: &str) -> Result<CPoint, CliError> {
    let p: CPoint = text.parse()?;
    if p.dim() != spec.dim() {
        return Err(CliError::Usage(format!(
            "{what} {text:?} has {} coordinates, {spec} needs {}",
            p.dim(),
            spec.dim()
        )));
    }
    if !spec.contains(&p)? {
        return Err(CliError::Usage(format!("{what} {p} lies outside {spec}")));
    }
    Ok(p)
}

fn count_or(run: &RunArgs, default: usize) -> Result<usize, CliError> {
    match run.count {
        Some(0) => Err(CliError::Usage("--count must be positive".into())),
        Some(c) => Ok(c),
        None => Ok(default),
    }
}

pub fn execute(cli: &Cli) -> Result<Report, CliError> {
    let run = &cli.run;
    match &cli.command {
        Command::Kernel {
            domain: d,
            p,
            q,
            method,
            tol,
        } => {
            let spec = domain(d)?;
            let (pp, qq) = (point(&spec, p, "--p")?, point(&spec, q, "--q")?);
            let methods: &[KernelMethod] = match method {
                KernelMethod::All => &[
                    KernelMethod::Closed,
                    KernelMethod::Series,
                    KernelMethod::Transform,
                ],
                m => std::slice::from_ref(m),
            };
            let mut rows = Vec::new();
            for m in methods {
                let (name, v) = match m {
                    KernelMethod::Closed => ("closed", kernel_closed(&spec, &pp, &qq)?),
                    KernelMethod::Series => ("series", kernel_series(&spec, &pp, &qq, *tol)?),
                    KernelMethod::Transform => {
                        ("transform", kernel_via_transform(&spec, &pp, &qq)?)
                    }
                    KernelMethod::All => unreachable!(),
                };
                rows.push(KernelRecord {
                    spec: spec.to_string(),
                    p: pp.to_string(),
                    q: qq.to_string(),
                    method: name.into(),
                    re: v.re,
                    im: v.im,
                });
            }
            Ok(Report::new("kernel", None, Records::Kernel(rows)))
        }
        Command::Project {
            domain: d,
            function,
            series,
            cap,
            threshold,
            at,
        } => project(run, d, *function, series.as_deref(), *cap, *threshold, at),
        Command::Threshold { n, k, pexp } => {
            let iv = critical_interval(*n, *k)?;
            let (p, bounded, radial) = match pexp {
                Some(text) => {
                    let p = parse_exponent(text)?;
                    (
                        Some(p.to_string()),
                        Some(is_bounded(&p, *n, *k)?),
                        radial_lp_integral(&p, *n, *k)?.value(),
                    )
                }
                None => (None, None, None),
            };
            let row = ThresholdRecord {
                n: *n,
                k: *k,
                p_low: iv.p_low.to_string(),
                p_high: iv.p_high.to_string(),
                p_low_decimal: exponent_to_f64(&iv.p_low),
                p_high_decimal: exponent_to_f64(&iv.p_high),
                p,
                bounded,
                radial_integral: radial,
            };
            Ok(Report::new(
                "threshold",
                None,
                Records::Threshold(vec![row]),
            ))
        }
        Command::Lpnorm {
            domain: d,
            pexp,
            diagnose,
        } => {
            let spec = domain(d)?;
            let count = count_or(run, DEFAULT_COUNT)?;
            let mut rows = Vec::with_capacity(pexp.len());
            for (i, text) in pexp.iter().enumerate() {
                let exact = parse_exponent(text)?;
                let p = exponent_to_f64(&exact);
                let seed = derive_seed(run.seed, i as u64);
                let closed = lp_norm_closed(&spec, &exact)?;
                let (est, growth) = if *diagnose {
                    let check = divergence_diagnostic(&spec, p, seed, count)?;
                    (check.large, Some(check.growth_sigmas))
                } else {
                    (mc_lp_norm(&spec, p, seed, count)?, None)
                };
                rows.push(LpRecord {
                    p: exact.to_string(),
                    estimate: est.value.re,
                    std_error: est.std_error,
                    closed: closed.value(),
                    verdict: if closed.is_finite() {
                        "finite"
                    } else {
                        "divergent"
                    }
                    .into(),
                    growth_sigmas: growth,
                });
            }
            Ok(Report::new("lpnorm", Some(run.seed), Records::Lp(rows)))
        }
        Command::Schur {
            domain: d,
            eps,
            query,
            pairing,
        } => {
            let spec = domain(d)?;
            let count = count_or(run, DEFAULT_SCHUR_COUNT)?;
            let pairing = match pairing {
                Pairing::Natural => SchurPairing::Natural,
                Pairing::Swapped => SchurPairing::Swapped,
            };
            let queries = if query.is_empty() {
                schur_query_grid(&spec, &SCHUR_RADII, &SCHUR_FRACTIONS)?
            } else {
                query
                    .iter()
                    .map(|t| point(&spec, t, "--query"))
                    .collect::<Result<_, _>>()?
            };
            let mut rows = Vec::new();
            for (i, &e) in eps.iter().enumerate() {
                let sweep = schur_sweep(
                    &spec,
                    e,
                    &queries,
                    pairing,
                    derive_seed(run.seed, i as u64),
                    count,
                )?;
                let admissible = SchurWeightSpec::new(spec, e).is_ok();
                let max_at = sweep
                    .rows
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.ratio.total_cmp(&b.1.ratio))
                    .map(|(j, _)| j);
                rows.extend(sweep.rows.iter().enumerate().map(|(j, r)| SchurRecord {
                    eps: e,
                    query: r.query.to_string(),
                    estimate: r.ratio,
                    std_error: r.std_error,
                    weight: r.weight,
                    verdict: if admissible { "admissible" } else { "outside" }.into(),
                    is_max: Some(j) == max_at,
                }));
            }
            Ok(Report::new("schur", Some(run.seed), Records::Schur(rows)))
        }
        Command::Verify { suite } => {
            let rows = verify::run_suite(*suite, run)?;
            let failed = rows.iter().filter(|r| !r.passed).count();
            let mut rep = Report::new("verify", Some(run.seed), Records::Verify(rows));
            if failed > 0 {
                rep.failure = Some(format!("{failed} verification checks failed"));
            }
            Ok(rep)
        }
    }
}

fn project(
    run: &RunArgs,
    d: &DomainArgs,
    function: TestFunction,
    series: Option<&str>,
    cap: Option<u32>,
    threshold: f64,
    at: &[String],
) -> Result<Report, CliError> {
    let spec = domain(d)?;
    let input = match (function, series) {
        (TestFunction::Series, Some(json)) => Some(SeriesFunction::from_json(spec, json)?),
        (TestFunction::Series, None) => {
            return Err(CliError::Usage("--function series needs --series".into()))
        }
        (TestFunction::ConjBase, Some(_)) => {
            return Err(CliError::Usage("--series needs --function series".into()))
        }
        (TestFunction::ConjBase, None) => None,
    };
    let conj = conj_base_power(&spec);
    let f = |p: &CPoint| -> Complex64 {
        match &input {
            Some(s) => s.eval(p),
            None => conj(p),
        }
    };
    let coeffs = project_series(
        &spec,
        f,
        cap.unwrap_or(DEFAULT_PROJECT_CAP),
        &rule(run, DEFAULT_RULE)?,
    )?;
    if at.is_empty() {
        let rows = coeffs
            .significant(threshold)
            .into_iter()
            .map(|(m, c)| CoefficientRecord {
                alpha: m.alpha,
                beta: m
                    .beta
                    .iter()
                    .map(u32::to_string)
                    .collect::<Vec<_>>()
                    .join(";"),
                re: c.re,
                im: c.im,
            })
            .collect();
        return Ok(Report::new("project", None, Records::Coefficients(rows)));
    }
    let points = at
        .iter()
        .map(|t| point(&spec, t, "--at"))
        .collect::<Result<Vec<_>, _>>()?;
    let count = count_or(run, DEFAULT_COUNT)?;
    let est = project_kernel_many(&spec, &[&f], &points, run.seed, count)?;
    let rows = points
        .iter()
        .zip(&est)
        .map(|(p, e)| {
            let s = coeffs.eval(p);
            EvaluationRecord {
                point: p.to_string(),
                re: e[0].value.re,
                im: e[0].value.im,
                std_error: e[0].std_error,
                series_re: s.re,
                series_im: s.im,
            }
        })
        .collect();
    Ok(Report::new(
        "project",
        Some(run.seed),
        Records::Evaluations(rows),
    ))
}
