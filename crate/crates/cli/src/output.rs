use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::args::Format;
use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelRecord {
    pub spec: String,
    pub p: String,
    pub q: String,
    pub method: String,
    pub re: f64,
    pub im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRecord {
    pub alpha: i64,
    /// Fiber exponents joined with `;`.
    pub beta: String,
    pub re: f64,
    pub im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRecord {
    pub point: String,
    pub re: f64,
    pub im: f64,
    pub std_error: f64,
    pub series_re: f64,
    pub series_im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRecord {
    pub n: u32,
    pub k: u32,
    pub p_low: String,
    pub p_high: String,
    pub p_low_decimal: f64,
    pub p_high_decimal: f64,
    pub p: Option<String>,
    pub bounded: Option<bool>,
    /// Empty when `p` is absent or the integral diverges.
    pub radial_integral: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpRecord {
    pub p: String,
    pub estimate: f64,
    pub std_error: f64,
    pub closed: Option<f64>,
    /// `finite` or `divergent`, decided exactly.
    pub verdict: String,
    pub growth_sigmas: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchurRecord {
    pub eps: f64,
    pub query: String,
    pub estimate: f64,
    pub std_error: f64,
    pub weight: f64,
    /// `admissible` inside the exponent range, `outside` otherwise.
    pub verdict: String,
    pub is_max: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyRecord {
    pub suite: String,
    pub check: String,
    pub value: f64,
    pub limit: f64,
    pub passed: bool,
}

/// Records of one command run, in output order.
#[derive(Clone, Debug, PartialEq)]
pub enum Records {
    Kernel(Vec<KernelRecord>),
    Coefficients(Vec<CoefficientRecord>),
    Evaluations(Vec<EvaluationRecord>),
    Threshold(Vec<ThresholdRecord>),
    Lp(Vec<LpRecord>),
    Schur(Vec<SchurRecord>),
    Verify(Vec<VerifyRecord>),
}

/// JSON shape of a kernel evaluation, with the value as `[re, im]`.
#[derive(Serialize)]
struct KernelJson<'a> {
    spec: &'a str,
    p: &'a str,
    q: &'a str,
    method: &'a str,
    value: [f64; 2],
}

#[derive(Serialize)]
struct JsonDocument<'a, T> {
    command: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    records: &'a [T],
}

fn write_csv<T: Serialize, W: Write>(
    out: &mut W,
    seed: Option<u64>,
    rows: &[T],
    header: &str,
) -> Result<(), CliError> {
    if let Some(seed) = seed {
        writeln!(out, "# seed={seed}")?;
    }
    if rows.is_empty() {
        writeln!(out, "{header}")?;
        return Ok(());
    }
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

fn write_json<T: Serialize, W: Write>(
    out: &mut W,
    command: &str,
    seed: Option<u64>,
    rows: &[T],
) -> Result<(), CliError> {
    let doc = JsonDocument {
        command,
        seed,
        records: rows,
    };
    serde_json::to_writer_pretty(&mut *out, &doc)?;
    writeln!(out)?;
    Ok(())
}

impl Records {
    pub fn write<W: Write>(
        &self,
        out: &mut W,
        format: Format,
        command: &str,
        seed: Option<u64>,
    ) -> Result<(), CliError> {
        macro_rules! emit {
            ($rows:expr, $header:expr) => {
                match format {
                    Format::Csv => write_csv(out, seed, $rows, $header),
                    Format::Json => write_json(out, command, seed, $rows),
                }
            };
        }
        match self {
            Records::Kernel(r) if format == Format::Json => {
                let rows: Vec<KernelJson> = r
                    .iter()
                    .map(|k| KernelJson {
                        spec: &k.spec,
                        p: &k.p,
                        q: &k.q,
                        method: &k.method,
                        value: [k.re, k.im],
                    })
                    .collect();
                write_json(out, command, seed, &rows)
            }
            Records::Kernel(r) => emit!(r, "spec,p,q,method,re,im"),
            Records::Coefficients(r) => emit!(r, "alpha,beta,re,im"),
            Records::Evaluations(r) => emit!(r, "point,re,im,std_error,series_re,series_im"),
            Records::Threshold(r) => emit!(
                r,
                "n,k,p_low,p_high,p_low_decimal,p_high_decimal,p,bounded,radial_integral"
            ),
            Records::Lp(r) => emit!(r, "p,estimate,std_error,closed,verdict,growth_sigmas"),
            Records::Schur(r) => emit!(r, "eps,query,estimate,std_error,weight,verdict,is_max"),
            Records::Verify(r) => emit!(r, "suite,check,value,limit,passed"),
        }
    }

    pub fn write_to(
        &self,
        path: Option<&Path>,
        format: Format,
        command: &str,
        seed: Option<u64>,
    ) -> Result<(), CliError> {
        match path {
            Some(path) => {
                let mut f = io::BufWriter::new(File::create(path)?);
                self.write(&mut f, format, command, seed)?;
                f.flush()?;
                Ok(())
            }
            None => {
                let stdout = io::stdout();
                let mut lock = stdout.lock();
                self.write(&mut lock, format, command, seed)
            }
        }
    }
}

/// Parses CSV written by [`Records::write`], skipping `#` comment lines.
pub fn read_csv<T: DeserializeOwned>(text: &str) -> Result<Vec<T>, CliError> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    r.deserialize()
        .map(|row| row.map_err(CliError::from))
        .collect()
}

/// The seed announced in a CSV header comment, if any.
pub fn csv_seed(text: &str) -> Option<u64> {
    text.lines()
        .next()?
        .strip_prefix("# seed=")?
        .trim()
        .parse()
        .ok()
}
