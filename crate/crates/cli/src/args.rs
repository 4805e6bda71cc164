use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "bergman",
    version,
    about = "Bergman kernels, projections and L^p ranges on generalized Hartogs triangles"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub run: RunArgs,
}

/// Options shared by every command.
#[derive(Clone, Debug, Args)]
pub struct RunArgs {
    /// Master seed for every randomized computation.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Monte Carlo sample count (per estimate).
    #[arg(long, global = true)]
    pub count: Option<usize>,
    /// Gauss-Legendre nodes per radial variable [default: 16, verify 8].
    #[arg(long, global = true)]
    pub radial_order: Option<usize>,
    /// Trapezoid nodes per angle [default: 32, verify 26].
    #[arg(long, global = true)]
    pub angular_order: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write records here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Domain selection: `--spec` JSON, or a Hartogs polydisc from `--n`/`--k`.
#[derive(Clone, Debug, Args)]
pub struct DomainArgs {
    /// Domain as JSON, e.g. '{"kind":"HartogsBall","n":2,"k":1}'.
    #[arg(long)]
    pub spec: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub n: u32,
    #[arg(long, default_value_t = 1)]
    pub k: u32,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the Bergman kernel K(p, q).
    #[command(
        after_help = "CSV columns: spec,p,q,method,re,im\nJSON records: {spec, p, q, method, value: [re, im]}"
    )]
    Kernel {
        #[command(flatten)]
        domain: DomainArgs,
        /// First point, e.g. "(0.5, 0.1i)".
        #[arg(long)]
        p: String,
        /// Second point.
        #[arg(long)]
        q: String,
        #[arg(long, value_enum, default_value_t = KernelMethod::Closed)]
        method: KernelMethod,
        /// Relative frontier tolerance for the series.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Project a test function onto the Bergman space.
    #[command(after_help = "CSV columns: alpha,beta,re,im (coefficients)\n\
                            or point,re,im,std_error,series_re,series_im (with --at)")]
    Project {
        #[command(flatten)]
        domain: DomainArgs,
        #[arg(long, value_enum, default_value_t = TestFunction::ConjBase)]
        function: TestFunction,
        /// Series as a JSON list of {alpha, beta, coeff: [re, im]}.
        #[arg(long)]
        series: Option<String>,
        /// Enumeration cap; defaults to 3kn.
        #[arg(long)]
        cap: Option<u32>,
        /// Coefficients at or below this modulus are omitted.
        #[arg(long, default_value_t = 1e-12)]
        threshold: f64,
        /// Evaluate the projection at these points by integrating against
        /// the kernel.
        #[arg(long)]
        at: Vec<String>,
    },
    /// Print the exact range of bounded L^p exponents.
    #[command(
        after_help = "CSV columns: n,k,p_low,p_high,p_low_decimal,p_high_decimal,p,bounded,radial_integral"
    )]
    Threshold {
        #[arg(long, default_value_t = 1)]
        n: u32,
        #[arg(long, default_value_t = 1)]
        k: u32,
        /// Exponent to classify, decimal or "a/b".
        #[arg(long)]
        pexp: Option<String>,
    },
    /// Monte Carlo estimate of the integral of |z|^{-pkn}.
    #[command(after_help = "CSV columns: p,estimate,std_error,closed,verdict,growth_sigmas")]
    Lpnorm {
        #[command(flatten)]
        domain: DomainArgs,
        /// Exponents, decimal or "a/b"; repeat or separate with commas.
        #[arg(long, required = true, value_delimiter = ',')]
        pexp: Vec<String>,
        /// Also rerun with four times the samples and report the growth.
        #[arg(long)]
        diagnose: bool,
    },
    /// Schur-test ratios at query points.
    #[command(after_help = "CSV columns: eps,query,estimate,std_error,weight,verdict,is_max")]
    Schur {
        #[command(flatten)]
        domain: DomainArgs,
        /// Schur exponents; repeat or separate with commas.
        #[arg(long, required = true, value_delimiter = ',')]
        eps: Vec<f64>,
        /// Query points; defaults to a 5x5 grid with |z| in [0.3, 0.7].
        #[arg(long)]
        query: Vec<String>,
        #[arg(long, value_enum, default_value_t = Pairing::Natural)]
        pairing: Pairing,
    },
    /// Run invariant suites and report each check.
    #[command(after_help = "CSV columns: suite,check,value,limit,passed")]
    Verify {
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum KernelMethod {
    Closed,
    Series,
    Transform,
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TestFunction {
    /// conj(z)^{kn}
    ConjBase,
    /// The series given by --series.
    Series,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Pairing {
    Natural,
    Swapped,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    All,
    Kernels,
    Basis,
    Projection,
    Lp,
    Schur,
}
