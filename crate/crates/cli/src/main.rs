use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sogkit::decimal::Decimal;
use sogkit::diagnostics::{
    grid_relative_error, max_relative_error, sweep_bandwidth, sweep_p, Domain, ErrorReport, NcPolicy, SweepOptions,
    DEFAULT_POINTS, DEFAULT_SEED,
};
use sogkit::io::{read_file, to_csv, write_file, ApproximantFile};
use sogkit::kernels::KernelSpec;
use sogkit::numerics::HiPrec;
use sogkit::reduction::{reduce, to_pole_system, Balancing, Target, default_rank_tolerance, to_reduced_sog};
use sogkit::vp::{build_sog, Precision, Quadrature, VpConfig};
use sogkit::SogError;

/// Environment variable that replaces the automatic precision.
const PRECISION_ENV: &str = "SOGKIT_PRECISION_BITS";

#[derive(Parser)]
#[command(name = "sogkit", version, about = "Sum-of-Gaussians kernel approximations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a ladder approximant and write it as JSON.
    Build(BuildArgs),
    /// Compress a ladder approximant by balanced truncation.
    Reduce(ReduceArgs),
    /// Maximum relative error of an approximant file against its kernel.
    Eval(EvalArgs),
    /// Accuracy sweeps over p or the minimal bandwidth, as CSV.
    Sweep(SweepArgs),
    /// Reduction tables for IMQ (1) or Matérn nu=2 (2).
    Table(TableArgs),
    /// Flat 64-bit CSV of an approximant's terms.
    Export(ExportArgs),
}

#[derive(Args, Clone)]
struct KernelArgs {
    /// gauss, imq, ewald, matern or exp.
    #[arg(long)]
    kernel: String,
    /// Kernel parameter as name=value (h, alpha, nu; xc and delta localize).
    #[arg(long = "param", value_parser = parse_param)]
    params: Vec<(String, Decimal)>,
}

impl KernelArgs {
    fn spec(&self) -> Result<KernelSpec, Failure> {
        KernelSpec::from_name(&self.kernel, &self.params).map_err(|e| Failure::new("kernel", e))
    }
}

#[derive(Args, Clone)]
struct EvalPoints {
    /// Number of random monitoring points.
    #[arg(long, default_value_t = DEFAULT_POINTS)]
    m: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Right end of the monitoring interval [0, xmax].
    #[arg(long, default_value_t = 1.0)]
    xmax: f64,
}

impl EvalPoints {
    fn domain(&self) -> Result<Domain, Failure> {
        Domain::up_to(self.xmax).map_err(|e| Failure::new("arguments", e))
    }
}

#[derive(Args)]
struct BuildArgs {
    #[command(flatten)]
    kernel: KernelArgs,
    #[arg(long)]
    n: usize,
    /// Bandwidth parameter n_c (default ceil(n/4)).
    #[arg(long)]
    nc: Option<Decimal>,
    /// "auto" or a bit count.
    #[arg(long)]
    precision: Option<String>,
    /// "adaptive" or a fixed trapezoid node count.
    #[arg(long, default_value = "adaptive")]
    quadrature: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReduceArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Number of Gaussians to keep.
    #[arg(long, conflicts_with = "delta", required_unless_present = "delta")]
    q: Option<usize>,
    /// Hankel error bound to meet.
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[command(flatten)]
    points: EvalPoints,
    /// Equispaced points instead of random ones.
    #[arg(long)]
    grid: bool,
    /// Also print f_p(x) and f(x) at these points.
    #[arg(long, value_delimiter = ',')]
    at: Vec<f64>,
    /// Write the report as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepMode {
    P,
    Bandwidth,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum)]
    mode: SweepMode,
    #[command(flatten)]
    kernel: KernelArgs,
    /// Values of n (mode p).
    #[arg(long, value_delimiter = ',')]
    n_list: Vec<usize>,
    /// n_c for mode p: a number or "quarter" for ceil(n/4).
    #[arg(long, default_value = "quarter")]
    nc: String,
    /// Fixed n (mode bandwidth).
    #[arg(long)]
    n: Option<usize>,
    /// Values of n_c (mode bandwidth).
    #[arg(long, value_delimiter = ',')]
    nc_list: Vec<Decimal>,
    #[arg(long)]
    precision: Option<String>,
    #[command(flatten)]
    points: EvalPoints,
    /// Fill in the wall_ms column (makes the output run-dependent).
    #[arg(long)]
    timing: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TableArgs {
    /// 1 (IMQ) or 2 (Matérn nu=2).
    #[arg(value_parser = clap::value_parser!(u8).range(1..=2))]
    which: u8,
    #[command(flatten)]
    points: EvalPoints,
    /// Write the rows as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_param(s: &str) -> Result<(String, Decimal), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected name=value, got '{s}'"))?;
    let v: Decimal = v.parse().map_err(|e: SogError| e.to_string())?;
    Ok((k.trim().to_string(), v))
}

struct Failure {
    stage: &'static str,
    error: SogError,
}

impl Failure {
    fn new(stage: &'static str, error: SogError) -> Self {
        Failure { stage, error }
    }

    fn usage(msg: impl Into<String>) -> Self {
        Failure::new("arguments", SogError::InvalidParameter(msg.into()))
    }

    fn code(&self) -> u8 {
        if self.error.is_numerical() {
            3
        } else {
            2
        }
    }
}

fn precision(flag: Option<&str>) -> Result<Precision, Failure> {
    let parse_bits = |s: &str, what: &str| -> Result<Precision, Failure> {
        match s.trim().parse::<u32>() {
            Ok(b) if b >= 64 => Ok(Precision::Bits(b)),
            _ => Err(Failure::usage(format!("{what} must be 'auto' or a bit count >= 64, got '{s}'"))),
        }
    };
    match flag {
        Some("auto") | None => match std::env::var(PRECISION_ENV) {
            Ok(v) => parse_bits(&v, PRECISION_ENV),
            Err(_) => Ok(Precision::Auto),
        },
        Some(s) => parse_bits(s, "--precision"),
    }
}

fn quadrature(s: &str) -> Result<Quadrature, Failure> {
    if s == "adaptive" {
        return Ok(Quadrature::Adaptive);
    }
    s.parse()
        .ok()
        .filter(|&n: &usize| n > 0)
        .map(Quadrature::Fixed)
        .ok_or_else(|| Failure::usage(format!("--quadrature must be 'adaptive' or a node count, got '{s}'")))
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::new("output", SogError::Io(format!("{}: {e}", path.display()))))
}

fn sci(v: f64) -> String {
    format!("{v:.4e}")
}

fn run_build(a: BuildArgs) -> Result<(), Failure> {
    let kernel = a.kernel.spec()?;
    if a.n == 0 {
        return Err(Failure::usage("--n must be at least 1"));
    }
    let n_c = a.nc.unwrap_or_else(|| NcPolicy::QuarterN.n_c(a.n));
    let cfg = VpConfig::new(a.n, n_c)
        .map_err(|e| Failure::new("arguments", e))?
        .with_precision(precision(a.precision.as_deref())?)
        .with_quadrature(quadrature(&a.quadrature)?);
    let approx = build_sog(&kernel, &cfg).map_err(|e| Failure::new("build", e))?;
    println!(
        "p={} n_c={} s_min={} w_max={} precision_bits={}",
        approx.weights.len(),
        approx.n_c(),
        sci(approx.s_min().to_f64()),
        approx.w_max().to_sci(5),
        approx.precision_bits()
    );
    write_file(&a.out, &ApproximantFile::Ladder(approx)).map_err(|e| Failure::new("output", e))
}

fn run_reduce(a: ReduceArgs) -> Result<(), Failure> {
    let target = match (a.q, a.delta) {
        (Some(0), _) => return Err(Failure::usage("--q must be at least 1")),
        (Some(q), _) => Target::Order(q),
        (None, Some(d)) if d.is_finite() && d > 0.0 => Target::Tolerance(d),
        (None, Some(d)) => return Err(Failure::usage(format!("--delta must be positive, got {d}"))),
        (None, None) => return Err(Failure::usage("one of --q or --delta is required")),
    };
    let approx = match read_file(&a.input).map_err(|e| Failure::new("input", e))? {
        ApproximantFile::Ladder(l) => l,
        ApproximantFile::Reduced(_) => {
            return Err(Failure::new(
                "input",
                SogError::NotLadder("file is already reduced; reduce its ladder instead".into()),
            ))
        }
    };
    let r = reduce(&approx, &target).map_err(|e| Failure::new("reduce", e))?;
    println!(
        "q={} hankel_bound={} s_min={} w_max={} complex_pairs={}",
        r.q(),
        sci(r.hankel_bound.to_f64()),
        sci(r.s_min_modulus().to_f64()),
        sci(r.w_max().to_f64()),
        r.complex_pairs()
    );
    write_file(&a.out, &ApproximantFile::Reduced(r)).map_err(|e| Failure::new("output", e))
}

fn report_line(r: &ErrorReport) -> String {
    format!(
        "eps_inf={} argmax_x={} m={} seed={} domain=[{}, {}] w_max={} s_min={}",
        sci(r.eps_inf),
        r.argmax_x,
        r.m,
        r.seed.map_or("grid".to_string(), |s| s.to_string()),
        r.domain.lo,
        r.domain.hi,
        sci(r.w_max),
        sci(r.s_min)
    )
}

fn run_eval(a: EvalArgs) -> Result<(), Failure> {
    let file = read_file(&a.input).map_err(|e| Failure::new("input", e))?;
    let kernel = file.kernel().to_kernel().map_err(|e| Failure::new("kernel", e))?;
    if a.points.m == 0 {
        return Err(Failure::usage("--m must be at least 1"));
    }
    let domain = a.points.domain()?;
    let report = match &file {
        ApproximantFile::Ladder(l) if a.grid => grid_relative_error(l, &kernel, a.points.m, domain),
        ApproximantFile::Ladder(l) => max_relative_error(l, &kernel, a.points.m, domain, a.points.seed),
        ApproximantFile::Reduced(r) if a.grid => grid_relative_error(r, &kernel, a.points.m, domain),
        ApproximantFile::Reduced(r) => max_relative_error(r, &kernel, a.points.m, domain, a.points.seed),
    }
    .map_err(|e| Failure::new("eval", e))?;
    println!("{}", report_line(&report));
    let prec = file.precision_bits();
    for x in &a.at {
        if !(x.is_finite() && *x >= 0.0) {
            return Err(Failure::usage(format!("--at needs finite x >= 0, got {x}")));
        }
        let xh = HiPrec::from_f64(*x, prec);
        let f = kernel.eval(&xh).map_err(|e| Failure::new("eval", e))?;
        println!("x={x} f_p={} f={}", file.evaluate(&xh).to_sci(17), f.to_sci(17));
    }
    if let Some(out) = &a.out {
        let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
        text.push('\n');
        write_text(out, &text)?;
    }
    Ok(())
}

fn run_sweep(a: SweepArgs) -> Result<(), Failure> {
    let kernel = a.kernel.spec()?;
    if a.points.m == 0 {
        return Err(Failure::usage("--m must be at least 1"));
    }
    let opts = SweepOptions {
        m: a.points.m,
        seed: a.points.seed,
        domain: a.points.domain()?,
        precision: precision(a.precision.as_deref())?,
    };
    let result = match a.mode {
        SweepMode::P => {
            if a.n_list.is_empty() || a.n_list.contains(&0) {
                return Err(Failure::usage("--n-list needs positive values"));
            }
            let policy = if a.nc == "quarter" {
                NcPolicy::QuarterN
            } else {
                NcPolicy::Fixed(a.nc.parse().map_err(|e| Failure::new("arguments", e))?)
            };
            sweep_p(&kernel, &a.n_list, &policy, &opts)
        }
        SweepMode::Bandwidth => {
            let n = a.n.filter(|&n| n > 0).ok_or_else(|| Failure::usage("--n is required for mode bandwidth"))?;
            if a.nc_list.is_empty() {
                return Err(Failure::usage("--nc-list is required for mode bandwidth"));
            }
            sweep_bandwidth(&kernel, n, &a.nc_list, &opts)
        }
    }
    .map_err(|e| Failure::new("sweep", e))?;
    let csv = result.to_csv(a.timing);
    match &a.out {
        Some(path) => write_text(path, &csv),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

/// Reduction levels of the tables; 100 is the unreduced ladder.
const TABLE_Q: [usize; 6] = [100, 90, 70, 50, 30, 10];

fn run_table(a: TableArgs) -> Result<(), Failure> {
    let (kernel, title) = match a.which {
        1 => (KernelSpec::from_name("imq", &[]), "IMQ"),
        _ => (KernelSpec::from_name("matern", &[("nu".into(), Decimal::from_int(2))]), "Matern nu=2"),
    };
    let kernel = kernel.map_err(|e| Failure::new("kernel", e))?;
    let domain = a.points.domain()?;
    let cfg = VpConfig::new(50, Decimal::from_int(13))
        .map_err(|e| Failure::new("arguments", e))?
        .with_precision(precision(None)?);
    let approx = build_sog(&kernel, &cfg).map_err(|e| Failure::new("build", e))?;
    let sys = to_pole_system(&approx).map_err(|e| Failure::new("reduce", e))?;
    let bal = Balancing::new(&sys, &default_rank_tolerance(sys.prec())).map_err(|e| Failure::new("reduce", e))?;

    let mut csv = String::from("q,w_max,s_q,eps_inf,hankel_bound,complex_pairs\n");
    println!("Model reduction with {} initial Gaussians for {title}", approx.weights.len());
    println!("{:>4}  {:>11}  {:>7}  {:>10}", "q", "w_max", "s_q", "eps_inf");
    for q in TABLE_Q {
        let (w_max, s_q, eps, bound, pairs) = if q == approx.weights.len() {
            let r = max_relative_error(&approx, &kernel, a.points.m, domain, a.points.seed)
                .map_err(|e| Failure::new("eval", e))?;
            (r.w_max, r.s_min, r.eps_inf, 0.0, 0)
        } else {
            let tr = bal.truncate(&Target::Order(q)).map_err(|e| Failure::new("reduce", e))?;
            let red = to_reduced_sog(&approx, &sys, &tr).map_err(|e| Failure::new("reduce", e))?;
            let r = max_relative_error(&red, &kernel, a.points.m, domain, a.points.seed)
                .map_err(|e| Failure::new("eval", e))?;
            (r.w_max, r.s_min, r.eps_inf, red.hankel_bound.to_f64(), red.complex_pairs())
        };
        println!("{q:>4}  {:>11.3e}  {:>7.3}  {:>10.3e}", w_max, s_q, eps);
        let _ = writeln!(csv, "{q},{w_max:e},{s_q:e},{eps:e},{bound:e},{pairs}");
    }
    match &a.out {
        Some(path) => write_text(path, &csv),
        None => Ok(()),
    }
}

fn run_export(a: ExportArgs) -> Result<(), Failure> {
    let file = read_file(&a.input).map_err(|e| Failure::new("input", e))?;
    let (csv, lossy) = to_csv(&file);
    if lossy {
        eprintln!(
            "warning: {}-bit values rounded to 64-bit floats; the CSV is not a lossless copy",
            file.precision_bits()
        );
    }
    match &a.out {
        Some(path) => write_text(path, &csv),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Build(a) => run_build(a),
        Command::Reduce(a) => run_reduce(a),
        Command::Eval(a) => run_eval(a),
        Command::Sweep(a) => run_sweep(a),
        Command::Table(a) => run_table(a),
        Command::Export(a) => run_export(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error in {}: {}", f.stage, f.error);
            ExitCode::from(f.code())
        }
    }
}
