use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use stablefit::bench::{
    format_table, run_ks_study, run_mse_study, run_parameter_sweep, run_sample_size_study, study_csv, study_json,
    StudyConfig, StudyResult, Sweep,
};
use stablefit::data::{decode_f64_le, encode_f64_le, parse_grid, parse_sizes, read_column, ColumnSelector, ReturnMode, ReturnSpec};
use stablefit::dist::density_curve;
use stablefit::quantile::{default_lookup, QuantileLookup};
use stablefit::report::{fit_csv, fit_json, fit_series, FitRecord};
use stablefit::{sample_stable, DistEvalConfig, Error, Method, ParamField, StableParams};

const EXIT_IO: u8 = 2;
const EXIT_ARGS: u8 = 3;
const EXIT_ESTIMATION: u8 = 4;

#[derive(Parser)]
#[command(name = "stablefit", version, about = "Fit, simulate and benchmark alpha-stable distributions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit stable laws to one column of a CSV file (or a raw f64 buffer)
    Fit(FitArgs),
    /// Draw a stable sample
    Sample(SampleArgs),
    /// Monte-Carlo accuracy studies
    Bench(BenchArgs),
    /// Tabulate pdf and cdf on an even grid
    Density(DensityArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodChoice {
    Proposed,
    Bibalan,
    Krutto,
    Quantile,
    All,
}

impl MethodChoice {
    fn methods(self) -> Vec<Method> {
        match self {
            MethodChoice::Proposed => vec![Method::Proposed],
            MethodChoice::Bibalan => vec![Method::Bibalan],
            MethodChoice::Krutto => vec![Method::Krutto],
            MethodChoice::Quantile => vec![Method::Quantile],
            MethodChoice::All => Method::ALL.to_vec(),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Returns {
    Raw,
    LogReturn,
    SimpleReturn,
}

impl From<Returns> for ReturnMode {
    fn from(r: Returns) -> Self {
        match r {
            Returns::Raw => ReturnMode::Raw,
            Returns::LogReturn => ReturnMode::LogReturn,
            Returns::SimpleReturn => ReturnMode::SimpleReturn,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FitFormat {
    Json,
    Csv,
}

#[derive(Args)]
struct FitArgs {
    /// Input file
    input: PathBuf,
    /// Column name or zero-based index
    #[arg(long, default_value = "0")]
    column: String,
    /// Treat the input as little-endian f64 values instead of CSV
    #[arg(long)]
    binary: bool,
    /// Transform applied to the column before fitting
    #[arg(long, value_enum, default_value = "raw")]
    returns: Returns,
    /// Multiplier applied after the transform; gamma and delta are reported in original units
    #[arg(long, default_value_t = 1.0)]
    prescale: f64,
    #[arg(long, value_enum, default_value = "all")]
    method: MethodChoice,
    #[arg(long, value_enum, default_value = "json")]
    format: FitFormat,
    /// Quantile lookup table cache; built and written if missing
    #[arg(long)]
    table_cache: Option<PathBuf>,
    /// Output file (standard output if omitted)
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SampleFormat {
    Csv,
    F64le,
}

#[derive(Args)]
struct ParamArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    beta: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    delta: f64,
}

impl ParamArgs {
    fn params(&self) -> stablefit::Result<StableParams> {
        StableParams::new(self.alpha, self.beta, self.gamma, self.delta)
    }
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(short, long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "csv")]
    format: SampleFormat,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(subcommand)]
    study: Study,
}

#[derive(Subcommand)]
enum Study {
    /// MSE and absolute bias per method and parameter
    Mse(StudyArgs),
    /// MSE plus RMS of the KS distance of each fit
    Ks(StudyArgs),
    /// MSE over increasing sample sizes
    Nsweep {
        #[command(flatten)]
        study: StudyArgs,
        /// Comma-separated increasing sample sizes
        #[arg(long)]
        sizes: String,
    },
    /// One parameter varied over a grid
    Sweep {
        #[command(flatten)]
        study: StudyArgs,
        #[arg(long, value_enum)]
        param: SweepParam,
        /// lo:hi:step or a comma-separated list
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
        /// Also compute the RMS of the KS distance
        #[arg(long)]
        ks: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepParam {
    Alpha,
    Beta,
    Gamma,
    Delta,
}

impl From<SweepParam> for ParamField {
    fn from(p: SweepParam) -> Self {
        match p {
            SweepParam::Alpha => ParamField::Alpha,
            SweepParam::Beta => ParamField::Beta,
            SweepParam::Gamma => ParamField::Gamma,
            SweepParam::Delta => ParamField::Delta,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum StudyFormat {
    Csv,
    Json,
    Table,
}

#[derive(Args)]
struct StudyArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Sample size per replication
    #[arg(long = "N", default_value_t = 10_000)]
    n: usize,
    /// Number of replications
    #[arg(long = "L", default_value_t = 100)]
    replications: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated methods, or "all"
    #[arg(long, default_value = "all")]
    methods: String,
    /// Run replications on one thread
    #[arg(long)]
    serial: bool,
    #[arg(long, value_enum, default_value = "csv")]
    format: StudyFormat,
    /// Also write the JSON summary here
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct DensityArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, allow_hyphen_values = true, default_value_t = -5.0)]
    from: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 5.0)]
    to: f64,
    #[arg(long, default_value_t = 201)]
    points: usize,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

/// An error with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }

    fn io(path: &Path, e: std::io::Error) -> Self {
        Failure::new(EXIT_IO, format!("{}: {e}", path.display()))
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidParams(_)
            | Error::InvalidSample(_)
            | Error::InsufficientSample { .. }
            | Error::InvalidStudy(_)
            | Error::Parse(_) => EXIT_ARGS,
            _ => EXIT_ESTIMATION,
        };
        Failure::new(code, e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn write_output(path: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, bytes).map_err(|e| Failure::io(p, e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes).and_then(|_| out.flush()).map_err(|e| Failure::new(EXIT_IO, e.to_string()))
        }
    }
}

fn lookup_table(cache: Option<&Path>) -> CliResult<QuantileLookup> {
    match cache {
        Some(p) if p.exists() => Ok(QuantileLookup::read_cache(p)?),
        Some(p) => {
            let t = default_lookup().clone();
            t.write_cache(p).map_err(|e| Failure::io(p, e))?;
            Ok(t)
        }
        None => Ok(default_lookup().clone()),
    }
}

fn run_fit(args: &FitArgs) -> CliResult<()> {
    let bytes = fs::read(&args.input).map_err(|e| Failure::io(&args.input, e))?;
    let series = if args.binary {
        decode_f64_le(&bytes)?
    } else {
        let column: ColumnSelector = args.column.parse()?;
        let data = read_column(bytes.as_slice(), &column)?;
        if data.skipped > 0 {
            eprintln!("warning: skipped {} non-numeric row(s) in column {column}", data.skipped);
        }
        data.values
    };
    let spec = ReturnSpec::new(args.returns.into(), args.prescale)?;
    let table = lookup_table(args.table_cache.as_deref())?;
    let fits = fit_series(&series, &spec, &args.method.methods(), &table, DistEvalConfig::fast())?;

    let mut records: Vec<FitRecord> = Vec::new();
    let mut failed = Vec::new();
    for (m, r) in fits {
        match r {
            Ok(rec) => {
                if rec.clamped.contains(&ParamField::Gamma) {
                    eprintln!(
                        "warning: {m}: gamma estimate floored at 0.01; rescale the data (e.g. --prescale 100) and refit"
                    );
                }
                records.push(rec);
            }
            Err(e) => failed.push(format!("{m}: {e}")),
        }
    }
    let text = match args.format {
        FitFormat::Json => fit_json(&records) + "\n",
        FitFormat::Csv => fit_csv(&records),
    };
    if !records.is_empty() {
        write_output(args.output.as_deref(), text.as_bytes())?;
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::new(EXIT_ESTIMATION, format!("estimation failed: {}", failed.join("; "))))
    }
}

fn run_sample(args: &SampleArgs) -> CliResult<()> {
    let p = args.params.params()?;
    let x = sample_stable(&p, args.n, args.seed)?;
    let bytes = match args.format {
        SampleFormat::Csv => {
            let mut s = String::from("value\n");
            for v in x.values() {
                s.push_str(&v.to_string());
                s.push('\n');
            }
            s.into_bytes()
        }
        SampleFormat::F64le => encode_f64_le(x.values()),
    };
    write_output(args.output.as_deref(), &bytes)
}

fn parse_methods(spec: &str) -> CliResult<Vec<Method>> {
    if spec.trim() == "all" {
        return Ok(Method::ALL.to_vec());
    }
    spec.split(',')
        .map(|s| match s.trim() {
            "proposed" => Ok(Method::Proposed),
            "bibalan" => Ok(Method::Bibalan),
            "krutto" => Ok(Method::Krutto),
            "quantile" => Ok(Method::Quantile),
            other => Err(Failure::new(EXIT_ARGS, format!("unknown method '{other}'"))),
        })
        .collect()
}

fn study_config(a: &StudyArgs) -> CliResult<StudyConfig> {
    let mut cfg = StudyConfig::new(a.params.params()?, parse_methods(&a.methods)?, a.n, a.replications, a.seed);
    cfg.parallel = !a.serial;
    Ok(cfg)
}

fn run_bench(args: &BenchArgs) -> CliResult<()> {
    let (a, results): (&StudyArgs, Vec<StudyResult>) = match &args.study {
        Study::Mse(a) => (a, vec![run_mse_study(&study_config(a)?)?]),
        Study::Ks(a) => (a, vec![run_ks_study(&study_config(a)?)?]),
        Study::Nsweep { study, sizes } => {
            let cfg = study_config(study)?;
            (study, run_sample_size_study(&cfg, &parse_sizes(sizes)?)?)
        }
        Study::Sweep { study, param, grid, ks } => {
            let mut cfg = study_config(study)?;
            cfg.sweep = Some(Sweep { field: (*param).into(), values: parse_grid(grid)? });
            (study, run_parameter_sweep(&cfg, *ks)?)
        }
    };
    if let Some(p) = &a.json {
        fs::write(p, study_json(&results) + "\n").map_err(|e| Failure::io(p, e))?;
    }
    let text = match a.format {
        StudyFormat::Csv => study_csv(&results),
        StudyFormat::Json => study_json(&results) + "\n",
        StudyFormat::Table => results.iter().map(format_table).collect::<Vec<_>>().join("\n"),
    };
    write_output(a.output.as_deref(), text.as_bytes())
}

fn run_density(args: &DensityArgs) -> CliResult<()> {
    let p = args.params.params()?;
    let curve = density_curve(&p, args.from, args.to, args.points, &DistEvalConfig::default())?;
    let mut s = String::from("x,pdf,cdf\n");
    for (x, f, c) in curve {
        s.push_str(&format!("{x},{f},{c}\n"));
    }
    write_output(args.output.as_deref(), s.as_bytes())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_ARGS) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Fit(a) => run_fit(a),
        Command::Sample(a) => run_sample(a),
        Command::Bench(a) => run_bench(a),
        Command::Density(a) => run_density(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
