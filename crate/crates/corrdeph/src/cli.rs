//! Command-line surface: argument parsing and dispatch for the
//! `corrdeph` binary.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;

use corrdeph::lindblad::{
    build_model, evolve_numeric, qubit_levels, qutrit_levels, time_grid, DensityMatrix,
};
use corrdeph::metrology::metrology_report;
use corrdeph::rates::rate_pair_sum;
use corrdeph::sweep::{
    emit, render, run_validation, OutputFormat, SweepMode, SweepSpec, ValidationGrid,
};
use corrdeph::{
    CoherencePair, Error, IonArray, LevelScheme, Result, SpatialKernel, StateLabel,
};
use corrdeph::states::StateSpec;

#[derive(Parser)]
#[command(
    name = "corrdeph",
    version,
    about = "Dephasing rates and frequency-estimation precision for ion arrays \
             under spatially correlated noise"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Analytic dephasing rate for one array and state
    Rates(RatesArgs),
    /// Dense master-equation evolution of the tracked coherence
    Simulate(SimulateArgs),
    /// Time-optimized frequency uncertainty and pair baseline
    Uncertainty(UncertaintyArgs),
    /// Scaling sweep over array sizes
    Sweep(SweepArgs),
    /// Analytic-vs-simulation validation campaign
    Validate(ValidateArgs),
}

fn parse_kernel(s: &str) -> std::result::Result<SpatialKernel, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_state(s: &str) -> std::result::Result<StateSpec, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Args)]
pub struct CommonArgs {
    /// Number of ions
    #[arg(long)]
    pub n: usize,
    /// Kernel: uncorr | const | exp:xi=<f> | cos:k=<f> | dampedcos:k=<f>,xi=<f>
    #[arg(long, value_parser = parse_kernel)]
    pub kernel: SpatialKernel,
    /// State: alternating | block | ghz | custom:<l1,..;m1,..>
    #[arg(long, value_parser = parse_state, default_value = "alternating")]
    pub state: StateSpec,
    /// Ion spacing
    #[arg(long, default_value_t = 1.0)]
    pub d: f64,
    /// Level offset eps_delta
    #[arg(long, default_value_t = 1.0)]
    pub eps_delta: f64,
    /// Dephasing strength
    #[arg(long, default_value_t = 1.0)]
    pub gamma0: f64,
}

impl CommonArgs {
    fn scheme(&self) -> LevelScheme {
        LevelScheme {
            epsilon_delta: self.eps_delta,
            gamma0: self.gamma0,
            ..LevelScheme::default()
        }
    }

    fn array(&self) -> Result<IonArray> {
        IonArray::fixed_density(self.n, self.d)
    }
}

#[derive(Args)]
pub struct RatesArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Output path (.json or .csv); stdout when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Engine {
    Exact,
    Numeric,
    Both,
}

#[derive(Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Evolution window end time
    #[arg(long)]
    pub t_max: f64,
    /// Number of integration steps
    #[arg(long)]
    pub steps: usize,
    #[arg(long, value_enum, default_value = "numeric")]
    pub engine: Engine,
    /// Output CSV path; stdout when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct UncertaintyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Total interrogation budget
    #[arg(long = "T")]
    pub t_total: f64,
    /// Intra-pair spacing for the pair baseline; defaults to --d
    #[arg(long)]
    pub d_pair: Option<f64>,
    /// Output JSON path; stdout when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    FixedDensity,
    FixedLength,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub mode: ModeArg,
    /// Correlation length: physical in fixed-density mode, fraction of
    /// L (float or a/b) in fixed-length mode
    #[arg(long)]
    pub xi: Option<String>,
    /// Ion spacing (fixed-density mode)
    #[arg(long)]
    pub d: Option<f64>,
    /// Array length (fixed-length mode)
    #[arg(long = "L")]
    pub length: Option<f64>,
    /// Array sizes: start:stop[:step] or a comma list
    #[arg(long, default_value = "2:64:2")]
    pub n: String,
    #[arg(long, value_parser = parse_state, default_value = "alternating")]
    pub state: StateSpec,
    /// Kernel family; bare "exp" takes its length from --xi
    #[arg(long, default_value = "exp")]
    pub kernel: String,
    #[arg(long = "T", default_value_t = 1e3)]
    pub t_total: f64,
    #[arg(long)]
    pub d_pair: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub eps_delta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub gamma0: f64,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: FormatArg,
    /// Output path; stdout when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GridArg {
    Default,
    Extended,
}

#[derive(Args)]
pub struct ValidateArgs {
    #[arg(long, value_enum, default_value = "default")]
    pub grid: GridArg,
    /// Optional JSON report path
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn write_output(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, content).map_err(|source| Error::Io {
            path: p.display().to_string(),
            source,
        }),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn is_csv(path: Option<&Path>) -> bool {
    path.and_then(|p| p.extension())
        .map(|e| e.eq_ignore_ascii_case("csv"))
        .unwrap_or(false)
}

#[derive(Serialize)]
struct RatesOutput {
    n: usize,
    d: f64,
    kernel: String,
    state: String,
    eps_delta: f64,
    gamma0: f64,
    gamma: f64,
    omega_coh: f64,
    method: String,
}

fn cmd_rates(args: &RatesArgs) -> Result<i32> {
    let scheme = args.common.scheme();
    let array = args.common.array()?;
    let pair = args.common.state.build(args.common.n, &scheme)?;
    let report = rate_pair_sum(&pair, &args.common.kernel, &array, &scheme)?;
    let output = RatesOutput {
        n: args.common.n,
        d: args.common.d,
        kernel: args.common.kernel.to_string(),
        state: format!("{:?}", pair.label),
        eps_delta: args.common.eps_delta,
        gamma0: args.common.gamma0,
        gamma: report.gamma,
        omega_coh: report.omega_coh,
        method: format!("{:?}", report.method),
    };
    let content = if is_csv(args.out.as_deref()) {
        format!(
            "n,d,kernel,state,eps_delta,gamma0,gamma,omega_coh,method\n{},{},{},{},{},{},{},{},{}\n",
            output.n,
            output.d,
            output.kernel,
            output.state,
            output.eps_delta,
            output.gamma0,
            output.gamma,
            output.omega_coh,
            output.method
        )
    } else {
        let mut s = serde_json::to_string_pretty(&output).expect("report serializes");
        s.push('\n');
        s
    };
    write_output(args.out.as_deref(), &content)?;
    Ok(0)
}

fn levels_for(pair: &CoherencePair, scheme: &LevelScheme) -> Vec<f64> {
    match pair.label {
        StateLabel::Ghz => qubit_levels(),
        StateLabel::AlternatingQuadrupole | StateLabel::BlockQuadrupole => qutrit_levels(scheme),
        StateLabel::Custom => {
            let mut levels: Vec<f64> = pair.left.iter().chain(&pair.right).copied().collect();
            levels.sort_by(|a, b| b.partial_cmp(a).expect("finite eigenvalues"));
            levels.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
            levels
        }
    }
}

struct SimRow {
    t: f64,
    coh: Complex64,
    p1: f64,
    p2: f64,
    trace_err: f64,
}

fn sim_csv(rows: &[SimRow], header: &str) -> String {
    let mut out = String::new();
    writeln!(out, "# corrdeph simulate").unwrap();
    writeln!(out, "# {header}").unwrap();
    writeln!(out, "t,re_coh,im_coh,abs_coh,p1,p2,trace_err").unwrap();
    for row in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            row.t,
            row.coh.re,
            row.coh.im,
            row.coh.norm(),
            row.p1,
            row.p2,
            row.trace_err
        )
        .unwrap();
    }
    out
}

fn cmd_simulate(args: &SimulateArgs) -> Result<i32> {
    if !(args.t_max > 0.0) || args.steps == 0 {
        return Err(Error::InvalidMetrology(format!(
            "t-max and steps must be positive, got {} and {}",
            args.t_max, args.steps
        )));
    }
    let scheme = args.common.scheme();
    let array = args.common.array()?;
    let pair = args.common.state.build(args.common.n, &scheme)?;
    let levels = levels_for(&pair, &scheme);
    let model = build_model(&array, &scheme, &args.common.kernel, &levels)?;
    let grid = time_grid(args.t_max, args.steps);
    let c0 = Complex64::new(0.5, 0.0);

    let exact_rows = |grid: &[f64]| -> Result<Vec<SimRow>> {
        let (a, b) = model.pair_indices(&pair)?;
        let gamma = model.element_decay_rate(a, b);
        let omega = model.element_frequency(a, b);
        Ok(grid
            .iter()
            .map(|&t| {
                let coh = c0 * Complex64::new(-gamma * t, -omega * t).exp();
                SimRow {
                    t,
                    coh,
                    p1: 0.5 + coh.re,
                    p2: 0.5 - coh.re,
                    trace_err: 0.0,
                }
            })
            .collect())
    };
    let numeric_rows = |grid: &[f64]| -> Result<Vec<SimRow>> {
        let (a, b) = model.pair_indices(&pair)?;
        let rho0 = DensityMatrix::pure_superposition(model.dim, a, b);
        let traj = evolve_numeric(&model, &rho0, grid, &pair)?;
        Ok((0..traj.times.len())
            .map(|i| SimRow {
                t: traj.times[i],
                coh: traj.coherence[i],
                p1: traj.p1[i],
                p2: traj.p2[i],
                trace_err: traj.trace_err[i],
            })
            .collect())
    };

    let header = format!(
        "n={} d={} kernel={} state={:?} eps_delta={} gamma0={} steps={}",
        args.common.n,
        args.common.d,
        args.common.kernel,
        pair.label,
        args.common.eps_delta,
        args.common.gamma0,
        args.steps
    );
    let (rows, status) = match args.engine {
        Engine::Exact => (exact_rows(&grid)?, 0),
        Engine::Numeric => (numeric_rows(&grid)?, 0),
        Engine::Both => {
            let exact = exact_rows(&grid)?;
            let numeric = numeric_rows(&grid)?;
            let max_dev = exact
                .iter()
                .zip(&numeric)
                .map(|(e, n)| (e.coh - n.coh).norm())
                .fold(0.0_f64, f64::max);
            if max_dev > 1e-6 {
                eprintln!("engines disagree: max coherence deviation {max_dev:e}");
                (numeric, 1)
            } else {
                (numeric, 0)
            }
        }
    };
    write_output(args.out.as_deref(), &sim_csv(&rows, &header))?;
    Ok(status)
}

fn cmd_uncertainty(args: &UncertaintyArgs) -> Result<i32> {
    let scheme = args.common.scheme();
    let array = args.common.array()?;
    let pair = args.common.state.build(args.common.n, &scheme)?;
    let gamma = rate_pair_sum(&pair, &args.common.kernel, &array, &scheme)?.gamma;
    let d_pair = args.d_pair.unwrap_or(args.common.d);
    let pair_array = IonArray::fixed_density(2, d_pair)?;
    let pair_state = args.common.state.build(2, &scheme)?;
    let gamma_pair =
        rate_pair_sum(&pair_state, &args.common.kernel, &pair_array, &scheme)?.gamma;
    let report = metrology_report(args.common.n, scheme.omega0(), gamma, gamma_pair, args.t_total)?;
    let mut content = serde_json::to_string_pretty(&report).expect("report serializes");
    content.push('\n');
    write_output(args.out.as_deref(), &content)?;
    Ok(0)
}

/// Parses `start:stop[:step]` or a comma list into an ascending grid.
fn parse_n_grid(s: &str) -> Result<Vec<usize>> {
    let parse_one = |tok: &str| -> Result<usize> {
        tok.trim().parse().map_err(|_| Error::Parse {
            what: "array size".into(),
            input: tok.to_string(),
        })
    };
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let (start, stop, step) = match parts.as_slice() {
            [a, b] => (parse_one(a)?, parse_one(b)?, 2),
            [a, b, c] => (parse_one(a)?, parse_one(b)?, parse_one(c)?),
            _ => {
                return Err(Error::Parse {
                    what: "n range".into(),
                    input: s.to_string(),
                })
            }
        };
        if step == 0 || stop < start {
            return Err(Error::Parse {
                what: "n range".into(),
                input: s.to_string(),
            });
        }
        Ok((start..=stop).step_by(step).collect())
    } else {
        s.split(',').map(parse_one).collect()
    }
}

/// Parses a correlation-length token: a float, or a fraction `a/b`.
fn parse_xi_token(s: &str) -> Result<f64> {
    let err = || Error::Parse {
        what: "correlation length".into(),
        input: s.to_string(),
    };
    let value = if let Some((num, den)) = s.split_once('/') {
        let num: f64 = num.trim().parse().map_err(|_| err())?;
        let den: f64 = den.trim().parse().map_err(|_| err())?;
        num / den
    } else {
        s.trim().parse().map_err(|_| err())?
    };
    if !(value > 0.0) || !value.is_finite() {
        return Err(err());
    }
    Ok(value)
}

fn sweep_kernel(args: &SweepArgs, mode: SweepMode) -> Result<SpatialKernel> {
    let xi = match &args.xi {
        Some(tok) => {
            let raw = parse_xi_token(tok)?;
            Some(match mode {
                // fraction of the array length
                SweepMode::FixedLength { l } => raw * l,
                SweepMode::FixedDensity { .. } => raw,
            })
        }
        None => None,
    };
    let kernel = if args.kernel == "exp" {
        let xi = xi.ok_or_else(|| {
            Error::InvalidKernel("exponential sweep kernel needs --xi".into())
        })?;
        SpatialKernel::Exponential { xi }
    } else {
        let parsed: SpatialKernel = args.kernel.parse()?;
        match (parsed, xi) {
            (SpatialKernel::Exponential { .. }, Some(xi)) => SpatialKernel::Exponential { xi },
            (SpatialKernel::DampedCosine { k, .. }, Some(xi)) => {
                SpatialKernel::DampedCosine { k, xi }
            }
            (k, None) => k,
            (k, Some(_)) => {
                return Err(Error::InvalidKernel(format!(
                    "--xi does not apply to kernel {k}"
                )))
            }
        }
    };
    kernel.validate()?;
    Ok(kernel)
}

fn cmd_sweep(args: &SweepArgs) -> Result<i32> {
    let mode = match args.mode {
        ModeArg::FixedDensity => {
            let d = args.d.ok_or_else(|| {
                Error::InvalidSweep("fixed-density mode needs --d".into())
            })?;
            SweepMode::FixedDensity { d }
        }
        ModeArg::FixedLength => {
            let l = args.length.ok_or_else(|| {
                Error::InvalidSweep("fixed-length mode needs --L".into())
            })?;
            SweepMode::FixedLength { l }
        }
    };
    let kernel = sweep_kernel(args, mode)?;
    let spec = SweepSpec {
        mode,
        kernel,
        state: args.state.clone(),
        n_values: parse_n_grid(&args.n)?,
        scheme: LevelScheme {
            epsilon_delta: args.eps_delta,
            gamma0: args.gamma0,
            ..LevelScheme::default()
        },
        t_total: args.t_total,
        d_pair: args.d_pair,
    };
    let rows = match mode {
        SweepMode::FixedDensity { .. } => corrdeph::sweep::run_fixed_density(&spec)?,
        SweepMode::FixedLength { .. } => corrdeph::sweep::run_fixed_length(&spec)?,
    };
    let format = match args.format {
        FormatArg::Csv => OutputFormat::Csv,
        FormatArg::Json => OutputFormat::Json,
    };
    match &args.out {
        Some(path) => emit(&rows, &spec.describe(), format, path)?,
        None => print!("{}", render(&rows, &spec.describe(), format)?),
    }
    Ok(0)
}

fn cmd_validate(args: &ValidateArgs) -> Result<i32> {
    let grid = match args.grid {
        GridArg::Default => ValidationGrid::Default,
        GridArg::Extended => ValidationGrid::Extended,
    };
    let report = run_validation(grid);
    for cell in &report.cells {
        let status = if cell.passed { "pass" } else { "FAIL" };
        println!("{status}  {}  ({})", cell.name, cell.detail);
    }
    println!(
        "{} of {} cells passed",
        report.cells.iter().filter(|c| c.passed).count(),
        report.cells.len()
    );
    if let Some(path) = &args.out {
        let mut content = serde_json::to_string_pretty(&report).expect("report serializes");
        content.push('\n');
        std::fs::write(path, content).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
    }
    Ok(if report.passed { 0 } else { 1 })
}

pub fn run(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Rates(args) => cmd_rates(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Uncertainty(args) => cmd_uncertainty(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Validate(args) => cmd_validate(args),
    }
}
