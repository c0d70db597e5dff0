//! Scaling sweeps, the analytic-vs-simulation validation campaign, and
//! structured CSV/JSON emission.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::kernels::{kernel_matrix, SpatialKernel, DEFAULT_PSD_TOL};
use crate::lindblad::{
    build_model, evolve_numeric, fit_decay_rate, qutrit_levels, time_grid, DensityMatrix,
    FitStatus, MAX_STEP_NORM,
};
use crate::metrology::{
    optimal_time, optimized_uncertainty, pair_baseline, relative_resolution, RelativeResolution,
};
use crate::rates::{
    asymptote_fixed_density, asymptote_fixed_length, log_log_slope, rate_eq10, rate_eq11_closed,
    rate_ghz, rate_pair_sum,
};
use crate::states::{make_alternating_state, IonArray, LevelScheme, StateSpec};
use crate::{Error, Result};

/// How the array is grown across the sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum SweepMode {
    FixedDensity { d: f64 },
    FixedLength { l: f64 },
}

/// One sweep scenario: geometry scaling, kernel, probe state,
/// metrology horizon.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub mode: SweepMode,
    pub kernel: SpatialKernel,
    pub state: StateSpec,
    pub n_values: Vec<usize>,
    pub scheme: LevelScheme,
    pub t_total: f64,
    /// Intra-pair spacing for the pair baseline; defaults to the n=2
    /// array spacing of the chosen mode.
    pub d_pair: Option<f64>,
}

impl SweepSpec {
    fn validate(&self) -> Result<()> {
        if self.n_values.is_empty() {
            return Err(Error::InvalidSweep("n grid is empty".into()));
        }
        if self.n_values.windows(2).any(|w| w[1] <= w[0]) || self.n_values[0] < 2 {
            return Err(Error::InvalidSweep(
                "n grid must be ascending with every n >= 2".into(),
            ));
        }
        if !(self.t_total > 0.0) {
            return Err(Error::InvalidSweep(format!(
                "metrology horizon T must be positive, got {}",
                self.t_total
            )));
        }
        self.kernel.validate()?;
        Ok(())
    }

    fn array(&self, n: usize) -> Result<IonArray> {
        match self.mode {
            SweepMode::FixedDensity { d } => IonArray::fixed_density(n, d),
            SweepMode::FixedLength { l } => IonArray::fixed_length(n, l),
        }
    }

    /// Pair-baseline spacing: configured value, or the n=2 array
    /// spacing.
    pub fn pair_spacing(&self) -> f64 {
        self.d_pair.unwrap_or(match self.mode {
            SweepMode::FixedDensity { d } => d,
            SweepMode::FixedLength { l } => l / 2.0,
        })
    }

    /// One-line description recorded in emitted file headers.
    pub fn describe(&self) -> String {
        let mode = match self.mode {
            SweepMode::FixedDensity { d } => format!("fixed-density d={d}"),
            SweepMode::FixedLength { l } => format!("fixed-length L={l}"),
        };
        let state = match &self.state {
            StateSpec::Alternating => "alternating".to_string(),
            StateSpec::Block => "block".to_string(),
            StateSpec::Ghz => "ghz".to_string(),
            StateSpec::Custom { .. } => "custom".to_string(),
        };
        format!(
            "mode={mode} kernel={} state={state} eps_delta={} gamma0={} T={} d_pair={}",
            self.kernel, self.scheme.epsilon_delta, self.scheme.gamma0, self.t_total,
            self.pair_spacing()
        )
    }
}

/// One row of a scaling sweep.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub gamma: f64,
    pub gamma_asymptote: f64,
    pub delta_omega: f64,
    pub delta_omega_pair: f64,
    pub r: f64,
    pub t_opt: f64,
}

fn asymptote_for(spec: &SweepSpec, n: usize, gamma: f64) -> Result<f64> {
    let e2 = spec.scheme.gamma0 * spec.scheme.epsilon_delta * spec.scheme.epsilon_delta;
    if spec.state != StateSpec::Alternating {
        return Ok(gamma);
    }
    Ok(match (spec.mode, spec.kernel) {
        (SweepMode::FixedDensity { d }, SpatialKernel::Exponential { xi }) => {
            asymptote_fixed_density(xi, d, spec.scheme.epsilon_delta, spec.scheme.gamma0)?
                .exact_slope
                * n as f64
        }
        (SweepMode::FixedLength { l }, SpatialKernel::Exponential { xi }) => {
            asymptote_fixed_length(l / xi, spec.scheme.epsilon_delta, spec.scheme.gamma0)?.constant
        }
        (_, SpatialKernel::Uncorrelated) => e2 * n as f64 / 2.0,
        (_, SpatialKernel::Constant) => 0.0,
        _ => gamma,
    })
}

fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let scheme = &spec.scheme;
    let omega0 = scheme.omega0();
    if !(omega0 > 0.0) {
        return Err(Error::InvalidSweep(format!(
            "sweep needs omega0 = alpha*eps_delta^2 > 0, got {omega0}"
        )));
    }
    let pair_array = IonArray::fixed_density(2, spec.pair_spacing())?;
    let pair_state = spec.state.build(2, scheme).map_err(|_| {
        Error::InvalidSweep("pair baseline undefined for this state specification".into())
    })?;
    let gamma_pair = rate_pair_sum(&pair_state, &spec.kernel, &pair_array, scheme)?.gamma;

    let mut rows = Vec::with_capacity(spec.n_values.len());
    for &n in &spec.n_values {
        let array = spec.array(n)?;
        let pair = spec.state.build(n, scheme)?;
        let report = rate_pair_sum(&pair, &spec.kernel, &array, scheme)?;
        let gamma = report.gamma;
        // spot-check the closed form where it applies
        if spec.state == StateSpec::Alternating {
            if let SpatialKernel::Exponential { xi } = spec.kernel {
                let closed = rate_eq11_closed(
                    n,
                    xi,
                    array.spacing(),
                    scheme.epsilon_delta,
                    scheme.gamma0,
                )?;
                let scale = gamma.abs().max(1e-12);
                if (gamma - closed).abs() / scale > 1e-9 {
                    return Err(Error::InvalidSweep(format!(
                        "pair-sum and closed-form rates disagree at n={n}: {gamma} vs {closed}"
                    )));
                }
            }
        }
        if gamma <= 0.0 {
            return Err(Error::InvalidSweep(format!(
                "state is decoherence-free at n={n}; uncertainty columns are undefined"
            )));
        }
        let r = match relative_resolution(n, gamma, gamma_pair)? {
            RelativeResolution::Value(v) => v,
            RelativeResolution::DarkState => {
                return Err(Error::InvalidSweep("dark pair baseline".into()))
            }
        };
        rows.push(SweepRow {
            n,
            gamma,
            gamma_asymptote: asymptote_for(spec, n, gamma)?,
            delta_omega: optimized_uncertainty(n, gamma, spec.t_total)?,
            delta_omega_pair: pair_baseline(n, gamma_pair, spec.t_total)?,
            r,
            t_opt: optimal_time(n, omega0, gamma)?.t_opt,
        });
    }
    Ok(rows)
}

/// Fixed-density scaling sweep (constant spacing `d`, array grows).
pub fn run_fixed_density(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    match spec.mode {
        SweepMode::FixedDensity { .. } => run_sweep(spec),
        _ => Err(Error::InvalidSweep("spec mode is not fixed-density".into())),
    }
}

/// Fixed-length scaling sweep (constant length `L`, density grows).
pub fn run_fixed_length(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    match spec.mode {
        SweepMode::FixedLength { .. } => run_sweep(spec),
        _ => Err(Error::InvalidSweep("spec mode is not fixed-length".into())),
    }
}

/// Output format for emitted tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

const SWEEP_COLUMNS: [&str; 7] = [
    "n",
    "gamma",
    "gamma_asymptote",
    "delta_omega",
    "delta_omega_pair",
    "r",
    "t_opt",
];

/// Renders a sweep table; deterministic byte output for identical
/// inputs. CSV carries the full spec in `#` header comments; rates are
/// in units of `gamma0*eps_delta^2` when the scheme uses the defaults.
pub fn render(rows: &[SweepRow], spec_desc: &str, format: OutputFormat) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::InvalidSweep("refusing to emit an empty table".into()));
    }
    let mut out = String::new();
    match format {
        OutputFormat::Csv => {
            writeln!(out, "# corrdeph sweep").unwrap();
            writeln!(out, "# {spec_desc}").unwrap();
            writeln!(
                out,
                "# rates in units of gamma0*eps_delta^2, times in 1/(gamma0*eps_delta^2)"
            )
            .unwrap();
            writeln!(out, "{}", SWEEP_COLUMNS.join(",")).unwrap();
            for row in rows {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    row.n,
                    row.gamma,
                    row.gamma_asymptote,
                    row.delta_omega,
                    row.delta_omega_pair,
                    row.r,
                    row.t_opt
                )
                .unwrap();
            }
        }
        OutputFormat::Json => {
            #[derive(Serialize)]
            struct Table<'a> {
                spec: &'a str,
                units: &'a str,
                rows: &'a [SweepRow],
            }
            out = serde_json::to_string_pretty(&Table {
                spec: spec_desc,
                units: "rates in gamma0*eps_delta^2, times in 1/(gamma0*eps_delta^2)",
                rows,
            })
            .expect("sweep rows serialize");
            out.push('\n');
        }
    }
    Ok(out)
}

/// Writes a rendered table to `path`.
pub fn emit(rows: &[SweepRow], spec_desc: &str, format: OutputFormat, path: &Path) -> Result<()> {
    let content = render(rows, spec_desc, format)?;
    std::fs::write(path, content).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Which validation cells to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValidationGrid {
    /// Alternating qutrit states, n in {2,4,6}, four kernels, plus the
    /// analytic GHZ exponent fits and a fine-step parity check.
    Default,
    /// Default plus GHZ qubit simulation cells with cosine-kernel dark
    /// arrangements.
    Extended,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationCell {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub cells: Vec<ValidationCell>,
    pub passed: bool,
}

fn push_cell(cells: &mut Vec<ValidationCell>, name: String, passed: bool, detail: String) {
    cells.push(ValidationCell { name, passed, detail });
}

/// Time grid sized so that `step * |generator| <= headroom`.
fn grid_for(norm: f64, t_max: f64, headroom: f64, min_steps: usize) -> Vec<f64> {
    let steps = ((t_max * norm / headroom).ceil() as usize).max(min_steps);
    time_grid(t_max, steps)
}

/// Runs the full analytic-vs-simulation campaign. Failures are report
/// content, not errors.
pub fn run_validation(grid: ValidationGrid) -> ValidationReport {
    let mut cells = Vec::new();
    // beta drops out of every tracked coherence; keeping it zero makes
    // the simulated phases slower and the grids shorter
    let scheme = LevelScheme {
        beta: 0.0,
        ..LevelScheme::default()
    };
    let kernels = [
        SpatialKernel::Uncorrelated,
        SpatialKernel::Exponential { xi: 1.0 },
        SpatialKernel::Exponential { xi: 10.0 },
        SpatialKernel::Constant,
    ];

    for n in [2usize, 4, 6] {
        for kernel in kernels {
            let name = format!("alt n={n} kernel={kernel}");
            let array = IonArray::fixed_density(n, 1.0).expect("valid array");
            let pair = make_alternating_state(n, &scheme).expect("even n");

            let matrix = kernel_matrix(&kernel, &array).expect("valid kernel");
            let psd = matrix.psd_check(DEFAULT_PSD_TOL);
            push_cell(
                &mut cells,
                format!("{name} psd"),
                psd.admissible,
                format!("min eigenvalue {:e}", psd.min_eigenvalue),
            );

            let analytic = rate_pair_sum(&pair, &kernel, &array, &scheme)
                .expect("admissible kernel")
                .gamma;
            let eq10 = rate_eq10(n, &kernel, &array, scheme.epsilon_delta, scheme.gamma0)
                .expect("even n");
            let scale = analytic.abs().max(1e-12);
            let mut routes_ok = (analytic - eq10).abs() / scale < 1e-9;
            let mut routes_detail = format!("pair-sum {analytic:e}, finite sum {eq10:e}");
            if let SpatialKernel::Exponential { xi } = kernel {
                let closed = rate_eq11_closed(n, xi, 1.0, scheme.epsilon_delta, scheme.gamma0)
                    .expect("even n");
                routes_ok &= (analytic - closed).abs() / scale < 1e-9;
                write!(routes_detail, ", closed form {closed:e}").unwrap();
            }
            push_cell(&mut cells, format!("{name} routes"), routes_ok, routes_detail);

            let model = build_model(&array, &scheme, &kernel, &qutrit_levels(&scheme))
                .expect("within dimension cap");
            let (a, b) = model.pair_indices(&pair).expect("pair in basis");
            let rho0 = DensityMatrix::pure_superposition(model.dim, a, b);
            let norm = model.generator_norm_estimate();
            let dark = analytic == 0.0;
            // ~30% decay: plenty for the log-linear fit, cheap at D=729
            let t_max = if dark { 3.0 } else { 0.35 / analytic };
            let grid = grid_for(norm, t_max, 0.8 * MAX_STEP_NORM, 200);
            let traj = evolve_numeric(&model, &rho0, &grid, &pair).expect("step check sized");
            let fit = fit_decay_rate(&traj).expect("enough samples");
            if dark {
                let ok = fit.status == FitStatus::Dark && fit.gamma.abs() < 1e-10;
                push_cell(
                    &mut cells,
                    format!("{name} dark"),
                    ok,
                    format!("fitted rate {:e}, status {:?}", fit.gamma, fit.status),
                );
            } else {
                let rate_ok = (fit.gamma - analytic).abs() / analytic < 1e-3;
                let omega = pair
                    .left
                    .iter()
                    .zip(&pair.right)
                    .map(|(l, r)| scheme.alpha * (l * l - r * r))
                    .sum::<f64>();
                let omega_ok = (fit.omega - omega).abs() / omega.abs().max(1e-12) < 1e-3;
                push_cell(
                    &mut cells,
                    format!("{name} simulation fit"),
                    rate_ok && omega_ok,
                    format!(
                        "fitted {:e} vs analytic {analytic:e}; omega {:e} vs {omega:e}",
                        fit.gamma, fit.omega
                    ),
                );
            }
        }
    }

    // parity closed form vs state-derived probabilities on a fine grid
    {
        let n = 4;
        let kernel = SpatialKernel::Exponential { xi: 10.0 };
        let array = IonArray::fixed_density(n, 1.0).expect("valid array");
        let pair = make_alternating_state(n, &scheme).expect("even n");
        let analytic = rate_pair_sum(&pair, &kernel, &array, &scheme)
            .expect("admissible")
            .gamma;
        let model = build_model(&array, &scheme, &kernel, &qutrit_levels(&scheme))
            .expect("within cap");
        let (a, b) = model.pair_indices(&pair).expect("pair in basis");
        let rho0 = DensityMatrix::pure_superposition(model.dim, a, b);
        let omega = n as f64 * scheme.omega0();
        let grid = grid_for(model.generator_norm_estimate(), 2.0, 0.01, 2000);
        let traj = evolve_numeric(&model, &rho0, &grid, &pair).expect("fine grid");
        let mut max_err = 0.0_f64;
        let mut max_leak = 0.0_f64;
        for (i, &t) in traj.times.iter().enumerate() {
            let closed = 0.5 * (1.0 + (omega * t).cos() * (-analytic * t).exp());
            max_err = max_err.max((traj.p1[i] - closed).abs());
            max_leak = max_leak.max(traj.leakage[i].abs());
        }
        push_cell(
            &mut cells,
            "parity closed form n=4 exp:xi=10".into(),
            max_err < 1e-8 && max_leak < 1e-10,
            format!("max |p1 - closed| {max_err:e}, max leakage {max_leak:e}"),
        );
    }

    // GHZ scaling exponents from the analytic rates
    {
        let ns: Vec<usize> = (2..=64).step_by(2).collect();
        let xs: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
        for (kernel, expect) in [
            (SpatialKernel::Uncorrelated, 1.0),
            (SpatialKernel::Constant, 2.0),
        ] {
            let rates: Vec<f64> = ns
                .iter()
                .map(|&n| {
                    let array = IonArray::fixed_density(n, 1.0).expect("valid array");
                    rate_ghz(n, &kernel, &array, scheme.gamma0).expect("valid")
                })
                .collect();
            let slope = log_log_slope(&xs, &rates);
            push_cell(
                &mut cells,
                format!("ghz exponent kernel={kernel}"),
                (slope - expect).abs() < 1e-6,
                format!("fitted exponent {slope}"),
            );
        }
    }

    if grid == ValidationGrid::Extended {
        let qubits = crate::lindblad::qubit_levels();
        let k = 1.0;
        let ghz_cases: Vec<(String, SpatialKernel, f64)> = vec![
            ("uncorr".into(), SpatialKernel::Uncorrelated, 1.0),
            ("const".into(), SpatialKernel::Constant, 1.0),
            ("cos arrangement A".into(), SpatialKernel::Cosine { k }, std::f64::consts::PI / k),
        ];
        for n in [2usize, 4, 6] {
            for (label, kernel, d) in &ghz_cases {
                let name = format!("ghz n={n} {label}");
                let array = IonArray::fixed_density(n, *d).expect("valid array");
                let pair = crate::states::make_ghz_state(n).expect("n >= 1");
                let analytic = rate_ghz(n, kernel, &array, scheme.gamma0).expect("valid");
                let from_pair_sum = rate_pair_sum(&pair, kernel, &array, &scheme)
                    .expect("admissible")
                    .gamma;
                push_cell(
                    &mut cells,
                    format!("{name} routes"),
                    (analytic - from_pair_sum).abs() < 1e-9 * analytic.abs().max(1.0),
                    format!("ghz rate {analytic:e}, pair sum {from_pair_sum:e}"),
                );
                let model =
                    build_model(&array, &scheme, kernel, &qubits).expect("within cap");
                let (a, b) = model.pair_indices(&pair).expect("pair in basis");
                let rho0 = DensityMatrix::pure_superposition(model.dim, a, b);
                let dark = analytic < 1e-12;
                let t_max = if dark { 3.0 } else { 0.35 / analytic };
                let grid = grid_for(model.generator_norm_estimate(), t_max, 0.8 * MAX_STEP_NORM, 200);
                let traj = evolve_numeric(&model, &rho0, &grid, &pair).expect("sized grid");
                let fit = fit_decay_rate(&traj).expect("enough samples");
                let (ok, detail) = if dark {
                    (
                        fit.status == FitStatus::Dark && fit.gamma.abs() < 1e-10,
                        format!("fitted rate {:e}, status {:?}", fit.gamma, fit.status),
                    )
                } else {
                    (
                        (fit.gamma - analytic).abs() / analytic < 1e-3,
                        format!("fitted {:e} vs analytic {analytic:e}", fit.gamma),
                    )
                };
                push_cell(&mut cells, format!("{name} simulation fit"), ok, detail);
            }
            // arrangement B: array length matched to one oscillation
            let name = format!("ghz n={n} cos arrangement B");
            let d = 2.0 * std::f64::consts::PI / (k * n as f64);
            let array = IonArray::fixed_density(n, d).expect("valid array");
            let analytic = rate_ghz(n, &SpatialKernel::Cosine { k }, &array, scheme.gamma0)
                .expect("valid");
            let bound = 1e-12 * 2.0 * scheme.gamma0 * (n * n) as f64;
            push_cell(
                &mut cells,
                name,
                analytic.abs() <= bound,
                format!("rate {analytic:e} vs bound {bound:e}"),
            );
        }
    }

    let passed = cells.iter().all(|c| c.passed);
    ValidationReport { cells, passed }
}
