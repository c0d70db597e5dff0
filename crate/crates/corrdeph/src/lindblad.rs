//! Dense master-equation simulation in explicit Lindblad form.
//!
//! The kernel matrix `C = U diag(eta) U^T` is diagonalized into jump
//! operators `L_a = sum_j u_{ja} J_z^{(j)}` with rates `gamma0 eta_a`.
//! Every operator is diagonal in the product basis, so an exact
//! per-element solution exists; the fixed-step integrator is kept as an
//! independent oracle and for arbitrary initial states.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::kernels::{kernel_matrix, SpatialKernel, DEFAULT_PSD_TOL};
use crate::states::{CoherencePair, IonArray, LevelScheme};
use crate::{Error, Result};

/// Default Hilbert-space dimension cap (six qutrits).
pub const DEFAULT_DIM_CAP: usize = 729;

/// Maximum allowed `step * |generator|` for the fixed-step integrator.
pub const MAX_STEP_NORM: f64 = 0.1;

/// One collective jump operator `L = sum_j coeffs[j] J_z^{(j)}`, stored
/// as its diagonal over the product basis, with rate `gamma0 * eta`.
#[derive(Debug, Clone)]
pub struct JumpOp {
    pub eta: f64,
    pub coeffs: Vec<f64>,
    pub diag: Vec<f64>,
}

/// Diagonal Lindblad model on `n` sites with `levels.len()` sublevels
/// per site.
#[derive(Debug, Clone)]
pub struct LindbladModel {
    pub n_sites: usize,
    pub levels: Vec<f64>,
    pub dim: usize,
    pub hamiltonian_diag: Vec<f64>,
    pub jump_ops: Vec<JumpOp>,
    pub kernel_entries: DMatrix<f64>,
    pub gamma0: f64,
}

/// Site eigenvalues of product-basis state `index` (site 0 is the most
/// significant digit).
fn basis_digits(index: usize, n_sites: usize, n_levels: usize) -> Vec<usize> {
    let mut digits = vec![0; n_sites];
    let mut rem = index;
    for j in (0..n_sites).rev() {
        digits[j] = rem % n_levels;
        rem /= n_levels;
    }
    digits
}

impl LindbladModel {
    /// Product-basis index of a string of per-site eigenvalues.
    pub fn basis_index(&self, string: &[f64]) -> Result<usize> {
        if string.len() != self.n_sites {
            return Err(Error::LengthMismatch {
                pair: string.len(),
                array: self.n_sites,
            });
        }
        let mut index = 0;
        for &m in string {
            let digit = self
                .levels
                .iter()
                .position(|&l| (l - m).abs() < 1e-9)
                .ok_or_else(|| {
                    Error::InvalidState(format!("eigenvalue {m} is not in the level list"))
                })?;
            index = index * self.levels.len() + digit;
        }
        Ok(index)
    }

    /// Indices of the two basis strings of a coherence pair.
    pub fn pair_indices(&self, pair: &CoherencePair) -> Result<(usize, usize)> {
        Ok((self.basis_index(&pair.left)?, self.basis_index(&pair.right)?))
    }

    /// Exact decay rate of the element `(a, b)` under this generator:
    /// `1/2 sum_alpha rate_alpha (l_alpha[a] - l_alpha[b])^2`.
    pub fn element_decay_rate(&self, a: usize, b: usize) -> f64 {
        0.5 * self.gamma0
            * self
                .jump_ops
                .iter()
                .map(|op| {
                    let dl = op.diag[a] - op.diag[b];
                    op.eta * dl * dl
                })
                .sum::<f64>()
    }

    /// Coherent phase rate of the element `(a, b)`.
    pub fn element_frequency(&self, a: usize, b: usize) -> f64 {
        self.hamiltonian_diag[a] - self.hamiltonian_diag[b]
    }

    /// Per-element action of the full generator. All operators are
    /// diagonal in the product basis, so the commutator and the
    /// dissipator act elementwise:
    /// `d rho_ij/dt = G_ij rho_ij` with
    /// `G_ij = -i (h_i - h_j)
    ///         + gamma0 sum_a eta_a (l_i l_j - l_i^2/2 - l_j^2/2)`.
    pub fn element_factor_matrix(&self) -> DMatrix<Complex64> {
        let dim = self.dim;
        let mut g = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                let mut diss = 0.0;
                for op in &self.jump_ops {
                    let (li, lj) = (op.diag[i], op.diag[j]);
                    diss += op.eta * (li * lj - 0.5 * li * li - 0.5 * lj * lj);
                }
                g[(i, j)] = Complex64::new(
                    self.gamma0 * diss,
                    -(self.hamiltonian_diag[i] - self.hamiltonian_diag[j]),
                );
            }
        }
        g
    }

    /// Spectral norm of the (elementwise diagonal) generator.
    pub fn generator_norm_estimate(&self) -> f64 {
        self.element_factor_matrix()
            .iter()
            .fold(0.0_f64, |m, z| m.max(z.norm()))
    }
}

/// Builds the diagonal Lindblad model for an array, level scheme, and
/// admissible kernel. `levels` is the per-site `J_z` eigenvalue list.
pub fn build_model(
    array: &IonArray,
    scheme: &LevelScheme,
    kernel: &SpatialKernel,
    levels: &[f64],
) -> Result<LindbladModel> {
    build_model_with_cap(array, scheme, kernel, levels, DEFAULT_DIM_CAP)
}

/// As [`build_model`] with a configurable dimension cap.
pub fn build_model_with_cap(
    array: &IonArray,
    scheme: &LevelScheme,
    kernel: &SpatialKernel,
    levels: &[f64],
    dim_cap: usize,
) -> Result<LindbladModel> {
    if levels.is_empty() {
        return Err(Error::InvalidState("level list must be nonempty".into()));
    }
    let n = array.n;
    let n_levels = levels.len();
    let dim = match n_levels.checked_pow(n as u32) {
        Some(d) if d <= dim_cap => d,
        Some(d) => return Err(Error::DimensionCap { dim: d, cap: dim_cap }),
        None => return Err(Error::DimensionCap { dim: usize::MAX, cap: dim_cap }),
    };

    let matrix = kernel_matrix(kernel, array)?;
    let (etas, vectors) = matrix.clipped_eigendecomposition(DEFAULT_PSD_TOL)?;

    let mut hamiltonian_diag = vec![0.0; dim];
    let mut site_values: Vec<Vec<f64>> = vec![Vec::with_capacity(n); dim];
    for (i, h) in hamiltonian_diag.iter_mut().enumerate() {
        let digits = basis_digits(i, n, n_levels);
        let values: Vec<f64> = digits.iter().map(|&d| levels[d]).collect();
        *h = values
            .iter()
            .map(|&m| scheme.beta * m + scheme.alpha * m * m)
            .sum();
        site_values[i] = values;
    }

    let mut jump_ops = Vec::new();
    for (alpha, &eta) in etas.iter().enumerate() {
        if eta <= 0.0 {
            continue;
        }
        let coeffs: Vec<f64> = (0..n).map(|j| vectors[(j, alpha)]).collect();
        let diag: Vec<f64> = site_values
            .iter()
            .map(|values| values.iter().zip(&coeffs).map(|(m, u)| m * u).sum())
            .collect();
        jump_ops.push(JumpOp { eta, coeffs, diag });
    }

    Ok(LindbladModel {
        n_sites: n,
        levels: levels.to_vec(),
        dim,
        hamiltonian_diag,
        jump_ops,
        kernel_entries: matrix.entries,
        gamma0: scheme.gamma0,
    })
}

/// Qutrit level list `(e+, e0, e-)` of a scheme.
pub fn qutrit_levels(scheme: &LevelScheme) -> Vec<f64> {
    vec![scheme.eps_plus(), scheme.epsilon0, scheme.eps_minus()]
}

/// Qubit sigma_z eigenvalues.
pub fn qubit_levels() -> Vec<f64> {
    vec![1.0, -1.0]
}

/// Dense system density matrix in the product basis.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    pub matrix: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Pure equal superposition `(|a> + |b>)/sqrt(2)` as a projector.
    pub fn pure_superposition(dim: usize, a: usize, b: usize) -> Self {
        let half = Complex64::new(0.5, 0.0);
        let mut matrix = DMatrix::zeros(dim, dim);
        matrix[(a, a)] = half;
        matrix[(a, b)] = half;
        matrix[(b, a)] = half;
        matrix[(b, b)] = half;
        DensityMatrix { matrix }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let w = Complex64::new(1.0 / dim as f64, 0.0);
        DensityMatrix {
            matrix: DMatrix::from_diagonal_element(dim, dim, w),
        }
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.diagonal().iter().sum()
    }

    /// Hermiticity, unit trace, positivity within the standard
    /// tolerances.
    pub fn validate(&self) -> Result<()> {
        let m = &self.matrix;
        let herm_err = (m - m.adjoint())
            .iter()
            .fold(0.0_f64, |acc, z| acc.max(z.norm()));
        if herm_err > 1e-12 {
            return Err(Error::InvalidState(format!(
                "density matrix not Hermitian: deviation {herm_err:e}"
            )));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > 1e-12 || tr.im.abs() > 1e-12 {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let herm = (m + m.adjoint()).scale(0.5);
        let eigs = herm.map(|z| z.re).symmetric_eigenvalues();
        let min = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < -1e-10 {
            return Err(Error::InvalidState(format!(
                "density matrix not positive: min eigenvalue {min:e}"
            )));
        }
        Ok(())
    }
}

/// Sampled evolution of a tracked coherence.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    #[serde(skip)]
    pub coherence: Vec<Complex64>,
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
    pub leakage: Vec<f64>,
    pub trace_err: Vec<f64>,
}

/// Exact solution for the tracked element of a diagonal model:
/// `c0 * exp(-i omega t - Gamma t)` with no discretization error.
pub fn evolve_exact_diagonal(
    model: &LindbladModel,
    pair: &CoherencePair,
    c0: Complex64,
    t: f64,
) -> Result<Complex64> {
    let (a, b) = model.pair_indices(pair)?;
    let omega = model.element_frequency(a, b);
    let gamma = model.element_decay_rate(a, b);
    Ok(c0 * (Complex64::new(-gamma * t, -omega * t)).exp())
}

/// One fixed-step fourth-order update of the elementwise equation
/// `drho_m/dt = g_m rho_m`, fused per element to avoid temporaries.
fn rk4_step(rho: &mut [Complex64], factor: &[Complex64], h: f64) {
    for (y, &g) in rho.iter_mut().zip(factor) {
        let k1 = g * *y;
        let k2 = g * (*y + k1 * (h / 2.0));
        let k3 = g * (*y + k2 * (h / 2.0));
        let k4 = g * (*y + k3 * h);
        *y += (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0);
    }
}

fn symmetrize(rho: &mut DMatrix<Complex64>) {
    let dim = rho.nrows();
    for j in 0..dim {
        for i in 0..j {
            let avg = 0.5 * (rho[(i, j)] + rho[(j, i)].conj());
            rho[(i, j)] = avg;
            rho[(j, i)] = avg.conj();
        }
        rho[(j, j)] = Complex64::new(rho[(j, j)].re, 0.0);
    }
}

/// Fixed-step fourth-order integration of the master equation over an
/// ascending time grid; `rho0` is the state at `t_grid[0]`. The tracked
/// pair supplies the coherence and parity columns.
pub fn evolve_numeric(
    model: &LindbladModel,
    rho0: &DensityMatrix,
    t_grid: &[f64],
    pair: &CoherencePair,
) -> Result<Trajectory> {
    if t_grid.len() < 2 {
        return Err(Error::InvalidState("time grid needs at least two points".into()));
    }
    let mut max_step = 0.0_f64;
    for w in t_grid.windows(2) {
        let h = w[1] - w[0];
        if h <= 0.0 {
            return Err(Error::InvalidState("time grid must be strictly ascending".into()));
        }
        max_step = max_step.max(h);
    }
    let factor = model.element_factor_matrix();
    let norm = factor.iter().fold(0.0_f64, |m, z| m.max(z.norm()));
    if max_step * norm > MAX_STEP_NORM {
        return Err(Error::StepTooCoarse(max_step * norm));
    }
    let (a, b) = model.pair_indices(pair)?;

    let mut rho = rho0.matrix.clone();
    let mut traj = Trajectory {
        times: Vec::with_capacity(t_grid.len()),
        coherence: Vec::with_capacity(t_grid.len()),
        p1: Vec::with_capacity(t_grid.len()),
        p2: Vec::with_capacity(t_grid.len()),
        leakage: Vec::with_capacity(t_grid.len()),
        trace_err: Vec::with_capacity(t_grid.len()),
    };
    let record = |traj: &mut Trajectory, t: f64, rho: &DMatrix<Complex64>| {
        let probs = parity_from_matrix(rho, a, b);
        traj.times.push(t);
        traj.coherence.push(rho[(a, b)]);
        traj.p1.push(probs.p1);
        traj.p2.push(probs.p2);
        traj.leakage.push(probs.leakage);
        let tr: Complex64 = rho.diagonal().iter().sum();
        traj.trace_err.push((tr - Complex64::new(1.0, 0.0)).norm());
    };
    record(&mut traj, t_grid[0], &rho);

    // the factor matrix is conjugate-symmetric, so the elementwise
    // update keeps conjugate pairs exact to rounding; the periodic
    // symmetrization is cheap hygiene rather than a correction
    for (step, w) in t_grid.windows(2).enumerate() {
        let h = w[1] - w[0];
        rk4_step(rho.as_mut_slice(), factor.as_slice(), h);
        if step % 32 == 31 {
            symmetrize(&mut rho);
        }
        record(&mut traj, w[1], &rho);
    }
    Ok(traj)
}

/// Parity-measurement outcome probabilities for the operator
/// `|a><b| + h.c.`, plus population leakage out of the pair subspace.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ParityProbs {
    pub p1: f64,
    pub p2: f64,
    pub leakage: f64,
}

fn parity_from_matrix(rho: &DMatrix<Complex64>, a: usize, b: usize) -> ParityProbs {
    let pop = rho[(a, a)].re + rho[(b, b)].re;
    let re = rho[(a, b)].re;
    ParityProbs {
        p1: pop / 2.0 + re,
        p2: pop / 2.0 - re,
        leakage: 1.0 - pop,
    }
}

/// Parity probabilities of a state with respect to a coherence pair.
pub fn parity_probabilities_from_state(
    model: &LindbladModel,
    rho: &DensityMatrix,
    pair: &CoherencePair,
) -> Result<ParityProbs> {
    let (a, b) = model.pair_indices(pair)?;
    Ok(parity_from_matrix(&rho.matrix, a, b))
}

/// Outcome of a decay-rate fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FitStatus {
    Ok,
    /// Coherence magnitude did not change: decoherence-free element.
    Dark,
    /// Less than 20% decay over the window and not dark.
    UnderDetermined,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DecayFit {
    pub gamma: f64,
    pub omega: f64,
    pub r2_log: f64,
    pub r2_phase: f64,
    pub status: FitStatus,
}

fn linear_regression(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, intercept, r2)
}

/// Log-linear fit of the coherence magnitude (slope -> decay rate) and
/// linear fit of the unwrapped phase (slope -> frequency).
pub fn fit_decay_rate(traj: &Trajectory) -> Result<DecayFit> {
    if traj.times.len() < 10 {
        return Err(Error::InvalidState(format!(
            "decay fit needs at least 10 samples, got {}",
            traj.times.len()
        )));
    }
    let mags: Vec<f64> = traj.coherence.iter().map(|c| c.norm()).collect();
    let m0 = mags[0];
    if m0 <= 0.0 {
        return Err(Error::InvalidState("initial coherence is zero".into()));
    }
    let min_mag = mags.iter().cloned().fold(f64::INFINITY, f64::min);
    let dark = (m0 - min_mag) / m0 < 1e-8;

    let logs: Vec<f64> = mags.iter().map(|m| m.max(1e-300).ln()).collect();
    let (slope_log, _, r2_log) = linear_regression(&traj.times, &logs);

    let mut phases = Vec::with_capacity(traj.coherence.len());
    let mut prev = traj.coherence[0].arg();
    phases.push(prev);
    for c in &traj.coherence[1..] {
        let mut theta = c.arg();
        while theta - prev > std::f64::consts::PI {
            theta -= 2.0 * std::f64::consts::PI;
        }
        while theta - prev < -std::f64::consts::PI {
            theta += 2.0 * std::f64::consts::PI;
        }
        phases.push(theta);
        prev = theta;
    }
    let (slope_phase, _, r2_phase) = linear_regression(&traj.times, &phases);

    let decayed = mags.last().unwrap() / m0 <= 0.8;
    let status = if dark {
        FitStatus::Dark
    } else if decayed {
        FitStatus::Ok
    } else {
        FitStatus::UnderDetermined
    };
    Ok(DecayFit {
        gamma: -slope_log,
        omega: -slope_phase,
        r2_log,
        r2_phase,
        status,
    })
}

/// Uniform grid of `steps + 1` points on `[0, t_max]`.
pub fn time_grid(t_max: f64, steps: usize) -> Vec<f64> {
    (0..=steps).map(|i| t_max * i as f64 / steps as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rates::rate_pair_sum;
    use crate::states::make_alternating_state;

    fn scheme() -> LevelScheme {
        LevelScheme::default()
    }

    #[test]
    fn single_site_model() {
        let array = IonArray::fixed_density(1, 1.0).unwrap();
        let model = build_model(
            &array,
            &scheme(),
            &SpatialKernel::Exponential { xi: 3.0 },
            &qutrit_levels(&scheme()),
        )
        .unwrap();
        assert_eq!(model.jump_ops.len(), 1);
        assert!((model.jump_ops[0].eta - 1.0).abs() < 1e-12);
        assert!((model.jump_ops[0].coeffs[0].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_kernel_collapses_to_collective_operator() {
        let array = IonArray::fixed_density(2, 1.0).unwrap();
        let model = build_model(
            &array,
            &scheme(),
            &SpatialKernel::Constant,
            &qutrit_levels(&scheme()),
        )
        .unwrap();
        assert_eq!(model.jump_ops.len(), 1, "single nonzero eigenvalue");
        // the collective operator is proportional to Jz1 + Jz2
        let op = &model.jump_ops[0];
        assert!((op.coeffs[0] - op.coeffs[1]).abs() < 1e-12);
    }

    #[test]
    fn uncorrelated_kernel_gives_site_local_operators() {
        let array = IonArray::fixed_density(3, 1.0).unwrap();
        let model = build_model(
            &array,
            &scheme(),
            &SpatialKernel::Uncorrelated,
            &qutrit_levels(&scheme()),
        )
        .unwrap();
        assert_eq!(model.jump_ops.len(), 3);
        for op in &model.jump_ops {
            assert!((op.eta - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn kernel_reconstruction_invariant() {
        let array = IonArray::fixed_density(4, 1.0).unwrap();
        let kern = SpatialKernel::Exponential { xi: 2.0 };
        let model = build_model(&array, &scheme(), &kern, &qutrit_levels(&scheme())).unwrap();
        for j in 0..4 {
            for k in 0..4 {
                let recon: f64 = model
                    .jump_ops
                    .iter()
                    .map(|op| op.eta * op.coeffs[j] * op.coeffs[k])
                    .sum();
                assert!(
                    (recon - model.kernel_entries[(j, k)]).abs() < 1e-10,
                    "({j},{k})"
                );
            }
        }
    }

    #[test]
    fn dimension_cap_enforced() {
        let array = IonArray::fixed_density(7, 1.0).unwrap();
        let result = build_model(
            &array,
            &scheme(),
            &SpatialKernel::Constant,
            &qutrit_levels(&scheme()),
        );
        assert!(matches!(result, Err(Error::DimensionCap { .. })));
    }

    #[test]
    fn exact_diagonal_matches_pair_sum() {
        let n = 2;
        let array = IonArray::fixed_density(n, 1.0).unwrap();
        let kern = SpatialKernel::Exponential { xi: 1.0 };
        let pair = make_alternating_state(n, &scheme()).unwrap();
        let model = build_model(&array, &scheme(), &kern, &qutrit_levels(&scheme())).unwrap();
        let c0 = Complex64::new(0.5, 0.0);
        // t = 0 leaves the element unchanged
        let c = evolve_exact_diagonal(&model, &pair, c0, 0.0).unwrap();
        assert!((c - c0).norm() < 1e-15);
        // frozen: |c(1)|/|c(0)| = exp(-(1 - 1/e))
        let c = evolve_exact_diagonal(&model, &pair, c0, 1.0).unwrap();
        assert!((c.norm() / 0.5 - 0.531_463_605_386_615_6).abs() < 1e-12);
        // decay rate equals the analytic pair sum
        let (a, b) = model.pair_indices(&pair).unwrap();
        let analytic = rate_pair_sum(&pair, &kern, &array, &scheme()).unwrap().gamma;
        assert!((model.element_decay_rate(a, b) - analytic).abs() < 1e-10);
    }

    #[test]
    fn alternating_state_is_dark_for_constant_kernel() {
        let n = 4;
        let array = IonArray::fixed_density(n, 1.0).unwrap();
        let pair = make_alternating_state(n, &scheme()).unwrap();
        let model =
            build_model(&array, &scheme(), &SpatialKernel::Constant, &qutrit_levels(&scheme()))
                .unwrap();
        let c0 = Complex64::new(0.5, 0.0);
        for t in [0.5, 3.0, 10.0] {
            let c = evolve_exact_diagonal(&model, &pair, c0, t).unwrap();
            assert!((c.norm() - 0.5).abs() < 1e-12, "t={t}");
        }
    }

    #[test]
    fn numeric_matches_exact() {
        for (n, xi) in [(2usize, 1.0), (2, 10.0), (4, 1.0), (4, 10.0)] {
            let array = IonArray::fixed_density(n, 1.0).unwrap();
            let kern = SpatialKernel::Exponential { xi };
            let pair = make_alternating_state(n, &scheme()).unwrap();
            let model = build_model(&array, &scheme(), &kern, &qutrit_levels(&scheme())).unwrap();
            let (a, b) = model.pair_indices(&pair).unwrap();
            let gamma = model.element_decay_rate(a, b);
            let t_max = 3.0 / gamma.max(0.3);
            let steps = ((t_max * model.generator_norm_estimate() / MAX_STEP_NORM).ceil()
                as usize)
                .max(50);
            let rho0 = DensityMatrix::pure_superposition(model.dim, a, b);
            let traj = evolve_numeric(&model, &rho0, &time_grid(t_max, steps), &pair).unwrap();
            for (i, &t) in traj.times.iter().enumerate() {
                let exact =
                    evolve_exact_diagonal(&model, &pair, Complex64::new(0.5, 0.0), t).unwrap();
                let err = (traj.coherence[i] - exact).norm() / exact.norm();
                assert!(err < 1e-6, "n={n} xi={xi} t={t} err={err:e}");
            }
        }
    }

    #[test]
    fn zero_coupling_preserves_magnitude_and_phase() {
        let n = 2;
        let mut sch = scheme();
        sch.gamma0 = 0.0;
        let array = IonArray::fixed_density(n, 1.0).unwrap();
        let pair = make_alternating_state(n, &sch).unwrap();
        let model =
            build_model(&array, &sch, &SpatialKernel::Exponential { xi: 1.0 }, &qutrit_levels(&sch))
                .unwrap();
        let (a, b) = model.pair_indices(&pair).unwrap();
        let rho0 = DensityMatrix::pure_superposition(model.dim, a, b);
        let traj = evolve_numeric(&model, &rho0, &time_grid(2.0, 400), &pair).unwrap();
        let fit = fit_decay_rate(&traj).unwrap();
        assert_eq!(fit.status, FitStatus::Dark);
        assert!(fit.gamma.abs() < 1e-9);
        let omega = model.element_frequency(a, b);
        assert!((fit.omega - omega).abs() < 1e-6);
    }

    #[test]
    fn maximally_mixed_is_stationary() {
        let n = 2;
        let array = IonArray::fixed_density(n, 1.0).unwrap();
        let pair = make_alternating_state(n, &scheme()).unwrap();
        let model =
            build_model(&array, &scheme(), &SpatialKernel::Exponential { xi: 1.0 }, &qutrit_levels(&scheme()))
                .unwrap();
        let rho0 = DensityMatrix::maximally_mixed(model.dim);
        let traj = evolve_numeric(&model, &rho0, &time_grid(1.0, 200), &pair).unwrap();
        assert!(traj.trace_err.iter().all(|&e| e < 1e-12));
        // all-diagonal states are fixed points of pure dephasing
        assert!(traj.p1.iter().zip(&traj.p2).all(|(&p1, &p2)| {
            (p1 - 2.0 / 9.0 / 2.0).abs() < 1e-12 && (p1 - p2).abs() < 1e-12
        }));
    }

    #[test]
    fn coarse_grid_rejected() {
        let n = 4;
        let array = IonArray::fixed_density(n, 1.0).unwrap();
        let pair = make_alternating_state(n, &scheme()).unwrap();
        let model =
            build_model(&array, &scheme(), &SpatialKernel::Uncorrelated, &qutrit_levels(&scheme()))
                .unwrap();
        let (a, b) = model.pair_indices(&pair).unwrap();
        let rho0 = DensityMatrix::pure_superposition(model.dim, a, b);
        let result = evolve_numeric(&model, &rho0, &[0.0, 1.0], &pair);
        assert!(matches!(result, Err(Error::StepTooCoarse(_))));
    }

    #[test]
    fn fit_recovers_synthetic_exponential() {
        let times: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
        let coherence: Vec<Complex64> = times
            .iter()
            .map(|&t| (Complex64::new(-0.5 * t, -2.0 * t)).exp())
            .collect();
        let m = times.len();
        let traj = Trajectory {
            times,
            coherence,
            p1: vec![0.0; m],
            p2: vec![0.0; m],
            leakage: vec![0.0; m],
            trace_err: vec![0.0; m],
        };
        let fit = fit_decay_rate(&traj).unwrap();
        assert_eq!(fit.status, FitStatus::Ok);
        assert!((fit.gamma - 0.5).abs() < 1e-9);
        assert!((fit.omega - 2.0).abs() < 1e-9);
        assert!(fit.r2_log > 1.0 - 1e-12);
    }

    #[test]
    fn parity_probabilities() {
        let n = 2;
        let array = IonArray::fixed_density(n, 1.0).unwrap();
        let pair = make_alternating_state(n, &scheme()).unwrap();
        let model =
            build_model(&array, &scheme(), &SpatialKernel::Constant, &qutrit_levels(&scheme()))
                .unwrap();
        let (a, b) = model.pair_indices(&pair).unwrap();
        let rho = DensityMatrix::pure_superposition(model.dim, a, b);
        let probs = parity_probabilities_from_state(&model, &rho, &pair).unwrap();
        assert!((probs.p1 - 1.0).abs() < 1e-12);
        assert!(probs.p2.abs() < 1e-12);
        assert!(probs.leakage.abs() < 1e-12);
        // fully dephased: zero off-diagonal, equal populations
        let mut dephased = rho.clone();
        dephased.matrix[(a, b)] = Complex64::new(0.0, 0.0);
        dephased.matrix[(b, a)] = Complex64::new(0.0, 0.0);
        let probs = parity_probabilities_from_state(&model, &dephased, &pair).unwrap();
        assert!((probs.p1 - 0.5).abs() < 1e-12);
        assert!((probs.p2 - 0.5).abs() < 1e-12);
    }
}
