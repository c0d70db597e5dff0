//! Analytical dephasing rates.
//!
//! The single source of truth is the quadratic pair-sum
//! `Gamma = (gamma0/2) sum_{j,k} C(0, x_j - x_k) Delta_j Delta_k` over
//! the per-site eigenvalue differences `Delta_j` of the coherence pair.
//! The alternating-state finite sum and the exponential-kernel closed
//! form are validated specializations kept for sweeps and figure data.

use serde::Serialize;

use crate::kernels::{kernel_matrix, SpatialKernel, DEFAULT_PSD_TOL};
use crate::states::{coherent_frequency, CoherencePair, IonArray, LevelScheme};
use crate::{Error, Result};

/// Which formula produced a rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RateMethod {
    PairSum,
    Eq10Sum,
    Eq11Closed,
    SimulationFit,
}

/// Dephasing rate of a tracked coherence together with its coherent
/// phase rate and the method that produced it.
#[derive(Debug, Clone, Serialize)]
pub struct DephasingReport {
    pub gamma: f64,
    pub omega_coh: f64,
    pub method: RateMethod,
    pub n: usize,
    pub kernel: String,
}

/// Unified pair-sum rate for an arbitrary coherence pair.
///
/// Opposite-state pairs (`Delta_j Delta_k < 0`) reduce the rate,
/// same-state pairs increase it, and autocorrelations contribute
/// `(gamma0/2) sum_j Delta_j^2`.
pub fn rate_pair_sum(
    pair: &CoherencePair,
    kernel: &SpatialKernel,
    array: &IonArray,
    scheme: &LevelScheme,
) -> Result<DephasingReport> {
    if pair.n() != array.n {
        return Err(Error::LengthMismatch {
            pair: pair.n(),
            array: array.n,
        });
    }
    let matrix = kernel_matrix(kernel, array)?;
    let check = matrix.psd_check(DEFAULT_PSD_TOL);
    if !check.admissible {
        return Err(Error::InadmissibleKernel {
            min_eigenvalue: check.min_eigenvalue,
        });
    }
    let deltas = pair.deltas();
    let mut quad = 0.0;
    for j in 0..array.n {
        for k in 0..array.n {
            quad += matrix.entries[(j, k)] * deltas[j] * deltas[k];
        }
    }
    Ok(DephasingReport {
        gamma: 0.5 * scheme.gamma0 * quad,
        omega_coh: coherent_frequency(pair, scheme),
        method: RateMethod::PairSum,
        n: array.n,
        kernel: kernel.to_string(),
    })
}

/// Finite-sum rate of the alternating quadrupole state for a general
/// kernel:
/// `gamma0 eps^2 [ n/2 - sum_{x=1}^{n/2} (n-2x+1) C(0,(2x-1)d)
///                      + sum_{x=1}^{n/2} (n-2x)   C(0,2xd) ]`.
pub fn rate_eq10(
    n: usize,
    kernel: &SpatialKernel,
    array: &IonArray,
    epsilon_delta: f64,
    gamma0: f64,
) -> Result<f64> {
    if n == 0 || n % 2 != 0 {
        return Err(Error::OddIonCount(n));
    }
    kernel.validate()?;
    let d = array.spacing();
    let nf = n as f64;
    let mut sum = nf / 2.0;
    for x in 1..=n / 2 {
        let xf = x as f64;
        sum -= (nf - 2.0 * xf + 1.0) * kernel.eval((2.0 * xf - 1.0) * d);
        sum += (nf - 2.0 * xf) * kernel.eval(2.0 * xf * d);
    }
    Ok(gamma0 * epsilon_delta * epsilon_delta * sum)
}

/// Closed-form alternating-state rate for the exponential kernel
/// `C(0,x) = exp(-|x|/xi)`:
/// `gamma0 eps^2 [2 e^a - 2 e^{(1-n)a} - n + n e^{2a}] / (2 (1+e^a)^2)`
/// with `a = d/xi`.
///
/// Evaluated with `e^{2a}` factored out so large `d/xi` cannot
/// overflow; the limit is the uncorrelated rate `n eps^2 gamma0 / 2`.
pub fn rate_eq11_closed(n: usize, xi: f64, d: f64, epsilon_delta: f64, gamma0: f64) -> Result<f64> {
    if n == 0 || n % 2 != 0 {
        return Err(Error::OddIonCount(n));
    }
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(Error::InvalidKernel(format!("xi must be positive, got {xi}")));
    }
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::InvalidArray(format!("spacing d must be positive, got {d}")));
    }
    let a = d / xi;
    let nf = n as f64;
    // numerator and denominator both divided by e^{2a}
    let ema = (-a).exp();
    let num = 2.0 * ema - 2.0 * ((-(1.0 + nf)) * a).exp() - nf * (-2.0 * a).exp() + nf;
    let den = 2.0 * (ema + 1.0) * (ema + 1.0);
    Ok(gamma0 * epsilon_delta * epsilon_delta * num / den)
}

/// GHZ dephasing rate: `2 gamma0 sum_{j,k} C(0, x_j - x_k)` (pair sum
/// with `Delta_j = 2` on every site, sigma_z convention).
pub fn rate_ghz(n: usize, kernel: &SpatialKernel, array: &IonArray, gamma0: f64) -> Result<f64> {
    if n != array.n {
        return Err(Error::LengthMismatch { pair: n, array: array.n });
    }
    kernel.validate()?;
    let positions = array.positions();
    let mut sum = 0.0;
    for j in 0..n {
        for k in 0..n {
            sum += kernel.eval(positions[j] - positions[k]);
        }
    }
    Ok(2.0 * gamma0 * sum)
}

/// Fully-correlated rate for a coherence with excitation difference
/// `n_e` in the qubit convention (`Delta = 2` per flipped site):
/// `2 gamma0 n_e^2`. Zero for `n_e = 0` (decoherence-free subspace);
/// GHZ states have `n_e = n`.
pub fn excitation_rate_law(n_e: usize, gamma0: f64) -> f64 {
    let ne = n_e as f64;
    2.0 * gamma0 * ne * ne
}

/// Large-`n` behavior of the alternating-state rate at fixed ion
/// density.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FixedDensityAsymptote {
    /// Exact per-ion slope `gamma0 eps^2 tanh(d/(2 xi)) / 2`.
    pub exact_slope: f64,
    /// Small-`d/xi` approximation `gamma0 eps^2 d/(4 xi)`.
    pub approx_slope: f64,
}

/// Exact large-`n` slope of the closed-form rate with fixed spacing,
/// plus the `d/(4 xi)` approximation valid for `xi > d`.
pub fn asymptote_fixed_density(
    xi: f64,
    d: f64,
    epsilon_delta: f64,
    gamma0: f64,
) -> Result<FixedDensityAsymptote> {
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(Error::InvalidKernel(format!("xi must be positive, got {xi}")));
    }
    let e2 = gamma0 * epsilon_delta * epsilon_delta;
    Ok(FixedDensityAsymptote {
        exact_slope: e2 * (d / (2.0 * xi)).tanh() / 2.0,
        approx_slope: e2 * d / (4.0 * xi),
    })
}

/// Large-`n` behavior of the alternating-state rate at fixed array
/// length.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FixedLengthAsymptote {
    /// Limiting constant `gamma0 eps^2 (u + 1 - e^{-u}) / 4`, `u = L/xi`.
    pub constant: f64,
    /// Long-correlation-length approximation `gamma0 eps^2 u / 2`.
    pub approx: f64,
}

/// Limiting constant of the closed-form rate when the array length `L`
/// is fixed and the density grows, `u = L/xi`:
/// `gamma0 eps^2 (u + 1 - e^{-u}) / 4`, approximately
/// `gamma0 eps^2 u / 2` for `u << 1`.
pub fn asymptote_fixed_length(
    l_over_xi: f64,
    epsilon_delta: f64,
    gamma0: f64,
) -> Result<FixedLengthAsymptote> {
    let u = l_over_xi;
    if !(u >= 0.0 && u.is_finite()) {
        return Err(Error::InvalidKernel(format!("L/xi must be >= 0, got {u}")));
    }
    let e2 = gamma0 * epsilon_delta * epsilon_delta;
    Ok(FixedLengthAsymptote {
        constant: e2 * (u + 1.0 - (-u).exp()) / 4.0,
        approx: e2 * u / 2.0,
    })
}

/// Least-squares slope of `log y` vs `log x`; used for scaling-exponent
/// fits.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
