//! Frequency-estimation analysis: parity probabilities, classical
//! Fisher information, interrogation-time optimization, and the
//! time-optimized uncertainty together with the pair baseline and the
//! relative resolution.

use serde::Serialize;

use crate::{Error, Result};

/// Parity outcome probabilities of the tracked coherence:
/// `p1 = [1 + cos(n w0 t) exp(-Gamma t)] / 2`, `p2 = 1 - p1`.
pub fn parity_probabilities(n: usize, omega0: f64, gamma: f64, t: f64) -> Result<(f64, f64)> {
    if t < 0.0 || gamma < 0.0 {
        return Err(Error::InvalidMetrology(format!(
            "t and gamma must be nonnegative, got t={t}, gamma={gamma}"
        )));
    }
    let p1 = 0.5 * (1.0 + (n as f64 * omega0 * t).cos() * (-gamma * t).exp());
    Ok((p1.clamp(0.0, 1.0), (1.0 - p1).clamp(0.0, 1.0)))
}

/// Classical Fisher information of the two parity outcomes with respect
/// to `omega0`:
/// `F = (n t)^2 sin^2(n w0 t) e^{-2 G t} / (1 - cos^2(n w0 t) e^{-2 G t})`.
///
/// At the degenerate points `gamma = 0`, `n w0 t = m pi` the analytic
/// limit `(n t)^2` is returned by continuity.
pub fn fisher_information(n: usize, omega0: f64, gamma: f64, t: f64) -> Result<f64> {
    if t < 0.0 || gamma < 0.0 {
        return Err(Error::InvalidMetrology(format!(
            "t and gamma must be nonnegative, got t={t}, gamma={gamma}"
        )));
    }
    let nt = n as f64 * t;
    let theta = nt * omega0;
    let envelope = (-2.0 * gamma * t).exp();
    let denom = 1.0 - theta.cos() * theta.cos() * envelope;
    if denom <= 0.0 {
        // gamma = 0 and cos^2 = 1: continuity limit
        return Ok(nt * nt);
    }
    Ok(nt * nt * theta.sin() * theta.sin() * envelope / denom)
}

/// Interrogation-time choice: the fringe extremum `t = m pi/(2 n w0)`
/// with odd `m` closest to the envelope minimum `1/(2 Gamma)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OptimalTime {
    pub t_opt: f64,
    pub m: u64,
    pub t_envelope: f64,
    /// Set when `gamma = 0`: no envelope minimum exists and `m = 1` is
    /// returned as a placeholder.
    pub noiseless: bool,
}

pub fn optimal_time(n: usize, omega0: f64, gamma: f64) -> Result<OptimalTime> {
    if !(omega0 > 0.0) {
        return Err(Error::InvalidMetrology(format!(
            "omega0 must be positive, got {omega0}"
        )));
    }
    if gamma < 0.0 {
        return Err(Error::InvalidMetrology(format!("gamma must be >= 0, got {gamma}")));
    }
    let spacing = std::f64::consts::PI / (2.0 * n as f64 * omega0);
    if gamma == 0.0 {
        return Ok(OptimalTime {
            t_opt: spacing,
            m: 1,
            t_envelope: f64::INFINITY,
            noiseless: true,
        });
    }
    let t_envelope = 1.0 / (2.0 * gamma);
    let m_real = t_envelope / spacing;
    // candidate odd integers bracketing m_real; ties break toward
    // smaller m
    let below = {
        let f = m_real.floor() as i64;
        if f % 2 == 1 { f } else { f - 1 }
    }
    .max(1) as u64;
    let above = below + 2;
    let m = if (m_real - below as f64).abs() <= (above as f64 - m_real).abs() {
        below
    } else {
        above
    };
    Ok(OptimalTime {
        t_opt: m as f64 * spacing,
        m,
        t_envelope,
        noiseless: false,
    })
}

/// Envelope-optimal frequency uncertainty
/// `sqrt(2 e Gamma / (n^2 T))` under the repetition model `N = T/t`.
pub fn optimized_uncertainty(n: usize, gamma: f64, t_total: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidMetrology(format!(
            "optimized uncertainty needs gamma > 0, got {gamma}"
        )));
    }
    if !(t_total > 0.0) {
        return Err(Error::InvalidMetrology(format!("T must be positive, got {t_total}")));
    }
    let t_opt = 1.0 / (2.0 * gamma);
    if t_total < t_opt {
        return Err(Error::InfeasibleHorizon { t_total, t_opt });
    }
    let nf = n as f64;
    Ok((2.0 * std::f64::consts::E * gamma / (nf * nf * t_total)).sqrt())
}

/// Uncertainty of `n/2` independently interrogated entangled pairs,
/// each dephasing at `gamma_pair = Gamma(2, xi)`:
/// `sqrt(e Gamma(2,xi) / (n T))`.
pub fn pair_baseline(n: usize, gamma_pair: f64, t_total: f64) -> Result<f64> {
    if n == 0 || n % 2 != 0 {
        return Err(Error::OddIonCount(n));
    }
    if !(gamma_pair > 0.0 && t_total > 0.0) {
        return Err(Error::InvalidMetrology(format!(
            "pair baseline needs gamma_pair > 0 and T > 0, got {gamma_pair}, {t_total}"
        )));
    }
    Ok((std::f64::consts::E * gamma_pair / (n as f64 * t_total)).sqrt())
}

/// Relative resolution outcome; the dark case flags a noiseless
/// comparison instead of reporting a number.
#[derive(Debug, Clone, Copy, Serialize)]
pub enum RelativeResolution {
    Value(f64),
    DarkState,
}

/// `r = Delta w0,pair / Delta w0 = sqrt(n gamma_pair / (2 gamma_n))`;
/// the total duration `T` cancels exactly.
pub fn relative_resolution(n: usize, gamma_n: f64, gamma_pair: f64) -> Result<RelativeResolution> {
    if gamma_n < 0.0 || gamma_pair < 0.0 {
        return Err(Error::InvalidMetrology(format!(
            "rates must be nonnegative, got {gamma_n}, {gamma_pair}"
        )));
    }
    if gamma_n == 0.0 || gamma_pair == 0.0 {
        return Ok(RelativeResolution::DarkState);
    }
    Ok(RelativeResolution::Value(
        (n as f64 * gamma_pair / (2.0 * gamma_n)).sqrt(),
    ))
}

/// Noiseless uncertainty `1/(n sqrt(T t))` at a caller-supplied
/// interrogation time; no time optimization exists without decay.
pub fn noiseless_uncertainty(n: usize, t_total: f64, t: f64) -> Result<f64> {
    if !(t_total > 0.0 && t > 0.0) {
        return Err(Error::InvalidMetrology(format!(
            "T and t must be positive, got {t_total}, {t}"
        )));
    }
    Ok(1.0 / (n as f64 * (t_total * t).sqrt()))
}

/// Full per-scenario metrology summary.
#[derive(Debug, Clone, Serialize)]
pub struct MetrologyReport {
    pub n: usize,
    pub gamma: f64,
    pub gamma_pair: f64,
    pub omega0: f64,
    pub t_total: f64,
    pub t_opt: f64,
    pub fisher_at_t_opt: f64,
    pub delta_omega: f64,
    pub delta_omega_pair: f64,
    pub relative_resolution: Option<f64>,
}

/// Assembles the uncertainty report for one `(n, Gamma, Gamma_pair)`
/// scenario.
pub fn metrology_report(
    n: usize,
    omega0: f64,
    gamma: f64,
    gamma_pair: f64,
    t_total: f64,
) -> Result<MetrologyReport> {
    let opt = optimal_time(n, omega0, gamma)?;
    let fisher = fisher_information(n, omega0, gamma, opt.t_opt)?;
    let delta_omega = optimized_uncertainty(n, gamma, t_total)?;
    let delta_omega_pair = pair_baseline(n, gamma_pair, t_total)?;
    let r = match relative_resolution(n, gamma, gamma_pair)? {
        RelativeResolution::Value(v) => Some(v),
        RelativeResolution::DarkState => None,
    };
    Ok(MetrologyReport {
        n,
        gamma,
        gamma_pair,
        omega0,
        t_total,
        t_opt: opt.t_opt,
        fisher_at_t_opt: fisher,
        delta_omega,
        delta_omega_pair,
        relative_resolution: r,
    })
}
