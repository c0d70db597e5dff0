//! Array geometry, level scheme, and probe-state coherence pairs.
//!
//! The tracked dynamical object is a single off-diagonal density-matrix
//! element between two product-basis strings of per-site `J_z`
//! eigenvalues. Only those two strings are stored; under pure dephasing
//! they fully determine the evolution of the coherence.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// How an array of `n` ions is scaled when `n` grows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SpacingMode {
    /// Fixed inter-ion distance `d`; the array grows with `n`.
    FixedDensity { d: f64 },
    /// Fixed total length `L`; spacing `d = L/n` shrinks with `n`.
    FixedLength { l: f64 },
}

/// Linear array of `n` ions at positions `x_j = j * d`, `j = 0..n-1`.
///
/// The length convention is `L = n * d`, so in fixed-length mode the
/// spacing is `d = L/n` and the span of occupied sites is
/// `x_{n-1} - x_0 = L (n-1)/n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IonArray {
    pub n: usize,
    pub mode: SpacingMode,
}

impl IonArray {
    pub fn fixed_density(n: usize, d: f64) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidArray("n must be >= 1".into()));
        }
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::InvalidArray(format!("spacing d must be positive, got {d}")));
        }
        Ok(IonArray {
            n,
            mode: SpacingMode::FixedDensity { d },
        })
    }

    pub fn fixed_length(n: usize, l: f64) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidArray("n must be >= 1".into()));
        }
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::InvalidArray(format!("length L must be positive, got {l}")));
        }
        Ok(IonArray {
            n,
            mode: SpacingMode::FixedLength { l },
        })
    }

    /// Inter-ion spacing `d`.
    pub fn spacing(&self) -> f64 {
        match self.mode {
            SpacingMode::FixedDensity { d } => d,
            SpacingMode::FixedLength { l } => l / self.n as f64,
        }
    }

    /// Total array length `L = n * d`.
    pub fn length(&self) -> f64 {
        match self.mode {
            SpacingMode::FixedDensity { d } => d * self.n as f64,
            SpacingMode::FixedLength { l } => l,
        }
    }

    pub fn positions(&self) -> Vec<f64> {
        let d = self.spacing();
        (0..self.n).map(|j| j as f64 * d).collect()
    }
}

/// Level-scheme and Hamiltonian parameters.
///
/// Three `J_z` sublevels `eps_pm = epsilon0 +- epsilon_delta` and
/// `epsilon0` enter the quadrupole states; `alpha` and `beta` are the
/// quadratic and linear Hamiltonian coefficients, and `gamma0 = v^2`
/// the overall dephasing strength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelScheme {
    pub epsilon0: f64,
    pub epsilon_delta: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma0: f64,
}

impl LevelScheme {
    pub fn new(epsilon0: f64, epsilon_delta: f64, alpha: f64, beta: f64, gamma0: f64) -> Result<Self> {
        if !(epsilon_delta > 0.0 && epsilon_delta.is_finite()) {
            return Err(Error::InvalidState(format!(
                "epsilon_delta must be positive, got {epsilon_delta}"
            )));
        }
        Ok(LevelScheme {
            epsilon0,
            epsilon_delta,
            alpha,
            beta,
            gamma0,
        })
    }

    /// Quadrupole transition frequency `omega0 = alpha * epsilon_delta^2`.
    pub fn omega0(&self) -> f64 {
        self.alpha * self.epsilon_delta * self.epsilon_delta
    }

    pub fn eps_plus(&self) -> f64 {
        self.epsilon0 + self.epsilon_delta
    }

    pub fn eps_minus(&self) -> f64 {
        self.epsilon0 - self.epsilon_delta
    }
}

impl Default for LevelScheme {
    /// `epsilon0 = 0`, `epsilon_delta = 1`, `alpha = 1`, `beta = 1`,
    /// `gamma0 = 1` (coupling `v = 1`).
    fn default() -> Self {
        LevelScheme {
            epsilon0: 0.0,
            epsilon_delta: 1.0,
            alpha: 1.0,
            beta: 1.0,
            gamma0: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StateLabel {
    AlternatingQuadrupole,
    BlockQuadrupole,
    Ghz,
    Custom,
}

/// The two product-basis strings spanning the tracked off-diagonal
/// element, stored as raw `J_z` eigenvalues.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherencePair {
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    pub label: StateLabel,
}

impl CoherencePair {
    pub fn n(&self) -> usize {
        self.left.len()
    }

    /// Per-site eigenvalue differences `Delta_j = lambda_j - mu_j`.
    pub fn deltas(&self) -> Vec<f64> {
        self.left
            .iter()
            .zip(&self.right)
            .map(|(l, r)| l - r)
            .collect()
    }

    fn validate(self) -> Result<Self> {
        if self.left.len() != self.right.len() {
            return Err(Error::InvalidState(format!(
                "left has {} sites, right has {}",
                self.left.len(),
                self.right.len()
            )));
        }
        if self.left.is_empty() {
            return Err(Error::InvalidState("state must have at least one site".into()));
        }
        if self.left == self.right {
            return Err(Error::InvalidState(
                "left and right strings are identical: not an off-diagonal element".into(),
            ));
        }
        Ok(self)
    }
}

/// Alternating quadrupole state: left `(e+, e-, e+, e-, ...)`, right all
/// `e0`. Requires even `n`.
pub fn make_alternating_state(n: usize, scheme: &LevelScheme) -> Result<CoherencePair> {
    if n == 0 || n % 2 != 0 {
        return Err(Error::OddIonCount(n));
    }
    let left = (0..n)
        .map(|j| if j % 2 == 0 { scheme.eps_plus() } else { scheme.eps_minus() })
        .collect();
    CoherencePair {
        left,
        right: vec![scheme.epsilon0; n],
        label: StateLabel::AlternatingQuadrupole,
    }
    .validate()
}

/// Block quadrupole state: left `(e+, ..., e+, e-, ..., e-)`, right all
/// `e0`. Requires even `n`.
pub fn make_block_state(n: usize, scheme: &LevelScheme) -> Result<CoherencePair> {
    if n == 0 || n % 2 != 0 {
        return Err(Error::OddIonCount(n));
    }
    let left = (0..n)
        .map(|j| if j < n / 2 { scheme.eps_plus() } else { scheme.eps_minus() })
        .collect();
    CoherencePair {
        left,
        right: vec![scheme.epsilon0; n],
        label: StateLabel::BlockQuadrupole,
    }
    .validate()
}

/// GHZ coherence on qubits: `sigma_z` eigenvalues `+1` against `-1` on
/// every site. Excitation difference `n_e = n`.
pub fn make_ghz_state(n: usize) -> Result<CoherencePair> {
    if n < 1 {
        return Err(Error::InvalidState("GHZ state needs n >= 1".into()));
    }
    CoherencePair {
        left: vec![1.0; n],
        right: vec![-1.0; n],
        label: StateLabel::Ghz,
    }
    .validate()
}

/// Custom coherence pair from explicit eigenvalue strings.
pub fn make_custom_state(left: Vec<f64>, right: Vec<f64>) -> Result<CoherencePair> {
    CoherencePair {
        left,
        right,
        label: StateLabel::Custom,
    }
    .validate()
}

/// Coherent phase rate of the pair:
/// `sum_j [beta (lambda_j - mu_j) + alpha (lambda_j^2 - mu_j^2)]`.
/// For the quadrupole states this equals `n * alpha * epsilon_delta^2`.
pub fn coherent_frequency(pair: &CoherencePair, scheme: &LevelScheme) -> f64 {
    pair.left
        .iter()
        .zip(&pair.right)
        .map(|(&l, &r)| scheme.beta * (l - r) + scheme.alpha * (l * l - r * r))
        .sum()
}

/// State specification in CLI form:
/// `alternating | block | ghz | custom:<l1,l2,...;m1,m2,...>`.
#[derive(Debug, Clone, PartialEq)]
pub enum StateSpec {
    Alternating,
    Block,
    Ghz,
    Custom { left: Vec<f64>, right: Vec<f64> },
}

impl StateSpec {
    /// Builds the coherence pair for `n` sites. The custom variant
    /// carries its own length and must match `n`.
    pub fn build(&self, n: usize, scheme: &LevelScheme) -> Result<CoherencePair> {
        match self {
            StateSpec::Alternating => make_alternating_state(n, scheme),
            StateSpec::Block => make_block_state(n, scheme),
            StateSpec::Ghz => make_ghz_state(n),
            StateSpec::Custom { left, right } => {
                if left.len() != n {
                    return Err(Error::LengthMismatch {
                        pair: left.len(),
                        array: n,
                    });
                }
                make_custom_state(left.clone(), right.clone())
            }
        }
    }
}

impl FromStr for StateSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "alternating" => return Ok(StateSpec::Alternating),
            "block" => return Ok(StateSpec::Block),
            "ghz" => return Ok(StateSpec::Ghz),
            _ => {}
        }
        let body = s.strip_prefix("custom:").ok_or_else(|| Error::Parse {
            what: "state",
            input: s.to_owned(),
        })?;
        let (ls, rs) = body.split_once(';').ok_or_else(|| Error::Parse {
            what: "state",
            input: s.to_owned(),
        })?;
        let parse_vec = |part: &str| -> Result<Vec<f64>> {
            part.split(',')
                .map(|v| {
                    v.trim().parse().map_err(|_| Error::Parse {
                        what: "state",
                        input: s.to_owned(),
                    })
                })
                .collect()
        };
        Ok(StateSpec::Custom {
            left: parse_vec(ls)?,
            right: parse_vec(rs)?,
        })
    }
}
