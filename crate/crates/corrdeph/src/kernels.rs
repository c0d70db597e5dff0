//! Spatial correlation kernels `C(0, x)` and their admissibility.
//!
//! A kernel is physically admissible when the matrix of pairwise
//! correlations on a given array is positive semidefinite, in which case
//! the dephasing generator can be brought to Lindblad form by
//! diagonalizing the kernel matrix. Perfect anti-correlations fail this
//! check for three or more sites.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::states::IonArray;
use crate::{Error, Result};

/// Default relative tolerance for the positive-semidefiniteness check.
pub const DEFAULT_PSD_TOL: f64 = 1e-9;

/// Homogeneous spatial correlation function `C(0, x)`, evaluable at any
/// signed distance. All variants satisfy `C(0, 0) = 1` and
/// `C(0, x) = C(0, -x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SpatialKernel {
    /// Kronecker delta: independent noise on every site. Kept as an
    /// explicit variant rather than the `xi -> 0` limit of
    /// [`SpatialKernel::Exponential`] to avoid floating underflow.
    Uncorrelated,
    /// `C = 1` everywhere: perfectly correlated (collective) noise.
    Constant,
    /// `C(0, x) = exp(-|x|/xi)` with correlation length `xi > 0`.
    Exponential { xi: f64 },
    /// `C(0, x) = cos(k x)` with spatial frequency `k >= 0`.
    Cosine { k: f64 },
    /// `C(0, x) = cos(k x) exp(-|x|/xi)`: oscillating correlations with
    /// an exponentially decaying envelope.
    DampedCosine { k: f64, xi: f64 },
}

impl SpatialKernel {
    /// Checks the variant's parameter constraints.
    pub fn validate(&self) -> Result<()> {
        match *self {
            SpatialKernel::Uncorrelated | SpatialKernel::Constant => Ok(()),
            SpatialKernel::Exponential { xi } | SpatialKernel::DampedCosine { xi, .. }
                if !(xi > 0.0 && xi.is_finite()) =>
            {
                Err(Error::InvalidKernel(format!(
                    "correlation length xi must be positive and finite, got {xi}"
                )))
            }
            SpatialKernel::Cosine { k } | SpatialKernel::DampedCosine { k, .. }
                if !(k >= 0.0 && k.is_finite()) =>
            {
                Err(Error::InvalidKernel(format!(
                    "spatial frequency k must be nonnegative and finite, got {k}"
                )))
            }
            _ => Ok(()),
        }
    }

    /// Evaluates `C(0, distance)`. Parameters are assumed valid; use
    /// [`eval_kernel`] for the checked entry point.
    pub fn eval(&self, distance: f64) -> f64 {
        let x = distance.abs();
        match *self {
            SpatialKernel::Uncorrelated => {
                if x == 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            SpatialKernel::Constant => 1.0,
            SpatialKernel::Exponential { xi } => (-x / xi).exp(),
            SpatialKernel::Cosine { k } => (k * x).cos(),
            SpatialKernel::DampedCosine { k, xi } => (k * x).cos() * (-x / xi).exp(),
        }
    }
}

impl fmt::Display for SpatialKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            SpatialKernel::Uncorrelated => write!(f, "uncorr"),
            SpatialKernel::Constant => write!(f, "const"),
            SpatialKernel::Exponential { xi } => write!(f, "exp:xi={xi}"),
            SpatialKernel::Cosine { k } => write!(f, "cos:k={k}"),
            SpatialKernel::DampedCosine { k, xi } => write!(f, "dampedcos:k={k},xi={xi}"),
        }
    }
}

fn parse_params<'a>(body: &'a str, input: &str) -> Result<Vec<(&'a str, f64)>> {
    body.split(',')
        .map(|pair| {
            let (name, value) = pair.split_once('=').ok_or_else(|| Error::Parse {
                what: "kernel",
                input: input.to_owned(),
            })?;
            let value: f64 = value.trim().parse().map_err(|_| Error::Parse {
                what: "kernel",
                input: input.to_owned(),
            })?;
            Ok((name.trim(), value))
        })
        .collect()
}

fn lookup(params: &[(&str, f64)], name: &str, input: &str) -> Result<f64> {
    params
        .iter()
        .find(|(n, _)| *n == name)
        .map(|&(_, v)| v)
        .ok_or_else(|| Error::Parse {
            what: "kernel",
            input: input.to_owned(),
        })
}

impl FromStr for SpatialKernel {
    type Err = Error;

    /// Parses the CLI string form: `uncorr`, `const`, `exp:xi=<f>`,
    /// `cos:k=<f>`, `dampedcos:k=<f>,xi=<f>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let kernel = match s.split_once(':') {
            None => match s {
                "uncorr" => SpatialKernel::Uncorrelated,
                "const" => SpatialKernel::Constant,
                _ => {
                    return Err(Error::Parse {
                        what: "kernel",
                        input: s.to_owned(),
                    })
                }
            },
            Some((tag, body)) => {
                let params = parse_params(body, s)?;
                match tag {
                    "exp" => SpatialKernel::Exponential {
                        xi: lookup(&params, "xi", s)?,
                    },
                    "cos" => SpatialKernel::Cosine {
                        k: lookup(&params, "k", s)?,
                    },
                    "dampedcos" => SpatialKernel::DampedCosine {
                        k: lookup(&params, "k", s)?,
                        xi: lookup(&params, "xi", s)?,
                    },
                    _ => {
                        return Err(Error::Parse {
                            what: "kernel",
                            input: s.to_owned(),
                        })
                    }
                }
            }
        };
        kernel.validate()?;
        Ok(kernel)
    }
}

/// Checked kernel evaluation at a signed distance.
pub fn eval_kernel(kernel: &SpatialKernel, distance: f64) -> Result<f64> {
    kernel.validate()?;
    if !distance.is_finite() {
        return Err(Error::InvalidKernel(format!(
            "distance must be finite, got {distance}"
        )));
    }
    Ok(kernel.eval(distance))
}

/// Matrix of pairwise correlations `C_jk = C(0, x_j - x_k)` on an array:
/// symmetric with unit diagonal.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    pub positions: Vec<f64>,
    pub entries: DMatrix<f64>,
}

/// Result of a positive-semidefiniteness check.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PsdCheck {
    pub admissible: bool,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
}

impl KernelMatrix {
    pub fn n(&self) -> usize {
        self.positions.len()
    }

    /// Admissible iff the minimum eigenvalue is `>= -tol * max(|eig|, 1)`.
    pub fn psd_check(&self, tol: f64) -> PsdCheck {
        let eig = self.entries.clone().symmetric_eigenvalues();
        let min_eigenvalue = eig.iter().cloned().fold(f64::INFINITY, f64::min);
        let max_eigenvalue = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let scale = max_eigenvalue.abs().max(1.0);
        PsdCheck {
            admissible: min_eigenvalue >= -tol * scale,
            min_eigenvalue,
            max_eigenvalue,
        }
    }

    /// Eigendecomposition with small negative eigenvalues (within the
    /// PSD tolerance) clipped to zero; used to build jump operators.
    /// Returns `(eigenvalues, eigenvectors)` with eigenvectors as
    /// columns.
    pub fn clipped_eigendecomposition(&self, tol: f64) -> Result<(Vec<f64>, DMatrix<f64>)> {
        let se = self.entries.clone().symmetric_eigen();
        let scale = se
            .eigenvalues
            .iter()
            .fold(1.0_f64, |acc, &e| acc.max(e.abs()));
        let mut eigenvalues = Vec::with_capacity(se.eigenvalues.len());
        for &eta in se.eigenvalues.iter() {
            if eta < -tol * scale {
                return Err(Error::InadmissibleKernel {
                    min_eigenvalue: eta,
                });
            }
            eigenvalues.push(eta.max(0.0));
        }
        Ok((eigenvalues, se.eigenvectors))
    }
}

/// Materializes the kernel on an array's site positions.
pub fn kernel_matrix(kernel: &SpatialKernel, array: &IonArray) -> Result<KernelMatrix> {
    kernel.validate()?;
    let positions = array.positions();
    let n = positions.len();
    let entries = DMatrix::from_fn(n, n, |j, k| kernel.eval(positions[j] - positions[k]));
    Ok(KernelMatrix { positions, entries })
}
