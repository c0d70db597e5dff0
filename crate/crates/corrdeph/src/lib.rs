//! Decoherence and metrological precision of entangled ion-array states
//! under spatially correlated Markovian dephasing.
//!
//! The library is organized around a linear array of ions coupled to a
//! dephasing bath whose site-to-site correlations are described by a
//! spatial kernel `C(0, x)`:
//!
//! - [`kernels`]: correlation kernels, kernel matrices, admissibility
//!   (positive semidefiniteness) checks.
//! - [`states`]: array geometry, level scheme, and the coherence pairs
//!   (alternating/block quadrupole states, GHZ) whose off-diagonal
//!   density-matrix element carries the metrological phase.
//! - [`rates`]: analytical dephasing rates: the unified pair-sum
//!   quadratic form, the finite-sum and closed-form specializations for
//!   the alternating state, GHZ scaling laws, and large-`n` asymptotes.
//! - [`lindblad`]: dense master-equation simulation used as the
//!   ground-truth oracle for the analytic formulas.
//! - [`metrology`]: parity probabilities, Fisher information, and
//!   time-optimized frequency uncertainties.
//! - [`sweep`]: scaling sweeps, validation campaigns, and CSV/JSON
//!   emission backing the `corrdeph` CLI.

pub mod error;
pub mod kernels;
pub mod lindblad;
pub mod metrology;
pub mod rates;
pub mod states;
pub mod sweep;

pub use error::Error;
pub use kernels::{KernelMatrix, PsdCheck, SpatialKernel};
pub use rates::DephasingReport;
pub use states::{CoherencePair, IonArray, LevelScheme, SpacingMode, StateLabel};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
