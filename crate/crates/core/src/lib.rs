//! Joint group, channel and power allocation for downlink MC-CDMA.
//!
//! The crate is layered bottom-up:
//!
//! - [`model`] computes the per-channel transmit power each user needs on each
//!   subcarrier group for a given combining scheme, producing a [`PowerMatrix`].
//! - [`allocation`] assigns groups to users (a sequential per-group scan and a
//!   global-minimum scan) and then fills code channels under a power budget.
//! - [`oracle`] enumerates every assignment on small instances to obtain the
//!   optimum the greedy algorithms are measured against.
//! - [`fading`] draws reproducible channel realizations.
//! - [`experiment`] drives budget sweeps, algorithm comparisons and oracle
//!   checks, and writes CSV.
//!
//! ```
//! use mccdma::{allocate, Algorithm, PowerMatrix};
//!
//! let pm = PowerMatrix::from_rows(&[vec![10.0, 11.0], vec![1.0, 100.0]])?;
//! let original = allocate(&pm, Algorithm::Original, 12.0, 4)?;
//! let improved = allocate(&pm, Algorithm::Improved, 12.0, 4)?;
//! assert_eq!((original.throughput, improved.throughput), (1, 4));
//! # Ok::<(), mccdma::Error>(())
//! ```

pub mod allocation;
mod error;
pub mod experiment;
pub mod fading;
pub mod model;
pub mod oracle;

pub use allocation::{
    allocate, assign_groups_improved, assign_groups_original, fill_channels, validate_allocation,
    Algorithm, AllocationResult, Assignment, ConstraintReport, Solver,
};
pub use error::{Error, Result};
pub use fading::{db_to_amplitude, sample_channel_gains, SeededGenerator};
pub use model::{
    build_power_matrix, combining_weights, required_power, target_sinr, ChannelGains,
    CombiningScheme, PowerMatrix, SimConfig,
};
pub use oracle::{enumerate_assignments, exhaustive_optimal, OracleReport};
