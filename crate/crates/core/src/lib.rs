//! Simulation of a two-qubit superconducting quantum battery.
//!
//! The battery is two charge qubits at the charge-degeneracy point, prepared
//! in a Gibbs state and charged by a collective X drive. The crate provides
//!
//! * [`linalg`]: small dense complex matrices and a Jacobi eigensolver,
//! * [`model`]: Hamiltonians and the Gibbs initial state,
//! * [`dynamics`]: the charging unitary and the evolved state,
//! * [`metrics`]: ergotropy, work, power, capacity and l1-coherence,
//! * [`sweep`]: grid evaluation and the figure presets,
//! * [`verify`]: closed-form vs numeric equivalence suites.
//!
//! Every closed-form expression has a numeric counterpart computed from
//! independent primitives, and the two are checked against each other.

pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod sweep;
pub mod tolerances;
pub mod verify;

pub use dynamics::{ChargingTime, ClosedFormMode};
pub use error::{Error, Result};
pub use linalg::{Complex, ComplexMatrix, SpectralDecomposition};
pub use metrics::MetricsSample;
pub use model::{BatteryParams, DensityMatrix, ThermalClosedFormTerms};
pub use sweep::{figure_preset, run_sweep, SweepConfig, SweepResult};
pub use tolerances::Tolerances;
