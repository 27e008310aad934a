//! Simulator for a single-qubit engine whose strokes are general quantum
//! measurements, thermalization and adiabatic changes of the level spacing.
//!
//! * [`qlinalg`]: small dense complex matrices and Hermitian eigenvalues.
//! * [`qstate`]: Hamiltonians, Gibbs states, mean energy, von Neumann entropy.
//! * [`channels`]: Kraus sets, completeness, POVMs and the two engine channels.
//! * [`engine`]: three- and five-stroke cycles, numerically and in closed form.
//! * [`sweep`], [`config`], [`verify`], [`cli`]: the `qmengine` command line.

pub mod channels;
pub mod cli;
pub mod config;
pub mod engine;
pub mod qlinalg;
pub mod qstate;
pub mod sweep;
pub mod tol;
pub mod verify;

pub use channels::{KrausSet, MeasurementOutcome};
pub use engine::{CycleMode, CycleParams, EnergyLedger, StrokeName};
pub use qlinalg::{SquareMatrix, C64};
pub use qstate::{DensityMatrix, Hamiltonian, ThermalParams};
