//! Numerical simulation of noiseless loss suppression on truncated Fock spaces.
//!
//! A lossy bosonic channel is sandwiched between a heralded noiseless
//! attenuator `νⁿ` and a heralded noiseless amplifier `gⁿ`. With the matched
//! gain `g = 1/(ντ)` the combination approaches the identity channel as
//! `ν → 0`, at the price of a lower success probability.
//!
//! Modules, bottom up:
//!
//! * [`fock`]: states, operators and the diagonal filters;
//! * [`channels`]: pure-loss Kraus operators and the suppressed channel;
//! * [`choi`]: Choi matrices, channel fidelity, effective transmittance;
//! * [`protocol`]: the end-to-end pipeline, gain sweeps, `ν` optimizer;
//! * [`experiment`]: imperfections of the interference-based amplifier;
//! * [`tomography`]: simulated coincidence counts and ML reconstruction.

pub mod channels;
pub mod choi;
pub mod error;
pub mod experiment;
pub mod fock;
pub mod linalg;
pub mod protocol;
pub mod tomography;

pub use channels::{ChannelParams, KrausChannel};
pub use choi::ChoiMatrix;
pub use error::{Error, Result};
pub use fock::{ComplexValue, DensityMatrix, FockState, Operator};
pub use protocol::{NuPolicy, Probe, Strategy, SweepPlan, SweepRecord};
pub use tomography::{CountRecord, MeasurementSetting, Reconstruction};

pub use num_complex::Complex64;
