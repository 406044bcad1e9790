//! Spontaneous Raman scattering, light shifts and gate-error budgets for
//! trapped-ion qubits, with the lifetime and polarization fits used to
//! measure them and a Monte-Carlo model of the measurement loop.

pub mod angular;
pub mod atomdata;
pub mod constants;
pub mod couplings;
pub mod error;
pub mod expsim;
pub mod fitting;
pub mod gates;
pub mod halfint;
pub mod lightshift;
pub mod plot;
pub mod raman;
pub mod scattering;
pub mod units;

pub use angular::{BeamGeometry, Polarization, SecondBeamGeometry};
pub use atomdata::{FineLevel, HyperfineState, ReducedDipole, SpeciesData};
pub use error::{Error, Result};
pub use halfint::HalfInt;
pub use scattering::{LaserDrive, Model, ScatterConfig};
