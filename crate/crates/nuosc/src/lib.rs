//! Simulation of collective three-flavor neutrino oscillations on qutrit and
//! qubit circuits, with noise channels, error mitigation and tomography.

pub mod circuit;
pub mod error;
pub mod hamiltonian;
pub mod linalg;
pub mod mitigation;
pub mod noise;
pub mod qubit;
pub mod qudit;
pub mod qutrit;
pub mod record;
pub mod tomography;
pub mod trotter;

pub use circuit::{Circuit, CompiledCircuit};
pub use error::{Error, Result};
pub use hamiltonian::{Basis, ExactPropagator, Flavor, MixingParameters, NeutrinoSystem};
pub use qudit::{DensityMatrix, Gate, GateRole, QuditState, RegisterShape};
pub use record::MeasurementRecord;
