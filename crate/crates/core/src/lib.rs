//! Simulation and parameter-estimation toolkit for optically addressable
//! spin complexes in hexagonal boron nitride.
//!
//! The crate models an emitter as a nine-level system: an optical ground and
//! excited state, a local metastable spin triplet reached by intersystem
//! crossing, and a remote metastable weakly coupled spin pair reached by
//! charge transfer. From that model it computes resonance frequencies under
//! arbitrary static magnetic fields, CW/pulsed ODMR observables, photon
//! correlation curves, spin-Hamiltonian fits to measured resonances, and
//! survey statistics over emitter censuses.
//!
//! All numerical kernels are generic over the scalar type through [`Float`];
//! `f64` aliases for the main domain types are exported at the crate root.

pub mod census;
pub mod error;
pub mod experiments;
pub mod fit;
pub mod linalg;
pub mod optim;
pub mod rates;
pub mod scalar;
pub mod spin;

pub use error::Error;
pub use scalar::Float;

/// Double-precision aliases for the most commonly used domain types.
pub type FieldVector64 = spin::FieldVector<f64>;
pub type ZfsParams64 = spin::ZfsParams<f64>;
pub type PairModel64 = spin::PairModel<f64>;
pub type TransitionSet64 = spin::TransitionSet<f64>;
pub type RateParams64 = rates::RateParams<f64>;
pub type MwDrive64 = rates::MwDrive<f64>;
pub type GeneratorMatrix64 = rates::GeneratorMatrix<f64>;
pub type SweepSpec64 = experiments::SweepSpec<f64>;
pub type OdmrSpectrum64 = experiments::OdmrSpectrum<f64>;
pub type FanMap64 = experiments::FanMap<f64>;
pub type AngleScan64 = experiments::AngleScan<f64>;
pub type PulseSequence64 = experiments::PulseSequence<f64>;
pub type FitResult64 = fit::FitResult<f64>;

/// Result alias used throughout the crate.
pub type Result<T, E = Error> = std::result::Result<T, E>;
