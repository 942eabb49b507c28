//! Pseudo-spectral solver and verification harness for the compressible
//! Navier-Stokes-Korteweg system linearized at a critical constant state
//! (`P'(1) = 0`), posed on a periodic box.
//!
//! The unknown is `u = (φ, m)` with `φ = ρ - 1`. All numerical kernels are
//! generic over the floating-point type; the aliases at the bottom of this file
//! fix `f64`, which is what the analysis and oracle layers use.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod duhamel;
pub mod error;
pub mod initial;
pub mod params;
pub mod nonlinearity;
pub mod oracle;
pub mod phi;
pub mod pressure;
pub mod propagator;
pub mod quadrature;
pub mod scalar;
pub mod spectral;
pub mod split;

pub use duhamel::{
    etd_step, picard_iterate, simulate, EtdStepper, Monitor, NonlinearMode, PicardConfig, PicardReport, Scheme,
    StepperConfig, Termination, Trajectory,
};
pub use error::{NskError, Result};
pub use nonlinearity::{eval_F, korteweg_divergence, p1_factor, p2_factor, ForcingField};
pub use params::PhysParams;
pub use pressure::{PressureLaw, PressureModel};
pub use propagator::{apply_semigroup, divided_difference, eigenvalues, mode_propagator, EigenPair, ModePropagator, Regime};
pub use scalar::Scalar;
pub use spectral::{Component, Grid, ModeValues, SpectralState};
pub use split::{make_cutoff, Cutoff};

pub type Grid64 = Grid<f64>;
pub type Grid32 = Grid<f32>;
pub type State64 = SpectralState<f64>;
pub type State32 = SpectralState<f32>;
pub type Params64 = PhysParams<f64>;
pub type Params32 = PhysParams<f32>;
