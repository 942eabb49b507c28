//! Quantitative monitors: energy functional, time-weighted norms, decay
//! fits and the kernel bound. Results are reported in `f64`.

pub mod decay;
pub mod energy;
pub mod k12;
pub mod monitor;
pub mod znorm;

pub use decay::{decay_fit, target_exponent, DecayFit, DecayWindow};
pub use energy::{
    energy_functional, energy_inequality_check, forcing_norm_sq, mode_energy, sobolev_norm_sq, EnergyReport,
    EnergySample, EnergyWeights,
};
pub use k12::{k12_bound_check, k12_norm_sq, K12Report};
pub use monitor::{NormMonitor, NormRecord};
pub use znorm::{z_norm, ZAccumulator, ZNorm, ZSample};
