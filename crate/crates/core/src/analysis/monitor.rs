//! Per-sample diagnostics recorded along a simulation.

use crate::analysis::energy::{energy_functional, forcing_norm_sq, EnergySample, EnergyWeights};
use crate::analysis::znorm::{ZAccumulator, ZSample};
use crate::duhamel::Monitor;
use crate::error::Result;
use crate::nonlinearity::ForcingField;
use crate::scalar::Scalar;
use crate::spectral::{Component, SpectralState};
use crate::split::Cutoff;

/// One row of the simulation time series.
#[derive(Debug, Clone, PartialEq)]
pub struct NormRecord {
    pub t: f64,
    pub l2_u: f64,
    pub h1_u: f64,
    pub l2_phi_low: f64,
    pub l2_m_low: f64,
    pub e_high: f64,
    pub d_high: f64,
    /// `‖P∞F‖` in the forcing norm of the energy inequality.
    pub f_norm: f64,
    /// Z-norm of the trajectory up to `t`.
    pub znorm_partial: f64,
    /// `φ̂(0)`.
    pub mass: f64,
    /// `|m̂(0)|`.
    pub momentum: f64,
    pub z: ZSample,
}

impl NormRecord {
    pub fn energy_sample(&self) -> EnergySample {
        EnergySample { t: self.t, e: self.e_high, d: self.d_high, f_sq: self.f_norm * self.f_norm }
    }
}

/// Records a [`NormRecord`] per sample.
#[derive(Debug, Clone)]
pub struct NormMonitor<T: Scalar> {
    cutoff: Cutoff<T>,
    weights: EnergyWeights,
    z: ZAccumulator,
    pub records: Vec<NormRecord>,
}

impl<T: Scalar> NormMonitor<T> {
    pub fn new(cutoff: Cutoff<T>, weights: EnergyWeights, c2: f64) -> Self {
        let dim = cutoff.grid().dim();
        Self { cutoff, weights, z: ZAccumulator::new(dim, c2), records: Vec::new() }
    }

    pub fn weights(&self) -> &EnergyWeights {
        &self.weights
    }

    pub fn energy_samples(&self) -> Vec<EnergySample> {
        self.records.iter().map(NormRecord::energy_sample).collect()
    }

    pub fn record(&mut self, t: T, u: &SpectralState<T>, forcing: &ForcingField<T>) -> NormRecord {
        let t = t.to_f64_lossy();
        let low = self.cutoff.project_low(u);
        let high = self.cutoff.project_high(u);
        let (e, d) = energy_functional(&high, &self.weights);
        let z = ZSample::from_state(t, u, &self.cutoff, self.weights.s);
        self.z.push(&z);
        let momentum = u.total_momentum().iter().map(|c| c.norm_sqr().to_f64_lossy()).sum::<f64>().sqrt();
        let rec = NormRecord {
            t,
            l2_u: u.seminorm(0, Component::Both).to_f64_lossy(),
            h1_u: u.seminorm(1, Component::Both).to_f64_lossy(),
            l2_phi_low: low.seminorm(0, Component::Phi).to_f64_lossy(),
            l2_m_low: low.seminorm(0, Component::Momentum).to_f64_lossy(),
            e_high: e,
            d_high: d,
            f_norm: forcing_norm_sq(&forcing.momentum, &self.cutoff, &self.weights).sqrt(),
            znorm_partial: self.z.value().total,
            mass: u.mass().re.to_f64_lossy(),
            momentum,
            z,
        };
        self.records.push(rec.clone());
        rec
    }
}

impl<T: Scalar> Monitor<T> for NormMonitor<T> {
    fn observe(&mut self, t: T, state: &SpectralState<T>, forcing: &ForcingField<T>) -> Result<()> {
        self.record(t, state, forcing);
        Ok(())
    }
}
