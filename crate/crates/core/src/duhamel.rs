//! Time stepping of `u' = -Âu + (0, F(u))` through the Duhamel formula.
//!
//! The linear part is applied exactly; the forcing is integrated with
//! exponential time differencing. The per-mode `φ_k` operators of the linear
//! generator are built from divided differences of the exponential on the
//! nodes `{0^k, λ₊h, λ₋h}`, so they stay accurate through the double root.
//!
//! [`picard_iterate`] runs the fixed-point iteration `u⁽ᵏ⁾ = Γ[u⁽ᵏ⁻¹⁾]` on a
//! time mesh, as a diagnostic of contraction.

use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{NskError, Result};
use crate::nonlinearity::{eval_F, ForcingField};
use crate::params::PhysParams;
use crate::phi::exp_divided_differences;
use crate::propagator::{eigenvalues, mode_propagator, ModePropagator};
use crate::quadrature::gauss_legendre_unit;
use crate::scalar::Scalar;
use crate::spectral::{Component, Grid, ModeValues, SpectralState, MAX_DIM};

/// A step whose norm exceeds this multiple of the initial norm is a blowup.
pub const BLOWUP_FACTOR: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// `u⁺ = S(h)u + hΦ₁F(u)`.
    Etd1,
    /// Cox-Matthews predictor-corrector, second order.
    EtdRk2,
}

/// Switches the forcing off to recover the linear evolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NonlinearMode {
    Full,
    Disabled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepperConfig<T> {
    pub dt: T,
    pub t_end: T,
    pub scheme: Scheme,
    /// Target local error per unit time for adaptive stepping; `None` keeps
    /// `dt` fixed.
    pub adapt: Option<f64>,
    /// Largest admissible `max|φ|`.
    pub amplitude_guard: T,
    /// Spacing of sample times; steps are shortened to land on them.
    pub sample_interval: T,
    /// Keep every `store_every`-th sampled state in the trajectory (0: none).
    pub store_every: usize,
    pub nonlinear: NonlinearMode,
}

impl<T: Scalar> StepperConfig<T> {
    pub fn new(dt: T, t_end: T) -> Self {
        Self {
            dt,
            t_end,
            scheme: Scheme::EtdRk2,
            adapt: None,
            amplitude_guard: T::lit(0.5),
            sample_interval: dt,
            store_every: 0,
            nonlinear: NonlinearMode::Full,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > T::zero()) || !self.dt.is_finite() {
            return Err(NskError::InvalidStepper(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= T::zero()) || !self.t_end.is_finite() {
            return Err(NskError::InvalidStepper(format!("t_end must be non-negative, got {}", self.t_end)));
        }
        if !(self.sample_interval > T::zero()) {
            return Err(NskError::InvalidStepper("sample_interval must be positive".into()));
        }
        if let Some(tol) = self.adapt {
            if !(tol > 0.0) {
                return Err(NskError::InvalidStepper("adaptive target must be positive".into()));
            }
        }
        if !(self.amplitude_guard > T::zero()) {
            return Err(NskError::InvalidStepper("amplitude_guard must be positive".into()));
        }
        Ok(())
    }
}

/// ETD coefficients of one mode for one step size.
#[derive(Debug, Clone, Copy)]
struct ModeEtd<T> {
    prop: ModePropagator<T>,
    /// `h·e[0^k, λ₊h, λ₋h]` for `k = 1, 2`.
    beta: [Complex<T>; 2],
    /// `φ_k(λ₊h) + λ₋β_k`, the longitudinal diagonal entry.
    gamma: [Complex<T>; 2],
    /// `φ_k(-ν|ξ|²h)`.
    transverse: [Complex<T>; 2],
}

impl<T: Scalar> ModeEtd<T> {
    fn new(xi: [T; MAX_DIM], dim: usize, h: T, params: &PhysParams<T>) -> Self {
        let prop = mode_propagator(xi, dim, h, params);
        let q = xi.iter().take(dim).fold(T::zero(), |acc, &v| acc + v * v);
        if q == T::zero() {
            let half = Complex::new(T::lit(0.5), T::zero());
            return Self {
                prop,
                beta: [Complex::zero(); 2],
                gamma: [Complex::one(), half],
                transverse: [Complex::one(), half],
            };
        }
        let eig = eigenvalues(q, params);
        let zp = eig.lambda_plus * h;
        let zm = eig.lambda_minus * h;
        let zero = Complex::zero();
        let zt = Complex::new(-params.nu() * q * h, T::zero());
        let d1 = exp_divided_differences(&[zero, zp, zm]);
        let d2 = exp_divided_differences(&[zero, zero, zp, zm]);
        let t1 = exp_divided_differences(&[zero, zt]);
        let t2 = exp_divided_differences(&[zero, zero, zt]);
        let beta = [d1[2] * h, d2[3] * h];
        Self {
            prop,
            beta,
            gamma: [d1[1] + eig.lambda_minus * beta[0], d2[2] + eig.lambda_minus * beta[1]],
            transverse: [t1[1], t2[2]],
        }
    }

    /// `h·Φ_k·(0, f)` for `k ∈ {1, 2}` (index 0 or 1).
    #[inline]
    fn phi_forcing(&self, k: usize, f: &ModeValues<T>, h: T) -> ModeValues<T> {
        let dim = self.prop.dim;
        let xi = self.prop.xi;
        let q = xi.iter().take(dim).fold(T::zero(), |acc, &v| acc + v * v);
        let mut out = [Complex::zero(); 1 + MAX_DIM];
        if q == T::zero() {
            for j in 0..dim {
                out[1 + j] = f[1 + j] * self.gamma[k] * h;
            }
            return out;
        }
        let mut p = Complex::zero();
        for j in 0..dim {
            p = p + f[1 + j] * xi[j];
        }
        out[0] = Complex::new(T::zero(), -T::one()) * self.beta[k] * p * h;
        let longitudinal = (self.gamma[k] - self.transverse[k]) * p / q;
        for j in 0..dim {
            out[1 + j] = (self.transverse[k] * f[1 + j] + longitudinal * xi[j]) * h;
        }
        out
    }
}

/// Per-mode ETD tables for one step size.
#[derive(Debug)]
pub struct EtdCoefficients<T> {
    h: T,
    modes: Vec<ModeEtd<T>>,
}

impl<T: Scalar> EtdCoefficients<T> {
    pub fn new(grid: &Grid<T>, h: T, params: &PhysParams<T>) -> Self {
        let dim = grid.dim();
        let modes = (0..grid.len())
            .into_par_iter()
            .map(|i| ModeEtd::new(grid.wavevector(i), dim, h, params))
            .collect();
        Self { h, modes }
    }

    pub fn step_size(&self) -> T {
        self.h
    }

    /// `S(h)u`.
    pub fn propagate(&self, u: &SpectralState<T>) -> SpectralState<T> {
        u.map_modes(|i, v| self.modes[i].prop.apply(v))
    }

    /// `S(h)u + hΦ_k(0, f)` with `k = order` (1 or 2); `u` may be omitted.
    fn combine(&self, u: Option<&SpectralState<T>>, f: &SpectralState<T>, order: usize) -> SpectralState<T> {
        let k = order - 1;
        let h = self.h;
        match u {
            Some(u) => u.map_modes(|i, v| {
                let mode = &self.modes[i];
                let lin = mode.prop.apply(v);
                let forced = mode.phi_forcing(k, &f.mode(i), h);
                let mut out = lin;
                for (o, d) in out.iter_mut().zip(forced) {
                    *o = *o + d;
                }
                out
            }),
            None => f.map_modes(|i, v| self.modes[i].phi_forcing(k, &v, h)),
        }
    }
}

/// Result of one ETD step.
#[derive(Debug, Clone)]
pub struct StepOutcome<T: Scalar> {
    pub state: SpectralState<T>,
    /// `F` at the start of the step.
    pub forcing: ForcingField<T>,
    /// `‖u⁺_rk2 - u⁺_etd1‖` when the scheme is `EtdRk2`.
    pub embedded_error: Option<T>,
}

/// ETD stepper with per-step-size coefficient caching.
#[derive(Debug)]
pub struct EtdStepper<T: Scalar> {
    params: PhysParams<T>,
    grid: Grid<T>,
    scheme: Scheme,
    nonlinear: NonlinearMode,
    cache: HashMap<u64, Arc<EtdCoefficients<T>>>,
}

const CACHE_LIMIT: usize = 16;

impl<T: Scalar> EtdStepper<T> {
    pub fn new(grid: &Grid<T>, params: &PhysParams<T>, scheme: Scheme, nonlinear: NonlinearMode) -> Self {
        Self { params: params.clone(), grid: grid.clone(), scheme, nonlinear, cache: HashMap::new() }
    }

    pub fn coefficients(&mut self, h: T) -> Arc<EtdCoefficients<T>> {
        let key = h.to_f64_lossy().to_bits();
        if let Some(c) = self.cache.get(&key) {
            return c.clone();
        }
        if self.cache.len() >= CACHE_LIMIT {
            self.cache.clear();
        }
        let c = Arc::new(EtdCoefficients::new(&self.grid, h, &self.params));
        self.cache.insert(key, c.clone());
        c
    }

    pub fn forcing(&self, u: &SpectralState<T>) -> Result<ForcingField<T>> {
        match self.nonlinear {
            NonlinearMode::Full => eval_F(u, &self.params),
            NonlinearMode::Disabled => {
                let mut f = ForcingField::zeros(u.grid());
                let phi = u.grid().from_spectral(u.phi())?;
                let lo = phi.iter().fold(T::infinity(), |a, &p| a.min(p));
                let hi = phi.iter().fold(T::zero(), |a, &p| a.max(p.abs()));
                f.min_density = T::one() + lo;
                f.max_abs_phi = hi;
                Ok(f)
            }
        }
    }

    /// One step of size `h`. `forcing`, if given, must be `F(u)`.
    pub fn step(&mut self, u: &SpectralState<T>, h: T, forcing: Option<ForcingField<T>>) -> Result<StepOutcome<T>> {
        if !(h > T::zero()) {
            return Err(NskError::InvalidStepper(format!("dt must be positive, got {h}")));
        }
        let coeffs = self.coefficients(h);
        let f0 = match forcing {
            Some(f) => f,
            None => self.forcing(u)?,
        };
        let f0_state = f0.to_state(&self.grid);
        let a = coeffs.combine(Some(u), &f0_state, 1);
        let (state, embedded_error) = match self.scheme {
            Scheme::Etd1 => (a, None),
            Scheme::EtdRk2 => {
                let fa = self.forcing(&a)?;
                let diff = fa.to_state(&self.grid).sub(&f0_state);
                let corr = coeffs.combine(None, &diff, 2);
                let err = corr.seminorm(0, Component::Both);
                (a.add(&corr), Some(err))
            }
        };
        if !state.is_finite() {
            return Err(NskError::NonFinite("state after step".into()));
        }
        Ok(StepOutcome { state, forcing: f0, embedded_error })
    }
}

/// One ETD step without caching.
pub fn etd_step<T: Scalar>(
    u: &SpectralState<T>,
    dt: T,
    params: &PhysParams<T>,
    scheme: Scheme,
) -> Result<SpectralState<T>> {
    let mut stepper = EtdStepper::new(u.grid(), params, scheme, NonlinearMode::Full);
    Ok(stepper.step(u, dt, None)?.state)
}

/// Observer invoked at every sample time with the state and `F(state)`.
pub trait Monitor<T: Scalar> {
    fn observe(&mut self, t: T, state: &SpectralState<T>, forcing: &ForcingField<T>) -> Result<()>;
}

impl<T: Scalar> Monitor<T> for () {
    fn observe(&mut self, _: T, _: &SpectralState<T>, _: &ForcingField<T>) -> Result<()> {
        Ok(())
    }
}

impl<T: Scalar, F> Monitor<T> for F
where
    F: FnMut(T, &SpectralState<T>, &ForcingField<T>) -> Result<()>,
{
    fn observe(&mut self, t: T, state: &SpectralState<T>, forcing: &ForcingField<T>) -> Result<()> {
        self(t, state, forcing)
    }
}

/// Why a run stopped.
#[derive(Debug, Clone, PartialEq)]
pub enum Termination {
    Completed,
    Vacuum(NskError),
    Blowup(NskError),
}

#[derive(Debug, Clone)]
pub struct Trajectory<T: Scalar> {
    /// Sample times, strictly increasing, starting at 0.
    pub times: Vec<T>,
    /// Stored states with their times.
    pub states: Vec<(T, SpectralState<T>)>,
    pub final_state: SpectralState<T>,
    pub final_time: T,
    pub steps: usize,
    pub rejected_steps: usize,
    pub termination: Termination,
}

impl<T: Scalar> Trajectory<T> {
    pub fn vacuum(&self) -> bool {
        matches!(self.termination, Termination::Vacuum(_))
    }

    pub fn blowup(&self) -> bool {
        matches!(self.termination, Termination::Blowup(_))
    }

    pub fn completed(&self) -> bool {
        self.termination == Termination::Completed
    }
}

/// Evolves `u0` to `cfg.t_end`, calling `monitor` at `t = 0` and every
/// `cfg.sample_interval`. Vacuum and blowup end the run early and are
/// recorded in [`Trajectory::termination`]; other errors propagate.
pub fn simulate<T: Scalar, M: Monitor<T>>(
    u0: &SpectralState<T>,
    cfg: &StepperConfig<T>,
    params: &PhysParams<T>,
    monitor: &mut M,
) -> Result<Trajectory<T>> {
    cfg.validate()?;
    let grid = u0.grid().clone();
    let mut stepper = EtdStepper::new(&grid, params, cfg.scheme, cfg.nonlinear);
    let initial_norm = u0.seminorm(0, Component::Both);
    let limit = initial_norm * T::lit(BLOWUP_FACTOR);

    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        final_state: u0.clone(),
        final_time: T::zero(),
        steps: 0,
        rejected_steps: 0,
        termination: Termination::Completed,
    };
    let n_samples = (cfg.t_end / cfg.sample_interval - T::lit(1e-9)).ceil().to_usize().unwrap_or(0);
    let sample_time = |i: usize| (cfg.sample_interval * T::lit(i as f64)).min(cfg.t_end);

    let mut u = u0.clone();
    let mut t = T::zero();
    let mut dt = cfg.dt;
    let mut pending: Option<ForcingField<T>> = None;
    let classify = |e: NskError| match e {
        NskError::VacuumApproach { .. } | NskError::DensityOutOfRange { .. } | NskError::AmplitudeTooLarge { .. } => {
            Ok(Termination::Vacuum(e))
        }
        NskError::Blowup { .. } | NskError::NonFinite(_) => Ok(Termination::Blowup(e)),
        other => Err(other),
    };

    for sample in 0..=n_samples {
        let target = sample_time(sample);
        // Advance to the sample time.
        while t < target {
            let remaining = target - t;
            let h = if cfg.adapt.is_some() {
                dt.min(remaining)
            } else {
                // Uniform substeps per interval keep the coefficient cache hot.
                let k = (remaining / cfg.dt - T::lit(1e-9)).ceil().max(T::one());
                remaining / k
            };
            let outcome = match stepper.step(&u, h, pending.take()) {
                Ok(o) => o,
                Err(e) => {
                    traj.termination = classify(e)?;
                    break;
                }
            };
            if outcome.forcing.max_abs_phi > cfg.amplitude_guard {
                traj.termination = Termination::Vacuum(NskError::AmplitudeTooLarge {
                    got: outcome.forcing.max_abs_phi.to_f64_lossy(),
                    limit: cfg.amplitude_guard.to_f64_lossy(),
                });
                break;
            }
            if let (Some(target_err), Some(err)) = (cfg.adapt, outcome.embedded_error) {
                let scale = u.seminorm(0, Component::Both).max(T::min_positive_value());
                let allowed = T::lit(target_err) * h * scale;
                if err > allowed && h > cfg.dt * T::lit(1e-6) {
                    dt = h / T::lit(2.0);
                    traj.rejected_steps += 1;
                    pending = Some(outcome.forcing);
                    continue;
                }
                if err < allowed / T::lit(8.0) && h >= dt {
                    dt = (dt * T::lit(2.0)).min(cfg.dt * T::lit(64.0));
                }
            }
            u = outcome.state;
            t = if remaining - h <= T::epsilon() * target.max(T::one()) { target } else { t + h };
            traj.steps += 1;
            let norm = u.seminorm(0, Component::Both);
            if initial_norm > T::zero() && norm > limit {
                traj.termination = Termination::Blowup(NskError::Blowup {
                    norm: norm.to_f64_lossy(),
                    limit: limit.to_f64_lossy(),
                });
                break;
            }
        }
        if traj.termination != Termination::Completed {
            break;
        }
        let f = match pending.take() {
            Some(f) => f,
            None => match stepper.forcing(&u) {
                Ok(f) => f,
                Err(e) => {
                    traj.termination = classify(e)?;
                    break;
                }
            },
        };
        monitor.observe(t, &u, &f)?;
        traj.times.push(t);
        if cfg.store_every > 0 && sample % cfg.store_every == 0 {
            traj.states.push((t, u.clone()));
        }
        pending = Some(f);
        if t >= cfg.t_end {
            break;
        }
    }
    traj.final_time = t;
    traj.final_state = u;
    Ok(traj)
}

/// Settings for [`picard_iterate`].
#[derive(Debug, Clone, PartialEq)]
pub struct PicardConfig<T> {
    pub horizon: T,
    /// Mesh spacing of the stored iterates.
    pub mesh_dt: T,
    pub k_max: usize,
    /// Stop once `d_k` falls below this.
    pub stop_below: f64,
    pub nonlinear: NonlinearMode,
}

/// Distance between consecutive iterates, `d_k = dist(u⁽ᵏ⁾, u⁽ᵏ⁻¹⁾)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PicardReport {
    /// `d_1, d_2, …`.
    pub distances: Vec<f64>,
    /// `d_{k+1}/d_k`.
    pub ratios: Vec<f64>,
    /// Three consecutive ratios above 1.
    pub non_contracting: bool,
    pub mesh: Vec<f64>,
}

/// Iterates `u⁽ᵏ⁾ = Γ[u⁽ᵏ⁻¹⁾]` starting from `u⁽⁰⁾ = S(t)u₀` on a uniform
/// mesh. On each mesh interval the Duhamel integral uses 3-point Gauss with
/// the exact propagator; the previous iterate at a Gauss node `t_j + c h` is
/// taken as `S(c h)u⁽ᵏ⁻¹⁾(t_j)`.
///
/// `distance(a, b)` receives the two iterates on the mesh and returns the
/// norm of their difference.
pub fn picard_iterate<T, D>(
    u0: &SpectralState<T>,
    cfg: &PicardConfig<T>,
    params: &PhysParams<T>,
    mut distance: D,
) -> Result<PicardReport>
where
    T: Scalar,
    D: FnMut(&[SpectralState<T>], &[SpectralState<T>]) -> f64,
{
    if !(cfg.horizon > T::zero() && cfg.mesh_dt > T::zero()) {
        return Err(NskError::InvalidStepper("horizon and mesh_dt must be positive".into()));
    }
    let grid = u0.grid().clone();
    let intervals = (cfg.horizon / cfg.mesh_dt - T::lit(1e-9)).ceil().to_usize().unwrap_or(1).max(1);
    let h = cfg.horizon / T::lit(intervals as f64);
    let (nodes, weights) = gauss_legendre_unit(3);
    let dim = grid.dim();
    let table = |tau: T| -> Vec<ModePropagator<T>> {
        (0..grid.len()).into_par_iter().map(|i| mode_propagator(grid.wavevector(i), dim, tau, params)).collect()
    };
    let apply = |tab: &[ModePropagator<T>], u: &SpectralState<T>| u.map_modes(|i, v| tab[i].apply(v));
    let full = table(h);
    let at_node: Vec<Vec<ModePropagator<T>>> = nodes.iter().map(|&c| table(T::lit(c) * h)).collect();
    let after_node: Vec<Vec<ModePropagator<T>>> = nodes.iter().map(|&c| table(T::lit(1.0 - c) * h)).collect();
    let forcing = |u: &SpectralState<T>| -> Result<SpectralState<T>> {
        match cfg.nonlinear {
            NonlinearMode::Full => Ok(eval_F(u, params)?.to_state(&grid)),
            NonlinearMode::Disabled => Ok(SpectralState::zeros(&grid)),
        }
    };

    // u⁽⁰⁾(t_j) = S(t_j)u₀
    let mut linear = Vec::with_capacity(intervals + 1);
    linear.push(u0.clone());
    for j in 0..intervals {
        let next = apply(&full, &linear[j]);
        linear.push(next);
    }
    let mut prev = linear.clone();
    let mut report = PicardReport {
        distances: Vec::new(),
        ratios: Vec::new(),
        non_contracting: false,
        mesh: (0..=intervals).map(|j| (h * T::lit(j as f64)).to_f64_lossy()).collect(),
    };
    let mut above_one = 0;
    for _ in 0..cfg.k_max {
        // I_{j+1} = S(h)I_j + h Σ w_g S((1-c_g)h) F(S(c_g h)u_j)
        let mut duhamel = SpectralState::zeros(&grid);
        let mut next = Vec::with_capacity(intervals + 1);
        next.push(u0.clone());
        for j in 0..intervals {
            let mut acc = apply(&full, &duhamel);
            for g in 0..nodes.len() {
                let f = forcing(&apply(&at_node[g], &prev[j]))?;
                let contrib = apply(&after_node[g], &f);
                acc = acc.add_scaled(h * T::lit(weights[g]), &contrib);
            }
            duhamel = acc;
            next.push(linear[j + 1].add(&duhamel));
        }
        let d = distance(&next, &prev);
        if let Some(&last) = report.distances.last() {
            let ratio = if last > 0.0 { d / last } else { 0.0 };
            report.ratios.push(ratio);
            above_one = if ratio > 1.0 { above_one + 1 } else { 0 };
            if above_one >= 3 {
                report.non_contracting = true;
            }
        }
        report.distances.push(d);
        prev = next;
        if d < cfg.stop_below || report.non_contracting {
            break;
        }
    }
    Ok(report)
}
