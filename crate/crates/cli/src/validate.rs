//! The `validate` command: oracle and property suites on the configured
//! parameters.

use std::path::Path;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use nsk_core::analysis::decay::log_times;
use nsk_core::analysis::{energy_functional, k12_bound_check};
use nsk_core::initial::random_state;
use nsk_core::oracle::rk4_mode;
use nsk_core::{apply_semigroup, korteweg_divergence, Component, Grid, PhysParams, SpectralState};

use crate::config::ExperimentConfig;
use crate::error::CliResult;
use crate::output::{out_path, write_json};
use crate::run::{constants_json, labels_json, RunStatus};

type C = Complex<f64>;

/// Grid size per axis for the RK4 comparison.
const RK4_MODES: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub pass: bool,
    pub value: f64,
    pub tolerance: f64,
}

impl SuiteResult {
    fn below(name: &'static str, value: f64, tolerance: f64) -> Self {
        Self { name, pass: value < tolerance, value, tolerance }
    }

    fn to_json(&self) -> Value {
        json!({ "name": self.name, "pass": self.pass, "value": self.value, "tolerance": self.tolerance })
    }
}

fn rel_diff(a: &SpectralState<f64>, b: &SpectralState<f64>) -> f64 {
    let scale = b.seminorm(0, Component::Both);
    let d = a.sub(b).seminorm(0, Component::Both);
    if scale > 0.0 {
        d / scale
    } else {
        d
    }
}

/// Hermitian pairs of random coefficients on dealiased modes.
fn sparse_state(grid: &Grid<f64>, rng: &mut ChaCha8Rng, pairs: usize) -> SpectralState<f64> {
    let mut u = SpectralState::zeros(grid);
    let reach = (grid.modes_per_axis() as i64 - 1) / 3;
    for _ in 0..pairs {
        let mut l = [0i64; 3];
        for v in l.iter_mut().take(grid.dim()) {
            *v = rng.gen_range(-reach..=reach);
        }
        let i = grid.flat_index(l);
        let j = grid.conjugate_index(i);
        let mut vals = [C::new(0.0, 0.0); 4];
        for v in vals.iter_mut().take(grid.dim() + 1) {
            *v = C::new(rng.gen_range(-1.0..1.0), if i == j { 0.0 } else { rng.gen_range(-1.0..1.0) });
        }
        for (c, &a) in vals.iter().enumerate().take(grid.dim() + 1) {
            let b = a.conj();
            let target = if c == 0 { u.phi_mut() } else { &mut u.momentum_mut()[c - 1][..] };
            target[i] = a;
            target[j] = b;
        }
    }
    u
}

fn semigroup_suites(cfg: &ExperimentConfig, params: &PhysParams<f64>, rng: &mut ChaCha8Rng) -> CliResult<[SuiteResult; 2]> {
    let grid = Grid::new(cfg.grid.dim, cfg.grid.modes.min(RK4_MODES), cfg.grid.length)?;
    let coef = params.nu() + params.nu_tilde().abs() + params.kappa().sqrt();
    let (mut rk4_err, mut comp_err) = (0.0f64, 0.0f64);
    for n in 0..cfg.validate.tuples {
        let t = rng.gen_range(0.05..1.5);
        let u = sparse_state(&grid, rng, 16);
        let exact = apply_semigroup(&u, t, params);
        let mut reference = SpectralState::zeros(&grid);
        for i in 0..grid.len() {
            let mode = u.mode(i);
            if mode.iter().all(|c| c.norm() == 0.0) {
                continue;
            }
            let xi = &grid.wavevector(i)[..grid.dim()];
            let q: f64 = xi.iter().map(|x| x * x).sum();
            let dt = if q > 0.0 { (1e-4 * t).min(0.1 / (coef * q)) } else { 1e-4 * t };
            let v = rk4_mode(xi, &mode[..=grid.dim()], t, dt, params)?;
            let mut out = [C::new(0.0, 0.0); 4];
            out[..v.len()].copy_from_slice(&v);
            reference.set_mode(i, out);
        }
        rk4_err = rk4_err.max(rel_diff(&exact, &reference));

        let s = rng.gen_range(0.05..1.5);
        let dense = random_state(&grid, cfg.seed.wrapping_add(n as u64), 4.0, 1.0, 1.0);
        let composed = apply_semigroup(&apply_semigroup(&dense, t, params), s, params);
        comp_err = comp_err.max(rel_diff(&composed, &apply_semigroup(&dense, t + s, params)));
    }
    Ok([
        SuiteResult::below("semigroup_vs_rk4", rk4_err, cfg.validate.rk4_tol),
        SuiteResult::below("composition_law", comp_err, cfg.validate.composition_tol),
    ])
}

fn korteweg_suite(cfg: &ExperimentConfig, params: &PhysParams<f64>) -> CliResult<SuiteResult> {
    let grid = Grid::new(cfg.grid.dim, cfg.grid.modes.min(RK4_MODES), cfg.grid.length)?;
    let kappa = params.kappa();
    let phi_hat = random_state(&grid, cfg.seed, 3.0, 0.1, 0.0).phi().to_vec();
    let lhs = korteweg_divergence(&grid, &phi_hat, kappa);
    let phi = grid.from_spectral(&phi_hat)?;
    let (mut err, mut scale) = (0.0, 0.0);
    for (j, lhs_j) in lhs.iter().enumerate() {
        let spec: Vec<C> = (0..grid.len())
            .map(|i| phi_hat[i] * C::new(0.0, -grid.wavevector(i)[j] * grid.wavenumber_sq(i)))
            .collect();
        let d = grid.from_spectral(&spec)?;
        let prod: Vec<f64> = phi.iter().zip(&d).map(|(a, b)| kappa * a * b).collect();
        let rhs = grid.to_spectral(&prod)?;
        for i in 0..grid.len() {
            let r = if grid.dealias_keep(i) { rhs[i] } else { C::new(0.0, 0.0) };
            err += (lhs_j[i] - r).norm_sqr();
            scale += r.norm_sqr();
        }
    }
    let value = if scale > 0.0 { (err / scale).sqrt() } else { err.sqrt() };
    Ok(SuiteResult::below("korteweg_identity", value, cfg.validate.korteweg_tol))
}

/// Largest relative excess over the projection bounds; passes when it is at
/// most the configured slack.
fn projection_suite(cfg: &ExperimentConfig) -> CliResult<SuiteResult> {
    let cutoff = cfg.cutoff()?;
    let grid = cutoff.grid().clone();
    let (r1, r_inf) = (cfg.cutoff.r1, cfg.cutoff.r_inf);
    let mut excess = f64::NEG_INFINITY;
    for n in 0..cfg.validate.projection_fields {
        let f = random_state(&grid, cfg.seed.wrapping_add(1000 + n as u64), 50.0, 1.0, 1.0);
        let low = cutoff.project_low(&f);
        let high = cutoff.project_high(&f);
        let norm = f.seminorm(0, Component::Both);
        for k in 0..=3u32 {
            let bound = r_inf.powi(k as i32) * norm;
            excess = excess.max(low.seminorm(k, Component::Both) / bound - 1.0);
        }
        let bound = f.seminorm(1, Component::Both) / r1;
        excess = excess.max(high.seminorm(0, Component::Both) / bound - 1.0);
        excess = excess.max(rel_diff(&low.add(&high), &f) - 1e-14 - 1.0);
    }
    let slack = cfg.validate.projection_slack;
    Ok(SuiteResult { name: "projection_bounds", pass: excess <= slack, value: excess, tolerance: slack })
}

/// Largest relative increase of `E` along linear high-frequency runs.
fn energy_suite(cfg: &ExperimentConfig, params: &PhysParams<f64>) -> CliResult<SuiteResult> {
    let w = cfg.weights()?;
    let cutoff = cfg.cutoff()?;
    let grid = cutoff.grid().clone();
    let mut worst = f64::NEG_INFINITY;
    for n in 0..cfg.validate.energy_runs {
        let mut u = cutoff.project_high(&random_state(&grid, cfg.seed.wrapping_add(2000 + n as u64), 4.0, 1.0, 1.0));
        let mut prev = energy_functional(&u, &w).0;
        for _ in 0..50 {
            u = apply_semigroup(&u, 2e-3, params);
            let e = energy_functional(&u, &w).0;
            worst = worst.max((e - prev) / prev.abs().max(f64::MIN_POSITIVE));
            prev = e;
        }
    }
    let slack = cfg.validate.energy_slack;
    Ok(SuiteResult { name: "energy_monotonicity", pass: worst <= slack, value: worst, tolerance: slack })
}

fn k12_suite(cfg: &ExperimentConfig, params: &PhysParams<f64>) -> CliResult<SuiteResult> {
    let [a, b] = cfg.analysis.k12_window;
    let r = k12_bound_check(&log_times(a, b, cfg.analysis.samples), params, cfg.grid.dim, cfg.analysis.k12_support, cfg.validate.k12_slack)?;
    Ok(SuiteResult { name: "k12_bound", pass: r.pass, value: r.exponent, tolerance: r.target + r.slack })
}

pub fn run_validate(cfg: &ExperimentConfig, out: &Path) -> CliResult<RunStatus> {
    let params = cfg.params()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut suites: Vec<SuiteResult> = semigroup_suites(cfg, &params, &mut rng)?.into();
    suites.push(korteweg_suite(cfg, &params)?);
    suites.push(projection_suite(cfg)?);
    suites.push(energy_suite(cfg, &params)?);
    suites.push(k12_suite(cfg, &params)?);
    let pass = suites.iter().all(|s| s.pass);
    let w = cfg.weights()?;
    let summary = json!({
        "command": "validate",
        "pass": pass,
        "suites": suites.iter().map(SuiteResult::to_json).collect::<Vec<_>>(),
        "labels": labels_json(&w, cfg)?,
        "constants": constants_json(&w, cfg),
        "config": cfg.to_json(),
    });
    write_json(&out_path(out, "validate.json"), &summary)?;
    Ok(RunStatus { pass, summary })
}
