//! The `simulate`, `picard`, `linear-decay` and `report` commands.

use std::path::Path;

use num_complex::Complex;
use serde_json::{json, Value};

use nsk_core::analysis::decay::{decay_fit, log_times};
use nsk_core::analysis::{energy_inequality_check, k12_bound_check, z_norm, EnergyWeights, NormMonitor, ZSample};
use nsk_core::initial::{periodic_gaussian, random_state, scale_to_size};
use nsk_core::oracle::{radial_linear_norm, RadialProfile};
use nsk_core::{picard_iterate, simulate, Grid, NonlinearMode, PicardConfig, SpectralState, Termination};

use crate::config::{ExperimentConfig, Profile};
use crate::error::{CliError, CliResult};
use crate::output::{out_path, write_csv, write_json};

type C = Complex<f64>;

/// CSV header of the simulation time series.
pub const SIMULATE_HEADER: [&str; 9] =
    ["t", "l2_u", "h1_u", "l2_phi_low", "l2_m_low", "e_high", "d_high", "f_norm", "znorm_partial"];
pub const LINEAR_DECAY_HEADER: [&str; 3] = ["t", "norm_k0", "norm_k1"];
pub const PICARD_HEADER: [&str; 3] = ["k", "d_k", "ratio"];

/// What a command reports back to `main`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunStatus {
    pub pass: bool,
    pub summary: Value,
}

pub fn constants_json(w: &EnergyWeights, cfg: &ExperimentConfig) -> Value {
    json!({
        "s": w.s,
        "kappa1": w.kappa1,
        "c2": w.c2,
        "c3": w.c3,
        "d1": w.d1(),
        "C2": cfg.analysis.c2,
        "c_apriori": w.c_apriori(),
        "equivalence_constant": w.equivalence_constant(cfg.cutoff.r1),
    })
}

/// Flags for runs outside the setting of the small-data decay theorem.
pub fn labels_json(w: &EnergyWeights, cfg: &ExperimentConfig) -> CliResult<Value> {
    Ok(json!({
        "outside_hypotheses": cfg.grid.dim < 3,
        "below_regularity": w.below_regularity(cfg.grid.dim),
        "noncritical_pressure": !cfg.pressure()?.is_critical(),
    }))
}

/// Momentum field `β f e₁`, or `∂₁(β f e₁)` in derivative form.
fn momentum_from_profile(grid: &Grid<f64>, f_hat: &[C], beta: f64, derivative: bool) -> Vec<Vec<C>> {
    let mut m = vec![vec![C::new(0.0, 0.0); grid.len()]; grid.dim()];
    for (i, c) in f_hat.iter().enumerate() {
        m[0][i] = if derivative { c * C::new(0.0, grid.wavevector(i)[0] * beta) } else { c * beta };
    }
    m
}

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct FileState {
    phi: Vec<f64>,
    m: Vec<Vec<f64>>,
}

/// Initial state from the `[initial]` section. The derivative-form flag
/// applies to the Gaussian and single-mode profiles.
pub fn initial_state(cfg: &ExperimentConfig) -> CliResult<SpectralState<f64>> {
    let grid = cfg.grid()?;
    let init = &cfg.initial;
    let eps = init.amplitude;
    let beta = init.m_amplitude.unwrap_or(eps);
    let u = match init.profile {
        Profile::Gaussian | Profile::Mode => {
            let samples: Vec<f64> = if init.profile == Profile::Gaussian {
                periodic_gaussian(&grid, init.width)
            } else {
                let base = grid.fundamental();
                (0..grid.len())
                    .map(|i| {
                        let x = grid.coordinates(i);
                        let phase: f64 = (0..grid.dim()).map(|a| base * init.mode[a] as f64 * x[a]).sum();
                        phase.cos()
                    })
                    .collect()
            };
            let f_hat = grid.to_spectral(&samples)?;
            let phi = f_hat.iter().map(|c| c * eps).collect();
            let m = momentum_from_profile(&grid, &f_hat, beta, init.derivative_form);
            SpectralState::from_coefficients(&grid, phi, m)?
        }
        Profile::Random => random_state(&grid, cfg.seed, init.band, eps, beta),
        Profile::File => {
            let path = init.path.as_ref().expect("checked by validate");
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            let data: FileState = serde_json::from_str(&text)?;
            SpectralState::from_physical(&grid, &data.phi, &data.m)?
        }
    };
    match init.data_size {
        Some(target) => Ok(scale_to_size(&u, cfg.analysis.s, target)?),
        None => Ok(u),
    }
}

fn termination_json(t: &Termination) -> Value {
    match t {
        Termination::Completed => json!({ "kind": "completed" }),
        Termination::Vacuum(e) => json!({ "kind": "vacuum", "reason": e.to_string() }),
        Termination::Blowup(e) => json!({ "kind": "blowup", "reason": e.to_string() }),
    }
}

pub fn run_simulate(cfg: &ExperimentConfig, out: &Path) -> CliResult<RunStatus> {
    let params = cfg.params()?;
    let w = cfg.weights()?;
    let u0 = initial_state(cfg)?;
    let mut monitor = NormMonitor::new(cfg.cutoff()?, w.clone(), cfg.analysis.c2);
    let traj = simulate(&u0, &cfg.stepper(), &params, &mut monitor)?;
    let recs = &monitor.records;
    let rows: Vec<[f64; 9]> = recs
        .iter()
        .map(|r| [r.t, r.l2_u, r.h1_u, r.l2_phi_low, r.l2_m_low, r.e_high, r.d_high, r.f_norm, r.znorm_partial])
        .collect();
    write_csv(&out_path(out, "simulate.csv"), &SIMULATE_HEADER, &rows)?;

    let energy = energy_inequality_check(&monitor.energy_samples(), &w, cfg.analysis.energy_factor);
    let zs: Vec<ZSample> = recs.iter().map(|r| r.z).collect();
    let (dim, c2) = (cfg.grid.dim, cfg.analysis.c2);
    let z = z_norm(&zs, dim, c2);
    let c2_sensitivity: Vec<Value> = [0.1, 10.0]
        .iter()
        .map(|f| json!({ "C2": f * c2, "total": z_norm(&zs, dim, f * c2).total }))
        .collect();
    let half: Vec<ZSample> = zs.iter().step_by(2).copied().collect();
    let z_half = z_norm(&half, dim, c2);
    let mass_drift = recs.iter().map(|r| (r.mass - recs[0].mass).abs()).fold(0.0, f64::max);
    let momentum_drift = traj
        .final_state
        .total_momentum()
        .iter()
        .zip(u0.total_momentum())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    let completed = traj.completed();
    let summary = json!({
        "command": "simulate",
        "termination": termination_json(&traj.termination),
        "final_time": traj.final_time,
        "steps": traj.steps,
        "rejected_steps": traj.rejected_steps,
        "samples": recs.len(),
        "energy": {
            "steps": energy.steps,
            "violations": energy.violations,
            "violation_fraction": energy.violation_fraction,
            "d_used": energy.d_used,
            "c_fit": energy.c_fit,
            "c_allowed": energy.c_allowed,
            "d_empirical": energy.d_empirical,
            "pass": energy.pass,
        },
        "znorm": {
            "components": z.components,
            "total": z.total,
            "c2_sensitivity": c2_sensitivity,
            "half_mesh_total": z_half.total,
        },
        "mass_drift": mass_drift,
        "momentum_drift": momentum_drift,
        "labels": labels_json(&w, cfg)?,
        "pass": completed,
        "constants": constants_json(&w, cfg),
        "config": cfg.to_json(),
    });
    write_json(&out_path(out, "simulate.json"), &summary)?;
    Ok(RunStatus { pass: completed, summary })
}

pub fn run_picard(cfg: &ExperimentConfig, out: &Path) -> CliResult<RunStatus> {
    let params = cfg.params()?;
    let w = cfg.weights()?;
    let s = cfg.analysis.s;
    let pc = &cfg.picard;
    let u0 = scale_to_size(&initial_state(cfg)?, s, pc.data_size)?;
    let cutoff = cfg.cutoff()?;
    let pcfg = PicardConfig {
        horizon: pc.horizon,
        mesh_dt: pc.mesh_dt,
        k_max: pc.k_max,
        stop_below: pc.stop_below,
        nonlinear: NonlinearMode::Full,
    };
    let (dim, c2) = (cfg.grid.dim, cfg.analysis.c2);
    let mut mesh: Vec<f64> = Vec::new();
    let report = picard_iterate(&u0, &pcfg, &params, |a, b| {
        if mesh.len() != a.len() {
            let h = pc.horizon / (a.len() - 1) as f64;
            mesh = (0..a.len()).map(|j| h * j as f64).collect();
        }
        let samples: Vec<ZSample> =
            a.iter().zip(b).zip(&mesh).map(|((x, y), &t)| ZSample::from_state(t, &x.sub(y), &cutoff, s)).collect();
        z_norm(&samples, dim, c2).total
    })?;
    let rows: Vec<(usize, f64, Option<f64>)> = report
        .distances
        .iter()
        .enumerate()
        .map(|(k, &d)| (k + 1, d, if k == 0 { None } else { Some(report.ratios[k - 1]) }))
        .collect();
    write_csv(&out_path(out, "picard.csv"), &PICARD_HEADER, &rows)?;
    let max_ratio = report.ratios.iter().cloned().fold(0.0, f64::max);
    let converged = report.distances.last().is_some_and(|&d| d < pc.stop_below);
    let pass = converged && !report.non_contracting && max_ratio <= 0.5;
    let summary = json!({
        "command": "picard",
        "distances": report.distances,
        "ratios": report.ratios,
        "max_ratio": max_ratio,
        "converged": converged,
        "non_contracting": report.non_contracting,
        "mesh_points": report.mesh.len(),
        "pass": pass,
        "labels": labels_json(&w, cfg)?,
        "constants": constants_json(&w, cfg),
        "config": cfg.to_json(),
    });
    write_json(&out_path(out, "picard.json"), &summary)?;
    Ok(RunStatus { pass, summary })
}

pub fn run_linear_decay(cfg: &ExperimentConfig, out: &Path) -> CliResult<RunStatus> {
    let params = cfg.params()?;
    let w = cfg.weights()?;
    let dim = cfg.grid.dim;
    let window = cfg.decay_window();
    let times = log_times(window.t_a, window.t_b, cfg.analysis.samples);
    let profile = RadialProfile {
        phi_amp: cfg.initial.amplitude.max(f64::MIN_POSITIVE),
        m_amp: cfg.initial.m_amplitude.unwrap_or(cfg.initial.amplitude),
    };
    let mut norms = [Vec::new(), Vec::new()];
    for &t in &times {
        for (k, n) in norms.iter_mut().enumerate() {
            n.push(radial_linear_norm(t, k as u32, &profile, &params, dim)?);
        }
    }
    let rows: Vec<[f64; 3]> = times.iter().enumerate().map(|(i, &t)| [t, norms[0][i], norms[1][i]]).collect();
    write_csv(&out_path(out, "linear_decay.csv"), &LINEAR_DECAY_HEADER, &rows)?;

    let tol = cfg.analysis.decay_tol;
    let fit0 = decay_fit(&times, &norms[0], 0, dim, window, tol)?;
    let fit1 = decay_fit(&times, &norms[1], 1, dim, window, tol)?;
    let [k_a, k_b] = cfg.analysis.k12_window;
    let k12 = k12_bound_check(&log_times(k_a, k_b, cfg.analysis.samples), &params, dim, cfg.analysis.k12_support, cfg.validate.k12_slack)?;
    let pass = fit0.pass && fit1.pass;
    let summary = json!({
        "command": "linear-decay",
        "exponent_k0": fit0.exponent,
        "exponent_k1": fit1.exponent,
        "target_k0": fit0.target,
        "target_k1": fit1.target,
        "half_width_k0": fit0.half_width,
        "half_width_k1": fit1.half_width,
        "tol": tol,
        "pass": pass,
        "window": [window.t_a, window.t_b],
        "k12": { "exponent": k12.exponent, "target": k12.target, "slack": k12.slack, "pass": k12.pass },
        "labels": labels_json(&w, cfg)?,
        "constants": constants_json(&w, cfg),
        "config": cfg.to_json(),
    });
    write_json(&out_path(out, "linear_decay.json"), &summary)?;
    Ok(RunStatus { pass, summary })
}

/// Summary files `report` looks for, in order.
pub const SUMMARY_FILES: [&str; 4] = ["validate.json", "linear_decay.json", "simulate.json", "picard.json"];

/// Collects the summaries present in `out` into `report.json`, without the
/// embedded configs. Passes iff every collected summary passed.
pub fn run_report(out: &Path) -> CliResult<RunStatus> {
    let mut runs = serde_json::Map::new();
    let mut pass = true;
    for name in SUMMARY_FILES {
        let path = out.join(name);
        if !path.exists() {
            continue;
        }
        let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
        let mut v: Value = serde_json::from_str(&text)?;
        pass &= v.get("pass").and_then(Value::as_bool).unwrap_or(false);
        if let Some(obj) = v.as_object_mut() {
            obj.remove("config");
        }
        runs.insert(name.trim_end_matches(".json").to_string(), v);
    }
    if runs.is_empty() {
        return Err(CliError::Config(format!("no summaries found in {}", out.display())));
    }
    let summary = json!({ "command": "report", "pass": pass, "runs": runs });
    write_json(&out.join("report.json"), &summary)?;
    Ok(RunStatus { pass, summary })
}
