//! Quantitative acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nsk_core::analysis::decay::{decay_fit, log_times, DecayWindow};
use nsk_core::analysis::{energy_functional, energy_inequality_check, k12_bound_check, z_norm, EnergySample};
use nsk_core::analysis::{EnergyWeights, NormMonitor, ZSample};
use nsk_core::initial::{gaussian_state, random_state, scale_to_size};
use nsk_core::oracle::{dense_propagator, direct_nonlinearity, radial_linear_norm, rk4_mode, RadialProfile};
use nsk_core::{
    apply_semigroup, eval_F, korteweg_divergence, make_cutoff, mode_propagator, picard_iterate, simulate, Component,
    Grid, NonlinearMode, PhysParams, PicardConfig, PressureModel, SpectralState, StepperConfig,
};

type C = Complex<f64>;

type Check = (&'static str, Duration, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn criterion(name: &str, limit: Duration, run: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = run();
    let elapsed = start.elapsed();
    let pass = out.pass && elapsed <= limit;
    println!(
        "{} {name}: {} [{:.1}s, limit {}s]",
        if pass { "PASS" } else { "FAIL" },
        out.detail,
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    pass
}

fn rel_diff(a: &SpectralState<f64>, b: &SpectralState<f64>) -> f64 {
    a.sub(b).seminorm(0, Component::Both) / b.seminorm(0, Component::Both)
}

fn quadratic(nu: f64, nu_tilde: f64, kappa: f64) -> PhysParams<f64> {
    PhysParams::new(nu, nu_tilde, kappa, PressureModel::critical_quadratic(1.0)).unwrap()
}

/// Random state on a few Hermitian pairs of dealiased modes.
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
        u.phi_mut()[i] = vals[0];
        u.phi_mut()[j] = vals[0].conj();
        for c in 0..grid.dim() {
            u.momentum_mut()[c][i] = vals[1 + c];
            u.momentum_mut()[c][j] = vals[1 + c].conj();
        }
    }
    u
}

fn semigroup_correctness() -> Outcome {
    let grid = Grid::new(3, 16, 2.0 * PI).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let (mut worst_rk4, mut worst_comp, mut near_critical) = (0.0f64, 0.0f64, 0);
    for tuple in 0..20 {
        let nu = rng.gen_range(0.3..2.0);
        let nu_tilde = rng.gen_range(-0.2 * nu..1.5);
        let a = 0.5 * (nu + nu_tilde);
        let kappa = if tuple % 4 == 0 {
            near_critical += 1;
            a * a * (1.0 + rng.gen_range(-1e-7..1e-7))
        } else {
            rng.gen_range(0.2..3.0)
        };
        let params = quadratic(nu, nu_tilde, kappa);
        let t = rng.gen_range(0.05..1.5);
        let u = sparse_state(&grid, &mut rng, 24);
        let exact = apply_semigroup(&u, t, &params);
        let mut reference = SpectralState::zeros(&grid);
        let coef = nu + nu_tilde.abs() + kappa.sqrt();
        for i in 0..grid.len() {
            let mode = u.mode(i);
            if mode.iter().all(|c| c.norm() == 0.0) {
                continue;
            }
            let xi = &grid.wavevector(i)[..3];
            let q: f64 = xi.iter().map(|x| x * x).sum();
            let dt = if q > 0.0 { (1e-4 * t).min(0.1 / (coef * q)) } else { 1e-4 * t };
            let v = rk4_mode(xi, &mode, t, dt, &params).unwrap();
            let mut out = [C::new(0.0, 0.0); 4];
            out.copy_from_slice(&v);
            reference.set_mode(i, out);
        }
        worst_rk4 = worst_rk4.max(rel_diff(&exact, &reference));

        let s = rng.gen_range(0.05..1.5);
        let dense = random_state(&grid, 100 + tuple as u64, 4.0, 1.0, 1.0);
        let composed = apply_semigroup(&apply_semigroup(&dense, t, &params), s, &params);
        worst_comp = worst_comp.max(rel_diff(&composed, &apply_semigroup(&dense, t + s, &params)));
    }
    Outcome {
        pass: worst_rk4 < 1e-8 && worst_comp < 1e-10 && near_critical >= 1,
        detail: format!(
            "max rel err vs rk4 {worst_rk4:.2e} (< 1e-8), composition {worst_comp:.2e} (< 1e-10), \
             {near_critical} tuples with |K-1| < 1e-6"
        ),
    }
}

fn critical_regime_continuity() -> Outcome {
    let xi = [0.7, -1.1, 0.4];
    let t = 0.8;
    let blocks = |kappa: f64| mode_propagator(xi, 3, t, &quadratic(1.0, 1.0, kappa)).to_dense();
    let dist = |a: &[Vec<C>], b: &[Vec<C>]| {
        a.iter().zip(b).flat_map(|(r, s)| r.iter().zip(s).map(|(x, y)| (x - y).norm())).fold(0.0f64, f64::max)
    };
    // Fine sweep through κ = A² = 1: a discontinuity shows up in the second difference.
    let n = 4001;
    let mats: Vec<_> = (0..n).map(|i| blocks(1.0 + 2e-6 * (i as f64 / (n - 1) as f64 - 0.5))).collect();
    let zero = vec![vec![C::new(0.0, 0.0); 4]; 4];
    let mut jump = 0.0f64;
    for w in mats.windows(3) {
        let second: Vec<Vec<C>> =
            (0..4).map(|r| (0..4).map(|c| w[0][r][c] - w[1][r][c] * 2.0 + w[2][r][c]).collect()).collect();
        jump = jump.max(dist(&second, &zero));
    }
    // Both sides of the double root against the dense exponential.
    let mut worst = dist(&blocks(1.0), &dense_propagator(&xi, t, &quadratic(1.0, 1.0, 1.0)));
    for e in -12..=-1 {
        for sign in [-1.0, 1.0] {
            let kappa = 1.0 + sign * 10f64.powi(e);
            worst = worst.max(dist(&blocks(kappa), &dense_propagator(&xi, t, &quadratic(1.0, 1.0, kappa))));
        }
    }
    Outcome {
        pass: jump < 1e-8 && worst < 1e-8,
        detail: format!("max jump {jump:.2e} (< 1e-8), max deviation from dense exponential {worst:.2e}"),
    }
}

fn linear_decay() -> Outcome {
    let params = PhysParams::unit_critical();
    let times = log_times(1e2, 1e4, 40);
    let window = DecayWindow { t_a: 1e2, t_b: 1e4 };
    let mut detail = Vec::new();
    let mut pass = true;
    for k in [0u32, 1] {
        let norms: Vec<f64> =
            times.iter().map(|&t| radial_linear_norm(t, k, &RadialProfile::default(), &params, 3).unwrap()).collect();
        let fit = decay_fit(&times, &norms, k, 3, window, 0.03).unwrap();
        pass &= fit.pass;
        detail.push(format!("k={k}: {:.4} (target {:.2} +- 0.03)", fit.exponent, fit.target));
    }
    Outcome { pass, detail: detail.join(", ") }
}

fn k12_bound() -> Outcome {
    let times = log_times(10.0, 1e4, 40);
    let r = k12_bound_check(&times, &PhysParams::unit_critical(), 3, 1.0, 0.03).unwrap();
    Outcome { pass: r.pass, detail: format!("exponent {:.4} (<= {:.2} + 0.03)", r.exponent, r.target) }
}

fn energy_estimate() -> Outcome {
    let params = PhysParams::unit_critical();
    let w = EnergyWeights::new(2, &params);

    // Linear high-frequency runs.
    let grid = Grid::new(3, 16, 2.0 * PI).unwrap();
    let cutoff = make_cutoff(&grid, 2.0, 4.0).unwrap();
    let (mut increases, mut linear_violations) = (0, 0);
    for seed in 0..50 {
        let mut u = cutoff.project_high(&random_state(&grid, 500 + seed, 4.0, 1.0, 1.0));
        let dt = 1e-3;
        let mut samples = Vec::new();
        for i in 0..=200 {
            let (e, d) = energy_functional(&u, &w);
            samples.push(EnergySample { t: i as f64 * dt, e, d, f_sq: 0.0 });
            u = apply_semigroup(&u, dt, &params);
        }
        increases += samples.windows(2).filter(|p| p[1].e > p[0].e).count();
        linear_violations += energy_inequality_check(&samples, &w, 10.0).violations;
    }

    // Nonlinear small-data run.
    let grid = Grid::new(3, 32, 2.0 * PI).unwrap();
    let cutoff = make_cutoff(&grid, 2.0, 4.0).unwrap();
    let u0 = random_state(&grid, 7, 3.0, 1e-2, 1e-2);
    let mut cfg = StepperConfig::new(0.005, 2.0);
    cfg.sample_interval = 0.005;
    let mut monitor = NormMonitor::new(cutoff, w.clone(), 1.0);
    let traj = simulate(&u0, &cfg, &params, &mut monitor).unwrap();
    let report = energy_inequality_check(&monitor.energy_samples(), &w, 10.0);
    Outcome {
        pass: increases == 0 && linear_violations == 0 && traj.completed() && report.pass,
        detail: format!(
            "linear: {increases} increases, {linear_violations} violations over 50 runs; nonlinear: {} of {} steps \
             violate, C_fit {:.3e} vs 10*C_apriori {:.1}",
            report.violations, report.steps, report.c_fit, report.c_allowed
        ),
    }
}

fn projection_bounds() -> Outcome {
    let grid = Grid::new(3, 16, 2.0 * PI).unwrap();
    let (r1, r_inf) = (2.0, 4.0);
    let cutoff = make_cutoff(&grid, r1, r_inf).unwrap();
    let (mut failures, mut partition) = (0, 0.0f64);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for seed in 0..100 {
        let mut f = random_state(&grid, 900 + seed, 50.0, 1.0, 1.0);
        f.phi_mut()[0] = C::new(rng.gen_range(-1.0..1.0), 0.0);
        let low = cutoff.project_low(&f);
        let high = cutoff.project_high(&f);
        let norm = f.seminorm(0, Component::Both);
        for k in 0..=3 {
            if low.seminorm(k, Component::Both) > r_inf.powi(k as i32) * norm * (1.0 + 1e-12) {
                failures += 1;
            }
        }
        if high.seminorm(0, Component::Both) > f.seminorm(1, Component::Both) / r1 * (1.0 + 1e-12) {
            failures += 1;
        }
        partition = partition.max(rel_diff(&low.add(&high), &f));
    }
    Outcome {
        pass: failures == 0 && partition < 1e-14,
        detail: format!("{failures} bound failures on 100 fields, partition error {partition:.2e} (< 1e-14)"),
    }
}

fn nonlinearity_correctness() -> Outcome {
    let grid = Grid::new(3, 8, 2.0 * PI).unwrap();
    let laws = [
        PhysParams::unit_critical(),
        PhysParams::new(0.8, 0.3, 1.7, PressureModel::van_der_waals_critical(1.0, 0.3).unwrap()).unwrap(),
    ];
    let (mut worst, mut mean_mode) = (0.0f64, 0.0f64);
    for (n, params) in laws.iter().enumerate() {
        for seed in 0..4 {
            let mut u = random_state(&grid, 40 + seed + 10 * n as u64, 3.0, 0.015, 0.05);
            u.phi_mut()[0] = C::new(0.005 * (2.0 * PI).powi(3), 0.0);
            let prod = eval_F(&u, params).unwrap().to_state(&grid);
            let oracle = direct_nonlinearity(&u, params).unwrap();
            let oracle = SpectralState::from_coefficients(&grid, vec![C::new(0.0, 0.0); grid.len()], oracle).unwrap();
            worst = worst.max(rel_diff(&prod, &oracle));
            let scale = prod.momentum().iter().flatten().fold(0.0f64, |a, c| a.max(c.norm()));
            mean_mode = mean_mode.max(prod.total_momentum().iter().map(|c| c.norm()).fold(0.0, f64::max) / scale);
        }
    }

    // div Φ(φ) = κφ∇Δφ, both sides truncated.
    let grid = Grid::new(3, 16, 2.0 * PI).unwrap();
    let kappa = 1.3;
    let phi_hat = random_state(&grid, 77, 3.0, 0.1, 0.0).phi().to_vec();
    let lhs = korteweg_divergence(&grid, &phi_hat, kappa);
    let phi = grid.from_spectral(&phi_hat).unwrap();
    let (mut err, mut scale) = (0.0f64, 0.0f64);
    for (j, lhs_j) in lhs.iter().enumerate() {
        let spec: Vec<C> = (0..grid.len())
            .map(|i| phi_hat[i] * C::new(0.0, -grid.wavevector(i)[j] * grid.wavenumber_sq(i)))
            .collect();
        let d = grid.from_spectral(&spec).unwrap();
        let prod: Vec<f64> = phi.iter().zip(&d).map(|(a, b)| kappa * a * b).collect();
        let rhs = grid.to_spectral(&prod).unwrap();
        for i in 0..grid.len() {
            let r = if grid.dealias_keep(i) { rhs[i] } else { C::new(0.0, 0.0) };
            err += (lhs_j[i] - r).norm_sqr();
            scale += r.norm_sqr();
        }
    }
    let identity = (err / scale).sqrt();
    Outcome {
        pass: worst < 1e-9 && identity < 1e-10 && mean_mode < 1e-14,
        detail: format!(
            "eval_F vs convolution {worst:.2e} (< 1e-9), Korteweg identity {identity:.2e} (< 1e-10), \
             |F(0)| {mean_mode:.1e} (< 1e-14)"
        ),
    }
}

fn picard_contraction() -> Outcome {
    let grid = Grid::new(3, 32, 4.0 * PI).unwrap();
    let params = PhysParams::unit_critical();
    let s = 2;
    let u0 = scale_to_size(&gaussian_state(&grid, 1.0, 1.0, 1.0).unwrap(), s, 1e-3).unwrap();
    let cutoff = make_cutoff(&grid, 1.0, 2.0).unwrap();
    let cfg = PicardConfig { horizon: 10.0, mesh_dt: 0.25, k_max: 20, stop_below: 1e-12, nonlinear: NonlinearMode::Full };
    let report = picard_iterate(&u0, &cfg, &params, |a, b| {
        let samples: Vec<ZSample> = a
            .iter()
            .zip(b)
            .enumerate()
            .map(|(j, (x, y))| ZSample::from_state(0.25 * j as f64, &x.sub(y), &cutoff, s))
            .collect();
        z_norm(&samples, 3, 1.0).total
    })
    .unwrap();
    let max_ratio = report.ratios.iter().cloned().fold(0.0f64, f64::max);
    let last = *report.distances.last().unwrap();
    let d: Vec<String> = report.distances.iter().map(|d| format!("{d:.2e}")).collect();
    Outcome {
        pass: !report.non_contracting && last < 1e-12 && max_ratio <= 0.5 && !report.ratios.is_empty(),
        detail: format!("d_k = [{}], max ratio {max_ratio:.3e} (<= 0.5)", d.join(", ")),
    }
}

fn global_run_smoke() -> Outcome {
    let grid = Grid::new(3, 32, 4.0 * PI).unwrap();
    let params = PhysParams::unit_critical();
    let w = EnergyWeights::new(2, &params);
    let cutoff = make_cutoff(&grid, 1.0, 2.0).unwrap();
    let u0 = gaussian_state(&grid, 1e-2, 1e-2, 1.0).unwrap();
    let mut cfg = StepperConfig::new(0.1, 50.0);
    cfg.sample_interval = 0.5;
    let mut monitor = NormMonitor::new(cutoff, w, 1.0);
    let traj = simulate(&u0, &cfg, &params, &mut monitor).unwrap();
    let r = &monitor.records;
    let mass_drift = r.iter().map(|x| (x.mass - r[0].mass).abs()).fold(0.0f64, f64::max) / r[0].mass.abs().max(1.0);
    let momentum = traj
        .final_state
        .total_momentum()
        .iter()
        .zip(u0.total_momentum())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0f64, f64::max);
    let increases = r.windows(2).filter(|p| p[0].t >= 1.0 && p[1].l2_u > p[0].l2_u).count();
    Outcome {
        pass: traj.completed() && traj.final_time == 50.0 && mass_drift <= 1e-12 && momentum <= 1e-12 && increases == 0,
        detail: format!(
            "termination {:?} at t = {}, mass drift {mass_drift:.1e}, momentum drift {momentum:.1e}, \
             {increases} L2 increases after t = 1",
            traj.termination, traj.final_time
        ),
    }
}

fn main() {
    let only: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let minute = Duration::from_secs(60);
    let checks: [Check; 9] = [
        ("semigroup correctness", minute, semigroup_correctness),
        ("critical-regime continuity", minute, critical_regime_continuity),
        ("linear decay exponents", minute, linear_decay),
        ("K12 kernel bound", minute, k12_bound),
        ("energy estimate", 10 * minute, energy_estimate),
        ("projection bounds", minute, projection_bounds),
        ("nonlinearity correctness", minute, nonlinearity_correctness),
        ("Picard contraction", 15 * minute, picard_contraction),
        ("global-run smoke", 15 * minute, global_run_smoke),
    ];
    let mut all = true;
    for (name, limit, f) in checks {
        if !only.is_empty() && !only.iter().any(|o| name.contains(o.as_str())) {
            continue;
        }
        all &= criterion(name, limit, f);
    }
    if !all {
        std::process::exit(1);
    }
}
