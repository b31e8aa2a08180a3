//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.
#![allow(clippy::redundant_closure_call, clippy::neg_cmp_op_on_partial_ord)]

use std::f64::consts::PI;
use std::time::Instant;

use backflow::analysis::slope_breaks;
use backflow::config::ExperimentConfig;
use backflow::runner::{amplitude_scan, build_potential, position_scan};
use backflow::solve::{solve_point, solve_temporal_extrapolated, wave_cache, SolveOptions};
use backflow::ScanRow;
use backflow_core::bounds::{bound_delta, bound_for, bound_free_gaussian_numeric, delta_bound_coefficients};
use backflow_core::kernels::{current_kernel, QuadratureSpec};
use backflow_core::position::{continuity_residual, WaveTable};
use backflow_core::scattering::{solve_analytic, solve_generic, DEFAULT_TOL};
use backflow_core::spectral::{dense_crosscheck, discretize, EigenOptions, MomentumGrid};
use backflow_core::{Potential, ScatteringState, SmearingFunction, C64};

struct Suite {
    failed: usize,
}

impl Suite {
    fn record(&mut self, name: &str, started: Instant, outcome: anyhow::Result<(bool, String)>) {
        let (ok, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e:#}")));
        if !ok {
            self.failed += 1;
        }
        let secs = started.elapsed().as_secs_f64();
        println!("{} {name}: {detail} [{secs:.1}s]", if ok { "PASS" } else { "FAIL" });
    }
}

const SIGMA: f64 = 0.1;

fn scan_config(body: &str) -> anyhow::Result<ExperimentConfig> {
    Ok(ExperimentConfig::parse(body)?)
}

fn beta_at(rows: &[ScanRow], x0: f64) -> f64 {
    rows.iter()
        .find(|r| (r.x0 - x0).abs() < 1e-9)
        .map_or(f64::NAN, |r| r.beta)
}

fn xs(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
}

/// Unit Gaussian momentum amplitude centred at `p0`, width `s`, positioned
/// around `xc` at `t = 0`.
fn gaussian_state(grid: &MomentumGrid, p0: f64, s: f64, xc: f64) -> Vec<C64> {
    let amp = (2.0 * PI * s * s).powf(-0.25) * grid.spacing().sqrt();
    grid.points()
        .into_iter()
        .map(|p| amp * (-(p - p0) * (p - p0) / (4.0 * s * s)).exp() * C64::from_polar(1.0, -p * xc))
        .collect()
}

fn main() {
    let mut suite = Suite { failed: 0 };
    let reference = MomentumGrid::new(2000, 200.0).unwrap();
    let f0 = SmearingFunction::new(0.0, SIGMA).unwrap();
    let opts = SolveOptions::default();
    // every (model, f) pair solved below, for the dominance criterion
    let mut solved: Vec<(String, f64, f64)> = Vec::new();

    let t = Instant::now();
    let free = solve_point(&Potential::Zero, &f0, &reference, &opts);
    let free_ref = free.as_ref().ok().map(|s| s.result.clone());
    suite.record(
        "free backflow constant",
        t,
        (|| {
            let s = free.as_ref().map_err(|e| anyhow::anyhow!("{e}"))?;
            let beta = s.result.beta;
            solved.push(("zero".into(), beta, s.bound.value));
            let secs = t.elapsed().as_secs_f64();
            Ok((
                (beta + 0.241).abs() <= 0.002 && secs <= 120.0,
                format!("beta = {beta:.6} (target -0.241 ± 0.002), n=2000 p_max=200, {secs:.1}s of 120s"),
            ))
        })(),
    );

    let t = Instant::now();
    suite.record(
        "temporal constant",
        t,
        (|| {
            let grid = MomentumGrid::new(2000, 20.0)?;
            let eigen = EigenOptions::default();
            let mut raw = Vec::new();
            let mut extrapolated = Vec::new();
            for tw in [0.5, 1.0, 2.0] {
                let est = solve_temporal_extrapolated(tw, &grid, &eigen)?;
                raw.push(est.result.beta);
                extrapolated.push(est.extrapolated);
            }
            let at_one = extrapolated[1];
            let spread = extrapolated.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                - extrapolated.iter().cloned().fold(f64::INFINITY, f64::min);
            Ok((
                (at_one + 0.0385).abs() <= 0.001 && spread <= 1e-3,
                format!(
                    "T=1: extrapolated {at_one:.6} (raw at p_max=20: {:.6}, target -0.0385 ± 0.001); \
                 spread over T in {{0.5,1,2}}: {spread:.1e} (raw {:.6} {:.6} {:.6})",
                    raw[1], raw[0], raw[1], raw[2]
                ),
            ))
        })(),
    );

    let t = Instant::now();
    suite.record(
        "analytic bound values",
        t,
        (|| {
            let free = bound_free_gaussian_numeric(&f0);
            let delta = bound_delta(&f0, &[1.0]);
            let pt = bound_for(&Potential::PoeschlTeller { mu: 1.0 }, &f0, None).value;
            let (a, b) = delta_bound_coefficients(&f0);
            let round3 = |x: f64| (x * 1000.0).round() / 1000.0;
            let ok = (free + 0.995).abs() <= 0.001
                && (delta + 194.050).abs() <= 0.01
                && (pt + 283.261).abs() <= 0.01
                && round3(a) == -65.347
                && round3(b) == -128.704;
            Ok((
                ok,
                format!("free {free:.4}, delta {delta:.3}, PT {pt:.3}, delta form {a:.4} + ({b:.4})|λ|"),
            ))
        })(),
    );

    let scan_grid = "n = 1000\np_max = 150\nsigma = 0.1\nx0_min = -5\nx0_max = 5\nx0_step = 1\n";
    let t = Instant::now();
    let scan_free = solve_point(&Potential::Zero, &f0, &MomentumGrid::new(1000, 150.0).unwrap(), &opts)
        .map(|s| s.result.beta)
        .unwrap_or(f64::NAN);
    let pt_rows = scan_config(&format!(
        "experiment = position_scan\npotential = poeschl_teller\nmu = 1\n{scan_grid}"
    ))
    .and_then(|cfg| position_scan(&cfg, &build_potential(&cfg.model)?));
    suite.record(
        "reflectionless asymptotics",
        t,
        (|| {
            let rows = pt_rows.as_ref().map_err(|e| anyhow::anyhow!("{e:#}"))?;
            solved.extend(rows.iter().map(|r| ("poeschl_teller(1)".into(), r.beta, r.bound)));
            let (l, r) = (beta_at(rows, -5.0), beta_at(rows, 5.0));
            let worst = (l - scan_free).abs().max((r - scan_free).abs());
            Ok((
                worst < 0.01,
                format!("beta(-5) = {l:.6}, beta(+5) = {r:.6}, free {scan_free:.6}, max gap {worst:.1e}"),
            ))
        })(),
    );

    let t = Instant::now();
    suite.record(
        "reflection asymmetry",
        t,
        (|| {
            let mut ok = true;
            let mut detail = Vec::new();
            for lambda in [1.0, -1.0] {
                let cfg = scan_config(&format!(
                    "experiment = position_scan\npotential = delta\nstrength = {lambda}\n{scan_grid}"
                ))?;
                let rows = position_scan(&cfg, &build_potential(&cfg.model)?)?;
                solved.extend(rows.iter().map(|r| (format!("delta({lambda})"), r.beta, r.bound)));
                let (l, r) = (beta_at(&rows, -5.0), beta_at(&rows, 5.0));
                ok &= l < scan_free && scan_free < r;
                detail.push(format!("λ={lambda}: {l:.6} < {scan_free:.6} < {r:.6}"));
            }
            Ok((ok, detail.join("; ")))
        })(),
    );

    let t = Instant::now();
    suite.record(
        "rectangular cusp locations",
        t,
        (|| {
            let cfg =
                scan_config("experiment = amplitude_scan\npotential = rectangular\nstrength = -1\namplitude_x0 = 0\n")?;
            let rows = amplitude_scan(&cfg)?;
            solved.extend(rows.iter().map(|r| {
                (
                    format!("rectangular({})", r.amplitude.unwrap_or(f64::NAN)),
                    r.beta,
                    r.bound,
                )
            }));
            let a: Vec<f64> = rows.iter().map(|r| r.amplitude.unwrap_or(f64::NAN)).collect();
            let b: Vec<f64> = rows.iter().map(|r| r.beta).collect();
            let breaks = slope_breaks(&a, &b, 20.0);
            let targets = [-PI * PI / 8.0, -PI * PI / 2.0];
            let found: Vec<bool> = targets
                .iter()
                .map(|&c| breaks.iter().any(|x| (x - c).abs() <= 0.15))
                .collect();
            Ok((
                found.iter().all(|&f| f),
                format!(
                    "breaks at {breaks:.3?} over {} points, expected near {:.3} and {:.3}",
                    rows.len(),
                    targets[0],
                    targets[1]
                ),
            ))
        })(),
    );

    let t = Instant::now();
    suite.record(
        "bound dominance",
        t,
        (|| {
            let violations: Vec<String> = solved
                .iter()
                .filter(|(_, beta, bound)| !(bound <= beta))
                .map(|(m, beta, bound)| format!("{m}: beta {beta:.4} bound {bound:.4}"))
                .collect();
            let margin = solved.iter().map(|(_, b, bd)| b - bd).fold(f64::INFINITY, f64::min);
            Ok((
                violations.is_empty() && !solved.is_empty(),
                format!(
                    "{} pairs, min beta - bound = {margin:.3}; violations {violations:?}",
                    solved.len()
                ),
            ))
        })(),
    );

    let t = Instant::now();
    suite.record(
        "solver oracle equivalence",
        t,
        (|| {
            let pt = Potential::PoeschlTeller { mu: 1.0 };
            let x = xs(-8.0, 8.0, 1600);
            let mut sup: f64 = 0.0;
            for k in [0.5, 1.0, 5.0, 20.0] {
                let exact = solve_analytic(&pt, k, &x)?;
                let numeric = solve_generic(&pt, k, &x, DEFAULT_TOL)?;
                for (a, b) in exact.phi.iter().zip(&numeric.phi) {
                    sup = sup.max((a - b).norm());
                }
            }
            let models = [
                Potential::Zero,
                Potential::Delta { strength: 1.0 },
                Potential::Delta { strength: -1.0 },
                Potential::Rectangular { strength: 2.0 },
                Potential::Rectangular { strength: -3.0 },
                Potential::PoeschlTeller { mu: 1.0 },
                Potential::PoeschlTeller { mu: 0.6 },
            ];
            let mut unitarity: f64 = 0.0;
            for v in &models {
                for i in 0..50 {
                    let k = 0.1 + 0.6 * i as f64;
                    let s = ScatteringState::solve(v, k, DEFAULT_TOL)?;
                    unitarity = unitarity.max((s.transmission().norm_sqr() + s.reflection().norm_sqr() - 1.0).abs());
                }
            }
            Ok((
                sup < 1e-5 && unitarity <= 1e-6,
                format!(
                    "PT numeric vs closed form sup {sup:.1e}; max ||T|²+|R|²-1| {unitarity:.1e} over {} models",
                    models.len()
                ),
            ))
        })(),
    );

    let t = Instant::now();
    suite.record("spectral self-checks", t, (|| {
        let grid = MomentumGrid::new(200, 60.0)?;
        let f = SmearingFunction::new(0.5, SIGMA)?;
        let v = Potential::Delta { strength: 1.0 };
        let sol = solve_point(&v, &f, &grid, &opts)?;
        let k = current_kernel(&sol.cache, &grid, &f, &QuadratureSpec::default())?;
        let dense = dense_crosscheck(&discretize(&k))?[0];
        let gap = (dense - sol.result.beta).abs();
        let free = free_ref.clone().ok_or_else(|| anyhow::anyhow!("reference solve failed"))?;
        let mass = free.mass_above(0.9);
        let shifted = solve_point(&Potential::Zero, &SmearingFunction::new(3.7, SIGMA)?, &reference, &opts)?;
        let shift_gap = (shifted.result.beta - free.beta).abs();
        Ok((
            gap < 1e-8 && mass < 1e-4 && shift_gap < 1e-6,
            format!("dense vs iterative {gap:.1e} at n=200; mass above 0.9 p_max {mass:.1e}; |beta(3.7) - beta(0)| {shift_gap:.1e}"),
        ))
    })());

    let t = Instant::now();
    suite.record(
        "position-space consistency",
        t,
        (|| {
            // f-weighted current of the lowest eigenvector
            let grid = MomentumGrid::new(1000, 150.0)?;
            let delta = Potential::Delta { strength: 1.0 };
            let mut rel: f64 = 0.0;
            for (v, x0) in [(Potential::Zero, 0.0), (delta.clone(), 0.0), (delta.clone(), 2.0)] {
                let f = SmearingFunction::new(x0, SIGMA)?;
                let sol = solve_point(&v, &f, &grid, &opts)?;
                let x = xs(x0 - 1.0, x0 + 1.0, 1000);
                let prof = WaveTable::new(&sol.cache, &grid, &x)?.profile(&sol.result.eigenvector, 0.0)?;
                rel = rel.max((prof.smeared_current(&f) / sol.result.beta - 1.0).abs());
            }

            // continuity for a free packet, and for one crossing the delta away
            // from its kink, where the centred difference is only first order
            let packet_grid = MomentumGrid::new(400, 10.0)?;
            let packet = gaussian_state(&packet_grid, 4.0, 0.5, -3.0);
            let residual = |v: &Potential, ranges: &[(f64, f64, usize)]| -> anyhow::Result<f64> {
                let cache = wave_cache(v, &packet_grid, DEFAULT_TOL)?;
                let mut worst: f64 = 0.0;
                for &(a, b, n) in ranges {
                    let table = WaveTable::new(&cache, &packet_grid, &xs(a, b, n))?;
                    for t0 in [0.0, 0.5, 0.75, 1.5] {
                        let r = continuity_residual(&table.profile(&packet, t0)?, &table.profile(&packet, t0 + 1e-3)?)?;
                        worst = worst.max(r);
                    }
                }
                Ok(worst)
            };
            let continuity = residual(&Potential::Zero, &[(-10.0, 10.0, 2000)])?;
            let continuity_delta = residual(&delta, &[(-10.0, -0.1, 990), (0.1, 10.0, 990)])?;

            // frame norms over one spatial period of the grid, delta at x0 = +2
            let f = SmearingFunction::new(2.0, SIGMA)?;
            let sol = solve_point(&delta, &f, &grid, &opts)?;
            let period = 2.0 * PI / grid.spacing();
            let x = xs(2.0 - 0.5 * period, 2.0 + 0.5 * period, 4200);
            let table = WaveTable::new(&sol.cache, &grid, &x)?;
            let norms = (0..11)
                .map(|i| Ok(table.profile(&sol.result.eigenvector, 0.05 * i as f64)?.norm()))
                .collect::<anyhow::Result<Vec<f64>>>()?;
            let drift = norms.iter().map(|n| (n - norms[0]).abs()).fold(0.0, f64::max);
            let left =
                WaveTable::new(&sol.cache, &grid, &xs(-3.0, -1.0, 400))?.profile(&sol.result.eigenvector, 0.0)?;
            let j_min = left.j.iter().cloned().fold(f64::INFINITY, f64::min);

            Ok((
                rel < 0.02 && continuity < 1e-3 && drift < 1e-3 && j_min < -0.1 * sol.result.beta.abs(),
                format!(
                    "smeared current vs beta max rel err {rel:.1e}; continuity residual {continuity:.1e} \
                 (δ=1e-3, h=1e-2; {continuity_delta:.1e} off the delta); frame norm drift {drift:.1e} \
                 (norm {:.6}); min j on [-3,-1] {j_min:.3} vs beta {:.3}",
                    norms[0], sol.result.beta
                ),
            ))
        })(),
    );

    if suite.failed > 0 {
        println!("{} criteria failed", suite.failed);
        std::process::exit(1);
    }
    println!("all criteria passed");
}
