//! Quick invariant suite on small grids, run by `backflow check`.

use backflow_core::bounds::bound_free_gaussian;
use backflow_core::kernels::{current_kernel, free_kernel_matrix, QuadratureSpec};
use backflow_core::scattering::{ScatteringState, DEFAULT_TOL};
use backflow_core::spectral::{
    dense_crosscheck, discretize, lowest_eigenpair, start_vector, EigenOptions, MomentumGrid,
};
use backflow_core::{Potential, SmearingFunction};

use crate::solve::{solve_point, wave_cache, SolveOptions};

pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn outcome(name: &'static str, passed: bool, detail: String) -> CheckOutcome {
    CheckOutcome { name, passed, detail }
}

fn models() -> Vec<Potential> {
    vec![
        Potential::Zero,
        Potential::Delta { strength: 1.0 },
        Potential::Delta { strength: -1.0 },
        Potential::Rectangular { strength: 2.0 },
        Potential::Rectangular { strength: -3.0 },
        Potential::PoeschlTeller { mu: 1.0 },
        Potential::PoeschlTeller { mu: 0.6 },
    ]
}

fn check_or_err(name: &'static str, r: anyhow::Result<CheckOutcome>) -> CheckOutcome {
    r.unwrap_or_else(|e| outcome(name, false, format!("error: {e:#}")))
}

pub fn run_checks() -> Vec<CheckOutcome> {
    let mut out = Vec::new();

    out.push(check_or_err(
        "unitarity",
        (|| {
            let mut worst: f64 = 0.0;
            for v in models() {
                for i in 0..20 {
                    let k = 0.05 + 1.5 * i as f64;
                    let s = ScatteringState::solve(&v, k, DEFAULT_TOL)?;
                    worst = worst.max((s.transmission().norm_sqr() + s.reflection().norm_sqr() - 1.0).abs());
                }
            }
            Ok(outcome(
                "unitarity",
                worst < 1e-6,
                format!("max ||T|²+|R|²−1| = {worst:.2e}"),
            ))
        })(),
    ));

    out.push(check_or_err(
        "hermiticity",
        (|| {
            let grid = MomentumGrid::new(32, 30.0)?;
            let f = SmearingFunction::new(0.3, 0.15)?;
            let mut ok = true;
            for v in models() {
                let cache = wave_cache(&v, &grid, DEFAULT_TOL)?;
                ok &= current_kernel(&cache, &grid, &f, &QuadratureSpec::default())?
                    .entries
                    .is_hermitian();
            }
            Ok(outcome(
                "hermiticity",
                ok,
                "quadrature kernels are exactly Hermitian".into(),
            ))
        })(),
    ));

    out.push(check_or_err(
        "dense-vs-iterative",
        (|| {
            let grid = MomentumGrid::new(80, 40.0)?;
            let f = SmearingFunction::new(0.0, 0.1)?;
            let m = discretize(&free_kernel_matrix(&grid, &f));
            let dense = dense_crosscheck(&m)?[0];
            let it = lowest_eigenpair(&m, -2.0, &start_vector(80, 1), &EigenOptions::default())?.value;
            let diff = (dense - it).abs();
            Ok(outcome("dense-vs-iterative", diff < 1e-8, format!("|Δβ| = {diff:.2e}")))
        })(),
    ));

    out.push(check_or_err(
        "shift-property",
        (|| {
            let grid = MomentumGrid::new(60, 40.0)?;
            let opts = EigenOptions::default();
            let beta = |x0: f64| -> anyhow::Result<f64> {
                let m = discretize(&free_kernel_matrix(&grid, &SmearingFunction::new(x0, 0.15)?));
                Ok(lowest_eigenpair(&m, -2.0, &start_vector(60, 1), &opts)?.value)
            };
            let diff = (beta(0.0)? - beta(3.7)?).abs();
            Ok(outcome(
                "shift-property",
                diff < 1e-9,
                format!("|β(0) − β(3.7)| = {diff:.2e}"),
            ))
        })(),
    ));

    out.push(check_or_err(
        "bound-dominance",
        (|| {
            let grid = MomentumGrid::new(64, 40.0)?;
            let mut worst = f64::INFINITY;
            for v in models() {
                for x0 in [-2.0, 0.0, 2.0] {
                    let f = SmearingFunction::new(x0, 0.15)?;
                    let s = solve_point(&v, &f, &grid, &SolveOptions::default())?;
                    worst = worst.min(s.result.beta - s.bound.value);
                }
            }
            Ok(outcome(
                "bound-dominance",
                worst >= 0.0,
                format!("min β − bound = {worst:.3}"),
            ))
        })(),
    ));

    out.push(check_or_err(
        "free-bound",
        (|| {
            let grid = MomentumGrid::new(100, 60.0)?;
            let f = SmearingFunction::new(0.0, 0.1)?;
            let m = discretize(&free_kernel_matrix(&grid, &f));
            let b = lowest_eigenpair(&m, -2.0, &start_vector(100, 1), &EigenOptions::default())?.value;
            Ok(outcome(
                "free-bound",
                bound_free_gaussian(0.1) <= b && b < 0.0,
                format!("β = {b:.4}"),
            ))
        })(),
    ));

    out
}
