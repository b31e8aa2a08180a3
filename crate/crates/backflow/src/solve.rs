//! Parallel drivers around the core solvers: wave caches, kernel assembly and
//! single backflow solves.

use rayon::prelude::*;

use backflow_core::bounds::{bound_for, BoundReport};
use backflow_core::kernels::{
    asymptotic_kernel, free_kernel_matrix, temporal_kernel, CurrentKernelAssembly, KernelMatrix, KernelMethod,
    QuadratureSpec,
};
use backflow_core::spectral::{discretize, solve_backflow, BackflowResult, EigenOptions, MomentumGrid};
use backflow_core::{Potential, Result, ScatteringState, Side, SmearingFunction, WaveCache, C64};

use crate::config::KernelPolicy;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub quadrature: QuadratureSpec,
    pub kernel: KernelPolicy,
    pub ode_tol: f64,
    pub eigen: EigenOptions,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            quadrature: QuadratureSpec::default(),
            kernel: KernelPolicy::Auto,
            ode_tol: backflow_core::scattering::DEFAULT_TOL,
            eigen: EigenOptions::default(),
        }
    }
}

/// Solves every grid momentum in parallel.
pub fn wave_cache(potential: &Potential, grid: &MomentumGrid, tol: f64) -> Result<WaveCache> {
    let states = grid
        .points()
        .into_par_iter()
        .map(|k| ScatteringState::solve(potential, k, tol))
        .collect::<Result<Vec<_>>>()?;
    Ok(WaveCache::from_states(potential.clone(), states))
}

/// Quadrature kernel with rows assembled in parallel.
pub fn current_kernel_par(
    cache: &WaveCache,
    grid: &MomentumGrid,
    f: &SmearingFunction,
    quad: &QuadratureSpec,
) -> Result<KernelMatrix> {
    let asm = CurrentKernelAssembly::new(cache, grid, f, quad)?;
    let n = grid.n();
    let rows = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut row = vec![C64::new(0.0, 0.0); n - j];
            asm.row(j, &mut row);
            row
        })
        .collect();
    asm.finish(rows)
}

/// Which kernel a solve will use for `f` and `potential`.
pub fn choose_method(
    potential: &Potential,
    f: &SmearingFunction,
    quad: &QuadratureSpec,
    policy: KernelPolicy,
) -> KernelMethod {
    if policy == KernelPolicy::Quadrature {
        return KernelMethod::Quadrature;
    }
    if matches!(potential, Potential::Zero) {
        return KernelMethod::FreeClosedForm;
    }
    if potential.is_compact() {
        let r = potential.support_radius();
        let (lo, hi) = f.window(quad.window_sigmas);
        if lo > r {
            return KernelMethod::AsymptoticRight;
        }
        if hi < -r {
            return KernelMethod::AsymptoticLeft;
        }
    }
    KernelMethod::Quadrature
}

pub fn kernel_with(
    method: KernelMethod,
    cache: &WaveCache,
    grid: &MomentumGrid,
    f: &SmearingFunction,
    quad: &QuadratureSpec,
) -> Result<KernelMatrix> {
    match method {
        KernelMethod::FreeClosedForm => Ok(free_kernel_matrix(grid, f)),
        KernelMethod::AsymptoticRight => asymptotic_kernel(cache, grid, f, Side::Right, quad.window_sigmas),
        KernelMethod::AsymptoticLeft => asymptotic_kernel(cache, grid, f, Side::Left, quad.window_sigmas),
        KernelMethod::Quadrature => current_kernel_par(cache, grid, f, quad),
        KernelMethod::Temporal => Err(backflow_core::Error::InvalidParameter(
            "the temporal kernel has no smearing function".into(),
        )),
    }
}

/// Samples on which the empirical `c_V` is taken.
fn c_v_samples(potential: &Potential) -> Vec<f64> {
    let r = potential.support_radius() + 3.0;
    let m = (2.0 * r / 0.02).ceil() as usize;
    (0..=m).map(|i| -r + 2.0 * r * i as f64 / m as f64).collect()
}

pub fn bound_with_cache(potential: &Potential, f: &SmearingFunction, cache: &WaveCache) -> BoundReport {
    let empirical = potential
        .declared_c_v()
        .is_none()
        .then(|| cache.empirical_c_v(&c_v_samples(potential)));
    bound_for(potential, f, empirical)
}

#[derive(Debug, Clone)]
pub struct PointSolution {
    pub result: BackflowResult,
    pub method: KernelMethod,
    pub bound: BoundReport,
    pub warnings: Vec<String>,
    /// Waves on the final grid, kept for position-space output.
    pub cache: WaveCache,
}

/// Starting shift for the coarse pass, safely below the analytic bound.
fn initial_shift(bound: f64) -> f64 {
    if bound.is_finite() {
        bound - 0.1 * bound.abs() - 1e-3
    } else {
        -1e3
    }
}

/// Lowest spectral value of the smeared current for one `(V, f)` pair.
pub fn solve_point(
    potential: &Potential,
    f: &SmearingFunction,
    grid: &MomentumGrid,
    opts: &SolveOptions,
) -> Result<PointSolution> {
    let method = choose_method(potential, f, &opts.quadrature, opts.kernel);
    let coarse = grid.coarse(opts.eigen.coarse_factor);
    let coarse_cache = wave_cache(potential, &coarse, opts.ode_tol)?;
    let bound = bound_with_cache(potential, f, &coarse_cache);
    let mut coarse_cache = Some(coarse_cache);
    let mut fine: Option<(WaveCache, Vec<String>)> = None;
    let result = solve_backflow(grid, initial_shift(bound.value), &opts.eigen, |g| {
        let cache = match coarse_cache.take() {
            Some(c) if c.len() == g.n() => c,
            _ => wave_cache(potential, g, opts.ode_tol)?,
        };
        let k = kernel_with(method, &cache, g, f, &opts.quadrature)?;
        let m = discretize(&k);
        if g == grid {
            fine = Some((cache, k.meta.warnings));
        }
        Ok(m)
    })?;
    let (cache, warnings) = fine.expect("fine grid was built");
    Ok(PointSolution {
        result,
        method,
        bound,
        warnings,
        cache,
    })
}

/// Time-integrated free flux through the origin over `[0, T]`.
pub fn solve_temporal(time_window: f64, grid: &MomentumGrid, eigen: &EigenOptions) -> Result<BackflowResult> {
    // the free kernel bounds the temporal one: |K_T| ≤ (p+q)T/4π
    let lambda0 = -grid.p_max() * time_window * grid.p_max() / (2.0 * std::f64::consts::PI);
    solve_backflow(grid, lambda0, eigen, |g| {
        Ok(discretize(&temporal_kernel(time_window, g)?))
    })
}

#[derive(Debug, Clone)]
pub struct TemporalEstimate {
    pub result: BackflowResult,
    /// Lowest value on the grid with half the cutoff and the same spacing.
    pub half_cutoff: f64,
    /// Richardson estimate of the infinite-cutoff value.
    pub extrapolated: f64,
}

/// The truncated temporal operator approaches its limit like `1/p_max`, so
/// one extra solve at half the cutoff removes the leading error.
pub fn solve_temporal_extrapolated(
    time_window: f64,
    grid: &MomentumGrid,
    eigen: &EigenOptions,
) -> Result<TemporalEstimate> {
    let result = solve_temporal(time_window, grid, eigen)?;
    let half = MomentumGrid::new((grid.n() / 2).max(4), grid.p_max() / 2.0)?;
    let half_cutoff = solve_temporal(time_window, &half, eigen)?.beta;
    let extrapolated = 2.0 * result.beta - half_cutoff;
    Ok(TemporalEstimate {
        result,
        half_cutoff,
        extrapolated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use backflow_core::kernels::current_kernel;
    use backflow_core::spectral::dense_crosscheck;

    #[test]
    fn parallel_assembly_matches_serial() {
        let grid = MomentumGrid::new(30, 20.0).unwrap();
        let f = SmearingFunction::new(0.2, 0.2).unwrap();
        let v = Potential::Rectangular { strength: 2.0 };
        let cache = wave_cache(&v, &grid, 1e-9).unwrap();
        let a = current_kernel_par(&cache, &grid, &f, &QuadratureSpec::default()).unwrap();
        let b = current_kernel(&cache, &grid, &f, &QuadratureSpec::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn method_selection() {
        let q = QuadratureSpec::default();
        let d = Potential::Delta { strength: 1.0 };
        let f = |x0| SmearingFunction::new(x0, 0.1).unwrap();
        assert_eq!(
            choose_method(&Potential::Zero, &f(0.0), &q, KernelPolicy::Auto),
            KernelMethod::FreeClosedForm
        );
        assert_eq!(
            choose_method(&d, &f(5.0), &q, KernelPolicy::Auto),
            KernelMethod::AsymptoticRight
        );
        assert_eq!(
            choose_method(&d, &f(-5.0), &q, KernelPolicy::Auto),
            KernelMethod::AsymptoticLeft
        );
        assert_eq!(
            choose_method(&d, &f(0.5), &q, KernelPolicy::Auto),
            KernelMethod::Quadrature
        );
        assert_eq!(
            choose_method(&d, &f(5.0), &q, KernelPolicy::Quadrature),
            KernelMethod::Quadrature
        );
        let pt = Potential::PoeschlTeller { mu: 1.0 };
        assert_eq!(
            choose_method(&pt, &f(5.0), &q, KernelPolicy::Auto),
            KernelMethod::Quadrature
        );
    }

    #[test]
    fn point_solve_matches_dense_and_bound() {
        let grid = MomentumGrid::new(120, 60.0).unwrap();
        let f = SmearingFunction::new(-0.5, 0.15).unwrap();
        let v = Potential::Delta { strength: -1.0 };
        let sol = solve_point(&v, &f, &grid, &SolveOptions::default()).unwrap();
        let k = current_kernel(&sol.cache, &grid, &f, &QuadratureSpec::default()).unwrap();
        let dense = dense_crosscheck(&discretize(&k)).unwrap();
        assert!((sol.result.beta - dense[0]).abs() < 1e-8);
        assert!(sol.bound.value <= sol.result.beta);
        assert_eq!(sol.method, KernelMethod::Quadrature);
    }

    #[test]
    fn temporal_solve_is_negative() {
        let grid = MomentumGrid::new(200, 8.0).unwrap();
        let r = solve_temporal(1.0, &grid, &EigenOptions::default()).unwrap();
        assert!(r.beta < 0.0 && r.beta > -0.05, "{}", r.beta);
    }

    #[test]
    fn extrapolation_removes_cutoff_error() {
        let eigen = EigenOptions::default();
        let a = solve_temporal_extrapolated(1.0, &MomentumGrid::new(200, 20.0).unwrap(), &eigen).unwrap();
        let b = solve_temporal_extrapolated(1.0, &MomentumGrid::new(400, 40.0).unwrap(), &eigen).unwrap();
        let raw_gap = (a.result.beta - b.result.beta).abs();
        let extrapolated_gap = (a.extrapolated - b.extrapolated).abs();
        assert!(extrapolated_gap < 0.25 * raw_gap, "{raw_gap} {extrapolated_gap}");
    }
}
