//! Position-space reconstruction and time evolution of momentum-grid states.
//!
//! A unit vector `v` on the grid stands for the momentum amplitude
//! `ψ̃(p_j) = v_j / √Δp`, so
//! `ψ_t(x) = (2π)^{-1/2} Σ_j √Δp φ_{p_j}(x) e^{-i p_j² t/2} v_j`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64 as C64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float as _;

use crate::error::{Error, Result};
use crate::scattering::WaveCache;
use crate::smearing::SmearingFunction;
use crate::spectral::MomentumGrid;

#[derive(Debug, Clone, PartialEq)]
pub struct PositionProfile {
    pub t: f64,
    pub x_grid: Vec<f64>,
    pub psi: Vec<C64>,
    pub dpsi: Vec<C64>,
    pub rho: Vec<f64>,
    pub j: Vec<f64>,
}

fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum()
}

impl PositionProfile {
    /// `∫ ρ dx` over the sampled range (trapezoid rule).
    pub fn norm(&self) -> f64 {
        trapezoid(&self.x_grid, &self.rho)
    }

    /// `∫ f j dx` over the sampled range (trapezoid rule).
    pub fn smeared_current(&self, f: &SmearingFunction) -> f64 {
        let fj: Vec<f64> = self.x_grid.iter().zip(&self.j).map(|(&x, j)| f.value(x) * j).collect();
        trapezoid(&self.x_grid, &fj)
    }
}

/// `φ_{p_j}` and `∂ₓφ_{p_j}` tabulated on a fixed position grid, reused
/// across times.
#[derive(Debug, Clone)]
pub struct WaveTable {
    grid: MomentumGrid,
    x_grid: Vec<f64>,
    phi: Vec<C64>,
    dphi: Vec<C64>,
}

impl WaveTable {
    pub fn new(cache: &WaveCache, grid: &MomentumGrid, x_grid: &[f64]) -> Result<Self> {
        let nx = x_grid.len();
        let n = grid.n();
        let mut phi = vec![C64::new(0.0, 0.0); n * nx];
        let mut dphi = phi.clone();
        for j in 0..n {
            let state = cache.get(grid.point(j))?;
            for (i, &x) in x_grid.iter().enumerate() {
                let (p, d) = state.eval(x);
                phi[j * nx + i] = p;
                dphi[j * nx + i] = d;
            }
        }
        Ok(Self {
            grid: *grid,
            x_grid: x_grid.to_vec(),
            phi,
            dphi,
        })
    }

    pub fn x_grid(&self) -> &[f64] {
        &self.x_grid
    }

    pub fn profile(&self, v: &[C64], t: f64) -> Result<PositionProfile> {
        let n = self.grid.n();
        if v.len() != n {
            return Err(Error::Dimension(alloc::format!(
                "state of length {} on a grid of {n}",
                v.len()
            )));
        }
        let nx = self.x_grid.len();
        let weight = (self.grid.spacing() / (2.0 * PI)).sqrt();
        let mut psi = vec![C64::new(0.0, 0.0); nx];
        let mut dpsi = psi.clone();
        for (j, vj) in v.iter().enumerate() {
            let p = self.grid.point(j);
            let c = vj * C64::from_polar(weight, -0.5 * p * p * t);
            let row = j * nx..(j + 1) * nx;
            for ((s, ds), (ph, dph)) in psi
                .iter_mut()
                .zip(dpsi.iter_mut())
                .zip(self.phi[row.clone()].iter().zip(&self.dphi[row]))
            {
                *s += c * ph;
                *ds += c * dph;
            }
        }
        let rho = psi.iter().map(|z| z.norm_sqr()).collect();
        // (i/2)(conj(ψ')ψ − conj(ψ)ψ') = Im(conj(ψ) ψ')
        let j = psi.iter().zip(&dpsi).map(|(s, d)| (s.conj() * d).im).collect();
        Ok(PositionProfile {
            t,
            x_grid: self.x_grid.clone(),
            psi,
            dpsi,
            rho,
            j,
        })
    }
}

/// State at time `t` on `x_grid`; the cache must hold every grid momentum.
pub fn reconstruct(
    cache: &WaveCache,
    grid: &MomentumGrid,
    v: &[C64],
    x_grid: &[f64],
    t: f64,
) -> Result<PositionProfile> {
    WaveTable::new(cache, grid, x_grid)?.profile(v, t)
}

pub fn frames(
    cache: &WaveCache,
    grid: &MomentumGrid,
    v: &[C64],
    x_grid: &[f64],
    times: &[f64],
) -> Result<Vec<PositionProfile>> {
    let table = WaveTable::new(cache, grid, x_grid)?;
    times.iter().map(|&t| table.profile(v, t)).collect()
}

/// `sup_x |(ρ_b − ρ_a)/δ + ∂ₓ(j_a + j_b)/2|` at interior points, with
/// centred differences in `x`.
pub fn continuity_residual(a: &PositionProfile, b: &PositionProfile) -> Result<f64> {
    if a.x_grid != b.x_grid {
        return Err(Error::Dimension("profiles on different position grids".into()));
    }
    let delta = b.t - a.t;
    if delta == 0.0 {
        return Err(Error::InvalidParameter("profiles at equal times".into()));
    }
    let x = &a.x_grid;
    let mut worst: f64 = 0.0;
    for i in 1..x.len().saturating_sub(1) {
        let jm = 0.5 * (a.j[i - 1] + b.j[i - 1]);
        let jp = 0.5 * (a.j[i + 1] + b.j[i + 1]);
        let dj = (jp - jm) / (x[i + 1] - x[i - 1]);
        let drho = (b.rho[i] - a.rho[i]) / delta;
        worst = worst.max((drho + dj).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{current_kernel, QuadratureSpec};
    use crate::potential::Potential;
    use crate::scattering::DEFAULT_TOL;
    use crate::spectral::{discretize, lowest_eigenpair, start_vector, EigenOptions};

    fn xs(a: f64, b: f64, h: f64) -> Vec<f64> {
        let n = ((b - a) / h).round() as usize;
        (0..=n).map(|i| a + i as f64 * h).collect()
    }

    /// Unit Gaussian momentum amplitude centred at `p0` with width `s`.
    fn gaussian_state(grid: &MomentumGrid, p0: f64, s: f64) -> Vec<C64> {
        let amp = (2.0 * PI * s * s).powf(-0.25);
        let dp = grid.spacing().sqrt();
        grid.points()
            .into_iter()
            .map(|p| C64::new(amp * (-(p - p0) * (p - p0) / (4.0 * s * s)).exp() * dp, 0.0))
            .collect()
    }

    /// Free evolution of the same Gaussian in closed form.
    fn gaussian_exact(x: f64, t: f64, p0: f64, s: f64) -> C64 {
        let amp = (2.0 * PI * s * s).powf(-0.25) / (2.0 * PI).sqrt();
        let a = C64::new(1.0 / (4.0 * s * s), 0.5 * t);
        let b = C64::new(p0 / (2.0 * s * s), x);
        let c = -p0 * p0 / (4.0 * s * s);
        amp * (C64::new(PI, 0.0) / a).sqrt() * (b * b / (4.0 * a) + c).exp()
    }

    fn free_setup(n: usize, p_max: f64) -> (MomentumGrid, WaveCache) {
        let grid = MomentumGrid::new(n, p_max).unwrap();
        let cache = WaveCache::populate(&Potential::Zero, &grid.points(), DEFAULT_TOL).unwrap();
        (grid, cache)
    }

    #[test]
    fn single_cell_has_flat_density() {
        let (grid, cache) = free_setup(20, 10.0);
        let mut v = vec![C64::new(0.0, 0.0); 20];
        v[7] = C64::new(1.0, 0.0);
        let prof = reconstruct(&cache, &grid, &v, &xs(-3.0, 3.0, 0.1), 0.0).unwrap();
        for r in &prof.rho {
            assert!((r - 0.5 / (2.0 * PI)).abs() < 1e-12);
        }
        for j in &prof.j {
            assert!((j - grid.point(7) * 0.5 / (2.0 * PI)).abs() < 1e-12);
        }
    }

    #[test]
    fn free_gaussian_matches_closed_form() {
        let (grid, cache) = free_setup(400, 20.0);
        let v = gaussian_state(&grid, 10.0, 1.0);
        let x = xs(-5.0, 5.0, 0.05);
        for t in [0.0, 0.3] {
            let prof = reconstruct(&cache, &grid, &v, &x, t).unwrap();
            for (xi, psi) in x.iter().zip(&prof.psi) {
                assert!((psi - gaussian_exact(*xi, t, 10.0, 1.0)).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn gaussian_packet_continuity() {
        let (grid, cache) = free_setup(400, 20.0);
        let v = gaussian_state(&grid, 4.0, 0.5);
        let table = WaveTable::new(&cache, &grid, &xs(-6.0, 8.0, 0.01)).unwrap();
        let res = |d: f64| {
            let a = table.profile(&v, 0.2).unwrap();
            let b = table.profile(&v, 0.2 + d).unwrap();
            continuity_residual(&a, &b).unwrap()
        };
        let r1 = res(1e-3);
        assert!(r1 < 1e-3, "{r1}");
        // the spatial O(h²) part does not shrink with δ, so use a finer grid
        let fine = WaveTable::new(&cache, &grid, &xs(-3.0, 5.0, 1e-4)).unwrap();
        let res_fine = |d: f64| {
            let a = fine.profile(&v, 0.2).unwrap();
            let b = fine.profile(&v, 0.2 + d).unwrap();
            continuity_residual(&a, &b).unwrap()
        };
        let ratio = res_fine(2e-2) / res_fine(1e-2);
        assert!((3.5..4.5).contains(&ratio), "{ratio}");
    }

    #[test]
    fn stationary_state_is_conserved() {
        let grid = MomentumGrid::new(10, 5.0).unwrap();
        let v = Potential::Delta { strength: 1.0 };
        let cache = WaveCache::populate(&v, &grid.points(), DEFAULT_TOL).unwrap();
        let mut e = vec![C64::new(0.0, 0.0); 10];
        e[3] = C64::new(1.0, 0.0);
        let table = WaveTable::new(&cache, &grid, &xs(-3.0, 3.0, 0.01)).unwrap();
        let a = table.profile(&e, 0.0).unwrap();
        let b = table.profile(&e, 1e-3).unwrap();
        assert!(continuity_residual(&a, &b).unwrap() < 1e-6);
    }

    #[test]
    fn smeared_current_equals_rayleigh_quotient() {
        let grid = MomentumGrid::new(120, 60.0).unwrap();
        let f = SmearingFunction::new(-1.0, 0.2).unwrap();
        let v = Potential::Delta { strength: 1.0 };
        let cache = WaveCache::populate(&v, &grid.points(), DEFAULT_TOL).unwrap();
        let m = discretize(&current_kernel(&cache, &grid, &f, &QuadratureSpec::default()).unwrap());
        let e = lowest_eigenpair(&m, -5.0, &start_vector(120, 1), &EigenOptions::default()).unwrap();
        let (lo, hi) = f.window(10.0);
        let prof = reconstruct(&cache, &grid, &e.vector, &xs(lo, hi, 1e-3), 0.0).unwrap();
        let s = prof.smeared_current(&f);
        assert!((s - e.value).abs() < 1e-4 * e.value.abs(), "{s} vs {}", e.value);
    }

    #[test]
    fn missing_wave_names_momentum() {
        let grid = MomentumGrid::new(4, 2.0).unwrap();
        let cache = WaveCache::populate(&Potential::Zero, &[0.25, 0.75], DEFAULT_TOL).unwrap();
        let v = vec![C64::new(0.5, 0.0); 4];
        match reconstruct(&cache, &grid, &v, &[0.0], 0.0) {
            Err(Error::MissingWave(k)) => assert_eq!(k, 1.25),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn single_time_frame_matches_reconstruct() {
        let (grid, cache) = free_setup(30, 10.0);
        let v = start_vector(30, 5);
        let x = xs(-2.0, 2.0, 0.1);
        let fr = frames(&cache, &grid, &v, &x, &[0.0]).unwrap();
        assert_eq!(fr.len(), 1);
        assert_eq!(fr[0], reconstruct(&cache, &grid, &v, &x, 0.0).unwrap());
    }
}
