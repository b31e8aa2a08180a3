//! Momentum-space kernels of the smeared current operator restricted to
//! incoming right-movers.
//!
//! All kernels here are unscaled values `K(p_j, p_k)` on a midpoint grid;
//! [`crate::spectral::discretize`] applies the `p_max / n` cell weight.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64 as C64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float as _;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::quadrature::{panels_for_step, simpson_rule};
use crate::scattering::{Side, WaveCache};
use crate::smearing::{SmearingFunction, WINDOW_SIGMAS};
use crate::spectral::MomentumGrid;

/// How a kernel matrix was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelMethod {
    Quadrature,
    FreeClosedForm,
    AsymptoticLeft,
    AsymptoticRight,
    Temporal,
}

impl KernelMethod {
    pub fn tag(self) -> &'static str {
        match self {
            Self::Quadrature => "quadrature",
            Self::FreeClosedForm => "free-closed-form",
            Self::AsymptoticLeft => "asymptotic-left",
            Self::AsymptoticRight => "asymptotic-right",
            Self::Temporal => "temporal",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        [
            Self::Quadrature,
            Self::FreeClosedForm,
            Self::AsymptoticLeft,
            Self::AsymptoticRight,
            Self::Temporal,
        ]
        .into_iter()
        .find(|m| m.tag() == tag)
    }
}

/// Descriptors attached to an assembled kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMeta {
    pub potential: String,
    pub smearing: Option<SmearingFunction>,
    pub time_window: Option<f64>,
    pub method: KernelMethod,
    pub warnings: Vec<String>,
}

/// Hermitian kernel values `K(p_j, p_k)` on a momentum grid.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    pub grid: MomentumGrid,
    pub entries: ComplexMatrix,
    pub meta: KernelMeta,
}

impl KernelMatrix {
    pub fn n(&self) -> usize {
        self.grid.n()
    }
}

/// Simpson quadrature of the position integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Half-width of the integration window in units of sigma.
    pub window_sigmas: f64,
    /// Step override; default `min(σ/20, π/(10 p_max))`.
    pub step: Option<f64>,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            window_sigmas: WINDOW_SIGMAS,
            step: None,
        }
    }
}

impl QuadratureSpec {
    pub fn step_for(&self, f: &SmearingFunction, p_max: f64) -> f64 {
        self.step.unwrap_or_else(|| (f.sigma / 20.0).min(PI / (10.0 * p_max)))
    }

    /// Return a copy with the step halved (twice as many panels).
    pub fn refined(&self, f: &SmearingFunction, p_max: f64) -> Self {
        Self {
            step: Some(self.step_for(f, p_max) / 2.0),
            ..*self
        }
    }
}

/// `K_f(p,q) = (p+q)/(2√(2π)) f̃(p−q)` for the Gaussian `f`.
pub fn free_kernel(f: &SmearingFunction, p: f64, q: f64) -> C64 {
    (p + q) / (4.0 * PI) * f.fourier_scaled(p - q)
}

/// Free kernel on the whole grid.
pub fn free_kernel_matrix(grid: &MomentumGrid, f: &SmearingFunction) -> KernelMatrix {
    let ps = grid.points();
    let mut entries = ComplexMatrix::from_fn(grid.n(), |j, k| free_kernel(f, ps[j], ps[k]));
    entries.hermitize();
    KernelMatrix {
        grid: *grid,
        entries,
        meta: KernelMeta {
            potential: String::from("zero"),
            smearing: Some(*f),
            time_window: None,
            method: KernelMethod::FreeClosedForm,
            warnings: Vec::new(),
        },
    }
}

fn check_cache(cache: &WaveCache, grid: &MomentumGrid) -> Result<()> {
    if cache.len() != grid.n() {
        return Err(Error::Assembly(format!(
            "wave cache holds {} momenta, grid has {}",
            cache.len(),
            grid.n()
        )));
    }
    for (j, k) in cache.momenta().enumerate() {
        if k != grid.point(j) {
            return Err(Error::Assembly(format!(
                "cached momentum {k} does not match grid point p_{j} = {}",
                grid.point(j)
            )));
        }
    }
    Ok(())
}

/// Quadrature nodes for `∫ f(x) g(x) dx` with the window split at every
/// discontinuity of the potential. Weights include `f`.
#[derive(Debug, Clone)]
pub struct QuadratureNodes {
    pub x: Vec<f64>,
    pub side: Vec<Side>,
    pub weight: Vec<f64>,
}

impl QuadratureNodes {
    pub fn new(f: &SmearingFunction, breaks: &[f64], window_sigmas: f64, step: f64) -> Self {
        let (lo, hi) = f.window(window_sigmas);
        let mut cuts: Vec<f64> = breaks.iter().copied().filter(|&b| b > lo && b < hi).collect();
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut edges = vec![lo];
        edges.extend(cuts);
        edges.push(hi);
        let mut out = Self {
            x: Vec::new(),
            side: Vec::new(),
            weight: Vec::new(),
        };
        for w in edges.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (nodes, weights) = simpson_rule(a, b, panels_for_step(a, b, step));
            let last = nodes.len() - 1;
            for (i, (x, wt)) in nodes.into_iter().zip(weights).enumerate() {
                // at an interior cut, take the limit from inside the piece
                let side = if i == last { Side::Left } else { Side::Right };
                out.x.push(x);
                out.side.push(side);
                out.weight.push(wt * f.value(x));
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

/// Precomputed wave tables for Simpson assembly of the current kernel.
/// Rows can be computed independently (and in parallel) with
/// [`CurrentKernelAssembly::row`].
#[derive(Debug, Clone)]
pub struct CurrentKernelAssembly {
    grid: MomentumGrid,
    nodes: usize,
    phi_re: Vec<f64>,
    phi_im: Vec<f64>,
    dphi_re: Vec<f64>,
    dphi_im: Vec<f64>,
    weight: Vec<f64>,
    meta: KernelMeta,
}

impl CurrentKernelAssembly {
    pub fn new(cache: &WaveCache, grid: &MomentumGrid, f: &SmearingFunction, quad: &QuadratureSpec) -> Result<Self> {
        check_cache(cache, grid)?;
        let step = quad.step_for(f, grid.p_max());
        let nodes = QuadratureNodes::new(f, &cache.potential().discontinuities(), quad.window_sigmas, step);
        let m = nodes.len();
        let n = grid.n();
        let mut phi_re = vec![0.0; n * m];
        let mut phi_im = vec![0.0; n * m];
        let mut dphi_re = vec![0.0; n * m];
        let mut dphi_im = vec![0.0; n * m];
        for (j, state) in cache.states().iter().enumerate() {
            for i in 0..m {
                let (p, d) = state.eval_sided(nodes.x[i], nodes.side[i]);
                phi_re[j * m + i] = p.re;
                phi_im[j * m + i] = p.im;
                dphi_re[j * m + i] = d.re;
                dphi_im[j * m + i] = d.im;
            }
        }
        let mut warnings = Vec::new();
        if quad.window_sigmas < WINDOW_SIGMAS {
            warnings.push(format!(
                "quadrature window ±{}σ does not cover the effective support ±{}σ of f",
                quad.window_sigmas, WINDOW_SIGMAS
            ));
        }
        Ok(Self {
            grid: *grid,
            nodes: m,
            phi_re,
            phi_im,
            dphi_re,
            dphi_im,
            weight: nodes.weight,
            meta: KernelMeta {
                potential: format!("{}", cache.potential()),
                smearing: Some(*f),
                time_window: None,
                method: KernelMethod::Quadrature,
                warnings,
            },
        })
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    /// `K(p_j, p_k)` for `k ≥ j`, written to `out[k - j]`.
    pub fn row(&self, j: usize, out: &mut [C64]) {
        let n = self.grid.n();
        let m = self.nodes;
        assert_eq!(out.len(), n - j);
        let r = j * m..(j + 1) * m;
        // a = w conj(φ'_p), c = w conj(φ_p)
        let a_re: Vec<f64> = self.dphi_re[r.clone()]
            .iter()
            .zip(&self.weight)
            .map(|(d, w)| d * w)
            .collect();
        let a_im: Vec<f64> = self.dphi_im[r.clone()]
            .iter()
            .zip(&self.weight)
            .map(|(d, w)| -d * w)
            .collect();
        let c_re: Vec<f64> = self.phi_re[r.clone()]
            .iter()
            .zip(&self.weight)
            .map(|(d, w)| d * w)
            .collect();
        let c_im: Vec<f64> = self.phi_im[r].iter().zip(&self.weight).map(|(d, w)| -d * w).collect();
        for (k, slot) in (j..n).zip(out.iter_mut()) {
            let s = k * m..(k + 1) * m;
            let (sr, si) = current_sum(
                (&a_re, &a_im, &c_re, &c_im),
                (
                    &self.phi_re[s.clone()],
                    &self.phi_im[s.clone()],
                    &self.dphi_re[s.clone()],
                    &self.dphi_im[s],
                ),
            );
            // (i/4π)(sr + i si)
            *slot = C64::new(-si, sr) / (4.0 * PI);
        }
        out[0].im = 0.0;
    }

    /// Builds the full Hermitian matrix from upper-triangle rows (`rows[j]`
    /// holds columns `j..n`).
    pub fn finish(&self, rows: Vec<Vec<C64>>) -> Result<KernelMatrix> {
        let n = self.grid.n();
        if rows.len() != n {
            return Err(Error::Assembly(format!("{} rows for n = {n}", rows.len())));
        }
        let mut entries = ComplexMatrix::zeros(n);
        for (j, row) in rows.into_iter().enumerate() {
            for (off, v) in row.into_iter().enumerate() {
                entries.set(j, j + off, v);
                entries.set(j + off, j, v.conj());
            }
        }
        Ok(KernelMatrix {
            grid: self.grid,
            entries,
            meta: self.meta.clone(),
        })
    }

    /// Sequential assembly.
    pub fn assemble(&self) -> KernelMatrix {
        let n = self.grid.n();
        let rows = (0..n)
            .map(|j| {
                let mut row = vec![C64::new(0.0, 0.0); n - j];
                self.row(j, &mut row);
                row
            })
            .collect();
        self.finish(rows).expect("row count matches grid")
    }
}

/// `Σ_i (a_i φ_i − c_i φ'_i)` with split storage, four lanes wide.
#[inline]
fn current_sum(
    (ar, ai, cr, ci): (&[f64], &[f64], &[f64], &[f64]),
    (pr, pi, dr, di): (&[f64], &[f64], &[f64], &[f64]),
) -> (f64, f64) {
    let m = ar.len();
    let (ai, cr, ci, pr, pi, dr, di) = (&ai[..m], &cr[..m], &ci[..m], &pr[..m], &pi[..m], &dr[..m], &di[..m]);
    let mut re = [0.0; 4];
    let mut im = [0.0; 4];
    let chunks = m / 4;
    for c in 0..chunks {
        for l in 0..4 {
            let i = 4 * c + l;
            re[l] += ar[i] * pr[i] - ai[i] * pi[i] - cr[i] * dr[i] + ci[i] * di[i];
            im[l] += ar[i] * pi[i] + ai[i] * pr[i] - cr[i] * di[i] - ci[i] * dr[i];
        }
    }
    let mut sr = (re[0] + re[1]) + (re[2] + re[3]);
    let mut si = (im[0] + im[1]) + (im[2] + im[3]);
    for i in 4 * chunks..m {
        sr += ar[i] * pr[i] - ai[i] * pi[i] - cr[i] * dr[i] + ci[i] * di[i];
        si += ar[i] * pi[i] + ai[i] * pr[i] - cr[i] * di[i] - ci[i] * dr[i];
    }
    (sr, si)
}

/// Simpson-rule kernel `(i/4π) ∫ f (conj(φ'_p) φ_q − conj(φ_p) φ'_q) dx`.
pub fn current_kernel(
    cache: &WaveCache,
    grid: &MomentumGrid,
    f: &SmearingFunction,
    quad: &QuadratureSpec,
) -> Result<KernelMatrix> {
    Ok(CurrentKernelAssembly::new(cache, grid, f, quad)?.assemble())
}

/// Closed-form kernel when the window `x0 ± Wσ` lies entirely on one side of
/// the potential, where `φ_k` is `T e^{ikx}` (right) or
/// `e^{ikx} + R e^{-ikx}` (left).
pub fn asymptotic_kernel(
    cache: &WaveCache,
    grid: &MomentumGrid,
    f: &SmearingFunction,
    side: Side,
    window_sigmas: f64,
) -> Result<KernelMatrix> {
    check_cache(cache, grid)?;
    let radius = cache.potential().asymptotic_radius();
    let (lo, hi) = f.window(window_sigmas);
    let clear = match side {
        Side::Right => lo > radius,
        Side::Left => hi < -radius,
    };
    if !clear {
        return Err(Error::SupportOverlap { lo, hi, radius });
    }
    let ps = grid.points();
    let states = cache.states();
    let n = grid.n();
    let mut entries = ComplexMatrix::zeros(n);
    for j in 0..n {
        for k in j..n {
            let (p, q) = (ps[j], ps[k]);
            let v = match side {
                Side::Right => states[j].transmission().conj() * states[k].transmission() * free_kernel(f, p, q),
                Side::Left => {
                    let rp = states[j].reflection().conj();
                    let rq = states[k].reflection();
                    ((p + q) * f.fourier_scaled(p - q)
                        + (p - q) * rq * f.fourier_scaled(p + q)
                        + (q - p) * rp * f.fourier_scaled(-(p + q))
                        - (p + q) * rp * rq * f.fourier_scaled(q - p))
                        / (4.0 * PI)
                }
            };
            entries.set(j, k, v);
            entries.set(k, j, v.conj());
        }
        let d = entries.get(j, j);
        entries.set(j, j, C64::new(d.re, 0.0));
    }
    Ok(KernelMatrix {
        grid: *grid,
        entries,
        meta: KernelMeta {
            potential: format!("{}", cache.potential()),
            smearing: Some(*f),
            time_window: None,
            method: match side {
                Side::Left => KernelMethod::AsymptoticLeft,
                Side::Right => KernelMethod::AsymptoticRight,
            },
            warnings: Vec::new(),
        },
    })
}

/// `∫₀ᵀ e^{iΔt/2} dt = T e^{iΔT/4} sinc(ΔT/4)`.
fn time_integral(delta: f64, window: f64) -> C64 {
    let theta = delta * window / 4.0;
    let sinc = if theta.abs() < 1e-8 {
        1.0 - theta * theta / 6.0
    } else {
        theta.sin() / theta
    };
    C64::new((theta).cos(), (theta).sin()) * (window * sinc)
}

/// Free time-integrated current through `x = 0` over `[0, T]`:
/// `K(p,q) = (p+q)/(4π) ∫₀ᵀ e^{i(p²−q²)t/2} dt`.
pub fn temporal_kernel(time_window: f64, grid: &MomentumGrid) -> Result<KernelMatrix> {
    if !(time_window > 0.0 && time_window.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "time window must be positive, got {time_window}"
        )));
    }
    let ps = grid.points();
    let mut entries = ComplexMatrix::from_fn(grid.n(), |j, k| {
        let (p, q) = (ps[j], ps[k]);
        (p + q) / (4.0 * PI) * time_integral(p * p - q * q, time_window)
    });
    entries.hermitize();
    Ok(KernelMatrix {
        grid: *grid,
        entries,
        meta: KernelMeta {
            potential: String::from("zero"),
            smearing: None,
            time_window: Some(time_window),
            method: KernelMethod::Temporal,
            warnings: Vec::new(),
        },
    })
}

/// Time-integrated current through `x = 0` for asymptotic right-movers in a
/// potential: `K_V(p,q,0) ∫₀ᵀ e^{i(p²−q²)t/2} dt`, using the cached waves at
/// the origin (right-sided at a delta).
pub fn temporal_kernel_scattering(cache: &WaveCache, grid: &MomentumGrid, time_window: f64) -> Result<KernelMatrix> {
    check_cache(cache, grid)?;
    let mut k = temporal_kernel(time_window, grid)?;
    let ps = grid.points();
    let waves: Vec<(C64, C64)> = cache.states().iter().map(|s| s.eval(0.0)).collect();
    let n = grid.n();
    for j in 0..n {
        for l in 0..n {
            let (pj, dj) = waves[j];
            let (pl, dl) = waves[l];
            let local = C64::i() / (4.0 * PI) * (dj.conj() * pl - pj.conj() * dl);
            let t = time_integral(ps[j] * ps[j] - ps[l] * ps[l], time_window);
            k.entries.set(j, l, local * t);
        }
    }
    k.entries.hermitize();
    k.meta.potential = format!("{}", cache.potential());
    Ok(k)
}
