//! Discretisation on a midpoint momentum grid and the lowest eigenpair by
//! shifted inverse iteration.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float as _;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::kernels::KernelMatrix;
use crate::linalg::{norm, Cholesky, ComplexMatrix};

/// Largest dimension accepted by [`dense_crosscheck`].
pub const DENSE_MAX: usize = 400;

/// `p_j = (j + ½) p_max / n`, `j = 0..n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentumGrid {
    n: usize,
    p_max: f64,
}

impl MomentumGrid {
    pub fn new(n: usize, p_max: f64) -> Result<Self> {
        if n == 0 || !(p_max > 0.0 && p_max.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "momentum grid needs n > 0 and p_max > 0, got n={n}, p_max={p_max}"
            )));
        }
        Ok(Self { n, p_max })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p_max(&self) -> f64 {
        self.p_max
    }

    pub fn spacing(&self) -> f64 {
        self.p_max / self.n as f64
    }

    pub fn point(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.spacing()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.point(j)).collect()
    }

    /// Same cutoff, `n / factor` points (at least 4).
    pub fn coarse(&self, factor: usize) -> Self {
        Self {
            n: (self.n / factor.max(1)).max(4).min(self.n),
            p_max: self.p_max,
        }
    }
}

/// `M = (p_max/n) K`.
pub fn discretize(kernel: &KernelMatrix) -> ComplexMatrix {
    let mut m = kernel.entries.clone();
    m.scale(kernel.grid.spacing());
    m
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    /// Convergence threshold on successive Rayleigh quotients.
    pub tol: f64,
    /// Residual must also drop below `residual_factor · max|M_ij|`.
    pub residual_factor: f64,
    pub max_iterations: usize,
    /// Attempts at moving a failed shift further down.
    pub max_shift_retries: usize,
    /// The first pass runs on `n / coarse_factor` points.
    pub coarse_factor: usize,
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            residual_factor: 1e-8,
            max_iterations: 10_000,
            max_shift_retries: 5,
            coarse_factor: 4,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpair {
    pub value: f64,
    /// Unit vector, largest component real and positive.
    pub vector: Vec<C64>,
    /// `‖M v − value v‖`.
    pub residual: f64,
    pub iterations: usize,
    /// Shift in use when the iteration converged.
    pub shift: f64,
}

/// Constant vector plus a small seeded perturbation, normalised.
pub fn start_vector(n: usize, seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut unit = || (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
    let mut v: Vec<C64> = (0..n).map(|_| C64::new(1.0 + 1e-3 * unit(), 1e-3 * unit())).collect();
    let s = norm(&v);
    v.iter_mut().for_each(|z| *z /= s);
    v
}

fn fix_phase(v: &mut [C64]) {
    let big = v
        .iter()
        .copied()
        .max_by(|a, b| a.norm_sqr().partial_cmp(&b.norm_sqr()).unwrap())
        .unwrap_or(C64::new(1.0, 0.0));
    if big.norm() > 0.0 {
        let phase = big.conj() / big.norm();
        v.iter_mut().for_each(|z| *z *= phase);
    }
}

fn factor_below(m: &ComplexMatrix, lambda0: f64, retries: usize) -> Result<(Cholesky, f64)> {
    let mut shift = lambda0;
    for _ in 0..=retries {
        match Cholesky::new(m, shift) {
            Ok(c) => return Ok((c, shift)),
            Err(Error::NotPositiveDefinite { .. }) => {
                shift = if shift < 0.0 {
                    2.0 * shift
                } else {
                    -shift.abs().max(1.0)
                };
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::ShiftNotBelowSpectrum {
        shift: lambda0,
        attempts: retries + 1,
    })
}

fn rayleigh(m: &ComplexMatrix, v: &[C64]) -> (f64, f64) {
    let mv = m.mul_vec(v);
    let rq: f64 = v.iter().zip(&mv).map(|(a, b)| (a.conj() * b).re).sum();
    let res = mv
        .iter()
        .zip(v)
        .map(|(b, a)| (b - a * rq).norm_sqr())
        .sum::<f64>()
        .sqrt();
    (rq, res)
}

fn iterate(
    m: &ComplexMatrix,
    lambda0: f64,
    start: &[C64],
    opts: &EigenOptions,
    refine_shift: bool,
) -> Result<Eigenpair> {
    if m.dim() != start.len() {
        return Err(Error::Dimension(format!(
            "start vector of length {} for a {}x{} matrix",
            start.len(),
            m.dim(),
            m.dim()
        )));
    }
    let (mut chol, mut shift) = factor_below(m, lambda0, opts.max_shift_retries)?;
    let threshold = opts.residual_factor * m.max_abs();
    let mut v = start.to_vec();
    let s = norm(&v);
    v.iter_mut().for_each(|z| *z /= s);
    let (mut prev, _) = rayleigh(m, &v);
    let mut residual = f64::INFINITY;
    for it in 1..=opts.max_iterations {
        let mut w = chol.solve(&v);
        let s = norm(&w);
        w.iter_mut().for_each(|z| *z /= s);
        v = w;
        let (rq, res) = rayleigh(m, &v);
        residual = res;
        if (rq - prev).abs() < opts.tol && res < threshold {
            fix_phase(&mut v);
            return Ok(Eigenpair {
                value: rq,
                vector: v,
                residual: res,
                iterations: it,
                shift,
            });
        }
        prev = rq;
        // some eigenvalue lies in [rq − res, rq + res]; once v is dominated
        // by the lowest eigenvector a shift just below rq − res is safe. A
        // failed factorisation proves the candidate is above the spectrum,
        // so retreat towards the last good shift.
        if refine_shift && it % 5 == 0 {
            let mut candidate = rq - res - 0.01 * rq.abs() - 1e-6;
            for _ in 0..4 {
                if candidate <= shift {
                    break;
                }
                if let Ok(c) = Cholesky::new(m, candidate) {
                    chol = c;
                    shift = candidate;
                    break;
                }
                candidate = 0.5 * (candidate + shift);
            }
        }
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iterations,
        residual,
    })
}

/// Lowest eigenpair of Hermitian `m` by inverse iteration with fixed shift
/// `lambda0`, which must lie below the spectrum. A failed factorisation moves
/// the shift further down, up to `max_shift_retries` times.
pub fn lowest_eigenpair(m: &ComplexMatrix, lambda0: f64, start: &[C64], opts: &EigenOptions) -> Result<Eigenpair> {
    iterate(m, lambda0, start, opts, false)
}

/// Outcome of the two-pass solve on the target grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BackflowResult {
    pub beta: f64,
    pub eigenvector: Vec<C64>,
    pub residual: f64,
    /// Iterations on the coarse and the fine pass.
    pub iterations: [usize; 2],
    /// Final shifts of the coarse and the fine pass.
    pub shifts: [f64; 2],
    pub grid: MomentumGrid,
}

impl BackflowResult {
    /// Probability in components with `p_j > fraction · p_max`.
    pub fn mass_above(&self, fraction: f64) -> f64 {
        self.eigenvector
            .iter()
            .enumerate()
            .filter(|(j, _)| self.grid.point(*j) > fraction * self.grid.p_max())
            .map(|(_, z)| z.norm_sqr())
            .sum()
    }
}

/// Coarse pass on `n / coarse_factor` points starting from `lambda0`, then
/// the target grid with the shift `β₁ − 0.1|β₁| − 10⁻³`. `build` returns the
/// discretised matrix for a grid.
pub fn solve_backflow<F>(grid: &MomentumGrid, lambda0: f64, opts: &EigenOptions, mut build: F) -> Result<BackflowResult>
where
    F: FnMut(&MomentumGrid) -> Result<ComplexMatrix>,
{
    let coarse = grid.coarse(opts.coarse_factor);
    let m1 = build(&coarse)?;
    let first = iterate(&m1, lambda0, &start_vector(coarse.n(), opts.seed), opts, true)?;
    drop(m1);
    let b1 = first.value;
    let m2 = build(grid)?;
    let second = iterate(
        &m2,
        b1 - 0.1 * b1.abs() - 1e-3,
        &start_vector(grid.n(), opts.seed),
        opts,
        false,
    )?;
    Ok(BackflowResult {
        beta: second.value,
        eigenvector: second.vector,
        residual: second.residual,
        iterations: [first.iterations, second.iterations],
        shifts: [first.shift, second.shift],
        grid: *grid,
    })
}

/// All eigenvalues, ascending, from a dense Hermitian solver.
pub fn dense_crosscheck(m: &ComplexMatrix) -> Result<Vec<f64>> {
    let n = m.dim();
    if n > DENSE_MAX {
        return Err(Error::InvalidParameter(format!(
            "dense cross-check is limited to n <= {DENSE_MAX}, got {n}"
        )));
    }
    let dm = DMatrix::from_fn(n, n, |i, j| m.get(i, j));
    let mut ev: Vec<f64> = dm.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(ev)
}
