//! Dense complex matrices and the Hermitian Cholesky factorisation used by
//! shifted inverse iteration.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float as _;

use crate::error::{Error, Result};

/// Square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    n: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![C64::new(0.0, 0.0); n * n],
        }
    }

    pub fn from_fn<F: FnMut(usize, usize) -> C64>(n: usize, mut f: F) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = f(i, j);
            }
        }
        m
    }

    pub fn from_row_major(n: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::Dimension(alloc::format!(
                "{} entries for a {n}x{n} matrix",
                data.len()
            )));
        }
        Ok(Self { n, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [C64] {
        let n = self.n;
        &mut self.data[i * n..(i + 1) * n]
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.n + j] = v;
    }

    pub fn scale(&mut self, c: f64) {
        for z in &mut self.data {
            *z *= c;
        }
    }

    pub fn add_identity(&mut self, c: f64) {
        for i in 0..self.n {
            self.data[i * self.n + i] += c;
        }
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self) -> bool {
        (0..self.n).all(|i| (0..=i).all(|j| self.get(i, j) == self.get(j, i).conj()))
    }

    /// `M ← (M + M†)/2`; afterwards Hermitian to the last bit.
    pub fn hermitize(&mut self) {
        let n = self.n;
        for i in 0..n {
            let d = self.data[i * n + i];
            self.data[i * n + i] = C64::new(d.re, 0.0);
            for j in 0..i {
                let avg = (self.data[i * n + j] + self.data[j * n + i].conj()) * 0.5;
                self.data[i * n + j] = avg;
                self.data[j * n + i] = avg.conj();
            }
        }
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        (0..self.n).map(|i| dot(self.row(i), v)).collect()
    }

    /// `v† M v`, real part (exact for Hermitian `M` up to rounding).
    pub fn quadratic_form(&self, v: &[C64]) -> f64 {
        self.mul_vec(v).iter().zip(v).map(|(mv, vi)| (vi.conj() * mv).re).sum()
    }
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).fold(C64::new(0.0, 0.0), |acc, (x, y)| acc + x * y)
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `Σ a_k conj(b_k)` over split real/imaginary slices, four lanes wide so
/// the loop vectorises.
#[inline]
fn dot_conj_split(ar: &[f64], ai: &[f64], br: &[f64], bi: &[f64]) -> (f64, f64) {
    let n = ar.len();
    let (ar, ai, br, bi) = (&ar[..n], &ai[..n], &br[..n], &bi[..n]);
    let mut re = [0.0; 4];
    let mut im = [0.0; 4];
    let chunks = n / 4;
    for c in 0..chunks {
        for l in 0..4 {
            let k = 4 * c + l;
            re[l] += ar[k] * br[k] + ai[k] * bi[k];
            im[l] += ai[k] * br[k] - ar[k] * bi[k];
        }
    }
    let mut sr = (re[0] + re[1]) + (re[2] + re[3]);
    let mut si = (im[0] + im[1]) + (im[2] + im[3]);
    for k in 4 * chunks..n {
        sr += ar[k] * br[k] + ai[k] * bi[k];
        si += ai[k] * br[k] - ar[k] * bi[k];
    }
    (sr, si)
}

/// Lower Cholesky factor `L L† = M − shift·I` of a Hermitian matrix.
/// Construction fails exactly when `shift` is not below the spectrum.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Cholesky {
    pub fn new(m: &ComplexMatrix, shift: f64) -> Result<Self> {
        let n = m.dim();
        let mut re = vec![0.0; n * n];
        let mut im = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let a = m.get(i, j);
                let (sr, si) = {
                    let (ri, rj) = (i * n, j * n);
                    dot_conj_split(&re[ri..ri + j], &im[ri..ri + j], &re[rj..rj + j], &im[rj..rj + j])
                };
                if i == j {
                    let d = a.re - shift - sr;
                    if !(d > 0.0) {
                        return Err(Error::NotPositiveDefinite { row: i, pivot: d });
                    }
                    re[i * n + i] = d.sqrt();
                } else {
                    let ljj = re[j * n + j];
                    re[i * n + j] = (a.re - sr) / ljj;
                    im[i * n + j] = (a.im - si) / ljj;
                }
            }
        }
        Ok(Self { n, re, im })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `(M − shift) x = b`.
    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let n = self.n;
        let mut yr: Vec<f64> = b.iter().map(|z| z.re).collect();
        let mut yi: Vec<f64> = b.iter().map(|z| z.im).collect();
        // L y = b
        for i in 0..n {
            let row = i * n;
            let (mut sr, mut si) = (0.0, 0.0);
            for k in 0..i {
                let (lr, li) = (self.re[row + k], self.im[row + k]);
                sr += lr * yr[k] - li * yi[k];
                si += lr * yi[k] + li * yr[k];
            }
            let d = self.re[row + i];
            yr[i] = (yr[i] - sr) / d;
            yi[i] = (yi[i] - si) / d;
        }
        // L† x = y, column sweep so row i of L is read contiguously
        for i in (0..n).rev() {
            let row = i * n;
            let d = self.re[row + i];
            let (xr, xi) = (yr[i] / d, yi[i] / d);
            yr[i] = xr;
            yi[i] = xi;
            for k in 0..i {
                // y_k −= conj(L_ik) x_i
                let (lr, li) = (self.re[row + k], self.im[row + k]);
                yr[k] -= lr * xr + li * xi;
                yi[k] -= lr * xi - li * xr;
            }
        }
        yr.into_iter().zip(yi).map(|(r, i)| C64::new(r, i)).collect()
    }
}
