//! Gaussian smearing functions.

use core::f64::consts::{E, PI};

use num_complex::Complex64 as C64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float as _;

/// Half-width of the integration window in units of `sigma`; the Gaussian
/// tail mass beyond it is below 1e-22.
pub const WINDOW_SIGMAS: f64 = 10.0;

/// `f(x) = exp(−(x−x0)²/2σ²) / (σ√(2π))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmearingFunction {
    pub x0: f64,
    pub sigma: f64,
}

impl SmearingFunction {
    pub fn new(x0: f64, sigma: f64) -> crate::Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite() && x0.is_finite()) {
            return Err(crate::Error::InvalidParameter(alloc::format!(
                "smearing needs finite x0 and sigma > 0, got x0={x0}, sigma={sigma}"
            )));
        }
        Ok(Self { x0, sigma })
    }

    pub fn value(&self, x: f64) -> f64 {
        let u = (x - self.x0) / self.sigma;
        (-0.5 * u * u).exp() / (self.sigma * (2.0 * PI).sqrt())
    }

    pub fn derivative(&self, x: f64) -> f64 {
        -(x - self.x0) / (self.sigma * self.sigma) * self.value(x)
    }

    /// `f̃(p) = (2π)^{-1/2} ∫ e^{-ipx} f(x) dx`.
    pub fn fourier(&self, p: f64) -> C64 {
        self.fourier_scaled(p) / (2.0 * PI).sqrt()
    }

    /// `∫ e^{-ipx} f(x) dx = e^{-ipx0} e^{-σ²p²/2}`.
    pub fn fourier_scaled(&self, p: f64) -> C64 {
        let phase = -p * self.x0;
        let damp = (-0.5 * self.sigma * self.sigma * p * p).exp();
        C64::new(damp * phase.cos(), damp * phase.sin())
    }

    pub fn sup_norm(&self) -> f64 {
        1.0 / (self.sigma * (2.0 * PI).sqrt())
    }

    /// `‖f′‖∞`, attained at `x0 ± σ`.
    pub fn derivative_sup_norm(&self) -> f64 {
        1.0 / (self.sigma * self.sigma * (2.0 * PI * E).sqrt())
    }

    /// `[x0 − Wσ, x0 + Wσ]`.
    pub fn window(&self, sigmas: f64) -> (f64, f64) {
        (self.x0 - sigmas * self.sigma, self.x0 + sigmas * self.sigma)
    }
}
