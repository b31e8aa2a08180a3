//! Short-range potentials `V(x)`.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float as _;

use crate::error::{Error, Result};
use crate::quadrature::simpson;

/// Beyond this radius `|V|` of the Pöschl–Teller well is below ~1e-6 of its
/// depth and `1 - tanh|x|` at `radius + 2` is ~1e-8.
pub const POESCHL_TELLER_RADIUS: f64 = 7.5;

/// Tolerance for treating a Pöschl–Teller `mu` as an integer.
pub const INTEGER_MU_TOL: f64 = 1e-9;

/// A real potential with `∫(1+|x|)|V| < ∞`.
#[derive(Clone)]
pub enum Potential {
    Zero,
    /// `V(x) = λ δ(x)`.
    Delta {
        strength: f64,
    },
    /// `V(x) = λ` on `(-1, 1)`, zero outside.
    Rectangular {
        strength: f64,
    },
    /// `V(x) = -μ(μ+1) / (2 cosh² x)`.
    PoeschlTeller {
        mu: f64,
    },
    Generic(GenericPotential),
}

/// Continuous potential given by a function, vanishing outside
/// `[-support_radius, support_radius]`.
#[derive(Clone)]
pub struct GenericPotential {
    func: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    support_radius: f64,
    label: String,
}

impl GenericPotential {
    pub fn new<F>(label: impl Into<String>, support_radius: f64, func: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(support_radius >= 0.0 && support_radius.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "support radius must be finite and non-negative, got {support_radius}"
            )));
        }
        Ok(Self {
            func: Arc::new(func),
            support_radius,
            label: label.into(),
        })
    }

    /// Natural cubic spline through tabulated samples; zero outside the
    /// support radius.
    pub fn tabulated(label: impl Into<String>, support_radius: f64, xs: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let spline = CubicSpline::natural(xs, values)?;
        Self::new(label, support_radius, move |x| spline.eval(x))
    }

    pub fn value(&self, x: f64) -> f64 {
        if x.abs() > self.support_radius {
            0.0
        } else {
            (self.func)(x)
        }
    }

    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Debug for GenericPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GenericPotential")
            .field("label", &self.label)
            .field("support_radius", &self.support_radius)
            .finish_non_exhaustive()
    }
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Zero => write!(f, "Zero"),
            Self::Delta { strength } => write!(f, "Delta({strength})"),
            Self::Rectangular { strength } => write!(f, "Rectangular({strength})"),
            Self::PoeschlTeller { mu } => write!(f, "PoeschlTeller({mu})"),
            Self::Generic(g) => g.fmt(f),
        }
    }
}

impl fmt::Display for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Zero => write!(f, "zero"),
            Self::Delta { strength } => write!(f, "delta(strength={strength})"),
            Self::Rectangular { strength } => write!(f, "rectangular(strength={strength})"),
            Self::PoeschlTeller { mu } => write!(f, "poeschl_teller(mu={mu})"),
            Self::Generic(g) => write!(f, "generic({}, support_radius={})", g.label, g.support_radius),
        }
    }
}

impl Potential {
    /// Regular part of `V(x)`; point interactions contribute nothing here.
    pub fn value(&self, x: f64) -> f64 {
        match self {
            Self::Zero | Self::Delta { .. } => 0.0,
            Self::Rectangular { strength } => {
                if x.abs() < 1.0 {
                    *strength
                } else {
                    0.0
                }
            }
            Self::PoeschlTeller { mu } => {
                let c = x.cosh();
                -mu * (mu + 1.0) / (2.0 * c * c)
            }
            Self::Generic(g) => g.value(x),
        }
    }

    /// Radius outside which `V` vanishes (or is numerically negligible for
    /// Pöschl–Teller).
    pub fn support_radius(&self) -> f64 {
        match self {
            Self::Zero | Self::Delta { .. } => 0.0,
            Self::Rectangular { .. } => 1.0,
            Self::PoeschlTeller { .. } => POESCHL_TELLER_RADIUS,
            Self::Generic(g) => g.support_radius,
        }
    }

    pub fn is_compact(&self) -> bool {
        !matches!(self, Self::PoeschlTeller { .. })
    }

    /// Radius outside which the waves may be treated as plane-wave
    /// combinations for asymptotic kernels. Equals the support radius for
    /// compact potentials; for Pöschl–Teller it is where `|V|` has dropped to
    /// 1% of its depth.
    pub fn asymptotic_radius(&self) -> f64 {
        match self {
            Self::PoeschlTeller { .. } => 10.0_f64.acosh(),
            _ => self.support_radius(),
        }
    }

    /// Points where `∂ₓφ_k` (delta) or `∂ₓ²φ_k` (rectangular edges) jump.
    pub fn discontinuities(&self) -> Vec<f64> {
        match self {
            Self::Delta { .. } => alloc::vec![0.0],
            Self::Rectangular { .. } => alloc::vec![-1.0, 1.0],
            _ => Vec::new(),
        }
    }

    pub fn is_integer_poeschl_teller(&self, value: f64) -> bool {
        matches!(self, Self::PoeschlTeller { mu } if (mu - value).abs() < INTEGER_MU_TOL)
    }

    pub fn has_closed_form(&self) -> bool {
        match self {
            Self::Zero | Self::Delta { .. } | Self::Rectangular { .. } => true,
            Self::PoeschlTeller { .. } => self.is_integer_poeschl_teller(1.0),
            Self::Generic(_) => false,
        }
    }

    /// `∫(1+|x|)|V(x)| dx`; for a delta this is `|λ|`, the quantity that
    /// enters the point-interaction bound.
    pub fn norm_1plus(&self) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::Delta { strength } => strength.abs(),
            Self::Rectangular { strength } => 3.0 * strength.abs(),
            Self::PoeschlTeller { .. } => {
                // sech² has dropped below 1e-34 at |x| = 40.
                2.0 * simpson(|x| (1.0 + x) * self.value(x).abs(), 0.0, 40.0, 40_000)
            }
            Self::Generic(g) => {
                let r = g.support_radius;
                if r == 0.0 {
                    return 0.0;
                }
                let panels = ((r * 2000.0).ceil() as usize).max(2000);
                simpson(|x| (1.0 + x.abs()) * g.value(x).abs(), -r, r, 2 * panels)
            }
        }
    }

    /// Proven bound `|φ_k(x)| ≤ c_V (1+|x|)` where one is known in closed form.
    pub fn declared_c_v(&self) -> Option<f64> {
        match self {
            Self::Zero => Some(1.0),
            Self::Delta { .. } => Some(2.0),
            Self::PoeschlTeller { .. } if self.is_integer_poeschl_teller(1.0) => Some(1.0),
            _ => None,
        }
    }
}

/// Natural cubic spline interpolant; zero outside the tabulated range.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    second: Vec<f64>,
}

impl CubicSpline {
    pub fn natural(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        let n = xs.len();
        if n != ys.len() {
            return Err(Error::Dimension(format!("{} abscissae but {} values", n, ys.len())));
        }
        if n < 2 {
            return Err(Error::InvalidParameter("spline needs at least two samples".into()));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter(
                "spline abscissae must be strictly increasing".into(),
            ));
        }
        // Tridiagonal solve for second derivatives, natural end conditions.
        let mut second = alloc::vec![0.0; n];
        let mut u = alloc::vec![0.0; n];
        for i in 1..n - 1 {
            let sig = (xs[i] - xs[i - 1]) / (xs[i + 1] - xs[i - 1]);
            let p = sig * second[i - 1] + 2.0;
            second[i] = (sig - 1.0) / p;
            let d = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]) - (ys[i] - ys[i - 1]) / (xs[i] - xs[i - 1]);
            u[i] = (6.0 * d / (xs[i + 1] - xs[i - 1]) - sig * u[i - 1]) / p;
        }
        second[n - 1] = 0.0;
        for i in (0..n - 1).rev() {
            second[i] = second[i] * second[i + 1] + u[i];
        }
        Ok(Self { xs, ys, second })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x < self.xs[0] || x > self.xs[n - 1] {
            return 0.0;
        }
        let hi = self.xs.partition_point(|&xi| xi < x).clamp(1, n - 1);
        let lo = hi - 1;
        let h = self.xs[hi] - self.xs[lo];
        let a = (self.xs[hi] - x) / h;
        let b = (x - self.xs[lo]) / h;
        a * self.ys[lo]
            + b * self.ys[hi]
            + ((a * a * a - a) * self.second[lo] + (b * b * b - b) * self.second[hi]) * h * h / 6.0
    }
}
