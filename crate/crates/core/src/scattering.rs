//! Stationary scattering solutions `φ_k` with asymptotics
//! `e^{ikx} + R e^{-ikx}` on the left and `T e^{ikx}` on the right.
//!
//! Closed forms are used for the zero, delta, rectangular and `μ = 1`
//! Pöschl–Teller potentials. Everything else is integrated numerically via
//! `χ(k,x) = φ_k(x) e^{-ikx} / T(k)`, which obeys
//! `χ'' = 2Vχ − 2ikχ'` with `χ = 1`, `χ' = 0` to the right of the potential.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float as _;

use crate::error::{Error, Result};
use crate::ode::{dopri5, DenseSolution, OdeOptions};
use crate::potential::Potential;

/// Smallest momentum accepted by the numerical solver; below it the
/// `e^{-2ikx}` mode cannot be separated from the constant over the grid.
pub const K_MIN: f64 = 1e-3;

/// Distance beyond the support radius where the ODE starts and where `T`,
/// `R` are read off.
pub const EXTRACTION_MARGIN: f64 = 2.0;

/// Default relative ODE tolerance (absolute tolerance is 1e-3 of it).
pub const DEFAULT_TOL: f64 = 1e-9;

/// Which one-sided limit to take at a point where `∂ₓφ` jumps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

/// A scattering solution sampled on a position grid.
#[derive(Debug, Clone)]
pub struct ScatteringWave {
    pub k: f64,
    pub x_grid: Vec<f64>,
    pub phi: Vec<C64>,
    pub dphi: Vec<C64>,
    pub transmission: C64,
    pub reflection: C64,
}

impl ScatteringWave {
    /// `j(x) = Im(conj(φ) φ')`, which for a scattering state equals
    /// `k |T|²` everywhere.
    pub fn current(&self) -> Vec<f64> {
        self.phi
            .iter()
            .zip(&self.dphi)
            .map(|(p, d)| (p.conj() * d).im)
            .collect()
    }
}

#[derive(Debug, Clone)]
struct NumericWave {
    x_left: f64,
    x_right: f64,
    /// Ordered right to left; each piece runs from `start` down to `end`.
    pieces: Vec<DenseSolution<4>>,
}

#[derive(Debug, Clone)]
enum Repr {
    Free,
    Delta,
    Rectangular { kappa2: f64, phi_left: C64, dphi_left: C64 },
    PoeschlTellerOne,
    Numeric(NumericWave),
}

/// The solution `φ_k` for one momentum, evaluable at any `x`.
#[derive(Debug, Clone)]
pub struct ScatteringState {
    k: f64,
    transmission: C64,
    reflection: C64,
    repr: Repr,
}

fn plane(kx: f64) -> C64 {
    C64::new(kx.cos(), kx.sin())
}

/// `cos(κs)` and `sin(κs)/κ` continued to `κ² ≤ 0`.
fn fundamental(kappa2: f64, s: f64) -> (f64, f64) {
    if kappa2 > 0.0 {
        let kappa = kappa2.sqrt();
        ((kappa * s).cos(), (kappa * s).sin() / kappa)
    } else if kappa2 < 0.0 {
        let gamma = (-kappa2).sqrt();
        ((gamma * s).cosh(), (gamma * s).sinh() / gamma)
    } else {
        (1.0, s)
    }
}

impl ScatteringState {
    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn transmission(&self) -> C64 {
        self.transmission
    }

    pub fn reflection(&self) -> C64 {
        self.reflection
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self.repr, Repr::Numeric(_))
    }

    /// Closed-form solution. Supported: zero, delta, rectangular and
    /// Pöschl–Teller with `μ = 1`.
    pub fn analytic(potential: &Potential, k: f64) -> Result<Self> {
        if !(k > 0.0) {
            return Err(Error::NonPositiveMomentum(k));
        }
        let i = C64::i();
        match potential {
            Potential::Zero => Ok(Self {
                k,
                transmission: C64::new(1.0, 0.0),
                reflection: C64::new(0.0, 0.0),
                repr: Repr::Free,
            }),
            Potential::Delta { strength } => {
                // continuity plus φ'(0⁺) − φ'(0⁻) = 2λφ(0)
                let ik = i * k;
                let t = ik / (ik - strength);
                Ok(Self {
                    k,
                    transmission: t,
                    reflection: t - 1.0,
                    repr: Repr::Delta,
                })
            }
            Potential::Rectangular { strength } => {
                let kappa2 = k * k - 2.0 * strength;
                let (c, s) = fundamental(kappa2, 2.0);
                let denom = 2.0 * ik_const(k) * c + (kappa2 + k * k) * s;
                let r = plane(-2.0 * k) * (2.0 * strength * s) / denom;
                let phi_left = plane(-k) + r * plane(k);
                let dphi_left = i * k * (plane(-k) - r * plane(k));
                let t = plane(-k) * (phi_left * c + dphi_left * s);
                Ok(Self {
                    k,
                    transmission: t,
                    reflection: r,
                    repr: Repr::Rectangular {
                        kappa2,
                        phi_left,
                        dphi_left,
                    },
                })
            }
            Potential::PoeschlTeller { .. } if potential.is_integer_poeschl_teller(1.0) => Ok(Self {
                k,
                transmission: (k + i) / (k - i),
                reflection: C64::new(0.0, 0.0),
                repr: Repr::PoeschlTellerOne,
            }),
            other => Err(Error::NoClosedForm(format!("{other}"))),
        }
    }

    /// Numerical solution through the `χ` ODE, integrated from
    /// `support_radius + 2` to `-(support_radius + 2)`.
    pub fn numeric(potential: &Potential, k: f64, tol: f64) -> Result<Self> {
        if !(k > 0.0) {
            return Err(Error::NonPositiveMomentum(k));
        }
        if k < K_MIN {
            return Err(Error::MomentumBelowFloor { k, floor: K_MIN });
        }
        if matches!(potential, Potential::Delta { .. }) {
            return Err(Error::PointInteraction(format!("{potential}")));
        }
        let x_right = potential.support_radius() + EXTRACTION_MARGIN;
        let x_left = -x_right;
        let opts = OdeOptions {
            rtol: tol,
            atol: tol * 1e-3,
            initial_step: (0.1 / k).min(0.05),
            ..OdeOptions::default()
        };

        let mut breaks: Vec<f64> = potential
            .discontinuities()
            .into_iter()
            .filter(|&x| x > x_left && x < x_right)
            .collect();
        breaks.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let mut bounds = alloc::vec![x_right];
        bounds.extend(breaks);
        bounds.push(x_left);

        let mut state = [1.0, 0.0, 0.0, 0.0];
        let mut pieces = Vec::with_capacity(bounds.len() - 1);
        for w in bounds.windows(2) {
            let (hi, lo) = (w[0], w[1]);
            // keep V evaluations strictly inside the piece so jumps in V
            // are seen from the correct side
            let eps = 1e-12 * hi.abs().max(lo.abs()).max(1.0);
            let rhs = |x: f64, y: &[f64; 4]| {
                let v = 2.0 * potential.value(x.clamp(lo + eps, hi - eps));
                [y[2], y[3], v * y[0] + 2.0 * k * y[3], v * y[1] - 2.0 * k * y[2]]
            };
            let sol = dopri5(rhs, hi, state, lo, &opts)?;
            state = sol.final_state();
            pieces.push(sol);
        }

        let chi = C64::new(state[0], state[1]);
        let dchi = C64::new(state[2], state[3]);
        let (t, r) = extract_tr(chi, dchi, x_left, k)?;
        Ok(Self {
            k,
            transmission: t,
            reflection: r,
            repr: Repr::Numeric(NumericWave {
                x_left,
                x_right,
                pieces,
            }),
        })
    }

    /// Closed form when available, numerical integration otherwise.
    pub fn solve(potential: &Potential, k: f64, tol: f64) -> Result<Self> {
        if potential.has_closed_form() {
            Self::analytic(potential, k)
        } else {
            Self::numeric(potential, k, tol)
        }
    }

    /// `(φ_k(x), ∂ₓφ_k(x))`, right-sided at a delta.
    pub fn eval(&self, x: f64) -> (C64, C64) {
        self.eval_sided(x, Side::Right)
    }

    /// `(φ_k(x), ∂ₓφ_k(x))` with the one-sided limit `side` where the
    /// derivative jumps.
    pub fn eval_sided(&self, x: f64, side: Side) -> (C64, C64) {
        let k = self.k;
        let i = C64::i();
        let left_form = |x: f64| {
            let e = plane(k * x);
            let em = plane(-k * x);
            (e + self.reflection * em, i * k * (e - self.reflection * em))
        };
        let right_form = |x: f64| {
            let e = self.transmission * plane(k * x);
            (e, i * k * e)
        };
        match &self.repr {
            Repr::Free => {
                let e = plane(k * x);
                (e, i * k * e)
            }
            Repr::Delta => {
                if x < 0.0 || (x == 0.0 && side == Side::Left) {
                    left_form(x)
                } else {
                    right_form(x)
                }
            }
            Repr::Rectangular {
                kappa2,
                phi_left,
                dphi_left,
            } => {
                if x <= -1.0 {
                    left_form(x)
                } else if x >= 1.0 {
                    right_form(x)
                } else {
                    let (c, s) = fundamental(*kappa2, x + 1.0);
                    (phi_left * c + dphi_left * s, phi_left * (-kappa2 * s) + dphi_left * c)
                }
            }
            Repr::PoeschlTellerOne => {
                let e = plane(k * x);
                let th = x.tanh();
                let sech2 = 1.0 - th * th;
                let den = C64::new(k, -1.0);
                let phi = e * C64::new(k, th) / den;
                let dphi = e * (i * k * C64::new(k, th) + i * sech2) / den;
                (phi, dphi)
            }
            Repr::Numeric(w) => {
                if x <= w.x_left {
                    left_form(x)
                } else if x >= w.x_right {
                    right_form(x)
                } else {
                    let piece = w
                        .pieces
                        .iter()
                        .find(|p| x >= p.end())
                        .unwrap_or_else(|| w.pieces.last().unwrap());
                    let y = piece.eval(x);
                    let chi = C64::new(y[0], y[1]);
                    let dchi = C64::new(y[2], y[3]);
                    let e = self.transmission * plane(k * x);
                    (e * chi, e * (dchi + i * k * chi))
                }
            }
        }
    }

    pub fn sample(&self, x_grid: &[f64]) -> ScatteringWave {
        let (phi, dphi) = x_grid.iter().map(|&x| self.eval(x)).unzip();
        ScatteringWave {
            k: self.k,
            x_grid: x_grid.to_vec(),
            phi,
            dphi,
            transmission: self.transmission,
            reflection: self.reflection,
        }
    }
}

fn ik_const(k: f64) -> C64 {
    C64::new(0.0, k)
}

/// Exact closed-form wave sampled on `x_grid`.
pub fn solve_analytic(potential: &Potential, k: f64, x_grid: &[f64]) -> Result<ScatteringWave> {
    Ok(ScatteringState::analytic(potential, k)?.sample(x_grid))
}

/// Numerically integrated wave sampled on `x_grid`; `tol` is the relative
/// local error per step.
pub fn solve_generic(potential: &Potential, k: f64, x_grid: &[f64], tol: f64) -> Result<ScatteringWave> {
    Ok(ScatteringState::numeric(potential, k, tol)?.sample(x_grid))
}

/// Reads `T`, `R` off `χ = a + b e^{-2ikx}` at a point `x_left` left of the
/// potential.
pub fn extract_tr(chi_left: C64, dchi_left: C64, x_left: f64, k: f64) -> Result<(C64, C64)> {
    let two_ik = ik_const(2.0 * k);
    let b_at = -dchi_left / two_ik;
    let a = chi_left + dchi_left / two_ik;
    if a.norm() < 1e-12 {
        return Err(Error::DegenerateAsymptotics {
            magnitude: a.norm(),
            x_left,
        });
    }
    let b = b_at * plane(2.0 * k * x_left);
    Ok((1.0 / a, b / a))
}

/// Scattering states for a fixed, sorted set of momenta. Immutable once
/// built; each momentum is solved exactly once.
#[derive(Debug, Clone)]
pub struct WaveCache {
    potential: Potential,
    states: Vec<ScatteringState>,
    integrations: usize,
}

impl WaveCache {
    pub fn populate(potential: &Potential, momenta: &[f64], tol: f64) -> Result<Self> {
        let states = momenta
            .iter()
            .map(|&k| ScatteringState::solve(potential, k, tol))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_states(potential.clone(), states))
    }

    /// Assembles a cache from states solved elsewhere (e.g. in parallel);
    /// the order of `states` does not matter.
    pub fn from_states(potential: Potential, mut states: Vec<ScatteringState>) -> Self {
        states.sort_by(|a, b| a.k.partial_cmp(&b.k).unwrap());
        let integrations = states.iter().filter(|s| s.is_numeric()).count();
        Self {
            potential,
            states,
            integrations,
        }
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Number of ODE integrations performed while populating.
    pub fn integrations(&self) -> usize {
        self.integrations
    }

    pub fn momenta(&self) -> impl Iterator<Item = f64> + '_ {
        self.states.iter().map(|s| s.k)
    }

    pub fn states(&self) -> &[ScatteringState] {
        &self.states
    }

    /// Lookup by exact momentum value.
    pub fn get(&self, k: f64) -> Result<&ScatteringState> {
        self.states
            .binary_search_by(|s| s.k.partial_cmp(&k).unwrap())
            .map(|i| &self.states[i])
            .map_err(|_| Error::MissingWave(k))
    }

    /// Empirical `max |φ_k(x)| / (1+|x|)` over the cached momenta and
    /// `x_grid`. A lower estimate of the true constant.
    pub fn empirical_c_v(&self, x_grid: &[f64]) -> f64 {
        self.states
            .iter()
            .flat_map(|s| x_grid.iter().map(move |&x| s.eval(x).0.norm() / (1.0 + x.abs())))
            .fold(0.0, f64::max)
    }
}
