//! Adaptive Dormand–Prince 5(4) integrator with continuous (dense) output.
//!
//! Coefficients and the dense-output polynomial follow Hairer, Nørsett and
//! Wanner, *Solving Ordinary Differential Equations I*, `DOPRI5`.

use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float as _;

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub initial_step: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-12,
            initial_step: 1e-2,
            max_steps: 5_000_000,
        }
    }
}

/// One accepted step with its dense-output coefficients.
#[derive(Debug, Clone)]
struct Segment<const N: usize> {
    x: f64,
    h: f64,
    coeffs: [[f64; N]; 5],
}

/// Solution of an initial-value problem on `[start, end]` (either
/// direction), evaluable anywhere in between.
#[derive(Debug, Clone)]
pub struct DenseSolution<const N: usize> {
    start: f64,
    end: f64,
    segments: Vec<Segment<N>>,
    final_state: [f64; N],
    pub rejected: usize,
}

impl<const N: usize> DenseSolution<N> {
    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn steps(&self) -> usize {
        self.segments.len()
    }

    pub fn final_state(&self) -> [f64; N] {
        self.final_state
    }

    /// State at `x`, clamped to the integration interval.
    pub fn eval(&self, x: f64) -> [f64; N] {
        let forward = self.end >= self.start;
        let (lo, hi) = if forward {
            (self.start, self.end)
        } else {
            (self.end, self.start)
        };
        let x = x.clamp(lo, hi);
        // segments are ordered along the direction of integration
        let idx = if forward {
            self.segments.partition_point(|s| s.x + s.h < x)
        } else {
            self.segments.partition_point(|s| s.x + s.h > x)
        };
        let seg = &self.segments[idx.min(self.segments.len() - 1)];
        let theta = ((x - seg.x) / seg.h).clamp(0.0, 1.0);
        let theta1 = 1.0 - theta;
        let c = &seg.coeffs;
        let mut out = [0.0; N];
        for i in 0..N {
            out[i] = c[0][i] + theta * (c[1][i] + theta1 * (c[2][i] + theta * (c[3][i] + theta1 * c[4][i])));
        }
        out
    }
}

fn axpy<const N: usize>(y: &[f64; N], terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += c * k[i];
        }
    }
    out
}

/// Integrates `y' = rhs(x, y)` from `x0` to `x1` with local error control
/// `|err_i| ≤ atol + rtol·max(|y_old,i|, |y_new,i|)` (RMS norm).
pub fn dopri5<const N: usize, F>(rhs: F, x0: f64, y0: [f64; N], x1: f64, opts: &OdeOptions) -> Result<DenseSolution<N>>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let direction = if x1 >= x0 { 1.0 } else { -1.0 };
    let span = (x1 - x0).abs();
    let mut segments = Vec::new();
    let mut x = x0;
    let mut y = y0;
    let mut k1 = rhs(x, &y);
    let mut h = direction * opts.initial_step.min(span).max(f64::MIN_POSITIVE);
    let mut rejected = 0;
    if span == 0.0 {
        segments.push(Segment {
            x,
            h: direction,
            coeffs: [y, [0.0; N], [0.0; N], [0.0; N], [0.0; N]],
        });
        return Ok(DenseSolution {
            start: x0,
            end: x1,
            segments,
            final_state: y,
            rejected,
        });
    }

    let mut last = false;
    while !last {
        if segments.len() + rejected >= opts.max_steps {
            return Err(Error::TooManySteps {
                steps: opts.max_steps,
                x,
            });
        }
        if (x + h - x1) * direction >= 0.0 {
            h = x1 - x;
            last = true;
        }
        if h.abs() <= 16.0 * f64::EPSILON * x.abs().max(1.0) {
            return Err(Error::StepUnderflow { x });
        }

        let k2 = rhs(x + C2 * h, &axpy(&y, &[(h * A21, &k1)]));
        let k3 = rhs(x + C3 * h, &axpy(&y, &[(h * A31, &k1), (h * A32, &k2)]));
        let k4 = rhs(x + C4 * h, &axpy(&y, &[(h * A41, &k1), (h * A42, &k2), (h * A43, &k3)]));
        let k5 = rhs(
            x + C5 * h,
            &axpy(&y, &[(h * A51, &k1), (h * A52, &k2), (h * A53, &k3), (h * A54, &k4)]),
        );
        let k6 = rhs(
            x + h,
            &axpy(
                &y,
                &[
                    (h * A61, &k1),
                    (h * A62, &k2),
                    (h * A63, &k3),
                    (h * A64, &k4),
                    (h * A65, &k5),
                ],
            ),
        );
        let y_new = axpy(
            &y,
            &[
                (h * A71, &k1),
                (h * A73, &k3),
                (h * A74, &k4),
                (h * A75, &k5),
                (h * A76, &k6),
            ],
        );
        let k7 = rhs(x + h, &y_new);

        let mut err = 0.0;
        for i in 0..N {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sk = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            err += (e / sk) * (e / sk);
        }
        let err = (err / N as f64).sqrt();

        if err <= 1.0 {
            let mut coeffs = [[0.0; N]; 5];
            for i in 0..N {
                let ydiff = y_new[i] - y[i];
                let bspl = h * k1[i] - ydiff;
                coeffs[0][i] = y[i];
                coeffs[1][i] = ydiff;
                coeffs[2][i] = bspl;
                coeffs[3][i] = ydiff - h * k7[i] - bspl;
                coeffs[4][i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
            }
            segments.push(Segment { x, h, coeffs });
            x = if last { x1 } else { x + h };
            y = y_new;
            k1 = k7;
            let fac = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h *= fac;
        } else {
            last = false;
            rejected += 1;
            h *= (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
        }
    }

    Ok(DenseSolution {
        start: x0,
        end: x1,
        segments,
        final_state: y,
        rejected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_backwards() {
        // y'' = -y, y(0)=0, y'(0)=1, integrated to the left.
        let sol = dopri5(|_, y| [y[1], -y[0]], 0.0, [0.0, 1.0], -10.0, &OdeOptions::default()).unwrap();
        let end = sol.final_state();
        assert!((end[0] - (-10.0_f64).sin()).abs() < 1e-7);
        assert!((end[1] - (-10.0_f64).cos()).abs() < 1e-7);
        for &x in &[-0.0, -0.37, -3.3, -7.77, -9.999] {
            let y = sol.eval(x);
            assert!((y[0] - x.sin()).abs() < 1e-7, "x={x}: {} vs {}", y[0], x.sin());
            assert!((y[1] - x.cos()).abs() < 1e-7);
        }
    }

    #[test]
    fn exponential_growth_forward() {
        let sol = dopri5(|_, y| [y[0]], 0.0, [1.0], 3.0, &OdeOptions::default()).unwrap();
        assert!((sol.final_state()[0] - 3.0_f64.exp()).abs() < 1e-7 * 3.0_f64.exp());
        assert!((sol.eval(1.5)[0] - 1.5_f64.exp()).abs() < 1e-7);
    }

    #[test]
    fn step_budget_is_enforced() {
        let opts = OdeOptions {
            max_steps: 3,
            ..Default::default()
        };
        let err = dopri5(|_, y| [y[1], -400.0 * y[0]], 0.0, [0.0, 1.0], 10.0, &opts).unwrap_err();
        assert!(matches!(err, Error::TooManySteps { .. }));
    }

    #[test]
    fn singular_rhs_underflows() {
        // y' = 1/(x-1)^2 blows up at x=1.
        let opts = OdeOptions {
            rtol: 1e-12,
            atol: 1e-14,
            ..Default::default()
        };
        let err = dopri5(|x, _| [1.0 / ((x - 1.0) * (x - 1.0))], 0.0, [0.0], 2.0, &opts).unwrap_err();
        match err {
            Error::StepUnderflow { x } => assert!((x - 1.0).abs() < 1e-2),
            Error::TooManySteps { .. } => {}
            e => panic!("unexpected {e:?}"),
        }
    }
}
