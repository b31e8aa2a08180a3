//! Closed-form lower bounds on the smeared backflow.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float as _;

use crate::potential::Potential;
use crate::quadrature::simpson;
use crate::smearing::{SmearingFunction, WINDOW_SIGMAS};

/// `c_V` for delta potentials.
pub const DELTA_C_V: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundFormula {
    FreeSquare,
    FreeGaussian,
    ScatteringGeneral,
    DeltaChain,
    DeltaGaussian,
    PoeschlTellerGaussian,
}

impl BoundFormula {
    pub fn tag(self) -> &'static str {
        match self {
            Self::FreeSquare => "free-square",
            Self::FreeGaussian => "free-gaussian",
            Self::ScatteringGeneral => "scattering-general",
            Self::DeltaChain => "delta-chain",
            Self::DeltaGaussian => "delta-gaussian",
            Self::PoeschlTellerGaussian => "pt-gaussian",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub value: f64,
    pub formula: BoundFormula,
    pub sigma: Option<f64>,
    pub strengths: Vec<f64>,
    pub c_v: Option<f64>,
    pub norm_1plus: Option<f64>,
    /// `c_V` came from sampling the waves rather than from a proof.
    pub empirical: bool,
}

/// `−(1/8π) ∫ |g′|²` over `[a, b]`, with `g′` by central differences.
pub fn bound_free_square<G: Fn(f64) -> f64>(g: G, a: f64, b: f64, panels: usize) -> f64 {
    let h = 1e-5 * (b - a).abs().max(1e-3);
    let dg = |x: f64| (g(x + h) - g(x - h)) / (2.0 * h);
    -simpson(|x| dg(x) * dg(x), a, b, panels) / (8.0 * PI)
}

/// `−1/(32πσ²)`.
pub fn bound_free_gaussian(sigma: f64) -> f64 {
    -1.0 / (32.0 * PI * sigma * sigma)
}

/// The square-root route for a Gaussian, evaluated numerically.
pub fn bound_free_gaussian_numeric(f: &SmearingFunction) -> f64 {
    let (a, b) = f.window(WINDOW_SIGMAS);
    bound_free_square(|x| f.value(x).sqrt(), a, b, 4000)
}

fn correction(f: &SmearingFunction, c_v: f64, norm_1plus: f64) -> f64 {
    (2.0 * f.sup_norm() + f.derivative_sup_norm()) * (2.0 + 2.0 * c_v * norm_1plus)
}

/// `β₀ − (2‖f‖∞ + ‖f′‖∞)(2 + 2 c_V ‖V‖₁₊)`.
pub fn bound_scattering(f: &SmearingFunction, c_v: f64, norm_1plus: f64) -> f64 {
    bound_free_gaussian(f.sigma) - correction(f, c_v, norm_1plus)
}

/// Same bound with `‖V‖₁₊` replaced by `Σ|λ_j|` and `c_V = 2`.
pub fn bound_delta(f: &SmearingFunction, strengths: &[f64]) -> f64 {
    let total: f64 = strengths.iter().map(|l| l.abs()).sum();
    bound_scattering(f, DELTA_C_V, total)
}

/// The delta bound as `a + b|λ|`, returned as `(a, b)`.
pub fn delta_bound_coefficients(f: &SmearingFunction) -> (f64, f64) {
    let s = 2.0 * f.sup_norm() + f.derivative_sup_norm();
    (bound_free_gaussian(f.sigma) - 2.0 * s, -2.0 * DELTA_C_V * s)
}

/// The bound that applies to `potential` under Gaussian smearing. Without a
/// proven `c_V` the caller supplies an empirical one.
pub fn bound_for(potential: &Potential, f: &SmearingFunction, empirical_c_v: Option<f64>) -> BoundReport {
    let base = BoundReport {
        value: 0.0,
        formula: BoundFormula::FreeGaussian,
        sigma: Some(f.sigma),
        strengths: Vec::new(),
        c_v: None,
        norm_1plus: None,
        empirical: false,
    };
    match potential {
        Potential::Zero => BoundReport {
            value: bound_free_gaussian(f.sigma),
            ..base
        },
        Potential::Delta { strength } => BoundReport {
            value: bound_delta(f, &[*strength]),
            formula: BoundFormula::DeltaGaussian,
            strengths: alloc::vec![*strength],
            c_v: Some(DELTA_C_V),
            norm_1plus: Some(strength.abs()),
            ..base
        },
        _ => {
            let norm = potential.norm_1plus();
            let (c_v, empirical) = match potential.declared_c_v() {
                Some(c) => (c, false),
                None => (empirical_c_v.unwrap_or(f64::NAN), true),
            };
            let formula = if !empirical && matches!(potential, Potential::PoeschlTeller { .. }) {
                BoundFormula::PoeschlTellerGaussian
            } else {
                BoundFormula::ScatteringGeneral
            };
            BoundReport {
                value: bound_scattering(f, c_v, norm),
                formula,
                c_v: Some(c_v),
                norm_1plus: Some(norm),
                empirical,
                ..base
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gauss(sigma: f64) -> SmearingFunction {
        SmearingFunction::new(0.0, sigma).unwrap()
    }

    #[test]
    fn free_gaussian_value() {
        assert!((bound_free_gaussian(0.1) + 0.995).abs() < 1e-3);
        let numeric = bound_free_gaussian_numeric(&gauss(0.1));
        assert!((numeric - bound_free_gaussian(0.1)).abs() < 1e-6, "{numeric}");
        let shifted = bound_free_gaussian_numeric(&SmearingFunction::new(3.0, 0.4).unwrap());
        assert!((shifted - bound_free_gaussian(0.4)).abs() < 1e-7);
    }

    #[test]
    fn constant_square_root_gives_zero() {
        assert_eq!(bound_free_square(|_| 0.7, -1.0, 1.0, 100), 0.0);
    }

    #[test]
    fn delta_values() {
        let f = gauss(0.1);
        assert!((bound_delta(&f, &[1.0]) + 194.050).abs() < 0.01);
        assert!((bound_delta(&f, &[-1.0]) + 194.050).abs() < 0.01);
        let (a, b) = delta_bound_coefficients(&f);
        assert!((a + 65.347).abs() < 5e-4 && (b + 128.704).abs() < 5e-4, "{a} {b}");
        for l in [0.0, 0.3, 2.5, -4.0] {
            assert!((bound_delta(&f, &[l]) - (a + b * f64::abs(l))).abs() < 1e-11);
        }
    }

    #[test]
    fn poeschl_teller_value() {
        let f = gauss(0.1);
        let pt = Potential::PoeschlTeller { mu: 1.0 };
        let norm = 2.0 + 2.0 * core::f64::consts::LN_2;
        assert!((pt.norm_1plus() - norm).abs() < 1e-8);
        let r = bound_for(&pt, &f, None);
        assert_eq!(r.formula, BoundFormula::PoeschlTellerGaussian);
        assert!((r.value + 283.261).abs() < 0.01, "{}", r.value);
        assert!((bound_scattering(&f, 1.0, norm) + 283.261).abs() < 0.01);
    }

    #[test]
    fn empty_chain_is_potential_free_scattering_bound() {
        let f = gauss(0.25);
        let expected = bound_free_gaussian(0.25) - 2.0 * (2.0 * f.sup_norm() + f.derivative_sup_norm());
        assert_eq!(bound_delta(&f, &[]), bound_scattering(&f, 0.0, 0.0));
        assert!((bound_delta(&f, &[]) - expected).abs() < 1e-14);
    }

    #[test]
    fn empirical_c_v_is_labelled() {
        let f = gauss(0.1);
        let r = bound_for(&Potential::Rectangular { strength: -2.0 }, &f, Some(1.4));
        assert!(r.empirical);
        assert_eq!(r.formula, BoundFormula::ScatteringGeneral);
        assert_eq!(r.formula.tag(), "scattering-general");
        assert!(r.value < bound_free_gaussian(0.1));
    }

    proptest! {
        #[test]
        fn delta_bound_monotone_in_strength(l1 in 0.0f64..20.0, dl in 0.0f64..20.0, sigma in 0.05f64..2.0) {
            let f = gauss(sigma);
            prop_assert!(bound_delta(&f, &[l1 + dl]) <= bound_delta(&f, &[-l1]));
            prop_assert!(bound_delta(&f, &[l1]) <= 0.0);
        }

        #[test]
        fn free_bound_monotone_in_sigma(s in 0.01f64..5.0, ds in 0.0f64..5.0) {
            prop_assert!(bound_free_gaussian(s) <= bound_free_gaussian(s + ds));
        }

        #[test]
        fn delta_matches_general_form(l in -50.0f64..50.0, sigma in 0.05f64..2.0) {
            let f = gauss(sigma);
            let a = bound_delta(&f, &[l]);
            let b = bound_scattering(&f, 2.0, l.abs());
            prop_assert!((a - b).abs() <= 1e-14 * a.abs());
        }
    }
}
