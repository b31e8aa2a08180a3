//! Composite Simpson rule.

use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float as _;

/// Nodes and weights of the composite Simpson rule on `[a, b]` with an even
/// number of panels (odd panel counts are rounded up).
pub fn simpson_rule(a: f64, b: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
    let panels = panels.max(2);
    let panels = panels + panels % 2;
    let h = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(panels + 1);
    let mut weights = Vec::with_capacity(panels + 1);
    for i in 0..=panels {
        nodes.push(if i == panels { b } else { a + h * i as f64 });
        let w = if i == 0 || i == panels {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        weights.push(w * h / 3.0);
    }
    (nodes, weights)
}

/// Number of Simpson panels needed on `[a, b]` for a step no larger than `h`.
pub fn panels_for_step(a: f64, b: f64, h: f64) -> usize {
    let n = ((b - a).abs() / h).ceil() as usize;
    let n = n.max(2);
    n + n % 2
}

pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let (nodes, weights) = simpson_rule(a, b, panels);
    nodes.iter().zip(&weights).map(|(&x, &w)| w * f(x)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_cubics() {
        let v = simpson(|x| x * x * x - 2.0 * x + 1.0, -1.0, 3.0, 4);
        // antiderivative x^4/4 - x^2 + x
        let exact = (81.0 / 4.0 - 9.0 + 3.0) - (0.25 - 1.0 - 1.0);
        assert!((v - exact).abs() < 1e-12);
    }

    #[test]
    fn odd_panels_rounded_up() {
        let (nodes, weights) = simpson_rule(0.0, 1.0, 3);
        assert_eq!(nodes.len(), 5);
        assert!((weights.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }
}
