//! Tensor-product Gauss–Legendre quadrature on the unit square.

use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::{cos, fabs};

/// Gauss–Legendre nodes and weights on `[0, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// `n`-point rule; nodes are Newton-refined roots of `P_n`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "quadrature order must be positive");
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for i in 0..n {
            let mut x = cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if fabs(dx) < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d != 0.0 { d } else { dp };
            // map [-1, 1] → [0, 1]
            nodes.push(0.5 * (1.0 - x));
            weights.push(1.0 / ((1.0 - x * x) * dp * dp));
        }
        GaussLegendre { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate_1d(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    /// `∫∫_{[0,1]²} f(x, y) dx dy`.
    pub fn integrate_unit_square(&self, mut f: impl FnMut(f64, f64) -> f64) -> f64 {
        let mut total = 0.0;
        for (&x, &wx) in self.nodes.iter().zip(&self.weights) {
            let mut row = 0.0;
            for (&y, &wy) in self.nodes.iter().zip(&self.weights) {
                row += wy * f(x, y);
            }
            total += wx * row;
        }
        total
    }

    /// Integrates several functions of one shared evaluation in one pass.
    pub fn integrate_unit_square_many<const K: usize>(&self, mut f: impl FnMut(f64, f64) -> [f64; K]) -> [f64; K] {
        let mut total = [0.0; K];
        for (&x, &wx) in self.nodes.iter().zip(&self.weights) {
            for (&y, &wy) in self.nodes.iter().zip(&self.weights) {
                let v = f(x, y);
                for k in 0..K {
                    total[k] += wx * wy * v[k];
                }
            }
        }
        total
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    (p1, n * (x * p1 - p0) / (x * x - 1.0))
}

/// How to integrate over the unit square.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuadratureRule {
    /// Fixed order per axis.
    Fixed(usize),
    /// Double the order from 16 until successive results differ by less than `tol`.
    Adaptive { tol: f64, max_order: usize },
}

impl Default for QuadratureRule {
    fn default() -> Self {
        QuadratureRule::Fixed(64)
    }
}

impl QuadratureRule {
    pub fn integrate_many<const K: usize>(&self, mut f: impl FnMut(f64, f64) -> [f64; K]) -> [f64; K] {
        match *self {
            QuadratureRule::Fixed(n) => GaussLegendre::new(n).integrate_unit_square_many(f),
            QuadratureRule::Adaptive { tol, max_order } => {
                let mut order = 16;
                let mut prev = GaussLegendre::new(order).integrate_unit_square_many(&mut f);
                while order < max_order {
                    order *= 2;
                    let next = GaussLegendre::new(order).integrate_unit_square_many(&mut f);
                    let diff = prev.iter().zip(&next).map(|(a, b)| fabs(a - b)).fold(0.0, f64::max);
                    prev = next;
                    if diff < tol {
                        break;
                    }
                }
                prev
            }
        }
    }

    pub fn integrate(&self, mut f: impl FnMut(f64, f64) -> f64) -> f64 {
        self.integrate_many(|x, y| [f(x, y)])[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_one() {
        for n in [1, 2, 5, 16, 64, 256] {
            let g = GaussLegendre::new(n);
            assert!(fabs(g.weights().iter().sum::<f64>() - 1.0) < 1e-13, "n={n}");
            assert!(g.nodes().iter().all(|&x| (0.0..=1.0).contains(&x)));
        }
    }

    #[test]
    fn exact_for_polynomials() {
        // an n-point rule integrates degree 2n−1 exactly
        let g = GaussLegendre::new(4);
        let v = g.integrate_1d(|x| libm::pow(x, 7.0));
        assert!(fabs(v - 1.0 / 8.0) < 1e-15);
        let v = g.integrate_unit_square(|x, y| x * x * y * y * y);
        assert!(fabs(v - 1.0 / 12.0) < 1e-15);
    }

    #[test]
    fn adaptive_converges() {
        let rule = QuadratureRule::Adaptive { tol: 1e-12, max_order: 1024 };
        let v = rule.integrate(|x, y| libm::exp(x + y));
        let e1 = core::f64::consts::E - 1.0;
        assert!(fabs(v - e1 * e1) < 1e-12);
    }
}
