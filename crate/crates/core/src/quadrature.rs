//! Gauss-Legendre quadrature rules.
//!
//! Nodes are the roots of the Legendre polynomial P_n, found by Newton
//! iteration on the three-term recurrence from the standard cosine initial
//! guess. Rules are cached per order because the spherical integrals
//! request the same (possibly large) order many times.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

/// An n-point rule on [-1, 1]. Nodes ascend; weights are positive and
/// symmetric.
#[derive(Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Integrate f over [lo, hi] with the affinely mapped rule.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, lo: f64, hi: f64, mut f: F) -> f64 {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

/// P_n(x) and its derivative via the Legendre recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    for j in 2..=n {
        let jf = j as f64;
        let next = ((2.0 * jf - 1.0) * x * p - (jf - 1.0) * p_prev) / jf;
        p_prev = p;
        p = next;
    }
    let dp = n as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

fn compute_rule(n: usize) -> GaussLegendre {
    assert!(n >= 1, "Gauss-Legendre order must be at least 1");
    if n == 1 {
        return GaussLegendre {
            nodes: vec![0.0],
            weights: vec![2.0],
        };
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    // Roots come in +/- pairs; solve the positive half and mirror.
    for k in 0..n.div_ceil(2) {
        let mut x = (PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            let step = p / d;
            x -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // k = 0 is the largest root.
        nodes[n - 1 - k] = x;
        weights[n - 1 - k] = w;
        nodes[k] = -x;
        weights[k] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    GaussLegendre { nodes, weights }
}

/// The n-point rule on [-1, 1], computed once per order.
pub fn gauss_legendre(n: usize) -> Arc<GaussLegendre> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("quadrature cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| Arc::new(compute_rule(n)))
        .clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    // Published 5-point values (Abramowitz & Stegun table 25.4).
    const NODES_5: [f64; 3] = [0.0, 0.5384693101056831, 0.906179845938664];
    const WEIGHTS_5: [f64; 3] = [0.5688888888888889, 0.4786286704993665, 0.2369268850561891];

    #[test]
    fn five_point_rule_matches_published_table() {
        let rule = gauss_legendre(5);
        for (i, (&x, &w)) in [2usize, 3, 4]
            .iter()
            .map(|&i| (&rule.nodes[i], &rule.weights[i]))
            .enumerate()
        {
            assert!((x - NODES_5[i]).abs() < 1e-14, "node {i}: {x}");
            assert!((w - WEIGHTS_5[i]).abs() < 1e-14, "weight {i}: {w}");
        }
        // Symmetry
        assert!((rule.nodes[0] + rule.nodes[4]).abs() < 1e-15);
        assert!((rule.weights[0] - rule.weights[4]).abs() < 1e-15);
    }

    #[test]
    fn integrates_polynomials_exactly() {
        let rule = gauss_legendre(8);
        // degree <= 2n - 1 = 15 is exact
        for k in 0..=15u32 {
            let got = rule.integrate(-1.0, 1.0, |x| x.powi(k as i32));
            let want = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
            assert!((got - want).abs() < 1e-13, "x^{k}: {got} vs {want}");
        }
    }

    #[test]
    fn mapped_interval_integral() {
        let rule = gauss_legendre(16);
        let got = rule.integrate(0.0, 1.0, |c| c);
        assert!((got - 0.5).abs() < 1e-15);
    }

    #[test]
    fn weights_sum_to_interval_length_at_large_order() {
        for n in [64usize, 257, 1024] {
            let rule = gauss_legendre(n);
            let total: f64 = rule.weights.iter().sum();
            assert!((total - 2.0).abs() < 1e-12, "order {n}: {total}");
            // nodes strictly inside and ascending
            assert!(rule.nodes[0] > -1.0 && rule.nodes[n - 1] < 1.0);
            assert!(rule.nodes.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn smooth_integrand_converges() {
        let rule = gauss_legendre(32);
        let got = rule.integrate(0.0, PI, f64::sin);
        assert!((got - 2.0).abs() < 1e-12);
    }
}
