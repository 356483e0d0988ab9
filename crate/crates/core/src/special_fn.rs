//! Normalized Hermite functions, log-binomials and Gauss–Legendre rules.
//!
//! Everything here works on the *normalized* oscillator eigenfunctions
//! `ψ_n(x) = (e^{-x²} / (n! 2^n √π))^{1/2} H_n(x)` so that no intermediate
//! quantity overflows for the orders used by the simulator.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_traits::Float;

use crate::error::Error;

/// Largest Hermite order the tables are validated for.
pub const MAX_HERMITE_ORDER: usize = 200;

/// Values `ψ_0(x), …, ψ_max_order(x)` at a single quadrature point.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteFunctionTable {
    point: f64,
    values: Vec<f64>,
}

impl HermiteFunctionTable {
    pub fn point(&self) -> f64 {
        self.point
    }

    pub fn max_order(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `ψ_n(point)`; panics if `n > max_order`.
    #[inline]
    pub fn get(&self, n: usize) -> f64 {
        self.values[n]
    }
}

/// Computes `ψ_0(x) … ψ_max_order(x)` by upward recurrence
///
/// ```text
/// ψ_{n+1} = √(2/(n+1)) x ψ_n − √(n/(n+1)) ψ_{n−1}
/// ```
///
/// starting from `ψ_0 = π^{-1/4} e^{-x²/2}`. For very large `|x|` the seed
/// underflows to zero and the whole table is zero, which is the correct
/// value to double precision inside the validated range.
pub fn hermite_functions(x: f64, max_order: usize) -> Result<HermiteFunctionTable, Error> {
    if !x.is_finite() {
        return Err(Error::NonFinite("hermite point"));
    }
    let mut values = Vec::with_capacity(max_order + 1);
    fill_hermite_functions(x, max_order, &mut values);
    Ok(HermiteFunctionTable { point: x, values })
}

/// Recurrence kernel shared by [`hermite_functions`] and the hot paths that
/// reuse a scratch buffer. `x` must be finite.
pub(crate) fn fill_hermite_functions(x: f64, max_order: usize, out: &mut Vec<f64>) {
    out.clear();
    let psi0 = PI.powf(-0.25) * (-0.5 * x * x).exp();
    out.push(psi0);
    if max_order == 0 {
        return;
    }
    out.push(core::f64::consts::SQRT_2 * x * psi0);
    for n in 1..max_order {
        let nf = n as f64;
        let next = (2.0 / (nf + 1.0)).sqrt() * x * out[n] - (nf / (nf + 1.0)).sqrt() * out[n - 1];
        out.push(next);
    }
}

/// Natural log of the binomial coefficient `C(total, k)`.
///
/// Accumulated as `Σ_{j=1}^{m} ln((total − m + j) / j)` with
/// `m = min(k, total − k)`; every term is positive so there is no
/// cancellation between large log-factorials.
pub fn log_binomial(total: usize, k: usize) -> Result<f64, Error> {
    if k > total {
        return Err(Error::Domain("binomial index exceeds total"));
    }
    let m = k.min(total - k);
    let base = (total - m) as f64;
    let mut acc = 0.0;
    for j in 1..=m {
        let jf = j as f64;
        acc += ((base + jf) / jf).ln();
    }
    Ok(acc)
}

/// Natural log of `n!`.
pub fn log_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Gauss–Legendre nodes and weights on `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendreRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendreRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }
}

const NEWTON_TOL: f64 = 1e-15;
const NEWTON_MAX_ITER: usize = 100;

/// Gauss–Legendre rule of the given order, mapped onto `[a, b]`.
///
/// Roots of `P_order` are found by Newton iteration from the Tricomi
/// initial guess; the rule is symmetric so only half the roots are solved.
/// Exact for polynomials of degree `≤ 2·order − 1`.
pub fn gauss_legendre(order: usize, a: f64, b: f64) -> Result<GaussLegendreRule, Error> {
    if order < 1 {
        return Err(Error::Domain("quadrature order must be at least 1"));
    }
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::NonFinite("quadrature interval"));
    }
    if a >= b {
        return Err(Error::Domain("quadrature interval must satisfy a < b"));
    }

    let n = order;
    let nf = n as f64;
    let mut nodes = alloc::vec![0.0; n];
    let mut weights = alloc::vec![0.0; n];
    let half = (b - a) / 2.0;
    let mid = (a + b) / 2.0;

    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..NEWTON_MAX_ITER {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < NEWTON_TOL {
                dp = legendre_with_derivative(n, z).1;
                break;
            }
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        // z is the i-th largest root
        nodes[i] = mid - half * z;
        nodes[n - 1 - i] = mid + half * z;
        weights[i] = half * w;
        weights[n - 1 - i] = half * w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = mid;
    }
    Ok(GaussLegendreRule { nodes, weights })
}

/// `(P_n(z), P_n'(z))` by the three-term recurrence.
fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = nf * (z * p1 - p0) / (z * z - 1.0);
    (p1, dp)
}

/// Composite rule: `panels` equal sub-intervals of `[a, b]`, each with an
/// `order`-point Gauss–Legendre rule.
pub fn composite_gauss_legendre(
    panels: usize,
    order: usize,
    a: f64,
    b: f64,
) -> Result<GaussLegendreRule, Error> {
    if panels < 1 {
        return Err(Error::Domain("composite rule needs at least one panel"));
    }
    let base = gauss_legendre(order, -1.0, 1.0)?;
    if a >= b {
        return Err(Error::Domain("quadrature interval must satisfy a < b"));
    }
    let width = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * order);
    let mut weights = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let lo = a + width * p as f64;
        let mid = lo + width / 2.0;
        for (x, w) in base.iter() {
            nodes.push(mid + x * width / 2.0);
            weights.push(w * width / 2.0);
        }
    }
    Ok(GaussLegendreRule { nodes, weights })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ground_state_at_origin() {
        let t = hermite_functions(0.0, 1).unwrap();
        assert_relative_eq!(t.get(0), PI.powf(-0.25), max_relative = 1e-15);
        assert_relative_eq!(t.get(0), 0.751_125_544_464_942_5, max_relative = 1e-14);
        assert_eq!(t.get(1), 0.0);
    }

    #[test]
    fn rejects_non_finite_point() {
        assert!(hermite_functions(f64::NAN, 3).is_err());
        assert!(hermite_functions(f64::INFINITY, 3).is_err());
    }

    #[test]
    fn recurrence_residual_is_tiny() {
        for &x in &[-7.5, -1.0, 0.3, 4.2, 19.0] {
            let t = hermite_functions(x, 200).unwrap();
            for n in 1..200 {
                let nf = n as f64;
                let r = t.get(n + 1)
                    - ((2.0 / (nf + 1.0)).sqrt() * x * t.get(n)
                        - (nf / (nf + 1.0)).sqrt() * t.get(n - 1));
                assert!(r.abs() <= 1e-12, "x={x} n={n} residual={r}");
            }
        }
    }

    #[test]
    fn table_is_finite_over_validated_range() {
        let mut x = -50.0;
        while x <= 50.0 {
            let t = hermite_functions(x, MAX_HERMITE_ORDER).unwrap();
            assert!(t.values().iter().all(|v| v.is_finite()), "x={x}");
            x += 0.37;
        }
        let t = hermite_functions(50.0, MAX_HERMITE_ORDER).unwrap();
        assert!(t.values().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn orthonormal_up_to_order_30() {
        let rule = composite_gauss_legendre(25, 16, -12.0, 12.0).unwrap();
        assert_eq!(rule.len(), 400);
        let tables: Vec<_> = rule
            .nodes
            .iter()
            .map(|&x| hermite_functions(x, 30).unwrap())
            .collect();
        for m in 0..=30 {
            for n in 0..=30 {
                let s: f64 = tables
                    .iter()
                    .zip(&rule.weights)
                    .map(|(t, w)| w * t.get(m) * t.get(n))
                    .sum();
                let expect = if m == n { 1.0 } else { 0.0 };
                assert!((s - expect).abs() < 1e-8, "m={m} n={n} got {s}");
            }
        }
    }

    #[test]
    fn log_binomial_small_cases() {
        assert_relative_eq!(log_binomial(4, 2).unwrap(), 6f64.ln(), max_relative = 1e-15);
        assert_eq!(log_binomial(17, 0).unwrap(), 0.0);
        assert_eq!(log_binomial(17, 17).unwrap(), 0.0);
        assert_eq!(log_binomial(0, 0).unwrap(), 0.0);
        assert!(log_binomial(3, 4).is_err());
    }

    #[test]
    fn binomials_sum_to_power_of_two() {
        for n in 0..=60usize {
            let s: f64 = (0..=n).map(|k| log_binomial(n, k).unwrap().exp()).sum();
            let expect = 2f64.powi(n as i32);
            assert!(((s - expect) / expect).abs() < 1e-10, "n={n}");
        }
    }

    #[test]
    fn low_order_rules() {
        let r1 = gauss_legendre(1, -1.0, 1.0).unwrap();
        assert_eq!(r1.nodes, alloc::vec![0.0]);
        assert_relative_eq!(r1.weights[0], 2.0, max_relative = 1e-15);

        let r2 = gauss_legendre(2, -1.0, 1.0).unwrap();
        let s = 1.0 / 3f64.sqrt();
        assert_relative_eq!(r2.nodes[0], -s, max_relative = 1e-15);
        assert_relative_eq!(r2.nodes[1], s, max_relative = 1e-15);
        assert_relative_eq!(r2.weights[0], 1.0, max_relative = 1e-15);
        assert_relative_eq!(r2.weights[1], 1.0, max_relative = 1e-15);
    }

    #[test]
    fn sixteen_point_rule_on_unit_interval() {
        let r = gauss_legendre(16, 0.0, 1.0).unwrap();
        let v = r.integrate(|x| x.powi(5));
        assert!((v - 1.0 / 6.0).abs() < 1e-14, "{v}");
    }

    #[test]
    fn exact_for_degree_2n_minus_1() {
        for order in 1..=40usize {
            let r = gauss_legendre(order, -0.5, 2.0).unwrap();
            let deg = 2 * order - 1;
            // ∫ x^deg over [-0.5, 2]
            let exact = (2f64.powi(deg as i32 + 1) - (-0.5f64).powi(deg as i32 + 1)) / (deg as f64 + 1.0);
            let got = r.integrate(|x| x.powi(deg as i32));
            assert!(((got - exact) / exact).abs() < 1e-12, "order={order}");
        }
    }

    #[test]
    fn rejects_bad_rules() {
        assert!(gauss_legendre(0, 0.0, 1.0).is_err());
        assert!(gauss_legendre(4, 1.0, 1.0).is_err());
        assert!(gauss_legendre(4, 2.0, 1.0).is_err());
    }
}
