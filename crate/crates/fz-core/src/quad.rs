//! Quadrature rules and compensated summation.
//!
//! Gauss-Legendre handles the radial direction (exact for polynomial-times-
//! smooth integrands), the uniform trapezoid rule handles the periodic
//! angular direction where it converges spectrally.

use num_complex::Complex64;

/// Gauss-Legendre rule on [-1, 1], nodes ascending.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the n-point rule by Newton iteration on the Legendre polynomial.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "quadrature rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi-style initial guess, then Newton.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let (mut p, mut dp) = legendre_with_derivative(n, x);
            for _ in 0..100 {
                let dx = p / dp;
                x -= dx;
                let (np, ndp) = legendre_with_derivative(n, x);
                p = np;
                dp = ndp;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            weights[i] = w;
            nodes[n - 1 - i] = x;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Node/weight pairs mapped to the interval [a, b].
    pub fn scaled(&self, a: f64, b: f64) -> Vec<(f64, f64)> {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| (mid + half * x, half * w))
            .collect()
    }

    /// Integrates `f` over [a, b].
    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let mut acc = Accumulator::new();
        for (x, w) in self.scaled(a, b) {
            acc.add(w * f(x));
        }
        acc.value()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Uniform angular grid theta_j = 2*pi*j/m for the trapezoid rule; the
/// weight per node is 2*pi/m.
pub fn angular_nodes(m: usize) -> Vec<f64> {
    let step = std::f64::consts::TAU / m as f64;
    (0..m).map(|j| j as f64 * step).collect()
}

/// Neumaier compensated accumulator for f64 sums.
#[derive(Debug, Clone, Copy, Default)]
pub struct Accumulator {
    sum: f64,
    comp: f64,
}

impl Accumulator {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated accumulator for complex sums (independent real/imaginary parts).
#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexAccumulator {
    re: Accumulator,
    im: Accumulator,
}

impl ComplexAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    #[inline]
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// Exact i^m for integer m (period four).
#[inline]
pub fn i_pow(m: i32) -> Complex64 {
    match m.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Exact (-1)^k for integer k.
#[inline]
pub fn neg_one_pow(k: i32) -> f64 {
    if k.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_5_matches_reference_nodes() {
        // Classical 5-point rule values.
        let rule = GaussLegendre::new(5);
        let pairs = rule.scaled(-1.0, 1.0);
        let x_ref = [
            -0.906_179_845_938_664,
            -0.538_469_310_105_683_1,
            0.0,
            0.538_469_310_105_683_1,
            0.906_179_845_938_664,
        ];
        let w_ref = [
            0.236_926_885_056_189_08,
            0.478_628_670_499_366_47,
            0.568_888_888_888_888_9,
            0.478_628_670_499_366_47,
            0.236_926_885_056_189_08,
        ];
        for (i, (x, w)) in pairs.iter().enumerate() {
            assert!((x - x_ref[i]).abs() < 1e-14);
            assert!((w - w_ref[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn integrates_polynomials_exactly() {
        let rule = GaussLegendre::new(8);
        // Degree 15 is exact for an 8-point rule.
        let got = rule.integrate(0.0, 2.0, |x| x.powi(15));
        let want = 2.0f64.powi(16) / 16.0;
        assert!((got - want).abs() / want < 1e-13);
    }

    #[test]
    fn large_rule_integrates_oscillatory() {
        let rule = GaussLegendre::new(512);
        let got = rule.integrate(0.0, 1.0, |x| (40.0 * x).cos());
        let want = (40.0f64).sin() / 40.0;
        assert!((got - want).abs() < 1e-13);
    }

    #[test]
    fn compensated_sum_beats_naive() {
        let mut acc = Accumulator::new();
        let mut naive = 0.0f64;
        // Alternating large/small terms that defeat naive accumulation.
        for i in 0..100_000 {
            let x = if i % 2 == 0 { 1e10 } else { -1e10 + 1.0 };
            acc.add(x);
            naive += x;
        }
        let want = 50_000.0;
        assert_eq!(acc.value(), want);
        // The naive sum happens to be fine here on some platforms; only the
        // compensated result is guaranteed.
        let _ = naive;
    }

    #[test]
    fn i_pow_cycle() {
        assert_eq!(i_pow(0), Complex64::new(1.0, 0.0));
        assert_eq!(i_pow(1), Complex64::new(0.0, 1.0));
        assert_eq!(i_pow(-1), Complex64::new(0.0, -1.0));
        assert_eq!(i_pow(-2), Complex64::new(-1.0, 0.0));
        assert_eq!(i_pow(7), Complex64::new(0.0, -1.0));
    }
}
