use crate::error::{Error, Result};

use super::special::std_normal_cdf;

/// Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes are roots of the Legendre polynomial `P_n`, found by Newton's
    /// method from the Tricomi-style initial guess.
    pub fn new(n: usize) -> Self {
        assert!(n >= 2, "Gauss-Legendre rule needs at least 2 nodes");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp;
            loop {
                let (p, p_prev) = legendre_pair(n, z);
                dp = nf * (z * p - p_prev) / (z * z - 1.0);
                let dz = p / dp;
                z -= dz;
                if dz.abs() < 1e-15 {
                    break;
                }
            }
            let (p, p_prev) = legendre_pair(n, z);
            dp = nf * (z * p - p_prev) / (z * z - 1.0);
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

/// `(P_n(z), P_{n-1}(z))` by the three-term recurrence.
fn legendre_pair(n: usize, z: f64) -> (f64, f64) {
    let mut p = 1.0;
    let mut p_prev = 0.0;
    for j in 1..=n {
        let jf = j as f64;
        let next = ((2.0 * jf - 1.0) * z * p - (jf - 1.0) * p_prev) / jf;
        p_prev = p;
        p = next;
    }
    (p, p_prev)
}

pub fn gauss_legendre_integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, nodes: usize) -> f64 {
    GaussLegendre::new(nodes).integrate(f, a, b)
}

/// Two-component unit-variance Gaussian mixture
/// `w·N(mean1, 1) + (1 - w)·N(mean2, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianMixture2 {
    weight1: f64,
    mean1: f64,
    mean2: f64,
}

impl GaussianMixture2 {
    pub fn new(weight1: f64, mean1: f64, mean2: f64) -> Result<Self> {
        if !(weight1 > 0.0 && weight1 < 1.0) {
            return Err(Error::Domain(format!("mixture weight must be in (0,1), got {weight1}")));
        }
        if !mean1.is_finite() || !mean2.is_finite() {
            return Err(Error::Domain("mixture means must be finite".into()));
        }
        Ok(Self { weight1, mean1, mean2 })
    }

    pub fn weight1(&self) -> f64 {
        self.weight1
    }

    pub fn mean1(&self) -> f64 {
        self.mean1
    }

    pub fn mean2(&self) -> f64 {
        self.mean2
    }

    pub fn cdf(&self, x: f64) -> f64 {
        mixture_cdf(self, x)
    }
}

pub fn mixture_cdf(m: &GaussianMixture2, x: f64) -> f64 {
    m.weight1 * std_normal_cdf(x - m.mean1) + (1.0 - m.weight1) * std_normal_cdf(x - m.mean2)
}

/// Bisection for `f(x) = p` on `[lo, hi]` with `f` nondecreasing, stopping at
/// interval width 1e-12.
pub fn invert_monotone_cdf<F: Fn(f64) -> f64>(f: F, p: f64, lo: f64, hi: f64) -> Result<f64> {
    let f_lo = f(lo);
    let f_hi = f(hi);
    if !(f_lo <= p && p <= f_hi) {
        return Err(Error::Bracket {
            target: p,
            lo_value: f_lo,
            hi_value: f_hi,
        });
    }
    let (mut a, mut b) = (lo, hi);
    while b - a > 1e-12 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if f(m) < p {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::std_normal_cdf;
    use proptest::prelude::*;

    #[test]
    fn polynomial_exactness() {
        let v = gauss_legendre_integrate(|x| x, 0.0, 1.0, 8);
        assert!((v - 0.5).abs() < 1e-15);
        let v = gauss_legendre_integrate(|x| x * x * x, 0.0, 1.0, 8);
        assert!((v - 0.25).abs() < 1e-15);
        // 8 nodes integrate degree 15 exactly.
        let v = gauss_legendre_integrate(|x| x.powi(15), -1.0, 2.0, 8);
        assert!((v - (2f64.powi(16) - 1.0) / 16.0).abs() < 1e-10);
    }

    #[test]
    fn weights_sum_to_interval_length() {
        for n in [2usize, 3, 7, 64] {
            let rule = GaussLegendre::new(n);
            let total: f64 = rule.mapped(0.0, 3.0).map(|(_, w)| w).sum();
            assert!((total - 3.0).abs() < 1e-13, "n = {n}");
        }
    }

    #[test]
    fn smooth_integrand_against_composite_simpson() {
        // Oracle: composite Simpson on a fine grid (error ~ h^4).
        let f = |u: f64| std_normal_cdf(1.0 - u);
        let m = 20_000;
        let h = 1.0 / m as f64;
        let mut s = f(0.0) + f(1.0);
        for i in 1..m {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(i as f64 * h);
        }
        let oracle = s * h / 3.0;
        let gl = gauss_legendre_integrate(f, 0.0, 1.0, 64);
        assert!((gl - oracle).abs() < 1e-10, "gl {gl} oracle {oracle}");
    }

    #[test]
    fn mixture_cdf_examples() {
        let m = GaussianMixture2::new(0.3, 0.0, 0.0).unwrap();
        assert_eq!(mixture_cdf(&m, 0.0), 0.5);
        let m = GaussianMixture2::new(0.4, 0.4, 0.6).unwrap();
        assert!(mixture_cdf(&m, -60.0) < 1e-300);
        assert_eq!(mixture_cdf(&m, 60.0), 1.0);
        let expected = 0.4 * std_normal_cdf(0.1) + 0.6 * std_normal_cdf(-0.1);
        assert_eq!(mixture_cdf(&m, 0.5), expected);
        assert!(GaussianMixture2::new(1.0, 0.0, 0.0).is_err());
        assert!(GaussianMixture2::new(0.5, f64::INFINITY, 0.0).is_err());
    }

    #[test]
    fn inversion_examples() {
        let x = invert_monotone_cdf(|x| x, 0.3, 0.0, 1.0).unwrap();
        assert!((x - 0.3).abs() < 1e-12);
        let x = invert_monotone_cdf(std_normal_cdf, 0.5, -10.0, 10.0).unwrap();
        assert!(x.abs() < 1e-10);
        assert!(matches!(
            invert_monotone_cdf(|x| x, 1.5, 0.0, 1.0),
            Err(Error::Bracket { .. })
        ));
    }

    #[test]
    fn mixture_quantile_matches_grid_search() {
        // Figure 2(B)-style parameters: kappa = 0.4, q = 0.15, mu = 1.
        let s = (0.15f64 * 0.85).sqrt();
        let m = GaussianMixture2::new(0.4, 0.4 / s, 0.6 / s).unwrap();
        for &p in &[0.1, 0.5, 0.75, 0.9] {
            let x = invert_monotone_cdf(|x| m.cdf(x), p, -12.0, 14.0).unwrap();
            let step = 1e-5;
            let mut best = (f64::INFINITY, 0.0);
            let mut g = -12.0;
            while g <= 14.0 {
                let d = (m.cdf(g) - p).abs();
                if d < best.0 {
                    best = (d, g);
                }
                g += step;
            }
            assert!((x - best.1).abs() < 2e-5, "p {p}: {x} vs {}", best.1);
            assert!((m.cdf(x) - p).abs() < 1e-10);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn mixture_round_trip(w in 0.01f64..0.99, m1 in -5.0f64..5.0, m2 in -5.0f64..5.0, p in 0.001f64..0.999) {
            let m = GaussianMixture2::new(w, m1, m2).unwrap();
            let lo = m1.min(m2) - 10.0;
            let hi = m1.max(m2) + 10.0;
            let x = invert_monotone_cdf(|x| m.cdf(x), p, lo, hi).unwrap();
            prop_assert!((m.cdf(x) - p).abs() <= 1e-8);
        }
    }
}
