//! Asymptotic minority representation profile `ρ*(z)`: the limit of the
//! minority share among the top `⌊nz⌋` nodes by degree.
//!
//! Normalized degrees converge to a two-component mixture; `c*` is its
//! `(1 - z)`-quantile and `ρ*(z) = (κ/z)(1 - F₁(c*))`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{normalized_mean_function, GraphonSpec, SbmParams};
use crate::numerics::{invert_monotone_cdf, std_normal_cdf, GaussLegendre, GaussianMixture2};

const BRACKET_PAD: f64 = 10.0;

fn check_z(z: f64) -> Result<()> {
    if z > 0.0 && z <= 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("z = {z} must lie in (0,1]")))
    }
}

fn check_open_unit(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} = {v} must lie in (0,1)")))
    }
}

/// Quantile of a nondecreasing CDF with the edges of the bracket returned for
/// targets outside its range.
fn clamped_quantile<F: Fn(f64) -> f64>(cdf: F, p: f64, lo: f64, hi: f64) -> Result<f64> {
    if p <= cdf(lo) {
        return Ok(lo);
    }
    if p >= cdf(hi) {
        return Ok(hi);
    }
    invert_monotone_cdf(cdf, p, lo, hi)
}

/// Component means `(κμ₁, (1-κ)μ₂) / sqrt(q(1-q))` of the SBM degree limit.
pub fn sbm_component_means(kappa: f64, q: f64, mu1: f64, mu2: f64) -> (f64, f64) {
    let s = (q * (1.0 - q)).sqrt();
    (kappa * mu1 / s, (1.0 - kappa) * mu2 / s)
}

pub fn rho_star_sbm(z: f64, kappa: f64, q: f64, mu1: f64, mu2: f64) -> Result<f64> {
    check_z(z)?;
    check_open_unit("kappa", kappa)?;
    check_open_unit("q", q)?;
    let (m1, m2) = sbm_component_means(kappa, q, mu1, mu2);
    let mix = GaussianMixture2::new(kappa, m1, m2)?;
    let lo = m1.min(m2) - BRACKET_PAD;
    let hi = m1.max(m2) + BRACKET_PAD;
    let c = clamped_quantile(|x| mix.cdf(x), 1.0 - z, lo, hi)?;
    Ok((kappa / z * (1.0 - std_normal_cdf(c - m1))).clamp(0.0, 1.0))
}

/// Limit profile for a labelled graphon, with the normalized mean function
/// tabulated at 64 Gauss-Legendre nodes on each group's interval.
#[derive(Debug, Clone)]
pub struct GraphonProfile {
    kappa: f64,
    minority: Vec<(f64, f64)>,
    majority: Vec<(f64, f64)>,
    lo: f64,
    hi: f64,
}

impl GraphonProfile {
    /// Weights are normalized by interval length so each component is a
    /// probability mixture.
    pub fn new<F: Fn(f64) -> f64>(kappa: f64, mean_fn: F) -> Result<Self> {
        check_open_unit("kappa", kappa)?;
        let rule = GaussLegendre::new(64);
        let table = |a: f64, b: f64| -> Vec<(f64, f64)> {
            rule.mapped(a, b).map(|(u, w)| (mean_fn(u), w / (b - a))).collect()
        };
        let minority = table(0.0, kappa);
        let majority = table(kappa, 1.0);
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for &(m, _) in minority.iter().chain(&majority) {
            if !m.is_finite() {
                return Err(Error::Domain("graphon mean function is not finite".into()));
            }
            lo = lo.min(m);
            hi = hi.max(m);
        }
        Ok(Self {
            kappa,
            minority,
            majority,
            lo: lo - BRACKET_PAD,
            hi: hi + BRACKET_PAD,
        })
    }

    pub fn from_spec(spec: &GraphonSpec) -> Result<Self> {
        Self::new(spec.kappa, normalized_mean_function(&spec.family, spec.q, spec.kappa))
    }

    fn component_cdf(table: &[(f64, f64)], x: f64) -> f64 {
        table.iter().map(|&(m, w)| w * std_normal_cdf(x - m)).sum()
    }

    pub fn minority_cdf(&self, x: f64) -> f64 {
        Self::component_cdf(&self.minority, x)
    }

    pub fn majority_cdf(&self, x: f64) -> f64 {
        Self::component_cdf(&self.majority, x)
    }

    pub fn mixture_cdf(&self, x: f64) -> f64 {
        self.kappa * self.minority_cdf(x) + (1.0 - self.kappa) * self.majority_cdf(x)
    }

    pub fn rho_star(&self, z: f64) -> Result<f64> {
        check_z(z)?;
        let c = clamped_quantile(|x| self.mixture_cdf(x), 1.0 - z, self.lo, self.hi)?;
        Ok((self.kappa / z * (1.0 - self.minority_cdf(c))).clamp(0.0, 1.0))
    }
}

/// `ρ*(z)` for a graphon given its normalized mean function `μ(u)`.
pub fn rho_star_graphon<F: Fn(f64) -> f64>(z: f64, kappa: f64, mean_fn: F) -> Result<f64> {
    check_z(z)?;
    GraphonProfile::new(kappa, mean_fn)?.rho_star(z)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ProfileModel {
    Sbm(SbmParams),
    Graphon(GraphonSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoStarCurve {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

impl RhoStarCurve {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }
}

/// `{0.01, 0.02, ..., 1.00}`.
pub fn default_grid() -> Vec<f64> {
    (1..=100).map(|k| k as f64 / 100.0).collect()
}

/// `{1/n, 2/n, ..., 1}`, the grid on which a profile targets ranks `K = 1..n`.
pub fn rank_grid(n: usize) -> Vec<f64> {
    (1..=n).map(|k| k as f64 / n as f64).collect()
}

pub fn rho_star_curve(model: &ProfileModel, grid: &[f64]) -> Result<RhoStarCurve> {
    for &z in grid {
        check_z(z)?;
    }
    let values = match model {
        ProfileModel::Sbm(p) => grid
            .iter()
            .map(|&z| rho_star_sbm(z, p.kappa, p.q, p.mu1, p.mu2))
            .collect::<Result<Vec<_>>>()?,
        ProfileModel::Graphon(spec) => {
            let profile = GraphonProfile::from_spec(spec)?;
            grid.iter().map(|&z| profile.rho_star(z)).collect::<Result<Vec<_>>>()?
        }
    };
    Ok(RhoStarCurve {
        grid: grid.to_vec(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::GraphonFamily;
    use proptest::prelude::*;

    #[test]
    fn null_signal_gives_kappa() {
        for &z in &[0.01, 0.1, 0.5, 0.99, 1.0] {
            let r = rho_star_sbm(z, 0.3, 0.2, 0.0, 0.0).unwrap();
            assert!((r - 0.3).abs() < 1e-8, "z {z}: {r}");
        }
    }

    #[test]
    fn whole_population_gives_kappa() {
        for &(m1, m2) in &[(0.0, 0.0), (2.0, 2.0), (-3.0, 5.0), (8.0, -8.0)] {
            let r = rho_star_sbm(1.0, 0.4, 0.15, m1, m2).unwrap();
            assert!((r - 0.4).abs() < 1e-8, "{m1},{m2}: {r}");
        }
    }

    #[test]
    fn domain_errors() {
        assert!(rho_star_sbm(0.0, 0.4, 0.1, 0.0, 0.0).is_err());
        assert!(rho_star_sbm(1.1, 0.4, 0.1, 0.0, 0.0).is_err());
        assert!(rho_star_sbm(0.5, 1.0, 0.1, 0.0, 0.0).is_err());
        assert!(rho_star_sbm(0.5, 0.4, 0.0, 0.0, 0.0).is_err());
        assert!(rho_star_graphon(0.0, 0.4, |_| 0.0).is_err());
    }

    #[test]
    fn symmetric_assortative_underrepresents_minority() {
        let r = rho_star_sbm(0.1, 0.4, 0.15, 2.0, 2.0).unwrap();
        assert!(r < 0.4 - 1e-6, "{r}");
    }

    #[test]
    fn direct_formula_check() {
        // Independent oracle: bisection on a plain closure, no shared helpers.
        let (kappa, q, mu1, mu2, z) = (0.4f64, 0.15f64, 1.0f64, 1.0f64, 0.3f64);
        let s = (q * (1.0 - q)).sqrt();
        let (m1, m2) = (kappa * mu1 / s, (1.0 - kappa) * mu2 / s);
        let f = |x: f64| kappa * std_normal_cdf(x - m1) + (1.0 - kappa) * std_normal_cdf(x - m2);
        let (mut a, mut b) = (-20.0, 20.0);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if f(m) < 1.0 - z {
                a = m;
            } else {
                b = m;
            }
        }
        let oracle = kappa / z * (1.0 - std_normal_cdf(a - m1));
        assert!((rho_star_sbm(z, kappa, q, mu1, mu2).unwrap() - oracle).abs() < 1e-9);
    }

    #[test]
    fn invariant_under_mean_preserving_reparametrization() {
        let (kappa, q, mu1, mu2): (f64, f64, f64, f64) = (0.35, 0.15, 1.5, -0.7);
        let q2: f64 = 0.4;
        let scale = (q2 * (1.0 - q2)).sqrt() / (q * (1.0 - q)).sqrt();
        for &z in &[0.05, 0.2, 0.6] {
            let a = rho_star_sbm(z, kappa, q, mu1, mu2).unwrap();
            let b = rho_star_sbm(z, kappa, q2, mu1 * scale, mu2 * scale).unwrap();
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn curves_end_at_kappa() {
        for k in 1..=9 {
            let kappa = k as f64 * 0.05;
            let model = ProfileModel::Sbm(SbmParams::new(kappa, 0.15, 1.0, 1.0).unwrap());
            let curve = rho_star_curve(&model, &default_grid()).unwrap();
            assert_eq!(curve.len(), 100);
            assert!((curve.values[99] - kappa).abs() < 1e-6);
            assert!(curve.values.iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn curves_increase_with_q_times_one_minus_q() {
        let qs = [0.05, 0.1, 0.2, 0.3, 0.4, 0.5];
        for &z in &[0.05, 0.1] {
            let vals: Vec<f64> = qs.iter().map(|&q| rho_star_sbm(z, 0.4, q, 2.0, 2.0).unwrap()).collect();
            assert!(vals.windows(2).all(|w| w[0] < w[1]), "{vals:?}");
        }
    }

    #[test]
    fn null_curve_is_constant() {
        let model = ProfileModel::Sbm(SbmParams::new(0.25, 0.3, 0.0, 0.0).unwrap());
        let curve = rho_star_curve(&model, &default_grid()).unwrap();
        assert!(curve.values.iter().all(|v| (v - 0.25).abs() < 1e-8));
        assert!(rho_star_curve(&model, &[0.5, 0.0]).is_err());
    }

    #[test]
    fn constant_graphon_mean_matches_sbm() {
        let (kappa, q) = (0.3, 0.2);
        let (m1, m2) = sbm_component_means(kappa, q, 1.2, 0.4);
        let mean_fn = |u: f64| if u < kappa { m1 } else { m2 };
        for &z in &[0.05, 0.3, 0.7, 1.0] {
            let g = rho_star_graphon(z, kappa, mean_fn).unwrap();
            let s = rho_star_sbm(z, kappa, q, 1.2, 0.4).unwrap();
            assert!((g - s).abs() < 1e-8, "z {z}: {g} vs {s}");
        }
    }

    #[test]
    fn block_constant_graphon_matches_sbm() {
        let params = SbmParams::new(0.4, 0.15, 2.0, 1.0).unwrap();
        let spec = GraphonSpec::from_sbm(&params).unwrap();
        let g = rho_star_curve(&ProfileModel::Graphon(spec), &[0.1, 0.25, 0.5, 1.0]).unwrap();
        let s = rho_star_curve(&ProfileModel::Sbm(params), &[0.1, 0.25, 0.5, 1.0]).unwrap();
        for (a, b) in g.values.iter().zip(&s.values) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn increasing_mean_underrepresents_minority() {
        assert!(rho_star_graphon(0.2, 0.4, |u| u).unwrap() < 0.4);
        let spec = GraphonSpec::new(GraphonFamily::Bilinear { a: 3.0 }, 0.2, 0.3).unwrap();
        let p = GraphonProfile::from_spec(&spec).unwrap();
        assert!(p.rho_star(0.2).unwrap() < 0.3);
        assert!((p.rho_star(1.0).unwrap() - 0.3).abs() < 1e-8);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn null_profile_identity(z in 0.001f64..=1.0, kappa in 0.01f64..0.99, q in 0.01f64..0.99) {
            prop_assert!((rho_star_sbm(z, kappa, q, 0.0, 0.0).unwrap() - kappa).abs() <= 1e-6);
        }

        #[test]
        fn profile_in_unit_interval(z in 0.001f64..=1.0, kappa in 0.05f64..0.95, q in 0.05f64..0.95,
                                    mu1 in -20.0f64..20.0, mu2 in -20.0f64..20.0) {
            let r = rho_star_sbm(z, kappa, q, mu1, mu2).unwrap();
            prop_assert!((0.0..=1.0).contains(&r));
            prop_assert!((rho_star_sbm(1.0, kappa, q, mu1, mu2).unwrap() - kappa).abs() <= 1e-6);
        }

        #[test]
        fn stronger_minority_signal_raises_profile(z in 0.05f64..0.95, mu in -3.0f64..3.0, d in 0.1f64..3.0) {
            let a = rho_star_sbm(z, 0.3, 0.2, mu, 1.0).unwrap();
            let b = rho_star_sbm(z, 0.3, 0.2, mu + d, 1.0).unwrap();
            prop_assert!(b >= a - 1e-9);
        }
    }
}
