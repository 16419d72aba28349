//! Hypothesis tests for group-dependent observation error: the
//! intersection-union χ² test on two undirected replicates and the one-sided
//! Z-test for directed reports.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{
    estimate_directed, estimate_undirected, moment_stats, moment_stats_directed, DensityMode,
    DirectedEstimates, MomentStats, UndirectedEstimates,
};
use crate::graph::{DirectedNetwork, LabeledNetwork};
use crate::numerics::{chi_square_quantile, invert_matrix, quadratic_form, std_normal_cdf, SmallMatrix};

/// Per-pair covariance of (density indicator, half-discrepancy) at block
/// density `x` and discord `y`. With averaged densities the first variance
/// drops by the between-replicate covariance `y/2`.
pub fn sigma_u(x: f64, y: f64, mode: DensityMode) -> SmallMatrix {
    let var_density = match mode {
        DensityMode::FirstReplicate => x * (1.0 - x),
        DensityMode::Averaged => x * (1.0 - x) - y / 2.0,
    };
    let cov = (0.5 - x) * y;
    SmallMatrix::from_rows(&[[var_density, cov], [cov, (0.5 - y) * y]]).expect("2x2")
}

fn require_nonzero(values: &[(f64, &str)]) -> Result<()> {
    for &(v, name) in values {
        if v == 0.0 || !v.is_finite() {
            return Err(Error::ZeroDenominator(name.to_string()));
        }
    }
    Ok(())
}

/// Jacobian of `(z/y, v/u - z/y, x/w - z/y)` at `xi = (u, v, w, x, y, z)`:
/// the between-block rate and the two within-minus-between rate differences.
pub fn jacobian_h(xi: &[f64; 6]) -> Result<SmallMatrix> {
    let [u, v, w, x, y, z] = *xi;
    require_nonzero(&[(u, "u"), (w, "w"), (y, "y")])?;
    let (dy, dz) = (z / (y * y), -1.0 / y);
    SmallMatrix::from_rows(&[
        [0.0, 0.0, 0.0, 0.0, -dy, -dz],
        [-v / (u * u), 1.0 / u, 0.0, 0.0, dy, dz],
        [0.0, 0.0, -x / (w * w), 1.0 / w, dy, dz],
    ])
}

/// Jacobian of
/// `(u²/(u-v) - y²/(y-z), w²/(w-x) - y²/(y-z), v/u - z/y, x/w - z/y)`.
pub fn jacobian_g(xi: &[f64; 6]) -> Result<SmallMatrix> {
    let [u, v, w, x, y, z] = *xi;
    require_nonzero(&[(u, "u"), (w, "w"), (y, "y"), (u - v, "u - v"), (w - x, "w - x"), (y - z, "y - z")])?;
    let sq = |a: f64| a * a;
    let (by, bz) = (-y * (y - 2.0 * z) / sq(y - z), -sq(y) / sq(y - z));
    let h = jacobian_h(xi)?;
    let mut rows = vec![
        [u * (u - 2.0 * v) / sq(u - v), sq(u) / sq(u - v), 0.0, 0.0, by, bz],
        [0.0, 0.0, w * (w - 2.0 * x) / sq(w - x), sq(w) / sq(w - x), by, bz],
    ];
    for r in 1..3 {
        let mut row = [0.0; 6];
        row.copy_from_slice(h.row(r));
        rows.push(row);
    }
    SmallMatrix::from_rows(&rows)
}

/// `(density, discord)` of the three blocks flattened in the order
/// within-1, within-2, between.
pub fn moment_vector(stats: &MomentStats) -> [f64; 6] {
    let b = stats.blocks();
    [b[0].0, b[0].1, b[1].0, b[1].1, b[2].0, b[2].1]
}

/// Covariance of `n·ξ̂` under the plug-in.
fn moment_covariance(stats: &MomentStats) -> Result<SmallMatrix> {
    let n2 = (stats.n * stats.n) as f64;
    let blocks: Vec<SmallMatrix> = stats
        .blocks()
        .iter()
        .zip(stats.pair_counts())
        .map(|(&(x, y), pairs)| sigma_u(x, y, stats.mode).scale(n2 / pairs as f64))
        .collect();
    SmallMatrix::block_diag(&blocks)
}

fn negate_rows(m: &mut SmallMatrix, rows: std::ops::Range<usize>) {
    for i in rows {
        for j in 0..m.cols() {
            m[(i, j)] = -m[(i, j)];
        }
    }
}

fn precision(cov: SmallMatrix, what: &'static str) -> Result<SmallMatrix> {
    if !cov.leading_minors_positive() {
        return Err(Error::NotPositiveDefinite(what));
    }
    invert_matrix(&cov)
}

/// Plug-in covariance of `(n(β̂_b - β), √n γ̂₁, √n γ̂₂)`.
pub fn sigma_beta_hat(stats: &MomentStats) -> Result<SmallMatrix> {
    let mut d = jacobian_h(&moment_vector(stats))?;
    negate_rows(&mut d, 1..3);
    d.sandwich(&moment_covariance(stats)?)
}

pub fn theta_beta_hat(stats: &MomentStats) -> Result<SmallMatrix> {
    precision(sigma_beta_hat(stats)?, "rate covariance")
}

/// Plug-in covariance of `√n (μ̂₁, μ̂₂, γ̂₁, γ̂₂)`.
pub fn sigma_mu_hat(stats: &MomentStats) -> Result<SmallMatrix> {
    let mut d = jacobian_g(&moment_vector(stats))?;
    negate_rows(&mut d, 2..4);
    d.sandwich(&moment_covariance(stats)?)
}

pub fn theta_mu_hat(stats: &MomentStats) -> Result<SmallMatrix> {
    precision(sigma_mu_hat(stats)?, "signal covariance")
}

fn beta_vector(stats: &MomentStats, est: &UndirectedEstimates, beta: f64) -> [f64; 3] {
    let n = stats.n as f64;
    [n * (est.beta_between - beta), n.sqrt() * est.gamma1, n.sqrt() * est.gamma2]
}

pub fn q_beta(stats: &MomentStats, est: &UndirectedEstimates, theta: &SmallMatrix, beta: f64) -> Result<f64> {
    quadratic_form(&beta_vector(stats, est, beta), theta)
}

/// Closed-form minimizer of the quadratic `β ↦ Q(β)` clamped to `[0, beta_bar]`;
/// returns `(argmin, Q(argmin))`.
pub fn minimize_q_beta(
    stats: &MomentStats,
    est: &UndirectedEstimates,
    theta: &SmallMatrix,
    beta_bar: f64,
) -> Result<(f64, f64)> {
    let t00 = theta[(0, 0)];
    if t00 <= 0.0 || !t00.is_finite() {
        return Err(Error::NonConvex(t00));
    }
    let n = stats.n as f64;
    let v = beta_vector(stats, est, est.beta_between);
    let shift = (theta[(0, 1)] * v[1] + theta[(0, 2)] * v[2]) / (n * t00);
    let arg = (est.beta_between + shift).clamp(0.0, beta_bar);
    Ok((arg, q_beta(stats, est, theta, arg)?))
}

pub fn q_mu(stats: &MomentStats, est: &UndirectedEstimates, theta: &SmallMatrix) -> Result<f64> {
    let n = stats.n as f64;
    let v = [est.mu1, est.mu2, est.gamma1, est.gamma2].map(|e| n.sqrt() * e);
    quadratic_form(&v, theta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasTestConfig {
    pub alpha: f64,
    pub beta_bar: f64,
    pub mode: DensityMode,
}

impl Default for BiasTestConfig {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            beta_bar: 0.1,
            mode: DensityMode::Averaged,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestOutcome {
    Reject,
    Accept,
    /// The plug-in covariance was not positive definite.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub y_equal: bool,
    pub q_beta_min: Option<f64>,
    pub argmin_beta: Option<f64>,
    pub q_mu: Option<f64>,
    pub threshold3: f64,
    pub threshold4: f64,
    pub reject: bool,
    pub outcome: TestOutcome,
    pub alpha: f64,
    pub beta_bar: f64,
    pub mode: DensityMode,
    pub estimates: Option<UndirectedEstimates>,
    pub inconclusive_reason: Option<String>,
}

/// Rejects when the replicates differ and both the minimized rate statistic
/// and the signal statistic exceed their χ² critical values.
pub fn bias_test(y: &LabeledNetwork, y_star: &LabeledNetwork, config: &BiasTestConfig) -> Result<TestReport> {
    let BiasTestConfig { alpha, beta_bar, mode } = *config;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha = {alpha} must lie in (0,1)")));
    }
    if !(beta_bar > 0.0 && beta_bar < 1.0) {
        return Err(Error::Domain(format!("beta_bar = {beta_bar} must lie in (0,1)")));
    }
    if y.labels() != y_star.labels() {
        return Err(Error::LabelMismatch);
    }
    let mut report = TestReport {
        y_equal: y == y_star,
        q_beta_min: None,
        argmin_beta: None,
        q_mu: None,
        threshold3: chi_square_quantile(1.0 - alpha, 3)?,
        threshold4: chi_square_quantile(1.0 - alpha, 4)?,
        reject: false,
        outcome: TestOutcome::Accept,
        alpha,
        beta_bar,
        mode,
        estimates: None,
        inconclusive_reason: None,
    };
    if report.y_equal {
        return Ok(report);
    }
    let stats = moment_stats(y, y_star, mode)?;
    let est = estimate_undirected(&stats)?;
    report.estimates = Some(est);
    let statistics = || -> Result<(f64, f64, f64)> {
        let theta_b = theta_beta_hat(&stats)?;
        let (arg, qb) = minimize_q_beta(&stats, &est, &theta_b, beta_bar)?;
        let qm = q_mu(&stats, &est, &theta_mu_hat(&stats)?)?;
        Ok((arg, qb, qm))
    };
    match statistics() {
        Ok((arg, qb, qm)) => {
            report.argmin_beta = Some(arg);
            report.q_beta_min = Some(qb);
            report.q_mu = Some(qm);
            report.reject = qb > report.threshold3 && qm > report.threshold4;
            report.outcome = if report.reject {
                TestOutcome::Reject
            } else {
                TestOutcome::Accept
            };
        }
        Err(e) if e.is_degenerate_statistics() => {
            report.outcome = TestOutcome::Inconclusive;
            report.inconclusive_reason = Some(e.to_string());
        }
        Err(e) => return Err(e),
    }
    Ok(report)
}

/// Plug-in covariance of `√(n₁n₂)` times the cross-group report statistics
/// `(density_12, density_21, asym_12)`.
pub fn sigma33_hat(d: &DirectedEstimates) -> Result<SmallMatrix> {
    let s = &d.stats;
    let (x, y, z, p) = (s.density_12, s.density_21, s.asym_12, d.p12);
    require_nonzero(&[(p, "p12")])?;
    let c01 = x * y / p - x * y;
    let c02 = x * d.beta21 - x * z;
    let c12 = y * d.beta12 - y * z;
    SmallMatrix::from_rows(&[
        [x * (1.0 - x), c01, c02],
        [c01, y * (1.0 - y), c12],
        [c02, c12, z * (1.0 - z)],
    ])
}

/// Gradient of `β̂₁₂ - β̂₂₁` in `(density_12, density_21, asym_12)`.
pub fn directed_gradient(x: f64, y: f64, z: f64) -> [f64; 3] {
    [
        0.5 * (-y / (x * x) + z / (x * x) - 1.0 / y),
        0.5 * (1.0 / x - z / (y * y) + x / (y * y)),
        0.5 * (1.0 / y - 1.0 / x),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alternative {
    TwoSided,
    /// Minority members under-report ties to the majority less often than the
    /// reverse: `β₁₂ < β₂₁`.
    #[default]
    Beta12Less,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectedTestReport {
    pub z: f64,
    pub p_value: f64,
    pub sigma_d_hat: f64,
    pub alternative: Alternative,
    pub alpha: f64,
    pub reject: bool,
    pub estimates: DirectedEstimates,
}

pub fn directed_bias_test(y: &DirectedNetwork, alpha: f64, alternative: Alternative) -> Result<DirectedTestReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha = {alpha} must lie in (0,1)")));
    }
    let est = estimate_directed(&moment_stats_directed(y)?)?;
    let s = &est.stats;
    let diff = est.beta12 - est.beta21;
    let (z, sigma) = if diff == 0.0 {
        (0.0, 0.0)
    } else {
        let g = directed_gradient(s.density_12, s.density_21, s.asym_12);
        let var = quadratic_form(&g, &sigma33_hat(&est)?)?;
        if var <= 0.0 || var.is_nan() {
            return Err(Error::DegenerateVariance(var));
        }
        let sigma = var.sqrt();
        (((s.n1 * s.n2) as f64).sqrt() * diff / sigma, sigma)
    };
    let p_value = match alternative {
        Alternative::Beta12Less => std_normal_cdf(z),
        Alternative::TwoSided => 2.0 * (1.0 - std_normal_cdf(z.abs())),
    };
    Ok(DirectedTestReport {
        z,
        p_value,
        sigma_d_hat: sigma,
        alternative,
        alpha,
        reject: p_value < alpha,
        estimates: est,
    })
}
