//! Closed-form optima and risk for explicit categorical distributions, with
//! Monte-Carlo verification harnesses.
//!
//! For one central node, the contrastive objective over `N` outcomes with
//! data distribution `p_d`, negative distribution `p_n`, and `k` negatives
//! per positive is maximized by the logits
//! `theta*_u = -log(k * p_n(u) / p_d(u))`, and with `T` positive draws the
//! fitted logits fluctuate around that optimum with per-outcome mean squared
//! error `(1/T) * (1/p_d - 1 + 1/(k * p_n) - 1/k)`. This module computes
//! both closed forms and re-derives them numerically: direct gradient-ascent
//! minimization for the optimum and repeated finite-sample refits for the
//! risk.

use rand::rngs::StdRng;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::linalg::sigmoid;
use crate::rng;

#[derive(Debug, Error)]
pub enum TheoryError {
    #[error("distribution vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("not a probability vector: {0}")]
    NotADistribution(String),
    #[error("outcome {0} has p_d > 0 but p_n = 0; optimum diverges")]
    UnreachableOutcome(usize),
    #[error("outcome {0} has a zero probability; risk is undefined")]
    ZeroProbability(usize),
    #[error("alpha must lie in (0,1), got {0}")]
    InvalidAlpha(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

const DIST_TOL: f64 = 1e-12;

fn check_distribution(p: &[f64], what: &str) -> Result<(), TheoryError> {
    if p.iter().any(|&x| x < 0.0 || !x.is_finite()) {
        return Err(TheoryError::NotADistribution(format!(
            "{what} has a negative or non-finite entry"
        )));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > DIST_TOL {
        return Err(TheoryError::NotADistribution(format!(
            "{what} sums to {sum}, expected 1"
        )));
    }
    Ok(())
}

/// Explicit `(p_d, p_n)` pair over `N` outcomes with `k` negatives per
/// positive.
#[derive(Debug, Clone)]
pub struct CategoricalPair {
    p_d: Vec<f64>,
    p_n: Vec<f64>,
    k: usize,
}

impl CategoricalPair {
    pub fn new(p_d: Vec<f64>, p_n: Vec<f64>, k: usize) -> Result<Self, TheoryError> {
        if p_d.len() != p_n.len() {
            return Err(TheoryError::LengthMismatch(p_d.len(), p_n.len()));
        }
        if p_d.is_empty() {
            return Err(TheoryError::InvalidArgument("empty distributions".into()));
        }
        if k == 0 {
            return Err(TheoryError::InvalidArgument("k must be at least 1".into()));
        }
        check_distribution(&p_d, "p_d")?;
        check_distribution(&p_n, "p_n")?;
        Ok(CategoricalPair { p_d, p_n, k })
    }

    /// Uniform `p_d = p_n = 1/n`.
    pub fn uniform(n: usize, k: usize) -> Self {
        let p = vec![1.0 / n as f64; n];
        CategoricalPair::new(p.clone(), p, k).expect("uniform is valid")
    }

    /// Random strictly-positive pair: i.i.d. exponential weights normalized,
    /// floored at `min_prob` and renormalized.
    pub fn random(n: usize, k: usize, min_prob: f64, seed: u64) -> Self {
        let mut rng = rng::stream_rng(seed, 0x7e3);
        let draw = |rng: &mut StdRng| -> Vec<f64> {
            let mut w: Vec<f64> = (0..n).map(|_| -rng.gen::<f64>().max(1e-12).ln()).collect();
            let sum: f64 = w.iter().sum();
            w.iter_mut().for_each(|x| *x /= sum);
            let mut w: Vec<f64> = w.into_iter().map(|x| x.max(min_prob)).collect();
            let sum: f64 = w.iter().sum();
            w.iter_mut().for_each(|x| *x /= sum);
            w
        };
        let p_d = draw(&mut rng);
        let p_n = draw(&mut rng);
        CategoricalPair::new(p_d, p_n, k).expect("random pair is valid")
    }

    /// Pair with `p_n` proportional to `p_d^alpha`.
    pub fn power_negative(p_d: Vec<f64>, alpha: f64, k: usize) -> Result<Self, TheoryError> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(TheoryError::InvalidAlpha(alpha));
        }
        check_distribution(&p_d, "p_d")?;
        let mut p_n: Vec<f64> = p_d.iter().map(|&p| p.powf(alpha)).collect();
        let z: f64 = p_n.iter().sum();
        p_n.iter_mut().for_each(|x| *x /= z);
        CategoricalPair::new(p_d, p_n, k)
    }

    pub fn n(&self) -> usize {
        self.p_d.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn p_d(&self) -> &[f64] {
        &self.p_d
    }

    pub fn p_n(&self) -> &[f64] {
        &self.p_n
    }
}

/// Closed-form optimal logits `-log(k * p_n / p_d)`. Outcomes with
/// `p_d = 0` come back as `-inf` sentinels; `p_d > 0` with `p_n = 0` is a
/// domain error.
pub fn optimal_logits(pair: &CategoricalPair) -> Result<Vec<f64>, TheoryError> {
    pair.p_d
        .iter()
        .zip(&pair.p_n)
        .enumerate()
        .map(|(u, (&pd, &pn))| {
            if pd > 0.0 && pn == 0.0 {
                Err(TheoryError::UnreachableOutcome(u))
            } else if pd == 0.0 {
                Ok(f64::NEG_INFINITY)
            } else {
                Ok(-(pair.k as f64 * pn / pd).ln())
            }
        })
        .collect()
}

/// Per-outcome mean squared error of the fitted logits after `T` positive
/// draws: `(1/T) * (1/p_d - 1 + 1/(k p_n) - 1/k)`.
pub fn risk_prediction(pair: &CategoricalPair, t: usize) -> Result<Vec<f64>, TheoryError> {
    if t == 0 {
        return Err(TheoryError::InvalidArgument("T must be at least 1".into()));
    }
    let k = pair.k as f64;
    pair.p_d
        .iter()
        .zip(&pair.p_n)
        .enumerate()
        .map(|(u, (&pd, &pn))| {
            if pd == 0.0 || pn == 0.0 {
                Err(TheoryError::ZeroProbability(u))
            } else {
                Ok((1.0 / pd - 1.0 + 1.0 / (k * pn) - 1.0 / k) / t as f64)
            }
        })
        .collect()
}

const FIT_GRAD_TOL: f64 = 1e-8;
const FIT_MAX_ITERS: usize = 100_000;

/// Maximize the population objective
/// `J = sum_u p_d(u) log sigma(theta_u) + k p_n(u) log sigma(-theta_u)`
/// by plain gradient ascent from zero. This is the numerical route to the
/// optimum, independent of the closed form.
pub fn fit_population(pair: &CategoricalPair) -> Result<Vec<f64>, TheoryError> {
    // Domain checks shared with the closed form.
    optimal_logits(pair)?;
    let k = pair.k as f64;
    let n = pair.n();
    let lipschitz = pair
        .p_d
        .iter()
        .zip(&pair.p_n)
        .map(|(&pd, &pn)| (pd + k * pn) / 4.0)
        .fold(f64::MIN, f64::max);
    let lr = 1.0 / lipschitz;
    let mut theta = vec![0.0; n];
    let mut grad = vec![0.0; n];
    for _ in 0..FIT_MAX_ITERS {
        let mut norm_sq = 0.0;
        for u in 0..n {
            if pair.p_d[u] == 0.0 {
                // Sentinel coordinate: handled by the closed form, frozen
                // here.
                grad[u] = 0.0;
                continue;
            }
            let s = sigmoid(theta[u]);
            grad[u] = pair.p_d[u] * (1.0 - s) - k * pair.p_n[u] * s;
            norm_sq += grad[u] * grad[u];
        }
        if norm_sq.sqrt() < FIT_GRAD_TOL {
            break;
        }
        for u in 0..n {
            theta[u] += lr * grad[u];
        }
    }
    for u in 0..n {
        if pair.p_d[u] == 0.0 {
            theta[u] = f64::NEG_INFINITY;
        }
    }
    Ok(theta)
}

/// One finite-sample fit.
#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub logits: Vec<f64>,
    pub pos_counts: Vec<u32>,
    pub neg_counts: Vec<u32>,
    pub iterations: usize,
    pub grad_norm: f64,
}

impl FitOutcome {
    /// Outcome drawn at least once in either role.
    pub fn drawn(&self, u: usize) -> bool {
        self.pos_counts[u] > 0 || self.neg_counts[u] > 0
    }

    /// Outcome drawn in both roles; only these have finite fitted logits.
    pub fn drawn_both(&self, u: usize) -> bool {
        self.pos_counts[u] > 0 && self.neg_counts[u] > 0
    }
}

fn sample_counts(p: &[f64], draws: usize, rng: &mut StdRng) -> Vec<u32> {
    let mut cumulative = Vec::with_capacity(p.len());
    let mut acc = 0.0;
    for &x in p {
        acc += x;
        cumulative.push(acc);
    }
    *cumulative.last_mut().unwrap() = 1.0;
    let mut counts = vec![0u32; p.len()];
    for _ in 0..draws {
        let r: f64 = rng.gen();
        let idx = cumulative.partition_point(|&c| c <= r).min(p.len() - 1);
        counts[idx] += 1;
    }
    counts
}

/// Draw `T` positives and `kT` negatives, then maximize the empirical
/// objective over the free logits by gradient ascent (gradient norm below
/// 1e-8 or 1e5 iterations).
pub fn fit_single_node(pair: &CategoricalPair, t: usize, seed: u64) -> FitOutcome {
    let mut rng = rng::stream_rng(seed, 0xf17);
    let pos_counts = sample_counts(&pair.p_d, t, &mut rng);
    let neg_counts = sample_counts(&pair.p_n, pair.k * t, &mut rng);
    let n = pair.n();
    let t_f = t as f64;

    let lipschitz = (0..n)
        .map(|u| (pos_counts[u] + neg_counts[u]) as f64 / (4.0 * t_f))
        .fold(f64::MIN, f64::max)
        .max(1e-12);
    let lr = 1.0 / lipschitz;
    let mut theta = vec![0.0; n];
    let mut grad = vec![0.0; n];
    let mut iterations = 0;
    let mut grad_norm = f64::INFINITY;
    while iterations < FIT_MAX_ITERS {
        iterations += 1;
        let mut norm_sq = 0.0;
        for u in 0..n {
            let (c, d) = (pos_counts[u] as f64, neg_counts[u] as f64);
            if c == 0.0 && d == 0.0 {
                grad[u] = 0.0;
                continue;
            }
            let s = sigmoid(theta[u]);
            grad[u] = (c * (1.0 - s) - d * s) / t_f;
            norm_sq += grad[u] * grad[u];
        }
        grad_norm = norm_sq.sqrt();
        if grad_norm < FIT_GRAD_TOL {
            break;
        }
        for u in 0..n {
            theta[u] += lr * grad[u];
        }
    }
    FitOutcome {
        logits: theta,
        pos_counts,
        neg_counts,
        iterations,
        grad_norm,
    }
}

/// Monte-Carlo risk estimate over independent refit trials.
#[derive(Debug, Clone)]
pub struct RiskEstimate {
    /// Per-outcome mean of `(theta_T - theta*)^2` across trials where the
    /// outcome was drawn in both roles (the finite-fit condition).
    pub mse: Vec<f64>,
    /// Trials counted per outcome.
    pub trials_counted: Vec<u32>,
}

pub fn empirical_risk(
    pair: &CategoricalPair,
    t: usize,
    trials: usize,
    seed: u64,
) -> Result<RiskEstimate, TheoryError> {
    if trials == 0 {
        return Err(TheoryError::InvalidArgument("trials must be positive".into()));
    }
    let theta_star = optimal_logits(pair)?;
    let n = pair.n();
    let (sum_sq, counts) = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let fit = fit_single_node(pair, t, rng::derive(seed, trial as u64));
            let mut sq = vec![0.0; n];
            let mut cnt = vec![0u32; n];
            for u in 0..n {
                if fit.drawn_both(u) && theta_star[u].is_finite() {
                    let d = fit.logits[u] - theta_star[u];
                    sq[u] = d * d;
                    cnt[u] = 1;
                }
            }
            (sq, cnt)
        })
        .reduce(
            || (vec![0.0; n], vec![0u32; n]),
            |(mut a, mut ac), (b, bc)| {
                for u in 0..n {
                    a[u] += b[u];
                    ac[u] += bc[u];
                }
                (a, ac)
            },
        );
    let mse = (0..n)
        .map(|u| {
            if counts[u] > 0 {
                sum_sq[u] / counts[u] as f64
            } else {
                f64::NAN
            }
        })
        .collect();
    Ok(RiskEstimate {
        mse,
        trials_counted: counts,
    })
}

/// Least-squares fit of `theta = slope * ln(p_d) + intercept`.
pub fn fit_log_slope(p_d: &[f64], theta: &[f64]) -> (f64, f64, f64) {
    let xs: Vec<f64> = p_d.iter().map(|&p| p.ln()).collect();
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = theta.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var = 0.0;
    for (x, y) in xs.iter().zip(theta) {
        cov += (x - mean_x) * (y - mean_y);
        var += (x - mean_x) * (x - mean_x);
    }
    let slope = if var > 0.0 { cov / var } else { f64::NAN };
    let intercept = mean_y - slope * mean_x;
    let max_residual = xs
        .iter()
        .zip(theta)
        .map(|(x, y)| (y - (slope * x + intercept)).abs())
        .fold(0.0, f64::max);
    (slope, intercept, max_residual)
}

#[derive(Debug, Clone, Serialize)]
pub struct SublinearReport {
    pub alpha: f64,
    pub k: usize,
    /// Optimal logits ordered like `p_d` (strictly where `p_d` differs).
    pub ordering_matches: bool,
    /// Groups of tied `p_d` values, where ordering is checked weakly.
    pub tie_groups: usize,
    pub fitted_slope: f64,
    pub slope_residual: f64,
    /// Predicted risk ordering is inverse to `p_d`.
    pub risk_inverse_ordering: bool,
}

/// Build `p_n` proportional to `p_d^alpha` and check the three consequences:
/// logit ordering follows `p_d`, logits are affine in `log p_d` with slope
/// `1 - alpha`, and predicted risk orders inversely to `p_d`.
pub fn sublinear_check(
    p_d: &[f64],
    alpha: f64,
    k: usize,
) -> Result<SublinearReport, TheoryError> {
    let pair = CategoricalPair::power_negative(p_d.to_vec(), alpha, k)?;
    if pair.p_d().contains(&0.0) {
        return Err(TheoryError::ZeroProbability(
            pair.p_d().iter().position(|&p| p == 0.0).unwrap(),
        ));
    }
    let theta = optimal_logits(&pair)?;
    let risk = risk_prediction(&pair, 1)?;

    let mut ordering_matches = true;
    let mut risk_inverse = true;
    let mut tie_groups = std::collections::HashSet::new();
    let n = pair.n();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let (pi, pj) = (pair.p_d()[i], pair.p_d()[j]);
            if (pi - pj).abs() <= DIST_TOL {
                tie_groups.insert(ordered_key(pi));
                if (theta[i] - theta[j]).abs() > 1e-9 {
                    ordering_matches = false;
                }
            } else if pi > pj {
                if theta[i] <= theta[j] {
                    ordering_matches = false;
                }
                if risk[i] >= risk[j] {
                    risk_inverse = false;
                }
            }
        }
    }
    let (fitted_slope, _, slope_residual) = fit_log_slope(pair.p_d(), &theta);
    Ok(SublinearReport {
        alpha,
        k,
        ordering_matches,
        tie_groups: tie_groups.len(),
        fitted_slope,
        slope_residual,
        risk_inverse_ordering: risk_inverse,
    })
}

fn ordered_key(x: f64) -> u64 {
    x.to_bits()
}

/// Configuration echoed into the verification report.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyConfig {
    pub pairs: usize,
    pub max_n: usize,
    pub t: usize,
    pub trials: usize,
    pub alpha: f64,
    pub k: usize,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            pairs: 100,
            max_n: 20,
            t: 1000,
            trials: 500,
            alpha: 0.75,
            k: 1,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoryCheck {
    pub name: String,
    pub pass: bool,
    pub measured: f64,
    pub tolerance: f64,
    pub details: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoryReport {
    pub config: VerifyConfig,
    pub checks: Vec<TheoryCheck>,
    pub pass: bool,
}

/// Run the full verification suite: gradient-ascent optima against the
/// closed form, the sigmoid identity, Monte-Carlo risk against the closed
/// form, and the sub-linear ordering/slope/risk consequences.
pub fn verify_theory(cfg: &VerifyConfig) -> Result<TheoryReport, TheoryError> {
    if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) {
        return Err(TheoryError::InvalidAlpha(cfg.alpha));
    }
    let mut checks = Vec::new();

    // Optimal logits: numerical maximization agrees with the closed form.
    let max_gap = (0..cfg.pairs)
        .into_par_iter()
        .map(|i| {
            let n = 2 + (rng::derive(cfg.seed, i as u64) as usize) % (cfg.max_n - 1);
            let k = if i % 2 == 0 { 1 } else { 5 };
            let pair = CategoricalPair::random(n, k, 5e-3, rng::derive(cfg.seed, 0x100 + i as u64));
            let star = optimal_logits(&pair).expect("positive pair");
            let fit = fit_population(&pair).expect("positive pair");
            star.iter()
                .zip(&fit)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    checks.push(TheoryCheck {
        name: "optimal_logits_match_gradient_ascent".into(),
        pass: max_gap < 1e-4,
        measured: max_gap,
        tolerance: 1e-4,
        details: format!("{} random pairs, N <= {}, k in {{1,5}}", cfg.pairs, cfg.max_n),
    });

    // Sigmoid identity sigma(theta*) * (p_d + k p_n) == p_d.
    let mut identity_gap = 0.0;
    for i in 0..cfg.pairs {
        let k = if i % 2 == 0 { 1 } else { 5 };
        let pair =
            CategoricalPair::random(8, k, 5e-3, rng::derive(cfg.seed, 0x200 + i as u64));
        let star = optimal_logits(&pair)?;
        for u in 0..pair.n() {
            let lhs = sigmoid(star[u]) * (pair.p_d()[u] + k as f64 * pair.p_n()[u]);
            identity_gap = f64::max(identity_gap, (lhs - pair.p_d()[u]).abs());
        }
    }
    checks.push(TheoryCheck {
        name: "sigmoid_identity".into(),
        pass: identity_gap < 1e-12,
        measured: identity_gap,
        tolerance: 1e-12,
        details: "sigma(theta*) * (p_d + k p_n) == p_d".into(),
    });

    // Monte-Carlo risk against the closed form on the uniform pair.
    let uniform = CategoricalPair::uniform(10, cfg.k);
    let predicted = risk_prediction(&uniform, cfg.t)?;
    let estimate = empirical_risk(&uniform, cfg.t, cfg.trials, rng::derive(cfg.seed, 0x300))?;
    let worst_ratio_dev = predicted
        .iter()
        .zip(&estimate.mse)
        .map(|(p, e)| (e / p - 1.0).abs())
        .fold(0.0, f64::max);
    checks.push(TheoryCheck {
        name: "risk_monte_carlo".into(),
        pass: worst_ratio_dev < 0.2,
        measured: worst_ratio_dev,
        tolerance: 0.2,
        details: format!(
            "uniform N=10, k={}, T={}, {} trials; max |empirical/predicted - 1|",
            cfg.k, cfg.t, cfg.trials
        ),
    });

    // Sub-linear principle consequences.
    let mut sub_ok = true;
    let mut worst_slope_err: f64 = 0.0;
    for (i, alpha) in [0.25, 0.5, cfg.alpha].iter().enumerate() {
        let pair = CategoricalPair::random(12, cfg.k, 5e-3, rng::derive(cfg.seed, 0x400 + i as u64));
        let report = sublinear_check(pair.p_d(), *alpha, cfg.k)?;
        sub_ok &= report.ordering_matches && report.risk_inverse_ordering;
        worst_slope_err = worst_slope_err
            .max((report.fitted_slope - (1.0 - alpha)).abs())
            .max(report.slope_residual);
    }
    checks.push(TheoryCheck {
        name: "sublinear_monotonicity_and_slope".into(),
        pass: sub_ok && worst_slope_err < 1e-10,
        measured: worst_slope_err,
        tolerance: 1e-10,
        details: "p_n ~ p_d^alpha: ordering follows p_d, slope is 1 - alpha, risk inverts".into(),
    });

    let pass = checks.iter().all(|c| c.pass);
    Ok(TheoryReport {
        config: cfg.clone(),
        checks,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn optimal_logits_trivial_and_derived_values() {
        let pair = CategoricalPair::uniform(4, 1);
        let star = optimal_logits(&pair).unwrap();
        assert!(star.iter().all(|&x| x.abs() < 1e-15));

        // p_d = 0.2, p_n = 0.1, k = 5 at the first outcome.
        let pair = CategoricalPair::new(
            vec![0.2, 0.8],
            vec![0.1, 0.9],
            5,
        )
        .unwrap();
        let star = optimal_logits(&pair).unwrap();
        assert!((star[0] - (-(2.5f64).ln())).abs() < 1e-12);
        assert!((star[0] + 0.916291).abs() < 1e-6);
    }

    #[test]
    fn gradient_ascent_reproduces_closed_form() {
        let pair = CategoricalPair::new(vec![0.2, 0.8], vec![0.1, 0.9], 5).unwrap();
        let fit = fit_population(&pair).unwrap();
        let star = optimal_logits(&pair).unwrap();
        for (a, b) in fit.iter().zip(&star) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn unreachable_outcome_is_domain_error() {
        let pair = CategoricalPair::new(vec![0.5, 0.5], vec![0.0, 1.0], 1).unwrap();
        assert!(matches!(
            optimal_logits(&pair),
            Err(TheoryError::UnreachableOutcome(0))
        ));
    }

    #[test]
    fn zero_pd_maps_to_sentinel() {
        let pair = CategoricalPair::new(vec![0.0, 1.0], vec![0.5, 0.5], 1).unwrap();
        let star = optimal_logits(&pair).unwrap();
        assert_eq!(star[0], f64::NEG_INFINITY);
        assert!(star[1].is_finite());
    }

    #[test]
    fn sigmoid_identity_holds() {
        let pair = CategoricalPair::random(10, 3, 1e-3, 9);
        let star = optimal_logits(&pair).unwrap();
        for u in 0..pair.n() {
            let lhs = sigmoid(star[u]) * (pair.p_d()[u] + 3.0 * pair.p_n()[u]);
            assert!((lhs - pair.p_d()[u]).abs() < 1e-12);
        }
    }

    #[test]
    fn risk_prediction_values_and_scaling() {
        let pair = CategoricalPair::uniform(10, 1);
        let r100 = risk_prediction(&pair, 100).unwrap();
        for &v in &r100 {
            assert!((v - 0.18).abs() < 1e-12);
        }
        let r200 = risk_prediction(&pair, 200).unwrap();
        for (a, b) in r100.iter().zip(&r200) {
            assert!((a / b - 2.0).abs() < 1e-9);
        }
        // Algebraic identity with the asymptotic-variance vector m:
        // risk = (1/T) (1/m - (1 + 1/k)).
        let pair = CategoricalPair::random(6, 2, 1e-2, 3);
        let k = 2.0;
        let t = 50;
        let risk = risk_prediction(&pair, t).unwrap();
        for u in 0..pair.n() {
            let (pd, pn) = (pair.p_d()[u], pair.p_n()[u]);
            let m = k * pd * pn / (pd + k * pn);
            let expect = (1.0 / m - (1.0 + 1.0 / k)) / t as f64;
            assert!((risk[u] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn fit_single_node_is_seeded_and_consistent_at_large_t() {
        let pair = CategoricalPair::uniform(5, 1);
        let a = fit_single_node(&pair, 200, 4);
        let b = fit_single_node(&pair, 200, 4);
        assert_eq!(a.logits, b.logits);

        let big = fit_single_node(&pair, 1_000_000, 11);
        let star = optimal_logits(&pair).unwrap();
        for u in 0..5 {
            assert!(big.drawn_both(u));
            assert!((big.logits[u] - star[u]).abs() < 0.01);
        }
    }

    #[test]
    fn tiny_sample_fits_drawn_support() {
        let pair = CategoricalPair::uniform(2, 1);
        let fit = fit_single_node(&pair, 1, 5);
        for u in 0..2 {
            if fit.drawn_both(u) {
                assert!(fit.logits[u].is_finite());
            }
        }
    }

    #[test]
    fn empirical_risk_brackets_prediction_on_uniform_pair() {
        let pair = CategoricalPair::uniform(10, 1);
        let predicted = risk_prediction(&pair, 1000).unwrap();
        let est = empirical_risk(&pair, 1000, 500, 21).unwrap();
        for u in 0..10 {
            let ratio = est.mse[u] / predicted[u];
            assert!(
                (0.85..1.15).contains(&ratio),
                "outcome {u}: ratio {ratio}"
            );
        }
    }

    #[test]
    fn empirical_risk_decreases_with_t() {
        let pair = CategoricalPair::uniform(6, 1);
        let small = empirical_risk(&pair, 100, 200, 3).unwrap();
        let large = empirical_risk(&pair, 1000, 200, 3).unwrap();
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        assert!(mean(&large.mse) < mean(&small.mse));
    }

    #[test]
    fn risk_is_dominated_by_smallest_probability() {
        // One rare outcome dominates both predicted and empirical risk.
        let p_d = vec![0.02, 0.49, 0.49];
        let p_n = vec![0.02, 0.49, 0.49];
        let pair = CategoricalPair::new(p_d, p_n, 1).unwrap();
        let predicted = risk_prediction(&pair, 500).unwrap();
        assert!(predicted[0] > predicted[1] && predicted[0] > predicted[2]);
        let est = empirical_risk(&pair, 500, 300, 13).unwrap();
        assert!(est.mse[0] > est.mse[1] && est.mse[0] > est.mse[2]);
    }

    #[test]
    fn sublinear_check_reports_expected_shape() {
        let report = sublinear_check(&[0.5, 0.3, 0.2], 0.5, 1).unwrap();
        assert!(report.ordering_matches);
        assert!(report.risk_inverse_ordering);
        assert!((report.fitted_slope - 0.5).abs() < 1e-10);
        assert!(report.slope_residual < 1e-10);

        for alpha in [0.25, 0.5, 0.75] {
            let report = sublinear_check(&[0.4, 0.25, 0.2, 0.1, 0.05], alpha, 2).unwrap();
            assert!((report.fitted_slope - (1.0 - alpha)).abs() < 1e-10);
        }
    }

    #[test]
    fn uniform_negative_gives_unit_slope() {
        let p_d = vec![0.4, 0.3, 0.2, 0.1];
        let p_n = vec![0.25; 4];
        let pair = CategoricalPair::new(p_d, p_n, 1).unwrap();
        let theta = optimal_logits(&pair).unwrap();
        let (slope, _, resid) = fit_log_slope(pair.p_d(), &theta);
        assert!((slope - 1.0).abs() < 1e-10);
        assert!(resid < 1e-10);
    }

    #[test]
    fn sublinear_ordering_holds_for_random_distributions() {
        for seed in 0..20 {
            let pair = CategoricalPair::random(10, 1, 1e-3, seed);
            for alpha in [0.1, 0.35, 0.6, 0.9] {
                let report = sublinear_check(pair.p_d(), alpha, 1).unwrap();
                assert!(report.ordering_matches, "seed {seed} alpha {alpha}");
            }
        }
    }

    #[test]
    fn verify_theory_all_green_quick() {
        // Trials below ~400 leave the Monte-Carlo ratio check too noisy for
        // its 20% tolerance.
        let cfg = VerifyConfig {
            pairs: 20,
            ..Default::default()
        };
        let report = verify_theory(&cfg).unwrap();
        assert!(report.pass, "{:?}", report.checks);
        assert!(report.checks.len() >= 3);
    }
}
