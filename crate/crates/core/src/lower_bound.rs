//! Recovering the planted set from approximate minimizers, distances between
//! hypergeometric and binomial laws, and the set-finding reduction that votes
//! over Lasso solutions on resampled, column-permuted copies of a worst-case
//! matrix.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;
use statrs::function::factorial::ln_binomial;

use crate::dataset::{resample_columns, SampleSet, WorstCaseMatrix, WorstCaseVariant};
use crate::error::{ensure, Error, Result};
use crate::loss::empirical_loss;
use crate::rng;

/// Floating-point slack for the distance inequalities.
const AUDIT_SLACK: f64 = 1e-12;

/// `{j : |theta_j| >= eps/3}`.
pub fn recover_set_lasso(theta: &[f64], eps: f64) -> Result<Vec<usize>> {
    ensure(eps > 0.0, "eps", || format!("{eps} must be positive"))?;
    Ok(threshold(theta, eps / 3.0))
}

/// `{j : theta_j > 0}`.
pub fn recover_set_ridge(theta: &[f64]) -> Vec<usize> {
    theta.iter().enumerate().filter(|(_, &v)| v > 0.0).map(|(j, _)| j).collect()
}

fn threshold(theta: &[f64], level: f64) -> Vec<usize> {
    theta.iter().enumerate().filter(|(_, v)| v.abs() >= level).map(|(j, _)| j).collect()
}

/// `|a Δ b|`.
pub fn sym_diff(a: &[usize], b: &[usize]) -> usize {
    let a: BTreeSet<usize> = a.iter().copied().collect();
    let b: BTreeSet<usize> = b.iter().copied().collect();
    a.symmetric_difference(&b).count()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecoveryResult {
    pub w_hat: Vec<usize>,
    pub sym_diff: usize,
    /// `w / 200`.
    pub budget: f64,
    pub pass: bool,
}

impl RecoveryResult {
    pub fn new(planted: &[usize], mut w_hat: Vec<usize>) -> Self {
        w_hat.sort_unstable();
        w_hat.dedup();
        let diff = sym_diff(planted, &w_hat);
        let budget = planted.len() as f64 / 200.0;
        Self { w_hat, sym_diff: diff, budget, pass: diff as f64 <= budget }
    }
}

/// A probability mass function over `0..K`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteDistribution {
    pmf: Vec<f64>,
}

impl DiscreteDistribution {
    pub fn new(pmf: Vec<f64>) -> Result<Self> {
        ensure(!pmf.is_empty(), "pmf", || "empty support".into())?;
        ensure(pmf.iter().all(|&p| p >= 0.0 && p.is_finite()), "pmf", || "entries must be finite and non-negative".into())?;
        let total: f64 = pmf.iter().sum();
        ensure((total - 1.0).abs() <= 1e-12, "pmf", || format!("sums to {total}"))?;
        Ok(Self { pmf })
    }

    /// Normalises non-negative weights.
    fn from_weights(w: Vec<f64>) -> Result<Self> {
        let total: f64 = w.iter().sum();
        ensure(total > 0.0, "pmf", || "all weights are zero".into())?;
        Self::new(w.into_iter().map(|v| v / total).collect())
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn len(&self) -> usize {
        self.pmf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pmf.is_empty()
    }
}

fn check_same_support(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<()> {
    if p.len() == q.len() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected: p.len(), found: q.len() })
    }
}

/// `sqrt(1 - sum sqrt(P_i Q_i))`.
pub fn hellinger(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<f64> {
    check_same_support(p, q)?;
    let affinity: f64 = p.pmf.iter().zip(&q.pmf).map(|(a, b)| (a * b).sqrt()).sum();
    Ok((1.0 - affinity).clamp(0.0, 1.0).sqrt())
}

/// `(1/2) sum |P_i - Q_i|`.
pub fn tv(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<f64> {
    check_same_support(p, q)?;
    Ok((0.5 * p.pmf.iter().zip(&q.pmf).map(|(a, b)| (a - b).abs()).sum::<f64>()).min(1.0))
}

/// Number of marked balls among `m` drawn without replacement from `n`
/// balls of which `l` are marked.
pub fn hyp_pmf(n: u64, l: u64, m: u64) -> Result<DiscreteDistribution> {
    ensure(l <= n, "L", || format!("{l} exceeds N = {n}"))?;
    ensure(m <= n, "m", || format!("{m} exceeds N = {n}"))?;
    let total = ln_binomial(n, m);
    let weights = (0..=m)
        .map(|k| {
            if k > l || m - k > n - l {
                0.0
            } else {
                (ln_binomial(l, k) + ln_binomial(n - l, m - k) - total).exp()
            }
        })
        .collect();
    DiscreteDistribution::from_weights(weights)
}

/// `Bin(m, q)`.
pub fn bin_pmf(m: u64, q: f64) -> Result<DiscreteDistribution> {
    ensure((0.0..=1.0).contains(&q), "q", || format!("{q} not in [0, 1]"))?;
    if q == 0.0 || q == 1.0 {
        let mut pmf = vec![0.0; m as usize + 1];
        pmf[if q == 0.0 { 0 } else { m as usize }] = 1.0;
        return DiscreteDistribution::new(pmf);
    }
    let (lq, lr) = (q.ln(), (1.0 - q).ln());
    let weights = (0..=m)
        .map(|k| (ln_binomial(m, k) + k as f64 * lq + (m - k) as f64 * lr).exp())
        .collect();
    DiscreteDistribution::from_weights(weights)
}

/// Whether `d_H^2 <= d_TV <= sqrt(2) d_H`.
pub fn hellinger_sandwich(h: f64, t: f64) -> bool {
    h * h <= t + AUDIT_SLACK && t <= std::f64::consts::SQRT_2 * h + AUDIT_SLACK
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AuditFlags {
    /// `d_TV(Hyp, Bin) <= (m-1)/(N-1)`.
    pub holmes: bool,
    pub sandwich_hyp_bin: bool,
    pub sandwich_hyp_hyp: bool,
    /// `d_TV(Hyp, Hyp') <= 2(m-1)/(N-1) + p sqrt(3m)`.
    pub hyp_hyp: bool,
}

impl AuditFlags {
    pub fn all(&self) -> bool {
        self.holmes && self.sandwich_hyp_bin && self.sandwich_hyp_hyp && self.hyp_hyp
    }
}

/// Exact distances against their bounds for one `(N, m, p)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditRow {
    #[serde(rename = "N")]
    pub n: u64,
    pub m: u64,
    pub p: f64,
    /// `d_TV(Hyp(N, N/2, m), Hyp(N, N/2 + pN, m))`.
    pub tv_exact: f64,
    /// `d_TV(Hyp(N, N/2, m), Bin(m, 1/2))`.
    pub tv_hyp_bin: f64,
    pub bound_holmes: f64,
    #[serde(rename = "bound_thmB4")]
    pub bound_hyp_hyp: f64,
    /// Hellinger distance between the two hypergeometric laws.
    pub hellinger: f64,
    pub hellinger_hyp_bin: f64,
    pub pass_flags: AuditFlags,
}

pub fn distance_bound_audit(n: u64, m: u64, p: f64) -> Result<AuditRow> {
    ensure(n >= 2 && n.is_multiple_of(2), "N", || format!("{n} must be even and at least 2"))?;
    let half = n / 2;
    ensure(m >= 1 && m <= half, "m", || format!("{m} not in [1, N/2]"))?;
    ensure(p > 0.0 && p < 0.5, "p", || format!("{p} not in (0, 1/2)"))?;
    let shift = p * n as f64;
    ensure((shift - shift.round()).abs() < 1e-9, "p", || format!("pN = {shift} is not an integer"))?;
    let shifted = half + shift.round() as u64;

    let hyp = hyp_pmf(n, half, m)?;
    let bin = bin_pmf(m, 0.5)?;
    let hyp2 = hyp_pmf(n, shifted, m)?;

    let tv_hyp_bin = tv(&hyp, &bin)?;
    let tv_exact = tv(&hyp, &hyp2)?;
    let h_bin = hellinger(&hyp, &bin)?;
    let h_hyp = hellinger(&hyp, &hyp2)?;
    let ratio = (m - 1) as f64 / (n - 1) as f64;
    let bound_hyp_hyp = 2.0 * ratio + p * (3.0 * m as f64).sqrt();

    Ok(AuditRow {
        n,
        m,
        p,
        tv_exact,
        tv_hyp_bin,
        bound_holmes: ratio,
        bound_hyp_hyp,
        hellinger: h_hyp,
        hellinger_hyp_bin: h_bin,
        pass_flags: AuditFlags {
            holmes: tv_hyp_bin <= ratio + AUDIT_SLACK,
            sandwich_hyp_bin: hellinger_sandwich(h_bin, tv_hyp_bin),
            sandwich_hyp_hyp: hellinger_sandwich(h_hyp, tv_exact),
            hyp_hyp: tv_exact <= bound_hyp_hyp + AUDIT_SLACK,
        },
    })
}

/// Audits every `(N, m, p)` with `m <= m_max`, skipping `p` for which `pN`
/// is not an integer.
pub fn audit_grid(ns: &[u64], m_max: u64, ps: &[f64]) -> Result<Vec<AuditRow>> {
    let mut rows = Vec::new();
    for &n in ns {
        for &p in ps {
            let shift = p * n as f64;
            if (shift - shift.round()).abs() >= 1e-9 {
                continue;
            }
            for m in 1..=m_max.min(n / 2) {
                rows.push(distance_bound_audit(n, m, p)?);
            }
        }
    }
    Ok(rows)
}

/// Result of the set-finding reduction.
#[derive(Debug, Clone, Serialize)]
pub struct EsfOutcome {
    pub result: RecoveryResult,
    pub rounds: usize,
    /// Sets found in each round, in original coordinates.
    pub round_sets: Vec<Vec<usize>>,
    /// Votes per coordinate.
    pub votes: Vec<usize>,
    /// Distinct entries of the worst-case matrix read over all rounds.
    pub reads: usize,
}

/// Default number of voting rounds, `ceil(100 log2 d)`.
pub fn default_rounds(d: usize) -> usize {
    (100.0 * (d.max(2) as f64).log2()).ceil() as usize
}

/// Finds the planted set of a worst-case matrix through a Lasso solver.
///
/// Each round draws a uniform permutation `pi`, builds `m` samples whose
/// column `j` resamples source column `pi(j)`, solves, keeps coordinates with
/// `|theta_j| >= 2p/3` and maps them back through `pi`. Coordinates found in
/// at least `ceil(U/2)` rounds are returned. The solver receives the round's
/// sample set and a round seed.
pub fn esf_via_lasso<F>(xw: &WorstCaseMatrix, solver: F, m: usize, rounds: usize, seed: u64) -> Result<EsfOutcome>
where
    F: Fn(&SampleSet, u64) -> Result<Vec<f64>> + Sync,
{
    ensure(xw.variant() == WorstCaseVariant::Wsf, "Xw", || "needs a linf worst-case matrix".into())?;
    ensure(rounds >= 1, "U", || "need at least one round".into())?;
    let d = xw.d();
    let level = 2.0 * xw.bias().value() / 3.0;

    let per_round: Vec<(Vec<usize>, usize)> = (0..rounds)
        .into_par_iter()
        .map(|u| {
            let mut perm: Vec<usize> = (0..d).collect();
            perm.shuffle(&mut rng::stream(seed, &[rng::DOMAIN_PERMUTE, u as u64]));
            let sample = resample_columns(xw, m, &perm, rng::derive_seed(seed, &[rng::DOMAIN_ROUND, u as u64]))?;
            let theta = solver(&sample.sample, rng::derive_seed(seed, &[rng::DOMAIN_SOLVER, u as u64]))
                .map_err(|e| Error::Solver { round: u, reason: e.to_string() })?;
            if theta.len() != d {
                return Err(Error::Solver {
                    round: u,
                    reason: format!("solver returned {} coefficients for dimension {d}", theta.len()),
                });
            }
            let mut found: Vec<usize> = threshold(&theta, level).into_iter().map(|j| perm[j]).collect();
            found.sort_unstable();
            Ok((found, sample.total_reads()))
        })
        .collect::<Result<_>>()?;

    let mut votes = vec![0usize; d];
    for (set, _) in &per_round {
        for &j in set {
            votes[j] += 1;
        }
    }
    let needed = rounds.div_ceil(2);
    let w_hat = (0..d).filter(|&j| votes[j] >= needed).collect();
    Ok(EsfOutcome {
        result: RecoveryResult::new(xw.planted(), w_hat),
        rounds,
        reads: per_round.iter().map(|(_, r)| r).sum(),
        round_sets: per_round.into_iter().map(|(s, _)| s).collect(),
        votes,
    })
}

/// Runs a randomized solver `k` times with derived seeds and keeps the
/// answer of smallest empirical loss.
pub fn best_of<F>(s: &SampleSet, k: usize, seed: u64, solver: F) -> Result<Vec<f64>>
where
    F: Fn(&SampleSet, u64) -> Result<Vec<f64>>,
{
    ensure(k >= 1, "k", || "need at least one repetition".into())?;
    let mut best: Option<(f64, Vec<f64>)> = None;
    for i in 0..k {
        let theta = solver(s, rng::derive_seed(seed, &[i as u64]))?;
        let loss = empirical_loss(s, &theta)?;
        if best.as_ref().is_none_or(|(b, _)| loss < *b) {
            best = Some((loss, theta));
        }
    }
    Ok(best.expect("k >= 1").1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{gen_worst_case, Bias};
    use crate::loss::{lasso_population_minimizer, ridge_population_minimizer};
    use rand::Rng as _;

    #[test]
    fn lasso_recovery_examples() {
        let w: Vec<usize> = (0..10).collect();
        let star = lasso_population_minimizer(40, 0.05, &w).unwrap();
        assert!((star.v - 0.1 / 1.09).abs() < 1e-15);
        assert_eq!(recover_set_lasso(&star.theta_star, 0.1).unwrap(), w);
        assert!(recover_set_lasso(&[0.0; 5], 0.1).unwrap().is_empty());
        let mut theta = vec![0.0; 4];
        theta[2] = 0.3 / 3.0;
        assert_eq!(recover_set_lasso(&theta, 0.3).unwrap(), vec![2]);
        assert!(recover_set_lasso(&theta, 0.0).is_err());
    }

    #[test]
    fn ridge_recovery_examples() {
        let star = ridge_population_minimizer(6, &[1, 4]).unwrap().theta_star;
        assert_eq!(recover_set_ridge(&star), vec![1, 4]);
        let neg: Vec<f64> = star.iter().map(|v| -v).collect();
        assert_eq!(recover_set_ridge(&neg), vec![0, 2, 3, 5]);
        assert!(recover_set_ridge(&[0.0; 3]).is_empty());
    }

    #[test]
    fn sym_diff_examples() {
        assert_eq!(sym_diff(&[1, 2], &[1, 2]), 0);
        assert_eq!(sym_diff(&[0, 1, 2], &[3, 4, 5, 6]), 7);
        assert_eq!(sym_diff(&[1, 2], &[2, 3]), 2);
        let r = RecoveryResult::new(&[1, 2], vec![2, 1]);
        assert!(r.pass);
        assert!(!RecoveryResult::new(&[1, 2], vec![1]).pass);
    }

    #[test]
    fn distance_examples() {
        let p = DiscreteDistribution::new(vec![0.5, 0.5]).unwrap();
        let q = DiscreteDistribution::new(vec![0.4, 0.6]).unwrap();
        assert_eq!(tv(&p, &p).unwrap(), 0.0);
        assert!(hellinger(&p, &p).unwrap() < 1e-8);
        let want = (1.0 - (0.30f64.sqrt() + 0.20f64.sqrt())).sqrt();
        assert!((hellinger(&p, &q).unwrap() - want).abs() < 1e-12);
        assert!((want - 0.07116).abs() < 1e-5);
        let a = DiscreteDistribution::new(vec![1.0, 0.0]).unwrap();
        let b = DiscreteDistribution::new(vec![0.0, 1.0]).unwrap();
        assert_eq!(tv(&a, &b).unwrap(), 1.0);
        assert_eq!(hellinger(&a, &b).unwrap(), 1.0);
        assert!(tv(&a, &DiscreteDistribution::new(vec![1.0]).unwrap()).is_err());
        assert!(DiscreteDistribution::new(vec![0.5, 0.6]).is_err());
        assert!(DiscreteDistribution::new(vec![-0.5, 1.5]).is_err());
    }

    #[test]
    fn pmf_examples() {
        let h = hyp_pmf(4, 2, 2).unwrap();
        for (got, want) in h.pmf().iter().zip([1.0 / 6.0, 4.0 / 6.0, 1.0 / 6.0]) {
            assert!((got - want).abs() < 1e-14);
        }
        let b = bin_pmf(2, 0.5).unwrap();
        for (got, want) in b.pmf().iter().zip([0.25, 0.5, 0.25]) {
            assert!((got - want).abs() < 1e-15);
        }
        let single = hyp_pmf(10, 3, 1).unwrap();
        assert!((single.pmf()[1] - 0.3).abs() < 1e-14);
        assert_eq!(bin_pmf(3, 0.0).unwrap().pmf(), &[1.0, 0.0, 0.0, 0.0]);
        assert!(hyp_pmf(4, 5, 2).is_err());
        assert!(bin_pmf(3, 1.5).is_err());
        let big = hyp_pmf(100_000, 50_000, 500).unwrap();
        assert!((big.pmf().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn audit_examples() {
        let row = distance_bound_audit(1000, 10, 0.05).unwrap();
        assert!((row.bound_hyp_hyp - (18.0 / 999.0 + 0.05 * 30f64.sqrt())).abs() < 1e-12);
        assert!((row.bound_hyp_hyp - 0.29188).abs() < 1e-5);
        assert!(row.pass_flags.all());
        let one = distance_bound_audit(100, 1, 0.1).unwrap();
        assert_eq!(one.bound_holmes, 0.0);
        assert!(one.tv_hyp_bin < 1e-14);
        assert!(distance_bound_audit(100, 1, 0.015).is_err());
        assert!(distance_bound_audit(101, 1, 0.1).is_err());
        let grid = audit_grid(&[100], 5, &[0.01, 0.015]).unwrap();
        assert_eq!(grid.len(), 5);
        let json = serde_json::to_value(&grid[0]).unwrap();
        assert!(json.get("N").is_some() && json.get("bound_thmB4").is_some());
    }

    #[test]
    fn sandwich_on_random_pairs() {
        let mut r = rng::from_seed(17);
        for _ in 0..1000 {
            let mut draw = || DiscreteDistribution::from_weights((0..20).map(|_| r.gen_range(0.0..1.0)).collect()).unwrap();
            let (p, q) = (draw(), draw());
            assert!(hellinger_sandwich(hellinger(&p, &q).unwrap(), tv(&p, &q).unwrap()));
        }
    }

    /// Column means reveal the planted set when samples are plentiful.
    fn mean_solver(s: &SampleSet, _seed: u64) -> Result<Vec<f64>> {
        let n = s.n() as f64;
        Ok(s.x().columns().into_iter().map(|c| if c.sum() / n > 0.05 { 0.1 } else { 0.0 }).collect())
    }

    #[test]
    fn esf_with_perfect_and_null_solvers() {
        let bias = Bias::new(1, 10).unwrap();
        let xw = gen_worst_case(32, 4, bias, 200, WorstCaseVariant::Wsf, 3).unwrap();
        let good = esf_via_lasso(&xw, mean_solver, 4000, 5, 1).unwrap();
        assert_eq!(good.result.w_hat, xw.planted());
        assert_eq!(good.result.sym_diff, 0);
        assert!(good.round_sets.iter().all(|s| s == xw.planted()));
        let null = esf_via_lasso(&xw, |s: &SampleSet, _| Ok(vec![0.0; s.d()]), 100, 3, 1).unwrap();
        assert!(null.result.w_hat.is_empty());
        assert_eq!(null.result.sym_diff, 4);
        let broken = esf_via_lasso(&xw, |_: &SampleSet, _| Ok(vec![0.0; 2]), 100, 3, 1);
        assert!(matches!(broken, Err(Error::Solver { .. })));
        assert_eq!(default_rounds(128), 700);
    }

    #[test]
    fn best_of_keeps_lowest_loss() {
        let s = SampleSet::from_rows(&[vec![1.0]], &[0.5], crate::dataset::NormRegime::LInf).unwrap();
        let theta = best_of(&s, 5, 0, |_, seed| Ok(vec![(seed % 7) as f64 / 7.0])).unwrap();
        let all: Vec<f64> = (0..5).map(|i| (rng::derive_seed(0, &[i]) % 7) as f64 / 7.0).collect();
        let best = all.iter().copied().min_by(|a, b| (a - 0.5).abs().partial_cmp(&(b - 0.5).abs()).unwrap()).unwrap();
        assert_eq!(theta, vec![best]);
    }
}
