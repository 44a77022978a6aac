//! Log-log fits of charged query counts against problem size or accuracy.

use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::dataset::gen_lasso_hidden;
use crate::error::{ensure, Result};
use crate::frank_wolfe::{LassoProblem, SolveMode};
use crate::quantum::LedgerReport;

/// Ordinary least squares on `(log2 x, log2 y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// 95% confidence interval of the slope.
    pub slope_ci: (f64, f64),
    pub points: usize,
}

pub fn fit_scaling(points: &[(f64, f64)]) -> Result<ScalingFit> {
    ensure(points.len() >= 4, "points", || format!("need at least 4 points, got {}", points.len()))?;
    fit_log_log(points)
}

/// Same fit with the minimum of 3 points that leaves one degree of freedom
/// for the interval.
pub fn fit_log_log(points: &[(f64, f64)]) -> Result<ScalingFit> {
    ensure(points.len() >= 3, "points", || format!("need at least 3 points, got {}", points.len()))?;
    ensure(points.iter().all(|&(x, y)| x > 0.0 && y > 0.0), "points", || "values must be positive".into())?;
    let lx: Vec<f64> = points.iter().map(|p| p.0.log2()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.log2()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    ensure(sxx > 1e-12, "points", || "x values do not vary".into())?;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    let se = (sse / (n - 2.0) / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, n - 2.0).expect("positive degrees of freedom").inverse_cdf(0.975);
    Ok(ScalingFit { slope, intercept, r2, slope_ci: (slope - t * se, slope + t * se), points: points.len() })
}

/// Planted instance used by the sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepInstance {
    /// Samples per instance, held fixed across the sweep.
    pub n: usize,
    pub w: usize,
    pub p: f64,
}

impl Default for SweepInstance {
    fn default() -> Self {
        Self { n: 200, w: 5, p: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingPoint {
    pub d: usize,
    pub eps: f64,
    pub n: usize,
    pub objective: f64,
    pub ledger: LedgerReport,
}

fn solve_point(d: usize, eps: f64, inst: SweepInstance, mode: SolveMode, seed: u64) -> Result<ScalingPoint> {
    let (s, _) = gen_lasso_hidden(d, inst.w.min(d), inst.p, inst.n, seed)?;
    let rep = LassoProblem::new(&s)?.solve(eps, mode, seed)?;
    Ok(ScalingPoint { d, eps, n: inst.n, objective: rep.objective, ledger: rep.ledger })
}

/// Charged queries of the full Lasso solver for each dimension at fixed `eps`.
pub fn sweep_dimension(dims: &[usize], eps: f64, inst: SweepInstance, mode: SolveMode, seed: u64) -> Result<Vec<ScalingPoint>> {
    dims.par_iter().map(|&d| solve_point(d, eps, inst, mode, seed)).collect()
}

/// Charged queries of the full Lasso solver for each accuracy at fixed `d`.
pub fn sweep_accuracy(d: usize, eps: &[f64], inst: SweepInstance, mode: SolveMode, seed: u64) -> Result<Vec<ScalingPoint>> {
    eps.par_iter().map(|&e| solve_point(d, e, inst, mode, seed)).collect()
}
