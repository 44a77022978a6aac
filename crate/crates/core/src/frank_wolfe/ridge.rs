use ndarray::Array1;
use rand::Rng as _;

use super::{SolveMode, SolveParams, SolveReport, TraceEntry};
use crate::dataset::{NormRegime, SampleSet};
use crate::error::{ensure, Result};
use crate::kp_tree::KpTree;
use crate::loss::QuadraticModel;
use crate::quantum::{LedgerField, QueryLedger};
use crate::rng;

const POWER_STEPS: usize = 100;

/// Largest eigenvalue of the Gram matrix by power iteration from a fixed
/// pseudo-random start.
fn top_eigenvalue(model: &QuadraticModel) -> f64 {
    let d = model.d();
    let mut r = rng::stream(0, &[rng::DOMAIN_SOLVER, 3]);
    let mut v: Array1<f64> = (0..d).map(|_| r.gen_range(0.5..1.5)).collect();
    let mut lambda = 0.0;
    for _ in 0..POWER_STEPS {
        let norm = v.dot(&v).sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        v /= norm;
        let w = model.gram().dot(&v);
        lambda = v.dot(&w);
        v = w;
    }
    lambda.max(0.0)
}

fn project_l2(theta: &mut Array1<f64>) {
    let norm = theta.dot(theta).sqrt();
    if norm > 1.0 {
        *theta /= norm;
    }
}

/// Projected gradient descent over the unit l2 ball with step
/// `1 / (2 lambda_max(X^T X / N))`, stopping once the gradient-mapping norm
/// drops below `eps / 10`. Returns the best iterate seen.
pub fn ridge_solve_baseline(s: &SampleSet, eps: f64, max_iter: usize) -> Result<SolveReport> {
    ensure(s.regime() == NormRegime::L2, "regime", || format!("Ridge needs l2 samples, got {}", s.regime()))?;
    ensure(eps > 0.0, "eps", || format!("{eps} must be positive"))?;
    let model = QuadraticModel::new(s);
    let mut ledger = QueryLedger::new();
    ledger.charge(LedgerField::X, (s.n() * s.d()) as u64);
    ledger.charge(LedgerField::Y, s.n() as u64);

    let d = s.d();
    let mut theta = Array1::<f64>::zeros(d);
    let mut trace = Vec::new();
    let lambda = top_eigenvalue(&model);
    let loss = |t: &Array1<f64>| model.loss(t.as_slice().expect("contiguous")).expect("dimension checked");

    let mut best = theta.clone();
    let mut best_loss = loss(&theta);
    let mut converged = false;
    if lambda <= 0.0 {
        // constant loss: every feasible point is optimal
        converged = true;
        trace.push(TraceEntry {
            t: 0,
            step: 0.0,
            direction: None,
            tolerance: None,
            objective: best_loss,
            subproblem_ok: None,
            mapping_norm: Some(0.0),
        });
    } else {
        let step = 1.0 / (2.0 * lambda);
        for t in 0..max_iter {
            let grad = (model.gram().dot(&theta) - model.xty()) * 2.0;
            let mut next = &theta - &(&grad * step);
            project_l2(&mut next);
            let diff = &theta - &next;
            let mapping = diff.dot(&diff).sqrt() / step;
            trace.push(TraceEntry {
                t,
                step,
                direction: None,
                tolerance: None,
                objective: loss(&theta),
                subproblem_ok: None,
                mapping_norm: Some(mapping),
            });
            if mapping < eps / 10.0 {
                converged = true;
                break;
            }
            theta = next;
            let l = loss(&theta);
            if l < best_loss {
                best_loss = l;
                best = theta.clone();
            }
        }
    }

    let dense = best.to_vec();
    let tree = KpTree::from_dense(&dense)?;
    Ok(SolveReport {
        mode: SolveMode::ClassicalExact,
        params: SolveParams { d, n: s.n(), eps, curvature: None, iterations: Some(trace.len()), max_iter: Some(max_iter) },
        objective: best_loss,
        theta_sparse: tree.support(),
        trace,
        ledger: ledger.report(),
        seed: 0,
        subproblem_violations: 0,
        converged,
        candidates: Vec::new(),
        theta: tree,
    })
}
