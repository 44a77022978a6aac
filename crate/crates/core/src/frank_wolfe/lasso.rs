use rayon::prelude::*;

use super::{
    fw_generic, Candidate, DirectionOracle, ExactLmo, FwParams, FwRun, SolveMode, SolveParams, SolveReport,
    StepContext, TraceEntry, Vertex,
};
use crate::dataset::{NormRegime, SampleSet};
use crate::error::{ensure, Result};
use crate::kp_tree::KpTree;
use crate::loss::QuadraticModel;
use crate::quantum::{
    approx_min_find, emulate_gradient_from_exact, emulate_loss_from_exact, EmulatorConfig, EvalShape, LedgerField,
    MinFindParams, QueryLedger,
};
use crate::rng::{self, Rng};

/// Minimum finding over the `2d` vertices with emulated gradient entries.
pub(super) struct QuantumLmo<'a> {
    pub(super) cfg: &'a EmulatorConfig,
    /// Accuracy of each gradient entry.
    pub(super) beta: f64,
    pub(super) n: usize,
    pub(super) rng: &'a mut Rng,
    pub(super) ledger: &'a mut QueryLedger,
}

impl DirectionOracle for QuantumLmo<'_> {
    fn choose(&mut self, step: &StepContext<'_>) -> Result<Vertex> {
        let d = step.gradient.len();
        let shape = EvalShape { d, n: self.n, support: step.theta.support_len() };
        let params = MinFindParams { eps: self.beta, delta1: self.cfg.delta1, delta2: self.cfg.delta2 };
        let (cfg, beta, gradient) = (self.cfg, self.beta, step.gradient);
        let out = approx_min_find(2 * d, params, cfg, self.rng, self.ledger, |k, rng, ledger| {
            let s = Vertex::from_candidate(k);
            let g = emulate_gradient_from_exact(gradient[s.index], shape, beta, cfg.delta2, cfg, rng, ledger)?;
            Ok(s.sign() * g)
        })?;
        Ok(Vertex::from_candidate(out.index))
    }
}

/// `ceil(a / b)`, treating quotients within rounding noise of an integer as
/// that integer.
fn ceil_ratio(a: f64, b: f64) -> usize {
    let q = a / b;
    let r = q.round();
    if (q - r).abs() <= 1e-9 * r.max(1.0) {
        r as usize
    } else {
        q.ceil() as usize
    }
}

/// Curvature guesses `8, 4, 2, ...` down to `2^(-ceil(log2(1/eps)) - 1)`.
pub fn ladder(eps: f64) -> Result<Vec<f64>> {
    ensure(eps > 0.0 && eps < 1.0, "eps", || format!("{eps} not in (0, 1)"))?;
    let low = -(((1.0 / eps).log2() - 1e-12).ceil() as i32) - 1;
    Ok((low..=3).rev().map(|e| 2f64.powi(e)).collect())
}

/// A Lasso instance with its loss cached as a quadratic form.
#[derive(Debug, Clone)]
pub struct LassoProblem {
    model: QuadraticModel,
    /// One read of every entry of `X` and `y`.
    reads: QueryLedger,
}

impl LassoProblem {
    pub fn new(s: &SampleSet) -> Result<Self> {
        ensure(s.regime() == NormRegime::LInf, "regime", || {
            format!("Lasso needs linf samples, got {}", s.regime())
        })?;
        ensure(s.is_valid(), "samples", || "entries must lie in [-1, 1]".into())?;
        let mut reads = QueryLedger::new();
        reads.charge(LedgerField::X, (s.n() * s.d()) as u64);
        reads.charge(LedgerField::Y, s.n() as u64);
        Ok(Self { model: QuadraticModel::new(s), reads })
    }

    pub fn model(&self) -> &QuadraticModel {
        &self.model
    }

    pub fn d(&self) -> usize {
        self.model.d()
    }

    pub fn n(&self) -> usize {
        self.model.n()
    }

    fn check_mode(mode: &SolveMode) -> Result<()> {
        match mode {
            SolveMode::ClassicalExact => Ok(()),
            SolveMode::QuantumEmulated(cfg) => cfg.validate(),
        }
    }

    /// Frank-Wolfe from zero with `6 ceil(C/eps)` steps; the emulated
    /// oracle is charged to `ledger`.
    fn run_guess(&self, c: f64, eps: f64, mode: &SolveMode, rng: &mut Rng, ledger: &mut QueryLedger) -> Result<FwRun> {
        ensure(c > 0.0 && c.is_finite(), "C", || format!("{c} must be positive"))?;
        ensure(eps > 0.0 && eps < 1.0, "eps", || format!("{eps} not in (0, 1)"))?;
        let params = FwParams::with_guess(6 * ceil_ratio(c, eps), c);
        let theta0 = KpTree::new_zero(self.d())?;
        match mode {
            SolveMode::ClassicalExact => fw_generic(&self.model, &mut ExactLmo, params, theta0),
            SolveMode::QuantumEmulated(cfg) => {
                let mut oracle = QuantumLmo { cfg, beta: eps / 20.0, n: self.n(), rng, ledger };
                fw_generic(&self.model, &mut oracle, params, theta0)
            }
        }
    }

    /// Frank-Wolfe with a guess `c` for the curvature constant and target
    /// accuracy `eps`.
    pub fn fw_with_guess(&self, c: f64, eps: f64, mode: SolveMode, seed: u64) -> Result<SolveReport> {
        Self::check_mode(&mode)?;
        let mut rng = rng::stream(seed, &[rng::DOMAIN_SOLVER, 1, 0]);
        let mut ledger = QueryLedger::new();
        let run = self.run_guess(c, eps, &mode, &mut rng, &mut ledger)?;
        if mode == SolveMode::ClassicalExact {
            ledger = self.reads;
        }
        Ok(SolveReport {
            mode,
            params: SolveParams {
                d: self.d(),
                n: self.n(),
                eps,
                curvature: Some(c),
                iterations: Some(run.trace.len() - 1),
                max_iter: None,
            },
            objective: run.objective,
            theta_sparse: run.theta.support(),
            trace: run.trace,
            ledger: ledger.report(),
            seed,
            subproblem_violations: run.subproblem_violations,
            converged: true,
            candidates: Vec::new(),
            theta: run.theta,
        })
    }

    /// Best vertex of the shrunken ball `{+-e_j / 3}`.
    fn one_step(&self, eps: f64, mode: &SolveMode, seed: u64, ledger: &mut QueryLedger) -> Result<Vertex> {
        let d = self.d();
        let loss = |k: usize| {
            let s = Vertex::from_candidate(k);
            self.model.loss_at_basis(s.index, s.sign() / 3.0)
        };
        match mode {
            SolveMode::ClassicalExact => {
                let mut best = 0;
                let mut best_loss = loss(0);
                for k in 1..2 * d {
                    let v = loss(k);
                    if v < best_loss {
                        best = k;
                        best_loss = v;
                    }
                }
                Ok(Vertex::from_candidate(best))
            }
            SolveMode::QuantumEmulated(cfg) => {
                let mut rng = rng::stream(seed, &[rng::DOMAIN_SOLVER, 0]);
                let beta = eps / 20.0;
                let shape = EvalShape { d, n: self.n(), support: 1 };
                let params = MinFindParams { eps: beta, delta1: cfg.delta1, delta2: cfg.delta2 };
                let out = approx_min_find(2 * d, params, cfg, &mut rng, ledger, |k, rng, l| {
                    emulate_loss_from_exact(loss(k), shape, beta, cfg.delta2, cfg, rng, l)
                })?;
                Ok(Vertex::from_candidate(out.index))
            }
        }
    }

    /// The meta-algorithm: the best scaled vertex plus one curvature-guess run
    /// per rung of [`ladder`], each at accuracy `eps / 10`, returning the
    /// candidate of smallest (estimated) loss.
    pub fn solve(&self, eps: f64, mode: SolveMode, seed: u64) -> Result<SolveReport> {
        ensure(eps > 0.0 && eps < 0.5, "eps", || format!("{eps} not in (0, 1/2)"))?;
        Self::check_mode(&mode)?;
        let d = self.d();
        let mut ledger = QueryLedger::new();

        let v = self.one_step(eps, &mode, seed, &mut ledger)?;
        let mut one_step = KpTree::new_zero(d)?;
        one_step.update(1.0, v.sign() / 3.0, v.index)?;
        let one_step_loss = self.model.loss_at_basis(v.index, v.sign() / 3.0);

        let rungs = ladder(eps)?;
        let runs: Vec<(FwRun, QueryLedger)> = rungs
            .par_iter()
            .enumerate()
            .map(|(i, &c)| {
                let mut rng = rng::stream(seed, &[rng::DOMAIN_SOLVER, 1, i as u64]);
                let mut l = QueryLedger::new();
                self.run_guess(c, eps / 10.0, &mode, &mut rng, &mut l).map(|run| (run, l))
            })
            .collect::<Result<_>>()?;
        for (_, l) in &runs {
            ledger.merge(l);
        }

        let mut candidates = vec![Candidate {
            label: "one-step".into(),
            curvature: None,
            iterations: 0,
            objective: one_step_loss,
            estimate: None,
            subproblem_violations: 0,
        }];
        for ((run, _), &c) in runs.iter().zip(&rungs) {
            candidates.push(Candidate {
                label: format!("C={c}"),
                curvature: Some(c),
                iterations: run.trace.len() - 1,
                objective: run.objective,
                estimate: None,
                subproblem_violations: run.subproblem_violations,
            });
        }

        let scores: Vec<f64> = match &mode {
            SolveMode::ClassicalExact => candidates.iter().map(|c| c.objective).collect(),
            SolveMode::QuantumEmulated(cfg) => {
                let mut rng = rng::stream(seed, &[rng::DOMAIN_SOLVER, 2]);
                let delta = 1.0 / (40.0 * (1.0 / eps).log2());
                let supports = std::iter::once(1).chain(runs.iter().map(|(r, _)| r.theta.support_len()));
                let mut scores = Vec::with_capacity(candidates.len());
                for (cand, support) in candidates.iter_mut().zip(supports) {
                    let shape = EvalShape { d, n: self.n(), support };
                    let est = emulate_loss_from_exact(cand.objective, shape, eps / 10.0, delta, cfg, &mut rng, &mut ledger)?;
                    cand.estimate = Some(est);
                    scores.push(est);
                }
                scores
            }
        };
        let mut chosen = 0;
        for (k, &s) in scores.iter().enumerate() {
            if s < scores[chosen] {
                chosen = k;
            }
        }

        if mode == SolveMode::ClassicalExact {
            ledger = self.reads;
        }
        let violations = runs.iter().map(|(r, _)| r.subproblem_violations).sum();
        let (theta, trace) = if chosen == 0 {
            let entry = TraceEntry {
                t: 0,
                step: 1.0,
                direction: None,
                tolerance: None,
                objective: one_step_loss,
                subproblem_ok: None,
                mapping_norm: None,
            };
            (one_step, vec![entry])
        } else {
            let (run, _) = runs.into_iter().nth(chosen - 1).expect("candidate index in range");
            (run.theta, run.trace)
        };
        Ok(SolveReport {
            mode,
            params: SolveParams { d, n: self.n(), eps, curvature: None, iterations: None, max_iter: None },
            objective: candidates[chosen].objective,
            theta_sparse: theta.support(),
            trace,
            ledger: ledger.report(),
            seed,
            subproblem_violations: violations,
            converged: true,
            candidates,
            theta,
        })
    }
}

/// Frank-Wolfe on `s` with curvature guess `c` and target accuracy `eps`.
pub fn lasso_fw_with_guess(s: &SampleSet, c: f64, eps: f64, mode: SolveMode, seed: u64) -> Result<SolveReport> {
    LassoProblem::new(s)?.fw_with_guess(c, eps, mode, seed)
}

/// An `eps`-minimizer of the empirical loss over the l1 ball.
pub fn lasso_solve(s: &SampleSet, eps: f64, mode: SolveMode, seed: u64) -> Result<SolveReport> {
    LassoProblem::new(s)?.solve(eps, mode, seed)
}
