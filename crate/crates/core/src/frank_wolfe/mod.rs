//! Frank-Wolfe over the l1 ball with approximate linear subproblems.
//!
//! The iterate is kept in a [`KpTree`]; each step
//! `theta <- (1 - tau) theta + tau s` is a single scalar-and-entry update.

mod lasso;
mod ridge;

pub use lasso::{ladder, lasso_fw_with_guess, lasso_solve, LassoProblem};
pub use ridge::ridge_solve_baseline;

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};
use crate::kp_tree::KpTree;
use crate::loss::{Coefficients, QuadraticModel};
use crate::quantum::{EmulatorConfig, LedgerReport};

/// A signed basis vector `+-e_j`, a vertex of the l1 ball.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vertex {
    pub index: usize,
    pub negative: bool,
}

impl Vertex {
    pub fn sign(self) -> f64 {
        if self.negative {
            -1.0
        } else {
            1.0
        }
    }

    /// Candidate number in `0..2d`: `2j` is `+e_j`, `2j + 1` is `-e_j`.
    pub fn from_candidate(k: usize) -> Self {
        Self { index: k / 2, negative: k % 2 == 1 }
    }

    pub fn candidate(self) -> usize {
        2 * self.index + usize::from(self.negative)
    }

    /// `<s, g>`.
    pub fn inner(self, g: &Array1<f64>) -> f64 {
        self.sign() * g[self.index]
    }
}

/// Exact linear minimization over the l1 ball: `-sign(g_j) e_j` at the
/// largest `|g_j|`, lowest index on ties. A zero gradient gives `-e_0`.
pub fn lmo_l1_exact(g: &[f64]) -> Result<Vertex> {
    ensure(!g.is_empty(), "gradient", || "empty gradient".into())?;
    let mut best = 0;
    for (j, v) in g.iter().enumerate() {
        if v.abs() > g[best].abs() {
            best = j;
        }
    }
    Ok(Vertex { index: best, negative: g[best] >= 0.0 })
}

/// A smooth objective whose value and gradient can be tracked incrementally
/// along Frank-Wolfe steps.
pub trait SmoothObjective {
    type State;
    fn dim(&self) -> usize;
    fn init(&self, theta: &KpTree) -> Result<Self::State>;
    /// Moves the state from `theta` to `(1 - tau) theta + tau s`.
    fn advance(&self, state: &mut Self::State, tau: f64, s: Vertex);
    fn gradient(&self, state: &Self::State) -> Array1<f64>;
    fn loss(&self, state: &Self::State, theta: &KpTree) -> f64;
}

impl SmoothObjective for QuadraticModel {
    /// `G theta`.
    type State = Array1<f64>;

    fn dim(&self) -> usize {
        self.d()
    }

    fn init(&self, theta: &KpTree) -> Result<Array1<f64>> {
        self.gram_product(theta)
    }

    fn advance(&self, h: &mut Array1<f64>, tau: f64, s: Vertex) {
        *h *= 1.0 - tau;
        h.scaled_add(tau * s.sign(), &self.gram().column(s.index));
    }

    fn gradient(&self, h: &Array1<f64>) -> Array1<f64> {
        self.gradient_with(h)
    }

    fn loss(&self, h: &Array1<f64>, theta: &KpTree) -> f64 {
        self.loss_with(&theta.nonzeros(), h)
    }
}

/// What a direction oracle sees at step `t`.
pub struct StepContext<'a> {
    pub t: usize,
    pub tau: f64,
    /// Allowed additive error of the linear subproblem.
    pub tolerance: f64,
    /// Exact gradient at the iterate (emulated oracles perturb it).
    pub gradient: &'a Array1<f64>,
    pub theta: &'a KpTree,
}

pub trait DirectionOracle {
    fn choose(&mut self, step: &StepContext<'_>) -> Result<Vertex>;
}

/// Exact linear minimization.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExactLmo;

impl DirectionOracle for ExactLmo {
    fn choose(&mut self, step: &StepContext<'_>) -> Result<Vertex> {
        lmo_l1_exact(step.gradient.as_slice().expect("contiguous gradient"))
    }
}

/// Per-iteration record. Entry `t` describes the iterate `theta^t` and, for
/// `t < T`, the direction taken from it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceEntry {
    pub t: usize,
    /// Step size used from this iterate.
    pub step: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direction: Option<Vertex>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub objective: f64,
    /// Whether the chosen direction met the subproblem tolerance, audited
    /// against the exact gradient.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subproblem_ok: Option<bool>,
    /// Norm of the projected-gradient mapping (projected methods only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mapping_norm: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FwParams {
    pub iterations: usize,
    pub curvature: f64,
    /// Subproblem tolerance at step `t` is `tau_t * curvature * tolerance_factor`.
    pub tolerance_factor: f64,
}

impl FwParams {
    /// Plain Frank-Wolfe: tolerance `tau_t C / 4`.
    pub fn generic(iterations: usize, curvature: f64) -> Self {
        Self { iterations, curvature, tolerance_factor: 0.25 }
    }

    /// The curvature-guess variant: tolerance `C / (8t + 16)`.
    pub fn with_guess(iterations: usize, curvature: f64) -> Self {
        Self { iterations, curvature, tolerance_factor: 1.0 / 16.0 }
    }
}

#[derive(Debug, Clone)]
pub struct FwRun {
    pub theta: KpTree,
    pub objective: f64,
    pub trace: Vec<TraceEntry>,
    pub subproblem_violations: usize,
}

pub fn step_size(t: usize) -> f64 {
    2.0 / (t as f64 + 2.0)
}

/// Runs `params.iterations` Frank-Wolfe steps from `theta0`.
pub fn fw_generic<O, D>(objective: &O, oracle: &mut D, params: FwParams, theta0: KpTree) -> Result<FwRun>
where
    O: SmoothObjective,
    D: DirectionOracle + ?Sized,
{
    ensure(params.curvature > 0.0, "C", || format!("{} must be positive", params.curvature))?;
    ensure(theta0.dim() == objective.dim(), "theta0", || {
        format!("dimension {} does not match objective dimension {}", theta0.dim(), objective.dim())
    })?;
    let mut theta = theta0;
    let mut state = objective.init(&theta)?;
    let mut trace = Vec::with_capacity(params.iterations + 1);
    let mut violations = 0;

    for t in 0..params.iterations {
        let tau = step_size(t);
        let tolerance = tau * params.curvature * params.tolerance_factor;
        let gradient = objective.gradient(&state);
        let objective_value = objective.loss(&state, &theta);
        let s = oracle.choose(&StepContext { t, tau, tolerance, gradient: &gradient, theta: &theta })?;

        let best = -gradient.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        let ok = s.inner(&gradient) <= best + tolerance;
        violations += usize::from(!ok);
        trace.push(TraceEntry {
            t,
            step: tau,
            direction: Some(s),
            tolerance: Some(tolerance),
            objective: objective_value,
            subproblem_ok: Some(ok),
            mapping_norm: None,
        });

        if tau == 1.0 {
            theta = KpTree::new_zero(theta.dim())?;
            theta.update(1.0, s.sign(), s.index)?;
        } else {
            theta.update(1.0 - tau, tau * s.sign(), s.index)?;
        }
        objective.advance(&mut state, tau, s);
    }

    let final_value = objective.loss(&state, &theta);
    trace.push(TraceEntry {
        t: params.iterations,
        step: step_size(params.iterations),
        direction: None,
        tolerance: None,
        objective: final_value,
        subproblem_ok: None,
        mapping_norm: None,
    });
    Ok(FwRun { theta, objective: final_value, trace, subproblem_violations: violations })
}

/// Exact or emulated-quantum subroutines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", content = "config", rename_all = "kebab-case")]
pub enum SolveMode {
    ClassicalExact,
    QuantumEmulated(EmulatorConfig),
}

impl SolveMode {
    pub fn name(&self) -> &'static str {
        match self {
            SolveMode::ClassicalExact => "classical-exact",
            SolveMode::QuantumEmulated(_) => "quantum-emulated",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveParams {
    pub d: usize,
    pub n: usize,
    pub eps: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub curvature: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
}

/// One member of the meta-algorithm's candidate set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Candidate {
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub curvature: Option<f64>,
    pub iterations: usize,
    pub objective: f64,
    /// The noisy loss estimate the selection used, in emulated mode.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimate: Option<f64>,
    pub subproblem_violations: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub mode: SolveMode,
    pub params: SolveParams,
    /// Exact loss of the returned point.
    pub objective: f64,
    pub theta_sparse: Vec<(usize, f64)>,
    pub trace: Vec<TraceEntry>,
    pub ledger: LedgerReport,
    pub seed: u64,
    pub subproblem_violations: usize,
    pub converged: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub candidates: Vec<Candidate>,
    #[serde(skip)]
    pub theta: KpTree,
}

impl SolveReport {
    pub fn theta_dense(&self) -> Vec<f64> {
        self.theta.to_dense()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
