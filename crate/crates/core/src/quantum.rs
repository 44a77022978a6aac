//! Stochastic stand-ins for the quantum subroutines, with query accounting.
//!
//! Every emulator computes the exact answer classically, perturbs it within
//! the advertised accuracy band (or, with the advertised failure probability,
//! outside it) and charges the query count the quantum routine would use.
//! Charges depend only on the parameters, never on the random branch.

use std::f64::consts::FRAC_PI_2;
use std::ops::AddAssign;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::dataset::SampleSet;
use crate::error::{ensure, Error, Result};
use crate::kp_tree::KpTree;
use crate::loss;
use crate::rng::Rng;

/// Which oracle a charge is billed to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LedgerField {
    X,
    Y,
    Tree,
}

/// Charged query counts. Counters only ever grow.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryLedger {
    pub q_x: u64,
    pub q_y: u64,
    pub q_tree: u64,
    /// Elementary-operation estimate.
    pub gates: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LedgerReport {
    pub q_x: u64,
    pub q_y: u64,
    pub q_tree: u64,
    pub gates: u64,
    /// `q_x + q_y`.
    pub data_queries: u64,
    /// `q_x + q_y + q_tree`.
    pub total_queries: u64,
}

impl QueryLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn charge(&mut self, field: LedgerField, queries: u64) {
        let slot = match field {
            LedgerField::X => &mut self.q_x,
            LedgerField::Y => &mut self.q_y,
            LedgerField::Tree => &mut self.q_tree,
        };
        *slot = slot.saturating_add(queries);
    }

    pub fn charge_gates(&mut self, gates: u64) {
        self.gates = self.gates.saturating_add(gates);
    }

    pub fn merge(&mut self, other: &QueryLedger) {
        self.q_x = self.q_x.saturating_add(other.q_x);
        self.q_y = self.q_y.saturating_add(other.q_y);
        self.q_tree = self.q_tree.saturating_add(other.q_tree);
        self.gates = self.gates.saturating_add(other.gates);
    }

    /// This ledger's charges repeated `times` times.
    pub fn scaled(&self, times: u64) -> QueryLedger {
        QueryLedger {
            q_x: self.q_x.saturating_mul(times),
            q_y: self.q_y.saturating_mul(times),
            q_tree: self.q_tree.saturating_mul(times),
            gates: self.gates.saturating_mul(times),
        }
    }

    pub fn data_queries(&self) -> u64 {
        self.q_x.saturating_add(self.q_y)
    }

    pub fn total_queries(&self) -> u64 {
        self.data_queries().saturating_add(self.q_tree)
    }

    pub fn report(&self) -> LedgerReport {
        LedgerReport {
            q_x: self.q_x,
            q_y: self.q_y,
            q_tree: self.q_tree,
            gates: self.gates,
            data_queries: self.data_queries(),
            total_queries: self.total_queries(),
        }
    }

    pub fn reset(&mut self) {
        *self = Self::default();
    }
}

impl AddAssign<&QueryLedger> for QueryLedger {
    fn add_assign(&mut self, rhs: &QueryLedger) {
        self.merge(rhs);
    }
}

/// Constants of the emulated subroutines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmulatorConfig {
    /// Amplitude-estimation cost multiplier.
    pub c_ae: f64,
    /// Minimum-finding repetition constant.
    pub c_mf: f64,
    /// Gradient and loss oracle cost multiplier.
    pub c_grad: f64,
    /// Failure probability of each minimum-finding call.
    pub delta1: f64,
    /// Failure probability of each noisy evaluation inside minimum finding.
    pub delta2: f64,
    /// Charge the circuit overhead of reading the KP-tree without QRAM.
    pub qram_free: bool,
}

impl Default for EmulatorConfig {
    fn default() -> Self {
        Self {
            c_ae: 1.0,
            c_mf: 8.0,
            c_grad: 1.0,
            delta1: 1e-3,
            delta2: 1e-12,
            qram_free: false,
        }
    }
}

impl EmulatorConfig {
    /// The constants used in the worst-case analysis, tuned to accuracy `eps`
    /// in dimension `d`.
    pub fn analysis(eps: f64, d: usize) -> Result<Self> {
        ensure(eps > 0.0 && eps < 0.5, "eps", || format!("{eps} not in (0, 1/2)"))?;
        ensure(d >= 1, "d", || "must be at least 1".into())?;
        let log_inv = (1.0 / eps).log2();
        Ok(Self {
            c_ae: 1.0,
            c_mf: 1000.0,
            c_grad: 1.0,
            delta1: eps / (10000.0 * log_inv),
            delta2: eps * eps / (2.0 * d as f64 * 1e20 * log_inv.powi(6)),
            qram_free: false,
        })
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("c_ae", self.c_ae), ("c_mf", self.c_mf), ("c_grad", self.c_grad)] {
            ensure(v.is_finite() && v >= 1.0, name, || format!("constant must be at least 1, got {v}"))?;
        }
        check_probability("delta1", self.delta1)?;
        check_probability("delta2", self.delta2)
    }
}

fn check_probability(name: &'static str, p: f64) -> Result<()> {
    ensure(p > 0.0 && p < 1.0, name, || format!("{p} not in (0, 1)"))
}

fn ceil_log2(n: usize) -> u64 {
    if n <= 1 {
        0
    } else {
        u64::from(usize::BITS - (n - 1).leading_zeros())
    }
}

fn ceil_u64(v: f64) -> u64 {
    if v >= u64::MAX as f64 {
        u64::MAX
    } else {
        v.ceil().max(0.0) as u64
    }
}

/// Extra gates per KP-tree query when the tree is read through a circuit
/// instead of QRAM: the tree has about `s = t * depth` words, each read costs
/// `s * log2(s)` gates.
fn tree_gate_factor(cfg: &EmulatorConfig, support: usize, d: usize) -> u64 {
    if !cfg.qram_free {
        return 1;
    }
    let s = (support.max(1) as u64) * (ceil_log2(d) + 1);
    s * ceil_log2(s as usize + 1).max(1)
}

/// Estimates `a` in `[0, 1]` from `M` oracle applications.
///
/// With probability 9/10 the answer is uniform in
/// `[a - e, a + e] ∩ [0, 1]` for `e = sqrt(a(1-a))/M + 1/M^2`, otherwise
/// uniform in `[0, 1]`. Charges `c_ae * M` queries to `field`.
pub fn amp_estimate(
    a: f64,
    m: u64,
    field: LedgerField,
    cfg: &EmulatorConfig,
    rng: &mut Rng,
    ledger: &mut QueryLedger,
) -> Result<f64> {
    ensure(m >= 1, "M", || "must be positive".into())?;
    ensure((0.0..=1.0).contains(&a), "a", || format!("{a} not in [0, 1]"))?;
    let cost = ceil_u64(cfg.c_ae * m as f64);
    ledger.charge(field, cost);
    ledger.charge_gates(cost);
    let mf = m as f64;
    let band = (a * (1.0 - a)).sqrt() / mf + 1.0 / (mf * mf);
    if rng.gen_bool(0.9) {
        let lo = (a - band).max(0.0);
        let hi = (a + band).min(1.0);
        Ok(if hi > lo { rng.gen_range(lo..=hi) } else { lo })
    } else {
        Ok(rng.gen_range(0.0..=1.0))
    }
}

/// Accuracy band of [`amp_estimate`].
pub fn amp_band(a: f64, m: u64) -> f64 {
    let mf = m as f64;
    (a * (1.0 - a)).sqrt() / mf + 1.0 / (mf * mf)
}

/// Returns every index in `0..d` satisfying `pred`, charging
/// `ceil(pi/2 sqrt(d u) + u)` queries to `X`. Fails if more than `u` match.
pub fn grover_find_all(d: usize, u: usize, pred: impl Fn(usize) -> bool, ledger: &mut QueryLedger) -> Result<Vec<usize>> {
    let found: Vec<usize> = (0..d).filter(|&j| pred(j)).collect();
    if found.len() > u {
        return Err(Error::Precondition(format!(
            "{} marked elements exceed the promised bound {u}",
            found.len()
        )));
    }
    let cost = grover_cost(d, u);
    ledger.charge(LedgerField::X, cost);
    ledger.charge_gates(cost);
    Ok(found)
}

pub fn grover_cost(d: usize, u: usize) -> u64 {
    ceil_u64(FRAC_PI_2 * ((d * u) as f64).sqrt() + u as f64)
}

/// Query charges of one noisy gradient entry or loss evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EvalCost {
    /// Amplitude-estimation repetitions, `ceil(c_grad log2(1/delta) / beta)`.
    pub repetitions: u64,
    pub q_x: u64,
    pub q_y: u64,
    pub q_tree: u64,
}

impl EvalCost {
    fn charge(&self, gate_factor: u64, ledger: &mut QueryLedger) {
        ledger.charge(LedgerField::X, self.q_x);
        ledger.charge(LedgerField::Y, self.q_y);
        ledger.charge(LedgerField::Tree, self.q_tree);
        ledger.charge_gates(self.q_x + self.q_y + self.q_tree.saturating_mul(gate_factor));
    }
}

fn check_accuracy(beta: f64, delta: f64) -> Result<()> {
    ensure(beta > 0.0 && beta.is_finite(), "beta", || format!("{beta} must be positive"))?;
    check_probability("delta", delta)
}

fn repetitions(beta: f64, delta: f64, cfg: &EmulatorConfig) -> u64 {
    ceil_u64(cfg.c_grad * (1.0 / delta).log2() / beta)
}

/// `K (ceil(log2 d) + ceil(log2 N))` queries: the tree part goes to the KP-tree
/// oracle, the data part is split 3:1 between `X` and `y`.
pub fn gradient_cost(d: usize, n: usize, beta: f64, delta: f64, cfg: &EmulatorConfig) -> Result<EvalCost> {
    check_accuracy(beta, delta)?;
    let k = repetitions(beta, delta, cfg);
    let data = k.saturating_mul(ceil_log2(n));
    let q_y = data / 4;
    Ok(EvalCost {
        repetitions: k,
        q_x: data - q_y,
        q_y,
        q_tree: k.saturating_mul(ceil_log2(d)),
    })
}

/// Same total as [`gradient_cost`], with the data part split evenly.
pub fn loss_cost(d: usize, n: usize, beta: f64, delta: f64, cfg: &EmulatorConfig) -> Result<EvalCost> {
    check_accuracy(beta, delta)?;
    let k = repetitions(beta, delta, cfg);
    let data = k.saturating_mul(ceil_log2(n));
    let q_y = data / 2;
    Ok(EvalCost {
        repetitions: k,
        q_x: data - q_y,
        q_y,
        q_tree: k.saturating_mul(ceil_log2(d)),
    })
}

/// Sizes the emulated evaluation is charged for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalShape {
    pub d: usize,
    pub n: usize,
    /// Support size of the current iterate.
    pub support: usize,
}

/// Noisy gradient entry around a known exact value: `exact + U(-beta, beta)`
/// with probability `1 - delta`, else `exact + U(-8, 8)`.
pub fn emulate_gradient_from_exact(
    exact: f64,
    shape: EvalShape,
    beta: f64,
    delta: f64,
    cfg: &EmulatorConfig,
    rng: &mut Rng,
    ledger: &mut QueryLedger,
) -> Result<f64> {
    let cost = gradient_cost(shape.d, shape.n, beta, delta, cfg)?;
    cost.charge(tree_gate_factor(cfg, shape.support, shape.d), ledger);
    let width = if rng.gen_bool(1.0 - delta) { beta } else { 8.0 };
    Ok(exact + rng.gen_range(-width..=width))
}

/// Noisy loss around a known exact value: `exact + U(-beta, beta)` with
/// probability `1 - delta`, else `U(0, 4)`.
pub fn emulate_loss_from_exact(
    exact: f64,
    shape: EvalShape,
    beta: f64,
    delta: f64,
    cfg: &EmulatorConfig,
    rng: &mut Rng,
    ledger: &mut QueryLedger,
) -> Result<f64> {
    let cost = loss_cost(shape.d, shape.n, beta, delta, cfg)?;
    cost.charge(tree_gate_factor(cfg, shape.support, shape.d), ledger);
    if rng.gen_bool(1.0 - delta) {
        Ok(exact + rng.gen_range(-beta..=beta))
    } else {
        Ok(rng.gen_range(0.0..=4.0))
    }
}

fn shape_of(s: &SampleSet, tree: &KpTree) -> Result<EvalShape> {
    if s.d() != tree.dim() {
        return Err(Error::DimensionMismatch { expected: s.d(), found: tree.dim() });
    }
    ensure(tree.l1_norm() <= 1.0 + 1e-9, "theta", || {
        format!("l1 norm {} exceeds 1", tree.l1_norm())
    })?;
    Ok(EvalShape { d: s.d(), n: s.n(), support: tree.support_len() })
}

/// `beta`-accurate estimate of `grad_j L_S(theta)` with failure probability `delta`.
#[allow(clippy::too_many_arguments)]
pub fn noisy_gradient_entry(
    s: &SampleSet,
    tree: &KpTree,
    j: usize,
    beta: f64,
    delta: f64,
    cfg: &EmulatorConfig,
    rng: &mut Rng,
    ledger: &mut QueryLedger,
) -> Result<f64> {
    let shape = shape_of(s, tree)?;
    let exact = loss::empirical_gradient_entry(s, tree, j)?;
    emulate_gradient_from_exact(exact, shape, beta, delta, cfg, rng, ledger)
}

/// `beta`-accurate estimate of `L_S(theta)` with failure probability `delta`.
pub fn noisy_loss(
    s: &SampleSet,
    tree: &KpTree,
    beta: f64,
    delta: f64,
    cfg: &EmulatorConfig,
    rng: &mut Rng,
    ledger: &mut QueryLedger,
) -> Result<f64> {
    let shape = shape_of(s, tree)?;
    let exact = loss::empirical_loss(s, tree)?;
    emulate_loss_from_exact(exact, shape, beta, delta, cfg, rng, ledger)
}

/// Parameters of one minimum-finding call.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinFindParams {
    /// Accuracy of each noisy evaluation.
    pub eps: f64,
    /// Overall failure probability.
    pub delta1: f64,
    /// Failure probability of each evaluation.
    pub delta2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinFindOutcome {
    pub index: usize,
    /// Whether the failure branch replaced the answer.
    pub failed: bool,
    /// Charged closure applications.
    pub applications: u64,
    /// The noisy values the choice was made from.
    pub observed: Vec<f64>,
}

impl MinFindOutcome {
    /// Whether the chosen index is within `2 eps` of the true minimum.
    pub fn meets_contract(&self, exact: &[f64], eps: f64) -> bool {
        let min = exact.iter().copied().fold(f64::INFINITY, f64::min);
        exact[self.index] <= min + 2.0 * eps
    }
}

pub fn min_find_applications(m: usize, delta1: f64, cfg: &EmulatorConfig) -> u64 {
    ceil_u64(cfg.c_mf * (m as f64).sqrt() * (1.0 / delta1).log2())
}

/// Probability that minimum finding returns an arbitrary index.
pub fn min_find_failure(m: usize, delta1: f64, delta2: f64, cfg: &EmulatorConfig) -> f64 {
    let spread = cfg.c_mf * (1.0 / delta1).log2() * (2.0 * m as f64 * delta2).sqrt();
    (delta1 + spread.min(1.0)).min(1.0)
}

/// Approximate minimum over `values(0..m)`.
///
/// Each index is evaluated once with fresh noise and the lowest-index argmin
/// is taken; then, with the failure probability, a uniformly random index
/// replaces it. The ledger is charged `ceil(c_mf sqrt(m) log2(1/delta1))`
/// applications, each at the inner cost the closure reports for index 0.
pub fn approx_min_find<F>(
    m: usize,
    params: MinFindParams,
    cfg: &EmulatorConfig,
    rng: &mut Rng,
    ledger: &mut QueryLedger,
    mut values: F,
) -> Result<MinFindOutcome>
where
    F: FnMut(usize, &mut Rng, &mut QueryLedger) -> Result<f64>,
{
    ensure(m >= 1, "m", || "need at least one candidate".into())?;
    ensure(params.eps > 0.0, "eps", || format!("{} must be positive", params.eps))?;
    check_probability("delta1", params.delta1)?;
    ensure((0.0..1.0).contains(&params.delta2), "delta2", || format!("{} not in [0, 1)", params.delta2))?;

    let mut per_application = QueryLedger::new();
    let mut observed = Vec::with_capacity(m);
    observed.push(values(0, rng, &mut per_application)?);
    let mut muted = QueryLedger::new();
    for k in 1..m {
        observed.push(values(k, rng, &mut muted)?);
    }

    let mut index = 0;
    for (k, &v) in observed.iter().enumerate() {
        if v < observed[index] {
            index = k;
        }
    }
    let failed = rng.gen_bool(min_find_failure(m, params.delta1, params.delta2, cfg));
    if failed {
        index = rng.gen_range(0..m);
    }

    let applications = min_find_applications(m, params.delta1, cfg);
    ledger.merge(&per_application.scaled(applications));
    ledger.charge_gates(applications);
    Ok(MinFindOutcome { index, failed, applications, observed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{gen_lasso_hidden, NormRegime};
    use crate::rng;
    use ndarray::{Array1, Array2};

    fn sigma(p: f64, n: f64) -> f64 {
        (p * (1.0 - p) / n).sqrt()
    }

    #[test]
    fn ledger_basics() {
        let mut l = QueryLedger::new();
        assert_eq!(l.report().total_queries, 0);
        grover_find_all(100, 4, |j| j == 3, &mut l).unwrap();
        assert_eq!(l.q_x, 36);
        let mut other = QueryLedger::new();
        other.charge(LedgerField::Tree, 5);
        other.charge(LedgerField::Y, 2);
        l += &other;
        assert_eq!(l.report().total_queries, 43);
        assert_eq!(l.report().data_queries, 38);
        l.reset();
        assert_eq!(l, QueryLedger::default());
    }

    #[test]
    fn grover_examples() {
        assert_eq!(grover_cost(100, 4), 36);
        let mut l = QueryLedger::new();
        assert!(grover_find_all(50, 0, |_| false, &mut l).unwrap().is_empty());
        assert_eq!(l.q_x, 0);
        assert_eq!(grover_find_all(64, 2, |j| j == 3 || j == 9, &mut l).unwrap(), vec![3, 9]);
        assert!(grover_find_all(64, 1, |j| j < 2, &mut l).is_err());
    }

    #[test]
    fn amp_estimate_success_band() {
        let cfg = EmulatorConfig::default();
        let mut r = rng::from_seed(1);
        let mut l = QueryLedger::new();
        for _ in 0..2000 {
            let z = amp_estimate(0.0, 7, LedgerField::Tree, &cfg, &mut r, &mut l).unwrap();
            assert!((0.0..=1.0).contains(&z));
            let one = amp_estimate(1.0, 10, LedgerField::Tree, &cfg, &mut r, &mut l).unwrap();
            assert!((0.0..=1.0).contains(&one));
        }
        assert_eq!(l.q_tree, 2000 * 17);
        assert!((amp_band(1.0, 10) - 0.01).abs() < 1e-15);
        assert!(amp_estimate(0.5, 0, LedgerField::X, &cfg, &mut r, &mut l).is_err());
    }

    #[test]
    fn amp_estimate_rate() {
        let cfg = EmulatorConfig::default();
        let mut r = rng::from_seed(2);
        let mut l = QueryLedger::new();
        let trials = 100_000;
        let band = amp_band(0.3, 20);
        let bad = (0..trials)
            .filter(|_| (amp_estimate(0.3, 20, LedgerField::X, &cfg, &mut r, &mut l).unwrap() - 0.3).abs() > band)
            .count();
        let rate = bad as f64 / trials as f64;
        assert!(rate <= 0.1 + 3.0 * sigma(0.1, trials as f64));
    }

    #[test]
    fn gradient_cost_split() {
        let cfg = EmulatorConfig::default();
        let c = gradient_cost(64, 1000, 0.1, 1.0 / 1024.0, &cfg).unwrap();
        assert_eq!(c.repetitions, 100);
        assert_eq!(c.q_tree, 600);
        assert_eq!(c.q_x + c.q_y, 1000);
        assert_eq!(c.q_y, 250);
        let l = loss_cost(64, 1000, 0.1, 1.0 / 1024.0, &cfg).unwrap();
        assert_eq!(l.q_y, 500);
        let half = loss_cost(64, 1000, 0.05, 1.0 / 1024.0, &cfg).unwrap();
        assert!((half.repetitions as i64 - 2 * l.repetitions as i64).abs() <= 1);
        assert!(gradient_cost(64, 1000, 0.0, 0.1, &cfg).is_err());
        assert!(gradient_cost(64, 1000, 0.1, 1.0, &cfg).is_err());
    }

    #[test]
    fn noisy_gradient_and_loss_centres() {
        let cfg = EmulatorConfig::default();
        let x = Array2::from_shape_fn((6, 3), |(i, j)| if (i + j) % 3 == 0 { 1.0 } else { -1.0 });
        let s = SampleSet::new(x, Array1::ones(6), NormRegime::LInf).unwrap();
        let zero = KpTree::new_zero(3).unwrap();
        let mut r = rng::from_seed(3);
        let mut l = QueryLedger::new();
        for j in 0..3 {
            let want = -(2.0 / 6.0) * s.x().column(j).sum();
            let got = noisy_gradient_entry(&s, &zero, j, 0.1, 1e-6, &cfg, &mut r, &mut l).unwrap();
            assert!((got - want).abs() <= 0.1);
        }
        let v = noisy_loss(&s, &zero, 0.05, 1e-6, &cfg, &mut r, &mut l).unwrap();
        assert!((v - 1.0).abs() <= 0.05);
        let big = KpTree::from_dense(&[1.0, 1.0, 0.0]).unwrap();
        assert!(noisy_loss(&s, &big, 0.05, 1e-6, &cfg, &mut r, &mut l).is_err());
    }

    #[test]
    fn garbage_rates() {
        let cfg = EmulatorConfig::default();
        let (s, _) = gen_lasso_hidden(16, 3, 0.1, 200, 4).unwrap();
        let tree = KpTree::from_dense(&[0.2, 0.0, -0.3, 0.0, 0.0, 0.1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.05]).unwrap();
        let exact_g = loss::empirical_gradient_entry(&s, &tree, 2).unwrap();
        let exact_l = loss::empirical_loss(&s, &tree).unwrap();
        let shape = EvalShape { d: 16, n: 200, support: 4 };
        let mut r = rng::from_seed(5);
        let mut l = QueryLedger::new();
        let trials = 20_000;
        let mut bad_g = 0;
        let mut bad_l = 0;
        for _ in 0..trials {
            let g = emulate_gradient_from_exact(exact_g, shape, 0.05, 0.1, &cfg, &mut r, &mut l).unwrap();
            bad_g += usize::from((g - exact_g).abs() > 0.05);
            let v = emulate_loss_from_exact(exact_l, shape, 0.05, 0.1, &cfg, &mut r, &mut l).unwrap();
            bad_l += usize::from((v - exact_l).abs() > 0.05);
        }
        let bound = 0.1 + 3.0 * sigma(0.1, trials as f64);
        assert!((bad_g as f64 / trials as f64) <= bound);
        assert!((bad_l as f64 / trials as f64) <= bound);
    }

    #[test]
    fn charges_do_not_depend_on_branch() {
        let cfg = EmulatorConfig::default();
        let shape = EvalShape { d: 128, n: 500, support: 3 };
        let mut first = None;
        for seed in 0..50 {
            let mut r = rng::from_seed(seed);
            let mut l = QueryLedger::new();
            emulate_gradient_from_exact(0.3, shape, 0.1, 0.5, &cfg, &mut r, &mut l).unwrap();
            emulate_loss_from_exact(0.3, shape, 0.1, 0.5, &cfg, &mut r, &mut l).unwrap();
            assert_eq!(*first.get_or_insert(l), l);
        }
    }

    #[test]
    fn qram_free_only_raises_gates() {
        let shape = EvalShape { d: 128, n: 500, support: 10 };
        let base = EmulatorConfig::default();
        let free = EmulatorConfig { qram_free: true, ..base };
        let mut a = QueryLedger::new();
        let mut b = QueryLedger::new();
        emulate_loss_from_exact(0.3, shape, 0.1, 0.1, &base, &mut rng::from_seed(0), &mut a).unwrap();
        emulate_loss_from_exact(0.3, shape, 0.1, 0.1, &free, &mut rng::from_seed(0), &mut b).unwrap();
        assert_eq!(a.total_queries(), b.total_queries());
        assert!(b.gates > a.gates);
    }

    fn exact_closure(v: Vec<f64>) -> impl FnMut(usize, &mut Rng, &mut QueryLedger) -> Result<f64> {
        move |k, _, l| {
            l.charge(LedgerField::X, 1);
            Ok(v[k])
        }
    }

    #[test]
    fn min_find_examples() {
        let cfg = EmulatorConfig::default();
        let params = MinFindParams { eps: 0.1, delta1: 1e-3, delta2: 0.0 };
        let mut fails = 0;
        for seed in 0..200 {
            let mut r = rng::from_seed(seed);
            let mut l = QueryLedger::new();
            let out = approx_min_find(3, params, &cfg, &mut r, &mut l, exact_closure(vec![5.0, 1.0, 3.0])).unwrap();
            if out.failed {
                fails += 1;
            } else {
                assert_eq!(out.index, 1);
            }
            assert_eq!(l.q_x, min_find_applications(3, 1e-3, &cfg));
            assert_eq!(l.q_x, (8.0 * 3f64.sqrt() * 1000f64.log2()).ceil() as u64);
        }
        assert!(fails <= 5);
        let mut r = rng::from_seed(0);
        let mut l = QueryLedger::new();
        let out = approx_min_find(2, params, &cfg, &mut r, &mut l, exact_closure(vec![0.0, 0.05])).unwrap();
        assert!(out.meets_contract(&[0.0, 0.05], 0.1));
        assert!(approx_min_find(0, params, &cfg, &mut r, &mut l, exact_closure(vec![])).is_err());
    }

    #[test]
    fn min_find_failure_is_clamped() {
        let cfg = EmulatorConfig { c_mf: 1000.0, ..Default::default() };
        assert_eq!(min_find_failure(1 << 20, 1e-3, 1e-3, &cfg), 1.0);
        let small = min_find_failure(64, 1e-3, 1e-12, &EmulatorConfig::default());
        assert!(small > 1e-3 && small < 2e-3);
    }

    #[test]
    fn min_find_success_branch_is_sound() {
        let cfg = EmulatorConfig::default();
        let eps = 0.05;
        for m in [1usize, 2, 5, 17, 64] {
            for seed in 0..100u64 {
                let mut r = rng::stream(seed, &[m as u64]);
                let exact: Vec<f64> = (0..m).map(|_| r.gen_range(-1.0..1.0)).collect();
                let truth = exact.clone();
                let mut l = QueryLedger::new();
                let params = MinFindParams { eps, delta1: 1e-3, delta2: 1e-12 };
                let out = approx_min_find(m, params, &cfg, &mut r, &mut l, move |k, r, _| {
                    Ok(truth[k] + r.gen_range(-eps..=eps))
                })
                .unwrap();
                if !out.failed {
                    assert!(out.meets_contract(&exact, eps));
                }
            }
        }
    }

    #[test]
    fn config_presets() {
        let cfg = EmulatorConfig::default();
        cfg.validate().unwrap();
        let strict = EmulatorConfig::analysis(0.1, 128).unwrap();
        strict.validate().unwrap();
        assert_eq!(strict.c_mf, 1000.0);
        assert!(strict.delta2 < 1e-20);
        assert!(EmulatorConfig { c_mf: 0.5, ..cfg }.validate().is_err());
    }
}
