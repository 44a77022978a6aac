//! Command-line experiment runner.
//!
//! Every command prints one JSON document `{command, config, timestamp?,
//! result}` to stdout or `--out`. Exit codes: 0 success, 1 invalid input,
//! 2 runtime failure.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::dataset::{gen_lasso_hidden, gen_ridge_hidden, gen_worst_case, Bias, SampleSet, WorstCaseVariant};
use crate::error::{invalid, Error, Result};
use crate::frank_wolfe::{lasso_fw_with_guess, lasso_solve, ridge_solve_baseline, SolveMode, SolveReport};
use crate::lower_bound::{audit_grid, esf_via_lasso, recover_set_lasso, recover_set_ridge, RecoveryResult};
use crate::quantum::EmulatorConfig;
use crate::rng::derive_seed;
use crate::scaling::{fit_log_log, fit_scaling, sweep_accuracy, sweep_dimension, ScalingPoint, SweepInstance};

#[derive(Debug, Parser, Serialize)]
#[command(name = "qlb", version, about = "Frank-Wolfe Lasso with emulated quantum subroutines and hidden-set lower-bound experiments")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Serialize)]
pub struct Global {
    /// Master seed.
    #[arg(long, global = true, env = "QLB_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Amplitude-estimation cost multiplier.
    #[arg(long, global = true)]
    pub c_ae: Option<f64>,
    /// Minimum-finding repetition constant.
    #[arg(long, global = true)]
    pub c_mf: Option<f64>,
    /// Gradient and loss oracle cost multiplier.
    #[arg(long, global = true)]
    pub c_grad: Option<f64>,
    /// Use the worst-case analysis constants (tuned to the run's eps and d).
    #[arg(long, global = true)]
    pub paper_constants: bool,
    /// Charge circuit gates for reading the KP-tree without QRAM.
    #[arg(long, global = true)]
    pub qram_free: bool,
    /// Leave the timestamp out of the output.
    #[arg(long, global = true)]
    pub no_timestamp: bool,
    /// Worker threads for independent seeds, rounds and dimensions.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Write the JSON output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Classical,
    Quantum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Problem {
    Lasso,
    Ridge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GenKind {
    Lasso,
    Ridge,
    WorstCase,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Solve on planted samples and threshold.
    Direct,
    /// Set finding on a worst-case matrix through repeated Lasso solves.
    Esf,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Generate a planted sample set or a worst-case matrix.
    Gen {
        #[arg(long, value_enum)]
        kind: GenKind,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        w: usize,
        /// Bias, as a decimal or a fraction `a/b`.
        #[arg(long)]
        p: String,
        /// Number of samples (rows of the worst-case matrix).
        #[arg(long)]
        m: usize,
        #[arg(long, default_value = "wsf")]
        variant: String,
        /// Where to write the samples.
        #[arg(long)]
        csv: PathBuf,
    },
    /// Solve Lasso on a sample file.
    SolveLasso {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long, value_enum, default_value_t = Mode::Classical)]
        mode: Mode,
        /// Run a single Frank-Wolfe pass with this curvature guess.
        #[arg(long)]
        curvature: Option<f64>,
        /// Write the iterate trace as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Solve Ridge on a sample file by projected gradient descent.
    SolveRidge {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 100_000)]
        max_iter: usize,
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Recover planted sets over several seeds.
    Recover {
        #[arg(long, value_enum)]
        problem: Problem,
        #[arg(long, value_enum, default_value_t = Method::Direct)]
        method: Method,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        w: usize,
        #[arg(long)]
        p: String,
        /// Samples per solve.
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 10)]
        seeds: usize,
        #[arg(long, value_enum, default_value_t = Mode::Classical)]
        mode: Mode,
        /// Voting rounds of the set-finding reduction.
        #[arg(long)]
        rounds: Option<usize>,
        /// Rows of the worst-case matrix.
        #[arg(long, default_value_t = 2000)]
        rows: usize,
    },
    /// Charged-query sweeps over dimension or accuracy, as CSV.
    Scaling {
        #[arg(long, value_delimiter = ',')]
        dims: Vec<usize>,
        /// Accuracy for a dimension sweep.
        #[arg(long, default_value_t = 0.2)]
        eps: f64,
        /// Accuracies for a sweep at fixed `--d`.
        #[arg(long, value_delimiter = ',')]
        eps_list: Vec<f64>,
        #[arg(long, default_value_t = 256)]
        d: usize,
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long, default_value_t = 5)]
        w: usize,
        #[arg(long, default_value_t = 0.1)]
        p: f64,
        #[arg(long, value_enum, default_value_t = Mode::Quantum)]
        mode: Mode,
        /// Also write a JSON report with the log-log fit here.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Fit an existing CSV (first column x, column `--cost` y) instead of sweeping.
        #[arg(long)]
        from_csv: Option<PathBuf>,
        #[arg(long, default_value = "total")]
        cost: String,
    },
    /// Exact hypergeometric and binomial distances against their bounds.
    Distances {
        #[arg(long = "N", value_delimiter = ',', required = true)]
        n: Vec<u64>,
        #[arg(long, default_value_t = 50)]
        m_max: u64,
        #[arg(long, value_delimiter = ',', required = true)]
        p: Vec<f64>,
    },
    /// Check a sample file against its normalisation.
    Validate {
        #[arg(long)]
        csv: PathBuf,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Gen { .. } => "gen",
            Command::SolveLasso { .. } => "solve-lasso",
            Command::SolveRidge { .. } => "solve-ridge",
            Command::Recover { .. } => "recover",
            Command::Scaling { .. } => "scaling",
            Command::Distances { .. } => "distances",
            Command::Validate { .. } => "validate",
        }
    }
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidParameter { .. }
        | Error::DimensionMismatch { .. }
        | Error::IndexOutOfRange { .. }
        | Error::Precondition(_)
        | Error::Csv { .. } => 1,
        Error::Io(_) | Error::Solver { .. } | Error::Json(_) => 2,
    }
}

/// What a command produced: the JSON result, an optional raw text artifact
/// for stdout, and whether the run counts as a validation failure.
struct Output {
    result: Value,
    text: Option<String>,
    invalid: bool,
}

impl Output {
    fn json(result: Value) -> Self {
        Self { result, text: None, invalid: false }
    }
}

impl Global {
    fn mode(&self, mode: Mode, eps: f64, d: usize) -> Result<SolveMode> {
        Ok(match mode {
            Mode::Classical => SolveMode::ClassicalExact,
            Mode::Quantum => SolveMode::QuantumEmulated(self.emulator(eps, d)?),
        })
    }

    fn emulator(&self, eps: f64, d: usize) -> Result<EmulatorConfig> {
        let mut cfg = if self.paper_constants { EmulatorConfig::analysis(eps, d)? } else { EmulatorConfig::default() };
        if let Some(v) = self.c_ae {
            cfg.c_ae = v;
        }
        if let Some(v) = self.c_mf {
            cfg.c_mf = v;
        }
        if let Some(v) = self.c_grad {
            cfg.c_grad = v;
        }
        cfg.qram_free = self.qram_free;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    Ok(serde_json::to_value(v)?)
}

fn load(path: &Path) -> Result<SampleSet> {
    SampleSet::load_csv(path).map_err(|e| match e {
        Error::Io(io) => Error::Io(std::io::Error::new(io.kind(), format!("{}: {io}", path.display()))),
        other => other,
    })
}

fn write_trace(path: &Path, rep: &SolveReport) -> Result<()> {
    let mut out = String::from("t,step,objective,mapping_norm\n");
    for e in &rep.trace {
        let mapping = e.mapping_norm.map(|m| m.to_string()).unwrap_or_default();
        out.push_str(&format!("{},{},{},{}\n", e.t, e.step, e.objective, mapping));
    }
    fs::write(path, out)?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn gen(g: &Global, kind: GenKind, d: usize, w: usize, p: &str, m: usize, variant: &str, csv: &Path) -> Result<Output> {
    let bias: Bias = p.parse()?;
    let result = match kind {
        GenKind::Lasso | GenKind::Ridge => {
            let (s, inst) = if kind == GenKind::Lasso {
                gen_lasso_hidden(d, w, bias.value(), m, g.seed)?
            } else {
                gen_ridge_hidden(d, w, bias.value(), m, g.seed)?
            };
            s.save_csv(csv)?;
            json!({ "csv": csv, "d": d, "n": s.n(), "regime": s.regime(), "instance": inst })
        }
        GenKind::WorstCase => {
            let variant: WorstCaseVariant = variant.parse()?;
            let xw = gen_worst_case(d, w, bias, m, variant, g.seed)?;
            xw.to_sample_set().save_csv(csv)?;
            json!({
                "csv": csv,
                "d": d,
                "n": m,
                "variant": variant,
                "bias": bias.to_string(),
                "planted": xw.planted(),
                "column_sums": (0..d).map(|j| xw.column_sum(j)).collect::<Vec<_>>(),
            })
        }
    };
    Ok(Output::json(result))
}

fn solve_lasso(g: &Global, csv: &Path, eps: f64, mode: Mode, curvature: Option<f64>, trace: Option<&Path>) -> Result<Output> {
    let s = load(csv)?;
    let mode = g.mode(mode, eps, s.d())?;
    let rep = match curvature {
        Some(c) => lasso_fw_with_guess(&s, c, eps, mode, g.seed)?,
        None => lasso_solve(&s, eps, mode, g.seed)?,
    };
    if let Some(path) = trace {
        write_trace(path, &rep)?;
    }
    Ok(Output::json(to_value(&rep)?))
}

fn solve_ridge(csv: &Path, eps: f64, max_iter: usize, trace: Option<&Path>) -> Result<Output> {
    let s = load(csv)?;
    let rep = ridge_solve_baseline(&s, eps, max_iter)?;
    if let Some(path) = trace {
        write_trace(path, &rep)?;
    }
    Ok(Output::json(to_value(&rep)?))
}

#[derive(Serialize)]
struct SeedOutcome {
    seed: u64,
    #[serde(flatten)]
    recovery: RecoveryResult,
    objective: Option<f64>,
    reads: Option<usize>,
}

#[allow(clippy::too_many_arguments)]
fn recover(
    g: &Global,
    problem: Problem,
    method: Method,
    d: usize,
    eps: f64,
    w: usize,
    p: &str,
    m: usize,
    seeds: usize,
    mode: Mode,
    rounds: Option<usize>,
    rows: usize,
) -> Result<Output> {
    use rayon::prelude::*;

    let bias: Bias = p.parse()?;
    let solve_mode = g.mode(mode, eps, d)?;
    let outcomes: Vec<SeedOutcome> = (0..seeds as u64)
        .into_par_iter()
        .map(|k| -> Result<SeedOutcome> {
            let seed = derive_seed(g.seed, &[k]);
            match (problem, method) {
                (Problem::Lasso, Method::Direct) => {
                    let (s, inst) = gen_lasso_hidden(d, w, bias.value(), m, seed)?;
                    let rep = lasso_solve(&s, eps, solve_mode, seed)?;
                    let found = recover_set_lasso(&rep.theta_dense(), eps)?;
                    let recovery = RecoveryResult::new(&inst.planted, found);
                    Ok(SeedOutcome { seed, recovery, objective: Some(rep.objective), reads: None })
                }
                (Problem::Ridge, Method::Direct) => {
                    let (s, inst) = gen_ridge_hidden(d, w, bias.value(), m, seed)?;
                    let rep = ridge_solve_baseline(&s, eps, 100_000)?;
                    let recovery = RecoveryResult::new(&inst.planted, recover_set_ridge(&rep.theta_dense()));
                    Ok(SeedOutcome { seed, recovery, objective: Some(rep.objective), reads: None })
                }
                (Problem::Lasso, Method::Esf) => {
                    let xw = gen_worst_case(d, w, bias, rows, WorstCaseVariant::Wsf, seed)?;
                    let solver = |s: &SampleSet, sd: u64| lasso_solve(s, eps, solve_mode, sd).map(|r| r.theta_dense());
                    let u = rounds.unwrap_or_else(|| crate::lower_bound::default_rounds(d));
                    let out = esf_via_lasso(&xw, solver, m, u, seed)?;
                    Ok(SeedOutcome { seed, recovery: out.result, objective: None, reads: Some(out.reads) })
                }
                (Problem::Ridge, Method::Esf) => {
                    Err(invalid("method", "set finding is only defined for lasso"))
                }
            }
        })
        .collect::<Result<_>>()?;
    let successes = outcomes.iter().filter(|o| o.recovery.pass).count();
    Ok(Output::json(json!({ "successes": successes, "seeds": seeds, "runs": outcomes })))
}

fn points_csv(points: &[ScalingPoint], by_eps: bool) -> String {
    let mut out = String::from(if by_eps { "eps" } else { "d" });
    out.push_str(",q_x,q_y,q_tree,gates,data,total\n");
    for p in points {
        let l = &p.ledger;
        let x = if by_eps { p.eps.to_string() } else { p.d.to_string() };
        out.push_str(&format!("{x},{},{},{},{},{},{}\n", l.q_x, l.q_y, l.q_tree, l.gates, l.data_queries, l.total_queries));
    }
    out
}

fn fit_any(points: &[(f64, f64)]) -> Result<Value> {
    match points.len() {
        0..=2 => Ok(Value::Null),
        3 => to_value(&fit_log_log(points)?),
        _ => to_value(&fit_scaling(points)?),
    }
}

/// Reads `(x, cost)` pairs from a CSV with a header row.
fn read_pairs(path: &Path, cost: &str) -> Result<Vec<(f64, f64)>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<&str> = lines.next().ok_or_else(|| invalid("from-csv", "empty file"))?.split(',').map(str::trim).collect();
    let col = header
        .iter()
        .position(|h| *h == cost)
        .ok_or_else(|| invalid("cost", format!("no column `{cost}` in {}", path.display())))?;
    lines
        .map(|l| {
            let cells: Vec<&str> = l.split(',').map(str::trim).collect();
            let num = |k: usize| -> Result<f64> {
                cells
                    .get(k)
                    .and_then(|c| c.parse().ok())
                    .ok_or_else(|| invalid("from-csv", format!("bad row `{l}`")))
            };
            Ok((num(0)?, num(col)?))
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn scaling(
    g: &Global,
    dims: &[usize],
    eps: f64,
    eps_list: &[f64],
    d: usize,
    inst: SweepInstance,
    mode: Mode,
    from_csv: Option<&Path>,
    cost: &str,
) -> Result<Output> {
    if let Some(path) = from_csv {
        let pairs = read_pairs(path, cost)?;
        return Ok(Output::json(to_value(&fit_scaling(&pairs)?)?));
    }
    if dims.is_empty() == eps_list.is_empty() {
        return Err(invalid("dims", "give exactly one of --dims and --eps-list"));
    }
    let by_eps = dims.is_empty();
    let points = if by_eps {
        let solve_mode = g.mode(mode, eps_list.iter().copied().fold(0.5, f64::min).min(0.49), d)?;
        sweep_accuracy(d, eps_list, inst, solve_mode, g.seed)?
    } else {
        let solve_mode = g.mode(mode, eps, dims.iter().copied().max().unwrap_or(1))?;
        sweep_dimension(dims, eps, inst, solve_mode, g.seed)?
    };
    let x = |p: &ScalingPoint| if by_eps { 1.0 / p.eps } else { p.d as f64 };
    let total: Vec<(f64, f64)> = points.iter().map(|p| (x(p), p.ledger.total_queries as f64)).collect();
    let data: Vec<(f64, f64)> = points.iter().map(|p| (x(p), p.ledger.data_queries as f64)).collect();
    let csv = points_csv(&points, by_eps);
    let result = json!({
        "x": if by_eps { "1/eps" } else { "d" },
        "points": points,
        "fit_total": fit_any(&total)?,
        "fit_data": fit_any(&data)?,
    });
    Ok(Output { result, text: Some(csv), invalid: false })
}

fn distances(ns: &[u64], m_max: u64, ps: &[f64]) -> Result<Output> {
    let rows = audit_grid(ns, m_max, ps)?;
    if rows.is_empty() {
        return Err(invalid("p", "no (N, p) pair has pN integral"));
    }
    let all = rows.iter().all(|r| r.pass_flags.all());
    Ok(Output::json(json!({ "all_pass": all, "rows": rows })))
}

fn validate(csv: &Path) -> Result<Output> {
    let s = load(csv)?;
    let violations = s.validate();
    Ok(Output {
        invalid: !violations.is_empty(),
        result: json!({ "d": s.d(), "n": s.n(), "regime": s.regime(), "valid": violations.is_empty(), "violations": violations }),
        text: None,
    })
}

fn execute(cli: &Cli) -> Result<Output> {
    let g = &cli.global;
    match &cli.command {
        Command::Gen { kind, d, w, p, m, variant, csv } => gen(g, *kind, *d, *w, p, *m, variant, csv),
        Command::SolveLasso { csv, eps, mode, curvature, trace } => {
            solve_lasso(g, csv, *eps, *mode, *curvature, trace.as_deref())
        }
        Command::SolveRidge { csv, eps, max_iter, trace } => solve_ridge(csv, *eps, *max_iter, trace.as_deref()),
        Command::Recover { problem, method, d, eps, w, p, m, seeds, mode, rounds, rows } => {
            recover(g, *problem, *method, *d, *eps, *w, p, *m, *seeds, *mode, *rounds, *rows)
        }
        Command::Scaling { dims, eps, eps_list, d, n, w, p, mode, from_csv, cost, .. } => scaling(
            g,
            dims,
            *eps,
            eps_list,
            *d,
            SweepInstance { n: *n, w: *w, p: *p },
            *mode,
            from_csv.as_deref(),
            cost,
        ),
        Command::Distances { n, m_max, p } => distances(n, *m_max, p),
        Command::Validate { csv } => validate(csv),
    }
}

fn envelope(cli: &Cli, result: Value) -> Result<String> {
    let mut doc = serde_json::Map::new();
    doc.insert("command".into(), json!(cli.command.name()));
    doc.insert("config".into(), to_value(cli)?);
    if !cli.global.no_timestamp {
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        doc.insert("timestamp".into(), json!(secs));
    }
    doc.insert("result".into(), result);
    let mut text = serde_json::to_string_pretty(&Value::Object(doc))?;
    text.push('\n');
    Ok(text)
}

fn emit(cli: &Cli, out: Output) -> Result<()> {
    let g = &cli.global;
    // scaling: CSV on stdout (or --out), JSON to --report
    if let Some(csv) = out.text {
        if let Command::Scaling { report: Some(path), .. } = &cli.command {
            fs::write(path, envelope(cli, out.result)?)?;
        }
        return match &g.out {
            Some(path) => Ok(fs::write(path, csv)?),
            None => Ok(std::io::stdout().write_all(csv.as_bytes())?),
        };
    }
    let text = envelope(cli, out.result)?;
    match &g.out {
        Some(path) => fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn run_parsed(cli: &Cli) -> Result<bool> {
    let work = || -> Result<bool> {
        let out = execute(cli)?;
        let invalid = out.invalid;
        emit(cli, out)?;
        Ok(!invalid)
    };
    match cli.global.jobs {
        Some(0) => Err(invalid("jobs", "must be at least 1")),
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Error::Io(std::io::Error::other(e)))?
            .install(work),
        None => work(),
    }
}

/// Runs the CLI on `args` (including the program name) and returns the exit
/// code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run_parsed(&cli) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("qlb: {e}");
            exit_code(&e)
        }
    }
}
