//! Adaptive and non-adaptive query strategies, the iteration bound, and baselines.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adapters::{AdapterError, IntegralSolution, ProblemAdapter};
use crate::instance::{
    optimistic_vector, pessimistic_vector, Family, PackingInstance, QueryAccess, QueryOracle,
    StochasticObjective,
};

/// Slack allowed when checking monotonicity of LP values along a trace.
pub const TRACE_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Adaptive,
    Nonadaptive,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Adaptive => "adaptive",
            Mode::Nonadaptive => "nonadaptive",
        }
    }

    /// Approximation target as a fraction of the omniscient LP value.
    pub fn target_fraction(self, epsilon: f64) -> f64 {
        match self {
            Mode::Adaptive => 1.0 - epsilon,
            Mode::Nonadaptive => (1.0 - epsilon) / 2.0,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StrategyError {
    #[error("invalid strategy parameter: {0}")]
    Config(String),
    /// `iteration` is 1-based; `T + 1` denotes the final rounding step and 0 the
    /// pre-run size check.
    #[error("adapter failed at iteration {iteration}: {source}")]
    Adapter {
        iteration: usize,
        source: AdapterError,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategyConfig {
    pub mode: Mode,
    pub t: usize,
    pub epsilon: f64,
    pub epsilon_prime: f64,
    pub delta: f64,
    pub strategy_seed: u64,
    pub derandomize_integral: bool,
}

impl StrategyConfig {
    pub fn new(mode: Mode, t: usize, epsilon: f64, delta: f64, strategy_seed: u64) -> Self {
        StrategyConfig {
            mode,
            t,
            epsilon,
            epsilon_prime: epsilon,
            delta,
            strategy_seed,
            derandomize_integral: false,
        }
    }

    pub fn validate(&self) -> Result<(), StrategyError> {
        let open = |v: f64| v > 0.0 && v < 1.0;
        if self.t == 0 {
            return Err(StrategyError::Config("T must be at least 1".into()));
        }
        if !open(self.epsilon) || !open(self.delta) {
            return Err(StrategyError::Config(format!(
                "epsilon {} and delta {} must lie in (0, 1)",
                self.epsilon, self.delta
            )));
        }
        if !(self.epsilon_prime > 0.0 && self.epsilon_prime <= self.epsilon) {
            return Err(StrategyError::Config(format!(
                "epsilon' {} must lie in (0, epsilon]",
                self.epsilon_prime
            )));
        }
        Ok(())
    }
}

/// `T = ceil((delta_c / (epsilon' p)) (log_m + ln(1/delta)))`, at least 1.
pub fn iteration_bound(
    delta_c: f64,
    epsilon_prime: f64,
    p: f64,
    log_m: f64,
    delta: f64,
) -> Result<usize, StrategyError> {
    if !(log_m >= 0.0 && log_m.is_finite()) {
        return Err(StrategyError::Config(format!("logM = {log_m} must be nonnegative")));
    }
    if !(delta_c >= 0.0 && epsilon_prime > 0.0 && p > 0.0 && p <= 1.0 && delta > 0.0 && delta < 1.0) {
        return Err(StrategyError::Config(format!(
            "iteration bound parameters out of range: delta_c={delta_c} epsilon'={epsilon_prime} p={p} delta={delta}"
        )));
    }
    let raw = delta_c / (epsilon_prime * p) * (log_m + (1.0 / delta).ln());
    Ok((raw.ceil() as usize).max(1))
}

/// Per-family `logM` (per unit of the optimum) before the multiplicative constant.
pub fn default_log_m(inst: &PackingInstance, epsilon: f64) -> f64 {
    let n = inst.rows().max(1) as f64;
    let k = || {
        (0..inst.cols())
            .map(|j| inst.column_support(j).len())
            .max()
            .unwrap_or(1) as f64
    };
    match inst.family() {
        Family::BipartiteMatching | Family::Matroid | Family::Generic => (1.0 + n).ln(),
        Family::NonbipartiteMatching => (n / epsilon).ln().max(0.0),
        Family::KHypergraph | Family::KCspip => k() * n.ln() + 1.0 / epsilon,
    }
}

/// Iteration count from the family default: `log_m_constant * default_log_m`, and
/// multiplied by `ceil(w)` for k-cspip.
pub fn family_iteration_bound(
    inst: &PackingInstance,
    obj: &StochasticObjective,
    epsilon: f64,
    epsilon_prime: f64,
    delta: f64,
    log_m_constant: f64,
) -> Result<usize, StrategyError> {
    let log_m = log_m_constant * default_log_m(inst, epsilon);
    let t = iteration_bound(obj.delta_c() as f64, epsilon_prime, obj.p(), log_m, delta)?;
    let scale = if inst.family() == Family::KCspip {
        inst.column_scale().ceil().max(1.0) as usize
    } else {
        1
    };
    Ok(t * scale)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub t: usize,
    pub optimistic_value: f64,
    /// Pessimistic LP value after this round's reveals (constant in non-adaptive mode).
    pub pessimistic_value: f64,
    /// Items queried (adaptive) or supposed (non-adaptive) for the first time this round.
    pub newly_touched: Vec<usize>,
    pub cumulative_touched: usize,
    pub cumulative_queries: u64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunTrace {
    pub iterations: Vec<IterationRecord>,
    /// Smallest optimistic LP value seen.
    pub mu_prime: f64,
}

impl RunTrace {
    pub fn optimistic_non_increasing(&self) -> bool {
        self.iterations
            .windows(2)
            .all(|w| w[1].optimistic_value <= w[0].optimistic_value + TRACE_TOL)
    }

    pub fn pessimistic_non_decreasing(&self) -> bool {
        self.iterations
            .windows(2)
            .all(|w| w[1].pessimistic_value + TRACE_TOL >= w[0].pessimistic_value)
    }
}

/// What a strategy exposes to observers each round.
#[derive(Debug)]
pub struct IterationView<'a> {
    pub t: usize,
    pub x: &'a [f64],
    pub optimistic: &'a [u64],
    pub pessimistic: &'a [u64],
    /// Items revealed (adaptive) or supposed (non-adaptive) so far.
    pub touched: &'a [bool],
}

pub trait StrategyObserver {
    fn on_iteration(&mut self, view: &IterationView<'_>);
    /// Called once after the final reveal, before rounding.
    fn on_final(&mut self, _view: &IterationView<'_>) {}
}

/// Observer that ignores everything.
pub struct NoObserver;

impl StrategyObserver for NoObserver {
    fn on_iteration(&mut self, _view: &IterationView<'_>) {}
}

/// Strategy output before scoring against nature.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyOutcome {
    pub solution: IntegralSolution,
    pub pessimistic_lp: f64,
    pub trace: RunTrace,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub x_hat: Vec<bool>,
    /// Value of `x_hat` under the realization.
    pub value: u64,
    pub pessimistic_lp: f64,
    pub omniscient_lp: f64,
    pub omniscient_ip: u64,
    pub ratio_vs_omniscient_lp: f64,
    pub ratio_vs_omniscient_ip: f64,
    pub queries_total: u64,
    pub queries_per_row: Vec<u64>,
    pub trace: RunTrace,
}

impl RunResult {
    pub fn queries_per_row_max(&self) -> u64 {
        self.queries_per_row.iter().copied().max().unwrap_or(0)
    }
}

fn adapter_err(iteration: usize) -> impl Fn(AdapterError) -> StrategyError {
    move |source| StrategyError::Adapter { iteration, source }
}

/// Runs the configured mode against any query gateway.
pub fn run_strategy<Q: QueryAccess>(
    oracle: &mut Q,
    obj: &StochasticObjective,
    adapter: &dyn ProblemAdapter,
    config: &StrategyConfig,
    observer: &mut dyn StrategyObserver,
) -> Result<StrategyOutcome, StrategyError> {
    config.validate()?;
    adapter.check_size().map_err(adapter_err(0))?;
    match config.mode {
        Mode::Adaptive => adaptive(oracle, obj, adapter, config, observer),
        Mode::Nonadaptive => nonadaptive(oracle, obj, adapter, config, observer),
    }
}

fn coin_flip(
    rng: &mut ChaCha8Rng,
    x: f64,
    w: f64,
    integral: bool,
    config: &StrategyConfig,
) -> bool {
    // one draw per item per round keeps the stream aligned across settings
    let u: f64 = rng.gen();
    if config.derandomize_integral && integral {
        x > 0.5
    } else {
        u < x / w
    }
}

fn adaptive<Q: QueryAccess>(
    oracle: &mut Q,
    obj: &StochasticObjective,
    adapter: &dyn ProblemAdapter,
    config: &StrategyConfig,
    observer: &mut dyn StrategyObserver,
) -> Result<StrategyOutcome, StrategyError> {
    let m = oracle.items();
    let w = adapter.scale_w();
    let mut rng = ChaCha8Rng::seed_from_u64(config.strategy_seed);
    let mut touched = vec![false; m];
    for (j, flag) in touched.iter_mut().enumerate() {
        *flag = oracle.revealed_value(j).is_some();
    }
    let mut trace = RunTrace {
        iterations: Vec::with_capacity(config.t),
        mu_prime: f64::INFINITY,
    };
    let mut queries = 0u64;
    for t in 1..=config.t {
        let optimistic = optimistic_vector(oracle, obj);
        let sol = adapter.solve_relaxation(&optimistic).map_err(adapter_err(t))?;
        let integral = sol.is_integral();
        let mut newly = Vec::new();
        for j in 0..m {
            if coin_flip(&mut rng, sol.x[j], w, integral, config) {
                oracle.query(j);
                if !touched[j] {
                    touched[j] = true;
                    queries += 1;
                    newly.push(j);
                }
            }
        }
        let pessimistic = pessimistic_vector(oracle, obj);
        let pess = adapter.solve_relaxation(&pessimistic).map_err(adapter_err(t))?;
        observer.on_iteration(&IterationView {
            t,
            x: &sol.x,
            optimistic: &optimistic,
            pessimistic: &pessimistic,
            touched: &touched,
        });
        trace.mu_prime = trace.mu_prime.min(sol.value);
        trace.iterations.push(IterationRecord {
            t,
            optimistic_value: sol.value,
            pessimistic_value: pess.value,
            newly_touched: newly,
            cumulative_touched: touched.iter().filter(|&&b| b).count(),
            cumulative_queries: queries,
        });
    }
    let pessimistic = pessimistic_vector(oracle, obj);
    let optimistic = optimistic_vector(oracle, obj);
    observer.on_final(&IterationView {
        t: config.t + 1,
        x: &[],
        optimistic: &optimistic,
        pessimistic: &pessimistic,
        touched: &touched,
    });
    finish(adapter, &pessimistic, trace, config.t + 1)
}

fn nonadaptive<Q: QueryAccess>(
    oracle: &mut Q,
    obj: &StochasticObjective,
    adapter: &dyn ProblemAdapter,
    config: &StrategyConfig,
    observer: &mut dyn StrategyObserver,
) -> Result<StrategyOutcome, StrategyError> {
    let m = oracle.items();
    let w = adapter.scale_w();
    let mut rng = ChaCha8Rng::seed_from_u64(config.strategy_seed);
    let mut supposed = vec![false; m];
    let mut trace = RunTrace {
        iterations: Vec::with_capacity(config.t),
        mu_prime: f64::INFINITY,
    };
    // nothing is revealed before the batch, so the pessimistic side is fixed
    let pessimistic = pessimistic_vector(oracle, obj);
    let pess_value = adapter
        .solve_relaxation(&pessimistic)
        .map_err(adapter_err(1))?
        .value;
    let base = optimistic_vector(oracle, obj);
    for t in 1..=config.t {
        let optimistic: Vec<u64> = (0..m)
            .map(|j| {
                if supposed[j] && oracle.revealed_value(j).is_none() {
                    obj.c_minus()[j]
                } else {
                    base[j]
                }
            })
            .collect();
        let sol = adapter.solve_relaxation(&optimistic).map_err(adapter_err(t))?;
        let integral = sol.is_integral();
        let mut newly = Vec::new();
        for j in 0..m {
            if coin_flip(&mut rng, sol.x[j], w, integral, config) && !supposed[j] {
                supposed[j] = true;
                newly.push(j);
            }
        }
        observer.on_iteration(&IterationView {
            t,
            x: &sol.x,
            optimistic: &optimistic,
            pessimistic: &pessimistic,
            touched: &supposed,
        });
        trace.mu_prime = trace.mu_prime.min(sol.value);
        trace.iterations.push(IterationRecord {
            t,
            optimistic_value: sol.value,
            pessimistic_value: pess_value,
            newly_touched: newly,
            cumulative_touched: supposed.iter().filter(|&&b| b).count(),
            cumulative_queries: 0,
        });
    }
    for j in (0..m).filter(|&j| supposed[j]) {
        oracle.query(j);
    }
    let pessimistic = pessimistic_vector(oracle, obj);
    let optimistic = optimistic_vector(oracle, obj);
    observer.on_final(&IterationView {
        t: config.t + 1,
        x: &[],
        optimistic: &optimistic,
        pessimistic: &pessimistic,
        touched: &supposed,
    });
    finish(adapter, &pessimistic, trace, config.t + 1)
}

fn finish(
    adapter: &dyn ProblemAdapter,
    pessimistic: &[u64],
    trace: RunTrace,
    iteration: usize,
) -> Result<StrategyOutcome, StrategyError> {
    let pessimistic_lp = adapter
        .solve_relaxation(pessimistic)
        .map_err(adapter_err(iteration))?
        .value;
    let solution = adapter.round_integral(pessimistic).map_err(adapter_err(iteration))?;
    Ok(StrategyOutcome {
        solution,
        pessimistic_lp,
        trace,
    })
}

fn ratio(value: f64, reference: f64) -> f64 {
    if reference <= 0.0 {
        1.0
    } else {
        value / reference
    }
}

/// Scores an outcome against the realization held by `oracle`.
pub fn score(
    inst: &PackingInstance,
    oracle: &QueryOracle,
    adapter: &dyn ProblemAdapter,
    outcome: StrategyOutcome,
    iteration: usize,
) -> Result<RunResult, StrategyError> {
    let c = &oracle.realization().c;
    debug_assert!(inst.is_feasible(&outcome.solution.x));
    let value = outcome.solution.value_under(c);
    let omniscient_lp = adapter
        .solve_relaxation(c)
        .map_err(adapter_err(iteration))?
        .value;
    let omniscient_ip = adapter.omniscient_ip(c).map_err(adapter_err(iteration))?;
    Ok(RunResult {
        value,
        pessimistic_lp: outcome.pessimistic_lp,
        omniscient_lp,
        omniscient_ip,
        ratio_vs_omniscient_lp: ratio(value as f64, omniscient_lp),
        ratio_vs_omniscient_ip: ratio(value as f64, omniscient_ip as f64),
        queries_total: oracle.ledger().total,
        queries_per_row: oracle.ledger().per_row.clone(),
        x_hat: outcome.solution.x,
        trace: outcome.trace,
    })
}

/// Adaptive: query with probability `x_j` (or `x_j / w`) each round, then round
/// the pessimistic problem.
pub fn run_adaptive(
    inst: &PackingInstance,
    obj: &StochasticObjective,
    oracle: &mut QueryOracle,
    adapter: &dyn ProblemAdapter,
    config: &StrategyConfig,
) -> Result<RunResult, StrategyError> {
    run_observed(inst, obj, oracle, adapter, &StrategyConfig { mode: Mode::Adaptive, ..config.clone() }, &mut NoObserver)
}

/// Non-adaptive: suppose `c_j = c_minus_j` with probability `x_j` each round, reveal
/// the supposed set at the end, then round.
pub fn run_nonadaptive(
    inst: &PackingInstance,
    obj: &StochasticObjective,
    oracle: &mut QueryOracle,
    adapter: &dyn ProblemAdapter,
    config: &StrategyConfig,
) -> Result<RunResult, StrategyError> {
    run_observed(inst, obj, oracle, adapter, &StrategyConfig { mode: Mode::Nonadaptive, ..config.clone() }, &mut NoObserver)
}

/// Runs `config.mode` with an observer attached and scores the result.
pub fn run_observed(
    inst: &PackingInstance,
    obj: &StochasticObjective,
    oracle: &mut QueryOracle,
    adapter: &dyn ProblemAdapter,
    config: &StrategyConfig,
    observer: &mut dyn StrategyObserver,
) -> Result<RunResult, StrategyError> {
    let outcome = run_strategy(oracle, obj, adapter, config, observer)?;
    score(inst, oracle, adapter, outcome, config.t + 1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Baseline {
    /// Queries everything and solves exactly.
    Omniscient,
    /// Queries nothing and rounds the pure `c_minus` problem.
    Blind,
    /// Reveals each item independently so that the expected number of reveals is
    /// `budget`.
    UniformRandom { budget: f64, seed: u64 },
}

pub fn run_baseline(
    inst: &PackingInstance,
    obj: &StochasticObjective,
    oracle: &mut QueryOracle,
    adapter: &dyn ProblemAdapter,
    kind: Baseline,
) -> Result<RunResult, StrategyError> {
    adapter.check_size().map_err(adapter_err(0))?;
    let m = inst.cols();
    match kind {
        Baseline::Omniscient => {
            for j in 0..m {
                oracle.query(j);
            }
        }
        Baseline::Blind => {}
        Baseline::UniformRandom { budget, seed } => {
            let q = if m == 0 { 0.0 } else { (budget / m as f64).clamp(0.0, 1.0) };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for j in 0..m {
                if rng.gen::<f64>() < q {
                    oracle.query(j);
                }
            }
        }
    }
    let pessimistic = pessimistic_vector(oracle, obj);
    let outcome = finish(adapter, &pessimistic, RunTrace::default(), 1)?;
    score(inst, oracle, adapter, outcome, 1)
}
