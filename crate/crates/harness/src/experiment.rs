//! Experiment specs, the Monte Carlo runner and CSV/summary output.
//!
//! Seeds: instance `i` of spec `name` has id `{name}-{i:04}` (or the file's id for an
//! explicit single instance). Its structure comes from `child_seed(master, id, 0,
//! instance)` and its objective intervals from `child_seed(master, id, 0, objective)`.
//! Trial `t` draws nature from `child_seed(master, id, t, nature)` and strategy coins
//! from `child_seed(master, id, t, strategy)`, shared by every grid point.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use spip_core::adapters::{make_adapter, ProblemAdapter};
use spip_core::instance::{
    sample_realization_with, PackingInstance, QueryOracle, Realization, StochasticObjective, TwoPoint,
    UpperAtomUniformRest,
};
use spip_core::strategies::{
    family_iteration_bound, run_observed, Mode, NoObserver, StrategyConfig, StrategyObserver,
};

use crate::generate::{generate, Distribution, GeneratorSpec, ObjectiveSpec};
use crate::seeds::{child_seed, Stream};
use crate::HarnessError;

pub const SCHEMA_VERSION: u32 = 1;
/// Environment variable holding the worker count (0 or unset: one per core).
pub const WORKERS_ENV: &str = "SPIP_WORKERS";
const SUCCESS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSource {
    pub generator: GeneratorSpec,
    #[serde(default = "one")]
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyGrid {
    pub modes: Vec<Mode>,
    pub epsilon: Vec<f64>,
    pub delta: Vec<f64>,
    /// Explicit iteration counts; empty means the family iteration bound.
    #[serde(default)]
    pub t: Vec<usize>,
    #[serde(default = "one_f64")]
    pub log_m_constant: f64,
    /// `epsilon' = epsilon_prime_factor * epsilon`.
    #[serde(default = "one_f64")]
    pub epsilon_prime_factor: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub csv: Option<PathBuf>,
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    pub master_seed: u64,
    pub trials: usize,
    pub instances: InstanceSource,
    /// Required unless the instance file carries its own objective.
    #[serde(default)]
    pub objective: Option<ObjectiveSpec>,
    pub strategy: StrategyGrid,
    #[serde(default)]
    pub output: OutputSpec,
}

fn one() -> usize {
    1
}

fn one_f64() -> f64 {
    1.0
}

impl ExperimentSpec {
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let spec: ExperimentSpec = toml::from_str(text).map_err(|e| HarnessError::Parse(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    /// Reads a spec; relative instance and output paths are resolved against the
    /// spec's directory.
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = fs::read_to_string(path).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
        let mut spec = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let GeneratorSpec::Explicit { path } = &mut spec.instances.generator {
            resolve(path);
        }
        spec.output.csv.as_mut().map(resolve);
        spec.output.summary.as_mut().map(resolve);
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Invalid(m));
        let open = |v: f64| v > 0.0 && v < 1.0;
        let g = &self.strategy;
        if self.trials == 0 || self.instances.count == 0 {
            return bad("trials and instance count must be at least 1".into());
        }
        if g.modes.is_empty() || g.epsilon.is_empty() || g.delta.is_empty() {
            return bad("strategy grids must be non-empty".into());
        }
        if g.t.contains(&0) {
            return bad("T = 0 is not allowed; the minimum is 1".into());
        }
        if let Some(v) = g.epsilon.iter().chain(&g.delta).find(|&&v| !open(v)) {
            return bad(format!("epsilon and delta must lie in (0, 1), got {v}"));
        }
        if !(g.log_m_constant >= 0.0 && g.log_m_constant.is_finite()) {
            return bad(format!("log_m_constant = {} must be finite and nonnegative", g.log_m_constant));
        }
        if !(g.epsilon_prime_factor > 0.0 && g.epsilon_prime_factor <= 1.0) {
            return bad(format!("epsilon_prime_factor = {} must lie in (0, 1]", g.epsilon_prime_factor));
        }
        if matches!(self.instances.generator, GeneratorSpec::Explicit { .. }) && self.instances.count != 1 {
            return bad("an explicit instance file gives exactly one instance".into());
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<GridPoint> {
        let g = &self.strategy;
        let ts: Vec<Option<usize>> = if g.t.is_empty() { vec![None] } else { g.t.iter().copied().map(Some).collect() };
        let mut out = Vec::new();
        for &mode in &g.modes {
            for &epsilon in &g.epsilon {
                for &delta in &g.delta {
                    for &t in &ts {
                        out.push(GridPoint {
                            index: out.len(),
                            mode,
                            epsilon,
                            epsilon_prime: epsilon * g.epsilon_prime_factor,
                            delta,
                            t,
                            log_m_constant: g.log_m_constant,
                        });
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub index: usize,
    pub mode: Mode,
    pub epsilon: f64,
    pub epsilon_prime: f64,
    pub delta: f64,
    /// `None`: use the family iteration bound.
    pub t: Option<usize>,
    pub log_m_constant: f64,
}

impl GridPoint {
    pub fn resolve_t(&self, inst: &PackingInstance, obj: &StochasticObjective) -> Result<usize, HarnessError> {
        match self.t {
            Some(t) => Ok(t),
            None => Ok(family_iteration_bound(
                inst,
                obj,
                self.epsilon,
                self.epsilon_prime,
                self.delta,
                self.log_m_constant,
            )?),
        }
    }

    pub fn config(&self, t: usize, strategy_seed: u64) -> StrategyConfig {
        StrategyConfig {
            epsilon_prime: self.epsilon_prime,
            ..StrategyConfig::new(self.mode, t, self.epsilon, self.delta, strategy_seed)
        }
    }
}

pub struct PreparedInstance {
    pub index: usize,
    pub id: String,
    pub instance: PackingInstance,
    pub objective: StochasticObjective,
    pub distribution: Distribution,
    pub adapter: Result<Box<dyn ProblemAdapter>, String>,
}

impl PreparedInstance {
    pub fn realization(&self, nature_seed: u64) -> Realization {
        match self.distribution {
            Distribution::TwoPoint => sample_realization_with(&self.objective, nature_seed, &TwoPoint),
            Distribution::UpperAtomUniformRest => {
                sample_realization_with(&self.objective, nature_seed, &UpperAtomUniformRest)
            }
        }
    }
}

/// Builds every instance of the spec, in index order.
pub fn prepare(spec: &ExperimentSpec) -> Result<Vec<PreparedInstance>, HarnessError> {
    (0..spec.instances.count)
        .map(|index| {
            let mut id = format!("{}-{index:04}", spec.name);
            let generated = generate(&spec.instances.generator, child_seed(spec.master_seed, &id, 0, Stream::Instance))?;
            if let GeneratorSpec::Explicit { path } = &spec.instances.generator {
                id = crate::io::read_instance(path)?.id;
            }
            let m = generated.instance.cols();
            let objective = match (&spec.objective, generated.objective) {
                (Some(o), _) => o.build(m, child_seed(spec.master_seed, &id, 0, Stream::Objective))?,
                (None, Some(o)) => o,
                (None, None) => {
                    return Err(HarnessError::Invalid(format!(
                        "instance {id} has no objective and the spec gives none"
                    )))
                }
            };
            let adapter = make_adapter(&generated.instance)
                .and_then(|a| a.check_size().map(|_| a))
                .map_err(|e| e.to_string());
            Ok(PreparedInstance {
                index,
                id,
                instance: generated.instance,
                objective,
                distribution: spec.objective.as_ref().map(|o| o.distribution).unwrap_or_default(),
                adapter,
            })
        })
        .collect()
}

/// One CSV row per (instance, grid point, trial).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub schema_version: u32,
    pub instance_id: String,
    pub family: String,
    pub mode: String,
    pub epsilon: f64,
    pub epsilon_prime: f64,
    pub delta: f64,
    pub p: f64,
    pub t: usize,
    pub trial: u64,
    pub nature_seed: u64,
    pub strategy_seed: u64,
    pub queries_total: u64,
    pub queries_per_row_max: u64,
    pub value: u64,
    pub pessimistic_lp: f64,
    pub omniscient_lp: f64,
    pub omniscient_ip: u64,
    pub ratio_lp: f64,
    pub ratio_ip: f64,
    /// `value >= target * omniscient_lp`, target `1 - eps` (adaptive) or
    /// `(1 - eps) / 2` (non-adaptive).
    pub success: bool,
    /// Same threshold applied to the pessimistic LP value.
    pub lp_success: bool,
    /// Empty unless the trial failed.
    pub error: String,
}

pub const CSV_HEADER: [&str; 23] = [
    "schema_version",
    "instance_id",
    "family",
    "mode",
    "epsilon",
    "epsilon_prime",
    "delta",
    "p",
    "t",
    "trial",
    "nature_seed",
    "strategy_seed",
    "queries_total",
    "queries_per_row_max",
    "value",
    "pessimistic_lp",
    "omniscient_lp",
    "omniscient_ip",
    "ratio_lp",
    "ratio_ip",
    "success",
    "lp_success",
    "error",
];

/// Runs one trial with an observer attached. Failures become rows with `error` set.
pub fn run_trial(
    master_seed: u64,
    prep: &PreparedInstance,
    point: &GridPoint,
    trial: u64,
    observer: &mut dyn StrategyObserver,
) -> MetricsRow {
    let nature_seed = child_seed(master_seed, &prep.id, trial, Stream::Nature);
    let strategy_seed = child_seed(master_seed, &prep.id, trial, Stream::Strategy);
    let mut row = MetricsRow {
        schema_version: SCHEMA_VERSION,
        instance_id: prep.id.clone(),
        family: prep.instance.family().to_string(),
        mode: point.mode.as_str().to_string(),
        epsilon: point.epsilon,
        epsilon_prime: point.epsilon_prime,
        delta: point.delta,
        p: prep.objective.p(),
        t: point.t.unwrap_or(0),
        trial,
        nature_seed,
        strategy_seed,
        queries_total: 0,
        queries_per_row_max: 0,
        value: 0,
        pessimistic_lp: 0.0,
        omniscient_lp: 0.0,
        omniscient_ip: 0,
        ratio_lp: 0.0,
        ratio_ip: 0.0,
        success: false,
        lp_success: false,
        error: String::new(),
    };
    let outcome = (|| -> Result<_, HarnessError> {
        let adapter = prep.adapter.as_ref().map_err(|e| HarnessError::Compute(e.clone()))?;
        let t = point.resolve_t(&prep.instance, &prep.objective)?;
        let mut oracle = QueryOracle::new(&prep.instance, prep.realization(nature_seed));
        let config = point.config(t, strategy_seed);
        let result = run_observed(&prep.instance, &prep.objective, &mut oracle, adapter.as_ref(), &config, observer)?;
        Ok((t, result))
    })();
    match outcome {
        Ok((t, r)) => {
            let target = point.mode.target_fraction(point.epsilon) * r.omniscient_lp - SUCCESS_TOL;
            row.t = t;
            row.queries_total = r.queries_total;
            row.queries_per_row_max = r.queries_per_row_max();
            row.value = r.value;
            row.pessimistic_lp = r.pessimistic_lp;
            row.omniscient_lp = r.omniscient_lp;
            row.omniscient_ip = r.omniscient_ip;
            row.ratio_lp = r.ratio_vs_omniscient_lp;
            row.ratio_ip = r.ratio_vs_omniscient_ip;
            row.success = r.value as f64 >= target;
            row.lp_success = r.pessimistic_lp >= target;
        }
        Err(e) => row.error = e.to_string(),
    }
    row
}

pub fn workers_from_env() -> usize {
    std::env::var(WORKERS_ENV).ok().and_then(|v| v.trim().parse().ok()).unwrap_or(0)
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub rows: Vec<MetricsRow>,
    pub summary: Vec<SummaryRow>,
}

/// Runs every (instance, grid point, trial) on a pool of `workers` threads (0: one
/// per core). Rows come back sorted by (instance, grid point, trial).
pub fn run_experiment(spec: &ExperimentSpec, workers: usize) -> Result<ExperimentOutput, HarnessError> {
    spec.validate()?;
    let prepared = prepare(spec)?;
    let grid = spec.grid();
    let tasks: Vec<(usize, usize, u64)> = (0..prepared.len())
        .flat_map(|i| (0..grid.len()).flat_map(move |g| (0..spec.trials as u64).map(move |t| (i, g, t))))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| HarnessError::Compute(e.to_string()))?;
    let mut keyed: Vec<((usize, usize, u64), MetricsRow)> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(i, g, t)| ((i, g, t), run_trial(spec.master_seed, &prepared[i], &grid[g], t, &mut NoObserver)))
            .collect()
    });
    keyed.sort_by_key(|(k, _)| *k);
    let grid_of: Vec<usize> = keyed.iter().map(|((_, g, _), _)| *g).collect();
    let rows: Vec<MetricsRow> = keyed.into_iter().map(|(_, r)| r).collect();
    let summary = summarize(&grid, &rows, &grid_of);
    Ok(ExperimentOutput { rows, summary })
}

pub fn rows_to_csv(rows: &[MetricsRow]) -> String {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for r in rows {
        w.serialize(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

pub fn rows_from_csv(text: &str) -> Result<Vec<MetricsRow>, HarnessError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.deserialize().collect::<Result<_, _>>().map_err(|e| HarnessError::Parse(e.to_string()))
}

/// Wilson score interval at 95%.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054;
    let n = trials as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let center = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Aggregates per grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub mode: String,
    pub epsilon: f64,
    pub epsilon_prime: f64,
    pub delta: f64,
    /// Fixed T, or 0 when T came from the family bound.
    pub t_fixed: usize,
    pub mean_t: f64,
    pub trials: u64,
    pub errors: u64,
    pub successes: u64,
    pub success_rate: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
    pub lp_successes: u64,
    pub lp_success_rate: f64,
    pub mean_ratio_lp: f64,
    pub mean_queries_total: f64,
    pub mean_queries_per_row_max: f64,
}

fn summarize(grid: &[GridPoint], rows: &[MetricsRow], grid_of: &[usize]) -> Vec<SummaryRow> {
    grid.iter()
        .map(|point| {
            let ok: Vec<&MetricsRow> = rows
                .iter()
                .zip(grid_of)
                .filter(|(r, &g)| g == point.index && r.error.is_empty())
                .map(|(r, _)| r)
                .collect();
            let all = grid_of.iter().filter(|&&g| g == point.index).count() as u64;
            let n = ok.len() as u64;
            let mean = |f: &dyn Fn(&MetricsRow) -> f64| {
                if n == 0 {
                    0.0
                } else {
                    ok.iter().map(|r| f(r)).sum::<f64>() / n as f64
                }
            };
            let successes = ok.iter().filter(|r| r.success).count() as u64;
            let lp_successes = ok.iter().filter(|r| r.lp_success).count() as u64;
            let (wilson_low, wilson_high) = wilson_interval(successes, n);
            SummaryRow {
                mode: point.mode.as_str().to_string(),
                epsilon: point.epsilon,
                epsilon_prime: point.epsilon_prime,
                delta: point.delta,
                t_fixed: point.t.unwrap_or(0),
                mean_t: mean(&|r| r.t as f64),
                trials: n,
                errors: all - n,
                successes,
                success_rate: if n == 0 { 0.0 } else { successes as f64 / n as f64 },
                wilson_low,
                wilson_high,
                lp_successes,
                lp_success_rate: if n == 0 { 0.0 } else { lp_successes as f64 / n as f64 },
                mean_ratio_lp: mean(&|r| r.ratio_lp),
                mean_queries_total: mean(&|r| r.queries_total as f64),
                mean_queries_per_row_max: mean(&|r| r.queries_per_row_max as f64),
            }
        })
        .collect()
}

/// One row per grid point; used by `sweep` for success and ratio curves against T.
pub fn summary_to_csv(summary: &[SummaryRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for s in summary {
        w.serialize(s).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

/// Human-readable summary (TOML).
pub fn summary_text(spec: &ExperimentSpec, out: &ExperimentOutput) -> String {
    #[derive(Serialize)]
    struct Text<'a> {
        name: &'a str,
        master_seed: u64,
        schema_version: u32,
        rows: usize,
        grid: &'a [SummaryRow],
    }
    toml::to_string(&Text {
        name: &spec.name,
        master_seed: spec.master_seed,
        schema_version: SCHEMA_VERSION,
        rows: out.rows.len(),
        grid: &out.summary,
    })
    .expect("summary serializes")
}

/// Runs a spec whose strategy grid lists explicit T values.
pub fn sweep_t(spec: &ExperimentSpec, workers: usize) -> Result<ExperimentOutput, HarnessError> {
    if spec.strategy.t.is_empty() {
        return Err(HarnessError::Invalid("sweep needs a non-empty strategy.t grid".into()));
    }
    run_experiment(spec, workers)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const SPEC: &str = r#"
name = "tiny"
master_seed = 11
trials = 3

[instances]
count = 2
[instances.generator]
kind = "bipartite"
left = 3
right = 3
edge_prob = 0.6

[objective]
c_minus = 0
c_plus_min = 1
c_plus_max = 2
p = 0.5

[strategy]
modes = ["adaptive", "nonadaptive"]
epsilon = [0.2]
delta = [0.2]
t = [1, 4]
"#;

    #[test]
    fn header_matches_serde_field_order() {
        let spec = ExperimentSpec::parse(SPEC).unwrap();
        let out = run_experiment(&spec, 1).unwrap();
        let mut w = csv::Writer::from_writer(Vec::new());
        w.serialize(&out.rows[0]).unwrap();
        let text = String::from_utf8(w.into_inner().unwrap()).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER.join(","));
        assert_eq!(rows_to_csv(&[]).trim_end(), CSV_HEADER.join(","));
    }

    #[test]
    fn rows_are_sorted_and_complete() {
        let spec = ExperimentSpec::parse(SPEC).unwrap();
        let out = run_experiment(&spec, 2).unwrap();
        assert_eq!(out.rows.len(), 2 * 4 * 3);
        assert_eq!(out.rows[0].instance_id, "tiny-0000");
        assert_eq!(out.rows.last().unwrap().instance_id, "tiny-0001");
        assert!(out.rows.iter().all(|r| r.error.is_empty()));
        let back = rows_from_csv(&rows_to_csv(&out.rows)).unwrap();
        assert_eq!(back, out.rows);
        assert_eq!(out.summary.len(), 4);
        assert_eq!(out.summary[0].trials, 6);
    }

    #[test]
    fn spec_validation() {
        assert!(ExperimentSpec::parse(&SPEC.replace("t = [1, 4]", "t = [0, 4]")).is_err());
        assert!(ExperimentSpec::parse(&SPEC.replace("trials = 3", "trials = 0")).is_err());
        assert!(ExperimentSpec::parse(&SPEC.replace("epsilon = [0.2]", "epsilon = []")).is_err());
        assert!(ExperimentSpec::parse(&SPEC.replace("delta = [0.2]", "delta = [0.2]\nbogus = 1")).is_err());
    }

    #[test]
    fn wilson_examples() {
        let (lo, hi) = wilson_interval(80, 100);
        assert!((lo - 0.7112).abs() < 1e-3 && (hi - 0.8666).abs() < 1e-3);
        assert_eq!(wilson_interval(0, 0), (0.0, 1.0));
        let (lo, hi) = wilson_interval(10, 10);
        assert!(hi > 1.0 - 1e-12 && (lo - 0.7225).abs() < 1e-3);
    }

    #[test]
    fn failures_become_error_rows() {
        // 30 hyperedges exceed the explicit adapter's brute-force limit
        let text = SPEC
            .replace("kind = \"bipartite\"\nleft = 3\nright = 3\nedge_prob = 0.6", "kind = \"k-hypergraph\"\nvertices = 12\nedges = 30\nk = 3");
        let spec = ExperimentSpec::parse(&text).unwrap();
        let out = run_experiment(&spec, 1).unwrap();
        assert!(out.rows.iter().all(|r| !r.error.is_empty()));
        assert_eq!(out.summary[0].errors, 6);
    }
}
