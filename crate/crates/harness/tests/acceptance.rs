//! Acceptance suite: one pass/fail line per criterion. Exits nonzero if any fails.

use std::path::Path;
use std::time::{Duration, Instant};

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spip_core::adapters::blossom::max_weight_matching_dp;
use spip_core::adapters::matroid::greedy;
use spip_core::adapters::{brute, make_adapter, BlossomAdapter, MatroidDescription, ProblemAdapter};
use spip_core::instance::{sample_realization, FamilyMeta, PackingInstance, StochasticObjective};
use spip_core::lp::{check_duality, solve_dual, solve_primal, LpProblem, Rational};
use spip_core::sparsifier::{falling_factorial_lower_bound, sparsify, ColoringConfig, Hypergraph};
use spip_core::strategies::{Mode, StrategyConfig};
use spip_core::witness::{
    count_unit_weight, enumerate_iterative, enumerate_recursive, enumerate_tdi_cover, rational, rational_from_f64,
    sample_tdi_members, survival_bound, witness_dynamics, SurvivalTable,
};
use spip_harness::experiment::{prepare, rows_to_csv, run_experiment, ExperimentOutput, ExperimentSpec};
use spip_harness::generate::{corpus, generate, GeneratorSpec};
use spip_harness::seeds::{child_seed, Stream};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn spec_path(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../specs").join(name)
}

fn duality_suite() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst_float = 0.0f64;
    for i in 0..200u64 {
        let rows = rng.gen_range(1..=20);
        let cols = rng.gen_range(1..=20);
        let spec = GeneratorSpec::RandomPacking { rows, cols, max_capacity: 4, density: 0.25 };
        let inst = generate(&spec, i).unwrap().instance;
        let w: Vec<u64> = (0..cols).map(|_| rng.gen_range(0..10)).collect();
        let prob = LpProblem::from_instance(&inst, &w).unwrap();
        let (p, d) = (solve_primal::<Rational>(&prob).unwrap(), solve_dual::<Rational>(&prob).unwrap());
        if !(p.value.clone() - d.value.clone()).is_zero() || !check_duality(&prob, &p, &d, 0.0).passed() {
            return verdict(false, format!("rational mode failed on instance {i}"));
        }
        let (p, d) = (solve_primal::<f64>(&prob).unwrap(), solve_dual::<f64>(&prob).unwrap());
        let report = check_duality(&prob, &p, &d, 1e-6);
        worst_float = worst_float.max(report.gap);
        if !report.passed() {
            return verdict(false, format!("float mode failed on instance {i}: {:?}", report.worst()));
        }
    }
    verdict(true, format!("200 instances, rational gap 0, max float gap {worst_float:.1e}"))
}

fn integrality_suite() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for i in 0..100u64 {
        let (left, right) = (rng.gen_range(1..=10), rng.gen_range(1..=10));
        let inst = generate(&GeneratorSpec::Bipartite { left, right, edge_prob: 0.35 }, i).unwrap().instance;
        let FamilyMeta::Bipartite { edges, .. } = inst.meta() else { unreachable!() };
        let w: Vec<u64> = (0..inst.cols()).map(|_| rng.gen_range(0..10)).collect();
        let lp = solve_primal::<Rational>(&LpProblem::from_instance(&inst, &w).unwrap()).unwrap();
        let best: u64 = max_weight_matching_dp(left + right, edges, &w).iter().map(|&j| w[j]).sum();
        let lp_value = lp.to_f64().value;
        if !lp.is_vertex || !lp.is_integral() || lp_value != best as f64 {
            return verdict(false, format!("instance {i}: LP {lp_value} vs matching {best}"));
        }
    }
    verdict(true, "100 instances, basic optimum 0/1 and equal to the exhaustive matching")
}

fn rate(out: &ExperimentOutput, mode: &str, lp: bool) -> (f64, usize) {
    let rows: Vec<_> = out.rows.iter().filter(|r| r.mode == mode && r.error.is_empty()).collect();
    let ok = rows.iter().filter(|r| if lp { r.lp_success } else { r.success }).count();
    (ok as f64 / rows.len().max(1) as f64, rows.len())
}

/// Replays every trial of the guarantee spec with witness tracking on sampled
/// integer duals of the realized omniscient value.
fn replay_traced(spec: &ExperimentSpec, out: &ExperimentOutput) -> (usize, usize, usize) {
    let prepared = prepare(spec).unwrap();
    let grid = spec.grid();
    let (mut runs, mut violations, mut mismatches) = (0, 0, 0);
    let mut row = out.rows.iter();
    for prep in &prepared {
        let adapter = prep.adapter.as_ref().unwrap();
        for point in &grid {
            for trial in 0..spec.trials as u64 {
                let expected = row.next().unwrap();
                let t = point.resolve_t(&prep.instance, &prep.objective).unwrap();
                let strategy_seed = child_seed(spec.master_seed, &prep.id, trial, Stream::Strategy);
                let nature_seed = child_seed(spec.master_seed, &prep.id, trial, Stream::Nature);
                let mut rng = ChaCha8Rng::seed_from_u64(nature_seed ^ 0xa11ce);
                let run = witness_dynamics(
                    &prep.instance,
                    &prep.objective,
                    prep.realization(nature_seed),
                    adapter.as_ref(),
                    &point.config(t, strategy_seed),
                    |mu| {
                        let cap = ((1.0 - point.epsilon) * mu + 1e-9).floor() as u64;
                        sample_tdi_members(prep.instance.capacities(), cap, 64, &mut rng)
                    },
                )
                .unwrap();
                runs += 1;
                violations += run.tracker.monotonicity_violations();
                mismatches += usize::from(run.result.value != expected.value || expected.instance_id != prep.id);
            }
        }
    }
    (runs, violations, mismatches)
}

struct WitnessOutcome {
    verdict: Verdict,
    runs: usize,
    violations: usize,
}

fn witness_bound() -> WitnessOutcome {
    const SEEDS: u64 = 10_000;
    const T: usize = 8;
    let eps = 0.25;
    let single = PackingInstance::generic(vec![vec![1]], vec![1]).unwrap();
    let k22 = PackingInstance::bipartite(2, 2, vec![(0, 2), (0, 3), (1, 2), (1, 3)]).unwrap();
    let (mut runs, mut violations) = (0, 0);
    let mut worst = f64::NEG_INFINITY;
    let mut detail = Vec::new();
    for (name, inst) in [("single-item", &single), ("K22", &k22)] {
        let obj = StochasticObjective::uniform(inst.cols(), 0, 1, 0.5).unwrap();
        let adapter = make_adapter(inst).unwrap();
        let mut table = SurvivalTable::default();
        for seed in 0..SEEDS {
            let config = StrategyConfig::new(Mode::Adaptive, T, eps, 0.2, child_seed(5, name, seed, Stream::Strategy));
            let realization = sample_realization(&obj, child_seed(5, name, seed, Stream::Nature));
            let run = witness_dynamics(inst, &obj, realization, adapter.as_ref(), &config, |mu| {
                enumerate_tdi_cover(inst.capacities(), &rational_from_f64(mu), &rational(1, 4))
                    .unwrap()
                    .integer_members()
                    .unwrap()
            })
            .unwrap();
            runs += 1;
            violations += run.tracker.monotonicity_violations();
            table.add(run.mu, &run.tracker);
        }
        let rows = table.rows(|mu, t| survival_bound(eps, 0.5, mu, t, 1.0));
        let excess = |keep: &dyn Fn(f64) -> bool| {
            rows.iter()
                .filter(|r| keep(r.mu))
                .map(|r| r.frequency - r.bound)
                .fold(f64::NEG_INFINITY, f64::max)
        };
        worst = worst.max(excess(&|_| true));
        detail.push(format!("{name} max(freq - bound) on mu > 0: {:.4}", excess(&|mu| mu > 0.0)));
    }
    WitnessOutcome {
        verdict: verdict(worst <= 0.03, format!("{} over {SEEDS} seeds, t = 1..{T}", detail.join(", "))),
        runs,
        violations,
    }
}

fn sparsification_preservation() -> Verdict {
    const SEEDS: u64 = 300;
    let spec = GeneratorSpec::PlantedBipartite { left: 40, right: 40, planted: 10, edge_prob: 0.05 };
    let mut ok = 0;
    let mut colors = 0;
    for seed in 0..SEEDS {
        let g = generate(&spec, seed).unwrap();
        let h = Hypergraph::from_instance(&g.instance).unwrap();
        let config = ColoringConfig { k: 2, epsilon: 0.3, delta: 0.3, s: 10, seed: child_seed(9, "planted", seed, Stream::Coloring) };
        colors = config.num_colors();
        let sparse = sparsify(&h, &config).unwrap();
        ok += usize::from(sparse.best_surviving_subset(&g.planted) >= 7);
    }
    let rate = ok as f64 / SEEDS as f64;
    verdict(rate >= 0.66, format!("rate {rate:.3} >= 0.66 with {colors} colors"))
}

fn falling_factorial() -> Verdict {
    let mut cells = 0;
    let mut bad = 0;
    for n in 2..=100 {
        for k in 1..=n / 2 {
            cells += 1;
            bad += usize::from(!falling_factorial_lower_bound(n, k).pass);
        }
    }
    verdict(bad == 0, format!("{cells} grid cells, {bad} violations"))
}

fn cover_counts() -> Verdict {
    let w = enumerate_tdi_cover(&[1, 1, 1], &rational(3, 1), &rational(1, 3)).unwrap();
    // stars and bars: C(3 + 2, 2)
    if w.len() != 10 || count_unit_weight(3, 2, 3) != 10 {
        return verdict(false, format!("TDI cover has {} members", w.len()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for i in 0..50 {
        let n = rng.gen_range(1..=6);
        let weights: Vec<u64> = (0..n).map(|_| rng.gen_range(1..=3)).collect();
        let budget = rng.gen_range(0..=8);
        let support = rng.gen_range(0..=n);
        let mut a = enumerate_recursive(&weights, budget, support);
        let mut b = enumerate_iterative(&weights, budget, support);
        a.sort();
        b.sort();
        if a != b {
            return verdict(false, format!("enumerators disagree on configuration {i}"));
        }
    }
    verdict(true, "|W| = 10, enumerators agree on 50 configurations")
}

fn lp_relative_contract() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut checked = 0;
    for (id, inst) in corpus(10) {
        let adapter: Box<dyn ProblemAdapter> = make_adapter(&inst).unwrap();
        for _ in 0..5 {
            let w: Vec<u64> = (0..inst.cols()).map(|_| rng.gen_range(0..8)).collect();
            let relax = adapter.solve_relaxation(&w).unwrap().value;
            let round = adapter.round_integral(&w).unwrap();
            if !inst.is_feasible(&round.x) || (round.value as f64) < adapter.alpha() * relax - 1e-9 {
                return verdict(false, format!("{id} ({}): {} < {} * {relax}", adapter.name(), round.value, adapter.alpha()));
            }
            checked += 1;
        }
    }
    let mut matroids = 0;
    for i in 0..60u64 {
        let desc = match i % 3 {
            0 => MatroidDescription::uniform(rng.gen_range(1..=16), rng.gen_range(1..=6)).unwrap(),
            1 => {
                let blocks: Vec<Vec<usize>> = (0..4).map(|b| (4 * b..4 * b + 4).collect()).collect();
                MatroidDescription::partition(blocks, (0..4).map(|_| rng.gen_range(1..=4)).collect()).unwrap()
            }
            _ => {
                let edges: Vec<(usize, usize)> = (0..rng.gen_range(1..=16))
                    .map(|_| {
                        let u = rng.gen_range(0..6);
                        (u, (u + rng.gen_range(1..6)) % 6)
                    })
                    .collect();
                MatroidDescription::graphic(6, edges).unwrap()
            }
        };
        let w: Vec<u64> = (0..desc.ground_size()).map(|_| rng.gen_range(0..10)).collect();
        let g: u64 = greedy(&desc, &w).iter().map(|&j| w[j]).sum();
        if g != brute::best_independent(&desc, &w).unwrap() {
            return verdict(false, format!("greedy differs from brute force on matroid {i}"));
        }
        matroids += 1;
    }
    let triangle = PackingInstance::graph(3, vec![(0, 1), (1, 2), (0, 2)]).unwrap();
    let blossom = BlossomAdapter::new(&triangle).unwrap();
    let degree = blossom.solve_degree_relaxation(&[1, 1, 1]).unwrap().value;
    let full = blossom.solve_relaxation(&[1, 1, 1]).unwrap().value;
    if (degree - 1.5).abs() > 1e-9 || (full - 1.0).abs() > 1e-9 {
        return verdict(false, format!("triangle LP {degree} / {full}"));
    }
    verdict(true, format!("{checked} corpus solves, {matroids} matroids, triangle 3/2 -> 1"))
}

const SMALL_SPEC: &str = r#"
name = "mixed"
master_seed = 99
trials = 4

[instances]
count = 3
[instances.generator]
kind = "graph"
vertices = 9
edge_prob = 0.4

[objective]
c_minus = 0
c_plus_min = 1
c_plus_max = 3
p = 0.4

[strategy]
modes = ["adaptive", "nonadaptive"]
epsilon = [0.2, 0.4]
delta = [0.3]
t = [1, 5]
"#;

fn determinism(guarantee: &ExperimentSpec, guarantee_csv: &str) -> Verdict {
    let small = ExperimentSpec::parse(SMALL_SPEC).unwrap();
    let a = rows_to_csv(&run_experiment(&small, 1).unwrap().rows);
    let b = rows_to_csv(&run_experiment(&small, 1).unwrap().rows);
    let c = rows_to_csv(&run_experiment(&small, 4).unwrap().rows);
    let d = rows_to_csv(&run_experiment(guarantee, 1).unwrap().rows);
    let pass = a == b && a == c && d == guarantee_csv;
    verdict(pass, format!("{} + {} bytes identical across 1 and 4 workers and repeats", a.len(), d.len()))
}

fn main() {
    let mut results: Vec<(usize, &str, Verdict, Duration, Option<Duration>)> = Vec::new();
    let timed = |f: &mut dyn FnMut() -> Verdict| {
        let start = Instant::now();
        let v = f();
        (v, start.elapsed())
    };

    let (v, d) = timed(&mut duality_suite);
    results.push((1, "duality suite", v, d, Some(Duration::from_secs(30))));
    let (v, d) = timed(&mut integrality_suite);
    results.push((2, "bipartite integrality", v, d, Some(Duration::from_secs(30))));

    let spec = ExperimentSpec::load(&spec_path("bipartite_guarantee.toml")).unwrap();
    let start = Instant::now();
    let out = run_experiment(&spec, 0).unwrap();
    let run_time = start.elapsed();
    let (adaptive, n_a) = rate(&out, "adaptive", true);
    results.push((
        3,
        "adaptive guarantee",
        verdict(adaptive >= 0.76, format!("pessimistic-LP success {adaptive:.3} >= 0.76 over {n_a} seeds")),
        run_time,
        Some(Duration::from_secs(300)),
    ));
    let (nonadaptive, n_n) = rate(&out, "nonadaptive", false);
    results.push((
        4,
        "non-adaptive guarantee",
        verdict(nonadaptive >= 0.76, format!("value success {nonadaptive:.3} >= 0.76 over {n_n} seeds")),
        run_time,
        Some(Duration::from_secs(300)),
    ));

    let start = Instant::now();
    let witness = witness_bound();
    results.push((5, "single-step witness bound", witness.verdict, start.elapsed(), Some(Duration::from_secs(120))));

    let start = Instant::now();
    let (replayed, replay_violations, mismatches) = replay_traced(&spec, &out);
    let runs = replayed + witness.runs;
    let violations = replay_violations + witness.violations;
    results.push((
        6,
        "monotone infeasibility",
        verdict(
            violations == 0 && mismatches == 0,
            format!("{violations} violations over {runs} traced runs ({mismatches} replay mismatches)"),
        ),
        start.elapsed(),
        None,
    ));

    let (v, d) = timed(&mut sparsification_preservation);
    results.push((7, "sparsification preservation", v, d, Some(Duration::from_secs(180))));
    let (v, d) = timed(&mut falling_factorial);
    results.push((8, "falling factorial", v, d, Some(Duration::from_secs(1))));
    let (v, d) = timed(&mut cover_counts);
    results.push((9, "witness-cover counts", v, d, Some(Duration::from_secs(10))));
    let (v, d) = timed(&mut lp_relative_contract);
    results.push((10, "LP-relative contract", v, d, None));
    let guarantee_csv = rows_to_csv(&out.rows);
    let (v, d) = timed(&mut || determinism(&spec, &guarantee_csv));
    results.push((11, "determinism", v, d, None));

    let mut failed = 0;
    for (n, name, v, elapsed, limit) in &results {
        let in_time = limit.map_or(true, |l| *elapsed <= l);
        let pass = v.pass && in_time;
        failed += usize::from(!pass);
        let limit_note = limit.map(|l| format!(" limit {}s", l.as_secs())).unwrap_or_default();
        println!(
            "criterion {n:>2} {}: {name}: {} [{:.2}s{limit_note}]",
            if pass { "PASS" } else { "FAIL" },
            v.detail,
            elapsed.as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
