use spip_harness::experiment::{rows_from_csv, rows_to_csv, run_experiment, sweep_t, ExperimentSpec};

fn spec(objective: &str, strategy: &str, trials: u32, count: u32) -> ExperimentSpec {
    let text = format!(
        r#"
name = "exp"
master_seed = 11
trials = {trials}

[instances]
count = {count}
[instances.generator]
kind = "bipartite"
left = 6
right = 6
edge_prob = 0.5

[objective]
{objective}

[strategy]
{strategy}
"#
    );
    ExperimentSpec::parse(&text).unwrap()
}

#[test]
fn deterministic_objective_gives_ratio_one() {
    let s = spec(
        "c_minus = 1\nc_plus_min = 1\nc_plus_max = 1\np = 0.5",
        "modes = [\"adaptive\"]\nepsilon = [0.2]\ndelta = [0.2]\nt = [1]",
        1,
        5,
    );
    let out = run_experiment(&s, 1).unwrap();
    assert_eq!(out.rows.len(), 5);
    for row in &out.rows {
        assert!(row.error.is_empty());
        assert_eq!(row.ratio_ip, 1.0, "{row:?}");
        assert!(row.success);
    }
}

#[test]
fn bound_t_beats_single_round() {
    let objective = "c_minus = 0\nc_plus_min = 1\nc_plus_max = 2\np = 0.5";
    let one = run_experiment(&spec(objective, "modes = [\"adaptive\"]\nepsilon = [0.2]\ndelta = [0.2]\nt = [1]", 1, 150), 0).unwrap();
    let bound = run_experiment(&spec(objective, "modes = [\"adaptive\"]\nepsilon = [0.2]\ndelta = [0.2]", 1, 150), 0).unwrap();
    let (a, b) = (&one.summary[0], &bound.summary[0]);
    assert!(b.lp_success_rate >= a.lp_success_rate, "{} < {}", b.lp_success_rate, a.lp_success_rate);
    assert!(b.lp_success_rate >= 0.8);
    assert!(b.mean_t > 1.0);
}

#[test]
fn queries_grow_linearly_in_t() {
    let s = spec(
        "c_minus = 0\nc_plus_min = 1\nc_plus_max = 2\np = 0.5",
        "modes = [\"nonadaptive\"]\nepsilon = [0.2]\ndelta = [0.2]\nt = [1, 2, 4, 8]",
        4,
        10,
    );
    let out = sweep_t(&s, 0).unwrap();
    let q: Vec<f64> = out.summary.iter().map(|r| r.mean_queries_total).collect();
    assert_eq!(q.len(), 4);
    for w in q.windows(2) {
        assert!(w[1] >= w[0]);
    }
    // queries per round never exceed the item count
    for (r, t) in out.summary.iter().zip([1.0, 2.0, 4.0, 8.0]) {
        assert!(r.mean_queries_total <= 36.0 * t);
    }
}

#[test]
fn csv_round_trips() {
    let s = spec(
        "c_minus = 0\nc_plus_min = 1\nc_plus_max = 2\np = 0.3",
        "modes = [\"adaptive\", \"nonadaptive\"]\nepsilon = [0.3]\ndelta = [0.3]\nt = [2]",
        3,
        3,
    );
    let out = run_experiment(&s, 2).unwrap();
    let text = rows_to_csv(&out.rows);
    assert_eq!(rows_to_csv(&rows_from_csv(&text).unwrap()), text);
}
