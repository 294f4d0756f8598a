use num_traits::Zero;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spip_core::adapters::{brute, make_adapter};
use spip_core::instance::PackingInstance;
use spip_core::lp::{check_duality, solve_dual, solve_primal, LpProblem, Rational};

/// Valid random packing system: each column gets one tight row, other entries stay
/// at most the row capacity.
fn random_valid(n: usize, m: usize, rng: &mut ChaCha8Rng) -> (Vec<Vec<u64>>, Vec<u64>) {
    let b: Vec<u64> = (0..n).map(|_| rng.gen_range(1..=3)).collect();
    let mut a = vec![vec![0u64; m]; n];
    for j in 0..m {
        let tight = rng.gen_range(0..n);
        for i in 0..n {
            a[i][j] = if i == tight {
                b[i]
            } else if rng.gen_bool(0.3) {
                rng.gen_range(0..=b[i])
            } else {
                0
            };
        }
    }
    (a, b)
}

fn random_problem(n: usize, m: usize, seed: u64) -> LpProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (a, b) = random_valid(n, m, &mut rng);
    let inst = PackingInstance::generic(a, b).unwrap();
    let w: Vec<u64> = (0..m).map(|_| rng.gen_range(0..6)).collect();
    LpProblem::from_instance(&inst, &w).unwrap()
}

fn random_bipartite(left: usize, right: usize, seed: u64) -> (PackingInstance, Vec<u64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..left {
        for v in 0..right {
            if rng.gen_bool(0.4) {
                edges.push((u, left + v));
            }
        }
    }
    let inst = PackingInstance::bipartite(left, right, edges).unwrap();
    let w = (0..inst.cols()).map(|_| rng.gen_range(0..10)).collect();
    (inst, w)
}

#[test]
fn rational_gap_is_exactly_zero_on_ten_by_ten() {
    for seed in 0..50 {
        let prob = random_problem(10, 10, seed);
        let primal = solve_primal::<Rational>(&prob).unwrap();
        let dual = solve_dual::<Rational>(&prob).unwrap();
        assert!((primal.value.clone() - dual.value.clone()).is_zero(), "seed {seed}");
        let report = check_duality(&prob, &primal, &dual, 0.0);
        assert!(report.passed(), "seed {seed}: {:?}", report.worst());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn float_and_rational_duality_agree(n in 1usize..=12, m in 1usize..=12, seed in any::<u64>()) {
        let prob = random_problem(n, m, seed);
        let primal = solve_primal::<f64>(&prob).unwrap();
        let dual = solve_dual::<f64>(&prob).unwrap();
        let report = check_duality(&prob, &primal, &dual, 1e-6);
        prop_assert!(report.passed(), "{:?}", report.worst());
        let exact = solve_primal::<Rational>(&prob).unwrap();
        let exact_value = exact.to_f64().value;
        prop_assert!((exact_value - primal.value).abs() <= 1e-6);
    }

    #[test]
    fn bipartite_vertices_are_integral(left in 1usize..=6, right in 1usize..=6, seed in any::<u64>()) {
        let (inst, w) = random_bipartite(left, right, seed);
        let prob = LpProblem::from_instance(&inst, &w).unwrap();
        let sol = solve_primal::<Rational>(&prob).unwrap();
        prop_assert!(sol.is_integral());
        let best = brute::best_packing(&inst, &w).unwrap().value;
        prop_assert_eq!(sol.to_f64().value, best as f64);
        let adapter = make_adapter(&inst).unwrap();
        prop_assert_eq!(adapter.round_integral(&w).unwrap().value, best);
    }

    #[test]
    fn relaxation_dominates_every_feasible_packing(n in 1usize..=6, m in 1usize..=10, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = random_valid(n, m, &mut rng);
        let inst = PackingInstance::generic(a, b).unwrap();
        let w: Vec<u64> = (0..m).map(|_| rng.gen_range(0..6)).collect();
        let lp = solve_primal::<f64>(&LpProblem::from_instance(&inst, &w).unwrap()).unwrap();
        let ip = brute::best_packing(&inst, &w).unwrap();
        prop_assert!(inst.is_feasible(&ip.x));
        prop_assert!(ip.value as f64 <= lp.value + 1e-9);
    }
}
