//! Maximum-weight bipartite matching by the Hungarian method. The degree-constraint
//! polytope of a bipartite graph is integral, so the matching is also the LP optimum.

use super::{check_weights, AdapterError, IntegralSolution, ProblemAdapter};
use crate::instance::{Family, FamilyMeta, PackingInstance};
use crate::lp::LpSolution;

/// Minimum-cost perfect assignment on a square matrix (potentials, O(n^3)).
/// Returns `assign[row] = col`.
pub fn hungarian_min(cost: &[Vec<i64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    const INF: i64 = i64::MAX / 4;
    // 1-based arrays, column 0 is a sentinel
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![INF; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = INF;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0; n];
    for j in 1..=n {
        if p[j] > 0 {
            assign[p[j] - 1] = j - 1;
        }
    }
    assign
}

/// Maximum-weight (not necessarily perfect) matching. `edges` join `0..left` to
/// `0..right`; parallel edges are allowed. Returns the chosen edge indices, sorted.
pub fn max_weight_matching(
    left: usize,
    right: usize,
    edges: &[(usize, usize)],
    weights: &[u64],
) -> Vec<usize> {
    let size = left.max(right);
    let mut best: Vec<Vec<Option<usize>>> = vec![vec![None; size]; size];
    for (j, &(u, v)) in edges.iter().enumerate() {
        if weights[j] == 0 {
            continue;
        }
        let slot = &mut best[u][v];
        if slot.map_or(true, |k| weights[k] < weights[j]) {
            *slot = Some(j);
        }
    }
    let wmax = weights.iter().copied().max().unwrap_or(0) as i64;
    let cost: Vec<Vec<i64>> = best
        .iter()
        .map(|row| {
            row.iter()
                .map(|e| wmax - e.map_or(0, |j| weights[j] as i64))
                .collect()
        })
        .collect();
    let mut chosen: Vec<usize> = hungarian_min(&cost)
        .into_iter()
        .enumerate()
        .filter_map(|(u, v)| best[u][v])
        .collect();
    chosen.sort_unstable();
    chosen
}

#[derive(Debug, Clone)]
pub struct BipartiteAdapter {
    left: usize,
    right: usize,
    /// Right endpoints shifted to `0..right`.
    edges: Vec<(usize, usize)>,
}

impl BipartiteAdapter {
    pub fn new(inst: &PackingInstance) -> Result<Self, AdapterError> {
        match inst.meta() {
            FamilyMeta::Bipartite { left, right, edges } => Ok(BipartiteAdapter {
                left: *left,
                right: *right,
                edges: edges.iter().map(|&(u, v)| (u, v - left)).collect(),
            }),
            _ => Err(AdapterError::Incompatible {
                family: inst.family(),
                adapter: "bipartite",
            }),
        }
    }
}

impl ProblemAdapter for BipartiteAdapter {
    fn name(&self) -> &'static str {
        "bipartite-hungarian"
    }

    fn family(&self) -> Family {
        Family::BipartiteMatching
    }

    fn alpha(&self) -> f64 {
        1.0
    }

    fn solve_relaxation(&self, weights: &[u64]) -> Result<LpSolution<f64>, AdapterError> {
        Ok(self.round_integral(weights)?.as_lp_solution())
    }

    fn round_integral(&self, weights: &[u64]) -> Result<IntegralSolution, AdapterError> {
        check_weights(weights, self.edges.len())?;
        let items = max_weight_matching(self.left, self.right, &self.edges, weights);
        Ok(IntegralSolution::from_items(&items, weights))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adapters::brute;
    use crate::lp::{solve_primal, LpProblem};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn two_by_two_weight_matrix() {
        // edges (0,0) (0,1) (1,0) (1,1) with weights [[3,1],[2,4]]
        let inst = PackingInstance::bipartite(2, 2, vec![(0, 2), (0, 3), (1, 2), (1, 3)]).unwrap();
        let adapter = BipartiteAdapter::new(&inst).unwrap();
        let sol = adapter.round_integral(&[3, 1, 2, 4]).unwrap();
        assert_eq!(sol.value, 7);
        assert_eq!(sol.items(), vec![0, 3]);
    }

    #[test]
    fn k22_unit_weights() {
        let inst = PackingInstance::bipartite(2, 2, vec![(0, 2), (0, 3), (1, 2), (1, 3)]).unwrap();
        let adapter = BipartiteAdapter::new(&inst).unwrap();
        assert_eq!(adapter.omniscient_ip(&[1; 4]).unwrap(), 2);
    }

    #[test]
    fn unbalanced_and_parallel_edges() {
        let inst = PackingInstance::bipartite(3, 1, vec![(0, 3), (1, 3), (1, 3), (2, 3)]).unwrap();
        let adapter = BipartiteAdapter::new(&inst).unwrap();
        let sol = adapter.round_integral(&[2, 1, 6, 5]).unwrap();
        assert_eq!(sol.items(), vec![2]);
    }

    #[test]
    fn agrees_with_engine_and_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..60 {
            let (l, r) = (rng.gen_range(1..6), rng.gen_range(1..6));
            let mut edges = Vec::new();
            for u in 0..l {
                for v in 0..r {
                    if rng.gen_bool(0.5) {
                        edges.push((u, l + v));
                    }
                }
            }
            let inst = PackingInstance::bipartite(l, r, edges).unwrap();
            let w: Vec<u64> = (0..inst.cols()).map(|_| rng.gen_range(0..10)).collect();
            let sol = BipartiteAdapter::new(&inst).unwrap().round_integral(&w).unwrap();
            assert!(inst.is_feasible(&sol.x));
            let lp = solve_primal::<f64>(&LpProblem::from_instance(&inst, &w).unwrap()).unwrap();
            assert!((lp.value - sol.value as f64).abs() < 1e-6);
            assert_eq!(brute::best_packing(&inst, &w).unwrap().value, sol.value);
        }
    }
}
