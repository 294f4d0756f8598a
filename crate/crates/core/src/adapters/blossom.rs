//! Non-bipartite matching on small graphs: degree constraints plus odd-set
//! (blossom) constraints over every odd vertex subset, and an exact matching by
//! dynamic programming over vertex subsets.

use super::{check_weights, AdapterError, IntegralSolution, ProblemAdapter};
use crate::instance::{Family, FamilyMeta, PackingInstance};
use crate::lp::{solve_primal, LpProblem, LpSolution};

/// Odd sets are enumerated explicitly, so the vertex count is capped.
pub const MAX_VERTICES: usize = 14;
/// Cap for building the full odd-set-augmented matrix up front.
pub const MAX_FULL_MATRIX_VERTICES: usize = 10;

const CUT_TOL: f64 = 1e-7;
const MAX_CUT_ROUNDS: usize = 200;

#[derive(Debug, Clone)]
pub struct BlossomAdapter {
    vertices: usize,
    edges: Vec<(usize, usize)>,
}

fn edge_masks(edges: &[(usize, usize)]) -> Vec<u32> {
    edges.iter().map(|&(u, v)| 1 << u | 1 << v).collect()
}

fn degree_rows(vertices: usize, edges: &[(usize, usize)]) -> Vec<Vec<u64>> {
    (0..vertices)
        .map(|v| {
            edges
                .iter()
                .map(|&(a, b)| u64::from(a == v || b == v))
                .collect()
        })
        .collect()
}

fn odd_set_row(mask: u32, masks: &[u32]) -> Vec<u64> {
    masks.iter().map(|&e| u64::from(e & mask == e)).collect()
}

impl BlossomAdapter {
    pub fn new(inst: &PackingInstance) -> Result<Self, AdapterError> {
        match inst.meta() {
            FamilyMeta::Graph { vertices, edges } => {
                if *vertices > MAX_VERTICES {
                    return Err(AdapterError::TooLarge {
                        what: "blossom vertex count",
                        size: *vertices,
                        limit: MAX_VERTICES,
                    });
                }
                Ok(BlossomAdapter {
                    vertices: *vertices,
                    edges: edges.clone(),
                })
            }
            _ => Err(AdapterError::Incompatible {
                family: inst.family(),
                adapter: "blossom",
            }),
        }
    }

    /// The fractional matching LP without odd-set constraints.
    pub fn solve_degree_relaxation(&self, weights: &[u64]) -> Result<LpSolution<f64>, AdapterError> {
        check_weights(weights, self.edges.len())?;
        let prob = LpProblem::new(
            degree_rows(self.vertices, &self.edges),
            vec![1; self.vertices],
            weights.iter().map(|&w| w as f64).collect(),
            false,
        )?;
        Ok(solve_primal(&prob)?)
    }

    /// Degree rows followed by one row per odd vertex set of size >= 3 that spans
    /// at least one edge, with right-hand side `(|S| - 1) / 2`.
    pub fn odd_set_problem(&self, weights: &[u64]) -> Result<LpProblem, AdapterError> {
        check_weights(weights, self.edges.len())?;
        if self.vertices > MAX_FULL_MATRIX_VERTICES {
            return Err(AdapterError::TooLarge {
                what: "odd-set matrix vertex count",
                size: self.vertices,
                limit: MAX_FULL_MATRIX_VERTICES,
            });
        }
        let masks = edge_masks(&self.edges);
        let mut a = degree_rows(self.vertices, &self.edges);
        let mut b = vec![1; self.vertices];
        for mask in 0u32..(1 << self.vertices) {
            let size = mask.count_ones();
            if size >= 3 && size % 2 == 1 && masks.iter().any(|&e| e & mask == e) {
                a.push(odd_set_row(mask, &masks));
                b.push(u64::from((size - 1) / 2));
            }
        }
        Ok(LpProblem::new(a, b, weights.iter().map(|&w| w as f64).collect(), false)?)
    }
}

/// Exact maximum-weight matching by DP over vertex subsets (`vertices <= 20`).
/// Returns sorted edge indices.
pub fn max_weight_matching_dp(vertices: usize, edges: &[(usize, usize)], weights: &[u64]) -> Vec<usize> {
    assert!(vertices <= 20, "subset DP is exponential in the vertex count");
    let full = (1usize << vertices) - 1;
    let mut incident: Vec<Vec<(usize, usize)>> = vec![Vec::new(); vertices];
    for (j, &(u, v)) in edges.iter().enumerate() {
        if weights[j] > 0 {
            incident[u].push((v, j));
            incident[v].push((u, j));
        }
    }
    // best[mask]: optimum using only vertices in mask; choice records the edge
    // matched to the lowest vertex, if any
    let mut best = vec![0u64; full + 1];
    let mut choice: Vec<Option<usize>> = vec![None; full + 1];
    for mask in 1..=full {
        let v = mask.trailing_zeros() as usize;
        let rest = mask & !(1 << v);
        best[mask] = best[rest];
        for &(u, j) in &incident[v] {
            if rest >> u & 1 == 1 {
                let cand = weights[j] + best[rest & !(1 << u)];
                if cand > best[mask] {
                    best[mask] = cand;
                    choice[mask] = Some(j);
                }
            }
        }
    }
    let mut chosen = Vec::new();
    let mut mask = full;
    while mask != 0 {
        let v = mask.trailing_zeros() as usize;
        match choice[mask] {
            Some(j) => {
                let (a, b) = edges[j];
                chosen.push(j);
                mask &= !(1 << a | 1 << b);
            }
            None => mask &= !(1 << v),
        }
    }
    chosen.sort_unstable();
    chosen
}

impl ProblemAdapter for BlossomAdapter {
    fn name(&self) -> &'static str {
        "blossom-enumeration"
    }

    fn family(&self) -> Family {
        Family::NonbipartiteMatching
    }

    fn alpha(&self) -> f64 {
        1.0
    }

    fn nominal_alpha(&self) -> f64 {
        2.0 / 3.0
    }

    /// Cutting planes: solve, add every violated odd-set constraint, repeat. Each
    /// added row is valid for the matching polytope, so the final optimum is the
    /// optimum over degree plus all odd-set constraints.
    fn solve_relaxation(&self, weights: &[u64]) -> Result<LpSolution<f64>, AdapterError> {
        check_weights(weights, self.edges.len())?;
        let masks = edge_masks(&self.edges);
        let objective: Vec<f64> = weights.iter().map(|&w| w as f64).collect();
        let mut a = degree_rows(self.vertices, &self.edges);
        let mut b = vec![1u64; self.vertices];
        for _ in 0..MAX_CUT_ROUNDS {
            let prob = LpProblem::new(a.clone(), b.clone(), objective.clone(), false)?;
            let sol = solve_primal::<f64>(&prob)?;
            let mut added = false;
            for mask in 0u32..(1 << self.vertices) {
                let size = mask.count_ones();
                if size < 3 || size % 2 == 0 {
                    continue;
                }
                let inside: f64 = masks
                    .iter()
                    .zip(&sol.x)
                    .filter(|(&e, _)| e & mask == e)
                    .map(|(_, x)| x)
                    .sum();
                if inside > f64::from((size - 1) / 2) + CUT_TOL {
                    a.push(odd_set_row(mask, &masks));
                    b.push(u64::from((size - 1) / 2));
                    added = true;
                }
            }
            if !added {
                return Ok(sol);
            }
        }
        Err(AdapterError::Lp(crate::lp::LpError::IterationLimit(MAX_CUT_ROUNDS)))
    }

    fn round_integral(&self, weights: &[u64]) -> Result<IntegralSolution, AdapterError> {
        check_weights(weights, self.edges.len())?;
        let items = max_weight_matching_dp(self.vertices, &self.edges, weights);
        Ok(IntegralSolution::from_items(&items, weights))
    }
}
