//! Matching on graphs too large for odd-set enumeration. The relaxation is the
//! degree-constraint LP, solved exactly through the bipartite double cover; the
//! rounding is an exact maximum-weight matching by branch and bound on that LP.

use super::bipartite::max_weight_matching;
use super::{check_weights, AdapterError, IntegralSolution, ProblemAdapter};
use crate::instance::{Family, FamilyMeta, PackingInstance};
use crate::lp::LpSolution;

const MAX_NODES: usize = 200_000;

#[derive(Debug, Clone)]
pub struct FractionalMatchingAdapter {
    vertices: usize,
    edges: Vec<(usize, usize)>,
}

/// Optimal half-integral fractional matching. Returns `2 x_e` per edge and twice the
/// LP value. Edges with `active[e] == false` are ignored.
pub fn doubled_fractional_matching(
    vertices: usize,
    edges: &[(usize, usize)],
    weights: &[u64],
    active: &[bool],
) -> (Vec<u8>, u64) {
    // edge e = uv becomes (u, v') and (v, u') in the double cover
    let mut cover_edges = Vec::new();
    let mut cover_weights = Vec::new();
    let mut origin = Vec::new();
    for (j, &(u, v)) in edges.iter().enumerate() {
        if active[j] && weights[j] > 0 {
            cover_edges.push((u, v));
            cover_edges.push((v, u));
            cover_weights.extend([weights[j], weights[j]]);
            origin.extend([j, j]);
        }
    }
    let chosen = max_weight_matching(vertices, vertices, &cover_edges, &cover_weights);
    let mut twice = vec![0u8; edges.len()];
    let mut value = 0;
    for c in chosen {
        twice[origin[c]] += 1;
        value += cover_weights[c];
    }
    (twice, value)
}

/// Exact maximum-weight matching by branch and bound. Errors when the search
/// exceeds its node budget.
pub fn max_weight_matching_bnb(
    vertices: usize,
    edges: &[(usize, usize)],
    weights: &[u64],
) -> Result<Vec<usize>, AdapterError> {
    struct Search<'a> {
        vertices: usize,
        edges: &'a [(usize, usize)],
        weights: &'a [u64],
        best: Vec<usize>,
        best_value: u64,
        nodes: usize,
    }

    impl Search<'_> {
        fn go(&mut self, active: &mut Vec<bool>, fixed: &mut Vec<usize>, fixed_value: u64) -> Result<(), AdapterError> {
            self.nodes += 1;
            if self.nodes > MAX_NODES {
                return Err(AdapterError::TooLarge {
                    what: "matching search nodes",
                    size: self.nodes,
                    limit: MAX_NODES,
                });
            }
            let (twice, doubled) =
                doubled_fractional_matching(self.vertices, self.edges, self.weights, active);
            // integer weights: the integral optimum is at most floor(LP)
            if fixed_value + doubled / 2 <= self.best_value {
                return Ok(());
            }
            let split = (0..self.edges.len())
                .filter(|&j| twice[j] == 1)
                .max_by_key(|&j| (self.weights[j], std::cmp::Reverse(j)));
            let Some(e) = split else {
                // integral: twice is 0 or 2, a matching of the active graph
                let mut sol = fixed.clone();
                sol.extend((0..self.edges.len()).filter(|&j| twice[j] == 2));
                self.best_value = fixed_value + doubled / 2;
                sol.sort_unstable();
                self.best = sol;
                return Ok(());
            };
            // include e: drop every active edge touching its endpoints
            let (u, v) = self.edges[e];
            let dropped: Vec<usize> = (0..self.edges.len())
                .filter(|&j| {
                    let (a, b) = self.edges[j];
                    active[j] && (a == u || a == v || b == u || b == v)
                })
                .collect();
            for &j in &dropped {
                active[j] = false;
            }
            fixed.push(e);
            self.go(active, fixed, fixed_value + self.weights[e])?;
            fixed.pop();
            for &j in &dropped {
                active[j] = true;
            }
            // exclude e
            active[e] = false;
            self.go(active, fixed, fixed_value)?;
            active[e] = true;
            Ok(())
        }
    }

    let mut search = Search {
        vertices,
        edges,
        weights,
        best: Vec::new(),
        best_value: 0,
        nodes: 0,
    };
    let mut active = vec![true; edges.len()];
    search.go(&mut active, &mut Vec::new(), 0)?;
    Ok(search.best)
}

impl FractionalMatchingAdapter {
    pub fn new(inst: &PackingInstance) -> Result<Self, AdapterError> {
        match inst.meta() {
            FamilyMeta::Graph { vertices, edges } => Ok(FractionalMatchingAdapter {
                vertices: *vertices,
                edges: edges.clone(),
            }),
            FamilyMeta::Hypergraph { vertices, k: 2, edges } => Ok(FractionalMatchingAdapter {
                vertices: *vertices,
                edges: edges.iter().map(|e| (e[0], e[1])).collect(),
            }),
            _ => Err(AdapterError::Incompatible {
                family: inst.family(),
                adapter: "fractional-matching",
            }),
        }
    }

    pub fn from_graph(vertices: usize, edges: Vec<(usize, usize)>) -> Self {
        FractionalMatchingAdapter { vertices, edges }
    }
}

impl ProblemAdapter for FractionalMatchingAdapter {
    fn name(&self) -> &'static str {
        "fractional-matching"
    }

    fn family(&self) -> Family {
        Family::NonbipartiteMatching
    }

    /// Integrality gap of the degree LP on general graphs.
    fn alpha(&self) -> f64 {
        2.0 / 3.0
    }

    fn solve_relaxation(&self, weights: &[u64]) -> Result<LpSolution<f64>, AdapterError> {
        check_weights(weights, self.edges.len())?;
        let active = vec![true; self.edges.len()];
        let (twice, doubled) = doubled_fractional_matching(self.vertices, &self.edges, weights, &active);
        Ok(LpSolution {
            x: twice.iter().map(|&t| f64::from(t) / 2.0).collect(),
            value: doubled as f64 / 2.0,
            basis: None,
            is_vertex: false,
        })
    }

    fn round_integral(&self, weights: &[u64]) -> Result<IntegralSolution, AdapterError> {
        check_weights(weights, self.edges.len())?;
        let items = max_weight_matching_bnb(self.vertices, &self.edges, weights)?;
        Ok(IntegralSolution::from_items(&items, weights))
    }
}
