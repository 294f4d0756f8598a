//! Matroids given by kind (uniform, partition, graphic) with an independence oracle,
//! plus the greedy adapter for maximum-weight independent set.

use super::{AdapterError, IntegralSolution, ProblemAdapter};
use crate::instance::{Family, FamilyMeta, PackingInstance};
use crate::lp::LpSolution;

/// Graphic matroids get an explicit vertex-subset description, so their size is capped.
pub const MAX_GRAPHIC_VERTICES: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MatroidKind {
    Uniform {
        rank: usize,
    },
    /// Each block may contribute at most its capacity.
    Partition {
        blocks: Vec<Vec<usize>>,
        capacities: Vec<usize>,
    },
    /// Forests of a multigraph without loops; element `j` is edge `j`.
    Graphic {
        vertices: usize,
        edges: Vec<(usize, usize)>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatroidDescription {
    kind: MatroidKind,
    ground_size: usize,
}

impl MatroidDescription {
    pub fn uniform(ground_size: usize, rank: usize) -> Result<Self, String> {
        if rank == 0 {
            return Err("uniform matroid needs rank >= 1".into());
        }
        Ok(MatroidDescription {
            kind: MatroidKind::Uniform { rank },
            ground_size,
        })
    }

    pub fn partition(blocks: Vec<Vec<usize>>, capacities: Vec<usize>) -> Result<Self, String> {
        if blocks.len() != capacities.len() {
            return Err(format!(
                "{} blocks but {} capacities",
                blocks.len(),
                capacities.len()
            ));
        }
        if capacities.contains(&0) {
            return Err("partition capacities must be positive".into());
        }
        let ground_size = blocks.iter().map(Vec::len).sum();
        let mut seen = vec![false; ground_size];
        for &e in blocks.iter().flatten() {
            if e >= ground_size || seen[e] {
                return Err(format!("blocks do not partition 0..{ground_size} (element {e})"));
            }
            seen[e] = true;
        }
        Ok(MatroidDescription {
            kind: MatroidKind::Partition { blocks, capacities },
            ground_size,
        })
    }

    pub fn graphic(vertices: usize, edges: Vec<(usize, usize)>) -> Result<Self, String> {
        if let Some(&(u, v)) = edges
            .iter()
            .find(|&&(u, v)| u == v || u >= vertices || v >= vertices)
        {
            return Err(format!("invalid graphic edge ({u}, {v})"));
        }
        Ok(MatroidDescription {
            ground_size: edges.len(),
            kind: MatroidKind::Graphic { vertices, edges },
        })
    }

    pub fn kind(&self) -> &MatroidKind {
        &self.kind
    }

    pub fn ground_size(&self) -> usize {
        self.ground_size
    }

    pub fn is_independent(&self, set: &[usize]) -> bool {
        match &self.kind {
            MatroidKind::Uniform { rank } => set.len() <= *rank,
            MatroidKind::Partition { blocks, capacities } => {
                blocks.iter().zip(capacities).all(|(block, &cap)| {
                    set.iter().filter(|e| block.contains(e)).count() <= cap
                })
            }
            MatroidKind::Graphic { vertices, edges } => {
                let mut parent: Vec<usize> = (0..*vertices).collect();
                fn find(p: &mut [usize], mut x: usize) -> usize {
                    while p[x] != x {
                        p[x] = p[p[x]];
                        x = p[x];
                    }
                    x
                }
                set.iter().all(|&e| {
                    let (u, v) = edges[e];
                    let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
                    if ru == rv {
                        false
                    } else {
                        parent[ru] = rv;
                        true
                    }
                })
            }
        }
    }

    /// Size of a maximal independent subset of `set`.
    pub fn rank(&self, set: &[usize]) -> usize {
        let mut basis = Vec::new();
        for &e in set {
            basis.push(e);
            if !self.is_independent(&basis) {
                basis.pop();
            }
        }
        basis.len()
    }

    /// Rows `(S, b_S)` of `sum_{e in S} x_e <= b_S` describing the independence
    /// polytope. Every element has a row with coefficient equal to its capacity.
    pub fn constraint_rows(&self) -> Result<(Vec<Vec<usize>>, Vec<u64>), String> {
        let m = self.ground_size;
        let mut rows: Vec<Vec<usize>> = Vec::new();
        let mut b = Vec::new();
        match &self.kind {
            MatroidKind::Uniform { rank } => {
                for e in 0..m {
                    rows.push(vec![e]);
                    b.push(1);
                }
                if *rank < m {
                    rows.push((0..m).collect());
                    b.push(*rank as u64);
                }
            }
            MatroidKind::Partition { blocks, capacities } => {
                for e in 0..m {
                    rows.push(vec![e]);
                    b.push(1);
                }
                for (block, &cap) in blocks.iter().zip(capacities) {
                    if cap < block.len() {
                        let mut s = block.clone();
                        s.sort_unstable();
                        rows.push(s);
                        b.push(cap as u64);
                    }
                }
            }
            MatroidKind::Graphic { vertices, edges } => {
                if *vertices > MAX_GRAPHIC_VERTICES {
                    return Err(format!(
                        "graphic matroid with {vertices} vertices exceeds the explicit limit {MAX_GRAPHIC_VERTICES}"
                    ));
                }
                // x(E(S)) <= |S| - 1, kept only where it is not implied by x <= 1;
                // two-vertex sets always stay so each edge has a tight row
                for mask in 1u32..(1u32 << vertices) {
                    let size = mask.count_ones() as usize;
                    if size < 2 {
                        continue;
                    }
                    let inside: Vec<usize> = (0..m)
                        .filter(|&e| {
                            let (u, v) = edges[e];
                            mask >> u & 1 == 1 && mask >> v & 1 == 1
                        })
                        .collect();
                    if inside.is_empty() || (size > 2 && inside.len() < size) {
                        continue;
                    }
                    rows.push(inside);
                    b.push(size as u64 - 1);
                }
            }
        }
        Ok((rows, b))
    }
}

/// Maximum-weight independent set by the greedy algorithm. Exact for matroids, and
/// the greedy optimum is also the LP optimum because the polytope is integral.
pub fn greedy(desc: &MatroidDescription, weights: &[u64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..desc.ground_size()).filter(|&e| weights[e] > 0).collect();
    order.sort_by(|&a, &b| weights[b].cmp(&weights[a]).then(a.cmp(&b)));
    let mut chosen = Vec::new();
    for e in order {
        chosen.push(e);
        if !desc.is_independent(&chosen) {
            chosen.pop();
        }
    }
    chosen.sort_unstable();
    chosen
}

#[derive(Debug, Clone)]
pub struct MatroidAdapter {
    desc: MatroidDescription,
}

impl MatroidAdapter {
    pub fn new(inst: &PackingInstance) -> Result<Self, AdapterError> {
        match inst.meta() {
            FamilyMeta::Matroid(desc) => Ok(MatroidAdapter { desc: desc.clone() }),
            _ => Err(AdapterError::Incompatible {
                family: inst.family(),
                adapter: "matroid",
            }),
        }
    }

    pub fn description(&self) -> &MatroidDescription {
        &self.desc
    }
}

impl ProblemAdapter for MatroidAdapter {
    fn name(&self) -> &'static str {
        "matroid-greedy"
    }

    fn family(&self) -> Family {
        Family::Matroid
    }

    fn alpha(&self) -> f64 {
        1.0
    }

    fn solve_relaxation(&self, weights: &[u64]) -> Result<LpSolution<f64>, AdapterError> {
        let sol = self.round_integral(weights)?;
        Ok(sol.as_lp_solution())
    }

    fn round_integral(&self, weights: &[u64]) -> Result<IntegralSolution, AdapterError> {
        super::check_weights(weights, self.desc.ground_size())?;
        Ok(IntegralSolution::from_items(&greedy(&self.desc, weights), weights))
    }
}
