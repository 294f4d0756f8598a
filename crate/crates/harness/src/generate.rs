//! Seeded instance generators.

use std::path::PathBuf;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use spip_core::adapters::matroid::MatroidDescription;
use spip_core::instance::{validate_instance, InstanceError, PackingInstance, StochasticObjective};

use crate::io::read_instance;
use crate::HarnessError;

/// Regeneration attempts before a generator gives up.
pub const MAX_RETRIES: u64 = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GeneratorSpec {
    Bipartite {
        left: usize,
        right: usize,
        edge_prob: f64,
    },
    Graph {
        vertices: usize,
        edge_prob: f64,
    },
    /// `edges` distinct random `k`-subsets of `0..vertices`.
    KHypergraph {
        vertices: usize,
        edges: usize,
        k: usize,
    },
    UniformMatroid {
        ground_size: usize,
        rank: usize,
    },
    PartitionMatroid {
        blocks: usize,
        block_size: usize,
        capacity: usize,
    },
    GraphicMatroid {
        vertices: usize,
        edge_prob: f64,
    },
    /// Generic packing system; every column gets one tight row.
    RandomPacking {
        rows: usize,
        cols: usize,
        max_capacity: u64,
        density: f64,
    },
    /// At most `k` nonzeros per column; no tight row is forced.
    KCspip {
        rows: usize,
        cols: usize,
        k: usize,
        max_capacity: u64,
    },
    /// Random bipartite graph plus a planted matching on the first `planted`
    /// vertices of each side.
    PlantedBipartite {
        left: usize,
        right: usize,
        planted: usize,
        edge_prob: f64,
    },
    Explicit {
        path: PathBuf,
    },
}

#[derive(Debug, Clone)]
pub struct Generated {
    pub instance: PackingInstance,
    /// Objective carried by an explicit file, if any.
    pub objective: Option<StochasticObjective>,
    /// Seed of the accepted attempt.
    pub seed: u64,
    pub attempts: u64,
    /// Item ids of the planted matching (planted-bipartite only).
    pub planted: Vec<usize>,
}

fn check_prob(p: f64) -> Result<(), HarnessError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(HarnessError::Invalid(format!("probability {p} is outside [0, 1]")))
    }
}

fn random_bipartite(left: usize, right: usize, prob: f64, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for u in 0..left {
        for v in 0..right {
            if rng.gen_bool(prob) {
                edges.push((u, left + v));
            }
        }
    }
    edges
}

fn random_graph(n: usize, prob: f64, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(prob) {
                edges.push((u, v));
            }
        }
    }
    edges
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).map(|i| (n - i) as f64 / (i + 1) as f64).product()
}

impl GeneratorSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            GeneratorSpec::Bipartite { .. } => "bipartite",
            GeneratorSpec::Graph { .. } => "graph",
            GeneratorSpec::KHypergraph { .. } => "k-hypergraph",
            GeneratorSpec::UniformMatroid { .. } => "uniform-matroid",
            GeneratorSpec::PartitionMatroid { .. } => "partition-matroid",
            GeneratorSpec::GraphicMatroid { .. } => "graphic-matroid",
            GeneratorSpec::RandomPacking { .. } => "random-packing",
            GeneratorSpec::KCspip { .. } => "k-cspip",
            GeneratorSpec::PlantedBipartite { .. } => "planted-bipartite",
            GeneratorSpec::Explicit { .. } => "explicit",
        }
    }

    fn check(&self) -> Result<(), HarnessError> {
        match *self {
            GeneratorSpec::Bipartite { edge_prob, .. }
            | GeneratorSpec::Graph { edge_prob, .. }
            | GeneratorSpec::GraphicMatroid { edge_prob, .. }
            | GeneratorSpec::PlantedBipartite { edge_prob, .. } => check_prob(edge_prob)?,
            GeneratorSpec::RandomPacking { density, rows, max_capacity, .. } => {
                check_prob(density)?;
                if rows == 0 || max_capacity == 0 {
                    return Err(HarnessError::Invalid("random packing needs rows >= 1 and max_capacity >= 1".into()));
                }
            }
            GeneratorSpec::KCspip { rows, k, max_capacity, .. } => {
                if rows == 0 || k == 0 || k > rows || max_capacity == 0 {
                    return Err(HarnessError::Invalid(format!("k-cspip needs 1 <= k <= rows (k = {k}, rows = {rows}) and max_capacity >= 1")));
                }
            }
            GeneratorSpec::KHypergraph { vertices, edges, k } => {
                if k == 0 || k > vertices || binomial(vertices, k) < edges as f64 {
                    return Err(HarnessError::Invalid(format!(
                        "cannot draw {edges} distinct {k}-subsets of {vertices} vertices"
                    )));
                }
            }
            _ => {}
        }
        if let GeneratorSpec::PlantedBipartite { left, right, planted, .. } = *self {
            if planted > left.min(right) {
                return Err(HarnessError::Invalid(format!("planted matching of size {planted} does not fit")));
            }
        }
        Ok(())
    }

    fn attempt(&self, seed: u64) -> Result<(PackingInstance, Vec<usize>), InstanceError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let matroid = |d: Result<MatroidDescription, String>| PackingInstance::matroid(d.map_err(InstanceError::Meta)?);
        let inst = match *self {
            GeneratorSpec::Bipartite { left, right, edge_prob } => {
                PackingInstance::bipartite(left, right, random_bipartite(left, right, edge_prob, &mut rng))?
            }
            GeneratorSpec::Graph { vertices, edge_prob } => {
                PackingInstance::graph(vertices, random_graph(vertices, edge_prob, &mut rng))?
            }
            GeneratorSpec::KHypergraph { vertices, edges, k } => {
                let mut chosen: Vec<Vec<usize>> = Vec::with_capacity(edges);
                while chosen.len() < edges {
                    let mut e = sample(&mut rng, vertices, k).into_vec();
                    e.sort_unstable();
                    if !chosen.contains(&e) {
                        chosen.push(e);
                    }
                }
                PackingInstance::hypergraph(vertices, k, chosen)?
            }
            GeneratorSpec::UniformMatroid { ground_size, rank } => matroid(MatroidDescription::uniform(ground_size, rank))?,
            GeneratorSpec::PartitionMatroid { blocks, block_size, capacity } => {
                let sets = (0..blocks).map(|b| (b * block_size..(b + 1) * block_size).collect()).collect();
                matroid(MatroidDescription::partition(sets, vec![capacity; blocks]))?
            }
            GeneratorSpec::GraphicMatroid { vertices, edge_prob } => {
                matroid(MatroidDescription::graphic(vertices, random_graph(vertices, edge_prob, &mut rng)))?
            }
            GeneratorSpec::RandomPacking { rows, cols, max_capacity, density } => {
                let b: Vec<u64> = (0..rows).map(|_| rng.gen_range(1..=max_capacity)).collect();
                let mut a = vec![vec![0u64; cols]; rows];
                for j in 0..cols {
                    let tight = rng.gen_range(0..rows);
                    for i in 0..rows {
                        a[i][j] = if i == tight {
                            b[i]
                        } else if rng.gen_bool(density) {
                            rng.gen_range(1..=b[i])
                        } else {
                            0
                        };
                    }
                }
                PackingInstance::generic(a, b)?
            }
            GeneratorSpec::KCspip { rows, cols, k, max_capacity } => {
                let b: Vec<u64> = (0..rows).map(|_| rng.gen_range(1..=max_capacity)).collect();
                let mut a = vec![vec![0u64; cols]; rows];
                for j in 0..cols {
                    let support = rng.gen_range(1..=k);
                    for i in sample(&mut rng, rows, support) {
                        a[i][j] = rng.gen_range(1..=b[i]);
                    }
                }
                PackingInstance::column_sparse(a, b, k)?
            }
            GeneratorSpec::PlantedBipartite { left, right, planted, edge_prob } => {
                let mut edges: Vec<(usize, usize)> = (0..planted).map(|i| (i, left + i)).collect();
                edges.extend(
                    random_bipartite(left, right, edge_prob, &mut rng)
                        .into_iter()
                        .filter(|&(u, v)| !(u < planted && v == left + u)),
                );
                let inst = PackingInstance::bipartite(left, right, edges)?;
                return Ok((inst, (0..planted).collect()));
            }
            GeneratorSpec::Explicit { .. } => unreachable!("explicit files are read, not generated"),
        };
        Ok((inst, Vec::new()))
    }
}

/// Generates and validates an instance. A draw failing the standing assumptions is
/// redrawn with a bumped sub-seed, up to [`MAX_RETRIES`] attempts.
pub fn generate(spec: &GeneratorSpec, seed: u64) -> Result<Generated, HarnessError> {
    spec.check()?;
    if let GeneratorSpec::Explicit { path } = spec {
        let file = read_instance(path)?;
        let (instance, objective) = file.build()?;
        validate_instance(&instance).into_result()?;
        return Ok(Generated {
            instance,
            objective,
            seed,
            attempts: 1,
            planted: Vec::new(),
        });
    }
    let mut last = String::new();
    for attempt in 0..MAX_RETRIES {
        let sub = seed.wrapping_add(attempt.wrapping_mul(0x9e37_79b9_7f4a_7c15));
        match spec.attempt(sub) {
            Ok((instance, planted)) => match validate_instance(&instance).into_result() {
                Ok(_) => {
                    return Ok(Generated {
                        instance,
                        objective: None,
                        seed: sub,
                        attempts: attempt + 1,
                        planted,
                    })
                }
                Err(e) => last = e.to_string(),
            },
            Err(e) => last = e.to_string(),
        }
    }
    Err(HarnessError::Invalid(format!(
        "{} generator failed validation {MAX_RETRIES} times; last error: {last}",
        spec.kind()
    )))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Distribution {
    #[default]
    TwoPoint,
    UpperAtomUniformRest,
}

/// Objective intervals: `c_minus` for every item, `c_plus` drawn per item uniformly
/// from `[c_plus_min, c_plus_max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveSpec {
    pub c_minus: u64,
    pub c_plus_min: u64,
    pub c_plus_max: u64,
    pub p: f64,
    #[serde(default)]
    pub distribution: Distribution,
}

impl ObjectiveSpec {
    pub fn build(&self, m: usize, seed: u64) -> Result<StochasticObjective, HarnessError> {
        if self.c_plus_min > self.c_plus_max || self.c_minus > self.c_plus_min {
            return Err(HarnessError::Invalid(format!(
                "objective needs c_minus <= c_plus_min <= c_plus_max (got {}, {}, {})",
                self.c_minus, self.c_plus_min, self.c_plus_max
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c_plus = (0..m).map(|_| rng.gen_range(self.c_plus_min..=self.c_plus_max)).collect();
        Ok(StochasticObjective::new(vec![self.c_minus; m], c_plus, self.p)?)
    }
}

/// Instances across every family, used for the LP-relative contract checks.
pub fn corpus(seed: u64) -> Vec<(String, PackingInstance)> {
    let specs = [
        GeneratorSpec::Bipartite { left: 5, right: 6, edge_prob: 0.5 },
        GeneratorSpec::Bipartite { left: 10, right: 10, edge_prob: 0.3 },
        GeneratorSpec::Graph { vertices: 7, edge_prob: 0.5 },
        GeneratorSpec::Graph { vertices: 12, edge_prob: 0.3 },
        GeneratorSpec::Graph { vertices: 20, edge_prob: 0.2 },
        GeneratorSpec::KHypergraph { vertices: 6, edges: 4, k: 3 },
        GeneratorSpec::KHypergraph { vertices: 9, edges: 14, k: 3 },
        GeneratorSpec::KHypergraph { vertices: 8, edges: 12, k: 4 },
        GeneratorSpec::UniformMatroid { ground_size: 8, rank: 3 },
        GeneratorSpec::PartitionMatroid { blocks: 3, block_size: 4, capacity: 2 },
        GeneratorSpec::GraphicMatroid { vertices: 6, edge_prob: 0.6 },
        GeneratorSpec::RandomPacking { rows: 6, cols: 12, max_capacity: 3, density: 0.3 },
        GeneratorSpec::RandomPacking { rows: 10, cols: 18, max_capacity: 2, density: 0.2 },
        GeneratorSpec::KCspip { rows: 6, cols: 14, k: 2, max_capacity: 4 },
        GeneratorSpec::KCspip { rows: 8, cols: 16, k: 3, max_capacity: 3 },
    ];
    let mut out = Vec::new();
    for (i, spec) in specs.iter().enumerate() {
        for rep in 0..4u64 {
            let s = seed ^ (i as u64) << 32 ^ rep;
            let g = generate(spec, s).expect("corpus generators are valid");
            out.push((format!("{}-{i}-{rep}", spec.kind()), g.instance));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use spip_core::adapters::make_adapter;
    use spip_core::instance::Family;

    #[test]
    fn complete_k22() {
        let g = generate(&GeneratorSpec::Bipartite { left: 2, right: 2, edge_prob: 1.0 }, 1).unwrap();
        assert_eq!((g.instance.rows(), g.instance.cols()), (4, 4));
        assert_eq!(g.attempts, 1);
    }

    #[test]
    fn hypergraph_six_four_three() {
        let g = generate(&GeneratorSpec::KHypergraph { vertices: 6, edges: 4, k: 3 }, 9).unwrap();
        assert_eq!(g.instance.cols(), 4);
        assert!((0..4).all(|j| g.instance.column_support(j).len() == 3));
        assert!(validate_instance(&g.instance).passed());
    }

    #[test]
    fn uniform_matroid_goes_to_matroid_adapter() {
        let g = generate(&GeneratorSpec::UniformMatroid { ground_size: 8, rank: 3 }, 0).unwrap();
        assert_eq!(g.instance.family(), Family::Matroid);
        assert_eq!(make_adapter(&g.instance).unwrap().name(), "matroid-greedy");
    }

    #[test]
    fn deterministic_per_seed() {
        let spec = GeneratorSpec::RandomPacking { rows: 5, cols: 9, max_capacity: 3, density: 0.4 };
        assert_eq!(generate(&spec, 4).unwrap().instance, generate(&spec, 4).unwrap().instance);
        assert_ne!(generate(&spec, 4).unwrap().instance, generate(&spec, 5).unwrap().instance);
    }

    #[test]
    fn impossible_requests_are_refused() {
        assert!(generate(&GeneratorSpec::KHypergraph { vertices: 4, edges: 5, k: 3 }, 0).is_err());
        assert!(generate(&GeneratorSpec::Graph { vertices: 4, edge_prob: 1.5 }, 0).is_err());
        assert!(generate(&GeneratorSpec::KCspip { rows: 2, cols: 3, k: 3, max_capacity: 2 }, 0).is_err());
    }

    #[test]
    fn planted_matching_is_present() {
        let g = generate(
            &GeneratorSpec::PlantedBipartite { left: 40, right: 40, planted: 10, edge_prob: 0.05 },
            3,
        )
        .unwrap();
        assert_eq!(g.planted, (0..10).collect::<Vec<_>>());
        let mut x = vec![false; g.instance.cols()];
        for &j in &g.planted {
            x[j] = true;
        }
        assert!(g.instance.is_feasible(&x));
    }

    #[test]
    fn kcspip_columns_respect_k() {
        let g = generate(&GeneratorSpec::KCspip { rows: 6, cols: 20, k: 2, max_capacity: 4 }, 2).unwrap();
        assert!((0..20).all(|j| (1..=2).contains(&g.instance.column_support(j).len())));
    }

    #[test]
    fn objective_draws_upper_values_in_range() {
        let spec = ObjectiveSpec { c_minus: 0, c_plus_min: 1, c_plus_max: 2, p: 0.5, distribution: Distribution::TwoPoint };
        let obj = spec.build(100, 3).unwrap();
        assert!(obj.c_plus().iter().all(|&v| v == 1 || v == 2));
        assert!(obj.c_plus().contains(&1) && obj.c_plus().contains(&2));
        assert_eq!(obj.delta_c(), 2);
    }
}
