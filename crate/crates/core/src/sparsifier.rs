//! Vertex sparsification by random coloring, and the speedup wrapper that runs a
//! query strategy on the sparsified instance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::adapters::{make_adapter, AdapterError};
use crate::instance::{FamilyMeta, InstanceError, PackingInstance, QueryAccess, QueryOracle, StochasticObjective};
use crate::strategies::{
    iteration_bound, run_strategy, score, Mode, NoObserver, RunResult, StrategyConfig, StrategyError,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SparsifyError {
    #[error("invalid sparsification parameter: {0}")]
    Config(String),
    #[error("vertex count {n} is below 2k = {}", 2 * k)]
    TooFewVertices { n: usize, k: usize },
    #[error("family {0} has no hypergraph structure to sparsify")]
    Unsupported(String),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Adapter(#[from] AdapterError),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
}

/// `beta(k, eps, delta) = 2 e^{eps/k} ln(1/delta) / eps`.
pub fn beta(k: usize, epsilon: f64, delta: f64) -> f64 {
    2.0 * (epsilon / k as f64).exp() * (1.0 / delta).ln() / epsilon
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColoringConfig {
    pub k: usize,
    pub epsilon: f64,
    pub delta: f64,
    /// Upper bound on the rank of the independence system.
    pub s: usize,
    pub seed: u64,
}

impl ColoringConfig {
    pub fn validate(&self) -> Result<(), SparsifyError> {
        let open = |v: f64| v > 0.0 && v < 1.0;
        if self.k == 0 || self.s == 0 || !open(self.epsilon) || !open(self.delta) {
            return Err(SparsifyError::Config(format!("{self:?}")));
        }
        Ok(())
    }

    pub fn beta(&self) -> f64 {
        beta(self.k, self.epsilon, self.delta)
    }

    /// `ceil(beta k^2 s / delta)`, at least 1.
    pub fn num_colors(&self) -> usize {
        let k = self.k as f64;
        ((self.beta() * k * k * self.s as f64 / self.delta).ceil() as usize).max(1)
    }
}

/// A hypergraph whose hyperedges are the items of a matching-type instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Hypergraph {
    pub vertices: usize,
    pub k: usize,
    pub edges: Vec<Vec<usize>>,
}

impl Hypergraph {
    pub fn new(vertices: usize, k: usize, edges: Vec<Vec<usize>>) -> Result<Self, SparsifyError> {
        if let Some(e) = edges.iter().find(|e| e.len() != k || e.iter().any(|&v| v >= vertices)) {
            return Err(SparsifyError::Config(format!("hyperedge {e:?} is not a {k}-set of 0..{vertices}")));
        }
        Ok(Hypergraph { vertices, k, edges })
    }

    pub fn from_instance(inst: &PackingInstance) -> Result<Self, SparsifyError> {
        let pairs = |edges: &[(usize, usize)]| edges.iter().map(|&(u, v)| vec![u, v]).collect();
        match inst.meta() {
            FamilyMeta::Bipartite { left, right, edges } => Self::new(left + right, 2, pairs(edges)),
            FamilyMeta::Graph { vertices, edges } => Self::new(*vertices, 2, pairs(edges)),
            FamilyMeta::Hypergraph { vertices, k, edges } => Self::new(*vertices, *k, edges.clone()),
            _ => Err(SparsifyError::Unsupported(inst.family().to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparsifiedInstance {
    pub num_colors: usize,
    /// Color of each original vertex, in `0..num_colors`.
    pub colors: Vec<usize>,
    /// Original ids of the colorful hyperedges; item `j` of `instance` is
    /// `surviving[j]`.
    pub surviving: Vec<usize>,
    /// Original color of each vertex of `instance` (colors used by survivors only).
    pub color_ids: Vec<usize>,
    /// Matching instance over the used colors.
    pub instance: PackingInstance,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SparsificationReport {
    pub k: usize,
    pub num_colors: usize,
    pub colors_used: usize,
    pub original_edges: usize,
    pub surviving_edges: usize,
    pub survival_fraction: f64,
    pub induced_family: String,
}

impl SparsifiedInstance {
    pub fn report(&self, k: usize, original_edges: usize) -> SparsificationReport {
        SparsificationReport {
            k,
            num_colors: self.num_colors,
            colors_used: self.color_ids.len(),
            original_edges,
            surviving_edges: self.surviving.len(),
            survival_fraction: if original_edges == 0 {
                1.0
            } else {
                self.surviving.len() as f64 / original_edges as f64
            },
            induced_family: self.instance.family().to_string(),
        }
    }

    /// Size of the largest subset of `items` (original ids) that survives and is
    /// independent in the sparsified instance. Exhaustive over subsets (at most 20
    /// surviving items).
    pub fn best_surviving_subset(&self, items: &[usize]) -> usize {
        let local: Vec<usize> = items
            .iter()
            .filter_map(|e| self.surviving.iter().position(|s| s == e))
            .collect();
        assert!(local.len() <= 20, "subset search is exponential");
        let m = self.instance.cols();
        let mut best = 0;
        for mask in 0u32..(1 << local.len()) {
            let size = mask.count_ones() as usize;
            if size <= best {
                continue;
            }
            let mut x = vec![false; m];
            for (t, &j) in local.iter().enumerate() {
                x[j] = mask >> t & 1 == 1;
            }
            if self.instance.is_feasible(&x) {
                best = size;
            }
        }
        best
    }
}

/// Colors every vertex uniformly from `config.num_colors()` colors and keeps the
/// colorful hyperedges.
pub fn sparsify(h: &Hypergraph, config: &ColoringConfig) -> Result<SparsifiedInstance, SparsifyError> {
    config.validate()?;
    if config.k != h.k {
        return Err(SparsifyError::Config(format!(
            "coloring built for k = {} but the hypergraph is {}-uniform",
            config.k, h.k
        )));
    }
    sparsify_with_colors(h, config.num_colors(), config.seed)
}

/// Same as [`sparsify`] with an explicit color count.
pub fn sparsify_with_colors(
    h: &Hypergraph,
    num_colors: usize,
    seed: u64,
) -> Result<SparsifiedInstance, SparsifyError> {
    if h.vertices < 2 * h.k {
        return Err(SparsifyError::TooFewVertices { n: h.vertices, k: h.k });
    }
    if num_colors == 0 {
        return Err(SparsifyError::Config("at least one color is required".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let colors: Vec<usize> = (0..h.vertices).map(|_| rng.gen_range(0..num_colors)).collect();
    let surviving: Vec<usize> = (0..h.edges.len())
        .filter(|&j| {
            let mut cs: Vec<usize> = h.edges[j].iter().map(|&v| colors[v]).collect();
            cs.sort_unstable();
            cs.windows(2).all(|w| w[0] != w[1])
        })
        .collect();

    let mut color_ids: Vec<usize> = surviving
        .iter()
        .flat_map(|&j| h.edges[j].iter().map(|&v| colors[v]))
        .collect();
    color_ids.sort_unstable();
    color_ids.dedup();
    let local = |c: usize| color_ids.binary_search(&c).expect("used color");
    let edges: Vec<Vec<usize>> = surviving
        .iter()
        .map(|&j| h.edges[j].iter().map(|&v| local(colors[v])).collect())
        .collect();
    for e in &edges {
        let mut s = e.clone();
        s.sort_unstable();
        s.dedup();
        assert_eq!(s.len(), h.k, "surviving hyperedge must be colorful");
    }
    let instance = induced_instance(color_ids.len(), h.k, edges)?;
    Ok(SparsifiedInstance {
        num_colors,
        colors,
        surviving,
        color_ids,
        instance,
    })
}

/// Bipartite when the color graph is 2-colorable, a general graph for other `k = 2`
/// cases, a hypergraph otherwise.
fn induced_instance(n: usize, k: usize, edges: Vec<Vec<usize>>) -> Result<PackingInstance, InstanceError> {
    if k != 2 {
        return PackingInstance::hypergraph(n, k, edges);
    }
    let pairs: Vec<(usize, usize)> = edges.iter().map(|e| (e[0], e[1])).collect();
    match two_coloring(n, &pairs) {
        Some(side) => {
            let left: Vec<usize> = (0..n).filter(|&v| !side[v]).collect();
            let right: Vec<usize> = (0..n).filter(|&v| side[v]).collect();
            let mut id = vec![0; n];
            for (i, &v) in left.iter().enumerate() {
                id[v] = i;
            }
            for (i, &v) in right.iter().enumerate() {
                id[v] = left.len() + i;
            }
            let oriented = pairs
                .iter()
                .map(|&(u, v)| if side[u] { (id[v], id[u]) } else { (id[u], id[v]) })
                .collect();
            PackingInstance::bipartite(left.len(), right.len(), oriented)
        }
        None => PackingInstance::graph(n, pairs),
    }
}

fn two_coloring(n: usize, edges: &[(usize, usize)]) -> Option<Vec<bool>> {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut side: Vec<Option<bool>> = vec![None; n];
    for start in 0..n {
        if side[start].is_some() {
            continue;
        }
        side[start] = Some(false);
        let mut stack = vec![start];
        while let Some(u) = stack.pop() {
            let su = side[u].expect("visited");
            for &v in &adj[u] {
                match side[v] {
                    None => {
                        side[v] = Some(!su);
                        stack.push(v);
                    }
                    Some(sv) if sv == su => return None,
                    Some(_) => {}
                }
            }
        }
    }
    Some(side.into_iter().map(|s| s.unwrap_or(false)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FallingFactorial {
    pub ratio: f64,
    pub bound: f64,
    pub pass: bool,
}

/// `n (n-1) ... (n-k+1) / n^k` against `exp(-k^2 / n)`.
pub fn falling_factorial_lower_bound(n: usize, k: usize) -> FallingFactorial {
    assert!(1 <= k && k <= n, "requires 1 <= k <= n");
    let nf = n as f64;
    let ratio = (0..k).map(|i| (nf - i as f64) / nf).product::<f64>();
    let bound = (-((k * k) as f64) / nf).exp();
    FallingFactorial {
        ratio,
        bound,
        pass: ratio >= bound,
    }
}

/// Query gateway over a sparsified instance: item `j` is original item `map[j]`.
pub struct MappedOracle<'a> {
    inner: &'a mut QueryOracle,
    map: &'a [usize],
}

impl<'a> MappedOracle<'a> {
    pub fn new(inner: &'a mut QueryOracle, map: &'a [usize]) -> Self {
        MappedOracle { inner, map }
    }
}

impl QueryAccess for MappedOracle<'_> {
    fn items(&self) -> usize {
        self.map.len()
    }

    fn query(&mut self, item: usize) -> u64 {
        self.inner.query(self.map[item])
    }

    fn revealed_value(&self, item: usize) -> Option<u64> {
        self.inner.revealed_value(self.map[item])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeedupParams {
    pub mode: Mode,
    pub epsilon: f64,
    pub delta: f64,
    /// Multiplies `ln(k / (p alpha eps' delta'))`.
    pub log_m_constant: f64,
    pub coloring_seed: u64,
    pub strategy_seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeedupResult {
    /// Scored on the original instance.
    pub result: RunResult,
    pub report: SparsificationReport,
    pub s: usize,
    pub epsilon_prime: f64,
    pub delta_prime: f64,
    pub t: usize,
}

/// Estimate `s` from the cardinality relaxation, sparsify with
/// `eps' = eps / (1 + c_max)` and `delta' = delta / 4`, run the strategy on the
/// sparsified instance, and map the answer back.
pub fn speedup_run(
    inst: &PackingInstance,
    obj: &StochasticObjective,
    oracle: &mut QueryOracle,
    params: &SpeedupParams,
) -> Result<SpeedupResult, SparsifyError> {
    let h = Hypergraph::from_instance(inst)?;
    let adapter = make_adapter(inst)?;
    let alpha = adapter.nominal_alpha();
    let s = adapter.solve_relaxation(&vec![1; inst.cols()])?.value;
    let s = ((s - 1e-9).ceil() as usize).max(1);
    let epsilon_prime = params.epsilon / (1.0 + obj.c_max() as f64);
    let delta_prime = params.delta / 4.0;
    let coloring = ColoringConfig {
        k: h.k,
        epsilon: epsilon_prime,
        delta: delta_prime,
        s,
        seed: params.coloring_seed,
    };
    let sparse = sparsify(&h, &coloring)?;
    let report = sparse.report(h.k, h.edges.len());

    let log_m = params.log_m_constant
        * (h.k as f64 / (obj.p() * alpha * epsilon_prime * delta_prime)).ln().max(0.0);
    let t = iteration_bound(obj.delta_c() as f64, epsilon_prime, obj.p(), log_m, delta_prime)?;
    let config = StrategyConfig {
        mode: params.mode,
        t,
        epsilon: epsilon_prime,
        epsilon_prime,
        delta: delta_prime,
        strategy_seed: params.strategy_seed,
        derandomize_integral: false,
    };
    let sub_obj = obj.restrict(&sparse.surviving);
    let sub_adapter = make_adapter(&sparse.instance)?;
    let outcome = {
        let mut mapped = MappedOracle::new(oracle, &sparse.surviving);
        run_strategy(&mut mapped, &sub_obj, sub_adapter.as_ref(), &config, &mut NoObserver)?
    };
    let mut lifted = outcome.clone();
    lifted.solution = crate::adapters::IntegralSolution::from_items(
        &outcome
            .solution
            .items()
            .iter()
            .map(|&j| sparse.surviving[j])
            .collect::<Vec<_>>(),
        obj.c_minus(),
    );
    let result = score(inst, oracle, adapter.as_ref(), lifted, t + 1)?;
    debug_assert!(inst.is_feasible(&result.x_hat));
    Ok(SpeedupResult {
        result,
        report,
        s,
        epsilon_prime,
        delta_prime,
        t,
    })
}
