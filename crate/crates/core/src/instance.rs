//! Packing instances, stochastic objectives, realizations and the query oracle.
//!
//! A [`PackingInstance`] is the constraint system `A x <= b, x in {0,1}^m` with
//! nonnegative integer data. The objective is only known through interval bounds
//! ([`StochasticObjective`]); nature fixes a hidden [`Realization`] and strategies
//! learn individual coefficients by querying a [`QueryOracle`].

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adapters::matroid::MatroidDescription;

/// Problem family tag. Selects the adapter used for relaxations and rounding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Generic,
    BipartiteMatching,
    NonbipartiteMatching,
    KHypergraph,
    KCspip,
    Matroid,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Generic => "generic",
            Family::BipartiteMatching => "bipartite-matching",
            Family::NonbipartiteMatching => "nonbipartite-matching",
            Family::KHypergraph => "k-hypergraph",
            Family::KCspip => "k-cspip",
            Family::Matroid => "matroid",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Family-specific description of the combinatorial structure behind `A`.
#[derive(Debug, Clone, PartialEq)]
pub enum FamilyMeta {
    None,
    /// Left vertices are `0..left`, right vertices `left..left + right`.
    Bipartite {
        left: usize,
        right: usize,
        edges: Vec<(usize, usize)>,
    },
    Graph {
        vertices: usize,
        edges: Vec<(usize, usize)>,
    },
    Hypergraph {
        vertices: usize,
        k: usize,
        edges: Vec<Vec<usize>>,
    },
    ColumnSparse {
        k: usize,
    },
    Matroid(MatroidDescription),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InstanceError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("entry ({row}, {col}) out of range for a {rows}x{cols} matrix")]
    EntryOutOfRange {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },
    #[error("invalid family metadata: {0}")]
    Meta(String),
    #[error("invalid objective: {0}")]
    Objective(String),
    #[error("instance violates standing assumptions: {0}")]
    Assumption(String),
}

/// Packing constraint system `A x <= b` over `m` binary items.
#[derive(Debug, Clone, PartialEq)]
pub struct PackingInstance {
    rows: usize,
    cols: usize,
    a: Vec<u64>,
    b: Vec<u64>,
    family: Family,
    meta: FamilyMeta,
}

impl PackingInstance {
    /// Builds an instance from dense rows. Only structural consistency is checked here;
    /// the standing assumptions are checked by [`validate_instance`].
    pub fn from_dense(
        a: Vec<Vec<u64>>,
        b: Vec<u64>,
        family: Family,
        meta: FamilyMeta,
    ) -> Result<Self, InstanceError> {
        let rows = b.len();
        if a.len() != rows {
            return Err(InstanceError::Dimension(format!(
                "A has {} rows but b has {} entries",
                a.len(),
                rows
            )));
        }
        let cols = a.first().map_or(0, Vec::len);
        if let Some((i, r)) = a.iter().enumerate().find(|(_, r)| r.len() != cols) {
            return Err(InstanceError::Dimension(format!(
                "row {i} has {} columns, expected {cols}",
                r.len()
            )));
        }
        Self::from_parts(rows, cols, a.concat(), b, family, meta)
    }

    /// Builds an instance from sparse `(row, col, value)` triples. Repeated
    /// coordinates are rejected.
    pub fn from_triples(
        rows: usize,
        cols: usize,
        triples: &[(usize, usize, u64)],
        b: Vec<u64>,
        family: Family,
        meta: FamilyMeta,
    ) -> Result<Self, InstanceError> {
        if b.len() != rows {
            return Err(InstanceError::Dimension(format!(
                "b has {} entries but n = {rows}",
                b.len()
            )));
        }
        let mut a = vec![0u64; rows * cols];
        let mut seen = vec![false; rows * cols];
        for &(row, col, value) in triples {
            if row >= rows || col >= cols {
                return Err(InstanceError::EntryOutOfRange {
                    row,
                    col,
                    rows,
                    cols,
                });
            }
            let idx = row * cols + col;
            if seen[idx] {
                return Err(InstanceError::Dimension(format!(
                    "duplicate entry for ({row}, {col})"
                )));
            }
            seen[idx] = true;
            a[idx] = value;
        }
        Self::from_parts(rows, cols, a, b, family, meta)
    }

    fn from_parts(
        rows: usize,
        cols: usize,
        a: Vec<u64>,
        b: Vec<u64>,
        family: Family,
        meta: FamilyMeta,
    ) -> Result<Self, InstanceError> {
        let inst = PackingInstance {
            rows,
            cols,
            a,
            b,
            family,
            meta,
        };
        inst.check_meta()?;
        Ok(inst)
    }

    /// Vertex-edge incidence system of a bipartite graph.
    pub fn bipartite(
        left: usize,
        right: usize,
        edges: Vec<(usize, usize)>,
    ) -> Result<Self, InstanceError> {
        let n = left + right;
        let mut triples = Vec::with_capacity(2 * edges.len());
        for (j, &(u, v)) in edges.iter().enumerate() {
            if u >= left || v < left || v >= n {
                return Err(InstanceError::Meta(format!(
                    "edge {j} = ({u}, {v}) does not join the two sides"
                )));
            }
            triples.push((u, j, 1));
            triples.push((v, j, 1));
        }
        let m = edges.len();
        Self::from_triples(
            n,
            m,
            &triples,
            vec![1; n],
            Family::BipartiteMatching,
            FamilyMeta::Bipartite { left, right, edges },
        )
    }

    /// Degree constraints of a general graph. Odd-set constraints are added by the
    /// non-bipartite adapter, not stored here.
    pub fn graph(vertices: usize, edges: Vec<(usize, usize)>) -> Result<Self, InstanceError> {
        let mut triples = Vec::with_capacity(2 * edges.len());
        for (j, &(u, v)) in edges.iter().enumerate() {
            if u == v || u >= vertices || v >= vertices {
                return Err(InstanceError::Meta(format!("edge {j} = ({u}, {v}) is invalid")));
            }
            triples.push((u, j, 1));
            triples.push((v, j, 1));
        }
        let m = edges.len();
        Self::from_triples(
            vertices,
            m,
            &triples,
            vec![1; vertices],
            Family::NonbipartiteMatching,
            FamilyMeta::Graph { vertices, edges },
        )
    }

    /// Vertex constraints of a `k`-uniform hypergraph.
    pub fn hypergraph(
        vertices: usize,
        k: usize,
        edges: Vec<Vec<usize>>,
    ) -> Result<Self, InstanceError> {
        let mut triples = Vec::new();
        for (j, e) in edges.iter().enumerate() {
            for &v in e {
                if v >= vertices {
                    return Err(InstanceError::Meta(format!(
                        "hyperedge {j} references vertex {v} >= {vertices}"
                    )));
                }
                triples.push((v, j, 1));
            }
        }
        let m = edges.len();
        Self::from_triples(
            vertices,
            m,
            &triples,
            vec![1; vertices],
            Family::KHypergraph,
            FamilyMeta::Hypergraph { vertices, k, edges },
        )
    }

    /// Explicit polytope description of a matroid (see [`MatroidDescription::constraint_rows`]).
    pub fn matroid(desc: MatroidDescription) -> Result<Self, InstanceError> {
        let (rows, b) = desc.constraint_rows().map_err(InstanceError::Meta)?;
        let triples: Vec<_> = rows
            .iter()
            .enumerate()
            .flat_map(|(i, set)| set.iter().map(move |&e| (i, e, 1)))
            .collect();
        Self::from_triples(
            rows.len(),
            desc.ground_size(),
            &triples,
            b,
            Family::Matroid,
            FamilyMeta::Matroid(desc),
        )
    }

    pub fn generic(a: Vec<Vec<u64>>, b: Vec<u64>) -> Result<Self, InstanceError> {
        Self::from_dense(a, b, Family::Generic, FamilyMeta::None)
    }

    pub fn column_sparse(a: Vec<Vec<u64>>, b: Vec<u64>, k: usize) -> Result<Self, InstanceError> {
        Self::from_dense(a, b, Family::KCspip, FamilyMeta::ColumnSparse { k })
    }

    fn check_meta(&self) -> Result<(), InstanceError> {
        let bad = |s: String| Err(InstanceError::Meta(s));
        match (&self.family, &self.meta) {
            (Family::Generic, FamilyMeta::None) => Ok(()),
            (Family::BipartiteMatching, FamilyMeta::Bipartite { left, right, edges }) => {
                if left + right != self.rows || edges.len() != self.cols {
                    return bad(format!(
                        "bipartite meta ({left}+{right} vertices, {} edges) does not match a {}x{} matrix",
                        edges.len(),
                        self.rows,
                        self.cols
                    ));
                }
                Ok(())
            }
            (Family::NonbipartiteMatching, FamilyMeta::Graph { vertices, edges }) => {
                if *vertices != self.rows || edges.len() != self.cols {
                    return bad("graph meta does not match matrix dimensions".into());
                }
                Ok(())
            }
            (Family::KHypergraph, FamilyMeta::Hypergraph { vertices, k, edges }) => {
                if *vertices != self.rows || edges.len() != self.cols {
                    return bad("hypergraph meta does not match matrix dimensions".into());
                }
                if let Some(j) = edges.iter().position(|e| {
                    let mut s = e.clone();
                    s.sort_unstable();
                    s.dedup();
                    s.len() != *k
                }) {
                    return bad(format!("hyperedge {j} does not have {k} distinct vertices"));
                }
                Ok(())
            }
            (Family::KCspip, FamilyMeta::ColumnSparse { k }) => {
                if *k == 0 {
                    return bad("column sparsity k must be positive".into());
                }
                Ok(())
            }
            (Family::Matroid, FamilyMeta::Matroid(desc)) => {
                if desc.ground_size() != self.cols {
                    return bad("matroid ground set size does not match column count".into());
                }
                Ok(())
            }
            (f, _) => bad(format!("metadata does not belong to family {f}")),
        }
    }

    /// Number of constraint rows `n`.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of items `m`.
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn entry(&self, row: usize, col: usize) -> u64 {
        self.a[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[u64] {
        &self.a[row * self.cols..(row + 1) * self.cols]
    }

    pub fn capacities(&self) -> &[u64] {
        &self.b
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn meta(&self) -> &FamilyMeta {
        &self.meta
    }

    /// Rows with a positive entry in column `col`.
    pub fn column_support(&self, col: usize) -> Vec<usize> {
        (0..self.rows).filter(|&i| self.entry(i, col) > 0).collect()
    }

    /// Nonzero entries as `(row, col, value)`, row-major.
    pub fn triples(&self) -> Vec<(usize, usize, u64)> {
        let mut out = Vec::new();
        for i in 0..self.rows {
            for j in 0..self.cols {
                let v = self.entry(i, j);
                if v != 0 {
                    out.push((i, j, v));
                }
            }
        }
        out
    }

    /// Whether `x` (indicator of chosen items) satisfies `A x <= b`.
    pub fn is_feasible(&self, x: &[bool]) -> bool {
        (0..self.rows).all(|i| {
            let load: u64 = (0..self.cols)
                .filter(|&j| x[j])
                .map(|j| self.entry(i, j))
                .sum();
            load <= self.b[i]
        })
    }

    /// Sampling scale `w = max_j min_{i: a_ij > 0} b_i / a_ij`. Infinite when some
    /// column is all zero.
    pub fn column_scale(&self) -> f64 {
        (0..self.cols)
            .map(|j| self.column_bound(j))
            .fold(0.0, f64::max)
    }

    fn column_bound(&self, j: usize) -> f64 {
        (0..self.rows)
            .filter(|&i| self.entry(i, j) > 0)
            .map(|i| self.b[i] as f64 / self.entry(i, j) as f64)
            .fold(f64::INFINITY, f64::min)
    }
}

/// One failed standing assumption, with the row/column that witnesses it.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// Condition a: `b_i >= 1`.
    ZeroCapacity { row: usize },
    /// Condition b: `A chi_j <= b`.
    ColumnExceedsCapacity { col: usize, row: usize },
    /// Condition c: no row with `a_ij = b_i`, so `x_j <= 1` is not implied.
    NoTightRow { col: usize },
    /// k-cspip: a column without any positive entry leaves `x_j` unbounded.
    UnboundedColumn { col: usize },
    /// k-cspip: more than `k` nonzeros in a column.
    ColumnTooDense { col: usize, nonzeros: usize, k: usize },
}

impl Violation {
    pub fn condition(&self) -> char {
        match self {
            Violation::ZeroCapacity { .. } => 'a',
            Violation::ColumnExceedsCapacity { .. } => 'b',
            Violation::NoTightRow { .. }
            | Violation::UnboundedColumn { .. }
            | Violation::ColumnTooDense { .. } => 'c',
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ZeroCapacity { row } => write!(f, "(a) b[{row}] = 0"),
            Violation::ColumnExceedsCapacity { col, row } => {
                write!(f, "(b) column {col} exceeds capacity of row {row}")
            }
            Violation::NoTightRow { col } => {
                write!(f, "(c) column {col} has no row with a_ij = b_i")
            }
            Violation::UnboundedColumn { col } => write!(f, "(c) column {col} is all zero"),
            Violation::ColumnTooDense { col, nonzeros, k } => {
                write!(f, "(c) column {col} has {nonzeros} nonzeros, more than k = {k}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Recorded for k-cspip instances only.
    pub w_scale: Option<f64>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<Self, InstanceError> {
        if self.passed() {
            Ok(self)
        } else {
            let msg = self
                .violations
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join("; ");
            Err(InstanceError::Assumption(msg))
        }
    }
}

/// Checks the standing assumptions on `(A, b)`. Structural problems are caught at
/// construction, so this only reports assumption violations.
pub fn validate_instance(inst: &PackingInstance) -> ValidationReport {
    let mut violations = Vec::new();
    for (row, &cap) in inst.b.iter().enumerate() {
        if cap == 0 {
            violations.push(Violation::ZeroCapacity { row });
        }
    }
    for col in 0..inst.cols {
        for row in 0..inst.rows {
            if inst.entry(row, col) > inst.b[row] {
                violations.push(Violation::ColumnExceedsCapacity { col, row });
            }
        }
    }
    let mut w_scale = None;
    if inst.family == Family::KCspip {
        let k = match inst.meta {
            FamilyMeta::ColumnSparse { k } => k,
            _ => usize::MAX,
        };
        for col in 0..inst.cols {
            let nonzeros = inst.column_support(col).len();
            if nonzeros == 0 {
                violations.push(Violation::UnboundedColumn { col });
            } else if nonzeros > k {
                violations.push(Violation::ColumnTooDense { col, nonzeros, k });
            }
        }
        let w = inst.column_scale();
        if w.is_finite() {
            w_scale = Some(w.max(1.0));
        }
    } else {
        for col in 0..inst.cols {
            let tight = (0..inst.rows).any(|i| inst.entry(i, col) == inst.b[i] && inst.b[i] > 0);
            if !tight {
                violations.push(Violation::NoTightRow { col });
            }
        }
    }
    ValidationReport {
        violations,
        w_scale,
    }
}

/// Interval bounds `c_minus <= c <= c_plus` and the lower bound `p` on the
/// probability that an item realizes at its upper end.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticObjective {
    c_minus: Vec<u64>,
    c_plus: Vec<u64>,
    p: f64,
    delta_c: u64,
}

impl StochasticObjective {
    pub fn new(c_minus: Vec<u64>, c_plus: Vec<u64>, p: f64) -> Result<Self, InstanceError> {
        if c_minus.len() != c_plus.len() {
            return Err(InstanceError::Objective(format!(
                "c_minus has {} entries, c_plus has {}",
                c_minus.len(),
                c_plus.len()
            )));
        }
        if !(p > 0.0 && p <= 1.0) {
            return Err(InstanceError::Objective(format!("p = {p} is not in (0, 1]")));
        }
        if let Some(j) = (0..c_minus.len()).find(|&j| c_minus[j] > c_plus[j]) {
            return Err(InstanceError::Objective(format!(
                "item {j}: c_minus = {} > c_plus = {}",
                c_minus[j], c_plus[j]
            )));
        }
        let delta_c = c_minus
            .iter()
            .zip(&c_plus)
            .map(|(lo, hi)| hi - lo)
            .max()
            .unwrap_or(0);
        Ok(StochasticObjective {
            c_minus,
            c_plus,
            p,
            delta_c,
        })
    }

    /// Same interval `[lo, hi]` for all `m` items.
    pub fn uniform(m: usize, lo: u64, hi: u64, p: f64) -> Result<Self, InstanceError> {
        Self::new(vec![lo; m], vec![hi; m], p)
    }

    pub fn len(&self) -> usize {
        self.c_minus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c_minus.is_empty()
    }

    pub fn c_minus(&self) -> &[u64] {
        &self.c_minus
    }

    pub fn c_plus(&self) -> &[u64] {
        &self.c_plus
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// `max_j (c_plus_j - c_minus_j)`.
    pub fn delta_c(&self) -> u64 {
        self.delta_c
    }

    pub fn c_max(&self) -> u64 {
        self.c_plus.iter().copied().max().unwrap_or(0)
    }

    /// Restriction to a subset of items, in the given order.
    pub fn restrict(&self, items: &[usize]) -> StochasticObjective {
        let c_minus: Vec<u64> = items.iter().map(|&j| self.c_minus[j]).collect();
        let c_plus: Vec<u64> = items.iter().map(|&j| self.c_plus[j]).collect();
        StochasticObjective::new(c_minus, c_plus, self.p).expect("restriction of a valid objective")
    }
}

/// Nature's hidden draw of every coefficient.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Realization {
    pub c: Vec<u64>,
    pub seed: u64,
}

/// Per-item distribution on the integer interval `[lo, hi]` with mass at least `p`
/// on `hi`.
pub trait ItemDistribution {
    fn sample<R: Rng + ?Sized>(&self, lo: u64, hi: u64, p: f64, rng: &mut R) -> u64;
}

/// Canonical distribution: `hi` with probability `p`, `lo` otherwise.
#[derive(Debug, Clone, Copy, Default)]
pub struct TwoPoint;

impl ItemDistribution for TwoPoint {
    fn sample<R: Rng + ?Sized>(&self, lo: u64, hi: u64, p: f64, rng: &mut R) -> u64 {
        if rng.gen::<f64>() < p {
            hi
        } else {
            lo
        }
    }
}

/// `hi` with probability `p`, otherwise uniform on `lo..hi` (or `lo` when `lo == hi`).
#[derive(Debug, Clone, Copy, Default)]
pub struct UpperAtomUniformRest;

impl ItemDistribution for UpperAtomUniformRest {
    fn sample<R: Rng + ?Sized>(&self, lo: u64, hi: u64, p: f64, rng: &mut R) -> u64 {
        if lo == hi || rng.gen::<f64>() < p {
            hi
        } else {
            rng.gen_range(lo..hi)
        }
    }
}

/// Draws a realization under the canonical two-point distribution.
pub fn sample_realization(obj: &StochasticObjective, seed: u64) -> Realization {
    sample_realization_with(obj, seed, &TwoPoint)
}

pub fn sample_realization_with<D: ItemDistribution>(
    obj: &StochasticObjective,
    seed: u64,
    dist: &D,
) -> Realization {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = obj
        .c_minus
        .iter()
        .zip(&obj.c_plus)
        .map(|(&lo, &hi)| {
            let v = dist.sample(lo, hi, obj.p, &mut rng);
            debug_assert!(lo <= v && v <= hi);
            v
        })
        .collect();
    Realization { c, seed }
}

/// What a strategy may do with nature: reveal items and read revealed values.
pub trait QueryAccess {
    fn items(&self) -> usize;
    /// Reveals `item` (free if already revealed) and returns its realized value.
    fn query(&mut self, item: usize) -> u64;
    fn revealed_value(&self, item: usize) -> Option<u64>;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryLedger {
    /// 0/1 per item: distinct reveals only.
    pub per_item: Vec<u32>,
    pub per_row: Vec<u64>,
    pub total: u64,
}

/// Holds the hidden realization and records every distinct reveal.
#[derive(Debug, Clone)]
pub struct QueryOracle {
    realization: Realization,
    revealed: Vec<bool>,
    order: Vec<usize>,
    col_rows: Vec<Vec<usize>>,
    ledger: QueryLedger,
}

impl QueryOracle {
    pub fn new(inst: &PackingInstance, realization: Realization) -> Self {
        assert_eq!(
            realization.c.len(),
            inst.cols(),
            "realization length must match item count"
        );
        let m = inst.cols();
        let col_rows = (0..m).map(|j| inst.column_support(j)).collect();
        QueryOracle {
            realization,
            revealed: vec![false; m],
            order: Vec::new(),
            col_rows,
            ledger: QueryLedger {
                per_item: vec![0; m],
                per_row: vec![0; inst.rows()],
                total: 0,
            },
        }
    }

    /// Nature's draw. For scoring and laboratory use; strategy code goes through
    /// [`QueryAccess`] only.
    pub fn realization(&self) -> &Realization {
        &self.realization
    }

    pub fn is_revealed(&self, item: usize) -> bool {
        self.revealed[item]
    }

    /// Revealed items in reveal order.
    pub fn revealed_items(&self) -> &[usize] {
        &self.order
    }

    pub fn ledger(&self) -> &QueryLedger {
        &self.ledger
    }
}

impl QueryAccess for QueryOracle {
    fn items(&self) -> usize {
        self.revealed.len()
    }

    fn query(&mut self, item: usize) -> u64 {
        if !self.revealed[item] {
            self.revealed[item] = true;
            self.order.push(item);
            self.ledger.per_item[item] += 1;
            self.ledger.total += 1;
            for &i in &self.col_rows[item] {
                self.ledger.per_row[i] += 1;
            }
        }
        self.realization.c[item]
    }

    fn revealed_value(&self, item: usize) -> Option<u64> {
        self.revealed[item].then(|| self.realization.c[item])
    }
}

/// Revealed values where known, `c_plus` elsewhere.
pub fn optimistic_vector(oracle: &dyn QueryAccess, obj: &StochasticObjective) -> Vec<u64> {
    (0..oracle.items())
        .map(|j| oracle.revealed_value(j).unwrap_or(obj.c_plus[j]))
        .collect()
}

/// Revealed values where known, `c_minus` elsewhere.
pub fn pessimistic_vector(oracle: &dyn QueryAccess, obj: &StochasticObjective) -> Vec<u64> {
    (0..oracle.items())
        .map(|j| oracle.revealed_value(j).unwrap_or(obj.c_minus[j]))
        .collect()
}
