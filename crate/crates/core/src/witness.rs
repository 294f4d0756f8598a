//! Witness covers on small instances: enumeration, the cover property check, and
//! tracking of witness feasibility along strategy runs.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::adapters::ProblemAdapter;
use crate::instance::{PackingInstance, QueryOracle, Realization, StochasticObjective};
use crate::lp::{min_dual_cover, LpError, Rational};
use crate::strategies::{run_observed, IterationView, Mode, RunResult, StrategyConfig, StrategyError, StrategyObserver};

pub const TDI_MAX_ROWS: usize = 12;
pub const TDI_MAX_MU: u64 = 8;
pub const SPARSE_MAX_ROWS: usize = 10;
pub const SPARSE_MAX_VECTORS: u128 = 5_000_000;
/// Constant in the `e^{O(.)}` size bounds, for plotting only.
pub const PLOT_CONSTANT: f64 = 3.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WitnessError {
    #[error("size guard: {0}")]
    TooLarge(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error(transparent)]
    Lp(#[from] LpError),
}

pub fn rational(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rational_from_f64(v: f64) -> Rational {
    Rational::from_float(v).expect("finite value")
}

fn floor_u64(v: &Rational) -> u64 {
    if v.is_negative() {
        0
    } else {
        v.floor().to_integer().to_u64().unwrap_or(u64::MAX)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoverKind {
    TdiInteger,
    SparseGrid,
}

/// Grid-valued dual vectors: member `k` is `y_i = tokens[k][i] * steps[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessCover {
    pub kind: CoverKind,
    pub mu: Rational,
    pub epsilon: Rational,
    pub epsilon_prime: Rational,
    /// `(1 - epsilon') mu`.
    pub cap: Rational,
    pub gamma: Option<Rational>,
    pub steps: Vec<Rational>,
    pub tokens: Vec<Vec<u32>>,
}

impl WitnessCover {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn vector(&self, k: usize) -> Vec<Rational> {
        self.tokens[k]
            .iter()
            .zip(&self.steps)
            .map(|(&t, s)| s * Rational::from_integer(BigInt::from(t)))
            .collect()
    }

    /// `y.b` of member `k`.
    pub fn objective(&self, k: usize, b: &[u64]) -> Rational {
        self.vector(k)
            .iter()
            .zip(b)
            .fold(Rational::zero(), |s, (y, &bi)| s + y * Rational::from_integer(BigInt::from(bi)))
    }

    /// `exp(3 mu log(1 + n/mu))` for TDI covers and
    /// `exp(3 mu (gamma log(n / (gamma mu)) + 1/eps))` for sparse ones.
    pub fn size_bound_plot(&self) -> f64 {
        let n = self.steps.len() as f64;
        let mu = self.mu.to_f64().unwrap_or(0.0).max(1e-12);
        match self.kind {
            CoverKind::TdiInteger => (PLOT_CONSTANT * mu * (1.0 + n / mu).ln()).exp(),
            CoverKind::SparseGrid => {
                let g = self.gamma.as_ref().and_then(|g| g.to_f64()).unwrap_or(1.0);
                let e = self.epsilon.to_f64().unwrap_or(1.0);
                let log_term = (n / (g * mu)).ln().max(0.0);
                (PLOT_CONSTANT * mu * (g * log_term + 1.0 / e)).exp()
            }
        }
    }

    /// Structured-text dump: parameters then one vector per line.
    pub fn to_text(&self) -> String {
        #[derive(Serialize)]
        struct Dump {
            kind: CoverKind,
            mu: String,
            epsilon: String,
            epsilon_prime: String,
            cap: String,
            size: usize,
            size_bound_plot: f64,
            vectors: Vec<Vec<String>>,
        }
        let dump = Dump {
            kind: self.kind,
            mu: self.mu.to_string(),
            epsilon: self.epsilon.to_string(),
            epsilon_prime: self.epsilon_prime.to_string(),
            cap: self.cap.to_string(),
            size: self.len(),
            size_bound_plot: self.size_bound_plot(),
            vectors: (0..self.len())
                .map(|k| self.vector(k).iter().map(|v| v.to_string()).collect())
                .collect(),
        };
        toml::to_string(&dump).expect("cover serializes")
    }

    /// Integer members as `u64` vectors (TDI covers only).
    pub fn integer_members(&self) -> Option<Vec<Vec<u64>>> {
        (self.kind == CoverKind::TdiInteger)
            .then(|| self.tokens.iter().map(|t| t.iter().map(|&v| u64::from(v)).collect()).collect())
    }
}

/// Token vectors `a` with `sum w_i a_i <= budget` and `|supp a| <= support`, by
/// recursion over coordinates.
pub fn enumerate_recursive(weights: &[u64], budget: u64, support: usize) -> Vec<Vec<u32>> {
    fn go(w: &[u64], i: usize, left: u64, supp: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i == w.len() {
            out.push(cur.clone());
            return;
        }
        cur.push(0);
        go(w, i + 1, left, supp, cur, out);
        cur.pop();
        if supp == 0 {
            return;
        }
        let mut v = 1u64;
        while v * w[i] <= left {
            cur.push(v as u32);
            go(w, i + 1, left - v * w[i], supp - 1, cur, out);
            cur.pop();
            v += 1;
        }
    }
    let mut out = Vec::new();
    go(weights, 0, budget, support, &mut Vec::new(), &mut out);
    out
}

/// Same set as [`enumerate_recursive`], by an odometer that carries whenever the
/// budget or support would be exceeded.
pub fn enumerate_iterative(weights: &[u64], budget: u64, support: usize) -> Vec<Vec<u32>> {
    let n = weights.len();
    let mut a = vec![0u32; n];
    let mut out = vec![a.clone()];
    let mut used = 0u64;
    let mut supp = 0usize;
    loop {
        // increment the last coordinate; carry leftwards on overflow
        let mut i = n;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            let was_zero = a[i] == 0;
            let fits = used + weights[i] <= budget && (!was_zero || supp < support);
            if fits {
                a[i] += 1;
                used += weights[i];
                if was_zero {
                    supp += 1;
                }
                break;
            }
            used -= u64::from(a[i]) * weights[i];
            if !was_zero {
                supp -= 1;
            }
            a[i] = 0;
        }
        out.push(a.clone());
    }
}

fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * u128::from(n - i) / u128::from(i + 1))
}

/// `|W|` for unit weights: `sum_{s <= support} C(n, s) C(budget, s)`.
pub fn count_unit_weight(n: usize, budget: u64, support: usize) -> u128 {
    (0..=support.min(n))
        .map(|s| binomial(n as u64, s as u64) * binomial(budget, s as u64))
        .sum()
}

fn check_epsilon(epsilon: &Rational) -> Result<(), WitnessError> {
    if !epsilon.is_positive() || epsilon > &Rational::one() {
        return Err(WitnessError::Parameter(format!("epsilon {epsilon} must lie in (0, 1]")));
    }
    Ok(())
}

/// `W = {y in Z_+^n : y.b <= (1 - eps) mu}`.
pub fn enumerate_tdi_cover(b: &[u64], mu: &Rational, epsilon: &Rational) -> Result<WitnessCover, WitnessError> {
    check_epsilon(epsilon)?;
    if b.len() > TDI_MAX_ROWS || mu > &Rational::from_integer(BigInt::from(TDI_MAX_MU)) {
        return Err(WitnessError::TooLarge(format!(
            "TDI enumeration needs n <= {TDI_MAX_ROWS} and mu <= {TDI_MAX_MU} (got n = {}, mu = {mu})",
            b.len()
        )));
    }
    if b.contains(&0) {
        return Err(WitnessError::Parameter("capacities must be positive".into()));
    }
    let cap = (Rational::one() - epsilon) * mu;
    let tokens = enumerate_recursive(b, floor_u64(&cap), b.len());
    Ok(WitnessCover {
        kind: CoverKind::TdiInteger,
        mu: mu.clone(),
        epsilon: epsilon.clone(),
        epsilon_prime: epsilon.clone(),
        cap,
        gamma: None,
        steps: vec![Rational::one(); b.len()],
        tokens,
    })
}

/// Grid vectors with steps `eps / (2 b_i gamma)`, `y.b <= (1 - eps/2) mu` and
/// `|supp y| <= gamma mu`.
pub fn enumerate_sparse_cover(
    b: &[u64],
    mu: &Rational,
    epsilon: &Rational,
    gamma: &Rational,
) -> Result<WitnessCover, WitnessError> {
    check_epsilon(epsilon)?;
    if !gamma.is_positive() {
        return Err(WitnessError::Parameter("gamma must be positive".into()));
    }
    if b.contains(&0) {
        return Err(WitnessError::Parameter("capacities must be positive".into()));
    }
    let n = b.len();
    if n > SPARSE_MAX_ROWS {
        return Err(WitnessError::TooLarge(format!("sparse enumeration needs n <= {SPARSE_MAX_ROWS}")));
    }
    let two = rational(2, 1);
    let cap = (Rational::one() - epsilon / &two) * mu;
    // every token adds eps / (2 gamma) to y.b
    let token_value = epsilon / (&two * gamma);
    let budget = floor_u64(&(&cap / &token_value));
    let support = floor_u64(&(gamma * mu)).min(n as u64) as usize;
    let count = count_unit_weight(n, budget, support);
    if count > SPARSE_MAX_VECTORS {
        return Err(WitnessError::TooLarge(format!("{count} grid vectors exceed {SPARSE_MAX_VECTORS}")));
    }
    let steps = b
        .iter()
        .map(|&bi| &token_value / Rational::from_integer(BigInt::from(bi)))
        .collect();
    Ok(WitnessCover {
        kind: CoverKind::SparseGrid,
        mu: mu.clone(),
        epsilon: epsilon.clone(),
        epsilon_prime: epsilon / &two,
        cap,
        gamma: Some(gamma.clone()),
        steps,
        tokens: enumerate_recursive(&vec![1; n], budget, support),
    })
}

/// Rounds each entry of `y` up to the next multiple of `eps / (2 b_i gamma)`.
pub fn grid_dominator(y: &[Rational], b: &[u64], epsilon: &Rational, gamma: &Rational) -> Vec<Rational> {
    y.iter()
        .zip(b)
        .map(|(v, &bi)| {
            let step = epsilon / (rational(2, 1) * Rational::from_integer(BigInt::from(bi)) * gamma);
            (v / &step).ceil() * step
        })
        .collect()
}

/// `y^T A` for a rational `y`.
pub fn dual_load(a: &[Vec<u64>], y: &[Rational]) -> Vec<Rational> {
    let m = a.first().map_or(0, Vec::len);
    (0..m)
        .map(|j| {
            a.iter()
                .zip(y)
                .fold(Rational::zero(), |s, (row, yi)| s + yi * Rational::from_integer(BigInt::from(row[j])))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum CoverCheck {
    /// Some member satisfies `y^T A >= c`; property 1 is vacuous.
    FeasibleMember { index: usize },
    /// Every member is infeasible and the minimum of `y.b` over `y^T A >= c`
    /// exceeds `(1 - eps) mu` by `margin` (`None` when no dual is feasible).
    Holds { margin: Option<Rational> },
    /// Every member is infeasible yet this dual of value `<= (1 - eps) mu` is feasible.
    Violated { counterexample: Vec<Rational>, value: Rational },
}

/// Checks property 1 of a witness cover against one objective `c`.
pub fn verify_cover_property(
    cover: &WitnessCover,
    a: &[Vec<u64>],
    b: &[u64],
    c: &[u64],
) -> Result<CoverCheck, WitnessError> {
    let c_r: Vec<Rational> = c.iter().map(|&v| Rational::from_integer(BigInt::from(v))).collect();
    for k in 0..cover.len() {
        let load = dual_load(a, &cover.vector(k));
        if load.iter().zip(&c_r).all(|(l, cj)| l >= cj) {
            return Ok(CoverCheck::FeasibleMember { index: k });
        }
    }
    let threshold = (Rational::one() - &cover.epsilon) * &cover.mu;
    Ok(match min_dual_cover::<Rational>(a, b, c)? {
        None => CoverCheck::Holds { margin: None },
        Some((_, value)) if value > threshold => CoverCheck::Holds {
            margin: Some(value - threshold),
        },
        Some((y, value)) => CoverCheck::Violated {
            counterexample: y,
            value,
        },
    })
}

/// Random integer duals with `y.b <= cap`: a total drawn uniformly from
/// `0..=floor(cap)`, spread over random rows that still fit.
pub fn sample_tdi_members<R: Rng + ?Sized>(b: &[u64], cap: u64, count: usize, rng: &mut R) -> Vec<Vec<u64>> {
    (0..count)
        .map(|_| {
            let mut y = vec![0u64; b.len()];
            if b.is_empty() {
                return y;
            }
            let target = rng.gen_range(0..=cap);
            let mut used = 0;
            for _ in 0..4 * (target as usize + 1) {
                let i = rng.gen_range(0..b.len());
                if used + b[i] <= target {
                    y[i] += 1;
                    used += b[i];
                }
            }
            y
        })
        .collect()
}

/// Observer recording, per step, which witness members satisfy
/// `y^T A >= c_pess`.
///
/// In adaptive mode the strategy's pessimistic vector is used. For non-adaptive runs
/// pass the realization: the tracked vector is the realization on supposed items and
/// `c_minus` elsewhere, i.e. the pessimistic vector the batch reveal would produce.
#[derive(Debug, Clone)]
pub struct WitnessTracker {
    loads: Vec<Vec<u64>>,
    realization: Option<Vec<u64>>,
    c_minus: Vec<u64>,
    /// `feasible[t][k]`; row 0 is the state before the first step.
    pub feasible: Vec<Vec<bool>>,
}

impl WitnessTracker {
    pub fn new(inst: &PackingInstance, members: &[Vec<u64>], c_minus: &[u64], realization: Option<Vec<u64>>) -> Self {
        let loads: Vec<Vec<u64>> = members
            .iter()
            .map(|y| {
                (0..inst.cols())
                    .map(|j| inst.column_support(j).iter().map(|&i| y[i] * inst.entry(i, j)).sum())
                    .collect()
            })
            .collect();
        let mut tracker = WitnessTracker {
            loads,
            realization,
            c_minus: c_minus.to_vec(),
            feasible: Vec::new(),
        };
        let row = tracker.row(c_minus);
        tracker.feasible.push(row);
        tracker
    }

    fn row(&self, c: &[u64]) -> Vec<bool> {
        self.loads
            .iter()
            .map(|load| load.iter().zip(c).all(|(l, cj)| l >= cj))
            .collect()
    }

    pub fn members(&self) -> usize {
        self.loads.len()
    }

    pub fn steps(&self) -> usize {
        self.feasible.len() - 1
    }

    /// Count of (step, member) pairs going from infeasible back to feasible.
    pub fn monotonicity_violations(&self) -> usize {
        self.feasible
            .windows(2)
            .map(|w| w[0].iter().zip(&w[1]).filter(|(a, b)| !**a && **b).count())
            .sum()
    }

    pub fn any_feasible_after(&self, t: usize) -> bool {
        self.feasible[t].iter().any(|&f| f)
    }

    /// Feasibility matrix as CSV text: `t,member,feasible`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,member,feasible\n");
        for (t, row) in self.feasible.iter().enumerate() {
            for (k, f) in row.iter().enumerate() {
                let _ = writeln!(s, "{t},{k},{}", u8::from(*f));
            }
        }
        s
    }
}

impl StrategyObserver for WitnessTracker {
    fn on_iteration(&mut self, view: &IterationView<'_>) {
        let row = match &self.realization {
            Some(real) => {
                let c: Vec<u64> = (0..real.len())
                    .map(|j| if view.touched[j] { real[j] } else { self.c_minus[j] })
                    .collect();
                self.row(&c)
            }
            None => self.row(view.pessimistic),
        };
        self.feasible.push(row);
    }
}

#[derive(Debug, Clone)]
pub struct DynamicsRun {
    /// Omniscient LP value of the realization.
    pub mu: f64,
    pub tracker: WitnessTracker,
    pub result: RunResult,
}

/// One traced run. `members` receives the realized omniscient LP value and returns
/// the integer witness vectors to track (typically a cover for that value).
pub fn witness_dynamics(
    inst: &PackingInstance,
    obj: &StochasticObjective,
    realization: Realization,
    adapter: &dyn ProblemAdapter,
    config: &StrategyConfig,
    members: impl FnOnce(f64) -> Vec<Vec<u64>>,
) -> Result<DynamicsRun, StrategyError> {
    let mu = adapter
        .solve_relaxation(&realization.c)
        .map_err(|source| StrategyError::Adapter { iteration: 0, source })?
        .value;
    let lab_view = (config.mode == Mode::Nonadaptive).then(|| realization.c.clone());
    let mut tracker = WitnessTracker::new(inst, &members(mu), obj.c_minus(), lab_view);
    let mut oracle = QueryOracle::new(inst, realization);
    let result = run_observed(inst, obj, &mut oracle, adapter, config, &mut tracker)?;
    Ok(DynamicsRun { mu, tracker, result })
}

/// Survival counts grouped by the realized omniscient value.
#[derive(Debug, Clone, Default)]
pub struct SurvivalTable {
    /// key: `mu` as a string; value: (runs, survivors[t][member], initially feasible)
    groups: BTreeMap<String, SurvivalGroup>,
}

#[derive(Debug, Clone)]
pub struct SurvivalGroup {
    pub mu: f64,
    pub runs: u64,
    pub survivors: Vec<Vec<u64>>,
    pub initially_feasible: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurvivalRow {
    pub mu: f64,
    pub t: usize,
    pub member: usize,
    pub runs: u64,
    pub survivors: u64,
    pub frequency: f64,
    pub bound: f64,
}

impl SurvivalTable {
    pub fn add(&mut self, mu: f64, tracker: &WitnessTracker) {
        let key = format!("{mu:.9}");
        let group = self.groups.entry(key).or_insert_with(|| SurvivalGroup {
            mu,
            runs: 0,
            survivors: vec![vec![0; tracker.members()]; tracker.feasible.len()],
            initially_feasible: tracker.feasible[0].clone(),
        });
        assert_eq!(group.survivors.len(), tracker.feasible.len(), "runs in a group share T");
        group.runs += 1;
        for (t, row) in tracker.feasible.iter().enumerate() {
            for (k, &f) in row.iter().enumerate() {
                group.survivors[t][k] += u64::from(f);
            }
        }
    }

    pub fn groups(&self) -> impl Iterator<Item = &SurvivalGroup> {
        self.groups.values()
    }

    /// One row per (mu, t >= 1, initially feasible member); `bound(mu, t)` supplies the
    /// closed-form comparison value.
    pub fn rows(&self, bound: impl Fn(f64, usize) -> f64) -> Vec<SurvivalRow> {
        let mut out = Vec::new();
        for g in self.groups.values() {
            for t in 1..g.survivors.len() {
                for (k, &s) in g.survivors[t].iter().enumerate() {
                    if g.initially_feasible[k] {
                        out.push(SurvivalRow {
                            mu: g.mu,
                            t,
                            member: k,
                            runs: g.runs,
                            survivors: s,
                            frequency: s as f64 / g.runs as f64,
                            bound: bound(g.mu, t),
                        });
                    }
                }
            }
        }
        out
    }
}

/// Claim bound `exp(-eps' p mu t / delta_c)`.
pub fn survival_bound(epsilon_prime: f64, p: f64, mu: f64, t: usize, delta_c: f64) -> f64 {
    (-epsilon_prime * p * mu * t as f64 / delta_c).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn int(v: i64) -> Rational {
        rational(v, 1)
    }

    #[test]
    fn tdi_examples() {
        let w = enumerate_tdi_cover(&[1, 1], &int(2), &rational(1, 4)).unwrap();
        assert_eq!(w.cap, rational(3, 2));
        let mut v = w.tokens.clone();
        v.sort();
        assert_eq!(v, vec![vec![0, 0], vec![0, 1], vec![1, 0]]);
        let w = enumerate_tdi_cover(&[1, 1, 1], &int(5), &int(1)).unwrap();
        assert_eq!(w.tokens, vec![vec![0, 0, 0]]);
        let w = enumerate_tdi_cover(&[1, 1, 1], &int(3), &rational(1, 3)).unwrap();
        assert_eq!(w.len(), 10);
        assert_eq!(binomial(5, 2), 10);
        for k in 0..w.len() {
            assert!(w.objective(k, &[1, 1, 1]) <= w.cap);
        }
    }

    #[test]
    fn tdi_guards() {
        assert!(enumerate_tdi_cover(&[1; 13], &int(2), &rational(1, 2)).is_err());
        assert!(enumerate_tdi_cover(&[1; 3], &int(9), &rational(1, 2)).is_err());
        assert!(enumerate_tdi_cover(&[1; 3], &int(2), &int(0)).is_err());
    }

    #[test]
    fn sparse_examples() {
        let w = enumerate_sparse_cover(&[1, 1], &int(2), &rational(1, 2), &int(1)).unwrap();
        assert_eq!(w.steps, vec![rational(1, 4); 2]);
        assert_eq!(w.cap, rational(3, 2));
        // independent double loop over multiples of 1/4
        let mut count = 0;
        for a in 0..=8 {
            for b in 0..=8 {
                let value = rational(a + b, 4);
                let supp = (a > 0) as usize + (b > 0) as usize;
                if value <= rational(3, 2) && supp <= 2 {
                    count += 1;
                }
            }
        }
        assert_eq!(w.len(), count);
        assert_eq!(count, 28);
        // gamma mu < 1 leaves only zero
        let w = enumerate_sparse_cover(&[1, 2, 3], &int(1), &rational(1, 2), &rational(1, 2)).unwrap();
        assert_eq!(w.tokens, vec![vec![0, 0, 0]]);
    }

    #[test]
    fn enumerators_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let n = rng.gen_range(1..=6);
            let w: Vec<u64> = (0..n).map(|_| rng.gen_range(1..=3)).collect();
            let budget = rng.gen_range(0..=6);
            let support = rng.gen_range(0..=n);
            let mut r = enumerate_recursive(&w, budget, support);
            let mut i = enumerate_iterative(&w, budget, support);
            r.sort();
            i.sort();
            assert_eq!(r, i);
            if w.iter().all(|&x| x == 1) {
                assert_eq!(r.len() as u128, count_unit_weight(n, budget, support));
            }
        }
    }

    #[test]
    fn grid_dominator_property() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = vec![vec![1, 2, 0, 1], vec![0, 1, 3, 1], vec![2, 0, 1, 1]];
        let b = [3u64, 4, 2];
        let eps = rational(1, 2);
        let gamma = int(1);
        let mu = int(4);
        let cap = (Rational::one() - &eps) * &mu;
        let mut checked = 0;
        while checked < 100 {
            let y: Vec<Rational> = (0..3)
                .map(|_| if rng.gen_bool(0.6) { rational(rng.gen_range(0..40), 40) } else { int(0) })
                .collect();
            let yb = y.iter().zip(&b).fold(int(0), |s, (v, &bi)| s + v * int(bi as i64));
            let supp = y.iter().filter(|v| v.is_positive()).count();
            if yb > cap || Rational::from_integer(BigInt::from(supp)) > &gamma * &mu {
                continue;
            }
            let yp = grid_dominator(&y, &b, &eps, &gamma);
            let load = dual_load(&a, &y);
            let load_p = dual_load(&a, &yp);
            assert!(load_p.iter().zip(&load).all(|(p, q)| p >= q));
            let ypb = yp.iter().zip(&b).fold(int(0), |s, (v, &bi)| s + v * int(bi as i64));
            assert!(ypb <= (Rational::one() - &eps / int(2)) * &mu);
            checked += 1;
        }
    }

    #[test]
    fn cover_property_cases() {
        // K22: rows 0,1 left, 2,3 right; edges (0,2) (0,3) (1,2) (1,3)
        let a = vec![vec![1, 1, 0, 0], vec![0, 0, 1, 1], vec![1, 0, 1, 0], vec![0, 1, 0, 1]];
        let b = [1u64; 4];
        let w = enumerate_tdi_cover(&b, &int(2), &rational(1, 4)).unwrap();
        assert_eq!(
            verify_cover_property(&w, &a, &b, &[0; 4]).unwrap(),
            CoverCheck::FeasibleMember { index: 0 }
        );
        assert_eq!(
            verify_cover_property(&w, &a, &b, &[1; 4]).unwrap(),
            CoverCheck::Holds {
                margin: Some(rational(1, 2))
            }
        );
        // integer duals on the (non-TDI) triangle miss the half-integral optimum
        let tri = vec![vec![1, 0, 1], vec![1, 1, 0], vec![0, 1, 1]];
        let w = enumerate_tdi_cover(&[1; 3], &int(2), &rational(1, 4)).unwrap();
        match verify_cover_property(&w, &tri, &[1; 3], &[1; 3]).unwrap() {
            CoverCheck::Violated { value, .. } => assert_eq!(value, rational(3, 2)),
            other => panic!("expected a violation, got {other:?}"),
        }
    }

    #[test]
    fn dump_lists_members() {
        let w = enumerate_tdi_cover(&[1, 1], &int(2), &rational(1, 4)).unwrap();
        let text = w.to_text();
        assert!(text.contains("size = 3"));
        assert!(text.contains("cap = \"3/2\""));
        assert!(w.size_bound_plot() > 3.0);
    }

    #[test]
    fn single_item_dynamics() {
        use crate::adapters::make_adapter;
        use crate::instance::sample_realization;
        let inst = PackingInstance::generic(vec![vec![1]], vec![1]).unwrap();
        let obj = StochasticObjective::new(vec![0], vec![1], 0.5).unwrap();
        let adapter = make_adapter(&inst).unwrap();
        for seed in 0..40 {
            let config = StrategyConfig::new(Mode::Adaptive, 4, 0.5, 0.5, seed);
            let run = witness_dynamics(&inst, &obj, sample_realization(&obj, seed), adapter.as_ref(), &config, |mu| {
                let cover = enumerate_tdi_cover(&[1], &rational_from_f64(mu), &rational(1, 2)).unwrap();
                cover.integer_members().unwrap()
            })
            .unwrap();
            assert_eq!(run.tracker.steps(), 4);
            assert_eq!(run.tracker.monotonicity_violations(), 0);
            // y = 0 survives exactly when the item is low
            assert_eq!(run.tracker.any_feasible_after(4), run.mu == 0.0);
        }
    }

    #[test]
    fn sampled_members_respect_cap() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for y in sample_tdi_members(&[1, 2, 1, 3], 5, 200, &mut rng) {
            let yb: u64 = y.iter().zip([1u64, 2, 1, 3]).map(|(a, b)| a * b).sum();
            assert!(yb <= 5);
        }
    }
}
