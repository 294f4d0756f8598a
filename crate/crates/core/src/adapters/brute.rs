//! Exhaustive solvers used as exact oracles at desk scale.

use num_rational::Rational64;
use num_traits::{Signed, Zero};

use super::{AdapterError, IntegralSolution, MatroidDescription, BRUTE_FORCE_ITEMS};
use crate::instance::PackingInstance;
use crate::lp::LpProblem;

/// Maximum-weight feasible 0/1 vector by depth-first search with a suffix-sum bound.
pub fn best_packing(inst: &PackingInstance, weights: &[u64]) -> Result<IntegralSolution, AdapterError> {
    let m = inst.cols();
    super::check_weights(weights, m)?;
    if m > BRUTE_FORCE_ITEMS {
        return Err(AdapterError::TooLarge {
            what: "brute-force item count",
            size: m,
            limit: BRUTE_FORCE_ITEMS,
        });
    }
    let columns: Vec<Vec<(usize, u64)>> = (0..m)
        .map(|j| {
            inst.column_support(j)
                .into_iter()
                .map(|i| (i, inst.entry(i, j)))
                .collect()
        })
        .collect();
    let mut order: Vec<usize> = (0..m).filter(|&j| weights[j] > 0).collect();
    order.sort_by(|&a, &b| weights[b].cmp(&weights[a]).then(a.cmp(&b)));
    let mut suffix = vec![0u64; order.len() + 1];
    for t in (0..order.len()).rev() {
        suffix[t] = suffix[t + 1] + weights[order[t]];
    }

    struct Search<'a> {
        order: &'a [usize],
        suffix: &'a [u64],
        columns: &'a [Vec<(usize, u64)>],
        weights: &'a [u64],
        b: &'a [u64],
        load: Vec<u64>,
        current: Vec<usize>,
        value: u64,
        best: Vec<usize>,
        best_value: u64,
    }

    impl Search<'_> {
        fn go(&mut self, t: usize) {
            if self.value > self.best_value {
                self.best_value = self.value;
                self.best = self.current.clone();
            }
            if t == self.order.len() || self.value + self.suffix[t] <= self.best_value {
                return;
            }
            let j = self.order[t];
            let fits = self.columns[j]
                .iter()
                .all(|&(i, a)| self.load[i] + a <= self.b[i]);
            if fits {
                for &(i, a) in &self.columns[j] {
                    self.load[i] += a;
                }
                self.current.push(j);
                self.value += self.weights[j];
                self.go(t + 1);
                self.value -= self.weights[j];
                self.current.pop();
                for &(i, a) in &self.columns[j] {
                    self.load[i] -= a;
                }
            }
            self.go(t + 1);
        }
    }

    let mut search = Search {
        order: &order,
        suffix: &suffix,
        columns: &columns,
        weights,
        b: inst.capacities(),
        load: vec![0; inst.rows()],
        current: Vec::new(),
        value: 0,
        best: Vec::new(),
        best_value: 0,
    };
    search.go(0);
    Ok(IntegralSolution::from_items(&search.best, weights))
}

/// Maximum weight of an independent set, by enumerating independent sets
/// (downward closure prunes dependent branches).
pub fn best_independent(desc: &MatroidDescription, weights: &[u64]) -> Result<u64, AdapterError> {
    const LIMIT: usize = 20;
    let m = desc.ground_size();
    if m > LIMIT {
        return Err(AdapterError::TooLarge {
            what: "matroid ground set",
            size: m,
            limit: LIMIT,
        });
    }
    fn go(desc: &MatroidDescription, w: &[u64], e: usize, set: &mut Vec<usize>, value: u64) -> u64 {
        if e == w.len() {
            return value;
        }
        let mut best = go(desc, w, e + 1, set, value);
        set.push(e);
        if desc.is_independent(set) {
            best = best.max(go(desc, w, e + 1, set, value + w[e]));
        }
        set.pop();
        best
    }
    Ok(go(desc, weights, 0, &mut Vec::new(), 0))
}

/// LP optimum by enumerating every basic solution: choose `m` of the `n + m`
/// constraints (rows, and `x_j >= 0`, plus `x_j <= 1` if explicit) to hold with
/// equality, solve, keep the feasible ones. Returns the best value and a maximizer.
pub fn lp_by_vertex_enumeration(prob: &LpProblem) -> Option<(Rational64, Vec<Rational64>)> {
    let m = prob.cols();
    let n = prob.rows();
    assert!(m <= 8, "vertex enumeration is for tiny LPs");
    let r = |v: u64| Rational64::from_integer(v as i64);
    // constraints as (coefficients, rhs) meaning coeffs.x <= rhs
    let mut cons: Vec<(Vec<Rational64>, Rational64)> = (0..n)
        .map(|i| (prob.matrix()[i].iter().map(|&v| r(v)).collect(), r(prob.capacities()[i])))
        .collect();
    for j in 0..m {
        let mut e = vec![Rational64::zero(); m];
        e[j] = Rational64::from_integer(-1);
        cons.push((e, Rational64::zero()));
        if prob.explicit_unit_bounds() {
            let mut e = vec![Rational64::zero(); m];
            e[j] = Rational64::from_integer(1);
            cons.push((e, Rational64::from_integer(1)));
        }
    }
    let c: Vec<Rational64> = prob
        .objective()
        .iter()
        .map(|&v| Rational64::approximate_float(v).expect("finite objective"))
        .collect();
    let mut best: Option<(Rational64, Vec<Rational64>)> = None;
    let mut pick = Vec::with_capacity(m);
    choose(cons.len(), m, 0, &mut pick, &mut |idx| {
        let Some(x) = solve_square(idx.iter().map(|&k| &cons[k]).collect()) else {
            return;
        };
        let feasible = cons.iter().all(|(a, rhs)| {
            let lhs = a.iter().zip(&x).fold(Rational64::zero(), |s, (p, q)| s + p * q);
            lhs <= *rhs
        });
        if feasible {
            let value = c.iter().zip(&x).fold(Rational64::zero(), |s, (p, q)| s + p * q);
            if best.as_ref().map_or(true, |(v, _)| value > *v) {
                best = Some((value, x));
            }
        }
    });
    best
}

fn choose(total: usize, k: usize, start: usize, pick: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
    if pick.len() == k {
        f(pick);
        return;
    }
    for s in start..total {
        if total - s < k - pick.len() {
            break;
        }
        pick.push(s);
        choose(total, k, s + 1, pick, f);
        pick.pop();
    }
}

/// Gaussian elimination on a square system; `None` when singular.
fn solve_square(rows: Vec<&(Vec<Rational64>, Rational64)>) -> Option<Vec<Rational64>> {
    let m = rows.len();
    let mut a: Vec<Vec<Rational64>> = rows
        .iter()
        .map(|(coef, rhs)| {
            let mut row = coef.clone();
            row.push(*rhs);
            row
        })
        .collect();
    for col in 0..m {
        let piv = (col..m).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        let p = a[col][col];
        for v in a[col].iter_mut() {
            *v /= p;
        }
        for r in 0..m {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col];
                let pivot_row = a[col].clone();
                for (v, q) in a[r].iter_mut().zip(&pivot_row) {
                    *v -= f * q;
                }
            }
        }
    }
    Some(a.into_iter().map(|row| row[m]).collect())
}

/// True when every entry of `x` is 0 or 1.
pub fn is_zero_one(x: &[Rational64]) -> bool {
    x.iter()
        .all(|v| v.is_zero() || (*v - Rational64::from_integer(1)).abs().is_zero())
}
