//! Dense bounded-variable primal simplex with Bland's rule.
//!
//! Solves `max c.x  s.t.  A x <= b,  0 <= x <= u` where `u_j` may be infinite and
//! `b` may have either sign. Rows with negative right-hand side get an artificial
//! variable and are handled by a phase-one pass.

use std::fmt::Write as _;

use super::scalar::Scalar;
use super::LpError;

#[derive(Debug, Clone)]
pub(crate) struct GeneralLp<S> {
    pub a: Vec<Vec<S>>,
    pub b: Vec<S>,
    pub c: Vec<S>,
    pub upper: Vec<Option<S>>,
}

/// Optimal basis: basic column indices in row order plus nonbasic columns sitting at
/// their upper bound. Structural columns are `0..m`, slacks `m..m + n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Basis {
    pub basic: Vec<usize>,
    pub at_upper: Vec<usize>,
}

#[derive(Debug, Clone)]
pub(crate) struct SimplexOutcome<S> {
    pub x: Vec<S>,
    pub value: S,
    pub y: Vec<S>,
    pub bound_duals: Vec<S>,
    pub basis: Basis,
    pub dump: String,
}

struct Tableau<S> {
    m: usize,
    n: usize,
    t: Vec<Vec<S>>,
    basic: Vec<usize>,
    xb: Vec<S>,
    at_upper: Vec<bool>,
    upper: Vec<Option<S>>,
    artificial: Vec<bool>,
    iterations: usize,
    max_iterations: usize,
}

enum Step {
    Optimal,
    Moved,
}

impl<S: Scalar> Tableau<S> {
    fn new(lp: &GeneralLp<S>) -> Self {
        let n = lp.b.len();
        let m = lp.c.len();
        let negative: Vec<usize> = (0..n).filter(|&i| lp.b[i] < S::zero()).collect();
        let ncols = m + n + negative.len();
        let mut t = vec![vec![S::zero(); ncols]; n];
        let mut basic = vec![0; n];
        let mut xb = Vec::with_capacity(n);
        let mut artificial = vec![false; ncols];
        let mut upper: Vec<Option<S>> = lp.upper.clone();
        upper.extend(std::iter::repeat_n(None, ncols - m));
        let mut next_art = m + n;
        for i in 0..n {
            let flip = lp.b[i] < S::zero();
            for j in 0..m {
                t[i][j] = if flip {
                    -lp.a[i][j].clone()
                } else {
                    lp.a[i][j].clone()
                };
            }
            if flip {
                t[i][m + i] = -S::one();
                t[i][next_art] = S::one();
                artificial[next_art] = true;
                basic[i] = next_art;
                xb.push(-lp.b[i].clone());
                next_art += 1;
            } else {
                t[i][m + i] = S::one();
                basic[i] = m + i;
                xb.push(lp.b[i].clone());
            }
        }
        Tableau {
            m,
            n,
            t,
            basic,
            xb,
            at_upper: vec![false; ncols],
            upper,
            artificial,
            iterations: 0,
            max_iterations: 200 * (n + ncols) + 10_000,
        }
    }

    fn ncols(&self) -> usize {
        self.at_upper.len()
    }

    fn is_basic(&self) -> Vec<bool> {
        let mut b = vec![false; self.ncols()];
        for &j in &self.basic {
            b[j] = true;
        }
        b
    }

    fn reduced_costs(&self, cost: &[S]) -> Vec<S> {
        let basic = self.is_basic();
        (0..self.ncols())
            .map(|j| {
                if basic[j] {
                    return S::zero();
                }
                let mut d = cost[j].clone();
                for (i, &bi) in self.basic.iter().enumerate() {
                    let a = &self.t[i][j];
                    if !a.is_zero_tol() && !cost[bi].is_zero_tol() {
                        d = d - cost[bi].clone() * a.clone();
                    }
                }
                d
            })
            .collect()
    }

    fn values(&self) -> Vec<S> {
        let mut v: Vec<S> = (0..self.ncols())
            .map(|j| {
                if self.at_upper[j] {
                    self.upper[j].clone().expect("at_upper implies finite bound")
                } else {
                    S::zero()
                }
            })
            .collect();
        for (i, &bi) in self.basic.iter().enumerate() {
            v[bi] = self.xb[i].clone();
        }
        v
    }

    fn step(&mut self, cost: &[S]) -> Result<Step, LpError> {
        if self.iterations >= self.max_iterations {
            return Err(LpError::IterationLimit(self.iterations));
        }
        let d = self.reduced_costs(cost);
        let basic = self.is_basic();
        let entering = (0..self.ncols()).find(|&j| {
            if basic[j] || self.artificial[j] {
                return false;
            }
            if self.at_upper[j] {
                d[j].is_neg()
            } else {
                let fixed = matches!(&self.upper[j], Some(u) if u.is_zero_tol());
                d[j].is_pos() && !fixed
            }
        });
        let Some(q) = entering else {
            return Ok(Step::Optimal);
        };
        self.iterations += 1;
        let increasing = !self.at_upper[q];

        // ratio test, ties broken towards the smallest basic column index
        let mut best: Option<(S, usize)> = None;
        for i in 0..self.n {
            let alpha = &self.t[i][q];
            if alpha.is_zero_tol() {
                continue;
            }
            let delta = if increasing {
                alpha.clone()
            } else {
                -alpha.clone()
            };
            let bi = self.basic[i];
            let limit = if delta.is_pos() {
                let room = if self.xb[i] < S::zero() {
                    S::zero()
                } else {
                    self.xb[i].clone()
                };
                room / delta
            } else {
                match &self.upper[bi] {
                    Some(u) => {
                        let room = u.clone() - self.xb[i].clone();
                        let room = if room < S::zero() { S::zero() } else { room };
                        room / (-delta)
                    }
                    None => continue,
                }
            };
            let replace = match &best {
                None => true,
                Some((lim, r)) => {
                    let diff = limit.clone() - lim.clone();
                    diff.is_neg() || (diff.is_zero_tol() && bi < self.basic[*r])
                }
            };
            if replace {
                best = Some((limit, i));
            }
        }

        let flip = match (&self.upper[q], &best) {
            (Some(u), Some((lim, _))) => !(lim.clone() - u.clone()).is_neg(),
            (Some(_), None) => true,
            (None, None) => return Err(LpError::Unbounded),
            (None, Some(_)) => false,
        };

        if flip {
            let step = self.upper[q].clone().expect("flip needs a finite bound");
            self.shift_basics(q, increasing, &step);
            self.at_upper[q] = !self.at_upper[q];
            return Ok(Step::Moved);
        }

        let (step, r) = best.expect("pivot row exists");
        self.shift_basics(q, increasing, &step);
        let entering_value = if increasing {
            step
        } else {
            self.upper[q].clone().expect("at upper") - step
        };
        let leaving = self.basic[r];
        let delta_r = if increasing {
            self.t[r][q].clone()
        } else {
            -self.t[r][q].clone()
        };
        // leaving column rests at the bound it was driven to
        self.at_upper[leaving] = !delta_r.is_pos();
        if self.at_upper[leaving] && self.upper[leaving].is_none() {
            self.at_upper[leaving] = false;
        }
        self.at_upper[q] = false;
        self.basic[r] = q;
        self.xb[r] = entering_value;
        self.pivot(r, q);
        Ok(Step::Moved)
    }

    fn shift_basics(&mut self, q: usize, increasing: bool, step: &S) {
        if step.is_zero_tol() {
            return;
        }
        for i in 0..self.n {
            let alpha = &self.t[i][q];
            if alpha.is_zero_tol() {
                continue;
            }
            let change = alpha.clone() * step.clone();
            self.xb[i] = if increasing {
                self.xb[i].clone() - change
            } else {
                self.xb[i].clone() + change
            };
        }
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let ncols = self.ncols();
        let piv = self.t[r][q].clone();
        for j in 0..ncols {
            if !self.t[r][j].is_zero_tol() {
                self.t[r][j] = self.t[r][j].clone() / piv.clone();
            }
        }
        self.t[r][q] = S::one();
        let pivot_row = self.t[r].clone();
        for i in 0..self.n {
            if i == r {
                continue;
            }
            let f = self.t[i][q].clone();
            if f == S::zero() {
                continue;
            }
            for j in 0..ncols {
                if !pivot_row[j].is_zero_tol() {
                    self.t[i][j] = self.t[i][j].clone() - f.clone() * pivot_row[j].clone();
                }
            }
            self.t[i][q] = S::zero();
        }
    }

    fn optimize(&mut self, cost: &[S]) -> Result<(), LpError> {
        while let Step::Moved = self.step(cost)? {}
        Ok(())
    }

    fn dump(&self, cost: &[S]) -> String {
        let mut out = String::new();
        let d = self.reduced_costs(cost);
        let _ = writeln!(
            out,
            "# final tableau: {} rows, {} structural, {} slack, {} artificial",
            self.n,
            self.m,
            self.n,
            self.ncols() - self.m - self.n
        );
        let _ = writeln!(out, "iterations = {}", self.iterations);
        let _ = writeln!(out, "basic = {:?}", self.basic);
        let at_upper: Vec<usize> = (0..self.ncols()).filter(|&j| self.at_upper[j]).collect();
        let _ = writeln!(out, "at_upper = {at_upper:?}");
        let fmt_row = |row: &[S]| {
            row.iter()
                .map(|v| format!("{:.6}", v.to_f64()))
                .collect::<Vec<_>>()
                .join(", ")
        };
        let _ = writeln!(out, "reduced_costs = [{}]", fmt_row(&d));
        let _ = writeln!(out, "rows = [");
        for i in 0..self.n {
            let _ = writeln!(
                out,
                "  {{ basic = {}, value = {:.6}, coef = [{}] }},",
                self.basic[i],
                self.xb[i].to_f64(),
                fmt_row(&self.t[i])
            );
        }
        let _ = writeln!(out, "]");
        out
    }
}

pub(crate) fn solve_general<S: Scalar>(lp: &GeneralLp<S>) -> Result<SimplexOutcome<S>, LpError> {
    let mut tab = Tableau::new(lp);
    let ncols = tab.ncols();
    let (m, n) = (tab.m, tab.n);

    if tab.artificial.iter().any(|&a| a) {
        let phase1: Vec<S> = (0..ncols)
            .map(|j| if tab.artificial[j] { -S::one() } else { S::zero() })
            .collect();
        tab.optimize(&phase1)?;
        let infeasibility = tab
            .values()
            .iter()
            .enumerate()
            .filter(|(j, _)| tab.artificial[*j])
            .fold(S::zero(), |acc, (_, v)| acc + v.clone());
        if infeasibility.is_pos() {
            return Err(LpError::Infeasible);
        }
        for j in 0..ncols {
            if tab.artificial[j] {
                tab.upper[j] = Some(S::zero());
                tab.at_upper[j] = false;
            }
        }
        for i in 0..n {
            if tab.artificial[tab.basic[i]] {
                tab.xb[i] = S::zero();
            }
        }
    }

    let mut cost = vec![S::zero(); ncols];
    cost[..m].clone_from_slice(&lp.c);
    tab.optimize(&cost)?;

    let values = tab.values();
    let x: Vec<S> = values[..m].to_vec();
    let value = x
        .iter()
        .zip(&lp.c)
        .fold(S::zero(), |acc, (xj, cj)| acc + xj.clone() * cj.clone());
    let y: Vec<S> = (0..n)
        .map(|i| {
            tab.basic
                .iter()
                .enumerate()
                .fold(S::zero(), |acc, (k, &bk)| {
                    acc + cost[bk].clone() * tab.t[k][m + i].clone()
                })
        })
        .collect();
    let d = tab.reduced_costs(&cost);
    let bound_duals: Vec<S> = (0..m)
        .map(|j| {
            if tab.at_upper[j] && d[j].is_pos() {
                d[j].clone()
            } else {
                S::zero()
            }
        })
        .collect();
    let mut basic = tab.basic.clone();
    basic.sort_unstable();
    let basis = Basis {
        basic,
        at_upper: (0..ncols).filter(|&j| tab.at_upper[j]).collect(),
    };
    let dump = tab.dump(&cost);
    Ok(SimplexOutcome {
        x,
        value,
        y,
        bound_duals,
        basis,
        dump,
    })
}
