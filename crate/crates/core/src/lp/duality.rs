use super::{DualSolution, LpProblem, LpSolution, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub enum DualityViolation {
    PrimalRow { row: usize, excess: f64 },
    PrimalBound { col: usize, value: f64 },
    DualNegative { index: usize, value: f64 },
    /// `(y^T A)_j + r_j < c_j`.
    DualColumn { col: usize, shortfall: f64 },
    Gap { primal: f64, dual: f64 },
    /// `y_i > 0` on a slack row.
    SlackRow { row: usize, y: f64, slack: f64 },
    /// `x_j > 0` on a column whose dual constraint is not tight.
    SlackColumn { col: usize, x: f64, reduced: f64 },
    /// `r_j > 0` while `x_j < 1`.
    SlackBound { col: usize, r: f64, x: f64 },
}

impl DualityViolation {
    fn magnitude(&self) -> f64 {
        match *self {
            DualityViolation::PrimalRow { excess, .. } => excess,
            DualityViolation::PrimalBound { value, .. } => value.abs(),
            DualityViolation::DualNegative { value, .. } => -value,
            DualityViolation::DualColumn { shortfall, .. } => shortfall,
            DualityViolation::Gap { primal, dual } => (primal - dual).abs(),
            DualityViolation::SlackRow { y, slack, .. } => y * slack,
            DualityViolation::SlackColumn { x, reduced, .. } => x * reduced.abs(),
            DualityViolation::SlackBound { r, x, .. } => r * (1.0 - x),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualityReport {
    pub gap: f64,
    pub primal_feasible: bool,
    pub dual_feasible: bool,
    pub complementary_slackness: bool,
    pub violations: Vec<DualityViolation>,
}

impl DualityReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    /// The violation with the largest magnitude.
    pub fn worst(&self) -> Option<&DualityViolation> {
        self.violations
            .iter()
            .max_by(|a, b| a.magnitude().total_cmp(&b.magnitude()))
    }
}

/// Checks primal and dual feasibility, the duality gap and complementary slackness.
///
/// `gap_tol` bounds `|primal - dual|`; the other checks use the scalar's own
/// tolerance (exact for rationals).
pub fn check_duality<S: Scalar>(
    prob: &LpProblem,
    primal: &LpSolution<S>,
    dual: &DualSolution<S>,
    gap_tol: f64,
) -> DualityReport {
    let n = prob.rows();
    let m = prob.cols();
    let a = |i: usize, j: usize| S::from_u64(prob.a[i][j]);
    let mut violations = Vec::new();

    let mut primal_feasible = true;
    let mut slacks = Vec::with_capacity(n);
    for i in 0..n {
        let load = (0..m).fold(S::zero(), |acc, j| acc + a(i, j) * primal.x[j].clone());
        let slack = S::from_u64(prob.b[i]) - load;
        if slack.is_neg() {
            primal_feasible = false;
            violations.push(DualityViolation::PrimalRow {
                row: i,
                excess: -slack.to_f64(),
            });
        }
        slacks.push(slack);
    }
    for (j, xj) in primal.x.iter().enumerate() {
        let over = prob.explicit_unit_bounds && (xj.clone() - S::one()).is_pos();
        if xj.is_neg() || over {
            primal_feasible = false;
            violations.push(DualityViolation::PrimalBound {
                col: j,
                value: xj.to_f64(),
            });
        }
    }

    let r = |j: usize| {
        dual.bound_duals
            .get(j)
            .cloned()
            .unwrap_or_else(S::zero)
    };
    let mut dual_feasible = true;
    for (index, v) in dual.y.iter().chain(dual.bound_duals.iter()).enumerate() {
        if v.is_neg() {
            dual_feasible = false;
            violations.push(DualityViolation::DualNegative {
                index,
                value: v.to_f64(),
            });
        }
    }
    let mut reduced = Vec::with_capacity(m);
    for j in 0..m {
        let cover = (0..n).fold(S::zero(), |acc, i| acc + dual.y[i].clone() * a(i, j)) + r(j);
        let red = cover - S::from_f64(prob.objective[j]);
        if red.is_neg() {
            dual_feasible = false;
            violations.push(DualityViolation::DualColumn {
                col: j,
                shortfall: -red.to_f64(),
            });
        }
        reduced.push(red);
    }

    let gap = (primal.value.to_f64() - dual.value.to_f64()).abs();
    let exact_gap = primal.value.clone() - dual.value.clone();
    let gap_ok = if S::TOL == 0.0 {
        exact_gap.is_zero_tol()
    } else {
        gap <= gap_tol
    };
    if !gap_ok {
        violations.push(DualityViolation::Gap {
            primal: primal.value.to_f64(),
            dual: dual.value.to_f64(),
        });
    }

    let mut cs = true;
    for i in 0..n {
        if dual.y[i].is_pos() && slacks[i].is_pos() {
            cs = false;
            violations.push(DualityViolation::SlackRow {
                row: i,
                y: dual.y[i].to_f64(),
                slack: slacks[i].to_f64(),
            });
        }
    }
    for j in 0..m {
        if primal.x[j].is_pos() && !reduced[j].is_zero_tol() {
            cs = false;
            violations.push(DualityViolation::SlackColumn {
                col: j,
                x: primal.x[j].to_f64(),
                reduced: reduced[j].to_f64(),
            });
        }
        if r(j).is_pos() && (S::one() - primal.x[j].clone()).is_pos() {
            cs = false;
            violations.push(DualityViolation::SlackBound {
                col: j,
                r: r(j).to_f64(),
                x: primal.x[j].to_f64(),
            });
        }
    }

    DualityReport {
        gap,
        primal_feasible,
        dual_feasible,
        complementary_slackness: cs,
        violations,
    }
}
