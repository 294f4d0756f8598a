//! Exact-at-desk-scale LP solving for `max{c.x : A x <= b, 0 <= x <= 1}` with dual
//! extraction and duality checks.
//!
//! The solver is generic over [`Scalar`]: `f64` for speed and
//! [`num_rational::BigRational`] for exact answers. Everything is deterministic:
//! Bland's least-index rule picks both the entering and the leaving column.

mod duality;
mod scalar;
mod simplex;

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::instance::{Family, PackingInstance};

pub use duality::{check_duality, DualityReport, DualityViolation};
pub use scalar::Scalar;
pub use simplex::Basis;

use simplex::{solve_general, GeneralLp};

/// Exact rational arithmetic.
pub type Rational = BigRational;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("LP is infeasible")]
    Infeasible,
    #[error("LP is unbounded")]
    Unbounded,
    #[error("simplex stopped after {0} iterations")]
    IterationLimit(usize),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("objective coefficient {index} is negative or not finite")]
    BadObjective { index: usize },
}

/// `max objective.x  s.t.  A x <= b, x >= 0`, plus `x <= 1` when
/// `explicit_unit_bounds` is set.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    a: Vec<Vec<u64>>,
    b: Vec<u64>,
    objective: Vec<f64>,
    explicit_unit_bounds: bool,
}

impl LpProblem {
    pub fn new(
        a: Vec<Vec<u64>>,
        b: Vec<u64>,
        objective: Vec<f64>,
        explicit_unit_bounds: bool,
    ) -> Result<Self, LpError> {
        if a.len() != b.len() {
            return Err(LpError::Dimension(format!(
                "A has {} rows, b has {}",
                a.len(),
                b.len()
            )));
        }
        if let Some(i) = a.iter().position(|r| r.len() != objective.len()) {
            return Err(LpError::Dimension(format!(
                "row {i} has {} entries, objective has {}",
                a[i].len(),
                objective.len()
            )));
        }
        if let Some(index) = objective.iter().position(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(LpError::BadObjective { index });
        }
        Ok(LpProblem {
            a,
            b,
            objective,
            explicit_unit_bounds,
        })
    }

    /// Relaxation of `inst` under integer `weights`. Unit bounds are explicit only for
    /// k-cspip, where `A x <= b` does not imply them.
    pub fn from_instance(inst: &PackingInstance, weights: &[u64]) -> Result<Self, LpError> {
        let a = (0..inst.rows()).map(|i| inst.row(i).to_vec()).collect();
        Self::new(
            a,
            inst.capacities().to_vec(),
            weights.iter().map(|&w| w as f64).collect(),
            inst.family() == Family::KCspip,
        )
    }

    pub fn rows(&self) -> usize {
        self.b.len()
    }

    pub fn cols(&self) -> usize {
        self.objective.len()
    }

    pub fn matrix(&self) -> &[Vec<u64>] {
        &self.a
    }

    pub fn capacities(&self) -> &[u64] {
        &self.b
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn explicit_unit_bounds(&self) -> bool {
        self.explicit_unit_bounds
    }

    /// Multiplies each objective coefficient by `1 + magnitude * u_j` with `u_j`
    /// uniform in `[0, 1)`. Used to probe sensitivity to the choice among tied
    /// optimal vertices.
    pub fn perturbed(&self, seed: u64, magnitude: f64) -> LpProblem {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let objective = self
            .objective
            .iter()
            .map(|c| c * (1.0 + magnitude * rng.gen::<f64>()))
            .collect();
        LpProblem {
            objective,
            ..self.clone()
        }
    }

    fn general<S: Scalar>(&self) -> GeneralLp<S> {
        GeneralLp {
            a: self
                .a
                .iter()
                .map(|r| r.iter().map(|&v| S::from_u64(v)).collect())
                .collect(),
            b: self.b.iter().map(|&v| S::from_u64(v)).collect(),
            c: self.objective.iter().map(|&v| S::from_f64(v)).collect(),
            upper: vec![self.explicit_unit_bounds.then(S::one); self.cols()],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution<S> {
    pub x: Vec<S>,
    pub value: S,
    /// Absent when the solution came from a combinatorial algorithm rather than a
    /// simplex basis.
    pub basis: Option<Basis>,
    pub is_vertex: bool,
}

impl<S: Scalar> LpSolution<S> {
    pub fn to_f64(&self) -> LpSolution<f64> {
        LpSolution {
            x: self.x.iter().map(Scalar::to_f64).collect(),
            value: self.value.to_f64(),
            basis: self.basis.clone(),
            is_vertex: self.is_vertex,
        }
    }

    /// Every coordinate within tolerance of 0 or 1.
    pub fn is_integral(&self) -> bool {
        self.x
            .iter()
            .all(|v| v.is_zero_tol() || (v.clone() - S::one()).is_zero_tol())
    }
}

/// Row multipliers `y` and, for explicit unit bounds, one multiplier per column.
#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution<S> {
    pub y: Vec<S>,
    pub bound_duals: Vec<S>,
    pub value: S,
}

#[derive(Debug, Clone)]
pub struct LpOutcome<S> {
    pub primal: LpSolution<S>,
    pub dual: DualSolution<S>,
    tableau: String,
}

impl<S> LpOutcome<S> {
    /// Structured-text dump of the final tableau.
    pub fn tableau_dump(&self) -> &str {
        &self.tableau
    }
}

/// Solves the primal and reads the dual off the final basis.
pub fn solve<S: Scalar>(prob: &LpProblem) -> Result<LpOutcome<S>, LpError> {
    let out = solve_general(&prob.general::<S>())?;
    let mut value = out.value.clone();
    if S::TOL > 0.0 && value.is_zero_tol() {
        value = S::zero();
    }
    let dual_value = out
        .y
        .iter()
        .zip(&prob.b)
        .fold(S::zero(), |acc, (y, &b)| acc + y.clone() * S::from_u64(b))
        + out
            .bound_duals
            .iter()
            .fold(S::zero(), |acc, r| acc + r.clone());
    let bound_duals = if prob.explicit_unit_bounds {
        out.bound_duals
    } else {
        Vec::new()
    };
    Ok(LpOutcome {
        primal: LpSolution {
            x: out.x,
            value,
            basis: Some(out.basis),
            is_vertex: true,
        },
        dual: DualSolution {
            y: out.y,
            bound_duals,
            value: dual_value,
        },
        tableau: out.dump,
    })
}

pub fn solve_primal<S: Scalar>(prob: &LpProblem) -> Result<LpSolution<S>, LpError> {
    solve::<S>(prob).map(|o| o.primal)
}

/// Dual optimum extracted from the primal's final basis.
pub fn solve_dual<S: Scalar>(prob: &LpProblem) -> Result<DualSolution<S>, LpError> {
    solve::<S>(prob).map(|o| o.dual)
}

/// Solves the dual LP `min y.b + sum r  s.t.  y^T A + r >= c, y, r >= 0` as an LP of
/// its own, independent of the primal basis.
pub fn solve_dual_explicit<S: Scalar>(prob: &LpProblem) -> Result<DualSolution<S>, LpError> {
    let n = prob.rows();
    let m = prob.cols();
    let extra = if prob.explicit_unit_bounds { m } else { 0 };
    // one row per primal column: -A_j^T y - r_j <= -c_j
    let a: Vec<Vec<S>> = (0..m)
        .map(|j| {
            let mut row: Vec<S> = (0..n).map(|i| -S::from_u64(prob.a[i][j])).collect();
            row.extend((0..extra).map(|k| if k == j { -S::one() } else { S::zero() }));
            row
        })
        .collect();
    let b: Vec<S> = prob.objective.iter().map(|&c| -S::from_f64(c)).collect();
    let mut c: Vec<S> = prob.b.iter().map(|&v| -S::from_u64(v)).collect();
    c.extend((0..extra).map(|_| -S::one()));
    let lp = GeneralLp {
        a,
        b,
        c,
        upper: vec![None; n + extra],
    };
    let out = solve_general(&lp)?;
    Ok(DualSolution {
        y: out.x[..n].to_vec(),
        bound_duals: out.x[n..].to_vec(),
        value: -out.value,
    })
}

/// `min y.b  s.t.  y^T A >= c, y >= 0` for an arbitrary integer right-hand side `c`.
/// Returns `None` when no such `y` exists.
pub fn min_dual_cover<S: Scalar>(
    a: &[Vec<u64>],
    b: &[u64],
    c: &[u64],
) -> Result<Option<(Vec<S>, S)>, LpError> {
    let n = b.len();
    let m = c.len();
    let lp = GeneralLp {
        a: (0..m)
            .map(|j| (0..n).map(|i| -S::from_u64(a[i][j])).collect())
            .collect(),
        b: c.iter().map(|&v| -S::from_u64(v)).collect(),
        c: b.iter().map(|&v| -S::from_u64(v)).collect(),
        upper: vec![None; n],
    };
    match solve_general(&lp) {
        Ok(out) => Ok(Some((out.x, -out.value))),
        Err(LpError::Infeasible) => Ok(None),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> LpProblem {
        LpProblem::new(
            vec![vec![1, 0, 1], vec![1, 1, 0], vec![0, 1, 1]],
            vec![1, 1, 1],
            vec![1.0; 3],
            false,
        )
        .unwrap()
    }

    fn k22() -> LpProblem {
        // left 0,1 right 2,3; edges (0,2) (0,3) (1,2) (1,3)
        LpProblem::new(
            vec![
                vec![1, 1, 0, 0],
                vec![0, 0, 1, 1],
                vec![1, 0, 1, 0],
                vec![0, 1, 0, 1],
            ],
            vec![1; 4],
            vec![1.0; 4],
            false,
        )
        .unwrap()
    }

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn single_constraint() {
        let prob = LpProblem::new(vec![vec![1, 1]], vec![1], vec![1.0, 1.0], false).unwrap();
        let sol = solve_primal::<Rational>(&prob).unwrap();
        assert_eq!(sol.value, q(1, 1));
        assert!(sol.is_vertex && sol.is_integral());
    }

    #[test]
    fn k22_value_two_integral() {
        let sol = solve_primal::<Rational>(&k22()).unwrap();
        assert_eq!(sol.value, q(2, 1));
        assert!(sol.is_integral());
        let dual = solve_dual::<Rational>(&k22()).unwrap();
        assert_eq!(dual.value, q(2, 1));
        assert!(dual.y.iter().all(|y| y.is_integer()));
    }

    #[test]
    fn triangle_half_integral() {
        let sol = solve_primal::<Rational>(&triangle()).unwrap();
        assert_eq!(sol.value, q(3, 2));
        assert_eq!(sol.x, vec![q(1, 2); 3]);
        let dual = solve_dual::<Rational>(&triangle()).unwrap();
        assert_eq!(dual.value, q(3, 2));
    }

    #[test]
    fn scalar_single_constraint_dual() {
        let prob = LpProblem::new(vec![vec![1]], vec![1], vec![3.0], false).unwrap();
        let out = solve::<Rational>(&prob).unwrap();
        assert_eq!(out.dual.y, vec![q(3, 1)]);
        assert_eq!(out.dual.value, q(3, 1));
    }

    #[test]
    fn explicit_dual_matches_basis_dual() {
        for prob in [triangle(), k22()] {
            let from_basis = solve_dual::<Rational>(&prob).unwrap();
            let explicit = solve_dual_explicit::<Rational>(&prob).unwrap();
            assert_eq!(from_basis.value, explicit.value);
        }
    }

    #[test]
    fn explicit_bounds_produce_bound_duals() {
        // x1 + x2 <= 2 with x <= 1: both at upper, row slack
        let prob = LpProblem::new(vec![vec![1, 1]], vec![2], vec![2.0, 3.0], true).unwrap();
        let out = solve::<Rational>(&prob).unwrap();
        assert_eq!(out.primal.value, q(5, 1));
        assert_eq!(out.dual.value, q(5, 1));
        assert_eq!(out.dual.bound_duals.len(), 2);
        let explicit = solve_dual_explicit::<Rational>(&prob).unwrap();
        assert_eq!(explicit.value, q(5, 1));
    }

    #[test]
    fn unbounded_without_bounds() {
        let prob = LpProblem::new(vec![vec![0]], vec![1], vec![1.0], false).unwrap();
        assert_eq!(solve_primal::<f64>(&prob).unwrap_err(), LpError::Unbounded);
    }

    #[test]
    fn rejects_bad_objective() {
        let err = LpProblem::new(vec![vec![1]], vec![1], vec![-1.0], false).unwrap_err();
        assert_eq!(err, LpError::BadObjective { index: 0 });
    }

    #[test]
    fn min_cover_infeasible_on_zero_column() {
        let res = min_dual_cover::<Rational>(&[vec![0]], &[1], &[1]).unwrap();
        assert!(res.is_none());
        let (y, v) = min_dual_cover::<Rational>(&[vec![1, 1]], &[1], &[2, 1])
            .unwrap()
            .unwrap();
        assert_eq!(v, q(2, 1));
        assert_eq!(y, vec![q(2, 1)]);
    }

    #[test]
    fn deterministic_and_dump_present() {
        let a = solve::<f64>(&triangle()).unwrap();
        let b = solve::<f64>(&triangle()).unwrap();
        assert_eq!(a.primal, b.primal);
        assert_eq!(a.dual, b.dual);
        assert!(a.tableau_dump().contains("basic ="));
    }

    #[test]
    fn perturbation_keeps_sign_and_is_seeded() {
        let p = triangle();
        let a = p.perturbed(7, 1e-3);
        assert_eq!(a, p.perturbed(7, 1e-3));
        assert!(a.objective().iter().all(|&c| (1.0..1.001).contains(&c)));
    }
}
