//! Explicit-matrix adapter: lp-engine relaxation and exhaustive rounding. Serves
//! k-hypergraph matching, k-cspip and generic instances.

use super::{brute, check_weights, AdapterError, IntegralSolution, ProblemAdapter, BRUTE_FORCE_ITEMS};
use crate::instance::{Family, FamilyMeta, PackingInstance};
use crate::lp::{solve_primal, LpProblem, LpSolution};

#[derive(Debug, Clone)]
pub struct ExplicitAdapter {
    inst: PackingInstance,
    alpha: f64,
    scale_w: f64,
}

/// `1 / (k - 1 + 1/k)`, the integrality gap of the k-uniform hypergraph matching LP.
pub fn hypergraph_alpha(k: usize) -> f64 {
    let k = k.max(1) as f64;
    1.0 / (k - 1.0 + 1.0 / k)
}

impl ExplicitAdapter {
    pub fn new(inst: &PackingInstance) -> Self {
        let m = inst.cols().max(1) as f64;
        let alpha = match inst.meta() {
            FamilyMeta::Hypergraph { k, .. } => hypergraph_alpha(*k),
            // every single item is feasible, so IP >= max_j c_j >= LP / m
            _ => 1.0 / m,
        };
        let scale_w = if inst.family() == Family::KCspip {
            inst.column_scale()
        } else {
            1.0
        };
        ExplicitAdapter {
            inst: inst.clone(),
            alpha,
            scale_w,
        }
    }
}

impl ProblemAdapter for ExplicitAdapter {
    fn name(&self) -> &'static str {
        "explicit"
    }

    fn family(&self) -> Family {
        self.inst.family()
    }

    fn alpha(&self) -> f64 {
        self.alpha
    }

    fn scale_w(&self) -> f64 {
        self.scale_w
    }

    fn check_size(&self) -> Result<(), AdapterError> {
        if self.inst.cols() > BRUTE_FORCE_ITEMS {
            return Err(AdapterError::TooLarge {
                what: "brute-force item count",
                size: self.inst.cols(),
                limit: BRUTE_FORCE_ITEMS,
            });
        }
        Ok(())
    }

    fn solve_relaxation(&self, weights: &[u64]) -> Result<LpSolution<f64>, AdapterError> {
        check_weights(weights, self.inst.cols())?;
        let prob = LpProblem::from_instance(&self.inst, weights)?;
        Ok(solve_primal::<f64>(&prob)?)
    }

    fn round_integral(&self, weights: &[u64]) -> Result<IntegralSolution, AdapterError> {
        brute::best_packing(&self.inst, weights)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kcspip_uses_unit_bounds_and_scale() {
        let inst = PackingInstance::column_sparse(vec![vec![1, 1]], vec![2], 1).unwrap();
        let adapter = ExplicitAdapter::new(&inst);
        assert_eq!(adapter.scale_w(), 2.0);
        let relax = adapter.solve_relaxation(&[3, 4]).unwrap();
        assert!((relax.value - 7.0).abs() < 1e-9);
        assert_eq!(adapter.round_integral(&[3, 4]).unwrap().value, 7);
    }

    #[test]
    fn hypergraph_alpha_values() {
        assert!((hypergraph_alpha(2) - 2.0 / 3.0).abs() < 1e-12);
        assert!((hypergraph_alpha(3) - 3.0 / 7.0).abs() < 1e-12);
        assert_eq!(hypergraph_alpha(1), 1.0);
    }

    #[test]
    fn fano_like_gap_respects_alpha() {
        // 3-uniform: the three lines through a triangle of pairs
        let edges = vec![vec![0, 1, 3], vec![1, 2, 4], vec![0, 2, 5], vec![3, 4, 5]];
        let inst = PackingInstance::hypergraph(6, 3, edges).unwrap();
        let adapter = ExplicitAdapter::new(&inst);
        let w = [1; 4];
        let relax = adapter.solve_relaxation(&w).unwrap().value;
        let round = adapter.round_integral(&w).unwrap().value as f64;
        assert!(round >= adapter.alpha() * relax - 1e-9);
        assert!(adapter.check_size().is_ok());
    }
}
