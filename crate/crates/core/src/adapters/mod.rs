//! Problem-family plug-ins: a relaxation solver and an integral rounding step per
//! family, behind the [`ProblemAdapter`] trait.

pub mod bipartite;
pub mod blossom;
pub mod brute;
pub mod explicit;
pub mod fractional;
pub mod matroid;

use thiserror::Error;

use crate::instance::{Family, FamilyMeta, PackingInstance};
use crate::lp::{LpError, LpSolution};

pub use bipartite::BipartiteAdapter;
pub use blossom::BlossomAdapter;
pub use explicit::ExplicitAdapter;
pub use fractional::FractionalMatchingAdapter;
pub use matroid::{MatroidAdapter, MatroidDescription, MatroidKind};

/// Largest item count the exhaustive integral solvers accept.
pub const BRUTE_FORCE_ITEMS: usize = 24;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AdapterError {
    #[error("adapter {adapter} does not support family {family}")]
    Incompatible { family: Family, adapter: &'static str },
    #[error("{what} of {size} exceeds the limit {limit}")]
    TooLarge {
        what: &'static str,
        size: usize,
        limit: usize,
    },
    #[error("expected {expected} weights, got {got}")]
    Weights { expected: usize, got: usize },
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// A 0/1 solution and its value under the weights it was computed for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegralSolution {
    pub x: Vec<bool>,
    pub value: u64,
}

impl IntegralSolution {
    pub fn from_items(items: &[usize], weights: &[u64]) -> Self {
        let mut x = vec![false; weights.len()];
        for &j in items {
            x[j] = true;
        }
        let value = items.iter().map(|&j| weights[j]).sum();
        IntegralSolution { x, value }
    }

    pub fn empty(m: usize) -> Self {
        IntegralSolution {
            x: vec![false; m],
            value: 0,
        }
    }

    pub fn items(&self) -> Vec<usize> {
        (0..self.x.len()).filter(|&j| self.x[j]).collect()
    }

    /// Value under different weights, e.g. the realization.
    pub fn value_under(&self, weights: &[u64]) -> u64 {
        self.items().iter().map(|&j| weights[j]).sum()
    }

    pub fn as_lp_solution(&self) -> LpSolution<f64> {
        LpSolution {
            x: self.x.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
            value: self.value as f64,
            basis: None,
            is_vertex: true,
        }
    }
}

/// Relaxation and rounding for one problem family.
///
/// `alpha` is the LP-relative guarantee `round_integral >= alpha * solve_relaxation`
/// that this implementation actually meets. `nominal_alpha` is the family's value
/// used when parameterizing the sparsified strategy.
pub trait ProblemAdapter: Send + Sync {
    fn name(&self) -> &'static str;
    fn family(&self) -> Family;
    fn alpha(&self) -> f64;

    fn nominal_alpha(&self) -> f64 {
        self.alpha()
    }

    /// Query probabilities are divided by this; 1 except for k-cspip.
    fn scale_w(&self) -> f64 {
        1.0
    }

    /// Refuses instances the rounding step cannot handle, before any work is done.
    fn check_size(&self) -> Result<(), AdapterError> {
        Ok(())
    }

    fn solve_relaxation(&self, weights: &[u64]) -> Result<LpSolution<f64>, AdapterError>;
    fn round_integral(&self, weights: &[u64]) -> Result<IntegralSolution, AdapterError>;

    /// Exact integral optimum.
    fn omniscient_ip(&self, weights: &[u64]) -> Result<u64, AdapterError> {
        Ok(self.round_integral(weights)?.value)
    }
}

pub(crate) fn check_weights(weights: &[u64], m: usize) -> Result<(), AdapterError> {
    if weights.len() == m {
        Ok(())
    } else {
        Err(AdapterError::Weights {
            expected: m,
            got: weights.len(),
        })
    }
}

/// Picks the adapter for the instance's family. Non-bipartite graphs above the
/// blossom enumeration limit fall back to the fractional matching adapter.
pub fn make_adapter(inst: &PackingInstance) -> Result<Box<dyn ProblemAdapter>, AdapterError> {
    Ok(match (inst.family(), inst.meta()) {
        (Family::BipartiteMatching, _) => Box::new(BipartiteAdapter::new(inst)?),
        (Family::NonbipartiteMatching, FamilyMeta::Graph { vertices, .. })
            if *vertices <= blossom::MAX_VERTICES =>
        {
            Box::new(BlossomAdapter::new(inst)?)
        }
        (Family::NonbipartiteMatching, _) => Box::new(FractionalMatchingAdapter::new(inst)?),
        (Family::Matroid, _) => Box::new(MatroidAdapter::new(inst)?),
        (Family::KHypergraph | Family::Generic | Family::KCspip, _) => {
            Box::new(ExplicitAdapter::new(inst))
        }
    })
}
