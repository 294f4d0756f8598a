//! Stochastic packing integer programs with queries: instances, an LP engine,
//! problem-family adapters, adaptive and non-adaptive query strategies, vertex
//! sparsification and witness-cover experiments.

pub mod adapters;
pub mod instance;
pub mod lp;
pub mod sparsifier;
pub mod strategies;
pub mod witness;
