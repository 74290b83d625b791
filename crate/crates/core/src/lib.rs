//! Symbolic test generation for synchronous state-machine models.
//!
//! A model is parsed and validated ([`model`]), explored symbolically one
//! cycle at a time ([`sym`], [`driver`]) with path conditions decided by a
//! finite-domain solver ([`solver`]), and turned into concrete SSM test
//! scripts ([`suite`]). [`coverage`] replays scripts against the
//! interpreter; [`fuzz`] is a mutation-based baseline; [`oracle`] is the
//! brute-force reference used to cross-check exploration.

pub mod cli;
pub mod coverage;
pub mod driver;
pub mod fuzz;
pub mod model;
pub mod oracle;
pub mod pipeline;
pub mod solver;
pub mod suite;
pub mod sym;
