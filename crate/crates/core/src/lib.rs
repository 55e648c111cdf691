//! Online spatial concept learning with information-gain exploration.
//!
//! A mobile robot asks "What kind of place is this?" at candidate points of
//! an occupancy-grid map, learns place categories that tie positions to words
//! with a Rao-Blackwellized particle filter, and picks each next question point
//! by maximizing expected information gain minus a travel cost.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod eval;
pub mod explore;
pub mod grid;
pub mod model;
pub mod rbpf;
pub mod rng;
pub mod runner;
pub mod teacher;

pub use error::{Error, Result};
