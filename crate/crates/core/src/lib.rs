//! Identification of asymptomatic (infected but unobserved) nodes in SI
//! network epidemics.
//!
//! The pipeline runs end to end:
//!
//! 1. [`graph`] generates Barabási–Albert or Watts–Strogatz contact networks
//!    and computes shortest-path quantities, including betweenness restricted
//!    to pairs of observed nodes.
//! 2. [`epidemic`] runs a discrete-time SI process until a fixed fraction of
//!    the nodes is infected, then marks each infected node as observed with
//!    probability `theta`.
//! 3. [`features`] turns a snapshot into the eight per-node input features.
//! 4. [`gcn`] trains a two-layer graph convolutional network on those
//!    features with hand-written gradients and Adam.
//! 5. [`eval`] scores the evaluation pool (every node not observed as
//!    infected) by AUC and top-k precision, for the GCN and for the observed
//!    betweenness ranking.
//!
//! [`dataset`] persists instances as line-delimited JSON with a hashed
//! manifest so that every experiment is reproducible from its seed.

pub mod dataset;
pub mod epidemic;
pub mod error;
pub mod eval;
pub mod features;
pub mod gcn;
pub mod graph;
pub mod rng;

pub use error::{Error, Result};
