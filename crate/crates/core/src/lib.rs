//! Distributed representations for collaborative filtering.
//!
//! The pipeline turns rating, tag, and item-metadata files into artificial
//! sentences ([`corpus`]), learns CBOW or Skip-gram vectors over them
//! ([`embedding`]), answers similarity and analogy queries over the learned
//! vectors ([`vectorspace`]), plugs either rating vectors or learned vectors
//! into neighborhood collaborative filtering ([`recommender`]), blends six
//! such predictors with a simplex-constrained linear hybrid ([`hybrid`]), and
//! scores everything with a five-partition tuning and cross-validation
//! protocol ([`eval`]).

pub mod corpus;
pub mod embedding;
pub mod error;
pub mod eval;
pub mod hybrid;
pub mod kv;
pub mod recommender;
pub mod seed;
pub mod synth;
pub mod vectorspace;

pub use error::{Error, Result};
