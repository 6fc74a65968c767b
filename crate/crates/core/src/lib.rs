//! Batch toolkit for cross-document software-mention coreference.
//!
//! Two unsupervised resolvers ([`fuzzy`] and [`car`]), a coreference
//! [`scorer`], a threshold tuner and corpus diagnostics ([`analysis`]), and a
//! seeded noise-injection harness ([`robustness`]).

#![allow(clippy::needless_range_loop)]

pub mod analysis;
pub mod assignment;
pub mod car;
pub mod cli;
pub mod embedding;
pub mod error;
pub mod fuzzy;
pub mod io;
pub mod lexical;
pub mod model;
pub mod robustness;
pub mod scorer;
pub mod synthetic;

pub use error::{Error, Result};
pub use model::{Corpus, Mention, Partition, SentenceRecord};
