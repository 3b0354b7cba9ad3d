//! Coverage-based ranking of hyperparameter configurations.
//!
//! Given offline grid-search results over many datasets, [`cbs::rank`] orders
//! configurations so that the first few jointly land near the per-dataset
//! optimum on as many (dataset, training size) contexts as possible.
//! [`eval`] simulates how such a ranking serves an unseen dataset and
//! [`importance`] measures how consistently each hyperparameter's preferred
//! values recur across datasets.

pub mod cbs;
pub mod error;
pub mod eval;
pub mod importance;
pub mod ingest;
pub mod model;
pub mod report;
pub mod rng;
pub mod synth;

#[cfg(feature = "oracle")]
#[doc(hidden)]
pub mod oracle;

pub use error::{Error, Result};
