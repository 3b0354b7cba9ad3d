//! Domain types shared by every analysis: the search space, its grid points,
//! evaluation contexts and the table of observed scores.

mod space;
mod table;
mod value;

pub use space::{ConfigSpace, Configuration, Hyperparameter};
pub use table::{Context, Insert, NormalizedScore, ScoreRecord, ScoreTable, Split};
pub use value::{canonical_value, Kind};
