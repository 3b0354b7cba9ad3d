use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::space::{ConfigSpace, Configuration};

/// A (dataset, training-set size) pair: the unit scores are normalized over.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Context {
    pub dataset: String,
    pub train_size: u64,
}

impl Context {
    pub fn new(dataset: impl Into<String>, train_size: u64) -> Self {
        Context {
            dataset: dataset.into(),
            train_size,
        }
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.dataset, self.train_size)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Validation,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Validation => "validation",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "validation" => Ok(Split::Validation),
            "test" => Ok(Split::Test),
            other => Err(format!("unknown split '{other}' (expected validation or test)")),
        }
    }
}

/// A score divided by the best score of its (context, split); lies in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct NormalizedScore(f64);

impl NormalizedScore {
    pub(crate) fn new(value: f64) -> Self {
        debug_assert!((0.0..=1.0).contains(&value));
        NormalizedScore(value)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRecord {
    pub context: Context,
    pub split: Split,
    pub config: Configuration,
    pub score: f64,
}

/// Outcome of [`ScoreTable::insert`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Insert {
    New,
    /// Same cell and same score already present; nothing changed.
    Duplicate,
}

type Cell = (Context, Split);

/// Grid-search results: a raw score per (context, split, configuration).
///
/// Storage is ordered, so iteration and equality never depend on the order
/// records were inserted in.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    space: ConfigSpace,
    cells: BTreeMap<Cell, BTreeMap<Configuration, f64>>,
}

impl ScoreTable {
    pub fn new(space: ConfigSpace) -> Self {
        ScoreTable {
            space,
            cells: BTreeMap::new(),
        }
    }

    pub fn space(&self) -> &ConfigSpace {
        &self.space
    }

    /// Adds a record. Scores must be finite and non-negative; re-adding an
    /// identical record is a no-op and a conflicting one is an error.
    pub fn insert(&mut self, record: ScoreRecord) -> Result<Insert> {
        let ScoreRecord {
            context,
            split,
            config,
            score,
        } = record;
        self.space.validate(&config)?;
        // folds -0.0 into 0.0
        let score = score + 0.0;
        if !score.is_finite() {
            return Err(Error::InvalidArgument(format!("non-finite score {score}")));
        }
        if score < 0.0 {
            return Err(Error::InvalidArgument(format!("negative score {score}")));
        }
        if context.dataset.is_empty() {
            return Err(Error::InvalidArgument("empty dataset name".into()));
        }
        if context.train_size == 0 {
            return Err(Error::InvalidArgument("train_size must be positive".into()));
        }
        let key = (context, split);
        if let Some(&existing) = self.cells.get(&key).and_then(|m| m.get(&config)) {
            if existing == score {
                return Ok(Insert::Duplicate);
            }
            return Err(Error::InvalidArgument(format!(
                "conflicting scores {existing} and {score} for {} in {} ({split})",
                self.space.describe(&config),
                key.0,
            )));
        }
        self.cells.entry(key).or_default().insert(config, score);
        Ok(Insert::New)
    }

    /// Scores for one (context, split), keyed by configuration.
    pub fn scores(&self, context: &Context, split: Split) -> Option<&BTreeMap<Configuration, f64>> {
        self.cells.get(&(context.clone(), split)).filter(|m| !m.is_empty())
    }

    pub fn score(&self, context: &Context, split: Split, config: &Configuration) -> Option<f64> {
        self.scores(context, split).and_then(|m| m.get(config).copied())
    }

    /// Every (context, split) that holds at least one record, in order.
    pub fn cells(&self) -> impl Iterator<Item = (&Context, Split, &BTreeMap<Configuration, f64>)> {
        self.cells
            .iter()
            .filter(|(_, m)| !m.is_empty())
            .map(|((c, s), m)| (c, *s, m))
    }

    /// Contexts with records in `split`.
    pub fn contexts(&self, split: Split) -> Vec<Context> {
        self.cells().filter(|(_, s, _)| *s == split).map(|(c, _, _)| c.clone()).collect()
    }

    /// Contexts with records in any split.
    pub fn all_contexts(&self) -> BTreeSet<Context> {
        self.cells().map(|(c, _, _)| c.clone()).collect()
    }

    pub fn datasets(&self) -> BTreeSet<String> {
        self.cells().map(|(c, _, _)| c.dataset.clone()).collect()
    }

    pub fn train_sizes(&self) -> BTreeSet<u64> {
        self.cells().map(|(c, _, _)| c.train_size).collect()
    }

    pub fn records(&self) -> impl Iterator<Item = ScoreRecord> + '_ {
        self.cells().flat_map(|(context, split, m)| {
            m.iter().map(move |(config, &score)| ScoreRecord {
                context: context.clone(),
                split,
                config: config.clone(),
                score,
            })
        })
    }

    pub fn len(&self) -> usize {
        self.cells.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Hyperparameter, Kind};

    fn table() -> ScoreTable {
        let space = ConfigSpace::new(
            "t",
            vec![Hyperparameter::new("lr", Kind::Categorical, &["a", "b"]).unwrap()],
        )
        .unwrap();
        ScoreTable::new(space)
    }

    fn rec(t: &ScoreTable, v: &str, score: f64) -> ScoreRecord {
        ScoreRecord {
            context: Context::new("d", 100),
            split: Split::Test,
            config: t.space().config(&[v]).unwrap(),
            score,
        }
    }

    #[test]
    fn duplicates_collapse_and_conflicts_fail() {
        let mut t = table();
        assert_eq!(t.insert(rec(&t, "a", 1.0)).unwrap(), Insert::New);
        assert_eq!(t.insert(rec(&t, "a", 1.0)).unwrap(), Insert::Duplicate);
        assert!(t.insert(rec(&t, "a", 2.0)).is_err());
        assert_eq!(t.len(), 1);
    }

    #[test]
    fn rejects_bad_scores() {
        let mut t = table();
        assert!(t.insert(rec(&t, "a", -0.2)).is_err());
        assert!(t.insert(rec(&t, "a", f64::NAN)).is_err());
        assert!(t.insert(rec(&t, "a", f64::INFINITY)).is_err());
        assert!(t.is_empty());
    }

    #[test]
    fn insertion_order_does_not_matter() {
        let mut a = table();
        let mut b = table();
        for (v, s) in [("a", 1.0), ("b", 2.0)] {
            a.insert(rec(&a, v, s)).unwrap();
        }
        for (v, s) in [("b", 2.0), ("a", 1.0)] {
            b.insert(rec(&b, v, s)).unwrap();
        }
        assert_eq!(a, b);
    }
}
