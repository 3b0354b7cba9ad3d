//! Coverage-based search.
//!
//! Per context, scores are normalized by the context maximum and the *top
//! set* keeps the configurations strictly above a threshold. Across contexts
//! each top-set member accumulates `S_n`, the sum of its normalized scores
//! where it made the cut. A member *covers* a context when no member with a
//! strictly larger `S_n` is in that context's top set. The final ranking is by
//! coverage size.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::model::{Configuration, Context, NormalizedScore, ScoreTable, Split};

pub const DEFAULT_THRESHOLD: f64 = 0.97;

pub fn check_threshold(threshold: f64) -> Result<()> {
    if threshold > 0.0 && threshold < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidThreshold(threshold))
    }
}

/// Each configuration's score divided by the best score in (context, split).
pub fn normalize(
    table: &ScoreTable,
    context: &Context,
    split: Split,
) -> Result<BTreeMap<Configuration, NormalizedScore>> {
    let scores = table.scores(context, split).ok_or_else(|| Error::EmptyContext {
        context: context.clone(),
        split,
    })?;
    let max = scores.values().copied().fold(0.0_f64, f64::max);
    if max <= 0.0 {
        return Err(Error::DegenerateContext {
            context: context.clone(),
            split,
        });
    }
    Ok(scores
        .iter()
        .map(|(c, &s)| (c.clone(), NormalizedScore::new(s / max)))
        .collect())
}

/// Configurations of one context whose normalized score is strictly above
/// the threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct TopSet {
    pub context: Context,
    pub members: BTreeMap<Configuration, NormalizedScore>,
}

pub fn top_set(table: &ScoreTable, context: &Context, split: Split, threshold: f64) -> Result<TopSet> {
    check_threshold(threshold)?;
    let members = normalize(table, context, split)?
        .into_iter()
        .filter(|(_, s)| s.value() > threshold)
        .collect();
    Ok(TopSet {
        context: context.clone(),
        members,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankOptions {
    pub threshold: f64,
    pub split: Split,
    /// Drop contexts whose scores are all zero instead of failing.
    pub skip_degenerate: bool,
}

impl Default for RankOptions {
    fn default() -> Self {
        RankOptions {
            threshold: DEFAULT_THRESHOLD,
            split: Split::Test,
            skip_degenerate: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankEntry {
    pub config: Configuration,
    /// `S_n`: sum of normalized scores over the contexts where the
    /// configuration is in the top set.
    pub s_sum: f64,
    pub coverage: BTreeSet<Context>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CbsRanking {
    pub entries: Vec<RankEntry>,
    /// Contexts that fed the ranking, sorted.
    pub contexts: Vec<Context>,
    /// Degenerate contexts dropped under `skip_degenerate`.
    pub skipped: Vec<Context>,
    pub split: Split,
    pub threshold: f64,
}

impl CbsRanking {
    pub fn top(&self) -> Option<&RankEntry> {
        self.entries.first()
    }

    pub fn position(&self, config: &Configuration) -> Option<usize> {
        self.entries.iter().position(|e| &e.config == config)
    }
}

/// Ranks every member of the union of the contexts' top sets.
///
/// Ties on coverage size are broken by `S_n` (descending), then by the
/// configuration's declared value order.
pub fn rank<'a>(
    table: &ScoreTable,
    contexts: impl IntoIterator<Item = &'a Context>,
    options: RankOptions,
) -> Result<CbsRanking> {
    check_threshold(options.threshold)?;
    let contexts: BTreeSet<&Context> = contexts.into_iter().collect();
    if contexts.is_empty() {
        return Err(Error::InvalidArgument("ranking needs at least one context".into()));
    }
    let mut top_sets = Vec::with_capacity(contexts.len());
    let mut skipped = Vec::new();
    for &context in &contexts {
        match top_set(table, context, options.split, options.threshold) {
            Ok(ts) => top_sets.push(ts),
            Err(Error::DegenerateContext { .. }) if options.skip_degenerate => skipped.push(context.clone()),
            Err(e) => return Err(e),
        }
    }
    if top_sets.is_empty() {
        return Err(Error::InvalidArgument("every context was degenerate".into()));
    }
    let entries = rank_top_sets(&top_sets);
    Ok(CbsRanking {
        entries,
        contexts: top_sets.iter().map(|t| t.context.clone()).collect(),
        skipped,
        split: options.split,
        threshold: options.threshold,
    })
}

/// Ranking reduction over precomputed top sets, given in context order.
pub fn rank_top_sets(top_sets: &[TopSet]) -> Vec<RankEntry> {
    let mut s_sum: BTreeMap<&Configuration, f64> = BTreeMap::new();
    for ts in top_sets {
        for (config, s) in &ts.members {
            *s_sum.entry(config).or_insert(0.0) += s.value();
        }
    }

    let mut coverage: BTreeMap<&Configuration, BTreeSet<Context>> = s_sum.keys().map(|&c| (c, BTreeSet::new())).collect();
    for ts in top_sets {
        // Members tied at the context's largest S_n have nothing ranked above
        // them in this context; everyone else does.
        let best = ts.members.keys().map(|c| s_sum[c]).fold(f64::NEG_INFINITY, f64::max);
        for config in ts.members.keys().filter(|c| s_sum[*c] == best) {
            coverage.get_mut(config).expect("member has an S_n").insert(ts.context.clone());
        }
    }

    let mut entries: Vec<RankEntry> = coverage
        .into_iter()
        .map(|(config, coverage)| RankEntry {
            config: config.clone(),
            s_sum: s_sum[config],
            coverage,
        })
        .collect();
    entries.sort_by(compare_entries);
    entries
}

fn compare_entries(a: &RankEntry, b: &RankEntry) -> Ordering {
    b.coverage
        .len()
        .cmp(&a.coverage.len())
        .then_with(|| b.s_sum.total_cmp(&a.s_sum))
        .then_with(|| a.config.cmp(&b.config))
}
