//! Evaluation protocols: a fixed configuration, the per-dataset validation
//! upper bound, leave-one-dataset-out CBS, and budget curves over the
//! leave-one-out ranking.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::cbs::{self, CbsRanking, RankOptions};
use crate::error::{Error, Result};
use crate::ingest::TaskMap;
use crate::model::{Configuration, Context, ScoreTable, Split};

pub const DEFAULT_MAX_BUDGET: usize = 10;

/// Label for datasets a task map does not mention.
pub const UNMAPPED_TASK: &str = "other";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupMean {
    pub task: String,
    pub train_size: u64,
    pub contexts: usize,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedConfigEval {
    pub per_context: Vec<(Context, f64)>,
    pub groups: Vec<GroupMean>,
}

fn task_of(tasks: Option<&TaskMap>, dataset: &str) -> String {
    match tasks {
        None => "all".to_string(),
        Some(map) => map.task_of(dataset).unwrap_or(UNMAPPED_TASK).to_string(),
    }
}

/// Unweighted mean of `values` per (task, train size).
pub fn macro_average<'a>(values: impl IntoIterator<Item = (&'a Context, f64)>, tasks: Option<&TaskMap>) -> Vec<GroupMean> {
    let mut groups: BTreeMap<(String, u64), Vec<f64>> = BTreeMap::new();
    for (context, v) in values {
        groups
            .entry((task_of(tasks, &context.dataset), context.train_size))
            .or_default()
            .push(v);
    }
    groups
        .into_iter()
        .map(|((task, train_size), vs)| GroupMean {
            task,
            train_size,
            contexts: vs.len(),
            mean: vs.iter().sum::<f64>() / vs.len() as f64,
        })
        .collect()
}

/// Test score of `config` in every context, plus macro-averages.
pub fn fixed_config_eval<'a>(
    table: &ScoreTable,
    config: &Configuration,
    contexts: impl IntoIterator<Item = &'a Context>,
    tasks: Option<&TaskMap>,
) -> Result<FixedConfigEval> {
    let mut contexts: Vec<&Context> = contexts.into_iter().collect();
    contexts.sort();
    contexts.dedup();
    let mut per_context = Vec::with_capacity(contexts.len());
    let mut absent = Vec::new();
    for c in contexts {
        match table.score(c, Split::Test, config) {
            Some(s) => per_context.push((c.clone(), s)),
            None => absent.push(c.to_string()),
        }
    }
    if !absent.is_empty() {
        return Err(Error::MissingRecords {
            config: table.space().describe(config),
            split: Split::Test,
            contexts: absent.join(", "),
        });
    }
    let groups = macro_average(per_context.iter().map(|(c, s)| (c, *s)), tasks);
    Ok(FixedConfigEval { per_context, groups })
}

#[derive(Debug, Clone, PartialEq)]
pub struct UpperBoundResult {
    pub context: Context,
    pub best_validation_config: Configuration,
    pub validation_score: f64,
    pub test_score: f64,
}

/// Validation argmax (first in value order on ties), reported on test.
pub fn upper_bound(table: &ScoreTable, context: &Context) -> Result<UpperBoundResult> {
    let validation = table.scores(context, Split::Validation).ok_or_else(|| Error::SplitUnavailable {
        context: context.clone(),
        split: Split::Validation,
    })?;
    if table.scores(context, Split::Test).is_none() {
        return Err(Error::SplitUnavailable {
            context: context.clone(),
            split: Split::Test,
        });
    }
    let (best, &validation_score) = validation
        .iter()
        .reduce(|best, cur| if cur.1 > best.1 { cur } else { best })
        .expect("non-empty validation scores");
    let test_score = table
        .score(context, Split::Test, best)
        .ok_or_else(|| missing(table, best, Split::Test, context))?;
    Ok(UpperBoundResult {
        context: context.clone(),
        best_validation_config: best.clone(),
        validation_score,
        test_score,
    })
}

fn missing(table: &ScoreTable, config: &Configuration, split: Split, context: &Context) -> Error {
    Error::MissingRecords {
        config: table.space().describe(config),
        split,
        contexts: context.to_string(),
    }
}

fn test_max(table: &ScoreTable, context: &Context) -> Result<f64> {
    let scores = table.scores(context, Split::Test).ok_or_else(|| Error::SplitUnavailable {
        context: context.clone(),
        split: Split::Test,
    })?;
    let max = scores.values().copied().fold(0.0_f64, f64::max);
    if max <= 0.0 {
        return Err(Error::DegenerateContext {
            context: context.clone(),
            split: Split::Test,
        });
    }
    Ok(max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LooOptions {
    pub threshold: f64,
    /// Split whose scores build each leave-one-out ranking.
    pub rank_split: Split,
    pub skip_degenerate: bool,
}

impl Default for LooOptions {
    fn default() -> Self {
        LooOptions {
            threshold: cbs::DEFAULT_THRESHOLD,
            rank_split: Split::Test,
            skip_degenerate: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LooCell {
    pub context: Context,
    pub test_score: f64,
    /// Test score over the context's best test score.
    pub normalized: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LooResult {
    pub held_out: String,
    pub ranking: CbsRanking,
    /// Rank-1 configuration of `ranking`.
    pub recommended: Configuration,
    pub cells: Vec<LooCell>,
}

struct HeldOut {
    dataset: String,
    ranking: CbsRanking,
    contexts: Vec<Context>,
}

fn sorted_unique<T: Ord + Clone>(items: &[T]) -> Vec<T> {
    let mut v = items.to_vec();
    v.sort();
    v.dedup();
    v
}

/// One ranking per held-out dataset, built on every remaining (dataset,
/// size) context, shared by all of the held-out dataset's sizes.
fn held_out_rankings(
    table: &ScoreTable,
    datasets: &[String],
    train_sizes: &[u64],
    options: &LooOptions,
) -> Result<Vec<HeldOut>> {
    let datasets = sorted_unique(datasets);
    let train_sizes = sorted_unique(train_sizes);
    if datasets.len() < 2 {
        return Err(Error::TooFewDatasets(datasets.len()));
    }
    let present = table.all_contexts();
    let mut out = Vec::with_capacity(datasets.len());
    for held in &datasets {
        let training: Vec<Context> = datasets
            .iter()
            .filter(|d| *d != held)
            .flat_map(|d| train_sizes.iter().map(move |&m| Context::new(d.as_str(), m)))
            .filter(|c| table.scores(c, options.rank_split).is_some())
            .collect();
        if training.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "no {} records outside held-out dataset '{held}'",
                options.rank_split
            )));
        }
        let ranking = cbs::rank(
            table,
            &training,
            RankOptions {
                threshold: options.threshold,
                split: options.rank_split,
                skip_degenerate: options.skip_degenerate,
            },
        )?;
        let contexts: Vec<Context> = train_sizes
            .iter()
            .map(|&m| Context::new(held.as_str(), m))
            .filter(|c| present.contains(c))
            .collect();
        if contexts.is_empty() {
            return Err(Error::InvalidArgument(format!("held-out dataset '{held}' has no records")));
        }
        out.push(HeldOut {
            dataset: held.clone(),
            ranking,
            contexts,
        });
    }
    Ok(out)
}

/// Leave-one-dataset-out: the rank-1 configuration of a ranking built
/// without `d_h`, scored on `d_h`'s test split at each training size.
pub fn loo_cbs(table: &ScoreTable, datasets: &[String], train_sizes: &[u64], options: &LooOptions) -> Result<Vec<LooResult>> {
    held_out_rankings(table, datasets, train_sizes, options)?
        .into_iter()
        .map(|h| {
            let recommended = h.ranking.top().expect("rankings are never empty").config.clone();
            let cells = h
                .contexts
                .iter()
                .map(|c| {
                    let max = test_max(table, c)?;
                    let test_score = table
                        .score(c, Split::Test, &recommended)
                        .ok_or_else(|| missing(table, &recommended, Split::Test, c))?;
                    Ok(LooCell {
                        context: c.clone(),
                        test_score,
                        normalized: test_score / max,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(LooResult {
                held_out: h.dataset,
                ranking: h.ranking,
                recommended,
                cells,
            })
        })
        .collect()
}

/// Mean normalized held-out test score over every (held-out dataset, size).
pub fn loo_mean(results: &[LooResult]) -> f64 {
    let cells: Vec<f64> = results.iter().flat_map(|r| r.cells.iter().map(|c| c.normalized)).collect();
    cells.iter().sum::<f64>() / cells.len() as f64
}

/// Denominator for budget-curve scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BudgetNormalization {
    /// Best test score over all configurations in the context.
    #[default]
    ContextMax,
    /// Test score of the validation-selected configuration (the Upper Bound
    /// protocol); values may exceed 1.
    UpperBound,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetOptions {
    pub loo: LooOptions,
    pub max_budget: usize,
    pub normalization: BudgetNormalization,
}

impl Default for BudgetOptions {
    fn default() -> Self {
        BudgetOptions {
            loo: LooOptions::default(),
            max_budget: DEFAULT_MAX_BUDGET,
            normalization: BudgetNormalization::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BudgetPoint {
    pub k: usize,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BudgetDetail {
    pub context: Context,
    pub k: usize,
    /// Ranked configurations actually considered: `min(k, ranking length)`.
    pub considered: usize,
    pub clamped: bool,
    pub best: Configuration,
    pub validation_score: f64,
    pub test_score: f64,
    pub normalized: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BudgetCurve {
    pub points: Vec<BudgetPoint>,
    /// Ordered by held-out context, then k.
    pub details: Vec<BudgetDetail>,
}

/// For each budget k, the held-out dataset tries the top k configurations of
/// its leave-one-out ranking, keeps the one with the best validation score
/// (earliest rank on ties) and reports its normalized test score. Points are
/// means over every (held-out dataset, size).
pub fn budget_curve(
    table: &ScoreTable,
    datasets: &[String],
    train_sizes: &[u64],
    options: &BudgetOptions,
) -> Result<BudgetCurve> {
    if options.max_budget == 0 {
        return Err(Error::InvalidArgument("max budget must be at least 1".into()));
    }
    let held = held_out_rankings(table, datasets, train_sizes, &options.loo)?;
    let mut details = Vec::new();
    for h in &held {
        for context in &h.contexts {
            let validation = table.scores(context, Split::Validation).ok_or_else(|| Error::SplitUnavailable {
                context: context.clone(),
                split: Split::Validation,
            })?;
            let denominator = match options.normalization {
                BudgetNormalization::ContextMax => test_max(table, context)?,
                BudgetNormalization::UpperBound => {
                    let ub = upper_bound(table, context)?.test_score;
                    if ub <= 0.0 {
                        return Err(Error::DegenerateContext {
                            context: context.clone(),
                            split: Split::Test,
                        });
                    }
                    ub
                }
            };
            let entries = &h.ranking.entries;
            let mut best: Option<(&Configuration, f64)> = None;
            for k in 1..=options.max_budget {
                let considered = k.min(entries.len());
                if k <= entries.len() {
                    let candidate = &entries[k - 1].config;
                    if let Some(&v) = validation.get(candidate) {
                        if best.is_none_or(|(_, b)| v > b) {
                            best = Some((candidate, v));
                        }
                    }
                }
                let (config, validation_score) = best.ok_or_else(|| Error::MissingRecords {
                    config: format!("every one of the top {considered} configurations"),
                    split: Split::Validation,
                    contexts: context.to_string(),
                })?;
                let test_score = table
                    .score(context, Split::Test, config)
                    .ok_or_else(|| missing(table, config, Split::Test, context))?;
                details.push(BudgetDetail {
                    context: context.clone(),
                    k,
                    considered,
                    clamped: k > entries.len(),
                    best: config.clone(),
                    validation_score,
                    test_score,
                    normalized: test_score / denominator,
                });
            }
        }
    }
    let cells = details.len() / options.max_budget;
    let points = (1..=options.max_budget)
        .map(|k| {
            let sum: f64 = details.iter().filter(|d| d.k == k).map(|d| d.normalized).sum();
            BudgetPoint {
                k,
                mean: sum / cells as f64,
            }
        })
        .collect();
    Ok(BudgetCurve { points, details })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub task: String,
    pub train_size: u64,
    pub datasets: usize,
    pub default: Option<f64>,
    pub cbs_1: f64,
    pub upper_bound: f64,
}

/// Raw-score macro-averages of a Default configuration, CBS_1 under
/// leave-one-dataset-out, and the validation upper bound, per (task, size).
///
/// `default` carries the table holding the baseline's scores (often
/// `table` itself) and the baseline configuration.
pub fn compare(
    table: &ScoreTable,
    default: Option<(&ScoreTable, &Configuration)>,
    datasets: &[String],
    train_sizes: &[u64],
    tasks: Option<&TaskMap>,
    options: &LooOptions,
) -> Result<Vec<ComparisonRow>> {
    let loo = loo_cbs(table, datasets, train_sizes, options)?;
    let cbs_scores: Vec<(Context, f64)> = loo
        .iter()
        .flat_map(|r| r.cells.iter().map(|c| (c.context.clone(), c.test_score)))
        .collect();
    let contexts: Vec<Context> = cbs_scores.iter().map(|(c, _)| c.clone()).collect();
    let ub_scores = contexts
        .iter()
        .map(|c| Ok((c.clone(), upper_bound(table, c)?.test_score)))
        .collect::<Result<Vec<_>>>()?;
    let default_groups = match default {
        Some((t, config)) => Some(fixed_config_eval(t, config, &contexts, tasks)?.groups),
        None => None,
    };
    let cbs_groups = macro_average(cbs_scores.iter().map(|(c, s)| (c, *s)), tasks);
    let ub_groups = macro_average(ub_scores.iter().map(|(c, s)| (c, *s)), tasks);
    Ok(cbs_groups
        .into_iter()
        .zip(ub_groups)
        .enumerate()
        .map(|(i, (cbs_g, ub_g))| ComparisonRow {
            task: cbs_g.task,
            train_size: cbs_g.train_size,
            datasets: cbs_g.contexts,
            default: default_groups.as_ref().map(|g| g[i].mean),
            cbs_1: cbs_g.mean,
            upper_bound: ub_g.mean,
        })
        .collect())
}
