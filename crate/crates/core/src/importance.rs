//! Cross-dataset consistency of each hyperparameter's preferred values.
//!
//! For every dataset the top set (normalized score > 0.95) yields, per
//! hyperparameter, a frequency vector over its domain. `js_score` is one minus
//! the mean pairwise Jensen–Shannon distance between those vectors, and a
//! permutation test that re-deals the pooled top-set members to datasets
//! estimates how often chance alone would give a higher score.

use serde::Serialize;

use crate::cbs::{self, TopSet};
use crate::error::{Error, Result};
use crate::model::{ConfigSpace, Configuration, Context, ScoreTable, Split};
use crate::rng;

pub const IMPORTANCE_THRESHOLD: f64 = 0.95;
pub const DEFAULT_PERMUTATIONS: usize = 100;

pub fn top_set_95(table: &ScoreTable, context: &Context, split: Split) -> Result<TopSet> {
    cbs::top_set(table, context, split, IMPORTANCE_THRESHOLD)
}

/// Relative frequency of each domain value of hyperparameter `hp_index`
/// among `tc`'s members, indexed by domain order.
pub fn value_distribution(tc: &TopSet, space: &ConfigSpace, hp_index: usize) -> Result<Vec<f64>> {
    let members: Vec<&Configuration> = tc.members.keys().collect();
    let domain_len = space
        .hyperparameters()
        .get(hp_index)
        .ok_or_else(|| Error::InvalidArgument(format!("no hyperparameter at position {hp_index}")))?
        .domain()
        .len();
    distribution(&members, hp_index, domain_len)
}

fn distribution(members: &[&Configuration], hp_index: usize, domain_len: usize) -> Result<Vec<f64>> {
    if members.is_empty() {
        return Err(Error::InvalidArgument("empty top set".into()));
    }
    let mut counts = vec![0usize; domain_len];
    for c in members {
        counts[c.indices()[hp_index] as usize] += 1;
    }
    let n = members.len() as f64;
    Ok(counts.into_iter().map(|k| k as f64 / n).collect())
}

/// Jensen–Shannon divergence in bits; `0 · log 0 = 0`.
pub fn js_divergence(p: &[f64], q: &[f64]) -> f64 {
    let term = |x: f64, m: f64| if x > 0.0 { 0.5 * x * (x / m).log2() } else { 0.0 };
    let mut d = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        let m = 0.5 * (a + b);
        // A single commutative sum per component keeps d(p, q) == d(q, p) bitwise.
        d += term(a, m) + term(b, m);
    }
    d.clamp(0.0, 1.0)
}

/// Square root of the base-2 JS divergence; a metric bounded by 1.
pub fn js_distance(p: &[f64], q: &[f64]) -> f64 {
    js_divergence(p, q).sqrt()
}

/// One minus the mean pairwise JS distance.
///
/// Pairwise distances are summed in ascending order, which makes the result
/// exactly invariant to the order of `vectors`.
pub fn js_score<V: AsRef<[f64]>>(vectors: &[V]) -> Result<f64> {
    if vectors.len() < 2 {
        return Err(Error::NeedTwoVectors(vectors.len()));
    }
    let len = vectors[0].as_ref().len();
    if vectors.iter().any(|v| v.as_ref().len() != len) {
        return Err(Error::InvalidArgument("probability vectors differ in length".into()));
    }
    let mut distances = Vec::with_capacity(vectors.len() * (vectors.len() - 1) / 2);
    for i in 0..vectors.len() {
        for j in i + 1..vectors.len() {
            distances.push(js_distance(vectors[i].as_ref(), vectors[j].as_ref()));
        }
    }
    distances.sort_by(f64::total_cmp);
    let pairs = distances.len() as f64;
    Ok(1.0 - distances.iter().sum::<f64>() / pairs)
}

/// Which contexts form the per-dataset top sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "mode", content = "train_size")]
pub enum Scope {
    /// One vector per dataset at a single training size.
    TrainSize(u64),
    /// One vector per (dataset, training size) over every size present.
    Combined,
}

impl Scope {
    pub fn label(&self) -> String {
        match self {
            Scope::TrainSize(m) => format!("train_size={m}"),
            Scope::Combined => "combined".to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImportanceOptions {
    pub split: Split,
    pub threshold: f64,
    pub permutations: usize,
    pub seed: u64,
    pub skip_degenerate: bool,
}

impl Default for ImportanceOptions {
    fn default() -> Self {
        ImportanceOptions {
            split: Split::Test,
            threshold: IMPORTANCE_THRESHOLD,
            permutations: DEFAULT_PERMUTATIONS,
            seed: 0,
            skip_degenerate: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnitVector {
    /// Dataset name, or `dataset/size` in combined scope.
    pub unit: String,
    pub probabilities: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImportanceEntry {
    pub hp: String,
    pub domain: Vec<String>,
    pub vectors: Vec<UnitVector>,
    pub js_score: Option<f64>,
    pub js_pval: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImportanceReport {
    pub scope: Scope,
    pub split: Split,
    pub threshold: f64,
    pub permutations: usize,
    pub seed: u64,
    pub units: Vec<String>,
    pub skipped: Vec<Context>,
    pub entries: Vec<ImportanceEntry>,
}

/// Per-unit top sets: the members of every unit, sorted, units in order.
struct Units {
    labels: Vec<String>,
    members: Vec<Vec<Configuration>>,
    skipped: Vec<Context>,
}

fn collect_units(table: &ScoreTable, datasets: &[String], scope: Scope, options: &ImportanceOptions) -> Result<Units> {
    cbs::check_threshold(options.threshold)?;
    let mut datasets: Vec<&String> = datasets.iter().collect();
    datasets.sort();
    datasets.dedup();
    let sizes: Vec<u64> = match scope {
        Scope::TrainSize(m) => vec![m],
        Scope::Combined => table.train_sizes().into_iter().collect(),
    };
    let mut units = Units {
        labels: Vec::new(),
        members: Vec::new(),
        skipped: Vec::new(),
    };
    for d in datasets {
        for &m in &sizes {
            let context = Context::new(d.as_str(), m);
            if table.scores(&context, options.split).is_none() {
                continue;
            }
            match cbs::top_set(table, &context, options.split, options.threshold) {
                Ok(ts) => {
                    units.labels.push(match scope {
                        Scope::TrainSize(_) => d.clone(),
                        Scope::Combined => context.to_string(),
                    });
                    units.members.push(ts.members.into_keys().collect());
                }
                Err(Error::DegenerateContext { .. }) if options.skip_degenerate => units.skipped.push(context),
                Err(e) => return Err(e),
            }
        }
    }
    Ok(units)
}

/// Observed score and p-value for each requested hyperparameter, sharing one
/// set of shuffles across them.
fn permutation_tests(
    units: &[Vec<Configuration>],
    hps: &[(usize, usize)],
    permutations: usize,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    if units.len() < 2 {
        return Err(Error::NeedTwoVectors(units.len()));
    }
    if permutations == 0 {
        return Err(Error::InvalidArgument("permutations must be at least 1".into()));
    }
    let vectors_for = |sets: &[&[Configuration]], hp: usize, len: usize| -> Result<Vec<Vec<f64>>> {
        sets.iter()
            .map(|s| distribution(&s.iter().collect::<Vec<_>>(), hp, len))
            .collect()
    };
    let observed_sets: Vec<&[Configuration]> = units.iter().map(Vec::as_slice).collect();
    let observed = hps
        .iter()
        .map(|&(hp, len)| js_score(&vectors_for(&observed_sets, hp, len)?))
        .collect::<Result<Vec<f64>>>()?;

    let pool: Vec<Configuration> = units.iter().flatten().cloned().collect();
    let mut exceed = vec![0usize; hps.len()];
    let mut shuffled = pool.clone();
    for i in 0..permutations {
        shuffled.clone_from(&pool);
        rng::shuffle(&mut shuffled, &mut rng::permutation_stream(seed, i as u64));
        let mut dealt = Vec::with_capacity(units.len());
        let mut rest = shuffled.as_slice();
        for u in units {
            let (head, tail) = rest.split_at(u.len());
            dealt.push(head);
            rest = tail;
        }
        for (k, &(hp, len)) in hps.iter().enumerate() {
            if js_score(&vectors_for(&dealt, hp, len)?)? > observed[k] {
                exceed[k] += 1;
            }
        }
    }
    Ok(observed
        .into_iter()
        .zip(exceed)
        .map(|(o, e)| (o, e as f64 / permutations as f64))
        .collect())
}

/// Observed `js_score` of `hp` and the fraction of permutations that beat it
/// strictly.
pub fn permutation_pval(
    table: &ScoreTable,
    datasets: &[String],
    scope: Scope,
    hp: &str,
    options: &ImportanceOptions,
) -> Result<(f64, f64)> {
    let (index, h) = table
        .space()
        .hyperparameter(hp)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown hyperparameter '{hp}'")))?;
    let units = collect_units(table, datasets, scope, options)?;
    let out = permutation_tests(&units.members, &[(index, h.domain().len())], options.permutations, options.seed)?;
    Ok(out[0])
}

/// One entry per hyperparameter, in declaration order. Failures are recorded
/// on the entries rather than returned.
pub fn importance_report(
    table: &ScoreTable,
    datasets: &[String],
    scope: Scope,
    options: &ImportanceOptions,
) -> ImportanceReport {
    let space = table.space();
    let mut report = ImportanceReport {
        scope,
        split: options.split,
        threshold: options.threshold,
        permutations: options.permutations,
        seed: options.seed,
        units: Vec::new(),
        skipped: Vec::new(),
        entries: space
            .hyperparameters()
            .iter()
            .map(|hp| ImportanceEntry {
                hp: hp.name().to_string(),
                domain: hp.domain().to_vec(),
                vectors: Vec::new(),
                js_score: None,
                js_pval: None,
                error: None,
            })
            .collect(),
    };
    let fail = |report: &mut ImportanceReport, e: Error| {
        for entry in &mut report.entries {
            entry.error = Some(e.to_string());
        }
    };
    let units = match collect_units(table, datasets, scope, options) {
        Ok(u) => u,
        Err(e) => {
            fail(&mut report, e);
            return report;
        }
    };
    report.units = units.labels.clone();
    report.skipped = units.skipped.clone();
    for (i, entry) in report.entries.iter_mut().enumerate() {
        let len = entry.domain.len();
        entry.vectors = units
            .labels
            .iter()
            .zip(&units.members)
            .map(|(label, members)| UnitVector {
                unit: label.clone(),
                probabilities: distribution(&members.iter().collect::<Vec<_>>(), i, len)
                    .expect("top sets are never empty"),
            })
            .collect();
    }
    let hps: Vec<(usize, usize)> = space.hyperparameters().iter().enumerate().map(|(i, h)| (i, h.domain().len())).collect();
    match permutation_tests(&units.members, &hps, options.permutations, options.seed) {
        Ok(results) => {
            for (entry, (score, pval)) in report.entries.iter_mut().zip(results) {
                entry.js_score = Some(score);
                entry.js_pval = Some(pval);
            }
        }
        Err(e) => fail(&mut report, e),
    }
    report
}
