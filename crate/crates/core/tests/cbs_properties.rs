use std::collections::BTreeSet;

use cbs_core::cbs::{rank, top_set, CbsRanking, RankOptions};
use cbs_core::model::{ConfigSpace, Context, Hyperparameter, Kind, ScoreRecord, ScoreTable, Split};
use cbs_core::oracle::{self, random_instance};
use proptest::prelude::*;

fn as_oracle(r: &CbsRanking) -> Vec<oracle::OracleEntry> {
    r.entries
        .iter()
        .map(|e| oracle::OracleEntry {
            config: e.config.indices().to_vec(),
            s_sum: e.s_sum,
            coverage: e.coverage.iter().cloned().collect(),
        })
        .collect()
}

fn opts(threshold: f64) -> RankOptions {
    RankOptions {
        threshold,
        ..RankOptions::default()
    }
}

#[test]
fn matches_literal_transcription() {
    for seed in 0..300 {
        let inst = random_instance(seed, 1);
        let contexts = inst.contexts();
        for threshold in [0.97, 0.95, 0.5] {
            for split in [Split::Test, Split::Validation] {
                let options = RankOptions {
                    threshold,
                    split,
                    skip_degenerate: false,
                };
                let fast = rank(&inst.table, &contexts, options).unwrap();
                let slow = oracle::cbs_rank(&inst.table, &contexts, split, threshold);
                assert_eq!(as_oracle(&fast), slow, "seed {seed} threshold {threshold} {split}");
            }
        }
    }
}

#[test]
fn coverage_is_disjoint_across_distinct_sums_and_total() {
    for seed in 0..300 {
        let inst = random_instance(seed, 1);
        let contexts = inst.contexts();
        let r = rank(&inst.table, &contexts, opts(0.97)).unwrap();
        for (i, a) in r.entries.iter().enumerate() {
            for b in &r.entries[i + 1..] {
                if a.s_sum != b.s_sum {
                    assert!(a.coverage.is_disjoint(&b.coverage), "seed {seed}");
                }
            }
        }
        let covered: BTreeSet<&Context> = r.entries.iter().flat_map(|e| &e.coverage).collect();
        assert_eq!(covered, contexts.iter().collect(), "seed {seed}");
    }
}

fn two_config_table(runner_up: f64) -> ScoreTable {
    let space = ConfigSpace::new("b", vec![Hyperparameter::new("c", Kind::Categorical, &["best", "other"]).unwrap()]).unwrap();
    let mut t = ScoreTable::new(space);
    for (v, s) in [("best", 100.0), ("other", runner_up)] {
        let config = t.space().config(&[v]).unwrap();
        t.insert(ScoreRecord {
            context: Context::new("d", 10),
            split: Split::Test,
            config,
            score: s,
        })
        .unwrap();
    }
    t
}

#[test]
fn threshold_boundary_is_strict() {
    let ctx = Context::new("d", 10);
    for (threshold, at) in [(0.97, 97.0), (0.95, 95.0)] {
        let t = two_config_table(at);
        assert_eq!(top_set(&t, &ctx, Split::Test, threshold).unwrap().members.len(), 1);
        let t = two_config_table(at + 1e-9);
        assert_eq!(top_set(&t, &ctx, Split::Test, threshold).unwrap().members.len(), 2);
    }
}

fn rescaled(table: &ScoreTable, factors: &[(Context, f64)]) -> ScoreTable {
    let mut out = ScoreTable::new(table.space().clone());
    for mut r in table.records() {
        let k = factors.iter().find(|(c, _)| *c == r.context).map_or(1.0, |(_, k)| *k);
        r.score *= k;
        out.insert(r).unwrap();
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn power_of_two_rescaling_preserves_the_ranking(seed in 0u64..10_000, exps in prop::collection::vec(-20i32..20, 6)) {
        let inst = random_instance(seed, 1);
        let contexts = inst.contexts();
        let factors: Vec<(Context, f64)> = contexts.iter().cloned().zip(exps.iter().map(|&e| 2f64.powi(e))).collect();
        let a = rank(&inst.table, &contexts, opts(0.97)).unwrap();
        let b = rank(&rescaled(&inst.table, &factors), &contexts, opts(0.97)).unwrap();
        prop_assert_eq!(a.entries, b.entries);
    }

    #[test]
    fn arbitrary_rescaling_preserves_order_on_continuous_scores(seed in 0u64..5_000, ks in prop::collection::vec(0.01f64..100.0, 6)) {
        // even seeds draw continuous scores
        let inst = random_instance(seed * 2, 1);
        let contexts = inst.contexts();
        let factors: Vec<(Context, f64)> = contexts.iter().cloned().zip(ks).collect();
        let a = rank(&inst.table, &contexts, opts(0.97)).unwrap();
        let b = rank(&rescaled(&inst.table, &factors), &contexts, opts(0.97)).unwrap();
        let order = |r: &CbsRanking| r.entries.iter().map(|e| (e.config.clone(), e.coverage.clone())).collect::<Vec<_>>();
        prop_assert_eq!(order(&a), order(&b));
    }

    #[test]
    fn input_order_does_not_matter(seed in 0u64..10_000) {
        let inst = random_instance(seed, 1);
        let mut records: Vec<ScoreRecord> = inst.table.records().collect();
        records.reverse();
        let mut t = ScoreTable::new(inst.table.space().clone());
        for r in records {
            t.insert(r).unwrap();
        }
        let mut contexts = inst.contexts();
        contexts.reverse();
        let a = rank(&inst.table, &inst.contexts(), opts(0.97)).unwrap();
        let b = rank(&t, &contexts, opts(0.97)).unwrap();
        prop_assert_eq!(a, b);
    }
}
