//! Acceptance checks, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines show up in plain `cargo test` output.

mod common;

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use cbs_core::cbs::{rank, top_set, RankOptions};
use cbs_core::eval::{budget_curve, loo_cbs, BudgetOptions, LooOptions};
use cbs_core::importance::{
    importance_report, js_score, permutation_pval, ImportanceOptions, Scope, IMPORTANCE_THRESHOLD,
};
use cbs_core::ingest::{
    builtin_spaces, parse_scores, parse_space, serialize_scores, serialize_space, SpaceSource,
};
use cbs_core::model::{ConfigSpace, Context, Hyperparameter, Kind, ScoreRecord, ScoreTable, Split};
use cbs_core::oracle::{self, fuzz_files, malformed_score_files, random_instance, FIXTURE_SPACE};
use cbs_core::synth::{synth_space, synth_table, SynthOptions};
use common::{body, cbs, cells, golden_rows};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || format!("took {elapsed:.2?}, limit {limit:?}"))
}

fn cbs_oracle() -> Check {
    let start = Instant::now();
    for seed in 0..1000 {
        let inst = random_instance(seed, 1);
        let contexts = inst.contexts();
        let fast = rank(&inst.table, &contexts, RankOptions::default()).map_err(|e| format!("seed {seed}: {e}"))?;
        let slow = oracle::cbs_rank(&inst.table, &contexts, Split::Test, 0.97);
        let same = fast.entries.len() == slow.len()
            && fast.entries.iter().zip(&slow).all(|(a, b)| {
                a.config.indices() == &b.config[..]
                    && a.s_sum == b.s_sum
                    && a.coverage.iter().eq(b.coverage.iter())
            });
        ensure(same, || format!("seed {seed}: ranking differs from the reference"))?;
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(30))?;
    Ok(format!("1000/1000 instances identical in {elapsed:.2?}"))
}

fn eval_oracle() -> Check {
    let start = Instant::now();
    for seed in 0..200 {
        let inst = random_instance(seed, 2);
        let loo = loo_cbs(&inst.table, &inst.datasets, &inst.sizes, &LooOptions::default())
            .map_err(|e| format!("seed {seed}: {e}"))?;
        let slow = oracle::loo(&inst.table, &inst.datasets, &inst.sizes, Split::Test, 0.97);
        let same_loo = loo.len() == slow.len()
            && loo.iter().zip(&slow).all(|(a, b)| {
                a.held_out == b.held_out
                    && a.recommended.indices() == &b.recommended[..]
                    && a.cells
                        .iter()
                        .map(|c| (c.context.train_size, c.test_score, c.normalized))
                        .eq(b.cells.iter().copied())
            });
        ensure(same_loo, || format!("seed {seed}: leave-one-out differs"))?;

        let curve = budget_curve(&inst.table, &inst.datasets, &inst.sizes, &BudgetOptions::default())
            .map_err(|e| format!("seed {seed}: {e}"))?;
        let (means, cells) = oracle::budget(&inst.table, &inst.datasets, &inst.sizes, Split::Test, 0.97, 10);
        let same_budget = curve.points.iter().map(|p| p.mean).eq(means.iter().copied())
            && curve.details.len() == cells.len()
            && curve.details.iter().zip(&cells).all(|(a, b)| {
                a.context == b.context
                    && a.k == b.k
                    && a.best.indices() == &b.best[..]
                    && a.validation_score == b.validation
                    && a.normalized == b.normalized
            });
        ensure(same_budget, || format!("seed {seed}: budget curve differs"))?;
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(60))?;
    Ok(format!("200/200 instances identical in {elapsed:.2?}"))
}

fn rescaled(table: &ScoreTable, factor: impl Fn(&Context) -> f64) -> ScoreTable {
    let mut out = ScoreTable::new(table.space().clone());
    for mut r in table.records() {
        r.score *= factor(&r.context);
        out.insert(r).unwrap();
    }
    out
}

fn boundary_table(runner_up: f64) -> ScoreTable {
    let space = ConfigSpace::new("b", vec![Hyperparameter::new("c", Kind::Categorical, &["p", "q"]).unwrap()]).unwrap();
    let mut t = ScoreTable::new(space);
    for (v, s) in [("p", 100.0), ("q", runner_up)] {
        let config = t.space().config(&[v]).unwrap();
        t.insert(ScoreRecord {
            context: Context::new("d", 1),
            split: Split::Test,
            config,
            score: s,
        })
        .unwrap();
    }
    t
}

fn structural() -> Check {
    let n = 500;
    for seed in 0..n {
        let inst = random_instance(seed, 2);
        let contexts = inst.contexts();
        let r = rank(&inst.table, &contexts, RankOptions::default()).unwrap();

        for (i, a) in r.entries.iter().enumerate() {
            for b in &r.entries[i + 1..] {
                ensure(a.s_sum == b.s_sum || a.coverage.is_disjoint(&b.coverage), || {
                    format!("seed {seed}: overlapping coverage across distinct S_n")
                })?;
            }
        }
        let covered: BTreeSet<&Context> = r.entries.iter().flat_map(|e| &e.coverage).collect();
        ensure(covered.len() == contexts.len(), || format!("seed {seed}: a context is uncovered"))?;

        let pow2 = rescaled(&inst.table, |c| 2f64.powi((c.dataset.len() as i32 + c.train_size as i32 % 7) - 5));
        let r2 = rank(&pow2, &contexts, RankOptions::default()).unwrap();
        ensure(r2.entries == r.entries, || format!("seed {seed}: power-of-two rescaling changed the ranking"))?;
        if seed % 2 == 0 {
            // continuous scores: any positive factor keeps the order
            let any = rescaled(&inst.table, |c| 0.37 + c.train_size as f64 / 7.0 + c.dataset.len() as f64);
            let r3 = rank(&any, &contexts, RankOptions::default()).unwrap();
            let order = |x: &cbs_core::cbs::CbsRanking| {
                x.entries.iter().map(|e| (e.config.clone(), e.coverage.clone())).collect::<Vec<_>>()
            };
            ensure(order(&r3) == order(&r), || format!("seed {seed}: rescaling changed the order"))?;
        }

        let curve = budget_curve(&inst.table, &inst.datasets, &inst.sizes, &BudgetOptions::default()).unwrap();
        for w in curve.details.windows(2) {
            ensure(w[0].context != w[1].context || w[1].validation_score >= w[0].validation_score, || {
                format!("seed {seed}: c_best validation score fell with k")
            })?;
        }
    }
    let ctx = Context::new("d", 1);
    for (t, at) in [(0.97, 97.0), (0.95, 95.0)] {
        let on = top_set(&boundary_table(at), &ctx, Split::Test, t).unwrap().members.len();
        let above = top_set(&boundary_table(at + 1e-9), &ctx, Split::Test, t).unwrap().members.len();
        ensure(on == 1 && above == 2, || format!("threshold {t}: boundary members {on}, just above {above}"))?;
    }
    Ok(format!(
        "{n} instances: disjoint and total coverage, strict 0.97/0.95 boundary, rescaling invariance, budget monotonicity"
    ))
}

fn importance() -> Check {
    let same = js_score(&[vec![0.25, 0.75], vec![0.25, 0.75]]).unwrap();
    let disjoint = js_score(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
    ensure((same - 1.0).abs() <= 1e-12, || format!("identical vectors gave {same}"))?;
    ensure(disjoint.abs() <= 1e-12, || format!("disjoint one-hots gave {disjoint}"))?;

    let space = synth_space(&[4, 3, 2, 3]).unwrap();
    let table = synth_table(&space, &SynthOptions { rho: 0.4, ..SynthOptions::default() }).unwrap();
    let datasets: Vec<String> = table.datasets().into_iter().collect();
    let mut compared = 0;
    for seed in [0, 7, 42] {
        let options = ImportanceOptions {
            seed,
            ..ImportanceOptions::default()
        };
        let a = importance_report(&table, &datasets, Scope::TrainSize(1000), &options);
        let b = importance_report(&table, &datasets, Scope::TrainSize(1000), &options);
        ensure(a == b, || format!("seed {seed}: two runs differ"))?;
        for e in &a.entries {
            for v in &e.vectors {
                let sum: f64 = v.probabilities.iter().sum();
                ensure((sum - 1.0).abs() <= 1e-9 && v.probabilities.iter().all(|&p| p >= 0.0), || {
                    format!("{} vector for {} sums to {sum}", e.hp, v.unit)
                })?;
            }
        }
        for (hp, entry) in a.entries.iter().enumerate() {
            let fast = permutation_pval(&table, &datasets, Scope::TrainSize(1000), &entry.hp, &options).unwrap();
            let slow = oracle::permutation_pval(&table, &datasets, 1000, Split::Test, IMPORTANCE_THRESHOLD, hp, 100, seed);
            ensure(fast.0.to_bits() == slow.0.to_bits() && fast.1.to_bits() == slow.1.to_bits(), || {
                format!("seed {seed} {}: {fast:?} vs reference {slow:?}", entry.hp)
            })?;
            ensure(entry.js_pval == Some(fast.1), || format!("seed {seed} {}: report disagrees", entry.hp))?;
            compared += 1;
        }
    }
    Ok(format!("closed forms within 1e-12, vectors sum to 1, {compared} p-values bit-identical to the reference for seeds 0, 7, 42"))
}

fn golden() -> Check {
    let r = cbs(&["recommend"]);
    ensure(r.code == 0, || r.stderr.clone())?;
    let rows: Vec<Vec<String>> = body(&r.stdout).lines().map(cells).collect();
    let want = golden_rows();
    for (i, (got, want)) in rows.iter().zip(&want).enumerate() {
        ensure(got == want, || format!("row {i}: {got:?} vs golden {want:?}"))?;
    }
    ensure(rows.len() == want.len() && want.len() == 21, || format!("{} rows vs {} golden", rows.len(), want.len()))?;
    Ok("16 recommendation rows and 4 Default rows match the golden file".into())
}

fn grid_sizes() -> Check {
    let mut parts = Vec::new();
    for s in builtin_spaces().iter().filter(|s| s.source == SpaceSource::CbsSearch) {
        let g = s.space.grid_size();
        ensure((36..=144).contains(&g), || format!("{} {}: grid {g}", s.model, s.method))?;
        parts.push(format!("{} {} {g} (x2 sizes = {})", s.model, s.method, g * 2));
    }
    Ok(parts.join("; "))
}

fn performance() -> Check {
    let space = synth_space(&[4, 3, 4, 2, 3]).unwrap();
    let options = SynthOptions {
        datasets: 10,
        train_sizes: vec![100, 1000],
        ..SynthOptions::default()
    };
    let table = synth_table(&space, &options).unwrap();
    ensure(table.len() == 288 * 20 * 2, || format!("table has {} records", table.len()))?;
    let datasets: Vec<String> = table.datasets().into_iter().collect();
    let sizes: Vec<u64> = table.train_sizes().into_iter().collect();

    let start = Instant::now();
    rank(&table, &table.contexts(Split::Test), RankOptions::default()).map_err(|e| e.to_string())?;
    loo_cbs(&table, &datasets, &sizes, &LooOptions::default()).map_err(|e| e.to_string())?;
    budget_curve(&table, &datasets, &sizes, &BudgetOptions::default()).map_err(|e| e.to_string())?;
    for &m in &sizes {
        let r = importance_report(&table, &datasets, Scope::TrainSize(m), &ImportanceOptions::default());
        ensure(r.entries.iter().all(|e| e.error.is_none()), || "importance entry failed".into())?;
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(5))?;
    Ok(format!("288 configs x 20 contexts x 2 splits: rank, LOO, budget k<=10, importance (100 permutations) in {elapsed:.2?}"))
}

fn ingest() -> Check {
    for seed in 0..100 {
        let f = fuzz_files(seed);
        let space = parse_space(&f.space).map_err(|e| format!("seed {seed}: {e}"))?;
        let space2 = parse_space(&serialize_space(&space)).map_err(|e| format!("seed {seed}: {e}"))?;
        ensure(space2 == space, || format!("seed {seed}: space changed"))?;
        let table = parse_scores(&f.scores, &space).map_err(|e| format!("seed {seed}: {e}"))?;
        let text = serialize_scores(&table);
        let again = parse_scores(&text, &space2).map_err(|e| format!("seed {seed}: {e}"))?;
        ensure(again == table && serialize_scores(&again) == text, || format!("seed {seed}: round trip changed the table"))?;
    }
    let space = parse_space(FIXTURE_SPACE).unwrap();
    let cases = malformed_score_files();
    for c in &cases {
        let msg = match parse_scores(&c.document, &space) {
            Ok(_) => return Err(format!("{} accepted", c.class)),
            Err(e) => e.to_string(),
        };
        ensure(msg.contains(c.fragment) && msg.ends_with(&format!("at row {}", c.row)), || {
            format!("{}: '{msg}'", c.class)
        })?;
    }
    Ok(format!("100 fuzzed files round-trip; {} malformed classes rejected at the right row", cases.len()))
}

fn main() -> ExitCode {
    let checks: [Criterion; 8] = [
        ("oracle equivalence: CBS", cbs_oracle),
        ("oracle equivalence: eval", eval_oracle),
        ("structural properties", structural),
        ("importance closed forms and reproducibility", importance),
        ("golden catalog", golden),
        ("grid sizes", grid_sizes),
        ("performance", performance),
        ("ingest round-trip", ingest),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        match check() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", checks.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
