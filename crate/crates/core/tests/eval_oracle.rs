use cbs_core::eval::{budget_curve, loo_cbs, loo_mean, upper_bound, BudgetOptions, LooOptions};
use cbs_core::model::{ConfigSpace, Context, Hyperparameter, Kind, ScoreRecord, ScoreTable, Split};
use cbs_core::oracle::{self, random_instance};

#[test]
fn loo_and_budget_match_brute_force() {
    for seed in 0..120 {
        let inst = random_instance(seed, 2);
        let loo = loo_cbs(&inst.table, &inst.datasets, &inst.sizes, &LooOptions::default()).unwrap();
        let slow = oracle::loo(&inst.table, &inst.datasets, &inst.sizes, Split::Test, 0.97);
        assert_eq!(loo.len(), slow.len());
        for (fast, slow) in loo.iter().zip(&slow) {
            assert_eq!(fast.held_out, slow.held_out, "seed {seed}");
            assert_eq!(fast.recommended.indices(), &slow.recommended[..], "seed {seed}");
            let cells: Vec<(u64, f64, f64)> = fast
                .cells
                .iter()
                .map(|c| (c.context.train_size, c.test_score, c.normalized))
                .collect();
            assert_eq!(cells, slow.cells, "seed {seed}");
        }

        let options = BudgetOptions::default();
        let curve = budget_curve(&inst.table, &inst.datasets, &inst.sizes, &options).unwrap();
        let (means, cells) = oracle::budget(&inst.table, &inst.datasets, &inst.sizes, Split::Test, 0.97, 10);
        let got: Vec<f64> = curve.points.iter().map(|p| p.mean).collect();
        assert_eq!(got, means, "seed {seed}");
        assert_eq!(curve.details.len(), cells.len());
        for (d, c) in curve.details.iter().zip(&cells) {
            assert_eq!((&d.context, d.k), (&c.context, c.k));
            assert_eq!(d.best.indices(), &c.best[..], "seed {seed}");
            assert_eq!((d.validation_score, d.normalized), (c.validation, c.normalized));
        }
        assert_eq!(curve.points[0].mean, loo_mean(&loo), "seed {seed}");
    }
}

#[test]
fn validation_score_of_best_never_drops_with_budget() {
    for seed in 0..120 {
        let inst = random_instance(seed, 2);
        let curve = budget_curve(&inst.table, &inst.datasets, &inst.sizes, &BudgetOptions::default()).unwrap();
        for w in curve.details.windows(2) {
            if w[0].context == w[1].context {
                assert!(w[1].validation_score >= w[0].validation_score, "seed {seed}");
            }
        }
        assert!(curve.details.iter().all(|d| (0.0..=1.0).contains(&d.normalized)));
    }
}

#[test]
fn upper_bound_attains_validation_max() {
    for seed in 0..60 {
        let inst = random_instance(seed, 1);
        for c in inst.contexts() {
            let ub = upper_bound(&inst.table, &c).unwrap();
            let max = inst.table.scores(&c, Split::Validation).unwrap().values().fold(0.0_f64, |a, &b| a.max(b));
            assert_eq!(ub.validation_score, max);
        }
    }
}

fn put(t: &mut ScoreTable, d: &str, split: Split, v: &str, score: f64) {
    let config = t.space().config(&[v]).unwrap();
    t.insert(ScoreRecord {
        context: Context::new(d, 100),
        split,
        config,
        score,
    })
    .unwrap();
}

#[test]
fn hand_computed_two_dataset_curve() {
    let space = ConfigSpace::new("s", vec![Hyperparameter::new("c", Kind::Categorical, &["c1", "c2", "c3"]).unwrap()]).unwrap();
    let mut t = ScoreTable::new(space);
    // test scores pick the rankings; validation decides c_best.
    for (d, test, val) in [
        ("a", [1.0, 0.98, 0.5], [0.5, 0.9, 0.1]),
        ("b", [0.99, 1.0, 0.5], [0.9, 0.2, 0.1]),
    ] {
        for (i, v) in ["c1", "c2", "c3"].into_iter().enumerate() {
            put(&mut t, d, Split::Test, v, test[i]);
            put(&mut t, d, Split::Validation, v, val[i]);
        }
    }
    let ds = ["a".to_string(), "b".to_string()];
    let options = BudgetOptions {
        max_budget: 3,
        ..BudgetOptions::default()
    };
    let curve = budget_curve(&t, &ds, &[100], &options).unwrap();
    // held out a: ranking from b = [c2, c1]; k=1 -> c2 (0.98), k>=2 -> c2 (val 0.9 > 0.5).
    // held out b: ranking from a = [c1, c2]; k=1 -> c1 (0.99), k>=2 -> c1 (val 0.9 > 0.2).
    let means: Vec<f64> = curve.points.iter().map(|p| p.mean).collect();
    let expected = (0.98 + 0.99) / 2.0;
    assert_eq!(means, [expected, expected, expected]);
    assert!(curve.details.iter().filter(|d| d.k == 3).all(|d| d.clamped && d.considered == 2));
}

#[test]
fn identical_profiles_recommend_the_global_argmax() {
    let space = ConfigSpace::new("s", vec![Hyperparameter::new("c", Kind::Categorical, &["c1", "c2", "c3"]).unwrap()]).unwrap();
    let mut t = ScoreTable::new(space);
    for d in ["a", "b", "c", "h"] {
        for (v, s) in [("c1", 0.3), ("c2", 0.8), ("c3", 0.5)] {
            put(&mut t, d, Split::Test, v, if d == "h" { 1.0 - s } else { s });
        }
    }
    let ds: Vec<String> = ["a", "b", "c", "h"].map(String::from).to_vec();
    let loo = loo_cbs(&t, &ds, &[100], &LooOptions::default()).unwrap();
    let h = loo.iter().find(|r| r.held_out == "h").unwrap();
    assert_eq!(h.recommended, t.space().config(&["c2"]).unwrap());
}
