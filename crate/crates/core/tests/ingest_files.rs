use cbs_core::ingest::{completeness_report, parse_scores, parse_space, serialize_scores, serialize_space};
use cbs_core::model::{Context, Split};
use cbs_core::oracle::{fuzz_files, malformed_score_files, FIXTURE_SPACE};

#[test]
fn fuzzed_files_round_trip() {
    for seed in 0..100 {
        let files = fuzz_files(seed);
        let space = parse_space(&files.space).unwrap_or_else(|e| panic!("seed {seed}: {e}\n{}", files.space));
        let space_text = serialize_space(&space);
        let space_again = parse_space(&space_text).unwrap();
        assert_eq!(space_again, space, "seed {seed}");
        assert_eq!(serialize_space(&space_again), space_text, "seed {seed}");

        let table = parse_scores(&files.scores, &space).unwrap_or_else(|e| panic!("seed {seed}: {e}\n{}", files.scores));
        let text = serialize_scores(&table);
        let again = parse_scores(&text, &space_again).unwrap_or_else(|e| panic!("seed {seed}: {e}\n{text}"));
        assert_eq!(again, table, "seed {seed}");
        assert_eq!(serialize_scores(&again), text, "seed {seed}");
    }
}

#[test]
fn row_order_does_not_matter() {
    for seed in 0..20 {
        let files = fuzz_files(seed);
        let space = parse_space(&files.space).unwrap();
        let mut lines: Vec<&str> = files.scores.lines().collect();
        let header_at = lines.iter().position(|l| !l.starts_with('#')).unwrap();
        lines[header_at + 1..].reverse();
        let reversed = lines.join("\n");
        assert_eq!(
            parse_scores(&reversed, &space).unwrap(),
            parse_scores(&files.scores, &space).unwrap(),
            "seed {seed}"
        );
    }
}

#[test]
fn malformed_files_name_their_row() {
    let space = parse_space(FIXTURE_SPACE).unwrap();
    let cases = malformed_score_files();
    assert!(cases.len() >= 12);
    for case in cases {
        let msg = parse_scores(&case.document, &space).unwrap_err().to_string();
        assert!(msg.contains(case.fragment), "{}: {msg}", case.class);
        assert!(msg.ends_with(&format!("at row {}", case.row)), "{}: {msg}", case.class);
    }
}

#[test]
fn partial_grid_lists_missing_configs() {
    let space = parse_space(FIXTURE_SPACE).unwrap();
    let doc = "\
dataset,train_size,split,score,lr,sched
trec,100,test,1,5e-05,linear
trec,100,test,2,5e-05,cosine
trec,100,test,3,1e-04,linear
trec,100,test,4,1e-04,cosine
";
    let full = parse_scores(doc, &space).unwrap();
    assert!(completeness_report(&full).unwrap().is_complete());

    let partial = parse_scores(&doc.replace("trec,100,test,2,5e-05,cosine\n", ""), &space).unwrap();
    assert_eq!(partial.len(), 3);
    let report = completeness_report(&partial).unwrap();
    assert_eq!(report.cells.len(), 1);
    assert_eq!(report.cells[0].context, Context::new("trec", 100));
    assert_eq!(report.cells[0].split, Split::Test);
    assert_eq!(report.cells[0].missing, [space.config(&["5e-05", "cosine"]).unwrap()]);
    assert_eq!(report.single_split, [(Context::new("trec", 100), Split::Test)]);
}

#[test]
fn space_file_examples() {
    let space = parse_space(
        r#"{"label":"x","hyperparameters":[
            {"name":"lr","kind":"real","domain":[5e-05,"1e-04"]},
            {"name":"epochs","kind":"integer","domain":[5,10]}]}"#,
    )
    .unwrap();
    assert_eq!(space.hyperparameters().len(), 2);
    assert_eq!(space.grid_size(), 4);

    let empty = r#"{"label":"x","hyperparameters":[{"name":"lr","kind":"real","domain":[]}]}"#;
    assert!(parse_space(empty).unwrap_err().to_string().contains("empty domain"));
}
