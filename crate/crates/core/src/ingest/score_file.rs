//! Comma-separated score files.
//!
//! Header: `dataset,train_size,split,score,<hp>...` with one column per
//! hyperparameter of the space, in any order. Lines starting with `#` are
//! comments. Diagnostics name the physical line (`row N`, 1-based, the header
//! included).

use std::collections::{BTreeMap, BTreeSet};

use csv::{QuoteStyle, ReaderBuilder, StringRecord, Trim, WriterBuilder};

use crate::error::{Error, Result};
use crate::model::{ConfigSpace, Configuration, Context, ScoreRecord, ScoreTable, Split};

pub const FIXED_COLUMNS: [&str; 4] = ["dataset", "train_size", "split", "score"];

pub fn parse_scores(document: &str, space: &ConfigSpace) -> Result<ScoreTable> {
    let mut reader = ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(Trim::All)
        .flexible(true)
        .from_reader(document.as_bytes());
    let mut rows = reader.records();

    let header = match rows.next() {
        None => return Err(Error::parse("row 1", "missing header row")),
        Some(r) => r.map_err(csv_error)?,
    };
    let header_row = row_of(&header);
    let hp_columns = parse_header(&header, space, &header_row)?;
    let width = FIXED_COLUMNS.len() + hp_columns.len();

    let mut table = ScoreTable::new(space.clone());
    // first row that defined each cell, for duplicate diagnostics
    let mut seen: BTreeMap<(Context, Split, Configuration), u64> = BTreeMap::new();

    for record in rows {
        let record = record.map_err(csv_error)?;
        let row = row_of(&record);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() != width {
            return Err(Error::parse(&row, format!("expected {width} fields, found {}", record.len())));
        }
        let dataset = &record[0];
        if dataset.is_empty() {
            return Err(Error::parse(&row, "empty dataset"));
        }
        let train_size: u64 = match record[1].parse() {
            Ok(n) if n > 0 => n,
            _ => return Err(Error::parse(&row, format!("invalid train_size '{}'", &record[1]))),
        };
        let split: Split = record[2].parse().map_err(|e: String| Error::parse(&row, e))?;
        let score: f64 = record[3]
            .parse()
            .map_err(|_| Error::parse(&row, format!("invalid score '{}'", &record[3])))?;
        if !score.is_finite() {
            return Err(Error::parse(&row, format!("non-finite score '{}'", &record[3])));
        }
        if score < 0.0 {
            return Err(Error::parse(&row, "negative score"));
        }
        let mut values = vec![""; space.hyperparameters().len()];
        for (col, &hp_index) in hp_columns.iter().enumerate() {
            values[hp_index] = &record[FIXED_COLUMNS.len() + col];
        }
        let config = space.config(&values).map_err(|e| match e {
            Error::InvalidConfig(msg) => Error::parse(&row, format!("value not in domain: {msg}")),
            other => other,
        })?;
        let context = Context::new(dataset, train_size);
        let key = (context.clone(), split, config.clone());
        if let Some(&first) = seen.get(&key) {
            let existing = table.score(&context, split, &config).unwrap_or(f64::NAN);
            if existing != score + 0.0 {
                return Err(Error::parse(
                    &row,
                    format!("duplicate row conflicts with row {first} ({existing} vs {score})"),
                ));
            }
            continue;
        }
        seen.insert(key, record.position().map_or(0, |p| p.line()));
        table.insert(ScoreRecord {
            context,
            split,
            config,
            score,
        })?;
    }
    Ok(table)
}

fn parse_header(header: &StringRecord, space: &ConfigSpace, row: &str) -> Result<Vec<usize>> {
    for (i, want) in FIXED_COLUMNS.iter().enumerate() {
        match header.get(i) {
            Some(got) if got == *want => {}
            Some(got) => {
                return Err(Error::parse(
                    row,
                    format!("expected column '{want}' at position {}, found '{got}'", i + 1),
                ))
            }
            None => return Err(Error::parse(row, format!("missing column '{want}'"))),
        }
    }
    let mut columns = Vec::new();
    let mut used = BTreeSet::new();
    for name in header.iter().skip(FIXED_COLUMNS.len()) {
        let (index, _) = space
            .hyperparameter(name)
            .ok_or_else(|| Error::parse(row, format!("unknown hyperparameter column '{name}'")))?;
        if !used.insert(index) {
            return Err(Error::parse(row, format!("duplicate column '{name}'")));
        }
        columns.push(index);
    }
    if let Some(hp) = space.hyperparameters().iter().enumerate().find(|(i, _)| !used.contains(i)) {
        return Err(Error::parse(row, format!("missing column for hyperparameter '{}'", hp.1.name())));
    }
    Ok(columns)
}

fn row_of(record: &StringRecord) -> String {
    format!("row {}", record.position().map_or(0, |p| p.line()))
}

fn csv_error(e: csv::Error) -> Error {
    let row = e.position().map_or_else(|| "input".to_string(), |p| format!("row {}", p.line()));
    Error::parse(row, format!("unreadable record: {e}"))
}

/// Writes the table in canonical form: space column order, table order, and
/// shortest round-trip score formatting.
pub fn serialize_scores(table: &ScoreTable) -> String {
    serialize_scores_with_comments(table, &[])
}

/// As [`serialize_scores`], prefixed by `# `-comment lines.
fn csv_line(fields: &[&str]) -> String {
    // A leading '#' would read back as a comment line.
    let style = if fields.first().is_some_and(|f| f.starts_with('#')) {
        QuoteStyle::Always
    } else {
        QuoteStyle::Necessary
    };
    let mut writer = WriterBuilder::new().quote_style(style).from_writer(Vec::new());
    writer.write_record(fields).expect("in-memory write");
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("inputs are UTF-8")
}

pub fn serialize_scores_with_comments(table: &ScoreTable, comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        for line in c.lines() {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
    }
    let space = table.space();
    let header: Vec<&str> = FIXED_COLUMNS
        .iter()
        .copied()
        .chain(space.hyperparameters().iter().map(|hp| hp.name()))
        .collect();
    out.push_str(&csv_line(&header));
    for r in table.records() {
        let size = r.context.train_size.to_string();
        let score = r.score.to_string();
        let mut row: Vec<&str> = vec![&r.context.dataset, &size, r.split.as_str(), &score];
        row.extend(space.values(&r.config));
        out.push_str(&csv_line(&row));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::parse_space;

    fn space() -> ConfigSpace {
        parse_space(
            r#"{"label":"toy","hyperparameters":[
                {"name":"lr","kind":"real","domain":["5e-05","1e-04"]},
                {"name":"epochs","kind":"integer","domain":["5","10"]}]}"#,
        )
        .unwrap()
    }

    const FULL: &str = "\
# a comment
dataset,train_size,split,score,lr,epochs
trec,100,test,50.5,5e-05,5
trec,100,test,51,5e-05,10
trec,100,test,40,1e-04,5
trec,100,test,45.25,0.0001,10
";

    fn err(doc: &str) -> String {
        parse_scores(doc, &space()).unwrap_err().to_string()
    }

    #[test]
    fn parses_full_grid() {
        let t = parse_scores(FULL, &space()).unwrap();
        assert_eq!(t.len(), 4);
        let cfg = t.space().config(&["1.0e-4", "10"]).unwrap();
        assert_eq!(t.score(&Context::new("trec", 100), Split::Test, &cfg), Some(45.25));
    }

    #[test]
    fn hp_columns_may_be_permuted() {
        let doc = "dataset,train_size,split,score,epochs,lr\ntrec,100,test,1,10,5e-05\n";
        let t = parse_scores(doc, &space()).unwrap();
        let cfg = t.space().config(&["5e-05", "10"]).unwrap();
        assert_eq!(t.score(&Context::new("trec", 100), Split::Test, &cfg), Some(1.0));
    }

    #[test]
    fn serialize_round_trip() {
        let t = parse_scores(FULL, &space()).unwrap();
        let text = serialize_scores(&t);
        let again = parse_scores(&text, &space()).unwrap();
        assert_eq!(again, t);
        assert_eq!(serialize_scores(&again), text);
    }

    #[test]
    fn identical_duplicates_collapse() {
        let doc = format!("{FULL}trec,100,test,51.0,5e-5,10\n");
        assert_eq!(parse_scores(&doc, &space()).unwrap().len(), 4);
    }

    #[test]
    fn row_numbers_count_comments_and_header() {
        let doc = FULL.replace("40,1e-04", "-0.2,1e-04");
        assert_eq!(err(&doc), "negative score at row 5");
        let doc = format!("{FULL}trec,100,test,99,5e-05,10\n");
        assert_eq!(err(&doc), "duplicate row conflicts with row 4 (51 vs 99) at row 7");
    }

    #[test]
    fn header_errors() {
        assert_eq!(err(""), "missing header row at row 1");
        assert!(err("dataset,size,split,score,lr,epochs\n").contains("expected column 'train_size'"));
        assert!(err("dataset,train_size,split,score,lr,epochs,wd\n").contains("unknown hyperparameter column 'wd'"));
        assert!(err("dataset,train_size,split,score,lr\n").contains("missing column for hyperparameter 'epochs'"));
        assert!(err("dataset,train_size,split,score,lr,lr,epochs\n").contains("duplicate column 'lr'"));
    }
}
