//! Dataset → task labels used to group macro-averages.
//!
//! File format: comma-separated `dataset,task` with an optional header row
//! of exactly `dataset,task`; `#` lines are comments.

use std::collections::BTreeMap;

use csv::{ReaderBuilder, Trim};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TaskMap {
    exact: BTreeMap<String, String>,
    /// Lookups also try a key with case and punctuation removed.
    loose: BTreeMap<String, String>,
}

fn loose_key(name: &str) -> String {
    name.chars().filter(|c| c.is_alphanumeric()).flat_map(char::to_lowercase).collect()
}

impl TaskMap {
    pub fn insert(&mut self, dataset: &str, task: &str) {
        self.exact.insert(dataset.to_string(), task.to_string());
        self.loose.insert(loose_key(dataset), task.to_string());
    }

    pub fn task_of(&self, dataset: &str) -> Option<&str> {
        self.exact
            .get(dataset)
            .or_else(|| self.loose.get(&loose_key(dataset)))
            .map(String::as_str)
    }

    pub fn is_empty(&self) -> bool {
        self.exact.is_empty()
    }
}

pub fn parse_task_map(document: &str) -> Result<TaskMap> {
    let mut reader = ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(Trim::All)
        .flexible(true)
        .from_reader(document.as_bytes());
    let mut map = TaskMap::default();
    let mut seen = BTreeMap::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::parse("task map", e.to_string()))?;
        let row = format!("row {}", record.position().map_or(0, |p| p.line()));
        if i == 0 && record.iter().collect::<Vec<_>>() == ["dataset", "task"] {
            continue;
        }
        if record.len() != 2 || record[0].is_empty() || record[1].is_empty() {
            return Err(Error::parse(row, "expected 'dataset,task'"));
        }
        if let Some(prev) = seen.insert(record[0].to_string(), record[1].to_string()) {
            if prev != record[1] {
                return Err(Error::parse(row, format!("dataset '{}' mapped to two tasks", &record[0])));
            }
        }
        map.insert(&record[0], &record[1]);
    }
    Ok(map)
}

/// Grouping of the published benchmark datasets into classification,
/// summarization and contextual QA.
pub fn builtin_task_map() -> TaskMap {
    let mut map = TaskMap::default();
    for (datasets, task) in [
        (&["Head-QA", "20 Newsgroups", "TREC", "Banking77", "LEDGAR"][..], "classification"),
        (&["TL;DR", "CNN-DM", "Xsum", "XL-Sum", "BillSum"][..], "summarization"),
        (
            &["CLAP NQ", "DoQA-cooking", "DoQA-travel", "DoQA-movies", "Open Australian Legal QA"][..],
            "cqa",
        ),
    ] {
        for d in datasets {
            map.insert(d, task);
        }
    }
    map
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_with_header_and_comments() {
        let map = parse_task_map("# tasks\ndataset,task\ntrec,classification\nxsum,summarization\n").unwrap();
        assert_eq!(map.task_of("trec"), Some("classification"));
        assert_eq!(map.task_of("XSum"), Some("summarization"));
        assert_eq!(map.task_of("other"), None);
    }

    #[test]
    fn rejects_conflicts() {
        assert!(parse_task_map("a,x\na,y\n").is_err());
        assert!(parse_task_map("a\n").is_err());
    }

    #[test]
    fn preset_matches_loosely() {
        let map = builtin_task_map();
        assert_eq!(map.task_of("banking77"), Some("classification"));
        assert_eq!(map.task_of("cnn_dm"), Some("summarization"));
        assert_eq!(map.task_of("doqa_travel"), Some("cqa"));
    }
}
