//! Text and machine-readable rendering of analysis results.
//!
//! Machine output is a JSON object `{"manifest": ..., "result": ...}`. Text
//! output starts with the manifest as `# key: value` lines.

use std::fmt::Write as _;

use serde::Serialize;

use crate::cbs::CbsRanking;
use crate::eval::{BudgetCurve, BudgetNormalization, ComparisonRow, LooResult};
use crate::importance::ImportanceReport;
use crate::ingest::{CatalogEntry, CompletenessReport, Method};
use crate::model::{ConfigSpace, Context, Split};

/// Parameters of one run, embedded verbatim in every output.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub space: Option<String>,
    pub scores: Option<String>,
    pub task_map: Option<String>,
    pub split: Option<Split>,
    pub threshold: Option<f64>,
    pub seed: Option<u64>,
    pub max_budget: Option<usize>,
    pub permutations: Option<usize>,
    pub out: Option<String>,
    /// Remaining flags in `name=value` form.
    pub extra: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        RunManifest {
            tool: "cbs".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            ..RunManifest::default()
        }
    }

    pub fn lines(&self) -> Vec<String> {
        let mut out = vec![
            format!("tool: {} {}", self.tool, self.version),
            format!("command: {}", self.command),
        ];
        let mut opt = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                out.push(format!("{k}: {v}"));
            }
        };
        opt("space", self.space.clone());
        opt("scores", self.scores.clone());
        opt("task_map", self.task_map.clone());
        opt("split", self.split.map(|s| s.to_string()));
        opt("threshold", self.threshold.map(|t| t.to_string()));
        opt("seed", self.seed.map(|s| s.to_string()));
        opt("max_budget", self.max_budget.map(|s| s.to_string()));
        opt("permutations", self.permutations.map(|s| s.to_string()));
        opt("out", self.out.clone());
        for e in &self.extra {
            out.push(format!("option: {e}"));
        }
        out
    }

    pub fn text_header(&self) -> String {
        self.lines().iter().map(|l| format!("# {l}\n")).collect()
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    manifest: &'a RunManifest,
    result: &'a T,
}

pub fn machine<T: Serialize>(manifest: &RunManifest, result: &T) -> String {
    let mut s = serde_json::to_string_pretty(&Envelope { manifest, result }).expect("reports serialize");
    s.push('\n');
    s
}

fn f4(x: f64) -> String {
    format!("{x:.4}")
}

fn ctx_list(contexts: impl IntoIterator<Item = impl ToString>) -> String {
    contexts.into_iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ")
}

// ---------------------------------------------------------------- ranking

#[derive(Debug, Serialize)]
pub struct RankingDoc {
    pub split: Split,
    pub threshold: f64,
    pub hyperparameters: Vec<String>,
    pub contexts: Vec<Context>,
    pub skipped: Vec<Context>,
    pub total: usize,
    pub entries: Vec<RankRow>,
}

#[derive(Debug, Serialize)]
pub struct RankRow {
    pub rank: usize,
    pub config: String,
    pub values: Vec<String>,
    pub s_sum: f64,
    pub coverage_size: usize,
    pub coverage: Vec<Context>,
}

pub fn ranking_doc(space: &ConfigSpace, ranking: &CbsRanking, top: Option<usize>) -> RankingDoc {
    let n = top.unwrap_or(usize::MAX);
    RankingDoc {
        split: ranking.split,
        threshold: ranking.threshold,
        hyperparameters: space.hyperparameters().iter().map(|h| h.name().to_string()).collect(),
        contexts: ranking.contexts.clone(),
        skipped: ranking.skipped.clone(),
        total: ranking.entries.len(),
        entries: ranking
            .entries
            .iter()
            .take(n)
            .enumerate()
            .map(|(i, e)| RankRow {
                rank: i + 1,
                config: space.describe(&e.config),
                values: space.values(&e.config).into_iter().map(String::from).collect(),
                s_sum: e.s_sum,
                coverage_size: e.coverage.len(),
                coverage: e.coverage.iter().cloned().collect(),
            })
            .collect(),
    }
}

pub fn ranking_text(doc: &RankingDoc) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "CBS ranking on {} split, threshold {}, {} contexts, {} candidates",
        doc.split,
        doc.threshold,
        doc.contexts.len(),
        doc.total
    );
    if !doc.skipped.is_empty() {
        let _ = writeln!(s, "skipped degenerate: {}", ctx_list(&doc.skipped));
    }
    let mut header = vec!["rank".to_string()];
    header.extend(doc.hyperparameters.iter().cloned());
    header.extend(["S_n", "|coverage|", "coverage"].map(String::from));
    let rows: Vec<Vec<String>> = doc
        .entries
        .iter()
        .map(|e| {
            let mut row = vec![e.rank.to_string()];
            row.extend(e.values.iter().cloned());
            row.push(f4(e.s_sum));
            row.push(e.coverage_size.to_string());
            row.push(ctx_list(&e.coverage));
            row
        })
        .collect();
    s.push_str(&table(&header, &rows));
    s
}

/// Left-aligned columns separated by two spaces.
pub fn table(header: &[String], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut s = String::new();
    for row in std::iter::once(header).chain(rows.iter().map(Vec::as_slice)) {
        let last = row.len().saturating_sub(1);
        for (i, (cell, w)) in row.iter().zip(&widths).enumerate() {
            if i == last {
                s.push_str(cell);
            } else {
                let _ = write!(s, "{cell:<w$}  ");
            }
        }
        s.push('\n');
    }
    s
}

// ---------------------------------------------------------------- completeness

pub fn completeness_text(space: &ConfigSpace, report: &CompletenessReport, records: usize) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{records} records, {} (context, split) cells", report.cells.len());
    if report.is_complete() {
        s.push_str("grid complete\n");
    } else {
        let _ = writeln!(s, "grid incomplete: {} missing records", report.missing_total());
        for cell in report.cells.iter().filter(|c| !c.missing.is_empty()) {
            let _ = writeln!(s, "{} {}: {} missing", cell.context, cell.split, cell.missing.len());
            for m in &cell.missing {
                let _ = writeln!(s, "  {}", space.describe(m));
            }
        }
    }
    for (c, split) in &report.single_split {
        let _ = writeln!(s, "warning: {c} only has {split} records");
    }
    s
}

// ---------------------------------------------------------------- loo

#[derive(Debug, Serialize)]
pub struct LooDoc {
    pub mean_normalized: f64,
    pub held_out: Vec<LooRow>,
}

#[derive(Debug, Serialize)]
pub struct LooRow {
    pub dataset: String,
    pub recommended: String,
    pub training_contexts: usize,
    pub candidates: usize,
    pub cells: Vec<crate::eval::LooCell>,
}

pub fn loo_doc(space: &ConfigSpace, results: &[LooResult]) -> LooDoc {
    LooDoc {
        mean_normalized: crate::eval::loo_mean(results),
        held_out: results
            .iter()
            .map(|r| LooRow {
                dataset: r.held_out.clone(),
                recommended: space.describe(&r.recommended),
                training_contexts: r.ranking.contexts.len(),
                candidates: r.ranking.entries.len(),
                cells: r.cells.clone(),
            })
            .collect(),
    }
}

pub fn loo_text(doc: &LooDoc) -> String {
    let header = ["held_out", "train_size", "recommended", "test", "normalized"].map(String::from);
    let rows: Vec<Vec<String>> = doc
        .held_out
        .iter()
        .flat_map(|r| {
            r.cells.iter().map(|c| {
                vec![
                    r.dataset.clone(),
                    c.context.train_size.to_string(),
                    r.recommended.clone(),
                    f4(c.test_score),
                    f4(c.normalized),
                ]
            })
        })
        .collect();
    let mut s = table(&header, &rows);
    let _ = writeln!(s, "mean normalized test score: {}", f4(doc.mean_normalized));
    s
}

// ---------------------------------------------------------------- budget

#[derive(Debug, Serialize)]
pub struct BudgetDoc {
    pub normalization: BudgetNormalization,
    pub points: Vec<crate::eval::BudgetPoint>,
    pub details: Vec<BudgetRow>,
}

#[derive(Debug, Serialize)]
pub struct BudgetRow {
    pub context: Context,
    pub k: usize,
    pub considered: usize,
    pub clamped: bool,
    pub best: String,
    pub validation_score: f64,
    pub test_score: f64,
    pub normalized: f64,
}

pub fn budget_doc(space: &ConfigSpace, curve: &BudgetCurve, normalization: BudgetNormalization) -> BudgetDoc {
    BudgetDoc {
        normalization,
        points: curve.points.clone(),
        details: curve
            .details
            .iter()
            .map(|d| BudgetRow {
                context: d.context.clone(),
                k: d.k,
                considered: d.considered,
                clamped: d.clamped,
                best: space.describe(&d.best),
                validation_score: d.validation_score,
                test_score: d.test_score,
                normalized: d.normalized,
            })
            .collect(),
    }
}

pub fn budget_text(doc: &BudgetDoc) -> String {
    let rows: Vec<Vec<String>> = doc.points.iter().map(|p| vec![p.k.to_string(), f4(p.mean)]).collect();
    let mut s = table(&["k".into(), "mean".into()], &rows);
    let clamped: Vec<String> = doc
        .details
        .iter()
        .filter(|d| d.clamped && d.k == d.considered + 1)
        .map(|d| format!("{} (ranking has {})", d.context, d.considered))
        .collect();
    if !clamped.is_empty() {
        let _ = writeln!(s, "clamped: {}", clamped.join(", "));
    }
    s
}

// ---------------------------------------------------------------- importance

pub fn importance_text(report: &ImportanceReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "scope {}, {} split, threshold {}, {} permutations, seed {}, units: {}",
        report.scope.label(),
        report.split,
        report.threshold,
        report.permutations,
        report.seed,
        report.units.join(" ")
    );
    if !report.skipped.is_empty() {
        let _ = writeln!(s, "skipped degenerate: {}", ctx_list(&report.skipped));
    }
    let failed = report.entries.iter().any(|e| e.error.is_some());
    let mut header = ["hp", "js_score", "js_pval"].map(String::from).to_vec();
    if failed {
        header.push("error".into());
    }
    let rows: Vec<Vec<String>> = report
        .entries
        .iter()
        .map(|e| {
            let mut row = vec![
                e.hp.clone(),
                e.js_score.map_or("-".into(), f4),
                e.js_pval.map_or("-".into(), f4),
            ];
            if failed {
                row.push(e.error.clone().unwrap_or_default());
            }
            row
        })
        .collect();
    s.push_str(&table(&header, &rows));
    s
}

/// HP × scope matrix of p-values as CSV; failed cells are left empty.
pub fn importance_matrix_csv(reports: &[ImportanceReport]) -> String {
    let mut s = String::from("hp");
    for r in reports {
        let _ = write!(s, ",{}", r.scope.label());
    }
    s.push('\n');
    let Some(first) = reports.first() else { return s };
    for (i, entry) in first.entries.iter().enumerate() {
        s.push_str(&entry.hp);
        for r in reports {
            s.push(',');
            if let Some(p) = r.entries.get(i).and_then(|e| e.js_pval) {
                let _ = write!(s, "{p}");
            }
        }
        s.push('\n');
    }
    s
}

// ---------------------------------------------------------------- compare

pub fn compare_text(rows: &[ComparisonRow]) -> String {
    let header = ["task", "train_size", "datasets", "Default", "CBS_1", "Upper Bound"].map(String::from);
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.task.clone(),
                r.train_size.to_string(),
                r.datasets.to_string(),
                r.default.map_or("-".into(), |d| format!("{d:.2}")),
                format!("{:.2}", r.cbs_1),
                format!("{:.2}", r.upper_bound),
            ]
        })
        .collect();
    table(&header, &body)
}

// ---------------------------------------------------------------- recommend

/// Column order of the published recommendation table.
pub const RECOMMEND_COLUMNS: [(&str, &str); 6] = [
    ("lr", "LR"),
    ("lr_scheduler", "LR Scheduler"),
    ("batch", "Batch"),
    ("epochs", "Epochs"),
    ("lora_r", "LoRA_R"),
    ("lora_alpha", "LoRA_alpha"),
];

#[derive(Debug, Serialize)]
pub struct RecommendRow {
    pub model: String,
    pub method: Method,
    pub source: String,
    pub rank: u32,
    pub values: Vec<(String, String)>,
}

pub fn recommend_rows(entries: &[&CatalogEntry]) -> Vec<RecommendRow> {
    entries
        .iter()
        .map(|e| RecommendRow {
            model: e.model.clone(),
            method: e.method,
            source: e.source.as_str().to_string(),
            rank: e.rank,
            values: RECOMMEND_COLUMNS
                .iter()
                .map(|(hp, _)| (hp.to_string(), e.printed_value(hp).unwrap_or("--").to_string()))
                .collect(),
        })
        .collect()
}

pub fn recommend_text(rows: &[RecommendRow]) -> String {
    let mut header: Vec<String> = ["Model", "Method", "Source", "Rank"].map(String::from).to_vec();
    header.extend(RECOMMEND_COLUMNS.iter().map(|(_, label)| label.to_string()));
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let mut row = vec![r.model.clone(), r.method.to_string(), r.source.clone(), r.rank.to_string()];
            row.extend(r.values.iter().map(|(_, v)| v.clone()));
            row
        })
        .collect();
    table(&header, &body)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_pads_all_but_last_column() {
        let t = table(&["a".into(), "bb".into()], &[vec!["xyz".into(), "1".into()]]);
        assert_eq!(t, "a    bb\nxyz  1\n");
    }

    #[test]
    fn manifest_lines_skip_unset_fields() {
        let mut m = RunManifest::new("rank");
        m.threshold = Some(0.97);
        m.split = Some(Split::Test);
        let lines = m.lines();
        assert_eq!(lines[1], "command: rank");
        assert!(lines.contains(&"threshold: 0.97".to_string()));
        assert!(lines.contains(&"split: test".to_string()));
        assert!(!lines.iter().any(|l| l.starts_with("seed")));
    }

    #[test]
    fn machine_output_is_an_envelope() {
        let m = RunManifest::new("x");
        let v: serde_json::Value = serde_json::from_str(&machine(&m, &vec![1, 2])).unwrap();
        assert_eq!(v["manifest"]["command"], "x");
        assert_eq!(v["result"][1], 2);
    }
}
