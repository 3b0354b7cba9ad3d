//! Reading and writing the external file formats, plus the built-in catalog
//! of published search spaces and recommendations.

mod catalog;
mod score_file;
mod space_file;
mod task_map;

use std::collections::BTreeSet;

use serde::Serialize;

use crate::model::{Configuration, Context, ScoreTable, Split};

pub use catalog::{
    builtin_catalog, builtin_spaces, catalog_document, serialize_catalog, CatalogEntry, CatalogSpace, Method,
    Source, SpaceSource, CATALOG_COLUMNS,
};
pub use score_file::{parse_scores, serialize_scores, serialize_scores_with_comments, FIXED_COLUMNS};
pub use space_file::{parse_space, serialize_space};
pub use task_map::{builtin_task_map, parse_task_map, TaskMap};

/// Grid coverage of one (context, split).
#[derive(Debug, Clone, PartialEq)]
pub struct CellCompleteness {
    pub context: Context,
    pub split: Split,
    pub present: usize,
    pub missing: Vec<Configuration>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CompletenessReport {
    pub cells: Vec<CellCompleteness>,
    /// Contexts that appear in exactly one split.
    pub single_split: Vec<(Context, Split)>,
}

impl CompletenessReport {
    pub fn is_complete(&self) -> bool {
        self.cells.iter().all(|c| c.missing.is_empty())
    }

    pub fn missing_total(&self) -> usize {
        self.cells.iter().map(|c| c.missing.len()).sum()
    }
}

/// Lists, per (context, split) present in `table`, the grid points without a
/// record.
pub fn completeness_report(table: &ScoreTable) -> crate::Result<CompletenessReport> {
    let mut report = CompletenessReport::default();
    if table.is_empty() {
        return Ok(report);
    }
    let grid = table.space().grid()?;
    for (context, split, scores) in table.cells() {
        let missing = grid.iter().filter(|c| !scores.contains_key(c)).cloned().collect();
        report.cells.push(CellCompleteness {
            context: context.clone(),
            split,
            present: scores.len(),
            missing,
        });
    }
    let validation: BTreeSet<Context> = table.contexts(Split::Validation).into_iter().collect();
    let test: BTreeSet<Context> = table.contexts(Split::Test).into_iter().collect();
    for c in validation.symmetric_difference(&test) {
        let split = if validation.contains(c) { Split::Validation } else { Split::Test };
        report.single_split.push((c.clone(), split));
    }
    Ok(report)
}

/// Machine-readable view of a [`CompletenessReport`].
#[derive(Debug, Serialize)]
pub struct CompletenessDoc {
    pub complete: bool,
    pub cells: Vec<CellDoc>,
    pub single_split: Vec<SingleSplitDoc>,
}

#[derive(Debug, Serialize)]
pub struct CellDoc {
    pub context: Context,
    pub split: Split,
    pub present: usize,
    pub missing: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct SingleSplitDoc {
    pub context: Context,
    pub only: Split,
}

impl CompletenessReport {
    pub fn to_doc(&self, space: &crate::model::ConfigSpace) -> CompletenessDoc {
        CompletenessDoc {
            complete: self.is_complete(),
            cells: self
                .cells
                .iter()
                .map(|c| CellDoc {
                    context: c.context.clone(),
                    split: c.split,
                    present: c.present,
                    missing: c.missing.iter().map(|m| space.describe(m)).collect(),
                })
                .collect(),
            single_split: self
                .single_split
                .iter()
                .map(|(c, s)| SingleSplitDoc {
                    context: c.clone(),
                    only: *s,
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space() -> crate::model::ConfigSpace {
        parse_space(r#"{"hyperparameters":[{"name":"a","kind":"integer","domain":[1,2]},{"name":"b","kind":"integer","domain":[1,2]}]}"#)
            .unwrap()
    }

    #[test]
    fn full_grid_has_no_missing() {
        let doc = "dataset,train_size,split,score,a,b\nd,1,test,1,1,1\nd,1,test,1,1,2\nd,1,test,1,2,1\nd,1,test,1,2,2\n";
        let report = completeness_report(&parse_scores(doc, &space()).unwrap()).unwrap();
        assert!(report.is_complete());
        assert_eq!(report.cells.len(), 1);
        assert_eq!(report.single_split.len(), 1);
    }

    #[test]
    fn partial_grid_lists_exactly_the_gaps() {
        let s = space();
        let doc = "dataset,train_size,split,score,a,b\nd,1,test,1,1,1\nd,1,test,1,2,2\n";
        let report = completeness_report(&parse_scores(doc, &s).unwrap()).unwrap();
        let missing: Vec<String> = report.cells[0].missing.iter().map(|c| s.describe(c)).collect();
        assert_eq!(missing, ["a=1,b=2", "a=2,b=1"]);
    }

    #[test]
    fn empty_table_has_empty_report() {
        let report = completeness_report(&ScoreTable::new(space())).unwrap();
        assert!(report.cells.is_empty());
        assert!(report.is_complete());
    }
}
