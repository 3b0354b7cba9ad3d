//! Browser bindings. Every export takes the space file (JSON) and score file
//! (CSV) as text and returns a JSON document; the page does the drawing.
//!
//! The plain functions are what the wasm exports call, so they can be
//! exercised natively.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use cbs_core::cbs::{rank, RankOptions};
use cbs_core::eval::{budget_curve, BudgetOptions, LooOptions};
use cbs_core::importance::{importance_report, ImportanceOptions, ImportanceReport, Scope};
use cbs_core::ingest::{parse_scores, parse_space, serialize_scores_with_comments, serialize_space};
use cbs_core::model::{ScoreTable, Split};
use cbs_core::report::{budget_doc, ranking_doc};
use cbs_core::synth::{synth_space, synth_table, SynthOptions};

fn load(space: &str, scores: &str) -> Result<ScoreTable, String> {
    let space = parse_space(space).map_err(|e| format!("space file: {e}"))?;
    parse_scores(scores, &space).map_err(|e| format!("score file: {e}"))
}

fn json<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

fn split(name: &str) -> Result<Split, String> {
    name.parse()
}

#[derive(Serialize)]
struct Generated {
    space: String,
    scores: String,
}

/// `hps` lists domain sizes, e.g. "4,3,2".
pub fn synth(hps: &str, datasets: usize, rho: f64, seed: u64) -> Result<String, String> {
    let sizes = hps
        .split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|_| format!("bad domain size '{s}'")))
        .collect::<Result<Vec<_>, _>>()?;
    let space = synth_space(&sizes).map_err(|e| e.to_string())?;
    let options = SynthOptions {
        datasets,
        train_sizes: vec![100, 1000],
        rho,
        seed,
        ..SynthOptions::default()
    };
    let table = synth_table(&space, &options).map_err(|e| e.to_string())?;
    json(&Generated {
        space: serialize_space(&space),
        scores: serialize_scores_with_comments(&table, &["synthetic scores, not measured results".into()]),
    })
}

pub fn ranking(space: &str, scores: &str, threshold: f64, split_name: &str, top: usize) -> Result<String, String> {
    let table = load(space, scores)?;
    let options = RankOptions {
        threshold,
        split: split(split_name)?,
        skip_degenerate: true,
    };
    let contexts = table.contexts(options.split);
    let r = rank(&table, &contexts, options).map_err(|e| e.to_string())?;
    json(&ranking_doc(table.space(), &r, (top > 0).then_some(top)))
}

pub fn budget(space: &str, scores: &str, threshold: f64, max_budget: usize) -> Result<String, String> {
    let table = load(space, scores)?;
    let datasets: Vec<String> = table.datasets().into_iter().collect();
    let sizes: Vec<u64> = table.train_sizes().into_iter().collect();
    let options = BudgetOptions {
        loo: LooOptions {
            threshold,
            skip_degenerate: true,
            ..LooOptions::default()
        },
        max_budget,
        ..BudgetOptions::default()
    };
    let curve = budget_curve(&table, &datasets, &sizes, &options).map_err(|e| e.to_string())?;
    json(&budget_doc(table.space(), &curve, options.normalization))
}

/// One report per training size.
pub fn importance(space: &str, scores: &str, permutations: usize, seed: u64) -> Result<String, String> {
    let table = load(space, scores)?;
    let datasets: Vec<String> = table.datasets().into_iter().collect();
    let options = ImportanceOptions {
        permutations,
        seed,
        skip_degenerate: true,
        ..ImportanceOptions::default()
    };
    let reports: Vec<ImportanceReport> = table
        .train_sizes()
        .into_iter()
        .map(|m| importance_report(&table, &datasets, Scope::TrainSize(m), &options))
        .collect();
    json(&reports)
}

fn js(r: Result<String, String>) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = synth)]
pub fn synth_js(hps: &str, datasets: usize, rho: f64, seed: u32) -> Result<String, JsValue> {
    js(synth(hps, datasets, rho, seed.into()))
}

#[wasm_bindgen(js_name = rank)]
pub fn rank_js(space: &str, scores: &str, threshold: f64, split: &str, top: usize) -> Result<String, JsValue> {
    js(ranking(space, scores, threshold, split, top))
}

#[wasm_bindgen(js_name = budget)]
pub fn budget_js(space: &str, scores: &str, threshold: f64, max_budget: usize) -> Result<String, JsValue> {
    js(budget(space, scores, threshold, max_budget))
}

#[wasm_bindgen(js_name = importance)]
pub fn importance_js(space: &str, scores: &str, permutations: usize, seed: u32) -> Result<String, JsValue> {
    js(importance(space, scores, permutations, seed.into()))
}
