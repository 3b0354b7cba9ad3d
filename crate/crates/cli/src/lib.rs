//! `cbs` command-line interface.
//!
//! [`run`] parses arguments, executes one subcommand and returns the process
//! exit code: 0 on success, 1 for usage errors, 2 for data errors.

mod args;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::Path;

use clap::Parser;

use cbs_core::cbs::{self, RankOptions};
use cbs_core::eval::{self, BudgetNormalization, BudgetOptions, LooOptions};
use cbs_core::importance::{self, ImportanceOptions, Scope};
use cbs_core::ingest::{self, builtin_catalog, builtin_spaces, Method, Source, SpaceSource, TaskMap};
use cbs_core::model::{ConfigSpace, Configuration, Context, ScoreTable};
use cbs_core::report::{self, RunManifest};
use cbs_core::synth::{self, SynthOptions};

pub use args::{Cli, Command, Format};
use args::{Analysis, Inputs, Normalization, SourceFilter};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
}

impl From<cbs_core::Error> for CliError {
    fn from(e: cbs_core::Error) -> Self {
        match e {
            cbs_core::Error::InvalidThreshold(_) => CliError::Usage(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// One finished command: the main document plus side files written only
/// under `--out`.
struct Output {
    name: &'static str,
    body: String,
    extension: &'static str,
    extra: Vec<(String, String)>,
}

pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let result = execute(&cli).and_then(|out| emit(&cli, out, stdout));
    match result {
        Ok(()) => EXIT_OK,
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Data(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_DATA
        }
    }
}

fn emit(cli: &Cli, out: Output, stdout: &mut dyn Write) -> CliResult<()> {
    let io = |e: std::io::Error| CliError::Data(e.to_string());
    match out_dir(&cli.command) {
        None => stdout.write_all(out.body.as_bytes()).map_err(io)?,
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| CliError::Data(format!("cannot create {}: {e}", dir.display())))?;
            let mut files = vec![(format!("{}.{}", out.name, out.extension), out.body)];
            files.extend(out.extra);
            for (name, body) in files {
                let path = dir.join(&name);
                fs::write(&path, body).map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))?;
                writeln!(stdout, "wrote {}", path.display()).map_err(io)?;
            }
        }
    }
    Ok(())
}

fn out_dir(command: &Command) -> Option<&Path> {
    match command {
        Command::Validate { out, .. } | Command::Recommend { out, .. } | Command::Space { out, .. } => out.as_deref(),
        Command::Rank { analysis, .. }
        | Command::Loo { analysis, .. }
        | Command::Budget { analysis, .. }
        | Command::Importance { analysis, .. }
        | Command::Compare { analysis, .. } => analysis.out.as_deref(),
        Command::Synth { out, .. } => Some(out.as_path()),
    }
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))
}

fn load(inputs: &Inputs) -> CliResult<ScoreTable> {
    let space = ingest::parse_space(&read(&inputs.space)?)
        .map_err(|e| CliError::Data(format!("{}: {e}", inputs.space.display())))?;
    ingest::parse_scores(&read(&inputs.scores)?, &space)
        .map_err(|e| CliError::Data(format!("{}: {e}", inputs.scores.display())))
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

fn manifest(command: &str, inputs: Option<&Inputs>, analysis: Option<&Analysis>) -> RunManifest {
    let mut m = RunManifest::new(command);
    if let Some(i) = inputs {
        m.space = Some(path_str(&i.space));
        m.scores = Some(path_str(&i.scores));
    }
    if let Some(a) = analysis {
        m.out = a.out.as_deref().map(path_str);
        if !a.datasets.is_empty() {
            m.extra.push(format!("datasets={}", a.datasets.join(",")));
        }
        if !a.train_sizes.is_empty() {
            let sizes: Vec<String> = a.train_sizes.iter().map(u64::to_string).collect();
            m.extra.push(format!("train_sizes={}", sizes.join(",")));
        }
        if a.skip_degenerate {
            m.extra.push("skip_degenerate=true".into());
        }
    }
    m
}

fn render<T: serde::Serialize>(format: Format, manifest: &RunManifest, doc: &T, text: impl FnOnce(&T) -> String) -> (String, &'static str) {
    match format {
        Format::Machine => (report::machine(manifest, doc), "json"),
        Format::Text => (format!("{}{}", manifest.text_header(), text(doc)), "txt"),
    }
}

/// Requested datasets (all by default), each checked against the table.
fn datasets(table: &ScoreTable, requested: &[String]) -> CliResult<Vec<String>> {
    let present = table.datasets();
    if requested.is_empty() {
        return Ok(present.into_iter().collect());
    }
    for d in requested {
        if !present.contains(d) {
            return Err(CliError::Data(format!("unknown dataset '{d}'")));
        }
    }
    Ok(requested.to_vec())
}

fn train_sizes(table: &ScoreTable, requested: &[u64]) -> CliResult<Vec<u64>> {
    let present = table.train_sizes();
    if requested.is_empty() {
        return Ok(present.into_iter().collect());
    }
    for m in requested {
        if !present.contains(m) {
            return Err(CliError::Data(format!("no records with train_size {m}")));
        }
    }
    Ok(requested.to_vec())
}

fn task_map(source: Option<&str>) -> CliResult<Option<TaskMap>> {
    match source {
        None => Ok(None),
        Some("builtin") => Ok(Some(ingest::builtin_task_map())),
        Some(path) => {
            let text = read(Path::new(path))?;
            ingest::parse_task_map(&text)
                .map(Some)
                .map_err(|e| CliError::Data(format!("{path}: {e}")))
        }
    }
}

fn parse_config(space: &ConfigSpace, text: &str) -> CliResult<Configuration> {
    let pairs = text
        .split(',')
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| CliError::Usage(format!("expected name=value, found '{kv}'")))
        })
        .collect::<CliResult<Vec<_>>>()?;
    space
        .config_from_assignments(&pairs)
        .map_err(|e| CliError::Usage(format!("--default: {e}")))
}

fn execute(cli: &Cli) -> CliResult<Output> {
    let format = cli.format;
    match &cli.command {
        Command::Validate { inputs, out } => {
            let table = load(inputs)?;
            let report = ingest::completeness_report(&table)?;
            let mut m = manifest("validate", Some(inputs), None);
            m.out = out.as_deref().map(path_str);
            let doc = report.to_doc(table.space());
            let (body, extension) = render(format, &m, &doc, |_| report::completeness_text(table.space(), &report, table.len()));
            Ok(Output {
                name: "validate",
                body,
                extension,
                extra: Vec::new(),
            })
        }

        Command::Rank {
            inputs,
            analysis,
            split,
            threshold,
            top,
        } => {
            let table = load(inputs)?;
            let ds = datasets(&table, &analysis.datasets)?;
            let sizes = train_sizes(&table, &analysis.train_sizes)?;
            let contexts: Vec<Context> = ds
                .iter()
                .flat_map(|d| sizes.iter().map(move |&m| Context::new(d.as_str(), m)))
                .filter(|c| table.scores(c, *split).is_some())
                .collect();
            if contexts.is_empty() {
                return Err(CliError::Data(format!("no {split} records for the selected datasets and sizes")));
            }
            let ranking = cbs::rank(
                &table,
                &contexts,
                RankOptions {
                    threshold: *threshold,
                    split: *split,
                    skip_degenerate: analysis.skip_degenerate,
                },
            )?;
            let mut m = manifest("rank", Some(inputs), Some(analysis));
            m.split = Some(*split);
            m.threshold = Some(*threshold);
            if let Some(n) = top {
                m.extra.push(format!("top={n}"));
            }
            let doc = report::ranking_doc(table.space(), &ranking, *top);
            let (body, extension) = render(format, &m, &doc, report::ranking_text);
            Ok(Output {
                name: "rank",
                body,
                extension,
                extra: Vec::new(),
            })
        }

        Command::Loo {
            inputs,
            analysis,
            split,
            threshold,
        } => {
            let table = load(inputs)?;
            let ds = datasets(&table, &analysis.datasets)?;
            let sizes = train_sizes(&table, &analysis.train_sizes)?;
            let options = LooOptions {
                threshold: *threshold,
                rank_split: *split,
                skip_degenerate: analysis.skip_degenerate,
            };
            let results = eval::loo_cbs(&table, &ds, &sizes, &options)?;
            let mut m = manifest("loo", Some(inputs), Some(analysis));
            m.split = Some(*split);
            m.threshold = Some(*threshold);
            let doc = report::loo_doc(table.space(), &results);
            let (body, extension) = render(format, &m, &doc, report::loo_text);
            Ok(Output {
                name: "loo",
                body,
                extension,
                extra: Vec::new(),
            })
        }

        Command::Budget {
            inputs,
            analysis,
            split,
            threshold,
            max_budget,
            normalization,
        } => {
            let table = load(inputs)?;
            let ds = datasets(&table, &analysis.datasets)?;
            let sizes = train_sizes(&table, &analysis.train_sizes)?;
            let normalization = match normalization {
                Normalization::ContextMax => BudgetNormalization::ContextMax,
                Normalization::UpperBound => BudgetNormalization::UpperBound,
            };
            let options = BudgetOptions {
                loo: LooOptions {
                    threshold: *threshold,
                    rank_split: *split,
                    skip_degenerate: analysis.skip_degenerate,
                },
                max_budget: *max_budget,
                normalization,
            };
            let curve = eval::budget_curve(&table, &ds, &sizes, &options)?;
            let mut m = manifest("budget", Some(inputs), Some(analysis));
            m.split = Some(*split);
            m.threshold = Some(*threshold);
            m.max_budget = Some(*max_budget);
            if normalization == BudgetNormalization::UpperBound {
                m.extra.push("normalization=upper-bound".into());
            }
            let doc = report::budget_doc(table.space(), &curve, normalization);
            let (body, extension) = render(format, &m, &doc, report::budget_text);
            let mut csv = String::from("k,mean\n");
            for p in &doc.points {
                csv.push_str(&format!("{},{}\n", p.k, p.mean));
            }
            Ok(Output {
                name: "budget",
                body,
                extension,
                extra: vec![("budget_curve.csv".into(), csv)],
            })
        }

        Command::Importance {
            inputs,
            analysis,
            split,
            threshold,
            permutations,
            seed,
            combined,
        } => {
            let table = load(inputs)?;
            let ds = datasets(&table, &analysis.datasets)?;
            let sizes = train_sizes(&table, &analysis.train_sizes)?;
            let options = ImportanceOptions {
                split: *split,
                threshold: *threshold,
                permutations: *permutations,
                seed: *seed,
                skip_degenerate: analysis.skip_degenerate,
            };
            cbs::check_threshold(*threshold)?;
            let mut scopes: Vec<Scope> = sizes.iter().map(|&m| Scope::TrainSize(m)).collect();
            if *combined {
                scopes.push(Scope::Combined);
            }
            let reports: Vec<_> = scopes
                .iter()
                .map(|&s| importance::importance_report(&table, &ds, s, &options))
                .collect();
            let mut m = manifest("importance", Some(inputs), Some(analysis));
            m.split = Some(*split);
            m.threshold = Some(*threshold);
            m.seed = Some(*seed);
            m.permutations = Some(*permutations);
            if *combined {
                m.extra.push("combined=true".into());
            }
            let matrix = report::importance_matrix_csv(&reports);
            let (body, extension) = render(format, &m, &reports, |rs| {
                let blocks: Vec<String> = rs.iter().map(report::importance_text).collect();
                format!("{}\njs_pval matrix:\n{matrix}", blocks.join("\n"))
            });
            Ok(Output {
                name: "importance",
                body,
                extension,
                extra: vec![("importance_matrix.csv".into(), matrix)],
            })
        }

        Command::Compare {
            inputs,
            analysis,
            split,
            threshold,
            task_map: tm,
            default,
            default_space,
            default_scores,
        } => {
            let table = load(inputs)?;
            let ds = datasets(&table, &analysis.datasets)?;
            let sizes = train_sizes(&table, &analysis.train_sizes)?;
            let tasks = task_map(tm.as_deref())?;
            let baseline_table = match (default_space, default_scores) {
                (Some(space), Some(scores)) => Some(load(&Inputs {
                    space: space.clone(),
                    scores: scores.clone(),
                })?),
                (None, None) => None,
                _ => return Err(CliError::Usage("--default-space and --default-scores go together".into())),
            };
            let baseline_source = baseline_table.as_ref().unwrap_or(&table);
            let baseline = match default {
                Some(text) => Some(parse_config(baseline_source.space(), text)?),
                None if baseline_table.is_some() => {
                    return Err(CliError::Usage("--default-scores needs --default".into()));
                }
                None => None,
            };
            let options = LooOptions {
                threshold: *threshold,
                rank_split: *split,
                skip_degenerate: analysis.skip_degenerate,
            };
            let rows = eval::compare(&table, baseline.as_ref().map(|c| (baseline_source, c)), &ds, &sizes, tasks.as_ref(), &options)?;
            let mut m = manifest("compare", Some(inputs), Some(analysis));
            m.split = Some(*split);
            m.threshold = Some(*threshold);
            m.task_map = tm.clone();
            if let Some(d) = default {
                m.extra.push(format!("default={d}"));
            }
            if let (Some(s), Some(c)) = (default_space, default_scores) {
                m.extra.push(format!("default_space={}", path_str(s)));
                m.extra.push(format!("default_scores={}", path_str(c)));
            }
            let (body, extension) = render(format, &m, &rows, |r| report::compare_text(r));
            Ok(Output {
                name: "compare",
                body,
                extension,
                extra: Vec::new(),
            })
        }

        Command::Recommend {
            model,
            method,
            source,
            out,
        } => {
            let method = method.as_deref().map(parse_method).transpose()?;
            let entries: Vec<_> = builtin_catalog()
                .iter()
                .filter(|e| model.as_ref().is_none_or(|m| &e.model == m))
                .filter(|e| method.is_none_or(|m| e.method == m))
                .filter(|e| match source {
                    SourceFilter::All => true,
                    SourceFilter::Cbs => e.source == Source::CbsRecommendation,
                    SourceFilter::Default => e.source == Source::DefaultBaseline,
                })
                .collect();
            if entries.is_empty() {
                return Err(CliError::Usage(format!("no catalog entries match; models: {}", known_models().join(", "))));
            }
            let mut m = RunManifest::new("recommend");
            m.out = out.as_deref().map(path_str);
            if let Some(x) = model {
                m.extra.push(format!("model={x}"));
            }
            if let Some(x) = method {
                m.extra.push(format!("method={x}"));
            }
            m.extra.push(format!("source={}", source.as_str()));
            let rows = report::recommend_rows(&entries);
            let (body, extension) = render(format, &m, &rows, |r| report::recommend_text(r));
            Ok(Output {
                name: "recommend",
                body,
                extension,
                extra: Vec::new(),
            })
        }

        Command::Space {
            model, method, default, ..
        } => {
            let method = parse_method(method)?;
            let want = if *default { SpaceSource::Default } else { SpaceSource::CbsSearch };
            let space = builtin_spaces()
                .iter()
                .find(|s| &s.model == model && s.method == method && s.source == want)
                .ok_or_else(|| CliError::Usage(format!("unknown model '{model}'; models: {}", known_models().join(", "))))?;
            Ok(Output {
                name: "space",
                body: ingest::serialize_space(&space.space),
                extension: "json",
                extra: Vec::new(),
            })
        }

        Command::Synth {
            space,
            hps,
            datasets,
            train_sizes,
            rho,
            scale,
            size_noise,
            split_noise,
            drop_rate,
            seed,
            out,
        } => {
            let (space, space_label) = match space {
                Some(path) => (
                    ingest::parse_space(&read(path)?).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?,
                    path_str(path),
                ),
                None => (synth::synth_space(hps)?, format!("synthetic {hps:?}")),
            };
            let options = SynthOptions {
                datasets: *datasets,
                train_sizes: train_sizes.clone(),
                rho: *rho,
                scale: *scale,
                size_noise: *size_noise,
                split_noise: *split_noise,
                drop_rate: *drop_rate,
                seed: *seed,
            };
            let table = synth::synth_table(&space, &options).map_err(|e| CliError::Usage(e.to_string()))?;
            let mut m = RunManifest::new("synth");
            m.space = Some(space_label);
            m.seed = Some(*seed);
            m.out = Some(path_str(out));
            m.extra = vec![
                format!("datasets={datasets}"),
                format!("train_sizes={}", train_sizes.iter().map(u64::to_string).collect::<Vec<_>>().join(",")),
                format!("rho={rho}"),
                format!("scale={scale}"),
                format!("size_noise={size_noise}"),
                format!("split_noise={split_noise}"),
                format!("drop_rate={drop_rate}"),
            ];
            let mut comments = vec!["synthetic scores, not measured results".to_string()];
            comments.extend(m.lines());
            Ok(Output {
                name: "scores",
                body: ingest::serialize_scores_with_comments(&table, &comments),
                extension: "csv",
                extra: vec![("space.json".into(), ingest::serialize_space(&space))],
            })
        }
    }
}

fn parse_method(s: &str) -> CliResult<Method> {
    Method::parse(s).ok_or_else(|| CliError::Usage(format!("unknown method '{s}' (expected full_ft or lora)")))
}

fn known_models() -> Vec<String> {
    let mut models: Vec<String> = builtin_spaces().iter().map(|s| s.model.clone()).collect();
    models.dedup();
    models
}
