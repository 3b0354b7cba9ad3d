//! Slow reference implementations used by the test suites.
//!
//! Everything here works from the flat record list, uses plain vectors and
//! linear scans, and shares no code with the optimized modules.

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::model::{ConfigSpace, Context, Hyperparameter, Kind, ScoreRecord, ScoreTable, Split};

type Config = Vec<u32>;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleEntry {
    pub config: Config,
    pub s_sum: f64,
    pub coverage: Vec<Context>,
}

struct Rows {
    rows: Vec<(Context, Split, Config, f64)>,
}

impl Rows {
    fn new(table: &ScoreTable) -> Self {
        Rows {
            rows: table
                .records()
                .map(|r: ScoreRecord| (r.context, r.split, r.config.indices().to_vec(), r.score))
                .collect(),
        }
    }

    fn cell(&self, context: &Context, split: Split) -> Vec<(Config, f64)> {
        self.rows
            .iter()
            .filter(|(c, s, _, _)| c == context && *s == split)
            .map(|(_, _, cfg, v)| (cfg.clone(), *v))
            .collect()
    }

    fn score(&self, context: &Context, split: Split, config: &Config) -> Option<f64> {
        self.cell(context, split).into_iter().find(|(c, _)| c == config).map(|(_, v)| v)
    }

    fn normalized(&self, context: &Context, split: Split) -> Vec<(Config, f64)> {
        let cell = self.cell(context, split);
        let mut max = 0.0;
        for (_, v) in &cell {
            if *v > max {
                max = *v;
            }
        }
        assert!(max > 0.0, "degenerate context {context}");
        cell.into_iter().map(|(c, v)| (c, v / max)).collect()
    }

    fn top(&self, context: &Context, split: Split, threshold: f64) -> Vec<(Config, f64)> {
        self.normalized(context, split).into_iter().filter(|(_, s)| *s > threshold).collect()
    }
}

fn sorted_unique<T: Ord + Clone>(items: &[T]) -> Vec<T> {
    let mut v = items.to_vec();
    v.sort();
    v.dedup();
    v
}

/// Coverage-based ranking, transcribed step by step.
pub fn cbs_rank(table: &ScoreTable, contexts: &[Context], split: Split, threshold: f64) -> Vec<OracleEntry> {
    rank_rows(&Rows::new(table), contexts, split, threshold)
}

fn rank_rows(rows: &Rows, contexts: &[Context], split: Split, threshold: f64) -> Vec<OracleEntry> {
    let contexts = sorted_unique(contexts);
    let tc: Vec<Vec<(Config, f64)>> = contexts.iter().map(|c| rows.top(c, split, threshold)).collect();

    // TC*: union of the top sets.
    let mut tc_star: Vec<Config> = Vec::new();
    for set in &tc {
        for (c, _) in set {
            if !tc_star.contains(c) {
                tc_star.push(c.clone());
            }
        }
    }

    // S_n(c): sum of s_n over contexts where c is in the top set.
    let s_n = |c: &Config| -> f64 {
        let mut total = 0.0;
        for set in &tc {
            for (m, s) in set {
                if m == c {
                    total += s;
                }
            }
        }
        total
    };

    // coverage(c): contexts where c is in TC and nothing in TC has larger S_n.
    let mut entries: Vec<OracleEntry> = tc_star
        .iter()
        .map(|c| {
            let mine = s_n(c);
            let mut coverage = Vec::new();
            for (ctx, set) in contexts.iter().zip(&tc) {
                let member = set.iter().any(|(m, _)| m == c);
                let beaten = set.iter().any(|(m, _)| s_n(m) > mine);
                if member && !beaten {
                    coverage.push(ctx.clone());
                }
            }
            OracleEntry {
                config: c.clone(),
                s_sum: mine,
                coverage,
            }
        })
        .collect();

    entries.sort_by(|a, b| {
        b.coverage
            .len()
            .cmp(&a.coverage.len())
            .then(b.s_sum.partial_cmp(&a.s_sum).expect("finite"))
            .then(a.config.cmp(&b.config))
    });
    entries
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleLoo {
    pub held_out: String,
    pub recommended: Config,
    /// (train size, test score, normalized test score)
    pub cells: Vec<(u64, f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleBudgetCell {
    pub context: Context,
    pub k: usize,
    pub best: Config,
    pub validation: f64,
    pub normalized: f64,
}

fn test_max(rows: &Rows, context: &Context) -> f64 {
    rows.cell(context, Split::Test).iter().fold(0.0, |m, (_, v)| if *v > m { *v } else { m })
}

fn held_out_runs(
    rows: &Rows,
    datasets: &[String],
    sizes: &[u64],
    split: Split,
    threshold: f64,
) -> Vec<(String, Vec<OracleEntry>, Vec<Context>)> {
    let datasets = sorted_unique(datasets);
    let sizes = sorted_unique(sizes);
    let has = |c: &Context, s: Split| !rows.cell(c, s).is_empty();
    let mut out = Vec::new();
    for held in &datasets {
        let mut training = Vec::new();
        for d in &datasets {
            if d == held {
                continue;
            }
            for &m in &sizes {
                let c = Context::new(d.as_str(), m);
                if has(&c, split) {
                    training.push(c);
                }
            }
        }
        let ranking = rank_rows(rows, &training, split, threshold);
        let mine: Vec<Context> = sizes
            .iter()
            .map(|&m| Context::new(held.as_str(), m))
            .filter(|c| has(c, Split::Validation) || has(c, Split::Test))
            .collect();
        out.push((held.clone(), ranking, mine));
    }
    out
}

pub fn loo(table: &ScoreTable, datasets: &[String], sizes: &[u64], split: Split, threshold: f64) -> Vec<OracleLoo> {
    let rows = Rows::new(table);
    held_out_runs(&rows, datasets, sizes, split, threshold)
        .into_iter()
        .map(|(held, ranking, contexts)| {
            let recommended = ranking[0].config.clone();
            let cells = contexts
                .iter()
                .map(|c| {
                    let s = rows.score(c, Split::Test, &recommended).expect("test record");
                    (c.train_size, s, s / test_max(&rows, c))
                })
                .collect();
            OracleLoo {
                held_out: held,
                recommended,
                cells,
            }
        })
        .collect()
}

/// Budget curve by enumerating, for every k, the whole top-k prefix.
pub fn budget(
    table: &ScoreTable,
    datasets: &[String],
    sizes: &[u64],
    split: Split,
    threshold: f64,
    max_budget: usize,
) -> (Vec<f64>, Vec<OracleBudgetCell>) {
    let rows = Rows::new(table);
    let mut cells = Vec::new();
    for (_, ranking, contexts) in held_out_runs(&rows, datasets, sizes, split, threshold) {
        for c in &contexts {
            for k in 1..=max_budget {
                let prefix = &ranking[..k.min(ranking.len())];
                let mut best: Option<(Config, f64)> = None;
                for entry in prefix {
                    if let Some(v) = rows.score(c, Split::Validation, &entry.config) {
                        let better = match &best {
                            None => true,
                            Some((_, b)) => v > *b,
                        };
                        if better {
                            best = Some((entry.config.clone(), v));
                        }
                    }
                }
                let (config, validation) = best.expect("some candidate has a validation record");
                let test = rows.score(c, Split::Test, &config).expect("test record");
                cells.push(OracleBudgetCell {
                    context: c.clone(),
                    k,
                    best: config,
                    validation,
                    normalized: test / test_max(&rows, c),
                });
            }
        }
    }
    let means = (1..=max_budget)
        .map(|k| {
            let picked: Vec<f64> = cells.iter().filter(|x| x.k == k).map(|x| x.normalized).collect();
            picked.iter().sum::<f64>() / picked.len() as f64
        })
        .collect();
    (means, cells)
}

/// SplitMix64, written out.
pub struct SplitMix {
    state: u64,
}

impl SplitMix {
    pub fn new(seed: u64) -> Self {
        SplitMix { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
}

fn js_distance(p: &[f64], q: &[f64]) -> f64 {
    let mut d = 0.0;
    for i in 0..p.len() {
        let m = 0.5 * (p[i] + q[i]);
        let a = if p[i] > 0.0 { 0.5 * p[i] * (p[i] / m).log2() } else { 0.0 };
        let b = if q[i] > 0.0 { 0.5 * q[i] * (q[i] / m).log2() } else { 0.0 };
        d += a + b;
    }
    d.clamp(0.0, 1.0).sqrt()
}

pub fn js_score(vectors: &[Vec<f64>]) -> f64 {
    let mut ds = Vec::new();
    for i in 0..vectors.len() {
        for j in i + 1..vectors.len() {
            ds.push(js_distance(&vectors[i], &vectors[j]));
        }
    }
    ds.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let mut total = 0.0;
    for d in &ds {
        total += d;
    }
    1.0 - total / ds.len() as f64
}

fn frequencies(members: &[Config], hp: usize, len: usize) -> Vec<f64> {
    let mut p = vec![0.0; len];
    for m in members {
        p[m[hp] as usize] += 1.0;
    }
    p.iter().map(|x| x / members.len() as f64).collect()
}

/// Observed score and permutation p-value for one training size.
#[allow(clippy::too_many_arguments)]
pub fn permutation_pval(
    table: &ScoreTable,
    datasets: &[String],
    train_size: u64,
    split: Split,
    threshold: f64,
    hp: usize,
    permutations: usize,
    seed: u64,
) -> (f64, f64) {
    let rows = Rows::new(table);
    let len = table.space().hyperparameters()[hp].domain().len();
    let mut units: Vec<Vec<Config>> = Vec::new();
    for d in sorted_unique(datasets) {
        let c = Context::new(d.as_str(), train_size);
        if rows.cell(&c, split).is_empty() {
            continue;
        }
        let mut members: Vec<Config> = rows.top(&c, split, threshold).into_iter().map(|(m, _)| m).collect();
        members.sort();
        units.push(members);
    }
    let score_of = |sets: &[Vec<Config>]| js_score(&sets.iter().map(|s| frequencies(s, hp, len)).collect::<Vec<_>>());
    let observed = score_of(&units);

    let pool: Vec<Config> = units.concat();
    let mut master = SplitMix::new(seed);
    let mut exceed = 0;
    for _ in 0..permutations {
        let mut rng = SplitMix::new(master.next_u64());
        let mut deck = pool.clone();
        let mut j = deck.len();
        while j > 1 {
            j -= 1;
            let k = ((rng.next_u64() as u128 * (j as u128 + 1)) >> 64) as usize;
            deck.swap(j, k);
        }
        let mut dealt = Vec::new();
        let mut at = 0;
        for u in &units {
            dealt.push(deck[at..at + u.len()].to_vec());
            at += u.len();
        }
        if score_of(&dealt) > observed {
            exceed += 1;
        }
    }
    (observed, exceed as f64 / permutations as f64)
}

/// A random full-grid table over both splits.
#[derive(Debug, Clone)]
pub struct Instance {
    pub table: ScoreTable,
    pub datasets: Vec<String>,
    pub sizes: Vec<u64>,
}

impl Instance {
    pub fn contexts(&self) -> Vec<Context> {
        let mut out = Vec::new();
        for d in &self.datasets {
            for &m in &self.sizes {
                out.push(Context::new(d.as_str(), m));
            }
        }
        out
    }
}

/// Up to 4 hyperparameters of up to 3 values, `min_datasets..=3` datasets
/// and 1 or 2 training sizes. Scores are uniform on `(0, 1]`; odd seeds draw
/// from five levels instead so that ties are common.
pub fn random_instance(seed: u64, min_datasets: usize) -> Instance {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let hps: Vec<Hyperparameter> = (0..rng.random_range(1..=4))
        .map(|i| {
            let values: Vec<String> = (0..rng.random_range(1..=3)).map(|v| format!("{v}")).collect();
            Hyperparameter::new(format!("p{i}"), Kind::Integer, &values).expect("valid")
        })
        .collect();
    let space = ConfigSpace::new("random", hps).expect("valid");
    let datasets: Vec<String> = (0..rng.random_range(min_datasets..=3)).map(|d| format!("d{d}")).collect();
    let sizes: Vec<u64> = if rng.random_bool(0.5) { vec![100] } else { vec![100, 1000] };
    let quantized = seed % 2 == 1;
    let mut table = ScoreTable::new(space.clone());
    for d in &datasets {
        for &m in &sizes {
            for config in space.grid().expect("small grid") {
                for split in [Split::Validation, Split::Test] {
                    let u: f64 = rng.random();
                    let score = if quantized { (1.0 + (u * 5.0).floor()) / 5.0 } else { 1.0 - u };
                    table
                        .insert(ScoreRecord {
                            context: Context::new(d.as_str(), m),
                            split,
                            config: config.clone(),
                            score,
                        })
                        .expect("valid record");
                }
            }
        }
    }
    Instance { table, datasets, sizes }
}

/// Space used by [`malformed_score_files`].
pub const FIXTURE_SPACE: &str = r#"{"label":"fixture","hyperparameters":[
  {"name":"lr","kind":"real","domain":["5e-05","1e-04"]},
  {"name":"sched","kind":"categorical","domain":["linear","cosine"]}]}"#;

/// A score file that must be rejected, with the row the diagnostic has to
/// name and a fragment of the message.
#[derive(Debug, Clone)]
pub struct MalformedCase {
    pub class: &'static str,
    pub document: String,
    pub row: u64,
    pub fragment: &'static str,
}

/// One case per class of malformed score file.
pub fn malformed_score_files() -> Vec<MalformedCase> {
    const HEADER: &str = "dataset,train_size,split,score,lr,sched\n";
    const GOOD: &str = "trec,100,test,0.5,5e-05,linear\n";
    let body = |bad: &str| format!("# scores\n{HEADER}{GOOD}{bad}\n");
    let case = |class, document, row, fragment| MalformedCase {
        class,
        document,
        row,
        fragment,
    };
    vec![
        case("missing header", "# only a comment\n".to_string(), 1, "missing header row"),
        case(
            "misnamed fixed column",
            format!("dataset,size,split,score,lr,sched\n{GOOD}"),
            1,
            "expected column 'train_size'",
        ),
        case(
            "unknown hyperparameter column",
            format!("dataset,train_size,split,score,lr,sched,wd\n{GOOD}"),
            1,
            "unknown hyperparameter column 'wd'",
        ),
        case(
            "duplicate column",
            format!("dataset,train_size,split,score,lr,lr,sched\n{GOOD}"),
            1,
            "duplicate column 'lr'",
        ),
        case(
            "missing hyperparameter column",
            format!("dataset,train_size,split,score,lr\n{GOOD}"),
            1,
            "missing column for hyperparameter 'sched'",
        ),
        case("wrong field count", body("trec,100,test,0.5,5e-05"), 4, "expected 6 fields, found 5"),
        case("empty dataset", body(",100,test,0.5,5e-05,linear"), 4, "empty dataset"),
        case("invalid train size", body("trec,-3,test,0.5,5e-05,linear"), 4, "invalid train_size"),
        case("unknown split", body("trec,100,dev,0.5,5e-05,linear"), 4, "unknown split 'dev'"),
        case("unparsable score", body("trec,100,test,high,5e-05,linear"), 4, "invalid score 'high'"),
        case("non-finite score", body("trec,100,test,NaN,5e-05,linear"), 4, "non-finite score"),
        case("negative score", body("trec,100,test,-0.2,5e-05,linear"), 4, "negative score"),
        case("value outside domain", body("trec,100,test,0.5,0.1,linear"), 4, "value not in domain"),
        case(
            "conflicting duplicate row",
            body("trec,100,test,0.7,5e-5,linear"),
            4,
            "duplicate row conflicts with row 3",
        ),
    ]
}

/// A valid space file and score file in deliberately untidy spelling.
#[derive(Debug, Clone)]
pub struct FuzzFiles {
    pub space: String,
    pub scores: String,
}

fn quote(field: &str) -> String {
    if field.contains([',', '"', '\n']) || field.starts_with('#') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// Random valid inputs: mixed kinds, alternative spellings of the same
/// value, shuffled columns, comments, identical duplicate rows and awkward
/// dataset names.
pub fn fuzz_files(seed: u64) -> FuzzFiles {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    const WORDS: [&str; 8] = ["linear", "cosine", "a,b", "say \"hi\"", "ünï", "x y", "#tag", "constant"];
    const NAMES: [&str; 7] = ["Banking77", "TL;DR", "CNN-DM", "DoQA, cooking", "#hash", "ds \"q\"", "Xsum"];

    // Each value: (spellings accepted for it).
    let mut hps: Vec<(String, &str, Vec<Vec<String>>)> = Vec::new();
    for i in 0..rng.random_range(1..=4) {
        let size = rng.random_range(1..=3usize);
        let (kind, values): (&str, Vec<Vec<String>>) = match rng.random_range(0..3) {
            0 => {
                let mut picks: Vec<(u32, u32)> = Vec::new();
                while picks.len() < size {
                    let p = (rng.random_range(1..=9), rng.random_range(1..=7));
                    if !picks.contains(&p) {
                        picks.push(p);
                    }
                }
                let spell = |(m, e): (u32, u32)| {
                    vec![
                        format!("{m}e-{e:02}"),
                        format!("{m}.0e-{e}"),
                        format!("0.{}{m}", "0".repeat(e as usize - 1)),
                    ]
                };
                ("real", picks.into_iter().map(spell).collect())
            }
            1 => {
                let mut picks: Vec<u32> = Vec::new();
                while picks.len() < size {
                    let n = rng.random_range(1..=512);
                    if !picks.contains(&n) {
                        picks.push(n);
                    }
                }
                ("integer", picks.into_iter().map(|n| vec![n.to_string(), format!("0{n}")]).collect())
            }
            _ => {
                let mut picks: Vec<&str> = Vec::new();
                while picks.len() < size {
                    let w = WORDS[rng.random_range(0..WORDS.len())];
                    if !picks.contains(&w) {
                        picks.push(w);
                    }
                }
                ("categorical", picks.into_iter().map(|w| vec![w.to_string()]).collect())
            }
        };
        hps.push((format!("hp{i}"), kind, values));
    }

    let space_doc = serde_json::json!({
        "label": format!("fuzz {seed}"),
        "hyperparameters": hps.iter().map(|(name, kind, values)| serde_json::json!({
            "name": name,
            "kind": kind,
            "domain": values.iter().map(|v| v[0].clone()).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    });
    let space = serde_json::to_string_pretty(&space_doc).expect("json");

    let mut order: Vec<usize> = (0..hps.len()).collect();
    for j in (1..order.len()).rev() {
        order.swap(j, rng.random_range(0..=j));
    }
    let mut lines = vec![format!("# fuzz seed {seed}")];
    let mut header = vec!["dataset".to_string(), "train_size".into(), "split".into(), "score".into()];
    header.extend(order.iter().map(|&i| hps[i].0.clone()));
    lines.push(header.join(" , "));

    let grid_size: usize = hps.iter().map(|h| h.2.len()).product();
    let mut datasets: Vec<&str> = (0..rng.random_range(1..=3)).map(|_| NAMES[rng.random_range(0..NAMES.len())]).collect();
    datasets.sort();
    datasets.dedup();
    for d in datasets {
        for size in [100u64, 1000] {
            for split in ["validation", "test"] {
                for g in 0..grid_size {
                    if rng.random_bool(0.2) {
                        continue;
                    }
                    let score = match rng.random_range(0..4) {
                        0 => format!("{}", rng.random_range(0..=100)),
                        1 => format!("{}", rng.random::<f64>() * 100.0),
                        2 => format!("{:e}", rng.random::<f64>()),
                        _ => "1e-300".to_string(),
                    };
                    let mut rest = g;
                    let mut picked = vec![String::new(); hps.len()];
                    for (i, (_, _, values)) in hps.iter().enumerate().rev() {
                        let spellings = &values[rest % values.len()];
                        rest /= values.len();
                        picked[i] = spellings[rng.random_range(0..spellings.len())].clone();
                    }
                    let mut fields = vec![quote(d), size.to_string(), split.to_string(), score];
                    fields.extend(order.iter().map(|&i| quote(&picked[i])));
                    let line = fields.join(",");
                    if rng.random_bool(0.05) {
                        lines.push(line.clone());
                    }
                    if rng.random_bool(0.05) {
                        lines.push("# interleaved comment".into());
                    }
                    lines.push(line);
                }
            }
        }
    }
    let mut scores = lines.join("\n");
    scores.push('\n');
    FuzzFiles { space, scores }
}
