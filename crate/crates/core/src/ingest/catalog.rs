//! Built-in catalog: the published search spaces, Default baselines and
//! ranked recommendations for each (model, tuning method).

use std::fmt;
use std::sync::OnceLock;

use serde::Serialize;

use crate::model::{ConfigSpace, Configuration, Hyperparameter, Kind};

const CATALOG: &str = include_str!("../../data/catalog.tsv");

const HEADER: [&str; 2] = [
    "# Published search spaces and recommended configurations. Tab separated; '|' separates domain values; '--' marks a hyperparameter the method does not tune.",
    "# kind\tmodel\tmethod\tsource\trank\tbatch\tlr\tepochs\tlr_scheduler\tlora_r\tlora_alpha",
];

/// Hyperparameter columns of the catalog, in search-space order.
pub const CATALOG_COLUMNS: [(&str, Kind); 6] = [
    ("batch", Kind::Integer),
    ("lr", Kind::Real),
    ("epochs", Kind::Integer),
    ("lr_scheduler", Kind::Categorical),
    ("lora_r", Kind::Integer),
    ("lora_alpha", Kind::Integer),
];

const NOT_TUNED: &str = "--";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    FullFt,
    Lora,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::FullFt => "full_ft",
            Method::Lora => "lora",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "full_ft" => Some(Method::FullFt),
            "lora" => Some(Method::Lora),
            _ => None,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    CbsRecommendation,
    DefaultBaseline,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::CbsRecommendation => "cbs_recommendation",
            Source::DefaultBaseline => "default_baseline",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceSource {
    CbsSearch,
    Default,
}

impl SpaceSource {
    pub fn as_str(self) -> &'static str {
        match self {
            SpaceSource::CbsSearch => "cbs_search",
            SpaceSource::Default => "default",
        }
    }
}

#[derive(Debug, Clone)]
pub struct CatalogSpace {
    pub model: String,
    pub method: Method,
    pub source: SpaceSource,
    pub space: ConfigSpace,
    /// Domain cells exactly as printed, one per catalog column.
    pub printed: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub model: String,
    pub method: Method,
    pub rank: u32,
    pub source: Source,
    /// Validated against the matching space: the search space for
    /// recommendations, the single-point Default space for baselines.
    pub config: Configuration,
    /// `(hyperparameter, value as printed)` for the tuned hyperparameters.
    pub printed: Vec<(String, String)>,
}

impl CatalogEntry {
    pub fn printed_value(&self, hp: &str) -> Option<&str> {
        self.printed.iter().find(|(n, _)| n == hp).map(|(_, v)| v.as_str())
    }

    pub fn space(&self) -> &'static ConfigSpace {
        let want = match self.source {
            Source::CbsRecommendation => SpaceSource::CbsSearch,
            Source::DefaultBaseline => SpaceSource::Default,
        };
        &builtin_spaces()
            .iter()
            .find(|s| s.model == self.model && s.method == self.method && s.source == want)
            .expect("every catalog entry has a space")
            .space
    }
}

struct Catalog {
    spaces: Vec<CatalogSpace>,
    entries: Vec<CatalogEntry>,
}

fn catalog() -> &'static Catalog {
    static CELL: OnceLock<Catalog> = OnceLock::new();
    CELL.get_or_init(|| parse_catalog(CATALOG))
}

/// The 8 published spaces (4 searched, 4 Default) in document order.
pub fn builtin_spaces() -> &'static [CatalogSpace] {
    &catalog().spaces
}

/// The 16 ranked recommendations followed by the 4 Default baselines.
pub fn builtin_catalog() -> &'static [CatalogEntry] {
    &catalog().entries
}

/// The shipped catalog resource, verbatim.
pub fn catalog_document() -> &'static str {
    CATALOG
}

// The resource is compiled in, so malformed content is a build defect and panics.
fn parse_catalog(text: &str) -> Catalog {
    let mut spaces = Vec::new();
    let mut entries = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.starts_with('#') {
            continue;
        }
        let cells: Vec<&str> = line.split('\t').collect();
        assert_eq!(cells.len(), 5 + CATALOG_COLUMNS.len(), "catalog line {}", n + 1);
        let model = cells[1].to_string();
        let method = Method::parse(cells[2]).unwrap_or_else(|| panic!("catalog line {}: method", n + 1));
        let hp_cells = &cells[5..];
        match cells[0] {
            "space" => {
                let source = match cells[3] {
                    "cbs_search" => SpaceSource::CbsSearch,
                    "default" => SpaceSource::Default,
                    other => panic!("catalog line {}: space source {other}", n + 1),
                };
                let hps = CATALOG_COLUMNS
                    .iter()
                    .zip(hp_cells)
                    .filter(|(_, cell)| **cell != NOT_TUNED)
                    .map(|((name, kind), cell)| {
                        let domain: Vec<&str> = cell.split('|').collect();
                        Hyperparameter::new(*name, *kind, &domain).expect("catalog domain")
                    })
                    .collect();
                let label = format!("{model} / {method} / {}", source.as_str());
                spaces.push(CatalogSpace {
                    space: ConfigSpace::new(label, hps).expect("catalog space"),
                    model,
                    method,
                    source,
                    printed: hp_cells.iter().map(|s| s.to_string()).collect(),
                });
            }
            "entry" => {
                let (source, space_source) = match cells[3] {
                    "cbs_recommendation" => (Source::CbsRecommendation, SpaceSource::CbsSearch),
                    "default_baseline" => (Source::DefaultBaseline, SpaceSource::Default),
                    other => panic!("catalog line {}: entry source {other}", n + 1),
                };
                let space = &spaces
                    .iter()
                    .find(|s: &&CatalogSpace| s.model == model && s.method == method && s.source == space_source)
                    .unwrap_or_else(|| panic!("catalog line {}: entry precedes its space", n + 1))
                    .space;
                let printed: Vec<(String, String)> = CATALOG_COLUMNS
                    .iter()
                    .zip(hp_cells)
                    .filter(|(_, cell)| **cell != NOT_TUNED)
                    .map(|((name, _), cell)| (name.to_string(), cell.to_string()))
                    .collect();
                let config = space
                    .config_from_assignments(&printed)
                    .unwrap_or_else(|e| panic!("catalog line {}: {e}", n + 1));
                entries.push(CatalogEntry {
                    model,
                    method,
                    rank: cells[4].parse().expect("catalog rank"),
                    source,
                    config,
                    printed,
                });
            }
            other => panic!("catalog line {}: unknown kind {other}", n + 1),
        }
    }
    Catalog { spaces, entries }
}

/// Renders spaces and entries in the shipped resource layout.
pub fn serialize_catalog(spaces: &[CatalogSpace], entries: &[CatalogEntry]) -> String {
    let mut out = String::new();
    for h in HEADER {
        out.push_str(h);
        out.push('\n');
    }
    for s in spaces {
        let row = [
            "space",
            &s.model,
            s.method.as_str(),
            s.source.as_str(),
            "-",
        ]
        .into_iter()
        .chain(s.printed.iter().map(String::as_str))
        .collect::<Vec<_>>();
        out.push_str(&row.join("\t"));
        out.push('\n');
    }
    for e in entries {
        let rank = e.rank.to_string();
        let mut row = vec!["entry", &e.model, e.method.as_str(), e.source.as_str(), &rank];
        for (name, _) in CATALOG_COLUMNS {
            row.push(e.printed_value(name).unwrap_or(NOT_TUNED));
        }
        out.push_str(&row.join("\t"));
        out.push('\n');
    }
    out
}
