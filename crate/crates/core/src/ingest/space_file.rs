//! JSON space files:
//!
//! ```json
//! {
//!   "label": "Llama-3-8B / lora",
//!   "hyperparameters": [
//!     { "name": "lr", "kind": "real", "domain": ["5e-05", "1e-04"] }
//!   ]
//! }
//! ```
//!
//! Domain entries may be JSON strings or numbers. Serialization always writes
//! canonical strings.

use std::collections::HashSet;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::model::{ConfigSpace, Hyperparameter, Kind};

pub fn parse_space(document: &str) -> Result<ConfigSpace> {
    let root: Value = serde_json::from_str(document)
        .map_err(|e| Error::parse(format!("line {} column {}", e.line(), e.column()), format!("malformed JSON: {e}")))?;
    let obj = as_object(&root, "$")?;
    reject_unknown(obj, "$", &["label", "hyperparameters"])?;
    let label = match obj.get("label") {
        None => String::new(),
        Some(Value::String(s)) => s.clone(),
        Some(_) => return Err(Error::parse("label", "expected a string")),
    };
    let hps = match obj.get("hyperparameters") {
        Some(Value::Array(a)) => a,
        Some(_) => return Err(Error::parse("hyperparameters", "expected an array")),
        None => return Err(Error::parse("$", "missing field 'hyperparameters'")),
    };
    if hps.is_empty() {
        return Err(Error::parse("hyperparameters", "no hyperparameters"));
    }
    let mut names = HashSet::new();
    let mut parsed = Vec::with_capacity(hps.len());
    for (i, hp) in hps.iter().enumerate() {
        let path = format!("hyperparameters[{i}]");
        let obj = as_object(hp, &path)?;
        reject_unknown(obj, &path, &["name", "kind", "domain"])?;
        let name = match obj.get("name") {
            Some(Value::String(s)) if !s.is_empty() => s.clone(),
            Some(Value::String(_)) => return Err(Error::parse(format!("{path}.name"), "empty name")),
            Some(_) => return Err(Error::parse(format!("{path}.name"), "expected a string")),
            None => return Err(Error::parse(&path, "missing field 'name'")),
        };
        if !names.insert(name.clone()) {
            return Err(Error::parse(format!("{path}.name"), format!("duplicate hyperparameter name '{name}'")));
        }
        let kind = match obj.get("kind") {
            Some(Value::String(s)) => match s.as_str() {
                "real" => Kind::Real,
                "integer" => Kind::Integer,
                "categorical" => Kind::Categorical,
                other => return Err(Error::parse(format!("{path}.kind"), format!("unknown kind '{other}'"))),
            },
            Some(_) => return Err(Error::parse(format!("{path}.kind"), "expected a string")),
            None => return Err(Error::parse(&path, "missing field 'kind'")),
        };
        let domain = match obj.get("domain") {
            Some(Value::Array(a)) => a,
            Some(_) => return Err(Error::parse(format!("{path}.domain"), "expected an array")),
            None => return Err(Error::parse(&path, "missing field 'domain'")),
        };
        if domain.is_empty() {
            return Err(Error::parse(format!("{path}.domain"), "empty domain"));
        }
        let mut raw = Vec::with_capacity(domain.len());
        for (j, v) in domain.iter().enumerate() {
            match v {
                Value::String(s) => raw.push(s.clone()),
                Value::Number(n) if kind != Kind::Categorical => raw.push(n.to_string()),
                _ => {
                    return Err(Error::parse(
                        format!("{path}.domain[{j}]"),
                        format!("expected a {kind} value, found {v}"),
                    ))
                }
            }
        }
        let hp = Hyperparameter::new(name, kind, &raw).map_err(|e| match e {
            Error::InvalidSpace(msg) => Error::parse(format!("{path}.domain"), msg),
            other => other,
        })?;
        parsed.push(hp);
    }
    ConfigSpace::new(label, parsed).map_err(|e| Error::parse("hyperparameters", e.to_string()))
}

#[derive(Serialize)]
struct SpaceDoc<'a> {
    label: &'a str,
    hyperparameters: Vec<HpDoc<'a>>,
}

#[derive(Serialize)]
struct HpDoc<'a> {
    name: &'a str,
    kind: Kind,
    domain: &'a [String],
}

/// Pretty JSON with canonical domain strings and a trailing newline.
pub fn serialize_space(space: &ConfigSpace) -> String {
    let doc = SpaceDoc {
        label: space.label(),
        hyperparameters: space
            .hyperparameters()
            .iter()
            .map(|hp| HpDoc {
                name: hp.name(),
                kind: hp.kind(),
                domain: hp.domain(),
            })
            .collect(),
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("space documents always serialize");
    out.push('\n');
    out
}

fn as_object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| Error::parse(path, "expected an object"))
}

fn reject_unknown(obj: &Map<String, Value>, path: &str, known: &[&str]) -> Result<()> {
    match obj.keys().find(|k| !known.contains(&k.as_str())) {
        Some(k) => Err(Error::parse(path, format!("unknown field '{k}'"))),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn err(doc: &str) -> String {
        parse_space(doc).unwrap_err().to_string()
    }

    #[test]
    fn parses_numbers_and_strings() {
        let space = parse_space(
            r#"{"label":"toy","hyperparameters":[
                {"name":"lr","kind":"real","domain":[5e-05,"1e-04"]},
                {"name":"epochs","kind":"integer","domain":[5,10]}]}"#,
        )
        .unwrap();
        assert_eq!(space.hyperparameters().len(), 2);
        assert_eq!(space.grid_size(), 4);
        assert_eq!(space.hyperparameters()[0].domain(), ["5.0e-5", "1.0e-4"]);
    }

    #[test]
    fn round_trips_bytes() {
        let space = parse_space(
            r#"{"label":"x","hyperparameters":[{"name":"s","kind":"categorical","domain":["cosine","linear"]}]}"#,
        )
        .unwrap();
        let text = serialize_space(&space);
        let again = parse_space(&text).unwrap();
        assert_eq!(again, space);
        assert_eq!(serialize_space(&again), text);
    }

    #[test]
    fn diagnostics_carry_field_paths() {
        assert_eq!(
            err(r#"{"hyperparameters":[{"name":"a","kind":"real","domain":[]}]}"#),
            "empty domain at hyperparameters[0].domain"
        );
        assert_eq!(
            err(r#"{"hyperparameters":[{"name":"a","kind":"real","domain":[1]},{"name":"a","kind":"real","domain":[1]}]}"#),
            "duplicate hyperparameter name 'a' at hyperparameters[1].name"
        );
        assert_eq!(
            err(r#"{"hyperparameters":[{"name":"a","kind":"float","domain":[1]}]}"#),
            "unknown kind 'float' at hyperparameters[0].kind"
        );
        assert!(err(r#"{"hyperparameters":[{"name":"a","kind":"real","domain":[1,"1.0"]}]}"#)
            .contains("duplicate domain value"));
        assert!(err(r#"{"hyperparameters":[{"name":"a","kind":"integer","domain":["x"]}]}"#)
            .ends_with("at hyperparameters[0].domain"));
        assert!(err(r#"{"hyperparameters":[{"name":"a","kind":"categorical","domain":[3]}]}"#)
            .ends_with("at hyperparameters[0].domain[0]"));
        assert!(err(r#"{"hyperparameters":[]}"#).contains("no hyperparameters"));
        assert!(err(r#"{"hyperparameters":[], "extra": 1}"#).contains("unknown field 'extra'"));
        assert!(err("{").starts_with("malformed JSON"));
    }
}
