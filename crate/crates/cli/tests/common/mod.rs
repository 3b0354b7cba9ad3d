#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn cbs(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("cbs").chain(args.iter().copied());
    let code = cbs_cli::run(argv, &mut out, &mut err);
    Run {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

/// Output without the manifest comment lines.
pub fn body(text: &str) -> String {
    text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect()
}

/// Cells of a text table; columns are separated by two or more spaces.
pub fn cells(line: &str) -> Vec<String> {
    line.split("  ").map(str::trim).filter(|c| !c.is_empty()).map(String::from).collect()
}

pub fn golden_rows() -> Vec<Vec<String>> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/recommend_all.tsv");
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split('\t').map(String::from).collect())
        .collect()
}

pub fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

pub const TOY_SPACE: &str = r#"{"label":"toy","hyperparameters":[{"name":"c","kind":"categorical","domain":["x","y","z"]}]}"#;

/// Three contexts: A has x=1.0 and y=0.98, B has x alone on top, C has z.
pub const TOY_SCORES: &str = "\
dataset,train_size,split,score,c
A,100,test,1.0,x
A,100,test,0.98,y
A,100,test,0.5,z
B,100,test,1.0,x
B,100,test,0.5,y
B,100,test,0.5,z
C,100,test,0.5,x
C,100,test,0.5,y
C,100,test,1.0,z
";
