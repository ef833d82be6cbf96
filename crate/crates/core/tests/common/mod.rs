#![allow(dead_code)]

use std::path::{Path, PathBuf};

use serde::Deserialize;
use witness_contracts::csrc::{parse_program, Program};
use witness_contracts::validate::{InputStrategy, ValidateOptions};
use witness_contracts::witness::{parse_named, ParseOptions, WitnessSet};

#[derive(Debug, Clone, Deserialize)]
pub struct Case {
    pub name: String,
    pub witness: String,
    pub program: String,
    pub verdict: Option<String>,
    pub entry_index: Option<usize>,
    pub clause: Option<String>,
    pub input_vector: Option<Vec<i32>>,
    pub rule: Option<String>,
    pub fires: Option<bool>,
    pub residue: Option<Vec<String>>,
    pub lowered_entries: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct Manifest {
    pub v20: Vec<Case>,
    pub contracts: Vec<Case>,
    pub lint: Vec<Case>,
    pub lowering: Vec<Case>,
    pub empty: Vec<Case>,
}

impl Manifest {
    /// Every witness/program pair that is expected to lint clean.
    pub fn clean(&self) -> impl Iterator<Item = &Case> {
        self.v20
            .iter()
            .chain(&self.contracts)
            .chain(&self.lowering)
            .chain(&self.empty)
    }
}

pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/corpus")
}

pub fn manifest() -> Manifest {
    let text = std::fs::read_to_string(corpus_dir().join("manifest.json")).expect("manifest");
    serde_json::from_str(&text).expect("manifest parses")
}

pub fn read(rel: &str) -> String {
    std::fs::read_to_string(corpus_dir().join(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

pub fn program(rel: &str) -> Program {
    let name = Path::new(rel).file_name().unwrap().to_string_lossy().into_owned();
    parse_program(&read(rel))
        .unwrap_or_else(|d| panic!("{rel}: {d:?}"))
        .with_file_name(name)
}

pub fn witness(rel: &str) -> WitnessSet {
    parse_named(&read(rel), rel, ParseOptions::default())
        .unwrap_or_else(|d| panic!("{rel}: {d:?}"))
        .witness
}

pub fn load(case: &Case) -> (WitnessSet, Program) {
    (witness(&case.witness), program(&case.program))
}

pub fn exhaustive() -> ValidateOptions {
    ValidateOptions {
        strategy: InputStrategy::Exhaustive {
            lo: -8,
            hi: 7,
            max_calls: 4,
        },
        ..ValidateOptions::default()
    }
}
