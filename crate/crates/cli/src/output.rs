use std::path::Path;

use anyhow::{Context, Result};
use dsine_core::report::SCHEMA_VERSION;
use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Serialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Assertion {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, detail: detail.into() }
    }
}

/// What a subcommand produced.
#[derive(Debug, Default)]
pub struct Outcome {
    pub result: Value,
    pub assertions: Vec<Assertion>,
    /// File name and contents of each CSV detail table.
    pub csv: Vec<(String, Vec<u8>)>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    pub fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.assertions.push(Assertion::new(name, passed, detail));
    }

    pub fn add_csv(&mut self, name: &str, write: impl FnOnce(&mut Vec<u8>) -> dsine_core::Result<()>) -> Result<()> {
        let mut buf = Vec::new();
        write(&mut buf)?;
        self.csv.push((name.to_string(), buf));
        Ok(())
    }

    /// A CSV table with one line per serialised row.
    pub fn add_rows<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r)?;
        }
        self.csv.push((name.to_string(), w.into_inner().map_err(|e| e.into_error())?));
        Ok(())
    }
}

#[derive(Serialize)]
struct Envelope<'a> {
    schema_version: u32,
    command: &'a str,
    config: &'a Value,
    result: &'a Value,
    assertions: &'a [Assertion],
    passed: bool,
}

pub fn render(command: &str, config: &Value, out: &Outcome) -> String {
    let env = Envelope {
        schema_version: SCHEMA_VERSION,
        command,
        config,
        result: &out.result,
        assertions: &out.assertions,
        passed: out.passed(),
    };
    let mut s = serde_json::to_string_pretty(&env).expect("report serialises");
    s.push('\n');
    s
}

/// Writes `<command>.json` and `<command>_<table>.csv` into `dir`.
pub fn write_files(dir: &Path, command: &str, json: &str, out: &Outcome) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(format!("{command}.json"));
    std::fs::write(&path, json).with_context(|| format!("writing {}", path.display()))?;
    for (name, bytes) in &out.csv {
        let path = dir.join(format!("{command}_{name}.csv"));
        std::fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}
