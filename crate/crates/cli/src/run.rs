use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Map, Value};

/// Failure classes, each with its own exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Budget(String),
    Invariant(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Budget(_) => 3,
            CliError::Invariant(_) => 4,
            CliError::Io(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Budget(_) => "budget_exceeded",
            CliError::Invariant(_) => "invariant_violation",
            CliError::Io(_) => "io",
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Budget(m) | CliError::Invariant(m) | CliError::Io(m) => m,
        }
    }

    pub fn report(&self) -> Value {
        json!({ "error": self.kind(), "message": self.message(), "exit_code": self.exit_code() })
    }
}

impl From<qdiff_core::Error> for CliError {
    fn from(e: qdiff_core::Error) -> Self {
        use qdiff_core::Error as E;
        match e {
            E::VarianceCap { .. } | E::Convergence(_) => CliError::Budget(e.to_string()),
            E::Invariant(_) => CliError::Invariant(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default)]
pub struct Common {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub config: Option<PathBuf>,
    pub samples: Option<u64>,
    pub budget_seconds: Option<f64>,
}

/// Parameter resolution for one subcommand: defaults, then the config file,
/// then explicit flags. Every layer is kept for the manifest.
pub struct Resolved<P> {
    pub params: P,
    pub config_file: Value,
    pub overrides: Value,
    pub effective: Value,
}

fn strip_nulls(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m.into_iter().filter(|(_, v)| !v.is_null()).collect(),
        _ => Map::new(),
    }
}

/// `samples_key` names the parameter that `--samples` sets, if any.
pub fn resolve<P, A>(common: &Common, args: &A, samples_key: Option<&str>) -> CliResult<Resolved<P>>
where
    P: Default + Serialize + DeserializeOwned,
    A: Serialize,
{
    let defaults = match serde_json::to_value(P::default())? {
        Value::Object(m) => m,
        _ => unreachable!("parameter sets serialize to objects"),
    };
    let config_file = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
            let v: Value = serde_json::from_str(&text)
                .map_err(|e| CliError::Usage(format!("malformed config {}: {e}", path.display())))?;
            if !v.is_object() {
                return Err(CliError::Usage(format!("config {} must hold a JSON object", path.display())));
            }
            v
        }
        None => Value::Object(Map::new()),
    };
    let mut overrides = strip_nulls(serde_json::to_value(args)?);
    if let Some(seed) = common.seed {
        overrides.insert("seed".into(), json!(seed));
    }
    if let Some(n) = common.samples {
        match samples_key {
            Some(k) => {
                overrides.insert(k.into(), json!(n));
            }
            None => return Err(CliError::Usage("this subcommand takes no --samples".into())),
        }
    }
    let mut merged = defaults.clone();
    for (k, v) in config_file.as_object().unwrap().iter().chain(overrides.iter()) {
        if !defaults.contains_key(k) {
            return Err(CliError::Usage(format!("unknown parameter `{k}`")));
        }
        merged.insert(k.clone(), v.clone());
    }
    let effective = Value::Object(merged);
    let params: P =
        serde_json::from_value(effective.clone()).map_err(|e| CliError::Usage(format!("bad parameter value: {e}")))?;
    Ok(Resolved { params, config_file, overrides: Value::Object(overrides), effective })
}

/// CSV table written as `<name>.csv`.
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: vec![] }
    }

    pub fn push<I: IntoIterator<Item = String>>(&mut self, row: I) {
        self.rows.push(row.into_iter().collect());
    }
}

/// Everything a subcommand produces.
pub struct Output {
    pub result: Value,
    pub tables: Vec<Table>,
    /// Raw little-endian arrays, written as `<name>` with a `<name>.json` sidecar.
    pub arrays: Vec<(String, Vec<f64>, Value)>,
    /// Invariants that failed; any entry turns the run into exit code 4.
    pub violations: Vec<String>,
}

impl Output {
    pub fn new(result: Value) -> Self {
        Self { result, tables: vec![], arrays: vec![], violations: vec![] }
    }

    pub fn check(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.violations.push(what.into());
        }
    }
}

fn write_json(path: &Path, v: &Value) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(v)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn write_error(out: &Path, err: &CliError) {
    if out.is_dir() {
        let _ = write_json(&out.join("error.json"), &err.report());
    }
}

/// Writes the artifacts and the manifest that ties them to the parameters.
pub fn write_run<P>(out: &Path, subcommand: &str, resolved: &Resolved<P>, output: &Output) -> CliResult<()> {
    fs::create_dir_all(out)?;
    let mut artifacts = vec!["result.json".to_string()];
    let result = json!({
        "subcommand": subcommand,
        "result": output.result,
        "violations": output.violations,
    });
    write_json(&out.join("result.json"), &result)?;
    for t in &output.tables {
        let file = format!("{}.csv", t.name);
        let mut w = csv::Writer::from_path(out.join(&file))?;
        w.write_record(&t.header)?;
        for r in &t.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        artifacts.push(file);
    }
    for (name, data, meta) in &output.arrays {
        let bytes: Vec<u8> = data.iter().flat_map(|x| x.to_le_bytes()).collect();
        fs::write(out.join(name), bytes)?;
        let mut sidecar = meta.clone();
        if let Value::Object(m) = &mut sidecar {
            m.insert("dtype".into(), json!("f64-le"));
            m.insert("len".into(), json!(data.len()));
        }
        write_json(&out.join(format!("{name}.json")), &sidecar)?;
        artifacts.push(name.clone());
        artifacts.push(format!("{name}.json"));
    }
    let manifest = json!({
        "tool": "qdiff",
        "cli_version": env!("CARGO_PKG_VERSION"),
        "core_version": qdiff_core::VERSION,
        "subcommand": subcommand,
        "seed": resolved.effective.get("seed").cloned().unwrap_or(Value::Null),
        "config_file": resolved.config_file,
        "cli_overrides": resolved.overrides,
        "effective_config": resolved.effective,
        "artifacts": artifacts,
    });
    write_json(&out.join("manifest.json"), &manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Default, Serialize, serde::Deserialize)]
    struct P {
        n: usize,
        seed: u64,
    }

    #[derive(Serialize)]
    struct A {
        n: Option<usize>,
    }

    #[test]
    fn exit_codes_follow_error_class() {
        assert_eq!(CliError::from(qdiff_core::Error::Invariant("x".into())).exit_code(), 4);
        assert_eq!(CliError::from(qdiff_core::Error::VarianceCap { rel_err: 1.0, cap: 0.1 }).exit_code(), 3);
        assert_eq!(CliError::from(qdiff_core::Error::Convergence("x".into())).exit_code(), 3);
        assert_eq!(CliError::from(qdiff_core::Error::OddBlock(3)).exit_code(), 2);
    }

    #[test]
    fn flags_win_over_defaults() {
        let common = Common { seed: Some(5), samples: Some(7), ..Default::default() };
        let r: Resolved<P> = resolve(&common, &A { n: None }, Some("n")).unwrap();
        assert_eq!((r.params.n, r.params.seed), (7, 5));
        let r: Resolved<P> = resolve(&Common::default(), &A { n: Some(3) }, None).unwrap();
        assert_eq!(r.params.n, 3);
        assert_eq!(r.overrides, serde_json::json!({"n": 3}));
    }
}
