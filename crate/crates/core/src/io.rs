//! File formats and the structured report.
//!
//! All inputs are JSON documents carrying `schema_version`. Bracket records
//! use 1-based indices: `{"i": 1, "j": 2, "k": 3, "c": 1.0}` sets
//! `c_12^3 = 1` and `c_21^3 = -1`. Matrices are `dim` plus a row-major list.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::flow::FlowConfig;
use crate::lie_core::BracketTensor;
use crate::linalg::LinearMap;

pub const SCHEMA_VERSION: u32 = 1;

/// Symmetry tolerance for derivation matrices read from a scenario.
const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BracketRecord {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitSpec {
    pub dim_1: usize,
    pub dim_2: usize,
}

/// Structure constants with optional derivations, split and flow settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: u32,
    pub dim: usize,
    pub brackets: Vec<BracketRecord>,
    /// Row-major `dim x dim` symmetric matrices.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derivations: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<SplitSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flow: Option<FlowConfig>,
}

/// A validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub bracket: BracketTensor,
    pub derivations: Vec<LinearMap>,
    pub split: Option<SplitSpec>,
    pub flow: FlowConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub schema_version: u32,
    pub dim: usize,
    pub entries: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedSubalgebra {
    So,
    Sl,
    BlockSl,
}

/// Either an explicit list of row-major matrices or a named subalgebra.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisFile {
    pub schema_version: u32,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub named: Option<NamedSubalgebra>,
    /// Block sizes for `block_sl`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks: Option<Vec<usize>>,
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("{what}: {e}")))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn check_schema(version: u32, what: &str) -> Result<()> {
    if version != SCHEMA_VERSION {
        return Err(Error::Parse(format!(
            "{what}: unsupported schema_version {version} (expected {SCHEMA_VERSION})"
        )));
    }
    Ok(())
}

fn matrix_from_rows(dim: usize, entries: &[f64], field: &str) -> Result<LinearMap> {
    if entries.len() != dim * dim {
        return Err(Error::Parse(format!(
            "{field}: expected {} entries for dim {dim}, found {}",
            dim * dim,
            entries.len()
        )));
    }
    if let Some(pos) = entries.iter().position(|x| !x.is_finite()) {
        return Err(Error::Parse(format!("{field}[{pos}]: non-finite entry")));
    }
    Ok(LinearMap::from_row_slice(dim, dim, entries))
}

/// Converts 1-based records into a bracket, rejecting out-of-range indices,
/// `i = j` with nonzero `c`, and repeated slots (`(i, j, k)` and `(j, i, k)`
/// name the same slot).
pub fn bracket_from_records(dim: usize, records: &[BracketRecord]) -> Result<BracketTensor> {
    let mut seen: HashMap<(usize, usize, usize), usize> = HashMap::new();
    let mut constants = Vec::with_capacity(records.len());
    for (r, rec) in records.iter().enumerate() {
        for (name, v) in [("i", rec.i), ("j", rec.j), ("k", rec.k)] {
            if v == 0 || v > dim {
                return Err(Error::Parse(format!(
                    "brackets[{r}].{name}: index {v} out of range 1..={dim}"
                )));
            }
        }
        if !rec.c.is_finite() {
            return Err(Error::Parse(format!("brackets[{r}].c: non-finite value")));
        }
        if rec.i == rec.j {
            if rec.c != 0.0 {
                return Err(Error::Parse(format!(
                    "brackets[{r}]: c_{{{0}{0}}}^{1} must be zero by antisymmetry",
                    rec.i, rec.k
                )));
            }
            continue;
        }
        let key = (rec.i.min(rec.j), rec.i.max(rec.j), rec.k);
        if let Some(first) = seen.insert(key, r) {
            return Err(Error::Parse(format!(
                "brackets[{r}]: duplicate of brackets[{first}] (slot i={}, j={}, k={})",
                rec.i, rec.j, rec.k
            )));
        }
        let (i, j, k) = (rec.i - 1, rec.j - 1, rec.k - 1);
        // from_constants stores c_ij^k with i < j or i > j alike.
        constants.push((i, j, k, rec.c));
    }
    BracketTensor::from_constants(dim, &constants)
}

/// Nonzero independent constants as 1-based records.
pub fn records_from_bracket(mu: &BracketTensor) -> Vec<BracketRecord> {
    mu.nonzero_constants()
        .into_iter()
        .map(|(i, j, k, c)| BracketRecord {
            i: i + 1,
            j: j + 1,
            k: k + 1,
            c,
        })
        .collect()
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let file: ScenarioFile = parse_json(text, "scenario")?;
    check_schema(file.schema_version, "scenario")?;
    if file.dim == 0 {
        return Err(Error::Parse("dim: must be positive".into()));
    }
    let bracket = bracket_from_records(file.dim, &file.brackets)?;
    let mut derivations = Vec::new();
    for (a, rows) in file.derivations.iter().flatten().enumerate() {
        let field = format!("derivations[{a}]");
        let d = matrix_from_rows(file.dim, rows, &field)?;
        let asym = (&d - d.transpose()).amax();
        if asym > SYMMETRY_TOL * d.amax().max(1.0) {
            return Err(Error::Parse(format!(
                "{field}: not symmetric (max |D - D^t| = {asym:e})"
            )));
        }
        derivations.push(d);
    }
    if let Some(split) = file.split {
        if split.dim_1 + split.dim_2 != file.dim {
            return Err(Error::Parse(format!(
                "split: {} + {} != dim {}",
                split.dim_1, split.dim_2, file.dim
            )));
        }
    }
    let flow = file.flow.unwrap_or_default();
    flow.validate().map_err(|e| Error::Parse(format!("flow: {e}")))?;
    Ok(Scenario {
        bracket,
        derivations,
        split: file.split,
        flow,
    })
}

pub fn read_scenario(path: &Path) -> Result<Scenario> {
    parse_scenario(&read(path)?).map_err(|e| with_path(e, path))
}

fn with_path(e: Error, path: &Path) -> Error {
    match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    }
}

pub fn parse_matrix(text: &str) -> Result<LinearMap> {
    let file: MatrixFile = parse_json(text, "matrix")?;
    check_schema(file.schema_version, "matrix")?;
    matrix_from_rows(file.dim, &file.entries, "entries")
}

pub fn read_matrix(path: &Path) -> Result<LinearMap> {
    parse_matrix(&read(path)?).map_err(|e| with_path(e, path))
}

pub fn matrix_file(m: &LinearMap) -> MatrixFile {
    MatrixFile {
        schema_version: SCHEMA_VERSION,
        dim: m.nrows(),
        entries: m.transpose().as_slice().to_vec(),
    }
}

pub fn parse_basis(text: &str) -> Result<Vec<LinearMap>> {
    let file: BasisFile = parse_json(text, "basis")?;
    check_schema(file.schema_version, "basis")?;
    match (&file.basis, file.named) {
        (Some(list), None) => list
            .iter()
            .enumerate()
            .map(|(a, rows)| matrix_from_rows(file.dim, rows, &format!("basis[{a}]")))
            .collect(),
        (None, Some(NamedSubalgebra::So)) => Ok(crate::adjoint::so_basis(file.dim)),
        (None, Some(NamedSubalgebra::Sl)) => Ok(crate::adjoint::sl_basis(file.dim)),
        (None, Some(NamedSubalgebra::BlockSl)) => {
            let blocks = file
                .blocks
                .ok_or_else(|| Error::Parse("blocks: required for block_sl".into()))?;
            if blocks.iter().sum::<usize>() != file.dim || blocks.contains(&0) {
                return Err(Error::Parse(format!(
                    "blocks: {blocks:?} is not a composition of dim {}",
                    file.dim
                )));
            }
            Ok(crate::adjoint::block_sl_basis(&blocks))
        }
        _ => Err(Error::Parse(
            "basis: exactly one of `basis` and `named` is required".into(),
        )),
    }
}

pub fn read_basis(path: &Path) -> Result<Vec<LinearMap>> {
    parse_basis(&read(path)?).map_err(|e| with_path(e, path))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
    /// A reported value with no pass/fail meaning.
    Info,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    fn new(name: &str, status: Status) -> Self {
        Self {
            name: name.to_string(),
            status,
            value: None,
            tolerance: None,
            note: None,
        }
    }

    pub fn pass_if(name: &str, ok: bool) -> Self {
        Self::new(name, if ok { Status::Pass } else { Status::Fail })
    }

    /// Passes iff `value <= tolerance`.
    pub fn bounded(name: &str, value: f64, tolerance: f64) -> Self {
        Self::pass_if(name, value <= tolerance)
            .with_value(value)
            .with_tolerance(tolerance)
    }

    pub fn info(name: &str, value: impl Serialize) -> Self {
        Self::new(name, Status::Info).with_value(value)
    }

    pub fn skipped(name: &str, reason: &str) -> Self {
        Self::new(name, Status::Skipped).with_note(reason)
    }

    pub fn with_value(mut self, value: impl Serialize) -> Self {
        self.value = Some(rounded(serde_json::to_value(value).expect("serializable value")));
        self
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = Some(tol);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// Significant digits kept for floating-point values in reports.
pub const REPORT_DIGITS: usize = 12;

fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", REPORT_DIGITS - 1, x)
        .parse()
        .expect("formatted float parses")
}

/// Rounds every float in `v` to [`REPORT_DIGITS`] significant digits.
pub fn rounded(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_sig(n.as_f64().expect("f64 number"));
            serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(rounded).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, rounded(v))).collect()),
        other => other,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool: String,
    pub version: String,
    pub command: String,
    pub inputs: Value,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Value::is_null", default)]
    pub results: Value,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub timing_ms: Option<f64>,
}

impl Report {
    pub fn new(command: &str, inputs: Value) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            inputs,
            checks: Vec::new(),
            results: Value::Null,
            passed: true,
            timing_ms: None,
        }
    }

    pub fn push(&mut self, check: Check) {
        if check.status == Status::Fail {
            self.passed = false;
        }
        self.checks.push(check);
    }

    pub fn set_results(&mut self, results: impl Serialize) {
        self.results = rounded(serde_json::to_value(results).expect("serializable results"));
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// One line per check followed by a summary line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let status = match c.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Skipped => "SKIP",
                Status::Info => "INFO",
            };
            out.push_str(&format!("{status:4}  {}", c.name));
            if let Some(v) = &c.value {
                out.push_str(&format!(" = {v}"));
            }
            if let Some(t) = c.tolerance {
                out.push_str(&format!(" (tol {t:e})"));
            }
            if let Some(n) = &c.note {
                out.push_str(&format!(" [{n}]"));
            }
            out.push('\n');
        }
        out.push_str(&format!(
            "{}: {}\n",
            self.command,
            if self.passed { "all checks passed" } else { "FAILED" }
        ));
        out
    }
}
