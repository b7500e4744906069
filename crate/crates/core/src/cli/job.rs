//! Job specifications, report records and input loading.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::unitary::MatrixTrace;

/// Version of the JSON formats in `schema/oext.schema.json`.
pub const SCHEMA_VERSION: &str = "1.0.0";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verb {
    Snf,
    Hom,
    Ext,
    OextSum,
    OextInverse,
    OextTrivial,
    OextIso,
    SolveCocycle,
    Assemble,
    Bott,
    Rotation,
    WindingPair,
    Realize,
    ClassifyRotationAlgebra,
    Sweep,
}

impl Verb {
    pub fn name(self) -> &'static str {
        match self {
            Verb::Snf => "snf",
            Verb::Hom => "hom",
            Verb::Ext => "ext",
            Verb::OextSum => "oext-sum",
            Verb::OextInverse => "oext-inverse",
            Verb::OextTrivial => "oext-trivial",
            Verb::OextIso => "oext-iso",
            Verb::SolveCocycle => "solve-cocycle",
            Verb::Assemble => "assemble",
            Verb::Bott => "bott",
            Verb::Rotation => "rotation",
            Verb::WindingPair => "winding-pair",
            Verb::Realize => "realize",
            Verb::ClassifyRotationAlgebra => "classify-rotation-algebra",
            Verb::Sweep => "sweep",
        }
    }
}

impl fmt::Display for Verb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Flags shared by the verbs. Each verb reads the ones it needs and ignores none
/// silently: a flag the verb does not use is an error.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    /// Telescoping stage for `realize`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stage: Option<usize>,
    /// Exact decimal or `p/q`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qmax: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// `golden` or an exact rational.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<[String; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<MatrixTrace>,
    /// Solve the `K_1`-valued cocycle `ψ¹` instead of `ψ⁰`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k1: Option<bool>,
}

impl Params {
    /// Names of the flags that are set.
    pub fn set_names(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        macro_rules! push {
            ($($f:ident),*) => { $( if self.$f.is_some() { out.push(stringify!($f)); } )* };
        }
        push!(depth, stage, tol, grid, gap, qmax, seed, theta, phi, trace, k1);
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobSpec {
    pub verb: Verb,
    /// Input role to file. Relative paths resolve against the directory of the job file.
    #[serde(default)]
    pub inputs: BTreeMap<String, PathBuf>,
    #[serde(default)]
    pub params: Params,
    /// Where to also write this job's record.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Undecided,
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportRecord {
    pub schema_version: String,
    pub verb: Verb,
    /// SHA-256 over the input roles and file contents.
    pub inputs_digest: String,
    pub params: Params,
    pub status: Status,
    pub result: serde_json::Value,
    pub diagnostics: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Seconds; only recorded on request since it breaks byte-identical reports.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time: Option<f64>,
}

impl ReportRecord {
    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Ok => 0,
            Status::Error => 1,
            Status::Undecided => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("{path}:{line}:{column}: {message}")]
    Parse { path: String, line: usize, column: usize, message: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Operation(String),
}

/// Raw input files of a job, read once and shared by parsing and digesting.
#[derive(Clone, Debug)]
pub struct Inputs {
    files: BTreeMap<String, (PathBuf, Vec<u8>)>,
}

impl Inputs {
    pub fn read(inputs: &BTreeMap<String, PathBuf>, base: &Path) -> Result<Self, CliError> {
        let mut files = BTreeMap::new();
        for (role, p) in inputs {
            let path = if p.is_absolute() { p.clone() } else { base.join(p) };
            let bytes = std::fs::read(&path).map_err(|e| CliError::Io { path: path.display().to_string(), message: e.to_string() })?;
            files.insert(role.clone(), (path, bytes));
        }
        Ok(Inputs { files })
    }

    /// Documents held in memory. Each is reported under the path `<role>`.
    pub fn in_memory(docs: BTreeMap<String, Vec<u8>>) -> Self {
        Inputs { files: docs.into_iter().map(|(role, bytes)| (role.clone(), (PathBuf::from(format!("<{role}>")), bytes))).collect() }
    }

    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for (role, (_, bytes)) in &self.files {
            h.update((role.len() as u64).to_le_bytes());
            h.update(role.as_bytes());
            h.update((bytes.len() as u64).to_le_bytes());
            h.update(bytes);
        }
        hex::encode(h.finalize())
    }

    pub fn roles(&self) -> impl Iterator<Item = &str> {
        self.files.keys().map(String::as_str)
    }

    pub fn has(&self, role: &str) -> bool {
        self.files.contains_key(role)
    }

    pub fn parse<T: DeserializeOwned>(&self, role: &str) -> Result<T, CliError> {
        let (path, bytes) = self.files.get(role).ok_or_else(|| CliError::Usage(format!("missing input {role:?}")))?;
        parse_json(path, bytes)
    }
}

/// Parses JSON, reporting failures with file, line and column.
pub fn parse_json<T: DeserializeOwned>(path: &Path, bytes: &[u8]) -> Result<T, CliError> {
    serde_json::from_slice(bytes).map_err(|e| CliError::Parse {
        path: path.display().to_string(),
        line: e.line(),
        column: e.column(),
        message: strip_position(&e.to_string()),
    })
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(p) => msg[..p].to_string(),
        None => msg.to_string(),
    }
}
