//! Command-line front end: every verb becomes a [`JobSpec`], jobs run through
//! [`run`], batches through [`sweep`], and every run yields a [`ReportRecord`].

pub mod job;
pub mod verbs;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

pub use job::{parse_json, CliError, Inputs, JobSpec, Params, ReportRecord, Status, Verb, SCHEMA_VERSION};
pub use verbs::{execute, prepare, random_phi, Outcome, Prepared};

use crate::unitary::MatrixTrace;

/// Options that apply to every run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunOptions {
    pub timing: bool,
}

fn record(verb: Verb, digest: String, params: &Params, outcome: Result<Outcome, CliError>, wall: Option<f64>) -> ReportRecord {
    let (status, result, diagnostics, error) = match outcome {
        Ok(o) => (if o.undecided { Status::Undecided } else { Status::Ok }, o.result, o.diagnostics, None),
        Err(e) => (Status::Error, Value::Null, Value::Null, Some(e.to_string())),
    };
    ReportRecord {
        schema_version: SCHEMA_VERSION.to_string(),
        verb,
        inputs_digest: digest,
        params: params.clone(),
        status,
        result,
        diagnostics,
        error,
        wall_time: wall,
    }
}

/// Inputs of a job parsed, or the parse error with the digest of whatever was read.
fn load(job: &JobSpec, base: &Path) -> (String, Result<Prepared, CliError>) {
    match Inputs::read(&job.inputs, base) {
        Err(e) => (String::new(), Err(e)),
        Ok(inputs) => (inputs.digest(), prepare(job.verb, &inputs, &job.params)),
    }
}

fn finish(job: &JobSpec, digest: String, prepared: Result<Prepared, CliError>, opts: RunOptions) -> ReportRecord {
    let start = Instant::now();
    let outcome = prepared.and_then(|p| execute(&p, &job.params));
    let wall = opts.timing.then(|| start.elapsed().as_secs_f64());
    record(job.verb, digest, &job.params, outcome, wall)
}

/// Parses every input of the job, then runs it. Input paths resolve against `base`.
/// A `sweep` job returns an error record; use [`sweep`] for batches.
pub fn run(job: &JobSpec, base: &Path, opts: RunOptions) -> ReportRecord {
    let (digest, prepared) = load(job, base);
    finish(job, digest, prepared, opts)
}

/// Runs one verb on inputs already in memory.
pub fn run_inputs(verb: Verb, inputs: &Inputs, params: &Params, opts: RunOptions) -> ReportRecord {
    let job = JobSpec { verb, inputs: Default::default(), params: params.clone(), output: None };
    let prepared = if verb == Verb::Sweep {
        Err(CliError::Usage("sweep needs a job file".into()))
    } else {
        prepare(verb, inputs, params)
    };
    finish(&job, inputs.digest(), prepared, opts)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepSummary {
    pub jobs: usize,
    pub ok: usize,
    pub undecided: usize,
    pub error: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepReport {
    pub schema_version: String,
    pub records: Vec<ReportRecord>,
    pub summary: SweepSummary,
}

impl SweepReport {
    /// 1 if any job failed, else 2 if any is undecided, else 0.
    pub fn exit_code(&self) -> i32 {
        if self.summary.error > 0 {
            1
        } else if self.summary.undecided > 0 {
            2
        } else {
            0
        }
    }
}

/// Runs independent jobs in parallel. All inputs are parsed before any job
/// computes; records come back in job order and a failing job only fails itself.
pub fn sweep(jobs: &[JobSpec], base: &Path, opts: RunOptions) -> SweepReport {
    let loaded: Vec<(String, Result<Prepared, CliError>)> = jobs.par_iter().map(|j| load(j, base)).collect();
    let records: Vec<ReportRecord> =
        jobs.par_iter().zip(loaded.into_par_iter()).map(|(j, (digest, prepared))| finish(j, digest, prepared, opts)).collect();
    let count = |s: Status| records.iter().filter(|r| r.status == s).count();
    let summary = SweepSummary { jobs: records.len(), ok: count(Status::Ok), undecided: count(Status::Undecided), error: count(Status::Error) };
    SweepReport { schema_version: SCHEMA_VERSION.to_string(), records, summary }
}

/// Reads a JSON list of jobs.
pub fn read_jobs(path: &Path) -> Result<Vec<JobSpec>, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Io { path: path.display().to_string(), message: e.to_string() })?;
    parse_json(path, &bytes)
}

#[derive(Parser, Debug)]
#[command(name = "oext", version, about = "Ordered K-theory extension invariants")]
pub struct Cli {
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Record wall time in reports (makes them run-dependent).
    #[arg(long, global = true)]
    pub timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Default)]
pub struct UnitaryFlags {
    /// Minimal distance of the relevant spectra from -1.
    #[arg(long)]
    pub gap: Option<f64>,
    /// Tolerance on the Bott residual (bott, winding-pair) or the frame unitarity defect (rotation).
    #[arg(long)]
    pub tol: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Smith normal form U·S·V of an integer matrix.
    Snf {
        #[arg(long)]
        matrix: PathBuf,
    },
    /// Hom(source, target) of finitely generated abelian groups.
    Hom {
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        target: PathBuf,
    },
    /// Ext(g1, g0) of finitely generated abelian groups.
    Ext {
        #[arg(long)]
        g1: PathBuf,
        #[arg(long)]
        g0: PathBuf,
    },
    /// Baer sum of two orderextensions.
    OextSum {
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        y: PathBuf,
    },
    /// Inverse of an orderextension.
    OextInverse {
        #[arg(long)]
        x: PathBuf,
    },
    /// Triviality of an orderextension, with the condition report.
    OextTrivial {
        #[arg(long)]
        x: PathBuf,
    },
    /// Isomorphism of two orderextensions, with a certificate.
    OextIso {
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        y: PathBuf,
    },
    /// Cochain solving a cocycle sequence up to a depth.
    SolveCocycle {
        #[arg(long)]
        psi: PathBuf,
        #[arg(long)]
        depth: Option<usize>,
        /// Solve the K1-valued sequence.
        #[arg(long)]
        k1: bool,
    },
    /// Truncated limit extension of a cocycle sequence.
    Assemble {
        #[arg(long)]
        psi: PathBuf,
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Bott element of a pair of unitaries, or over the loop of a winding pair.
    Bott {
        #[arg(long, requires = "v", conflicts_with = "blocks")]
        u: Option<PathBuf>,
        #[arg(long, requires = "u")]
        v: Option<PathBuf>,
        #[arg(long, required_unless_present = "u")]
        blocks: Option<PathBuf>,
        #[arg(long)]
        grid: Option<usize>,
        #[command(flatten)]
        flags: UnitaryFlags,
    },
    /// Rotation number of a sampled unitary path.
    Rotation {
        #[arg(long)]
        path: PathBuf,
        #[arg(long, value_parser = parse_trace)]
        trace: Option<MatrixTrace>,
        #[command(flatten)]
        flags: UnitaryFlags,
    },
    /// Winding pair (w, z) for a list of blocks, with the norm check.
    WindingPair {
        #[arg(long)]
        blocks: PathBuf,
        #[arg(long)]
        grid: Option<usize>,
        #[command(flatten)]
        flags: UnitaryFlags,
    },
    /// Realization certificate for a PhiSpec.
    Realize {
        #[arg(long)]
        phi: PathBuf,
        #[arg(long)]
        depth: usize,
        /// Stage of the telescoping check.
        #[arg(long)]
        stage: Option<usize>,
    },
    /// Decide whether (r1, r2) lies in (Z + θZ)².
    ClassifyRotationAlgebra {
        /// `golden` or an exact rational.
        #[arg(long)]
        theta: Option<String>,
        /// `r1,r2` as exact decimals or fractions.
        #[arg(long, value_parser = parse_phi, allow_hyphen_values = true)]
        phi: Option<[String; 2]>,
        /// Accepts `10^6` and `1e6`.
        #[arg(long, value_parser = parse_count)]
        qmax: Option<u64>,
        #[arg(long)]
        tol: Option<String>,
        /// Draw φ from this seed instead of --phi.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run a JSON list of jobs.
    Sweep {
        #[arg(long)]
        jobs: PathBuf,
    },
}

fn parse_trace(s: &str) -> Result<MatrixTrace, String> {
    match s {
        "normalized" => Ok(MatrixTrace::Normalized),
        "full" => Ok(MatrixTrace::Full),
        _ => Err(format!("expected normalized or full, got {s:?}")),
    }
}

fn parse_phi(s: &str) -> Result<[String; 2], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b] => Ok([a.to_string(), b.to_string()]),
        _ => Err(format!("expected r1,r2, got {s:?}")),
    }
}

/// `123`, `10^6` or `1e6`.
pub fn parse_count(s: &str) -> Result<u64, String> {
    let err = || format!("invalid count {s:?}");
    let pow = |b: &str, e: &str| -> Result<u64, String> {
        let b: u64 = b.parse().map_err(|_| err())?;
        let e: u32 = e.parse().map_err(|_| err())?;
        b.checked_pow(e).ok_or_else(err)
    };
    if let Some((b, e)) = s.split_once('^') {
        return pow(b, e);
    }
    if let Some((m, e)) = s.split_once(['e', 'E']) {
        let m: u64 = m.parse().map_err(|_| err())?;
        return m.checked_mul(pow("10", e)?).ok_or_else(err);
    }
    s.parse().map_err(|_| err())
}

fn inputs(pairs: &[(&str, Option<&PathBuf>)]) -> BTreeMap<String, PathBuf> {
    pairs.iter().filter_map(|(k, v)| v.map(|p| (k.to_string(), p.clone()))).collect()
}

impl Command {
    /// The job a non-sweep command stands for.
    pub fn to_job(&self) -> Option<JobSpec> {
        let mut p = Params::default();
        let (verb, inputs) = match self {
            Command::Snf { matrix } => (Verb::Snf, inputs(&[("matrix", Some(matrix))])),
            Command::Hom { source, target } => (Verb::Hom, inputs(&[("source", Some(source)), ("target", Some(target))])),
            Command::Ext { g1, g0 } => (Verb::Ext, inputs(&[("g1", Some(g1)), ("g0", Some(g0))])),
            Command::OextSum { x, y } => (Verb::OextSum, inputs(&[("x", Some(x)), ("y", Some(y))])),
            Command::OextInverse { x } => (Verb::OextInverse, inputs(&[("x", Some(x))])),
            Command::OextTrivial { x } => (Verb::OextTrivial, inputs(&[("x", Some(x))])),
            Command::OextIso { x, y } => (Verb::OextIso, inputs(&[("x", Some(x)), ("y", Some(y))])),
            Command::SolveCocycle { psi, depth, k1 } => {
                p.depth = *depth;
                p.k1 = k1.then_some(true);
                (Verb::SolveCocycle, inputs(&[("psi", Some(psi))]))
            }
            Command::Assemble { psi, depth } => {
                p.depth = *depth;
                (Verb::Assemble, inputs(&[("psi", Some(psi))]))
            }
            Command::Bott { u, v, blocks, grid, flags } => {
                p.grid = *grid;
                p.gap = flags.gap;
                p.tol = flags.tol.clone();
                (Verb::Bott, inputs(&[("u", u.as_ref()), ("v", v.as_ref()), ("blocks", blocks.as_ref())]))
            }
            Command::Rotation { path, trace, flags } => {
                p.trace = *trace;
                p.gap = flags.gap;
                p.tol = flags.tol.clone();
                (Verb::Rotation, inputs(&[("path", Some(path))]))
            }
            Command::WindingPair { blocks, grid, flags } => {
                p.grid = *grid;
                p.gap = flags.gap;
                p.tol = flags.tol.clone();
                (Verb::WindingPair, inputs(&[("blocks", Some(blocks))]))
            }
            Command::Realize { phi, depth, stage } => {
                p.depth = Some(*depth);
                p.stage = *stage;
                (Verb::Realize, inputs(&[("phi", Some(phi))]))
            }
            Command::ClassifyRotationAlgebra { theta, phi, qmax, tol, seed } => {
                p.theta = theta.clone();
                p.phi = phi.clone();
                p.qmax = *qmax;
                p.tol = tol.clone();
                p.seed = *seed;
                (Verb::ClassifyRotationAlgebra, BTreeMap::new())
            }
            Command::Sweep { .. } => return None,
        };
        Some(JobSpec { verb, inputs, params: p, output: None })
    }
}

fn write_report<T: Serialize>(value: &T, output: Option<&Path>) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    match output {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io { path: path.display().to_string(), message: e.to_string() }),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::Io { path: "<stdout>".into(), message: e.to_string() }),
    }
}

/// Runs the parsed command line and returns the process exit code. Reports go to
/// stdout (or `--output`), errors to stderr.
pub fn main_with(cli: Cli) -> i32 {
    let opts = RunOptions { timing: cli.timing };
    let outcome = match &cli.command {
        Command::Sweep { jobs } => read_jobs(jobs).and_then(|list| {
            let base = jobs.parent().map(Path::to_path_buf).unwrap_or_default();
            let report = sweep(&list, &base, opts);
            for (job, rec) in list.iter().zip(&report.records) {
                if let Some(out) = &job.output {
                    write_report(rec, Some(&base.join(out)))?;
                }
            }
            write_report(&report, cli.output.as_deref())?;
            Ok(report.exit_code())
        }),
        cmd => {
            let job = cmd.to_job().expect("non-sweep command");
            let rec = run(&job, Path::new(""), opts);
            if let Some(e) = &rec.error {
                eprintln!("error: {e}");
                Ok(1)
            } else {
                write_report(&rec, cli.output.as_deref()).map(|_| rec.exit_code())
            }
        }
    };
    outcome.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        1
    })
}
