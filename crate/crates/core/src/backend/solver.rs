use std::io::Read;
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use crate::chc::ChcSystem;
use crate::logic::Expr;

use super::model::{parse_model, Model};
use super::smtlib::emit_smtlib;
use super::BackendError;

/// Environment variable naming the default solver executable.
pub const SOLVER_ENV: &str = "LOCUS_SOLVER";

/// Keeps z3 from eliminating predicate arguments, which otherwise shows up
/// as quantifiers in its models.
pub const Z3_ARGS: [&str; 3] = [
    "fp.xform.slice=false",
    "fp.xform.inline_linear=false",
    "fp.xform.inline_eager=false",
];

/// How to run an external solver.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolverConfig {
    pub executable: PathBuf,
    /// Arguments placed before the script path.
    pub args: Vec<String>,
    pub timeout: Duration,
    /// Where scratch files go; the system temporary directory by default.
    pub scratch: Option<PathBuf>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig::from_env()
    }
}

impl SolverConfig {
    /// Uses the executable named by the solver environment variable, or `z3`.
    pub fn from_env() -> Self {
        let executable = std::env::var_os(SOLVER_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("z3"));
        SolverConfig {
            executable: PathBuf::new(),
            args: Vec::new(),
            timeout: Duration::from_secs(120),
            scratch: None,
        }
        .with_executable(executable)
    }

    /// Sets the executable, with [`Z3_ARGS`] as arguments if it is z3.
    pub fn with_executable(mut self, executable: impl Into<PathBuf>) -> Self {
        self.executable = executable.into();
        self.args = if self
            .executable
            .file_name()
            .is_some_and(|n| n.to_string_lossy().starts_with("z3"))
        {
            Z3_ARGS.iter().map(|a| a.to_string()).collect()
        } else {
            Vec::new()
        };
        self
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    /// Whether the executable can be started.
    pub fn available(&self) -> bool {
        Command::new(&self.executable)
            .arg("-version")
            .stdout(Stdio::null())
            .stderr(Stdio::null())
            .status()
            .is_ok()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Sat,
    Unsat,
    Unknown,
    Timeout,
    Error,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Verdict::Sat => "sat",
            Verdict::Unsat => "unsat",
            Verdict::Unknown => "unknown",
            Verdict::Timeout => "timeout",
            Verdict::Error => "error",
        };
        f.write_str(s)
    }
}

/// The outcome of one solver run.
#[derive(Clone, Debug)]
pub struct SolverResult {
    pub verdict: Verdict,
    /// Parsed solution, when the verdict is sat and the model is usable.
    pub model: Option<Model>,
    /// Why a sat answer came without a usable model.
    pub model_issue: Option<String>,
    /// Standard output followed by standard error.
    pub transcript: String,
    pub elapsed: Duration,
}

fn classify(stdout: &str) -> Option<Verdict> {
    match stdout.lines().map(str::trim).find(|l| !l.is_empty())? {
        "sat" => Some(Verdict::Sat),
        "unsat" => Some(Verdict::Unsat),
        "unknown" => Some(Verdict::Unknown),
        "timeout" => Some(Verdict::Timeout),
        _ => None,
    }
}

pub(crate) struct RawRun {
    pub stdout: String,
    pub stderr: String,
    pub timed_out: bool,
    pub elapsed: Duration,
}

/// Writes `script` to a scratch file and runs the solver on it.
pub(crate) fn run_raw(script: &str, cfg: &SolverConfig) -> Result<RawRun, BackendError> {
    let dir = match &cfg.scratch {
        Some(d) => {
            std::fs::create_dir_all(d)?;
            tempfile::Builder::new().prefix("locus-").tempdir_in(d)?
        }
        None => tempfile::Builder::new().prefix("locus-").tempdir()?,
    };
    let path = dir.path().join("query.smt2");
    std::fs::write(&path, script)?;
    let start = Instant::now();
    let mut child = Command::new(&cfg.executable)
        .args(&cfg.args)
        .arg(&path)
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => BackendError::SolverMissing(cfg.executable.display().to_string()),
            _ => BackendError::Io(e.to_string()),
        })?;
    let mut out = child.stdout.take().expect("piped");
    let mut err = child.stderr.take().expect("piped");
    let out_reader = thread::spawn(move || {
        let mut s = String::new();
        let _ = out.read_to_string(&mut s);
        s
    });
    let err_reader = thread::spawn(move || {
        let mut s = String::new();
        let _ = err.read_to_string(&mut s);
        s
    });
    let mut timed_out = false;
    loop {
        if child.try_wait()?.is_some() {
            break;
        }
        if start.elapsed() >= cfg.timeout {
            let _ = child.kill();
            let _ = child.wait();
            timed_out = true;
            break;
        }
        thread::sleep(Duration::from_millis(5));
    }
    let elapsed = start.elapsed();
    Ok(RawRun {
        stdout: out_reader.join().unwrap_or_default(),
        stderr: err_reader.join().unwrap_or_default(),
        timed_out,
        elapsed,
    })
}

/// Runs the solver on a script and classifies its first output line.
pub fn run_solver(script: &str, cfg: &SolverConfig) -> Result<SolverResult, BackendError> {
    let raw = run_raw(script, cfg)?;
    let verdict = if raw.timed_out {
        Verdict::Timeout
    } else {
        classify(&raw.stdout).unwrap_or(Verdict::Error)
    };
    let mut transcript = raw.stdout;
    if !raw.stderr.is_empty() {
        transcript.push_str(&raw.stderr);
    }
    Ok(SolverResult {
        verdict,
        model: None,
        model_issue: None,
        transcript,
        elapsed: raw.elapsed,
    })
}

/// Emits, solves and, on sat, parses the model. Predicates that occur in no
/// clause are interpreted as `true`.
pub fn solve_system(system: &ChcSystem, cfg: &SolverConfig) -> Result<SolverResult, BackendError> {
    let script = emit_smtlib(system)?;
    let mut res = run_solver(&script, cfg)?;
    if res.verdict == Verdict::Sat {
        let mut used = vec![false; system.predicates.len()];
        for c in &system.clauses {
            for a in &c.body {
                used[a.pred] = true;
            }
            if let crate::chc::Head::Atom(a) = &c.head {
                used[a.pred] = true;
            }
        }
        let needed: Vec<_> = system
            .predicates
            .iter()
            .zip(&used)
            .filter(|(_, u)| **u)
            .map(|(p, _)| p.clone())
            .collect();
        match parse_model(&res.transcript, &needed) {
            Ok(mut m) => {
                for (p, u) in system.predicates.iter().zip(&used) {
                    if !u {
                        m.defs.insert(p.name.clone(), Expr::Bool(true));
                    }
                }
                res.model = Some(m);
            }
            Err(e) => res.model_issue = Some(e.to_string()),
        }
    }
    Ok(res)
}
