use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};

use locus_core::backend::{emit_smtlib, SolverConfig};
use locus_core::chc::{encode_family, EncodeOptions};
use locus_core::invariant::{
    check_family, check_invariant_explicit, explicit_reach_within, export_sexp, export_text, read_invariant,
    AshcroftInvariant, ExplicitVerdict, FamilyOptions, FamilyVerdict, Reach, DEFAULT_MAX_STATES,
};
use locus_core::logic::GlobalState;
use locus_core::pipeline::{solve_family, Outcome};
use locus_core::program::{attach_program, family_types, ConcreteProgram, ProgramSpec};
use locus_core::suite;

const EXIT_OK: u8 = 0;
const EXIT_ERROR: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NEGATIVE: u8 = 10;
const EXIT_UNKNOWN: u8 = 20;
const EXIT_TIMEOUT: u8 = 30;

/// Infers and checks Ashcroft invariants of parameterized programs.
#[derive(Parser)]
#[command(name = "locus", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the quantifier-free k-types of the family.
    Types {
        #[command(flatten)]
        target: Target,
    },
    /// Write the Horn clause encoding as an SMT-LIB script.
    Encode {
        #[command(flatten)]
        target: Target,
        #[command(flatten)]
        opts: OptFlags,
        /// Output file; the script goes to stdout if omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Encode, solve, recheck the model and export the invariant.
    Solve {
        #[command(flatten)]
        target: Target,
        #[command(flatten)]
        opts: OptFlags,
        #[command(flatten)]
        solver: SolverFlags,
        /// Write the invariant as an S-expression.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Write the invariant as text.
        #[arg(long)]
        text: Option<PathBuf>,
    },
    /// Check an invariant on the basis of the family.
    Check {
        #[command(flatten)]
        target: Target,
        /// Invariant file written by `solve`; the all-true invariant if omitted.
        #[arg(short, long)]
        invariant: Option<PathBuf>,
        /// Also check the family members within the enumeration bounds.
        #[arg(long)]
        instances: bool,
        /// Also check by state enumeration on these members, e.g. `3..5`.
        #[arg(long, value_parser = parse_range)]
        explicit: Option<(usize, usize)>,
        #[command(flatten)]
        solver: SolverFlags,
    },
    /// Explore the states of one family member exhaustively.
    Simulate {
        /// Program file or bundled benchmark name.
        spec: String,
        /// Family index of the member.
        #[arg(short)]
        n: usize,
        /// Stop after this many steps.
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_MAX_STATES)]
        max_states: usize,
    },
    /// Run the bundled benchmarks under every encoding and print CSV.
    Bench {
        /// Only benchmarks whose name contains this string.
        #[arg(long)]
        only: Option<String>,
        #[command(flatten)]
        solver: SolverFlags,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Target {
    /// Program file or bundled benchmark name.
    spec: String,
    /// Invariant width; defaults to the width declared by the program.
    #[arg(short)]
    k: Option<usize>,
}

#[derive(Args)]
struct OptFlags {
    /// No optimizations.
    #[arg(long, conflicts_with_all = ["opn", "dpg", "sym"])]
    baseline: bool,
    /// One predicate per neighbourhood.
    #[arg(long)]
    opn: bool,
    /// Distinct processes as generators.
    #[arg(long)]
    dpg: bool,
    /// Symmetry reduction.
    #[arg(long)]
    sym: bool,
}

impl OptFlags {
    /// All optimizations unless some are named.
    fn options(&self) -> EncodeOptions {
        if self.baseline {
            EncodeOptions::baseline()
        } else if !(self.opn || self.dpg || self.sym) {
            EncodeOptions::all()
        } else {
            EncodeOptions {
                opn: self.opn,
                dpg: self.dpg,
                sym: self.sym,
            }
        }
    }
}

#[derive(Args)]
struct SolverFlags {
    /// Solver executable; defaults to $LOCUS_SOLVER or z3.
    #[arg(long)]
    solver: Option<PathBuf>,
    /// Timeout per solver run, in seconds.
    #[arg(long, default_value_t = 120)]
    timeout: u64,
}

impl SolverFlags {
    fn config(&self) -> SolverConfig {
        let mut cfg = SolverConfig::from_env().with_timeout(Duration::from_secs(self.timeout));
        if let Some(p) = &self.solver {
            cfg = cfg.with_executable(p);
        }
        cfg
    }
}

fn parse_range(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once("..").unwrap_or((s, s));
    let a: usize = a.parse().map_err(|_| format!("bad range `{s}`"))?;
    let b: usize = b.parse().map_err(|_| format!("bad range `{s}`"))?;
    if a > b {
        return Err(format!("empty range `{s}`"));
    }
    Ok((a, b))
}

/// A failure with the exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

fn usage(error: anyhow::Error) -> Failure {
    Failure {
        code: EXIT_USAGE,
        error,
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Failure {
            code: EXIT_ERROR,
            error,
        }
    }
}

type CmdResult = Result<u8, Failure>;

fn load_spec(spec: &str) -> Result<Arc<ProgramSpec>, Failure> {
    let path = Path::new(spec);
    let parsed = if path.exists() {
        let src = fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))
            .map_err(usage)?;
        ProgramSpec::parse(&src).with_context(|| format!("in {}", path.display()))
    } else if let Some(b) = suite::find(spec) {
        ProgramSpec::parse(b.source).with_context(|| format!("in bundled benchmark {spec}"))
    } else {
        return Err(usage(anyhow!("no program file or bundled benchmark named `{spec}`")));
    };
    parsed.map(Arc::new).map_err(usage)
}

fn width(target: &Target, spec: &ProgramSpec) -> Result<usize, Failure> {
    match target.k.or(spec.width) {
        Some(0) => Err(usage(anyhow!("the width k must be at least 1"))),
        Some(k) => Ok(k),
        None => Err(usage(anyhow!("the program declares no width; pass -k"))),
    }
}

fn write_out(path: &Path, content: &str) -> Result<(), Failure> {
    fs::write(path, content)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(Failure::from)
}

fn cmd_types(target: &Target) -> CmdResult {
    let spec = load_spec(&target.spec)?;
    let k = width(target, &spec)?;
    let types = family_types(&spec.family, k).map_err(|e| usage(e.into()))?;
    let vocab = &spec.family.vocab;
    println!("{} {}-types of {}", types.len(), k, spec.family);
    for t in types.iter() {
        let reps: Vec<String> = t.rep_terms.iter().map(|r| r.display(vocab).to_string()).collect();
        let w = &t.witness;
        let labels: Vec<&str> = w.tuple.iter().map(|&v| w.structure.label(v)).collect();
        println!(
            "type {}  n={}  witness ({}) in member {}",
            t.id,
            t.n_reps(),
            labels.join(" "),
            w.instance
        );
        println!("  alpha: {}", t.alpha.display(vocab));
        println!("  reps:  {}", reps.join(", "));
    }
    Ok(EXIT_OK)
}

fn cmd_encode(target: &Target, opts: &OptFlags, output: Option<&Path>) -> CmdResult {
    let spec = load_spec(&target.spec)?;
    let k = width(target, &spec)?;
    let enc = encode_family(&spec, k, opts.options()).map_err(anyhow::Error::from)?;
    let script = emit_smtlib(&enc.system).map_err(anyhow::Error::from)?;
    let stats = format!("{}/{}", enc.system.predicates.len(), enc.system.clauses.len());
    match output {
        Some(p) => {
            write_out(p, &script)?;
            println!("{stats}");
        }
        None => {
            print!("{script}");
            eprintln!("{stats}");
        }
    }
    Ok(EXIT_OK)
}

fn cmd_solve(
    target: &Target,
    opts: &OptFlags,
    solver: &SolverFlags,
    output: Option<&Path>,
    text: Option<&Path>,
) -> CmdResult {
    let spec = load_spec(&target.spec)?;
    let k = width(target, &spec)?;
    let cfg = solver.config();
    let report = solve_family(&spec, k, opts.options(), &cfg).map_err(anyhow::Error::from)?;
    println!("{}", report.outcome.label());
    println!(
        "encoding {} size {} gen {:.3}s solve {:.3}s recheck {:.3}s",
        report.encoding.options.label(),
        report.size(),
        report.gen_time.as_secs_f64(),
        report.solve_time.as_secs_f64(),
        report.check_time.as_secs_f64()
    );
    Ok(match &report.outcome {
        Outcome::Sat(inv) => {
            if report.symmetrized {
                println!("model symmetrized before the recheck");
            }
            if let Some(p) = output {
                write_out(p, &export_sexp(inv))?;
            }
            match text {
                Some(p) => write_out(p, &export_text(inv))?,
                None if output.is_none() => print!("{}", export_text(inv)),
                None => {}
            }
            EXIT_OK
        }
        Outcome::Unsat => EXIT_NEGATIVE,
        Outcome::Unknown(why) => {
            println!("{why}");
            EXIT_UNKNOWN
        }
        Outcome::Timeout => EXIT_TIMEOUT,
    })
}

fn member(spec: &Arc<ProgramSpec>, n: usize) -> Result<ConcreteProgram, Failure> {
    let s = spec.family.instantiate(n).map_err(|e| usage(e.into()))?;
    attach_program(spec.clone(), Arc::new(s)).map_err(|e| Failure::from(anyhow::Error::from(e)))
}

fn render_state(prog: &ConcreteProgram, st: &GlobalState) -> String {
    st.iter()
        .map(|((v, f), x)| format!("{}.{}={}", prog.label(*v), f, x))
        .collect::<Vec<_>>()
        .join(" ")
}

fn cmd_check(
    target: &Target,
    invariant: Option<&Path>,
    instances: bool,
    explicit: Option<(usize, usize)>,
    solver: &SolverFlags,
) -> CmdResult {
    let spec = load_spec(&target.spec)?;
    let inv = match invariant {
        Some(p) => {
            let src = fs::read_to_string(p)
                .with_context(|| format!("reading {}", p.display()))
                .map_err(usage)?;
            read_invariant(&src, spec.clone()).map_err(|e| usage(e.into()))?
        }
        None => {
            let k = width(target, &spec)?;
            let types = family_types(&spec.family, k).map_err(|e| usage(e.into()))?;
            AshcroftInvariant::trivial(spec.clone(), Arc::new(types))
        }
    };
    let cfg = solver.config();
    let res = check_family(&inv, FamilyOptions { instances }, &cfg).map_err(anyhow::Error::from)?;
    println!("checked {} triples on {} programs", res.triples, res.members.len());
    let mut code = match &res.verdict {
        FamilyVerdict::Invariant => {
            println!("invariant");
            EXIT_OK
        }
        FamilyVerdict::NotInvariant(f) => {
            println!("not invariant");
            println!("  program: {}", f.member);
            println!("  triple:  {}", f.triple);
            if let Some(c) = &f.counterexample {
                println!("  {c}");
            }
            EXIT_NEGATIVE
        }
        FamilyVerdict::Undetermined(why) => {
            println!("undetermined: {why}");
            EXIT_UNKNOWN
        }
    };
    if let Some((lo, hi)) = explicit {
        for n in lo..=hi {
            if !spec.family.contains_index(n) {
                continue;
            }
            let prog = member(&spec, n)?;
            let v = check_invariant_explicit(&inv, &prog, DEFAULT_MAX_STATES).map_err(anyhow::Error::from)?;
            match v {
                ExplicitVerdict::Invariant { states } => println!("member {n}: invariant ({states} states)"),
                ExplicitVerdict::Fails {
                    condition,
                    state,
                    next,
                    tuple,
                } => {
                    println!("member {n}: fails {condition} at {}", render_state(&prog, &state));
                    if let Some((v, t)) = next {
                        println!("  {} moves to {}", prog.label(v), render_state(&prog, &t));
                    }
                    if !tuple.is_empty() {
                        let w: Vec<&str> = tuple.iter().map(|&v| prog.label(v)).collect();
                        println!("  error at ({})", w.join(" "));
                    }
                    if code == EXIT_OK {
                        code = EXIT_NEGATIVE;
                    }
                }
            }
        }
    }
    Ok(code)
}

fn cmd_simulate(spec: &str, n: usize, depth: Option<usize>, max_states: usize) -> CmdResult {
    let spec = load_spec(spec)?;
    let prog = member(&spec, n)?;
    let res = explicit_reach_within(&prog, max_states, depth).map_err(anyhow::Error::from)?;
    Ok(match res {
        Reach::Safe { states } => {
            println!("safe ({states} reachable states)");
            EXIT_OK
        }
        Reach::NoErrorWithin { depth, states } => {
            println!("no error within {depth} steps ({states} states)");
            EXIT_UNKNOWN
        }
        Reach::Unsafe { trace, error_at } => {
            println!("unsafe");
            for (i, (mover, st)) in trace.iter().enumerate() {
                let who = mover.map_or("init".to_string(), |v| format!("{} moves", prog.label(v)));
                println!("  {i}: {who}: {}", render_state(&prog, st));
            }
            let w: Vec<&str> = error_at.iter().map(|&v| prog.label(v)).collect();
            println!("  error at ({})", w.join(" "));
            EXIT_NEGATIVE
        }
    })
}

fn cmd_bench(only: Option<&str>, solver: &SolverFlags, output: Option<&Path>) -> CmdResult {
    let cfg = solver.config();
    let encodings = [
        EncodeOptions::baseline(),
        EncodeOptions {
            opn: true,
            ..Default::default()
        },
        EncodeOptions {
            dpg: true,
            ..Default::default()
        },
        EncodeOptions::all(),
    ];
    let sink: Box<dyn std::io::Write> = match output {
        Some(p) => Box::new(
            fs::File::create(p)
                .with_context(|| format!("creating {}", p.display()))
                .map_err(Failure::from)?,
        ),
        None => Box::new(std::io::stdout()),
    };
    let mut w = csv::Writer::from_writer(sink);
    let io = |e: csv::Error| Failure::from(anyhow::Error::from(e));
    w.write_record([
        "benchmark",
        "width",
        "encoding",
        "size",
        "gen_s",
        "solve_s",
        "verdict",
        "expected",
    ])
    .map_err(io)?;
    for b in suite::bundled() {
        if only.is_some_and(|o| !b.name.contains(o)) {
            continue;
        }
        let spec = b.load().map_err(|e| usage(e.into()))?;
        for o in encodings {
            let expected = if b.buggy { "unsat" } else { "sat" };
            let (size, gen, solve, verdict) = match solve_family(&spec, b.width, o, &cfg) {
                Ok(r) => (
                    r.size(),
                    format!("{:.3}", r.gen_time.as_secs_f64()),
                    format!("{:.3}", r.solve_time.as_secs_f64()),
                    r.outcome.label().to_string(),
                ),
                Err(e) => (String::new(), String::new(), String::new(), format!("error: {e}")),
            };
            w.write_record([
                b.name,
                &b.width.to_string(),
                &o.label(),
                &size,
                &gen,
                &solve,
                &verdict,
                expected,
            ])
            .map_err(io)?;
            w.flush().map_err(|e| Failure::from(anyhow::Error::from(e)))?;
        }
    }
    Ok(EXIT_OK)
}

fn run(cli: Cli) -> CmdResult {
    match &cli.command {
        Command::Types { target } => cmd_types(target),
        Command::Encode { target, opts, output } => cmd_encode(target, opts, output.as_deref()),
        Command::Solve {
            target,
            opts,
            solver,
            output,
            text,
        } => cmd_solve(target, opts, solver, output.as_deref(), text.as_deref()),
        Command::Check {
            target,
            invariant,
            instances,
            explicit,
            solver,
        } => cmd_check(target, invariant.as_deref(), *instances, *explicit, solver),
        Command::Simulate {
            spec,
            n,
            depth,
            max_states,
        } => cmd_simulate(spec, *n, *depth, *max_states),
        Command::Bench { only, solver, output } => cmd_bench(only.as_deref(), solver, output.as_deref()),
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
