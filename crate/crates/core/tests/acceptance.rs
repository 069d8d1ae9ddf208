//! Acceptance run: one PASS/FAIL line per criterion, with its runtime.
//! Exits non-zero if any criterion fails.

mod common;

use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use common::{alpha_1, canonical_set, props, star_oracle, symmetric_body_pairs};
use locus_core::backend::SolverConfig;
use locus_core::chc::{distinct_process_basis, encode_family, ClauseKind, EncodeOptions};
use locus_core::invariant::{
    check_family, check_invariant_explicit, explicit_reach, ExplicitVerdict, FamilyOptions, FamilyVerdict, Reach,
    DEFAULT_MAX_STATES,
};
use locus_core::pipeline::{solve_family, Outcome};
use locus_core::program::{
    attach_program, check_bounds_stable, family_types, ConcreteProgram, FamilyDescriptor, ProgramSpec, Topology,
};
use locus_core::suite;

/// Wall-clock limits, where a criterion has one.
const STAR_LIMIT: Duration = Duration::from_secs(1);
const TYPES_LIMIT: Duration = Duration::from_secs(1);
const BASIS_LIMIT: Duration = Duration::from_secs(10);
const STABILITY_LIMIT: Duration = Duration::from_secs(10);
const SOLVE_LIMIT: Duration = Duration::from_secs(120);

const PIPELINE_TYPES: usize = 6;
const PIPELINE_BASIS: usize = 15;
const MAX_PROCESSES: usize = 5;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check, Option<Duration>);

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn load(name: &str) -> Result<(Arc<ProgramSpec>, usize), String> {
    let b = suite::find(name).ok_or(format!("no benchmark {name}"))?;
    Ok((b.load().map_err(|e| e.to_string())?, b.width))
}

fn member(spec: &Arc<ProgramSpec>, n: usize) -> Result<ConcreteProgram, String> {
    let s = spec.family.instantiate(n).map_err(|e| e.to_string())?;
    attach_program(spec.clone(), Arc::new(s)).map_err(|e| e.to_string())
}

fn solver() -> Result<SolverConfig, String> {
    let cfg = SolverConfig::from_env().with_timeout(SOLVE_LIMIT);
    if cfg.available() {
        Ok(cfg)
    } else {
        Err(format!("solver {} not found", cfg.executable.display()))
    }
}

fn star_golden() -> Check {
    let (spec, _) = load("star-mutex")?;
    let enc = encode_family(&spec, 2, EncodeOptions::all()).map_err(|e| e.to_string())?;
    let sys = &enc.system;
    ensure(
        sys.predicates.len() == 1,
        format!("{} predicates", sys.predicates.len()),
    )?;
    let arity = sys.predicates[0].arity();
    ensure(arity == 3, format!("arity {arity}"))?;
    let reduced: Vec<_> = sys
        .clauses
        .iter()
        .filter(|c| c.kind != ClauseKind::Symmetry)
        .cloned()
        .collect();
    let got = canonical_set(&reduced, &sys.predicates, true);
    let want = canonical_set(&star_oracle(0, false), &sys.predicates, true);
    ensure(got == want, format!("reduced clauses differ: {got:?} vs {want:?}"))?;
    ensure(symmetric_body_pairs(sys) == 0, "reduced bodies keep mirrored atoms")?;

    let dpg = EncodeOptions {
        dpg: true,
        ..EncodeOptions::baseline()
    };
    let full = encode_family(&spec, 2, dpg).map_err(|e| e.to_string())?.system;
    let gray = canonical_set(&star_oracle(0, true), &full.predicates, false);
    ensure(
        canonical_set(&full.clauses, &full.predicates, false) == gray,
        "unreduced clauses differ",
    )?;
    let base = encode_family(&spec, 2, EncodeOptions::baseline())
        .map_err(|e| e.to_string())?
        .system;
    let mirrored = symmetric_body_pairs(&base);
    ensure(mirrored > 0, "baseline has no mirrored atoms")?;
    Ok(format!(
        "1 predicate of arity 3, {} clauses + {} symmetry clause; baseline {} mirrored atom pairs",
        reduced.len(),
        sys.count(ClauseKind::Symmetry),
        mirrored
    ))
}

fn pipeline_types() -> Check {
    let (spec, _) = load("simple-pipeline")?;
    let types = family_types(&spec.family, 1).map_err(|e| e.to_string())?;
    ensure(types.len() == PIPELINE_TYPES, format!("{} types", types.len()))?;
    let s3 = spec.family.instantiate(3).map_err(|e| e.to_string())?;
    let s0 = s3.node_by_label("s0").ok_or("no s0")?;
    let t1 = types.classify(&s3, &[s0]).map_err(|e| e.to_string())?;
    let mut nodes = 0;
    for n in 3..=8 {
        let s = spec.family.instantiate(n).map_err(|e| e.to_string())?;
        for v in s.nodes() {
            let got = types.get(t1).alpha.eval(&s, &[v]).map_err(|e| e.to_string())?;
            ensure(got == alpha_1(&s, v), format!("LINE({n}) disagrees at {}", s.label(v)))?;
            nodes += 1;
        }
    }
    Ok(format!(
        "6 types; T1 agrees with alpha_1 on {nodes} nodes of LINE(3..8)"
    ))
}

fn pipeline_basis() -> Check {
    let (spec, _) = load("simple-pipeline")?;
    let basis = distinct_process_basis(&spec.family, 3).map_err(|e| e.to_string())?;
    ensure(
        basis.len() == PIPELINE_BASIS,
        format!("{} neighbourhoods, expected {PIPELINE_BASIS}", basis.len()),
    )?;
    Ok(format!("{} neighbourhoods", basis.len()))
}

fn end_to_end() -> Check {
    let cfg = solver()?;
    let cases = [
        ("ring-swap", EncodeOptions::baseline(), Some(2)),
        ("simple-pipeline", EncodeOptions::baseline(), Some(6)),
        ("ring-token", EncodeOptions::all(), None),
    ];
    let mut notes = Vec::new();
    for (name, o, preds) in cases {
        let (spec, k) = load(name)?;
        let start = Instant::now();
        let r = solve_family(&spec, k, o, &cfg).map_err(|e| format!("{name}: {e}"))?;
        let took = start.elapsed();
        let Outcome::Sat(inv) = &r.outcome else {
            return Err(format!("{name}: {}", r.outcome.label()));
        };
        ensure(took <= SOLVE_LIMIT, format!("{name}: {took:?}"))?;
        if let Some(p) = preds {
            let got = r.encoding.system.predicates.len();
            ensure(got == p, format!("{name}: {got} predicates, expected {p}"))?;
        }
        let fc = check_family(inv, FamilyOptions::default(), &cfg).map_err(|e| e.to_string())?;
        ensure(
            fc.verdict == FamilyVerdict::Invariant,
            format!("{name}: basis check {:?}", fc.verdict),
        )?;
        if suite::find(name).is_some_and(|b| b.boolean) {
            for n in 3..=5 {
                let v =
                    check_invariant_explicit(inv, &member(&spec, n)?, DEFAULT_MAX_STATES).map_err(|e| e.to_string())?;
                ensure(
                    matches!(v, ExplicitVerdict::Invariant { .. }),
                    format!("{name} n={n}: {v:?}"),
                )?;
            }
        }
        notes.push(format!("{name} {} in {:.2}s", r.size(), took.as_secs_f64()));
    }
    Ok(notes.join(", "))
}

fn encodings_agree() -> Check {
    let cfg = solver()?;
    let labels = ["baseline", "opn", "dpg", "opn+dpg+sym"];
    let mut runs = 0;
    for base in ["ring-swap", "simple-pipeline", "ring-token"] {
        for name in [base.to_string(), format!("{base}-bug")] {
            let b = suite::find(&name).ok_or(format!("no benchmark {name}"))?;
            let spec = b.load().map_err(|e| e.to_string())?;
            let want = if b.buggy { "unsat" } else { "sat" };
            for label in labels {
                let o = EncodeOptions::from_label(label).ok_or(label)?;
                let r = solve_family(&spec, b.width, o, &cfg).map_err(|e| format!("{name} {label}: {e}"))?;
                let got = r.outcome.label();
                ensure(got == want, format!("{name} {label}: {got}, expected {want}"))?;
                runs += 1;
            }
        }
    }
    Ok(format!("{runs} runs agree"))
}

fn oracle_equivalence() -> Check {
    let cfg = solver()?;
    let (mut instances, mut sats) = (0, 0);
    for b in suite::bundled().into_iter().filter(|b| b.boolean) {
        let spec = b.load().map_err(|e| e.to_string())?;
        let r = solve_family(&spec, b.width, EncodeOptions::all(), &cfg).map_err(|e| e.to_string())?;
        let sat = match &r.outcome {
            Outcome::Sat(_) => {
                let rep = r.recheck.as_ref().ok_or("sat without recheck")?;
                ensure(rep.passed(), format!("{}: recheck failed", b.name))?;
                sats += 1;
                true
            }
            Outcome::Unsat => false,
            o => return Err(format!("{}: {}", b.name, o.label())),
        };
        let mut n = spec.family.min_index;
        while spec.family.contains_index(n) {
            let prog = member(&spec, n)?;
            if prog.topology.nodes().filter(|&v| prog.is_process(v)).count() > MAX_PROCESSES {
                break;
            }
            let safe = match explicit_reach(&prog, DEFAULT_MAX_STATES).map_err(|e| e.to_string())? {
                Reach::Safe { .. } => true,
                Reach::Unsafe { .. } => false,
                r => return Err(format!("{} n={n}: {r:?}", b.name)),
            };
            ensure(
                safe == sat,
                format!(
                    "{} n={n}: {} but {}",
                    b.name,
                    r.outcome.label(),
                    if safe { "safe" } else { "unsafe" }
                ),
            )?;
            instances += 1;
            n += 1;
        }
    }
    Ok(format!("{instances} instances agree, {sats} sat models recheck"))
}

fn stability() -> Check {
    let line = FamilyDescriptor::new(Topology::Line { hub: false }, 1).map_err(|e| e.to_string())?;
    let r = check_bounds_stable(&line, 2).map_err(|e| e.to_string())?;
    ensure(r.stable, format!("{r:?}"))?;
    ensure(r.extended.len() >= r.bounds.len() + 2, "fewer than two extra sizes")?;
    Ok(format!(
        "{} types over {:?} and {:?}",
        r.base_count, r.bounds, r.extended
    ))
}

fn properties() -> Check {
    for (name, run) in props::ALL {
        run(props::CASES).map_err(|e| format!("{name}: {e}"))?;
    }
    Ok(format!("{} properties x {} cases", props::ALL.len(), props::CASES))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("1 star golden encoding", star_golden, Some(STAR_LIMIT)),
        ("2 pipeline 1-types", pipeline_types, Some(TYPES_LIMIT)),
        ("3 pipeline rank-3 basis", pipeline_basis, Some(BASIS_LIMIT)),
        ("4 end-to-end solves", end_to_end, None),
        ("5 encodings agree", encodings_agree, None),
        ("6 explicit-state oracle", oracle_equivalence, None),
        ("7 type enumeration stability", stability, Some(STABILITY_LIMIT)),
        ("8 property suites", properties, None),
    ];
    let mut failed = 0;
    for (name, run, limit) in criteria {
        let start = Instant::now();
        let mut res = run();
        let took = start.elapsed();
        if let (Ok(_), Some(limit)) = (&res, limit) {
            if took > limit {
                res = Err(format!("took {took:?}, limit {limit:?}"));
            }
        }
        let (tag, detail) = match res {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{tag} {name} ({:.3}s): {detail}", took.as_secs_f64());
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
