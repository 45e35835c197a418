//! Command-line front end: `solve`, `check`, `oracle` and `batch`.

pub mod config;
pub mod report;

use std::fs::File;
use std::io::{LineWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cauchy::{scs_properties_check, step_values, CauchyStructure, ScsProbe};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::limspace::fw_condition_check;
use crate::oracle::{enumerate_maps_verify, enumerate_sequences, frechet_wilson_brute, FiniteRule, MAX_SIZE};
use crate::seqcore::{orbit_prefix, Point, SeqView};
use crate::solver::{
    solve_caristi, solve_ciric_distance, solve_ciric_psi_d, solve_general, Mode, Potential, SolveOutcome,
};
use crate::spaces::{
    default_seeds, distance_axiom_check, lambda_limit, psi_monotone_check, psibar_axioms_check, DistanceSpec,
    LambdaMap, PointPsi, PosetSpec, PsiBar, Value,
};
use crate::verdict::{Verdict, Witness};

pub use config::{Problem, ProblemConfig};
pub use report::{exit, RunReport};

#[derive(Debug, Parser)]
#[command(name = "limfix", version, about = "Fixed sets and fixed points over limit spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the configured solver.
    Solve {
        config: PathBuf,
        /// Write one JSON line per orbit step.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Also write the report to this file.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run one axiom or premise checker.
    Check {
        config: PathBuf,
        #[arg(long, value_enum)]
        target: CheckTarget,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Exhaustive cross-check on small finite spaces.
    Oracle {
        #[arg(long)]
        size: usize,
        #[arg(long, value_enum)]
        mode: OracleMode,
        /// Disable the thread pool.
        #[arg(long)]
        sequential: bool,
    },
    /// Solve several configs concurrently; reports keep the input order.
    Batch { configs: Vec<PathBuf> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckTarget {
    StructureScs,
    DistanceAxiom,
    Lambda,
    Psi,
    Fw,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OracleMode {
    Maps,
    Fw,
}

/// Parses `args`, runs the command, writes reports to `out` and returns the
/// process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::ERROR } else { exit::OK };
            let _ = e.print();
            return code;
        }
    };
    match cli.command {
        Command::Solve { config, trace, report } => emit(out, run_solve(&config, trace.as_deref(), report.as_deref())),
        Command::Check { config, target, report } => emit(out, run_check(&config, target, report.as_deref())),
        Command::Oracle { size, mode, sequential } => {
            let exec = if sequential { Execution::Sequential } else { Execution::Parallel };
            run_oracle(size, mode, exec, out)
        }
        Command::Batch { configs } => {
            let reports = Execution::Parallel.map(&configs, |p| run_solve(p, None, None));
            let mut code = exit::OK;
            for r in reports {
                code = code.max(emit(out, r));
            }
            code
        }
    }
}

fn emit(out: &mut dyn Write, report: RunReport) -> i32 {
    let _ = writeln!(out, "{}", report.to_json());
    report.exit_code
}

fn elapsed_ms(t0: Instant) -> f64 {
    t0.elapsed().as_secs_f64() * 1e3
}

fn load(path: &Path, command: &str) -> std::result::Result<(Problem, String), RunReport> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| RunReport::failed(command, exit::ERROR, format!("{}: {e}", path.display())))?;
    let hash = report::digest(text.as_bytes());
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let problem = ProblemConfig::parse(&text)
        .and_then(|c| c.build(&base))
        .map_err(|e| RunReport {
            config_hash: Some(hash.clone()),
            ..RunReport::failed(command, exit::ERROR, e)
        })?;
    Ok((problem, hash))
}

fn error_report(command: &str, e: Error) -> RunReport {
    match e {
        Error::PremiseViolation(_) | Error::MonotonicityViolation(_) => {
            RunReport::failed(command, exit::UNDETERMINED, format!("stage contraction: {e}"))
        }
        other => RunReport::failed(command, exit::ERROR, other),
    }
}

fn write_report(path: Option<&Path>, report: &RunReport) -> Result<()> {
    if let Some(p) = path {
        std::fs::write(p, report.to_json() + "\n")?;
    }
    Ok(())
}

fn finish(mut r: RunReport, t0: Instant, hash: Option<String>, path: Option<&Path>) -> RunReport {
    r.wall_time_ms = elapsed_ms(t0);
    r.config_hash = hash;
    if let Err(e) = write_report(path, &r) {
        return RunReport::failed(&r.command, exit::ERROR, e);
    }
    r
}

/// Dispatches on the configured mode.
pub fn solve_problem(p: &Problem) -> Result<SolveOutcome> {
    let k = &p.config.contraction;
    let need_d = || {
        p.distance
            .clone()
            .ok_or_else(|| Error::Config("the configured structure has no distance".into()))
    };
    let lambda = || {
        k.lambda
            .as_ref()
            .map(|l| l.build())
            .ok_or_else(|| Error::Config("contraction.lambda is required".into()))
    };
    match p.solve.mode {
        Mode::General => solve_general(&p.map, &p.start, &p.structure, &p.limit, &p.solve),
        Mode::CiricDistance => {
            let lower = k.lambda_lower.as_ref().map(|l| l.build()).unwrap_or(LambdaMap::Zero);
            solve_ciric_distance(&p.map, &p.start, &need_d()?, &lower, &lambda()?, &p.limit, &p.solve)
        }
        Mode::Caristi => {
            let d = need_d()?;
            let c = k
                .potential
                .ok_or_else(|| Error::Config("contraction.potential is required".into()))?;
            let psibar = PsiBar::caristi(d.clone(), p.map.clone());
            solve_caristi(&p.map, &p.start, &Potential::linear(c), &PointPsi::StepSum(d), &psibar, &p.limit, &p.solve)
        }
        Mode::CiricPsiD => {
            let CauchyStructure::PsiDistanceInduced { psi, .. } = &p.structure else {
                return Err(Error::Config("ciric_psi_d mode needs a psi_d structure".into()));
            };
            let alpha = k
                .alpha
                .clone()
                .ok_or_else(|| Error::Config("contraction.alpha is required".into()))?;
            solve_ciric_psi_d(&p.map, &p.start, &need_d()?, &lambda()?, psi, &p.limit, &p.solve, &alpha)
        }
    }
}

#[derive(Serialize)]
struct TraceLine<'a> {
    n: usize,
    point: &'a Point,
    #[serde(skip_serializing_if = "Option::is_none")]
    step_distance: Option<&'a Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    psi_running: Option<&'a Value>,
}

fn write_trace(p: &Problem, n: usize, path: &Path) -> Result<()> {
    let n = n.clamp(1, p.solve.tolerances.max_prefix);
    let orbit = orbit_prefix(p.map.clone(), p.start.clone(), n)?;
    let pts = orbit.points();
    let steps = match &p.distance {
        Some(d) => Some(step_values(d, pts)?),
        None => None,
    };
    let running = match &p.structure {
        CauchyStructure::PsiInduced { psi, .. } => Some(psi.running(pts)?),
        CauchyStructure::PsiDistanceInduced { psi, .. } => match &steps {
            Some(s) if !s.is_empty() => Some(psi.running(s)?),
            _ => None,
        },
        _ => None,
    };
    let mut w = LineWriter::new(File::create(path)?);
    for (i, point) in pts.iter().enumerate() {
        let line = TraceLine {
            n: i,
            point,
            step_distance: i.checked_sub(1).and_then(|k| steps.as_ref()?.get(k)),
            psi_running: match &p.structure {
                CauchyStructure::PsiInduced { .. } => running.as_ref().and_then(|r| r.get(i)),
                _ => i.checked_sub(1).and_then(|k| running.as_ref()?.get(k)),
            },
        };
        writeln!(w, "{}", serde_json::to_string(&line)?)?;
    }
    w.flush()?;
    Ok(())
}

pub fn run_solve(path: &Path, trace: Option<&Path>, report_path: Option<&Path>) -> RunReport {
    let t0 = Instant::now();
    let (problem, hash) = match load(path, "solve") {
        Ok(v) => v,
        Err(r) => return finish(r, t0, None, report_path),
    };
    let report_path = report_path.or(problem.config.output.report.as_deref()).map(|p| problem.base_dir.join(p));
    let report = match solve_problem(&problem) {
        Ok(out) => {
            let r = RunReport::new("solve").with_outcome(out);
            let trace = trace
                .map(Path::to_path_buf)
                .or_else(|| problem.config.output.trace.as_ref().map(|t| problem.base_dir.join(t)));
            match trace {
                Some(t) => match write_trace(&problem, r.iterations, &t) {
                    Ok(()) => r,
                    Err(e) => RunReport::failed("solve", exit::ERROR, e),
                },
                None => r,
            }
        }
        Err(e) => error_report("solve", e),
    };
    finish(report, t0, Some(hash), report_path.as_deref())
}

fn random_points(p: &Problem, count: usize) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(p.solve.tolerances.seed);
    let nonneg = matches!(p.distance, Some(DistanceSpec::PartialMetricMax | DistanceSpec::DislocatedSum));
    match &p.config.space {
        config::SpaceConfig::Finite { size } => (0..*size).filter_map(|i| Point::label(i, *size).ok()).collect(),
        config::SpaceConfig::Real { dim } => (0..count)
            .map(|_| {
                let v = (0..*dim)
                    .map(|_| if nonneg { rng.gen_range(0.0..10.0) } else { rng.gen_range(-10.0..10.0) })
                    .collect();
                Point::Real(v)
            })
            .collect(),
    }
}

/// Start, a few orbit points and seeded random points.
fn sample_points(p: &Problem, random: usize) -> Result<Vec<Point>> {
    let orbit = orbit_prefix(p.map.clone(), p.start.clone(), 4)?;
    let mut pts: Vec<Point> = Vec::new();
    for x in orbit.points().iter().cloned().chain(random_points(p, random)) {
        if !pts.contains(&x) {
            pts.push(x);
        }
    }
    Ok(pts)
}

fn check_distance(p: &Problem) -> Result<Verdict> {
    let d = p
        .distance
        .as_ref()
        .ok_or_else(|| Error::Config("distance-axiom needs a structure with a distance".into()))?;
    let pts = sample_points(p, 32)?;
    let pairs: Vec<(Point, Point)> = pts
        .iter()
        .flat_map(|a| pts.iter().map(move |b| (a.clone(), b.clone())))
        .collect();
    distance_axiom_check(d, &pairs)
}

fn check_scs(p: &Problem) -> Result<Verdict> {
    let probe = match &p.config.space {
        config::SpaceConfig::Finite { size } => ScsProbe::Exhaustive {
            points: random_points(p, 0),
            max_period: if *size <= MAX_SIZE { 4 } else { 3 },
        },
        config::SpaceConfig::Real { .. } => ScsProbe::Exhaustive {
            points: sample_points(p, 4)?,
            max_period: 3,
        },
    };
    scs_properties_check(&p.structure, &probe, &p.solve.tolerances)
}

fn value_space(p: &Problem) -> PosetSpec {
    p.distance.as_ref().map(DistanceSpec::value_space).unwrap_or(PosetSpec::Real)
}

fn check_lambda(p: &Problem) -> Result<Verdict> {
    let l = p
        .config
        .contraction
        .lambda
        .as_ref()
        .ok_or_else(|| Error::Config("lambda target needs contraction.lambda".into()))?
        .build();
    let y = value_space(p);
    Ok(lambda_limit(&y, &l, &default_seeds(&y), p.solve.lambda_iters, &p.solve.tolerances)?.verdict)
}

fn check_psi(p: &Problem) -> Result<Verdict> {
    match &p.structure {
        CauchyStructure::PsiDistanceInduced { psi, .. } => {
            let y = value_space(p);
            let seeds = default_seeds(&y);
            let mut samples: Vec<Vec<Value>> = (1..=seeds.len()).map(|k| seeds[..k].to_vec()).collect();
            samples.extend((1..=seeds.len()).map(|k| seeds[seeds.len() - k..].to_vec()));
            psi_monotone_check(psi, &y, &samples)
        }
        CauchyStructure::PsiInduced {
            psi: psi @ PointPsi::StepSum(d),
            ..
        } => {
            let orbit = orbit_prefix(p.map.clone(), p.start.clone(), 8)?;
            let tuples: Vec<Vec<Point>> = (1..=orbit.len()).map(|k| orbit.points()[..k].to_vec()).collect();
            let bar = PsiBar::caristi(d.clone(), p.map.clone());
            psibar_axioms_check(psi, &bar, &PosetSpec::Real, &tuples, &default_seeds(&PosetSpec::Real))
        }
        _ => Err(Error::Config("psi target needs a psi_d structure or a step_sum psi structure".into())),
    }
}

fn combine(verdicts: Vec<Verdict>) -> Verdict {
    let total = verdicts.len();
    if let Some(r) = verdicts.iter().find(|v| v.is_refuted()) {
        return r.clone();
    }
    let certified = verdicts.iter().filter(|v| v.is_certified()).count();
    if certified == total && total > 0 {
        Verdict::certified(Witness::new(format!("{total} triples satisfy the alternation law")).values([total as f64]))
    } else {
        Verdict::undetermined(format!("{certified} of {total} triples certified"))
    }
}

fn check_fw(p: &Problem) -> Result<Verdict> {
    let tol = &p.solve.tolerances;
    let views: Vec<SeqView> = match &p.config.space {
        config::SpaceConfig::Finite { size } => enumerate_sequences((*size).min(MAX_SIZE), 2)
            .iter()
            .take(24)
            .map(|e| e.view(*size))
            .collect::<Result<_>>()?,
        config::SpaceConfig::Real { .. } => {
            let n = p.solve.max_iter.min(tol.max_prefix);
            sample_points(p, 3)?
                .into_iter()
                .take(4)
                .map(|x| Ok(orbit_prefix(p.map.clone(), x, n)?.view().clone()))
                .collect::<Result<_>>()?
        }
    };
    let members: Vec<&SeqView> = views
        .iter()
        .filter(|y| p.structure.membership(y, tol).map(|v| v.is_certified()).unwrap_or(false))
        .collect();
    let mut verdicts = Vec::new();
    for y in members {
        for x in &views {
            for z in &views {
                verdicts.push(fw_condition_check(&p.structure, x, y, z, tol)?);
            }
        }
    }
    Ok(combine(verdicts))
}

pub fn run_check(path: &Path, target: CheckTarget, report_path: Option<&Path>) -> RunReport {
    let t0 = Instant::now();
    let (problem, hash) = match load(path, "check") {
        Ok(v) => v,
        Err(r) => return finish(r, t0, None, report_path),
    };
    let verdict = match target {
        CheckTarget::DistanceAxiom => check_distance(&problem),
        CheckTarget::StructureScs => check_scs(&problem),
        CheckTarget::Lambda => check_lambda(&problem),
        CheckTarget::Psi => check_psi(&problem),
        CheckTarget::Fw => check_fw(&problem),
    };
    let report = match verdict {
        Ok(v) => RunReport::new("check").with_verdict(v),
        Err(e) => error_report("check", e),
    };
    let report_path = report_path.or(problem.config.output.report.as_deref()).map(|p| problem.base_dir.join(p));
    finish(report, t0, Some(hash), report_path.as_deref())
}

/// Periods enumerated by `oracle --mode fw` for a space of size `n`.
pub fn fw_max_period(n: usize) -> usize {
    if n <= 3 {
        n + 1
    } else {
        3
    }
}

pub fn run_oracle(size: usize, mode: OracleMode, exec: Execution, out: &mut dyn Write) -> i32 {
    let t0 = Instant::now();
    if size == 0 || size > MAX_SIZE {
        return emit(
            out,
            RunReport::failed("oracle", exit::ERROR, format!("size must be in 1..={MAX_SIZE}, got {size}")),
        );
    }
    let mut report = RunReport::new("oracle");
    let result = match mode {
        OracleMode::Maps => enumerate_maps_verify(size, exec).map(|r| {
            for line in &r.lines {
                let _ = writeln!(out, "{}", serde_json::to_string(line).expect("line serializes"));
            }
            report.iterations = r.checks;
            report.exit_code = if r.is_clean() { exit::OK } else { exit::UNDETERMINED };
            serde_json::json!({
                "mode": "maps",
                "n": r.n,
                "maps": r.maps,
                "checks": r.checks,
                "mismatches": r.mismatches,
                "cycle_disagreements": r.cycle_disagreements,
            })
        }),
        OracleMode::Fw => frechet_wilson_brute(size, &FiniteRule::EventuallyConstant, fw_max_period(size), exec).map(|r| {
            report.iterations = r.sequences;
            report.exit_code = if r.counterexamples.is_empty() { exit::OK } else { exit::UNDETERMINED };
            serde_json::to_value(&r).expect("report serializes")
        }),
    };
    let report = match result {
        Ok(v) => RunReport {
            oracle: Some(v),
            wall_time_ms: elapsed_ms(t0),
            ..report
        },
        Err(e) => RunReport::failed("oracle", exit::ERROR, e),
    };
    emit(out, report)
}
