//! Command-line front end.
//!
//! Every command prints a JSON [`RunReport`] on stdout and diagnostics on
//! stderr. Exit codes: 0 positive verdict, 1 negative verdict, 2 usage
//! error, 3 invalid input, 4 internal error.

use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::attack::{AttackSetting, MooreAttacker};
use crate::encoding::{emit_dimacs, emit_qdimacs, parse_dimacs, Encoder, Formula};
use crate::format::{parse_instance, parse_supervisor, write_supervisor, FormatError, InstanceFile};
use crate::solve::{
    bmc_depth, bound_schedule, find_attacker, sat_solve, verify_supervisor, AttackSearch, Method, SatConfig, SatResult,
    SearchMethod, SolveError, SolverKind, SynthesisInstance, SynthesisOptions, SynthesisOutcome,
};
use crate::supervision::{build_obfuscation_bounds, check_range_control, lower_bound_holds, upper_bound_holds, Supervisor};

pub const EXIT_POSITIVE: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INVALID: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "supsynth", version, about = "Bounded synthesis of attack-resilient supervisors")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize a supervisor that survives every bounded attacker.
    Synthesize(SynthArgs),
    /// Check range control and resilience of a given supervisor.
    Verify(VerifyArgs),
    /// Search for an attacker that defeats a given supervisor.
    Attack(AttackArgs),
    /// Write the propositional encoding as DIMACS or QDIMACS.
    Encode(EncodeArgs),
    /// Replace the instance's supervisor by a resilient one with the same closed-loop language.
    Obfuscate(SynthArgs),
    /// Check range control of a given supervisor.
    Check(CheckArgs),
    /// Solve a DIMACS file with the built-in solver.
    #[command(hide = true)]
    Sat(SatArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Direct,
    Cegis,
    QbfExport,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SearchArg {
    Fast,
    Bmc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Dimacs,
    Qdimacs,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// `builtin` or the command line of a DIMACS solver.
    #[arg(long, default_value = "builtin")]
    pub solver: String,
    /// Per SAT call, in seconds.
    #[arg(long, default_value_t = 60)]
    pub timeout: u64,
    /// Attacker search used for verification.
    #[arg(long, value_enum, default_value_t = SearchArg::Fast)]
    pub search: SearchArg,
    /// Unrolling limit of the bounded attacker search.
    #[arg(long, default_value_t = 64)]
    pub max_steps: usize,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    pub instance: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    /// Largest supervisor size tried; defaults to `--n`.
    #[arg(long)]
    pub n_max: Option<usize>,
    #[arg(long, value_enum, default_value_t = MethodArg::Cegis)]
    pub method: MethodArg,
    #[arg(long, default_value_t = 16)]
    pub max_iters: usize,
    /// Output file (supervisor block, or QDIMACS for `qbf-export`).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub instance: PathBuf,
    /// Supervisor file; defaults to the instance's supervisor block.
    #[arg(long)]
    pub supervisor: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct AttackArgs {
    pub instance: PathBuf,
    #[arg(long)]
    pub supervisor: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    #[arg(long, default_value_t = 64)]
    pub max_steps: usize,
    #[arg(long, value_enum, default_value_t = SearchArg::Bmc)]
    pub search: SearchArg,
    #[arg(long, default_value = "builtin")]
    pub solver: String,
    #[arg(long, default_value_t = 60)]
    pub timeout: u64,
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    pub instance: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    #[arg(long, value_enum, default_value_t = FormatArg::Qdimacs)]
    pub format: FormatArg,
    #[arg(short, long)]
    pub output: PathBuf,
    /// Variable map file; defaults to `<output>.map`.
    #[arg(long)]
    pub var_map: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    pub instance: PathBuf,
    #[arg(long)]
    pub supervisor: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SatArgs {
    /// DIMACS file; stdin when absent.
    pub input: Option<PathBuf>,
}

/// Machine-readable summary of one command.
#[derive(Debug, Clone, Default, Serialize, PartialEq, Eq)]
pub struct RunReport {
    pub command: String,
    /// `found`, `not-found`, `holds` or `violated`; absent for pure exports.
    pub verdict: Option<String>,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub iterations: usize,
    pub sat_calls: usize,
    pub wall_time_ms: u128,
    pub outputs: Vec<String>,
    pub supervisor: Option<String>,
    pub attacker: Option<String>,
    pub bounds: Vec<BoundReport>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct BoundReport {
    pub n: usize,
    pub sat_calls: usize,
    pub iterations: usize,
    pub vars: usize,
    pub clauses: usize,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Invalid(String),
    Internal(String),
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        Failure::Invalid(e.to_string())
    }
}

impl From<SolveError> for Failure {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::Model(m) => Failure::Invalid(m.to_string()),
            SolveError::CovertUnsupported => Failure::Usage(e.to_string()),
            other => Failure::Internal(other.to_string()),
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_POSITIVE };
        }
    };
    if let Command::Sat(a) = &cli.command {
        return run_sat(a, out, err);
    }
    let start = Instant::now();
    match dispatch(&cli.command) {
        Ok((mut report, code)) => {
            report.wall_time_ms = start.elapsed().as_millis();
            let _ = writeln!(out, "{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            for note in &report.notes {
                let _ = writeln!(err, "note: {note}");
            }
            code
        }
        Err(f) => {
            let (code, msg) = match f {
                Failure::Usage(m) => (EXIT_USAGE, m),
                Failure::Invalid(m) => (EXIT_INVALID, m),
                Failure::Internal(m) => (EXIT_INTERNAL, m),
            };
            let _ = writeln!(err, "error: {msg}");
            code
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<String, Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?;
    Ok(path.display().to_string())
}

fn load(path: &Path) -> Result<InstanceFile, Failure> {
    let text = read(path)?;
    parse_instance(&text).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
}

fn supervisor_of(file: &InstanceFile, path: Option<&Path>) -> Result<Supervisor, Failure> {
    match path {
        Some(p) => {
            let text = read(p)?;
            parse_supervisor(&text, &file.setting).map_err(|e| Failure::Invalid(format!("{}: {e}", p.display())))
        }
        None => Ok(file.require_supervisor()?.clone()),
    }
}

fn sat_config(solver: &str, timeout: u64) -> SatConfig {
    SatConfig {
        solver: if solver == "builtin" {
            SolverKind::Builtin
        } else {
            SolverKind::External(solver.to_string())
        },
        timeout: Duration::from_secs(timeout),
    }
}

fn search_of(a: &SolverArgs) -> AttackSearch {
    AttackSearch {
        method: match a.search {
            SearchArg::Fast => SearchMethod::Fast,
            SearchArg::Bmc => SearchMethod::Bmc,
        },
        max_steps: a.max_steps,
        sat: sat_config(&a.solver, a.timeout),
    }
}

fn check_bounds(n: usize, m: usize) -> Result<(), Failure> {
    if n == 0 || m == 0 {
        return Err(Failure::Usage("--n and --m must be at least 1".into()));
    }
    Ok(())
}

fn render_attacker(a: &MooreAttacker, setting: &AttackSetting) -> String {
    a.render(setting)
}

fn dispatch(cmd: &Command) -> Result<(RunReport, i32), Failure> {
    match cmd {
        Command::Synthesize(a) => {
            let file = load(&a.instance)?;
            let inst = file.synthesis_instance()?;
            let mut report = synthesize(&inst, a, "synthesize")?;
            report.notes.splice(0..0, file.notes.iter().cloned());
            Ok(with_code(report))
        }
        Command::Obfuscate(a) => {
            let file = load(&a.instance)?;
            let reference = file.require_supervisor()?;
            let plant = file.require_plant()?;
            let damage = file
                .damage
                .clone()
                .ok_or_else(|| Failure::Invalid("missing `automaton damage` block".into()))?;
            let (lower, upper) = build_obfuscation_bounds(reference, plant);
            let inst = SynthesisInstance::new(file.setting.clone(), plant.clone(), lower, upper, damage)
                .map_err(|e| Failure::Invalid(e.to_string()))?;
            let mut report = synthesize(&inst, a, "obfuscate")?;
            report.notes.splice(0..0, file.notes.iter().cloned());
            Ok(with_code(report))
        }
        Command::Verify(a) => {
            check_bounds(1, a.m)?;
            let file = load(&a.instance)?;
            let inst = file.synthesis_instance()?;
            let s = supervisor_of(&file, a.supervisor.as_deref())?;
            let v = verify_supervisor(&s, &inst, a.m, &search_of(&a.solver))?;
            let mut notes = file.notes.clone();
            if !v.range_control {
                notes.push("range control violated".into());
            }
            let report = RunReport {
                command: "verify".into(),
                verdict: Some(if v.holds() { "holds" } else { "violated" }.into()),
                m: Some(a.m),
                n: Some(s.num_states()),
                attacker: v.attacker.as_ref().map(|x| render_attacker(x, inst.setting())),
                notes,
                ..RunReport::default()
            };
            Ok(with_code(report))
        }
        Command::Attack(a) => {
            check_bounds(1, a.m)?;
            let file = load(&a.instance)?;
            let inst = file.synthesis_instance()?;
            let s = supervisor_of(&file, a.supervisor.as_deref())?;
            let search = AttackSearch {
                method: match a.search {
                    SearchArg::Fast => SearchMethod::Fast,
                    SearchArg::Bmc => SearchMethod::Bmc,
                },
                max_steps: a.max_steps,
                sat: sat_config(&a.solver, a.timeout),
            };
            let found = find_attacker(&s, &inst, a.m, &search)?;
            let mut notes = file.notes.clone();
            if a.search == SearchArg::Bmc {
                notes.push(format!("unrolled {} steps", bmc_depth(&s, &inst, a.m, a.max_steps)));
            }
            let report = RunReport {
                command: "attack".into(),
                verdict: Some(if found.is_none() { "holds" } else { "violated" }.into()),
                m: Some(a.m),
                n: Some(s.num_states()),
                sat_calls: usize::from(a.search == SearchArg::Bmc),
                attacker: Some(match &found {
                    Some(x) => render_attacker(x, inst.setting()),
                    None => "none".into(),
                }),
                notes,
                ..RunReport::default()
            };
            Ok(with_code(report))
        }
        Command::Encode(a) => {
            check_bounds(a.n, a.m)?;
            let file = load(&a.instance)?;
            let inst = file.synthesis_instance()?;
            let (text, map) = match a.format {
                FormatArg::Qdimacs => export_qbf(&inst, a.n, a.m)?,
                FormatArg::Dimacs => {
                    let mut enc = Encoder::new(&inst, a.n, a.m).map_err(|e| Failure::Internal(e.to_string()))?;
                    let a_all = crate::attack::all_enable_attacker(inst.setting()).padded(a.m);
                    let safe = enc.safety_against(&a_all).map_err(|e| Failure::Internal(e.to_string()))?;
                    let f = Formula::and([enc.outer_formula(), safe]);
                    let cnf = enc.clausify(&f);
                    (emit_dimacs(&cnf), enc.vars().render())
                }
            };
            let map_path = a.var_map.clone().unwrap_or_else(|| sidecar(&a.output));
            let outputs = vec![write_file(&a.output, &text)?, write_file(&map_path, &map)?];
            let report = RunReport {
                command: "encode".into(),
                n: Some(a.n),
                m: Some(a.m),
                outputs,
                notes: file.notes.clone(),
                ..RunReport::default()
            };
            Ok((report, EXIT_POSITIVE))
        }
        Command::Check(a) => {
            let file = load(&a.instance)?;
            let inst = file.synthesis_instance()?;
            let s = supervisor_of(&file, a.supervisor.as_deref())?;
            let ok = check_range_control(&s, inst.plant(), inst.lower(), inst.upper());
            let mut notes = file.notes.clone();
            if !lower_bound_holds(&s, inst.plant(), inst.lower()) {
                notes.push("lower specification not contained in the closed loop".into());
            }
            if !upper_bound_holds(&s, inst.plant(), inst.upper()) {
                notes.push("closed loop exceeds the upper specification".into());
            }
            let report = RunReport {
                command: "check".into(),
                verdict: Some(if ok { "holds" } else { "violated" }.into()),
                n: Some(s.num_states()),
                notes,
                ..RunReport::default()
            };
            Ok(with_code(report))
        }
        Command::Sat(_) => unreachable!("handled before dispatch"),
    }
}

fn sidecar(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".map");
    PathBuf::from(s)
}

fn export_qbf(inst: &SynthesisInstance, n: usize, m: usize) -> Result<(String, String), Failure> {
    let mut enc = Encoder::new(inst, n, m).map_err(|e| Failure::Internal(e.to_string()))?;
    let qbf = enc.assemble_resilient_qbf();
    Ok((emit_qdimacs(&qbf), enc.vars().render()))
}

fn with_code(report: RunReport) -> (RunReport, i32) {
    let code = match report.verdict.as_deref() {
        Some("found") | Some("holds") | None => EXIT_POSITIVE,
        _ => EXIT_NEGATIVE,
    };
    (report, code)
}

fn synthesize(inst: &SynthesisInstance, a: &SynthArgs, command: &str) -> Result<RunReport, Failure> {
    check_bounds(a.n, a.m)?;
    let n_max = a.n_max.unwrap_or(a.n);
    if n_max < a.n {
        return Err(Failure::Usage("--n-max must be at least --n".into()));
    }
    let inst = inst.clone().with_bounds(a.n, a.m);
    let method = match a.method {
        MethodArg::Direct => Method::Direct,
        MethodArg::Cegis => Method::Cegis,
        MethodArg::QbfExport => {
            let out = a
                .output
                .as_ref()
                .ok_or_else(|| Failure::Usage("qbf-export needs -o".into()))?;
            let (text, map) = export_qbf(&inst, a.n, a.m)?;
            let outputs = vec![write_file(out, &text)?, write_file(&sidecar(out), &map)?];
            return Ok(RunReport {
                command: command.into(),
                n: Some(a.n),
                m: Some(a.m),
                outputs,
                ..RunReport::default()
            });
        }
    };
    let opts = SynthesisOptions {
        search: search_of(&a.solver),
        max_iters: a.max_iters,
    };
    let outcome = bound_schedule(&inst, n_max, method, &opts)?;
    let mut report = RunReport {
        command: command.into(),
        m: Some(a.m),
        iterations: outcome.iterations(),
        sat_calls: outcome.sat_calls(),
        bounds: outcome
            .stats()
            .iter()
            .map(|s| BoundReport {
                n: s.n,
                sat_calls: s.sat_calls,
                iterations: s.iterations,
                vars: s.vars,
                clauses: s.clauses,
            })
            .collect(),
        ..RunReport::default()
    };
    match outcome {
        SynthesisOutcome::Found { supervisor, n, .. } => {
            let text = write_supervisor(&supervisor);
            report.verdict = Some("found".into());
            report.n = Some(n);
            if let Some(out) = &a.output {
                report.outputs.push(write_file(out, &text)?);
            }
            report.supervisor = Some(text);
        }
        SynthesisOutcome::NotFoundAtBounds { n, .. } => {
            report.verdict = Some("not-found".into());
            report.n = Some(n);
        }
    }
    Ok(report)
}

/// DIMACS in, `s`/`v` lines out, exit code 10 or 20.
fn run_sat(a: &SatArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let text = match &a.input {
        Some(p) => std::fs::read_to_string(p),
        None => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s).map(|_| s)
        }
    };
    let text = match text {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let cnf = match parse_dimacs(&text) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_INVALID;
        }
    };
    match sat_solve(&cnf, &SatConfig::default()) {
        Ok(SatResult::Sat(model)) => {
            let _ = writeln!(out, "s SATISFIABLE");
            let lits: Vec<String> = (1..model.len())
                .map(|v| if model[v] { v.to_string() } else { format!("-{v}") })
                .collect();
            let _ = writeln!(out, "v {} 0", lits.join(" "));
            10
        }
        Ok(SatResult::Unsat) => {
            let _ = writeln!(out, "s UNSATISFIABLE");
            20
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INTERNAL
        }
    }
}
