//! The `axiomtest` command line.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use crate::catalog;
use crate::harness::{obs_equiv, run_suite, HarnessError, IutAdapter};
use crate::observe::{enumerate_minimal_contexts, generate_observational, ObservationPlan};
use crate::parser::{parse_spec_file, SpecError};
use crate::rewrite::{check_constructor_completeness, check_ground_confluence, orient, Fuel, Mutation};
use crate::select::{generate, normal_form_tests_with, suite_header, Hypotheses, Strategy, TestSuite};
use crate::term::{validate_signature, Specification};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURES: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PROTOCOL: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "axiomtest", version, about = "Test generation from positive conditional specifications")]
pub struct Cli {
    /// Extra directories searched for imported specifications
    #[arg(long = "path", global = true, value_name = "DIR")]
    pub path: Vec<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check signature, orientation, constructor completeness and ground confluence
    Check {
        /// Specification file or bundled name
        spec: String,
        #[arg(long, default_value_t = 6)]
        bound: usize,
        #[arg(long, default_value_t = 10_000)]
        fuel: usize,
    },
    /// Generate a test suite
    Gen(GenArgs),
    /// List minimal observable contexts for a sort
    Contexts {
        spec: String,
        #[arg(long)]
        sort: String,
        #[arg(long, default_value_t = 5)]
        depth: usize,
        /// Comma separated observable sorts, replacing the declared ones
        #[arg(long, value_delimiter = ',')]
        observable: Option<Vec<String>>,
    },
    /// Run a suite against an implementation
    Run {
        suite: PathBuf,
        /// reference, mutant:ID (bundled id or mutation file) or exec:COMMAND
        #[arg(long)]
        iut: String,
        #[arg(short = 'j', long = "jobs", default_value_t = 1)]
        jobs: usize,
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
        /// Specification the suite was generated from, if not recorded in it
        #[arg(long)]
        spec: Option<String>,
        #[arg(long, default_value_t = 10_000)]
        fuel: usize,
        /// Leave wall times out of the report
        #[arg(long)]
        no_timings: bool,
        /// Seconds to wait for each reply of an external implementation
        #[arg(long, default_value_t = 10)]
        timeout: u64,
    },
    /// Compare two implementations on all observable ground terms
    Obscheck {
        spec: String,
        #[arg(long)]
        iut_a: String,
        #[arg(long)]
        iut_b: String,
        #[arg(long, default_value_t = 6)]
        bound: usize,
        #[arg(long, default_value_t = 10_000)]
        fuel: usize,
    },
}

#[derive(Args, Debug)]
pub struct GenArgs {
    pub spec: String,
    #[arg(long, default_value_t = 0)]
    pub depth: usize,
    #[arg(long, default_value_t = 7)]
    pub bound: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub reps: usize,
    /// exhaustive-first or seeded-random
    #[arg(long, default_value = "exhaustive-first")]
    pub strategy: Strategy,
    #[arg(long, default_value_t = 10_000)]
    pub fuel: usize,
    #[arg(long)]
    pub keep_tautologies: bool,
    /// Wrap tests of non-observable sort into observable contexts
    #[arg(long)]
    pub observable_mode: bool,
    /// Comma separated observable sorts, replacing the declared ones
    #[arg(long, value_delimiter = ',')]
    pub observable: Option<Vec<String>>,
    #[arg(long, default_value_t = 5)]
    pub ctx_depth: usize,
    #[arg(long, default_value_t = 4)]
    pub ctx_per_test: usize,
    #[arg(long, default_value_t = 3)]
    pub param_bound: usize,
    /// Emit t = normal form of t for every ground term up to the bound
    #[arg(long, conflicts_with = "observable_mode")]
    pub normal_form: bool,
    #[arg(short = 'o', long)]
    pub output: Option<PathBuf>,
}

/// Failure carrying its exit code.
struct Exit(i32, String);

impl From<SpecError> for Exit {
    fn from(e: SpecError) -> Self {
        Exit(EXIT_USAGE, e.to_string())
    }
}

impl From<HarnessError> for Exit {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Handshake { .. } => Exit(EXIT_PROTOCOL, e.to_string()),
            HarnessError::Mutant { .. } => Exit(EXIT_USAGE, e.to_string()),
        }
    }
}

fn usage(msg: impl ToString) -> Exit {
    Exit(EXIT_USAGE, msg.to_string())
}

fn io(path: &Path, e: std::io::Error) -> Exit {
    usage(format!("{}: {e}", path.display()))
}

/// Parses `args` (program name first) and runs the command, writing normal
/// output to `out` and diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{rendered}")
            } else {
                write!(out, "{rendered}")
            };
            return code;
        }
    };
    let mut search = cli.path.clone();
    if let Some(extra) = std::env::var_os("AXIOMTEST_PATH") {
        search.extend(std::env::split_paths(&extra).filter(|p| !p.as_os_str().is_empty()));
    }
    match dispatch(cli.command, &search, out, err) {
        Ok(code) => code,
        Err(Exit(code, msg)) => {
            let _ = writeln!(err, "error: {msg}");
            code
        }
    }
}

fn dispatch(cmd: Command, search: &[PathBuf], out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Exit> {
    match cmd {
        Command::Check { spec, bound, fuel } => check(&load_spec(&spec, search)?.0, bound, fuel, out),
        Command::Gen(args) => gen(args, search, out),
        Command::Contexts {
            spec,
            sort,
            depth,
            observable,
        } => {
            let spec = with_observable(load_spec(&spec, search)?.0, observable.as_deref())?;
            let sort = spec
                .signature
                .sort(&sort)
                .cloned()
                .ok_or_else(|| usage(format!("unknown sort `{sort}`")))?;
            let plan = ObservationPlan {
                context_depth: depth,
                ..ObservationPlan::default()
            };
            for c in enumerate_minimal_contexts(&spec, &sort, &plan) {
                let _ = writeln!(out, "{c}");
            }
            Ok(EXIT_OK)
        }
        Command::Run {
            suite,
            iut,
            jobs,
            output,
            spec,
            fuel,
            no_timings,
            timeout,
        } => {
            let opts = RunOpts {
                jobs,
                output,
                spec,
                steps: fuel,
                timings: !no_timings,
                timeout: Duration::from_secs(timeout),
            };
            run_cmd(&suite, &iut, &opts, search, out, err)
        }
        Command::Obscheck {
            spec,
            iut_a,
            iut_b,
            bound,
            fuel,
        } => {
            let spec = load_spec(&spec, search)?.0;
            let a = adapter(&iut_a, &spec, fuel)?;
            let b = adapter(&iut_b, &spec, fuel)?;
            let report = obs_equiv(&a, &b, &spec, bound)?;
            if report.equivalent() {
                let _ = writeln!(out, "observationally equivalent at bound {bound} ({} terms)", report.checked);
                return Ok(EXIT_OK);
            }
            let _ = writeln!(
                out,
                "{} disagreements among {} terms at bound {bound}",
                report.disagreements.len(),
                report.checked
            );
            for d in &report.disagreements {
                let _ = writeln!(out, "  {d}");
            }
            Ok(EXIT_FAILURES)
        }
    }
}

/// A file path, or failing that the name of a bundled specification.
fn load_spec(arg: &str, search: &[PathBuf]) -> Result<(Specification, Option<String>), Exit> {
    let path = Path::new(arg);
    if path.is_file() {
        return Ok((parse_spec_file(path, search)?, Some(arg.to_string())));
    }
    let wanted: String = arg.trim_end_matches(".spec").chars().filter(|c| *c != '_').collect();
    let name = catalog::BUILTIN
        .iter()
        .map(|(n, _)| *n)
        .find(|n| n.eq_ignore_ascii_case(&wanted));
    match name {
        Some(n) => Ok((catalog::load(n)?, None)),
        None => Err(usage(format!("{arg}: no such file or bundled specification"))),
    }
}

fn with_observable(spec: Specification, names: Option<&[String]>) -> Result<Specification, Exit> {
    let Some(names) = names else { return Ok(spec) };
    let mut sorts = Vec::new();
    for n in names {
        let s = spec
            .signature
            .sort(n)
            .ok_or_else(|| usage(format!("unknown observable sort `{n}`")))?;
        sorts.push(s.clone());
    }
    Ok(spec.with_observable(sorts.iter()))
}

fn adapter(desc: &str, spec: &Specification, steps: usize) -> Result<IutAdapter, Exit> {
    adapter_with_timeout(desc, spec, steps, Duration::from_secs(10))
}

fn adapter_with_timeout(desc: &str, spec: &Specification, steps: usize, timeout: Duration) -> Result<IutAdapter, Exit> {
    let fuel = Fuel::steps(steps);
    if desc == "reference" {
        return Ok(IutAdapter::Reference { spec: spec.clone(), fuel });
    }
    if let Some(id) = desc.strip_prefix("mutant:") {
        let mutation = match Mutation::builtin(id) {
            Some(m) => m,
            None if Path::new(id).is_file() => Mutation::from_file(Path::new(id))?,
            None => return Err(usage(format!("unknown mutant `{id}`"))),
        };
        return Ok(IutAdapter::Mutant {
            spec: spec.clone(),
            mutation,
            fuel,
        });
    }
    if let Some(cmd) = desc.strip_prefix("exec:") {
        return Ok(IutAdapter::External {
            command: cmd.to_string(),
            handshake_timeout: Duration::from_secs(5),
            eval_timeout: timeout,
        });
    }
    Err(usage(format!("bad --iut `{desc}`: expected reference, mutant:ID or exec:COMMAND")))
}

fn check(spec: &Specification, bound: usize, steps: usize, out: &mut dyn Write) -> Result<i32, Exit> {
    let fuel = Fuel::steps(steps);
    let mut clean = true;
    let sig = &spec.signature;
    let observable: Vec<&str> = sig.observable.iter().map(|s| s.name()).collect();
    let _ = writeln!(
        out,
        "spec {}: {} sorts, {} operations, {} axioms; observable: {}",
        spec.name,
        sig.sorts.len(),
        sig.ops.len(),
        spec.axioms.len(),
        observable.join(", ")
    );
    let defects = validate_signature(sig);
    if defects.is_empty() {
        let _ = writeln!(out, "signature: ok");
    } else {
        clean = false;
        let _ = writeln!(out, "signature: {} defects", defects.len());
        for d in &defects {
            let _ = writeln!(out, "  {d}");
        }
    }
    let crs = orient(spec);
    if crs.defects.is_empty() {
        let _ = writeln!(out, "orientation: {} rules, ok", crs.rules.len());
    } else {
        clean = false;
        let _ = writeln!(out, "orientation: {} defects", crs.defects.len());
        for d in &crs.defects {
            let _ = writeln!(out, "  {d}");
        }
    }
    let completeness = check_constructor_completeness(spec, bound, fuel);
    if completeness.is_complete() {
        let _ = writeln!(
            out,
            "constructor completeness (bound {bound}): ok, {} terms",
            completeness.checked
        );
    } else {
        clean = false;
        let _ = writeln!(out, "constructor completeness (bound {bound}): incomplete");
        for w in &completeness.condition1_witnesses {
            let _ = writeln!(out, "  {w}");
        }
        for w in &completeness.condition2_witnesses {
            let _ = writeln!(out, "  {w}");
        }
    }
    let confluence = check_ground_confluence(spec, bound, fuel);
    if confluence.is_confluent() {
        let _ = writeln!(out, "ground confluence (bound {bound}): ok, {} terms", confluence.checked);
    } else {
        clean = false;
        let _ = writeln!(
            out,
            "ground confluence (bound {bound}): {} discrepancies",
            confluence.discrepancies.len()
        );
        for d in &confluence.discrepancies {
            let _ = writeln!(out, "  {d}");
        }
    }
    Ok(if clean { EXIT_OK } else { EXIT_FAILURES })
}

fn gen(args: GenArgs, search: &[PathBuf], out: &mut dyn Write) -> Result<i32, Exit> {
    let (spec, path) = load_spec(&args.spec, search)?;
    let spec = with_observable(spec, args.observable.as_deref())?;
    let hyp = Hypotheses {
        unfold_depth: args.depth,
        regularity_bound: args.bound,
        representatives_per_subdomain: args.reps,
        seed: args.seed,
        strategy: args.strategy,
        fuel: Fuel::steps(args.fuel),
        keep_tautologies: args.keep_tautologies,
    };
    let mut suite = if args.normal_form {
        hyp.validate().map_err(usage)?;
        let mut s = normal_form_tests_with(&spec, args.bound, hyp.fuel, args.keep_tautologies);
        s.hypotheses = hyp;
        s
    } else if args.observable_mode {
        let plan = ObservationPlan {
            context_depth: args.ctx_depth,
            contexts_per_test: args.ctx_per_test,
            parameter_bound: args.param_bound,
        };
        generate_observational(&spec, &hyp, &plan).map_err(usage)?
    } else {
        let mut s = generate(&spec, &hyp).map_err(usage)?;
        if args.observable.is_some() {
            s.observable = Some(spec.signature.observable.iter().map(|s| s.name().to_string()).collect());
        }
        s
    };
    suite.spec_path = path;
    let json = suite.to_json();
    match &args.output {
        Some(p) => {
            std::fs::write(p, &json).map_err(|e| io(p, e))?;
            let _ = writeln!(
                out,
                "{}: {} tests, {} skipped",
                p.display(),
                suite.tests.len(),
                suite.skipped.len()
            );
        }
        None => {
            let _ = out.write_all(json.as_bytes());
        }
    }
    Ok(EXIT_OK)
}

struct RunOpts {
    jobs: usize,
    output: Option<PathBuf>,
    spec: Option<String>,
    steps: usize,
    timings: bool,
    timeout: Duration,
}

fn run_cmd(
    suite_path: &Path,
    iut: &str,
    opts: &RunOpts,
    search: &[PathBuf],
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, Exit> {
    let text = std::fs::read_to_string(suite_path).map_err(|e| io(suite_path, e))?;
    let header = suite_header(&text).map_err(usage)?;
    let spec_src = match &opts.spec {
        Some(s) => s.clone(),
        None => match &header.path {
            Some(p) if Path::new(p).is_file() => p.clone(),
            Some(p) => {
                // recorded relative to where gen ran; try beside the suite too
                let beside = suite_path.parent().unwrap_or(Path::new(".")).join(p);
                if beside.is_file() {
                    beside.to_string_lossy().into_owned()
                } else {
                    header.name.clone()
                }
            }
            None => header.name.clone(),
        },
    };
    let spec = load_spec(&spec_src, search)?.0;
    let suite = TestSuite::from_json(&text, &spec).map_err(usage)?;
    let spec = match &suite.observable {
        Some(obs) => with_observable(spec, Some(obs))?,
        None => spec,
    };
    let adapter = adapter_with_timeout(iut, &spec, opts.steps, opts.timeout)?;
    let report = run_suite(&adapter, &spec.signature, &suite, opts.jobs)?;
    for r in report.failures() {
        let _ = writeln!(out, "{} {}: {}", r.test.id, r.test.equation, r.verdict);
    }
    let s = &report.summary;
    let _ = writeln!(
        out,
        "{} tests: {} pass, {} fail, {} error, {} inconclusive",
        s.total, s.pass, s.fail, s.error, s.inconclusive
    );
    if let Some(p) = &opts.output {
        std::fs::write(p, report.to_json(opts.timings)).map_err(|e| io(p, e))?;
    }
    if report.protocol_faults() > 0 {
        let _ = writeln!(err, "{} protocol faults", report.protocol_faults());
        return Ok(EXIT_PROTOCOL);
    }
    Ok(if s.all_pass { EXIT_OK } else { EXIT_FAILURES })
}
