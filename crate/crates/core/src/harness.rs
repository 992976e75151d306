//! Running suites against implementations under test.
//!
//! An implementation is reached through an [`IutAdapter`]: the reference
//! rewriting of the specification, a mutant of it, or an external process
//! speaking the line protocol below over its standard streams.
//!
//! ```text
//! -> HELLO axiomtest/1
//! <- OK <iut-name>
//! -> EVAL <term>
//! <- VALUE <ground constructor term> | OPAQUE | ERROR <message>
//! -> BYE
//! ```

use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::enumerate::TermEnumerator;
use crate::observe::ObservationPlan;
use crate::parser::parse_term;
use crate::rewrite::{EvalError, Evaluator, Fuel, Mutation};
use crate::select::{Hypotheses, TestCase, TestSuite};
use crate::term::{Signature, Specification, Term};

pub const PROTOCOL_VERSION: &str = "axiomtest/1";

/// Assumption recorded in every report: the implementation behaves as a
/// deterministic algebra reachable from the constructors, and its answers on
/// observable sorts can be compared as terms.
pub const TESTABILITY_ASSUMPTION: &str = "H_min: the implementation is deterministic, every value it computes is denoted by a ground constructor term, and values of observable sorts are compared syntactically as returned";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InconclusiveReason {
    Fuel,
    Protocol,
    OpaqueComparison,
}

impl fmt::Display for InconclusiveReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InconclusiveReason::Fuel => "fuel",
            InconclusiveReason::Protocol => "protocol",
            InconclusiveReason::OpaqueComparison => "opaque-comparison",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail { lhs_value: Term, rhs_value: Term },
    Error(String),
    Inconclusive(InconclusiveReason),
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Pass => f.write_str("pass"),
            Verdict::Fail { lhs_value, rhs_value } => write!(f, "fail: {lhs_value} /= {rhs_value}"),
            Verdict::Error(m) => write!(f, "error: {m}"),
            Verdict::Inconclusive(r) => write!(f, "inconclusive: {r}"),
        }
    }
}

/// What an implementation answered for one term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Reply {
    Value(Term),
    Opaque,
    Error(String),
    OutOfFuel,
    /// Unparseable or ill-sorted answer; the session stays usable.
    Malformed(String),
    /// Crash, EOF or timeout; the session is dead.
    Fault(String),
}

impl fmt::Display for Reply {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reply::Value(t) => write!(f, "{t}"),
            Reply::Opaque => f.write_str("OPAQUE"),
            Reply::Error(m) => write!(f, "ERROR {m}"),
            Reply::OutOfFuel => f.write_str("fuel exhausted"),
            Reply::Malformed(m) => write!(f, "malformed reply: {m}"),
            Reply::Fault(m) => write!(f, "protocol fault: {m}"),
        }
    }
}

#[derive(Clone, Debug)]
pub enum IutAdapter {
    Reference { spec: Specification, fuel: Fuel },
    Mutant { spec: Specification, mutation: Mutation, fuel: Fuel },
    External { command: String, handshake_timeout: Duration, eval_timeout: Duration },
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("handshake with `{command}` failed: {message}")]
    Handshake { command: String, message: String },
    #[error("cannot build mutant {id}: {message}")]
    Mutant { id: String, message: String },
}

impl IutAdapter {
    pub fn reference(spec: &Specification) -> Self {
        IutAdapter::Reference {
            spec: spec.clone(),
            fuel: Fuel::default(),
        }
    }

    pub fn mutant(spec: &Specification, id: &str) -> Option<Self> {
        Some(IutAdapter::Mutant {
            spec: spec.clone(),
            mutation: Mutation::builtin(id)?,
            fuel: Fuel::default(),
        })
    }

    pub fn external(command: &str) -> Self {
        IutAdapter::External {
            command: command.to_string(),
            handshake_timeout: Duration::from_secs(5),
            eval_timeout: Duration::from_secs(10),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            IutAdapter::Reference { .. } => "reference".into(),
            IutAdapter::Mutant { mutation, .. } => format!("mutant:{}", mutation.id),
            IutAdapter::External { command, .. } => format!("exec:{command}"),
        }
    }

    /// Opens a session; for external adapters this spawns the process and
    /// completes the handshake.
    pub fn connect(&self, sig: &Signature) -> Result<Session, HarnessError> {
        match self {
            IutAdapter::Reference { spec, fuel } => Ok(Session::Local {
                evaluator: Evaluator::new(spec, *fuel),
                name: "reference".into(),
            }),
            IutAdapter::Mutant { spec, mutation, fuel } => {
                let evaluator = Evaluator::mutant(spec, mutation, *fuel).map_err(|e| HarnessError::Mutant {
                    id: mutation.id.clone(),
                    message: e.to_string(),
                })?;
                Ok(Session::Local {
                    evaluator,
                    name: format!("mutant:{}", mutation.id),
                })
            }
            IutAdapter::External {
                command,
                handshake_timeout,
                eval_timeout,
            } => Ok(Session::External(Box::new(ExternalSession::start(
                command,
                *handshake_timeout,
                *eval_timeout,
                sig.clone(),
            )?))),
        }
    }
}

pub enum Session {
    Local { evaluator: Evaluator, name: String },
    External(Box<ExternalSession>),
}

impl Session {
    pub fn name(&self) -> &str {
        match self {
            Session::Local { name, .. } => name,
            Session::External(s) => &s.name,
        }
    }

    pub fn eval(&mut self, t: &Term) -> Reply {
        match self {
            Session::Local { evaluator, .. } => match evaluator.eval(t) {
                Ok(v) => Reply::Value(v),
                Err(EvalError::FuelExhausted(_)) => Reply::OutOfFuel,
                Err(e) => Reply::Error(e.to_string()),
            },
            Session::External(s) => s.eval(t),
        }
    }

    pub fn is_alive(&self) -> bool {
        match self {
            Session::Local { .. } => true,
            Session::External(s) => s.alive,
        }
    }
}

pub struct ExternalSession {
    pub name: String,
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<String>,
    eval_timeout: Duration,
    sig: Signature,
    alive: bool,
}

impl ExternalSession {
    fn start(command: &str, handshake_timeout: Duration, eval_timeout: Duration, sig: Signature) -> Result<Self, HarnessError> {
        let fail = |message: String| HarnessError::Handshake {
            command: command.to_string(),
            message,
        };
        let mut cmd = Command::new("sh");
        cmd.arg("-c")
            .arg(format!("exec {command}"))
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit());
        // own process group, so that whatever the shell starts can be killed
        #[cfg(unix)]
        std::os::unix::process::CommandExt::process_group(&mut cmd, 0);
        let mut child = cmd.spawn().map_err(|e| fail(e.to_string()))?;
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        std::thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let Ok(line) = line else { break };
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        let mut session = ExternalSession {
            name: String::new(),
            stdin: child.stdin.take(),
            child,
            lines: rx,
            eval_timeout,
            sig,
            alive: true,
        };
        let reply = session
            .request(&format!("HELLO {PROTOCOL_VERSION}"), handshake_timeout)
            .map_err(fail)?;
        match reply.strip_prefix("OK") {
            Some(rest) if rest.is_empty() || rest.starts_with(' ') => {
                session.name = rest.trim().to_string();
                Ok(session)
            }
            _ => {
                session.alive = false;
                Err(fail(format!("expected `OK <name>`, got `{reply}`")))
            }
        }
    }

    fn request(&mut self, line: &str, timeout: Duration) -> Result<String, String> {
        let stdin = self.stdin.as_mut().ok_or("session closed")?;
        if let Err(e) = writeln!(stdin, "{line}").and_then(|_| stdin.flush()) {
            self.alive = false;
            return Err(format!("write failed: {e}"));
        }
        match self.lines.recv_timeout(timeout) {
            Ok(reply) => Ok(reply.trim_end_matches('\r').to_string()),
            Err(RecvTimeoutError::Timeout) => {
                self.alive = false;
                Err(format!("no reply within {} ms", timeout.as_millis()))
            }
            Err(RecvTimeoutError::Disconnected) => {
                self.alive = false;
                Err("implementation closed its output".into())
            }
        }
    }

    fn eval(&mut self, t: &Term) -> Reply {
        if !self.alive {
            return Reply::Fault("session is dead".into());
        }
        let reply = match self.request(&format!("EVAL {t}"), self.eval_timeout) {
            Ok(r) => r,
            Err(e) => return Reply::Fault(e),
        };
        if reply == "OPAQUE" {
            return Reply::Opaque;
        }
        if let Some(msg) = reply.strip_prefix("ERROR") {
            return Reply::Error(msg.trim().to_string());
        }
        let Some(value) = reply.strip_prefix("VALUE ") else {
            return Reply::Malformed(reply);
        };
        match parse_term(value, &self.sig) {
            Ok(v) if v.is_constructor_term() && v.sort() == t.sort() => Reply::Value(v),
            Ok(v) => Reply::Malformed(format!("`{v}` is not a ground constructor term of sort {}", t.sort())),
            Err(e) => Reply::Malformed(format!("`{value}`: {e}")),
        }
    }
}

impl Drop for ExternalSession {
    fn drop(&mut self) {
        if self.alive {
            if let Some(stdin) = self.stdin.as_mut() {
                let _ = writeln!(stdin, "BYE").and_then(|_| stdin.flush());
            }
        }
        self.stdin = None;
        let deadline = Instant::now() + Duration::from_millis(500);
        while Instant::now() < deadline {
            if let Ok(Some(_)) = self.child.try_wait() {
                return;
            }
            std::thread::sleep(Duration::from_millis(5));
        }
        #[cfg(unix)]
        let _ = Command::new("kill")
            .args(["-KILL", "--", &format!("-{}", self.child.id())])
            .stderr(Stdio::null())
            .status();
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// Verdict from the two replies; a dead session is reported so the caller
/// can reconnect.
pub fn judge(lhs: Reply, rhs: Reply) -> (Verdict, bool) {
    use Reply::*;
    match (lhs, rhs) {
        (Fault(m), _) | (_, Fault(m)) => (Verdict::Error(format!("protocol fault: {m}")), true),
        (Error(m), _) | (_, Error(m)) => (Verdict::Error(m), false),
        (Malformed(_), _) | (_, Malformed(_)) => (Verdict::Inconclusive(InconclusiveReason::Protocol), false),
        (OutOfFuel, _) | (_, OutOfFuel) => (Verdict::Inconclusive(InconclusiveReason::Fuel), false),
        (Opaque, _) | (_, Opaque) => (Verdict::Inconclusive(InconclusiveReason::OpaqueComparison), false),
        (Value(l), Value(r)) if l == r => (Verdict::Pass, false),
        (Value(l), Value(r)) => (
            Verdict::Fail {
                lhs_value: l,
                rhs_value: r,
            },
            false,
        ),
    }
}

fn run_in_session(session: &mut Session, tc: &TestCase) -> (Verdict, bool) {
    let l = session.eval(&tc.equation.lhs);
    if matches!(l, Reply::Fault(_)) {
        return judge(l, Reply::Opaque);
    }
    let r = session.eval(&tc.equation.rhs);
    judge(l, r)
}

/// Evaluates both sides of `tc` in a fresh session.
pub fn run_test(adapter: &IutAdapter, sig: &Signature, tc: &TestCase) -> Verdict {
    match adapter.connect(sig) {
        Ok(mut s) => run_in_session(&mut s, tc).0,
        Err(e) => Verdict::Error(e.to_string()),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TestResult {
    pub test: TestCase,
    pub verdict: Verdict,
    pub protocol_fault: bool,
    pub ms: u64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub pass: usize,
    pub fail: usize,
    pub error: usize,
    pub inconclusive: usize,
    pub all_pass: bool,
}

impl Summary {
    fn of(results: &[TestResult]) -> Summary {
        let mut s = Summary {
            total: results.len(),
            ..Summary::default()
        };
        for r in results {
            match r.verdict {
                Verdict::Pass => s.pass += 1,
                Verdict::Fail { .. } => s.fail += 1,
                Verdict::Error(_) => s.error += 1,
                Verdict::Inconclusive(_) => s.inconclusive += 1,
            }
        }
        s.all_pass = s.pass == s.total;
        s
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunReport {
    pub suite_hash: String,
    pub spec_name: String,
    pub iut: String,
    pub iut_name: String,
    pub results: Vec<TestResult>,
    pub summary: Summary,
    pub hypotheses: Hypotheses,
    pub plan: Option<ObservationPlan>,
    pub assumptions: Vec<String>,
}

impl RunReport {
    /// Dead sessions plus malformed replies.
    pub fn protocol_faults(&self) -> usize {
        self.results
            .iter()
            .filter(|r| r.protocol_fault || r.verdict == Verdict::Inconclusive(InconclusiveReason::Protocol))
            .count()
    }

    pub fn failures(&self) -> impl Iterator<Item = &TestResult> {
        self.results.iter().filter(|r| !r.verdict.is_pass())
    }

    /// Report JSON; `timings = false` zeroes the wall times so two reports
    /// can be compared byte for byte.
    pub fn to_json(&self, timings: bool) -> String {
        let file = ReportFile {
            suite: SuiteRef {
                spec: self.spec_name.clone(),
                sha256: self.suite_hash.clone(),
            },
            iut: self.iut.clone(),
            iut_name: self.iut_name.clone(),
            assumptions: self.assumptions.clone(),
            hypotheses: self.hypotheses.clone(),
            plan: self.plan.clone(),
            summary: self.summary,
            results: self
                .results
                .iter()
                .map(|r| {
                    let (verdict, detail, lhs_value, rhs_value) = match &r.verdict {
                        Verdict::Pass => ("pass", None, None, None),
                        Verdict::Fail { lhs_value, rhs_value } => {
                            ("fail", None, Some(lhs_value.to_string()), Some(rhs_value.to_string()))
                        }
                        Verdict::Error(m) => ("error", Some(m.clone()), None, None),
                        Verdict::Inconclusive(why) => ("inconclusive", Some(why.to_string()), None, None),
                    };
                    ResultEntry {
                        id: r.test.id.clone(),
                        sort: r.test.sort().to_string(),
                        lhs: r.test.equation.lhs.to_string(),
                        rhs: r.test.equation.rhs.to_string(),
                        axiom: r.test.source_axiom.clone(),
                        subdomain: r.test.subdomain_id.clone(),
                        context: r.test.applied_context.clone(),
                        verdict: verdict.to_string(),
                        detail,
                        lhs_value,
                        rhs_value,
                        ms: if timings { r.ms } else { 0 },
                    }
                })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("report serializes");
        s.push('\n');
        s
    }
}

#[derive(Serialize)]
struct SuiteRef {
    spec: String,
    sha256: String,
}

#[derive(Serialize)]
struct ReportFile {
    suite: SuiteRef,
    iut: String,
    iut_name: String,
    assumptions: Vec<String>,
    hypotheses: Hypotheses,
    plan: Option<ObservationPlan>,
    summary: Summary,
    results: Vec<ResultEntry>,
}

#[derive(Serialize)]
struct ResultEntry {
    id: String,
    sort: String,
    lhs: String,
    rhs: String,
    axiom: String,
    subdomain: String,
    context: Option<String>,
    verdict: String,
    detail: Option<String>,
    lhs_value: Option<String>,
    rhs_value: Option<String>,
    ms: u64,
}

/// Runs every test of `suite`, each worker with its own session. Results
/// come back in suite order whatever the parallelism.
pub fn run_suite(adapter: &IutAdapter, sig: &Signature, suite: &TestSuite, parallelism: usize) -> Result<RunReport, HarnessError> {
    let workers = parallelism.max(1).min(suite.tests.len().max(1));
    let mut sessions = Vec::with_capacity(workers);
    for _ in 0..workers {
        sessions.push(adapter.connect(sig)?);
    }
    let iut_name = sessions[0].name().to_string();
    let slots: Vec<Mutex<Option<TestResult>>> = suite.tests.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for mut session in sessions {
            let (slots, next) = (&slots, &next);
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(tc) = suite.tests.get(i) else { break };
                if !session.is_alive() {
                    if let Ok(fresh) = adapter.connect(sig) {
                        session = fresh;
                    }
                }
                let start = Instant::now();
                let (verdict, protocol_fault) = run_in_session(&mut session, tc);
                *slots[i].lock().unwrap() = Some(TestResult {
                    test: tc.clone(),
                    verdict,
                    protocol_fault,
                    ms: start.elapsed().as_millis() as u64,
                });
            });
        }
    });
    let results: Vec<TestResult> = slots
        .into_iter()
        .map(|m| m.into_inner().unwrap().expect("every test ran"))
        .collect();
    Ok(RunReport {
        suite_hash: hex::encode(Sha256::digest(suite.to_json().as_bytes())),
        spec_name: suite.spec_name.clone(),
        iut: adapter.describe(),
        iut_name,
        summary: Summary::of(&results),
        results,
        hypotheses: suite.hypotheses.clone(),
        plan: suite.plan.clone(),
        assumptions: vec![TESTABILITY_ASSUMPTION.to_string()],
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Disagreement {
    pub term: Term,
    pub a: Reply,
    pub b: Reply,
}

impl fmt::Display for Disagreement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} vs {}", self.term, self.a, self.b)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ObsEquivReport {
    pub checked: usize,
    pub disagreements: Vec<Disagreement>,
}

impl ObsEquivReport {
    pub fn equivalent(&self) -> bool {
        self.disagreements.is_empty()
    }
}

/// Compares the two implementations on every ground term of observable sort
/// with at most `size_bound` nodes.
pub fn obs_equiv(a: &IutAdapter, b: &IutAdapter, spec: &Specification, size_bound: usize) -> Result<ObsEquivReport, HarnessError> {
    let sig = &spec.signature;
    let mut sa = a.connect(sig)?;
    let mut sb = b.connect(sig)?;
    let mut report = ObsEquivReport::default();
    let mut en = TermEnumerator::new(sig, usize::MAX);
    for sort in sig.sorts.iter().filter(|s| sig.is_observable(s)) {
        for t in en.up_to(sort, size_bound) {
            report.checked += 1;
            if !sa.is_alive() {
                sa = a.connect(sig)?;
            }
            if !sb.is_alive() {
                sb = b.connect(sig)?;
            }
            let (ra, rb) = (sa.eval(&t), sb.eval(&t));
            let agree = matches!((&ra, &rb), (Reply::Value(x), Reply::Value(y)) if x == y);
            if !agree {
                report.disagreements.push(Disagreement { term: t, a: ra, b: rb });
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::select::{generate, Hypotheses};
    use crate::term::Equation;

    fn case(spec: &Specification, l: &str, r: &str) -> TestCase {
        let sig = &spec.signature;
        TestCase {
            id: "t".into(),
            equation: Equation::new(parse_term(l, sig).unwrap(), parse_term(r, sig).unwrap()).unwrap(),
            subdomain_id: "s".into(),
            source_axiom: "a".into(),
            instantiation: Default::default(),
            premises: vec![],
            applied_context: None,
        }
    }

    #[test]
    fn verdicts() {
        let spec = catalog::containers();
        let sig = &spec.signature;
        let reference = IutAdapter::reference(&spec);
        assert_eq!(run_test(&reference, sig, &case(&spec, "isin(0, [])", "false")), Verdict::Pass);
        let m1 = IutAdapter::mutant(&spec, "M1").unwrap();
        let v = run_test(&m1, sig, &case(&spec, "remove(1, 0 :: [])", "0 :: remove(1, [])"));
        assert_eq!(v.to_string(), "fail: [] /= 0 :: []");
    }

    #[test]
    fn judge_precedence() {
        let t = Term::constant(&std::sync::Arc::new(crate::term::OpSymbol::new("a", &[], "S", true)));
        assert_eq!(judge(Reply::Opaque, Reply::Value(t.clone())).0, Verdict::Inconclusive(InconclusiveReason::OpaqueComparison));
        assert_eq!(judge(Reply::Malformed("?".into()), Reply::Opaque).0, Verdict::Inconclusive(InconclusiveReason::Protocol));
        assert!(judge(Reply::Value(t), Reply::Fault("eof".into())).1);
    }

    #[test]
    fn parallel_runs_agree() {
        let spec = catalog::containers();
        let hyp = Hypotheses {
            unfold_depth: 1,
            ..Hypotheses::default()
        };
        let suite = generate(&spec, &hyp).unwrap();
        let m2 = IutAdapter::mutant(&spec, "M3").unwrap();
        let one = run_suite(&m2, &spec.signature, &suite, 1).unwrap();
        let four = run_suite(&m2, &spec.signature, &suite, 4).unwrap();
        assert_eq!(one.to_json(false), four.to_json(false));
        assert!(!one.summary.all_pass);
    }

    #[test]
    fn empty_suite_passes() {
        let spec = catalog::containers();
        let suite = TestSuite::empty(&spec, Hypotheses::default());
        let r = run_suite(&IutAdapter::reference(&spec), &spec.signature, &suite, 3).unwrap();
        assert!(r.summary.all_pass);
        assert_eq!(r.summary.total, 0);
    }

    #[test]
    fn handshake_failure_is_reported() {
        let spec = catalog::containers();
        let bad = IutAdapter::External {
            command: "echo NOPE".into(),
            handshake_timeout: Duration::from_secs(2),
            eval_timeout: Duration::from_secs(2),
        };
        let suite = TestSuite::empty(&spec, Hypotheses::default());
        assert!(matches!(
            run_suite(&bad, &spec.signature, &suite, 1),
            Err(HarnessError::Handshake { .. })
        ));
    }
}
