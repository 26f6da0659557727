use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use evp_core::boundedness::{classify, HLower};
use evp_core::lp::{Backend, DEFAULT_TOLERANCE};
use evp_core::rational::{format_rational, format_vector, from_f64, parse_vector, to_f64, Rat};
use evp_core::scalarization::ExtendedReal;
use serde_json::{json, Value};

use crate::certificate::{certificate_json, checks_json, load_certificate};
use crate::error::{exit, CliError};
use crate::problem::ProblemFile;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendChoice {
    Exact,
    Float,
}

impl BackendChoice {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        match text.trim().to_ascii_lowercase().as_str() {
            "exact" => Ok(BackendChoice::Exact),
            "float" => Ok(BackendChoice::Float),
            other => Err(CliError::input(format!("unknown backend {other:?} (expected exact or float)"))),
        }
    }
}

/// Options shared by every command. Command-line values win over the
/// environment, which wins over the problem file.
#[derive(Debug, Clone, Default)]
pub struct Settings {
    pub backend: Option<BackendChoice>,
    pub env_backend: Option<String>,
    pub tol: Option<Rat>,
    pub t_max: Option<Rat>,
    pub json: bool,
}

impl Settings {
    fn tolerance(&self, file: &ProblemFile) -> Rat {
        self.tol
            .clone()
            .or_else(|| file.tolerance.as_ref().map(|t| t.0.clone()))
            .unwrap_or_else(|| from_f64(DEFAULT_TOLERANCE).expect("finite"))
    }

    pub fn backend(&self, file: &ProblemFile) -> Result<Backend, CliError> {
        let choice = match (self.backend, &self.env_backend) {
            (Some(b), _) => b,
            (None, Some(env)) if !env.trim().is_empty() => BackendChoice::parse(env)?,
            _ => BackendChoice::Exact,
        };
        Ok(match choice {
            BackendChoice::Exact => Backend::Exact,
            BackendChoice::Float => Backend::Float { tol: to_f64(&self.tolerance(file)) },
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome { code: exit::OK, stdout, stderr: String::new() }
    }
}

impl From<CliError> for Outcome {
    fn from(e: CliError) -> Self {
        Outcome { code: e.exit_code(), stdout: String::new(), stderr: format!("error: {e}\n") }
    }
}

fn to_outcome(result: Result<Outcome, CliError>) -> Outcome {
    result.unwrap_or_else(Outcome::from)
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn rat_json(r: &Rat) -> Value {
    Value::String(format_rational(r))
}

fn extended_json(v: &ExtendedReal) -> Value {
    Value::String(v.to_string())
}

pub fn scalarize(path: &Path, point: &str, settings: &Settings) -> Outcome {
    to_outcome((|| {
        let file = ProblemFile::load(path)?;
        let y = parse_vector(point).map_err(|e| CliError::input(format!("--point: {e}")))?;
        if y.len() != file.dimension {
            return Err(CliError::input(format!(
                "--point has {} coordinates, the problem has dimension {}",
                y.len(),
                file.dimension
            )));
        }
        let mut phi = file.functional()?.with_backend(settings.backend(&file)?);
        if let Some(t) = &settings.tol {
            phi = phi.with_tolerance(t.clone())?;
        }
        if let Some(t) = &settings.t_max {
            phi = phi.with_t_max(t.clone())?;
        }

        let value = phi.evaluate(&y)?;
        let bisection = phi.evaluate_bisection(&y)?;
        let slack = phi.tolerance() + from_f64(1e-6).expect("finite");
        let agree = match (&value, &bisection.value) {
            (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => {
                let d = a - b;
                (if d < Rat::from_integer(0.into()) { -d } else { d }) <= slack
            }
            (ExtendedReal::PlusInfinity, ExtendedReal::PlusInfinity) => true,
            _ => false,
        };
        let attained = if value.is_finite() { Some(phi.attainment_check(&y)?) } else { None };

        let mut out = if settings.json {
            pretty(&json!({
                "point": y.iter().map(rat_json).collect::<Vec<_>>(),
                "phi": extended_json(&value),
                "bisection": extended_json(&bisection.value),
                "unconfirmed": bisection.unconfirmed,
                "agree": agree,
                "attained": attained,
            }))
        } else {
            let mut s = format!("phi = {value}\n");
            s.push_str(&format!(
                "bisection = {}{}\n",
                bisection.value,
                if bisection.unconfirmed { " (unconfirmed: no feasible t up to T_max)" } else { "" }
            ));
            s.push_str(&format!("agree = {agree}\n"));
            if let Some(a) = attained {
                s.push_str(&format!("attained = {a}\n"));
            }
            s
        };
        if !agree || attained == Some(false) {
            let mut o = Outcome::ok(std::mem::take(&mut out));
            o.code = exit::INTERNAL;
            o.stderr = "error: internal error: the LP value and the bisection oracle disagree, or the value is not attained\n".into();
            return Ok(o);
        }
        Ok(Outcome::ok(out))
    })())
}

pub fn diagnose(path: &Path, settings: &Settings) -> Outcome {
    to_outcome((|| {
        let file = ProblemFile::load(path)?;
        let (union, candidates) = file.ranges()?;
        let report = classify(&union, &file.cone()?, &file.polytope()?, &candidates, settings.backend(&file)?)?;

        let out = if settings.json {
            let h_lower = match &report.h_lower {
                HLower::Witness(c) => json!({
                    "status": "witness",
                    "y0": c.y0.iter().map(rat_json).collect::<Vec<_>>(),
                    "epsilon": rat_json(&c.epsilon),
                }),
                HLower::Unknown => json!({"status": "unknown"}),
            };
            pretty(&json!({
                "k_lower": report.k_lower.is_some(),
                "k_lower_bound": report.k_lower.as_ref().map(|b| b.iter().map(rat_json).collect::<Vec<_>>()),
                "quasi_k_lower": report.quasi_k_lower,
                "kstar": report.kstar.as_ref().map(|k| k.iter().map(rat_json).collect::<Vec<_>>()),
                "h_lower": h_lower,
                "ladder_consistent": report.ladder_consistent,
            }))
        } else {
            let mut s = String::new();
            match &report.k_lower {
                Some(b) => s.push_str(&format!("k_lower = true (M ⊂ {} + K)\n", format_vector(b))),
                None => s.push_str("k_lower = false\n"),
            }
            s.push_str(&format!("quasi_k_lower = {}\n", report.quasi_k_lower));
            match &report.kstar {
                Some(k) => s.push_str(&format!("kstar = {}\n", format_vector(k))),
                None => s.push_str("kstar = none\n"),
            }
            match &report.h_lower {
                HLower::Witness(c) => s.push_str(&format!(
                    "h_lower = witness y0={} epsilon={}\n",
                    format_vector(&c.y0),
                    format_rational(&c.epsilon)
                )),
                HLower::Unknown => s.push_str("h_lower = unknown (no candidate separated)\n"),
            }
            s.push_str(&format!("ladder_consistent = {}\n", report.ladder_consistent));
            s
        };
        if !report.ladder_consistent {
            return Err(CliError::Internal(format!("boundedness flags violate the implication chain\n{out}")));
        }
        Ok(Outcome::ok(out))
    })())
}

pub fn solve(path: &Path, certificate: Option<&Path>, settings: &Settings) -> Outcome {
    to_outcome((|| {
        let file = ProblemFile::load(path)?;
        let problem = file.evp()?.with_backend(settings.backend(&file)?);
        let mut stderr: String = problem.warnings().iter().map(|w| format!("warning: {w}\n")).collect();

        let cert = problem.solve()?;
        let report = problem.verify_certificate(&cert)?;
        let steps = problem.descent_steps(&cert)?;
        let bad_steps: Vec<String> = steps
            .iter()
            .filter(|s| !s.holds)
            .map(|s| format!("descent {} -> {}: {} - {} < {}", s.from, s.to, s.from_value, s.to_value, format_rational(&s.required)))
            .collect();
        if !report.passed() || !bad_steps.is_empty() {
            let mut details = report.failures.clone();
            details.extend(bad_steps);
            return Err(CliError::SelfCheck(details.join("; ")));
        }

        let doc = certificate_json(&cert, problem.mode(), &report);
        if let Some(out) = certificate {
            std::fs::write(out, pretty(&doc))
                .map_err(|e| CliError::input(format!("cannot write {}: {e}", out.display())))?;
        }
        let stdout = if settings.json {
            pretty(&doc)
        } else {
            let mut s = format!("xbar = {}\n", cert.xbar);
            s.push_str(&format!("y0 = {}\n", format_vector(&cert.y0)));
            s.push_str(&format!("chain = {}\n", cert.chain.join(" -> ")));
            let trace: Vec<String> = cert.xi_trace.iter().map(|v| v.to_string()).collect();
            s.push_str(&format!("xi_trace = {}\n", trace.join(", ")));
            s.push_str(&checks_line(&report));
            if let Some(out) = certificate {
                s.push_str(&format!("certificate written to {}\n", out.display()));
            }
            s
        };
        if let (Some(out), true) = (certificate, settings.json) {
            stderr.push_str(&format!("certificate written to {}\n", out.display()));
        }
        Ok(Outcome { code: exit::OK, stdout, stderr })
    })())
}

fn checks_line(report: &evp_core::evp::VerificationReport) -> String {
    let word = |b: bool| if b { "pass" } else { "FAIL" };
    let mut s = format!("checks: (a) {}, (b) {}", word(report.a), word(report.b));
    if let Some(c) = report.c {
        s.push_str(&format!(", (c) {}", word(c)));
    }
    if let Some(t) = report.gap {
        s.push_str(&format!(", (gap) {}", word(t)));
    }
    s.push('\n');
    s
}

pub fn verify(path: &Path, certificate: &Path, settings: &Settings) -> Outcome {
    to_outcome((|| {
        let file = ProblemFile::load(path)?;
        let problem = file.evp()?.with_backend(settings.backend(&file)?);
        let (cert, mode) = load_certificate(certificate)?;
        if &mode != problem.mode() {
            return Err(CliError::input("certificate mode does not match the problem file"));
        }
        let report = problem.verify_certificate(&cert)?;
        let passed = report.passed();
        let stdout = if settings.json {
            pretty(&json!({
                "passed": passed,
                "checks": checks_json(&report),
                "chain": report.chain,
                "y0_in_f_x0": report.y0_in_f_x0,
                "failures": report.failures,
            }))
        } else {
            let mut s = checks_line(&report);
            s.push_str(&format!("chain {}\n", if report.chain { "pass" } else { "FAIL" }));
            for f in &report.failures {
                s.push_str(&format!("failed {f}\n"));
            }
            s.push_str(if passed { "verified\n" } else { "verification failed\n" });
            s
        };
        Ok(Outcome { code: if passed { exit::OK } else { exit::VERIFY_FAILED }, stdout, stderr: String::new() })
    })())
}

/// Certificate path used by `solve --batch` and `verify --batch`.
pub fn batch_certificate_path(input: &Path) -> PathBuf {
    let mut name = input.as_os_str().to_owned();
    name.push(".cert.json");
    PathBuf::from(name)
}

/// Runs `job` over `inputs` on a small worker pool; results keep input order.
pub fn run_batch<F>(inputs: &[PathBuf], job: F) -> Vec<Outcome>
where
    F: Fn(&Path) -> Outcome + Sync,
{
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(inputs.len().max(1));
    let next = AtomicUsize::new(0);
    let results = Mutex::new(vec![Outcome::default(); inputs.len()]);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(input) = inputs.get(i) else { break };
                let outcome = job(input);
                results.lock().expect("no worker panics while holding the lock")[i] = outcome;
            });
        }
    });
    results.into_inner().expect("workers joined")
}
