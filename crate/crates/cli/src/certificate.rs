//! Certificate JSON. Keys are emitted in sorted order.

use std::path::Path;

use evp_core::evp::{EvpCertificate, Mode, VerificationReport};
use evp_core::rational::{format_rational, Rat};
use evp_core::scalarization::ExtendedReal;
use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::error::CliError;
use crate::problem::{mode_json, ModeEntry, Num};

fn extended_json(v: &ExtendedReal) -> Value {
    match v {
        ExtendedReal::Finite(r) => Value::String(format_rational(r)),
        ExtendedReal::PlusInfinity => Value::String("+inf".into()),
    }
}

pub fn checks_json(report: &VerificationReport) -> Value {
    let mut checks = Map::new();
    checks.insert("a".into(), json!(report.a));
    checks.insert("b".into(), json!(report.b));
    if let Some(c) = report.c {
        checks.insert("c".into(), json!(c));
    }
    if let Some(t) = report.gap {
        checks.insert("t66c".into(), json!(t));
    }
    Value::Object(checks)
}

pub fn certificate_json(cert: &EvpCertificate, mode: &Mode, report: &VerificationReport) -> Value {
    json!({
        "xbar": cert.xbar,
        "y0": cert.y0.iter().map(|r| Value::String(format_rational(r))).collect::<Vec<_>>(),
        "chain": cert.chain,
        "xi_trace": cert.xi_trace.iter().map(extended_json).collect::<Vec<_>>(),
        "mode": mode_json(mode),
        "checks": checks_json(report),
    })
}

#[derive(Debug, Clone, Deserialize)]
#[serde(try_from = "Value")]
struct Extended(ExtendedReal);

impl TryFrom<Value> for Extended {
    type Error = String;

    fn try_from(v: Value) -> Result<Self, Self::Error> {
        if v.as_str() == Some("+inf") {
            return Ok(Extended(ExtendedReal::PlusInfinity));
        }
        Num::try_from(v).map(|n| Extended(ExtendedReal::Finite(n.0)))
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CertificateFile {
    xbar: String,
    y0: Vec<Num>,
    chain: Vec<String>,
    #[serde(default)]
    xi_trace: Vec<Extended>,
    mode: ModeEntry,
    // recorded results are recomputed, never trusted
    #[serde(default)]
    #[allow(dead_code)]
    checks: Option<Value>,
}

/// Parses a certificate; the mode is returned for comparison with the problem.
pub fn parse_certificate(text: &str) -> Result<(EvpCertificate, Mode), CliError> {
    let file: CertificateFile =
        serde_json::from_str(text).map_err(|e| CliError::input(format!("certificate: {e}")))?;
    let mode = match file.mode {
        ModeEntry::Plain => Mode::Plain,
        ModeEntry::Scaled { epsilon, lambda } => Mode::Scaled { epsilon: epsilon.0, lambda: lambda.0 },
        ModeEntry::Efficiency { gamma, .. } => Mode::Efficiency { gamma: gamma.0 },
    };
    let cert = EvpCertificate {
        xbar: file.xbar,
        y0: file.y0.into_iter().map(|n| n.0).collect::<Vec<Rat>>(),
        chain: file.chain,
        xi_trace: file.xi_trace.into_iter().map(|e| e.0).collect(),
    };
    Ok((cert, mode))
}

pub fn load_certificate(path: &Path) -> Result<(EvpCertificate, Mode), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    parse_certificate(&text)
}
