//! Text and JSON rendering of reports.

use std::fmt::Write;

use clap::ValueEnum;

use crate::numoracle::NumReport;
use crate::verify::{Report, Status};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Json,
}

fn status_word(s: Status) -> &'static str {
    match s {
        Status::Verified => "verified",
        Status::Failed => "failed",
        Status::Error => "error",
    }
}

/// Exit code for a batch: 0 iff everything verified.
pub fn exit_code<'a>(statuses: impl IntoIterator<Item = &'a Status>) -> i32 {
    if statuses.into_iter().all(|s| *s == Status::Verified) {
        0
    } else {
        1
    }
}

pub fn emit_report(reports: &[Report], format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(reports).expect("reports serialise") + "\n",
        Format::Text => {
            let mut out = String::new();
            for r in reports {
                let _ = writeln!(
                    out,
                    "{:<4} {:<8} {} nonzero residual(s)  {} ms",
                    r.claim,
                    status_word(r.status),
                    r.nonzero_residuals,
                    r.millis
                );
                for line in &r.residuals {
                    let _ = writeln!(out, "    {line}");
                }
                if let Some(e) = &r.error {
                    let _ = writeln!(out, "    error: {e}");
                }
            }
            let ok = reports.iter().filter(|r| r.status == Status::Verified).count();
            let _ = writeln!(out, "{ok}/{} verified", reports.len());
            out
        }
    }
}

pub fn emit_numeric(reports: &[NumReport], format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(reports).expect("reports serialise") + "\n",
        Format::Text => {
            let mut out = String::new();
            for r in reports {
                let _ = write!(
                    out,
                    "{:<4} {:<8} max relative {:.2e}",
                    r.claim,
                    status_word(r.status),
                    r.max_relative
                );
                if !r.worst_entry.is_empty() {
                    let _ = write!(out, " at {} (seed {})", r.worst_entry, r.worst_seed);
                }
                let _ = writeln!(out, "  {} seed(s)  {} ms", r.seeds, r.millis);
                if let Some(e) = &r.error {
                    let _ = writeln!(out, "    error: {e}");
                }
            }
            let ok = reports.iter().filter(|r| r.status == Status::Verified).count();
            let _ = writeln!(out, "{ok}/{} verified", reports.len());
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_json_is_an_empty_array() {
        assert_eq!(emit_report(&[], Format::Json).trim(), "[]");
        assert_eq!(exit_code(std::iter::empty()), 0);
    }

    #[test]
    fn schema_fields() {
        let r = Report {
            claim: "C1".into(),
            status: Status::Failed,
            nonzero_residuals: 1,
            residuals: vec!["ZC[1,1]: u2".into()],
            millis: 3,
            error: None,
        };
        let v: serde_json::Value = serde_json::from_str(&emit_report(&[r], Format::Json)).unwrap();
        let o = &v[0];
        assert_eq!(o["status"], "failed");
        assert_eq!(o["nonzero_residuals"], 1);
        assert_eq!(o["residuals"][0], "ZC[1,1]: u2");
        assert!(o.get("error").is_none());
    }
}
