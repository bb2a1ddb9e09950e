//! Claim registry, runner and reports.

mod claims;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Model;

pub use claims::{miura_from_factorization, Claim, Procedure, Residual, CLAIMS, EXPLORATORY};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Verified,
    Failed,
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub claim: String,
    pub status: Status,
    pub nonzero_residuals: usize,
    /// Printed nonzero residuals of a failed claim.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub residuals: Vec<String>,
    pub millis: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

impl Report {
    /// Same report with the timing field cleared, for comparisons.
    pub fn untimed(&self) -> Report {
        Report {
            millis: 0,
            ..self.clone()
        }
    }
}

pub fn find_claim(id: &str) -> Result<&'static Claim> {
    CLAIMS
        .iter()
        .chain(EXPLORATORY.iter())
        .find(|c| c.id.eq_ignore_ascii_case(id))
        .ok_or_else(|| Error::UnknownClaim(id.to_string()))
}

pub fn run(claim: &Claim, model: &Model) -> Report {
    let start = Instant::now();
    let outcome = (claim.procedure)(model);
    let millis = start.elapsed().as_millis() as u64;
    match outcome {
        Ok(residuals) => {
            let bad: Vec<String> = residuals
                .iter()
                .filter(|r| !r.value.is_zero())
                .map(|r| format!("{}: {}", r.label, r.value))
                .collect();
            Report {
                claim: claim.id.to_string(),
                status: if bad.is_empty() {
                    Status::Verified
                } else {
                    Status::Failed
                },
                nonzero_residuals: bad.len(),
                residuals: bad,
                millis,
                error: None,
            }
        }
        Err(e) => Report {
            claim: claim.id.to_string(),
            status: Status::Error,
            nonzero_residuals: 0,
            residuals: Vec::new(),
            millis,
            error: Some(e.to_string()),
        },
    }
}

pub fn run_claim(id: &str, model: &Model) -> Result<Report> {
    Ok(run(find_claim(id)?, model))
}

/// Runs the given claims, optionally on a worker pool of `threads`
/// threads; output is in the order given.
pub fn run_many(claims: &[&Claim], model: &Model, threads: usize) -> Vec<Report> {
    if threads <= 1 || claims.len() <= 1 {
        return claims.iter().map(|c| run(c, model)).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool");
    pool.install(|| claims.par_iter().map(|c| run(c, model)).collect())
}

/// All registered claims in id order.
pub fn run_all(model: &Model, parallel: bool) -> Vec<Report> {
    let claims: Vec<&Claim> = CLAIMS.iter().collect();
    let threads = if parallel {
        std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
    } else {
        1
    };
    run_many(&claims, model, threads)
}
