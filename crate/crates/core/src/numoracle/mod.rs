//! Floating-point cross-check on random periodic samples. Derivatives are
//! exact (trigonometric polynomials, Taylor coefficients), so tolerances
//! only absorb rounding.

mod claims;
mod eval;
mod sample;
mod series;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{Expr, Frame};
use crate::model::Model;
use crate::verify::Status;

pub use claims::{NumClaim, Prepared, NUM_CLAIMS};
pub use eval::{Env, Evaluator, PullEnv, XEnv, YEnv};
pub use sample::{sample_fields, sample_y_fields, FieldSample, GridSpec, Mode, TrigField, YSample};
pub use series::{Num, Series, SINGULAR};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleParams {
    /// First seed; seeds `seed..seed+seeds` are used.
    pub seed: u64,
    pub seeds: u64,
    pub kmax: u32,
    pub amplitude: f64,
    pub offsets: [f64; 3],
    pub grid: GridSpec,
    pub lambdas: Vec<f64>,
    pub tol: f64,
}

impl Default for OracleParams {
    fn default() -> Self {
        OracleParams {
            seed: 1,
            seeds: 10,
            kmax: 3,
            amplitude: 0.05,
            offsets: [0.0, 2.0, 2.0],
            grid: GridSpec::default(),
            lambdas: vec![1.0, -1.0, 2.0, -2.0, 0.5],
            tol: 1e-8,
        }
    }
}

/// Values of an atom-free x-frame expression at the grid points, for each
/// lambda sample if lambda occurs (lambda-major order).
pub fn eval_expr(e: &Expr, s: &FieldSample, g: &GridSpec, lambdas: &[f64]) -> Result<Vec<f64>> {
    if e.contains_atoms() {
        return Err(Error::NotNumeric(format!("formal antiderivative in {e}")));
    }
    if e.frame() == Some(Frame::Y) {
        return Err(Error::NotNumeric(format!("y-frame expression {e}; pull it back first")));
    }
    let ls: &[f64] = if e.gens().iter().any(|g| g.is_lambda()) {
        lambdas
    } else {
        &[1.0]
    };
    let mut out = Vec::with_capacity(ls.len() * g.n);
    for &l in ls {
        for x in g.points() {
            let env = XEnv::new(&s.u, None, x, l, 1);
            out.push(Evaluator::new(&env).eval(e)?.head().v);
        }
    }
    Ok(out)
}

/// Largest relative residual of one claim on one prepared sample, with the
/// entry where it occurs.
pub fn claim_residual(claim: &NumClaim, p: &Prepared, g: &GridSpec, lambdas: &[f64]) -> Result<(f64, String)> {
    let ls: &[f64] = if claim.uses_lambda { lambdas } else { &[1.0] };
    let mut worst = (0.0f64, String::new());
    for &l in ls {
        for x in g.points() {
            for (label, s) in (claim.procedure)(p, x, l)? {
                if s.is_empty() {
                    return Err(Error::NotNumeric(format!("series truncated in {label}")));
                }
                let r = s.relative();
                if r > worst.0 || worst.1.is_empty() {
                    worst = (r, label);
                }
            }
        }
    }
    Ok(worst)
}

fn prepare<'m>(model: &'m Model, s: &FieldSample) -> Result<Prepared<'m>> {
    Prepared::new(model, s.clone(), sample_y_fields(s.seed, s.kmax))
}

/// Max over entries, grid points and lambda samples of
/// `|value| / term magnitude`.
pub fn numeric_claim_residual(id: &str, model: &Model, s: &FieldSample, g: &GridSpec, lambdas: &[f64]) -> Result<f64> {
    let claim = claims::find(id)?;
    Ok(claim_residual(claim, &prepare(model, s)?, g, lambdas)?.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NumReport {
    pub claim: String,
    pub status: Status,
    pub max_relative: f64,
    pub worst_entry: String,
    pub worst_seed: u64,
    pub seeds: u64,
    pub millis: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

impl NumReport {
    pub fn untimed(&self) -> NumReport {
        NumReport {
            millis: 0,
            ..self.clone()
        }
    }
}

fn samples(params: &OracleParams) -> Result<Vec<FieldSample>> {
    (0..params.seeds)
        .map(|i| sample_fields(params.seed + i, params.kmax, params.amplitude, params.offsets))
        .collect()
}

fn check(claim: &NumClaim, prepared: &[Prepared], params: &OracleParams) -> NumReport {
    let start = Instant::now();
    let mut worst = (0.0f64, String::new(), params.seed);
    let mut error = None;
    for p in prepared {
        match claim_residual(claim, p, &params.grid, &params.lambdas) {
            Ok((r, label)) => {
                if r > worst.0 || worst.1.is_empty() {
                    worst = (r, label, p.sample.seed);
                }
            }
            Err(e) => {
                error = Some(format!("seed {}: {e}", p.sample.seed));
                break;
            }
        }
    }
    let status = if error.is_some() {
        Status::Error
    } else if worst.0 <= params.tol {
        Status::Verified
    } else {
        Status::Failed
    };
    NumReport {
        claim: claim.id.to_string(),
        status,
        max_relative: worst.0,
        worst_entry: worst.1,
        worst_seed: worst.2,
        seeds: params.seeds,
        millis: start.elapsed().as_millis() as u64,
        error,
    }
}

/// Numeric check of the given claims over all seeds, output in the order
/// given. Unknown ids fail before any work is done; a bad sample turns
/// every report into an error.
pub fn numcheck(ids: &[&str], model: &Model, params: &OracleParams, threads: usize) -> Result<Vec<NumReport>> {
    let claims: Vec<&NumClaim> = ids.iter().map(|id| claims::find(id)).collect::<Result<_>>()?;
    let prepared = match samples(params).and_then(|ss| ss.iter().map(|s| prepare(model, s)).collect::<Result<Vec<_>>>())
    {
        Ok(p) => p,
        Err(e) => {
            return Ok(claims
                .iter()
                .map(|c| NumReport {
                    claim: c.id.to_string(),
                    status: Status::Error,
                    max_relative: f64::NAN,
                    worst_entry: String::new(),
                    worst_seed: params.seed,
                    seeds: params.seeds,
                    millis: 0,
                    error: Some(e.to_string()),
                })
                .collect())
        }
    };
    if threads <= 1 || claims.len() <= 1 {
        return Ok(claims.iter().map(|c| check(c, &prepared, params)).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool");
    Ok(pool.install(|| claims.par_iter().map(|c| check(c, &prepared, params)).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Base;

    #[test]
    fn defining_relation_of_a() {
        let s = sample_fields(1, 3, 0.05, [0.0, 2.0, 2.0]).unwrap();
        let g = GridSpec::default();
        let a = Expr::a();
        let e = &(&a * &a) - &(&Expr::jet(Base::M2, 0) * &Expr::jet(Base::M3, 0));
        // canonically zero already; evaluate the unreduced pieces instead
        assert!(eval_expr(&e, &s, &g, &[1.0]).unwrap().iter().all(|v| v.abs() < 1e-12));
        let m2m3 = eval_expr(&(&Expr::jet(Base::M2, 0) * &Expr::jet(Base::M3, 0)), &s, &g, &[1.0]).unwrap();
        let av = eval_expr(&a, &s, &g, &[1.0]).unwrap();
        for (x, y) in av.iter().zip(&m2m3) {
            assert!((x * x - y).abs() < 1e-12 * y.abs());
        }
    }

    #[test]
    fn y_frame_and_atoms_are_rejected() {
        let s = sample_fields(1, 3, 0.05, [0.0, 2.0, 2.0]).unwrap();
        let g = GridSpec::default();
        assert!(eval_expr(&Expr::jet(Base::Q1, 0), &s, &g, &[1.0]).is_err());
    }
}
