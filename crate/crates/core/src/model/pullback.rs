//! Pulling y-frame expressions back to the x-frame.
//!
//! Zero-order jets map to their x-frame definitions; a y-jet of order k is
//! `(a^-1 D_x)^k` of that. Formal antiderivatives survive only when their
//! combined argument pulls back to zero, in which case they vanish.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, RwLock};

use crate::calculus::DerivationContext;
use crate::error::{Error, Result};
use crate::expr::{Base, Expr, Frame, Gen, JetVar, Monomial, Poly};

pub struct PullbackMap {
    zero_jets: BTreeMap<Base, Expr>,
    ctx: Arc<DerivationContext>,
    cache: RwLock<HashMap<JetVar, Expr>>,
}

impl PullbackMap {
    /// `zero_jets` gives the x-frame value of Q1..Q3 and q1..q3.
    pub fn new(zero_jets: BTreeMap<Base, Expr>, ctx: Arc<DerivationContext>) -> PullbackMap {
        PullbackMap {
            zero_jets,
            ctx,
            cache: RwLock::new(HashMap::new()),
        }
    }

    pub fn ctx(&self) -> &DerivationContext {
        &self.ctx
    }

    fn jet(&self, j: JetVar) -> Result<Expr> {
        if let Some(hit) = self.cache.read().expect("cache").get(&j) {
            return Ok(hit.clone());
        }
        let value = if j.space == 0 {
            self.zero_jets
                .get(&j.base)
                .cloned()
                .ok_or_else(|| Error::UnknownSymbol(j.to_string()))?
        } else {
            let lower = self.jet(JetVar::new(j.base, j.space - 1))?;
            self.ctx.d(&lower)?
        };
        self.cache.write().expect("cache").insert(j, value.clone());
        Ok(value)
    }

    fn local(&self, e: &Expr) -> Result<Expr> {
        e.map_generators(&mut |g| match g.as_jet() {
            Some(j) if j.frame() == Frame::Y => self.jet(j).map(Some),
            _ => Ok(None),
        })
    }

    /// x-frame image of a y-frame expression.
    pub fn apply(&self, e: &Expr) -> Result<Expr> {
        if e.frame() == Some(Frame::X) {
            return Ok(e.clone());
        }
        if !e.contains_atoms() {
            return self.local(e);
        }
        let is_atom = |g: &Gen| g.as_atom().is_some();
        if e.denominator_factors().any(|(p, _)| p.contains_gen(is_atom)) {
            return Err(Error::NonlocalObstruction(e.to_string()));
        }
        // group atom terms by their atom-free cofactor
        let groups = e.numerator().split_by(|g| !is_atom(g));
        let mut local_terms: Vec<(Monomial, crate::expr::Rat)> = Vec::new();
        for (cofactor, inner) in &groups {
            let mut combo = Vec::new();
            for (m, c) in inner.terms() {
                let atoms: Vec<(&Gen, i32)> = m.factors().collect();
                match atoms.as_slice() {
                    [] => local_terms.push((cofactor.clone(), c.clone())),
                    [(g, 1)] => {
                        let arg = g.as_atom().expect("atom").argument();
                        combo.push(arg.scale(c));
                    }
                    _ => return Err(Error::NonlocalObstruction(m.to_string())),
                }
            }
            if combo.is_empty() {
                continue;
            }
            let combined = Expr::sum_all(combo.iter())?;
            let image = self.apply(&combined)?;
            if !image.is_zero() {
                let names: Vec<String> = inner.gens().into_iter().map(|g| g.to_string()).collect();
                return Err(Error::NonlocalObstruction(names.join(", ")));
            }
        }
        let rest = Expr::from_parts(Poly::from_terms(local_terms), e.raw_den().clone());
        self.local(&rest)
    }
}
