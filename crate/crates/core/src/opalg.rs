//! Differential operators `sum c_p * D^p` (p >= -1) with expression
//! coefficients, operator matrices, and the zero-curvature residual.
//!
//! Operators the model writes down are kept as [`OpFormula`] trees
//! (composition, sums, multiplication); [`OpFormula::normalize`] turns
//! them into a [`DiffOp`] by Leibniz expansion.

use std::collections::BTreeMap;
use std::fmt;

use crate::calculus::DerivationContext;
use crate::error::{Error, Result};
use crate::expr::{rat, Expr, Rat};

fn binomial(n: i32, k: i32) -> Rat {
    let mut acc = rat(1);
    for i in 0..k {
        acc = acc * rat((n - i) as i64) / rat((i + 1) as i64);
    }
    acc
}

#[derive(Clone, Default, PartialEq)]
pub struct DiffOp {
    terms: BTreeMap<i32, Expr>,
}

impl DiffOp {
    pub fn zero() -> DiffOp {
        DiffOp::default()
    }

    pub fn identity() -> DiffOp {
        DiffOp::mul(Expr::one())
    }

    /// Multiplication by `c`.
    pub fn mul(c: Expr) -> DiffOp {
        DiffOp::term(c, 0)
    }

    pub fn d() -> DiffOp {
        DiffOp::term(Expr::one(), 1)
    }

    pub fn dinv() -> DiffOp {
        DiffOp::term(Expr::one(), -1)
    }

    /// `c * D^p`.
    pub fn term(c: Expr, p: i32) -> DiffOp {
        assert!(p >= -1, "powers below -1 are outside the operator class");
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(p, c);
        }
        DiffOp { terms }
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (i32, &Expr)> {
        self.terms.iter().map(|(p, c)| (*p, c))
    }

    pub fn coeff(&self, p: i32) -> Expr {
        self.terms.get(&p).cloned().unwrap_or_else(Expr::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn order(&self) -> Option<i32> {
        self.terms.keys().next_back().copied()
    }

    pub fn min_power(&self) -> Option<i32> {
        self.terms.keys().next().copied()
    }

    /// Zero-order operators are plain multiplications.
    pub fn as_multiplier(&self) -> Option<Expr> {
        match self.terms.len() {
            0 => Some(Expr::zero()),
            1 => self.terms.get(&0).cloned(),
            _ => None,
        }
    }

    fn insert_add(&mut self, p: i32, c: Expr) -> Result<()> {
        if c.is_zero() {
            return Ok(());
        }
        let sum = match self.terms.remove(&p) {
            Some(old) => old.try_add(&c)?,
            None => c,
        };
        if !sum.is_zero() {
            self.terms.insert(p, sum);
        }
        Ok(())
    }

    pub fn add(&self, other: &DiffOp) -> Result<DiffOp> {
        let mut out = self.clone();
        for (p, c) in &other.terms {
            out.insert_add(*p, c.clone())?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &DiffOp) -> Result<DiffOp> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> DiffOp {
        self.scale(&rat(-1))
    }

    pub fn scale(&self, k: &Rat) -> DiffOp {
        DiffOp {
            terms: self
                .terms
                .iter()
                .map(|(p, c)| (*p, c.scale(k)))
                .filter(|(_, c)| !c.is_zero())
                .collect(),
        }
    }

    /// `e * self`.
    pub fn left_mul(&self, e: &Expr) -> Result<DiffOp> {
        let mut out = DiffOp::zero();
        for (p, c) in &self.terms {
            out.insert_add(*p, e.try_mul(c)?)?;
        }
        Ok(out)
    }

    /// `self ∘ other`, Leibniz-expanded.
    pub fn compose(&self, other: &DiffOp, ctx: &DerivationContext) -> Result<DiffOp> {
        let mut out = DiffOp::zero();
        for (p, c) in &self.terms {
            for (q, d) in &other.terms {
                if *p < 0 {
                    if *q != 0 || d.constant_value().is_none() {
                        return Err(Error::UnsupportedComposition {
                            left: format!("{}", DiffOp::term(c.clone(), *p)),
                            right: format!("{}", DiffOp::term(d.clone(), *q)),
                        });
                    }
                    out.insert_add(-1, c.try_mul(d)?)?;
                    continue;
                }
                let mut dk = d.clone();
                for k in 0..=*p {
                    if k > 0 {
                        dk = ctx.d(&dk)?;
                    }
                    if dk.is_zero() {
                        break;
                    }
                    let coeff = c.try_mul(&dk)?.scale(&binomial(*p, k));
                    out.insert_add(p - k + q, coeff)?;
                }
            }
        }
        Ok(out)
    }

    /// Formal adjoint: `(c D^n)* = (-D)^n ∘ c`.
    pub fn adjoint(&self, ctx: &DerivationContext) -> Result<DiffOp> {
        let mut out = DiffOp::zero();
        for (n, c) in &self.terms {
            if *n < 0 {
                return Err(Error::NegativePowerAdjoint);
            }
            let sign = if n % 2 == 0 { rat(1) } else { rat(-1) };
            let mut dk = c.clone();
            for k in 0..=*n {
                if k > 0 {
                    dk = ctx.d(&dk)?;
                }
                if dk.is_zero() {
                    break;
                }
                out.insert_add(n - k, dk.scale(&(&sign * binomial(*n, k))))?;
            }
        }
        Ok(out)
    }

    /// `sum c_p D^p(e)`, with `D^-1` the formal antiderivative.
    pub fn apply(&self, e: &Expr, ctx: &DerivationContext) -> Result<Expr> {
        let mut parts = Vec::with_capacity(self.terms.len());
        let mut deriv = e.clone();
        let mut at = 0;
        for (p, c) in &self.terms {
            let de = if *p < 0 {
                ctx.apply_dinv(e)?
            } else {
                while at < *p {
                    deriv = ctx.d(&deriv)?;
                    at += 1;
                }
                deriv.clone()
            };
            parts.push(c.try_mul(&de)?);
        }
        Expr::sum_all(parts.iter())
    }

    pub fn map_coeffs(&self, f: &mut dyn FnMut(&Expr) -> Result<Expr>) -> Result<DiffOp> {
        let mut out = DiffOp::zero();
        for (p, c) in &self.terms {
            out.insert_add(*p, f(c)?)?;
        }
        Ok(out)
    }
}

impl fmt::Display for DiffOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (p, c)) in self.terms.iter().rev().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            match p {
                0 => write!(f, "({c})")?,
                1 => write!(f, "({c})*D")?,
                _ => write!(f, "({c})*D^{p}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for DiffOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Rectangular matrix of operators.
#[derive(Clone, Debug, PartialEq)]
pub struct OpMatrix {
    rows: Vec<Vec<DiffOp>>,
}

impl OpMatrix {
    pub fn new(rows: Vec<Vec<DiffOp>>) -> Result<OpMatrix> {
        let width = rows.first().map(|r| r.len()).unwrap_or(0);
        if rows.iter().any(|r| r.len() != width) {
            return Err(Error::DimensionMismatch("ragged operator matrix".into()));
        }
        Ok(OpMatrix { rows })
    }

    /// Matrix of multiplication operators.
    pub fn from_exprs(rows: Vec<Vec<Expr>>) -> Result<OpMatrix> {
        OpMatrix::new(
            rows.into_iter()
                .map(|r| r.into_iter().map(DiffOp::mul).collect())
                .collect(),
        )
    }

    pub fn zeros(n: usize, m: usize) -> OpMatrix {
        OpMatrix {
            rows: vec![vec![DiffOp::zero(); m]; n],
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows.len(), self.rows.first().map(|r| r.len()).unwrap_or(0))
    }

    pub fn get(&self, i: usize, j: usize) -> &DiffOp {
        &self.rows[i][j]
    }

    pub fn rows(&self) -> &[Vec<DiffOp>] {
        &self.rows
    }

    /// Entries as expressions, when every entry is zero-order.
    pub fn as_exprs(&self) -> Option<Vec<Vec<Expr>>> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|op| op.as_multiplier()).collect())
            .collect()
    }

    pub fn apply(&self, v: &[Expr], ctx: &DerivationContext) -> Result<Vec<Expr>> {
        let (n, m) = self.shape();
        if v.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "{n}x{m} matrix applied to a vector of length {}",
                v.len()
            )));
        }
        self.rows
            .iter()
            .map(|row| {
                let parts: Vec<Expr> = row
                    .iter()
                    .zip(v)
                    .map(|(op, e)| op.apply(e, ctx))
                    .collect::<Result<_>>()?;
                Expr::sum_all(parts.iter())
            })
            .collect()
    }

    pub fn compose(&self, other: &OpMatrix, ctx: &DerivationContext) -> Result<OpMatrix> {
        let (n, m) = self.shape();
        let (m2, k) = other.shape();
        if m != m2 {
            return Err(Error::DimensionMismatch(format!("{n}x{m} ∘ {m2}x{k}")));
        }
        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            let mut row = Vec::with_capacity(k);
            for j in 0..k {
                let mut acc = DiffOp::zero();
                for l in 0..m {
                    acc = acc.add(&self.rows[i][l].compose(&other.rows[l][j], ctx)?)?;
                }
                row.push(acc);
            }
            rows.push(row);
        }
        OpMatrix::new(rows)
    }

    /// Transpose with entrywise adjoints.
    pub fn adjoint(&self, ctx: &DerivationContext) -> Result<OpMatrix> {
        let (n, m) = self.shape();
        let mut rows = vec![Vec::with_capacity(n); m];
        for (j, row) in rows.iter_mut().enumerate() {
            for i in 0..n {
                row.push(self.rows[i][j].adjoint(ctx)?);
            }
        }
        OpMatrix::new(rows)
    }

    pub fn add(&self, other: &OpMatrix) -> Result<OpMatrix> {
        if self.shape() != other.shape() {
            return Err(Error::DimensionMismatch("matrix sum".into()));
        }
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x.add(y)).collect())
            .collect::<Result<_>>()?;
        OpMatrix::new(rows)
    }

    pub fn neg(&self) -> OpMatrix {
        OpMatrix {
            rows: self.rows.iter().map(|r| r.iter().map(DiffOp::neg).collect()).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().flatten().all(DiffOp::is_zero)
    }
}

fn expr_matrix(m: &OpMatrix, what: &str) -> Result<Vec<Vec<Expr>>> {
    m.as_exprs()
        .ok_or_else(|| Error::DimensionMismatch(format!("{what} must have multiplication entries")))
}

/// `D_t U - D_x V + U V - V U` in the context's own variables.
pub fn zero_curvature(u: &OpMatrix, v: &OpMatrix, ctx: &DerivationContext) -> Result<Vec<Vec<Expr>>> {
    let (n, m) = u.shape();
    if n != m || v.shape() != (n, n) {
        return Err(Error::DimensionMismatch(
            "zero curvature needs square matrices of equal size".into(),
        ));
    }
    let (ue, ve) = (expr_matrix(u, "U")?, expr_matrix(v, "V")?);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::with_capacity(n);
        for j in 0..n {
            let mut parts = vec![ctx.dt(&ue[i][j])?, ctx.d(&ve[i][j])?.neg()];
            for k in 0..n {
                parts.push(ue[i][k].try_mul(&ve[k][j])?);
                parts.push(ve[i][k].try_mul(&ue[k][j])?.neg());
            }
            row.push(Expr::sum_all(parts.iter())?);
        }
        out.push(row);
    }
    Ok(out)
}

/// Operator expression tree as written in the model.
#[derive(Clone, Debug, PartialEq)]
pub enum OpFormula {
    Mul(Expr),
    D,
    Dinv,
    Compose(Vec<OpFormula>),
    Sum(Vec<OpFormula>),
}

impl OpFormula {
    pub fn zero() -> OpFormula {
        OpFormula::Sum(Vec::new())
    }

    pub fn c(n: i64) -> OpFormula {
        OpFormula::Mul(Expr::int(n))
    }

    pub fn dn(n: u32) -> OpFormula {
        OpFormula::Compose(vec![OpFormula::D; n as usize])
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(self) -> OpFormula {
        OpFormula::Compose(vec![OpFormula::c(-1), self])
    }

    pub fn times(e: Expr, f: OpFormula) -> OpFormula {
        OpFormula::Compose(vec![OpFormula::Mul(e), f])
    }

    pub fn normalize(&self, ctx: &DerivationContext) -> Result<DiffOp> {
        match self {
            OpFormula::Mul(e) => Ok(DiffOp::mul(e.clone())),
            OpFormula::D => Ok(DiffOp::d()),
            OpFormula::Dinv => Ok(DiffOp::dinv()),
            OpFormula::Sum(parts) => {
                let mut acc = DiffOp::zero();
                for p in parts {
                    acc = acc.add(&p.normalize(ctx)?)?;
                }
                Ok(acc)
            }
            OpFormula::Compose(parts) => {
                let mut acc = DiffOp::identity();
                for p in parts.iter().rev() {
                    acc = p.normalize(ctx)?.compose(&acc, ctx)?;
                }
                Ok(acc)
            }
        }
    }

    /// Direct application, innermost factor first.
    pub fn apply(&self, e: &Expr, ctx: &DerivationContext) -> Result<Expr> {
        match self {
            OpFormula::Mul(c) => c.try_mul(e),
            OpFormula::D => ctx.d(e),
            OpFormula::Dinv => ctx.apply_dinv(e),
            OpFormula::Sum(parts) => {
                let vals: Vec<Expr> = parts.iter().map(|p| p.apply(e, ctx)).collect::<Result<_>>()?;
                Expr::sum_all(vals.iter())
            }
            OpFormula::Compose(parts) => {
                let mut acc = e.clone();
                for p in parts.iter().rev() {
                    acc = p.apply(&acc, ctx)?;
                }
                Ok(acc)
            }
        }
    }

    /// Structural adjoint; `Dinv* = -Dinv` under vanishing boundary terms.
    pub fn adjoint(&self) -> OpFormula {
        match self {
            OpFormula::Mul(e) => OpFormula::Mul(e.clone()),
            OpFormula::D => OpFormula::D.neg(),
            OpFormula::Dinv => OpFormula::Dinv.neg(),
            OpFormula::Sum(parts) => OpFormula::Sum(parts.iter().map(OpFormula::adjoint).collect()),
            OpFormula::Compose(parts) => OpFormula::Compose(parts.iter().rev().map(OpFormula::adjoint).collect()),
        }
    }

    /// Apply `f` to every multiplication coefficient.
    pub fn map_exprs(&self, f: &mut dyn FnMut(&Expr) -> Result<Expr>) -> Result<OpFormula> {
        Ok(match self {
            OpFormula::Mul(e) => OpFormula::Mul(f(e)?),
            OpFormula::D => OpFormula::D,
            OpFormula::Dinv => OpFormula::Dinv,
            OpFormula::Sum(p) => OpFormula::Sum(p.iter().map(|x| x.map_exprs(f)).collect::<Result<_>>()?),
            OpFormula::Compose(p) => OpFormula::Compose(p.iter().map(|x| x.map_exprs(f)).collect::<Result<_>>()?),
        })
    }

    pub fn visit_exprs<'a>(&'a self, out: &mut Vec<&'a Expr>) {
        match self {
            OpFormula::Mul(e) => out.push(e),
            OpFormula::D | OpFormula::Dinv => {}
            OpFormula::Sum(p) | OpFormula::Compose(p) => p.iter().for_each(|x| x.visit_exprs(out)),
        }
    }
}

impl fmt::Display for OpFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OpFormula::Mul(e) => write!(f, "[{e}]"),
            OpFormula::D => f.write_str("D"),
            OpFormula::Dinv => f.write_str("Dinv"),
            OpFormula::Sum(p) if p.is_empty() => f.write_str("0"),
            OpFormula::Compose(p) if p.is_empty() => f.write_str("1"),
            OpFormula::Sum(p) => {
                f.write_str("(")?;
                for (i, x) in p.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" + ")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str(")")
            }
            OpFormula::Compose(p) => {
                for (i, x) in p.iter().enumerate() {
                    if i > 0 {
                        f.write_str("∘")?;
                    }
                    write!(f, "{x}")?;
                }
                Ok(())
            }
        }
    }
}

/// Matrix of operator formulas.
pub type FormulaMatrix = Vec<Vec<OpFormula>>;

pub fn normalize_matrix(m: &FormulaMatrix, ctx: &DerivationContext) -> Result<OpMatrix> {
    OpMatrix::new(
        m.iter()
            .map(|r| r.iter().map(|f| f.normalize(ctx)).collect())
            .collect::<Result<_>>()?,
    )
}

/// Row sums of entrywise direct application.
pub fn apply_formula_matrix(m: &FormulaMatrix, v: &[Expr], ctx: &DerivationContext) -> Result<Vec<Expr>> {
    m.iter()
        .map(|row| {
            if row.len() != v.len() {
                return Err(Error::DimensionMismatch(format!(
                    "row of length {} applied to a vector of length {}",
                    row.len(),
                    v.len()
                )));
            }
            let parts: Vec<Expr> = row
                .iter()
                .zip(v)
                .map(|(op, e)| op.apply(e, ctx))
                .collect::<Result<_>>()?;
            Expr::sum_all(parts.iter())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{Base, Frame};

    fn q(b: Base, k: u32) -> Expr {
        Expr::jet(b, k)
    }

    #[test]
    fn miura_factor_product() {
        let ctx = DerivationContext::stationary(Frame::Y);
        let left = DiffOp::d().sub(&DiffOp::mul(q(Base::Q3, 0))).unwrap();
        let right = DiffOp::term(Expr::one(), 2)
            .sub(&DiffOp::term(q(Base::Q2, 0), 1))
            .unwrap()
            .sub(&DiffOp::mul(q(Base::Q1, 0)))
            .unwrap();
        let p = left.compose(&right, &ctx).unwrap();
        assert!(p.coeff(3).is_one());
        assert_eq!(p.coeff(2), -(&q(Base::Q2, 0) + &q(Base::Q3, 0)));
        assert_eq!(
            p.coeff(1),
            &(&(&q(Base::Q2, 0) * &q(Base::Q3, 0)) - &q(Base::Q1, 0)) - &q(Base::Q2, 1)
        );
        assert_eq!(p.coeff(0), &(&q(Base::Q1, 0) * &q(Base::Q3, 0)) - &q(Base::Q1, 1));
    }

    #[test]
    fn leibniz_and_restrictions() {
        let ctx = DerivationContext::stationary(Frame::Y);
        let u = Expr::jet(Base::U, 0);
        let du = DiffOp::d().compose(&DiffOp::mul(u.clone()), &ctx).unwrap();
        assert_eq!(du.coeff(1), u);
        assert_eq!(du.coeff(0), Expr::jet(Base::U, 1));
        assert!(matches!(
            DiffOp::dinv().compose(&DiffOp::dinv(), &ctx),
            Err(Error::UnsupportedComposition { .. })
        ));
    }

    #[test]
    fn adjoint_examples() {
        let ctx = DerivationContext::stationary(Frame::Y);
        let u = Expr::jet(Base::U, 0);
        let a = DiffOp::term(u.clone(), 1).adjoint(&ctx).unwrap();
        assert_eq!(a.coeff(1), -&u);
        assert_eq!(a.coeff(0), -Expr::jet(Base::U, 1));
        assert_eq!(DiffOp::d().adjoint(&ctx).unwrap(), DiffOp::d().neg());
        assert_eq!(DiffOp::dinv().adjoint(&ctx), Err(Error::NegativePowerAdjoint));
    }

    #[test]
    fn application() {
        let ctx = DerivationContext::stationary(Frame::Y);
        let op = DiffOp::d().add(&DiffOp::mul(q(Base::Q3, 0))).unwrap();
        let got = op.apply(&q(Base::q3, 0), &ctx).unwrap();
        assert_eq!(got, &q(Base::q3, 1) + &(&q(Base::Q3, 0) * &q(Base::q3, 0)));
        let e = q(Base::Q1, 2);
        assert_eq!(DiffOp::identity().apply(&e, &ctx).unwrap(), e);
        let half_vy = DiffOp::term(&Expr::ratio(1, 2) * &Expr::jet(Base::V, 1), -1);
        let got = half_vy.apply(&Expr::int(-1), &ctx).unwrap();
        let atom1 = ctx.apply_dinv(&Expr::one()).unwrap();
        assert_eq!(got, &(&Expr::ratio(-1, 2) * &Expr::jet(Base::V, 1)) * &atom1);
    }

    #[test]
    fn zero_curvature_of_equal_pair() {
        let ctx = crate::model::build_x_model().ctx();
        let u = crate::model::build_x_model().u_matrix();
        let res = zero_curvature(&u, &u, &ctx).unwrap();
        let ue = u.as_exprs().unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = &ctx.dt(&ue[i][j]).unwrap() - &ctx.d(&ue[i][j]).unwrap();
                assert_eq!(res[i][j], want);
            }
        }
        let zero = OpMatrix::zeros(3, 3);
        let v = vec![Expr::one(), Expr::lambda(), Expr::a()];
        assert!(zero.apply(&v, &ctx).unwrap().iter().all(Expr::is_zero));
    }
}
