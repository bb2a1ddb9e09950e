//! Floating-point evaluation of expressions and operator formulas as
//! Taylor series around one point.

use std::cell::RefCell;
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::expr::{Base, Expr, Gen, JetVar, Poly};
use crate::opalg::OpFormula;

use super::sample::TrigField;
use super::series::{Num, Series};

/// What the generators mean at the expansion point.
#[allow(clippy::len_without_is_empty)]
pub trait Env {
    fn lambda(&self) -> f64;
    /// Working series length.
    fn len(&self) -> usize;
    fn jet(&self, j: JetVar) -> Result<Series>;
    fn a(&self) -> Result<Series>;
    /// The space derivative of the frame.
    fn d(&self, s: &Series) -> Result<Series>;
    /// A right inverse of `d`, vanishing at the expansion point.
    fn dinv(&self, s: &Series) -> Result<Series>;
}

fn trig_series(f: &TrigField, ft: Option<&TrigField>, x0: f64, k: u32, len: usize) -> Series {
    let mut fact = 1.0;
    let out = (0..len)
        .map(|n| {
            if n > 0 {
                fact *= n as f64;
            }
            let (v, mv) = f.jet(x0, k + n as u32);
            let (t, mt) = ft.map_or((0.0, 0.0), |g| g.jet(x0, k + n as u32));
            Num {
                v: v / fact,
                t: t / fact,
                mv: mv / fact,
                mt: mt / fact,
            }
        })
        .collect();
    Series(out)
}

fn no_time(j: JetVar) -> Result<()> {
    if j.time > 0 {
        return Err(Error::NotNumeric(format!("time jet `{j}`")));
    }
    Ok(())
}

/// The x-frame at `x0`: u-jets from the sample, their time derivatives from
/// `ut` when given.
pub struct XEnv<'a> {
    pub u: &'a [TrigField; 3],
    pub ut: Option<&'a [TrigField; 3]>,
    pub x0: f64,
    pub lambda: f64,
    pub len: usize,
    a: RefCell<Option<Series>>,
}

impl<'a> XEnv<'a> {
    pub fn new(u: &'a [TrigField; 3], ut: Option<&'a [TrigField; 3]>, x0: f64, lambda: f64, len: usize) -> Self {
        XEnv {
            u,
            ut,
            x0,
            lambda,
            len,
            a: RefCell::new(None),
        }
    }

    fn field(&self, i: usize, k: u32) -> Series {
        trig_series(&self.u[i], self.ut.map(|t| &t[i]), self.x0, k, self.len)
    }

    /// `m_i = u_i - u_i''`, straight from the sample.
    pub fn m(&self, i: usize) -> Series {
        self.field(i, 0).sub(&self.field(i, 2))
    }
}

impl Env for XEnv<'_> {
    fn lambda(&self) -> f64 {
        self.lambda
    }

    fn len(&self) -> usize {
        self.len
    }

    fn jet(&self, j: JetVar) -> Result<Series> {
        no_time(j)?;
        let i = match j.base {
            Base::U1 => 0,
            Base::U2 => 1,
            Base::U3 => 2,
            _ => return Err(Error::NotNumeric(format!("jet `{j}` in the x-frame"))),
        };
        Ok(self.field(i, j.space))
    }

    fn a(&self) -> Result<Series> {
        if let Some(a) = self.a.borrow().as_ref() {
            return Ok(a.clone());
        }
        let a = self.m(1).mul(&self.m(2)).sqrt()?;
        *self.a.borrow_mut() = Some(a.clone());
        Ok(a)
    }

    fn d(&self, s: &Series) -> Result<Series> {
        Ok(s.deriv())
    }

    fn dinv(&self, s: &Series) -> Result<Series> {
        Ok(s.integ())
    }
}

fn y_index(b: Base) -> Option<usize> {
    Some(match b {
        Base::Q1 => 0,
        Base::Q2 => 1,
        Base::Q3 => 2,
        Base::q1 => 3,
        Base::q2 => 4,
        Base::q3 => 5,
        _ => return None,
    })
}

/// The y-frame seen through the reciprocal map: y-jets are numeric
/// `a^-1 d/dx` derivatives of given x-frame series for Q and q.
pub struct PullEnv<'a> {
    pub x: XEnv<'a>,
    base: [Series; 6],
    a_inv: Series,
    transport: Series,
    jets: RefCell<HashMap<JetVar, Series>>,
}

impl<'a> PullEnv<'a> {
    /// `q_big`, `q_small` are x-frame expressions for Q1..Q3 and q1..q3;
    /// `transport` is `u2*g`, the x-velocity of a fixed y.
    pub fn new(x: XEnv<'a>, q_big: &[Expr; 3], q_small: &[Expr; 3], transport: &Expr) -> Result<Self> {
        let ev = Evaluator::new(&x);
        let mut base = Vec::with_capacity(6);
        for e in q_big.iter().chain(q_small) {
            base.push(ev.eval(e)?);
        }
        let transport = ev.eval(transport)?;
        let a_inv = x.a()?.recip()?;
        drop(ev);
        Ok(PullEnv {
            base: base.try_into().expect("six fields"),
            a_inv,
            transport,
            x,
            jets: RefCell::new(HashMap::new()),
        })
    }

    pub fn dy(&self, s: &Series) -> Series {
        self.a_inv.mul(&s.deriv())
    }

    /// `D_tau = D_t + u2*g*D_x` at fixed y.
    pub fn dtau(&self, s: &Series) -> Series {
        s.time().add(&self.transport.mul(&s.deriv()))
    }
}

impl Env for PullEnv<'_> {
    fn lambda(&self) -> f64 {
        self.x.lambda
    }

    fn len(&self) -> usize {
        self.x.len
    }

    fn jet(&self, j: JetVar) -> Result<Series> {
        no_time(j)?;
        let Some(i) = y_index(j.base) else {
            return self.x.jet(j);
        };
        if let Some(s) = self.jets.borrow().get(&j) {
            return Ok(s.clone());
        }
        let s = if j.space == 0 {
            self.base[i].clone()
        } else {
            self.dy(&self.jet(JetVar::new(j.base, j.space - 1))?)
        };
        self.jets.borrow_mut().insert(j, s.clone());
        Ok(s)
    }

    fn a(&self) -> Result<Series> {
        self.x.a()
    }

    fn d(&self, s: &Series) -> Result<Series> {
        Ok(self.dy(s))
    }

    fn dinv(&self, s: &Series) -> Result<Series> {
        Ok(self.x.a()?.mul(s).integ())
    }
}

/// The abstract y-frame: Q and q are free fields of y.
pub struct YEnv<'a> {
    pub q_big: &'a [TrigField; 3],
    pub q_small: &'a [TrigField; 3],
    pub y0: f64,
    pub len: usize,
}

impl YEnv<'_> {
    pub fn field(&self, f: &TrigField) -> Series {
        trig_series(f, None, self.y0, 0, self.len)
    }
}

impl Env for YEnv<'_> {
    fn lambda(&self) -> f64 {
        1.0
    }

    fn len(&self) -> usize {
        self.len
    }

    fn jet(&self, j: JetVar) -> Result<Series> {
        no_time(j)?;
        let i = y_index(j.base).ok_or_else(|| Error::NotNumeric(format!("jet `{j}` in the y-frame")))?;
        let f = if i < 3 { &self.q_big[i] } else { &self.q_small[i - 3] };
        Ok(trig_series(f, None, self.y0, j.space, self.len))
    }

    fn a(&self) -> Result<Series> {
        Err(Error::NotNumeric("`a` in the abstract y-frame".into()))
    }

    fn d(&self, s: &Series) -> Result<Series> {
        Ok(s.deriv())
    }

    fn dinv(&self, s: &Series) -> Result<Series> {
        Ok(s.integ())
    }
}

/// Evaluates through an environment, caching generator values.
pub struct Evaluator<'e> {
    env: &'e dyn Env,
    cache: RefCell<HashMap<Gen, Series>>,
}

impl<'e> Evaluator<'e> {
    pub fn new(env: &'e dyn Env) -> Self {
        Evaluator {
            env,
            cache: RefCell::new(HashMap::new()),
        }
    }

    pub fn env(&self) -> &dyn Env {
        self.env
    }

    pub fn constant(&self, c: f64) -> Series {
        Series::constant(c, self.env.len())
    }

    fn gen(&self, g: &Gen) -> Result<Series> {
        if let Some(s) = self.cache.borrow().get(g) {
            return Ok(s.clone());
        }
        let s = if g.is_a() {
            self.env.a()?
        } else if g.is_lambda() {
            self.constant(self.env.lambda())
        } else if let Some(j) = g.as_jet() {
            self.env.jet(j)?
        } else if let Some(atom) = g.as_atom() {
            let arg = self.eval(atom.argument())?;
            self.env.dinv(&arg)?
        } else {
            return Err(Error::NotNumeric("unknown generator".into()));
        };
        self.cache.borrow_mut().insert(g.clone(), s.clone());
        Ok(s)
    }

    fn poly(&self, p: &Poly) -> Result<Series> {
        let mut acc = Series::constant(0.0, self.env.len());
        for (mono, c) in p.terms() {
            let mut term = self.constant(Poly::coeff_f64(c));
            for (g, e) in mono.factors() {
                if e < 0 {
                    if !g.is_lambda() {
                        return Err(Error::NotNumeric("negative power of a field".into()));
                    }
                    term = term.scale(self.env.lambda().powi(e));
                } else if g.is_lambda() {
                    term = term.scale(self.env.lambda().powi(e));
                } else {
                    term = term.mul(&self.gen(g)?.pow(e as u32));
                }
            }
            acc = acc.add(&term);
        }
        Ok(acc)
    }

    pub fn eval(&self, e: &Expr) -> Result<Series> {
        let mut out = self.poly(e.numerator())?;
        for (f, k) in e.denominator_factors() {
            out = out.div(&self.poly(f)?.pow(k))?;
        }
        Ok(out)
    }

    /// Applies an operator formula to a series, innermost factor first.
    pub fn apply(&self, f: &OpFormula, s: &Series) -> Result<Series> {
        Ok(match f {
            OpFormula::Mul(e) => self.eval(e)?.mul(s),
            OpFormula::D => self.env.d(s)?,
            OpFormula::Dinv => self.env.dinv(s)?,
            OpFormula::Sum(parts) => {
                let mut acc = Series::constant(0.0, s.len());
                for p in parts {
                    acc = acc.add(&self.apply(p, s)?);
                }
                acc
            }
            OpFormula::Compose(parts) => {
                let mut acc = s.clone();
                for p in parts.iter().rev() {
                    acc = self.apply(p, &acc)?;
                }
                acc
            }
        })
    }

    /// `sum_j M_ij(v_j)`.
    pub fn apply_matrix(&self, m: &[Vec<OpFormula>], v: &[Series]) -> Result<Vec<Series>> {
        m.iter()
            .map(|row| {
                let mut acc: Option<Series> = None;
                for (f, s) in row.iter().zip(v) {
                    let t = self.apply(f, s)?;
                    acc = Some(match acc {
                        Some(a) => a.add(&t),
                        None => t,
                    });
                }
                Ok(acc.unwrap_or_else(|| self.constant(0.0)))
            })
            .collect()
    }

    pub fn eval_matrix(&self, m: &[Vec<Expr>]) -> Result<Vec<Vec<Series>>> {
        m.iter().map(|r| r.iter().map(|e| self.eval(e)).collect()).collect()
    }
}
