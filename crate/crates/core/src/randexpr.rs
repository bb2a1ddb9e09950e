//! Random expression trees for property tests. A tree can be built into a
//! canonical [`Expr`] or evaluated numerically node by node, without ever
//! being canonicalised, so the two routes are independent.

use rand::Rng;

use crate::calculus::DerivationContext;
use crate::error::Result;
use crate::expr::{Base, Expr, Frame};
use crate::numoracle::{Evaluator, Series};
use crate::opalg::DiffOp;

#[derive(Clone, Debug)]
pub enum Tree {
    Leaf(Expr),
    Add(Box<Tree>, Box<Tree>),
    Sub(Box<Tree>, Box<Tree>),
    Mul(Box<Tree>, Box<Tree>),
    Div(Box<Tree>, Box<Tree>),
    Pow(Box<Tree>, u32),
    D(Box<Tree>),
}

#[derive(Clone, Copy, Debug)]
pub struct Shape {
    pub frame: Frame,
    pub depth: u32,
    pub max_jet: u32,
    pub lambda: bool,
    /// Allows `a` among x-frame leaves.
    pub a: bool,
    /// Allows quotients. Denominators are drawn from quantities that stay
    /// away from zero on the oracle's samples.
    pub division: bool,
    /// Allows derivative nodes.
    pub derivatives: bool,
    /// x-frame leaves are m-jets rather than u-jets, so that time
    /// derivatives are defined on-shell.
    pub m_leaves: bool,
}

impl Shape {
    pub fn x() -> Shape {
        Shape {
            frame: Frame::X,
            depth: 3,
            max_jet: 2,
            lambda: true,
            a: true,
            division: true,
            derivatives: true,
            m_leaves: false,
        }
    }

    pub fn on_shell() -> Shape {
        Shape {
            m_leaves: true,
            ..Shape::x()
        }
    }

    pub fn y() -> Shape {
        Shape {
            frame: Frame::Y,
            a: false,
            ..Shape::x()
        }
    }

    pub fn polynomial(self) -> Shape {
        Shape {
            division: false,
            ..self
        }
    }
}

fn bases(s: &Shape) -> &'static [Base] {
    match s.frame {
        Frame::X if s.m_leaves => &[Base::M1, Base::M2, Base::M3],
        Frame::X => &[Base::U1, Base::U2, Base::U3],
        Frame::Y => &[Base::Q1, Base::Q2, Base::Q3, Base::q1, Base::q2, Base::q3],
    }
}

fn small_rational(rng: &mut impl Rng) -> Expr {
    let n = rng.gen_range(-4..=4);
    let d = rng.gen_range(1..=3);
    Expr::ratio(if n == 0 { 1 } else { n }, d)
}

fn leaf(rng: &mut impl Rng, s: &Shape) -> Expr {
    match rng.gen_range(0..10) {
        0 => small_rational(rng),
        1 if s.lambda => Expr::lambda(),
        2 if s.a && s.frame == Frame::X => Expr::a(),
        _ => {
            let bs = bases(s);
            Expr::jet(bs[rng.gen_range(0..bs.len())], rng.gen_range(0..=s.max_jet))
        }
    }
}

/// A factor bounded away from zero on the oracle's samples.
fn safe_factor(rng: &mut impl Rng, s: &Shape) -> Expr {
    match s.frame {
        Frame::X => match rng.gen_range(0..6) {
            0 if !s.m_leaves => Expr::jet(Base::U2, 0),
            1 if !s.m_leaves => Expr::jet(Base::U3, 0),
            0 => Expr::jet(Base::M2, 1) + Expr::int(4),
            1 => Expr::jet(Base::M3, 0) * Expr::jet(Base::M2, 0),
            2 => Expr::jet(Base::M2, 0),
            3 => Expr::jet(Base::M3, 0),
            4 if s.a => Expr::a(),
            4 | 5 if s.lambda => Expr::lambda(),
            _ => {
                let b = if s.m_leaves { Base::M1 } else { Base::U1 };
                &Expr::int(3) + &Expr::jet(b, rng.gen_range(0..=s.max_jet))
            }
        },
        Frame::Y => {
            let bs = bases(s);
            let b = bs[rng.gen_range(0..bs.len())];
            &Expr::int(3) + &Expr::jet(b, rng.gen_range(0..=s.max_jet.min(1)))
        }
    }
}

pub fn random_tree(rng: &mut impl Rng, s: &Shape) -> Tree {
    if s.depth == 0 || rng.gen_bool(0.25) {
        return Tree::Leaf(leaf(rng, s));
    }
    let sub = Shape {
        depth: s.depth - 1,
        ..*s
    };
    let kid = |rng: &mut _| Box::new(random_tree(rng, &sub));
    match rng.gen_range(0..9) {
        0 | 1 => Tree::Add(kid(rng), kid(rng)),
        2 => Tree::Sub(kid(rng), kid(rng)),
        3 | 4 => Tree::Mul(kid(rng), kid(rng)),
        5 if s.division => Tree::Div(kid(rng), Box::new(Tree::Leaf(safe_factor(rng, s)))),
        6 => Tree::Pow(kid(rng), rng.gen_range(2..=3)),
        7 if s.derivatives => Tree::D(kid(rng)),
        _ => Tree::Mul(kid(rng), Box::new(Tree::Leaf(leaf(rng, s)))),
    }
}

pub fn random_expr(rng: &mut impl Rng, s: &Shape, ctx: &DerivationContext) -> Expr {
    random_tree(rng, s)
        .to_expr(ctx)
        .expect("generated trees are well formed")
}

/// A non-negative-power operator `sum_{k<=order} c_k D^k` with polynomial
/// coefficients.
pub fn random_diffop(rng: &mut impl Rng, s: &Shape, order: i32, ctx: &DerivationContext) -> DiffOp {
    let coeff = Shape {
        depth: s.depth.min(2),
        division: false,
        derivatives: false,
        ..*s
    };
    let mut op = DiffOp::zero();
    for k in 0..=order {
        if rng.gen_bool(0.7) {
            let c = random_expr(rng, &coeff, ctx);
            op = op.add(&DiffOp::term(c, k)).expect("same frame");
        }
    }
    op
}

impl Tree {
    pub fn to_expr(&self, ctx: &DerivationContext) -> Result<Expr> {
        Ok(match self {
            Tree::Leaf(e) => e.clone(),
            Tree::Add(a, b) => a.to_expr(ctx)?.try_add(&b.to_expr(ctx)?)?,
            Tree::Sub(a, b) => a.to_expr(ctx)?.try_sub(&b.to_expr(ctx)?)?,
            Tree::Mul(a, b) => a.to_expr(ctx)?.try_mul(&b.to_expr(ctx)?)?,
            Tree::Div(a, b) => a.to_expr(ctx)?.try_div(&b.to_expr(ctx)?)?,
            Tree::Pow(a, n) => a.to_expr(ctx)?.try_pow(*n as i32)?,
            Tree::D(a) => ctx.d(&a.to_expr(ctx)?)?,
        })
    }

    /// Node-by-node evaluation; leaves go through the evaluator, every
    /// operation is done on series.
    pub fn eval(&self, ev: &Evaluator) -> Result<Series> {
        Ok(match self {
            Tree::Leaf(e) => ev.eval(e)?,
            Tree::Add(a, b) => a.eval(ev)?.add(&b.eval(ev)?),
            Tree::Sub(a, b) => a.eval(ev)?.sub(&b.eval(ev)?),
            Tree::Mul(a, b) => a.eval(ev)?.mul(&b.eval(ev)?),
            Tree::Div(a, b) => a.eval(ev)?.div(&b.eval(ev)?)?,
            Tree::Pow(a, n) => a.eval(ev)?.pow(*n),
            Tree::D(a) => ev.env().d(&a.eval(ev)?)?,
        })
    }

    /// Nesting depth of derivative nodes, which bounds the series length
    /// needed for evaluation.
    pub fn derivative_depth(&self) -> usize {
        match self {
            Tree::Leaf(_) => 0,
            Tree::Add(a, b) | Tree::Sub(a, b) | Tree::Mul(a, b) | Tree::Div(a, b) => {
                a.derivative_depth().max(b.derivative_depth())
            }
            Tree::Pow(a, _) => a.derivative_depth(),
            Tree::D(a) => 1 + a.derivative_depth(),
        }
    }
}
