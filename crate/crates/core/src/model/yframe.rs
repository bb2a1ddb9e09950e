//! The transformed (y, tau) side: Lax pair, the system for Q, the Miura
//! map and the operators of the extended MKdV hierarchy.

use std::collections::BTreeMap;

use crate::calculus::{DerivationContext, Mode};
use crate::error::Result;
use crate::expr::{Base, Expr, Frame};
use crate::opalg::{FormulaMatrix, OpFormula};

use super::Mutation;

use OpFormula::{Compose, Dinv, Mul, Sum, D};

pub struct ModelY {
    pub uy: Vec<Vec<Expr>>,
    pub vy: Vec<Vec<Expr>>,
    /// Q1..Q3 from the gauge transformation, as x-frame expressions.
    pub q_gauge: [Expr; 3],
    /// Q1..Q3 from the closed Liouville formulas, as x-frame expressions.
    pub q_liouville: [Expr; 3],
    /// q1..q3 as x-frame expressions.
    pub q_small: [Expr; 3],
    pub s: [Expr; 3],
    pub tau_flow: [Expr; 3],
    /// (u, v, w) in terms of Q.
    pub miura: [Expr; 3],
    /// `S_i = sum op(q_j)` as written.
    pub s_forms: [Vec<(OpFormula, Base)>; 3],
    pub j1: FormulaMatrix,
    pub j2: FormulaMatrix,
    pub f: FormulaMatrix,
    pub k: FormulaMatrix,
    pub abc: [Expr; 3],
}

fn y(b: Base, k: u32) -> Expr {
    Expr::jet(b, k)
}

fn m(e: Expr) -> OpFormula {
    Mul(e)
}

fn c(n: i64) -> OpFormula {
    OpFormula::c(n)
}

fn half(n: i64) -> OpFormula {
    Mul(Expr::ratio(n, 2))
}

fn dn(k: u32) -> OpFormula {
    OpFormula::dn(k)
}

/// Complete a lower-triangular operator matrix by `J_ij = -(J_ji)*`.
#[allow(clippy::needless_range_loop)]
fn skew_complete(mut rows: FormulaMatrix) -> FormulaMatrix {
    let n = rows.len();
    for i in 0..n {
        for j in i + 1..n {
            rows[i][j] = rows[j][i].adjoint().neg();
        }
    }
    rows
}

impl ModelY {
    /// `pb` differentiates x-frame expressions as y-derivatives; it builds
    /// the gauge-side definitions.
    pub fn build(mutation: Option<Mutation>, pb: &DerivationContext) -> Result<ModelY> {
        let is = |mm: Mutation| mutation == Some(mm);
        let (q1, q2, q3) = (y(Base::Q1, 0), y(Base::Q2, 0), y(Base::Q3, 0));
        let (p1, p2, p3) = (y(Base::q1, 0), y(Base::q2, 0), y(Base::q3, 0));
        let lam = Expr::lambda();
        let inv = Expr::lambda_pow(-1);
        let z = Expr::zero;
        let ctx = DerivationContext::stationary(Frame::Y);

        let uy = vec![
            vec![z(), Expr::one(), z()],
            vec![q1.clone(), q2.clone(), lam.clone()],
            vec![z(), lam.clone(), q3.clone()],
        ];
        let vy = vec![
            vec![z(), z(), &inv * &p3],
            vec![z(), p3.clone(), &inv * &(&y(Base::q3, 1) + &(&q3 * &p3))],
            vec![&inv * &p1, &inv * &p2, &-Expr::lambda_pow(-2) + &p3],
        ];

        // gauge side: beta = b_y / b = -m1 / (a m3), y-derivatives pulled back
        let (m1, m2, m3) = (y(Base::M1, 0), y(Base::M2, 0), y(Base::M3, 0));
        let a = Expr::a();
        let beta = -(&m1 / &(&a * &m3));
        let beta_y = pb.d(&beta)?;
        let a_y_over_a = &pb.d(&a)? / &a;
        let g1 = &(&(&-beta_y - &(&beta * &beta)) - &(&a_y_over_a * &beta)) + &(&Expr::one() / &(&a * &a));
        let g2 = &(&Expr::int(-2) * &beta) - &a_y_over_a;
        let g3 = &-beta.clone() - &(&pb.d(&m3)? / &m3);

        // Liouville side, x-derivatives only
        let xctx = DerivationContext::stationary(Frame::X);
        let r = &m1 / &m3;
        let l1 = &(&(&xctx.d(&r)? + &Expr::one()) - &(&r * &r)) / &(&m2 * &m3);
        let l2 =
            &(&(&Expr::int(2) * &(&m1 * &m2)) - &(&Expr::ratio(1, 2) * &xctx.d(&(&m2 * &m3))?)) / &(&a * &(&m2 * &m3));
        let l3_num = if is(Mutation::LiouvilleQ3) {
            &m1 + &y(Base::M3, 1)
        } else {
            &m1 - &y(Base::M3, 1)
        };
        let l3 = &l3_num / &(&a * &m3);

        let (f, g, u2) = (y(Base::F, 0), y(Base::G, 0), y(Base::U2, 0));
        let s3 = if is(Mutation::Q3Scale) {
            &Expr::int(2) * &(&m3 * &u2)
        } else {
            &m3 * &u2
        };
        let q_small = [&(&f / &m3) - &(&(&m1 * &g) / &(&m3 * &m3)), &(&a * &g) / &m3, s3];

        // S-expressions, each a sum of operators applied to q-jets
        let q3op = Sum(vec![D, m(q3.clone())]);
        let s_forms = [
            vec![(
                Sum(vec![Compose(vec![Sum(vec![D, m(&q3 - &q2)]), q3op]), m(-q1.clone())]),
                Base::q3,
            )],
            vec![
                (Sum(vec![D.neg(), m(q3.clone())]), Base::q1),
                (m(-q1.clone()), Base::q2),
            ],
            vec![(Sum(vec![D.neg(), m(&q3 - &q2)]), Base::q2), (c(-1), Base::q1)],
        ];
        let mut s_vals = Vec::with_capacity(3);
        for form in &s_forms {
            let parts: Vec<Expr> = form
                .iter()
                .map(|(op, b)| op.apply(&y(*b, 0), &ctx))
                .collect::<Result<_>>()?;
            s_vals.push(Expr::sum_all(parts.iter())?);
        }
        let [s1, s2, s3v]: [Expr; 3] = s_vals.try_into().expect("three");

        let coeff2 = if is(Mutation::TauFlowCoefficient) { 1 } else { 2 };
        let tau_flow = [
            &(&q1 * &p3) - &p1,
            &(&(&Expr::int(coeff2) * &y(Base::q3, 1)) + &(&q3 * &p3)) - &p2,
            &-(&q3 * &p3) + &p2,
        ];

        let v_q3y = if is(Mutation::MiuraV) {
            -y(Base::Q3, 1)
        } else {
            y(Base::Q3, 1)
        };
        let q2q3 = &q2 * &q3;
        let miura = [
            -(&q2 + &q3),
            &(&q2q3 - &q1) + &v_q3y,
            &(&(&q1 * &q3) - &ctx.d(&q2q3)?) - &y(Base::Q3, 2),
        ];
        let (u, v, w) = (miura[0].clone(), miura[1].clone(), miura[2].clone());
        let (v_y, w_y) = (ctx.d(&v)?, ctx.d(&w)?);

        let j13 = if is(Mutation::J1Entry) { 3 } else { 2 };
        let j1 = vec![
            vec![OpFormula::zero(), OpFormula::zero(), Compose(vec![c(j13), D])],
            vec![
                OpFormula::zero(),
                Compose(vec![c(2), D]),
                Sum(vec![dn(2), Compose(vec![m(u.clone()), D])]),
            ],
            vec![
                Compose(vec![c(2), D]),
                Sum(vec![dn(2).neg(), Compose(vec![D, m(u.clone())])]),
                OpFormula::zero(),
            ],
        ];

        let theta1 = Sum(vec![
            dn(4).neg(),
            Compose(vec![dn(3), m(u.clone())]),
            Compose(vec![D, m(u.clone()), dn(2)]),
            Compose(vec![D, m(u.clone()), D, m(u.clone())]).neg(),
            Compose(vec![m(v.clone()), dn(2)]).neg(),
            Compose(vec![m(v.clone()), D, m(u.clone())]),
            Compose(vec![m(&Expr::int(2) * &w), D]),
            Compose(vec![D, m(w.clone())]),
        ]);
        let uw = &u * &w;
        let theta2 = Sum(vec![
            Compose(vec![D, m(uw.clone())]),
            Compose(vec![m(uw), D]),
            Compose(vec![m(w.clone()), dn(2)]),
            Compose(vec![dn(2), m(w.clone())]).neg(),
        ]);
        let p = OpFormula::zero;
        let j2 = skew_complete(vec![
            vec![Compose(vec![c(6), D]), p(), p()],
            vec![
                Compose(vec![m(&Expr::int(4) * &u), D]),
                Sum(vec![
                    Compose(vec![c(2), dn(3)]),
                    Compose(vec![m(&Expr::int(2) * &u), D, m(u.clone())]),
                    Compose(vec![D, m(v.clone())]),
                    Compose(vec![m(v.clone()), D]),
                ]),
                p(),
            ],
            vec![
                Sum(vec![
                    Compose(vec![c(2), dn(3)]),
                    Compose(vec![c(-2), D, m(u.clone()), D]),
                    Compose(vec![m(&Expr::int(2) * &v), D]),
                ]),
                theta1,
                theta2,
            ],
        ]);

        let f_op = vec![
            vec![OpFormula::zero(), c(-1), c(-1)],
            vec![c(-1), m(q3.clone()), Sum(vec![D, m(q2.clone())])],
            vec![
                m(q3.clone()),
                Compose(vec![D, m(q3.clone())]).neg(),
                Sum(vec![m(q1.clone()), Compose(vec![D, m(q2.clone())]).neg(), dn(2).neg()]),
            ],
        ];

        let du_dinv = Compose(vec![half(1), D, m(u.clone()), Dinv]);
        let w_part = |three: i64| {
            Sum(vec![
                m(&Expr::ratio(three, 2) * &w),
                Compose(vec![m(&Expr::ratio(1, 2) * &w_y), Dinv]),
            ])
        };
        let chi1 = Sum(vec![
            Compose(vec![m(-q3.clone()), dn(2)]),
            Compose(vec![m(-(&(&Expr::int(2) * &y(Base::Q3, 1)) + &q2q3)), D]),
            w_part(if is(Mutation::KEntry) { 2 } else { 3 }),
        ]);
        let chi2 = Sum(vec![
            dn(3),
            Compose(vec![m(v.clone()), D]),
            Compose(vec![D, m(u.clone()), D]).neg(),
            w_part(3).neg(),
        ]);
        let half_vy_dinv = Compose(vec![m(&Expr::ratio(1, 2) * &v_y), Dinv]);
        let k = vec![
            vec![
                Sum(vec![du_dinv.clone(), Compose(vec![half(-1), D])]),
                c(-3),
                Sum(vec![Compose(vec![half(3), D]), du_dinv.neg()]),
            ],
            vec![
                Sum(vec![
                    Compose(vec![m(q3.clone()), D]),
                    m(v.clone()),
                    half_vy_dinv.clone(),
                ]),
                m(&Expr::int(-2) * &u),
                Sum(vec![
                    Compose(vec![m(u.clone()), D]),
                    dn(2).neg(),
                    m(-v.clone()),
                    half_vy_dinv.neg(),
                ]),
            ],
            vec![
                chi1,
                Sum(vec![Compose(vec![D, m(u.clone())]), dn(2).neg(), m(-v.clone())]),
                chi2,
            ],
        ];

        let d1 = ctx.apply_dinv(&(&s1 - &s3v))?;
        let d2 = ctx.apply_dinv(&s2)?;
        let quarter = Expr::ratio(1, 4);
        let a_expr = Expr::sum_all([
            &(&(&quarter * &(&q2 + &q3)) * &d1),
            &(&Expr::ratio(-1, 2) * &d2),
            &(&quarter * &(&s1 + &s3v)),
            &-(&q3 * &y(Base::q3, 1)),
            &-(&(&q3 * &q3) * &p3),
        ])?;
        let b_expr = &(&Expr::ratio(1, 2) * &d1) - &(&q3 * &p3);
        let c_expr = -p3.clone();

        Ok(ModelY {
            uy,
            vy,
            q_gauge: [g1, g2, g3],
            q_liouville: [l1, l2, l3],
            q_small,
            s: [s1, s2, s3v],
            tau_flow,
            miura,
            s_forms,
            j1,
            j2,
            f: f_op,
            k,
            abc: [a_expr, b_expr, c_expr],
        })
    }

    /// Abstract (y, tau) context with the tau-flow of Q1..Q3.
    pub fn ctx(&self) -> DerivationContext {
        let evolution: BTreeMap<Base, Expr> = [Base::Q1, Base::Q2, Base::Q3]
            .into_iter()
            .zip(self.tau_flow.iter().cloned())
            .collect();
        DerivationContext::new(Frame::Y, Mode::Native, evolution)
    }
}
