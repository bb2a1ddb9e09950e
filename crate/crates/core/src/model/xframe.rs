//! The original (x, t) system: flows, spectral and auxiliary matrices,
//! and the conservation law that defines the reciprocal change of
//! variables.

use std::collections::BTreeMap;

use crate::calculus::{DerivationContext, Mode};
use crate::expr::{Base, Expr, Frame};
use crate::opalg::OpMatrix;

use super::Mutation;

pub struct ModelX {
    /// Time derivatives of m1, m2, m3.
    pub flows: [Expr; 3],
    pub u: Vec<Vec<Expr>>,
    pub v: Vec<Vec<Expr>>,
    pub density: Expr,
    pub flux: Expr,
}

fn j(b: Base, k: u32) -> Expr {
    Expr::jet(b, k)
}

fn n(k: i64) -> Expr {
    Expr::int(k)
}

impl ModelX {
    pub fn build(mutation: Option<Mutation>) -> ModelX {
        let is = |m: Mutation| mutation == Some(m);
        let (u2, u2x) = (j(Base::U2, 0), j(Base::U2, 1));
        let (m1, m2, m3) = (j(Base::M1, 0), j(Base::M2, 0), j(Base::M3, 0));
        let (f, g) = (j(Base::F, 0), j(Base::G, 0));
        let lam = Expr::lambda();
        let inv = Expr::lambda_pow(-1);
        let u2g = &u2 * &g;

        let c1 = if is(Mutation::M1FlowCoefficient) { 2 } else { 3 };
        let flow1 = &(&-(&u2g * &j(Base::M1, 1)) + &(&m3 * &(&(&u2x * &f) - &u2g)))
            + &(&m1 * &(&(&n(c1) * &(&u2 * &f)) - &(&m3 * &u2)));
        let flow2 = &-(&u2g * &j(Base::M2, 1)) - &(&m2 * &(&(&n(3) * &(&u2x * &g)) + &(&m3 * &u2)));
        let flow3 = &-(&u2g * &j(Base::M3, 1)) + &(&m3 * &(&(&(&n(2) * &(&u2 * &f)) + &(&u2x * &g)) - &(&m3 * &u2)));

        let z = Expr::zero;
        let u31 = if is(Mutation::UEntry) { n(2) } else { n(1) };
        let u = vec![
            vec![z(), z(), n(1)],
            vec![&lam * &m1, z(), &lam * &m3],
            vec![u31, &lam * &m2, z()],
        ];

        let lam2 = if is(Mutation::VLambdaSign) {
            Expr::lambda_pow(-2)
        } else {
            -Expr::lambda_pow(-2)
        };
        let v = vec![
            vec![-(&u2 * &f), &inv * &u2, -u2g.clone()],
            vec![
                &(&inv * &f) - &(&lam * &(&m1 * &u2g)),
                &(&(&u2 * &f) + &(&u2x * &g)) + &lam2,
                &(&inv * &g) - &(&lam * &(&m3 * &u2g)),
            ],
            vec![-(&u2x * &f), &(&inv * &u2x) - &(&lam * &(&m2 * &u2g)), -(&u2x * &g)],
        ];

        let a = Expr::a();
        let flux_tail = if is(Mutation::FluxG) { f.clone() } else { g.clone() };
        ModelX {
            flows: [flow1, flow2, flow3],
            u,
            v,
            flux: &(&a * &u2) * &flux_tail,
            density: a,
        }
    }

    fn evolution(&self) -> BTreeMap<Base, Expr> {
        [Base::M1, Base::M2, Base::M3]
            .into_iter()
            .zip(self.flows.iter().cloned())
            .collect()
    }

    /// On-shell (x, t) context.
    pub fn ctx(&self) -> DerivationContext {
        DerivationContext::new(Frame::X, Mode::Native, self.evolution())
    }

    /// (y, tau) derivatives realised on x-frame expressions.
    pub fn pullback_ctx(&self) -> DerivationContext {
        DerivationContext::new(Frame::Y, Mode::Pullback, self.evolution())
    }

    pub fn u_matrix(&self) -> OpMatrix {
        OpMatrix::from_exprs(self.u.clone()).expect("3x3")
    }

    pub fn v_matrix(&self) -> OpMatrix {
        OpMatrix::from_exprs(self.v.clone()).expect("3x3")
    }
}

pub fn build_x_model() -> ModelX {
    ModelX::build(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entries_and_flows() {
        let m = build_x_model();
        assert_eq!(m.u[1][0], &Expr::lambda() * &Expr::jet(Base::M1, 0));
        assert!(m.u[2][0].is_one());
        let (u2, g) = (Expr::jet(Base::U2, 0), Expr::jet(Base::G, 0));
        let m2 = Expr::jet(Base::M2, 0);
        let want = &-(&(&u2 * &g) * &Expr::jet(Base::M2, 1))
            - &(&m2 * &(&(&Expr::int(3) * &(&Expr::jet(Base::U2, 1) * &g)) + &(&Expr::jet(Base::M3, 0) * &u2)));
        assert_eq!(m.flows[1], want);
        let d2 = &m.density * &m.density;
        assert!(d2.try_sub(&(&m2 * &Expr::jet(Base::M3, 0))).unwrap().is_zero());
    }

    #[test]
    fn lambda_structure() {
        let m = build_x_model();
        for row in &m.u {
            for e in row {
                assert!(e.lambda_coeffs().keys().all(|k| *k == 0 || *k == 1));
            }
        }
        let mut powers = std::collections::BTreeSet::new();
        for row in &m.v {
            for e in row {
                powers.extend(e.lambda_coeffs().into_keys());
            }
        }
        assert_eq!(powers.into_iter().collect::<Vec<_>>(), vec![-2, -1, 0, 1]);
    }
}
