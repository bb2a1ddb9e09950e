//! Numeric residuals of the eight claims, rebuilt from the model's
//! ingredients rather than from the symbolic residuals.

use crate::error::{Error, Result};
use crate::expr::{Base, Expr};
use crate::model::Model;

use super::eval::{Env, Evaluator, PullEnv, XEnv, YEnv};
use super::sample::TrigField;
use super::sample::{FieldSample, YSample};
use super::series::Series;

/// Everything one seed needs: the sample, its on-shell time derivative and
/// the abstract y-frame fields.
pub struct Prepared<'m> {
    pub model: &'m Model,
    pub sample: FieldSample,
    pub ut: [TrigField; 3],
    pub ys: YSample,
}

impl<'m> Prepared<'m> {
    pub fn new(model: &'m Model, sample: FieldSample, ys: YSample) -> Result<Self> {
        let ut = time_fields(model, &sample)?;
        Ok(Prepared { model, sample, ut, ys })
    }

    fn x_env(&self, x0: f64, lambda: f64, len: usize) -> XEnv<'_> {
        XEnv::new(&self.sample.u, Some(&self.ut), x0, lambda, len)
    }

    fn pull_env(&self, x0: f64, lambda: f64, len: usize) -> Result<PullEnv<'_>> {
        let y = &self.model.y;
        let transport = &Expr::jet(Base::U2, 0) * &Expr::jet(Base::G, 0);
        PullEnv::new(self.x_env(x0, lambda, len), &y.q_liouville, &y.q_small, &transport)
    }

    fn y_env(&self, y0: f64, len: usize) -> YEnv<'_> {
        YEnv {
            q_big: &self.ys.q_big,
            q_small: &self.ys.q_small,
            y0,
            len,
        }
    }
}

/// `u_t = (1 - D^2)^-1 m_t` with `m_t` taken from the model's flows. The
/// flows are cubic in the fields, so a grid finer than six times the top
/// wavenumber interpolates them exactly.
fn time_fields(model: &Model, s: &FieldSample) -> Result<[TrigField; 3]> {
    let top = s.u.iter().map(TrigField::max_wavenumber).max().unwrap_or(0) as usize;
    let n = (6 * top + 2).next_power_of_two().max(64);
    let grid: Vec<f64> = (0..n).map(|j| std::f64::consts::TAU * j as f64 / n as f64).collect();
    let mut out = Vec::with_capacity(3);
    for flow in &model.x.flows {
        let mut vals = Vec::with_capacity(n);
        for &x in &grid {
            let env = XEnv::new(&s.u, None, x, 1.0, 1);
            vals.push(Evaluator::new(&env).eval(flow)?.head().v);
        }
        out.push(TrigField::from_grid(&vals).inverse_helmholtz());
    }
    Ok(out.try_into().expect("three flows"))
}

pub type Entries = Vec<(String, Series)>;

/// `M_t - N_x + [M, N]` entrywise, with the frame's own derivatives.
fn zero_curvature(
    u: &[Vec<Series>],
    v: &[Vec<Series>],
    dt: impl Fn(&Series) -> Series,
    dx: impl Fn(&Series) -> Series,
) -> Entries {
    let n = u.len();
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut e = dt(&u[i][j]).sub(&dx(&v[i][j]));
            for k in 0..n {
                e = e.add(&u[i][k].mul(&v[k][j])).sub(&v[i][k].mul(&u[k][j]));
            }
            out.push((format!("ZC[{},{}]", i + 1, j + 1), e));
        }
    }
    out
}

pub fn c1(p: &Prepared, x0: f64, lambda: f64) -> Result<Entries> {
    let env = p.x_env(x0, lambda, 2);
    let ev = Evaluator::new(&env);
    let u = ev.eval_matrix(&p.model.x.u)?;
    let v = ev.eval_matrix(&p.model.x.v)?;
    Ok(zero_curvature(&u, &v, Series::time, Series::deriv))
}

pub fn c2(p: &Prepared, x0: f64, _: f64) -> Result<Entries> {
    let env = p.x_env(x0, 1.0, 2);
    let ev = Evaluator::new(&env);
    let r = ev
        .eval(&p.model.x.density)?
        .time()
        .add(&ev.eval(&p.model.x.flux)?.deriv());
    Ok(vec![("a_t + flux_x".into(), r)])
}

/// The gauge side recomputed from `beta = -m1/(a m3)` with numeric
/// y-derivatives, against the closed forms.
pub fn c3(p: &Prepared, x0: f64, _: f64) -> Result<Entries> {
    let env = XEnv::new(&p.sample.u, None, x0, 1.0, 3);
    let (m1, m3) = (env.m(0), env.m(2));
    let a = env.a()?;
    let a_inv = a.recip()?;
    let dy = |s: &Series| a_inv.mul(&s.deriv());
    let beta = m1.div(&a.mul(&m3))?.neg();
    let ay_a = dy(&a).mul(&a_inv);
    let g1 = dy(&beta)
        .neg()
        .sub(&beta.mul(&beta))
        .sub(&ay_a.mul(&beta))
        .add(&a_inv.mul(&a_inv));
    let g2 = beta.scale(-2.0).sub(&ay_a);
    let g3 = beta.neg().sub(&dy(&m3).div(&m3)?);
    let ev = Evaluator::new(&env);
    let mut out = Vec::with_capacity(3);
    for (i, g) in [g1, g2, g3].into_iter().enumerate() {
        let closed = ev.eval(&p.model.y.q_liouville[i])?;
        out.push((format!("Q{}", i + 1), g.sub(&closed)));
    }
    Ok(out)
}

/// Both sides of the factorisation applied to a test function.
pub fn c4(p: &Prepared, y0: f64, _: f64) -> Result<Entries> {
    let env = p.y_env(y0, 5);
    let ev = Evaluator::new(&env);
    let phi = env.field(&p.ys.phi);
    let d = |s: &Series| s.deriv();
    let [u, v, w] = &p.model.y.miura;
    let (u, v, w) = (ev.eval(u)?, ev.eval(v)?, ev.eval(w)?);
    let lhs = d(&d(&d(&phi)))
        .add(&d(&u.mul(&d(&phi))))
        .add(&d(&v.mul(&phi)))
        .add(&w.mul(&phi));
    let q = |b| env.jet(crate::expr::JetVar::new(b, 0));
    let (q1, q2, q3) = (q(Base::Q1)?, q(Base::Q2)?, q(Base::Q3)?);
    let inner = d(&d(&phi)).sub(&q2.mul(&d(&phi))).sub(&q1.mul(&phi));
    let rhs = d(&inner).sub(&q3.mul(&inner));
    Ok(vec![("Lax(phi) - factored(phi)".into(), lhs.sub(&rhs))])
}

fn s_values(p: &Prepared, env: &PullEnv, ev: &Evaluator) -> Result<Vec<Series>> {
    p.model
        .y
        .s_forms
        .iter()
        .map(|form| {
            let mut acc = ev.constant(0.0);
            for (op, b) in form {
                let q = env.jet(crate::expr::JetVar::new(*b, 0))?;
                acc = acc.add(&ev.apply(op, &q)?);
            }
            Ok(acc)
        })
        .collect()
}

pub fn c5(p: &Prepared, x0: f64, _: f64) -> Result<Entries> {
    let env = p.pull_env(x0, 1.0, 6)?;
    let ev = Evaluator::new(&env);
    let s = s_values(p, &env, &ev)?;
    let one = ev.constant(1.0);
    let mut out = vec![
        ("S1 + 1".to_string(), s[0].add(&one)),
        ("S2".to_string(), s[1].clone()),
        ("S3 + 1".to_string(), s[2].add(&one)),
    ];
    for (i, b) in [Base::Q1, Base::Q2, Base::Q3].into_iter().enumerate() {
        let q = env.jet(crate::expr::JetVar::new(b, 0))?;
        let flow = ev.eval(&p.model.y.tau_flow[i])?;
        out.push((format!("Q{}_tau - flow", i + 1), env.dtau(&q).sub(&flow)));
    }
    Ok(out)
}

pub fn c6(p: &Prepared, x0: f64, lambda: f64) -> Result<Entries> {
    let env = p.pull_env(x0, lambda, 6)?;
    let ev = Evaluator::new(&env);
    let u = ev.eval_matrix(&p.model.y.uy)?;
    let v = ev.eval_matrix(&p.model.y.vy)?;
    Ok(zero_curvature(&u, &v, |s| env.dtau(s), |s| env.dy(s)))
}

pub fn c7(p: &Prepared, y0: f64, _: f64) -> Result<Entries> {
    let env = p.y_env(y0, 8);
    let ev = Evaluator::new(&env);
    let s = [-1.0, 0.0, -1.0].map(|c| ev.constant(c));
    let r = ev.apply_matrix(&p.model.y.k, &s)?;
    Ok(labelled("K(-1,0,-1)", r))
}

pub fn c8(p: &Prepared, x0: f64, _: f64) -> Result<Entries> {
    let env = p.pull_env(x0, 1.0, 14)?;
    let ev = Evaluator::new(&env);
    let y = &p.model.y;
    let flow: Vec<Series> = y.tau_flow.iter().map(|e| ev.eval(e)).collect::<Result<_>>()?;
    let abc: Vec<Series> = y.abc.iter().map(|e| ev.eval(e)).collect::<Result<_>>()?;
    let lhs = ev.apply_matrix(&y.f, &flow)?;
    let rhs = ev.apply_matrix(&y.j1, &abc)?;
    let first = lhs.iter().zip(&rhs).map(|(l, r)| l.sub(r)).collect();
    let mut out = labelled("F(Q_tau) - J1(A,B,C)", first);
    out.extend(labelled("J2(A,B,C)", ev.apply_matrix(&y.j2, &abc)?));
    Ok(out)
}

fn labelled(prefix: &str, v: Vec<Series>) -> Entries {
    v.into_iter()
        .enumerate()
        .map(|(i, s)| (format!("{prefix}[{}]", i + 1), s))
        .collect()
}

pub type NumProcedure = fn(&Prepared, f64, f64) -> Result<Entries>;

pub struct NumClaim {
    pub id: &'static str,
    pub uses_lambda: bool,
    /// Evaluation points are y-values of the abstract frame.
    pub abstract_frame: bool,
    pub procedure: NumProcedure,
}

pub const NUM_CLAIMS: [NumClaim; 8] = [
    NumClaim {
        id: "C1",
        uses_lambda: true,
        abstract_frame: false,
        procedure: c1,
    },
    NumClaim {
        id: "C2",
        uses_lambda: false,
        abstract_frame: false,
        procedure: c2,
    },
    NumClaim {
        id: "C3",
        uses_lambda: false,
        abstract_frame: false,
        procedure: c3,
    },
    NumClaim {
        id: "C4",
        uses_lambda: false,
        abstract_frame: true,
        procedure: c4,
    },
    NumClaim {
        id: "C5",
        uses_lambda: false,
        abstract_frame: false,
        procedure: c5,
    },
    NumClaim {
        id: "C6",
        uses_lambda: true,
        abstract_frame: false,
        procedure: c6,
    },
    NumClaim {
        id: "C7",
        uses_lambda: false,
        abstract_frame: true,
        procedure: c7,
    },
    NumClaim {
        id: "C8",
        uses_lambda: false,
        abstract_frame: false,
        procedure: c8,
    },
];

pub fn find(id: &str) -> Result<&'static NumClaim> {
    NUM_CLAIMS
        .iter()
        .find(|c| c.id.eq_ignore_ascii_case(id))
        .ok_or_else(|| Error::UnknownClaim(id.to_string()))
}
