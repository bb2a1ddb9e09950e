//! Total derivatives with on-shell elimination of time derivatives, and
//! the formal antiderivative.

use std::collections::{BTreeMap, HashMap};
use std::sync::RwLock;

use num_traits::One;

use crate::error::{Error, Result};
use crate::expr::{AtomRef, Base, Expr, Frame, Gen, IndepVar, JetVar, Poly, Rat};

/// How the derivatives of a context act on expressions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Derivatives act on jets of the context's own frame.
    Native,
    /// y-frame derivatives realised on x-frame expressions:
    /// `D_y = a^-1 D_x` and `D_tau = D_t + u2*g*D_x`.
    Pullback,
}

pub struct DerivationContext {
    frame: Frame,
    mode: Mode,
    evolution: BTreeMap<Base, Expr>,
    jet_cache: RwLock<HashMap<(Gen, IndepVar), Expr>>,
    flow_cache: RwLock<HashMap<(Base, u32), Expr>>,
}

impl Clone for DerivationContext {
    fn clone(&self) -> Self {
        DerivationContext::new(self.frame, self.mode, self.evolution.clone())
    }
}

impl std::fmt::Debug for DerivationContext {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DerivationContext")
            .field("frame", &self.frame)
            .field("mode", &self.mode)
            .field("evolution", &self.evolution.keys().collect::<Vec<_>>())
            .finish()
    }
}

fn m_base(b: Base) -> Option<(Base, Base)> {
    match b {
        Base::U1 => Some((Base::U1, Base::M1)),
        Base::U2 => Some((Base::U2, Base::M2)),
        Base::U3 => Some((Base::U3, Base::M3)),
        _ => None,
    }
}

impl DerivationContext {
    /// `evolution` maps m1, m2, m3 (x-frame) or Q1, Q2, Q3 (abstract
    /// y-frame) to their time derivatives. Pullback contexts carry the
    /// x-frame rules.
    pub fn new(frame: Frame, mode: Mode, evolution: BTreeMap<Base, Expr>) -> DerivationContext {
        assert!(
            mode == Mode::Native || frame == Frame::Y,
            "pullback lives in the y-frame"
        );
        DerivationContext {
            frame,
            mode,
            evolution,
            jet_cache: RwLock::new(HashMap::new()),
            flow_cache: RwLock::new(HashMap::new()),
        }
    }

    /// A context without evolution rules.
    pub fn stationary(frame: Frame) -> DerivationContext {
        DerivationContext::new(frame, Mode::Native, BTreeMap::new())
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn evolution(&self) -> &BTreeMap<Base, Expr> {
        &self.evolution
    }

    /// The frame of the expressions this context differentiates.
    pub fn expr_frame(&self) -> Frame {
        match self.mode {
            Mode::Native => self.frame,
            Mode::Pullback => Frame::X,
        }
    }

    pub fn space(&self) -> IndepVar {
        self.frame.space()
    }

    pub fn time(&self) -> IndepVar {
        self.frame.time()
    }

    /// `D_v e`, with time derivatives reduced on-shell.
    pub fn total_derivative(&self, e: &Expr, v: IndepVar) -> Result<Expr> {
        match (self.mode, v) {
            (Mode::Pullback, IndepVar::Y) => {
                let dx = self.native_derivative(e, IndepVar::X)?;
                dx.try_div(&Expr::a())
            }
            (Mode::Pullback, IndepVar::Tau) => {
                let dt = self.native_derivative(e, IndepVar::T)?;
                let dx = self.native_derivative(e, IndepVar::X)?;
                let c = Expr::jet(Base::U2, 0).try_mul(&Expr::jet(Base::G, 0))?;
                Expr::sum_all([&dt, &c.try_mul(&dx)?])
            }
            (Mode::Pullback, _) => self.native_derivative(e, v),
            (Mode::Native, _) => {
                if v.frame() != self.frame {
                    return Err(Error::BadDerivative {
                        var: v.name().to_string(),
                        reason: format!("context is in the {:?}-frame", self.frame),
                    });
                }
                self.native_derivative(e, v)
            }
        }
    }

    /// Derivative along the space variable of the context.
    pub fn d(&self, e: &Expr) -> Result<Expr> {
        self.total_derivative(e, self.space())
    }

    pub fn d_n(&self, e: &Expr, n: u32) -> Result<Expr> {
        let mut acc = e.clone();
        for _ in 0..n {
            acc = self.d(&acc)?;
        }
        Ok(acc)
    }

    pub fn dt(&self, e: &Expr) -> Result<Expr> {
        self.total_derivative(e, self.time())
    }

    fn native_derivative(&self, e: &Expr, v: IndepVar) -> Result<Expr> {
        if let Some(f) = e.frame() {
            if f != v.frame() {
                return Err(Error::BadDerivative {
                    var: v.name().to_string(),
                    reason: format!("expression lives in the {f:?}-frame"),
                });
            }
        }
        let out = e.apply_derivation(&mut |g| self.generator_derivative(g, v))?;
        if v.is_time() {
            if let Some(j) = out.gens().iter().filter_map(|g| g.as_jet()).find(|j| j.time > 0) {
                return Err(Error::NonlocalTimeJet(j.to_string()));
            }
        }
        Ok(out)
    }

    fn generator_derivative(&self, g: &Gen, v: IndepVar) -> Result<Expr> {
        if g.is_lambda() {
            return Ok(Expr::zero());
        }
        if let Some(atom) = g.as_atom() {
            if v.is_time() {
                return Err(Error::AtomTimeDerivative(atom.key().to_string()));
            }
            return Ok(atom.argument().clone());
        }
        let key = (g.clone(), v);
        if let Some(hit) = self.jet_cache.read().expect("cache").get(&key) {
            return Ok(hit.clone());
        }
        let value = if g.is_a() {
            self.derivative_of_a(v)?
        } else {
            let j = g.as_jet().expect("jet generator");
            if v.is_time() {
                self.time_derivative_of_jet(j)?
            } else {
                Expr::jet_var(j.shifted(1))
            }
        };
        self.jet_cache.write().expect("cache").insert(key, value.clone());
        Ok(value)
    }

    fn derivative_of_a(&self, v: IndepVar) -> Result<Expr> {
        let (m2, m3) = (Expr::jet(Base::M2, 0), Expr::jet(Base::M3, 0));
        let d_norm = if v.is_time() {
            let f2 = self.flow(Base::M2, 0)?;
            let f3 = self.flow(Base::M3, 0)?;
            Expr::sum_all([&f2.try_mul(&m3)?, &m2.try_mul(&f3)?])?
        } else {
            Expr::jet(Base::M2, 1)
                .try_mul(&m3)?
                .try_add(&m2.try_mul(&Expr::jet(Base::M3, 1))?)?
        };
        let norm = m2.try_mul(&m3)?.try_mul(&Expr::int(2))?;
        d_norm.try_mul(&Expr::a())?.try_div(&norm)
    }

    /// `D^k` of the evolution right-hand side for `base`.
    fn flow(&self, base: Base, k: u32) -> Result<Expr> {
        if let Some(hit) = self.flow_cache.read().expect("cache").get(&(base, k)) {
            return Ok(hit.clone());
        }
        let value = if k == 0 {
            self.evolution
                .get(&base)
                .cloned()
                .ok_or_else(|| Error::MissingEvolution(base.name().to_string()))?
        } else {
            let prev = self.flow(base, k - 1)?;
            self.native_derivative(&prev, self.expr_frame().space())?
        };
        self.flow_cache.write().expect("cache").insert((base, k), value.clone());
        Ok(value)
    }

    fn time_derivative_of_jet(&self, j: JetVar) -> Result<Expr> {
        if j.time > 0 {
            return Err(Error::NonlocalTimeJet(j.to_string()));
        }
        match self.expr_frame() {
            Frame::Y => {
                if !self.evolution.contains_key(&j.base) {
                    return Err(Error::MissingEvolution(j.to_string()));
                }
                self.flow(j.base, j.space)
            }
            Frame::X => {
                // u^(k) = u^(k-2) - m^(k-2), so u_t^(k) = u_t^(k mod 2) - sum D^(k-2-2i) m_t
                let (u, m) = m_base(j.base).ok_or_else(|| Error::MissingEvolution(j.to_string()))?;
                if !self.evolution.contains_key(&m) {
                    return Err(Error::MissingEvolution(j.to_string()));
                }
                let low = JetVar {
                    base: u,
                    space: j.space % 2,
                    time: 1,
                };
                let mut parts = vec![Expr::jet_var(low)];
                let mut k = j.space;
                while k >= 2 {
                    parts.push(self.flow(m, k - 2)?.neg());
                    k -= 2;
                }
                Expr::sum_all(parts.iter())
            }
        }
    }

    /// Formal antiderivative along the space variable. In pullback mode
    /// `D_y^-1 e` is the x-frame atom of `a*e`.
    pub fn apply_dinv(&self, e: &Expr) -> Result<Expr> {
        let arg = match self.mode {
            Mode::Native => e.clone(),
            Mode::Pullback => e.try_mul(&Expr::a())?,
        };
        Ok(dinv_native(&arg))
    }

    /// `is_zero(D_t density + D_x flux)` on-shell.
    pub fn conservation_check(&self, density: &Expr, flux: &Expr) -> Result<bool> {
        Ok(self.conservation_residual(density, flux)?.is_zero())
    }

    pub fn conservation_residual(&self, density: &Expr, flux: &Expr) -> Result<Expr> {
        let dt = self.dt(density)?;
        let dx = self.d(flux)?;
        dt.try_add(&dx)
    }
}

/// Splits the numerator over the common denominator: each term becomes
/// `c * lam^k * Dinv(monomial / den)` with the monomial's coefficient 1.
pub(crate) fn dinv_native(e: &Expr) -> Expr {
    let parts: Vec<Expr> = e
        .split_terms()
        .into_iter()
        .map(|(c, lam, piece)| {
            let atom = Expr::atom(AtomRef::new(piece));
            let lam = Expr::from_parts(Poly::term(lam, Rat::one()), Vec::new());
            (&atom * &lam).scale(&c)
        })
        .collect();
    Expr::sum_all(parts.iter()).expect("atoms share the argument frame")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x_ctx() -> DerivationContext {
        crate::model::build_x_model().ctx()
    }

    #[test]
    fn space_derivatives() {
        let ctx = DerivationContext::stationary(Frame::X);
        assert_eq!(ctx.d(&Expr::jet(Base::U1, 0)).unwrap(), Expr::jet(Base::U1, 1));
        let a = Expr::a();
        let lhs = ctx.d(&(&a * &a)).unwrap();
        let rhs = ctx.d(&(&Expr::jet(Base::M2, 0) * &Expr::jet(Base::M3, 0))).unwrap();
        assert_eq!(lhs, rhs);
        let da = ctx.d(&a).unwrap();
        assert_eq!(&(&da * &a) * &Expr::int(2), rhs);
    }

    #[test]
    fn time_derivative_of_m2() {
        let ctx = x_ctx();
        let got = ctx.dt(&Expr::jet(Base::M2, 0)).unwrap();
        let u2 = Expr::jet(Base::U2, 0);
        let (m2, m3, g) = (Expr::jet(Base::M2, 0), Expr::jet(Base::M3, 0), Expr::jet(Base::G, 0));
        let want = -(&(&(&u2 * &g) * &Expr::jet(Base::M2, 1))
            + &(&m2 * &(&(&(&Expr::int(3) * &Expr::jet(Base::U2, 1)) * &g) + &(&m3 * &u2))));
        assert_eq!(got, want);
        assert!(matches!(
            ctx.dt(&Expr::jet(Base::U1, 0)),
            Err(Error::NonlocalTimeJet(_))
        ));
        let stat = DerivationContext::stationary(Frame::X);
        assert!(matches!(
            stat.dt(&Expr::jet(Base::M1, 0)),
            Err(Error::MissingEvolution(_))
        ));
    }

    #[test]
    fn conservation_examples() {
        let ctx = x_ctx();
        let g = Expr::jet(Base::G, 0);
        let u2 = Expr::jet(Base::U2, 0);
        let a = Expr::a();
        assert!(ctx.conservation_check(&a, &(&(&a * &u2) * &g)).unwrap());
        assert!(ctx.conservation_check(&Expr::one(), &Expr::zero()).unwrap());
        let m2 = Expr::jet(Base::M2, 0);
        assert!(!ctx.conservation_check(&m2, &(&(&m2 * &u2) * &g)).unwrap());
    }

    #[test]
    fn dinv_linearity() {
        let ctx = DerivationContext::stationary(Frame::Y);
        assert!(ctx.apply_dinv(&Expr::zero()).unwrap().is_zero());
        let x = &Expr::jet(Base::Q1, 0) * &Expr::jet(Base::Q3, 1);
        let three = ctx.apply_dinv(&(&x * &Expr::int(3))).unwrap();
        let one = ctx.apply_dinv(&x).unwrap();
        assert_eq!(three, &one * &Expr::int(3));
        assert_eq!(ctx.d(&one).unwrap(), x);
        let lam = &Expr::lambda_pow(-1) * &x;
        assert_eq!(ctx.apply_dinv(&lam).unwrap(), &one * &Expr::lambda_pow(-1));
    }

    #[test]
    fn pullback_derivatives() {
        let ctx = crate::model::build_x_model().pullback_ctx();
        let e = &Expr::jet(Base::M1, 0) / &Expr::jet(Base::M3, 0);
        let dy = ctx.total_derivative(&e, IndepVar::Y).unwrap();
        let dx = ctx.total_derivative(&e, IndepVar::X).unwrap();
        assert_eq!(dy, &dx / &Expr::a());
        let anti = ctx.apply_dinv(&e).unwrap();
        assert_eq!(ctx.total_derivative(&anti, IndepVar::Y).unwrap(), e);
    }
}
