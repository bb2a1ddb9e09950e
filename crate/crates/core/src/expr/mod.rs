//! Canonical exact rational differential expressions.
//!
//! An [`Expr`] is `num / den` where `num` is a polynomial in jets, `lam`
//! (Laurent), `a` (degree at most one) and formal antiderivative atoms, and
//! `den` is a product of pairwise coprime primitive factors free of `lam`
//! and `a`. Every constructor and operation returns the reduced form, so
//! `is_zero` is a check on the numerator alone.

mod denom;
mod frames;
mod gcd;
mod gen;
mod mono;
mod poly;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::{One, Signed, Zero};

pub use gen::{AtomRef, Base, Frame, Gen, IndepVar, JetVar};
pub use mono::Monomial;
pub use poly::{rat, ratio, Poly, Rat};

pub(crate) use denom::{Factor, FactorList};

use crate::error::{Error, Result};

#[derive(Clone)]
pub struct Expr {
    num: Poly,
    den: FactorList,
    frame: Option<Frame>,
}

fn frame_of_poly(p: &Poly) -> Option<Frame> {
    let mut fr = None;
    for g in p.gens() {
        if let Some(f) = g.frame() {
            fr = Some(f);
            break;
        }
    }
    fr
}

fn reduce_a(p: Poly) -> Poly {
    if p.degree_in(&Gen::A) <= 1 {
        return p;
    }
    let parts = p.to_univariate(&Gen::A);
    let mut out = Vec::new();
    for (e, c) in parts {
        let (q, r) = (e / 2, e % 2);
        let mut t = c.mul(&frames::A_SQUARED.pow(q as u32));
        if r == 1 {
            t = t.mul(&Poly::var(Gen::A));
        }
        out.push(t);
    }
    Poly::sum(out.iter())
}

/// Unreduced intermediate used to batch sums and products.
struct Frac {
    num: Poly,
    den: FactorList,
}

impl Frac {
    fn of(e: &Expr) -> Frac {
        Frac {
            num: e.num.clone(),
            den: e.den.clone(),
        }
    }

    fn mul(&self, other: &Frac) -> Frac {
        Frac {
            num: reduce_a(self.num.mul(&other.num)),
            den: denom::combine(&self.den, &other.den, false),
        }
    }
}

impl Expr {
    fn build(num: Poly, den: FactorList) -> Expr {
        if num.is_zero() {
            return Expr::zero();
        }
        let (num, den) = if den.is_empty() {
            (num, den)
        } else {
            denom::cancel(num, den)
        };
        let mut frame = frame_of_poly(&num);
        if frame.is_none() {
            frame = den.iter().find_map(|(f, _)| frame_of_poly(f.poly()));
        }
        Expr { num, den, frame }
    }

    pub(crate) fn from_poly(p: Poly) -> Expr {
        Expr::build(reduce_a(p), Vec::new())
    }

    pub fn zero() -> Expr {
        Expr {
            num: Poly::zero(),
            den: Vec::new(),
            frame: None,
        }
    }

    pub fn one() -> Expr {
        Expr::constant(Rat::one())
    }

    pub fn constant(c: Rat) -> Expr {
        Expr::from_poly(Poly::constant(c))
    }

    pub fn int(n: i64) -> Expr {
        Expr::constant(rat(n))
    }

    pub fn ratio(n: i64, d: i64) -> Expr {
        Expr::constant(ratio(n, d))
    }

    pub fn lambda() -> Expr {
        Expr::from_poly(Poly::var(Gen::LAMBDA))
    }

    pub fn lambda_pow(k: i32) -> Expr {
        Expr::from_poly(Poly::term(Monomial::var(Gen::LAMBDA, k), Rat::one()))
    }

    /// The algebraic density `a`, with `a^2 = m2*m3` and `a > 0`.
    pub fn a() -> Expr {
        Expr::from_poly(Poly::var(Gen::A))
    }

    /// A named jet; eliminable names expand by definition.
    pub fn jet(base: Base, space_order: u32) -> Expr {
        let j = JetVar::new(base, space_order);
        if base.is_eliminable() {
            Expr::from_poly(frames::expand_eliminable(j))
        } else {
            Expr::from_poly(Poly::var(Gen::jet(j)))
        }
    }

    /// Checked construction from user input.
    pub fn make_jet(name: &str, space_order: i64) -> Result<Expr> {
        let base = Base::parse(name).ok_or_else(|| Error::UnknownSymbol(name.to_string()))?;
        if space_order < 0 {
            return Err(Error::NegativeOrder(name.to_string()));
        }
        Ok(Expr::jet(base, space_order as u32))
    }

    /// Primary jet, possibly with a time order (engine-internal).
    pub(crate) fn jet_var(j: JetVar) -> Expr {
        debug_assert!(!j.base.is_eliminable());
        Expr::from_poly(Poly::var(Gen::jet(j)))
    }

    pub(crate) fn atom(a: AtomRef) -> Expr {
        Expr::from_poly(Poly::var(Gen::Atom(a)))
    }

    pub fn frame(&self) -> Option<Frame> {
        self.frame
    }

    pub fn numerator(&self) -> &Poly {
        &self.num
    }

    pub fn denominator_factors(&self) -> impl Iterator<Item = (&Poly, u32)> {
        self.den.iter().map(|(f, k)| (f.poly(), *k))
    }

    pub fn denominator(&self) -> Poly {
        denom::expand(&self.den)
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.den.is_empty() && self.num.is_one()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_empty()
    }

    pub fn constant_value(&self) -> Option<Rat> {
        if self.den.is_empty() {
            self.num.constant_value()
        } else {
            None
        }
    }

    /// Semantic equality: the difference canonicalises to zero.
    pub fn equals(&self, other: &Expr) -> Result<bool> {
        Ok(self.try_sub(other)?.is_zero())
    }

    pub fn gens(&self) -> std::collections::BTreeSet<Gen> {
        let mut s = self.num.gens();
        for (f, _) in &self.den {
            s.extend(f.poly().gens());
        }
        s
    }

    pub fn contains_atoms(&self) -> bool {
        self.gens().iter().any(|g| g.as_atom().is_some())
    }

    pub fn term_count(&self) -> usize {
        self.num.len()
    }

    fn check_frame(&self, other: &Expr) -> Result<()> {
        Frame::join(self.frame, other.frame)
            .map(|_| ())
            .map_err(|(left, right)| Error::FrameMismatch { left, right })
    }

    pub fn try_add(&self, other: &Expr) -> Result<Expr> {
        self.check_frame(other)?;
        Ok(self.add_unchecked(other, false))
    }

    pub fn try_sub(&self, other: &Expr) -> Result<Expr> {
        self.check_frame(other)?;
        Ok(self.add_unchecked(other, true))
    }

    fn add_unchecked(&self, other: &Expr, negate: bool) -> Expr {
        if other.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return if negate { other.neg() } else { other.clone() };
        }
        if self.den == other.den_ref() {
            let num = if negate {
                self.num.sub(&other.num)
            } else {
                self.num.add(&other.num)
            };
            return Expr::build(num, self.den.clone());
        }
        let l = denom::combine(&self.den, &other.den, true);
        let a = self.num.mul(&denom::cofactor(&l, &self.den));
        let b = other.num.mul(&denom::cofactor(&l, &other.den));
        let num = if negate { a.sub(&b) } else { a.add(&b) };
        Expr::build(num, l)
    }

    fn den_ref(&self) -> FactorList {
        self.den.clone()
    }

    pub fn try_mul(&self, other: &Expr) -> Result<Expr> {
        self.check_frame(other)?;
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, other: &Expr) -> Expr {
        if self.is_zero() || other.is_zero() {
            return Expr::zero();
        }
        if let Some(c) = other.constant_value() {
            return self.scale(&c);
        }
        if let Some(c) = self.constant_value() {
            return other.scale(&c);
        }
        let f = Frac::of(self).mul(&Frac::of(other));
        Expr::build(f.num, f.den)
    }

    pub fn scale(&self, c: &Rat) -> Expr {
        if c.is_zero() {
            return Expr::zero();
        }
        Expr {
            num: self.num.scale(c),
            den: self.den.clone(),
            frame: self.frame,
        }
    }

    pub fn neg(&self) -> Expr {
        self.scale(&-Rat::one())
    }

    pub fn try_inv(&self) -> Result<Expr> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let parts = self.num.to_univariate(&Gen::A);
        let p = parts.get(&0).cloned().unwrap_or_else(Poly::zero);
        let q = parts.get(&1).cloned().unwrap_or_else(Poly::zero);
        let den_poly = denom::expand(&self.den);
        let hints = self.known_factors();
        // (p + q a)^-1 = (p - q a) / (p^2 - q^2 m2 m3)
        let (numer, norm_factors, norm) = if q.is_zero() {
            (den_poly, None, p)
        } else if p.is_zero() {
            let m2 = Factor::new(hints_poly(Base::M2));
            let m3 = Factor::new(hints_poly(Base::M3));
            (den_poly.mul(&Poly::var(Gen::A)), Some(vec![(m2, 1), (m3, 1)]), q)
        } else {
            let conj = p.sub(&q.mul(&Poly::var(Gen::A)));
            let norm = p.mul(&p).sub(&q.mul(&q).mul(&frames::A_SQUARED));
            (reduce_a(den_poly.mul(&conj)), None, norm)
        };
        let lam_exps: Vec<i32> = norm.terms().iter().map(|(m, _)| m.exp(&Gen::LAMBDA)).collect();
        let k = lam_exps[0];
        if lam_exps.iter().any(|e| *e != k) {
            return Err(Error::LambdaDenominator(self.to_string()));
        }
        let lam_k = Monomial::var(Gen::LAMBDA, k);
        let norm = norm
            .div_exact(&Poly::term(lam_k.clone(), Rat::one()))
            .expect("lam monomial");
        let (content, prim) = norm.primitive();
        let numer = numer.mul_term(&Monomial::var(Gen::LAMBDA, -k), &content.recip());
        let mut factors = if prim.is_constant() {
            Vec::new()
        } else {
            denom::factorize(&prim, &hints)
        };
        if let Some(extra) = norm_factors {
            factors = denom::combine(&factors, &extra, false);
        }
        Ok(Expr::build(numer, factors))
    }

    fn known_factors(&self) -> Vec<Factor> {
        let mut v: Vec<Factor> = self.den.iter().map(|(f, _)| f.clone()).collect();
        if self.frame != Some(Frame::Y) {
            for p in frames::X_HINTS.iter() {
                v.push(Factor::new(p.clone()));
            }
        }
        v
    }

    pub fn try_div(&self, other: &Expr) -> Result<Expr> {
        self.check_frame(other)?;
        Ok(self.mul_unchecked(&other.try_inv()?))
    }

    pub fn try_pow(&self, n: i32) -> Result<Expr> {
        if n < 0 {
            return self.try_inv()?.try_pow(-n);
        }
        if n == 0 {
            return Ok(Expr::one());
        }
        if self.den.is_empty() && self.num.len() == 1 && self.num.degree_in(&Gen::A) == 0 {
            let (m, c) = &self.num.terms()[0];
            let c = num_traits::pow(c.clone(), n as usize);
            return Ok(Expr::from_poly(Poly::term(m.pow(n), c)));
        }
        let mut result = Expr::one();
        let mut base = self.clone();
        let mut k = n as u32;
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul_unchecked(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul_unchecked(&base);
            }
        }
        Ok(result)
    }

    /// Sum of many expressions with one common denominator and a single
    /// reduction at the end.
    pub fn sum_all<'a>(items: impl IntoIterator<Item = &'a Expr>) -> Result<Expr> {
        let items: Vec<&Expr> = items.into_iter().filter(|e| !e.is_zero()).collect();
        let mut frame = None;
        for e in &items {
            frame = Frame::join(frame, e.frame).map_err(|(left, right)| Error::FrameMismatch { left, right })?;
        }
        Ok(Expr::sum_fracs(items.iter().map(|e| Frac::of(e)).collect()))
    }

    fn sum_fracs(items: Vec<Frac>) -> Expr {
        match items.len() {
            0 => return Expr::zero(),
            1 => {
                let f = items.into_iter().next().expect("one");
                return Expr::build(f.num, f.den);
            }
            _ => {}
        }
        let mut l: FactorList = Vec::new();
        for f in &items {
            if f.den != l {
                l = denom::combine(&l, &f.den, true);
            }
        }
        let mut cache: HashMap<Vec<u32>, Poly> = HashMap::new();
        let mut scaled = Vec::with_capacity(items.len());
        for f in items {
            if f.den == l {
                scaled.push(f.num);
                continue;
            }
            let key: Vec<u32> = l
                .iter()
                .map(|(g, _)| f.den.iter().find(|(h, _)| h == g).map(|(_, k)| *k).unwrap_or(0))
                .collect();
            let co = cache.entry(key).or_insert_with(|| denom::cofactor(&l, &f.den)).clone();
            scaled.push(f.num.mul(&co));
        }
        Expr::build(Poly::sum(scaled.iter()), l)
    }

    /// Ring homomorphism induced by generator images; `None` keeps the
    /// generator. Frames are not checked: this is the engine-level map that
    /// substitution and pullback are built on.
    pub fn map_generators(&self, image: &mut dyn FnMut(&Gen) -> Result<Option<Expr>>) -> Result<Expr> {
        let mut images: HashMap<Gen, Option<Expr>> = HashMap::new();
        let mut powers: HashMap<(Gen, i32), Frac> = HashMap::new();
        let mut map_poly = |p: &Poly,
                            images: &mut HashMap<Gen, Option<Expr>>,
                            powers: &mut HashMap<(Gen, i32), Frac>|
         -> Result<Expr> {
            let mut terms = Vec::with_capacity(p.len());
            for (m, c) in p.terms() {
                let mut kept = Monomial::one();
                let mut acc = Frac {
                    num: Poly::one(),
                    den: Vec::new(),
                };
                for (g, e) in m.factors() {
                    if !images.contains_key(g) {
                        let img = image(g)?;
                        images.insert(g.clone(), img);
                    }
                    match &images[g] {
                        None => kept = kept.mul(&Monomial::var(g.clone(), e)),
                        Some(img) => {
                            let key = (g.clone(), e);
                            if !powers.contains_key(&key) {
                                let pw = img.try_pow(e)?;
                                powers.insert(key.clone(), Frac::of(&pw));
                            }
                            acc = acc.mul(&powers[&key]);
                        }
                    }
                }
                acc.num = reduce_a(acc.num.mul_term(&kept, c));
                terms.push(acc);
            }
            Ok(Expr::sum_fracs(terms))
        };
        let num = map_poly(&self.num, &mut images, &mut powers)?;
        if self.den.is_empty() {
            return Ok(num);
        }
        let mut den = Expr::one();
        for (f, k) in &self.den {
            let fe = map_poly(f.poly(), &mut images, &mut powers)?;
            den = den.mul_unchecked(&fe.try_pow(*k as i32)?);
        }
        Ok(num.mul_unchecked(&den.try_inv()?))
    }

    /// Extends a derivation given on generators to the whole expression:
    /// `D(N/prod f^k) = (D N - N * sum k D(f)/f) / prod f^k`.
    pub fn apply_derivation(&self, image: &mut dyn FnMut(&Gen) -> Result<Expr>) -> Result<Expr> {
        if self.is_zero() {
            return Ok(Expr::zero());
        }
        let mut images: HashMap<Gen, Expr> = HashMap::new();
        let mut get = |g: &Gen, images: &mut HashMap<Gen, Expr>| -> Result<Expr> {
            if let Some(e) = images.get(g) {
                return Ok(e.clone());
            }
            let e = image(g)?;
            images.insert(g.clone(), e.clone());
            Ok(e)
        };
        let mut terms: Vec<Frac> = Vec::new();
        for g in self.num.gens() {
            let img = get(&g, &mut images)?;
            if img.is_zero() {
                continue;
            }
            let dp = self.num.diff(&g);
            terms.push(Frac {
                num: reduce_a(dp.mul(&img.num)),
                den: denom::combine(&img.den, &self.den, false),
            });
        }
        for (f, k) in &self.den {
            let mut inner: Vec<Frac> = Vec::new();
            for g in f.poly().gens() {
                let img = get(&g, &mut images)?;
                if img.is_zero() {
                    continue;
                }
                inner.push(Frac {
                    num: f.poly().diff(&g).mul(&img.num),
                    den: img.den.clone(),
                });
            }
            if inner.is_empty() {
                continue;
            }
            let df = Expr::sum_fracs(inner);
            let scale = Poly::constant(-rat(*k as i64));
            let extra = denom::combine(&self.den, &vec![(f.clone(), 1)], false);
            terms.push(Frac {
                num: reduce_a(self.num.mul(&df.num).mul(&scale)),
                den: denom::combine(&df.den, &extra, false),
            });
        }
        Ok(Expr::sum_fracs(terms))
    }

    /// Simultaneous substitution of primary jets within one frame.
    pub fn substitute(&self, rules: &BTreeMap<JetVar, Expr>) -> Result<Expr> {
        for (j, e) in rules {
            if let Some(f) = e.frame() {
                if f != j.frame() {
                    return Err(Error::SubstitutionFrame(j.to_string()));
                }
            }
        }
        self.map_generators(&mut |g| Ok(g.as_jet().and_then(|j| rules.get(&j).cloned())))
    }

    /// Coefficients of the Laurent expansion in lam.
    pub fn lambda_coeffs(&self) -> BTreeMap<i32, Expr> {
        self.num
            .to_univariate(&Gen::LAMBDA)
            .into_iter()
            .map(|(k, c)| (k, Expr::build(c, self.den.clone())))
            .collect()
    }

    pub fn from_lambda_coeffs(coeffs: &BTreeMap<i32, Expr>) -> Result<Expr> {
        let parts: Vec<Expr> = coeffs
            .iter()
            .map(|(k, c)| c.try_mul(&Expr::lambda_pow(*k)))
            .collect::<Result<_>>()?;
        Expr::sum_all(parts.iter())
    }

    /// The numerator split into `(coefficient, monomial)` pieces over the
    /// common denominator; used by the formal antiderivative.
    pub(crate) fn split_terms(&self) -> Vec<(Rat, Monomial, Expr)> {
        self.num
            .terms()
            .iter()
            .map(|(m, c)| {
                let (rest, k) = m.take(&Gen::LAMBDA);
                let piece = Expr::build(Poly::term(rest, Rat::one()), self.den.clone());
                (c.clone(), Monomial::var(Gen::LAMBDA, k), piece)
            })
            .collect()
    }

    pub(crate) fn from_parts(num: Poly, den: FactorList) -> Expr {
        Expr::build(reduce_a(num), den)
    }

    pub(crate) fn raw_den(&self) -> &FactorList {
        &self.den
    }

    /// Leading coefficient sign of the numerator (for printing decisions).
    pub fn leading_is_negative(&self) -> bool {
        self.num.leading().map(|(_, c)| c.is_negative()).unwrap_or(false)
    }
}

fn hints_poly(b: Base) -> Poly {
    frames::expand_eliminable(JetVar::new(b, 0))
}

impl PartialEq for Expr {
    /// Structural equality of canonical forms.
    fn eq(&self, other: &Self) -> bool {
        self.num == other.num && self.den == other.den
    }
}

impl Eq for Expr {}

impl std::ops::Add for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        self.try_add(rhs).expect("frame mismatch in +")
    }
}

impl std::ops::Sub for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        self.try_sub(rhs).expect("frame mismatch in -")
    }
}

impl std::ops::Mul for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        self.try_mul(rhs).expect("frame mismatch in *")
    }
}

impl std::ops::Div for &Expr {
    type Output = Expr;
    fn div(self, rhs: &Expr) -> Expr {
        self.try_div(rhs).expect("invalid division")
    }
}

impl std::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl std::ops::$tr for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                std::ops::$tr::$m(&self, &rhs)
            }
        }
        impl std::ops::$tr<&Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                std::ops::$tr::$m(&self, rhs)
            }
        }
        impl std::ops::$tr<Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                std::ops::$tr::$m(self, &rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(&self)
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Expr {
        Expr::int(n)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_empty() {
            return write!(f, "{}", self.num);
        }
        if self.num.len() > 1 {
            write!(f, "({})", self.num)?;
        } else {
            write!(f, "{}", self.num)?;
        }
        f.write_str("/")?;
        let wrap = self.den.len() > 1;
        if wrap {
            f.write_str("(")?;
        }
        for (i, (fac, k)) in self.den.iter().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            let p = fac.poly();
            let single = p.len() == 1 && p.terms()[0].1.is_one();
            if single && *k == 1 {
                write!(f, "{p}")?;
            } else if single && p.terms()[0].0.factors().count() == 1 {
                write!(f, "{p}^{k}")?;
            } else {
                write!(f, "({p})")?;
                if *k > 1 {
                    write!(f, "^{k}")?;
                }
            }
        }
        if wrap {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(i: u32, k: u32) -> Expr {
        let b = [Base::U1, Base::U2, Base::U3][i as usize - 1];
        Expr::jet(b, k)
    }

    #[test]
    fn make_examples() {
        assert!(Expr::int(0).is_zero());
        assert_eq!(u(1, 2).to_string(), "u1_xx");
        assert_eq!(Expr::jet(Base::M2, 0).to_string(), "u2 - u2_xx");
        assert!(matches!(Expr::make_jet("z9", 0), Err(Error::UnknownSymbol(_))));
        assert!(matches!(Expr::make_jet("u1", -1), Err(Error::NegativeOrder(_))));
    }

    #[test]
    fn arith_examples() {
        let (a, b) = (u(1, 0), u(2, 0));
        let e = &(&(&(&a + &b).try_pow(2).unwrap() - &(&a * &a)) - &(&(&a * &b) * &Expr::int(2))) - &(&b * &b);
        assert!(e.is_zero());
        let m2m3 = &Expr::jet(Base::M2, 0) * &Expr::jet(Base::M3, 0);
        assert_eq!(&Expr::a() * &Expr::a(), m2m3);
        assert!((&Expr::a() / &Expr::a()).is_one());
    }

    #[test]
    fn inverse_of_a_uses_conjugate() {
        let inv = Expr::a().try_inv().unwrap();
        assert_eq!(inv.to_string(), "a/((u2 - u2_xx)*(u3 - u3_xx))");
        assert!((&inv * &Expr::a()).is_one());
        let mixed = &Expr::a() + &u(1, 0);
        let back = &mixed.try_inv().unwrap() * &mixed;
        assert!(back.is_one());
    }

    #[test]
    fn division_errors() {
        assert_eq!(Expr::int(1).try_div(&Expr::zero()), Err(Error::DivisionByZero));
        let bad = &Expr::lambda() + &Expr::int(1);
        assert!(matches!(Expr::one().try_div(&bad), Err(Error::LambdaDenominator(_))));
        let q = Expr::jet(Base::Q1, 0);
        assert!(matches!(q.try_add(&u(1, 0)), Err(Error::FrameMismatch { .. })));
    }

    #[test]
    fn cancellation_and_canonical_denominator() {
        let m3 = Expr::jet(Base::M3, 0);
        let x = &(&u(1, 0) * &m3) / &(&m3 * &m3);
        assert_eq!(x.to_string(), "u1/(u3 - u3_xx)");
        let y = &(&Expr::int(1) / &m3) - &(&Expr::int(1) / &m3);
        assert!(y.is_zero());
        let z = &(&u(1, 0) / &m3) + &(&(&m3 - &u(1, 0)) / &m3);
        assert!(z.is_one());
        // composite divisor gets split once a single factor shows up
        let prod = &Expr::jet(Base::M2, 0) * &m3;
        let w = &(&Expr::int(1) / &prod) * &Expr::jet(Base::M2, 0);
        assert_eq!(w, &Expr::int(1) / &m3);
        let neg = &Expr::int(1) / &(&Expr::int(-2) * &m3);
        assert_eq!(neg.to_string(), "-1/2/(u3 - u3_xx)");
    }

    #[test]
    fn lambda_coefficients() {
        let f = Expr::jet(Base::F, 0);
        let e = &(&Expr::lambda_pow(-1) * &f)
            - &(&Expr::lambda() * &(&(&Expr::jet(Base::M1, 0) * &u(2, 0)) * &Expr::jet(Base::G, 0)));
        let cs = e.lambda_coeffs();
        assert_eq!(cs.keys().copied().collect::<Vec<_>>(), vec![-1, 1]);
        assert_eq!(cs[&-1], &u(3, 0) - &u(1, 1));
        assert_eq!(Expr::int(5).lambda_coeffs()[&0], Expr::int(5));
        let z = &Expr::lambda_pow(2) - &Expr::lambda_pow(2);
        assert!(z.lambda_coeffs().is_empty());
        assert_eq!(Expr::from_lambda_coeffs(&cs).unwrap(), e);
    }

    #[test]
    fn substitution() {
        let mut rules = BTreeMap::new();
        rules.insert(JetVar::new(Base::U1, 0), u(1, 0));
        assert_eq!(u(1, 1).substitute(&rules).unwrap(), u(1, 1));
        let e = &Expr::jet(Base::M3, 0) * &u(2, 0);
        assert_eq!(e.substitute(&BTreeMap::new()).unwrap(), e);
        let mut bad = BTreeMap::new();
        bad.insert(JetVar::new(Base::U1, 0), Expr::jet(Base::Q1, 0));
        assert!(matches!(u(1, 0).substitute(&bad), Err(Error::SubstitutionFrame(_))));
        let q = |b, k| Expr::jet(b, k);
        let uv = &Expr::jet(Base::U, 0) + &Expr::jet(Base::V, 0);
        let expect = &(&(&(&q(Base::Q2, 0) + &q(Base::Q3, 0)).neg() + &(&q(Base::Q2, 0) * &q(Base::Q3, 0)))
            - &q(Base::Q1, 0))
            + &q(Base::Q3, 1);
        assert_eq!(uv, expect);
    }

    #[test]
    fn general_gcd_cancellation() {
        // (u1^2 - u2^2) / (u1 + u2) has no pivot-free shortcut for the
        // composite denominator once it is built from a product
        let (a, b) = (u(1, 0), u(2, 0));
        let num = &(&a * &a) - &(&b * &b);
        let den = &(&a + &b) * &(&a + &u(3, 0));
        let r = &num / &den;
        assert_eq!(r, &(&a - &b) / &(&a + &u(3, 0)));
    }
}
