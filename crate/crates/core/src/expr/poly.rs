//! Sparse multivariate (Laurent in lam) polynomials with exact rational
//! coefficients.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::gen::Gen;
use super::mono::Monomial;

pub type Rat = BigRational;

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Terms are kept sorted with the leading (largest) monomial first, with
/// no zero coefficients and no repeated monomials.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    terms: Vec<(Monomial, Rat)>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly { terms: Vec::new() }
    }

    pub fn one() -> Poly {
        Poly::constant(Rat::one())
    }

    pub fn constant(c: Rat) -> Poly {
        Poly::term(Monomial::one(), c)
    }

    pub fn term(m: Monomial, c: Rat) -> Poly {
        if c.is_zero() {
            Poly::zero()
        } else {
            Poly { terms: vec![(m, c)] }
        }
    }

    pub fn var(g: Gen) -> Poly {
        Poly::term(Monomial::var(g, 1), Rat::one())
    }

    /// Build from arbitrary terms, combining duplicates.
    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, Rat)>) -> Poly {
        let mut acc: HashMap<Monomial, Rat> = HashMap::new();
        for (m, c) in terms {
            if c.is_zero() {
                continue;
            }
            match acc.get_mut(&m) {
                Some(v) => *v += c,
                None => {
                    acc.insert(m, c);
                }
            }
        }
        Poly::from_map(acc)
    }

    fn from_map(acc: HashMap<Monomial, Rat>) -> Poly {
        let mut terms: Vec<_> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_unstable_by(|a, b| b.0.cmp(&a.0));
        Poly { terms }
    }

    /// Caller guarantees sorted, distinct, nonzero.
    fn from_sorted(terms: Vec<(Monomial, Rat)>) -> Poly {
        Poly { terms }
    }

    pub fn terms(&self) -> &[(Monomial, Rat)] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<(Monomial, Rat)> {
        self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms[0].0.is_one())
    }

    pub fn constant_value(&self) -> Option<Rat> {
        match self.terms.as_slice() {
            [] => Some(Rat::zero()),
            [(m, c)] if m.is_one() => Some(c.clone()),
            _ => None,
        }
    }

    pub fn is_one(&self) -> bool {
        self.constant_value().is_some_and(|c| c.is_one())
    }

    pub fn leading(&self) -> Option<&(Monomial, Rat)> {
        self.terms.first()
    }

    pub fn neg(&self) -> Poly {
        Poly::from_sorted(self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect())
    }

    pub fn scale(&self, k: &Rat) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly::from_sorted(self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect())
    }

    pub fn mul_term(&self, m: &Monomial, k: &Rat) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly::from_sorted(self.terms.iter().map(|(n, c)| (n.mul(m), c * k)).collect())
    }

    pub fn add(&self, other: &Poly) -> Poly {
        self.merge(other, false)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.merge(other, true)
    }

    fn merge(&self, other: &Poly, negate: bool) -> Poly {
        let (a, b) = (&self.terms, &other.terms);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Greater => {
                    out.push(a[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Less => {
                    let c = if negate { -&b[j].1 } else { b[j].1.clone() };
                    out.push((b[j].0.clone(), c));
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let c = if negate { &a[i].1 - &b[j].1 } else { &a[i].1 + &b[j].1 };
                    if !c.is_zero() {
                        out.push((a[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend(a[i..].iter().cloned());
        for t in &b[j..] {
            let c = if negate { -&t.1 } else { t.1.clone() };
            out.push((t.0.clone(), c));
        }
        Poly::from_sorted(out)
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        if other.terms.len() == 1 {
            let (m, c) = &other.terms[0];
            return self.mul_term(m, c);
        }
        if self.terms.len() == 1 {
            let (m, c) = &self.terms[0];
            return other.mul_term(m, c);
        }
        let mut acc: HashMap<Monomial, Rat> = HashMap::with_capacity(self.terms.len() * other.terms.len() / 2 + 1);
        for (m, c) in &self.terms {
            for (n, d) in &other.terms {
                let k = m.mul(n);
                let v = c * d;
                match acc.get_mut(&k) {
                    Some(x) => *x += v,
                    None => {
                        acc.insert(k, v);
                    }
                }
            }
        }
        Poly::from_map(acc)
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut result = Poly::one();
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                result = result.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Sum of many polynomials with a single accumulation pass.
    pub fn sum<'a>(parts: impl IntoIterator<Item = &'a Poly>) -> Poly {
        let mut acc: HashMap<Monomial, Rat> = HashMap::new();
        for p in parts {
            for (m, c) in &p.terms {
                match acc.get_mut(m) {
                    Some(x) => *x += c,
                    None => {
                        acc.insert(m.clone(), c.clone());
                    }
                }
            }
        }
        Poly::from_map(acc)
    }

    pub fn gens(&self) -> BTreeSet<Gen> {
        let mut s = BTreeSet::new();
        for (m, _) in &self.terms {
            for g in m.gens() {
                if !s.contains(g) {
                    s.insert(g.clone());
                }
            }
        }
        s
    }

    pub fn contains_gen(&self, pred: impl Fn(&Gen) -> bool) -> bool {
        self.terms.iter().any(|(m, _)| m.gens().any(&pred))
    }

    pub fn degree_in(&self, g: &Gen) -> i32 {
        self.terms.iter().map(|(m, _)| m.exp(g)).max().unwrap_or(0)
    }

    pub fn min_degree_in(&self, g: &Gen) -> i32 {
        self.terms.iter().map(|(m, _)| m.exp(g)).min().unwrap_or(0)
    }

    /// Coefficients with respect to `g`, keyed by exponent.
    pub fn to_univariate(&self, g: &Gen) -> BTreeMap<i32, Poly> {
        let mut buckets: BTreeMap<i32, Vec<(Monomial, Rat)>> = BTreeMap::new();
        for (m, c) in &self.terms {
            let (rest, e) = m.take(g);
            buckets.entry(e).or_default().push((rest, c.clone()));
        }
        buckets
            .into_iter()
            .map(|(e, ts)| {
                let mut ts = ts;
                ts.sort_unstable_by(|a, b| b.0.cmp(&a.0));
                (e, Poly::from_sorted(ts))
            })
            .collect()
    }

    pub fn from_univariate(g: &Gen, coeffs: &BTreeMap<i32, Poly>) -> Poly {
        let parts: Vec<Poly> = coeffs
            .iter()
            .map(|(e, p)| p.mul_term(&Monomial::var(g.clone(), *e), &Rat::one()))
            .collect();
        Poly::sum(parts.iter())
    }

    /// Group terms by their restriction to the generators selected by `sel`.
    pub fn split_by(&self, sel: impl Fn(&Gen) -> bool) -> BTreeMap<Monomial, Poly> {
        let mut buckets: BTreeMap<Monomial, Vec<(Monomial, Rat)>> = BTreeMap::new();
        for (m, c) in &self.terms {
            let key = m.filter(&sel);
            let rest = m.filter(|g| !sel(g));
            buckets.entry(key).or_default().push((rest, c.clone()));
        }
        buckets
            .into_iter()
            .map(|(k, mut ts)| {
                ts.sort_unstable_by(|a, b| b.0.cmp(&a.0));
                (k, Poly::from_sorted(ts))
            })
            .collect()
    }

    /// Partial derivative with respect to a generator.
    pub fn diff(&self, g: &Gen) -> Poly {
        let mut out = Vec::new();
        for (m, c) in &self.terms {
            let e = m.exp(g);
            if e != 0 {
                let mut n = m.clone();
                n.set(g.clone(), e - 1);
                out.push((n, c * rat(e as i64)));
            }
        }
        Poly::from_terms(out)
    }

    /// Exact division; `None` if `d` does not divide `self`.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        if d.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Poly::zero());
        }
        let (lm, lc) = d.leading().expect("nonzero");
        if d.terms.len() == 1 {
            let inv = lc.recip();
            let mut out = Vec::with_capacity(self.terms.len());
            for (m, c) in &self.terms {
                out.push((m.divide(lm)?, c * &inv));
            }
            return Some(Poly::from_sorted(out));
        }
        let mut rem: BTreeMap<Monomial, Rat> = self.terms.iter().cloned().collect();
        let mut quot = Vec::new();
        while let Some((m, c)) = rem.pop_last() {
            let qm = m.divide(lm)?;
            let qc = &c / lc;
            for (dm, dc) in &d.terms[1..] {
                let key = dm.mul(&qm);
                let v = &qc * dc;
                let remove = match rem.get_mut(&key) {
                    Some(x) => {
                        *x -= v;
                        x.is_zero()
                    }
                    None => {
                        rem.insert(key.clone(), -v);
                        false
                    }
                };
                if remove {
                    rem.remove(&key);
                }
            }
            quot.push((qm, qc));
        }
        Some(Poly::from_sorted(quot))
    }

    /// Split into a rational content and a primitive integer polynomial with
    /// positive leading coefficient: `self = content * primitive`.
    pub fn primitive(&self) -> (Rat, Poly) {
        if self.is_zero() {
            return (Rat::zero(), Poly::zero());
        }
        let mut lcm_den = BigInt::one();
        let mut gcd_num = BigInt::zero();
        for (_, c) in &self.terms {
            lcm_den = lcm_den.lcm(c.denom());
            gcd_num = gcd_num.gcd(c.numer());
        }
        let mut content = Rat::new(gcd_num, lcm_den);
        if self.terms[0].1.is_negative() {
            content = -content;
        }
        let inv = content.recip();
        (content, self.scale(&inv))
    }

    /// Evaluate modulo the Mersenne prime 2^61 - 1.
    pub fn eval_mod(&self, value: &impl Fn(&Gen) -> u64) -> Option<u64> {
        let mut acc = 0u64;
        for (m, c) in &self.terms {
            let mut t = rat_mod(c)?;
            for (g, e) in m.factors() {
                let v = value(g);
                let v = if e < 0 { modinv(v)? } else { v };
                t = mulmod(t, powmod(v, e.unsigned_abs() as u64));
            }
            acc = addmod(acc, t);
        }
        Some(acc)
    }

    pub fn map_coeffs(&self, f: impl Fn(&Rat) -> Rat) -> Poly {
        Poly::from_terms(self.terms.iter().map(|(m, c)| (m.clone(), f(c))))
    }

    /// Float evaluation for quick diagnostics.
    pub fn coeff_f64(c: &Rat) -> f64 {
        c.to_f64().unwrap_or(f64::NAN)
    }
}

const PRIME: u64 = (1 << 61) - 1;

fn mulmod(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % PRIME as u128) as u64
}

fn addmod(a: u64, b: u64) -> u64 {
    let s = a + b;
    if s >= PRIME {
        s - PRIME
    } else {
        s
    }
}

fn powmod(mut b: u64, mut e: u64) -> u64 {
    let mut r = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, b);
        }
        b = mulmod(b, b);
        e >>= 1;
    }
    r
}

fn modinv(v: u64) -> Option<u64> {
    if v.is_multiple_of(PRIME) {
        None
    } else {
        Some(powmod(v, PRIME - 2))
    }
}

fn bigint_mod(n: &BigInt) -> u64 {
    let p = BigInt::from(PRIME);
    let r = n.mod_floor(&p);
    r.to_u64().expect("reduced")
}

fn rat_mod(c: &Rat) -> Option<u64> {
    let n = bigint_mod(c.numer());
    let d = modinv(bigint_mod(c.denom()))?;
    Some(mulmod(n, d))
}

pub(crate) fn mod_prime() -> u64 {
    PRIME
}

pub(crate) fn mod_mul(a: u64, b: u64) -> u64 {
    mulmod(a, b)
}

pub(crate) fn mod_inv(a: u64) -> Option<u64> {
    modinv(a)
}

pub(crate) fn mod_rat(c: &Rat) -> Option<u64> {
    rat_mod(c)
}

pub(crate) fn fmt_rat(c: &Rat) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if k == 0 {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            if m.is_one() {
                f.write_str(&fmt_rat(&abs))?;
            } else if abs.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{}*{m}", fmt_rat(&abs))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl PartialOrd for Poly {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Term-by-term comparison; only used to order denominator factors.
impl Ord for Poly {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        for (a, b) in self.terms.iter().zip(other.terms.iter()) {
            let o = a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1));
            if o != std::cmp::Ordering::Equal {
                return o;
            }
        }
        self.terms.len().cmp(&other.terms.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::gen::{Base, JetVar};

    fn x(b: Base, k: u32) -> Poly {
        Poly::var(Gen::jet(JetVar::new(b, k)))
    }

    #[test]
    fn ring_identity() {
        let (a, b) = (x(Base::U1, 0), x(Base::U2, 0));
        let lhs = a.add(&b).pow(2);
        let rhs = a.mul(&a).add(&a.mul(&b).scale(&rat(2))).add(&b.mul(&b));
        assert!(lhs.sub(&rhs).is_zero());
    }

    #[test]
    fn exact_division() {
        let (a, b) = (x(Base::U1, 0), x(Base::U2, 2));
        let f = a.sub(&b);
        let p = f.mul(&a.add(&b).pow(3));
        assert_eq!(p.div_exact(&f), Some(a.add(&b).pow(3)));
        assert_eq!(p.add(&Poly::one()).div_exact(&f), None);
    }

    #[test]
    fn primitive_part() {
        let p = x(Base::U1, 0).scale(&ratio(-4, 6)).add(&Poly::constant(ratio(2, 3)));
        let (c, q) = p.primitive();
        assert_eq!(c, ratio(-2, 3));
        assert_eq!(q.to_string(), "u1 - 1");
    }
}
