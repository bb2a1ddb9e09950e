use std::cmp::Ordering;
use std::fmt;

use smallvec::SmallVec;

use super::gen::Gen;

/// A power product of generators, stored sparsely and sorted by generator.
/// Only lam may carry a negative exponent.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial(SmallVec<[(Gen, i32); 4]>);

impl Monomial {
    pub fn one() -> Monomial {
        Monomial(SmallVec::new())
    }

    pub fn var(g: Gen, e: i32) -> Monomial {
        let mut m = Monomial::one();
        if e != 0 {
            m.0.push((g, e));
        }
        m
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> impl Iterator<Item = (&Gen, i32)> {
        self.0.iter().map(|(g, e)| (g, *e))
    }

    pub fn degree(&self) -> i32 {
        self.0.iter().map(|(_, e)| *e).sum()
    }

    pub fn exp(&self, g: &Gen) -> i32 {
        match self.0.binary_search_by(|(h, _)| h.cmp(g)) {
            Ok(i) => self.0[i].1,
            Err(_) => 0,
        }
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = SmallVec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let e = a[i].1 + b[j].1;
                    if e != 0 {
                        out.push((a[i].0.clone(), e));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend(a[i..].iter().cloned());
        out.extend(b[j..].iter().cloned());
        Monomial(out)
    }

    /// `self / d` when it is again a monomial (lam may go negative).
    pub fn divide(&self, d: &Monomial) -> Option<Monomial> {
        let mut out = self.clone();
        for (g, e) in d.0.iter() {
            let cur = out.exp(g);
            let new = cur - e;
            if new < 0 && !g.is_lambda() {
                return None;
            }
            out.set(g.clone(), new);
        }
        Some(out)
    }

    pub fn set(&mut self, g: Gen, e: i32) {
        match self.0.binary_search_by(|(h, _)| h.cmp(&g)) {
            Ok(i) => {
                if e == 0 {
                    self.0.remove(i);
                } else {
                    self.0[i].1 = e;
                }
            }
            Err(i) => {
                if e != 0 {
                    self.0.insert(i, (g, e));
                }
            }
        }
    }

    /// Split off the power of `g`.
    pub fn take(&self, g: &Gen) -> (Monomial, i32) {
        let mut m = self.clone();
        let e = m.exp(g);
        m.set(g.clone(), 0);
        (m, e)
    }

    pub fn pow(&self, n: i32) -> Monomial {
        if n == 0 {
            return Monomial::one();
        }
        Monomial(self.0.iter().map(|(g, e)| (g.clone(), e * n)).collect())
    }

    /// Componentwise minimum of exponents.
    pub fn gcd(&self, other: &Monomial) -> Monomial {
        let mut out = SmallVec::new();
        for (g, e) in self.0.iter() {
            let f = other.exp(g);
            let m = (*e).min(f);
            if m != 0 && (m > 0 || g.is_lambda()) {
                out.push((g.clone(), m));
            }
        }
        Monomial(out)
    }

    pub fn gens(&self) -> impl Iterator<Item = &Gen> {
        self.0.iter().map(|(g, _)| g)
    }

    pub fn filter(&self, keep: impl Fn(&Gen) -> bool) -> Monomial {
        Monomial(self.0.iter().filter(|(g, _)| keep(g)).cloned().collect())
    }
}

/// Graded lexicographic order; earlier generators are more significant.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        let d = self.degree().cmp(&other.degree());
        if d != Ordering::Equal {
            return d;
        }
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j) = (0, 0);
        loop {
            match (a.get(i), b.get(j)) {
                (None, None) => return Ordering::Equal,
                (Some((_, e)), None) => return e.cmp(&0),
                (None, Some((_, e))) => return 0.cmp(e),
                (Some((g, e)), Some((h, f))) => match g.cmp(h) {
                    Ordering::Less => return e.cmp(&0),
                    Ordering::Greater => return 0.cmp(f),
                    Ordering::Equal => {
                        if e != f {
                            return e.cmp(f);
                        }
                        i += 1;
                        j += 1;
                    }
                },
            }
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for (k, (g, e)) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str("*")?;
            }
            write!(f, "{g}")?;
            if *e != 1 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::gen::{Base, JetVar};

    fn v(b: Base, k: u32) -> Gen {
        Gen::jet(JetVar::new(b, k))
    }

    #[test]
    fn grlex_order() {
        let u1 = Monomial::var(v(Base::U1, 0), 1);
        let u2 = Monomial::var(v(Base::U2, 0), 1);
        let u1sq = Monomial::var(v(Base::U1, 0), 2);
        assert!(u1 > u2);
        assert!(u1sq > u1.mul(&u2));
        assert!(u1.mul(&u2) > u2.pow(2));
        assert!(Monomial::one() < u2);
    }

    #[test]
    fn multiplicative_compatibility() {
        let a = Monomial::var(v(Base::U1, 1), 1);
        let b = Monomial::var(v(Base::U3, 0), 2);
        let c = Monomial::var(Gen::LAMBDA, -1);
        assert_eq!(a > b, a.mul(&c) > b.mul(&c));
        assert_eq!(a.mul(&b).divide(&b), Some(a.clone()));
        assert!(a.divide(&b).is_none());
    }
}
