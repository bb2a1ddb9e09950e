//! Multivariate gcd over Q by recursive primitive pseudo-remainder
//! sequences. Inputs are polynomials (no negative exponents).
//!
//! This only runs on denominator-sized inputs: factor-base refinement and
//! cancellation against factors that are not known to be irreducible.

use std::collections::BTreeMap;

use super::gen::Gen;
use super::poly::Poly;

/// Normalised gcd: primitive with positive leading coefficient, or `1`.
pub fn gcd(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.primitive().1;
    }
    if b.is_zero() {
        return a.primitive().1;
    }
    if a.is_constant() || b.is_constant() {
        return Poly::one();
    }
    if a.len() == 1 || b.len() == 1 {
        return monomial_gcd(a, b);
    }
    let ga = a.gens();
    let gb = b.gens();
    let v = ga.iter().chain(gb.iter()).max().cloned().expect("non-constant");
    let (in_a, in_b) = (ga.contains(&v), gb.contains(&v));
    if !in_b {
        return gcd(&content(a, &v), b);
    }
    if !in_a {
        return gcd(a, &content(b, &v));
    }
    let ca = content(a, &v);
    let cb = content(b, &v);
    let c = gcd(&ca, &cb);
    let pa = a.div_exact(&ca).expect("content divides");
    let pb = b.div_exact(&cb).expect("content divides");
    let g = primitive_prs(&pa, &pb, &v);
    c.mul(&g).primitive().1
}

fn monomial_gcd(a: &Poly, b: &Poly) -> Poly {
    let (single, other) = if a.len() == 1 { (a, b) } else { (b, a) };
    let mut m = single.terms()[0].0.clone();
    for (n, _) in other.terms() {
        m = m.gcd(n);
        if m.is_one() {
            break;
        }
    }
    Poly::term(m, num_traits::One::one())
}

/// gcd of the coefficients of `p` viewed as a polynomial in `v`.
pub fn content(p: &Poly, v: &Gen) -> Poly {
    let coeffs = p.to_univariate(v);
    let mut g = Poly::zero();
    for c in coeffs.values() {
        g = gcd(&g, c);
        if g.is_one() {
            break;
        }
    }
    g
}

fn primitive_part(p: &Poly, v: &Gen) -> Poly {
    let c = content(p, v);
    p.div_exact(&c).expect("content divides").primitive().1
}

fn degree(u: &BTreeMap<i32, Poly>) -> i32 {
    u.keys().next_back().copied().unwrap_or(-1)
}

fn prem(a: &BTreeMap<i32, Poly>, b: &BTreeMap<i32, Poly>) -> BTreeMap<i32, Poly> {
    let db = degree(b);
    let lb = b[&db].clone();
    let mut r = a.clone();
    while !r.is_empty() && degree(&r) >= db {
        let dr = degree(&r);
        let lr = r[&dr].clone();
        let shift = dr - db;
        let mut next: BTreeMap<i32, Poly> = BTreeMap::new();
        for (e, c) in &r {
            next.insert(*e, c.mul(&lb));
        }
        for (e, c) in b {
            let k = e + shift;
            let t = c.mul(&lr);
            let cur = next.remove(&k).unwrap_or_else(Poly::zero);
            next.insert(k, cur.sub(&t));
        }
        next.retain(|_, c| !c.is_zero());
        r = next;
    }
    r
}

fn primitive_prs(a: &Poly, b: &Poly, v: &Gen) -> Poly {
    let (mut p, mut q) = (a.to_univariate(v), b.to_univariate(v));
    if degree(&p) < degree(&q) {
        std::mem::swap(&mut p, &mut q);
    }
    loop {
        let r = prem(&p, &q);
        if r.is_empty() {
            return primitive_part(&Poly::from_univariate(v, &q), v);
        }
        if degree(&r) == 0 {
            return Poly::one();
        }
        p = q;
        q = primitive_part(&Poly::from_univariate(v, &r), v).to_univariate(v);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::gen::{Base, JetVar};
    use crate::expr::poly::rat;

    fn x(b: Base, k: u32) -> Poly {
        Poly::var(Gen::jet(JetVar::new(b, k)))
    }

    #[test]
    fn gcd_of_products() {
        let m2 = x(Base::U2, 0).sub(&x(Base::U2, 2));
        let m3 = x(Base::U3, 0).sub(&x(Base::U3, 2));
        let extra = x(Base::U1, 1).add(&Poly::constant(rat(3)));
        let a = m2.mul(&m3).mul(&extra);
        let b = m3.pow(2).mul(&x(Base::U1, 0));
        assert_eq!(gcd(&a, &b), m3);
        assert_eq!(gcd(&a, &m2.mul(&extra).scale(&rat(-6))), m2.mul(&extra).primitive().1);
    }

    #[test]
    fn coprime_inputs() {
        let p = x(Base::U1, 0).pow(2).add(&x(Base::U2, 0).pow(2));
        let q = x(Base::U1, 0).sub(&x(Base::U2, 0));
        assert!(gcd(&p, &q).is_one());
    }

    #[test]
    fn monomial_content() {
        let p = x(Base::U1, 0).pow(2).mul(&x(Base::U2, 0));
        let q = x(Base::U1, 0).mul(&x(Base::U3, 0)).add(&x(Base::U1, 0).pow(3));
        assert_eq!(gcd(&p, &q), x(Base::U1, 0));
    }
}
