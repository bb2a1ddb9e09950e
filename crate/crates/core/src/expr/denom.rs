//! Denominators as products of pairwise coprime primitive factors.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use super::gcd::gcd;
use super::gen::Gen;
use super::poly::{self, Poly, Rat};

#[derive(Clone)]
pub struct Factor(Arc<FactorData>);

struct FactorData {
    poly: Poly,
    irreducible: bool,
    /// `poly = c * v + rest` with constant `c` and `rest` free of `v`.
    pivot: Option<(Gen, Rat, Poly)>,
}

impl Factor {
    /// `p` must be primitive with positive leading coefficient, free of lam
    /// and a, and non-constant.
    pub fn new(p: Poly) -> Factor {
        debug_assert!(!p.is_constant());
        let mut pivot = None;
        let mut irreducible = false;
        for g in p.gens() {
            if p.degree_in(&g) != 1 {
                continue;
            }
            let u = p.to_univariate(&g);
            let lead = &u[&1];
            let rest = u.get(&0).cloned().unwrap_or_else(Poly::zero);
            if let Some(c) = lead.constant_value() {
                pivot = Some((g, c, rest));
                irreducible = true;
                break;
            }
            if !irreducible && gcd(lead, &rest).is_one() {
                irreducible = true;
            }
        }
        Factor(Arc::new(FactorData {
            poly: p,
            irreducible,
            pivot,
        }))
    }

    pub fn poly(&self) -> &Poly {
        &self.0.poly
    }

    pub fn is_irreducible(&self) -> bool {
        self.0.irreducible
    }

    /// Quotient `n / self` if exact.
    pub fn divide(&self, n: &Poly) -> Option<Poly> {
        if let Some((v, c, rest)) = &self.0.pivot {
            if !vanishes_on(n, v, c, rest) {
                return None;
            }
        }
        n.div_exact(&self.0.poly)
    }
}

impl PartialEq for Factor {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.poly == other.0.poly
    }
}

impl Eq for Factor {}

impl PartialOrd for Factor {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Factor {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other.0.poly.cmp(&self.0.poly)
    }
}

impl std::hash::Hash for Factor {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.0.poly.hash(state)
    }
}

impl fmt::Debug for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.0.poly)
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn point_value(g: &Gen) -> u64 {
    let seed = match g {
        Gen::Var(c) => *c as u64,
        Gen::Atom(a) => a.key().bytes().fold(0xCBF2_9CE4_8422_2325u64, |h, b| {
            (h ^ b as u64).wrapping_mul(0x0100_0000_01B3)
        }),
    };
    let v = splitmix(seed ^ 0x5EED_1234_ABCD) % poly::mod_prime();
    v.max(2)
}

/// Necessary condition for `c*v + rest | n`: `n` vanishes at a random point
/// of the hypersurface.
fn vanishes_on(n: &Poly, v: &Gen, c: &Rat, rest: &Poly) -> bool {
    let (Some(r), Some(cm)) = (rest.eval_mod(&point_value), poly::mod_rat(c)) else {
        return true;
    };
    let Some(ci) = poly::mod_inv(cm) else {
        return true;
    };
    let root = poly::mod_mul(poly::mod_prime() - r % poly::mod_prime(), ci) % poly::mod_prime();
    let val = |g: &Gen| if g == v { root } else { point_value(g) };
    match n.eval_mod(&val) {
        Some(x) => x == 0,
        None => true,
    }
}

pub type FactorList = Vec<(Factor, u32)>;

pub fn expand(d: &FactorList) -> Poly {
    let mut acc = Poly::one();
    for (f, k) in d {
        acc = acc.mul(&f.poly().pow(*k));
    }
    acc
}

/// Turn an arbitrary primitive lam-free, a-free polynomial into factors.
/// Monomial content is peeled off, then known factors are tried.
pub fn factorize(p: &Poly, known: &[Factor]) -> FactorList {
    let mut out: BTreeMap<Factor, u32> = BTreeMap::new();
    let mut rest = p.clone();
    for g in p.gens() {
        let e = rest.min_degree_in(&g);
        if e > 0 {
            let f = Factor::new(Poly::var(g.clone()));
            rest = rest.div_exact(&f.poly().pow(e as u32)).expect("monomial content");
            *out.entry(f).or_default() += e as u32;
        }
    }
    for f in known {
        if rest.is_constant() {
            break;
        }
        while let Some(q) = f.divide(&rest) {
            rest = q;
            *out.entry(f.clone()).or_default() += 1;
        }
    }
    if !rest.is_constant() {
        for (piece, k) in split(rest.primitive().1) {
            *out.entry(Factor::new(piece)).or_default() += k;
        }
    }
    let list: FactorList = out.into_iter().collect();
    refine(list)
}

/// Splits a primitive polynomial by content in each generator and by
/// repeated factors, so that the pieces depend only on the polynomial and
/// not on how it was built.
fn split(p: Poly) -> Vec<(Poly, u32)> {
    let mut done: BTreeMap<Poly, u32> = BTreeMap::new();
    let mut work = vec![(p, 1u32)];
    'next: while let Some((p, k)) = work.pop() {
        if p.is_constant() {
            continue;
        }
        let p = p.primitive().1;
        let gens = p.gens();
        for g in &gens {
            let e = p.min_degree_in(g);
            if e > 0 {
                let v = Poly::var(g.clone());
                work.push((v.clone(), k * e as u32));
                work.push((p.div_exact(&v.pow(e as u32)).expect("monomial content"), k));
                continue 'next;
            }
        }
        for g in &gens {
            let u = p.to_univariate(g);
            if u.len() < 2 {
                continue;
            }
            let mut c = Poly::zero();
            for coeff in u.values() {
                c = gcd(&c, coeff);
                if c.is_constant() {
                    break;
                }
            }
            if !c.is_constant() {
                let q = p.div_exact(&c).expect("content divides");
                work.push((c, k));
                work.push((q, k));
                continue 'next;
            }
        }
        for g in &gens {
            if p.degree_in(g) < 2 {
                continue;
            }
            let h = gcd(&p, &p.diff(g));
            if !h.is_constant() {
                let q = p.div_exact(&h).expect("gcd divides");
                work.push((h, k));
                work.push((q, k));
                continue 'next;
            }
        }
        *done.entry(p).or_default() += k;
    }
    done.into_iter().collect()
}

fn pairwise_coprime(list: &FactorList) -> bool {
    for i in 0..list.len() {
        for j in i + 1..list.len() {
            let (a, b) = (&list[i].0, &list[j].0);
            if a.is_irreducible() && b.is_irreducible() {
                continue;
            }
            if !gcd(a.poly(), b.poly()).is_one() {
                return false;
            }
        }
    }
    true
}

/// Coalesce equal factors and refine into a pairwise coprime base.
pub fn refine(list: FactorList) -> FactorList {
    let mut merged: BTreeMap<Factor, u32> = BTreeMap::new();
    for (f, k) in list {
        if k > 0 {
            *merged.entry(f).or_default() += k;
        }
    }
    let list: FactorList = merged.into_iter().collect();
    if pairwise_coprime(&list) {
        return list;
    }
    let base = coprime_base(list.iter().map(|(f, _)| f.poly().clone()).collect());
    let mut out: BTreeMap<Factor, u32> = BTreeMap::new();
    for (f, k) in &list {
        let mut rest = f.poly().clone();
        for b in &base {
            while let Some(q) = b.divide(&rest) {
                rest = q;
                *out.entry(b.clone()).or_default() += k;
            }
        }
        debug_assert!(rest.is_constant());
    }
    out.into_iter().collect()
}

fn coprime_base(mut polys: Vec<Poly>) -> Vec<Factor> {
    'outer: loop {
        polys.sort();
        polys.dedup();
        for i in 0..polys.len() {
            for j in i + 1..polys.len() {
                let g = gcd(&polys[i], &polys[j]);
                if g.is_one() {
                    continue;
                }
                let a = polys[i].div_exact(&g).expect("gcd divides");
                let b = polys[j].div_exact(&g).expect("gcd divides");
                let mut next: Vec<Poly> = polys
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| *k != i && *k != j)
                    .map(|(_, p)| p.clone())
                    .collect();
                for p in [g, a, b] {
                    if !p.is_constant() {
                        next.push(p.primitive().1);
                    }
                }
                polys = next;
                continue 'outer;
            }
        }
        return polys.into_iter().map(Factor::new).collect();
    }
}

/// Combine two denominators: `lcm` when `max` is set, product otherwise.
pub fn combine(a: &FactorList, b: &FactorList, max: bool) -> FactorList {
    if b.is_empty() {
        return a.clone();
    }
    if a.is_empty() {
        return b.clone();
    }
    let mut all = a.clone();
    all.extend(b.iter().cloned());
    let distinct: FactorList = {
        let mut m: BTreeMap<Factor, u32> = BTreeMap::new();
        for (f, _) in &all {
            m.insert(f.clone(), 1);
        }
        m.into_iter().collect()
    };
    if pairwise_coprime(&distinct) {
        let mut m: BTreeMap<Factor, u32> = BTreeMap::new();
        for (f, k) in a {
            m.insert(f.clone(), *k);
        }
        for (f, k) in b {
            let e = m.entry(f.clone()).or_default();
            *e = if max { (*e).max(*k) } else { *e + k };
        }
        return m.into_iter().collect();
    }
    let ra = refine(a.clone());
    let rb = refine(b.clone());
    let base = refine(ra.iter().chain(rb.iter()).map(|(f, _)| (f.clone(), 1)).collect());
    let as_base = |d: &FactorList| -> BTreeMap<Factor, u32> {
        let mut m = BTreeMap::new();
        for (f, k) in d {
            let mut rest = f.poly().clone();
            for (b, _) in &base {
                while let Some(q) = b.divide(&rest) {
                    rest = q;
                    *m.entry(b.clone()).or_default() += k;
                }
            }
        }
        m
    };
    let (ma, mb) = (as_base(&ra), as_base(&rb));
    let mut m = ma;
    for (f, k) in mb {
        let e = m.entry(f).or_default();
        *e = if max { (*e).max(k) } else { *e + k };
    }
    m.into_iter().collect()
}

/// `outer / inner` as a polynomial; `inner` must divide `outer` factorwise.
pub fn cofactor(outer: &FactorList, inner: &FactorList) -> Poly {
    let mut acc = Poly::one();
    for (f, k) in outer {
        let j = inner.iter().find(|(g, _)| g == f).map(|(_, j)| *j).unwrap_or(0);
        if *k > j {
            acc = acc.mul(&f.poly().pow(k - j));
        }
    }
    acc
}

/// gcd of `n` and a lam/a-free factor: the gcd with every (lam, a)
/// coefficient of `n`.
pub fn gcd_with_coefficients(n: &Poly, f: &Poly) -> Poly {
    let groups = n.split_by(|g| g.is_lambda() || g.is_a());
    let mut g = f.clone();
    for c in groups.values() {
        g = gcd(&g, c);
        if g.is_one() {
            break;
        }
    }
    g
}

/// Cancel common factors between `num` and `den`. Returns the reduced
/// pair; the denominator stays a coprime base.
pub fn cancel(mut num: Poly, den: FactorList) -> (Poly, FactorList) {
    if num.is_zero() {
        return (num, Vec::new());
    }
    let mut work: Vec<(Factor, u32)> = den;
    let mut out: FactorList = Vec::new();
    while let Some((f, mut k)) = work.pop() {
        while k > 0 {
            match f.divide(&num) {
                Some(q) => {
                    num = q;
                    k -= 1;
                }
                None => break,
            }
        }
        if k == 0 {
            continue;
        }
        if !f.is_irreducible() {
            let g = gcd_with_coefficients(&num, f.poly());
            if !g.is_one() {
                let h = f.poly().div_exact(&g).expect("gcd divides");
                let parts: FactorList = split(g)
                    .into_iter()
                    .chain(split(h))
                    .map(|(p, j)| (Factor::new(p), j * k))
                    .collect();
                work.extend(refine(parts));
                continue;
            }
        }
        out.push((f, k));
    }
    debug_assert!(!num.is_zero());
    (num, refine(out))
}
