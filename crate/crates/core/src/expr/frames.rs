//! Frame alphabets: the definitions that expand eliminable names into
//! primary jets.

use std::sync::LazyLock;

use super::gen::{Base, Gen, JetVar};
use super::poly::Poly;

fn jet(b: Base, k: u32) -> Poly {
    Poly::var(Gen::jet(JetVar::new(b, k)))
}

/// Space derivative of a polynomial in primary jets of one frame.
pub(crate) fn prolong(p: &Poly) -> Poly {
    let parts: Vec<Poly> = p
        .gens()
        .into_iter()
        .filter_map(|g| {
            let j = g.as_jet()?;
            Some(p.diff(&g).mul(&Poly::var(Gen::jet(j.shifted(1)))))
        })
        .collect();
    Poly::sum(parts.iter())
}

fn prolong_n(p: Poly, n: u32) -> Poly {
    (0..n).fold(p, |acc, _| prolong(&acc))
}

/// Expansion of an eliminable jet (with time order zero).
pub(crate) fn expand_eliminable(j: JetVar) -> Poly {
    debug_assert!(j.base.is_eliminable() && j.time == 0);
    let k = j.space;
    match j.base {
        Base::M1 => jet(Base::U1, k).sub(&jet(Base::U1, k + 2)),
        Base::M2 => jet(Base::U2, k).sub(&jet(Base::U2, k + 2)),
        Base::M3 => jet(Base::U3, k).sub(&jet(Base::U3, k + 2)),
        Base::F => jet(Base::U3, k).sub(&jet(Base::U1, k + 1)),
        Base::G => jet(Base::U1, k).sub(&jet(Base::U3, k + 1)),
        Base::U => jet(Base::Q2, k).add(&jet(Base::Q3, k)).neg(),
        Base::V => prolong_n(miura_v(), k),
        Base::W => prolong_n(miura_w(), k),
        _ => unreachable!("primary jet {j}"),
    }
}

fn miura_v() -> Poly {
    jet(Base::Q2, 0)
        .mul(&jet(Base::Q3, 0))
        .sub(&jet(Base::Q1, 0))
        .add(&jet(Base::Q3, 1))
}

fn miura_w() -> Poly {
    let q2q3 = jet(Base::Q2, 0).mul(&jet(Base::Q3, 0));
    jet(Base::Q1, 0)
        .mul(&jet(Base::Q3, 0))
        .sub(&prolong(&q2q3))
        .sub(&jet(Base::Q3, 2))
}

/// `m2 * m3` in u-jets: the value of `a^2`.
pub(crate) static A_SQUARED: LazyLock<Poly> =
    LazyLock::new(|| expand_eliminable(JetVar::new(Base::M2, 0)).mul(&expand_eliminable(JetVar::new(Base::M3, 0))));

/// Known irreducible factors worth trying first when a new x-frame
/// denominator is factored.
pub(crate) static X_HINTS: LazyLock<Vec<Poly>> = LazyLock::new(|| {
    [Base::M1, Base::M2, Base::M3]
        .iter()
        .map(|b| expand_eliminable(JetVar::new(*b, 0)))
        .collect()
});

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn miura_w_expansion() {
        let w = expand_eliminable(JetVar::new(Base::W, 0));
        assert_eq!(w.to_string(), "Q1*Q3 - Q2*Q3_y - Q2_y*Q3 - Q3_yy");
    }

    #[test]
    fn m_expansion_shifts() {
        assert_eq!(expand_eliminable(JetVar::new(Base::M2, 1)).to_string(), "u2_x - u2_xxx");
    }
}
