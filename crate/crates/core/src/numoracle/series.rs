//! Truncated Taylor series in the space variable whose coefficients carry a
//! first-order time derivative and a rounding-magnitude bound.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Denominators smaller than this make a sample unusable.
pub const SINGULAR: f64 = 1e-9;

/// A value with its time derivative (`t`) and absolute-sum magnitudes
/// (`mv`, `mt`) of the terms that produced each.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Num {
    pub v: f64,
    pub t: f64,
    pub mv: f64,
    pub mt: f64,
}

impl Num {
    pub fn constant(c: f64) -> Num {
        Num {
            v: c,
            t: 0.0,
            mv: c.abs(),
            mt: 0.0,
        }
    }

    pub fn scale(self, c: f64) -> Num {
        Num {
            v: self.v * c,
            t: self.t * c,
            mv: self.mv * c.abs(),
            mt: self.mt * c.abs(),
        }
    }

    /// The time derivative as a value in its own right.
    pub fn time(self) -> Num {
        Num {
            v: self.t,
            t: 0.0,
            mv: self.mt,
            mt: 0.0,
        }
    }

    fn recip(self) -> Result<Num> {
        if self.v.abs() < SINGULAR {
            return Err(Error::NearSingular(self.v.abs()));
        }
        let v2 = self.v * self.v;
        Ok(Num {
            v: 1.0 / self.v,
            t: -self.t / v2,
            mv: self.mv / v2,
            mt: self.mt / v2 + 2.0 * self.t.abs() * self.mv / (v2 * self.v.abs()),
        })
    }
}

impl Add for Num {
    type Output = Num;
    fn add(self, o: Num) -> Num {
        Num {
            v: self.v + o.v,
            t: self.t + o.t,
            mv: self.mv + o.mv,
            mt: self.mt + o.mt,
        }
    }
}

impl Sub for Num {
    type Output = Num;
    fn sub(self, o: Num) -> Num {
        self + (-o)
    }
}

impl Neg for Num {
    type Output = Num;
    fn neg(self) -> Num {
        Num {
            v: -self.v,
            t: -self.t,
            ..self
        }
    }
}

impl Mul for Num {
    type Output = Num;
    fn mul(self, o: Num) -> Num {
        Num {
            v: self.v * o.v,
            t: self.v * o.t + self.t * o.v,
            mv: self.mv * o.mv,
            mt: self.mv * o.mt + self.mt * o.mv,
        }
    }
}

/// `c[n]` is the n-th Taylor coefficient `f^(n)(x0) / n!`.
#[derive(Clone, Debug, PartialEq)]
pub struct Series(pub Vec<Num>);

impl Series {
    pub fn constant(c: f64, len: usize) -> Series {
        let mut v = vec![Num::default(); len.max(1)];
        v[0] = Num::constant(c);
        Series(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Value at the expansion point.
    pub fn head(&self) -> Num {
        self.0.first().copied().unwrap_or_default()
    }

    /// `|value| / magnitude` at the expansion point, 0 for an exact zero.
    pub fn relative(&self) -> f64 {
        let h = self.head();
        if h.mv > 0.0 {
            h.v.abs() / h.mv
        } else {
            h.v.abs()
        }
    }

    pub fn add(&self, o: &Series) -> Series {
        Series(self.0.iter().zip(&o.0).map(|(a, b)| *a + *b).collect())
    }

    pub fn sub(&self, o: &Series) -> Series {
        Series(self.0.iter().zip(&o.0).map(|(a, b)| *a - *b).collect())
    }

    pub fn neg(&self) -> Series {
        Series(self.0.iter().map(|a| -*a).collect())
    }

    pub fn scale(&self, c: f64) -> Series {
        Series(self.0.iter().map(|a| a.scale(c)).collect())
    }

    pub fn mul(&self, o: &Series) -> Series {
        let n = self.len().min(o.len());
        let out = (0..n)
            .map(|k| (0..=k).fold(Num::default(), |acc, i| acc + self.0[i] * o.0[k - i]))
            .collect();
        Series(out)
    }

    pub fn pow(&self, e: u32) -> Series {
        let mut acc = Series::constant(1.0, self.len());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn recip(&self) -> Result<Series> {
        let r0 = self.head().recip()?;
        let mut r = vec![r0];
        for n in 1..self.len() {
            let s = (1..=n).fold(Num::default(), |acc, k| acc + self.0[k] * r[n - k]);
            r.push(-(r0 * s));
        }
        Ok(Series(r))
    }

    pub fn div(&self, o: &Series) -> Result<Series> {
        Ok(self.mul(&o.recip()?))
    }

    /// Positive square root; the head must be positive.
    pub fn sqrt(&self) -> Result<Series> {
        let b0 = self.head();
        if b0.v < SINGULAR {
            return Err(Error::NearSingular(b0.v));
        }
        let s0v = b0.v.sqrt();
        let s0 = Num {
            v: s0v,
            t: b0.t / (2.0 * s0v),
            mv: b0.mv.sqrt(),
            mt: b0.mt / (2.0 * s0v),
        };
        let half_inv = (s0.scale(2.0)).recip()?;
        let mut s = vec![s0];
        for n in 1..self.len() {
            let cross = (1..n).fold(Num::default(), |acc, k| acc + s[k] * s[n - k]);
            s.push((self.0[n] - cross) * half_inv);
        }
        Ok(Series(s))
    }

    /// Space derivative; one coefficient shorter.
    pub fn deriv(&self) -> Series {
        Series(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(n, c)| c.scale(n as f64))
                .collect(),
        )
    }

    /// Antiderivative vanishing at the expansion point; one coefficient
    /// longer.
    pub fn integ(&self) -> Series {
        let mut out = vec![Num::default()];
        out.extend(self.0.iter().enumerate().map(|(n, c)| c.scale(1.0 / (n as f64 + 1.0))));
        Series(out)
    }

    /// Coefficient-wise time derivative.
    pub fn time(&self) -> Series {
        Series(self.0.iter().map(|c| c.time()).collect())
    }

    pub fn truncate(mut self, len: usize) -> Series {
        self.0.truncate(len);
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(c: &[f64]) -> Series {
        Series(c.iter().map(|&x| Num::constant(x)).collect())
    }

    #[test]
    fn reciprocal_and_sqrt_invert() {
        let s = poly(&[2.0, 1.0, -0.5, 0.25, 0.1]);
        let one = s.mul(&s.recip().unwrap());
        assert!((one.0[0].v - 1.0).abs() < 1e-15);
        assert!(one.0[1..].iter().all(|c| c.v.abs() < 1e-15));
        let r = s.sqrt().unwrap();
        let back = r.mul(&r).sub(&s);
        assert!(back.0.iter().all(|c| c.v.abs() < 1e-14));
    }

    #[test]
    fn derivative_of_integral_is_identity() {
        let s = poly(&[1.0, 2.0, 3.0]);
        assert_eq!(s.integ().deriv(), s);
        assert_eq!(s.integ().head().v, 0.0);
    }

    #[test]
    fn near_singular_division() {
        let s = poly(&[1e-12, 1.0]);
        assert!(matches!(s.recip(), Err(Error::NearSingular(_))));
    }

    #[test]
    fn time_part_follows_the_product_rule() {
        let a = Series(vec![Num {
            v: 2.0,
            t: 3.0,
            mv: 2.0,
            mt: 3.0,
        }]);
        let b = Series(vec![Num {
            v: 5.0,
            t: 7.0,
            mv: 5.0,
            mt: 7.0,
        }]);
        assert_eq!(a.mul(&b).time().head().v, 2.0 * 7.0 + 3.0 * 5.0);
    }
}
