//! Random periodic trigonometric-polynomial fields.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub k: u32,
    pub cos: f64,
    pub sin: f64,
}

/// `offset + sum cos*cos(kx) + sin*sin(kx)` on a period of 2π.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrigField {
    pub offset: f64,
    pub modes: Vec<Mode>,
}

impl TrigField {
    pub fn constant(c: f64) -> TrigField {
        TrigField {
            offset: c,
            modes: Vec::new(),
        }
    }

    fn random(rng: &mut impl Rng, offset: f64, kmax: u32, amplitude: f64) -> TrigField {
        let modes = (1..=kmax)
            .map(|k| Mode {
                k,
                cos: rng.gen_range(-amplitude..=amplitude),
                sin: rng.gen_range(-amplitude..=amplitude),
            })
            .collect();
        TrigField { offset, modes }
    }

    /// n-th derivative at x, with the absolute sum of its terms.
    pub fn jet(&self, x: f64, n: u32) -> (f64, f64) {
        let (mut v, mut m) = if n == 0 {
            (self.offset, self.offset.abs())
        } else {
            (0.0, 0.0)
        };
        for md in &self.modes {
            let kf = md.k as f64;
            let (s, c) = (kf * x).sin_cos();
            let scale = kf.powi(n as i32);
            // d^n cos = k^n cos(kx + nπ/2), d^n sin = k^n sin(kx + nπ/2)
            let (dc, ds) = match n % 4 {
                0 => (c, s),
                1 => (-s, c),
                2 => (-c, -s),
                _ => (s, -c),
            };
            let a = md.cos * dc * scale;
            let b = md.sin * ds * scale;
            v += a + b;
            m += a.abs() + b.abs();
        }
        (v, m)
    }

    /// Lower bound of `(1 - D^2)` applied to the field, by the triangle
    /// inequality.
    pub fn helmholtz_margin(&self) -> f64 {
        self.offset
            - self
                .modes
                .iter()
                .map(|m| (1.0 + (m.k * m.k) as f64) * (m.cos.abs() + m.sin.abs()))
                .sum::<f64>()
    }

    /// Exact interpolant of equispaced samples on [0, 2π), assuming the
    /// sampled function is a trigonometric polynomial of degree < n/2.
    pub fn from_grid(values: &[f64]) -> TrigField {
        let n = values.len();
        let mut buf: Vec<Complex<f64>> = values.iter().map(|&v| Complex::new(v, 0.0)).collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let scale = 2.0 / n as f64;
        let offset = buf[0].re / n as f64;
        let size = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let floor = 1e-15 * size;
        let modes = (1..n.div_ceil(2))
            .map(|k| Mode {
                k: k as u32,
                cos: buf[k].re * scale,
                sin: -buf[k].im * scale,
            })
            .filter(|m| m.cos.abs() > floor || m.sin.abs() > floor)
            .collect();
        TrigField { offset, modes }
    }

    /// Solves `(1 - D^2) u = self` mode by mode.
    pub fn inverse_helmholtz(&self) -> TrigField {
        TrigField {
            offset: self.offset,
            modes: self
                .modes
                .iter()
                .map(|m| {
                    let w = 1.0 + (m.k * m.k) as f64;
                    Mode {
                        k: m.k,
                        cos: m.cos / w,
                        sin: m.sin / w,
                    }
                })
                .collect(),
        }
    }

    pub fn max_wavenumber(&self) -> u32 {
        self.modes.iter().map(|m| m.k).max().unwrap_or(0)
    }
}

/// A sample of u1, u2, u3.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldSample {
    pub seed: u64,
    pub kmax: u32,
    pub u: [TrigField; 3],
}

impl FieldSample {
    /// Certified lower bounds of m2 and m3.
    pub fn margins(&self) -> [f64; 2] {
        [self.u[1].helmholtz_margin(), self.u[2].helmholtz_margin()]
    }
}

pub fn sample_fields(seed: u64, kmax: u32, amplitude: f64, offsets: [f64; 3]) -> Result<FieldSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = offsets.map(|o| TrigField::random(&mut rng, o, kmax, amplitude));
    let s = FieldSample { seed, kmax, u };
    for (name, margin) in ["m2", "m3"].into_iter().zip(s.margins()) {
        // also rejects NaN
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(margin > 0.0) {
            return Err(Error::Certificate {
                field: name.to_string(),
                margin,
            });
        }
    }
    Ok(s)
}

/// Independent fields for Q1..Q3, q1..q3 and a test function, used where a
/// claim lives in the abstract y-frame.
#[derive(Clone, Debug, PartialEq)]
pub struct YSample {
    pub q_big: [TrigField; 3],
    pub q_small: [TrigField; 3],
    pub phi: TrigField,
}

pub fn sample_y_fields(seed: u64, kmax: u32) -> YSample {
    // a separate stream so the y-fields do not repeat the u-fields
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut next = || {
        let offset = rng.gen_range(-0.5..=0.5);
        TrigField::random(&mut rng, offset, kmax, 0.3)
    };
    YSample {
        q_big: [next(), next(), next()],
        q_small: [next(), next(), next()],
        phi: next(),
    }
}

/// Evaluation points `2πj/n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
}

impl GridSpec {
    pub fn new(n: usize) -> Result<GridSpec> {
        if n < 8 {
            return Err(Error::NotNumeric(format!("grid needs at least 8 points, got {n}")));
        }
        Ok(GridSpec { n })
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |j| TAU * j as f64 / self.n as f64)
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { n: 64 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn certificate() {
        let s = sample_fields(1, 3, 0.05, [0.0, 2.0, 2.0]).unwrap();
        assert!(s.margins().iter().all(|&m| m > 0.0));
        assert!(matches!(
            sample_fields(1, 3, 10.0, [0.0, 2.0, 2.0]),
            Err(Error::Certificate { .. })
        ));
        assert_eq!(s, sample_fields(1, 3, 0.05, [0.0, 2.0, 2.0]).unwrap());
    }

    #[test]
    fn derivative_of_sine_mode_is_cosine_mode() {
        let f = TrigField {
            offset: 0.0,
            modes: vec![Mode {
                k: 2,
                cos: 0.0,
                sin: 1.0,
            }],
        };
        for x in [0.0, 0.3, 1.7, 4.0] {
            assert!((f.jet(x, 1).0 - 2.0 * (2.0 * x).cos()).abs() < 1e-14);
            assert!((f.jet(x, 3).0 + 8.0 * (2.0 * x).cos()).abs() < 1e-13);
        }
    }

    #[test]
    fn grid_interpolation_is_exact() {
        let f = sample_fields(4, 3, 0.05, [0.3, 2.0, 2.0]).unwrap().u[0].clone();
        let g = GridSpec::new(16).unwrap();
        let vals: Vec<f64> = g.points().map(|x| f.jet(x, 0).0).collect();
        let back = TrigField::from_grid(&vals);
        for x in [0.1, 2.2, 5.9] {
            assert!((back.jet(x, 2).0 - f.jet(x, 2).0).abs() < 1e-13);
        }
    }
}
