//! Generators of the expression ring: jet variables, the spectral parameter,
//! the algebraic density `a`, and formal antiderivative atoms.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::Expr;

/// The two coordinate systems: `(x, t)` for the original system and
/// `(y, tau)` after the reciprocal transformation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Frame {
    X,
    Y,
}

impl Frame {
    pub fn space(self) -> IndepVar {
        match self {
            Frame::X => IndepVar::X,
            Frame::Y => IndepVar::Y,
        }
    }

    pub fn time(self) -> IndepVar {
        match self {
            Frame::X => IndepVar::T,
            Frame::Y => IndepVar::Tau,
        }
    }

    /// Merge two optional frames; `None` is frame-neutral.
    pub fn join(a: Option<Frame>, b: Option<Frame>) -> Result<Option<Frame>, (Frame, Frame)> {
        match (a, b) {
            (Some(l), Some(r)) if l != r => Err((l, r)),
            (Some(f), _) | (_, Some(f)) => Ok(Some(f)),
            (None, None) => Ok(None),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum IndepVar {
    X,
    T,
    Y,
    Tau,
}

impl IndepVar {
    pub fn frame(self) -> Frame {
        match self {
            IndepVar::X | IndepVar::T => Frame::X,
            IndepVar::Y | IndepVar::Tau => Frame::Y,
        }
    }

    pub fn is_time(self) -> bool {
        matches!(self, IndepVar::T | IndepVar::Tau)
    }

    pub fn name(self) -> &'static str {
        match self {
            IndepVar::X => "x",
            IndepVar::T => "t",
            IndepVar::Y => "y",
            IndepVar::Tau => "tau",
        }
    }

    pub fn parse(s: &str) -> Option<IndepVar> {
        Some(match s {
            "x" => IndepVar::X,
            "t" => IndepVar::T,
            "y" => IndepVar::Y,
            "tau" => IndepVar::Tau,
            _ => return None,
        })
    }
}

impl fmt::Display for IndepVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Dependent-variable names. Declaration order is the generator order.
#[allow(non_camel_case_types)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Base {
    U1,
    U2,
    U3,
    M1,
    M2,
    M3,
    F,
    G,
    Q1,
    Q2,
    Q3,
    q1,
    q2,
    q3,
    U,
    V,
    W,
}

impl Base {
    pub const ALL: [Base; 17] = [
        Base::U1,
        Base::U2,
        Base::U3,
        Base::M1,
        Base::M2,
        Base::M3,
        Base::F,
        Base::G,
        Base::Q1,
        Base::Q2,
        Base::Q3,
        Base::q1,
        Base::q2,
        Base::q3,
        Base::U,
        Base::V,
        Base::W,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Base::U1 => "u1",
            Base::U2 => "u2",
            Base::U3 => "u3",
            Base::M1 => "m1",
            Base::M2 => "m2",
            Base::M3 => "m3",
            Base::F => "f",
            Base::G => "g",
            Base::Q1 => "Q1",
            Base::Q2 => "Q2",
            Base::Q3 => "Q3",
            Base::q1 => "q1",
            Base::q2 => "q2",
            Base::q3 => "q3",
            Base::U => "u",
            Base::V => "v",
            Base::W => "w",
        }
    }

    pub fn parse(s: &str) -> Option<Base> {
        Base::ALL.iter().copied().find(|b| b.name() == s)
    }

    pub fn frame(self) -> Frame {
        if (self as u32) < Base::Q1 as u32 {
            Frame::X
        } else {
            Frame::Y
        }
    }

    /// Eliminable names are expanded by definition and never survive in a
    /// canonical expression.
    pub fn is_eliminable(self) -> bool {
        matches!(
            self,
            Base::M1 | Base::M2 | Base::M3 | Base::F | Base::G | Base::U | Base::V | Base::W
        )
    }

    fn index(self) -> u32 {
        self as u32
    }

    fn from_index(i: u32) -> Base {
        Base::ALL[i as usize]
    }
}

impl fmt::Display for Base {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct JetVar {
    pub base: Base,
    pub space: u32,
    pub time: u32,
}

impl JetVar {
    pub fn new(base: Base, space: u32) -> JetVar {
        JetVar { base, space, time: 0 }
    }

    pub fn frame(&self) -> Frame {
        self.base.frame()
    }

    pub fn shifted(&self, by: u32) -> JetVar {
        JetVar {
            space: self.space + by,
            ..*self
        }
    }
}

impl fmt::Display for JetVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.base.name())?;
        if self.space == 0 && self.time == 0 {
            return Ok(());
        }
        f.write_str("_")?;
        let (s, t) = match self.frame() {
            Frame::X => ("x", "t"),
            Frame::Y => ("y", "tau"),
        };
        for _ in 0..self.space {
            f.write_str(s)?;
        }
        for _ in 0..self.time {
            f.write_str(t)?;
        }
        Ok(())
    }
}

const SPACE_LIMIT: u32 = 1 << 16;
const LAMBDA_CODE: u32 = u32::MAX - 1;
const A_CODE: u32 = u32::MAX;

/// A polynomial generator. Variant order plus the code layout of `Var`
/// realise the fixed generator order: jets by (name, space order, time
/// order), then lam, then a, then atoms by printed argument.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Gen {
    Var(u32),
    Atom(AtomRef),
}

impl Gen {
    pub const LAMBDA: Gen = Gen::Var(LAMBDA_CODE);
    pub const A: Gen = Gen::Var(A_CODE);

    pub fn jet(j: JetVar) -> Gen {
        assert!(j.space < SPACE_LIMIT && j.time < 16, "jet order out of range");
        Gen::Var((j.base.index() << 20) | (j.space << 4) | j.time)
    }

    pub fn as_jet(&self) -> Option<JetVar> {
        match self {
            Gen::Var(c) if *c < LAMBDA_CODE => Some(JetVar {
                base: Base::from_index(c >> 20),
                space: (c >> 4) & (SPACE_LIMIT - 1),
                time: c & 15,
            }),
            _ => None,
        }
    }

    pub fn as_atom(&self) -> Option<&AtomRef> {
        match self {
            Gen::Atom(a) => Some(a),
            _ => None,
        }
    }

    pub fn is_lambda(&self) -> bool {
        *self == Gen::LAMBDA
    }

    pub fn is_a(&self) -> bool {
        *self == Gen::A
    }

    /// The frame the generator belongs to; lam is frame-neutral.
    pub fn frame(&self) -> Option<Frame> {
        match self {
            Gen::Var(LAMBDA_CODE) => None,
            Gen::Var(A_CODE) => Some(Frame::X),
            Gen::Var(_) => self.as_jet().map(|j| j.frame()),
            Gen::Atom(a) => a.0.frame,
        }
    }
}

impl fmt::Display for Gen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gen::Var(LAMBDA_CODE) => f.write_str("lam"),
            Gen::Var(A_CODE) => f.write_str("a"),
            Gen::Var(_) => write!(f, "{}", self.as_jet().expect("jet code")),
            Gen::Atom(a) => write!(f, "Dinv({})", a.0.key),
        }
    }
}

impl fmt::Debug for Gen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

pub struct AtomData {
    pub arg: Expr,
    pub key: String,
    pub frame: Option<Frame>,
}

/// A formal antiderivative of a canonical, nonzero, normalised argument.
/// Identity, order and hashing all go through the printed argument.
#[derive(Clone)]
pub struct AtomRef(pub(crate) Arc<AtomData>);

impl AtomRef {
    pub(crate) fn new(arg: Expr) -> AtomRef {
        let key = arg.to_string();
        let frame = arg.frame();
        AtomRef(Arc::new(AtomData { arg, key, frame }))
    }

    pub fn argument(&self) -> &Expr {
        &self.0.arg
    }

    pub fn key(&self) -> &str {
        &self.0.key
    }
}

impl PartialEq for AtomRef {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.key == other.0.key
    }
}

impl Eq for AtomRef {}

impl Hash for AtomRef {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.key.hash(state)
    }
}

impl PartialOrd for AtomRef {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for AtomRef {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.key.cmp(&other.0.key)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jet_code_round_trips() {
        for base in Base::ALL {
            for space in [0, 1, 7, 300] {
                for time in [0, 1] {
                    let j = JetVar { base, space, time };
                    assert_eq!(Gen::jet(j).as_jet(), Some(j));
                }
            }
        }
        assert_eq!(Gen::LAMBDA.as_jet(), None);
        assert_eq!(Gen::A.as_jet(), None);
    }

    #[test]
    fn generator_order_follows_alphabet_then_orders() {
        let u1 = Gen::jet(JetVar::new(Base::U1, 0));
        let u1xx = Gen::jet(JetVar::new(Base::U1, 2));
        let u2 = Gen::jet(JetVar::new(Base::U2, 0));
        assert!(u1 < u1xx && u1xx < u2 && u2 < Gen::LAMBDA && Gen::LAMBDA < Gen::A);
    }

    #[test]
    fn jet_display() {
        assert_eq!(JetVar::new(Base::U2, 2).to_string(), "u2_xx");
        assert_eq!(JetVar::new(Base::Q3, 1).to_string(), "Q3_y");
        assert_eq!(JetVar::new(Base::q1, 0).to_string(), "q1");
    }
}
