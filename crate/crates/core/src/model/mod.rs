//! The concrete system in both frames and the map between them.

mod pullback;
mod xframe;
mod yframe;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::calculus::DerivationContext;
use crate::error::{Error, Result};
use crate::expr::{Base, Expr};
use crate::opalg::{normalize_matrix, FormulaMatrix};

pub use pullback::PullbackMap;
pub use xframe::{build_x_model, ModelX};
pub use yframe::ModelY;

/// Single-coefficient perturbations of the model, used to show that each
/// claim can fail.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mutation {
    /// `3*u2*f` becomes `2*u2*f` in the m1 flow.
    M1FlowCoefficient,
    /// `-lam^-2` becomes `+lam^-2` in the auxiliary matrix.
    VLambdaSign,
    /// The (3,1) entry of the spectral matrix becomes 2.
    UEntry,
    /// Flux `a*u2*g` becomes `a*u2*f`.
    FluxG,
    /// `+Q3_y` becomes `-Q3_y` in the Miura image v.
    MiuraV,
    /// `q3 = m3*u2` is doubled.
    Q3Scale,
    /// `m1 - m3_x` becomes `m1 + m3_x` in the closed form of Q3.
    LiouvilleQ3,
    /// `3w/2` becomes `w` in the (3,1) entry of K.
    KEntry,
    /// The (1,3) entry `2D` of J1 becomes `3D`.
    J1Entry,
    /// `2*q3_y` becomes `q3_y` in the tau-flow of Q2.
    TauFlowCoefficient,
}

impl Mutation {
    pub const ALL: [Mutation; 10] = [
        Mutation::M1FlowCoefficient,
        Mutation::VLambdaSign,
        Mutation::UEntry,
        Mutation::FluxG,
        Mutation::MiuraV,
        Mutation::Q3Scale,
        Mutation::LiouvilleQ3,
        Mutation::KEntry,
        Mutation::J1Entry,
        Mutation::TauFlowCoefficient,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mutation::M1FlowCoefficient => "m1-flow-coefficient",
            Mutation::VLambdaSign => "v-lambda-sign",
            Mutation::UEntry => "u-entry",
            Mutation::FluxG => "flux-g",
            Mutation::MiuraV => "miura-v",
            Mutation::Q3Scale => "q3-scale",
            Mutation::LiouvilleQ3 => "liouville-q3",
            Mutation::KEntry => "k-entry",
            Mutation::J1Entry => "j1-entry",
            Mutation::TauFlowCoefficient => "tau-flow-coefficient",
        }
    }

    pub fn parse(s: &str) -> Result<Mutation> {
        Mutation::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::UnknownMutation(s.to_string()))
    }
}

impl fmt::Display for Mutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Both frames, their derivation contexts and the pullback.
pub struct Model {
    pub mutation: Option<Mutation>,
    pub x: ModelX,
    pub y: ModelY,
    pub x_ctx: DerivationContext,
    pub y_ctx: DerivationContext,
    pub pullback: PullbackMap,
}

impl Model {
    pub fn build(mutation: Option<Mutation>) -> Result<Model> {
        let x = ModelX::build(mutation);
        let pb_ctx = Arc::new(x.pullback_ctx());
        let y = ModelY::build(mutation, &pb_ctx)?;
        let zero_jets = [Base::Q1, Base::Q2, Base::Q3]
            .into_iter()
            .zip(y.q_liouville.iter().cloned())
            .chain(
                [Base::q1, Base::q2, Base::q3]
                    .into_iter()
                    .zip(y.q_small.iter().cloned()),
            )
            .collect();
        Ok(Model {
            mutation,
            x_ctx: x.ctx(),
            y_ctx: y.ctx(),
            pullback: PullbackMap::new(zero_jets, pb_ctx),
            x,
            y,
        })
    }

    pub fn standard() -> Model {
        Model::build(None).expect("the unperturbed model builds")
    }

    /// The pullback-mode context shared with the pullback map.
    pub fn pb_ctx(&self) -> &DerivationContext {
        self.pullback.ctx()
    }

    pub fn pull(&self, e: &Expr) -> Result<Expr> {
        self.pullback.apply(e)
    }

    pub fn pull_formulas(&self, m: &FormulaMatrix) -> Result<FormulaMatrix> {
        m.iter()
            .map(|row| row.iter().map(|f| f.map_exprs(&mut |e| self.pull(e))).collect())
            .collect()
    }

    pub const OBJECT_KEYS: [&'static str; 22] = [
        "x.U",
        "x.V",
        "x.flow",
        "x.density",
        "x.flux",
        "y.U",
        "y.V",
        "y.Q.gauge",
        "y.Q.liouville",
        "y.q",
        "y.S",
        "y.flow",
        "y.miura",
        "y.J1",
        "y.J2",
        "y.F",
        "y.K",
        "y.A",
        "y.B",
        "y.C",
        "y.ABC.pulled",
        "y.flow.pulled",
    ];

    /// Named model objects for export.
    pub fn object(&self, key: &str) -> Result<ModelObject> {
        use ModelObject::*;
        let v3 = |a: &[Expr; 3]| Vector(a.to_vec());
        let ops = |m: &FormulaMatrix| -> Result<ModelObject> {
            let n = normalize_matrix(m, &self.y_ctx)?;
            Ok(Operators(
                n.rows()
                    .iter()
                    .map(|r| r.iter().map(|op| op.to_string()).collect())
                    .collect(),
            ))
        };
        Ok(match key {
            "x.U" => Matrix(self.x.u.clone()),
            "x.V" => Matrix(self.x.v.clone()),
            "x.flow" => v3(&self.x.flows),
            "x.density" => Scalar(self.x.density.clone()),
            "x.flux" => Scalar(self.x.flux.clone()),
            "y.U" => Matrix(self.y.uy.clone()),
            "y.V" => Matrix(self.y.vy.clone()),
            "y.Q.gauge" => v3(&self.y.q_gauge),
            "y.Q.liouville" => v3(&self.y.q_liouville),
            "y.q" => v3(&self.y.q_small),
            "y.S" => v3(&self.y.s),
            "y.flow" => v3(&self.y.tau_flow),
            "y.miura" => v3(&self.y.miura),
            "y.J1" => ops(&self.y.j1)?,
            "y.J2" => ops(&self.y.j2)?,
            "y.F" => ops(&self.y.f)?,
            "y.K" => ops(&self.y.k)?,
            "y.A" => Scalar(self.y.abc[0].clone()),
            "y.B" => Scalar(self.y.abc[1].clone()),
            "y.C" => Scalar(self.y.abc[2].clone()),
            "y.ABC.pulled" => Vector(self.y.abc.iter().map(|e| self.pull(e)).collect::<Result<_>>()?),
            "y.flow.pulled" => Vector(self.y.tau_flow.iter().map(|e| self.pull(e)).collect::<Result<_>>()?),
            _ => return Err(Error::UnknownObject(key.to_string())),
        })
    }
}

/// A model object in printable form.
#[derive(Clone, Debug)]
pub enum ModelObject {
    Scalar(Expr),
    Vector(Vec<Expr>),
    Matrix(Vec<Vec<Expr>>),
    /// Normalised operator entries, printed.
    Operators(Vec<Vec<String>>),
}

impl ModelObject {
    /// Every expression inside, row-major.
    pub fn exprs(&self) -> Vec<&Expr> {
        match self {
            ModelObject::Scalar(e) => vec![e],
            ModelObject::Vector(v) => v.iter().collect(),
            ModelObject::Matrix(m) => m.iter().flatten().collect(),
            ModelObject::Operators(_) => Vec::new(),
        }
    }

    /// One line per entry: `[i,j] text`, or the bare text for scalars.
    pub fn lines(&self) -> Vec<String> {
        match self {
            ModelObject::Scalar(e) => vec![e.to_string()],
            ModelObject::Vector(v) => v.iter().enumerate().map(|(i, e)| format!("[{}] {e}", i + 1)).collect(),
            ModelObject::Matrix(m) => entries(m.iter().map(|r| r.iter().map(|e| e.to_string()).collect())),
            ModelObject::Operators(m) => entries(m.iter().cloned()),
        }
    }
}

fn entries(rows: impl Iterator<Item = Vec<String>>) -> Vec<String> {
    let mut out = Vec::new();
    for (i, r) in rows.enumerate() {
        for (j, e) in r.into_iter().enumerate() {
            out.push(format!("[{},{}] {e}", i + 1, j + 1));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pullback_examples() {
        let m = Model::standard();
        let (m1, m3) = (Expr::jet(Base::M1, 0), Expr::jet(Base::M3, 0));
        let q3 = m.pull(&Expr::jet(Base::Q3, 0)).unwrap();
        assert_eq!(q3, &(&m1 - &Expr::jet(Base::M3, 1)) / &(&Expr::a() * &m3));
        let q1 = m.pull(&Expr::jet(Base::q1, 0)).unwrap();
        let want = &(&Expr::jet(Base::F, 0) / &m3) - &(&(&m1 * &Expr::jet(Base::G, 0)) / &(&m3 * &m3));
        assert_eq!(q1, want);
        let q3y = m.pull(&Expr::jet(Base::Q3, 1)).unwrap();
        assert_eq!(q3y, &m.x_ctx.d(&q3).unwrap() / &Expr::a());
        let small = m.pull(&Expr::jet(Base::q3, 0)).unwrap();
        assert_eq!(small, &m3 * &Expr::jet(Base::U2, 0));
    }

    #[test]
    fn miura_and_b() {
        let m = Model::standard();
        assert_eq!(m.y.miura[0], -(&Expr::jet(Base::Q2, 0) + &Expr::jet(Base::Q3, 0)));
        let b = &m.y.abc[1];
        assert!(b.contains_atoms());
        let local = m.pull(b).unwrap();
        let want = m.pull(&-(&Expr::jet(Base::Q3, 0) * &Expr::jet(Base::q3, 0))).unwrap();
        assert_eq!(local, want);
    }

    #[test]
    fn obstruction_is_reported() {
        let m = Model::standard();
        let atom = m.y_ctx.apply_dinv(&Expr::jet(Base::Q1, 0)).unwrap();
        assert!(matches!(m.pull(&atom), Err(Error::NonlocalObstruction(_))));
    }

    #[test]
    fn mutation_names_round_trip() {
        for mu in Mutation::ALL {
            assert_eq!(Mutation::parse(mu.name()).unwrap(), mu);
        }
        assert!(Mutation::parse("nope").is_err());
    }
}
