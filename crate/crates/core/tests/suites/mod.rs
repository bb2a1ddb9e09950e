//! Randomised kernel properties, shared by the `properties` and
//! `acceptance` targets. Every suite runs a fixed-seed proptest runner over
//! at least 200 generated cases.
#![allow(dead_code)]

use std::sync::LazyLock;

use proptest::prelude::*;
use proptest::test_runner::{RngAlgorithm, TestCaseError, TestRng, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use reclink::calculus::DerivationContext;
use reclink::cli::{parse_with, Contexts};
use reclink::expr::{Base, Expr, Frame, IndepVar};
use reclink::model::Model;
use reclink::numoracle::{sample_fields, sample_y_fields, Evaluator, FieldSample, Series, XEnv, YEnv, YSample};
use reclink::opalg::{normalize_matrix, DiffOp};
use reclink::randexpr::{random_diffop, random_expr, random_tree, Shape, Tree};

static MODEL: LazyLock<Model> = LazyLock::new(Model::standard);
static SAMPLE: LazyLock<FieldSample> = LazyLock::new(|| sample_fields(3, 3, 0.05, [0.0, 2.0, 2.0]).unwrap());
static YS: LazyLock<YSample> = LazyLock::new(|| sample_y_fields(3, 3));

const CASES: u32 = 256;

pub type Outcome = Result<(), String>;

fn run(seed: u8, cases: u32, f: impl Fn(&mut ChaCha8Rng) -> Result<(), TestCaseError>) -> Outcome {
    let config = ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    };
    let rng = TestRng::from_seed(RngAlgorithm::ChaCha, &[seed; 32]);
    TestRunner::new_with_rng(config, rng)
        .run(&any::<u64>(), |s| f(&mut ChaCha8Rng::seed_from_u64(s)))
        .map_err(|e| e.to_string())
}

fn ctx_for(frame: Frame) -> &'static DerivationContext {
    match frame {
        Frame::X => &MODEL.x_ctx,
        Frame::Y => &MODEL.y_ctx,
    }
}

fn shallow(s: Shape) -> Shape {
    Shape { depth: 2, ..s }
}

fn any_shape(rng: &mut impl Rng) -> Shape {
    if rng.gen_bool(0.5) {
        Shape::x()
    } else {
        Shape::y()
    }
}

fn expr(rng: &mut impl Rng, s: &Shape) -> Expr {
    random_expr(rng, s, ctx_for(s.frame))
}

/// A y-frame expression carrying a formal antiderivative.
fn with_atom(rng: &mut impl Rng) -> Expr {
    let s = shallow(Shape::y().polynomial());
    let arg = expr(rng, &s);
    let atom = MODEL.y_ctx.apply_dinv(&arg).unwrap();
    &(&expr(rng, &s) * &atom) + &expr(rng, &s)
}

fn check(b: bool, what: &str) -> Outcome {
    if b {
        Ok(())
    } else {
        Err(what.to_string())
    }
}

fn ok(b: bool, what: impl FnOnce() -> String) -> Result<(), TestCaseError> {
    if b {
        Ok(())
    } else {
        Err(TestCaseError::fail(what()))
    }
}

/// `|a - b|` within `tol` of the larger term magnitude.
fn close(a: &Series, b: &Series, tol: f64) -> bool {
    let (x, y) = (a.head(), b.head());
    let scale = x.mv.max(y.mv).max(f64::MIN_POSITIVE);
    (x.v - y.v).abs() <= tol * scale
}

fn with_evaluator<R>(frame: Frame, point: f64, len: usize, f: impl FnOnce(&Evaluator) -> R) -> R {
    match frame {
        Frame::X => {
            let env = XEnv::new(&SAMPLE.u, None, point, 1.3, len);
            f(&Evaluator::new(&env))
        }
        Frame::Y => {
            let env = YEnv {
                q_big: &YS.q_big,
                q_small: &YS.q_small,
                y0: point,
                len,
            };
            f(&Evaluator::new(&env))
        }
    }
}

pub fn canonicalization_is_idempotent() -> Outcome {
    run(1, 1000, |rng| {
        let e = if rng.gen_bool(0.2) {
            with_atom(rng)
        } else {
            let s = any_shape(rng);
            expr(rng, &s)
        };
        let again = e.map_generators(&mut |_| Ok(None)).unwrap();
        ok(again == e && again.to_string() == e.to_string(), || {
            format!("{e} renormalised to {again}")
        })
    })
}

pub fn canonical_forms_are_reduced() -> Outcome {
    run(2, CASES, |rng| {
        let e = if rng.gen_bool(0.3) {
            with_atom(rng)
        } else {
            let s = any_shape(rng);
            expr(rng, &s)
        };
        for g in e.gens() {
            if let Some(j) = g.as_jet() {
                ok(!j.base.is_eliminable(), || format!("{j} survives in {e}"))?;
            }
            if let Some(a) = g.as_atom() {
                ok(!a.argument().is_zero(), || format!("zero atom in {e}"))?;
            }
        }
        let a = reclink::expr::Gen::A;
        ok(e.numerator().degree_in(&a) <= 1, || format!("a^2 in {e}"))?;
        for (f, _) in e.denominator_factors() {
            ok(!f.gens().iter().any(|g| g.is_a() || g.is_lambda()), || {
                format!("a or lam in denominator of {e}")
            })?;
        }
        Ok(())
    })
}

#[allow(clippy::eq_op)]
pub fn field_axioms_hold_symbolically() -> Outcome {
    run(3, CASES, |rng| {
        let s = shallow(any_shape(rng));
        let (a, b, c) = (expr(rng, &s), expr(rng, &s), expr(rng, &s));
        ok(&(&a + &b) + &c == &a + &(&b + &c), || "additive associativity".into())?;
        ok(&a + &b == &b + &a, || "additive commutativity".into())?;
        ok(&(&a * &b) * &c == &a * &(&b * &c), || {
            "multiplicative associativity".into()
        })?;
        ok(&a * &b == &b * &a, || "multiplicative commutativity".into())?;
        ok(&a * &(&b + &c) == &(&a * &b) + &(&a * &c), || "distributivity".into())?;
        ok((&a - &a).is_zero(), || "additive inverse".into())?;
        // division by a non-monomial in lam is outside the field
        if let Ok(q) = a.try_div(&a) {
            ok(q.is_one(), || format!("{a} / itself"))?;
        }
        Ok(())
    })
}

pub fn field_axioms_hold_numerically() -> Outcome {
    run(4, CASES, |rng| {
        let s = shallow(any_shape(rng));
        let ctx = ctx_for(s.frame);
        let (a, b, c) = (random_tree(rng, &s), random_tree(rng, &s), random_tree(rng, &s));
        let bx = |t: &Tree| Box::new(t.clone());
        // nested left side evaluated node by node, right side canonicalised
        let pairs = [
            (
                Tree::Mul(bx(&a), Box::new(Tree::Add(bx(&b), bx(&c)))),
                Tree::Add(Box::new(Tree::Mul(bx(&a), bx(&b))), Box::new(Tree::Mul(bx(&a), bx(&c)))),
            ),
            (
                Tree::Mul(Box::new(Tree::Mul(bx(&a), bx(&b))), bx(&c)),
                Tree::Mul(bx(&c), Box::new(Tree::Mul(bx(&b), bx(&a)))),
            ),
            (Tree::Add(bx(&a), bx(&b)), Tree::Add(bx(&b), bx(&a))),
        ];
        let point = rng.gen_range(0.0..std::f64::consts::TAU);
        with_evaluator(s.frame, point, 6, |ev| {
            for (l, r) in &pairs {
                let lv = l.eval(ev).unwrap();
                let rv = ev.eval(&r.to_expr(ctx).unwrap()).unwrap();
                ok(close(&lv, &rv, 1e-10), || format!("{:?} vs {:?}", lv.head(), rv.head()))?;
            }
            Ok(())
        })
    })
}

pub fn a_reduction_is_sound() -> Outcome {
    run(5, CASES, |rng| {
        let s = Shape::x();
        let t = Tree::Mul(Box::new(random_tree(rng, &s)), Box::new(Tree::Leaf(Expr::a())));
        let e = t.to_expr(&MODEL.x_ctx).unwrap();
        let point = rng.gen_range(0.0..std::f64::consts::TAU);
        with_evaluator(Frame::X, point, 6, |ev| {
            let raw = t.eval(ev).unwrap();
            let canon = ev.eval(&e).unwrap();
            ok(close(&raw, &canon, 1e-12), || {
                format!("{e}: {:?} vs {:?}", raw.head(), canon.head())
            })
        })
    })
}

pub fn equal_expressions_agree_numerically() -> Outcome {
    run(6, CASES, |rng| {
        let s = any_shape(rng);
        let ctx = ctx_for(s.frame);
        let t = random_tree(rng, &s);
        let u = random_tree(
            rng,
            &Shape {
                lambda: false,
                a: false,
                derivatives: false,
                ..shallow(s.polynomial())
            },
        );
        let safe = Tree::Add(
            Box::new(Tree::Leaf(Expr::int(5))),
            Box::new(Tree::Pow(Box::new(u.clone()), 2)),
        );
        let detour = Tree::Div(
            Box::new(Tree::Sub(
                Box::new(Tree::Mul(Box::new(t.clone()), Box::new(safe.clone()))),
                Box::new(Tree::Sub(Box::new(u.clone()), Box::new(u))),
            )),
            Box::new(safe),
        );
        let (e1, e2) = (t.to_expr(ctx).unwrap(), detour.to_expr(ctx).unwrap());
        ok(e1.equals(&e2).unwrap(), || format!("{e1} vs {e2}"))?;
        let point = rng.gen_range(0.0..std::f64::consts::TAU);
        with_evaluator(s.frame, point, 6, |ev| {
            let (a, b) = (t.eval(ev).unwrap(), detour.eval(ev).unwrap());
            ok(close(&a, &b, 1e-10), || format!("{:?} vs {:?}", a.head(), b.head()))
        })
    })
}

pub fn numeric_derivatives_are_exact() -> Outcome {
    run(7, CASES, |rng| {
        let s = any_shape(rng);
        let ctx = ctx_for(s.frame);
        let e = expr(rng, &s);
        let de = ctx.d(&e).unwrap();
        let point = rng.gen_range(0.0..std::f64::consts::TAU);
        with_evaluator(s.frame, point, 3, |ev| {
            let analytic = ev.eval(&e).unwrap().deriv();
            let symbolic = ev.eval(&de).unwrap();
            ok(close(&analytic, &symbolic, 1e-10), || format!("D({e})"))
        })
    })
}

pub fn leibniz_rule() -> Outcome {
    run(8, CASES, |rng| {
        let (e1, e2, ctx) = if rng.gen_bool(0.3) {
            (with_atom(rng), with_atom(rng), &MODEL.y_ctx)
        } else {
            let s = shallow(any_shape(rng));
            (expr(rng, &s), expr(rng, &s), ctx_for(s.frame))
        };
        let d = |e: &Expr| ctx.d(e).unwrap();
        let lhs = d(&(&e1 * &e2));
        let rhs = &(&d(&e1) * &e2) + &(&e1 * &d(&e2));
        ok(lhs == rhs, || format!("D({e1} * {e2})"))
    })
}

pub fn space_and_time_derivatives_commute_on_shell() -> Outcome {
    run(9, CASES, |rng| {
        let e = expr(rng, &shallow(Shape::on_shell()));
        let x = &MODEL.x_ctx;
        let xt = x.d(&x.dt(&e).unwrap()).unwrap();
        let tx = x.dt(&x.d(&e).unwrap()).unwrap();
        ok(xt == tx, || format!("D_x D_t vs D_t D_x on {e}"))
    })
}

pub fn pullback_derivatives_are_consistent() -> Outcome {
    let pb = MODEL.pb_ctx();
    let x = &MODEL.x_ctx;
    let transport = &Expr::jet(Base::U2, 0) * &Expr::jet(Base::G, 0);
    run(10, CASES, |rng| {
        let e = expr(rng, &shallow(Shape::on_shell()));
        let dy = pb.total_derivative(&e, IndepVar::Y).unwrap();
        ok(dy == &x.d(&e).unwrap() / &Expr::a(), || format!("D_y on {e}"))?;
        let dtau = pb.total_derivative(&e, IndepVar::Tau).unwrap();
        let want = &x.dt(&e).unwrap() + &(&transport * &x.d(&e).unwrap());
        ok(dtau == want, || format!("D_tau on {e}"))
    })?;
    let a = Expr::a();
    let rel = &(&a * &a) - &(&Expr::jet(Base::M2, 0) * &Expr::jet(Base::M3, 0));
    check(x.d(&rel).unwrap().is_zero(), "D(a^2 - m2*m3) is not zero")
}

fn op_shape() -> Shape {
    Shape {
        depth: 1,
        lambda: false,
        ..Shape::y()
    }
}

fn same(a: &DiffOp, b: &DiffOp) -> bool {
    a.sub(b).unwrap().is_zero()
}

pub fn composition_is_associative() -> Outcome {
    let ctx = &MODEL.y_ctx;
    run(11, CASES, |rng| {
        let s = op_shape();
        let [a, b, c] = [0; 3].map(|_| random_diffop(rng, &s, 2, ctx));
        let l = a.compose(&b, ctx).unwrap().compose(&c, ctx).unwrap();
        let r = a.compose(&b.compose(&c, ctx).unwrap(), ctx).unwrap();
        ok(same(&l, &r), || format!("({a})({b})({c})"))
    })
}

pub fn application_is_a_homomorphism() -> Outcome {
    let ctx = &MODEL.y_ctx;
    run(12, CASES, |rng| {
        let s = op_shape();
        let (a, b) = (random_diffop(rng, &s, 2, ctx), random_diffop(rng, &s, 2, ctx));
        let e = expr(rng, &shallow(Shape::y()));
        let lhs = a.compose(&b, ctx).unwrap().apply(&e, ctx).unwrap();
        let rhs = a.apply(&b.apply(&e, ctx).unwrap(), ctx).unwrap();
        ok(lhs == rhs, || format!("({a})({b}) on {e}"))
    })
}

pub fn adjoint_is_an_involution() -> Outcome {
    let ctx = &MODEL.y_ctx;
    run(13, CASES, |rng| {
        let s = op_shape();
        let (a, b) = (random_diffop(rng, &s, 2, ctx), random_diffop(rng, &s, 2, ctx));
        let aa = a.adjoint(ctx).unwrap().adjoint(ctx).unwrap();
        ok(same(&aa, &a), || format!("({a})**"))?;
        let ab = a.compose(&b, ctx).unwrap().adjoint(ctx).unwrap();
        let ba = b.adjoint(ctx).unwrap().compose(&a.adjoint(ctx).unwrap(), ctx).unwrap();
        ok(same(&ab, &ba), || format!("(({a})({b}))*"))
    })
}

pub fn hamiltonian_operators_are_skew() -> Outcome {
    let ctx = &MODEL.y_ctx;
    for j in [&MODEL.y.j1, &MODEL.y.j2] {
        let op = normalize_matrix(j, ctx).unwrap();
        let structural: Vec<Vec<_>> = j.iter().map(|r| r.iter().map(|f| f.adjoint()).collect()).collect();
        // J* with rows and columns swapped
        let n = structural.len();
        let transposed: Vec<Vec<_>> = (0..n)
            .map(|i| (0..n).map(|k| structural[k][i].clone()).collect())
            .collect();
        let star = normalize_matrix(&transposed, ctx).unwrap();
        check(star.add(&op).unwrap().is_zero(), "J* + J is not zero")?;
    }
    Ok(())
}

pub fn printing_then_parsing_round_trips() -> Outcome {
    let ctx = Contexts::of(&MODEL);
    run(14, 300, |rng| {
        let e = if rng.gen_bool(0.25) {
            with_atom(rng)
        } else {
            let s = any_shape(rng);
            expr(rng, &s)
        };
        let text = e.to_string();
        let back = parse_with(&text, &ctx).unwrap();
        ok(back == e, || format!("{text} parsed as {back}"))?;
        ok(back.to_string() == text, || format!("{text} reprinted as {back}"))
    })
}

pub fn named_objects_round_trip() -> Outcome {
    let ctx = Contexts::of(&MODEL);
    for key in Model::OBJECT_KEYS {
        let obj = MODEL.object(key).unwrap();
        for e in obj.exprs() {
            let back = parse_with(&e.to_string(), &ctx).unwrap();
            check(&back == e, &format!("{key}: {e} parsed as {back}"))?;
        }
    }
    Ok(())
}

/// Every suite, by name.
pub type Suite = fn() -> Outcome;

pub const SUITES: [(&str, Suite); 16] = [
    ("canonicalization_is_idempotent", canonicalization_is_idempotent),
    ("canonical_forms_are_reduced", canonical_forms_are_reduced),
    ("field_axioms_hold_symbolically", field_axioms_hold_symbolically),
    ("field_axioms_hold_numerically", field_axioms_hold_numerically),
    ("a_reduction_is_sound", a_reduction_is_sound),
    (
        "equal_expressions_agree_numerically",
        equal_expressions_agree_numerically,
    ),
    ("numeric_derivatives_are_exact", numeric_derivatives_are_exact),
    ("leibniz_rule", leibniz_rule),
    (
        "space_and_time_derivatives_commute_on_shell",
        space_and_time_derivatives_commute_on_shell,
    ),
    (
        "pullback_derivatives_are_consistent",
        pullback_derivatives_are_consistent,
    ),
    ("composition_is_associative", composition_is_associative),
    ("application_is_a_homomorphism", application_is_a_homomorphism),
    ("adjoint_is_an_involution", adjoint_is_an_involution),
    ("hamiltonian_operators_are_skew", hamiltonian_operators_are_skew),
    ("printing_then_parsing_round_trips", printing_then_parsing_round_trips),
    ("named_objects_round_trip", named_objects_round_trip),
];
