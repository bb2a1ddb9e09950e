//! The expression language: a recursive-descent parser over the printed
//! form, so that printing and parsing round-trip.
//!
//! ```text
//! expr   := term (("+"|"-") term)*
//! term   := factor (("*"|"/") factor)*
//! factor := "-" factor | base ("^" signed-int)?
//! base   := integer | jet | "lam" | "a" | "Dinv" "(" expr ")"
//!         | "D" "[" ivar ("," ivar)* "]" "(" expr ")" | "(" expr ")"
//! jet    := name ("_" suffix)?      e.g. u2_xx, Q3_y, m1_x, Q1_tau
//! ```

use std::str::FromStr;

use num_bigint::BigInt;

use crate::calculus::DerivationContext;
use crate::error::{Error, Result};
use crate::expr::{Base, Expr, Frame, IndepVar, Rat};
use crate::model::Model;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Sym(char),
    End,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn tokenize(text: &str, first_line: usize, first_column: usize) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    for (li, line) in text.lines().enumerate() {
        let line_no = first_line + li;
        let chars: Vec<char> = line.chars().collect();
        let shift = if li == 0 { first_column } else { 1 };
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let column = i + shift;
            if c.is_whitespace() {
                i += 1;
            } else if c.is_ascii_digit() {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                let n = BigInt::from_str(&s).map_err(|e| syntax(line_no, column, e.to_string()))?;
                out.push(Token {
                    tok: Tok::Int(n),
                    line: line_no,
                    column,
                });
            } else if c.is_ascii_alphabetic() {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                out.push(Token {
                    tok: Tok::Ident(s),
                    line: line_no,
                    column,
                });
            } else if "+-*/^()[],".contains(c) {
                out.push(Token {
                    tok: Tok::Sym(c),
                    line: line_no,
                    column,
                });
                i += 1;
            } else {
                return Err(syntax(line_no, column, format!("unexpected character `{c}`")));
            }
        }
    }
    let (line, column) = match text.lines().enumerate().last() {
        Some((0, l)) => (first_line, l.chars().count() + first_column),
        Some((li, l)) => (first_line + li, l.chars().count() + 1),
        None => (first_line, first_column),
    };
    out.push(Token {
        tok: Tok::End,
        line,
        column,
    });
    Ok(out)
}

/// Derivative contexts used for `D[...]`, `Dinv` and jet suffixes.
pub struct Contexts<'a> {
    pub x: &'a DerivationContext,
    pub y: &'a DerivationContext,
}

impl<'a> Contexts<'a> {
    pub fn of(model: &'a Model) -> Self {
        Contexts {
            x: &model.x_ctx,
            y: &model.y_ctx,
        }
    }

    fn for_frame(&self, f: Option<Frame>) -> &DerivationContext {
        match f {
            Some(Frame::Y) => self.y,
            _ => self.x,
        }
    }
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    ctx: &'a Contexts<'a>,
}

impl Parser<'_> {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn at(&self, c: char) -> bool {
        self.peek().tok == Tok::Sym(c)
    }

    fn expect(&mut self, c: char) -> Result<()> {
        let t = self.next();
        if t.tok == Tok::Sym(c) {
            Ok(())
        } else {
            Err(syntax(
                t.line,
                t.column,
                format!("expected `{c}`, found {}", describe(&t.tok)),
            ))
        }
    }

    /// Attach a position to kernel errors that would otherwise lack one.
    fn located<T>(&self, t: &Token, r: Result<T>) -> Result<T> {
        r.map_err(|e| match e {
            Error::Syntax { .. } => e,
            other => syntax(t.line, t.column, other.to_string()),
        })
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut acc = self.term()?;
        while self.at('+') || self.at('-') {
            let op = self.next();
            let rhs = self.term()?;
            acc = if op.tok == Tok::Sym('+') {
                self.located(&op, acc.try_add(&rhs))?
            } else {
                self.located(&op, acc.try_sub(&rhs))?
            };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.factor()?;
        while self.at('*') || self.at('/') {
            let op = self.next();
            let rhs = self.factor()?;
            acc = if op.tok == Tok::Sym('*') {
                self.located(&op, acc.try_mul(&rhs))?
            } else {
                self.located(&op, acc.try_div(&rhs))?
            };
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Expr> {
        if self.at('-') {
            self.next();
            return Ok(self.factor()?.neg());
        }
        let b = self.base()?;
        if !self.at('^') {
            return Ok(b);
        }
        let op = self.next();
        let neg = self.at('-');
        if neg {
            self.next();
        }
        let t = self.next();
        let Tok::Int(n) = &t.tok else {
            return Err(syntax(
                t.line,
                t.column,
                format!("expected an integer exponent, found {}", describe(&t.tok)),
            ));
        };
        let n: i32 = i32::try_from(n).map_err(|_| syntax(t.line, t.column, "exponent out of range"))?;
        self.located(&op, b.try_pow(if neg { -n } else { n }))
    }

    fn base(&mut self) -> Result<Expr> {
        let t = self.next();
        match &t.tok {
            Tok::Int(n) => Ok(Expr::constant(Rat::from_integer(n.clone()))),
            Tok::Sym('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(s) => match s.as_str() {
                "lam" => Ok(Expr::lambda()),
                "a" => Ok(Expr::a()),
                "Dinv" => {
                    self.expect('(')?;
                    let e = self.expr()?;
                    self.expect(')')?;
                    let ctx = self.ctx.for_frame(e.frame());
                    self.located(&t, ctx.apply_dinv(&e))
                }
                "D" => {
                    self.expect('[')?;
                    let mut vars = vec![self.ivar()?];
                    while self.at(',') {
                        self.next();
                        vars.push(self.ivar()?);
                    }
                    self.expect(']')?;
                    self.expect('(')?;
                    let mut e = self.expr()?;
                    self.expect(')')?;
                    for v in vars {
                        let ctx = self.ctx.for_frame(Some(v.frame()));
                        e = self.located(&t, ctx.total_derivative(&e, v))?;
                    }
                    Ok(e)
                }
                _ => self.jet(&t, s),
            },
            other => Err(syntax(
                t.line,
                t.column,
                format!("expected an operand, found {}", describe(other)),
            )),
        }
    }

    fn ivar(&mut self) -> Result<IndepVar> {
        let t = self.next();
        match &t.tok {
            Tok::Ident(s) => IndepVar::parse(s).ok_or_else(|| {
                syntax(
                    t.line,
                    t.column,
                    format!("unknown variable `{s}`; expected x, t, y or tau"),
                )
            }),
            other => Err(syntax(
                t.line,
                t.column,
                format!("expected a variable, found {}", describe(other)),
            )),
        }
    }

    fn jet(&self, t: &Token, s: &str) -> Result<Expr> {
        let (name, suffix) = s.split_once('_').unwrap_or((s, ""));
        let base = Base::parse(name)
            .ok_or_else(|| syntax(t.line, t.column, Error::UnknownSymbol(name.to_string()).to_string()))?;
        let frame = base.frame();
        let (space, time) = split_suffix(frame, suffix).ok_or_else(|| {
            syntax(
                t.line,
                t.column,
                format!("bad derivative suffix `_{suffix}` for {frame:?}-frame `{name}`"),
            )
        })?;
        let mut e = self.located(t, Expr::make_jet(name, space as i64))?;
        let ctx = self.ctx.for_frame(Some(frame));
        for _ in 0..time {
            e = self.located(t, ctx.dt(&e))?;
        }
        Ok(e)
    }
}

/// Counts space and time letters in a suffix such as `xxt` or `ytau`.
fn split_suffix(frame: Frame, suffix: &str) -> Option<(u32, u32)> {
    let (space, time) = match frame {
        Frame::X => ("x", "t"),
        Frame::Y => ("y", "tau"),
    };
    let (mut s, mut t) = (0, 0);
    let mut rest = suffix;
    while !rest.is_empty() {
        if let Some(r) = rest.strip_prefix(time) {
            t += 1;
            rest = r;
        } else {
            rest = rest.strip_prefix(space)?;
            s += 1;
        }
    }
    if !suffix.is_empty() && s + t == 0 {
        return None;
    }
    Some((s, t))
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Int(n) => format!("`{n}`"),
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Sym(c) => format!("`{c}`"),
        Tok::End => "end of input".into(),
    }
}

/// Parses text that starts at `line`, `column` of a surrounding file.
pub fn parse_at(text: &str, line: usize, column: usize, ctx: &Contexts) -> Result<Expr> {
    let toks = tokenize(text, line, column)?;
    let mut p = Parser { toks, pos: 0, ctx };
    let e = p.expr()?;
    let t = p.peek();
    if t.tok != Tok::End {
        return Err(syntax(t.line, t.column, format!("unexpected {}", describe(&t.tok))));
    }
    Ok(e)
}

pub fn parse_with(text: &str, ctx: &Contexts) -> Result<Expr> {
    parse_at(text, 1, 1, ctx)
}

/// Parses against the unperturbed model's derivative rules.
pub fn parse_expression(text: &str) -> Result<Expr> {
    let model = super::standard_model();
    parse_with(text, &Contexts::of(model))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Expr {
        parse_expression(s).unwrap()
    }

    #[test]
    fn examples() {
        assert_eq!(p("u2 - D[x,x](u2)"), Expr::jet(Base::M2, 0));
        assert!(p("a^2 - (u2 - u2_xx)*(u3 - u3_xx)").is_zero());
        assert_eq!(p("Dinv(0) + lam^2 / lam"), Expr::lambda());
        assert_eq!(p("-1/2/(u3 - u3_xx)"), Expr::ratio(-1, 2) / Expr::jet(Base::M3, 0));
        assert_eq!(p("m2_t"), super::super::standard_model().x.flows[1]);
    }

    #[test]
    fn errors_carry_positions() {
        match parse_expression("u2 +\n  * u3") {
            Err(Error::Syntax { line, column, .. }) => assert_eq!((line, column), (2, 3)),
            other => panic!("{other:?}"),
        }
        match parse_expression("u2 + zz") {
            Err(Error::Syntax {
                line: 1,
                column: 6,
                message,
            }) => assert!(message.contains("zz")),
            other => panic!("{other:?}"),
        }
        match parse_expression("u2 + Q1") {
            Err(Error::Syntax { column: 4, message, .. }) => assert!(message.contains("frame")),
            other => panic!("{other:?}"),
        }
        assert!(parse_expression("u2_y").is_err());
        assert!(parse_expression("(u2").is_err());
    }

    #[test]
    fn printed_forms_round_trip() {
        for s in ["(u2 + u3)/(u1*u3^2)", "-3/2*Q1*Q2_yy + lam^-2", "Dinv(Q1) + Q2"] {
            let e = p(s);
            assert_eq!(p(&e.to_string()), e);
        }
    }
}
