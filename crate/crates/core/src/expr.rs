//! Expression language for metric coefficients and profiles.
//!
//! Grammar (whitespace is insignificant):
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := factor (("*" | "/") factor)*
//! factor := base ("^" factor)?
//! base   := NUMBER | IDENT | IDENT "(" expr ")" | "(" expr ")" | "-" base
//! ```
//!
//! Identifiers are the variables `x`, `y`, `t` and the functions
//! `sin cos tan sinh cosh tanh exp log sqrt abs`. Unary minus binds tighter
//! than `^`, so `-x^2` is `(-x)^2`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::ScalarField2;
use crate::jet::{Func, Jet2, JetError};
use crate::profile::Profile1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    X,
    Y,
    T,
}

impl Var {
    fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::Y => "y",
            Var::T => "t",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expression {
    Num(f64),
    Var(Var),
    Neg(Box<Expression>),
    Binary(BinOp, Box<Expression>, Box<Expression>),
    Call(Func, Box<Expression>),
}

impl Expression {
    pub fn parse(src: &str) -> Result<Expression> {
        let tokens = lex(src)?;
        let mut p = Parser {
            tokens: &tokens,
            i: 0,
            end: src.len(),
        };
        let e = p.expr()?;
        if let Some(tok) = p.peek() {
            return Err(Error::Parse {
                pos: tok.pos,
                msg: format!("unexpected {}", tok.kind),
            });
        }
        Ok(e)
    }

    pub fn uses(&self, v: Var) -> bool {
        match self {
            Expression::Num(_) => false,
            Expression::Var(w) => *w == v,
            Expression::Neg(e) | Expression::Call(_, e) => e.uses(v),
            Expression::Binary(_, a, b) => a.uses(v) || b.uses(v),
        }
    }

    /// Evaluates with the given jets bound to `x`, `y` and `t`.
    pub fn eval(&self, x: &Jet2, y: &Jet2, t: &Jet2) -> Result<Jet2, JetError> {
        Ok(match self {
            Expression::Num(c) => Jet2::constant(*c),
            Expression::Var(Var::X) => *x,
            Expression::Var(Var::Y) => *y,
            Expression::Var(Var::T) => *t,
            Expression::Neg(e) => -e.eval(x, y, t)?,
            Expression::Call(f, e) => e.eval(x, y, t)?.apply(*f)?,
            Expression::Binary(op, a, b) => {
                let a = a.eval(x, y, t)?;
                let b = b.eval(x, y, t)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a.checked_div(&b)?,
                    BinOp::Pow => a.pow(&b)?,
                }
            }
        })
    }

    /// Plain `f64` evaluation, used by finite-difference diagnostics.
    pub fn eval_f64(&self, x: f64, y: f64, t: f64) -> Result<f64, JetError> {
        self.eval(&Jet2::constant(x), &Jet2::constant(y), &Jet2::constant(t))
            .map(|j| j.value)
    }
}

/// Fully parenthesized rendering that re-parses to the same tree.
impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expression::Num(c) => write!(f, "{c:?}"),
            Expression::Var(v) => write!(f, "{}", v.name()),
            Expression::Neg(e) => match **e {
                Expression::Num(_) | Expression::Var(_) | Expression::Call(..) => {
                    write!(f, "-{e}")
                }
                _ => write!(f, "-({e})"),
            },
            Expression::Call(func, e) => write!(f, "{}({e})", func.name()),
            Expression::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum TokKind {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
}

impl fmt::Display for TokKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokKind::Num(n) => write!(f, "number {n}"),
            TokKind::Ident(s) => write!(f, "identifier `{s}`"),
            TokKind::Op(c) => write!(f, "`{c}`"),
            TokKind::LParen => write!(f, "`(`"),
            TokKind::RParen => write!(f, "`)`"),
            TokKind::Comma => write!(f, "`,`"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokKind,
    pos: usize,
}

fn lex(src: &str) -> Result<Vec<Token>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let kind = if c.is_ascii_digit() || c == '.' {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text = &src[start..i];
            let v: f64 = text.parse().map_err(|_| Error::Parse {
                pos: start,
                msg: format!("malformed number `{text}`"),
            })?;
            TokKind::Num(v)
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            TokKind::Ident(src[start..i].to_string())
        } else {
            i += 1;
            match c {
                '+' | '-' | '*' | '/' | '^' => TokKind::Op(c),
                '(' => TokKind::LParen,
                ')' => TokKind::RParen,
                ',' => TokKind::Comma,
                _ => {
                    return Err(Error::Parse {
                        pos: start,
                        msg: format!("unexpected character `{c}`"),
                    })
                }
            }
        };
        out.push(Token { kind, pos: start });
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: &'a [Token],
    i: usize,
    end: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.i)
    }

    fn peek_op(&self) -> Option<char> {
        match self.peek() {
            Some(Token {
                kind: TokKind::Op(c),
                ..
            }) => Some(*c),
            _ => None,
        }
    }

    fn pos(&self) -> usize {
        self.peek().map_or(self.end, |t| t.pos)
    }

    fn expr(&mut self) -> Result<Expression> {
        let mut lhs = self.term()?;
        while let Some(c @ ('+' | '-')) = self.peek_op() {
            self.i += 1;
            let rhs = self.term()?;
            let op = if c == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Expression::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expression> {
        let mut lhs = self.factor()?;
        while let Some(c @ ('*' | '/')) = self.peek_op() {
            self.i += 1;
            let rhs = self.factor()?;
            let op = if c == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = Expression::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expression> {
        let base = self.base()?;
        if self.peek_op() == Some('^') {
            self.i += 1;
            let exp = self.factor()?;
            return Ok(Expression::Binary(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn expect_rparen(&mut self, open: usize) -> Result<()> {
        match self.peek() {
            Some(Token {
                kind: TokKind::RParen,
                ..
            }) => {
                self.i += 1;
                Ok(())
            }
            Some(Token {
                kind: TokKind::Comma,
                pos,
            }) => Err(Error::Parse {
                pos: *pos,
                msg: "unexpected `,`".into(),
            }),
            _ => Err(Error::Parse {
                pos: self.pos(),
                msg: format!("expected `)` to close `(` at {open}"),
            }),
        }
    }

    fn base(&mut self) -> Result<Expression> {
        let Some(tok) = self.peek().cloned() else {
            return Err(Error::Parse {
                pos: self.end,
                msg: "unexpected end of input".into(),
            });
        };
        self.i += 1;
        match tok.kind {
            TokKind::Num(v) => Ok(Expression::Num(v)),
            TokKind::Op('-') => Ok(Expression::Neg(Box::new(self.base()?))),
            TokKind::LParen => {
                let e = self.expr()?;
                self.expect_rparen(tok.pos)?;
                Ok(e)
            }
            TokKind::Ident(name) => {
                let called = matches!(
                    self.peek(),
                    Some(Token {
                        kind: TokKind::LParen,
                        ..
                    })
                );
                let var = match name.as_str() {
                    "x" => Some(Var::X),
                    "y" => Some(Var::Y),
                    "t" => Some(Var::T),
                    _ => None,
                };
                if let Some(v) = var {
                    if called {
                        return Err(Error::Arity {
                            name,
                            pos: tok.pos,
                            msg: "variables take no arguments".into(),
                        });
                    }
                    return Ok(Expression::Var(v));
                }
                let Some(func) = Func::from_name(&name) else {
                    return Err(Error::UnknownIdentifier { name, pos: tok.pos });
                };
                if !called {
                    return Err(Error::Arity {
                        name,
                        pos: tok.pos,
                        msg: "function requires one parenthesized argument".into(),
                    });
                }
                let open = self.pos();
                self.i += 1;
                let arg = self.expr()?;
                if let Some(Token {
                    kind: TokKind::Comma,
                    pos,
                }) = self.peek()
                {
                    return Err(Error::Arity {
                        name,
                        pos: *pos,
                        msg: "function takes exactly one argument".into(),
                    });
                }
                self.expect_rparen(open)?;
                Ok(Expression::Call(func, Box::new(arg)))
            }
            other => Err(Error::Parse {
                pos: tok.pos,
                msg: format!("unexpected {other}"),
            }),
        }
    }
}

/// A parsed expression in `x` and `y`, evaluated pointwise with jets.
#[derive(Debug, Clone)]
pub struct CompiledField {
    expr: Expression,
    source: String,
}

impl CompiledField {
    pub fn expression(&self) -> &Expression {
        &self.expr
    }

    pub fn source(&self) -> &str {
        &self.source
    }
}

impl ScalarField2 for CompiledField {
    fn eval(&self, x: f64, y: f64) -> Result<Jet2> {
        self.expr
            .eval(&Jet2::var_x(x), &Jet2::var_y(y), &Jet2::ZERO)
            .map_err(Error::domain(x, y))
    }
}

/// Compiles a bivariate field. The profile variable `t` is unbound here and
/// is rejected; use [`compile_profile`] for univariate profiles.
pub fn compile_expression(src: &str) -> Result<CompiledField> {
    let expr = Expression::parse(src)?;
    if expr.uses(Var::T) {
        let pos = src.find('t').unwrap_or(0);
        return Err(Error::UnknownIdentifier {
            name: "t (only bound in profile expressions)".into(),
            pos,
        });
    }
    Ok(CompiledField {
        expr,
        source: src.to_string(),
    })
}

/// A parsed univariate expression in `t`.
#[derive(Debug, Clone)]
pub struct CompiledProfile {
    expr: Expression,
    source: String,
}

impl CompiledProfile {
    pub fn source(&self) -> &str {
        &self.source
    }
}

impl Profile1 for CompiledProfile {
    fn eval_jet(&self, t: &Jet2) -> Result<Jet2, JetError> {
        self.expr.eval(&Jet2::ZERO, &Jet2::ZERO, t)
    }
}

/// Compiles a univariate profile in the variable `t`.
pub fn compile_profile(src: &str) -> Result<CompiledProfile> {
    let expr = Expression::parse(src)?;
    for v in [Var::X, Var::Y] {
        if expr.uses(v) {
            return Err(Error::UnknownIdentifier {
                name: format!("{} (profiles depend on t only)", v.name()),
                pos: src.find(v.name()).unwrap_or(0),
            });
        }
    }
    Ok(CompiledProfile {
        expr,
        source: src.to_string(),
    })
}

/// Shared handle to a compiled field.
pub fn compile_shared(src: &str) -> Result<Arc<dyn ScalarField2>> {
    Ok(Arc::new(compile_expression(src)?))
}
