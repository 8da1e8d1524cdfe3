//! Expression language for radial weights and radial functions.
//!
//! ```text
//! expr  := term (("+" | "-") term)*
//! term  := unary (("*" | "/") unary)*
//! unary := "-" unary | power
//! power := atom ("^" unary)?
//! atom  := NUMBER | "n" | IDENT | IDENT "(" expr "," expr ")" | "(" expr ")"
//! ```
//!
//! `n` is the level `|v|`. Bare identifiers are parameters bound through a
//! [`ParamEnv`]; called identifiers must be one of the binary builtins
//! `pow`, `ifodd`, `ifzero`, `min`, `max`. Unary minus binds looser than `^`,
//! so `-2^2` is `-4`, and `^` is right-associative.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at byte {offset}")]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected character {0:?}")]
    Lexical(char),
    #[error("malformed number")]
    BadNumber,
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("function `{name}` takes 2 arguments, got {got}")]
    Arity { name: String, got: usize },
    #[error("unexpected trailing input")]
    TrailingInput,
    #[error("expected {expected}, found {found}")]
    Unexpected {
        expected: &'static str,
        found: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unbound parameter `{0}`")]
    UnboundParam(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("non-finite result")]
    NonFinite,
}

/// Parameter bindings, e.g. `M = 3`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParamEnv(BTreeMap<String, f64>);

impl ParamEnv {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.0.insert(name.to_string(), value);
        self
    }

    pub fn insert(&mut self, name: &str, value: f64) {
        self.0.insert(name.to_string(), value);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.get(name).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

impl FromIterator<(String, f64)> for ParamEnv {
    fn from_iter<I: IntoIterator<Item = (String, f64)>>(iter: I) -> Self {
        ParamEnv(iter.into_iter().collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
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

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Builtin {
    Pow,
    IfOdd,
    IfZero,
    Min,
    Max,
}

impl Builtin {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "pow" => Builtin::Pow,
            "ifodd" => Builtin::IfOdd,
            "ifzero" => Builtin::IfZero,
            "min" => Builtin::Min,
            "max" => Builtin::Max,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Pow => "pow",
            Builtin::IfOdd => "ifodd",
            Builtin::IfZero => "ifzero",
            Builtin::Min => "min",
            Builtin::Max => "max",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Number(f64),
    Level,
    Param(String),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Builtin, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn parse(text: &str) -> Result<Expr, ParseError> {
        let tokens = lex(text)?;
        let mut parser = Parser { tokens, pos: 0 };
        let expr = parser.expr()?;
        match parser.peek() {
            Token { kind: TokenKind::End, .. } => Ok(expr),
            tok => Err(ParseError {
                offset: tok.offset,
                kind: ParseErrorKind::TrailingInput,
            }),
        }
    }

    /// Evaluates at level `n`. Only the selected branch of `ifodd`/`ifzero`
    /// is evaluated.
    pub fn eval(&self, n: u64, env: &ParamEnv) -> Result<f64, EvalError> {
        let value = match self {
            Expr::Number(x) => *x,
            Expr::Level => n as f64,
            Expr::Param(name) => env
                .get(name)
                .ok_or_else(|| EvalError::UnboundParam(name.clone()))?,
            Expr::Neg(e) => -e.eval(n, env)?,
            Expr::Binary(op, a, b) => {
                let a = a.eval(n, env)?;
                let b = b.eval(n, env)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div if b == 0.0 => return Err(EvalError::DivisionByZero),
                    BinOp::Div => a / b,
                    BinOp::Pow => a.powf(b),
                }
            }
            Expr::Call(Builtin::IfOdd, a, b) => {
                if n % 2 == 1 {
                    a.eval(n, env)?
                } else {
                    b.eval(n, env)?
                }
            }
            Expr::Call(Builtin::IfZero, a, b) => {
                if n == 0 {
                    a.eval(n, env)?
                } else {
                    b.eval(n, env)?
                }
            }
            Expr::Call(f, a, b) => {
                let a = a.eval(n, env)?;
                let b = b.eval(n, env)?;
                match f {
                    Builtin::Pow => a.powf(b),
                    Builtin::Min => a.min(b),
                    Builtin::Max => a.max(b),
                    Builtin::IfOdd | Builtin::IfZero => unreachable!(),
                }
            }
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(EvalError::NonFinite)
        }
    }

    pub fn depends_on_level(&self) -> bool {
        match self {
            Expr::Number(_) | Expr::Param(_) => false,
            Expr::Level => true,
            // The branch selection itself reads n.
            Expr::Call(Builtin::IfOdd | Builtin::IfZero, _, _) => true,
            Expr::Neg(e) => e.depends_on_level(),
            Expr::Binary(_, a, b) | Expr::Call(_, a, b) => {
                a.depends_on_level() || b.depends_on_level()
            }
        }
    }

    /// Recognises expressions equal to `coef * base^n` for every `n >= 0`,
    /// returning `(coef, base)`. Level-free expressions have base 1.
    pub fn geometric_form(&self, env: &ParamEnv) -> Option<(f64, f64)> {
        if !self.depends_on_level() {
            return self.eval(0, env).ok().map(|c| (c, 1.0));
        }
        match self {
            Expr::Neg(e) => e.geometric_form(env).map(|(c, b)| (-c, b)),
            Expr::Binary(BinOp::Mul, a, b) => {
                let (ca, ba) = a.geometric_form(env)?;
                let (cb, bb) = b.geometric_form(env)?;
                Some((ca * cb, ba * bb))
            }
            Expr::Binary(BinOp::Div, a, b) => {
                let (ca, ba) = a.geometric_form(env)?;
                let (cb, bb) = b.geometric_form(env)?;
                (cb != 0.0 && bb != 0.0).then(|| (ca / cb, ba / bb))
            }
            Expr::Binary(op @ (BinOp::Add | BinOp::Sub), a, b) => {
                let (ca, ba) = a.geometric_form(env)?;
                let (cb, bb) = b.geometric_form(env)?;
                if ba != bb {
                    return None;
                }
                let coef = if *op == BinOp::Add { ca + cb } else { ca - cb };
                Some((coef, ba))
            }
            Expr::Binary(BinOp::Pow, base, exponent) | Expr::Call(Builtin::Pow, base, exponent) => {
                if base.depends_on_level() {
                    return None;
                }
                let base = base.eval(0, env).ok()?;
                let (slope, intercept) = exponent.affine_form(env)?;
                (base > 0.0).then(|| (base.powf(intercept), base.powf(slope)))
            }
            _ => None,
        }
    }

    /// `(slope, intercept)` when the expression equals `slope * n + intercept`.
    fn affine_form(&self, env: &ParamEnv) -> Option<(f64, f64)> {
        if !self.depends_on_level() {
            return self.eval(0, env).ok().map(|c| (0.0, c));
        }
        match self {
            Expr::Level => Some((1.0, 0.0)),
            Expr::Neg(e) => e.affine_form(env).map(|(s, c)| (-s, -c)),
            Expr::Binary(BinOp::Add, a, b) => {
                let (sa, ca) = a.affine_form(env)?;
                let (sb, cb) = b.affine_form(env)?;
                Some((sa + sb, ca + cb))
            }
            Expr::Binary(BinOp::Sub, a, b) => {
                let (sa, ca) = a.affine_form(env)?;
                let (sb, cb) = b.affine_form(env)?;
                Some((sa - sb, ca - cb))
            }
            Expr::Binary(BinOp::Mul, a, b) => {
                let (sa, ca) = a.affine_form(env)?;
                let (sb, cb) = b.affine_form(env)?;
                match (sa == 0.0, sb == 0.0) {
                    (true, _) => Some((ca * sb, ca * cb)),
                    (_, true) => Some((sa * cb, ca * cb)),
                    _ => None,
                }
            }
            Expr::Binary(BinOp::Div, a, b) if !b.depends_on_level() => {
                let (sa, ca) = a.affine_form(env)?;
                let d = b.eval(0, env).ok()?;
                (d != 0.0).then(|| (sa / d, ca / d))
            }
            _ => None,
        }
    }
}

/// Canonical fully parenthesised form; parses back to an equivalent tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Number(x) => write!(f, "{x}"),
            Expr::Level => f.write_str("n"),
            Expr::Param(name) => f.write_str(name),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Binary(op, a, b) => write!(f, "({a}{}{b})", op.symbol()),
            Expr::Call(func, a, b) => write!(f, "{}({a},{b})", func.name()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum TokenKind {
    Number(f64),
    Ident(String),
    Symbol(char),
    End,
}

#[derive(Clone, Debug, PartialEq)]
struct Token {
    kind: TokenKind,
    offset: usize,
}

fn describe(tok: &Token) -> String {
    match &tok.kind {
        TokenKind::Number(x) => format!("number {x}"),
        TokenKind::Ident(name) => format!("identifier `{name}`"),
        TokenKind::Symbol(c) => format!("`{c}`"),
        TokenKind::End => "end of input".to_string(),
    }
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'.' {
                i += 1;
                let frac_start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i == frac_start {
                    return Err(ParseError {
                        offset: start,
                        kind: ParseErrorKind::BadNumber,
                    });
                }
            }
            let value = text[start..i].parse::<f64>().map_err(|_| ParseError {
                offset: start,
                kind: ParseErrorKind::BadNumber,
            })?;
            tokens.push(Token {
                kind: TokenKind::Number(value),
                offset: start,
            });
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            tokens.push(Token {
                kind: TokenKind::Ident(text[start..i].to_string()),
                offset: start,
            });
        } else if b"+-*/^(),".contains(&c) {
            tokens.push(Token {
                kind: TokenKind::Symbol(c as char),
                offset: i,
            });
            i += 1;
        } else {
            let ch = text[i..].chars().next().unwrap_or('\u{fffd}');
            return Err(ParseError {
                offset: i,
                kind: ParseErrorKind::Lexical(ch),
            });
        }
    }
    tokens.push(Token {
        kind: TokenKind::End,
        offset: text.len(),
    });
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> Token {
        let tok = self.tokens[self.pos].clone();
        if tok.kind != TokenKind::End {
            self.pos += 1;
        }
        tok
    }

    fn eat(&mut self, symbol: char) -> bool {
        if self.peek().kind == TokenKind::Symbol(symbol) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, symbol: char, expected: &'static str) -> Result<(), ParseError> {
        if self.eat(symbol) {
            Ok(())
        } else {
            Err(self.unexpected(expected))
        }
    }

    fn unexpected(&self, expected: &'static str) -> ParseError {
        let tok = self.peek();
        ParseError {
            offset: tok.offset,
            kind: ParseErrorKind::Unexpected {
                expected,
                found: describe(tok),
            },
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat('+') {
                BinOp::Add
            } else if self.eat('-') {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat('*') {
                BinOp::Mul
            } else if self.eat('/') {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            Ok(Expr::Neg(Box::new(self.unary()?)))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.eat('^') {
            let exponent = self.unary()?;
            Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let tok = self.peek().clone();
        match tok.kind {
            TokenKind::Number(x) => {
                self.bump();
                Ok(Expr::Number(x))
            }
            TokenKind::Ident(name) if name == "n" => {
                self.bump();
                Ok(Expr::Level)
            }
            TokenKind::Ident(name) => {
                self.bump();
                if !self.eat('(') {
                    return Ok(Expr::Param(name));
                }
                let builtin = Builtin::from_name(&name).ok_or_else(|| ParseError {
                    offset: tok.offset,
                    kind: ParseErrorKind::UnknownFunction(name.clone()),
                })?;
                let mut args = vec![self.expr()?];
                while self.eat(',') {
                    args.push(self.expr()?);
                }
                self.expect(')', "`)` or `,`")?;
                if args.len() != 2 {
                    return Err(ParseError {
                        offset: tok.offset,
                        kind: ParseErrorKind::Arity {
                            name,
                            got: args.len(),
                        },
                    });
                }
                let b = args.pop().expect("two args");
                let a = args.pop().expect("two args");
                Ok(Expr::Call(builtin, Box::new(a), Box::new(b)))
            }
            TokenKind::Symbol('(') => {
                self.bump();
                let inner = self.expr()?;
                self.expect(')', "`)`")?;
                Ok(inner)
            }
            _ => Err(self.unexpected("a number, `n`, an identifier or `(`")),
        }
    }
}
