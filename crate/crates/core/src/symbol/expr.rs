//! Symbol expression language: tokenizer, recursive-descent parser, evaluator
//! and a fully parenthesized printer whose output reparses to the same tree.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | base ('^' ['-'] base)?
//! base   := number | number 'i' | 'i' | 'twopi' | k<j> | x<j>
//!         | '(' expr ')' | func '(' expr ')'
//! func   := exp | sin | cos | sqrt | abs | step
//! ```
//!
//! Exponents must be constant and real. `step(t)` is 1 for `Re t >= 0`, else 0.

use std::fmt;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Exp,
    Sin,
    Cos,
    Sqrt,
    Abs,
    Step,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "exp" => Func::Exp,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "step" => Func::Step,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Step => "step",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }
}

/// Expression tree. Variable indices are 1-based as written (`k1` is `K(1)`).
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Real(f64),
    /// Purely imaginary literal `b i`; the bare unit `i` is `Imag(1.0)`.
    Imag(f64),
    TwoPi,
    K(usize),
    X(usize),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    /// Largest variable index used (0 when the expression is constant).
    pub fn max_axis(&self) -> usize {
        match self {
            Expr::Real(_) | Expr::Imag(_) | Expr::TwoPi => 0,
            Expr::K(j) | Expr::X(j) => *j,
            Expr::Neg(a) | Expr::Call(_, a) => a.max_axis(),
            Expr::Binary(_, a, b) | Expr::Pow(a, b) => a.max_axis().max(b.max_axis()),
        }
    }

    pub fn uses_x(&self) -> bool {
        match self {
            Expr::X(_) => true,
            Expr::Real(_) | Expr::Imag(_) | Expr::TwoPi | Expr::K(_) => false,
            Expr::Neg(a) | Expr::Call(_, a) => a.uses_x(),
            Expr::Binary(_, a, b) | Expr::Pow(a, b) => a.uses_x() || b.uses_x(),
        }
    }

    pub fn is_constant(&self) -> bool {
        self.max_axis() == 0
    }

    /// Evaluates at lattice point `k` and torus point `x` (both 0-based slices).
    pub fn eval<T: Real>(&self, k: &[i64], x: &[T]) -> Complex<T> {
        let zero = T::zero();
        match self {
            Expr::Real(v) => Complex::new(T::lit(*v), zero),
            Expr::Imag(v) => Complex::new(zero, T::lit(*v)),
            Expr::TwoPi => Complex::new(T::TAU(), zero),
            Expr::K(j) => Complex::new(T::from_i64(k[j - 1]).unwrap(), zero),
            Expr::X(j) => Complex::new(x[j - 1], zero),
            Expr::Neg(a) => -a.eval(k, x),
            Expr::Binary(op, a, b) => {
                let (a, b) = (a.eval(k, x), b.eval(k, x));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => mul(a, b),
                    BinOp::Div => div(a, b),
                }
            }
            Expr::Pow(base, exponent) => {
                let b = base.eval(k, x);
                let e = exponent.eval::<T>(k, x).re;
                power(b, e)
            }
            Expr::Call(f, a) => {
                let z = a.eval(k, x);
                match f {
                    Func::Exp => {
                        if z.im == zero {
                            Complex::new(z.re.exp(), zero)
                        } else {
                            z.exp()
                        }
                    }
                    Func::Sin => {
                        if z.im == zero {
                            Complex::new(z.re.sin(), zero)
                        } else {
                            z.sin()
                        }
                    }
                    Func::Cos => {
                        if z.im == zero {
                            Complex::new(z.re.cos(), zero)
                        } else {
                            z.cos()
                        }
                    }
                    Func::Sqrt => {
                        if z.im == zero && z.re >= zero {
                            Complex::new(z.re.sqrt(), zero)
                        } else {
                            z.sqrt()
                        }
                    }
                    Func::Abs => Complex::new(z.norm(), zero),
                    Func::Step => {
                        if z.re >= zero {
                            Complex::new(T::one(), zero)
                        } else {
                            Complex::new(zero, zero)
                        }
                    }
                }
            }
        }
    }
}

// Real operands stay on the real line so that, e.g., 0 * inf-free products of
// real symbols carry no spurious imaginary rounding.
fn mul<T: Real>(a: Complex<T>, b: Complex<T>) -> Complex<T> {
    if a.im == T::zero() && b.im == T::zero() {
        Complex::new(a.re * b.re, T::zero())
    } else {
        a * b
    }
}

fn div<T: Real>(a: Complex<T>, b: Complex<T>) -> Complex<T> {
    if a.im == T::zero() && b.im == T::zero() {
        Complex::new(a.re / b.re, T::zero())
    } else {
        a / b
    }
}

fn power<T: Real>(b: Complex<T>, e: T) -> Complex<T> {
    if e == e.round() && e.abs() <= T::lit(64.0) {
        let p = e.to_i32().unwrap();
        if b.im == T::zero() {
            return Complex::new(b.re.powi(p), T::zero());
        }
        return b.powi(p);
    }
    if b.im == T::zero() && b.re > T::zero() {
        Complex::new(b.re.powf(e), T::zero())
    } else {
        b.powf(e)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Real(v) => write!(f, "{v:?}"),
            Expr::Imag(v) => write!(f, "{v:?}i"),
            Expr::TwoPi => write!(f, "twopi"),
            Expr::K(j) => write!(f, "k{j}"),
            Expr::X(j) => write!(f, "x{j}"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::Pow(a, b) => write!(f, "({a}^{b})"),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    ImagNum(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(usize, Tok)>> {
        let mut lexer = Lexer { src, pos: 0 };
        let mut out = Vec::new();
        loop {
            let (pos, tok) = lexer.next()?;
            let end = tok == Tok::End;
            out.push((pos, tok));
            if end {
                return Ok(out);
            }
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn next(&mut self) -> Result<(usize, Tok)> {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(c) = self.peek() else {
            return Ok((start, Tok::End));
        };
        let single = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(tok) = single {
            self.pos += 1;
            return Ok((start, tok));
        }
        if c.is_ascii_digit() || c == '.' {
            return self.number(start);
        }
        if c.is_ascii_alphabetic() {
            while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
                self.pos += 1;
            }
            return Ok((start, Tok::Ident(self.src[start..self.pos].to_string())));
        }
        Err(Error::Parse {
            position: start,
            message: format!("unexpected character {c:?}"),
        })
    }

    fn number(&mut self, start: usize) -> Result<(usize, Tok)> {
        let bytes = self.src.as_bytes();
        let mut end = start;
        while end < bytes.len() && (bytes[end].is_ascii_digit() || bytes[end] == b'.') {
            end += 1;
        }
        if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
            let mut probe = end + 1;
            if probe < bytes.len() && (bytes[probe] == b'+' || bytes[probe] == b'-') {
                probe += 1;
            }
            if probe < bytes.len() && bytes[probe].is_ascii_digit() {
                while probe < bytes.len() && bytes[probe].is_ascii_digit() {
                    probe += 1;
                }
                end = probe;
            }
        }
        let text = &self.src[start..end];
        let value: f64 = text.parse().map_err(|_| Error::Parse {
            position: start,
            message: format!("malformed number {text:?}"),
        })?;
        self.pos = end;
        // `2i` is an imaginary literal; `2in` would be an identifier glued to a number
        if bytes.get(end) == Some(&b'i')
            && !matches!(bytes.get(end + 1), Some(b) if b.is_ascii_alphanumeric() || *b == b'_')
        {
            self.pos += 1;
            return Ok((start, Tok::ImagNum(value)));
        }
        Ok((start, Tok::Num(value)))
    }
}

struct Parser {
    tokens: Vec<(usize, Tok)>,
    cursor: usize,
    n: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.cursor].1
    }

    fn pos(&self) -> usize {
        self.tokens[self.cursor].0
    }

    fn bump(&mut self) -> Tok {
        let tok = self.tokens[self.cursor].1.clone();
        if tok != Tok::End {
            self.cursor += 1;
        }
        tok
    }

    fn error<V>(&self, message: impl Into<String>) -> Result<V> {
        Err(Error::Parse {
            position: self.pos(),
            message: message.into(),
        })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected {what}"))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.factor()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let base = self.base()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let exp_pos = self.pos();
        let exponent = if *self.peek() == Tok::Minus {
            self.bump();
            Expr::Neg(Box::new(self.base()?))
        } else {
            self.base()?
        };
        if !exponent.is_constant() {
            return Err(Error::Parse {
                position: exp_pos,
                message: "exponent must be a constant".into(),
            });
        }
        let value = exponent.eval::<f64>(&[], &[]);
        if value.im != 0.0 || !value.re.is_finite() {
            return Err(Error::Parse {
                position: exp_pos,
                message: "exponent must be a finite real constant".into(),
            });
        }
        Ok(Expr::Pow(Box::new(base), Box::new(exponent)))
    }

    fn base(&mut self) -> Result<Expr> {
        let pos = self.pos();
        match self.bump() {
            Tok::Num(v) => Ok(Expr::Real(v)),
            Tok::ImagNum(v) => Ok(Expr::Imag(v)),
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            Tok::Ident(name) => self.ident(pos, &name),
            Tok::End => Err(Error::Parse {
                position: pos,
                message: "unexpected end of input".into(),
            }),
            other => Err(Error::Parse {
                position: pos,
                message: format!("unexpected token {other:?}"),
            }),
        }
    }

    fn ident(&mut self, pos: usize, name: &str) -> Result<Expr> {
        if name == "i" {
            return Ok(Expr::Imag(1.0));
        }
        if name == "twopi" {
            return Ok(Expr::TwoPi);
        }
        if let Some(func) = Func::from_name(name) {
            self.expect(Tok::LParen, &format!("'(' after {name}"))?;
            let arg = self.expr()?;
            self.expect(Tok::RParen, "')'")?;
            return Ok(Expr::Call(func, Box::new(arg)));
        }
        let (head, digits) = name.split_at(1);
        if (head == "k" || head == "x") && !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
            let axis: usize = digits.parse().map_err(|_| Error::Parse {
                position: pos,
                message: format!("bad variable index in {name}"),
            })?;
            if axis == 0 || axis > self.n {
                return Err(Error::VariableOutOfRange {
                    name: name.to_string(),
                    axis,
                    n: self.n,
                });
            }
            return Ok(if head == "k" { Expr::K(axis) } else { Expr::X(axis) });
        }
        Err(Error::Parse {
            position: pos,
            message: format!("unknown identifier {name:?}"),
        })
    }
}

/// Parses `text` as a symbol in `n` variables per side.
pub fn parse_expr(text: &str, n: usize) -> Result<Expr> {
    if text.trim().is_empty() {
        return Err(Error::Parse {
            position: 0,
            message: "empty expression".into(),
        });
    }
    let tokens = Lexer::tokens(text)?;
    let mut parser = Parser {
        tokens,
        cursor: 0,
        n,
    };
    let expr = parser.expr()?;
    if *parser.peek() != Tok::End {
        return parser.error("unexpected trailing input");
    }
    Ok(expr)
}
