//! A deliberately tiny expression language for coefficient fields.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?
//! primary := number | const | var | func '(' expr (',' expr)? ')' | '(' expr ')'
//! func    := abs | exp | log | min | max
//! const   := e | pi
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so
//! `-y^2 = -(y^2)` and `2^-1 = 0.5`.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use num_traits::Float;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func1 {
    Abs,
    Exp,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func2 {
    Min,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NamedConst {
    E,
    Pi,
}

impl NamedConst {
    pub fn value(self) -> f64 {
        match self {
            NamedConst::E => core::f64::consts::E,
            NamedConst::Pi => core::f64::consts::PI,
        }
    }
}

/// Parsed expression tree. Variables are indices into the caller's variable
/// list; `names` is only needed for printing.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Const(NamedConst),
    Var(usize),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call1(Func1, Box<Expr>),
    Call2(Func2, Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    /// Depends on no variable.
    Constant,
    Even,
    Odd,
    None,
}

impl Expr {
    pub fn bin(op: BinOp, l: Expr, r: Expr) -> Expr {
        Expr::Bin(op, Box::new(l), Box::new(r))
    }

    /// Parses `src`; `resolve` maps an identifier to a variable index.
    pub fn parse(src: &str, resolve: &dyn Fn(&str) -> Option<usize>) -> Result<Expr> {
        let tokens = lex(src)?;
        let mut p = Parser {
            tokens,
            pos: 0,
            resolve,
        };
        let e = p.expr()?;
        match p.peek() {
            Tok::End => Ok(e),
            _ => Err(p.error("unexpected trailing input")),
        }
    }

    /// Evaluates with IEEE semantics; `vars[i]` is the value of `Var(i)`.
    pub fn eval(&self, vars: &[f64]) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Const(c) => c.value(),
            Expr::Var(i) => vars[*i],
            Expr::Neg(a) => -a.eval(vars),
            Expr::Bin(op, a, b) => apply_bin(*op, a.eval(vars), b.eval(vars)),
            Expr::Call1(f, a) => apply1(*f, a.eval(vars)),
            Expr::Call2(f, a, b) => apply2(*f, a.eval(vars), b.eval(vars)),
        }
    }

    pub fn uses_var(&self, idx: usize) -> bool {
        match self {
            Expr::Num(_) | Expr::Const(_) => false,
            Expr::Var(i) => *i == idx,
            Expr::Neg(a) | Expr::Call1(_, a) => a.uses_var(idx),
            Expr::Bin(_, a, b) | Expr::Call2(_, a, b) => a.uses_var(idx) || b.uses_var(idx),
        }
    }

    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Num(_) | Expr::Const(_) => None,
            Expr::Var(i) => Some(*i),
            Expr::Neg(a) | Expr::Call1(_, a) => a.max_var(),
            Expr::Bin(_, a, b) | Expr::Call2(_, a, b) => match (a.max_var(), b.max_var()) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (x, None) => x,
                (None, y) => y,
            },
        }
    }

    fn const_value(&self) -> Option<f64> {
        if self.max_var().is_none() {
            Some(self.eval(&[]))
        } else {
            None
        }
    }

    /// Structural parity in a single variable.
    pub fn parity(&self) -> Parity {
        use Parity::*;
        match self {
            Expr::Num(_) | Expr::Const(_) => Constant,
            Expr::Var(_) => Odd,
            Expr::Neg(a) => a.parity(),
            Expr::Bin(op, a, b) => {
                let (pa, pb) = (a.parity(), b.parity());
                match op {
                    BinOp::Add | BinOp::Sub => match (pa, pb) {
                        (Constant, Constant) => Constant,
                        (Constant | Even, Constant | Even) => Even,
                        (Odd, Odd) => Odd,
                        _ => None,
                    },
                    BinOp::Mul | BinOp::Div => match (pa, pb) {
                        (None, _) | (_, None) => None,
                        (Constant, x) | (x, Constant) => x,
                        (Even, Even) | (Odd, Odd) => Even,
                        _ => Odd,
                    },
                    BinOp::Pow => match (pa, b.const_value()) {
                        (Constant, _) if pb == Constant => Constant,
                        (Constant | Even, _) if matches!(pb, Constant | Even) => Even,
                        (Odd, Some(k)) if k == k.trunc() => {
                            if (k / 2.0) == (k / 2.0).trunc() {
                                Even
                            } else {
                                Odd
                            }
                        }
                        _ => None,
                    },
                }
            }
            Expr::Call1(f, a) => match (f, a.parity()) {
                (_, Constant) => Constant,
                (Func1::Abs, Even | Odd) => Even,
                (_, Even) => Even,
                _ => None,
            },
            Expr::Call2(_, a, b) => match (a.parity(), b.parity()) {
                (Constant, Constant) => Constant,
                (Constant | Even, Constant | Even) => Even,
                _ => None,
            },
        }
    }

    /// A symbolic expression for `log(self)` when the expression is a
    /// product/quotient/power of exponentials and positive constants.
    pub fn log_form(&self) -> Option<Expr> {
        match self {
            Expr::Call1(Func1::Exp, g) => Some((**g).clone()),
            Expr::Num(v) if *v > 0.0 => Some(Expr::Num(v.ln())),
            Expr::Const(c) => Some(Expr::Num(c.value().ln())),
            Expr::Bin(BinOp::Mul, a, b) => match (a.log_form(), b.log_form()) {
                (Some(la), Some(lb)) => Some(Expr::bin(BinOp::Add, la, lb)),
                _ => None,
            },
            Expr::Bin(BinOp::Div, a, b) => match (a.log_form(), b.log_form()) {
                (Some(la), Some(lb)) => Some(Expr::bin(BinOp::Sub, la, lb)),
                _ => None,
            },
            Expr::Bin(BinOp::Pow, a, k) if k.max_var().is_none() => {
                a.log_form().map(|la| Expr::bin(BinOp::Mul, (**k).clone(), la))
            }
            _ => None,
        }
    }

    /// Prints in canonical form using `names` for variables.
    pub fn display<'a>(&'a self, names: &'a [&'a str]) -> DisplayExpr<'a> {
        DisplayExpr { expr: self, names }
    }

    fn prec(&self) -> u8 {
        match self {
            Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Neg(_) => 3,
            Expr::Bin(BinOp::Pow, ..) => 4,
            Expr::Num(v) if *v < 0.0 || v.is_sign_negative() => 3,
            _ => 5,
        }
    }

    /// Compiles to a postfix program for fast repeated evaluation.
    pub fn compile(&self) -> Program {
        let mut ops = Vec::new();
        emit(self, &mut ops);
        let mut depth = 0usize;
        let mut max_depth = 0usize;
        for op in &ops {
            depth = match op {
                Op::Push(_) | Op::Load(_) => depth + 1,
                Op::Neg | Op::F1(_) => depth,
                Op::Bin(_) | Op::F2(_) => depth - 1,
            };
            max_depth = max_depth.max(depth);
        }
        Program { ops, max_depth }
    }
}

fn apply_bin(op: BinOp, a: f64, b: f64) -> f64 {
    match op {
        BinOp::Add => a + b,
        BinOp::Sub => a - b,
        BinOp::Mul => a * b,
        BinOp::Div => a / b,
        BinOp::Pow => a.powf(b),
    }
}

fn apply1(f: Func1, a: f64) -> f64 {
    match f {
        Func1::Abs => a.abs(),
        Func1::Exp => a.exp(),
        Func1::Log => a.ln(),
    }
}

fn apply2(f: Func2, a: f64, b: f64) -> f64 {
    match f {
        Func2::Min => a.min(b),
        Func2::Max => a.max(b),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    Push(f64),
    Load(usize),
    Neg,
    Bin(BinOp),
    F1(Func1),
    F2(Func2),
}

fn emit(e: &Expr, ops: &mut Vec<Op>) {
    match e {
        Expr::Num(v) => ops.push(Op::Push(*v)),
        Expr::Const(c) => ops.push(Op::Push(c.value())),
        Expr::Var(i) => ops.push(Op::Load(*i)),
        Expr::Neg(a) => {
            emit(a, ops);
            ops.push(Op::Neg);
        }
        Expr::Bin(op, a, b) => {
            emit(a, ops);
            emit(b, ops);
            ops.push(Op::Bin(*op));
        }
        Expr::Call1(f, a) => {
            emit(a, ops);
            ops.push(Op::F1(*f));
        }
        Expr::Call2(f, a, b) => {
            emit(a, ops);
            emit(b, ops);
            ops.push(Op::F2(*f));
        }
    }
}

/// Postfix form of an [`Expr`]; evaluation is allocation-free for stack
/// depths up to 64.
#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    ops: Vec<Op>,
    max_depth: usize,
}

impl Program {
    pub fn eval(&self, vars: &[f64]) -> f64 {
        if self.max_depth <= 64 {
            let mut stack = [0.0f64; 64];
            run(&self.ops, vars, &mut stack)
        } else {
            let mut stack = alloc::vec![0.0f64; self.max_depth];
            run(&self.ops, vars, &mut stack)
        }
    }
}

fn run(ops: &[Op], vars: &[f64], stack: &mut [f64]) -> f64 {
    let mut sp = 0usize;
    for op in ops {
        match *op {
            Op::Push(v) => {
                stack[sp] = v;
                sp += 1;
            }
            Op::Load(i) => {
                stack[sp] = vars[i];
                sp += 1;
            }
            Op::Neg => stack[sp - 1] = -stack[sp - 1],
            Op::F1(f) => stack[sp - 1] = apply1(f, stack[sp - 1]),
            Op::Bin(b) => {
                sp -= 1;
                stack[sp - 1] = apply_bin(b, stack[sp - 1], stack[sp]);
            }
            Op::F2(f) => {
                sp -= 1;
                stack[sp - 1] = apply2(f, stack[sp - 1], stack[sp]);
            }
        }
    }
    stack[0]
}

pub struct DisplayExpr<'a> {
    expr: &'a Expr,
    names: &'a [&'a str],
}

impl fmt::Display for DisplayExpr<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(self.expr, self.names, f)
    }
}

fn write_wrapped(e: &Expr, names: &[&str], paren: bool, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if paren {
        f.write_str("(")?;
        write_expr(e, names, f)?;
        f.write_str(")")
    } else {
        write_expr(e, names, f)
    }
}

fn write_expr(e: &Expr, names: &[&str], f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match e {
        Expr::Num(v) => {
            if v.is_sign_negative() {
                write!(f, "-{:?}", -v)
            } else {
                write!(f, "{:?}", v)
            }
        }
        Expr::Const(NamedConst::E) => f.write_str("e"),
        Expr::Const(NamedConst::Pi) => f.write_str("pi"),
        Expr::Var(i) => f.write_str(names.get(*i).copied().unwrap_or("?")),
        Expr::Neg(a) => {
            f.write_str("-")?;
            write_wrapped(a, names, a.prec() < 3, f)
        }
        Expr::Bin(BinOp::Pow, a, b) => {
            write_wrapped(a, names, a.prec() < 5, f)?;
            f.write_str("^")?;
            write_wrapped(b, names, b.prec() < 3, f)
        }
        Expr::Bin(op, a, b) => {
            let p = e.prec();
            let sym = match op {
                BinOp::Add => " + ",
                BinOp::Sub => " - ",
                BinOp::Mul => " * ",
                BinOp::Div => " / ",
                BinOp::Pow => unreachable!(),
            };
            write_wrapped(a, names, a.prec() < p, f)?;
            f.write_str(sym)?;
            write_wrapped(b, names, b.prec() <= p, f)
        }
        Expr::Call1(func, a) => {
            let name = match func {
                Func1::Abs => "abs",
                Func1::Exp => "exp",
                Func1::Log => "log",
            };
            write!(f, "{name}(")?;
            write_expr(a, names, f)?;
            f.write_str(")")
        }
        Expr::Call2(func, a, b) => {
            let name = match func {
                Func2::Min => "min",
                Func2::Max => "max",
            };
            write!(f, "{name}(")?;
            write_expr(a, names, f)?;
            f.write_str(", ")?;
            write_expr(b, names, f)?;
            f.write_str(")")
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    End,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b',' => Tok::Comma,
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    // exponent only if followed by digits (optionally signed)
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &src[start..i];
                let v: f64 = text.parse().map_err(|_| Error::Syntax {
                    pos: start,
                    msg: format!("malformed number `{text}`"),
                })?;
                out.push((Tok::Num(v), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(src[start..i].to_string()), start));
                continue;
            }
            _ => {
                return Err(Error::Syntax {
                    pos: start,
                    msg: format!("unexpected character `{}`", src[start..].chars().next().unwrap_or('?')),
                })
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<(Tok, usize)>,
    pos: usize,
    resolve: &'a dyn Fn(&str) -> Option<usize>,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].0
    }

    fn at(&self) -> usize {
        self.tokens[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.tokens[self.pos].0.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, msg: &str) -> Error {
        Error::Syntax {
            pos: self.at(),
            msg: msg.to_string(),
        }
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<()> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&format!("expected {what}")))
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
            lhs = Expr::bin(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::bin(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if *self.peek() == Tok::Minus {
            self.bump();
            Ok(Expr::Neg(Box::new(self.unary()?)))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let exp = self.unary()?;
            Ok(Expr::bin(BinOp::Pow, base, exp))
        } else {
            Ok(base)
        }
    }

    fn primary(&mut self) -> Result<Expr> {
        let pos = self.at();
        match self.bump() {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if *self.peek() == Tok::LParen {
                    self.bump();
                    let f1 = match name.as_str() {
                        "abs" => Some(Func1::Abs),
                        "exp" => Some(Func1::Exp),
                        "log" => Some(Func1::Log),
                        _ => None,
                    };
                    let f2 = match name.as_str() {
                        "min" => Some(Func2::Min),
                        "max" => Some(Func2::Max),
                        _ => None,
                    };
                    if let Some(f) = f1 {
                        let a = self.expr()?;
                        self.expect(Tok::RParen, "`)`")?;
                        Ok(Expr::Call1(f, Box::new(a)))
                    } else if let Some(f) = f2 {
                        let a = self.expr()?;
                        self.expect(Tok::Comma, "`,`")?;
                        let b = self.expr()?;
                        self.expect(Tok::RParen, "`)`")?;
                        Ok(Expr::Call2(f, Box::new(a), Box::new(b)))
                    } else {
                        Err(Error::UnknownIdentifier { name, pos })
                    }
                } else {
                    match name.as_str() {
                        "e" => Ok(Expr::Const(NamedConst::E)),
                        "pi" => Ok(Expr::Const(NamedConst::Pi)),
                        _ => match (self.resolve)(&name) {
                            Some(i) => Ok(Expr::Var(i)),
                            None => Err(Error::UnknownIdentifier { name, pos }),
                        },
                    }
                }
            }
            Tok::End => Err(Error::Syntax {
                pos,
                msg: "unexpected end of input".to_string(),
            }),
            _ => Err(Error::Syntax {
                pos,
                msg: "expected a number, identifier or `(`".to_string(),
            }),
        }
    }
}

/// Renders `e` to a `String` (convenience for tests and round-trips).
pub fn to_source(e: &Expr, names: &[&str]) -> String {
    format!("{}", e.display(names))
}
