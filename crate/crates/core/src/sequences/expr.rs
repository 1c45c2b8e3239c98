//! A small arithmetic language for user-defined coefficients and index maps.
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' unary)?
//! atom  := number | 'pi' | var | func '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! Variables are `j`, `k`, `n` and `l`; which ones are allowed depends on the
//! caller. Functions: `ln`, `pow`, `mod`, `abs`, `sign`, `alt` (`alt(n)` is
//! `(-1)^n`).

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    J,
    K,
    N,
    L,
}

impl Var {
    fn from_name(s: &str) -> Option<Var> {
        match s {
            "j" => Some(Var::J),
            "k" => Some(Var::K),
            "n" => Some(Var::N),
            "l" => Some(Var::L),
            _ => None,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Var::J => "j",
            Var::K => "k",
            Var::N => "n",
            Var::L => "l",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Ln,
    Pow,
    Mod,
    Abs,
    Sign,
    Alt,
}

impl Func {
    fn from_name(s: &str) -> Option<Func> {
        match s {
            "ln" => Some(Func::Ln),
            "pow" => Some(Func::Pow),
            "mod" => Some(Func::Mod),
            "abs" => Some(Func::Abs),
            "sign" => Some(Func::Sign),
            "alt" => Some(Func::Alt),
            _ => None,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Func::Ln => "ln",
            Func::Pow => "pow",
            Func::Mod => "mod",
            Func::Abs => "abs",
            Func::Sign => "sign",
            Func::Alt => "alt",
        }
    }

    fn arity(self) -> usize {
        match self {
            Func::Pow | Func::Mod => 2,
            _ => 1,
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

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

/// Variable bindings for evaluation. Unused variables can stay at 0.
#[derive(Debug, Clone, Copy, Default)]
pub struct Env {
    pub j: f64,
    pub k: f64,
    pub n: f64,
    pub l: f64,
}

impl Env {
    pub fn jk(j: u64, k: u64) -> Self {
        Env { j: j as f64, k: k as f64, ..Env::default() }
    }

    pub fn n(n: u64) -> Self {
        Env { n: n as f64, ..Env::default() }
    }

    pub fn l(l: u64) -> Self {
        Env { l: l as f64, ..Env::default() }
    }

    fn get(&self, v: Var) -> f64 {
        match v {
            Var::J => self.j,
            Var::K => self.k,
            Var::N => self.n,
            Var::L => self.l,
        }
    }
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        let mut p = Parser { src, toks: lex(src)?, pos: 0 };
        let e = p.expr()?;
        if let Some(t) = p.toks.get(p.pos) {
            return Err(Error::Expr { offset: t.offset, message: "unexpected trailing input".into() });
        }
        Ok(e)
    }

    /// Parses and rejects variables outside `allowed`.
    pub fn parse_with(src: &str, allowed: &[Var]) -> Result<Expr> {
        let e = Expr::parse(src)?;
        if let Some(v) = e.vars().into_iter().find(|v| !allowed.contains(v)) {
            let names: Vec<_> = allowed.iter().map(|v| v.name()).collect();
            return Err(Error::Expr {
                offset: 0,
                message: format!("variable `{}` not allowed here (allowed: {})", v.name(), names.join(", ")),
            });
        }
        Ok(e)
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Expr::Num(_) => {}
            Expr::Var(v) => {
                out.insert(*v);
            }
            Expr::Neg(e) => e.collect_vars(out),
            Expr::Bin(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Expr::Call(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn eval(&self, env: &Env) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var(v) => env.get(*v),
            Expr::Neg(e) => -e.eval(env),
            Expr::Bin(op, a, b) => {
                let (x, y) = (a.eval(env), b.eval(env));
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => x / y,
                    BinOp::Pow => pow(x, y),
                }
            }
            Expr::Call(f, args) => {
                let x = args[0].eval(env);
                match f {
                    Func::Ln => x.ln(),
                    Func::Pow => pow(x, args[1].eval(env)),
                    Func::Mod => x.rem_euclid(args[1].eval(env)),
                    Func::Abs => x.abs(),
                    Func::Sign => {
                        if x > 0.0 {
                            1.0
                        } else if x < 0.0 {
                            -1.0
                        } else {
                            0.0
                        }
                    }
                    Func::Alt => {
                        if x.fract() != 0.0 {
                            f64::NAN
                        } else if x.rem_euclid(2.0) == 0.0 {
                            1.0
                        } else {
                            -1.0
                        }
                    }
                }
            }
        }
    }

    /// Splits `e` into `f(j) * g(k)` when the top-level product structure
    /// allows it. Constant factors go to the `j` side. Returns `None` when
    /// some factor mixes `j` and `k` (or mentions another variable).
    pub fn split_jk(&self) -> Option<(Expr, Expr)> {
        let mut factors = Vec::new();
        self.factors(false, &mut factors);
        let mut left: Option<Expr> = None;
        let mut right: Option<Expr> = None;
        for (f, inverse) in factors {
            let vars = f.vars();
            let side = if vars.is_empty() || vars.iter().all(|v| *v == Var::J) {
                &mut left
            } else if vars.iter().all(|v| *v == Var::K) {
                &mut right
            } else {
                return None;
            };
            let acc = side.take().unwrap_or(Expr::Num(1.0));
            let op = if inverse { BinOp::Div } else { BinOp::Mul };
            *side = Some(Expr::Bin(op, Box::new(acc), Box::new(f)));
        }
        Some((left.unwrap_or(Expr::Num(1.0)), right.unwrap_or(Expr::Num(1.0))))
    }

    fn factors(&self, inverse: bool, out: &mut Vec<(Expr, bool)>) {
        match self {
            Expr::Bin(BinOp::Mul, a, b) => {
                a.factors(inverse, out);
                b.factors(inverse, out);
            }
            Expr::Bin(BinOp::Div, a, b) => {
                a.factors(inverse, out);
                b.factors(!inverse, out);
            }
            Expr::Neg(e) => {
                out.push((Expr::Num(-1.0), false));
                e.factors(inverse, out);
            }
            other => out.push((other.clone(), inverse)),
        }
    }
}

fn pow(x: f64, y: f64) -> f64 {
    if y.fract() == 0.0 && y.abs() <= i32::MAX as f64 {
        x.powi(y as i32)
    } else {
        x.powf(y)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(v) => f.write_str(v.name()),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Bin(op, a, b) => {
                let s = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                };
                write!(f, "({a} {s} {b})")
            }
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    offset: usize,
}

fn lex(src: &str) -> Result<Vec<Token>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && ((bytes[i] as char).is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            // exponent part, e.g. 1e-3
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut k = i + 1;
                if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                    k += 1;
                }
                if k < bytes.len() && bytes[k].is_ascii_digit() {
                    i = k;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text = &src[start..i];
            let v: f64 =
                text.parse().map_err(|_| Error::Expr { offset: start, message: format!("bad number `{text}`") })?;
            out.push(Token { tok: Tok::Num(v), offset: start });
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Token { tok: Tok::Ident(src[start..i].to_string()), offset: start });
        } else if "+-*/^(),".contains(c) {
            out.push(Token { tok: Tok::Op(c), offset: i });
            i += 1;
        } else {
            return Err(Error::Expr { offset: i, message: format!("unexpected character `{c}`") });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<Token>,
    pos: usize,
}

impl Parser<'_> {
    fn peek_op(&self) -> Option<char> {
        match self.toks.get(self.pos) {
            Some(Token { tok: Tok::Op(c), .. }) => Some(*c),
            _ => None,
        }
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.offset).unwrap_or(self.src.len())
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Expr { offset: self.offset(), message: message.into() })
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.peek_op() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected `{c}`"))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(c @ ('+' | '-')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.term()?;
            let op = if c == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(c @ ('*' | '/')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.unary()?;
            let op = if c == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek_op() == Some('-') {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek_op() == Some('^') {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let Some(tok) = self.toks.get(self.pos).cloned() else {
            return self.err("unexpected end of expression");
        };
        self.pos += 1;
        match tok.tok {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::Op('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Op(c) => Err(Error::Expr { offset: tok.offset, message: format!("unexpected `{c}`") }),
            Tok::Ident(name) => {
                if name == "pi" {
                    return Ok(Expr::Num(std::f64::consts::PI));
                }
                if let Some(v) = Var::from_name(&name) {
                    return Ok(Expr::Var(v));
                }
                let Some(func) = Func::from_name(&name) else {
                    return Err(Error::Expr { offset: tok.offset, message: format!("unknown name `{name}`") });
                };
                self.expect('(')?;
                let mut args = vec![self.expr()?];
                while self.peek_op() == Some(',') {
                    self.pos += 1;
                    args.push(self.expr()?);
                }
                self.expect(')')?;
                if args.len() != func.arity() {
                    return Err(Error::Expr {
                        offset: tok.offset,
                        message: format!("`{name}` takes {} argument(s), got {}", func.arity(), args.len()),
                    });
                }
                Ok(Expr::Call(func, args))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(src: &str, j: u64, k: u64) -> f64 {
        Expr::parse(src).unwrap().eval(&Env::jk(j, k))
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(ev("1 + 2 * 3", 0, 0), 7.0);
        assert_eq!(ev("2 ^ 3 ^ 2", 0, 0), 512.0);
        assert_eq!(ev("-2 ^ 2", 0, 0), -4.0);
        assert_eq!(ev("8 / 4 / 2", 0, 0), 1.0);
        assert_eq!(ev("10 - 3 - 2", 0, 0), 5.0);
    }

    #[test]
    fn functions() {
        assert_eq!(ev("alt(j)", 3, 0), -1.0);
        assert_eq!(ev("alt(j)", 4, 0), 1.0);
        assert_eq!(ev("mod(j, 3)", 7, 0), 1.0);
        assert_eq!(ev("sign(-j)", 2, 0), -1.0);
        assert_eq!(ev("abs(j - k)", 2, 5), 3.0);
        assert_eq!(ev("pow(j, 2)", 3, 0), 9.0);
        assert!((ev("ln(j)", 1, 0)).abs() < 1e-300);
        assert!((ev("1e-3 * j", 2, 0) - 0.002).abs() < 1e-18);
    }

    #[test]
    fn errors_point_at_offset() {
        match Expr::parse("j + * k") {
            Err(Error::Expr { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("{other:?}"),
        }
        assert!(Expr::parse("foo(j)").is_err());
        assert!(Expr::parse("pow(j)").is_err());
        assert!(Expr::parse("(j").is_err());
        assert!(Expr::parse("j k").is_err());
        assert!(Expr::parse_with("n", &[Var::J, Var::K]).is_err());
    }

    #[test]
    fn separable_split() {
        let e = Expr::parse("(2 + alt(j)) / j^2 * (2 + alt(k)) / k^2").unwrap();
        let (a, b) = e.split_jk().unwrap();
        assert!(b.vars().iter().all(|v| *v == Var::K));
        for j in 1..6 {
            for k in 1..6 {
                let direct = e.eval(&Env::jk(j, k));
                let split = a.eval(&Env::jk(j, 0)) * b.eval(&Env::jk(0, k));
                assert!((direct - split).abs() <= 1e-15 * direct.abs());
            }
        }
        assert!(Expr::parse("1 / (j + k)").unwrap().split_jk().is_none());
        assert!(Expr::parse("j^2 + k").unwrap().split_jk().is_none());
        let (a, b) = Expr::parse("-3 * k").unwrap().split_jk().unwrap();
        assert_eq!(a.eval(&Env::default()), -3.0);
        assert_eq!(b.eval(&Env::jk(0, 2)), 2.0);
    }
}
