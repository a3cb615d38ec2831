//! Analytic strategy files.
//!
//! A file holds sections, each a header naming the LLG setting followed by
//! pieces `lo .. hi : expression` in the local value `v`:
//!
//! ```text
//! # comment
//! [llg.proxy alpha=1 gamma=0]
//! source = textbook derivation
//! 0 .. 0.5 : v
//! 0.5 .. 1 : 0.5 + 0 * v
//! ```
//!
//! Expressions support numbers, the variables `v`, `alpha` and `gamma`, the
//! constants `pi` and `e`, `+ - * / ^`, parentheses and the functions `ln`,
//! `exp`, `sqrt`, `abs`, `min` and `max`.

use std::path::Path;

use crate::error::{Error, Result};
use crate::mechanisms::{LlgRule, MechanismKey};
use crate::oracles::analytic::AnalyticStrategy;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Bin(Op, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    V,
    Alpha,
    Gamma,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Ln,
    Exp,
    Sqrt,
    Abs,
    Min,
    Max,
}

impl Func {
    fn arity(self) -> usize {
        match self {
            Func::Min | Func::Max => 2,
            _ => 1,
        }
    }
}

impl Expr {
    pub fn parse(text: &str) -> Result<Expr> {
        let mut p = Parser { tokens: tokenize(text)?, pos: 0 };
        let e = p.sum()?;
        match p.peek() {
            None => Ok(e),
            Some(t) => Err(Error::Formula(format!("unexpected `{t:?}` in `{text}`"))),
        }
    }

    pub fn eval(&self, v: f64, alpha: f64, gamma: f64) -> f64 {
        match self {
            Expr::Num(x) => *x,
            Expr::Var(Var::V) => v,
            Expr::Var(Var::Alpha) => alpha,
            Expr::Var(Var::Gamma) => gamma,
            Expr::Neg(a) => -a.eval(v, alpha, gamma),
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(v, alpha, gamma), b.eval(v, alpha, gamma));
                match op {
                    Op::Add => a + b,
                    Op::Sub => a - b,
                    Op::Mul => a * b,
                    Op::Div => a / b,
                    Op::Pow => a.powf(b),
                }
            }
            Expr::Call(f, args) => {
                let x = args[0].eval(v, alpha, gamma);
                match f {
                    Func::Ln => x.ln(),
                    Func::Exp => x.exp(),
                    Func::Sqrt => x.sqrt(),
                    Func::Abs => x.abs(),
                    Func::Min => x.min(args[1].eval(v, alpha, gamma)),
                    Func::Max => x.max(args[1].eval(v, alpha, gamma)),
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Sym(char),
}

fn tokenize(text: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s: String = chars[start..i].iter().collect();
            out.push(Token::Num(s.parse().map_err(|_| Error::Formula(format!("bad number `{s}`")))?));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^(),".contains(c) {
            out.push(Token::Sym(c));
            i += 1;
        } else {
            return Err(Error::Formula(format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Token::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(Error::Formula(format!("expected `{c}`")))
        }
    }

    fn sum(&mut self) -> Result<Expr> {
        let mut e = self.product()?;
        loop {
            let op = if self.eat('+') {
                Op::Add
            } else if self.eat('-') {
                Op::Sub
            } else {
                return Ok(e);
            };
            e = Expr::Bin(op, Box::new(e), Box::new(self.product()?));
        }
    }

    fn product(&mut self) -> Result<Expr> {
        let mut e = self.unary()?;
        loop {
            let op = if self.eat('*') {
                Op::Mul
            } else if self.eat('/') {
                Op::Div
            } else {
                return Ok(e);
            };
            e = Expr::Bin(op, Box::new(e), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    // Right associative, binding tighter than unary minus on its left.
    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat('^') {
            return Ok(Expr::Bin(Op::Pow, Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let token = self.peek().cloned().ok_or_else(|| Error::Formula("unexpected end of expression".into()))?;
        self.pos += 1;
        match token {
            Token::Num(x) => Ok(Expr::Num(x)),
            Token::Sym('(') => {
                let e = self.sum()?;
                self.expect(')')?;
                Ok(e)
            }
            Token::Ident(name) => {
                let func = match name.as_str() {
                    "v" => return Ok(Expr::Var(Var::V)),
                    "alpha" => return Ok(Expr::Var(Var::Alpha)),
                    "gamma" => return Ok(Expr::Var(Var::Gamma)),
                    "pi" => return Ok(Expr::Num(std::f64::consts::PI)),
                    "e" => return Ok(Expr::Num(std::f64::consts::E)),
                    "ln" | "log" => Func::Ln,
                    "exp" => Func::Exp,
                    "sqrt" => Func::Sqrt,
                    "abs" => Func::Abs,
                    "min" => Func::Min,
                    "max" => Func::Max,
                    other => return Err(Error::Formula(format!("unknown name `{other}`"))),
                };
                self.expect('(')?;
                let mut args = vec![self.sum()?];
                while self.eat(',') {
                    args.push(self.sum()?);
                }
                self.expect(')')?;
                if args.len() != func.arity() {
                    return Err(Error::Formula(format!("`{name}` takes {} argument(s)", func.arity())));
                }
                Ok(Expr::Call(func, args))
            }
            Token::Sym(c) => Err(Error::Formula(format!("unexpected `{c}`"))),
        }
    }
}

/// Pieces `[lo, hi] → expression`, checked in order.
#[derive(Debug, Clone, PartialEq)]
pub struct Piecewise {
    pub pieces: Vec<(f64, f64, Expr)>,
}

impl Piecewise {
    pub fn evaluate(&self, v: f64, alpha: f64, gamma: f64) -> Result<f64> {
        let (_, _, e) = self
            .pieces
            .iter()
            .find(|(lo, hi, _)| *lo <= v && v <= *hi)
            .ok_or_else(|| Error::Formula(format!("no piece covers v = {v}")))?;
        let x = e.eval(v, alpha, gamma);
        if x.is_finite() {
            Ok(x)
        } else {
            Err(Error::Formula(format!("formula is {x} at v = {v}")))
        }
    }
}

/// Parses every section of an analytic strategy file.
pub fn parse_formula_file(text: &str) -> Result<Vec<AnalyticStrategy>> {
    let mut out = Vec::new();
    let mut current: Option<(LlgRule, f64, f64, String, Vec<(f64, f64, Expr)>)> = None;
    let finish = |c: Option<(LlgRule, f64, f64, String, Vec<(f64, f64, Expr)>)>, out: &mut Vec<AnalyticStrategy>| {
        if let Some((rule, alpha, gamma, source, pieces)) = c {
            if pieces.is_empty() {
                return Err(Error::Formula(format!("section {} has no pieces", rule.name())));
            }
            out.push(AnalyticStrategy::from_formula(rule, alpha, gamma, source, Piecewise { pieces }));
        }
        Ok(())
    };
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        let err = |m: String| Error::Formula(format!("line {}: {m}", no + 1));
        if line.is_empty() {
            continue;
        }
        if let Some(header) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            finish(current.take(), &mut out)?;
            let mut words = header.split_whitespace();
            let key: MechanismKey = words.next().ok_or_else(|| err("empty header".into()))?.parse()?;
            let MechanismKey::Llg(rule) = key else {
                return Err(err(format!("only LLG settings are supported, got {key}")));
            };
            let (mut alpha, mut gamma) = (None, None);
            for w in words {
                match w.split_once('=') {
                    Some(("alpha", x)) => alpha = x.parse().ok(),
                    Some(("gamma", x)) => gamma = x.parse().ok(),
                    _ => return Err(err(format!("unexpected `{w}` in header"))),
                }
            }
            let (Some(alpha), Some(gamma)) = (alpha, gamma) else {
                return Err(err("header needs alpha=<x> gamma=<y>".into()));
            };
            current = Some((rule, alpha, gamma, String::new(), Vec::new()));
            continue;
        }
        let section = current.as_mut().ok_or_else(|| err("content before the first header".into()))?;
        if let Some(src) = line.strip_prefix("source").and_then(|l| l.trim_start().strip_prefix('=')) {
            section.3 = src.trim().to_string();
            continue;
        }
        let (range, expr) = line.split_once(':').ok_or_else(|| err("expected `lo .. hi : expression`".into()))?;
        let (lo, hi) = range.split_once("..").ok_or_else(|| err("expected `lo .. hi`".into()))?;
        let lo: f64 = lo.trim().parse().map_err(|_| err(format!("bad bound `{lo}`")))?;
        let hi: f64 = hi.trim().parse().map_err(|_| err(format!("bad bound `{hi}`")))?;
        if !(lo <= hi) {
            return Err(err(format!("empty range {lo} .. {hi}")));
        }
        section.4.push((lo, hi, Expr::parse(expr).map_err(|e| err(e.to_string()))?));
    }
    finish(current, &mut out)?;
    Ok(out)
}

pub fn read_formula_file(path: &Path) -> Result<Vec<AnalyticStrategy>> {
    parse_formula_file(&std::fs::read_to_string(path)?)
}
