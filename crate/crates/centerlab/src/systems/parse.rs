//! Tokenizer and expression parser shared by system files and first-integral
//! expressions.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::exactalg::{MPoly, RatFunc, Vars, Q};

use super::SystemError;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Num(Q),
    Ident(String),
    Op(char),
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

/// Splits `src` into tokens. `line` is reported in errors; `col0` offsets columns.
pub fn tokenize(src: &str, line: usize, col0: usize) -> Result<Vec<Token>, SystemError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = col0 + i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).map(|d| d.is_ascii_digit()).unwrap_or(false)) {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            let v = parse_decimal(&text).ok_or_else(|| SystemError::Syntax { line, col, msg: format!("bad number '{text}'") })?;
            out.push(Token { tok: Tok::Num(v), line, col });
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let mut name: String = chars[start..i].iter().collect();
            if name == "ε" {
                name = "eps".into();
            }
            out.push(Token { tok: Tok::Ident(name), line, col });
        } else if "+-*/^(),;=<>!".contains(c) {
            out.push(Token { tok: Tok::Op(c), line, col });
            i += 1;
        } else {
            return Err(SystemError::Syntax { line, col, msg: format!("unexpected character '{c}'") });
        }
    }
    Ok(out)
}

/// Exact value of a decimal literal such as `12`, `0.25` or `.5`.
pub fn parse_decimal(text: &str) -> Option<Q> {
    let (int, frac) = match text.split_once('.') {
        Some((a, b)) => (a, b),
        None => (text, ""),
    };
    if frac.contains('.') || (int.is_empty() && frac.is_empty()) {
        return None;
    }
    let digits = format!("{int}{frac}");
    let n: BigInt = digits.parse().ok()?;
    let d = num_traits::pow(BigInt::from(10), frac.len());
    Some(Q::new(n, d))
}

#[derive(Debug, Clone)]
pub enum Expr {
    Num(Q),
    Sym(String, usize, usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>, usize, usize),
    Pow(Box<Expr>, Box<Expr>, usize, usize),
    Call(String, Vec<Expr>, usize, usize),
}

pub struct Parser<'a> {
    toks: &'a [Token],
    pos: usize,
    end_line: usize,
    end_col: usize,
}

impl<'a> Parser<'a> {
    pub fn new(toks: &'a [Token], end_line: usize, end_col: usize) -> Self {
        Parser { toks, pos: 0, end_line, end_col }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks.get(self.pos).map(|t| (t.line, t.col)).unwrap_or((self.end_line, self.end_col))
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, SystemError> {
        let (line, col) = self.here();
        Err(SystemError::Syntax { line, col, msg: msg.into() })
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    pub fn expect_end(&self) -> Result<(), SystemError> {
        if self.at_end() {
            Ok(())
        } else {
            self.err(format!("unexpected '{}'", show(self.peek().unwrap())))
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn expr(&mut self) -> Result<Expr, SystemError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, SystemError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.peek() == Some(&Tok::Op('/')) {
                let (l, c) = self.here();
                self.pos += 1;
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?), l, c);
            } else {
                match self.peek() {
                    Some(Tok::Num(_)) | Some(Tok::Ident(_)) | Some(Tok::Op('(')) => {
                        return self.err("missing '*' between factors");
                    }
                    _ => return Ok(lhs),
                }
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, SystemError> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, SystemError> {
        let base = self.atom()?;
        if self.peek() == Some(&Tok::Op('^')) {
            let (l, c) = self.here();
            self.pos += 1;
            let exp = if self.eat('-') { Expr::Neg(Box::new(self.atom()?)) } else { self.atom()? };
            return Ok(Expr::Pow(Box::new(base), Box::new(exp), l, c));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, SystemError> {
        let (line, col) = self.here();
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Expr::Num(v))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if self.peek() == Some(&Tok::Op('(')) {
                    self.pos += 1;
                    let mut args = vec![self.expr()?];
                    while self.eat(';') || self.eat(',') {
                        args.push(self.expr()?);
                    }
                    if !self.eat(')') {
                        return self.err("expected ')'");
                    }
                    return Ok(Expr::Call(name, args, line, col));
                }
                Ok(Expr::Sym(name, line, col))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return self.err("expected ')'");
                }
                Ok(e)
            }
            Some(t) => self.err(format!("unexpected '{}'", show(&t))),
            None => self.err("unexpected end of expression"),
        }
    }
}

fn show(t: &Tok) -> String {
    match t {
        Tok::Num(v) => v.to_string(),
        Tok::Ident(s) => s.clone(),
        Tok::Op(c) => c.to_string(),
    }
}

impl Expr {
    /// Collects symbol names (function names excluded).
    pub fn symbols(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Num(_) => {}
            Expr::Sym(s, _, _) => {
                out.insert(s.clone());
            }
            Expr::Neg(a) => a.symbols(out),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b, _, _) | Expr::Pow(a, b, _, _) => {
                a.symbols(out);
                b.symbols(out);
            }
            Expr::Call(_, args, _, _) => args.iter().for_each(|a| a.symbols(out)),
        }
    }

    /// Evaluates to a rational function over `vars`. Exponents must be integer
    /// constants; negative exponents are allowed only when `allow_negative`.
    pub fn eval(&self, vars: &Vars, allow_negative: bool) -> Result<RatFunc, SystemError> {
        Ok(match self {
            Expr::Num(v) => RatFunc::constant(vars, v.clone()),
            Expr::Sym(s, line, col) => match vars.index(s) {
                Some(i) => RatFunc::from_poly(MPoly::var(vars, i)),
                None => return Err(SystemError::Syntax { line: *line, col: *col, msg: format!("undeclared symbol '{s}'") }),
            },
            Expr::Neg(a) => -a.eval(vars, allow_negative)?,
            Expr::Add(a, b) => a.eval(vars, allow_negative)? + b.eval(vars, allow_negative)?,
            Expr::Sub(a, b) => a.eval(vars, allow_negative)? - b.eval(vars, allow_negative)?,
            Expr::Mul(a, b) => a.eval(vars, allow_negative)? * b.eval(vars, allow_negative)?,
            Expr::Div(a, b, line, col) => {
                let d = b.eval(vars, allow_negative)?;
                if d.is_zero() {
                    return Err(SystemError::Syntax { line: *line, col: *col, msg: "division by zero".into() });
                }
                a.eval(vars, allow_negative)? / d
            }
            Expr::Pow(a, b, line, col) => {
                let e = b.eval(vars, allow_negative)?;
                let e = e.constant_value().filter(|v| v.is_integer()).ok_or_else(|| SystemError::Syntax {
                    line: *line,
                    col: *col,
                    msg: "exponent must be an integer constant".into(),
                })?;
                let base = a.eval(vars, allow_negative)?;
                let k = e.to_integer().to_i64().unwrap_or(i64::MAX);
                if k < 0 && !allow_negative {
                    return Err(SystemError::Syntax { line: *line, col: *col, msg: "negative power".into() });
                }
                if k.unsigned_abs() > 10_000 {
                    return Err(SystemError::Syntax { line: *line, col: *col, msg: "exponent too large".into() });
                }
                let p = RatFunc::new(base.num().pow(k.unsigned_abs() as u32), base.den().pow(k.unsigned_abs() as u32))
                    .expect("nonzero denominator");
                if k < 0 {
                    if p.is_zero() {
                        return Err(SystemError::Syntax { line: *line, col: *col, msg: "division by zero".into() });
                    }
                    p.inv().expect("nonzero")
                } else {
                    p
                }
            }
            Expr::Call(name, _, line, col) => {
                return Err(SystemError::UnknownFunction { line: *line, col: *col, name: name.clone() })
            }
        })
    }

    /// Evaluates to a polynomial; any division must be by a nonzero constant.
    pub fn eval_poly(&self, vars: &Vars) -> Result<MPoly, SystemError> {
        let r = self.eval(vars, false)?;
        if !r.is_polynomial() {
            return Err(SystemError::Syntax { line: 0, col: 0, msg: format!("not a polynomial: {r}") });
        }
        let c = r.den().constant_value().unwrap();
        Ok(r.num().scale(&c.recip()))
    }
}

/// Parses a standalone expression over a fixed table.
pub fn parse_expr(text: &str, vars: &Vars) -> Result<RatFunc, SystemError> {
    let e = parse_expr_ast(text)?;
    e.eval(vars, true)
}

pub fn parse_expr_ast(text: &str) -> Result<Expr, SystemError> {
    let toks = tokenize(text, 1, 0)?;
    let mut p = Parser::new(&toks, 1, text.chars().count() + 1);
    let e = p.expr()?;
    p.expect_end()?;
    Ok(e)
}

/// Parses a polynomial over a fixed table.
pub fn parse_poly(text: &str, vars: &Vars) -> Result<MPoly, SystemError> {
    parse_expr_ast(text)?.eval_poly(vars)
}

/// Parses a rational number literal such as `3`, `-1/7` or `0.25`.
pub fn parse_rational(text: &str) -> Option<Q> {
    let t = text.trim();
    let (neg, t) = match t.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, t),
    };
    let v = match t.split_once('/') {
        Some((a, b)) => {
            let d = parse_decimal(b.trim())?;
            if d.is_zero() {
                return None;
            }
            parse_decimal(a.trim())? / d
        }
        None => parse_decimal(t)?,
    };
    Some(if neg { -v } else { v })
}

