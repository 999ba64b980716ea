//! Radial profile expressions in the variable `r`.
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' unary)?
//! atom  := number | 'r' | 'pi' | param | func '(' expr ')' | '(' expr ')'
//! func  := ln | exp | sin | cos | sqrt
//! ```
//!
//! `^` binds tighter than unary minus and is right associative, so `-2^2`
//! is `-4` and `2^3^2` is `2^9`.

use std::fmt;

use thiserror::Error;

use super::jet::Jet3;

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

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Ln,
    Exp,
    Sin,
    Cos,
    Sqrt,
}

impl Func {
    const ALL: [Func; 5] = [Func::Ln, Func::Exp, Func::Sin, Func::Cos, Func::Sqrt];

    pub fn name(self) -> &'static str {
        match self {
            Func::Ln => "ln",
            Func::Exp => "exp",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var,
    Pi,
    /// Named parameter bound to a value at parse time.
    Param(String, f64),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("syntax error at byte {offset}: {message}{}", expected_suffix(.expected))]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
    pub expected: Vec<String>,
}

fn expected_suffix(expected: &[String]) -> String {
    if expected.is_empty() {
        String::new()
    } else {
        format!(" (expected {})", expected.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{message} in `{subexpr}`")]
pub struct EvalError {
    pub message: String,
    pub subexpr: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn next(&mut self) -> Result<(Tok, usize), ParseError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&b) = bytes.get(start) else {
            return Ok((Tok::End, start));
        };
        if b.is_ascii_digit() || b == b'.' {
            let mut end = start;
            while end < bytes.len() && (bytes[end].is_ascii_digit() || bytes[end] == b'.') {
                end += 1;
            }
            if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
                let mut e = end + 1;
                if e < bytes.len() && (bytes[e] == b'+' || bytes[e] == b'-') {
                    e += 1;
                }
                if e < bytes.len() && bytes[e].is_ascii_digit() {
                    while e < bytes.len() && bytes[e].is_ascii_digit() {
                        e += 1;
                    }
                    end = e;
                }
            }
            let text = &self.src[start..end];
            let value = text.parse::<f64>().map_err(|_| ParseError {
                offset: start,
                message: format!("malformed number `{text}`"),
                expected: vec![],
            })?;
            self.pos = end;
            return Ok((Tok::Num(value), start));
        }
        if b.is_ascii_alphabetic() || b == b'_' {
            let mut end = start;
            while end < bytes.len() && (bytes[end].is_ascii_alphanumeric() || bytes[end] == b'_') {
                end += 1;
            }
            self.pos = end;
            return Ok((Tok::Ident(self.src[start..end].to_string()), start));
        }
        if b"+-*/^()".contains(&b) {
            self.pos += 1;
            return Ok((Tok::Sym(b as char), start));
        }
        let ch = self.src[start..].chars().next().unwrap_or('?');
        Err(ParseError { offset: start, message: format!("unexpected character `{ch}`"), expected: vec![] })
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok,
    at: usize,
    params: &'a [(&'a str, f64)],
}

impl<'a> Parser<'a> {
    fn advance(&mut self) -> Result<(), ParseError> {
        let (tok, at) = self.lexer.next()?;
        self.tok = tok;
        self.at = at;
        Ok(())
    }

    fn fail<T>(&self, message: &str, expected: &[&str]) -> Result<T, ParseError> {
        Err(ParseError {
            offset: self.at,
            message: message.to_string(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.tok {
                Tok::Sym('+') => BinOp::Add,
                Tok::Sym('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.advance()?;
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.tok {
                Tok::Sym('*') => BinOp::Mul,
                Tok::Sym('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.advance()?;
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.tok == Tok::Sym('-') {
            self.advance()?;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.tok == Tok::Sym('^') {
            self.advance()?;
            let exponent = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn expect_close(&mut self) -> Result<(), ParseError> {
        if self.tok != Tok::Sym(')') {
            return self.fail("unbalanced parenthesis", &["`)`", "operator"]);
        }
        self.advance()
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        const OPERAND: &[&str] = &["number", "`r`", "function", "`(`"];
        match self.tok.clone() {
            Tok::Num(v) => {
                self.advance()?;
                Ok(Expr::Num(v))
            }
            Tok::Sym('(') => {
                self.advance()?;
                let inner = self.expr()?;
                self.expect_close()?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                let at = self.at;
                self.advance()?;
                if let Some(f) = Func::from_name(&name) {
                    if self.tok != Tok::Sym('(') {
                        return self.fail(&format!("function `{name}` needs an argument"), &["`(`"]);
                    }
                    self.advance()?;
                    let arg = self.expr()?;
                    self.expect_close()?;
                    return Ok(Expr::Call(f, Box::new(arg)));
                }
                match name.as_str() {
                    "r" => Ok(Expr::Var),
                    "pi" => Ok(Expr::Pi),
                    _ => match self.params.iter().find(|(p, _)| *p == name) {
                        Some(&(_, v)) => Ok(Expr::Param(name, v)),
                        None => Err(ParseError {
                            offset: at,
                            message: format!("unknown identifier `{name}`"),
                            expected: vec![],
                        }),
                    },
                }
            }
            Tok::End => self.fail("unexpected end of input", OPERAND),
            Tok::Sym(c) => self.fail(&format!("unexpected `{c}`"), OPERAND),
        }
    }
}

/// Parses an expression in `r` with no named parameters.
pub fn parse(src: &str) -> Result<Expr, ParseError> {
    parse_with_params(src, &[])
}

/// Parses an expression in which each `params` name is bound to its value.
pub fn parse_with_params(src: &str, params: &[(&str, f64)]) -> Result<Expr, ParseError> {
    let mut p = Parser { lexer: Lexer { src, pos: 0 }, tok: Tok::End, at: 0, params };
    p.advance()?;
    let e = p.expr()?;
    if p.tok != Tok::End {
        return p.fail("trailing input", &["operator", "end of input"]);
    }
    Ok(e)
}

impl Expr {
    fn precedence(&self) -> u8 {
        match self {
            Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Neg(_) => 3,
            Expr::Bin(BinOp::Pow, ..) => 4,
            _ => 5,
        }
    }

    fn write_child(&self, f: &mut fmt::Formatter<'_>, parens: bool) -> fmt::Result {
        if parens {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }

    /// Evaluates the value only.
    pub fn eval(&self, r: f64) -> Result<f64, EvalError> {
        Ok(self.eval_jet(Jet3::constant(r))?.value())
    }

    /// Evaluates the order-3 Taylor jet, with `r` given as a jet.
    pub fn eval_jet(&self, r: Jet3) -> Result<Jet3, EvalError> {
        let fail = |message: &str| EvalError { message: message.to_string(), subexpr: self.to_string() };
        let out = match self {
            Expr::Num(v) | Expr::Param(_, v) => Jet3::constant(*v),
            Expr::Pi => Jet3::constant(std::f64::consts::PI),
            Expr::Var => r,
            Expr::Neg(a) => -a.eval_jet(r)?,
            Expr::Bin(op, a, b) => {
                let (x, y) = (a.eval_jet(r)?, b.eval_jet(r)?);
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => {
                        if y.value() == 0.0 {
                            return Err(fail("division by zero"));
                        }
                        x / y
                    }
                    BinOp::Pow => pow(x, y).map_err(fail)?,
                }
            }
            Expr::Call(func, a) => {
                let x = a.eval_jet(r)?;
                match func {
                    Func::Exp => x.exp(),
                    Func::Sin => x.sin_cos().0,
                    Func::Cos => x.sin_cos().1,
                    Func::Ln => {
                        if x.value() <= 0.0 {
                            return Err(fail("logarithm of a non-positive value"));
                        }
                        x.ln()
                    }
                    Func::Sqrt => {
                        if x.value() < 0.0 {
                            return Err(fail("square root of a negative value"));
                        }
                        if x.value() == 0.0 {
                            if !x.is_constant() {
                                return Err(fail("square root is not differentiable at zero"));
                            }
                            Jet3::constant(0.0)
                        } else {
                            x.sqrt()
                        }
                    }
                }
            }
        };
        if out.c.iter().any(|v| !v.is_finite()) {
            return Err(fail("non-finite result"));
        }
        Ok(out)
    }
}

fn pow(base: Jet3, exponent: Jet3) -> Result<Jet3, &'static str> {
    if exponent.is_constant() {
        let p = exponent.value();
        if p.fract() == 0.0 && p.abs() <= 64.0 {
            let whole = base.powi(p.abs() as u32);
            if p >= 0.0 {
                return Ok(whole);
            }
            if base.value() == 0.0 {
                return Err("negative power of zero");
            }
            return Ok(whole.recip());
        }
        if base.value() <= 0.0 {
            return Err("non-integer power of a non-positive base");
        }
        return Ok(base.powf(p));
    }
    if base.value() <= 0.0 {
        return Err("variable power of a non-positive base");
    }
    Ok((exponent * base.ln()).exp())
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var => write!(f, "r"),
            Expr::Pi => write!(f, "pi"),
            Expr::Param(name, _) => write!(f, "{name}"),
            Expr::Neg(a) => {
                write!(f, "-")?;
                a.write_child(f, a.precedence() < 3)
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
            Expr::Bin(op, a, b) => {
                let p = self.precedence();
                let (left_parens, right_parens) = if *op == BinOp::Pow {
                    (a.precedence() <= p, b.precedence() < 3)
                } else {
                    (a.precedence() < p, b.precedence() <= p)
                };
                a.write_child(f, left_parens)?;
                write!(f, "{}", op.symbol())?;
                b.write_child(f, right_parens)
            }
        }
    }
}

/// `(u, u', u'', u''')` truncated to `order + 1` entries.
pub fn jet_eval(e: &Expr, r: f64, order: usize) -> Result<Vec<f64>, EvalError> {
    if order > 3 {
        return Err(EvalError { message: format!("derivative order {order} exceeds 3"), subexpr: e.to_string() });
    }
    let d = e.eval_jet(Jet3::variable(r))?.derivatives();
    Ok(d[..=order].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(parse("1+2*3").unwrap().eval(0.0).unwrap(), 7.0);
        assert_eq!(parse("-2^2").unwrap().eval(0.0).unwrap(), -4.0);
        assert_eq!(parse("2^3^2").unwrap().eval(0.0).unwrap(), 512.0);
        assert_eq!(parse("8/4/2").unwrap().eval(0.0).unwrap(), 1.0);
        assert_eq!(parse("1-2-3").unwrap().eval(0.0).unwrap(), -4.0);
        assert_eq!(parse("2*-3").unwrap().eval(0.0).unwrap(), -6.0);
        assert!((parse("2*pi").unwrap().eval(0.0).unwrap() - std::f64::consts::TAU).abs() < 1e-15);
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        let e = parse("ln(").unwrap_err();
        assert_eq!(e.offset, 3);
        let e = parse("1 + foo").unwrap_err();
        assert_eq!(e.offset, 4);
        assert!(e.message.contains("foo"));
        assert_eq!(parse("(1+2").unwrap_err().offset, 4);
        assert_eq!(parse("1 2").unwrap_err().offset, 2);
        assert_eq!(parse("2 $ 3").unwrap_err().offset, 2);
        assert!(parse("exp 2").is_err());
    }

    #[test]
    fn params_bind_at_parse_time() {
        let e = parse_with_params("a*r^2", &[("a", 3.0)]).unwrap();
        assert_eq!(e.eval(2.0).unwrap(), 12.0);
        assert_eq!(e.to_string(), "a*r^2");
        assert!(parse("a*r").is_err());
    }

    #[test]
    fn jet_examples() {
        assert_eq!(jet_eval(&parse("5").unwrap(), 1.3, 3).unwrap(), vec![5.0, 0.0, 0.0, 0.0]);
        assert_eq!(jet_eval(&parse("r^2").unwrap(), 3.0, 3).unwrap(), vec![9.0, 6.0, 2.0, 0.0]);
        let d = jet_eval(&parse("-(2/3)*ln(1+r^-3)").unwrap(), 1.0, 1).unwrap();
        assert!((d[0] + (2.0 / 3.0) * 2f64.ln()).abs() < 1e-15);
        assert!((d[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn domain_errors_name_subexpression() {
        let e = parse("1+ln(r-2)").unwrap().eval(1.0).unwrap_err();
        assert_eq!(e.subexpr, "ln(r-2)");
        let e = parse("1/(r-1)").unwrap().eval(1.0).unwrap_err();
        assert!(e.message.contains("division"));
        assert!(parse("(r-2)^0.5").unwrap().eval(1.0).is_err());
        assert_eq!(parse("(r-2)^2").unwrap().eval(1.0).unwrap(), 1.0);
        assert!(parse("sqrt(r)").unwrap().eval_jet(Jet3::variable(0.0)).is_err());
    }

    #[test]
    fn printer_uses_minimal_parentheses() {
        for (src, printed) in [
            ("(1+2)*3", "(1+2)*3"),
            ("1+(2*3)", "1+2*3"),
            ("1-(2-3)", "1-(2-3)"),
            ("(1-2)-3", "1-2-3"),
            ("(2^3)^2", "(2^3)^2"),
            ("2^(3^2)", "2^3^2"),
            ("(-2)^2", "(-2)^2"),
            ("r^(-3)", "r^-3"),
            ("-(2/3)*ln(1+r^-3)", "-(2/3)*ln(1+r^-3)"),
            ("- - r", "--r"),
            ("2^(1+r)", "2^(1+r)"),
        ] {
            assert_eq!(parse(src).unwrap().to_string(), printed, "{src}");
        }
    }
}
