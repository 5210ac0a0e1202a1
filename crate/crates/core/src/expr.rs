//! Expression grammar shared by every textual input:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := ('-' | '+') unary | power
//! power  := atom ('^' exponent)?
//! exponent := ['-'] integer | '(' ['-'] integer ')'
//! atom   := integer | identifier | '(' expr ')'
//! ```
//!
//! Products are kept in the order written; each consumer decides what the
//! identifiers mean and how (non)commutative multiplication is. Division is
//! only allowed by purely numeric subexpressions.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("division by zero at position {pos}")]
    DivisionByZero { pos: usize },
}

impl ParseError {
    pub fn syntax(pos: usize, msg: impl Into<String>) -> Self {
        ParseError::Syntax { pos, msg: msg.into() }
    }

    pub fn code(&self) -> &'static str {
        match self {
            ParseError::Syntax { .. } => "syntax",
            ParseError::DivisionByZero { .. } => "division-by-zero",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(BigInt),
    Sym { name: String, pos: usize },
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div { num: Box<Expr>, den: Box<Expr>, pos: usize },
    Neg(Box<Expr>),
    Pow { base: Box<Expr>, exp: i64, pos: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Op(char),
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let n: BigInt = text[start..i].parse().expect("digits");
            out.push((Tok::Num(n), start));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(text[start..i].to_string()), start));
        } else if "+-*/^()".contains(c) {
            out.push((Tok::Op(c), i));
            i += 1;
        } else {
            return Err(ParseError::syntax(i, format!("unexpected character '{c}'")));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(t, _)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |&(_, p)| p)
    }

    fn eat_op(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat_op('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat_op('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat_op('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.peek() == Some(&Tok::Op('/')) {
                let pos = self.pos();
                self.at += 1;
                let den = self.unary()?;
                lhs = Expr::Div { num: Box::new(lhs), den: Box::new(den), pos };
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat_op('-') {
            Ok(Expr::Neg(Box::new(self.unary()?)))
        } else if self.eat_op('+') {
            self.unary()
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.peek() != Some(&Tok::Op('^')) {
            return Ok(base);
        }
        let pos = self.pos();
        self.at += 1;
        let paren = self.eat_op('(');
        let neg = self.eat_op('-');
        let exp = match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.at += 1;
                i64::try_from(n).map_err(|_| ParseError::syntax(pos, "exponent too large"))?
            }
            _ => return Err(ParseError::syntax(self.pos(), "expected integer exponent")),
        };
        if paren && !self.eat_op(')') {
            return Err(ParseError::syntax(self.pos(), "expected ')'"));
        }
        Ok(Expr::Pow { base: Box::new(base), exp: if neg { -exp } else { exp }, pos })
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.at += 1;
                Ok(Expr::Num(n))
            }
            Some(Tok::Ident(name)) => {
                self.at += 1;
                Ok(Expr::Sym { name, pos })
            }
            Some(Tok::Op('(')) => {
                self.at += 1;
                let e = self.expr()?;
                if !self.eat_op(')') {
                    return Err(ParseError::syntax(self.pos(), "expected ')'"));
                }
                Ok(e)
            }
            Some(Tok::Op(c)) => Err(ParseError::syntax(pos, format!("unexpected '{c}'"))),
            None => Err(ParseError::syntax(pos, "unexpected end of input")),
        }
    }
}

pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, at: 0, end: text.len() };
    let e = p.expr()?;
    if p.at != p.toks.len() {
        return Err(ParseError::syntax(p.pos(), "unexpected trailing input"));
    }
    Ok(e)
}

/// Meaning of an expression inside some algebra.
pub trait Interpret {
    type Value: Clone;
    type Error: From<ParseError>;

    fn number(&self, q: &BigRational) -> Result<Self::Value, Self::Error>;
    fn symbol(&self, name: &str, pos: usize) -> Result<Self::Value, Self::Error>;
    fn add(&self, a: Self::Value, b: Self::Value) -> Result<Self::Value, Self::Error>;
    fn mul(&self, a: Self::Value, b: Self::Value) -> Result<Self::Value, Self::Error>;
    fn pow(&self, a: Self::Value, exp: i64, pos: usize) -> Result<Self::Value, Self::Error>;
}

/// Value of a symbol-free subexpression, if it is one.
pub fn constant_value(e: &Expr) -> Option<Result<BigRational, ParseError>> {
    Some(match e {
        Expr::Num(n) => Ok(BigRational::from_integer(n.clone())),
        Expr::Sym { .. } => return None,
        Expr::Add(a, b) => match (constant_value(a)?, constant_value(b)?) {
            (Ok(x), Ok(y)) => Ok(x + y),
            (Err(e), _) | (_, Err(e)) => Err(e),
        },
        Expr::Sub(a, b) => match (constant_value(a)?, constant_value(b)?) {
            (Ok(x), Ok(y)) => Ok(x - y),
            (Err(e), _) | (_, Err(e)) => Err(e),
        },
        Expr::Mul(a, b) => match (constant_value(a)?, constant_value(b)?) {
            (Ok(x), Ok(y)) => Ok(x * y),
            (Err(e), _) | (_, Err(e)) => Err(e),
        },
        Expr::Div { num, den, pos } => match (constant_value(num)?, constant_value(den)?) {
            (Ok(_), Ok(y)) if y.is_zero() => Err(ParseError::DivisionByZero { pos: *pos }),
            (Ok(x), Ok(y)) => Ok(x / y),
            (Err(e), _) | (_, Err(e)) => Err(e),
        },
        Expr::Neg(a) => constant_value(a)?.map(|x| -x),
        Expr::Pow { base, exp, pos } => match constant_value(base)? {
            Ok(x) if x.is_zero() && *exp < 0 => Err(ParseError::DivisionByZero { pos: *pos }),
            Ok(x) => Ok(num_traits::pow::Pow::pow(x, *exp as i32)),
            Err(e) => Err(e),
        },
    })
}

pub fn evaluate<I: Interpret>(e: &Expr, it: &I) -> Result<I::Value, I::Error> {
    if let Some(q) = constant_value(e) {
        return it.number(&q?);
    }
    match e {
        Expr::Num(_) => unreachable!("numbers are constants"),
        Expr::Sym { name, pos } => it.symbol(name, *pos),
        Expr::Add(a, b) => it.add(evaluate(a, it)?, evaluate(b, it)?),
        Expr::Sub(a, b) => {
            let minus_one = it.number(&-BigRational::one())?;
            let nb = it.mul(minus_one, evaluate(b, it)?)?;
            it.add(evaluate(a, it)?, nb)
        }
        Expr::Mul(a, b) => it.mul(evaluate(a, it)?, evaluate(b, it)?),
        Expr::Div { num, den, pos } => {
            let q = match constant_value(den) {
                Some(q) => q?,
                None => return Err(ParseError::syntax(*pos, "division by a non-constant").into()),
            };
            if q.is_zero() {
                return Err(ParseError::DivisionByZero { pos: *pos }.into());
            }
            let inv = it.number(&q.recip())?;
            it.mul(evaluate(num, it)?, inv)
        }
        Expr::Neg(a) => {
            let minus_one = it.number(&-BigRational::one())?;
            it.mul(minus_one, evaluate(a, it)?)
        }
        Expr::Pow { base, exp, pos } => it.pow(evaluate(base, it)?, *exp, *pos),
    }
}

/// Parse and interpret in one step.
pub fn parse_with<I: Interpret>(text: &str, it: &I) -> Result<I::Value, I::Error> {
    let e = parse(text)?;
    evaluate(&e, it)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_and_positions() {
        let e = parse("-x^2").unwrap();
        assert!(matches!(e, Expr::Neg(_)));
        let e = parse("1/2*x").unwrap();
        assert!(matches!(e, Expr::Mul(..)));
        assert_eq!(parse("x +"), Err(ParseError::syntax(3, "unexpected end of input")));
        assert_eq!(parse("x $ d"), Err(ParseError::syntax(2, "unexpected character '$'")));
        assert_eq!(parse("(x"), Err(ParseError::syntax(2, "expected ')'")));
        assert!(parse("x^y").is_err());
        assert!(matches!(parse("x^(-2)").unwrap(), Expr::Pow { exp: -2, .. }));
    }

    #[test]
    fn constants_fold() {
        let q = constant_value(&parse("3/4 - 1/4").unwrap()).unwrap().unwrap();
        assert_eq!(q, BigRational::new(1.into(), 2.into()));
        assert_eq!(
            constant_value(&parse("1/(2-2)").unwrap()).unwrap(),
            Err(ParseError::DivisionByZero { pos: 1 })
        );
        assert!(constant_value(&parse("x/2").unwrap()).is_none());
    }
}
