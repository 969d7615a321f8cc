//! Arithmetic expression DSL over the trait variable `x`.
//!
//! Grammar (lowest to highest precedence):
//!
//! ```text
//! sum     := product (("+" | "-") product)*
//! product := unary (("*" | "/") unary)*
//! unary   := "-" unary | power
//! power   := atom ("^" unary)?
//! atom    := number | "x" | "(" sum ")" | func1 "(" sum ")" | func2 "(" sum "," sum ")"
//! func1   := "exp" | "log"
//! func2   := "min" | "max"
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so `-x^2`
//! is `-(x^2)`. Parsed literals are always nonnegative; negation is a node.

use std::fmt;

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Min,
    Max,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnOp {
    Neg,
    Exp,
    Log,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Var,
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn parse(text: &str) -> Result<Expr> {
        let tokens = tokenize(text)?;
        let mut p = Parser { tokens, pos: 0 };
        let e = p.sum()?;
        match p.peek() {
            None => Ok(e),
            Some((col, t)) => Err(Error::Expression {
                position: col,
                message: format!("unexpected {t:?} after complete expression"),
            }),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Expr::Num(c) => *c,
            Expr::Var => x,
            Expr::Unary(op, e) => {
                let v = e.eval(x);
                match op {
                    UnOp::Neg => -v,
                    UnOp::Exp => v.exp(),
                    UnOp::Log => v.ln(),
                }
            }
            Expr::Binary(op, a, b) => {
                let (u, v) = (a.eval(x), b.eval(x));
                match op {
                    BinOp::Add => u + v,
                    BinOp::Sub => u - v,
                    BinOp::Mul => u * v,
                    BinOp::Div => u / v,
                    BinOp::Pow => u.powf(v),
                    BinOp::Min => u.min(v),
                    BinOp::Max => u.max(v),
                }
            }
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Expr::Num(_) | Expr::Var => 1,
            Expr::Unary(_, e) => 1 + e.size(),
            Expr::Binary(_, a, b) => 1 + a.size() + b.size(),
        }
    }
}

/// Fully parenthesized form; parsing it yields the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(c) => write!(f, "{c:?}"),
            Expr::Var => write!(f, "x"),
            Expr::Unary(UnOp::Neg, e) => write!(f, "(-{e})"),
            Expr::Unary(UnOp::Exp, e) => write!(f, "exp({e})"),
            Expr::Unary(UnOp::Log, e) => write!(f, "log({e})"),
            Expr::Binary(BinOp::Min, a, b) => write!(f, "min({a}, {b})"),
            Expr::Binary(BinOp::Max, a, b) => write!(f, "max({a}, {b})"),
            Expr::Binary(op, a, b) => {
                let s = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                    BinOp::Min | BinOp::Max => unreachable!(),
                };
                write!(f, "({a} {s} {b})")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>> {
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
            let v: f64 = s.parse().map_err(|_| Error::Expression {
                position: start + 1,
                message: format!("malformed number {s:?}"),
            })?;
            out.push((start + 1, Tok::Num(v)));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                i += 1;
            }
            out.push((start + 1, Tok::Ident(chars[start..i].iter().collect())));
        } else if "+-*/^(),".contains(c) {
            out.push((i + 1, Tok::Sym(c)));
            i += 1;
        } else {
            return Err(Error::Expression {
                position: i + 1,
                message: format!("unexpected character {c:?}"),
            });
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<(usize, Tok)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<(usize, Tok)> {
        self.tokens.get(self.pos).cloned()
    }

    fn end_column(&self) -> usize {
        self.tokens.last().map(|(c, _)| c + 1).unwrap_or(1)
    }

    fn eat(&mut self, sym: char) -> bool {
        if let Some((_, Tok::Sym(c))) = self.peek() {
            if c == sym {
                self.pos += 1;
                return true;
            }
        }
        false
    }

    fn expect(&mut self, sym: char) -> Result<()> {
        if self.eat(sym) {
            return Ok(());
        }
        let (position, found) = match self.peek() {
            Some((c, t)) => (c, format!("{t:?}")),
            None => (self.end_column(), "end of input".to_string()),
        };
        Err(Error::Expression {
            position,
            message: format!("expected '{sym}', found {found}"),
        })
    }

    fn sum(&mut self) -> Result<Expr> {
        let mut lhs = self.product()?;
        loop {
            let op = if self.eat('+') {
                BinOp::Add
            } else if self.eat('-') {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.product()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn product(&mut self) -> Result<Expr> {
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

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(Expr::Unary(UnOp::Neg, Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat('^') {
            let exp = self.unary()?;
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let Some((col, tok)) = self.peek() else {
            return Err(Error::Expression {
                position: self.end_column(),
                message: "unexpected end of input".into(),
            });
        };
        self.pos += 1;
        match tok {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::Sym('(') => {
                let e = self.sum()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => match name.as_str() {
                "x" => Ok(Expr::Var),
                "exp" | "log" => {
                    self.expect('(')?;
                    let e = self.sum()?;
                    self.expect(')')?;
                    let op = if name == "exp" { UnOp::Exp } else { UnOp::Log };
                    Ok(Expr::Unary(op, Box::new(e)))
                }
                "min" | "max" => {
                    self.expect('(')?;
                    let a = self.sum()?;
                    self.expect(',')?;
                    let b = self.sum()?;
                    self.expect(')')?;
                    let op = if name == "min" { BinOp::Min } else { BinOp::Max };
                    Ok(Expr::Binary(op, Box::new(a), Box::new(b)))
                }
                _ => Err(Error::Expression {
                    position: col,
                    message: format!("unknown identifier {name:?}"),
                }),
            },
            Tok::Sym(c) => Err(Error::Expression {
                position: col,
                message: format!("unexpected '{c}'"),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(s: &str, x: f64) -> f64 {
        Expr::parse(s).unwrap().eval(x)
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(ev("1 + 2 * 3", 0.0), 7.0);
        assert_eq!(ev("2^3^2", 0.0), 512.0);
        assert_eq!(ev("-x^2", 3.0), -9.0);
        assert_eq!(ev("2^-1", 0.0), 0.5);
        assert_eq!(ev("8 / 4 / 2", 0.0), 1.0);
        assert_eq!(ev("10 - 3 - 2", 0.0), 5.0);
    }

    #[test]
    fn functions_and_literals() {
        assert!((ev("exp(log(x))", 2.5) - 2.5).abs() < 1e-15);
        assert_eq!(ev("min(x, 3) + max(x, 3)", 5.0), 8.0);
        assert_eq!(ev("1.5e2 * x", 2.0), 300.0);
        assert_eq!(ev(".5", 0.0), 0.5);
    }

    #[test]
    fn printer_round_trips() {
        for s in ["-x^2", "min(x, 2) * exp(-x)", "x / (1 + x)", "2^-1^x", "--x"] {
            let e = Expr::parse(s).unwrap();
            assert_eq!(Expr::parse(&e.to_string()).unwrap(), e, "{s}");
        }
    }

    #[test]
    fn errors_carry_columns() {
        match Expr::parse("x + * 2") {
            Err(Error::Expression { position, .. }) => assert_eq!(position, 5),
            other => panic!("{other:?}"),
        }
        assert!(Expr::parse("foo(x)").is_err());
        assert!(Expr::parse("(x + 1").is_err());
        assert!(Expr::parse("x $ 1").is_err());
        assert!(Expr::parse("").is_err());
    }
}
