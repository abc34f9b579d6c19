//! Recursive-descent parser for coefficient and solution formulas.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' INTEGER)*
//! primary := NUMBER | 'x' | 'y' | 'z' | 'pi' | FUNC '(' expr ')' | '(' expr ')'
//! ```

use super::expr::{Expr, Func, VAR_NAMES};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64, bool),
    Ident(String),
    Op(char),
    End,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    /// 1-based.
    column: usize,
}

fn tokenize(text: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let column = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            let mut integer = true;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                integer = false;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    integer = false;
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s: String = chars[start..i].iter().collect();
            let v: f64 = s.parse().map_err(|_| Error::Syntax {
                column,
                message: format!("malformed number `{s}`"),
            })?;
            out.push(Token { tok: Tok::Num(v, integer), column });
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                column,
            });
        } else if "+-*/^()".contains(c) {
            out.push(Token { tok: Tok::Op(c), column });
            i += 1;
        } else {
            return Err(Error::Syntax {
                column,
                message: format!("unexpected character `{c}`"),
            });
        }
    }
    out.push(Token {
        tok: Tok::End,
        column: chars.len() + 1,
    });
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if t.tok != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek().tok == Tok::Op(op) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn unexpected(&self, wanted: &str) -> Error {
        let t = self.peek();
        let found = match &t.tok {
            Tok::Num(v, _) => format!("number {v}"),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Op(c) => format!("`{c}`"),
            Tok::End => "end of input".to_string(),
        };
        Error::Syntax {
            column: t.column,
            message: format!("expected {wanted}, found {found}"),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
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

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            Ok(Expr::Neg(Box::new(self.unary()?)))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let mut base = self.primary()?;
        while self.eat('^') {
            let t = self.next();
            match t.tok {
                Tok::Num(v, true) if v <= f64::from(u32::MAX) => {
                    base = Expr::Pow(Box::new(base), v as u32);
                }
                Tok::End => {
                    return Err(Error::Syntax {
                        column: t.column,
                        message: "expected an exponent, found end of input".into(),
                    })
                }
                _ => return Err(Error::NonIntegerExponent { column: t.column }),
            }
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr> {
        let t = self.peek().clone();
        match t.tok {
            Tok::Num(v, _) => {
                self.pos += 1;
                Ok(Expr::Num(v))
            }
            Tok::Ident(name) => {
                self.pos += 1;
                if let Some(i) = VAR_NAMES.iter().position(|&v| v == name) {
                    return Ok(Expr::Var(i));
                }
                if name == "pi" {
                    return Ok(Expr::Pi);
                }
                let Some(func) = Func::from_name(&name) else {
                    return Err(Error::UnknownIdentifier {
                        name,
                        column: t.column,
                    });
                };
                if !self.eat('(') {
                    return Err(self.unexpected(&format!("`(` after `{name}`")));
                }
                let arg = self.expr()?;
                if !self.eat(')') {
                    return Err(self.unexpected("`)`"));
                }
                Ok(Expr::Call(func, Box::new(arg)))
            }
            Tok::Op('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(self.unexpected("`)`"));
                }
                Ok(e)
            }
            _ => Err(self.unexpected("a number, variable, function or `(`")),
        }
    }
}

/// Parses a formula in `x`, `y`, `z`.
pub fn parse(text: &str) -> Result<Expr> {
    let mut p = Parser {
        tokens: tokenize(text)?,
        pos: 0,
    };
    let e = p.expr()?;
    if p.peek().tok != Tok::End {
        return Err(p.unexpected("an operator or end of input"));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(s: &str, p: &[f64]) -> f64 {
        parse(s).unwrap().eval(p)
    }

    #[test]
    fn evaluates_simple_formulas() {
        assert!((at("sin(pi*x)+x^3", &[0.5]) - 1.125).abs() < 1e-15);
        assert_eq!(at("10+30*y^5+x*cos(y)+y", &[0.0, 0.0]), 10.0);
        assert_eq!(at("2*3+4", &[]), 10.0);
        assert_eq!(at("2*(3+4)", &[]), 14.0);
        assert_eq!(at("8/4/2", &[]), 1.0);
        assert_eq!(at("7-2-1", &[]), 4.0);
        assert_eq!(at("2^3^2", &[]), 64.0);
        assert_eq!(at("-2^2", &[]), -4.0);
        assert_eq!(at("(-2)^2", &[]), 4.0);
        assert_eq!(at("1.5e2 + .5", &[]), 150.5);
        assert_eq!(at("--x", &[3.0]), 3.0);
        assert_eq!(at("exp(0)*z", &[0.0, 0.0, 2.0]), 2.0);
    }

    #[test]
    fn reports_columns() {
        match parse("x*(1+y") {
            Err(Error::Syntax { column, .. }) => assert_eq!(column, 7),
            other => panic!("{other:?}"),
        }
        match parse("x + foo(y)") {
            Err(Error::UnknownIdentifier { name, column }) => {
                assert_eq!(name, "foo");
                assert_eq!(column, 5);
            }
            other => panic!("{other:?}"),
        }
        match parse("x^2.5") {
            Err(Error::NonIntegerExponent { column }) => assert_eq!(column, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("x^y"), Err(Error::NonIntegerExponent { column: 3 })));
        assert!(matches!(parse("x^-1"), Err(Error::NonIntegerExponent { column: 3 })));
        assert!(matches!(parse("x $ y"), Err(Error::Syntax { column: 3, .. })));
        assert!(matches!(parse("sin x"), Err(Error::Syntax { column: 5, .. })));
        assert!(matches!(parse(""), Err(Error::Syntax { column: 1, .. })));
        assert!(matches!(parse("x y"), Err(Error::Syntax { column: 3, .. })));
    }

    #[test]
    fn print_round_trip() {
        for s in ["x-(y-1)", "-(x+1)^3", "2/(x*y)", "sin(-x)*-y", "1e-5*x", "(x^2)^3"] {
            let e = parse(s).unwrap();
            assert_eq!(parse(&e.to_string()).unwrap(), e, "{s} -> {e}");
        }
    }
}
