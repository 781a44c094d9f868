//! Recursive-descent parser.
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := factor (("*" | "/") factor)*
//! factor := unary ("^" number)?
//! unary  := "-" unary | atom
//! atom   := number | "pi" | "e" | "t" | ident "(" expr ")" | "(" expr ")"
//! ```

use super::{Expr, Func};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
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

fn syntax(offset: usize, message: impl Into<String>) -> Error {
    Error::Syntax { offset, message: message.into() }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let single = match c {
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            b',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(tok) = single {
            out.push((tok, start));
            i += 1;
            continue;
        }
        if src[i..].starts_with('\u{2212}') {
            out.push((Tok::Minus, start));
            i += '\u{2212}'.len_utf8();
            continue;
        }
        if c.is_ascii_digit() || c == b'.' {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'.' {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text = &src[start..i];
            let v: f64 = text
                .parse()
                .map_err(|_| syntax(start, format!("malformed number `{text}`")))?;
            out.push((Tok::Num(v), start));
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), start));
            continue;
        }
        let ch = src[i..].chars().next().unwrap_or('?');
        return Err(syntax(start, format!("unexpected character `{ch}`")));
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(syntax(self.offset(), format!("expected {what}")))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Tok::Slash => {
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.unary()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let (tok, at) = self.bump();
            return match tok {
                Tok::Num(p) => Ok(Expr::Pow(Box::new(base), p)),
                _ => Err(syntax(at, "exponent must be a numeric literal")),
            };
        }
        Ok(base)
    }

    fn unary(&mut self) -> Result<Expr> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr> {
        let (tok, at) = self.bump();
        match tok {
            Tok::Num(v) => Ok(Expr::Const(v)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => match name.as_str() {
                "pi" => Ok(Expr::Pi),
                "e" => Ok(Expr::E),
                "t" => Ok(Expr::Var),
                _ => {
                    let func = Func::from_name(&name)
                        .ok_or_else(|| Error::UnknownIdentifier { name: name.clone(), offset: at })?;
                    if *self.peek() != Tok::LParen {
                        return Err(syntax(self.offset(), format!("expected `(` after `{name}`")));
                    }
                    self.bump();
                    if *self.peek() == Tok::RParen {
                        return Err(Error::Arity { name, offset: at });
                    }
                    let arg = self.expr()?;
                    if *self.peek() == Tok::Comma {
                        return Err(Error::Arity { name, offset: at });
                    }
                    self.expect(Tok::RParen, "`)`")?;
                    Ok(Expr::Apply(func, Box::new(arg)))
                }
            },
            Tok::End => Err(syntax(at, "unexpected end of input")),
            other => Err(syntax(at, format!("unexpected token {other:?}"))),
        }
    }
}

/// Parses an infix expression in the variable `t`.
pub fn parse(source: &str) -> Result<Expr> {
    let mut p = Parser { toks: lex(source)?, pos: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(syntax(p.offset(), "trailing input"));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_nodes() {
        assert_eq!(parse("t^4").unwrap(), Expr::pow(Expr::Var, 4.0));
        assert_eq!(parse("cosh(t)").unwrap(), Expr::apply(Func::Cosh, Expr::Var));
        assert_eq!(
            parse("coth(t)/t").unwrap(),
            Expr::Div(Box::new(Expr::apply(Func::Coth, Expr::Var)), Box::new(Expr::Var))
        );
    }

    #[test]
    fn precedence_follows_grammar() {
        // unary minus binds tighter than ^
        assert_eq!(parse("-t^2").unwrap(), Expr::pow(Expr::Neg(Box::new(Expr::Var)), 2.0));
        let e = parse("1 + 2*t^3 - t").unwrap();
        assert_eq!(e.eval(2.0).unwrap(), 15.0);
        assert_eq!(parse(" 2 * ( t + 1 ) ").unwrap().eval(1.0).unwrap(), 4.0);
        assert_eq!(parse("t \u{2212} 1").unwrap().eval(3.0).unwrap(), 2.0);
    }

    #[test]
    fn constants_and_scientific_notation() {
        assert_eq!(parse("pi").unwrap(), Expr::Pi);
        assert_eq!(parse("e").unwrap(), Expr::E);
        assert_eq!(parse("1e-3").unwrap(), Expr::Const(1e-3));
        assert_eq!(parse(".5").unwrap(), Expr::Const(0.5));
        assert!(parse("2e").is_err());
    }

    #[test]
    fn error_offsets() {
        assert_eq!(
            parse("t + * 2"),
            Err(Error::Syntax { offset: 4, message: "unexpected token Star".into() })
        );
        assert_eq!(
            parse("foo(t)"),
            Err(Error::UnknownIdentifier { name: "foo".into(), offset: 0 })
        );
        assert_eq!(parse("1 + x"), Err(Error::UnknownIdentifier { name: "x".into(), offset: 4 }));
        assert_eq!(parse("2*sin(t, 1)"), Err(Error::Arity { name: "sin".into(), offset: 2 }));
        assert_eq!(parse("exp()"), Err(Error::Arity { name: "exp".into(), offset: 0 }));
        assert!(matches!(parse("t^t"), Err(Error::Syntax { offset: 2, .. })));
        assert!(matches!(parse("t^2^3"), Err(Error::Syntax { offset: 3, .. })));
        assert!(matches!(parse("(t"), Err(Error::Syntax { offset: 2, .. })));
        assert!(matches!(parse("sin t"), Err(Error::Syntax { .. })));
        assert!(matches!(parse("t $"), Err(Error::Syntax { offset: 2, .. })));
        assert!(matches!(parse(""), Err(Error::Syntax { offset: 0, .. })));
    }
}
