//! Grammar: `x1..xN`, `+ - * ^`, parentheses, integer literals reduced mod p,
//! and `[c0,c1,...]` for extension-field constants in the power basis.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{Elem, Field};

use super::Poly;

/// Parse a polynomial. With `nvars = None` the space is sized by the largest
/// variable index that appears.
pub fn parse_poly(text: &str, field: &Arc<Field>, nvars: Option<usize>) -> Result<Poly> {
    let tokens = lex(text)?;
    let used = tokens
        .iter()
        .filter_map(|(_, t)| if let Tok::Var(i) = t { Some(*i) } else { None })
        .max()
        .unwrap_or(0);
    let n = match nvars {
        Some(n) if used > n => {
            let pos = tokens.iter().find(|(_, t)| matches!(t, Tok::Var(i) if *i > n)).unwrap().0;
            return Err(Error::Syntax { pos, msg: format!("variable x{used} outside x1..x{n}") });
        }
        Some(n) => n,
        None => used,
    };
    let mut p = Parser { tokens, pos: 0, field, nvars: n, len: text.len() };
    let out = p.expr()?;
    if p.pos < p.tokens.len() {
        return Err(Error::Syntax { pos: p.tokens[p.pos].0, msg: "unexpected token".into() });
    }
    let deg = out.degree();
    out.with_bound(deg)
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(u64),
    Var(usize),
    Ext(Vec<u64>),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let b = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let number = |i: &mut usize| -> Result<u64> {
        let start = *i;
        while *i < b.len() && b[*i].is_ascii_digit() {
            *i += 1;
        }
        text[start..*i]
            .parse()
            .map_err(|_| Error::Syntax { pos: start, msg: "expected a number".into() })
    };
    while i < b.len() {
        let c = b[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => out.push((start, Tok::Plus)),
            b'-' => out.push((start, Tok::Minus)),
            b'*' => out.push((start, Tok::Star)),
            b'^' => out.push((start, Tok::Caret)),
            b'(' => out.push((start, Tok::LParen)),
            b')' => out.push((start, Tok::RParen)),
            b'0'..=b'9' => {
                let v = number(&mut i)?;
                out.push((start, Tok::Num(v)));
                continue;
            }
            b'x' => {
                i += 1;
                if i >= b.len() || !b[i].is_ascii_digit() {
                    return Err(Error::Syntax { pos: start, msg: "variable needs an index".into() });
                }
                let v = number(&mut i)? as usize;
                if v == 0 {
                    return Err(Error::Syntax { pos: start, msg: "variables start at x1".into() });
                }
                out.push((start, Tok::Var(v)));
                continue;
            }
            b'[' => {
                i += 1;
                let mut cs = Vec::new();
                loop {
                    while i < b.len() && b[i] == b' ' {
                        i += 1;
                    }
                    if i >= b.len() || !b[i].is_ascii_digit() {
                        return Err(Error::Syntax { pos: i, msg: "expected a digit in extension literal".into() });
                    }
                    cs.push(number(&mut i)?);
                    while i < b.len() && b[i] == b' ' {
                        i += 1;
                    }
                    match b.get(i) {
                        Some(b',') => i += 1,
                        Some(b']') => {
                            i += 1;
                            break;
                        }
                        _ => return Err(Error::Syntax { pos: i, msg: "unterminated extension literal".into() }),
                    }
                }
                out.push((start, Tok::Ext(cs)));
                continue;
            }
            _ => return Err(Error::Syntax { pos: start, msg: format!("unexpected character '{}'", c as char) }),
        }
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<(usize, Tok)>,
    pos: usize,
    field: &'a Arc<Field>,
    nvars: usize,
    len: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.len, |(p, _)| *p)
    }

    fn err<T>(&self, msg: &str) -> Result<T> {
        Err(Error::Syntax { pos: self.here(), msg: msg.into() })
    }

    fn expr(&mut self) -> Result<Poly> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Poly> {
        let mut acc = self.unary()?;
        while let Some(Tok::Star) = self.peek() {
            self.pos += 1;
            acc = acc.mul(&self.unary()?);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Poly> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(self.unary()?.neg())
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Poly> {
        let base = self.atom()?;
        if let Some(Tok::Caret) = self.peek() {
            self.pos += 1;
            match self.peek().cloned() {
                Some(Tok::Num(e)) if e <= u16::MAX as u64 => {
                    self.pos += 1;
                    Ok(base.pow(e as u32))
                }
                _ => self.err("expected an exponent after '^'"),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Poly> {
        let f = self.field;
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Poly::constant(f, self.nvars, Elem((v % f.p() as u64) as u32)))
            }
            Some(Tok::Var(i)) => {
                self.pos += 1;
                Ok(Poly::var(f, self.nvars, i - 1))
            }
            Some(Tok::Ext(cs)) => {
                let at = self.here();
                self.pos += 1;
                let cs: Vec<u32> = cs.iter().map(|&c| (c % f.p() as u64) as u32).collect();
                let c = f
                    .from_coeffs(&cs)
                    .map_err(|_| Error::Syntax { pos: at, msg: "extension literal longer than the field degree".into() })?;
                Ok(Poly::constant(f, self.nvars, c))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.expr()?;
                match self.peek() {
                    Some(Tok::RParen) => {
                        self.pos += 1;
                        Ok(inner)
                    }
                    _ => self.err("expected ')'"),
                }
            }
            _ => self.err("expected a number, variable or '('"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(p: u32, l: u32) -> Arc<Field> {
        Arc::new(Field::new(p, l).unwrap())
    }

    #[test]
    fn two_terms() {
        let p = parse_poly("x1*x2 + 3*x3^2", &f(7, 1), None).unwrap();
        assert_eq!(p.num_terms(), 2);
        assert_eq!(p.nvars(), 3);
        assert_eq!(p.render(), "x1*x2 + 3*x3^2");
    }

    #[test]
    fn canonical_rendering() {
        let k = f(7, 1);
        let p = parse_poly("  -x2 + 9 + (x1 + x2)^2 - x1^2 ", &k, None).unwrap();
        assert_eq!(p.render(), "2*x1*x2 + x2^2 + 6*x2 + 2");
        assert_eq!(parse_poly(&p.render(), &k, None).unwrap(), p);
        assert_eq!(parse_poly("x1 - x1", &k, None).unwrap().render(), "0");
    }

    #[test]
    fn extension_literals_round_trip() {
        let k = f(3, 2);
        let p = parse_poly("[0,1]*x1^2 + [2,2]", &k, None).unwrap();
        assert_eq!(p.render(), "[0,1]*x1^2 + [2,2]");
        assert_eq!(parse_poly(&p.render(), &k, None).unwrap(), p);
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let k = f(7, 1);
        match parse_poly("x1^^2", &k, None) {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_poly("x1 +", &k, None), Err(Error::Syntax { pos: 4, .. })));
        assert!(matches!(parse_poly("(x1", &k, None), Err(Error::Syntax { .. })));
        assert!(matches!(parse_poly("x0", &k, None), Err(Error::Syntax { .. })));
        assert!(matches!(parse_poly("x5", &k, Some(3)), Err(Error::Syntax { .. })));
        assert!(matches!(parse_poly("y", &k, None), Err(Error::Syntax { pos: 0, .. })));
    }

    #[test]
    fn degree_bound_enforced() {
        let k = f(7, 1);
        let p = parse_poly("x1^3", &k, None).unwrap();
        assert_eq!(p.clone().with_bound(2).unwrap_err(), Error::DegreeExceeded { degree: 3, bound: 2 });
        assert!(p.with_bound(4).is_ok());
    }
}
