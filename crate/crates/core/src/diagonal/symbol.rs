//! Diagonal symbols: `override{1: 1, 2: 1/3}; tail: 1 - 1/n`.
//!
//! ```text
//! symbol  := [ "override" "{" entry ("," entry)* "}" ";" ] "tail" ":" expr
//! entry   := integer ":" expr            (no variable)
//! expr    := term (("+" | "-") term)*
//! term    := unary (("*" | "/") unary)*
//! unary   := ("-" | "+") unary | power
//! power   := atom ("^" integer)?
//! atom    := number | "n" | "k" | "(" expr ")"
//! ```
//! Numbers are decimals read exactly. `n` and `k` both name the index.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{Pow, Zero};

use super::rational::{Q, RatFn};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Symbol {
    pub overrides: BTreeMap<u64, Q>,
    pub tail: RatFn,
    pub source: String,
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::SymbolParse {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected '{}'", c as char))
        }
    }

    fn keyword(&mut self, kw: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(kw.as_bytes()) {
            self.pos += kw.len();
            true
        } else {
            false
        }
    }

    fn integer(&mut self) -> Result<u64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected an integer");
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .expect("ascii digits")
            .parse()
            .or_else(|_| self.err("integer out of range"))
    }

    fn number(&mut self) -> Result<Q> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let int_end = self.pos;
        let mut frac = "";
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            let fstart = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            frac = std::str::from_utf8(&self.src[fstart..self.pos]).expect("ascii digits");
        }
        let int = std::str::from_utf8(&self.src[start..int_end]).expect("ascii digits");
        if int.is_empty() && frac.is_empty() {
            return self.err("expected a number");
        }
        let digits: BigInt = format!("{int}{frac}").parse().unwrap_or_else(|_| BigInt::zero());
        let scale: BigInt = BigInt::from(10u32).pow(frac.len() as u32);
        Ok(Q::new(digits, scale))
    }

    fn expr(&mut self) -> Result<RatFn> {
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                acc = acc.add(&self.term()?);
            } else if self.eat(b'-') {
                acc = acc.sub(&self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<RatFn> {
        let mut acc = self.unary()?;
        loop {
            if self.eat(b'*') {
                acc = acc.mul(&self.unary()?);
            } else if self.eat(b'/') {
                let at = self.pos;
                let d = self.unary()?;
                acc = match acc.div(&d) {
                    Some(v) => v,
                    None => {
                        self.pos = at;
                        return self.err("division by zero");
                    }
                };
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<RatFn> {
        if self.eat(b'-') {
            Ok(self.unary()?.neg())
        } else if self.eat(b'+') {
            self.unary()
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<RatFn> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let k = self.integer()?;
            if k > 64 {
                return self.err("exponent too large");
            }
            Ok(base.pow(k as u32))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<RatFn> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(b'n') | Some(b'k') => {
                self.pos += 1;
                Ok(RatFn::var())
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => Ok(RatFn::constant(self.number()?)),
            Some(c) => self.err(format!("unexpected '{}'", c as char)),
            None => self.err("unexpected end of input"),
        }
    }

    fn constant_expr(&mut self) -> Result<Q> {
        let at = self.pos;
        let e = self.expr()?;
        if !e.is_constant() {
            self.pos = at;
            return self.err("override values must not depend on the index");
        }
        Ok(e.eval(&Q::zero()).expect("constant has no pole"))
    }

    fn end(&mut self) -> Result<()> {
        self.eat(b';');
        if self.peek().is_some() {
            return self.err("trailing input");
        }
        Ok(())
    }
}

/// Parses a rational expression in the index variable.
pub fn parse_expr(src: &str) -> Result<RatFn> {
    let mut p = Parser {
        src: src.as_bytes(),
        pos: 0,
    };
    let e = p.expr()?;
    p.end()?;
    Ok(e)
}

pub fn parse_symbol(src: &str) -> Result<Symbol> {
    let mut p = Parser {
        src: src.as_bytes(),
        pos: 0,
    };
    let mut overrides = BTreeMap::new();
    if p.keyword("override") {
        p.expect(b'{')?;
        if !p.eat(b'}') {
            loop {
                let at = p.pos;
                let idx = p.integer()?;
                if idx == 0 {
                    p.pos = at;
                    return p.err("indices start at 1");
                }
                p.expect(b':')?;
                let v = p.constant_expr()?;
                if overrides.insert(idx, v).is_some() {
                    p.pos = at;
                    return p.err(format!("index {idx} overridden twice"));
                }
                if p.eat(b'}') {
                    break;
                }
                p.expect(b',')?;
            }
        }
        p.expect(b';')?;
    }
    if !p.keyword("tail") {
        return p.err("expected 'tail'");
    }
    p.expect(b':')?;
    let tail = p.expr()?;
    p.end()?;
    Ok(Symbol {
        overrides,
        tail,
        source: src.trim().to_string(),
    })
}
