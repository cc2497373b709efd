//! Plain-text grammar for vector fields.
//!
//! ```text
//! field      = { line } ;
//! line       = blank | comment | param-line | ode-line ;
//! comment    = "#" <rest of line> ;
//! param-line = "params" ":" ident "=" number { "," ident "=" number } ;
//! ode-line   = ident "'" "=" expr ;
//! expr       = term { ("+" | "-") term } ;
//! term       = unary { ("*" | "/") unary } ;
//! unary      = "-" unary | power ;
//! power      = atom [ "^" [ "-" ] integer ] ;
//! atom       = number | ident | "(" expr ")" | "sqrt" "(" expr ")" ;
//! ```
//!
//! State variables are the left-hand sides, indexed in order of appearance.
//! Decimal literals are rounded outward, so a parameter like `0.0009537`
//! becomes a two-ulp enclosure of the exact decimal value.
//!
//! ```
//! use rigode::vectorfield::VectorField;
//! let f = VectorField::from_text("
//!     params: k = 0.5
//!     x' = v
//!     v' = -k * x
//! ").unwrap();
//! assert_eq!(f.dim(), 2);
//! ```

use super::{FieldBuilder, NodeId, VectorField};
use crate::error::Error;
use crate::interval::Interval;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Number(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Prime,
    Equals,
    Comma,
    Colon,
}

fn tokenize(line: &str) -> Result<Vec<Tok>, Error> {
    let mut toks = Vec::new();
    let mut chars = line.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            ' ' | '\t' => {
                chars.next();
            }
            '#' => break,
            '+' => {
                chars.next();
                toks.push(Tok::Plus);
            }
            '-' => {
                chars.next();
                toks.push(Tok::Minus);
            }
            '*' => {
                chars.next();
                toks.push(Tok::Star);
            }
            '/' => {
                chars.next();
                toks.push(Tok::Slash);
            }
            '^' => {
                chars.next();
                toks.push(Tok::Caret);
            }
            '(' => {
                chars.next();
                toks.push(Tok::LParen);
            }
            ')' => {
                chars.next();
                toks.push(Tok::RParen);
            }
            '\'' => {
                chars.next();
                toks.push(Tok::Prime);
            }
            '=' => {
                chars.next();
                toks.push(Tok::Equals);
            }
            ',' => {
                chars.next();
                toks.push(Tok::Comma);
            }
            ':' => {
                chars.next();
                toks.push(Tok::Colon);
            }
            c if c.is_ascii_digit() || c == '.' => {
                let mut lit = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_digit() || d == '.' {
                        lit.push(d);
                        chars.next();
                    } else if d == 'e' || d == 'E' {
                        // exponent only if followed by digit or sign+digit
                        let mut clone = chars.clone();
                        clone.next();
                        match clone.peek() {
                            Some(&s) if s.is_ascii_digit() => {
                                lit.push(d);
                                chars.next();
                            }
                            Some(&('+' | '-')) => {
                                let mut c2 = clone.clone();
                                c2.next();
                                if matches!(c2.peek(), Some(x) if x.is_ascii_digit()) {
                                    lit.push(d);
                                    chars.next();
                                    lit.push(chars.next().unwrap());
                                } else {
                                    break;
                                }
                            }
                            _ => break,
                        }
                    } else {
                        break;
                    }
                }
                toks.push(Tok::Number(lit));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut id = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_alphanumeric() || d == '_' {
                        id.push(d);
                        chars.next();
                    } else {
                        break;
                    }
                }
                toks.push(Tok::Ident(id));
            }
            other => {
                return Err(Error::ParseField(format!("unexpected character {other:?}")));
            }
        }
    }
    Ok(toks)
}

struct ExprParser<'a> {
    toks: &'a [Tok],
    pos: usize,
    builder: &'a mut FieldBuilder,
}

impl<'a> ExprParser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, t: &Tok) -> Result<(), Error> {
        match self.bump() {
            Some(ref got) if got == t => Ok(()),
            got => Err(Error::ParseField(format!("expected {t:?}, found {got:?}"))),
        }
    }

    fn expr(&mut self) -> Result<NodeId, Error> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    let rhs = self.term()?;
                    acc = self.builder.add(acc, rhs);
                }
                Some(Tok::Minus) => {
                    self.bump();
                    let rhs = self.term()?;
                    acc = self.builder.sub(acc, rhs);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<NodeId, Error> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    let rhs = self.unary()?;
                    acc = self.builder.mul(acc, rhs);
                }
                Some(Tok::Slash) => {
                    self.bump();
                    let rhs = self.unary()?;
                    acc = self.builder.div(acc, rhs)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<NodeId, Error> {
        if matches!(self.peek(), Some(Tok::Minus)) {
            self.bump();
            let inner = self.unary()?;
            return Ok(self.builder.neg(inner));
        }
        self.power()
    }

    fn power(&mut self) -> Result<NodeId, Error> {
        let base = self.atom()?;
        if matches!(self.peek(), Some(Tok::Caret)) {
            self.bump();
            let neg = if matches!(self.peek(), Some(Tok::Minus)) {
                self.bump();
                true
            } else {
                false
            };
            let k = match self.bump() {
                Some(Tok::Number(lit)) => lit
                    .parse::<i32>()
                    .map_err(|_| Error::ParseField(format!("exponent must be an integer, got {lit:?}")))?,
                got => return Err(Error::ParseField(format!("expected integer exponent, found {got:?}"))),
            };
            return self.builder.powi(base, if neg { -k } else { k });
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<NodeId, Error> {
        match self.bump() {
            Some(Tok::Number(lit)) => {
                let v = Interval::parse_outward(&lit)?;
                Ok(self.builder.constant(v))
            }
            Some(Tok::Ident(name)) if name == "sqrt" => {
                self.expect(&Tok::LParen)?;
                let inner = self.expr()?;
                self.expect(&Tok::RParen)?;
                self.builder.sqrt(inner)
            }
            Some(Tok::Ident(name)) => {
                if self.builder.var_names.iter().any(|v| *v == name) {
                    Ok(self.builder.variable(&name))
                } else if self.builder.has_param(&name) {
                    Ok(self.builder.parameter(&name, Interval::ZERO))
                } else {
                    Err(Error::ParseField(format!("unknown identifier {name:?}")))
                }
            }
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                self.expect(&Tok::RParen)?;
                Ok(inner)
            }
            got => Err(Error::ParseField(format!("expected an atom, found {got:?}"))),
        }
    }
}

pub fn parse_field(src: &str) -> Result<VectorField, Error> {
    let mut builder = FieldBuilder::new();
    let mut equations: Vec<(String, Vec<Tok>)> = Vec::new();

    for line in src.lines() {
        let toks = tokenize(line)?;
        if toks.is_empty() {
            continue;
        }
        match &toks[0] {
            Tok::Ident(kw) if kw == "params" && matches!(toks.get(1), Some(Tok::Colon)) => {
                let mut i = 2;
                loop {
                    let name = match toks.get(i) {
                        Some(Tok::Ident(n)) => n.clone(),
                        got => {
                            return Err(Error::ParseField(format!(
                                "expected parameter name, found {got:?}"
                            )))
                        }
                    };
                    if !matches!(toks.get(i + 1), Some(Tok::Equals)) {
                        return Err(Error::ParseField(format!("expected '=' after {name:?}")));
                    }
                    // optional sign on the default value
                    let (neg, vi) = match toks.get(i + 2) {
                        Some(Tok::Minus) => (true, i + 3),
                        _ => (false, i + 2),
                    };
                    let value = match toks.get(vi) {
                        Some(Tok::Number(lit)) => {
                            let v = Interval::parse_outward(lit)?;
                            if neg {
                                -v
                            } else {
                                v
                            }
                        }
                        got => {
                            return Err(Error::ParseField(format!(
                                "expected numeric default for {name:?}, found {got:?}"
                            )))
                        }
                    };
                    builder.parameter(&name, value);
                    match toks.get(vi + 1) {
                        Some(Tok::Comma) => i = vi + 2,
                        None => break,
                        got => {
                            return Err(Error::ParseField(format!(
                                "expected ',' or end of line, found {got:?}"
                            )))
                        }
                    }
                }
            }
            Tok::Ident(name)
                if matches!(toks.get(1), Some(Tok::Prime))
                    && matches!(toks.get(2), Some(Tok::Equals)) =>
            {
                equations.push((name.clone(), toks[3..].to_vec()));
            }
            _ => {
                return Err(Error::ParseField(format!("cannot parse line {line:?}")));
            }
        }
    }

    if equations.is_empty() {
        return Err(Error::ParseField("no equations found".into()));
    }

    // Register every state variable first so right-hand sides may refer to
    // variables defined on later lines.
    for (name, _) in &equations {
        if builder.has_param(name) {
            return Err(Error::ParseField(format!("{name:?} is both a parameter and a variable")));
        }
        builder.variable(name);
    }

    let mut outputs = Vec::with_capacity(equations.len());
    for (name, toks) in &equations {
        let mut p = ExprParser { toks, pos: 0, builder: &mut builder };
        let root = p.expr()?;
        if p.pos != toks.len() {
            return Err(Error::ParseField(format!(
                "trailing tokens after equation for {name:?}"
            )));
        }
        outputs.push(root);
    }
    Ok(builder.finish(outputs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::IVector;

    #[test]
    fn parses_simple_linear_field() {
        let f = parse_field("params: lam = 2\nx' = lam * x").unwrap();
        assert_eq!(f.dim(), 1);
        let v = f.eval(&IVector::from_points(&[3.0])).unwrap();
        assert!(v[0].contains(6.0) && v[0].diam() < 1e-14);
    }

    #[test]
    fn operator_precedence_and_unary_minus() {
        let f = parse_field("x' = -x^2 + 2*x - 1/2").unwrap();
        let v = f.eval(&IVector::from_points(&[3.0])).unwrap();
        assert!(v[0].contains(-9.0 + 6.0 - 0.5));
    }

    #[test]
    fn sqrt_and_negative_exponent() {
        let f = parse_field("x' = sqrt(x)^3 + x^-1").unwrap();
        let v = f.eval(&IVector::from_points(&[4.0])).unwrap();
        assert!(v[0].contains(8.25));
        assert!(v[0].diam() < 1e-13);
    }

    #[test]
    fn rejects_unknown_identifier() {
        assert!(parse_field("x' = y").is_err());
        assert!(parse_field("").is_err());
        assert!(parse_field("x' = 1 +").is_err());
    }

    #[test]
    fn forward_references_between_equations() {
        let f = parse_field("x' = v\nv' = -x").unwrap();
        assert_eq!(f.dim(), 2);
        let v = f.eval(&IVector::from_points(&[1.0, 0.0])).unwrap();
        assert_eq!(v[0].mid(), 0.0);
        assert_eq!(v[1].mid(), -1.0);
    }
}
