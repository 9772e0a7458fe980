//! Text forms shared by the CLI and reports.
//!
//! Scalars use integer-coefficient fraction syntax (`(x^2+1)/(5*x)`),
//! operators are expressions in the field variables and `T`
//! (`T^2 - (1/5)*T + x`), matrices are rows of scalars separated by `;` with
//! entries separated by `,`. Operator expressions are evaluated in the twisted
//! ring, so `T*x` means `x*T + 1`.

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalarfield::{FieldSpec, Scalar};
use crate::twisted::TwistedPoly;
use crate::Q;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Op(char),
}

fn lex(s: &str) -> Result<Vec<(usize, Tok)>> {
    let b: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let st = i;
            while i < b.len() && b[i].is_ascii_digit() {
                i += 1;
            }
            let txt: String = b[st..i].iter().collect();
            out.push((st, Tok::Num(txt.parse().unwrap())));
        } else if c.is_alphabetic() || c == '_' {
            let st = i;
            while i < b.len() && (b[i].is_alphanumeric() || b[i] == '_') {
                i += 1;
            }
            out.push((st, Tok::Ident(b[st..i].iter().collect())));
        } else if "+-*/^()".contains(c) {
            out.push((i, Tok::Op(c)));
            i += 1;
        } else {
            return Err(Error::Parse { pos: i, msg: format!("unexpected character '{c}'") });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    field: &'a FieldSpec,
    /// Derivation for `T`, or `None` when `T` is not allowed.
    deriv: Option<usize>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |t| t.0)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse { pos: self.here(), msg: msg.into() })
    }

    fn d(&self) -> usize {
        self.deriv.unwrap_or(0)
    }

    fn expr(&mut self) -> Result<TwistedPoly> {
        let mut acc = self.term()?;
        while let Some(Tok::Op(c @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = if c == '+' { acc.add(&rhs) } else { acc.sub(&rhs) };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<TwistedPoly> {
        let mut acc = self.unary()?;
        while let Some(Tok::Op(c @ ('*' | '/'))) = self.peek().cloned() {
            self.pos += 1;
            let at = self.here();
            let rhs = self.unary()?;
            if c == '*' {
                acc = acc.mul(&rhs);
            } else {
                let s = match rhs.degree() {
                    None => return Err(Error::Parse { pos: at, msg: "division by zero".into() }),
                    Some(0) => rhs.coeff(0),
                    Some(_) => return Err(Error::Parse { pos: at, msg: "cannot divide by an operator".into() }),
                };
                acc = acc.mul(&TwistedPoly::constant(s.inv(), self.d()));
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<TwistedPoly> {
        match self.peek() {
            Some(Tok::Op('-')) => {
                self.pos += 1;
                Ok(self.unary()?.neg())
            }
            Some(Tok::Op('+')) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn exponent(&mut self) -> Result<i64> {
        let mut neg = false;
        let paren = matches!(self.peek(), Some(Tok::Op('(')));
        if paren {
            self.pos += 1;
        }
        if let Some(Tok::Op('-')) = self.peek() {
            neg = true;
            self.pos += 1;
        }
        let n = match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                n.to_string().parse::<i64>().or_else(|_| self.err("exponent too large"))?
            }
            _ => return self.err("expected integer exponent"),
        };
        if paren {
            match self.peek() {
                Some(Tok::Op(')')) => self.pos += 1,
                _ => return self.err("expected ')'"),
            }
        }
        Ok(if neg { -n } else { n })
    }

    fn power(&mut self) -> Result<TwistedPoly> {
        let base = self.atom()?;
        if let Some(Tok::Op('^')) = self.peek() {
            self.pos += 1;
            let at = self.here();
            let e = self.exponent()?;
            if e.abs() > 10_000 {
                return Err(Error::Parse { pos: at, msg: "exponent too large".into() });
            }
            if e >= 0 {
                return Ok(base.pow(e as usize));
            }
            return match base.degree() {
                Some(0) => Ok(TwistedPoly::constant(base.coeff(0).pow(e as i32), self.d())),
                None => Err(Error::Parse { pos: at, msg: "negative power of zero".into() }),
                Some(_) => Err(Error::Parse { pos: at, msg: "negative power of an operator".into() }),
            };
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<TwistedPoly> {
        let d = self.d();
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(TwistedPoly::constant(Scalar::from_q(Q::from_integer(n)), d))
            }
            Some(Tok::Ident(name)) => {
                if name == "T" {
                    if self.deriv.is_none() {
                        return self.err("operator symbol T not allowed here");
                    }
                    self.pos += 1;
                    return Ok(TwistedPoly::t(d));
                }
                match self.field.vars.iter().position(|v| v == &name) {
                    Some(j) => {
                        self.pos += 1;
                        Ok(TwistedPoly::constant(Scalar::var(j), d))
                    }
                    None => self.err(format!("unknown symbol '{name}'")),
                }
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                match self.peek() {
                    Some(Tok::Op(')')) => {
                        self.pos += 1;
                        Ok(e)
                    }
                    _ => self.err("expected ')'"),
                }
            }
            Some(_) => self.err("unexpected token"),
            None => self.err("unexpected end of input"),
        }
    }
}

fn run_parser(field: &FieldSpec, text: &str, deriv: Option<usize>) -> Result<TwistedPoly> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, end: text.chars().count(), field, deriv };
    if p.toks.is_empty() {
        return p.err("empty expression");
    }
    let v = p.expr()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(v)
}

/// Parses a scalar in the field's variables.
pub fn parse_scalar(field: &FieldSpec, text: &str) -> Result<Scalar> {
    Ok(run_parser(field, text, None)?.coeff(0))
}

/// Parses an operator in `T` for derivation `deriv`.
pub fn parse_operator(field: &FieldSpec, text: &str, deriv: usize) -> Result<TwistedPoly> {
    field.check_deriv(deriv)?;
    run_parser(field, text, Some(deriv))
}

/// Splits on `sep` outside parentheses, returning pieces with their offsets.
fn split_top(text: &str, sep: char, base: usize) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in text.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            c if c == sep && depth == 0 => {
                out.push((base + start, &text[start..i]));
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    out.push((base + start, &text[start..]));
    out
}

/// Parses `"a,b;c,d"` into a matrix.
pub fn parse_matrix(field: &FieldSpec, text: &str) -> Result<Matrix> {
    let mut rows = Vec::new();
    for (roff, row) in split_top(text, ';', 0) {
        let mut entries = Vec::new();
        for (off, e) in split_top(row, ',', roff) {
            let x = parse_scalar(field, e).map_err(|err| match err {
                Error::Parse { pos, msg } => Error::Parse { pos: pos + off, msg },
                other => other,
            })?;
            entries.push(x);
        }
        rows.push(entries);
    }
    let m = Matrix::from_rows(rows).map_err(|_| Error::Parse { pos: 0, msg: "rows have different lengths".into() })?;
    if !m.is_square() {
        return Err(Error::Parse { pos: 0, msg: "matrix must be square".into() });
    }
    Ok(m)
}

/// Matrix text in the field's variable names.
pub fn fmt_matrix(field: &FieldSpec, m: &Matrix) -> String {
    (0..m.rows())
        .map(|i| m.row(i).iter().map(|x| field.fmt_scalar(x)).collect::<Vec<_>>().join(","))
        .collect::<Vec<_>>()
        .join(";")
}
