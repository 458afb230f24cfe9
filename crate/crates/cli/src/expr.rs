//! Literal grammar for vectors and weights:
//!
//! ```text
//! list    := expr (',' expr)*
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | '+' unary | primary
//! primary := number | 'i' | 'sqrt' '(' expr ')' | '(' expr ')'
//! ```
//!
//! Values are kept exactly as sums of monomials q·√r·iᵏ with rational q, r
//! and converted to floating point once, at the end.

use std::fmt;

use num_rational::Ratio;

type Q = Ratio<i128>;

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError(pub String);

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ParseError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Monomial {
    coef: Q,
    radicand: Q,
    /// Power of i, 0 or 1.
    imag: bool,
}

impl Monomial {
    fn rational(q: Q) -> Self {
        Self { coef: q, radicand: Q::from_integer(1), imag: false }
    }

    fn mul(self, o: Self) -> Result<Self, ParseError> {
        let coef = checked_mul(self.coef, o.coef)?;
        let radicand = checked_mul(self.radicand, o.radicand)?;
        let both = self.imag && o.imag;
        Ok(Self { coef: if both { -coef } else { coef }, radicand, imag: self.imag ^ o.imag })
    }

    fn recip(self) -> Result<Self, ParseError> {
        if *self.coef.numer() == 0 || *self.radicand.numer() == 0 {
            return err("division by zero");
        }
        // 1/(q√r i) = (1/q)(1/√r)(−i)
        let coef = self.coef.recip();
        Ok(Self { coef: if self.imag { -coef } else { coef }, radicand: self.radicand.recip(), imag: self.imag })
    }

    fn value(&self) -> (f64, f64) {
        let q = *self.coef.numer() as f64 / *self.coef.denom() as f64;
        let v = if self.radicand == Q::from_integer(1) {
            q
        } else {
            q * (*self.radicand.numer() as f64 / *self.radicand.denom() as f64).sqrt()
        };
        if self.imag {
            (0.0, v)
        } else {
            (v, 0.0)
        }
    }
}

fn checked_mul(a: Q, b: Q) -> Result<Q, ParseError> {
    let n = a.numer().checked_mul(*b.numer());
    let d = a.denom().checked_mul(*b.denom());
    match (n, d) {
        (Some(n), Some(d)) => Ok(Q::new(n, d)),
        _ => err("rational overflow"),
    }
}

/// Exact value: a sum of monomials.
#[derive(Debug, Clone, PartialEq)]
struct Value(Vec<Monomial>);

impl Value {
    fn mul(&self, o: &Value) -> Result<Value, ParseError> {
        let mut out = Vec::new();
        for a in &self.0 {
            for b in &o.0 {
                out.push(a.mul(*b)?);
            }
        }
        Ok(Value(out))
    }

    fn neg(mut self) -> Value {
        for m in &mut self.0 {
            m.coef = -m.coef;
        }
        self
    }

    fn single(&self) -> Option<Monomial> {
        let nonzero: Vec<&Monomial> = self.0.iter().filter(|m| *m.coef.numer() != 0).collect();
        match nonzero.len() {
            0 => Some(Monomial::rational(Q::from_integer(0))),
            1 => Some(*nonzero[0]),
            _ => None,
        }
    }

    fn complex(&self) -> (f64, f64) {
        self.0.iter().map(Monomial::value).fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1))
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
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

    fn expr(&mut self) -> Result<Value, ParseError> {
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                acc.0.extend(self.term()?.0);
            } else if self.eat(b'-') {
                acc.0.extend(self.term()?.neg().0);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Value, ParseError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat(b'*') {
                acc = acc.mul(&self.unary()?)?;
            } else if self.eat(b'/') {
                let d = self.unary()?;
                let m = d.single().ok_or_else(|| ParseError("division by a sum is not supported".into()))?;
                acc = acc.mul(&Value(vec![m.recip()?]))?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Value, ParseError> {
        if self.eat(b'-') {
            return Ok(self.unary()?.neg());
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Value, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let v = self.expr()?;
                if !self.eat(b')') {
                    return err(format!("expected ')' at offset {}", self.pos));
                }
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                let word = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or_default();
                match word {
                    "i" => Ok(Value(vec![Monomial { coef: Q::from_integer(1), radicand: Q::from_integer(1), imag: true }])),
                    "sqrt" => {
                        if !self.eat(b'(') {
                            return err("expected '(' after sqrt");
                        }
                        let inner = self.expr()?;
                        if !self.eat(b')') {
                            return err("expected ')' to close sqrt");
                        }
                        let m = inner.single().ok_or_else(|| ParseError("sqrt of a sum is not supported".into()))?;
                        if m.imag || m.radicand != Q::from_integer(1) || m.coef < Q::from_integer(0) {
                            return err("sqrt takes a non-negative rational");
                        }
                        Ok(Value(vec![Monomial { coef: Q::from_integer(1), radicand: m.coef, imag: false }]))
                    }
                    other => err(format!("unknown identifier '{other}'")),
                }
            }
            Some(c) => err(format!("unexpected '{}' at offset {}", c as char, self.pos)),
            None => err("unexpected end of input"),
        }
    }

    /// Decimal literal with optional exponent, read as an exact rational.
    fn number(&mut self) -> Result<Value, ParseError> {
        let start = self.pos;
        let mut digits = String::new();
        let mut frac_len: i32 = 0;
        let mut seen_dot = false;
        while let Some(&c) = self.src.get(self.pos) {
            if c.is_ascii_digit() {
                digits.push(c as char);
                if seen_dot {
                    frac_len += 1;
                }
            } else if c == b'.' && !seen_dot {
                seen_dot = true;
            } else {
                break;
            }
            self.pos += 1;
        }
        if digits.is_empty() {
            return err(format!("malformed number at offset {start}"));
        }
        let mut exp: i32 = 0;
        if matches!(self.src.get(self.pos), Some(b'e') | Some(b'E')) {
            self.pos += 1;
            let s = self.pos;
            if matches!(self.src.get(self.pos), Some(b'+') | Some(b'-')) {
                self.pos += 1;
            }
            while self.src.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
                self.pos += 1;
            }
            exp = std::str::from_utf8(&self.src[s..self.pos])
                .ok()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| ParseError(format!("malformed exponent at offset {s}")))?;
        }
        let mantissa: i128 = digits.parse().map_err(|_| ParseError("number too large".into()))?;
        let shift = exp - frac_len;
        let pow = |k: i32| 10i128.checked_pow(k as u32).ok_or_else(|| ParseError("exponent too large".into()));
        let q = if shift >= 0 {
            Q::from_integer(mantissa.checked_mul(pow(shift)?).ok_or_else(|| ParseError("number too large".into()))?)
        } else {
            Q::new(mantissa, pow(-shift)?)
        };
        Ok(Value(vec![Monomial::rational(q)]))
    }
}

/// Parses one scalar expression to (re, im).
pub fn parse_scalar(s: &str) -> Result<(f64, f64), ParseError> {
    let mut p = Parser { src: s.as_bytes(), pos: 0 };
    let v = p.expr()?;
    if p.peek().is_some() {
        return err(format!("trailing input at offset {} in '{s}'", p.pos));
    }
    Ok(v.complex())
}

/// Splits on top-level commas and parses each entry.
pub fn parse_list(s: &str) -> Result<Vec<(f64, f64)>, ParseError> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (k, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(&s[start..k]);
                start = k + 1;
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    if parts.iter().all(|p| p.trim().is_empty()) {
        return err("empty list");
    }
    parts.into_iter().map(parse_scalar).collect()
}

/// Parses a list of real numbers; imaginary parts must vanish.
pub fn parse_real_list(s: &str) -> Result<Vec<f64>, ParseError> {
    parse_list(s)?
        .into_iter()
        .map(|(re, im)| if im == 0.0 { Ok(re) } else { err(format!("expected a real number, got {re}+{im}i")) })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalars() {
        assert_eq!(parse_scalar("1/2").unwrap(), (0.5, 0.0));
        assert_eq!(parse_scalar("0.25").unwrap(), (0.25, 0.0));
        assert_eq!(parse_scalar("-3e-2").unwrap(), (-0.03, 0.0));
        assert_eq!(parse_scalar("i").unwrap(), (0.0, 1.0));
        assert_eq!(parse_scalar("i*i").unwrap(), (-1.0, 0.0));
        assert_eq!(parse_scalar("1/i").unwrap(), (0.0, -1.0));
        assert_eq!(parse_scalar("sqrt(2)*sqrt(2)").unwrap(), (2.0, 0.0));
        assert_eq!(parse_scalar("sqrt(1/4)").unwrap(), (0.5, 0.0));
        assert_eq!(parse_scalar(" 2 + 3*i ").unwrap(), (2.0, 3.0));
    }

    #[test]
    fn irrational_literals_round_once() {
        let (re, im) = parse_scalar("i/sqrt(10)").unwrap();
        assert_eq!(re, 0.0);
        assert_eq!(im, (0.1f64).sqrt());
        let (re, _) = parse_scalar("3/sqrt(10)").unwrap();
        assert_eq!(re, 3.0 * (0.1f64).sqrt());
    }

    #[test]
    fn lists() {
        let v = parse_list("i/sqrt(10),3/sqrt(10)").unwrap();
        assert_eq!(v.len(), 2);
        let norm: f64 = v.iter().map(|(a, b)| a * a + b * b).sum();
        assert!((norm - 1.0).abs() < 1e-15);
        assert_eq!(parse_real_list("1,0").unwrap(), vec![1.0, 0.0]);
        assert_eq!(parse_list("sqrt(1/2), (1+i)/2").unwrap()[1], (0.5, 0.5));
    }

    #[test]
    fn errors() {
        assert!(parse_scalar("").is_err());
        assert!(parse_scalar("1/0").is_err());
        assert!(parse_scalar("sqrt(-1)").is_err());
        assert!(parse_scalar("sqrt(1+i)").is_err());
        assert!(parse_scalar("1/(1+i)").is_err());
        assert!(parse_scalar("foo").is_err());
        assert!(parse_scalar("1 2").is_err());
        assert!(parse_real_list("1,i").is_err());
        assert!(parse_list(",").is_err());
    }
}
