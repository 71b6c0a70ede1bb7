//! Minimal arithmetic expression grammar for numeric model fields:
//! literals, parameter identifiers, `+ - * /`, `sqrt(...)`, unary minus, and
//! parentheses. Expressions carry no whitespace; fields are split on
//! whitespace before they reach this parser.

use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq)]
pub struct ExprError {
    /// Byte offset into the expression string.
    pub offset: usize,
    pub message: String,
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    params: &'a BTreeMap<String, f64>,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError {
            offset: self.pos,
            message: message.into(),
        })
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<f64, ExprError> {
        let mut value = self.term()?;
        while let Some(op) = self.peek() {
            match op {
                b'+' => {
                    self.pos += 1;
                    value += self.term()?;
                }
                b'-' => {
                    self.pos += 1;
                    value -= self.term()?;
                }
                _ => break,
            }
        }
        Ok(value)
    }

    fn term(&mut self) -> Result<f64, ExprError> {
        let mut value = self.factor()?;
        while let Some(op) = self.peek() {
            match op {
                b'*' => {
                    self.pos += 1;
                    value *= self.factor()?;
                }
                b'/' => {
                    self.pos += 1;
                    value /= self.factor()?;
                }
                _ => break,
            }
        }
        Ok(value)
    }

    fn factor(&mut self) -> Result<f64, ExprError> {
        match self.peek() {
            None => self.err("unexpected end of expression"),
            Some(b'-') => {
                self.pos += 1;
                Ok(-self.factor()?)
            }
            Some(b'(') => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek() != Some(b')') {
                    return self.err("expected ')'");
                }
                self.pos += 1;
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.ident(),
            Some(c) => self.err(format!("unexpected character '{}'", c as char)),
        }
    }

    fn number(&mut self) -> Result<f64, ExprError> {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() || c == b'.' {
                self.pos += 1;
            } else if (c == b'e' || c == b'E') && self.pos > start {
                // Exponent, optionally signed.
                self.pos += 1;
                if matches!(self.peek(), Some(b'+') | Some(b'-')) {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        match text.parse::<f64>() {
            Ok(v) => Ok(v),
            Err(_) => Err(ExprError {
                offset: start,
                message: format!("bad number '{text}'"),
            }),
        }
    }

    fn ident(&mut self) -> Result<f64, ExprError> {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == b'_' {
                self.pos += 1;
            } else {
                break;
            }
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        if name == "sqrt" {
            if self.peek() != Some(b'(') {
                return self.err("sqrt needs '('");
            }
            self.pos += 1;
            let v = self.expr()?;
            if self.peek() != Some(b')') {
                return self.err("expected ')'");
            }
            self.pos += 1;
            return Ok(v.sqrt());
        }
        match self.params.get(name) {
            Some(v) => Ok(*v),
            None => Err(ExprError {
                offset: start,
                message: format!("unknown parameter '{name}'"),
            }),
        }
    }
}

/// Evaluates one expression over the given parameter values.
pub fn eval_expr(src: &str, params: &BTreeMap<String, f64>) -> Result<f64, ExprError> {
    let mut p = Parser {
        src: src.as_bytes(),
        pos: 0,
        params,
    };
    let v = p.expr()?;
    if p.pos != p.src.len() {
        return p.err("trailing characters");
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn literals_and_arithmetic() {
        let p = params(&[]);
        assert_eq!(eval_expr("0.4", &p).unwrap(), 0.4);
        assert_eq!(eval_expr("1+2*3", &p).unwrap(), 7.0);
        assert_eq!(eval_expr("(1+2)*3", &p).unwrap(), 9.0);
        assert_eq!(eval_expr("-2", &p).unwrap(), -2.0);
        assert_eq!(eval_expr("--2", &p).unwrap(), 2.0);
        assert_eq!(eval_expr("1e-3", &p).unwrap(), 1e-3);
        assert_eq!(eval_expr("2.5E2", &p).unwrap(), 250.0);
    }

    #[test]
    fn sqrt_and_parameters() {
        let p = params(&[("d2", 0.4), ("x_1", 0.12)]);
        assert!(
            (eval_expr("1/sqrt(2)", &p).unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15
        );
        assert_eq!(eval_expr("-d2", &p).unwrap(), -0.4);
        assert_eq!(eval_expr("x_1*2", &p).unwrap(), 0.24);
        assert!((eval_expr("sqrt(d2*d2)", &p).unwrap() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn errors_carry_offsets() {
        let p = params(&[]);
        let e = eval_expr("1+zz", &p).unwrap_err();
        assert_eq!(e.offset, 2);
        assert!(e.message.contains("unknown parameter"));

        let e = eval_expr("sqrt 2", &p).unwrap_err();
        assert!(e.message.contains("sqrt"));

        let e = eval_expr("1+", &p).unwrap_err();
        assert!(e.message.contains("unexpected end"));

        let e = eval_expr("(1+2", &p).unwrap_err();
        assert!(e.message.contains("')'"));

        let e = eval_expr("1 2", &p).unwrap_err();
        assert!(e.message.contains("trailing characters"));
    }
}
