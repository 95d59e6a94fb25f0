//! Closed-form parameter sequences `n -> x_n` used by the solvers.
//!
//! Grammar (whitespace is ignored):
//!
//! ```text
//! pow(a, b, c)              c (a + n)^b
//! affine_pow(c0, c1, a, b)  c0 + c1 (a + n)^b
//! rational(a, b, c)         a / (b n + c)
//! <number>                  constant
//! ```

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Schedule {
    Const(f64),
    Pow { a: f64, b: f64, c: f64 },
    AffinePow { c0: f64, c1: f64, a: f64, b: f64 },
    Rational { a: f64, b: f64, c: f64 },
}

/// Large-`n` behaviour `x_n ~ limit + coef n^exponent` with `exponent < 0`,
/// or `coef = 0` when the sequence is eventually constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Asymptotics {
    pub limit: f64,
    pub coef: f64,
    pub exponent: f64,
}

impl Asymptotics {
    fn constant(limit: f64) -> Self {
        Asymptotics { limit, coef: 0.0, exponent: 0.0 }
    }

    pub fn vanishes(&self) -> bool {
        self.limit == 0.0
    }

    /// `sum_n x_n = inf` (for non-negative sequences).
    pub fn sum_diverges(&self) -> bool {
        self.limit != 0.0 || (self.coef != 0.0 && self.exponent >= -1.0)
    }

    /// `x_n / y_n -> 0` where `self` describes `x` and `other` describes `y`.
    pub fn negligible_against(&self, other: &Asymptotics) -> bool {
        if !self.vanishes() {
            return false;
        }
        if !other.vanishes() {
            return true;
        }
        self.coef == 0.0 || (other.coef != 0.0 && self.exponent < other.exponent)
    }
}

impl Schedule {
    pub fn parse(spec: &str) -> Result<Self> {
        Parser { spec, pos: 0 }.schedule()
    }

    pub fn eval_f64(&self, n: usize) -> f64 {
        let n = n as f64;
        match *self {
            Schedule::Const(c) => c,
            Schedule::Pow { a, b, c } => c * (a + n).powf(b),
            Schedule::AffinePow { c0, c1, a, b } => c0 + c1 * (a + n).powf(b),
            Schedule::Rational { a, b, c } => a / (b * n + c),
        }
    }

    pub fn eval<T: Scalar>(&self, n: usize) -> T {
        T::lit(self.eval_f64(n))
    }

    pub fn asymptotics(&self) -> Asymptotics {
        match *self {
            Schedule::Const(c) => Asymptotics::constant(c),
            Schedule::Pow { b, c, .. } => power_law(0.0, c, b),
            Schedule::AffinePow { c0, c1, b, .. } => power_law(c0, c1, b),
            Schedule::Rational { a, b, c } => {
                if b == 0.0 {
                    Asymptotics::constant(a / c)
                } else if a == 0.0 {
                    Asymptotics::constant(0.0)
                } else {
                    Asymptotics { limit: 0.0, coef: a / b, exponent: -1.0 }
                }
            }
        }
    }

    fn check_domain(self, spec: &str) -> Result<Self> {
        let bad = |msg: &str| Err(Error::Schedule { spec: spec.to_string(), column: 1, msg: msg.to_string() });
        match self {
            Schedule::Pow { a, b, .. } | Schedule::AffinePow { a, b, .. } => {
                if a <= 0.0 && b != b.trunc() {
                    return bad("base a + n must be positive for a non-integer exponent");
                }
                if a <= 0.0 && b < 0.0 && a == a.trunc() {
                    return bad("base a + n vanishes for some n with a negative exponent");
                }
            }
            Schedule::Rational { b, c, .. } => {
                if c == 0.0 || (b * c < 0.0 && (-c / b) == (-c / b).trunc()) {
                    return bad("denominator b n + c vanishes for some n");
                }
            }
            Schedule::Const(_) => {}
        }
        Ok(self)
    }
}

fn power_law(offset: f64, coef: f64, exponent: f64) -> Asymptotics {
    if coef == 0.0 {
        Asymptotics::constant(offset)
    } else if exponent == 0.0 {
        Asymptotics::constant(offset + coef)
    } else if exponent > 0.0 {
        Asymptotics::constant(coef.signum() * f64::INFINITY)
    } else if offset != 0.0 {
        Asymptotics { limit: offset, coef, exponent }
    } else {
        Asymptotics { limit: 0.0, coef, exponent }
    }
}

impl FromStr for Schedule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Schedule::parse(s)
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Schedule::Const(c) => write!(f, "{c}"),
            Schedule::Pow { a, b, c } => write!(f, "pow({a}, {b}, {c})"),
            Schedule::AffinePow { c0, c1, a, b } => write!(f, "affine_pow({c0}, {c1}, {a}, {b})"),
            Schedule::Rational { a, b, c } => write!(f, "rational({a}, {b}, {c})"),
        }
    }
}

struct Parser<'a> {
    spec: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Schedule { spec: self.spec.to_string(), column: self.pos + 1, msg: msg.into() })
    }

    fn skip_ws(&mut self) {
        while self.rest().starts_with(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn rest(&self) -> &str {
        &self.spec[self.pos..]
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> &str {
        let start = self.pos;
        let len = self.rest().find(|c: char| !f(c)).unwrap_or(self.rest().len());
        self.pos += len;
        &self.spec[start..start + len]
    }

    fn expect(&mut self, c: char) -> Result<()> {
        self.skip_ws();
        if self.rest().starts_with(c) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected `{c}`"))
        }
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        let text = self.take_while(|c| c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E'));
        match text.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(x),
            _ => {
                self.pos = start;
                self.err("expected a number")
            }
        }
    }

    fn schedule(mut self) -> Result<Schedule> {
        self.skip_ws();
        let s = if self.rest().starts_with(|c: char| c.is_ascii_alphabetic()) {
            let name_at = self.pos;
            let name = self.take_while(|c| c.is_ascii_alphanumeric() || c == '_').to_string();
            let arity = match name.as_str() {
                "pow" | "rational" => 3,
                "affine_pow" => 4,
                _ => {
                    self.pos = name_at;
                    return self.err(format!("unknown schedule family `{name}`"));
                }
            };
            self.expect('(')?;
            let mut args = Vec::with_capacity(arity);
            for i in 0..arity {
                if i > 0 {
                    self.expect(',')?;
                }
                args.push(self.number()?);
            }
            self.expect(')')?;
            match name.as_str() {
                "pow" => Schedule::Pow { a: args[0], b: args[1], c: args[2] },
                "rational" => Schedule::Rational { a: args[0], b: args[1], c: args[2] },
                _ => Schedule::AffinePow { c0: args[0], c1: args[1], a: args[2], b: args[3] },
            }
        } else {
            Schedule::Const(self.number()?)
        };
        self.skip_ws();
        if !self.rest().is_empty() {
            return self.err("unexpected trailing input");
        }
        s.check_domain(self.spec)
    }
}
