//! Complex scalars with an exact (Gaussian rational) and a floating backend.
//!
//! Every zero test in the crate goes through [`Scalar::is_negligible`], so the
//! exact backend is threshold-free and the floating backend is governed by a
//! single [`Tolerance`].

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Exact,
    Float,
}

impl Backend {
    pub fn as_str(self) -> &'static str {
        match self {
            Backend::Exact => "exact",
            Backend::Float => "float",
        }
    }
}

/// Zero and comparison thresholds for the floating backend.
///
/// The exact backend ignores both fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub zero: f64,
    pub relative: f64,
}

impl Tolerance {
    pub const DEFAULT_ZERO: f64 = 1e-10;
    pub const DEFAULT_RELATIVE: f64 = 1e-8;

    pub fn new(zero: f64, relative: f64) -> Result<Self> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if !ok(zero) || !ok(relative) {
            return Err(Error::InvalidArgument(format!(
                "tolerance thresholds must be finite and strictly positive (zero={zero}, relative={relative})"
            )));
        }
        Ok(Self { zero, relative })
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            zero: Self::DEFAULT_ZERO,
            relative: Self::DEFAULT_RELATIVE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// A complex field element.
pub trait Scalar: Clone + fmt::Debug + fmt::Display + PartialEq + Send + Sync + 'static {
    const BACKEND: Backend;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn from_exact(x: &ExactComplex) -> Self;

    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;

    /// Division; refuses a divisor that the tolerance policy treats as zero.
    fn checked_div(&self, rhs: &Self, tol: &Tolerance) -> Result<Self>;

    /// Structural zero (exact) or literal `0.0 + 0.0i` (floating).
    fn is_zero(&self) -> bool;

    /// Zero test under the policy. `scale` is the magnitude the value is
    /// compared against; the exact backend ignores it.
    fn is_negligible(&self, scale: f64, tol: &Tolerance) -> bool;

    /// Modulus as a double, used for residuals and pivot selection.
    fn modulus(&self) -> f64;

    fn is_finite(&self) -> bool;

    /// Real and imaginary parts as doubles.
    fn to_f64_pair(&self) -> (f64, f64);
}

/// Applies one field operation, surfacing division by zero and floating
/// overflow as errors.
pub fn scalar_arith<S: Scalar>(x: &S, y: &S, op: ArithOp, tol: &Tolerance) -> Result<S> {
    let out = match op {
        ArithOp::Add => x.add(y),
        ArithOp::Sub => x.sub(y),
        ArithOp::Mul => x.mul(y),
        ArithOp::Div => x.checked_div(y, tol)?,
    };
    if !out.is_finite() {
        return Err(Error::NonFinite("scalar arithmetic"));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Exact backend

/// Gaussian rational `re + im·i` with arbitrary-precision parts.
///
/// `BigRational` keeps every value gcd-reduced with a positive denominator, so
/// derived equality is structural.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ExactComplex {
    pub re: BigRational,
    pub im: BigRational,
}

impl ExactComplex {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Self { re, im }
    }

    pub fn real(re: BigRational) -> Self {
        Self {
            re,
            im: BigRational::zero(),
        }
    }

    pub fn ratio(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::real(BigRational::new(num.into(), den.into())))
    }

    pub fn gaussian(re: i64, im: i64) -> Self {
        Self {
            re: BigRational::from_integer(re.into()),
            im: BigRational::from_integer(im.into()),
        }
    }

    fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }
}

impl fmt::Debug for ExactComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn fmt_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Canonical text: `"p/q"`, `"r/si"`, `"p/q+r/si"`, `"p/q-r/si"`, or `"0"`.
impl fmt::Display for ExactComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", fmt_rational(&self.re)),
            (true, false) => write!(f, "{}i", fmt_rational(&self.im)),
            (false, false) => {
                let sign = if self.im.is_negative() { "" } else { "+" };
                write!(
                    f,
                    "{}{}{}i",
                    fmt_rational(&self.re),
                    sign,
                    fmt_rational(&self.im)
                )
            }
        }
    }
}

fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::Parse(format!("invalid rational '{s}'"));
    let s = s.trim();
    let s = s.strip_prefix('+').unwrap_or(s);
    if s.is_empty() {
        return Err(bad());
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let num: BigInt = num.trim().parse().map_err(|_| bad())?;
    let den: BigInt = den.trim().parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(Error::Parse(format!("zero denominator in '{s}'")));
    }
    Ok(BigRational::new(num, den))
}

impl FromStr for ExactComplex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if t.is_empty() {
            return Err(Error::Parse("empty scalar".into()));
        }
        let Some(body) = t.strip_suffix('i') else {
            return Ok(Self::real(parse_rational(&t)?));
        };
        // Split at the last sign that is not leading.
        let split = body
            .char_indices()
            .rev()
            .find(|&(k, c)| k > 0 && (c == '+' || c == '-'))
            .map(|(k, _)| k);
        let (re_str, im_str) = match split {
            Some(k) => (&body[..k], &body[k..]),
            None => ("", body),
        };
        let im = match im_str {
            "" | "+" => BigRational::one(),
            "-" => -BigRational::one(),
            other => parse_rational(other)?,
        };
        let re = if re_str.is_empty() {
            BigRational::zero()
        } else {
            parse_rational(re_str)?
        };
        Ok(Self { re, im })
    }
}

fn rational_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

impl Scalar for ExactComplex {
    const BACKEND: Backend = Backend::Exact;

    fn zero() -> Self {
        Self {
            re: BigRational::zero(),
            im: BigRational::zero(),
        }
    }

    fn one() -> Self {
        Self::real(BigRational::one())
    }

    fn from_i64(v: i64) -> Self {
        Self::real(BigRational::from_integer(v.into()))
    }

    fn from_exact(x: &ExactComplex) -> Self {
        x.clone()
    }

    fn add(&self, rhs: &Self) -> Self {
        Self {
            re: &self.re + &rhs.re,
            im: if self.im.is_zero() && rhs.im.is_zero() {
                BigRational::zero()
            } else {
                &self.im + &rhs.im
            },
        }
    }

    fn sub(&self, rhs: &Self) -> Self {
        Self {
            re: &self.re - &rhs.re,
            im: if self.im.is_zero() && rhs.im.is_zero() {
                BigRational::zero()
            } else {
                &self.im - &rhs.im
            },
        }
    }

    fn mul(&self, rhs: &Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Self::zero();
        }
        match (self.im.is_zero(), rhs.im.is_zero()) {
            (true, true) => Self::real(&self.re * &rhs.re),
            (true, false) => Self {
                re: &self.re * &rhs.re,
                im: &self.re * &rhs.im,
            },
            (false, true) => Self {
                re: &self.re * &rhs.re,
                im: &self.im * &rhs.re,
            },
            (false, false) => Self {
                re: &self.re * &rhs.re - &self.im * &rhs.im,
                im: &self.re * &rhs.im + &self.im * &rhs.re,
            },
        }
    }

    fn neg(&self) -> Self {
        Self {
            re: -&self.re,
            im: -&self.im,
        }
    }

    fn checked_div(&self, rhs: &Self, _tol: &Tolerance) -> Result<Self> {
        if rhs.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if rhs.im.is_zero() {
            return Ok(Self {
                re: &self.re / &rhs.re,
                im: &self.im / &rhs.re,
            });
        }
        let d = rhs.norm_sqr();
        let conj = Self {
            re: rhs.re.clone(),
            im: -&rhs.im,
        };
        let num = self.mul(&conj);
        Ok(Self {
            re: num.re / &d,
            im: num.im / &d,
        })
    }

    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    fn is_negligible(&self, _scale: f64, _tol: &Tolerance) -> bool {
        self.is_zero()
    }

    fn modulus(&self) -> f64 {
        if self.im.is_zero() {
            return rational_to_f64(&self.re.abs());
        }
        let (re, im) = self.to_f64_pair();
        re.hypot(im)
    }

    fn is_finite(&self) -> bool {
        true
    }

    fn to_f64_pair(&self) -> (f64, f64) {
        (rational_to_f64(&self.re), rational_to_f64(&self.im))
    }
}

// ---------------------------------------------------------------------------
// Floating backend

/// Double-precision complex scalar.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FloatComplex(pub Complex64);

impl FloatComplex {
    pub fn new(re: f64, im: f64) -> Self {
        Self(Complex64::new(re, im))
    }

    pub fn re(&self) -> f64 {
        self.0.re
    }

    pub fn im(&self) -> f64 {
        self.0.im
    }
}

impl fmt::Display for FloatComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.0.re, self.0.im)
    }
}

impl Scalar for FloatComplex {
    const BACKEND: Backend = Backend::Float;

    fn zero() -> Self {
        Self::new(0.0, 0.0)
    }

    fn one() -> Self {
        Self::new(1.0, 0.0)
    }

    fn from_i64(v: i64) -> Self {
        Self::new(v as f64, 0.0)
    }

    fn from_exact(x: &ExactComplex) -> Self {
        let (re, im) = x.to_f64_pair();
        Self::new(re, im)
    }

    fn add(&self, rhs: &Self) -> Self {
        Self(self.0 + rhs.0)
    }

    fn sub(&self, rhs: &Self) -> Self {
        Self(self.0 - rhs.0)
    }

    fn mul(&self, rhs: &Self) -> Self {
        Self(self.0 * rhs.0)
    }

    fn neg(&self) -> Self {
        Self(-self.0)
    }

    fn checked_div(&self, rhs: &Self, tol: &Tolerance) -> Result<Self> {
        if rhs.0.norm() <= tol.zero {
            return Err(Error::DivisionByZero);
        }
        let out = Self(self.0 / rhs.0);
        if !out.is_finite() {
            return Err(Error::NonFinite("division"));
        }
        Ok(out)
    }

    fn is_zero(&self) -> bool {
        self.0.re == 0.0 && self.0.im == 0.0
    }

    fn is_negligible(&self, scale: f64, tol: &Tolerance) -> bool {
        self.0.norm() <= tol.zero * scale.max(1.0)
    }

    fn modulus(&self) -> f64 {
        self.0.norm()
    }

    fn is_finite(&self) -> bool {
        self.0.re.is_finite() && self.0.im.is_finite()
    }

    fn to_f64_pair(&self) -> (f64, f64) {
        (self.0.re, self.0.im)
    }
}

/// Relative comparison used for backend-parity checks.
pub fn approx_eq(x: (f64, f64), y: (f64, f64), tol: &Tolerance) -> bool {
    let d = (x.0 - y.0).hypot(x.1 - y.1);
    let scale = x.0.hypot(x.1).max(y.0.hypot(y.1)).max(1.0);
    d <= tol.relative * scale
}
