//! Exact arithmetic in the cyclotomic fields `Q(zeta_m)` for `m = 1, 2, 3`.
//!
//! A [`Scalar`] is `re + im * z` where `z` is a fixed primitive m-th root of
//! unity and `re`, `im` are arbitrary-precision rationals. For `m <= 2` the
//! field is `Q` itself (`z = 1` or `z = -1`) and `im` is forced to zero, so
//! values have a unique canonical form. For `m = 3` reduction uses the minimal
//! polynomial `z^2 = -1 - z`.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

/// Arbitrary-precision rational number, always in lowest terms with a
/// positive denominator.
pub type Rational = num_rational::BigRational;

/// Rational from an integer.
pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Rational `n / d`. Panics if `d == 0`.
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScalarError {
    DivisionByZero,
    /// The two operands live in different cyclotomic fields.
    OrderMismatch { lhs: u8, rhs: u8 },
    InvalidOrder(u8),
    Parse(String),
}

impl fmt::Display for ScalarError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarError::DivisionByZero => write!(f, "division by zero"),
            ScalarError::OrderMismatch { lhs, rhs } => {
                write!(f, "mismatched root-of-unity orders {lhs} and {rhs}")
            }
            ScalarError::InvalidOrder(m) => write!(f, "invalid order {m}, expected 1, 2 or 3"),
            ScalarError::Parse(s) => write!(f, "parse error: {s}"),
        }
    }
}

/// Binary operation selector for [`Scalar::arith`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// An element `re + im * zeta_m` of `Q(zeta_m)` in canonical form.
///
/// Invariants: `m` is 1, 2 or 3; `im == 0` whenever `m <= 2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scalar {
    m: u8,
    re: Rational,
    im: Rational,
}

impl Scalar {
    pub fn new(m: u8, re: Rational, im: Rational) -> Result<Self, ScalarError> {
        if !(1..=3).contains(&m) {
            return Err(ScalarError::InvalidOrder(m));
        }
        Ok(match m {
            1 => Scalar { m, re, im: Rational::zero() },
            2 => Scalar { m, re: re - &im, im: Rational::zero() },
            _ => Scalar { m, re, im },
        })
    }

    pub fn zero(m: u8) -> Self {
        Scalar { m, re: Rational::zero(), im: Rational::zero() }
    }

    pub fn one(m: u8) -> Self {
        Scalar { m, re: Rational::one(), im: Rational::zero() }
    }

    pub fn from_rational(m: u8, r: Rational) -> Self {
        Scalar { m, re: r, im: Rational::zero() }
    }

    pub fn from_int(m: u8, n: i64) -> Self {
        Self::from_rational(m, rat(n))
    }

    /// The primitive root `zeta_m` itself: 1, -1, or the generator of `Q(zeta_3)`.
    pub fn zeta(m: u8) -> Self {
        match m {
            1 => Scalar::one(1),
            2 => Scalar { m: 2, re: -Rational::one(), im: Rational::zero() },
            _ => Scalar { m: 3, re: Rational::zero(), im: Rational::one() },
        }
    }

    /// `zeta_m^e`, canonical, with period `m` in `e`.
    pub fn zeta_power(m: u8, e: i64) -> Self {
        let r = e.rem_euclid(m as i64);
        match (m, r) {
            (_, 0) => Scalar::one(m),
            (2, 1) => Scalar::zeta(2),
            (3, 1) => Scalar::zeta(3),
            // zeta_3^2 = -1 - zeta_3
            (3, 2) => Scalar { m: 3, re: -Rational::one(), im: -Rational::one() },
            _ => unreachable!("order checked at construction"),
        }
    }

    pub fn order(&self) -> u8 {
        self.m
    }

    pub fn re(&self) -> &Rational {
        &self.re
    }

    pub fn im(&self) -> &Rational {
        &self.im
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    /// True when the value lies in `Q`, i.e. has no `zeta_3` component.
    pub fn is_rational(&self) -> bool {
        self.im.is_zero()
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        if self.im.is_zero() {
            Some(&self.re)
        } else {
            None
        }
    }

    fn check_order(&self, rhs: &Scalar) -> Result<(), ScalarError> {
        if self.m != rhs.m {
            Err(ScalarError::OrderMismatch { lhs: self.m, rhs: rhs.m })
        } else {
            Ok(())
        }
    }

    /// Spec-level arithmetic entry point with explicit error reporting.
    pub fn arith(&self, rhs: &Scalar, op: ArithOp) -> Result<Scalar, ScalarError> {
        self.check_order(rhs)?;
        match op {
            ArithOp::Add => Ok(self.clone() + rhs.clone()),
            ArithOp::Sub => Ok(self.clone() - rhs.clone()),
            ArithOp::Mul => Ok(self.clone() * rhs.clone()),
            ArithOp::Div => self.checked_div(rhs),
        }
    }

    /// Multiplicative inverse.
    pub fn inv(&self) -> Result<Scalar, ScalarError> {
        if self.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        if self.im.is_zero() {
            return Ok(Scalar { m: self.m, re: self.re.recip(), im: Rational::zero() });
        }
        // (a + b z)^-1 = (a - b - b z) / (a^2 - a b + b^2) using z zbar = 1,
        // zbar = z^2 = -1 - z.
        let a = &self.re;
        let b = &self.im;
        let norm = a * a - a * b + b * b;
        debug_assert!(!norm.is_zero());
        Ok(Scalar {
            m: self.m,
            re: (a - b) / &norm,
            im: -b / &norm,
        })
    }

    pub fn checked_div(&self, rhs: &Scalar) -> Result<Scalar, ScalarError> {
        self.check_order(rhs)?;
        Ok(self.clone() * rhs.inv()?)
    }

    /// Integer power. Negative exponents require the value to be nonzero.
    pub fn pow(&self, e: i64) -> Result<Scalar, ScalarError> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut acc = Scalar::one(self.m);
        let mut n = e.unsigned_abs();
        let mut sq = base;
        while n > 0 {
            if n & 1 == 1 {
                acc *= sq.clone();
            }
            sq = sq.clone() * sq;
            n >>= 1;
        }
        Ok(acc)
    }

    pub fn scale(&self, r: &Rational) -> Scalar {
        Scalar { m: self.m, re: &self.re * r, im: &self.im * r }
    }

    /// Parse the canonical text form, e.g. `"3"`, `"-1/2"`, `"2+1/3*z"`, `"-z"`.
    pub fn parse(m: u8, input: &str) -> Result<Scalar, ScalarError> {
        if !(1..=3).contains(&m) {
            return Err(ScalarError::InvalidOrder(m));
        }
        let s: String = input.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(ScalarError::Parse("empty input".to_string()));
        }
        // Split into signed terms.
        let mut terms: Vec<String> = Vec::new();
        let mut cur = String::new();
        for (i, c) in s.chars().enumerate() {
            if (c == '+' || c == '-') && i > 0 {
                terms.push(core::mem::take(&mut cur));
                cur.push(c);
            } else {
                cur.push(c);
            }
        }
        terms.push(cur);
        let mut re = Rational::zero();
        let mut im = Rational::zero();
        let mut seen_re = false;
        let mut seen_im = false;
        for t in &terms {
            let (is_zeta, core_part) = match t.strip_suffix("*z") {
                Some(p) => (true, p.to_string()),
                None if t == "z" || t == "+z" => (true, "1".to_string()),
                None if t == "-z" => (true, "-1".to_string()),
                None => (false, t.clone()),
            };
            let val = parse_rational(&core_part)?;
            if is_zeta {
                if seen_im {
                    return Err(ScalarError::Parse("repeated zeta term".to_string()));
                }
                seen_im = true;
                im = val;
            } else {
                if seen_re {
                    return Err(ScalarError::Parse("repeated rational term".to_string()));
                }
                seen_re = true;
                re = val;
            }
        }
        Scalar::new(m, re, im)
    }
}

fn parse_rational(s: &str) -> Result<Rational, ScalarError> {
    let err = || ScalarError::Parse(s.to_string());
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.parse().map_err(|_| err())?;
            let d: BigInt = d.parse().map_err(|_| err())?;
            if d.is_zero() {
                return Err(ScalarError::Parse("zero denominator".to_string()));
            }
            Ok(Rational::new(n, d))
        }
        None => {
            let n: BigInt = s.parse().map_err(|_| err())?;
            Ok(Rational::from_integer(n))
        }
    }
}

fn fmt_rational(r: &Rational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if r.denom().is_one() {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut lead = true;
        if !self.re.is_zero() {
            fmt_rational(&self.re, f)?;
            lead = false;
        }
        if !self.im.is_zero() {
            if !lead && self.im.is_positive() {
                write!(f, "+")?;
            }
            fmt_rational(&self.im, f)?;
            write!(f, "*z")?;
        }
        Ok(())
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, rhs: Scalar) -> Scalar {
        assert_eq!(self.m, rhs.m, "mismatched cyclotomic orders");
        Scalar { m: self.m, re: self.re + rhs.re, im: self.im + rhs.im }
    }
}

impl AddAssign for Scalar {
    fn add_assign(&mut self, rhs: Scalar) {
        assert_eq!(self.m, rhs.m, "mismatched cyclotomic orders");
        self.re += rhs.re;
        self.im += rhs.im;
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, rhs: Scalar) -> Scalar {
        assert_eq!(self.m, rhs.m, "mismatched cyclotomic orders");
        Scalar { m: self.m, re: self.re - rhs.re, im: self.im - rhs.im }
    }
}

impl SubAssign for Scalar {
    fn sub_assign(&mut self, rhs: Scalar) {
        assert_eq!(self.m, rhs.m, "mismatched cyclotomic orders");
        self.re -= rhs.re;
        self.im -= rhs.im;
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar { m: self.m, re: -self.re, im: -self.im }
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: Scalar) -> Scalar {
        assert_eq!(self.m, rhs.m, "mismatched cyclotomic orders");
        if self.m < 3 {
            return Scalar { m: self.m, re: self.re * rhs.re, im: Rational::zero() };
        }
        // (a + b z)(c + d z) = ac + (ad + bc) z + bd z^2, z^2 = -1 - z.
        let (a, b) = (&self.re, &self.im);
        let (c, d) = (&rhs.re, &rhs.im);
        let bd = b * d;
        Scalar {
            m: self.m,
            re: a * c - &bd,
            im: a * d + b * c - bd,
        }
    }
}

impl MulAssign for Scalar {
    fn mul_assign(&mut self, rhs: Scalar) {
        *self = self.clone() * rhs;
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scalar {
    /// Deterministic total order (by order, then lexicographic on the
    /// canonical coefficients). Used for orbit-representative selection and
    /// map keys; not compatible with field structure.
    fn cmp(&self, other: &Self) -> Ordering {
        self.m
            .cmp(&other.m)
            .then_with(|| self.re.cmp(&other.re))
            .then_with(|| self.im.cmp(&other.im))
    }
}
