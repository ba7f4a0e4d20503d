//! Exact arithmetic in the ordered field Q(√5).
//!
//! Every value is stored as `a + b·√5` with rational `a` and `b`. Signs are
//! decided without floating point, so comparisons are exact. Purely rational
//! values carry `b = 0`, which keeps the common unweighted paths cheap.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::FlgError;

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Scalar {
    a: BigRational,
    b: BigRational,
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl Scalar {
    pub fn new(a: BigRational, b: BigRational) -> Self {
        Scalar { a, b }
    }

    pub fn from_rational(a: BigRational) -> Self {
        Scalar { a, b: BigRational::zero() }
    }

    pub fn int(n: i64) -> Self {
        Scalar::from_rational(BigRational::from_integer(BigInt::from(n)))
    }

    /// `n / d` as an exact rational. Panics on `d == 0`.
    pub fn ratio(n: i64, d: i64) -> Self {
        assert!(d != 0, "zero denominator");
        Scalar::from_rational(rat(n, d))
    }

    pub fn sqrt5() -> Self {
        Scalar { a: BigRational::zero(), b: BigRational::one() }
    }

    /// The golden ratio φ = (1 + √5) / 2.
    pub fn golden_ratio() -> Self {
        Scalar { a: rat(1, 2), b: rat(1, 2) }
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.a
    }

    pub fn sqrt5_part(&self) -> &BigRational {
        &self.b
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.is_rational() && self.a.is_integer()
    }

    /// Exact sign: -1, 0 or 1.
    pub fn signum(&self) -> i8 {
        fn sg(r: &BigRational) -> i8 {
            if r.is_zero() {
                0
            } else if r.is_positive() {
                1
            } else {
                -1
            }
        }
        let (sa, sb) = (sg(&self.a), sg(&self.b));
        if sb == 0 {
            return sa;
        }
        if sa == 0 || sa == sb {
            return sb;
        }
        // Opposite signs: compare a² with 5b².
        let a2 = &self.a * &self.a;
        let b2 = &self.b * &self.b * BigRational::from_integer(BigInt::from(5));
        match a2.cmp(&b2) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => 0,
        }
    }

    pub fn is_positive(&self) -> bool {
        self.signum() > 0
    }

    pub fn is_negative(&self) -> bool {
        self.signum() < 0
    }

    pub fn abs(&self) -> Scalar {
        if self.is_negative() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn recip(&self) -> Option<Scalar> {
        if self.is_zero() {
            return None;
        }
        if self.is_rational() {
            return Some(Scalar::from_rational(self.a.recip()));
        }
        // 1/(a + b√5) = (a - b√5) / (a² - 5b²); the norm is nonzero because √5 is irrational.
        let norm = &self.a * &self.a - &self.b * &self.b * rat(5, 1);
        Some(Scalar { a: &self.a / &norm, b: -(&self.b / &norm) })
    }

    /// Largest integer not exceeding the value.
    pub fn floor(&self) -> BigInt {
        if self.is_rational() {
            return self.a.floor().to_integer();
        }
        let guess = self.to_f64().floor();
        let mut n = BigInt::from(guess as i64);
        while Scalar::from_rational(BigRational::from_integer(n.clone())) > *self {
            n -= 1;
        }
        while Scalar::from_rational(BigRational::from_integer(&n + 1)) <= *self {
            n += 1;
        }
        n
    }

    /// Smallest integer not below the value.
    pub fn ceil(&self) -> BigInt {
        let f = self.floor();
        if Scalar::from_rational(BigRational::from_integer(f.clone())) == *self {
            f
        } else {
            f + 1
        }
    }

    /// Decimal approximation for display only.
    pub fn to_f64(&self) -> f64 {
        let a = self.a.to_f64().unwrap_or(f64::NAN);
        let b = self.b.to_f64().unwrap_or(f64::NAN);
        a + b * 5f64.sqrt()
    }

    pub fn to_i64(&self) -> Option<i64> {
        if self.is_integer() {
            self.a.to_integer().to_i64()
        } else {
            None
        }
    }

    pub fn min(self, other: Scalar) -> Scalar {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Scalar) -> Scalar {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl Zero for Scalar {
    fn zero() -> Self {
        Scalar { a: BigRational::zero(), b: BigRational::zero() }
    }

    fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }
}

impl One for Scalar {
    fn one() -> Self {
        Scalar::int(1)
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::int(n)
    }
}

impl From<BigRational> for Scalar {
    fn from(r: BigRational) -> Self {
        Scalar::from_rational(r)
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scalar {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.is_rational() && other.is_rational() {
            return self.a.cmp(&other.a);
        }
        match (self - other).signum() {
            1 => Ordering::Greater,
            -1 => Ordering::Less,
            _ => Ordering::Equal,
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar { a: -self.a, b: -self.b }
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -self.clone()
    }
}

impl<'a> Add<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        if self.b.is_zero() && rhs.b.is_zero() {
            return Scalar::from_rational(&self.a + &rhs.a);
        }
        Scalar { a: &self.a + &rhs.a, b: &self.b + &rhs.b }
    }
}

impl<'a> Sub<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        if self.b.is_zero() && rhs.b.is_zero() {
            return Scalar::from_rational(&self.a - &rhs.a);
        }
        Scalar { a: &self.a - &rhs.a, b: &self.b - &rhs.b }
    }
}

impl<'a> Mul<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        if self.b.is_zero() && rhs.b.is_zero() {
            return Scalar::from_rational(&self.a * &rhs.a);
        }
        let five = rat(5, 1);
        Scalar { a: &self.a * &rhs.a + &self.b * &rhs.b * five, b: &self.a * &rhs.b + &self.b * &rhs.a }
    }
}

impl<'a> Div<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn div(self, rhs: &Scalar) -> Scalar {
        if self.b.is_zero() && rhs.b.is_zero() {
            return Scalar::from_rational(&self.a / &rhs.a);
        }
        let inv = rhs.recip().expect("division by zero scalar");
        self * &inv
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: Scalar) -> Scalar {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: &Scalar) -> Scalar {
                (&self).$m(rhs)
            }
        }
        impl<'a> $tr<Scalar> for &'a Scalar {
            type Output = Scalar;
            fn $m(self, rhs: Scalar) -> Scalar {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl AddAssign<&Scalar> for Scalar {
    fn add_assign(&mut self, rhs: &Scalar) {
        self.a += &rhs.a;
        if !rhs.b.is_zero() {
            self.b += &rhs.b;
        }
    }
}

impl AddAssign for Scalar {
    fn add_assign(&mut self, rhs: Scalar) {
        *self += &rhs;
    }
}

impl SubAssign<&Scalar> for Scalar {
    fn sub_assign(&mut self, rhs: &Scalar) {
        self.a -= &rhs.a;
        if !rhs.b.is_zero() {
            self.b -= &rhs.b;
        }
    }
}

impl SubAssign for Scalar {
    fn sub_assign(&mut self, rhs: Scalar) {
        *self -= &rhs;
    }
}

impl Sum for Scalar {
    fn sum<I: Iterator<Item = Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::zero(), |mut acc, x| {
            acc += &x;
            acc
        })
    }
}

impl<'a> Sum<&'a Scalar> for Scalar {
    fn sum<I: Iterator<Item = &'a Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::zero(), |mut acc, x| {
            acc += x;
            acc
        })
    }
}

fn fmt_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Canonical exact form: `p/q`, `p/q+r/s*sqrt5`, negative `√5` coefficients in
/// parentheses (`1+(-1)*sqrt5`). Integers drop the `/1`.
impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", fmt_rational(&self.a));
        }
        let coef = if self.b.is_negative() { format!("({})", fmt_rational(&self.b)) } else { fmt_rational(&self.b) };
        write!(f, "{}+{}*sqrt5", fmt_rational(&self.a), coef)
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (~{:.6})", self, self.to_f64())
    }
}

struct Lexer<'s> {
    src: &'s [u8],
    pos: usize,
}

impl<'s> Lexer<'s> {
    fn err(&self, msg: &str) -> FlgError {
        FlgError::ScalarSyntax { pos: self.pos, msg: msg.to_string() }
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

    fn digits(&mut self) -> Result<BigInt, FlgError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected digits"));
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        Ok(text.parse::<BigInt>().expect("digit run parses"))
    }

    /// `-? digits ( '/' digits )?`, optionally wrapped in parentheses.
    fn rational(&mut self) -> Result<BigRational, FlgError> {
        if self.eat(b'(') {
            let r = self.rational()?;
            if !self.eat(b')') {
                return Err(self.err("expected ')'"));
            }
            return Ok(r);
        }
        let neg = self.eat(b'-');
        let num = self.digits()?;
        let den = if self.eat(b'/') {
            let d = self.digits()?;
            if d.is_zero() {
                return Err(self.err("zero denominator"));
            }
            d
        } else {
            BigInt::one()
        };
        let r = BigRational::new(num, den);
        Ok(if neg { -r } else { r })
    }

    fn at_sqrt5(&mut self) -> bool {
        self.skip_ws();
        self.src[self.pos..].starts_with(b"sqrt5")
    }
}

/// Parses sums of terms `rat` and `rat*sqrt5` (or bare `sqrt5`) joined by `+`/`-`.
impl FromStr for Scalar {
    type Err = FlgError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut lx = Lexer { src: s.as_bytes(), pos: 0 };
        let mut acc = Scalar::zero();
        let mut first = true;
        loop {
            if lx.peek().is_none() {
                if first {
                    return Err(lx.err("empty scalar"));
                }
                break;
            }
            let mut negate = false;
            if !first {
                if lx.eat(b'+') {
                } else if lx.eat(b'-') {
                    negate = true;
                } else {
                    return Err(lx.err("expected '+' or '-'"));
                }
            }
            first = false;
            let term = if lx.at_sqrt5() {
                lx.pos += 5;
                Scalar::sqrt5()
            } else {
                let r = lx.rational()?;
                if lx.eat(b'*') {
                    if !lx.at_sqrt5() {
                        return Err(lx.err("expected 'sqrt5'"));
                    }
                    lx.pos += 5;
                    Scalar::new(BigRational::zero(), r)
                } else {
                    Scalar::from_rational(r)
                }
            };
            if negate {
                acc -= &term;
            } else {
                acc += &term;
            }
        }
        Ok(acc)
    }
}

impl serde::Serialize for Scalar {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for Scalar {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let s = String::deserialize(de)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Lexicographic comparison of equal-length scalar vectors.
pub fn lex_cmp(x: &[Scalar], y: &[Scalar]) -> Ordering {
    for (a, b) in x.iter().zip(y) {
        match a.cmp(b) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    x.len().cmp(&y.len())
}
