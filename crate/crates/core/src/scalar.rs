//! Exact scalars.
//!
//! Real-valued networks compute over [`Rational`], quantised networks over
//! [`QuantInt`]. Both are arbitrary precision, so a verdict is never an
//! artifact of rounding. The [`Scalar`] trait is the common surface that the
//! matrix backends and the network code are generic over.

use std::cell::Cell;
use std::fmt;
use std::hash::Hash;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScalarError {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("malformed number {0:?}")]
    Malformed(String),
}

/// Scalar kinds a network can be evaluated over.
pub trait Scalar:
    Clone
    + Ord
    + Hash
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    /// True when every value of the kind is an integer. Verification engines
    /// use this to restrict the input domain to the integer lattice.
    const INTEGRAL: bool;

    /// Short lowercase name used in reports and model files.
    const KIND: &'static str;

    fn to_rational(&self) -> Rational;

    /// Exact conversion back from a rational; `None` when the value is not
    /// representable in this kind.
    fn from_rational(x: &Rational) -> Option<Self>;

    fn abs(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }
}

/// Counts of scalar additions and multiplications performed on this thread.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCounts {
    pub adds: u64,
    pub muls: u64,
}

impl OpCounts {
    pub fn total(&self) -> u64 {
        self.adds + self.muls
    }
}

thread_local! {
    static ADDS: Cell<u64> = const { Cell::new(0) };
    static MULS: Cell<u64> = const { Cell::new(0) };
}

#[inline]
fn tick_add() {
    ADDS.with(|c| c.set(c.get() + 1));
}

#[inline]
fn tick_mul() {
    MULS.with(|c| c.set(c.get() + 1));
}

fn read_counts() -> OpCounts {
    OpCounts {
        adds: ADDS.with(Cell::get),
        muls: MULS.with(Cell::get),
    }
}

/// Runs `f` and reports how many scalar additions and multiplications it
/// performed on the current thread. Work done on other threads (for example
/// inside a parallel verifier) is not counted.
pub fn count_ops<R>(f: impl FnOnce() -> R) -> (R, OpCounts) {
    let before = read_counts();
    let out = f();
    let after = read_counts();
    (
        out,
        OpCounts {
            adds: after.adds - before.adds,
            muls: after.muls - before.muls,
        },
    )
}

/// Exact arbitrary-precision fraction, always in lowest terms with a
/// positive denominator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(numer: BigInt, denom: BigInt) -> Result<Self, ScalarError> {
        if denom.is_zero() {
            return Err(ScalarError::ZeroDenominator);
        }
        Ok(Rational(BigRational::new(numer, denom)))
    }

    /// Convenience constructor for small literals.
    ///
    /// Panics if `denom` is zero.
    pub fn from_ratio(numer: i64, denom: i64) -> Self {
        Self::new(numer.into(), denom.into()).expect("zero denominator")
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn recip(&self) -> Result<Self, ScalarError> {
        if self.is_zero() {
            return Err(ScalarError::ZeroDenominator);
        }
        Ok(Rational(self.0.recip()))
    }

    pub fn checked_div(&self, other: &Rational) -> Result<Self, ScalarError> {
        Ok(self * &other.recip()?)
    }

    pub fn floor(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    pub fn ceil(&self) -> BigInt {
        self.0.ceil().to_integer()
    }

    /// Nearest integer, halves rounded away from zero.
    pub fn round_half_away(&self) -> BigInt {
        // BigRational::round rounds half away from zero.
        self.0.round().to_integer()
    }

    pub fn min_of(a: &Rational, b: &Rational) -> Rational {
        if a <= b {
            a.clone()
        } else {
            b.clone()
        }
    }

    pub fn max_of(a: &Rational, b: &Rational) -> Rational {
        if a >= b {
            a.clone()
        } else {
            b.clone()
        }
    }

    /// Midpoint of `a` and `b`.
    pub fn midpoint(a: &Rational, b: &Rational) -> Rational {
        Rational((&a.0 + &b.0) / BigRational::from_integer(BigInt::from(2)))
    }

    /// Parses a decimal literal: optional sign, digits, optional fraction
    /// part, optional exponent. The result is the exact value of the literal.
    pub fn from_decimal_str(s: &str) -> Result<Self, ScalarError> {
        let malformed = || ScalarError::Malformed(s.to_string());
        let t = s.trim();
        let (negative, body) = match t.as_bytes().first() {
            Some(b'-') => (true, &t[1..]),
            Some(b'+') => (false, &t[1..]),
            _ => (false, t),
        };
        let (mantissa, exponent) = match body.find(['e', 'E']) {
            Some(pos) => {
                let exp_text = &body[pos + 1..];
                let digits = exp_text
                    .strip_prefix(['+', '-'])
                    .unwrap_or(exp_text);
                if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                    return Err(malformed());
                }
                let exp: i64 = exp_text.parse().map_err(|_| malformed())?;
                (&body[..pos], exp)
            }
            None => (body, 0),
        };
        let (int_part, frac_part) = match mantissa.split_once('.') {
            Some((i, f)) => {
                if f.is_empty() {
                    return Err(malformed());
                }
                (i, f)
            }
            None => (mantissa, ""),
        };
        if int_part.is_empty()
            || !int_part.bytes().all(|b| b.is_ascii_digit())
            || !frac_part.bytes().all(|b| b.is_ascii_digit())
        {
            return Err(malformed());
        }
        let digits = format!("{int_part}{frac_part}");
        let mut numer: BigInt = digits.parse().map_err(|_| malformed())?;
        if negative {
            numer = -numer;
        }
        let scale = exponent - frac_part.len() as i64;
        let ten = BigInt::from(10);
        let power = num_traits::pow(ten, scale.unsigned_abs() as usize);
        let value = if scale >= 0 {
            BigRational::from_integer(numer * power)
        } else {
            BigRational::new(numer, power)
        };
        Ok(Rational(value))
    }

    /// Canonical decimal rendering, or `None` when the expansion does not
    /// terminate. Integers render without a fraction part, fractions without
    /// trailing zeros.
    pub fn to_decimal_string(&self) -> Option<String> {
        let mut den = self.denom().clone();
        let two = BigInt::from(2);
        let five = BigInt::from(5);
        let mut twos = 0usize;
        let mut fives = 0usize;
        while den.is_even() {
            den /= &two;
            twos += 1;
        }
        while (&den % &five).is_zero() {
            den /= &five;
            fives += 1;
        }
        if !den.is_one() {
            return None;
        }
        let places = twos.max(fives);
        let scaled = self.numer() * num_traits::pow(BigInt::from(10), places) / self.denom();
        Some(place_point(&scaled, places))
    }

    /// Approximate decimal with `digits` significant digits, halves rounded
    /// away from zero. Exact values that fit are rendered exactly.
    pub fn to_sig_string(&self, digits: usize) -> String {
        let digits = digits.max(1);
        if self.is_zero() {
            return "0".to_string();
        }
        if let Some(exact) = self.to_decimal_string() {
            let significant = exact
                .trim_start_matches('-')
                .replace('.', "")
                .trim_start_matches('0')
                .trim_end_matches('0')
                .len();
            if significant <= digits {
                return exact;
            }
        }
        let magnitude = Rational(self.0.abs());
        // Decimal exponent of the leading digit.
        let mut exp = magnitude.numer().to_string().len() as i64
            - magnitude.denom().to_string().len() as i64;
        let ten = Rational::from_integer(10);
        loop {
            let lower = pow10(exp);
            if magnitude < lower {
                exp -= 1;
                continue;
            }
            if magnitude >= &lower * &ten {
                exp += 1;
                continue;
            }
            break;
        }
        let shift = digits as i64 - 1 - exp;
        let mut scaled = (self * &pow10(shift)).round_half_away();
        let mut shift = shift;
        // Rounding can carry into a new leading digit (9.99 -> 10.0).
        if scaled.abs().to_string().len() > digits {
            scaled /= 10;
            shift -= 1;
        }
        let text = if shift >= 0 {
            place_point(&scaled, shift as usize)
        } else {
            let zeros = "0".repeat((-shift) as usize);
            format!("{scaled}{zeros}")
        };
        trim_fraction(text)
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn inner(&self) -> &BigRational {
        &self.0
    }
}

fn pow10(exp: i64) -> Rational {
    let p = num_traits::pow(BigInt::from(10), exp.unsigned_abs() as usize);
    if exp >= 0 {
        Rational::from_integer(p)
    } else {
        Rational(BigRational::new(BigInt::one(), p))
    }
}

/// Renders `scaled / 10^places` as a decimal with trailing zeros removed.
fn place_point(scaled: &BigInt, places: usize) -> String {
    let negative = scaled.sign() == Sign::Minus;
    let digits = scaled.abs().to_string();
    let text = if places == 0 {
        digits
    } else if digits.len() > places {
        let (i, f) = digits.split_at(digits.len() - places);
        format!("{i}.{f}")
    } else {
        format!("0.{}{}", "0".repeat(places - digits.len()), digits)
    };
    let text = trim_fraction(text);
    if negative {
        format!("-{text}")
    } else {
        text
    }
}

fn trim_fraction(text: String) -> String {
    if text.contains('.') {
        text.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        text
    }
}

impl FromStr for Rational {
    type Err = ScalarError;

    /// Accepts decimal literals and exact `numer/denom` fractions.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once('/') {
            Some((n, d)) => {
                let parse = |t: &str| -> Result<BigInt, ScalarError> {
                    let t = t.trim();
                    let digits = t.strip_prefix(['+', '-']).unwrap_or(t);
                    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                        return Err(ScalarError::Malformed(s.to_string()));
                    }
                    t.parse().map_err(|_| ScalarError::Malformed(s.to_string()))
                };
                Rational::new(parse(n)?, parse(d)?)
            }
            None => Rational::from_decimal_str(s),
        }
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

impl From<BigInt> for Rational {
    fn from(n: BigInt) -> Self {
        Rational::from_integer(n)
    }
}

impl Zero for Rational {
    fn zero() -> Self {
        Rational(BigRational::zero())
    }

    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl One for Rational {
    fn one() -> Self {
        Rational(BigRational::one())
    }
}

/// Integer scalar of quantised networks.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct QuantInt(BigInt);

impl QuantInt {
    pub fn new(value: impl Into<BigInt>) -> Self {
        QuantInt(value.into())
    }

    pub fn value(&self) -> &BigInt {
        &self.0
    }
}

impl fmt::Display for QuantInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Debug for QuantInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for QuantInt {
    type Err = ScalarError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let value: Rational = s.parse()?;
        if !value.is_integer() {
            return Err(ScalarError::Malformed(s.to_string()));
        }
        Ok(QuantInt(value.numer().clone()))
    }
}

impl From<i64> for QuantInt {
    fn from(n: i64) -> Self {
        QuantInt(n.into())
    }
}

impl Zero for QuantInt {
    fn zero() -> Self {
        QuantInt(BigInt::zero())
    }

    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl One for QuantInt {
    fn one() -> Self {
        QuantInt(BigInt::one())
    }
}

macro_rules! counted_ops {
    ($ty:ident) => {
        impl Add for $ty {
            type Output = $ty;
            fn add(self, rhs: $ty) -> $ty {
                tick_add();
                $ty(self.0 + rhs.0)
            }
        }
        impl<'a> Add<&'a $ty> for &'a $ty {
            type Output = $ty;
            fn add(self, rhs: &'a $ty) -> $ty {
                tick_add();
                $ty(&self.0 + &rhs.0)
            }
        }
        impl Sub for $ty {
            type Output = $ty;
            fn sub(self, rhs: $ty) -> $ty {
                tick_add();
                $ty(self.0 - rhs.0)
            }
        }
        impl<'a> Sub<&'a $ty> for &'a $ty {
            type Output = $ty;
            fn sub(self, rhs: &'a $ty) -> $ty {
                tick_add();
                $ty(&self.0 - &rhs.0)
            }
        }
        impl Mul for $ty {
            type Output = $ty;
            fn mul(self, rhs: $ty) -> $ty {
                tick_mul();
                $ty(self.0 * rhs.0)
            }
        }
        impl<'a> Mul<&'a $ty> for &'a $ty {
            type Output = $ty;
            fn mul(self, rhs: &'a $ty) -> $ty {
                tick_mul();
                $ty(&self.0 * &rhs.0)
            }
        }
        impl Neg for $ty {
            type Output = $ty;
            fn neg(self) -> $ty {
                $ty(-self.0)
            }
        }
        impl<'a> Neg for &'a $ty {
            type Output = $ty;
            fn neg(self) -> $ty {
                $ty(-&self.0)
            }
        }
    };
}

counted_ops!(Rational);
counted_ops!(QuantInt);

impl Scalar for Rational {
    const INTEGRAL: bool = false;
    const KIND: &'static str = "rational";

    fn to_rational(&self) -> Rational {
        self.clone()
    }

    fn from_rational(x: &Rational) -> Option<Self> {
        Some(x.clone())
    }
}

impl Scalar for QuantInt {
    const INTEGRAL: bool = true;
    const KIND: &'static str = "quantised";

    fn to_rational(&self) -> Rational {
        Rational::from_integer(self.0.clone())
    }

    fn from_rational(x: &Rational) -> Option<Self> {
        x.is_integer().then(|| QuantInt(x.numer().clone()))
    }
}
