//! Factorial-number-system positions and their exact decimal equivalents.
//!
//! A position vector of length `n` has its most significant digit first:
//! `digits[l]` lies in `[0, n - 1 - l]` and weighs `(n - 1 - l)!`, so the
//! last digit is always zero and the vectors enumerate `[0, n!)` in
//! lexicographic order.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Sub};
use std::str::FromStr;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision non-negative integer used for interval endpoints.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct BigCount(pub BigUint);

impl BigCount {
    pub fn zero() -> Self {
        BigCount(BigUint::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn factorial(n: usize) -> Self {
        BigCount((1..=n as u64).fold(BigUint::one(), |acc, k| acc * k))
    }

    /// `floor((self + other) / 2)`.
    pub fn midpoint(&self, other: &BigCount) -> BigCount {
        BigCount((&self.0 + &other.0) >> 1u32)
    }

    pub fn saturating_sub(&self, other: &BigCount) -> BigCount {
        if self.0 > other.0 {
            BigCount(&self.0 - &other.0)
        } else {
            BigCount::zero()
        }
    }

    /// Big-endian magnitude without leading zero bytes; zero is empty.
    pub fn to_bytes(&self) -> Vec<u8> {
        if self.0.is_zero() {
            Vec::new()
        } else {
            self.0.to_bytes_be()
        }
    }

    /// Inverse of `to_bytes`; rejects non-minimal encodings.
    pub fn from_bytes(bytes: &[u8]) -> Option<BigCount> {
        if bytes.first() == Some(&0) {
            return None;
        }
        Some(BigCount(BigUint::from_bytes_be(bytes)))
    }

    /// `log2(self)`, accurate for values far beyond `f64::MAX`; `-inf` for 0.
    pub fn log2(&self) -> f64 {
        let bits = self.0.bits();
        if bits == 0 {
            return f64::NEG_INFINITY;
        }
        if bits <= 64 {
            return (self.0.to_u64().unwrap() as f64).log2();
        }
        let shift = bits - 64;
        let top = (&self.0 >> shift).to_u64().unwrap() as f64;
        top.log2() + shift as f64
    }

    pub fn to_u64(&self) -> Option<u64> {
        self.0.to_u64()
    }
}

impl From<u64> for BigCount {
    fn from(v: u64) -> Self {
        BigCount(BigUint::from(v))
    }
}

impl From<BigUint> for BigCount {
    fn from(v: BigUint) -> Self {
        BigCount(v)
    }
}

impl fmt::Display for BigCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl FromStr for BigCount {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.parse::<BigUint>()
            .map(BigCount)
            .map_err(|_| Error::Parse(format!("not a non-negative integer: {s:?}")))
    }
}

impl Add for &BigCount {
    type Output = BigCount;
    fn add(self, rhs: &BigCount) -> BigCount {
        BigCount(&self.0 + &rhs.0)
    }
}

impl Sub for &BigCount {
    type Output = BigCount;
    /// Panics on underflow, like the unsigned integer it wraps.
    fn sub(self, rhs: &BigCount) -> BigCount {
        BigCount(&self.0 - &rhs.0)
    }
}

/// A position in `[0, n!)` as a factoradic digit vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Factoradic {
    digits: Vec<u32>,
}

impl Factoradic {
    pub fn zero(n: usize) -> Self {
        Factoradic {
            digits: vec![0; n],
        }
    }

    /// The largest position, `n! - 1`.
    pub fn max(n: usize) -> Self {
        Factoradic {
            digits: (0..n).map(|l| (n - 1 - l) as u32).collect(),
        }
    }

    pub fn new(digits: Vec<u32>) -> Result<Self> {
        let n = digits.len();
        for (level, &digit) in digits.iter().enumerate() {
            let radix = (n - level) as u32;
            if digit >= radix {
                return Err(Error::DigitOutOfRange {
                    level,
                    digit,
                    radix,
                });
            }
        }
        Ok(Factoradic { digits })
    }

    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    pub fn to_decimal(&self) -> BigCount {
        digits_to_decimal(&self.digits, self.digits.len())
    }

    pub fn from_decimal(x: &BigCount, n: usize) -> Result<Self> {
        if let Some(small) = x.to_u64() {
            return from_u64(small, n);
        }
        let mut rest = x.0.clone();
        let mut digits = vec![0u32; n];
        for level in (0..n).rev() {
            let radix = BigUint::from((n - level) as u32);
            let (q, r) = rest.div_rem(&radix);
            digits[level] = r.to_u32().expect("remainder below radix");
            rest = q;
        }
        if !rest.is_zero() {
            return Err(Error::Overflow(n));
        }
        Ok(Factoradic { digits })
    }

    /// Lexicographic comparison; equal lengths required.
    pub fn compare(&self, other: &Factoradic) -> Result<Ordering> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch(self.len(), other.len()));
        }
        Ok(self.digits.cmp(&other.digits))
    }

    /// `floor((a + b) / 2)` by mixed-radix addition and halving on the digits.
    pub fn midpoint(a: &Factoradic, b: &Endpoint) -> Result<Factoradic> {
        let n = a.len();
        let (b_digits, b_top): (&[u32], u32) = match b {
            Endpoint::At(f) => {
                if f.len() != n {
                    return Err(Error::LengthMismatch(n, f.len()));
                }
                (&f.digits, 0)
            }
            Endpoint::Total => (&[], 1),
        };
        if !a.lt_endpoint(b) {
            return Err(Error::BadInterval("midpoint needs a < b".into()));
        }

        let mut sum = vec![0u32; n];
        let mut carry = 0;
        for level in (0..n).rev() {
            let radix = (n - level) as u32;
            let s = a.digits[level] + b_digits.get(level).copied().unwrap_or(0) + carry;
            sum[level] = s % radix;
            carry = s / radix;
        }
        // multiples of n! above the most significant digit
        let mut rem = carry + b_top;
        for (level, d) in sum.iter_mut().enumerate() {
            let radix = (n - level) as u32;
            let cur = rem * radix + *d;
            *d = cur / 2;
            rem = cur % 2;
        }
        Ok(Factoradic { digits: sum })
    }

    pub fn lt_endpoint(&self, end: &Endpoint) -> bool {
        match end {
            Endpoint::Total => true,
            Endpoint::At(f) => self.digits < f.digits,
        }
    }
}

impl fmt::Display for Factoradic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.digits.iter().enumerate() {
            if i > 0 && self.digits.len() > 10 {
                f.write_str(".")?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

fn from_u64(mut x: u64, n: usize) -> Result<Factoradic> {
    let mut digits = vec![0u32; n];
    for level in (0..n).rev() {
        let radix = (n - level) as u64;
        digits[level] = (x % radix) as u32;
        x /= radix;
        if x == 0 {
            break;
        }
    }
    if x != 0 {
        return Err(Error::Overflow(n));
    }
    Ok(Factoradic { digits })
}

/// Decimal value of a (possibly shorter) most-significant-first digit prefix
/// of an `n`-digit vector, the missing digits taken as zero. Digits may
/// equal their radix, in which case they carry.
pub fn digits_to_decimal(prefix: &[u32], n: usize) -> BigCount {
    debug_assert!(prefix.len() <= n);
    // u128 holds 34!; fall back to BigUint above that
    if n <= 34 {
        let mut acc: u128 = 0;
        for level in 0..n {
            let radix = (n - level) as u128;
            acc = acc * radix + prefix.get(level).copied().unwrap_or(0) as u128;
        }
        return BigCount(BigUint::from(acc));
    }
    let mut acc = BigUint::zero();
    for level in 0..n {
        acc *= (n - level) as u32;
        acc += prefix.get(level).copied().unwrap_or(0);
    }
    BigCount(acc)
}

/// Compares the zero-padded prefix `prefix` against a full digit vector.
pub fn cmp_padded(prefix: &[u32], full: &[u32]) -> Ordering {
    let (head, rest) = full.split_at(prefix.len().min(full.len()));
    match prefix.cmp(head) {
        Ordering::Equal if rest.iter().any(|&d| d > 0) => Ordering::Less,
        ord => ord,
    }
}

/// Exclusive interval end: a representable position or `n!` itself.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Endpoint {
    At(Factoradic),
    Total,
}

impl Endpoint {
    pub fn from_decimal(x: &BigCount, n: usize) -> Result<Endpoint> {
        if *x == BigCount::factorial(n) {
            Ok(Endpoint::Total)
        } else {
            Factoradic::from_decimal(x, n).map(Endpoint::At)
        }
    }

    pub fn to_decimal(&self, n: usize) -> BigCount {
        match self {
            Endpoint::At(f) => f.to_decimal(),
            Endpoint::Total => BigCount::factorial(n),
        }
    }
}
