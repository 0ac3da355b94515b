//! Prime-field arithmetic, prime generation, additive characters and bit strings.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Order of a prime field, `q < 2^64`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct PrimeModulus(u64);

impl PrimeModulus {
    pub fn new(q: u64) -> Result<Self> {
        if is_prime(q) {
            Ok(Self(q))
        } else {
            Err(Error::NotPrime(q))
        }
    }

    pub fn get(self) -> u64 {
        self.0
    }

    /// Number of binary digits of `q`.
    pub fn bits(self) -> u32 {
        64 - self.0.leading_zeros()
    }

    pub fn elem(self, value: u64) -> Result<FieldElem> {
        FieldElem::new(value, self)
    }

    #[inline]
    pub(crate) fn mul_raw(self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.0 as u128) as u64
    }

    #[inline]
    pub(crate) fn add_raw(self, a: u64, b: u64) -> u64 {
        let s = a as u128 + b as u128;
        (s % self.0 as u128) as u64
    }
}

impl TryFrom<u64> for PrimeModulus {
    type Error = Error;
    fn try_from(q: u64) -> Result<Self> {
        Self::new(q)
    }
}

impl From<PrimeModulus> for u64 {
    fn from(q: PrimeModulus) -> u64 {
        q.0
    }
}

impl fmt::Display for PrimeModulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Element of `F_q`, always reduced into `[0, q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElem {
    value: u64,
    modulus: PrimeModulus,
}

#[allow(clippy::should_implement_trait)]
impl FieldElem {
    pub fn new(value: u64, modulus: PrimeModulus) -> Result<Self> {
        if value >= modulus.0 {
            return Err(Error::OutOfRange { value, bound: modulus.0 });
        }
        Ok(Self { value, modulus })
    }

    /// Reduces an arbitrary integer into the field.
    pub fn reduce(value: u64, modulus: PrimeModulus) -> Self {
        Self { value: value % modulus.0, modulus }
    }

    pub fn zero(modulus: PrimeModulus) -> Self {
        Self { value: 0, modulus }
    }

    pub fn one(modulus: PrimeModulus) -> Self {
        Self { value: 1 % modulus.0, modulus }
    }

    pub fn value(self) -> u64 {
        self.value
    }

    pub fn modulus(self) -> PrimeModulus {
        self.modulus
    }

    fn same_field(self, other: Self) -> Result<PrimeModulus> {
        if self.modulus != other.modulus {
            return Err(Error::ModulusMismatch(self.modulus.0, other.modulus.0));
        }
        Ok(self.modulus)
    }

    pub fn add(self, other: Self) -> Result<Self> {
        let q = self.same_field(other)?;
        Ok(Self { value: q.add_raw(self.value, other.value), modulus: q })
    }

    pub fn mul(self, other: Self) -> Result<Self> {
        let q = self.same_field(other)?;
        Ok(Self { value: q.mul_raw(self.value, other.value), modulus: q })
    }

    pub fn neg(self) -> Self {
        let q = self.modulus.0;
        Self { value: (q - self.value) % q, modulus: self.modulus }
    }

    pub fn pow(self, mut exp: u64) -> Self {
        let q = self.modulus;
        let mut base = self.value;
        let mut acc = 1 % q.0;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = q.mul_raw(acc, base);
            }
            base = q.mul_raw(base, base);
            exp >>= 1;
        }
        Self { value: acc, modulus: q }
    }

    /// Inverse by Fermat's little theorem.
    pub fn inv(self) -> Result<Self> {
        if self.value == 0 {
            return Err(Error::InverseOfZero);
        }
        Ok(self.pow(self.modulus.0 - 2))
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.value, self.modulus)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldOp {
    Add,
    Mul,
    Inv,
    Neg,
}

/// Dispatches one field operation; `b` is required for `Add` and `Mul`.
pub fn field_arith(op: FieldOp, a: FieldElem, b: Option<FieldElem>) -> Result<FieldElem> {
    match op {
        FieldOp::Add => a.add(b.ok_or(Error::MissingOperand("add"))?),
        FieldOp::Mul => a.mul(b.ok_or(Error::MissingOperand("mul"))?),
        FieldOp::Inv => a.inv(),
        FieldOp::Neg => Ok(a.neg()),
    }
}

fn mod_pow(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = ((acc as u128 * base as u128) % m as u128) as u64;
        }
        base = ((base as u128 * base as u128) % m as u128) as u64;
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin, exact for every `n < 2^64`.
pub fn is_prime(n: u64) -> bool {
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &WITNESSES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &WITNESSES {
        let mut x = mod_pow(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = ((x as u128 * x as u128) % n as u128) as u64;
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Returns a prime with exactly `bits` binary digits, deterministic in `seed`.
///
/// Scans upward from a seeded start in `[2^(bits-1), 2^bits)` and wraps to the
/// bottom of the range once.
pub fn gen_prime(bits: u32, seed: u64) -> Result<PrimeModulus> {
    if !(2..=61).contains(&bits) {
        return Err(Error::BitsOutOfRange(bits));
    }
    let lo = 1u64 << (bits - 1);
    let hi = (1u64 << bits) - 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = rng.random_range(lo..=hi) | 1;
    let start = start.min(hi);
    let upward = (start..=hi).step_by(2);
    let wrapped = (lo..start).filter(|n| n % 2 == 1 || *n == 2);
    upward
        .chain(wrapped)
        .find(|&n| is_prime(n))
        .map(PrimeModulus)
        .ok_or(Error::NoPrimeFound(bits))
}

/// Index of an additive character `χ_α(z) = exp(2πi·αz/q)`; `α = 0` is trivial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CharacterIndex(pub u64);

impl CharacterIndex {
    pub fn is_trivial(self) -> bool {
        self.0 == 0
    }
}

/// `exp(2πi·α·z/q)`.
pub fn char_value(q: PrimeModulus, alpha: CharacterIndex, z: FieldElem) -> Result<Complex64> {
    if alpha.0 >= q.0 {
        return Err(Error::OutOfRange { value: alpha.0, bound: q.0 });
    }
    if z.modulus() != q {
        return Err(Error::ModulusMismatch(q.0, z.modulus().0));
    }
    Ok(char_raw(q.0, alpha.0, z.value()))
}

#[inline]
pub(crate) fn char_raw(q: u64, alpha: u64, z: u64) -> Complex64 {
    let phase = ((alpha as u128 * z as u128) % q as u128) as f64 / q as f64;
    Complex64::from_polar(1.0, TAU * phase)
}

/// Bit string of length at most 64. Coordinate `i` (0-based) is bit `i` of `bits`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitStr {
    len: usize,
    bits: u64,
}

impl BitStr {
    pub fn new(len: usize, bits: u64) -> Result<Self> {
        if len > 64 {
            return Err(Error::InvalidParams(format!("bit string length {len} > 64")));
        }
        if len < 64 && bits >> len != 0 {
            return Err(Error::OutOfRange { value: bits, bound: 1 << len });
        }
        Ok(Self { len, bits })
    }

    pub fn zeros(len: usize) -> Self {
        Self { len, bits: 0 }
    }

    pub fn len(self) -> usize {
        self.len
    }

    pub fn is_empty(self) -> bool {
        self.len == 0
    }

    pub fn bits(self) -> u64 {
        self.bits
    }

    pub fn get(self, i: usize) -> bool {
        self.bits >> i & 1 == 1
    }

    pub fn count_ones(self) -> u32 {
        self.bits.count_ones()
    }
}

impl FromStr for BitStr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut bits = 0u64;
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' if i < 64 => bits |= 1 << i,
                _ => return Err(Error::InvalidParams(format!("bad bit string {s:?}"))),
            }
        }
        Self::new(s.chars().count(), bits)
    }
}

impl fmt::Display for BitStr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl Serialize for BitStr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitStr {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub fn hamming_distance(a: BitStr, b: BitStr) -> Result<u32> {
    if a.len != b.len {
        return Err(Error::LengthMismatch(a.len, b.len));
    }
    Ok((a.bits ^ b.bits).count_ones())
}

/// Smallest `c` with `2^c >= n`; `0` for `n <= 1`.
pub fn ceil_log2(n: u64) -> u32 {
    if n <= 1 {
        0
    } else {
        64 - (n - 1).leading_zeros()
    }
}
