//! Concrete functions: GIP, lifted functions `f∘GIPᵏ`, EQ, the modified index
//! function, DISJ₂/DISJ₃, the Exactly-N demo and the mod-2 function `G`.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::field::{ceil_log2, gen_prime, BitStr, FieldElem, PrimeModulus};
use crate::{Error, Result};

/// Gadget parameters `(q, r, k)`: `k` players each hold a vector in `F_q^r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Params {
    pub q: PrimeModulus,
    pub r: u32,
    pub k: u32,
}

impl Params {
    pub fn new(q: u64, r: u32, k: u32) -> Result<Self> {
        let q = PrimeModulus::new(q)?;
        Self::with_modulus(q, r, k)
    }

    pub fn with_modulus(q: PrimeModulus, r: u32, k: u32) -> Result<Self> {
        if r == 0 || k == 0 {
            return Err(Error::InvalidParams(format!("need r >= 1 and k >= 1, got r={r}, k={k}")));
        }
        Ok(Self { q, r, k })
    }

    /// Per-player domain size `N = q^r`, if it fits in 64 bits.
    pub fn player_domain(&self) -> Option<u64> {
        self.q.get().checked_pow(self.r)
    }

    pub(crate) fn player_domain_checked(&self) -> Result<u64> {
        self.player_domain()
            .ok_or_else(|| Error::InvalidParams(format!("q^r overflows 64 bits for {self}")))
    }

    /// Size of `(F_q^r)^k`, if it fits in 128 bits.
    pub fn gadget_domain(&self) -> Option<u128> {
        (self.q.get() as u128).checked_pow(self.r.checked_mul(self.k)?)
    }

    /// True iff `k >= 2` and `r >= 2^(k+1)`, the regime of the lifting theorem.
    pub fn theorem_regime(&self) -> bool {
        self.k >= 2 && self.k < 31 && self.r as u64 >= 1u64 << (self.k + 1)
    }

    /// Bits needed to write one field element.
    pub fn elem_bits(&self) -> u32 {
        ceil_log2(self.q.get())
    }

    /// Writes a player-input index as `r` base-`q` digits, least significant first.
    pub fn decode_into(&self, mut index: u64, out: &mut [u64]) {
        let q = self.q.get();
        for d in out.iter_mut() {
            *d = index % q;
            index /= q;
        }
    }

    pub fn decode(&self, index: u64) -> PlayerInput {
        let mut coords = vec![0; self.r as usize];
        self.decode_into(index, &mut coords);
        PlayerInput { coords }
    }

    pub fn encode(&self, input: &PlayerInput) -> Result<u64> {
        self.check_input(input)?;
        let q = self.q.get();
        let mut idx = 0u64;
        for &c in input.coords.iter().rev() {
            idx = idx
                .checked_mul(q)
                .and_then(|v| v.checked_add(c))
                .ok_or_else(|| Error::InvalidParams("player input index overflows".into()))?;
        }
        Ok(idx)
    }

    fn check_input(&self, input: &PlayerInput) -> Result<()> {
        if input.coords.len() != self.r as usize {
            return Err(Error::LengthMismatch(input.coords.len(), self.r as usize));
        }
        if let Some(&c) = input.coords.iter().find(|&&c| c >= self.q.get()) {
            return Err(Error::OutOfRange { value: c, bound: self.q.get() });
        }
        Ok(())
    }

    /// GIP on player inputs given as domain indices. Scratch must hold `k·r` digits.
    pub(crate) fn gip_indices(&self, xs: &[u64], scratch: &mut [u64]) -> u64 {
        let r = self.r as usize;
        for (i, &x) in xs.iter().enumerate() {
            self.decode_into(x, &mut scratch[i * r..(i + 1) * r]);
        }
        self.gip_digits(scratch)
    }

    /// GIP on `k` concatenated digit vectors of length `r`.
    #[inline]
    pub(crate) fn gip_digits(&self, digits: &[u64]) -> u64 {
        let q = self.q;
        let r = self.r as usize;
        let mut sum = 0u64;
        for j in 0..r {
            let mut prod = 1 % q.get();
            for i in 0..self.k as usize {
                prod = q.mul_raw(prod, digits[i * r + j]);
                if prod == 0 {
                    break;
                }
            }
            sum = q.add_raw(sum, prod);
        }
        sum
    }
}

impl fmt::Display for Params {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(q={}, r={}, k={})", self.q, self.r, self.k)
    }
}

/// One player's vector in `F_q^r`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PlayerInput {
    pub coords: Vec<u64>,
}

impl PlayerInput {
    pub fn new(coords: Vec<u64>) -> Self {
        Self { coords }
    }
}

/// `Σ_j Π_i x_{i,j}` over `F_q`.
pub fn gip_eval(params: &Params, xs: &[PlayerInput]) -> Result<FieldElem> {
    if xs.len() != params.k as usize {
        return Err(Error::LengthMismatch(xs.len(), params.k as usize));
    }
    let mut digits = Vec::with_capacity((params.k * params.r) as usize);
    for x in xs {
        params.check_input(x)?;
        digits.extend_from_slice(&x.coords);
    }
    Ok(FieldElem::reduce(params.gip_digits(&digits), params.q))
}

/// `GIP(x) mod 2`, reading the field value as an integer in `[0, q)`.
pub fn g_mod2_eval(params: &Params, xs: &[PlayerInput]) -> Result<bool> {
    Ok(gip_eval(params, xs)?.value() % 2 == 1)
}

/// Exact preimage counts `count[v] = #{x : GIP(x) = v}`.
///
/// The one-coordinate product distribution over `k`-tuples puts
/// `q^k − (q−1)^k` on zero and `(q−1)^(k−1)` on each nonzero value. It is
/// invariant under scaling by `F_q^*`, and so is every convolution power, so
/// the `r`-fold cyclic convolution only has to track the zero class and one
/// representative nonzero class.
pub fn gip_value_distribution(params: &Params) -> Result<Vec<u128>> {
    const MAX_Q: u64 = 1 << 20;
    let q = params.q.get();
    let total = params
        .gadget_domain()
        .ok_or(Error::DomainTooLarge(u128::MAX))?;
    if q > MAX_Q {
        return Err(Error::InvalidParams(format!("q = {q} too large to tabulate")));
    }
    let qq = q as u128;
    let k = params.k;
    let one_zero = qq.pow(k) - (qq - 1).pow(k);
    let one_nonzero = (qq - 1).pow(k - 1);
    let (mut zero, mut nonzero) = (one_zero, one_nonzero);
    for _ in 1..params.r {
        let z = zero * one_zero + (qq - 1) * nonzero * one_nonzero;
        let nz = zero * one_nonzero + nonzero * one_zero + (qq - 2) * nonzero * one_nonzero;
        zero = z;
        nonzero = nz;
    }
    let mut counts = vec![nonzero; q as usize];
    counts[0] = zero;
    debug_assert_eq!(counts.iter().sum::<u128>(), total);
    Ok(counts)
}

/// Dense 0/1 communication matrix `M(f)`, rows indexed by `z`, columns by `v`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoPartyFn {
    pub name: String,
    rows: usize,
    cols: usize,
    matrix: Vec<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TwoPartyKind {
    Eq,
    Ind,
    Disj2,
    File,
}

impl TwoPartyFn {
    pub fn from_fn(name: impl Into<String>, rows: usize, cols: usize, f: impl Fn(usize, usize) -> bool) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::MalformedMatrix("empty matrix".into()));
        }
        let mut matrix = Vec::with_capacity(rows * cols);
        for z in 0..rows {
            for v in 0..cols {
                matrix.push(f(z, v));
            }
        }
        Ok(Self { name: name.into(), rows, cols, matrix })
    }

    pub fn constant(size: usize, value: bool) -> Result<Self> {
        Self::from_fn(format!("CONST{}", value as u8), size, size, |_, _| value)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn entry(&self, z: usize, v: usize) -> bool {
        self.matrix[z * self.cols + v]
    }

    pub fn row(&self, z: usize) -> &[bool] {
        &self.matrix[z * self.cols..(z + 1) * self.cols]
    }

    /// Parses one row per line of comma-separated `0`/`1` entries, no header.
    pub fn from_csv_str(name: impl Into<String>, text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let row = line
                .split(',')
                .map(|cell| match cell.trim() {
                    "0" => Ok(false),
                    "1" => Ok(true),
                    other => Err(Error::MalformedMatrix(format!("line {}: entry {other:?} is not 0/1", ln + 1))),
                })
                .collect::<Result<Vec<bool>>>()?;
            rows.push(row);
        }
        let cols = rows.first().map(Vec::len).ok_or_else(|| Error::MalformedMatrix("no rows".into()))?;
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != cols) {
            return Err(Error::MalformedMatrix(format!("row {} has {} entries, expected {cols}", i + 1, r.len())));
        }
        let n_rows = rows.len();
        Ok(Self { name: name.into(), rows: n_rows, cols, matrix: rows.concat() })
    }

    pub fn from_csv_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "FILE".into());
        Self::from_csv_str(name, &text)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for z in 0..self.rows {
            let line: Vec<&str> = self.row(z).iter().map(|&b| if b { "1" } else { "0" }).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

/// Builds EQ, IND, DISJ2 of the given size, or loads a CSV matrix for `File`.
pub fn make_two_party(kind: TwoPartyKind, size: usize, path: Option<&Path>) -> Result<TwoPartyFn> {
    if kind != TwoPartyKind::File && size < 2 {
        return Err(Error::InvalidParams(format!("size must be >= 2, got {size}")));
    }
    match kind {
        TwoPartyKind::Eq => TwoPartyFn::from_fn(format!("EQ{size}"), size, size, |z, v| z == v),
        TwoPartyKind::Ind => {
            let width = ceil_log2(size as u64);
            let idx: Vec<u32> = (0..size as u64).map(|y| ind_index(size as u64, y)).collect::<Result<_>>()?;
            TwoPartyFn::from_fn(format!("IND{size}"), size, size, |x, y| big_endian_bit(x as u64, width, idx[y]))
        }
        TwoPartyKind::Disj2 => {
            if !size.is_power_of_two() {
                return Err(Error::InvalidParams(format!("DISJ2 size {size} is not a power of two")));
            }
            TwoPartyFn::from_fn(format!("DISJ2_{}", size.trailing_zeros()), size, size, |z, v| z & v == 0)
        }
        TwoPartyKind::File => {
            let path = path.ok_or_else(|| Error::InvalidParams("FILE needs a path".into()))?;
            TwoPartyFn::from_csv_file(path)
        }
    }
}

/// Bit `i` (0 = most significant) of the `width`-bit big-endian form of `x`.
pub(crate) fn big_endian_bit(x: u64, width: u32, i: u32) -> bool {
    debug_assert!(i < width);
    x >> (width - 1 - i) & 1 == 1
}

/// Index read by the modified index function.
///
/// With `B = ⌈log₂ q⌉` and `b = ⌈log₂ B⌉`, returns the value of the first `b`
/// bits of `y`'s `B`-bit big-endian form, reduced mod `B`.
pub fn ind_index(q: u64, y: u64) -> Result<u32> {
    if y >= q {
        return Err(Error::OutOfRange { value: y, bound: q });
    }
    if q < 2 {
        return Err(Error::InvalidParams(format!("index function needs q >= 2, got {q}")));
    }
    let width = ceil_log2(q);
    let prefix = ceil_log2(width as u64);
    let head = y >> (width - prefix);
    Ok((head % width as u64) as u32)
}

/// Bit width `b` of the index message for size `q`.
pub fn ind_index_bits(q: u64) -> u32 {
    ceil_log2(ceil_log2(q) as u64)
}

/// `f∘GIPᵏ(x_1, …, x_k, z) = f(z, GIP(x_1, …, x_k))`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiftedFn {
    pub base: TwoPartyFn,
    pub params: Params,
}

impl LiftedFn {
    pub fn new(base: TwoPartyFn, params: Params) -> Result<Self> {
        let q = params.q.get() as usize;
        if base.rows != q || base.cols != q {
            return Err(Error::InvalidParams(format!(
                "lifting over q={q} needs a {q}x{q} base matrix, got {}x{}",
                base.rows, base.cols
            )));
        }
        Ok(Self { base, params })
    }

    pub fn name(&self) -> String {
        format!("{}∘GIP{}", self.base.name, self.params)
    }
}

pub fn lifted_eval(lf: &LiftedFn, xs: &[PlayerInput], z: u64) -> Result<bool> {
    let q = lf.params.q.get();
    if z >= q {
        return Err(Error::OutOfRange { value: z, bound: q });
    }
    let v = gip_eval(&lf.params, xs)?;
    Ok(lf.base.entry(z as usize, v.value() as usize))
}

/// `DISJ₃(x, y, z) = ⋀_i (¬z_i ∨ ¬x_i ∨ ¬y_i)`.
pub fn disj3_eval(x: BitStr, y: BitStr, z: BitStr) -> Result<bool> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if x.len() != z.len() {
        return Err(Error::LengthMismatch(x.len(), z.len()));
    }
    Ok(x.bits() & y.bits() & z.bits() == 0)
}

/// The Exactly-N demo: `g(x, y) = total − x − y`, lifted with EQ on `z`.
///
/// Values of `g` outside `[0, total]` land on a reserved column where EQ is 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactlyN {
    pub total: u64,
}

impl ExactlyN {
    /// Column index of `g(x, y)`; `total + 1` is the reserved column.
    pub fn gadget(&self, x: u64, y: u64) -> u64 {
        self.total.checked_sub(x).and_then(|t| t.checked_sub(y)).unwrap_or(self.total + 1)
    }

    pub fn eval(&self, x: u64, y: u64, z: u64) -> bool {
        z == self.gadget(x, y)
    }
}

/// Parameters of the mod-2 function `G` for input length `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cor35Params {
    pub params: Params,
    /// Input length actually used, `n` rounded down to a multiple of `2^(k+1)`.
    pub n_used: u64,
    pub rounded: bool,
    pub prime_bits: u32,
    /// Whether `k <= log₂ n − 5·log₂ log₂ n` holds at this `n`.
    pub regime_satisfied: bool,
}

impl Cor35Params {
    pub fn input_bits_per_player(&self) -> u64 {
        self.params.r as u64 * self.params.q.bits() as u64
    }
}

/// `r = 2^(k+1)` and a prime `q` of `n / 2^(k+1)` bits.
pub fn cor35_params(n: u64, k: u32, seed: u64) -> Result<Cor35Params> {
    if k == 0 || k > 30 {
        return Err(Error::InvalidParams(format!("k = {k} out of range")));
    }
    let r = 1u64 << (k + 1);
    if r > n {
        return Err(Error::InvalidParams(format!("2^(k+1) = {r} exceeds n = {n}")));
    }
    let prime_bits = n / r;
    if !(2..=61).contains(&prime_bits) {
        return Err(Error::InvalidParams(format!("prime bit length {prime_bits} outside 2..=61")));
    }
    let q = gen_prime(prime_bits as u32, seed)?;
    let n_used = prime_bits * r;
    let log_n = (n as f64).log2();
    let regime_satisfied = log_n > 1.0 && (k as f64) <= log_n - 5.0 * log_n.log2();
    Ok(Cor35Params {
        params: Params::with_modulus(q, r as u32, k)?,
        n_used,
        rounded: n_used != n,
        prime_bits: prime_bits as u32,
        regime_satisfied,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pi(v: &[u64]) -> PlayerInput {
        PlayerInput::new(v.to_vec())
    }

    #[test]
    fn gip_examples() {
        let p = Params::new(3, 2, 2).unwrap();
        assert_eq!(gip_eval(&p, &[pi(&[1, 2]), pi(&[2, 2])]).unwrap().value(), 0);
        assert_eq!(gip_eval(&p, &[pi(&[0, 0]), pi(&[0, 0])]).unwrap().value(), 0);
        let p = Params::new(5, 1, 3).unwrap();
        assert_eq!(gip_eval(&p, &[pi(&[2]), pi(&[3]), pi(&[4])]).unwrap().value(), 4);
        assert!(gip_eval(&p, &[pi(&[2]), pi(&[3])]).is_err());
        assert!(gip_eval(&p, &[pi(&[2]), pi(&[3]), pi(&[5])]).is_err());
        assert!(gip_eval(&p, &[pi(&[2, 1]), pi(&[3]), pi(&[4])]).is_err());
    }

    #[test]
    fn distribution_examples() {
        let d = |q, r, k| gip_value_distribution(&Params::new(q, r, k).unwrap()).unwrap();
        assert_eq!(d(2, 1, 2), vec![3, 1]);
        assert_eq!(d(3, 1, 2), vec![5, 2, 2]);
        assert_eq!(d(3, 2, 2), vec![33, 24, 24]);
    }

    fn enumerate_distribution(p: &Params) -> Vec<u128> {
        let n = p.player_domain().unwrap();
        let total = n.pow(p.k);
        let mut counts = vec![0u128; p.q.get() as usize];
        let mut xs = vec![0u64; p.k as usize];
        let mut scratch = vec![0u64; (p.k * p.r) as usize];
        for idx in 0..total {
            let mut rest = idx;
            for x in xs.iter_mut() {
                *x = rest % n;
                rest /= n;
            }
            counts[p.gip_indices(&xs, &mut scratch) as usize] += 1;
        }
        counts
    }

    fn naive_convolution(p: &Params) -> Vec<u128> {
        let q = p.q.get() as usize;
        let mut one = vec![0u128; q];
        let tuples = (q as u64).pow(p.k);
        for t in 0..tuples {
            let mut rest = t;
            let mut prod = 1u64;
            for _ in 0..p.k {
                prod = prod * (rest % q as u64) % q as u64;
                rest /= q as u64;
            }
            one[prod as usize] += 1;
        }
        let mut acc = one.clone();
        for _ in 1..p.r {
            let mut next = vec![0u128; q];
            for a in 0..q {
                for b in 0..q {
                    next[(a + b) % q] += acc[a] * one[b];
                }
            }
            acc = next;
        }
        acc
    }

    #[test]
    fn distribution_matches_enumeration_up_to_2_20() {
        for q in [2u64, 3, 5, 7, 11, 13] {
            for k in 1..=4u32 {
                for r in 1..=6u32 {
                    let p = Params::new(q, r, k).unwrap();
                    if p.gadget_domain().unwrap() > 1 << 20 {
                        continue;
                    }
                    let d = gip_value_distribution(&p).unwrap();
                    assert_eq!(d, enumerate_distribution(&p), "{p}");
                    assert_eq!(d, naive_convolution(&p), "{p}");
                    assert_eq!(d.iter().sum::<u128>(), p.gadget_domain().unwrap());
                }
            }
        }
    }

    #[test]
    fn distribution_overflow_is_reported() {
        let p = Params::new(101, 40, 2).unwrap();
        assert!(gip_value_distribution(&p).is_err());
        let p = Params::new(101, 8, 2).unwrap();
        assert_eq!(gip_value_distribution(&p).unwrap().iter().sum::<u128>(), 101u128.pow(16));
    }

    #[test]
    fn two_party_examples() {
        let eq = make_two_party(TwoPartyKind::Eq, 3, None).unwrap();
        for z in 0..3 {
            for v in 0..3 {
                assert_eq!(eq.entry(z, v), z == v);
            }
        }
        let d = make_two_party(TwoPartyKind::Disj2, 4, None).unwrap();
        // x = {1} -> 0b01, y = {2} -> 0b10
        assert!(d.entry(0b01, 0b10));
        assert!(!d.entry(0b11, 0b10));
        assert!(make_two_party(TwoPartyKind::Disj2, 6, None).is_err());
        assert!(make_two_party(TwoPartyKind::Eq, 1, None).is_err());
    }

    #[test]
    fn csv_parsing() {
        let f = TwoPartyFn::from_csv_str("m", "0,1,1\n1,0,0\n").unwrap();
        assert_eq!((f.rows(), f.cols()), (2, 3));
        assert!(!f.is_square());
        assert!(LiftedFn::new(f.clone(), Params::new(2, 1, 2).unwrap()).is_err());
        assert_eq!(TwoPartyFn::from_csv_str("m", &f.to_csv()).unwrap(), f);
        assert!(TwoPartyFn::from_csv_str("m", "0,1\n1\n").is_err());
        assert!(TwoPartyFn::from_csv_str("m", "0,2\n1,0\n").is_err());
        assert!(TwoPartyFn::from_csv_str("m", "").is_err());
    }

    #[test]
    fn ind_index_examples() {
        assert_eq!(ind_index(17, 6).unwrap(), 1);
        assert_eq!(ind_index(17, 31), Err(Error::OutOfRange { value: 31, bound: 17 }));
        assert_eq!(ind_index(32, 31).unwrap(), 2);
        assert_eq!(ind_index(16, 0).unwrap(), 0);
        assert_eq!(ind_index_bits(17), 3);
        assert_eq!(ind_index_bits(16), 2);
    }

    #[test]
    fn ind_index_first_bits_value_for_31() {
        // B = 5, b = 3 for both 17 and 32; 31 = 11111 -> 111 = 7 -> 7 mod 5 = 2.
        assert_eq!(ceil_log2(32), 5);
        assert_eq!(ind_index(32, 31).unwrap(), 7 % 5);
    }

    #[test]
    fn ind_rows_match_row_hashing() {
        use std::collections::HashSet;
        for q in [3usize, 5, 16, 17, 31] {
            let f = make_two_party(TwoPartyKind::Ind, q, None).unwrap();
            let width = ceil_log2(q as u64);
            let reachable: HashSet<u32> = (0..q as u64).map(|y| ind_index(q as u64, y).unwrap()).collect();
            let patterns: HashSet<Vec<bool>> = (0..q as u64)
                .map(|x| (0..width).filter(|i| reachable.contains(i)).map(|i| big_endian_bit(x, width, i)).collect())
                .collect();
            let rows: HashSet<&[bool]> = (0..q).map(|z| f.row(z)).collect();
            assert_eq!(rows.len(), patterns.len(), "q = {q}");
        }
    }

    #[test]
    fn lifted_examples() {
        let p = Params::new(3, 2, 2).unwrap();
        let lf = LiftedFn::new(make_two_party(TwoPartyKind::Eq, 3, None).unwrap(), p).unwrap();
        let xs = [pi(&[1, 2]), pi(&[2, 2])];
        assert!(lifted_eval(&lf, &xs, 0).unwrap());
        assert!(!lifted_eval(&lf, &xs, 1).unwrap());
        let p = Params::new(17, 1, 2).unwrap();
        let lf = LiftedFn::new(make_two_party(TwoPartyKind::Ind, 17, None).unwrap(), p).unwrap();
        assert!(lifted_eval(&lf, &[pi(&[0]), pi(&[0])], 18).is_err());
    }

    #[test]
    fn disj3_examples() {
        let b = |s: &str| s.parse::<BitStr>().unwrap();
        assert!(disj3_eval(b("1010"), b("0110"), b("0100")).unwrap());
        assert!(!disj3_eval(b("1010"), b("0110"), b("0010")).unwrap());
        assert!(disj3_eval(b("1111"), b("1111"), b("0000")).unwrap());
        assert!(disj3_eval(b("1111"), b("111"), b("0000")).is_err());
    }

    #[test]
    fn disj3_is_disj2_of_z_and_meet() {
        for n in 1..=6usize {
            let size = 1usize << n;
            let d2 = make_two_party(TwoPartyKind::Disj2, size, None).unwrap();
            for x in 0..size as u64 {
                for y in 0..size as u64 {
                    for z in 0..size as u64 {
                        let v = disj3_eval(BitStr::new(n, x).unwrap(), BitStr::new(n, y).unwrap(), BitStr::new(n, z).unwrap()).unwrap();
                        assert_eq!(v, d2.entry(z as usize, (x & y) as usize));
                    }
                }
            }
        }
    }

    #[test]
    fn g_mod2_examples() {
        let p = Params::new(5, 1, 2).unwrap();
        assert!(!g_mod2_eval(&p, &[pi(&[3]), pi(&[4])]).unwrap());
        assert!(!g_mod2_eval(&p, &[pi(&[0]), pi(&[0])]).unwrap());
        assert!(g_mod2_eval(&p, &[pi(&[2]), pi(&[3])]).unwrap());
    }

    #[test]
    fn cor35_examples() {
        let c = cor35_params(48, 2, 0).unwrap();
        assert_eq!(c.params.r, 8);
        assert_eq!(c.params.q.bits(), 6);
        assert_eq!(c.input_bits_per_player(), 48);
        assert!(!c.rounded);
        let c = cor35_params(32, 1, 3).unwrap();
        assert_eq!((c.params.r, c.params.q.bits()), (4, 8));
        assert!(cor35_params(48, 5, 0).is_err());
        let c = cor35_params(50, 2, 0).unwrap();
        assert!(c.rounded);
        assert_eq!(c.n_used, 48);
    }

    #[test]
    fn exactly_n_demo() {
        let e = ExactlyN { total: 6 };
        assert!(e.eval(1, 2, 3));
        assert!(!e.eval(1, 2, 4));
        assert_eq!(e.gadget(5, 4), 7);
        assert!(!e.eval(5, 4, 6));
    }

    #[test]
    fn theorem_regime_flag() {
        assert!(Params::new(17, 8, 2).unwrap().theorem_regime());
        assert!(!Params::new(17, 7, 2).unwrap().theorem_regime());
        assert!(!Params::new(17, 8, 1).unwrap().theorem_regime());
        assert!(Params::new(3, 0, 2).is_err());
    }

    proptest! {
        #[test]
        fn gip_is_affine_in_each_player(
            qi in 0usize..4, r in 1u32..5, k in 2u32..4, player in 0usize..3,
            seed in proptest::collection::vec(0u64..1000, 64),
            c in 0u64..1000,
        ) {
            let q = [2u64, 3, 5, 17][qi];
            let p = Params::new(q, r, k).unwrap();
            let player = player % k as usize;
            let mut it = seed.iter().cycle();
            let mut mk = || PlayerInput::new((0..r).map(|_| it.next().unwrap() % q).collect());
            let mut xs: Vec<PlayerInput> = (0..k).map(|_| mk()).collect();
            let a = mk();
            let b = mk();
            let c = c % q;
            // g(a + c·b) = g(a) + c·(g(b) − g(0)) for the free player
            let eval = |xs: &mut Vec<PlayerInput>, v: &PlayerInput| {
                xs[player] = v.clone();
                gip_eval(&p, xs).unwrap().value()
            };
            let comb = PlayerInput::new(a.coords.iter().zip(&b.coords).map(|(x, y)| (x + c * y) % q).collect());
            let zero = PlayerInput::new(vec![0; r as usize]);
            let lhs = eval(&mut xs, &comb);
            let ga = eval(&mut xs, &a);
            let gb = eval(&mut xs, &b);
            let g0 = eval(&mut xs, &zero);
            prop_assert_eq!(lhs, (ga + c * ((gb + q - g0) % q)) % q);
        }

        #[test]
        fn encode_decode_roundtrip(qi in 0usize..4, r in 1u32..6, idx: u64) {
            let q = [2u64, 3, 5, 17][qi];
            let p = Params::new(q, r, 1).unwrap();
            let idx = idx % p.player_domain().unwrap();
            prop_assert_eq!(p.encode(&p.decode(idx)).unwrap(), idx);
        }
    }
}
