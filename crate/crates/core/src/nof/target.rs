use serde::{Deserialize, Serialize};

use crate::field::BitStr;
use crate::functions::{disj3_eval, ExactlyN, LiftedFn};
use crate::{Error, Result, ENUMERATION_LIMIT};

/// Input domain of a `(k+1)`-player NOF function: `k` foreheads `x_i` and the
/// last player's forehead `z`, each an index into a finite set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NofDomain {
    pub x_sizes: Vec<u64>,
    pub z_size: u64,
}

/// One full input `(x_1, …, x_k, z)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NofInput {
    pub xs: Vec<u64>,
    pub z: u64,
}

impl NofDomain {
    /// Number of x-players.
    pub fn k(&self) -> usize {
        self.x_sizes.len()
    }

    /// Product of the x-domains.
    pub fn x_total(&self) -> Option<u64> {
        self.x_sizes.iter().try_fold(1u64, |acc, &n| acc.checked_mul(n))
    }

    pub fn total(&self) -> Option<u64> {
        self.x_total()?.checked_mul(self.z_size)
    }

    /// Total size, refusing anything above `limit`.
    pub fn enumerable(&self, limit: u64) -> Result<u64> {
        match self.total() {
            Some(t) if t <= limit => Ok(t),
            Some(t) => Err(Error::DomainTooLarge(t as u128)),
            None => Err(Error::DomainTooLarge(u128::MAX)),
        }
    }

    pub(crate) fn enumerable_default(&self) -> Result<u64> {
        self.enumerable(ENUMERATION_LIMIT)
    }

    /// Input number `index` in the canonical order: `z` varies fastest, then `x_1`, …, `x_k`.
    pub fn input_at(&self, index: u64) -> NofInput {
        let z = index % self.z_size;
        let xs = self.x_tuple_at(index / self.z_size);
        NofInput { xs, z }
    }

    pub fn index_of(&self, input: &NofInput) -> u64 {
        self.x_tuple_index(&input.xs) * self.z_size + input.z
    }

    pub fn x_tuple_at(&self, mut index: u64) -> Vec<u64> {
        self.x_sizes
            .iter()
            .map(|&n| {
                let v = index % n;
                index /= n;
                v
            })
            .collect()
    }

    pub fn x_tuple_index(&self, xs: &[u64]) -> u64 {
        xs.iter().zip(&self.x_sizes).rev().fold(0, |acc, (&x, &n)| acc * n + x)
    }

    pub fn check_input(&self, input: &NofInput) -> Result<()> {
        if input.xs.len() != self.k() {
            return Err(Error::LengthMismatch(input.xs.len(), self.k()));
        }
        for (&x, &n) in input.xs.iter().zip(&self.x_sizes) {
            if x >= n {
                return Err(Error::OutOfRange { value: x, bound: n });
            }
        }
        if input.z >= self.z_size {
            return Err(Error::OutOfRange { value: input.z, bound: self.z_size });
        }
        Ok(())
    }
}

/// A Boolean function on an NOF domain.
pub trait NofTarget: Sync {
    fn domain(&self) -> NofDomain;

    /// Evaluates on an in-range input.
    fn eval(&self, xs: &[u64], z: u64) -> bool;

    fn describe(&self) -> String;
}

impl NofTarget for LiftedFn {
    fn domain(&self) -> NofDomain {
        let n = self
            .params
            .player_domain()
            .expect("lifted function domains are enumerated only when q^r fits in 64 bits");
        NofDomain { x_sizes: vec![n; self.params.k as usize], z_size: self.params.q.get() }
    }

    fn eval(&self, xs: &[u64], z: u64) -> bool {
        let mut scratch = vec![0u64; (self.params.k * self.params.r) as usize];
        let v = self.params.gip_indices(xs, &mut scratch);
        self.base.entry(z as usize, v as usize)
    }

    fn describe(&self) -> String {
        self.name()
    }
}

/// Three-party set disjointness on `n`-bit strings: `x` (player 1), `y` (player 2), `z` (last player).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Disj3Target {
    pub n: usize,
}

impl Disj3Target {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > 20 {
            return Err(Error::InvalidParams(format!("DISJ3 length {n} outside 1..=20")));
        }
        Ok(Self { n })
    }

    pub fn bits(&self, v: u64) -> BitStr {
        BitStr::new(self.n, v).expect("value fits in n bits")
    }
}

impl NofTarget for Disj3Target {
    fn domain(&self) -> NofDomain {
        let s = 1u64 << self.n;
        NofDomain { x_sizes: vec![s, s], z_size: s }
    }

    fn eval(&self, xs: &[u64], z: u64) -> bool {
        disj3_eval(self.bits(xs[0]), self.bits(xs[1]), self.bits(z)).expect("equal lengths")
    }

    fn describe(&self) -> String {
        format!("DISJ3_{}", self.n)
    }
}

impl NofTarget for ExactlyN {
    fn domain(&self) -> NofDomain {
        let s = self.total + 1;
        NofDomain { x_sizes: vec![s, s], z_size: s }
    }

    fn eval(&self, xs: &[u64], z: u64) -> bool {
        ExactlyN::eval(self, xs[0], xs[1], z)
    }

    fn describe(&self) -> String {
        format!("EXACTLY_{}", self.total)
    }
}

/// A target given as an explicit truth table in canonical input order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExplicitTarget {
    pub name: String,
    pub domain: NofDomain,
    pub table: Vec<bool>,
}

impl ExplicitTarget {
    pub fn from_fn(name: impl Into<String>, domain: NofDomain, f: impl Fn(&[u64], u64) -> bool) -> Result<Self> {
        let total = domain.enumerable_default()?;
        let table = (0..total)
            .map(|i| {
                let inp = domain.input_at(i);
                f(&inp.xs, inp.z)
            })
            .collect();
        Ok(Self { name: name.into(), domain, table })
    }

    /// Tabulates any target.
    pub fn tabulate(target: &dyn NofTarget) -> Result<Self> {
        Self::from_fn(target.describe(), target.domain(), |xs, z| target.eval(xs, z))
    }
}

impl NofTarget for ExplicitTarget {
    fn domain(&self) -> NofDomain {
        self.domain.clone()
    }

    fn eval(&self, xs: &[u64], z: u64) -> bool {
        self.table[(self.domain.x_tuple_index(xs) * self.domain.z_size + z) as usize]
    }

    fn describe(&self) -> String {
        self.name.clone()
    }
}
