//! The Number-on-Forehead protocol model.
//!
//! Players `0..k` hold `x_0, …, x_{k-1}` on their foreheads and player `k`
//! holds `z`. Player `i < k` sees everything except `x_i`; player `k` sees all
//! of `x` but not `z`. Messages are broadcast on a blackboard, so every turn
//! sees the transcript so far. Player `k` always produces the output.

mod builders;
mod occ;
mod random;
mod search;
mod target;
mod verify;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::field::ceil_log2;
use crate::functions::{big_endian_bit, ind_index, Params};
use crate::{Error, Result};

pub use builders::{
    broadcast_z, build_eq_rand, build_ind_two_round, build_lift_upper, constant_protocol, disj3_broadcast_all,
    disj3_low_cost_protocols, eq_rand_exact_error,
};
pub use occ::{occ_two_party, row_classes, RowClasses};
pub use random::{estimate_rand_error, exact_error_on_input, ErrorEstimate, InstanceFilter};
pub use search::{min_occ_nof_exact, SearchOutcome};
pub use target::{Disj3Target, ExplicitTarget, NofDomain, NofInput, NofTarget};
pub use verify::{consistent_set, slice_cylinders, transcript_classes, verify_protocol, VerifyReport};

/// Which player sees what.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VisibilityModel {
    /// Number of x-players; the last player has index `k`.
    pub k: usize,
}

impl VisibilityModel {
    pub fn num_players(self) -> usize {
        self.k + 1
    }

    pub fn last_player(self) -> usize {
        self.k
    }

    pub fn sees_x(self, player: usize, j: usize) -> bool {
        player != j
    }

    pub fn sees_z(self, player: usize) -> bool {
        player != self.k
    }
}

/// Message function of one turn.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Rule {
    /// The binary encoding of `z`.
    SendZ,
    /// The bits of `z` at the given coordinates (coordinate `i` is bit `i`).
    ZBits { positions: Vec<u32> },
    /// The class index of `z` under a row partition.
    ZRowClass { classes: Vec<u64> },
    /// `reps` inner products mod 2 of `z`'s `width`-bit encoding with public masks.
    ZParity { reps: u32, width: u32 },
    /// The modified-index position of `GIP(x)`; spoken by the last player.
    GipIndex { params: Params },
    /// Bit `i` of `z`'s `width`-bit big-endian form, `i` read from an earlier turn.
    ZBitAtIndex { index_turn: usize, width: u32 },
    /// One bit: whether `z` and `x_with` are disjoint on coordinates `0..len`.
    DisjPrefix { with: usize, len: u32 },
    /// One bit: parity of `|z ∧ x_with|`.
    ParityZAnd { with: usize },
    /// Explicit table keyed by the speaker's view (see [`Protocol::view_key`]).
    Table { entries: Vec<u64> },
}

impl Rule {
    /// The x-coordinates and whether `z` are read by this rule.
    fn reads(&self, k: usize, speaker: usize) -> (Vec<usize>, bool) {
        match self {
            Rule::SendZ | Rule::ZBits { .. } | Rule::ZRowClass { .. } | Rule::ZParity { .. } => (vec![], true),
            Rule::ZBitAtIndex { .. } => (vec![], true),
            Rule::GipIndex { .. } => ((0..k).collect(), false),
            Rule::DisjPrefix { with, .. } | Rule::ParityZAnd { with } => (vec![*with], true),
            Rule::Table { .. } => ((0..k).filter(|&j| j != speaker).collect(), speaker != k),
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Rule::SendZ => "send_z",
            Rule::ZBits { .. } => "z_bits",
            Rule::ZRowClass { .. } => "z_row_class",
            Rule::ZParity { .. } => "z_parity",
            Rule::GipIndex { .. } => "gip_index",
            Rule::ZBitAtIndex { .. } => "z_bit_at_index",
            Rule::DisjPrefix { .. } => "disj_prefix",
            Rule::ParityZAnd { .. } => "parity_z_and",
            Rule::Table { .. } => "table",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Turn {
    pub speaker: usize,
    pub msg_bits: u32,
    #[serde(flatten)]
    pub rule: Rule,
}

/// How the last player turns its view into the output bit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "output", rename_all = "snake_case")]
pub enum OutputRule {
    Constant { value: bool },
    /// The final transcript bit.
    LastBit,
    /// `table[class][GIP(x)]`, the class read from `turn` (class 0 when absent).
    ClassLookup { turn: Option<usize>, table: Vec<Vec<bool>>, params: Params },
    /// Accept iff the parities in `turn` match those of `GIP(x)` under the same masks.
    ParityMatch { turn: usize, reps: u32, width: u32, params: Params },
    /// Reads the first `positions.len()` transcript bits as the bits of `z`
    /// at `positions` and evaluates DISJ₃ on those coordinates only.
    Disj3Revealed { positions: Vec<u32> },
    /// Explicit table keyed by `(x tuple, full transcript)`.
    Table { entries: Vec<bool> },
}

/// A deterministic or public-coin NOF protocol.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Protocol {
    pub name: String,
    pub domain: NofDomain,
    pub turns: Vec<Turn>,
    pub output: OutputRule,
    pub public_random_bits: u32,
}

/// Broadcast bits with per-turn boundaries.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Transcript {
    pub bits: Vec<bool>,
    /// End offset of each executed turn.
    pub boundaries: Vec<usize>,
}

impl Transcript {
    pub fn from_messages(widths: &[u32], values: &[u64]) -> Self {
        let mut t = Transcript::default();
        for (&w, &v) in widths.iter().zip(values) {
            t.push(v, w);
        }
        t
    }

    /// Parses a `0`/`1` string, cutting it at the protocol's turn widths.
    pub fn parse_for(p: &Protocol, s: &str) -> Result<Self> {
        let bits: Vec<bool> = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::InvalidParams(format!("bad transcript {s:?}"))),
            })
            .collect::<Result<_>>()?;
        if bits.len() != p.cost() as usize {
            return Err(Error::Protocol(format!(
                "transcript has {} bits but every run of {} writes {}",
                bits.len(),
                p.name,
                p.cost()
            )));
        }
        let mut boundaries = Vec::with_capacity(p.turns.len());
        let mut end = 0;
        for t in &p.turns {
            end += t.msg_bits as usize;
            boundaries.push(end);
        }
        Ok(Self { bits, boundaries })
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    fn push(&mut self, value: u64, width: u32) {
        for i in (0..width).rev() {
            self.bits.push(value >> i & 1 == 1);
        }
        self.boundaries.push(self.bits.len());
    }

    /// All bits read as one big-endian integer (at most 64 bits).
    pub fn value(&self) -> u64 {
        self.bits.iter().fold(0, |acc, &b| acc << 1 | b as u64)
    }

    /// Value of turn `t`'s message.
    pub fn message(&self, t: usize) -> u64 {
        let start = if t == 0 { 0 } else { self.boundaries[t - 1] };
        self.bits[start..self.boundaries[t]].iter().fold(0, |acc, &b| acc << 1 | b as u64)
    }

    /// The transcript truncated before turn `t`.
    pub fn prefix(&self, t: usize) -> Transcript {
        let end = if t == 0 { 0 } else { self.boundaries[t - 1] };
        Transcript { bits: self.bits[..end].to_vec(), boundaries: self.boundaries[..t].to_vec() }
    }
}

impl fmt::Display for Transcript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.bits.is_empty() {
            return f.write_str("ε");
        }
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// What the current speaker may look at. Hidden coordinates are `None`.
pub(crate) struct View<'a> {
    speaker: usize,
    xs: Vec<Option<u64>>,
    z: Option<u64>,
    transcript: &'a Transcript,
    randomness: &'a [bool],
}

impl View<'_> {
    fn x(&self, j: usize) -> Result<u64> {
        self.xs
            .get(j)
            .copied()
            .flatten()
            .ok_or_else(|| Error::Invisible { player: self.speaker, what: format!("x_{j}") })
    }

    fn z(&self) -> Result<u64> {
        self.z.ok_or_else(|| Error::Invisible { player: self.speaker, what: "z".into() })
    }

    fn all_xs(&self) -> Result<Vec<u64>> {
        (0..self.xs.len()).map(|j| self.x(j)).collect()
    }
}

/// Two inputs differing only in `z` that a protocol cannot tell apart although
/// the target differs on them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeparationWitness {
    pub xs: Vec<u64>,
    pub z0: u64,
    pub z1: u64,
    pub transcript: Transcript,
    pub value0: bool,
    pub value1: bool,
    pub output: bool,
}

impl Protocol {
    pub fn new(
        name: impl Into<String>,
        domain: NofDomain,
        turns: Vec<Turn>,
        output: OutputRule,
        public_random_bits: u32,
    ) -> Result<Self> {
        let p = Self { name: name.into(), domain, turns, output, public_random_bits };
        p.validate()?;
        Ok(p)
    }

    pub fn visibility(&self) -> VisibilityModel {
        VisibilityModel { k: self.domain.k() }
    }

    pub fn is_randomized(&self) -> bool {
        self.public_random_bits > 0
    }

    /// Total bits written on every run.
    pub fn cost(&self) -> u32 {
        self.turns.iter().map(|t| t.msg_bits).sum()
    }

    /// Speakers are strictly increasing x-players: each speaks at most once, in order.
    pub fn is_one_way(&self) -> bool {
        let k = self.domain.k();
        self.turns.windows(2).all(|w| w[0].speaker < w[1].speaker) && self.turns.iter().all(|t| t.speaker < k)
    }

    /// Number of maximal runs of turns by the same speaker.
    pub fn rounds(&self) -> usize {
        let mut rounds = 0;
        let mut last = None;
        for t in &self.turns {
            if last != Some(t.speaker) {
                rounds += 1;
                last = Some(t.speaker);
            }
        }
        rounds
    }

    fn prior_bits(&self, turn: usize) -> u32 {
        self.turns[..turn].iter().map(|t| t.msg_bits).sum()
    }

    /// Size of the key space of a table rule at `turn`.
    pub fn view_key_space(&self, turn: usize) -> Option<u64> {
        let speaker = self.turns[turn].speaker;
        view_key_space(&self.domain, speaker, self.prior_bits(turn))
    }

    /// Index of the speaker's view into a table rule at `turn`.
    pub fn view_key(&self, turn: usize, input: &NofInput, prior: &Transcript) -> u64 {
        view_key(&self.domain, self.turns[turn].speaker, input, prior.value())
    }

    fn output_key_space(&self) -> Option<u64> {
        self.domain.x_total()?.checked_mul(1u64.checked_shl(self.cost())?)
    }

    fn validate(&self) -> Result<()> {
        let vis = self.visibility();
        let k = vis.k;
        if self.cost() > 63 {
            return Err(Error::Protocol(format!("transcripts of {} bits are not supported", self.cost())));
        }
        for (t, turn) in self.turns.iter().enumerate() {
            if turn.speaker > k {
                return Err(Error::Protocol(format!("turn {t}: no player {}", turn.speaker)));
            }
            let (xs, z) = turn.rule.reads(k, turn.speaker);
            if let Some(&j) = xs.iter().find(|&&j| j >= k || !vis.sees_x(turn.speaker, j)) {
                return Err(Error::Invisible { player: turn.speaker, what: format!("x_{j} (rule {})", turn.rule.name()) });
            }
            if z && !vis.sees_z(turn.speaker) {
                return Err(Error::Invisible { player: turn.speaker, what: format!("z (rule {})", turn.rule.name()) });
            }
            match &turn.rule {
                Rule::Table { entries } => {
                    let space = self.view_key_space(t).ok_or_else(|| Error::Protocol("table key space overflows".into()))?;
                    if entries.len() as u64 != space {
                        return Err(Error::Protocol(format!("turn {t}: table has {} entries, expected {space}", entries.len())));
                    }
                }
                Rule::ZBitAtIndex { index_turn, .. } if *index_turn >= t => {
                    return Err(Error::Protocol(format!("turn {t} reads a later turn {index_turn}")));
                }
                Rule::ZParity { reps, width } if reps * width > self.public_random_bits => {
                    return Err(Error::Protocol(format!("turn {t} needs {} random bits", reps * width)));
                }
                _ => {}
            }
        }
        match &self.output {
            OutputRule::ClassLookup { turn: Some(t), .. } | OutputRule::ParityMatch { turn: t, .. } if *t >= self.turns.len() => {
                return Err(Error::Protocol(format!("output reads missing turn {t}")));
            }
            OutputRule::ParityMatch { reps, width, .. } if reps * width > self.public_random_bits => {
                return Err(Error::Protocol("output needs more random bits than the protocol draws".into()));
            }
            OutputRule::Table { entries } => {
                let space = self.output_key_space().ok_or_else(|| Error::Protocol("output key space overflows".into()))?;
                if entries.len() as u64 != space {
                    return Err(Error::Protocol(format!("output table has {} entries, expected {space}", entries.len())));
                }
            }
            _ => {}
        }
        Ok(())
    }

    fn view<'a>(&self, speaker: usize, input: &NofInput, transcript: &'a Transcript, randomness: &'a [bool]) -> View<'a> {
        let vis = self.visibility();
        View {
            speaker,
            xs: input.xs.iter().enumerate().map(|(j, &x)| vis.sees_x(speaker, j).then_some(x)).collect(),
            z: vis.sees_z(speaker).then_some(input.z),
            transcript,
            randomness,
        }
    }

    /// Message of turn `t` on `input`, given the transcript written before it.
    pub fn turn_message(&self, t: usize, input: &NofInput, prior: &Transcript, randomness: &[bool]) -> Result<u64> {
        let turn = &self.turns[t];
        let view = self.view(turn.speaker, input, prior, randomness);
        let msg = match &turn.rule {
            Rule::SendZ => view.z()?,
            Rule::ZBits { positions } => {
                let z = view.z()?;
                positions.iter().fold(0, |acc, &p| acc << 1 | (z >> p & 1))
            }
            Rule::ZRowClass { classes } => {
                let z = view.z()?;
                *classes.get(z as usize).ok_or(Error::OutOfRange { value: z, bound: classes.len() as u64 })?
            }
            Rule::ZParity { reps, width } => {
                let z = view.z()?;
                let masks = masks(view.randomness, *reps, *width);
                masks.iter().fold(0, |acc, &w| acc << 1 | ((z & w).count_ones() as u64 & 1))
            }
            Rule::GipIndex { params } => {
                let xs = view.all_xs()?;
                let mut scratch = vec![0u64; (params.k * params.r) as usize];
                let s = params.gip_indices(&xs, &mut scratch);
                ind_index(params.q.get(), s)? as u64
            }
            Rule::ZBitAtIndex { index_turn, width } => {
                let z = view.z()?;
                let i = view.transcript.message(*index_turn) as u32;
                if i >= *width {
                    return Err(Error::Protocol(format!("bit index {i} outside width {width}")));
                }
                big_endian_bit(z, *width, i) as u64
            }
            Rule::DisjPrefix { with, len } => {
                let z = view.z()?;
                let x = view.x(*with)?;
                let mask = if *len >= 64 { u64::MAX } else { (1u64 << len) - 1 };
                (z & x & mask == 0) as u64
            }
            Rule::ParityZAnd { with } => {
                let z = view.z()?;
                let x = view.x(*with)?;
                (z & x).count_ones() as u64 & 1
            }
            Rule::Table { entries } => {
                let key = self.view_key(t, input, prior);
                entries[key as usize]
            }
        };
        if turn.msg_bits < 64 && msg >> turn.msg_bits != 0 {
            return Err(Error::Protocol(format!("turn {t} produced {msg}, wider than {} bits", turn.msg_bits)));
        }
        Ok(msg)
    }

    fn output_bit(&self, input: &NofInput, transcript: &Transcript, randomness: &[bool]) -> Result<bool> {
        let view = self.view(self.visibility().last_player(), input, transcript, randomness);
        Ok(match &self.output {
            OutputRule::Constant { value } => *value,
            OutputRule::LastBit => *transcript.bits.last().ok_or_else(|| Error::Protocol("empty transcript".into()))?,
            OutputRule::ClassLookup { turn, table, params } => {
                let class = turn.map_or(0, |t| transcript.message(t)) as usize;
                let xs = view.all_xs()?;
                let mut scratch = vec![0u64; (params.k * params.r) as usize];
                let v = params.gip_indices(&xs, &mut scratch) as usize;
                let row = table.get(class).ok_or_else(|| Error::Protocol(format!("class {class} has no row")))?;
                row[v]
            }
            OutputRule::ParityMatch { turn, reps, width, params } => {
                let xs = view.all_xs()?;
                let mut scratch = vec![0u64; (params.k * params.r) as usize];
                let s = params.gip_indices(&xs, &mut scratch);
                let expected = masks(view.randomness, *reps, *width)
                    .iter()
                    .fold(0, |acc, &w| acc << 1 | ((s & w).count_ones() as u64 & 1));
                expected == transcript.message(*turn)
            }
            OutputRule::Disj3Revealed { positions } => {
                let (x, y) = (view.x(0)?, view.x(1)?);
                positions
                    .iter()
                    .enumerate()
                    .all(|(i, &p)| !(transcript.bits[i] && x >> p & 1 == 1 && y >> p & 1 == 1))
            }
            OutputRule::Table { entries } => {
                let xs = view.all_xs()?;
                let key = self.domain.x_tuple_index(&xs) << self.cost() | transcript.value();
                entries[key as usize]
            }
        })
    }

    /// Runs every turn in order and returns the transcript and output bit.
    pub fn simulate(&self, input: &NofInput, randomness: Option<&[bool]>) -> Result<(Transcript, bool)> {
        self.domain.check_input(input)?;
        let randomness = match (self.is_randomized(), randomness) {
            (false, None) => &[][..],
            (false, Some(_)) => return Err(Error::Protocol("deterministic protocol given randomness".into())),
            (true, None) => return Err(Error::Protocol(format!("{} needs {} random bits", self.name, self.public_random_bits))),
            (true, Some(r)) if r.len() != self.public_random_bits as usize => {
                return Err(Error::LengthMismatch(r.len(), self.public_random_bits as usize))
            }
            (true, Some(r)) => r,
        };
        let mut transcript = Transcript::default();
        for t in 0..self.turns.len() {
            let msg = self.turn_message(t, input, &transcript, randomness)?;
            transcript.push(msg, self.turns[t].msg_bits);
        }
        let out = self.output_bit(input, &transcript, randomness)?;
        Ok((transcript, out))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("protocols serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let p: Protocol = serde_json::from_str(s).map_err(|e| Error::Protocol(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }
}

/// Splits randomness into `reps` big-endian masks of `width` bits.
fn masks(randomness: &[bool], reps: u32, width: u32) -> Vec<u64> {
    randomness
        .chunks(width as usize)
        .take(reps as usize)
        .map(|c| c.iter().fold(0, |acc, &b| acc << 1 | b as u64))
        .collect()
}

pub(crate) fn view_key_space(domain: &NofDomain, speaker: usize, prior_bits: u32) -> Option<u64> {
    let k = domain.k();
    let mut size = 1u64;
    for (j, &n) in domain.x_sizes.iter().enumerate() {
        if j != speaker {
            size = size.checked_mul(n)?;
        }
    }
    if speaker != k {
        size = size.checked_mul(domain.z_size)?;
    }
    size.checked_mul(1u64.checked_shl(prior_bits)?)
}

/// Mixed-radix key: visible x's (ascending, lowest fastest), then `z` when visible, then the prior transcript.
pub(crate) fn view_key(domain: &NofDomain, speaker: usize, input: &NofInput, prior: u64) -> u64 {
    let k = domain.k();
    let mut key = prior;
    if speaker != k {
        key = key * domain.z_size + input.z;
    }
    for j in (0..k).rev() {
        if j != speaker {
            key = key * domain.x_sizes[j] + input.xs[j];
        }
    }
    key
}

/// Bits used to write one of `count` distinct messages.
pub(crate) fn width_for(count: u64) -> u32 {
    ceil_log2(count)
}

#[cfg(test)]
mod tests;
