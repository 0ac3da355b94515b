//! Density increments on combinatorial rectangles and the three-party
//! disjointness attack.
//!
//! A rectangle over a coordinate set `I` is `X × Y` with `X, Y ⊆ {0,1}^I`,
//! stored as membership arrays indexed by `|I|`-bit masks: bit `p` of a mask
//! is the `p`-th coordinate of `I` in ascending order. `D₀` is the set of
//! disjoint pairs and `D_ℓ` the pairs meeting exactly in `ℓ`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::combinatorics::{graph_from_protocol, hd_witnesses, HdWitness};
use crate::nof::{Disj3Target, NofInput, NofTarget, Protocol, SeparationWitness, Transcript};
use crate::{Error, Result};

/// Largest `|I|` handled by the rectangle operations.
pub const MAX_COORDS: usize = 20;
/// Largest `n` accepted by [`disj3_attack`].
pub const MAX_ATTACK_N: usize = 10;
/// Candidate `(z₀, z₁)` pairs tried by [`disj3_attack`].
pub const MAX_PAIRS: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoordSet(Vec<usize>);

impl CoordSet {
    pub fn new(mut coords: Vec<usize>) -> Self {
        coords.sort_unstable();
        coords.dedup();
        Self(coords)
    }

    /// `{0, …, n−1}`
    pub fn full(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn position(&self, i: usize) -> Option<usize> {
        self.0.binary_search(&i).ok()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.position(i).is_some()
    }

    fn without(&self, i: usize) -> Self {
        Self(self.0.iter().copied().filter(|&c| c != i).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    X,
    Y,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rectangle {
    pub coords: CoordSet,
    pub x: Vec<bool>,
    pub y: Vec<bool>,
}

impl Rectangle {
    pub fn new(coords: CoordSet, x: Vec<bool>, y: Vec<bool>) -> Result<Self> {
        if coords.len() > MAX_COORDS {
            return Err(Error::InvalidParams(format!("{} coordinates exceed {MAX_COORDS}", coords.len())));
        }
        let size = 1usize << coords.len();
        if x.len() != size {
            return Err(Error::LengthMismatch(x.len(), size));
        }
        if y.len() != size {
            return Err(Error::LengthMismatch(y.len(), size));
        }
        Ok(Self { coords, x, y })
    }

    pub fn full(n: usize) -> Result<Self> {
        Self::new(CoordSet::full(n), vec![true; 1 << n], vec![true; 1 << n])
    }

    /// Rectangle over `{0..n}` from member masks.
    pub fn from_members(n: usize, xs: &[u64], ys: &[u64]) -> Result<Self> {
        let mut x = vec![false; 1 << n];
        let mut y = vec![false; 1 << n];
        for (set, members) in [(&mut x, xs), (&mut y, ys)] {
            for &m in members {
                *set.get_mut(m as usize).ok_or(Error::OutOfRange { value: m, bound: 1 << n })? = true;
            }
        }
        Self::new(CoordSet::full(n), x, y)
    }

    /// Parses `X` and `Y` given as strings over `I` (character `p` is coordinate `p` of `I`).
    pub fn from_strings(coords: CoordSet, xs: &[&str], ys: &[&str]) -> Result<Self> {
        let m = coords.len();
        let parse = |s: &str| -> Result<usize> {
            if s.len() != m {
                return Err(Error::LengthMismatch(s.len(), m));
            }
            s.chars().enumerate().try_fold(0usize, |acc, (p, c)| match c {
                '0' => Ok(acc),
                '1' => Ok(acc | 1 << p),
                _ => Err(Error::InvalidParams(format!("bad bit {c:?} in {s:?}"))),
            })
        };
        let mut x = vec![false; 1 << m];
        let mut y = vec![false; 1 << m];
        for s in xs {
            x[parse(s)?] = true;
        }
        for s in ys {
            y[parse(s)?] = true;
        }
        Self::new(coords, x, y)
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    fn mask(&self) -> usize {
        (1usize << self.dim()) - 1
    }

    fn pos(&self, i: usize) -> Result<usize> {
        self.coords
            .position(i)
            .ok_or_else(|| Error::InvalidParams(format!("coordinate {i} not in the rectangle's coordinate set")))
    }

    pub fn x_members(&self) -> impl Iterator<Item = usize> + '_ {
        self.x.iter().enumerate().filter(|(_, &b)| b).map(|(m, _)| m)
    }

    pub fn y_members(&self) -> impl Iterator<Item = usize> + '_ {
        self.y.iter().enumerate().filter(|(_, &b)| b).map(|(m, _)| m)
    }
}

/// Sum over subsets: `out[s] = #{t ⊆ s : set[t]}`.
fn subset_counts(set: &[bool], dim: usize) -> Vec<u64> {
    let mut f: Vec<u64> = set.iter().map(|&b| b as u64).collect();
    for bit in 0..dim {
        for s in 0..f.len() {
            if s >> bit & 1 == 1 {
                f[s] += f[s ^ 1 << bit];
            }
        }
    }
    f
}

/// `|R ∩ D₀|`
pub fn d0_count(r: &Rectangle) -> u64 {
    let below = subset_counts(&r.y, r.dim());
    r.x_members().map(|x| below[!x & r.mask()]).sum()
}

/// `|R ∩ D_i|` for coordinate `i`.
pub fn d_count(r: &Rectangle, i: usize) -> Result<u64> {
    let p = r.pos(i)?;
    let bit = 1usize << p;
    let shifted: Vec<bool> = (0..r.y.len()).map(|s| s & bit == 0 && r.y[s | bit]).collect();
    let below = subset_counts(&shifted, r.dim());
    Ok(r.x_members().filter(|&x| x & bit != 0).map(|x| below[!x & r.mask()]).sum())
}

pub fn meets_d(r: &Rectangle, i: usize) -> Result<bool> {
    Ok(d_count(r, i)? > 0)
}

/// `log₂(|R ∩ D₀| / 3^{|I|})`, or `−∞` when the intersection is empty.
pub fn density_value(r: &Rectangle) -> f64 {
    match d0_count(r) {
        0 => f64::NEG_INFINITY,
        c => (c as f64).log2() - r.dim() as f64 * 3f64.log2(),
    }
}

fn insert_bit(s: usize, p: usize, b: usize) -> usize {
    let low = s & ((1 << p) - 1);
    (s >> p) << (p + 1) | b << p | low
}

/// Drops coordinate `i`; side `side` keeps only strings with bit `i` equal to 0.
pub fn projection(r: &Rectangle, i: usize, side: Side) -> Result<Rectangle> {
    let p = r.pos(i)?;
    let size = 1usize << (r.dim() - 1);
    let zero_only = |set: &[bool]| (0..size).map(|s| set[insert_bit(s, p, 0)]).collect::<Vec<_>>();
    let either = |set: &[bool]| (0..size).map(|s| set[insert_bit(s, p, 0)] || set[insert_bit(s, p, 1)]).collect::<Vec<_>>();
    let (x, y) = match side {
        Side::X => (zero_only(&r.x), either(&r.y)),
        Side::Y => (either(&r.x), zero_only(&r.y)),
    };
    Rectangle::new(r.coords.without(i), x, y)
}

/// Number of pairs in `R ∩ D₀` restricting to `(x', y')` off coordinate `i`.
pub fn ext_size(r: &Rectangle, i: usize, xp: usize, yp: usize) -> Result<u32> {
    let p = r.pos(i)?;
    if xp & yp != 0 {
        return Ok(0);
    }
    Ok([(0, 0), (0, 1), (1, 0)]
        .iter()
        .filter(|&&(a, b)| r.x[insert_bit(xp, p, a)] && r.y[insert_bit(yp, p, b)])
        .count() as u32)
}

/// Projects on the side with the larger density (ties go to `X`).
///
/// Requires `R ∩ D_i = ∅` and `R ∩ D₀ ≠ ∅`; the increment is checked to be
/// at least `log₂(3/2)`.
pub fn project_best_side(r: &Rectangle, i: usize) -> Result<(Rectangle, Side, f64)> {
    if meets_d(r, i)? {
        return Err(Error::Precondition(format!("rectangle meets D_{i}")));
    }
    let before = density_value(r);
    if before == f64::NEG_INFINITY {
        return Err(Error::Precondition("rectangle misses D_0".into()));
    }
    let px = projection(r, i, Side::X)?;
    let py = projection(r, i, Side::Y)?;
    let (dx, dy) = (density_value(&px), density_value(&py));
    let (best, side, after) = if dx >= dy { (px, Side::X, dx) } else { (py, Side::Y, dy) };
    let increment = after - before;
    if increment < 0.5 || increment < 1.5f64.log2() - 1e-9 {
        return Err(Error::CheckFailed(format!("density increment {increment} on coordinate {i}")));
    }
    Ok((best, side, increment))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityState {
    pub current: Rectangle,
    pub projected: Vec<(usize, Side)>,
    pub density_trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportResult {
    pub support: CoordSet,
    /// Measured deficiency `−E(R)`.
    pub c: f64,
    pub size_bound_ok: bool,
    /// Every `ℓ` in the support has `R ∩ D_ℓ ≠ ∅` in the original rectangle.
    pub verified: bool,
    pub ext_checked: u64,
    pub ext_violations: u64,
    pub state: DensityState,
}

/// Projects away violating coordinates (smallest first) until the rectangle
/// meets every remaining `D_i`.
pub fn extract_support(r: &Rectangle, c_budget: f64) -> Result<SupportResult> {
    let e0 = density_value(r);
    if e0 == f64::NEG_INFINITY {
        return Err(Error::Precondition("rectangle misses D_0".into()));
    }
    let c = (-e0).max(0.0);
    if c > c_budget + 1e-9 {
        return Err(Error::Precondition(format!("deficiency {c:.6} exceeds budget {c_budget}")));
    }
    let n = r.dim();
    let mut state = DensityState { current: r.clone(), projected: vec![], density_trace: vec![e0] };
    let (mut ext_checked, mut ext_violations) = (0u64, 0u64);
    loop {
        let mut violating = None;
        for &i in state.current.coords.as_slice() {
            if !meets_d(&state.current, i)? {
                violating = Some(i);
                break;
            }
        }
        let Some(i) = violating else { break };
        let cur = &state.current;
        let size = 1usize << (cur.dim() - 1);
        for xp in 0..size {
            for yp in (0..size).filter(|yp| xp & yp == 0) {
                ext_checked += 1;
                if ext_size(cur, i, xp, yp)? > 2 {
                    ext_violations += 1;
                }
            }
        }
        let (next, side, _) = project_best_side(cur, i)?;
        state.density_trace.push(density_value(&next));
        state.projected.push((i, side));
        state.current = next;
    }
    let support = state.current.coords.clone();
    let hit = coordinates_hit(r);
    let verified = support.as_slice().iter().all(|&l| hit[r.pos(l).expect("support ⊆ I")]);
    Ok(SupportResult {
        size_bound_ok: support.len() as f64 >= n as f64 - 2.0 * c - 1e-9,
        support,
        c,
        verified,
        ext_checked,
        ext_violations,
        state,
    })
}

/// `hit[p]` iff some `(x, y) ∈ R` has `x ∧ y` equal to the unit vector at position `p`, by direct scan.
fn coordinates_hit(r: &Rectangle) -> Vec<bool> {
    let mut hit = vec![false; r.dim()];
    let ys: Vec<usize> = r.y_members().collect();
    for x in r.x_members() {
        for &y in &ys {
            let m = x & y;
            if m.is_power_of_two() {
                hit[m.trailing_zeros() as usize] = true;
            }
        }
    }
    hit
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackOutcome {
    pub witness: Option<SeparationWitness>,
    /// Why no witness was produced.
    pub reason: Option<String>,
    pub transcript: Option<Transcript>,
    /// `|{(x, y, z) : transcript matches, x ∧ y = 0}|` for the chosen transcript.
    pub class_size: u64,
    /// The last candidate pair tried.
    pub pair: Option<HdWitness>,
    pub pairs_tried: usize,
    pub c: Option<f64>,
    pub support: Option<CoordSet>,
    pub coordinate: Option<usize>,
}

impl AttackOutcome {
    fn stop(mut self, reason: impl Into<String>) -> Self {
        self.reason = Some(reason.into());
        self
    }
}

/// Searches a one-way DISJ₃ protocol for two inputs it cannot separate.
///
/// Player 1 holds `x`, player 2 holds `y` and the last player holds `z`.
/// The transcript class with the most disjoint `(x, y)` is turned into a
/// graph between `z` and disjoint pairs; two far-apart `z₀, z₁` with many
/// common neighbours span a rectangle of pairs consistent with both, and a
/// coordinate `j` where they differ that survives support extraction gives
/// `x ∧ y = e_j`, on which DISJ₃ separates `z₀` from `z₁`. Qualifying pairs
/// are tried in lexicographic order, at most [`MAX_PAIRS`] of them.
pub fn disj3_attack(p: &Protocol, n: usize, delta: f64) -> Result<AttackOutcome> {
    if n > MAX_ATTACK_N {
        return Err(Error::InvalidParams(format!("n = {n} exceeds {MAX_ATTACK_N}")));
    }
    let target = Disj3Target::new(n)?;
    if p.domain != target.domain() {
        return Err(Error::Protocol(format!("{} is not a protocol for DISJ3 on {n} bits", p.name)));
    }
    if !p.is_one_way() || p.is_randomized() {
        return Err(Error::Precondition(format!("{} is not a deterministic one-way protocol", p.name)));
    }
    let mut out = AttackOutcome {
        witness: None,
        reason: None,
        transcript: None,
        class_size: 0,
        pair: None,
        pairs_tried: 0,
        c: None,
        support: None,
        coordinate: None,
    };

    let size = 1u64 << n;
    let disjoint = |xs: &[u64]| xs[0] & xs[1] == 0;
    let mut classes: BTreeMap<Vec<bool>, (Transcript, u64)> = BTreeMap::new();
    for x in 0..size {
        for y in (0..size).filter(|y| x & y == 0) {
            for z in 0..size {
                let (t, _) = p.simulate(&NofInput { xs: vec![x, y], z }, None)?;
                classes.entry(t.bits.clone()).or_insert((t, 0)).1 += 1;
            }
        }
    }
    let (transcript, class_size) = classes
        .into_values()
        .fold(None::<(Transcript, u64)>, |best, (t, c)| match best {
            Some((_, bc)) if bc >= c => best,
            _ => Some((t, c)),
        })
        .expect("D0 is never empty");
    out.transcript = Some(transcript.clone());
    out.class_size = class_size;

    let g = graph_from_protocol(p, &target, &transcript, Some(&disjoint))?;
    let pairs = hd_witnesses(&g, delta, MAX_PAIRS)?;
    if pairs.is_empty() {
        return Ok(out.stop("no far-apart pair with enough common neighbours"));
    }
    let mut last_reason = String::new();
    for pair in pairs {
        out.pairs_tried += 1;
        out.pair = Some(pair);
        match separate(p, &target, &transcript, pair)? {
            Ok((witness, c, support, j)) => {
                out.c = Some(c);
                out.support = Some(support);
                out.coordinate = Some(j);
                out.witness = Some(witness);
                return Ok(out);
            }
            Err((reason, c, support)) => {
                out.c = c;
                out.support = support;
                last_reason = reason;
            }
        }
    }
    Ok(out.stop(last_reason))
}

type Separation = std::result::Result<(SeparationWitness, f64, CoordSet, usize), (String, Option<f64>, Option<CoordSet>)>;

/// Steps after the pair `(z₀, z₁)` is fixed: the rectangle of pairs consistent
/// with both, its support, and a pair meeting exactly on a coordinate where
/// `z₀` and `z₁` differ.
fn separate(p: &Protocol, target: &Disj3Target, transcript: &Transcript, pair: HdWitness) -> Result<Separation> {
    let n = target.n;
    let size = 1u64 << n;
    let (z0, z1) = (pair.a, pair.b);
    let consistent = |speaker: usize, v: u64| -> Result<bool> {
        let Some(t) = p.turns.iter().position(|turn| turn.speaker == speaker) else {
            return Ok(true);
        };
        for z in [z0, z1] {
            let mut xs = vec![0, 0];
            xs[1 - speaker] = v;
            let input = NofInput { xs, z };
            if p.turn_message(t, &input, &transcript.prefix(t), &[])? != transcript.message(t) {
                return Ok(false);
            }
        }
        Ok(true)
    };
    // player 1 sees y, so its message constrains y; player 2's constrains x
    let x: Vec<bool> = (0..size).map(|v| consistent(1, v)).collect::<Result<_>>()?;
    let y: Vec<bool> = (0..size).map(|v| consistent(0, v)).collect::<Result<_>>()?;
    let rect = Rectangle::new(CoordSet::full(n), x, y)?;
    if d0_count(&rect) != pair.common {
        return Err(Error::CheckFailed("consistent pairs do not form the common neighbourhood".into()));
    }

    let c = (-density_value(&rect)).max(0.0);
    if n as f64 - 2.0 * c < 1.0 {
        return Ok(Err((format!("deficiency {c:.4} leaves n - 2c = {:.4} < 1", n as f64 - 2.0 * c), Some(c), None)));
    }
    let support = extract_support(&rect, c)?;
    if !support.verified || support.ext_violations > 0 {
        return Err(Error::CheckFailed("support extraction failed its own checks".into()));
    }
    let differ = z0 ^ z1;
    let Some(&j) = support.support.as_slice().iter().find(|&&j| differ >> j & 1 == 1) else {
        return Ok(Err(("no coordinate where z0 and z1 differ survives in the support".into(), Some(c), Some(support.support))));
    };

    let unit = 1usize << j;
    let ys: Vec<usize> = rect.y_members().collect();
    let (xw, yw) = rect
        .x_members()
        .find_map(|x| ys.iter().find(|&&y| x & y == unit).map(|&y| (x as u64, y as u64)))
        .ok_or_else(|| Error::CheckFailed(format!("support coordinate {j} has no pair meeting exactly there")))?;

    let xs = vec![xw, yw];
    let (t0, out0) = p.simulate(&NofInput { xs: xs.clone(), z: z0 }, None)?;
    let (t1, out1) = p.simulate(&NofInput { xs: xs.clone(), z: z1 }, None)?;
    let (v0, v1) = (target.eval(&xs, z0), target.eval(&xs, z1));
    if t0 != t1 || out0 != out1 || v0 == v1 {
        return Err(Error::CheckFailed("separation witness does not validate".into()));
    }
    let witness = SeparationWitness { xs, z0, z1, transcript: t0, value0: v0, value1: v1, output: out0 };
    Ok(Ok((witness, c, support.support, j)))
}
