//! Cylinder intersections, character sums and the GIP disperser property.
//!
//! A cylinder in direction `i` is a set of `k`-tuples whose membership does
//! not depend on `x_i`; it is stored as a predicate on the projection that
//! drops `x_i`. Small projections are dense tables; large ones are seeded
//! hash predicates, which are independent of `x_i` by construction.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::field::char_raw;
use crate::functions::{gip_value_distribution, Params};
use crate::par::{chunk_count, chunk_range, map_chunks};
use crate::{Error, Result, ENUMERATION_LIMIT};

/// Largest projection stored as a dense table.
pub const TABLE_LIMIT: u64 = 1 << 20;
const SHARD: u64 = 4096;
const EXACT_CHUNK: u64 = 1 << 14;
/// Draws allowed per accepted sample; densities below 1e-3 are out of scope.
const DRAWS_PER_ACCEPT: u64 = 1000;
const DENSITY_PROBE_SAMPLES: u64 = 1 << 16;
const GENERATOR_RETRIES: u64 = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Mc,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Membership {
    /// Indexed by the projected point.
    Table(Vec<bool>),
    /// Member iff `mix(seed, point) < threshold`.
    Hashed { seed: u64, threshold: u64 },
    Constant(bool),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cylinder {
    pub ignored: usize,
    pub membership: Membership,
}

impl Cylinder {
    pub fn full(ignored: usize) -> Self {
        Self { ignored, membership: Membership::Constant(true) }
    }

    pub fn empty(ignored: usize) -> Self {
        Self { ignored, membership: Membership::Constant(false) }
    }

    #[inline]
    pub fn holds(&self, projected: u64) -> bool {
        match &self.membership {
            Membership::Table(t) => t[projected as usize],
            Membership::Hashed { seed, threshold } => mix(*seed ^ mix(projected)) < *threshold,
            Membership::Constant(b) => *b,
        }
    }
}

/// splitmix64 finalizer.
#[inline]
fn mix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn derive_seed(seed: u64, tag: u64) -> u64 {
    mix(seed ^ mix(tag.wrapping_add(0x5151)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CylinderIntersection {
    pub params: Params,
    pub cylinders: Vec<Cylinder>,
}

impl CylinderIntersection {
    /// Cylinders are reordered by ignored coordinate; there must be one per player.
    pub fn new(params: Params, mut cylinders: Vec<Cylinder>) -> Result<Self> {
        let k = params.k as usize;
        cylinders.sort_by_key(|c| c.ignored);
        if cylinders.len() != k || cylinders.iter().enumerate().any(|(i, c)| c.ignored != i) {
            return Err(Error::InvalidParams(format!("need one cylinder per coordinate 0..{k}")));
        }
        let projected = projected_size(&params)?;
        for c in &cylinders {
            if let Membership::Table(t) = &c.membership {
                if t.len() as u64 != projected {
                    return Err(Error::LengthMismatch(t.len(), projected as usize));
                }
            }
        }
        Ok(Self { params, cylinders })
    }

    pub fn full(params: Params) -> Result<Self> {
        Self::new(params, (0..params.k as usize).map(Cylinder::full).collect())
    }

    pub fn k(&self) -> usize {
        self.cylinders.len()
    }

    /// Index of `xs` with coordinate `i` dropped, lowest coordinate least significant.
    #[inline]
    pub fn projected(&self, xs: &[u64], i: usize) -> u64 {
        let n = self.params.player_domain().expect("checked at construction");
        xs.iter()
            .enumerate()
            .rev()
            .filter(|&(j, _)| j != i)
            .fold(0u64, |acc, (_, &x)| acc * n + x)
    }

    #[inline]
    pub fn contains(&self, xs: &[u64]) -> bool {
        self.cylinders.iter().all(|c| c.holds(self.projected(xs, c.ignored)))
    }

    fn exact_total(&self) -> Result<u64> {
        let n = self.params.player_domain_checked()?;
        n.checked_pow(self.k() as u32)
            .filter(|&t| t <= ENUMERATION_LIMIT)
            .ok_or(Error::DomainTooLarge(n as u128))
    }

    /// Uniform draw from the product space; `false` if it misses the set.
    ///
    /// The last cylinder only depends on `x_0..x_{k-2}`, so it is tested before
    /// `x_{k-1}` is drawn.
    #[inline]
    fn draw(&self, rng: &mut ChaCha8Rng, n: u64, xs: &mut [u64]) -> bool {
        let k = xs.len();
        for x in xs[..k - 1].iter_mut() {
            *x = rng.random_range(0..n);
        }
        if !self.cylinders[k - 1].holds(self.projected(xs, k - 1)) {
            return false;
        }
        xs[k - 1] = rng.random_range(0..n);
        self.cylinders[..k - 1].iter().all(|c| c.holds(self.projected(xs, c.ignored)))
    }
}

fn projected_size(params: &Params) -> Result<u64> {
    let n = params.player_domain_checked()?;
    n.checked_pow(params.k - 1).ok_or(Error::DomainTooLarge(n as u128))
}

fn x_tuple(mut index: u64, n: u64, xs: &mut [u64]) {
    for x in xs.iter_mut() {
        *x = index % n;
        index /= n;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeEstimate {
    /// Exact member count (exact mode only).
    pub count: Option<u64>,
    pub density: f64,
    pub stderr: f64,
    pub samples: u64,
}

pub fn ci_size(s: &CylinderIntersection, mode: Mode, samples: u64, seed: u64) -> Result<SizeEstimate> {
    match mode {
        Mode::Exact => {
            let total = s.exact_total()?;
            let count = exact_value_counts(s)?.iter().sum::<u64>();
            Ok(SizeEstimate { count: Some(count), density: count as f64 / total as f64, stderr: 0.0, samples: total })
        }
        Mode::Mc => {
            if samples == 0 {
                return Err(Error::InvalidParams("need at least one sample".into()));
            }
            let n = s.params.player_domain_checked()?;
            let k = s.k();
            let hits: u64 = map_chunks(chunk_count(samples, SHARD), |c| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(c);
                let mut xs = vec![0u64; k];
                chunk_range(samples, SHARD, c).filter(|_| s.draw(&mut rng, n, &mut xs)).count() as u64
            })
            .into_iter()
            .sum();
            let p = hits as f64 / samples as f64;
            Ok(SizeEstimate { count: None, density: p, stderr: (p * (1.0 - p) / samples as f64).sqrt(), samples })
        }
    }
}

/// `count[v] = #{x ∈ S : GIP(x) = v}` by full enumeration.
pub fn exact_value_counts(s: &CylinderIntersection) -> Result<Vec<u64>> {
    let total = s.exact_total()?;
    let params = s.params;
    let n = params.player_domain_checked()?;
    let (q, k, r) = (params.q.get() as usize, s.k(), params.r as usize);
    let parts = map_chunks(chunk_count(total, EXACT_CHUNK), |c| {
        let mut counts = vec![0u64; q];
        let mut xs = vec![0u64; k];
        let mut scratch = vec![0u64; k * r];
        for idx in chunk_range(total, EXACT_CHUNK, c) {
            x_tuple(idx, n, &mut xs);
            if s.contains(&xs) {
                counts[params.gip_indices(&xs, &mut scratch) as usize] += 1;
            }
        }
        counts
    });
    let mut counts = vec![0u64; q];
    for part in parts {
        for (a, b) in counts.iter_mut().zip(part) {
            *a += b;
        }
    }
    Ok(counts)
}

/// Seeded random cylinder intersection of target density `density`.
///
/// Each cylinder keeps each projected point independently with probability
/// `density^(1/k)`. Attempts are regenerated from derived seeds until the
/// measured density (exact when enumerable, else a fixed Monte Carlo probe)
/// reaches `min_density`.
pub fn sample_ci_random(params: Params, density: f64, seed: u64, min_density: f64) -> Result<CylinderIntersection> {
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::InvalidParams(format!("density {density} outside (0, 1]")));
    }
    if density == 1.0 {
        return CylinderIntersection::full(params);
    }
    let k = params.k as usize;
    let projected = projected_size(&params)?;
    let bias = density.powf(1.0 / k as f64);
    let exact = params.player_domain().and_then(|n| n.checked_pow(k as u32)).is_some_and(|t| t <= ENUMERATION_LIMIT);
    let mut last = 0.0;
    for attempt in 0..GENERATOR_RETRIES {
        let attempt_seed = derive_seed(seed, attempt);
        let cylinders = (0..k)
            .map(|i| {
                let cyl_seed = derive_seed(attempt_seed, i as u64);
                let membership = if projected <= TABLE_LIMIT {
                    let mut rng = ChaCha8Rng::seed_from_u64(cyl_seed);
                    Membership::Table((0..projected).map(|_| rng.random_bool(bias)).collect())
                } else {
                    Membership::Hashed { seed: cyl_seed, threshold: (bias * 2f64.powi(64)).min(u64::MAX as f64) as u64 }
                };
                Cylinder { ignored: i, membership }
            })
            .collect();
        let ci = CylinderIntersection::new(params, cylinders)?;
        let measured = if exact {
            ci_size(&ci, Mode::Exact, 0, 0)?.density
        } else {
            ci_size(&ci, Mode::Mc, DENSITY_PROBE_SAMPLES, derive_seed(attempt_seed, u64::MAX))?.density
        };
        if measured >= min_density {
            return Ok(ci);
        }
        last = measured;
    }
    Err(Error::BudgetExhausted(format!(
        "no intersection of density >= {min_density} in {GENERATOR_RETRIES} attempts (last {last:.4})"
    )))
}

/// Conditional distribution of GIP on a cylinder intersection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GipOnCi {
    pub mode: Mode,
    pub probs: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Members counted (exact) or accepted samples (mc).
    pub accepted: u64,
    /// Points enumerated (exact) or product-space draws (mc).
    pub drawn: u64,
    pub density: f64,
}

/// `Pr[GIP = v | S]` for every `v`. Monte Carlo mode samples `S` uniformly by
/// rejection from the product space until `samples` points are accepted.
pub fn gip_distribution_on_ci(s: &CylinderIntersection, mode: Mode, samples: u64, seed: u64) -> Result<GipOnCi> {
    let q = s.params.q.get() as usize;
    let (counts, accepted, drawn) = match mode {
        Mode::Exact => {
            let counts = exact_value_counts(s)?;
            let accepted: u64 = counts.iter().sum();
            (counts, accepted, s.exact_total()?)
        }
        Mode::Mc => {
            if samples == 0 {
                return Err(Error::InvalidParams("need at least one sample".into()));
            }
            let params = s.params;
            let n = params.player_domain_checked()?;
            let (k, r) = (s.k(), params.r as usize);
            let shards = map_chunks(chunk_count(samples, SHARD), |c| -> Result<(Vec<u64>, u64)> {
                let want = chunk_range(samples, SHARD, c).count() as u64;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(c);
                let mut xs = vec![0u64; k];
                let mut scratch = vec![0u64; k * r];
                let mut counts = vec![0u64; q];
                let (mut got, mut draws) = (0, 0);
                while got < want {
                    if draws >= want * DRAWS_PER_ACCEPT {
                        return Err(Error::BudgetExhausted(format!("{draws} draws for {got} members")));
                    }
                    draws += 1;
                    if s.draw(&mut rng, n, &mut xs) {
                        counts[params.gip_indices(&xs, &mut scratch) as usize] += 1;
                        got += 1;
                    }
                }
                Ok((counts, draws))
            });
            let mut counts = vec![0u64; q];
            let mut drawn = 0;
            for shard in shards {
                let (part, d) = shard?;
                drawn += d;
                for (a, b) in counts.iter_mut().zip(part) {
                    *a += b;
                }
            }
            (counts, samples, drawn)
        }
    };
    if accepted == 0 {
        return Err(Error::Precondition("empty cylinder intersection".into()));
    }
    let m = accepted as f64;
    let probs: Vec<f64> = counts.iter().map(|&c| c as f64 / m).collect();
    let stderr = match mode {
        Mode::Exact => vec![0.0; q],
        Mode::Mc => probs.iter().map(|p| (p * (1.0 - p) / m).sqrt()).collect(),
    };
    Ok(GipOnCi { mode, probs, stderr, accepted, drawn, density: accepted as f64 / drawn as f64 })
}

/// `(Pr[GIP = v | S], stderr)`.
pub fn prob_gip_on_ci(s: &CylinderIntersection, v: u64, mode: Mode, samples: u64, seed: u64) -> Result<(f64, f64)> {
    let q = s.params.q.get();
    if v >= q {
        return Err(Error::OutOfRange { value: v, bound: q });
    }
    let d = gip_distribution_on_ci(s, mode, samples, seed)?;
    Ok((d.probs[v as usize], d.stderr[v as usize]))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharSum {
    pub alpha: u64,
    /// `|Σ_{x∈S} χ_α(GIP(x))|`
    pub d: f64,
    /// `d / q^{rk}`
    pub gamma: f64,
}

/// Character sum over `S`, accumulated point by point.
pub fn char_sum_gamma(s: &CylinderIntersection, alpha: u64) -> Result<CharSum> {
    let params = s.params;
    let q = params.q.get();
    if alpha >= q {
        return Err(Error::OutOfRange { value: alpha, bound: q });
    }
    let total = s.exact_total()?;
    let n = params.player_domain_checked()?;
    let (k, r) = (s.k(), params.r as usize);
    let chi: Vec<Complex64> = (0..q).map(|v| char_raw(q, alpha, v)).collect();
    let sum: Complex64 = map_chunks(chunk_count(total, EXACT_CHUNK), |c| {
        let mut xs = vec![0u64; k];
        let mut scratch = vec![0u64; k * r];
        let mut acc = Complex64::new(0.0, 0.0);
        for idx in chunk_range(total, EXACT_CHUNK, c) {
            x_tuple(idx, n, &mut xs);
            if s.contains(&xs) {
                acc += chi[params.gip_indices(&xs, &mut scratch) as usize];
            }
        }
        acc
    })
    .into_iter()
    .sum();
    let d = sum.norm();
    Ok(CharSum { alpha, d, gamma: d / total as f64 })
}

/// All character sums of a set from its GIP value counts.
pub fn char_sums_from_counts(q: u64, counts: &[f64], total: f64) -> Vec<CharSum> {
    (0..q)
        .map(|alpha| {
            let s: Complex64 = counts.iter().enumerate().map(|(v, &c)| char_raw(q, alpha, v as u64) * c).sum();
            CharSum { alpha, d: s.norm(), gamma: s.norm() / total }
        })
        .collect()
}

/// Character sums over the whole product space from the closed-form value distribution.
pub fn char_sums_full_space(params: &Params) -> Result<Vec<CharSum>> {
    let dist = gip_value_distribution(params)?;
    let total: u128 = dist.iter().sum();
    let counts: Vec<f64> = dist.iter().map(|&c| c as f64).collect();
    Ok(char_sums_from_counts(params.q.get(), &counts, total as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VanishProb {
    /// `(1 − ((q−1)/q)^{2(k−1)})^r`
    pub exact: f64,
    /// `(2k/q)^r`
    pub bound: f64,
    /// Whether `1 − ((q−1)/q)^{2(k−1)} ≤ 2k/q`.
    pub per_coordinate_ok: bool,
}

/// Probability that every coordinate product over players `1..k` of `x` and `x'` vanishes.
pub fn vanish_prob(q: u64, r: u32, k: u32) -> Result<VanishProb> {
    if k < 2 || q < 2 {
        return Err(Error::InvalidParams(format!("need k >= 2 and q >= 2, got k = {k}, q = {q}")));
    }
    let qf = q as f64;
    let per = 1.0 - ((qf - 1.0) / qf).powi(2 * (k as i32 - 1));
    let bound = 2.0 * k as f64 / qf;
    let out = VanishProb { exact: per.powi(r as i32), bound: bound.powi(r as i32), per_coordinate_ok: per <= bound };
    debug_assert!(!out.per_coordinate_ok || out.exact <= out.bound * (1.0 + 1e-12));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainEntry {
    pub alpha: u64,
    pub d: f64,
    pub gamma: f64,
    /// `γ^{2^{k−1}}`
    pub gamma_power: f64,
    pub chain_ok: bool,
    /// `q^{rk}·(2k/q)^{r/2^{k−1}}`
    pub d_bound: f64,
    /// Asserted only when the `(2k/q)^r` bound dominates the exact vanishing probability.
    pub d_bound_ok: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub params: Params,
    pub density: f64,
    pub vanish: VanishProb,
    pub entries: Vec<ChainEntry>,
    pub passed: bool,
}

pub fn cs_chain_check(s: &CylinderIntersection) -> Result<ChainReport> {
    let params = s.params;
    let (q, r, k) = (params.q.get(), params.r, params.k);
    let total = s.exact_total()? as f64;
    let counts: Vec<f64> = exact_value_counts(s)?.into_iter().map(|c| c as f64).collect();
    let vanish = vanish_prob(q, r, k)?;
    let dominated = vanish.exact <= vanish.bound;
    let power = 1i32 << (k - 1);
    let d_bound = total * (2.0 * k as f64 / q as f64).powf(r as f64 / power as f64);
    let entries: Vec<ChainEntry> = char_sums_from_counts(q, &counts, total)
        .into_iter()
        .skip(1)
        .map(|c| {
            let gamma_power = c.gamma.powi(power);
            ChainEntry {
                alpha: c.alpha,
                d: c.d,
                gamma: c.gamma,
                gamma_power,
                chain_ok: gamma_power <= vanish.exact + 1e-9,
                d_bound,
                d_bound_ok: dominated.then_some(c.d <= d_bound + 1e-6),
            }
        })
        .collect();
    let passed = entries.iter().all(|e| e.chain_ok && e.d_bound_ok != Some(false));
    Ok(ChainReport { params, density: counts.iter().sum::<f64>() / total, vanish, entries, passed })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DisperserStatus {
    Passed,
    Failed,
    Vacuous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisperserReport {
    pub params: Params,
    pub mode: Mode,
    /// `1/q − q·(2k/q)^4`
    pub bound: f64,
    /// `1/q − (2k/q)^{r/2^{k−1}}/density`
    pub bound_density_form: f64,
    /// `"density_form"` or `"simplified"`, whichever bound is larger.
    pub tighter: String,
    pub density: f64,
    pub probs: Vec<f64>,
    pub stderr: Vec<f64>,
    pub min_prob: f64,
    pub accepted: u64,
    pub status: DisperserStatus,
}

/// `1/q − q·(2k/q)^4`.
pub fn disperser_bound(q: u64, k: u32) -> f64 {
    let qf = q as f64;
    1.0 / qf - qf * (2.0 * k as f64 / qf).powi(4)
}

/// Checks `Pr[GIP = v | S] ≥ 1/q − q·(2k/q)^4` for every `v`, with a
/// three-standard-error allowance in Monte Carlo mode.
pub fn disperser_check(s: &CylinderIntersection, mode: Mode, samples: u64, seed: u64) -> Result<DisperserReport> {
    let params = s.params;
    let (q, r, k) = (params.q.get(), params.r, params.k);
    let dist = gip_distribution_on_ci(s, mode, samples, seed)?;
    let qf = q as f64;
    if dist.density < 1.0 / qf {
        return Err(Error::Precondition(format!("density {:.6} below 1/q = {:.6}", dist.density, 1.0 / qf)));
    }
    let bound = disperser_bound(q, k);
    let bound_density_form =
        1.0 / qf - (2.0 * k as f64 / qf).powf(r as f64 / (1u64 << (k - 1)) as f64) / dist.density;
    let status = if bound <= 0.0 {
        DisperserStatus::Vacuous
    } else if dist.probs.iter().zip(&dist.stderr).all(|(p, se)| *p >= bound - 3.0 * se) {
        DisperserStatus::Passed
    } else {
        DisperserStatus::Failed
    };
    Ok(DisperserReport {
        params,
        mode,
        bound,
        bound_density_form,
        tighter: if bound_density_form > bound { "density_form" } else { "simplified" }.into(),
        density: dist.density,
        min_prob: dist.probs.iter().copied().fold(f64::INFINITY, f64::min),
        probs: dist.probs,
        stderr: dist.stderr,
        accepted: dist.accepted,
        status,
    })
}
