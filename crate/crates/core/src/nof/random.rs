use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{NofInput, NofTarget, Protocol};
use crate::par::{chunk_count, chunk_range, map_chunks};
use crate::{Error, Result};

const SHARD: u64 = 4096;
/// Rejection attempts allowed per accepted sample.
const ATTEMPTS_PER_SAMPLE: u64 = 1000;
const MAX_EXACT_RANDOM_BITS: u32 = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InstanceFilter {
    Yes,
    No,
    All,
}

impl InstanceFilter {
    fn accepts(self, value: bool) -> bool {
        match self {
            InstanceFilter::Yes => value,
            InstanceFilter::No => !value,
            InstanceFilter::All => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorEstimate {
    pub error_rate: f64,
    pub stderr: f64,
    pub samples: u64,
    pub errors: u64,
    pub attempts: u64,
}

/// Monte Carlo error of a public-coin protocol over uniform inputs passing `filter`.
///
/// Samples are split into fixed shards; shard `s` draws from ChaCha8 seeded
/// with `seed` on stream `s`, so the estimate is independent of thread count.
pub fn estimate_rand_error(
    p: &Protocol,
    target: &dyn NofTarget,
    samples: u64,
    seed: u64,
    filter: InstanceFilter,
) -> Result<ErrorEstimate> {
    if samples == 0 {
        return Err(Error::InvalidParams("need at least one sample".into()));
    }
    if p.domain != target.domain() {
        return Err(Error::Protocol(format!("{} is not defined on the domain of {}", p.name, target.describe())));
    }
    let domain = &p.domain;
    let shards = map_chunks(chunk_count(samples, SHARD), |s| -> Result<(u64, u64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(s);
        let mut errors = 0;
        let mut attempts = 0;
        let mut randomness = vec![false; p.public_random_bits as usize];
        let range = chunk_range(samples, SHARD, s);
        let budget = ATTEMPTS_PER_SAMPLE * (range.end - range.start);
        for _ in range {
            let input = loop {
                if attempts >= budget {
                    return Err(Error::BudgetExhausted(format!("filter {filter:?} matched too few inputs")));
                }
                attempts += 1;
                let xs: Vec<u64> = domain.x_sizes.iter().map(|&n| rng.random_range(0..n)).collect();
                let z = rng.random_range(0..domain.z_size);
                if filter.accepts(target.eval(&xs, z)) {
                    break NofInput { xs, z };
                }
            };
            randomness.iter_mut().for_each(|b| *b = rng.random());
            let r = p.is_randomized().then_some(&randomness[..]);
            let (_, out) = p.simulate(&input, r)?;
            if out != target.eval(&input.xs, input.z) {
                errors += 1;
            }
        }
        Ok((errors, attempts))
    });
    let (mut errors, mut attempts) = (0, 0);
    for s in shards {
        let (e, a) = s?;
        errors += e;
        attempts += a;
    }
    let rate = errors as f64 / samples as f64;
    Ok(ErrorEstimate {
        error_rate: rate,
        stderr: (rate * (1.0 - rate) / samples as f64).sqrt(),
        samples,
        errors,
        attempts,
    })
}

/// Counts wrong outputs on one input over every public random string.
pub fn exact_error_on_input(p: &Protocol, target: &dyn NofTarget, input: &NofInput) -> Result<(u64, u64)> {
    if p.public_random_bits > MAX_EXACT_RANDOM_BITS {
        return Err(Error::DomainTooLarge(1u128 << p.public_random_bits));
    }
    p.domain.check_input(input)?;
    let want = target.eval(&input.xs, input.z);
    let total = 1u64 << p.public_random_bits;
    let bits = p.public_random_bits as usize;
    let mut errors = 0;
    for r in 0..total {
        let randomness: Vec<bool> = (0..bits).map(|i| r >> (bits - 1 - i) & 1 == 1).collect();
        let rr = p.is_randomized().then_some(&randomness[..]);
        if p.simulate(input, rr)?.1 != want {
            errors += 1;
        }
    }
    Ok((errors, total))
}
