use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{NofInput, NofTarget, Protocol, Transcript};
use crate::fourier::{Cylinder, CylinderIntersection, Membership};
use crate::functions::LiftedFn;
use crate::par::{chunk_count, chunk_range, map_chunks};
use crate::{Error, Result};

const CHUNK: u64 = 1 << 14;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub correct: bool,
    pub max_cost: u32,
    pub counterexample: Option<NofInput>,
    pub inputs_checked: u64,
}

fn check_same_domain(p: &Protocol, target: &dyn NofTarget) -> Result<()> {
    if p.domain != target.domain() {
        return Err(Error::Protocol(format!("{} is not defined on the domain of {}", p.name, target.describe())));
    }
    Ok(())
}

fn require_deterministic(p: &Protocol) -> Result<()> {
    if p.is_randomized() {
        return Err(Error::Protocol(format!("{} is randomized; use the error estimators", p.name)));
    }
    Ok(())
}

/// Runs `p` on every input and compares with the target.
///
/// The counterexample reported is the first failing input in canonical order.
pub fn verify_protocol(p: &Protocol, target: &dyn NofTarget) -> Result<VerifyReport> {
    check_same_domain(p, target)?;
    require_deterministic(p)?;
    let total = p.domain.enumerable_default()?;
    let chunks = map_chunks(chunk_count(total, CHUNK), |c| -> Result<(Option<u64>, u32)> {
        let mut first_bad = None;
        let mut max_cost = 0;
        for i in chunk_range(total, CHUNK, c) {
            let input = p.domain.input_at(i);
            let (t, out) = p.simulate(&input, None)?;
            max_cost = max_cost.max(t.len() as u32);
            if first_bad.is_none() && out != target.eval(&input.xs, input.z) {
                first_bad = Some(i);
            }
        }
        Ok((first_bad, max_cost))
    });
    let mut first_bad = None;
    let mut max_cost = 0;
    for chunk in chunks {
        let (bad, cost) = chunk?;
        max_cost = max_cost.max(cost);
        if first_bad.is_none() {
            first_bad = bad;
        }
    }
    Ok(VerifyReport {
        correct: first_bad.is_none(),
        max_cost,
        counterexample: first_bad.map(|i| p.domain.input_at(i)),
        inputs_checked: total,
    })
}

/// All inputs on which `p` writes exactly `transcript`.
pub fn consistent_set(p: &Protocol, target: &dyn NofTarget, transcript: &Transcript) -> Result<Vec<NofInput>> {
    check_same_domain(p, target)?;
    require_deterministic(p)?;
    if transcript.len() != p.cost() as usize {
        return Err(Error::Protocol(format!(
            "no run of {} writes {} bits (every run writes {})",
            p.name,
            transcript.len(),
            p.cost()
        )));
    }
    let total = p.domain.enumerable_default()?;
    let chunks = map_chunks(chunk_count(total, CHUNK), |c| -> Result<Vec<NofInput>> {
        let mut out = Vec::new();
        for i in chunk_range(total, CHUNK, c) {
            let input = p.domain.input_at(i);
            if p.simulate(&input, None)?.0.bits == transcript.bits {
                out.push(input);
            }
        }
        Ok(out)
    });
    let mut set = Vec::new();
    for c in chunks {
        set.extend(c?);
    }
    Ok(set)
}

/// Groups every input index by the transcript it produces.
pub fn transcript_classes(p: &Protocol) -> Result<BTreeMap<Vec<bool>, Vec<u64>>> {
    require_deterministic(p)?;
    let total = p.domain.enumerable_default()?;
    let mut classes: BTreeMap<Vec<bool>, Vec<u64>> = BTreeMap::new();
    for i in 0..total {
        let (t, _) = p.simulate(&p.domain.input_at(i), None)?;
        classes.entry(t.bits).or_default().push(i);
    }
    Ok(classes)
}

/// Writes the z-slice of the transcript class as `k` cylinders.
///
/// Cylinder `i` holds the x-tuples on which player `i` writes its block of
/// `transcript` when the earlier blocks are as in `transcript`. The returned
/// flag is true iff every cylinder ignores `x_i` (checked by substituting every
/// value of `x_i`) and their intersection equals `{x : p(x, z) = transcript}`.
pub fn slice_cylinders(p: &Protocol, lf: &LiftedFn, transcript: &Transcript, z: u64) -> Result<(CylinderIntersection, bool)> {
    check_same_domain(p, lf)?;
    require_deterministic(p)?;
    if !p.is_one_way() {
        return Err(Error::Precondition(format!("{} is not one-way", p.name)));
    }
    if transcript.len() != p.cost() as usize {
        return Err(Error::Protocol(format!("transcript has {} bits, protocol writes {}", transcript.len(), p.cost())));
    }
    let domain = &p.domain;
    if z >= domain.z_size {
        return Err(Error::OutOfRange { value: z, bound: domain.z_size });
    }
    let k = domain.k();
    let n = domain.x_sizes[0];
    let x_total = domain.enumerable_default()? / domain.z_size;
    let projected = n.pow(k as u32 - 1);

    let emits = |t: usize, xs: &[u64]| -> Result<bool> {
        let input = NofInput { xs: xs.to_vec(), z };
        Ok(p.turn_message(t, &input, &transcript.prefix(t), &[])? == transcript.message(t))
    };

    let mut cylinders = Vec::with_capacity(k);
    let mut verified = true;
    for i in 0..k {
        let turn = p.turns.iter().position(|t| t.speaker == i);
        let Some(t) = turn else {
            cylinders.push(Cylinder { ignored: i, membership: Membership::Constant(true) });
            continue;
        };
        let mut table = Vec::with_capacity(projected as usize);
        for proj in 0..projected {
            let xs = unproject(proj, i, 0, n, k);
            table.push(emits(t, &xs)?);
        }
        // every value of the hidden coordinate must agree with the table
        'flip: for proj in 0..projected {
            for xi in 1..n {
                let xs = unproject(proj, i, xi, n, k);
                if emits(t, &xs)? != table[proj as usize] {
                    verified = false;
                    break 'flip;
                }
            }
        }
        cylinders.push(Cylinder { ignored: i, membership: Membership::Table(table) });
    }
    let ci = CylinderIntersection::new(lf.params, cylinders)?;
    for xi in 0..x_total {
        let xs = domain.x_tuple_at(xi);
        let in_slice = p.simulate(&NofInput { xs: xs.clone(), z }, None)?.0.bits == transcript.bits;
        if in_slice != ci.contains(&xs) {
            verified = false;
            break;
        }
    }
    if !verified {
        return Err(Error::CheckFailed(format!("z-slice of {} is not the expected cylinder intersection", p.name)));
    }
    Ok((ci, verified))
}

/// Inverse of the cylinder projection: inserts `xi` at position `i`.
fn unproject(mut proj: u64, i: usize, xi: u64, n: u64, k: usize) -> Vec<u64> {
    (0..k)
        .map(|j| {
            if j == i {
                xi
            } else {
                let v = proj % n;
                proj /= n;
                v
            }
        })
        .collect()
}
