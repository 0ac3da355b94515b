//! Built-in protocols: the lifting upper bound, randomized EQ, two-round index,
//! and small protocols for three-party disjointness.

use super::occ::row_classes;
use super::random::exact_error_on_input;
use super::{width_for, Disj3Target, NofDomain, NofInput, NofTarget, OutputRule, Protocol, Rule, Turn};
use crate::field::ceil_log2;
use crate::functions::{ind_index_bits, make_two_party, LiftedFn, Params, PlayerInput, TwoPartyFn, TwoPartyKind};
use crate::{Error, Result};

fn lifted_domain(params: &Params) -> Result<NofDomain> {
    let n = params.player_domain_checked()?;
    Ok(NofDomain { x_sizes: vec![n; params.k as usize], z_size: params.q.get() })
}

/// Player 1 announces the class of `z` among the distinct rows of `M(f)`;
/// the last player computes `v = GIP(x)` and reads the matrix entry.
pub fn build_lift_upper(f: &TwoPartyFn, params: Params) -> Result<Protocol> {
    let lf = LiftedFn::new(f.clone(), params)?;
    let classes = row_classes(&lf.base);
    let bits = width_for(classes.count() as u64);
    let table: Vec<Vec<bool>> = classes.representatives.iter().map(|&z| lf.base.row(z).to_vec()).collect();
    let (turns, turn) = if bits == 0 {
        (vec![], None)
    } else {
        (vec![Turn { speaker: 0, msg_bits: bits, rule: Rule::ZRowClass { classes: classes.class_of } }], Some(0))
    };
    Protocol::new(
        format!("lift-upper[{}]", lf.name()),
        lifted_domain(&params)?,
        turns,
        OutputRule::ClassLookup { turn, table, params },
        0,
    )
}

/// Public-coin EQ∘GIP: `t` parities of `z` against shared masks; the last
/// player accepts iff `GIP(x)` has the same parities.
pub fn build_eq_rand(params: Params, t: u32) -> Result<Protocol> {
    if t == 0 {
        return Err(Error::InvalidParams("need at least one repetition".into()));
    }
    let width = ceil_log2(params.q.get()).max(1);
    if t > 63 || t * width > 4096 {
        return Err(Error::InvalidParams(format!("t = {t} repetitions not supported")));
    }
    Protocol::new(
        format!("eq-rand[t={t}]{params}"),
        lifted_domain(&params)?,
        vec![Turn { speaker: 0, msg_bits: t, rule: Rule::ZParity { reps: t, width } }],
        OutputRule::ParityMatch { turn: 0, reps: t, width, params },
        t * width,
    )
}

/// Exact error of [`build_eq_rand`] on an input with `z = z_value` and
/// `GIP(x) = gip_value`, over every choice of the public masks.
pub fn eq_rand_exact_error(params: Params, t: u32, z_value: u64, gip_value: u64) -> Result<f64> {
    let q = params.q.get();
    if z_value >= q || gip_value >= q {
        return Err(Error::OutOfRange { value: z_value.max(gip_value), bound: q });
    }
    let p = build_eq_rand(params, t)?;
    let r = params.r as usize;
    let mut first = vec![0u64; r];
    first[0] = gip_value;
    let mut xs = vec![params.encode(&PlayerInput::new(first))?];
    let mut unit = vec![0u64; r];
    unit[0] = 1;
    let unit = params.encode(&PlayerInput::new(unit))?;
    xs.extend(std::iter::repeat_n(unit, params.k as usize - 1));
    let lf = LiftedFn::new(make_two_party(TwoPartyKind::Eq, q as usize, None)?, params)?;
    let (errors, total) = exact_error_on_input(&p, &lf, &NofInput { xs, z: z_value })?;
    Ok(errors as f64 / total as f64)
}

/// Round 1: the last player announces the index position of `GIP(x)`.
/// Round 2: player 1 announces that bit of `z`, which is the output.
pub fn build_ind_two_round(params: Params) -> Result<Protocol> {
    let q = params.q.get();
    if q < 3 {
        return Err(Error::InvalidParams(format!("two-round index protocol needs q >= 3, got {q}")));
    }
    let k = params.k as usize;
    Protocol::new(
        format!("ind-two-round{params}"),
        lifted_domain(&params)?,
        vec![
            Turn { speaker: k, msg_bits: ind_index_bits(q), rule: Rule::GipIndex { params } },
            Turn { speaker: 0, msg_bits: 1, rule: Rule::ZBitAtIndex { index_turn: 0, width: ceil_log2(q) } },
        ],
        OutputRule::LastBit,
        0,
    )
}

/// Player 1 writes all of `z`.
pub fn broadcast_z(domain: NofDomain, output: OutputRule) -> Result<Protocol> {
    let bits = width_for(domain.z_size);
    Protocol::new("broadcast-z", domain, vec![Turn { speaker: 0, msg_bits: bits, rule: Rule::SendZ }], output, 0)
}

/// No communication, fixed output.
pub fn constant_protocol(domain: NofDomain, value: bool) -> Result<Protocol> {
    Protocol::new(format!("constant-{}", value as u8), domain, vec![], OutputRule::Constant { value }, 0)
}

fn disj3_domain(n: usize) -> Result<NofDomain> {
    Ok(Disj3Target::new(n)?.domain())
}

/// Correct protocol for DISJ₃: player 1 writes every bit of `z`.
pub fn disj3_broadcast_all(n: usize) -> Result<Protocol> {
    let positions: Vec<u32> = (0..n as u32).collect();
    Protocol::new(
        "disj3-broadcast-all",
        disj3_domain(n)?,
        vec![Turn { speaker: 0, msg_bits: n as u32, rule: Rule::ZBits { positions: positions.clone() } }],
        OutputRule::Disj3Revealed { positions },
        0,
    )
}

/// Five cheap (at most 3 bits) and therefore incorrect DISJ₃ protocols, `n >= 4`.
pub fn disj3_low_cost_protocols(n: usize) -> Result<Vec<Protocol>> {
    if n < 4 {
        return Err(Error::InvalidParams(format!("need n >= 4, got {n}")));
    }
    let d = disj3_domain(n)?;
    let zbits = |speaker, positions: Vec<u32>| Turn { speaker, msg_bits: positions.len() as u32, rule: Rule::ZBits { positions } };
    Ok(vec![
        Protocol::new(
            "a-sends-z1z2",
            d.clone(),
            vec![zbits(0, vec![0, 1])],
            OutputRule::Disj3Revealed { positions: vec![0, 1] },
            0,
        )?,
        Protocol::new(
            "a-z1-b-z2",
            d.clone(),
            vec![zbits(0, vec![0]), zbits(1, vec![1])],
            OutputRule::Disj3Revealed { positions: vec![0, 1] },
            0,
        )?,
        Protocol::new(
            "a-z123",
            d.clone(),
            vec![zbits(0, vec![0, 1, 2])],
            OutputRule::Disj3Revealed { positions: vec![0, 1, 2] },
            0,
        )?,
        Protocol::new(
            "a-z1-b-parity",
            d.clone(),
            vec![zbits(0, vec![0]), Turn { speaker: 1, msg_bits: 1, rule: Rule::ParityZAnd { with: 0 } }],
            OutputRule::Disj3Revealed { positions: vec![0] },
            0,
        )?,
        Protocol::new(
            "a-prefix-b-parity",
            d,
            vec![
                Turn { speaker: 0, msg_bits: 1, rule: Rule::DisjPrefix { with: 1, len: 3 } },
                Turn { speaker: 1, msg_bits: 1, rule: Rule::ParityZAnd { with: 0 } },
            ],
            OutputRule::Constant { value: true },
            0,
        )?,
    ])
}
