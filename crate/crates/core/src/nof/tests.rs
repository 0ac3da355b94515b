use super::*;
use crate::functions::{make_two_party, LiftedFn, TwoPartyFn, TwoPartyKind};

fn lifted(kind: TwoPartyKind, q: u64, r: u32, k: u32) -> LiftedFn {
    let params = Params::new(q, r, k).unwrap();
    LiftedFn::new(make_two_party(kind, q as usize, None).unwrap(), params).unwrap()
}

fn eq(q: u64, r: u32, k: u32) -> LiftedFn {
    lifted(TwoPartyKind::Eq, q, r, k)
}

/// Player 1 writes `z`; the last player accepts iff `z = GIP(x)` (q = 2).
fn broadcast_eq(lf: &LiftedFn) -> Protocol {
    let table = vec![vec![true, false], vec![false, true]];
    broadcast_z(lf.domain(), OutputRule::ClassLookup { turn: Some(0), table, params: lf.params }).unwrap()
}

fn input(xs: &[u64], z: u64) -> NofInput {
    NofInput { xs: xs.to_vec(), z }
}

/// One-way table protocol at q=2, r=1, k=2: player 1 sends `x₂ ⊕ z`, player 2 sends `x₁ ∧ m₁`.
fn two_turn_tables(domain: &NofDomain) -> Protocol {
    let mut t0 = vec![0u64; view_key_space(domain, 0, 0).unwrap() as usize];
    let mut t1 = vec![0u64; view_key_space(domain, 1, 1).unwrap() as usize];
    for i in 0..domain.total().unwrap() {
        let inp = domain.input_at(i);
        let m0 = inp.xs[1] ^ inp.z;
        t0[view_key(domain, 0, &inp, 0) as usize] = m0;
        t1[view_key(domain, 1, &inp, m0) as usize] = inp.xs[0] & m0;
    }
    let out = vec![false; (domain.x_total().unwrap() << 2) as usize];
    Protocol::new(
        "two-turn",
        domain.clone(),
        vec![
            Turn { speaker: 0, msg_bits: 1, rule: Rule::Table { entries: t0 } },
            Turn { speaker: 1, msg_bits: 1, rule: Rule::Table { entries: t1 } },
        ],
        OutputRule::Table { entries: out },
        0,
    )
    .unwrap()
}

#[test]
fn simulate_examples() {
    let lf = eq(2, 1, 2);
    let p = broadcast_eq(&lf);
    let (t, _) = p.simulate(&input(&[1, 0], 0), None).unwrap();
    assert_eq!(t.to_string(), "0");
    let c = constant_protocol(lf.domain(), true).unwrap();
    let (t, out) = c.simulate(&input(&[1, 1], 1), None).unwrap();
    assert!(t.is_empty() && out);
    assert_eq!(t.to_string(), "ε");
    let rand = build_eq_rand(lf.params, 2).unwrap();
    assert!(rand.simulate(&input(&[0, 0], 0), None).is_err());
    assert!(rand.simulate(&input(&[0, 0], 0), Some(&[true])).is_err());
    assert!(p.simulate(&input(&[0, 0], 0), Some(&[true])).is_err());
    assert!(p.simulate(&input(&[2, 0], 0), None).is_err());
}

#[test]
fn verify_examples() {
    let lf = eq(2, 2, 2);
    let p = build_lift_upper(&lf.base, lf.params).unwrap();
    let rep = verify_protocol(&p, &lf).unwrap();
    assert!(rep.correct && rep.max_cost == 1 && rep.counterexample.is_none());
    assert_eq!(rep.inputs_checked, 32);

    let lf = eq(2, 1, 2);
    let rep = verify_protocol(&broadcast_eq(&lf), &lf).unwrap();
    assert!(rep.correct && rep.max_cost == 1);

    let rep = verify_protocol(&constant_protocol(lf.domain(), false).unwrap(), &lf).unwrap();
    assert!(!rep.correct && rep.max_cost == 0);
    let bad = rep.counterexample.unwrap();
    assert_eq!(bad.z, bad.xs[0] * bad.xs[1]);
}

#[test]
fn verify_rejects_mismatched_and_randomized() {
    let p = build_lift_upper(&eq(2, 1, 2).base, eq(2, 1, 2).params).unwrap();
    assert!(verify_protocol(&p, &eq(2, 2, 2)).is_err());
    let lf = eq(5, 1, 2);
    assert!(verify_protocol(&build_eq_rand(lf.params, 2).unwrap(), &lf).is_err());
}

#[test]
fn lift_upper_examples() {
    for (q, r) in [(3, 1), (2, 2)] {
        let lf = eq(q, r, 2);
        let p = build_lift_upper(&lf.base, lf.params).unwrap();
        assert_eq!(p.cost(), occ_two_party(&lf.base));
        assert!(verify_protocol(&p, &lf).unwrap().correct);
    }
    let params = Params::new(3, 1, 2).unwrap();
    let lf = LiftedFn::new(TwoPartyFn::constant(3, true).unwrap(), params).unwrap();
    let p = build_lift_upper(&lf.base, params).unwrap();
    assert_eq!(p.cost(), 0);
    assert!(verify_protocol(&p, &lf).unwrap().correct);
    let lf = lifted(TwoPartyKind::Ind, 5, 1, 2);
    let p = build_lift_upper(&lf.base, lf.params).unwrap();
    assert!(verify_protocol(&p, &lf).unwrap().correct);
    assert!(build_lift_upper(&make_two_party(TwoPartyKind::Eq, 4, None).unwrap(), params).is_err());
}

#[test]
fn occ_examples() {
    let occ = |kind, q| occ_two_party(&make_two_party(kind, q, None).unwrap());
    assert_eq!(occ(TwoPartyKind::Eq, 5), 3);
    assert_eq!(occ_two_party(&TwoPartyFn::constant(7, false).unwrap()), 0);
    assert_eq!(occ(TwoPartyKind::Ind, 16), 4);
    assert_eq!(row_classes(&make_two_party(TwoPartyKind::Ind, 16, None).unwrap()).count(), 16);
    assert_eq!(occ(TwoPartyKind::Ind, 17), 5);
}

#[test]
fn consistent_set_examples() {
    let lf = eq(2, 1, 2);
    let p = broadcast_eq(&lf);
    let zero = consistent_set(&p, &lf, &Transcript::parse_for(&p, "0").unwrap()).unwrap();
    assert_eq!(zero.len(), 4);
    assert!(zero.iter().all(|i| i.z == 0));
    let one = consistent_set(&p, &lf, &Transcript::parse_for(&p, "1").unwrap()).unwrap();
    assert_eq!(one.len(), 4);
    assert!(one.iter().all(|i| i.z == 1));
    assert!(Transcript::parse_for(&p, "01").is_err());
    let wrong = Transcript { bits: vec![false, true], boundaries: vec![2] };
    assert!(consistent_set(&p, &lf, &wrong).is_err());
}

#[test]
fn transcripts_partition_domain() {
    let lf = lifted(TwoPartyKind::Ind, 5, 1, 2);
    for p in [build_lift_upper(&lf.base, lf.params).unwrap(), build_ind_two_round(lf.params).unwrap()] {
        let classes = transcript_classes(&p).unwrap();
        let mut all: Vec<u64> = classes.values().flatten().copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..125).collect::<Vec<_>>());
        for (bits, members) in &classes {
            if !p.is_one_way() {
                continue;
            }
            let t = Transcript::from_messages(&[bits.len() as u32], &[bits.iter().fold(0, |a, &b| a << 1 | b as u64)]);
            let set = consistent_set(&p, &lf, &t).unwrap();
            assert_eq!(set.iter().map(|i| p.domain.index_of(i)).collect::<Vec<_>>(), *members);
        }
    }
}

#[test]
fn slice_cylinder_examples() {
    let lf = eq(2, 1, 2);
    let p = broadcast_eq(&lf);
    for z in 0..2 {
        for t in ["0", "1"] {
            let (ci, ok) = slice_cylinders(&p, &lf, &Transcript::parse_for(&p, t).unwrap(), z).unwrap();
            assert!(ok);
            let expect = (z == 1) == (t == "1");
            assert!((0..2).all(|a| (0..2).all(|b| ci.contains(&[a, b]) == expect)));
        }
    }
    let p = two_turn_tables(&lf.domain());
    for t in ["00", "01", "10", "11"] {
        for z in 0..2 {
            let tr = Transcript::parse_for(&p, t).unwrap();
            let (ci, ok) = slice_cylinders(&p, &lf, &tr, z).unwrap();
            assert!(ok);
            for a in 0..2 {
                for b in 0..2 {
                    let run = p.simulate(&input(&[a, b], z), None).unwrap().0;
                    assert_eq!(ci.contains(&[a, b]), run.bits == tr.bits);
                }
            }
        }
    }
    let two_round = build_ind_two_round(lifted(TwoPartyKind::Ind, 3, 1, 2).params).unwrap();
    let lf3 = lifted(TwoPartyKind::Ind, 3, 1, 2);
    let tr = Transcript::from_messages(&[1, 1], &[0, 0]);
    assert!(matches!(slice_cylinders(&two_round, &lf3, &tr, 0), Err(Error::Precondition(_))));
}

#[test]
fn search_examples() {
    let d = eq(2, 1, 2).domain();
    let constant = ExplicitTarget::from_fn("const", d.clone(), |_, _| true).unwrap();
    assert_eq!(min_occ_nof_exact(&constant, 4).unwrap().min_cost, Some(0));
    let x_only = ExplicitTarget::from_fn("x-eq", d, |xs, _| xs[0] == xs[1]).unwrap();
    assert_eq!(min_occ_nof_exact(&x_only, 4).unwrap().min_cost, Some(0));

    let out = min_occ_nof_exact(&eq(2, 1, 2), 4).unwrap();
    assert_eq!(out.min_cost, Some(1));
    let out3 = min_occ_nof_exact(&eq(3, 1, 2), 4).unwrap();
    assert_eq!(out3.min_cost, Some(2));
    for (o, lf) in [(out, eq(2, 1, 2)), (out3, eq(3, 1, 2))] {
        let p = o.protocol.unwrap();
        assert_eq!(p.cost(), o.min_cost.unwrap());
        assert!(p.is_one_way());
        assert!(verify_protocol(&p, &lf).unwrap().correct);
        assert_eq!(Protocol::from_json(&p.to_json()).unwrap(), p);
    }
}

#[test]
fn search_budget_and_domain_limits() {
    let out = min_occ_nof_exact(&eq(3, 1, 2), 1).unwrap();
    assert_eq!(out.min_cost, None);
    assert!(out.protocol.is_none());
    assert!(min_occ_nof_exact(&eq(3, 1, 2), 5).is_err());
    assert!(min_occ_nof_exact(&eq(17, 1, 2), 4).is_err());
}

#[test]
fn search_never_exceeds_two_party_cost() {
    for lf in [eq(2, 1, 2), eq(2, 2, 2), eq(3, 1, 2), lifted(TwoPartyKind::Ind, 3, 1, 2), eq(2, 1, 3)] {
        let occ = occ_two_party(&lf.base);
        let found = min_occ_nof_exact(&lf, occ).unwrap().min_cost.unwrap();
        assert!(found <= occ);
        assert!(found >= 1, "{} depends on z", lf.name());
    }
}

#[test]
fn search_on_three_party_disjointness() {
    // DISJ3 on 1 bit: x ∧ y ∧ z = 0, decided by one bit of z.
    let out = min_occ_nof_exact(&Disj3Target::new(1).unwrap(), 4).unwrap();
    assert_eq!(out.min_cost, Some(1));
}

#[test]
fn eq_rand_is_one_sided() {
    for q in [2u64, 3, 5] {
        let lf = eq(q, 1, 2);
        let p = build_eq_rand(lf.params, 2).unwrap();
        assert_eq!(p.cost(), 2);
        for i in 0..lf.domain().total().unwrap() {
            let inp = lf.domain().input_at(i);
            if lf.eval(&inp.xs, inp.z) {
                assert_eq!(exact_error_on_input(&p, &lf, &inp).unwrap().0, 0);
            }
        }
    }
    let lf = eq(101, 2, 2);
    let est = estimate_rand_error(&build_eq_rand(lf.params, 6).unwrap(), &lf, 2000, 5, InstanceFilter::Yes).unwrap();
    assert_eq!(est.errors, 0);
}

#[test]
fn eq_rand_exact_error_example() {
    let params = Params::new(5, 1, 2).unwrap();
    assert_eq!(eq_rand_exact_error(params, 2, 1, 2).unwrap(), 0.25);
    assert_eq!(eq_rand_exact_error(params, 2, 3, 3).unwrap(), 0.0);
    for (z, s) in [(0, 4), (1, 3), (4, 2)] {
        assert_eq!(eq_rand_exact_error(params, 3, z, s).unwrap(), 0.125);
    }
}

#[test]
fn rand_error_estimator_edges() {
    let lf = eq(5, 1, 2);
    let p = build_eq_rand(lf.params, 1).unwrap();
    assert!(estimate_rand_error(&p, &lf, 0, 1, InstanceFilter::All).is_err());
    let a = estimate_rand_error(&p, &lf, 5000, 11, InstanceFilter::No).unwrap();
    assert_eq!(a, estimate_rand_error(&p, &lf, 5000, 11, InstanceFilter::No).unwrap());
    assert!((a.error_rate - 0.5).abs() < 3.0 * a.stderr + 1e-9);
    let never = ExplicitTarget::from_fn("never", lf.domain(), |_, _| false).unwrap();
    let c = constant_protocol(lf.domain(), false).unwrap();
    assert!(matches!(estimate_rand_error(&c, &never, 10, 0, InstanceFilter::Yes), Err(Error::BudgetExhausted(_))));
}

#[test]
fn ind_two_round_examples() {
    let p = build_ind_two_round(Params::new(17, 2, 2).unwrap()).unwrap();
    assert_eq!((p.cost(), p.rounds()), (4, 2));
    let lf = lifted(TwoPartyKind::Ind, 5, 1, 2);
    let p = build_ind_two_round(lf.params).unwrap();
    let rep = verify_protocol(&p, &lf).unwrap();
    assert!(rep.correct && rep.inputs_checked == 125);
    assert!(build_ind_two_round(Params::new(2, 1, 2).unwrap()).is_err());
}

/// A speaker's message never changes when its own forehead input changes.
fn assert_visibility_sound(p: &Protocol) {
    let d = &p.domain;
    let k = d.k();
    for i in 0..d.total().unwrap() {
        let inp = d.input_at(i);
        let (full, _) = p.simulate(&inp, None).unwrap();
        for (t, turn) in p.turns.iter().enumerate() {
            let prior = full.prefix(t);
            let msg = p.turn_message(t, &inp, &prior, &[]).unwrap();
            let alternatives = if turn.speaker == k { d.z_size } else { d.x_sizes[turn.speaker] };
            for v in 0..alternatives {
                let mut other = inp.clone();
                if turn.speaker == k {
                    other.z = v;
                } else {
                    other.xs[turn.speaker] = v;
                }
                assert_eq!(p.turn_message(t, &other, &prior, &[]).unwrap(), msg, "{} turn {t}", p.name);
            }
        }
    }
}

#[test]
fn visibility_soundness() {
    let lf = lifted(TwoPartyKind::Ind, 5, 1, 2);
    assert_visibility_sound(&build_lift_upper(&lf.base, lf.params).unwrap());
    assert_visibility_sound(&build_ind_two_round(lf.params).unwrap());
    assert_visibility_sound(&two_turn_tables(&eq(2, 1, 2).domain()));
    assert_visibility_sound(&min_occ_nof_exact(&eq(3, 1, 2), 4).unwrap().protocol.unwrap());
    for p in disj3_low_cost_protocols(4).unwrap() {
        assert_visibility_sound(&p);
    }
}

#[test]
fn invisible_reads_rejected() {
    let lf = eq(2, 1, 2);
    let d = lf.domain();
    let turn = |speaker, rule| vec![Turn { speaker, msg_bits: 1, rule }];
    let out = OutputRule::LastBit;
    let bad = [
        turn(0, Rule::ParityZAnd { with: 0 }),
        turn(1, Rule::DisjPrefix { with: 1, len: 1 }),
        turn(0, Rule::GipIndex { params: lf.params }),
        turn(2, Rule::SendZ),
    ];
    for turns in bad {
        assert!(matches!(Protocol::new("bad", d.clone(), turns, out.clone(), 0), Err(Error::Invisible { .. })));
    }
    assert!(Protocol::new("ok", d.clone(), turn(1, Rule::ParityZAnd { with: 0 }), out.clone(), 0).is_ok());
    assert!(Protocol::new("short", d, turn(0, Rule::Table { entries: vec![0; 3] }), out, 0).is_err());
}

#[test]
fn disj3_protocols_are_cheap_and_wrong() {
    let target = Disj3Target::new(4).unwrap();
    for p in disj3_low_cost_protocols(4).unwrap() {
        assert!(p.cost() <= 3, "{}", p.name);
        assert!(!verify_protocol(&p, &target).unwrap().correct, "{}", p.name);
    }
    let all = disj3_broadcast_all(4).unwrap();
    let rep = verify_protocol(&all, &target).unwrap();
    assert!(rep.correct && rep.max_cost == 4);
}

#[test]
fn json_roundtrip() {
    let lf = lifted(TwoPartyKind::Ind, 5, 1, 2);
    let mut ps = vec![
        build_lift_upper(&lf.base, lf.params).unwrap(),
        build_ind_two_round(lf.params).unwrap(),
        build_eq_rand(lf.params, 3).unwrap(),
        two_turn_tables(&eq(2, 1, 2).domain()),
        disj3_broadcast_all(5).unwrap(),
    ];
    ps.extend(disj3_low_cost_protocols(5).unwrap());
    for p in ps {
        let json = p.to_json();
        assert_eq!(Protocol::from_json(&json).unwrap(), p);
    }
    assert!(Protocol::from_json("{\"name\": 1}").is_err());
}

#[test]
fn transcript_parsing_and_prefixes() {
    let p = build_ind_two_round(Params::new(17, 2, 2).unwrap()).unwrap();
    let t = Transcript::parse_for(&p, "1011").unwrap();
    assert_eq!((t.message(0), t.message(1), t.value()), (0b101, 1, 0b1011));
    assert_eq!(t.prefix(1).to_string(), "101");
    assert!(Transcript::parse_for(&p, "10x1").is_err());
}
