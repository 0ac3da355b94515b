//! One pipeline per subcommand. Each returns its checks, a results object and
//! an optional table; [`crate::run_experiment`] wraps them into a report.

use anyhow::{bail, ensure, Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use noflab_core::combinatorics::{hd_premise_met, hd_witness, largeness_check, BipartiteGraph};
use noflab_core::density::{density_value, disj3_attack as run_attack, extract_support, CoordSet, Rectangle};
use noflab_core::field::ceil_log2;
use noflab_core::fourier::{cs_chain_check, disperser_check, sample_ci_random, DisperserStatus, Mode};
use noflab_core::functions::{
    cor35_params, g_mod2_eval, gip_eval, ind_index_bits, make_two_party, LiftedFn, Params, PlayerInput, TwoPartyFn,
    TwoPartyKind,
};
use noflab_core::nof::{
    build_eq_rand, build_ind_two_round, build_lift_upper, disj3_broadcast_all, disj3_low_cost_protocols,
    eq_rand_exact_error, estimate_rand_error, min_occ_nof_exact, occ_two_party, row_classes, verify_protocol,
    Disj3Target, InstanceFilter, NofInput, NofTarget, Protocol,
};

use crate::report::{Check, Table};
use crate::{
    AttackArgs, ChainArgs, Cor35Args, DensityArgs, DisperserArgs, FnKind, FnSpec, HdArgs, LargenessArgs, ModeArg,
    OccArgs, ProtocolKind, SearchArgs, SimulateArgs,
};

/// Product spaces up to this size are enumerated in `--mode auto`.
const AUTO_EXACT_LIMIT: u128 = 1 << 22;
/// Redraws allowed when generating a premise-satisfying object.
const MAX_REDRAWS: u32 = 1000;

pub struct Outcome {
    pub checks: Vec<Check>,
    pub results: Value,
    pub table: Option<Table>,
}

fn outcome(checks: Vec<Check>, results: Value) -> Outcome {
    Outcome { checks, results, table: None }
}

/// Independent stream seed for item `i` of a run.
fn sub_seed(seed: u64, i: u64) -> u64 {
    seed ^ (i + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

fn base_fn(f: &FnSpec) -> Result<TwoPartyFn> {
    let need_q = || f.q.context("--q is required for this function");
    let (kind, size) = match f.kind {
        FnKind::Eq => (TwoPartyKind::Eq, need_q()? as usize),
        FnKind::Ind => (TwoPartyKind::Ind, need_q()? as usize),
        FnKind::Disj2 => {
            let n = f.n.context("--n is required for disj2")?;
            ensure!(n <= 12, "disj2 universe of {n} elements is too large");
            (TwoPartyKind::Disj2, 1usize << n)
        }
        FnKind::File => (TwoPartyKind::File, 0),
    };
    Ok(make_two_party(kind, size, f.path.as_deref())?)
}

fn lifted(f: &FnSpec, r: u32, k: u32) -> Result<LiftedFn> {
    let q = f.q.context("--q is required for a lifted function")?;
    Ok(LiftedFn::new(base_fn(f)?, Params::new(q, r, k)?)?)
}

fn protocol_json(p: &Protocol) -> Value {
    serde_json::from_str(&p.to_json()).unwrap_or(Value::Null)
}

pub fn occ(a: &OccArgs) -> Result<Outcome> {
    let f = base_fn(&a.f)?;
    let occ = occ_two_party(&f);
    let distinct = row_classes(&f).count();
    let mut results = json!({
        "function": f.name,
        "rows": f.rows(),
        "cols": f.cols(),
        "distinct_rows": distinct,
        "occ": occ,
    });
    let mut checks = vec![Check::exact("occ_is_ceil_log2_distinct_rows", occ == ceil_log2(distinct as u64), occ)];
    if let (Some(r), Some(k)) = (a.r, a.k) {
        let lf = lifted(&a.f, r, k)?;
        let p = build_lift_upper(&lf.base, lf.params)?;
        let rep = verify_protocol(&p, &lf)?;
        checks.push(Check::exact("lift_upper_correct", rep.correct, rep.inputs_checked));
        checks.push(Check::exact("lift_upper_cost_equals_occ", p.cost() == occ && rep.max_cost == occ, p.cost()));
        results["lift"] = json!({
            "params": lf.params.to_string(),
            "cost": p.cost(),
            "correct": rep.correct,
            "inputs_checked": rep.inputs_checked,
            "counterexample": rep.counterexample,
        });
    }
    Ok(outcome(checks, results))
}

pub fn nof_search(a: &SearchArgs) -> Result<Outcome> {
    let lf = lifted(&a.f, a.r, a.k)?;
    let occ = occ_two_party(&lf.base);
    let found = min_occ_nof_exact(&lf, a.budget)?;
    let mut checks = vec![];
    if let (Some(p), Some(cost)) = (&found.protocol, found.min_cost) {
        let rep = verify_protocol(p, &lf)?;
        checks.push(Check::exact("found_protocol_correct", rep.correct && p.cost() == cost, cost));
    }
    if occ <= a.budget {
        let ok = found.min_cost.is_some_and(|c| c <= occ);
        checks.push(Check::exact("min_cost_at_most_occ", ok, found.min_cost));
    }
    let results = json!({
        "target": lf.describe(),
        "occ": occ,
        "min_cost": found.min_cost,
        "budgets": found.budgets,
        "matches_occ": found.min_cost == Some(occ),
        "max_budget": found.max_budget,
        "nodes": found.nodes,
        "protocol": found.protocol.as_ref().map(protocol_json),
    });
    Ok(outcome(checks, results))
}

pub fn simulate(a: &SimulateArgs, seed: u64) -> Result<Outcome> {
    match a.protocol {
        ProtocolKind::LiftUpper => {
            let lf = lifted(&a.f, a.r, a.k)?;
            let p = build_lift_upper(&lf.base, lf.params)?;
            deterministic_run(&p, &lf, Some(occ_two_party(&lf.base)))
        }
        ProtocolKind::IndTwoRound => {
            let q = a.f.q.context("--q is required")?;
            let f = FnSpec { kind: FnKind::Ind, q: Some(q), n: None, path: None };
            let lf = lifted(&f, a.r, a.k)?;
            let p = build_ind_two_round(lf.params)?;
            let mut out = deterministic_run(&p, &lf, None)?;
            let b = ind_index_bits(q);
            out.checks.push(Check::exact("cost_is_index_bits_plus_one", p.cost() == b + 1, p.cost()));
            out.checks.push(Check::exact("two_rounds", p.rounds() == 2, p.rounds()));
            out.results["one_round_base_cost"] = json!(occ_two_party(&lf.base));
            out.results["one_round_distinct_rows"] = json!(row_classes(&lf.base).count());
            out.results["rounds"] = json!(p.rounds());
            Ok(out)
        }
        ProtocolKind::EqRand => {
            let q = a.f.q.context("--q is required")?;
            let f = FnSpec { kind: FnKind::Eq, q: Some(q), n: None, path: None };
            let lf = lifted(&f, a.r, a.k)?;
            let p = build_eq_rand(lf.params, a.t)?;
            eq_rand_run(&p, &lf, a, seed)
        }
        ProtocolKind::Json => {
            let path = a.protocol_file.as_deref().context("--protocol-file is required")?;
            let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
            let p = Protocol::from_json(&text)?;
            let lf = lifted(&a.f, a.r, a.k)?;
            if !p.is_randomized() {
                return deterministic_run(&p, &lf, None);
            }
            let est = estimate_rand_error(&p, &lf, a.samples, seed, InstanceFilter::All)?;
            let results = json!({ "protocol": p.name, "cost": p.cost(), "estimate": est });
            Ok(outcome(vec![], results))
        }
    }
}

fn deterministic_run(p: &Protocol, target: &dyn NofTarget, expected_cost: Option<u32>) -> Result<Outcome> {
    let rep = verify_protocol(p, target)?;
    let mut checks = vec![Check::exact("correct_on_every_input", rep.correct, rep.inputs_checked)];
    if let Some(c) = expected_cost {
        checks.push(Check::exact("cost_equals_two_party_cost", p.cost() == c && rep.max_cost == c, p.cost()));
    }
    let results = json!({
        "protocol": p.name,
        "target": target.describe(),
        "cost": p.cost(),
        "rounds": p.rounds(),
        "correct": rep.correct,
        "inputs_checked": rep.inputs_checked,
        "counterexample": rep.counterexample,
    });
    Ok(outcome(checks, results))
}

fn eq_rand_run(p: &Protocol, lf: &LiftedFn, a: &SimulateArgs, seed: u64) -> Result<Outcome> {
    let target = 0.5f64.powi(a.t as i32);
    let yes = estimate_rand_error(p, lf, a.samples, seed, InstanceFilter::Yes)?;
    let no = estimate_rand_error(p, lf, a.samples, sub_seed(seed, 0), InstanceFilter::No)?;
    let mut checks = vec![
        Check::exact("yes_instances_never_err", yes.errors == 0, yes.errors),
        Check::new(
            "no_instance_error_near_2^-t",
            (no.error_rate - target).abs() <= 3.0 * no.stderr,
            no.error_rate,
            json!({ "expected": target, "allowed": 3.0 * no.stderr }),
        ),
    ];
    // exact error over every mask, for a fixed no-instance, when the masks are few
    let q = lf.params.q.get();
    let exact = if p.public_random_bits <= 20 && q >= 3 {
        let e = eq_rand_exact_error(lf.params, a.t, 1, 2)?;
        checks.push(Check::exact("exact_no_instance_error_is_2^-t", e == target, e));
        Some(e)
    } else {
        None
    };
    let results = json!({
        "protocol": p.name,
        "cost": p.cost(),
        "public_random_bits": p.public_random_bits,
        "expected_no_error": target,
        "yes": yes,
        "no": no,
        "exact_no_error": exact,
    });
    Ok(outcome(checks, results))
}

fn spread(lo: f64, hi: f64, i: u32, n: u32) -> f64 {
    if n <= 1 {
        lo
    } else {
        lo + (hi - lo) * i as f64 / (n - 1) as f64
    }
}

fn check_density_range(lo: f64, hi: f64) -> Result<()> {
    ensure!(0.0 < lo && lo <= hi && hi <= 1.0, "density range [{lo}, {hi}] must lie in (0, 1]");
    Ok(())
}

pub fn disperser(a: &DisperserArgs, seed: u64) -> Result<Outcome> {
    check_density_range(a.density_min, a.density_max)?;
    let params = Params::new(a.q, a.r, a.k)?;
    let space = params.gadget_domain();
    let mode = match a.mode {
        ModeArg::Exact => Mode::Exact,
        ModeArg::Mc => Mode::Mc,
        ModeArg::Auto if space.is_some_and(|s| s <= AUTO_EXACT_LIMIT) => Mode::Exact,
        ModeArg::Auto => Mode::Mc,
    };
    let qf = a.q as f64;
    // the check needs density >= 1/q, so targets start a little above it
    let lo = a.density_min.max(1.25 / qf);
    ensure!(lo <= a.density_max, "--density-max {} is below the usable minimum {lo}", a.density_max);
    let mut checks = vec![];
    let mut sets = vec![];
    let mut table = Table::new(&["set", "v", "prob", "stderr"]);
    for i in 0..a.sets {
        let target = spread(lo, a.density_max, i, a.sets);
        let s = sample_ci_random(params, target, sub_seed(seed, i as u64), 1.0 / qf)?;
        let rep = disperser_check(&s, mode, a.samples, sub_seed(seed, (1 << 32) + i as u64))?;
        let margin = rep
            .probs
            .iter()
            .zip(&rep.stderr)
            .map(|(p, se)| p + 3.0 * se - rep.bound)
            .fold(f64::INFINITY, f64::min);
        checks.push(Check::new(
            format!("set_{i}_min_prob_above_bound"),
            rep.status != DisperserStatus::Failed,
            rep.min_prob,
            json!({ "bound": rep.bound, "stderr_multiple": 3 }),
        ));
        for (v, (p, se)) in rep.probs.iter().zip(&rep.stderr).enumerate() {
            table.push(vec![json!(i), json!(v), json!(p), json!(se)]);
        }
        sets.push(json!({
            "set": i,
            "target_density": target,
            "density": rep.density,
            "accepted": rep.accepted,
            "min_prob": rep.min_prob,
            "margin": margin,
            "status": rep.status,
            "bound_density_form": rep.bound_density_form,
            "tighter": rep.tighter,
        }));
    }
    let results = json!({
        "params": params.to_string(),
        "mode": mode,
        "bound": noflab_core::fourier::disperser_bound(a.q, a.k),
        "uniform": 1.0 / qf,
        "sets": sets,
    });
    Ok(Outcome { checks, results, table: Some(table) })
}

pub fn chain(a: &ChainArgs, seed: u64) -> Result<Outcome> {
    check_density_range(a.density_min, a.density_max)?;
    let params = Params::new(a.q, a.r, a.k)?;
    let mut checks = vec![];
    let mut sets = vec![];
    let mut table = Table::new(&["set", "alpha", "gamma", "gamma_power", "vanish_exact", "chain_ok"]);
    let mut vanish = None;
    for i in 0..a.sets {
        let target = spread(a.density_min, a.density_max, i, a.sets);
        let s = sample_ci_random(params, target, sub_seed(seed, i as u64), f64::MIN_POSITIVE)?;
        let rep = cs_chain_check(&s)?;
        let worst = rep.entries.iter().map(|e| e.gamma_power).fold(0.0, f64::max);
        checks.push(Check::new(
            format!("set_{i}_chain"),
            rep.passed,
            worst,
            json!({ "vanish_exact": rep.vanish.exact, "slack": 1e-9 }),
        ));
        for e in &rep.entries {
            table.push(vec![json!(i), json!(e.alpha), json!(e.gamma), json!(e.gamma_power), json!(rep.vanish.exact), json!(e.chain_ok)]);
        }
        sets.push(json!({ "set": i, "target_density": target, "density": rep.density, "max_gamma_power": worst }));
        vanish = Some(rep.vanish);
    }
    let results = json!({ "params": params.to_string(), "vanish": vanish, "sets": sets });
    Ok(Outcome { checks, results, table: Some(table) })
}

fn random_graph(rng: &mut ChaCha8Rng, left: usize, right: usize, p: f64) -> BipartiteGraph {
    BipartiteGraph::from_fn((0..left as u64).collect(), (0..right as u64).collect(), |_, _| rng.random_bool(p))
}

pub fn largeness(a: &LargenessArgs, seed: u64) -> Result<Outcome> {
    let mut checks = vec![];
    let mut table = Table::new(&["graph", "left", "right", "edges", "premise_met", "mean_common", "conclusion_threshold", "holds"]);
    let mut row = |i: usize, g: &BipartiteGraph, checks: &mut Vec<Check>, require_premise: bool| {
        let rep = largeness_check(g);
        let ok = rep.holds && (!require_premise || rep.premise_met);
        checks.push(Check::new(format!("graph_{i}_largeness"), ok, rep.mean_common, rep.conclusion_threshold));
        table.push(vec![
            json!(i),
            json!(rep.left),
            json!(rep.right),
            json!(rep.edges),
            json!(rep.premise_met),
            json!(rep.mean_common),
            json!(rep.conclusion_threshold),
            json!(rep.holds),
        ]);
        rep
    };
    if let Some(path) = &a.edges {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        let g = BipartiteGraph::from_edge_csv(&text, a.left.unwrap_or(0), a.right.unwrap_or(0))?;
        let rep = row(0, &g, &mut checks, false);
        return Ok(Outcome { checks, results: json!({ "graph": rep }), table: Some(table) });
    }
    ensure!(a.left_max >= 4 && a.right_max >= 1, "need --left-max >= 4 and --right-max >= 1");
    let mut met = 0;
    for i in 0..a.graphs as usize {
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, i as u64));
        let left = rng.random_range(4..=a.left_max);
        let right = rng.random_range(1..=a.right_max);
        let floor = (2.0 / (left as f64).sqrt()).min(1.0);
        let mut g = None;
        for _ in 0..MAX_REDRAWS {
            let p = rng.random_range(floor..=1.0);
            let cand = random_graph(&mut rng, left, right, p);
            if largeness_check(&cand).premise_met {
                g = Some(cand);
                break;
            }
        }
        let g = g.context("could not draw a premise-satisfying graph")?;
        if row(i, &g, &mut checks, true).conclusion_met {
            met += 1;
        }
    }
    let results = json!({ "graphs": a.graphs, "conclusion_met": met });
    Ok(Outcome { checks, results, table: Some(table) })
}

pub fn hd(a: &HdArgs, seed: u64) -> Result<Outcome> {
    ensure!((1..=16).contains(&a.n), "n = {} outside 1..=16", a.n);
    ensure!(1 <= a.right_min && a.right_min <= a.right_max, "invalid right side range");
    let size = 1usize << a.n;
    let mut checks = vec![];
    let mut table = Table::new(&["graph", "right", "edges", "a", "b", "distance", "common", "threshold"]);
    let mut found = 0;
    for i in 0..a.graphs as usize {
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, i as u64));
        let right = rng.random_range(a.right_min..=a.right_max);
        let floor = 2f64.powf(-a.delta * a.n as f64);
        let mut g = None;
        for _ in 0..MAX_REDRAWS {
            let p = rng.random_range(floor..=1.0);
            let cand = random_graph(&mut rng, size, right, p);
            if hd_premise_met(&cand, a.delta)? {
                g = Some(cand);
                break;
            }
        }
        let g = g.context("could not draw a premise-satisfying graph")?;
        let w = hd_witness(&g, a.delta)?;
        // recount from neighbour lists rather than trusting the reported fields
        let valid = w.is_some_and(|w| {
            let (na, nb) = (g.neighbours(w.a as usize), g.neighbours(w.b as usize));
            let common = na.iter().filter(|v| nb.contains(v)).count() as f64;
            let threshold = right as f64 * 2f64.powf(-2.0 * a.delta * a.n as f64 - 2.0);
            10 * (w.a ^ w.b).count_ones() >= a.n && common >= threshold
        });
        found += valid as u32;
        checks.push(Check::exact(format!("graph_{i}_witness"), valid, w.map(|w| w.common)));
        let field = |f: fn(&noflab_core::combinatorics::HdWitness) -> Value| w.as_ref().map(f).unwrap_or(Value::Null);
        table.push(vec![
            json!(i),
            json!(right),
            json!(g.edge_count()),
            field(|w| json!(w.a)),
            field(|w| json!(w.b)),
            field(|w| json!(w.distance)),
            field(|w| json!(w.common)),
            field(|w| json!(w.threshold)),
        ]);
    }
    let results = json!({ "n": a.n, "delta": a.delta, "graphs": a.graphs, "witnesses": found });
    Ok(Outcome { checks, results, table: Some(table) })
}

/// Random rectangle with some coordinates forced to 0 on one side, so that it
/// misses the corresponding `D_i` and support extraction has work to do.
fn random_rectangle(rng: &mut ChaCha8Rng, max_n: usize, max_c: f64) -> Result<Rectangle> {
    for _ in 0..MAX_REDRAWS {
        let n = rng.random_range(1..=max_n);
        let forced = rng.random_range(0..=n.min(4));
        let mut mask_x = 0usize;
        let mut mask_y = 0usize;
        for j in rand::seq::index::sample(rng, n, forced) {
            if rng.random_bool(0.5) {
                mask_x |= 1 << j;
            } else {
                mask_y |= 1 << j;
            }
        }
        let (px, py) = (rng.random_range(0.6..=1.0), rng.random_range(0.6..=1.0));
        let mut draw = |mask: usize, p: f64| -> Vec<bool> { (0..1usize << n).map(|v| v & mask == 0 && rng.random_bool(p)).collect() };
        let x = draw(mask_x, px);
        let y = draw(mask_y, py);
        let r = Rectangle::new(CoordSet::full(n), x, y)?;
        let c = -density_value(&r);
        if c.is_finite() && c <= max_c {
            return Ok(r);
        }
    }
    bail!("could not draw a rectangle with deficiency at most {max_c}")
}

pub fn density(a: &DensityArgs, seed: u64) -> Result<Outcome> {
    ensure!((1..=noflab_core::density::MAX_COORDS).contains(&a.max_n), "max-n outside 1..=20");
    let floor = 0.5f64.max(1.5f64.log2() - 1e-9);
    let mut table = Table::new(&["rect", "n", "c", "support", "projected", "min_increment", "verified", "ext_violations"]);
    let (mut min_inc, mut size_fail, mut unverified, mut violations, mut checked, mut broken) =
        (f64::INFINITY, 0u32, 0u32, 0u64, 0u64, vec![]);
    for i in 0..a.rects as usize {
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, i as u64));
        let r = random_rectangle(&mut rng, a.max_n, a.max_c)?;
        match extract_support(&r, a.max_c) {
            Ok(s) => {
                let inc = s.state.density_trace.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
                min_inc = min_inc.min(inc);
                size_fail += !s.size_bound_ok as u32;
                unverified += !s.verified as u32;
                violations += s.ext_violations;
                checked += s.ext_checked;
                table.push(vec![
                    json!(i),
                    json!(r.dim()),
                    json!(s.c),
                    json!(s.support.len()),
                    json!(s.state.projected.len()),
                    if inc.is_finite() { json!(inc) } else { Value::Null },
                    json!(s.verified),
                    json!(s.ext_violations),
                ]);
            }
            Err(noflab_core::Error::CheckFailed(msg)) => broken.push(json!({ "rect": i, "error": msg })),
            Err(e) => return Err(e.into()),
        }
    }
    let checks = vec![
        Check::new(
            "every_increment_at_least_half_and_log2_1.5",
            broken.is_empty() && (min_inc == f64::INFINITY || min_inc >= floor),
            if min_inc.is_finite() { json!(min_inc) } else { Value::Null },
            floor,
        ),
        Check::exact("support_size_at_least_n_minus_2c", size_fail == 0, size_fail),
        Check::exact("support_coordinates_reverified", unverified == 0, unverified),
        Check::exact("ext_sets_at_most_two", violations == 0, violations),
    ];
    let results = json!({
        "rects": a.rects,
        "min_increment": if min_inc.is_finite() { json!(min_inc) } else { Value::Null },
        "ext_pairs_checked": checked,
        "ext_violations": violations,
        "increment_failures": broken,
    });
    Ok(Outcome { checks, results, table: Some(table) })
}

fn disj3(x: u64, y: u64, z: u64) -> bool {
    x & y & z == 0
}

pub fn disj3_attack(a: &AttackArgs) -> Result<Outcome> {
    let target = Disj3Target::new(a.n)?;
    let mut protocols = disj3_low_cost_protocols(a.n)?;
    let broadcast = disj3_broadcast_all(a.n)?;
    protocols.push(broadcast.clone());
    let mut checks = vec![];
    let mut table = Table::new(&["protocol", "cost", "witness", "x", "y", "z0", "z1", "transcript", "pairs_tried"]);
    let mut outcomes = vec![];
    for p in &protocols {
        let cheap = p.name != broadcast.name;
        let out = run_attack(p, a.n, a.delta)?;
        let valid = match &out.witness {
            Some(w) => {
                let t0 = p.simulate(&NofInput { xs: w.xs.clone(), z: w.z0 }, None)?.0;
                let t1 = p.simulate(&NofInput { xs: w.xs.clone(), z: w.z1 }, None)?.0;
                t0 == w.transcript && t1 == w.transcript && disj3(w.xs[0], w.xs[1], w.z0) != disj3(w.xs[0], w.xs[1], w.z1)
            }
            None => false,
        };
        if cheap {
            checks.push(Check::exact(format!("{}_cost_at_most_3", p.name), p.cost() <= 3, p.cost()));
            checks.push(Check::exact(format!("{}_witness_valid", p.name), valid, out.witness.is_some()));
        } else {
            let rep = verify_protocol(p, &target)?;
            checks.push(Check::exact(format!("{}_correct", p.name), rep.correct, rep.inputs_checked));
            checks.push(Check::exact(format!("{}_no_witness", p.name), out.witness.is_none(), out.reason.clone()));
        }
        let w = out.witness.as_ref();
        table.push(vec![
            json!(p.name),
            json!(p.cost()),
            json!(w.is_some()),
            json!(w.map(|w| w.xs[0])),
            json!(w.map(|w| w.xs[1])),
            json!(w.map(|w| w.z0)),
            json!(w.map(|w| w.z1)),
            json!(w.map(|w| w.transcript.to_string())),
            json!(out.pairs_tried),
        ]);
        outcomes.push(json!({ "protocol": p.name, "cost": p.cost(), "outcome": out }));
    }
    let results = json!({ "n": a.n, "delta": a.delta, "protocols": outcomes });
    Ok(Outcome { checks, results, table: Some(table) })
}

pub fn cor35(a: &Cor35Args, seed: u64) -> Result<Outcome> {
    let c = cor35_params(a.n, a.k, seed)?;
    let params = c.params;
    let q = params.q.get();
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, 0));
    let mut mismatches = 0u64;
    for _ in 0..a.samples {
        let xs: Vec<PlayerInput> = (0..params.k)
            .map(|_| PlayerInput::new((0..params.r).map(|_| rng.random_range(0..q)).collect()))
            .collect();
        // schoolbook sum of coordinate products, reduced once per step
        let mut sum = 0u128;
        for j in 0..params.r as usize {
            let prod = xs.iter().fold(1u128, |acc, x| acc * x.coords[j] as u128 % q as u128);
            sum = (sum + prod) % q as u128;
        }
        let g = g_mod2_eval(&params, &xs)?;
        let gip = gip_eval(&params, &xs)?.value();
        if g != (sum % 2 == 1) || gip as u128 != sum {
            mismatches += 1;
        }
    }
    let bits = c.input_bits_per_player();
    let checks = vec![
        Check::exact("input_bits_per_player_equals_n", bits == a.n, bits),
        Check::exact("prime_has_requested_bits", params.q.bits() == c.prime_bits, params.q.bits()),
        Check::exact("g_matches_gip_mod_2", mismatches == 0, mismatches),
    ];
    let results = json!({
        "n": a.n,
        "k": a.k,
        "r": params.r,
        "q": q,
        "prime_bits": c.prime_bits,
        "n_used": c.n_used,
        "rounded": c.rounded,
        "regime_satisfied": c.regime_satisfied,
        "input_bits_per_player": bits,
        "samples": a.samples,
        "mismatches": mismatches,
    });
    Ok(outcome(checks, results))
}
