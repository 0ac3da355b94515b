use noflab_core::density::{
    d0_count, d_count, density_value, disj3_attack, ext_size, extract_support, meets_d, project_best_side, projection,
    Rectangle, Side,
};
use noflab_core::nof::{disj3_broadcast_all, disj3_low_cost_protocols, Disj3Target, NofInput, NofTarget};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_rect(rng: &mut ChaCha8Rng, n: usize) -> Rectangle {
    let (px, py) = (rng.random_range(0.2..0.9), rng.random_range(0.2..0.9));
    let x = (0..1 << n).map(|_| rng.random_bool(px)).collect();
    let y = (0..1 << n).map(|_| rng.random_bool(py)).collect();
    Rectangle::new(noflab_core::density::CoordSet::full(n), x, y).unwrap()
}

/// Brute-force `|R ∩ D₀|` and `|R ∩ D_i|`.
fn brute(r: &Rectangle, i: Option<usize>) -> u64 {
    let mut c = 0;
    for x in r.x_members() {
        for y in r.y_members() {
            let m = x & y;
            if match i {
                None => m == 0,
                Some(i) => m == 1 << i,
            } {
                c += 1;
            }
        }
    }
    c
}

#[test]
fn counts_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..60 {
        let n = rng.random_range(1..=7);
        let r = random_rect(&mut rng, n);
        assert_eq!(d0_count(&r), brute(&r, None));
        for i in 0..n {
            assert_eq!(d_count(&r, i).unwrap(), brute(&r, Some(i)));
        }
        assert!(density_value(&r) <= 0.0);
    }
}

#[test]
fn emptiness_survives_projection() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut tested = 0;
    while tested < 200 {
        let n = rng.random_range(2..=8);
        let mut r = random_rect(&mut rng, n);
        let j = rng.random_range(0..n);
        // clear coordinate j on one side so that R misses D_j
        let side = if rng.random_bool(0.5) { &mut r.x } else { &mut r.y };
        for (m, b) in side.iter_mut().enumerate() {
            if m >> j & 1 == 1 {
                *b = false;
            }
        }
        assert!(!meets_d(&r, j).unwrap());
        for i in (0..n).filter(|&i| i != j) {
            for s in [Side::X, Side::Y] {
                assert!(!meets_d(&projection(&r, i, s).unwrap(), j).unwrap());
            }
        }
        tested += 1;
    }
}

#[test]
fn increments_and_ext_sizes() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut steps = 0;
    for _ in 0..300 {
        let n = rng.random_range(1..=8);
        let r = random_rect(&mut rng, n);
        if d0_count(&r) == 0 {
            continue;
        }
        for i in 0..n {
            if meets_d(&r, i).unwrap() {
                continue;
            }
            for xp in 0..1usize << (n - 1) {
                for yp in 0..1usize << (n - 1) {
                    assert!(ext_size(&r, i, xp, yp).unwrap() <= 2);
                }
            }
            let (_, _, inc) = project_best_side(&r, i).unwrap();
            assert!(inc >= 0.5 && inc >= 1.5f64.log2() - 1e-9);
            steps += 1;
        }
    }
    assert!(steps > 50);
}

proptest! {
    #[test]
    fn support_extraction_holds(seed in any::<u64>(), n in 1usize..=9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = random_rect(&mut rng, n);
        prop_assume!(d0_count(&r) > 0);
        let c = -density_value(&r);
        let res = extract_support(&r, c).unwrap();
        prop_assert!(res.size_bound_ok);
        prop_assert!(res.verified);
        prop_assert_eq!(res.ext_violations, 0);
        prop_assert!(res.state.density_trace.windows(2).all(|w| w[1] - w[0] >= 0.5));
        for &l in res.support.as_slice() {
            prop_assert!(brute(&r, Some(l)) > 0);
        }
    }
}

#[test]
fn attack_breaks_cheap_protocols() {
    let n = 6;
    let target = Disj3Target::new(n).unwrap();
    for p in disj3_low_cost_protocols(n).unwrap() {
        let out = disj3_attack(&p, n, 0.05).unwrap();
        let w = out.witness.unwrap_or_else(|| panic!("{}: {:?}", p.name, out.reason));
        let (t0, o0) = p.simulate(&NofInput { xs: w.xs.clone(), z: w.z0 }, None).unwrap();
        let (t1, o1) = p.simulate(&NofInput { xs: w.xs.clone(), z: w.z1 }, None).unwrap();
        assert_eq!((t0, o0), (t1, o1));
        assert_ne!(target.eval(&w.xs, w.z0), target.eval(&w.xs, w.z1));
    }
}

#[test]
fn attack_finds_nothing_against_correct_protocol() {
    for n in [1, 3, 6] {
        let out = disj3_attack(&disj3_broadcast_all(n).unwrap(), n, 0.05).unwrap();
        assert!(out.witness.is_none() && out.reason.is_some());
    }
    assert!(disj3_attack(&disj3_broadcast_all(11).unwrap(), 11, 0.05).is_err());
}
