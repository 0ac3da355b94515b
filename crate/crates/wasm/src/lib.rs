//! Browser bindings for three `noflab-core` experiments. Every call returns a
//! JSON string; the page in `www/` draws it.

use noflab_core::density::{density_value, extract_support, CoordSet, Rectangle};
use noflab_core::fourier::{disperser_check, sample_ci_random, Mode};
use noflab_core::functions::{gip_value_distribution, Params};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Product spaces enumerated exactly; larger ones are sampled.
const EXACT_LIMIT: u128 = 1 << 18;
const MAX_DEMO_N: u32 = 10;

type Out = Result<String, String>;

fn js(r: Out) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

fn params(q: u32, r: u32, k: u32) -> Result<Params, String> {
    Params::new(q as u64, r, k).map_err(|e| e.to_string())
}

/// Exact distribution of GIP over uniform inputs.
pub fn gip_distribution_json(q: u32, r: u32, k: u32) -> Out {
    let p = params(q, r, k)?;
    let counts = gip_value_distribution(&p).map_err(|e| e.to_string())?;
    let total: f64 = counts.iter().map(|&c| c as f64).sum();
    let probs: Vec<f64> = counts.iter().map(|&c| c as f64 / total).collect();
    let bias = probs.iter().map(|p| (p - 1.0 / q as f64).abs()).fold(0.0, f64::max);
    Ok(json!({ "q": q, "r": r, "k": k, "probs": probs, "uniform": 1.0 / q as f64, "bias": bias }).to_string())
}

#[wasm_bindgen]
pub fn gip_distribution(q: u32, r: u32, k: u32) -> Result<String, JsError> {
    js(gip_distribution_json(q, r, k))
}

/// `Pr[GIP = v | S]` on one seeded cylinder intersection of roughly the given density.
pub fn disperser_demo_json(q: u32, r: u32, k: u32, density: f64, samples: u32, seed: u32) -> Out {
    let p = params(q, r, k)?;
    let exact = p.gadget_domain().is_some_and(|s| s <= EXACT_LIMIT);
    let mode = if exact { Mode::Exact } else { Mode::Mc };
    let s = sample_ci_random(p, density, seed as u64, 1.0 / q as f64).map_err(|e| e.to_string())?;
    let rep = disperser_check(&s, mode, samples as u64, seed as u64).map_err(|e| e.to_string())?;
    serde_json::to_string(&rep).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn disperser_demo(q: u32, r: u32, k: u32, density: f64, samples: u32, seed: u32) -> Result<String, JsError> {
    js(disperser_demo_json(q, r, k, density, samples, seed))
}

/// Seeded rectangle on `n` coordinates, `forced` of which are zeroed on one
/// side, followed by support extraction.
pub fn density_increment_demo_json(n: u32, forced: u32, seed: u32) -> Out {
    if !(1..=MAX_DEMO_N).contains(&n) || forced > n {
        return Err(format!("need 1 <= n <= {MAX_DEMO_N} and forced <= n"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed as u64);
    let (mut mx, mut my) = (0usize, 0usize);
    for j in rand::seq::index::sample(&mut rng, n as usize, forced as usize) {
        if rng.random_bool(0.5) {
            mx |= 1 << j;
        } else {
            my |= 1 << j;
        }
    }
    let (px, py) = (rng.random_range(0.6..=1.0), rng.random_range(0.6..=1.0));
    let mut side = |mask: usize, p: f64| -> Vec<bool> {
        (0..1usize << n).map(|v| v == 0 || (v & mask == 0 && rng.random_bool(p))).collect()
    };
    let (x, y) = (side(mx, px), side(my, py));
    let rect = Rectangle::new(CoordSet::full(n as usize), x, y).map_err(|e| e.to_string())?;
    let c = -density_value(&rect);
    let s = extract_support(&rect, c).map_err(|e| e.to_string())?;
    Ok(json!({
        "n": n,
        "c": s.c,
        "size_bound": n as f64 - 2.0 * s.c,
        "trace": s.state.density_trace,
        "projected": s.state.projected,
        "support": s.support,
        "verified": s.verified,
        "ext_violations": s.ext_violations,
    })
    .to_string())
}

#[wasm_bindgen]
pub fn density_increment_demo(n: u32, forced: u32, seed: u32) -> Result<String, JsError> {
    js(density_increment_demo_json(n, forced, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    fn parse(s: Out) -> Value {
        serde_json::from_str(&s.unwrap()).unwrap()
    }

    #[test]
    fn gip_distribution_sums_to_one() {
        let v = parse(gip_distribution_json(3, 1, 2));
        let probs: Vec<f64> = serde_json::from_value(v["probs"].clone()).unwrap();
        // GIP = x·y over F_3: 5 of 9 pairs give 0
        assert!((probs[0] - 5.0 / 9.0).abs() < 1e-12);
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(gip_distribution_json(4, 1, 2).is_err());
    }

    #[test]
    fn disperser_demo_runs_both_modes() {
        let exact = parse(disperser_demo_json(5, 2, 2, 0.5, 0, 1));
        assert_eq!(exact["mode"], "exact");
        let mc = parse(disperser_demo_json(17, 3, 3, 0.5, 20_000, 1));
        assert_eq!(mc["mode"], "mc");
        assert_eq!(mc["probs"].as_array().unwrap().len(), 17);
    }

    #[test]
    fn density_demo_trace_increases() {
        let v = parse(density_increment_demo_json(8, 3, 4));
        let trace: Vec<f64> = serde_json::from_value(v["trace"].clone()).unwrap();
        assert!(trace.windows(2).all(|w| w[1] - w[0] >= 0.5));
        assert_eq!(v["verified"], true);
        assert_eq!(v["ext_violations"], 0);
        assert!(density_increment_demo_json(11, 0, 0).is_err());
    }
}
