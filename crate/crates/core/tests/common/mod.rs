#![allow(dead_code)]

use adtarget::{MarketScenario, ScenarioParams, Segment};
use rand::Rng;

/// A random market well inside the feasible region: positive fixed cost,
/// one to four segments, weights summing to one.
pub fn random_scenario<R: Rng>(rng: &mut R) -> MarketScenario {
    let k = rng.gen_range(1..=4);
    let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    let head: f64 = weights[..k - 1].iter().sum();
    weights[k - 1] = 1.0 - head;
    let segments = weights
        .into_iter()
        .map(|w| Segment::new(w, rng.gen_range(0.01..1.0), rng.gen_range(0.001..0.05)))
        .collect();
    ScenarioParams {
        marginal_cost: rng.gen_range(0.5..50.0),
        fixed_cost: rng.gen_range(1.0..500.0),
        population: rng.gen_range(100.0..1e5),
        uniform_ad_price: rng.gen_range(0.001..0.05),
        lambda: rng.gen_range(0.02..0.6),
        segments,
    }
    .build()
    .expect("generated scenario is valid")
}

/// Same costs and technology, different segment composition.
pub fn recompose<R: Rng>(base: &MarketScenario, rng: &mut R) -> MarketScenario {
    let other = random_scenario(rng);
    let mut p = base.params();
    p.segments = other.segments().to_vec();
    p.build().expect("recomposed scenario is valid")
}

/// Targeted profit written out directly from the model, independent of the
/// library's profit routines.
pub fn profit_oracle(s: &MarketScenario, price: f64, intensities: &[f64]) -> f64 {
    let k = -(1.0 - s.tech().lambda()).ln();
    let m = price - s.marginal_cost();
    let mut total = -s.fixed_cost();
    for (seg, &a) in s.segments().iter().zip(intensities) {
        let head = seg.weight * s.population();
        let informed = 1.0 - (-k * a.sqrt()).exp();
        total += m * seg.alpha * head * informed - seg.ad_price * a * head;
    }
    total
}

pub fn phi_prime_oracle(lambda: f64, a: f64) -> f64 {
    let s = a.sqrt();
    -(1.0 - lambda).ln() * (1.0 - lambda).powf(s) / (2.0 * s)
}

/// Bisection on s = √A for φ'(s²) = y.
pub fn inverse_phi_prime_oracle(lambda: f64, y: f64) -> f64 {
    let (mut lo, mut hi) = (1e-12f64, 1e6f64);
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if phi_prime_oracle(lambda, mid * mid) > y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s = 0.5 * (lo + hi);
    s * s
}
