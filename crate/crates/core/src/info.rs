//! Information production: how advertising intensity turns into informed
//! consumers.
//!
//! Each consumer independently observes each advertising message with
//! probability λ and is informed once at least one message got through. With
//! `M` messages the informed share is `1 - (1-λ)^M`. Messages grow with the
//! square root of intensity, `M(A) = √A`, giving
//!
//! ```text
//! φ(A)  = 1 - (1-λ)^√A            = 1 - exp(-k√A)
//! φ'(A) = -ln(1-λ) (1-λ)^√A / (2√A) = k exp(-k√A) / (2√A),   k = -ln(1-λ)
//! ```
//!
//! φ is increasing and concave with φ(0) = 0, φ(∞) = 1, φ'(0+) = ∞ and
//! φ'(∞) = 0, so every positive marginal value `y` is hit by exactly one
//! intensity. Root finding happens in `s = √A`, where φ' is smooth.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots::{newton_bracketed, Tolerance};

/// Per-message exposure probability λ and the φ it induces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTech", into = "RawTech")]
pub struct InfoTechnology {
    lambda: f64,
    /// `-ln(1-λ)`
    k: f64,
}

#[derive(Serialize, Deserialize)]
struct RawTech {
    lambda: f64,
}

impl TryFrom<RawTech> for InfoTechnology {
    type Error = Error;
    fn try_from(raw: RawTech) -> Result<Self> {
        InfoTechnology::new(raw.lambda)
    }
}

impl From<InfoTechnology> for RawTech {
    fn from(t: InfoTechnology) -> Self {
        RawTech { lambda: t.lambda }
    }
}

impl InfoTechnology {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(Error::invalid(
                "lambda",
                format!("must lie strictly between 0 and 1, got {lambda}"),
            ));
        }
        Ok(InfoTechnology {
            lambda,
            k: -(-lambda).ln_1p(),
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Decay rate `k = -ln(1-λ)`, so that `(1-λ)^s = exp(-k s)`.
    pub fn decay(&self) -> f64 {
        self.k
    }

    /// Informed fraction at intensity `a`.
    pub fn phi(&self, a: f64) -> Result<f64> {
        if !(a >= 0.0) {
            return Err(Error::domain("phi", format!("intensity must be >= 0, got {a}")));
        }
        Ok(self.phi_unchecked(a))
    }

    pub(crate) fn phi_unchecked(&self, a: f64) -> f64 {
        -(-self.k * a.sqrt()).exp_m1()
    }

    /// Marginal informed fraction. Unbounded as `a -> 0+`, so `a = 0` is
    /// rejected.
    pub fn phi_prime(&self, a: f64) -> Result<f64> {
        if !(a > 0.0) || a.is_infinite() {
            return Err(Error::domain(
                "phi_prime",
                format!("intensity must be finite and > 0, got {a}"),
            ));
        }
        Ok(self.phi_prime_unchecked(a))
    }

    pub(crate) fn phi_prime_unchecked(&self, a: f64) -> f64 {
        let s = a.sqrt();
        self.k * (-self.k * s).exp() / (2.0 * s)
    }

    /// The unique `a > 0` with `φ'(a) = y`.
    pub fn inverse_phi_prime(&self, y: f64) -> Result<f64> {
        if !(y > 0.0) || !y.is_finite() {
            return Err(Error::domain(
                "inverse_phi_prime",
                format!("marginal value must be finite and > 0, got {y}"),
            ));
        }
        // φ'(s²) = y  <=>  g(s) = k s + ln s - ln(k / 2y) = 0, increasing in s.
        let k = self.k;
        let c = (k / 2.0).ln() - y.ln();
        let g = |s: f64| (k * s + s.ln() - c, k + 1.0 / s);

        // g(e^c) = k e^c > 0; halve downward for the other end.
        let guess = c.exp().clamp(f64::MIN_POSITIVE, 1e150);
        let mut lo = guess;
        while g(lo).0 > 0.0 {
            lo *= 0.5;
            if lo < f64::MIN_POSITIVE {
                return Err(Error::domain(
                    "inverse_phi_prime",
                    format!("marginal value {y} too large to invert"),
                ));
            }
        }
        let mut hi = guess;
        while g(hi).0 < 0.0 {
            hi *= 2.0;
        }
        let s = newton_bracketed(g, lo, hi, Tolerance::default())?;
        let a = s * s;
        if a == 0.0 {
            return Err(Error::domain(
                "inverse_phi_prime",
                format!("marginal value {y} too large to invert"),
            ));
        }
        Ok(a)
    }
}

/// Outcome of [`informed_fraction_monte_carlo`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub trials: u64,
}

const MC_CHUNK: u64 = 1 << 16;

/// Simulates `trials` consumers who each see `message_count` independent
/// messages, each observed with probability `lambda`, and reports the share
/// who observed at least one.
///
/// Trials are split into fixed chunks; chunk `i` draws from ChaCha stream `i`
/// of the seeded generator, so the result depends only on the arguments and
/// not on how chunks are scheduled across threads.
pub fn informed_fraction_monte_carlo(
    lambda: f64,
    message_count: u32,
    trials: u64,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::invalid("lambda", format!("must lie in [0, 1], got {lambda}")));
    }
    if trials == 0 {
        return Err(Error::invalid("trials", "must be at least 1"));
    }
    let chunks = trials.div_ceil(MC_CHUNK);
    let informed: u64 = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk);
            let n = MC_CHUNK.min(trials - chunk * MC_CHUNK);
            (0..n)
                .filter(|_| (0..message_count).any(|_| rng.gen::<f64>() < lambda))
                .count() as u64
        })
        .sum();
    let p = informed as f64 / trials as f64;
    Ok(MonteCarloEstimate {
        estimate: p,
        std_error: (p * (1.0 - p) / trials as f64).sqrt(),
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tech() -> InfoTechnology {
        InfoTechnology::new(0.1).unwrap()
    }

    #[test]
    fn lambda_bounds() {
        for bad in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(InfoTechnology::new(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn phi_examples() {
        let t = tech();
        assert_eq!(t.phi(0.0).unwrap(), 0.0);
        // informed share behind the base-case uniform equilibrium, 42.080 / 220
        assert!((t.phi(4.06).unwrap() - 42.080 / 220.0).abs() < 2e-4);
        assert!((t.phi(1e9).unwrap() - 1.0).abs() < 1e-6);
        assert!(t.phi(-1e-12).is_err());
    }

    #[test]
    fn phi_prime_examples() {
        let t = tech();
        let d = t.phi_prime(4.06).unwrap();
        let h = 1e-6;
        let fd = (t.phi(4.06 + h).unwrap() - t.phi(4.06 - h).unwrap()) / (2.0 * h);
        assert!((d - fd).abs() < 1e-8, "{d} vs {fd}");
        assert!((d - 0.021144).abs() < 5e-7);
        assert!(t.phi_prime(1e9).unwrap() < 1e-6);
        assert!(t.phi_prime(1.0).unwrap() < t.phi_prime(0.25).unwrap());
        assert!(t.phi_prime(0.0).is_err());
        assert!(t.phi_prime(-1.0).is_err());
    }

    #[test]
    fn inverse_examples() {
        let t = tech();
        let y = t.phi_prime(6.13).unwrap();
        assert!((t.inverse_phi_prime(y).unwrap() - 6.13).abs() < 1e-8);
        assert!(t.inverse_phi_prime(1e6).unwrap() < 1e-6);
        for bad in [0.0, -1.0, f64::INFINITY, f64::NAN] {
            assert!(t.inverse_phi_prime(bad).is_err());
        }
    }

    #[test]
    fn inverse_extreme_marginal_values() {
        let t = tech();
        for y in [1e-300, 1e-12, 1e12, 1e150] {
            let a = t.inverse_phi_prime(y).unwrap();
            let back = t.phi_prime(a).unwrap();
            assert!(((back - y) / y).abs() < 1e-12, "y={y} a={a} back={back}");
        }
    }

    #[test]
    fn mc_zero_messages() {
        let r = informed_fraction_monte_carlo(0.1, 0, 10_000, 7).unwrap();
        assert_eq!(r.estimate, 0.0);
        assert_eq!(r.std_error, 0.0);
    }

    #[test]
    fn mc_near_certain() {
        let r = informed_fraction_monte_carlo(1.0 - 1e-15, 1, 10_000, 7).unwrap();
        assert!((r.estimate - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mc_deterministic_and_rejects_zero_trials() {
        let a = informed_fraction_monte_carlo(0.3, 3, 200_000, 42).unwrap();
        let b = informed_fraction_monte_carlo(0.3, 3, 200_000, 42).unwrap();
        assert_eq!(a, b);
        let c = informed_fraction_monte_carlo(0.3, 3, 200_000, 43).unwrap();
        assert_ne!(a.estimate, c.estimate);
        assert!(informed_fraction_monte_carlo(0.3, 3, 0, 1).is_err());
    }

    #[test]
    fn mc_binomial_complement() {
        let r = informed_fraction_monte_carlo(0.1, 4, 1_000_000, 2024).unwrap();
        let exact = 1.0 - 0.9f64.powi(4);
        assert!((r.estimate - exact).abs() <= 3.0 * r.std_error, "{r:?}");
    }

    #[test]
    fn derivative_matches_finite_differences_on_grid() {
        let t = tech();
        let mut a: f64 = 0.01;
        while a <= 100.0 {
            let h = 1e-6 * a.max(1.0);
            let fd = (t.phi(a + h).unwrap() - t.phi(a - h).unwrap()) / (2.0 * h);
            assert!((t.phi_prime(a).unwrap() - fd).abs() <= 1e-6, "a={a}");
            a *= 1.05;
        }
    }

    #[test]
    fn inverse_consistency_on_log_grid() {
        for lambda in [0.05, 0.1, 0.2, 0.5, 0.9] {
            let t = InfoTechnology::new(lambda).unwrap();
            for i in 0..=180 {
                let y = 10f64.powf(-6.0 + i as f64 / 20.0);
                let back = t.phi_prime(t.inverse_phi_prime(y).unwrap()).unwrap();
                assert!((back - y).abs() <= 1e-12 * y.max(1.0), "lambda={lambda} y={y}");
            }
        }
    }

    proptest! {
        #[test]
        fn phi_increasing(lambda in 0.01f64..0.99, a in 0.0f64..1e4, gap in 1e-6f64..1e3) {
            let t = InfoTechnology::new(lambda).unwrap();
            let (lo, hi) = (t.phi(a).unwrap(), t.phi(a + gap).unwrap());
            // strict until φ rounds to 1 in double precision
            if hi < 1.0 - 1e-6 {
                prop_assert!(lo < hi);
            } else {
                prop_assert!(lo <= hi);
            }
        }

        #[test]
        fn phi_concave(lambda in 0.01f64..0.99, a in 1e-6f64..1e3, gap in 1e-3f64..1e3) {
            let t = InfoTechnology::new(lambda).unwrap();
            let b = a + gap;
            let mid = t.phi(0.5 * (a + b)).unwrap();
            let chord = 0.5 * (t.phi(a).unwrap() + t.phi(b).unwrap());
            // a few ulps of slack where φ has saturated to 1
            prop_assert!(mid >= chord - 4.0 * f64::EPSILON);
        }

        #[test]
        fn inverse_roundtrip(lambda in 0.01f64..0.99, a in 1e-8f64..1e4) {
            let t = InfoTechnology::new(lambda).unwrap();
            let y = t.phi_prime(a).unwrap();
            let back = t.inverse_phi_prime(y).unwrap();
            prop_assert!((back - a).abs() <= 1e-10 * a.max(1.0), "a={} back={}", a, back);
        }
    }
}
