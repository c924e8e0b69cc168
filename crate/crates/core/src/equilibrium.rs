//! Free-entry equilibria with uniform and with segment-targeted advertising.
//!
//! Both regimes impose two conditions: the advertising first-order condition
//! `φ'(A)·α·(P − C) = R` and zero economic profit. Price is not chosen by a
//! first-order condition of its own; entry is assumed to move it until
//! profits vanish.
//!
//! Without targeting the margin can be eliminated. Substituting
//! `m = R / (G φ'(A))` into the zero-profit condition gives
//!
//! ```text
//! φ(A)/φ'(A) − A = F / (R N)
//! ```
//!
//! whose left side rises from 0 at `A = 0`. The uniform intensity therefore
//! depends only on `F/(RN)` and λ, never on the segment mix.
//!
//! With targeting, every segment has its own first-order condition, so the
//! solver searches over the margin. Each candidate margin fixes all
//! intensities, and profit at those intensities rises with the margin. Its
//! derivative is total quantity, which follows from the first-order
//! conditions.

use std::cell::RefCell;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::MarketScenario;
use crate::roots::{newton_bracketed, Tolerance};

/// Knobs for the outer margin search of the targeted solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Relative width at which the margin search stops.
    pub margin_rel_tol: f64,
    /// Upper-bracket doublings (starting from a margin of 1) before the
    /// market is declared not viable.
    pub max_doublings: u32,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            margin_rel_tol: 1e-12,
            max_doublings: 1024,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformEquilibrium {
    pub ad_intensity: f64,
    pub price: f64,
    pub margin: f64,
    pub quantity: f64,
    /// `(φ'(A)·G·m − R) / max(1, R)`
    pub foc_residual: f64,
    /// `(m·N·G·φ(A) − F − R·A·N) / max(1, F + R·A·N)`
    pub zero_profit_residual: f64,
}

/// Intensity and sales in one segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentOutcome {
    pub ad_intensity: f64,
    pub quantity: f64,
    /// `(φ'(A_i)·α_i·m − R_i) / max(1, R_i)`; zero for segments with α_i = 0.
    pub foc_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetedEquilibrium {
    pub price: f64,
    pub margin: f64,
    pub segments: Vec<SegmentOutcome>,
    /// Profit divided by `max(1, F + Σ R_i A_i N_i)`.
    pub zero_profit_residual: f64,
}

impl TargetedEquilibrium {
    pub fn total_quantity(&self) -> f64 {
        self.segments.iter().map(|s| s.quantity).sum()
    }
}

/// Targeted profit with each intensity set by its first-order condition at a
/// fixed price.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShortRunOutcome {
    pub price: f64,
    pub profit: f64,
    pub revenue: f64,
    pub segments: Vec<SegmentOutcome>,
}

/// `(P − C)·N·G·φ(A) − F − R·A·N`
pub fn uniform_profit(scenario: &MarketScenario, price: f64, ad_intensity: f64) -> Result<f64> {
    let phi = scenario.tech().phi(ad_intensity)?;
    let n = scenario.population();
    Ok((price - scenario.marginal_cost()) * n * scenario.blended_alpha() * phi
        - scenario.fixed_cost()
        - scenario.uniform_ad_price() * ad_intensity * n)
}

/// `(P − C)·Σ α_i N_i φ(A_i) − Σ R_i A_i N_i − F`
pub fn targeted_profit(scenario: &MarketScenario, price: f64, ad_intensities: &[f64]) -> Result<f64> {
    let segs = scenario.segments();
    if ad_intensities.len() != segs.len() {
        return Err(Error::domain(
            "targeted_profit",
            format!(
                "{} intensities for {} segments",
                ad_intensities.len(),
                segs.len()
            ),
        ));
    }
    let margin = price - scenario.marginal_cost();
    let mut profit = -scenario.fixed_cost();
    for (i, (seg, &a)) in segs.iter().zip(ad_intensities).enumerate() {
        let phi = scenario.tech().phi(a).map_err(|e| Error::Segment {
            index: i,
            source: Box::new(e),
        })?;
        let head = scenario.segment_population(i);
        profit += margin * seg.alpha * head * phi - seg.ad_price * a * head;
    }
    Ok(profit)
}

pub fn solve_uniform(scenario: &MarketScenario) -> Result<UniformEquilibrium> {
    let tech = scenario.tech();
    let k = tech.decay();
    let r = scenario.uniform_ad_price();
    let n = scenario.population();
    let f = scenario.fixed_cost();
    let g = scenario.blended_alpha();
    let target = f / (r * n);
    if !(target > 0.0) {
        return Err(Error::NotViable(
            "zero fixed cost leaves no interior uniform equilibrium (A* = 0, P = C)".into(),
        ));
    }

    // In s = √A: φ/φ' − A = 2s(e^{ks} − 1)/k − s².
    let h = |s: f64| {
        let em1 = (k * s).exp_m1();
        let value = 2.0 * s * em1 / k - s * s - target;
        let slope = 2.0 * em1 / k + 2.0 * s * (em1 + 1.0) - 2.0 * s;
        (value, slope)
    };
    let mut hi = 1.0;
    while h(hi).0 <= 0.0 {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::NotViable(format!("no uniform intensity solves F/(RN) = {target}")));
        }
    }
    let s = newton_bracketed(h, 0.0, hi, Tolerance::default())?;
    let a = s * s;
    if !(a > 0.0) {
        return Err(Error::NotViable(format!("uniform intensity collapsed to 0 (F/(RN) = {target})")));
    }

    let phi = tech.phi_unchecked(a);
    let dphi = tech.phi_prime_unchecked(a);
    let margin = r / (g * dphi);
    let ad_cost = r * a * n;
    Ok(UniformEquilibrium {
        ad_intensity: a,
        price: scenario.marginal_cost() + margin,
        margin,
        quantity: n * g * phi,
        foc_residual: (dphi * g * margin - r) / r.max(1.0),
        zero_profit_residual: (margin * n * g * phi - f - ad_cost) / (f + ad_cost).max(1.0),
    })
}

/// True when every scenario in the family solves to the same uniform
/// intensity within 1e-8. Any scenario that fails to solve makes it false.
pub fn uniform_ad_invariance_certificate(family: &[MarketScenario]) -> bool {
    let mut intensities = family.iter().map(|s| solve_uniform(s).map(|e| e.ad_intensity));
    let first = match intensities.next() {
        None => return true,
        Some(Ok(a)) => a,
        Some(Err(_)) => return false,
    };
    intensities.all(|a| matches!(a, Ok(a) if (a - first).abs() <= 1e-8))
}

/// Optimal segment outcomes at a given margin, plus (profit, total quantity).
fn segments_at_margin(scenario: &MarketScenario, margin: f64) -> Result<(Vec<SegmentOutcome>, f64, f64)> {
    let tech = scenario.tech();
    let mut profit = -scenario.fixed_cost();
    let mut total_q = 0.0;
    let mut out = Vec::with_capacity(scenario.segments().len());
    for (i, seg) in scenario.segments().iter().enumerate() {
        if seg.alpha == 0.0 {
            out.push(SegmentOutcome {
                ad_intensity: 0.0,
                quantity: 0.0,
                foc_residual: 0.0,
            });
            continue;
        }
        let a = tech
            .inverse_phi_prime(seg.ad_price / (seg.alpha * margin))
            .map_err(|e| Error::Segment {
                index: i,
                source: Box::new(e),
            })?;
        let head = scenario.segment_population(i);
        let q = seg.alpha * head * tech.phi_unchecked(a);
        profit += margin * q - seg.ad_price * a * head;
        total_q += q;
        out.push(SegmentOutcome {
            ad_intensity: a,
            quantity: q,
            foc_residual: (tech.phi_prime_unchecked(a) * seg.alpha * margin - seg.ad_price)
                / seg.ad_price.max(1.0),
        });
    }
    Ok((out, profit, total_q))
}

fn check_margin(scenario: &MarketScenario, price: f64) -> Result<f64> {
    let margin = price - scenario.marginal_cost();
    if !(margin > 0.0) || !price.is_finite() {
        return Err(Error::domain(
            "short_run_targeted_profit",
            format!(
                "price {price} must exceed marginal cost {}",
                scenario.marginal_cost()
            ),
        ));
    }
    Ok(margin)
}

/// Targeted profit at a fixed price with every intensity at its optimum.
pub fn short_run_targeted_profit(scenario: &MarketScenario, price: f64) -> Result<ShortRunOutcome> {
    let margin = check_margin(scenario, price)?;
    let (segments, profit, total_q) = segments_at_margin(scenario, margin)?;
    Ok(ShortRunOutcome {
        price,
        profit,
        revenue: price * total_q,
        segments,
    })
}

pub fn solve_targeted(scenario: &MarketScenario) -> Result<TargetedEquilibrium> {
    solve_targeted_with(scenario, &SolverOptions::default())
}

pub fn solve_targeted_with(scenario: &MarketScenario, opts: &SolverOptions) -> Result<TargetedEquilibrium> {
    let profit_at = |m: f64| segments_at_margin(scenario, m).map(|(_, p, _)| p);

    // Profit tends to −F as the margin shrinks to zero.
    let mut lo = if scenario.marginal_cost() > 0.0 {
        1e-6 * scenario.marginal_cost()
    } else {
        1e-6
    };
    let mut shrinks = 0;
    while profit_at(lo)? >= 0.0 {
        lo *= 0.1;
        shrinks += 1;
        if shrinks > 60 {
            return Err(Error::NotViable(
                "profit stays non-negative as the margin vanishes (zero fixed cost?)".into(),
            ));
        }
    }

    let mut hi = lo.max(1.0);
    let mut doublings = 0;
    while profit_at(hi)? <= 0.0 {
        if doublings >= opts.max_doublings {
            return Err(Error::NotViable(format!(
                "no positive profit up to margin {hi} after {doublings} doublings"
            )));
        }
        hi *= 2.0;
        doublings += 1;
        if !hi.is_finite() {
            return Err(Error::NotViable("margin search overflowed".into()));
        }
    }

    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let objective = |m: f64| match segments_at_margin(scenario, m) {
        Ok((_, p, q)) => (p, q),
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            (f64::NAN, f64::NAN)
        }
    };
    let tol = Tolerance {
        abs: 0.0,
        rel: opts.margin_rel_tol,
        max_iter: 2000,
    };
    let found = newton_bracketed(objective, lo, hi, tol);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let margin = found?;

    let (segments, profit, _) = segments_at_margin(scenario, margin)?;
    let ad_spend: f64 = scenario
        .segments()
        .iter()
        .zip(&segments)
        .enumerate()
        .map(|(i, (seg, out))| seg.ad_price * out.ad_intensity * scenario.segment_population(i))
        .sum();
    Ok(TargetedEquilibrium {
        price: scenario.marginal_cost() + margin,
        margin,
        segments,
        zero_profit_residual: profit / (scenario.fixed_cost() + ad_spend).max(1.0),
    })
}

/// Whether the target group's relative ad price is below its relative
/// purchase probability, `R₁/R₂ < α₁/α₂`. This is the condition for the
/// target group to get more advertising; it does not by itself imply that
/// targeting lowers the free-entry price.
pub fn targeting_worthwhile(scenario: &MarketScenario) -> Result<bool> {
    let [first, second] = scenario.segments() else {
        return Err(Error::domain(
            "targeting_worthwhile",
            format!("needs exactly 2 segments, got {}", scenario.segments().len()),
        ));
    };
    if first.alpha < second.alpha {
        return Err(Error::domain(
            "targeting_worthwhile",
            "segments must be ordered with the higher purchase probability first",
        ));
    }
    // Cross-multiplied so α₂ = 0 needs no special case.
    Ok(first.ad_price * second.alpha < first.alpha * second.ad_price)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::{ScenarioParams, Segment};

    fn base() -> MarketScenario {
        MarketScenario::base_case()
    }

    fn with(f: impl FnOnce(&mut ScenarioParams)) -> MarketScenario {
        let mut p = ScenarioParams::default();
        f(&mut p);
        p.build().unwrap()
    }

    #[test]
    fn uniform_profit_examples() {
        let s = base();
        assert!(uniform_profit(&s, 10.152, 4.06).unwrap().abs() < 0.2);
        assert_eq!(uniform_profit(&s, 12.0, 0.0).unwrap(), -50.0);
        let p = uniform_profit(&s, 8.0, 3.0).unwrap();
        assert!((p - (-50.0 - 0.01 * 3.0 * 1000.0)).abs() < 1e-12);
        assert!(uniform_profit(&s, 10.0, -1.0).is_err());
    }

    #[test]
    fn solve_uniform_base_case() {
        let e = solve_uniform(&base()).unwrap();
        assert!((e.ad_intensity - 4.06).abs() <= 0.02, "{e:?}");
        assert!((e.quantity - 42.08).abs() <= 0.25);
        assert!((e.price - 10.152).abs() <= 0.01);
        assert!(e.foc_residual.abs() <= 1e-10);
        assert!(e.zero_profit_residual.abs() <= 1e-10);
    }

    #[test]
    fn solve_uniform_table_variants() {
        let e = solve_uniform(&with(|p| p.fixed_cost = 100.0)).unwrap();
        assert!((e.ad_intensity - 7.57).abs() <= 0.03);
        assert!((e.quantity - 55.36).abs() <= 0.3);
        assert!((e.price - 11.173).abs() <= 0.02);

        let e = solve_uniform(&with(|p| p.lambda = 0.2)).unwrap();
        assert!((e.ad_intensity - 3.39).abs() <= 0.02);
        assert!((e.price - 9.131).abs() <= 0.01);
    }

    #[test]
    fn zero_fixed_cost_not_viable() {
        let s = with(|p| p.fixed_cost = 0.0);
        assert!(matches!(solve_uniform(&s), Err(Error::NotViable(_))));
        assert!(matches!(solve_targeted(&s), Err(Error::NotViable(_))));
    }

    #[test]
    fn invariance_certificate() {
        let family: Vec<_> = [0.5, 0.25, 0.1, 0.05]
            .into_iter()
            .map(|w| {
                with(|p| {
                    p.segments[0].weight = w;
                    p.segments[1].weight = 1.0 - w;
                })
            })
            .collect();
        assert!(uniform_ad_invariance_certificate(&family));
        assert!(!uniform_ad_invariance_certificate(&[base(), with(|p| p.fixed_cost = 100.0)]));
        assert!(uniform_ad_invariance_certificate(&[base()]));
        assert!(uniform_ad_invariance_certificate(&[]));
    }

    #[test]
    fn targeted_profit_examples() {
        let s = base();
        let p = targeted_profit(&s, 10.152, &[7.41, 0.188]).unwrap();
        assert!((11.0..=12.0).contains(&p), "{p}");
        assert_eq!(targeted_profit(&s, 10.152, &[0.0, 0.0]).unwrap(), -50.0);
        assert!(targeted_profit(&s, 10.152, &[1.0]).is_err());
        assert!(targeted_profit(&s, 10.152, &[1.0, -1.0]).is_err());

        let e = solve_targeted(&s).unwrap();
        let a: Vec<f64> = e.segments.iter().map(|o| o.ad_intensity).collect();
        assert!(targeted_profit(&s, e.price, &a).unwrap().abs() < 0.1);
    }

    #[test]
    fn solve_targeted_base_case() {
        let e = solve_targeted(&base()).unwrap();
        assert!((e.price - 9.907).abs() <= 0.02, "{e:?}");
        assert!((e.segments[0].ad_intensity - 6.13).abs() <= 0.05);
        assert!((e.segments[0].quantity - 45.92).abs() <= 0.3);
        assert!(e.zero_profit_residual.abs() <= 1e-10);
        for s in &e.segments {
            assert!(s.foc_residual.abs() <= 1e-10);
        }
    }

    #[test]
    fn solve_targeted_group_size_variants() {
        let at = |w: f64| {
            solve_targeted(&with(|p| {
                p.segments[0].weight = w;
                p.segments[1].weight = 1.0 - w;
            }))
            .unwrap()
        };
        let e = at(0.25);
        assert!((e.price - 10.778).abs() <= 0.05);
        assert!((e.segments[0].ad_intensity - 10.92).abs() <= 0.1);
        assert!((e.segments[1].ad_intensity - 0.30).abs() <= 0.02);
        assert!((e.segments[1].quantity - 1.68).abs() <= 0.05);

        let e = at(0.05);
        assert!((e.price - 14.20).abs() <= 0.07);
        assert!((e.segments[0].ad_intensity - 32.72).abs() <= 0.3);
        assert!((e.segments[1].ad_intensity - 1.33).abs() <= 0.05);
        assert!((e.segments[1].quantity - 4.35).abs() <= 0.1);
    }

    #[test]
    fn zero_alpha_segment_gets_no_advertising() {
        let s = with(|p| {
            p.segments = vec![Segment::new(0.55, 0.4, 0.0125), Segment::new(0.45, 0.0, 0.01)];
        });
        let e = solve_targeted(&s).unwrap();
        assert_eq!(e.segments[1].ad_intensity, 0.0);
        assert_eq!(e.segments[1].quantity, 0.0);
        assert!(e.zero_profit_residual.abs() < 1e-10);
    }

    #[test]
    fn single_segment_targeting_matches_uniform() {
        let s = with(|p| p.segments = vec![Segment::new(1.0, 0.22, 0.01)]);
        let u = solve_uniform(&s).unwrap();
        let t = solve_targeted(&s).unwrap();
        assert!(((u.price - t.price) / u.price).abs() < 1e-10);
        assert!((u.ad_intensity - t.segments[0].ad_intensity).abs() < 1e-8);
    }

    #[test]
    fn three_segments_solve() {
        let s = with(|p| {
            p.segments = vec![
                Segment::new(0.2, 0.6, 0.015),
                Segment::new(0.3, 0.2, 0.0125),
                Segment::new(0.5, 0.05, 0.01),
            ];
        });
        let e = solve_targeted(&s).unwrap();
        assert_eq!(e.segments.len(), 3);
        let a: Vec<f64> = e.segments.iter().map(|o| o.ad_intensity).collect();
        assert!(a[0] > a[1] && a[1] > a[2]);
        assert!(targeted_profit(&s, e.price, &a).unwrap().abs() < 1e-8);
    }

    #[test]
    fn short_run_examples() {
        let s = base();
        let r = short_run_targeted_profit(&s, 10.152).unwrap();
        assert!((11.0..=12.0).contains(&r.profit), "{r:?}");
        assert!((513.0..=516.0).contains(&r.revenue), "{r:?}");

        let r = short_run_targeted_profit(&s, 8.0 + 1e-9).unwrap();
        assert!((r.profit + 50.0).abs() < 1e-6, "{r:?}");
        assert!(r.segments.iter().all(|o| o.ad_intensity < 1e-12));

        assert!(short_run_targeted_profit(&s, 8.0).is_err());
        assert!(short_run_targeted_profit(&s, 7.0).is_err());
    }

    #[test]
    fn short_run_foc_point_beats_neighbours() {
        let s = base();
        let r = short_run_targeted_profit(&s, 10.152).unwrap();
        let a: Vec<f64> = r.segments.iter().map(|o| o.ad_intensity).collect();
        for d1 in [-0.01, 0.0, 0.01] {
            for d2 in [-0.01, 0.0, 0.01] {
                let probe = [(a[0] + d1).max(0.0), (a[1] + d2).max(0.0)];
                assert!(targeted_profit(&s, 10.152, &probe).unwrap() <= r.profit + 1e-12);
            }
        }
    }

    #[test]
    fn worthwhile_condition() {
        assert!(targeting_worthwhile(&base()).unwrap());
        let s = with(|p| {
            p.segments[0].alpha = 0.28;
            p.segments[1].alpha = 0.16;
        });
        assert!(targeting_worthwhile(&s).unwrap());
        let s = with(|p| {
            p.segments[0] = Segment::new(0.5, 0.22, 0.01);
            p.segments[1] = Segment::new(0.5, 0.22, 0.01);
        });
        assert!(!targeting_worthwhile(&s).unwrap());

        let s = with(|p| p.segments = vec![Segment::new(1.0, 0.22, 0.01)]);
        assert!(targeting_worthwhile(&s).is_err());
        let s = with(|p| p.segments.swap(0, 1));
        assert!(targeting_worthwhile(&s).is_err());
    }

    #[test]
    fn tiny_doubling_cap_reports_not_viable() {
        let opts = SolverOptions {
            max_doublings: 0,
            ..SolverOptions::default()
        };
        let s = with(|p| p.fixed_cost = 5000.0);
        assert!(matches!(solve_targeted_with(&s, &opts), Err(Error::NotViable(_))));
        assert!(solve_targeted(&s).is_ok());
    }
}
