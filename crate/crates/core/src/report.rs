//! Side-by-side comparison of the two regimes and the diagnostics derived
//! from a solved equilibrium.

use serde::{Deserialize, Serialize};

use crate::equilibrium::{
    solve_targeted_with, solve_uniform, SolverOptions, TargetedEquilibrium, UniformEquilibrium,
};
use crate::error::Result;
use crate::market::MarketScenario;

/// Diagnostics of one regime.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeMetrics {
    /// Own-price elasticity implied by the Lerner index, `−P/(P − C)`.
    pub implied_elasticity: f64,
    /// Advertising spend over revenue.
    pub ad_to_sales_ratio: f64,
    /// `F / (C·Q + F + ad spend)`, i.e. fixed cost over total cost.
    pub fixed_cost_share: f64,
    /// `Q_i / (α_i N_i)` per segment; `None` where α_i = 0.
    pub take_up_rates: Vec<Option<f64>>,
    /// Total quantity over `G·N` potential buyers.
    pub blended_take_up: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub uniform: UniformEquilibrium,
    pub targeted: TargetedEquilibrium,
    /// `(P_targeted − P_uniform) / P_uniform`; negative means targeting
    /// lowers the price.
    pub price_change_fraction: f64,
    pub uniform_metrics: RegimeMetrics,
    pub targeted_metrics: RegimeMetrics,
}

pub fn implied_elasticity(price: f64, marginal_cost: f64) -> f64 {
    -price / (price - marginal_cost)
}

fn regime_metrics(
    scenario: &MarketScenario,
    price: f64,
    quantity: f64,
    ad_spend: f64,
    take_up_rates: Vec<Option<f64>>,
) -> RegimeMetrics {
    let revenue = price * quantity;
    let f = scenario.fixed_cost();
    RegimeMetrics {
        implied_elasticity: implied_elasticity(price, scenario.marginal_cost()),
        ad_to_sales_ratio: ad_spend / revenue,
        fixed_cost_share: f / (scenario.marginal_cost() * quantity + f + ad_spend),
        take_up_rates,
        blended_take_up: quantity / (scenario.blended_alpha() * scenario.population()),
    }
}

impl UniformEquilibrium {
    pub fn metrics(&self, scenario: &MarketScenario) -> RegimeMetrics {
        // Every segment sees the same intensity, so each take-up is φ(A*).
        let phi = scenario.tech().phi_unchecked(self.ad_intensity);
        let take_up = scenario
            .segments()
            .iter()
            .map(|s| (s.alpha > 0.0).then_some(phi))
            .collect();
        let ad_spend = scenario.uniform_ad_price() * self.ad_intensity * scenario.population();
        regime_metrics(scenario, self.price, self.quantity, ad_spend, take_up)
    }
}

impl TargetedEquilibrium {
    pub fn metrics(&self, scenario: &MarketScenario) -> RegimeMetrics {
        let mut ad_spend = 0.0;
        let mut take_up = Vec::with_capacity(self.segments.len());
        for (i, (seg, out)) in scenario.segments().iter().zip(&self.segments).enumerate() {
            let head = scenario.segment_population(i);
            ad_spend += seg.ad_price * out.ad_intensity * head;
            take_up.push((seg.alpha > 0.0).then(|| out.quantity / (seg.alpha * head)));
        }
        regime_metrics(scenario, self.price, self.total_quantity(), ad_spend, take_up)
    }
}

pub fn compare(scenario: &MarketScenario) -> Result<ComparisonReport> {
    compare_with(scenario, &SolverOptions::default())
}

pub fn compare_with(scenario: &MarketScenario, opts: &SolverOptions) -> Result<ComparisonReport> {
    let uniform = solve_uniform(scenario)?;
    let targeted = solve_targeted_with(scenario, opts)?;
    Ok(ComparisonReport {
        price_change_fraction: (targeted.price - uniform.price) / uniform.price,
        uniform_metrics: uniform.metrics(scenario),
        targeted_metrics: targeted.metrics(scenario),
        uniform,
        targeted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::{ScenarioParams, Segment};

    #[test]
    fn base_case_diagnostics() {
        let s = MarketScenario::base_case();
        let r = compare(&s).unwrap();
        let u = &r.uniform_metrics;
        assert!((u.implied_elasticity + 4.7).abs() <= 0.1, "{u:?}");
        assert!((u.ad_to_sales_ratio - 0.095).abs() <= 0.002);
        assert!((u.fixed_cost_share - 0.117).abs() <= 0.002);
        assert!((u.blended_take_up - 0.191).abs() <= 0.002);

        let t = &r.targeted_metrics;
        assert!((t.implied_elasticity + 5.2).abs() <= 0.1, "{t:?}");
        assert!((t.ad_to_sales_ratio - 0.084).abs() <= 0.002);
        assert!((t.fixed_cost_share - 0.108).abs() <= 0.002);
        assert!((t.take_up_rates[0].unwrap() - 0.230).abs() <= 0.002);
        let low = t.take_up_rates[1].unwrap();
        assert!((0.03..=0.04).contains(&low), "{low}");
    }

    #[test]
    fn price_change_sign_and_consistency() {
        let r = compare(&MarketScenario::base_case()).unwrap();
        assert!((r.price_change_fraction + 0.024).abs() <= 0.003);
        let recomputed = (r.targeted.price - r.uniform.price) / r.uniform.price;
        assert!((recomputed - r.price_change_fraction).abs() <= 1e-12);

        let mut p = ScenarioParams::default();
        p.segments[0].alpha = 0.28;
        p.segments[1].alpha = 0.16;
        let r = compare(&p.build().unwrap()).unwrap();
        assert!((r.price_change_fraction - 0.009).abs() <= 0.005, "{}", r.price_change_fraction);
    }

    #[test]
    fn identical_segments_no_price_change() {
        let p = ScenarioParams {
            segments: vec![Segment::new(0.5, 0.22, 0.01), Segment::new(0.5, 0.22, 0.01)],
            ..Default::default()
        };
        let r = compare(&p.build().unwrap()).unwrap();
        assert!(r.price_change_fraction.abs() < 1e-6);
    }

    #[test]
    fn lerner_at_double_cost() {
        assert_eq!(implied_elasticity(16.0, 8.0), -2.0);
    }

    #[test]
    fn zero_alpha_take_up_is_none() {
        let p = ScenarioParams {
            segments: vec![Segment::new(0.55, 0.4, 0.0125), Segment::new(0.45, 0.0, 0.01)],
            ..Default::default()
        };
        let r = compare(&p.build().unwrap()).unwrap();
        assert_eq!(r.targeted_metrics.take_up_rates[1], None);
        assert_eq!(r.uniform_metrics.take_up_rates[1], None);
    }
}
