//! Market primitives: consumer segments and the validated parameter set the
//! solvers run on.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::info::InfoTechnology;

/// Base-case marginal cost C.
pub const BASE_MARGINAL_COST: f64 = 8.0;
/// Base-case fixed cost F.
pub const BASE_FIXED_COST: f64 = 50.0;
/// Base-case population N.
pub const BASE_POPULATION: f64 = 1000.0;
/// Per-person ad price without targeting.
pub const BASE_UNIFORM_AD_PRICE: f64 = 0.0100;
/// Per-person price of reaching the high-probability segment.
pub const BASE_TARGET_AD_PRICE: f64 = 0.0125;
/// Per-person price of reaching the low-probability segment.
pub const BASE_OTHER_AD_PRICE: f64 = 0.0100;
pub const BASE_LAMBDA: f64 = 0.10;
pub const BASE_ALPHAS: (f64, f64) = (0.40, 0.04);

const WEIGHT_SUM_TOL: f64 = 1e-12;

/// One consumer group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    /// Population share w_i.
    pub weight: f64,
    /// Probability α_i that an informed member buys.
    pub alpha: f64,
    /// Price per unit of intensity per person when targeting this group.
    pub ad_price: f64,
}

impl Segment {
    pub fn new(weight: f64, alpha: f64, ad_price: f64) -> Self {
        Segment {
            weight,
            alpha,
            ad_price,
        }
    }

    fn validate(&self, index: usize) -> Result<()> {
        let field = |name: &str| format!("segments[{index}].{name}");
        if !(0.0..=1.0).contains(&self.weight) {
            return Err(Error::invalid(field("weight"), format!("must lie in [0, 1], got {}", self.weight)));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::invalid(field("alpha"), format!("must lie in [0, 1], got {}", self.alpha)));
        }
        if !(self.ad_price > 0.0 && self.ad_price.is_finite()) {
            return Err(Error::invalid(
                field("ad_price"),
                format!("must be finite and > 0, got {}", self.ad_price),
            ));
        }
        Ok(())
    }
}

/// Raw, unvalidated market parameters. `Default` is the base case:
/// two equal groups with purchase probabilities 0.4 and 0.04.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioParams {
    pub marginal_cost: f64,
    pub fixed_cost: f64,
    pub population: f64,
    pub uniform_ad_price: f64,
    pub lambda: f64,
    pub segments: Vec<Segment>,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        ScenarioParams {
            marginal_cost: BASE_MARGINAL_COST,
            fixed_cost: BASE_FIXED_COST,
            population: BASE_POPULATION,
            uniform_ad_price: BASE_UNIFORM_AD_PRICE,
            lambda: BASE_LAMBDA,
            segments: vec![
                Segment::new(0.5, BASE_ALPHAS.0, BASE_TARGET_AD_PRICE),
                Segment::new(0.5, BASE_ALPHAS.1, BASE_OTHER_AD_PRICE),
            ],
        }
    }
}

impl ScenarioParams {
    pub fn build(&self) -> Result<MarketScenario> {
        MarketScenario::new(
            self.marginal_cost,
            self.fixed_cost,
            self.population,
            self.uniform_ad_price,
            InfoTechnology::new(self.lambda)?,
            self.segments.clone(),
        )
    }
}

/// A validated market.
///
/// Zero-weight segments are dropped on construction, so segment indices in
/// solver output refer to the surviving segments.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarketScenario {
    marginal_cost: f64,
    fixed_cost: f64,
    population: f64,
    uniform_ad_price: f64,
    tech: InfoTechnology,
    segments: Vec<Segment>,
    blended_alpha: f64,
}

impl MarketScenario {
    pub fn new(
        marginal_cost: f64,
        fixed_cost: f64,
        population: f64,
        uniform_ad_price: f64,
        tech: InfoTechnology,
        segments: Vec<Segment>,
    ) -> Result<Self> {
        if !(marginal_cost >= 0.0 && marginal_cost.is_finite()) {
            return Err(Error::invalid(
                "marginal_cost",
                format!("must be finite and >= 0, got {marginal_cost}"),
            ));
        }
        if !(fixed_cost >= 0.0 && fixed_cost.is_finite()) {
            return Err(Error::invalid(
                "fixed_cost",
                format!("must be finite and >= 0, got {fixed_cost}"),
            ));
        }
        if !(population > 0.0 && population.is_finite()) {
            return Err(Error::invalid(
                "population",
                format!("must be finite and > 0, got {population}"),
            ));
        }
        if !(uniform_ad_price > 0.0 && uniform_ad_price.is_finite()) {
            return Err(Error::invalid(
                "uniform_ad_price",
                format!("must be finite and > 0, got {uniform_ad_price}"),
            ));
        }
        for (i, s) in segments.iter().enumerate() {
            s.validate(i)?;
        }
        let segments: Vec<Segment> = segments.into_iter().filter(|s| s.weight > 0.0).collect();
        if segments.is_empty() {
            return Err(Error::invalid("segments", "need at least one segment with positive weight"));
        }
        let total: f64 = segments.iter().map(|s| s.weight).sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::invalid(
                "segments",
                format!("weights must sum to 1, got {total}"),
            ));
        }
        let blended_alpha: f64 = segments.iter().map(|s| s.weight * s.alpha).sum();
        if !(blended_alpha > 0.0) {
            return Err(Error::invalid(
                "segments",
                "blended purchase probability must be > 0",
            ));
        }
        Ok(MarketScenario {
            marginal_cost,
            fixed_cost,
            population,
            uniform_ad_price,
            tech,
            segments,
            blended_alpha,
        })
    }

    pub fn base_case() -> Self {
        ScenarioParams::default()
            .build()
            .expect("base case parameters are valid")
    }

    pub fn params(&self) -> ScenarioParams {
        ScenarioParams {
            marginal_cost: self.marginal_cost,
            fixed_cost: self.fixed_cost,
            population: self.population,
            uniform_ad_price: self.uniform_ad_price,
            lambda: self.tech.lambda(),
            segments: self.segments.clone(),
        }
    }

    pub fn marginal_cost(&self) -> f64 {
        self.marginal_cost
    }

    pub fn fixed_cost(&self) -> f64 {
        self.fixed_cost
    }

    pub fn population(&self) -> f64 {
        self.population
    }

    pub fn uniform_ad_price(&self) -> f64 {
        self.uniform_ad_price
    }

    pub fn tech(&self) -> &InfoTechnology {
        &self.tech
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// G = Σ w_i α_i, the purchase probability of an unidentified consumer.
    pub fn blended_alpha(&self) -> f64 {
        self.blended_alpha
    }

    /// Head count N_i = w_i N of segment `i`.
    pub fn segment_population(&self, i: usize) -> f64 {
        self.segments[i].weight * self.population
    }
}
