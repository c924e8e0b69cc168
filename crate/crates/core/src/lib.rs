//! Free-entry equilibria of an informative-advertising market, with and
//! without target marketing.
//!
//! Firms buy advertising intensity `A` per person; a share `φ(A)` of
//! consumers becomes informed and a fraction `α` of those buys. Entry drives
//! profit to zero. Targeting lets a firm choose a separate intensity for each
//! identified consumer segment, at a segment-specific ad price. The crate
//! solves both regimes and reports how much the free-entry price moves.
//!
//! ```
//! use adtarget::{compare, MarketScenario};
//!
//! let report = compare(&MarketScenario::base_case()).unwrap();
//! assert!(report.price_change_fraction < 0.0);
//! ```

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod equilibrium;
pub mod error;
pub mod info;
pub mod market;
pub mod report;
pub mod scenarios;
pub mod roots;


pub use equilibrium::{
    short_run_targeted_profit, solve_targeted, solve_targeted_with, solve_uniform,
    targeted_profit, targeting_worthwhile, uniform_ad_invariance_certificate, uniform_profit,
    SegmentOutcome, ShortRunOutcome, SolverOptions, TargetedEquilibrium, UniformEquilibrium,
};
pub use error::{Error, Result};
pub use info::{informed_fraction_monte_carlo, InfoTechnology, MonteCarloEstimate};
pub use market::{MarketScenario, ScenarioParams, Segment};
pub use report::{compare, compare_with, implied_elasticity, ComparisonReport, RegimeMetrics};
