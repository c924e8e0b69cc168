//! Flat `key = value` run configuration.
//!
//! ```text
//! # comments start with '#'
//! fixed_cost = 100
//! lambda = 0.2
//! segments[0].weight = 0.25
//! segments[1].weight = 0.75
//! solver.margin_rel_tol = 1e-13
//! ```
//!
//! Every key is optional; unset keys keep the base-case value. Unknown or
//! repeated keys are rejected. Segments beyond the two base-case ones must
//! set all of `weight`, `alpha` and `ad_price`, and indices must be
//! contiguous.

use std::collections::HashSet;

use crate::equilibrium::SolverOptions;
use crate::error::{Error, Result};
use crate::market::{ScenarioParams, Segment};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunConfig {
    pub scenario: ScenarioParams,
    pub solver: SolverOptions,
}

enum SegmentField {
    Weight,
    Alpha,
    AdPrice,
}

fn parse_segment_key(key: &str) -> Option<(usize, SegmentField)> {
    let rest = key.strip_prefix("segments[")?;
    let (index, field) = rest.split_once("].")?;
    let index = index.parse().ok()?;
    let field = match field {
        "weight" => SegmentField::Weight,
        "alpha" => SegmentField::Alpha,
        "ad_price" => SegmentField::AdPrice,
        _ => return None,
    };
    Some((index, field))
}

fn parse_number<T: std::str::FromStr>(key: &str, raw: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| Error::invalid(key, format!("cannot parse {raw:?} as a number")))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut config = RunConfig::default();
        let mut seen = HashSet::new();
        let base_segments = config.scenario.segments.len();

        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, raw) = line.split_once('=').ok_or_else(|| {
                Error::invalid(
                    format!("line {}", lineno + 1),
                    format!("expected `key = value`, got {line:?}"),
                )
            })?;
            let (key, raw) = (key.trim(), raw.trim());
            if !seen.insert(key.to_string()) {
                return Err(Error::invalid(key, "set more than once"));
            }

            let p = &mut config.scenario;
            match key {
                "marginal_cost" => p.marginal_cost = parse_number(key, raw)?,
                "fixed_cost" => p.fixed_cost = parse_number(key, raw)?,
                "population" => p.population = parse_number(key, raw)?,
                "lambda" => p.lambda = parse_number(key, raw)?,
                "uniform_ad_price" => p.uniform_ad_price = parse_number(key, raw)?,
                "solver.margin_rel_tol" => {
                    let v: f64 = parse_number(key, raw)?;
                    if !(v > 0.0 && v < 1.0) {
                        return Err(Error::invalid(key, format!("must lie in (0, 1), got {v}")));
                    }
                    config.solver.margin_rel_tol = v;
                }
                "solver.max_doublings" => config.solver.max_doublings = parse_number(key, raw)?,
                _ => {
                    let (index, field) = parse_segment_key(key)
                        .ok_or_else(|| Error::invalid(key, "unknown configuration key"))?;
                    if index >= p.segments.len() {
                        p.segments
                            .resize(index + 1, Segment::new(f64::NAN, f64::NAN, f64::NAN));
                    }
                    let v = parse_number(key, raw)?;
                    let seg = &mut p.segments[index];
                    match field {
                        SegmentField::Weight => seg.weight = v,
                        SegmentField::Alpha => seg.alpha = v,
                        SegmentField::AdPrice => seg.ad_price = v,
                    }
                }
            }
        }

        for (i, seg) in config.scenario.segments.iter().enumerate().skip(base_segments) {
            for (name, v) in [("weight", seg.weight), ("alpha", seg.alpha), ("ad_price", seg.ad_price)] {
                if v.is_nan() {
                    return Err(Error::invalid(
                        format!("segments[{i}].{name}"),
                        "missing for a segment beyond the defaults",
                    ));
                }
            }
        }
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field_of(text: &str) -> String {
        match RunConfig::parse(text) {
            Err(Error::Invalid { field, .. }) => field,
            other => panic!("expected invalid config, got {other:?}"),
        }
    }

    #[test]
    fn empty_is_base_case() {
        let c = RunConfig::parse("").unwrap();
        assert_eq!(c.scenario, ScenarioParams::default());
        assert_eq!(c.solver, SolverOptions::default());
        assert_eq!(RunConfig::parse("# nothing\n\n   \n").unwrap(), c);
    }

    #[test]
    fn overrides() {
        let c = RunConfig::parse(
            "fixed_cost = 100\nlambda=0.2 # faster\nsegments[0].weight = 0.25\nsegments[1].weight = 0.75\nsolver.max_doublings = 10\n",
        )
        .unwrap();
        assert_eq!(c.scenario.fixed_cost, 100.0);
        assert_eq!(c.scenario.lambda, 0.2);
        assert_eq!(c.scenario.segments[0].weight, 0.25);
        assert_eq!(c.scenario.segments[1].weight, 0.75);
        assert_eq!(c.scenario.segments[1].alpha, 0.04);
        assert_eq!(c.solver.max_doublings, 10);
        c.scenario.build().unwrap();
    }

    #[test]
    fn extra_segment() {
        let c = RunConfig::parse(
            "segments[0].weight = 0.4\nsegments[2].weight = 0.1\nsegments[2].alpha = 0.9\nsegments[2].ad_price = 0.02\n",
        )
        .unwrap();
        assert_eq!(c.scenario.segments.len(), 3);
        c.scenario.build().unwrap();
        assert_eq!(field_of("segments[2].weight = 0.1\nsegments[2].alpha = 0.9\n"), "segments[2].ad_price");
    }

    #[test]
    fn errors_name_the_key() {
        assert_eq!(field_of("lamda = 0.1"), "lamda");
        assert_eq!(field_of("segments[0].beta = 1"), "segments[0].beta");
        assert_eq!(field_of("fixed_cost = lots"), "fixed_cost");
        assert_eq!(field_of("fixed_cost = 1\nfixed_cost = 2"), "fixed_cost");
        assert_eq!(field_of("solver.margin_rel_tol = 0"), "solver.margin_rel_tol");
        assert_eq!(field_of("just words"), "line 1");
    }

    #[test]
    fn validation_happens_at_build() {
        let c = RunConfig::parse("lambda = 1.5").unwrap();
        assert!(matches!(c.scenario.build(), Err(Error::Invalid { field, .. }) if field == "lambda"));
    }
}
