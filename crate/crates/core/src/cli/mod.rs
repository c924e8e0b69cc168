//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for usage, configuration or validation
//! errors, 2 when a solver fails on a valid scenario.

mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::info::{informed_fraction_monte_carlo, InfoTechnology};
use crate::market::ScenarioParams;
use crate::report::{compare_with, ComparisonReport};
use crate::scenarios::{
    diff_table, market_impact, run_table_with, sweep_with, AdPriceReading, SweepParam, SweepSpec,
    TableId, TableRow, ROW_LABELS,
};

pub use config::RunConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "adtarget", version, about = "Free-entry equilibria with and without target marketing")]
struct Cli {
    /// Scenario configuration file (`key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,
    /// Write the document here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for Monte Carlo commands.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve both regimes for the configured scenario.
    Solve,
    /// Reproduce one of the published tables.
    Table {
        #[arg(long)]
        id: String,
        /// Compare against the published values.
        #[arg(long)]
        diff: bool,
        /// Use R₂ = 0.0125 for the low-probability group.
        #[arg(long)]
        text_ad_prices: bool,
    },
    /// Vary one parameter of the configured scenario.
    Sweep {
        /// w1, alpha1, alpha2, fixed_cost, marginal_cost, population, lambda,
        /// uniform_ad_price or segments[i].ad_price
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        values: Vec<f64>,
    },
    /// Tabulate the informed fraction φ(A).
    PhiCurve {
        #[arg(long, default_value_t = 0.1)]
        lambda: f64,
        #[arg(long, default_value_t = 40.0)]
        max_a: f64,
        #[arg(long, default_value_t = 0.1)]
        step: f64,
    },
    /// Economy-wide cost of a price change.
    Impact {
        #[arg(long)]
        market_size: f64,
        #[arg(long, allow_negative_numbers = true)]
        price_change: f64,
        #[arg(long, default_value_t = 1.0)]
        offline_multiplier: f64,
        #[arg(long, default_value_t = 1.0)]
        growth_multiplier: f64,
    },
    /// Check the informed-fraction formula against simulated exposure.
    McCheck {
        #[arg(long, default_value_t = 0.1)]
        lambda: f64,
        #[arg(long)]
        messages: u32,
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
    },
}

/// What a `solve` run emits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveDocument {
    pub scenario: ScenarioParams,
    pub report: ComparisonReport,
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(rendered.as_bytes());
            return code;
        }
    };
    match execute(&cli) {
        Ok(doc) => match &cli.out {
            Some(path) => match std::fs::write(path, doc) {
                Ok(()) => 0,
                Err(e) => {
                    let _ = writeln!(stderr, "error: writing {}: {e}", path.display());
                    1
                }
            },
            None => match stdout.write_all(doc.as_bytes()) {
                Ok(()) => 0,
                Err(_) => 1,
            },
        },
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            if e.is_solver_failure() {
                2
            } else {
                1
            }
        }
    }
}

fn load_config(path: Option<&PathBuf>) -> Result<RunConfig> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| {
                Error::invalid("config", format!("cannot read {}: {e}", p.display()))
            })?;
            RunConfig::parse(&text)
        }
    }
}

fn execute(cli: &Cli) -> Result<String> {
    let config = load_config(cli.config.as_ref())?;
    match &cli.command {
        Command::Solve => {
            let scenario = config.scenario.build()?;
            let report = compare_with(&scenario, &config.solver)?;
            let doc = SolveDocument {
                scenario: scenario.params(),
                report,
            };
            emit_value(cli.format, &to_value(&doc))
        }
        Command::Table {
            id,
            diff,
            text_ad_prices,
        } => {
            let id: TableId = id.parse()?;
            let reading = if *text_ad_prices {
                AdPriceReading::Text
            } else {
                AdPriceReading::Tables
            };
            let rows = run_table_with(id, reading, &config.solver)?;
            if *diff {
                table_diff_doc(cli.format, id, &rows)
            } else {
                table_doc(cli.format, id, &rows)
            }
        }
        Command::Sweep { param, values } => {
            let spec = SweepSpec {
                base: config.scenario.build()?,
                param: param.parse::<SweepParam>()?,
                values: values.clone(),
            };
            let points = sweep_with(&spec, &config.solver)?;
            sweep_doc(cli.format, &spec, &points)
        }
        Command::PhiCurve { lambda, max_a, step } => phi_curve_doc(cli.format, *lambda, *max_a, *step),
        Command::Impact {
            market_size,
            price_change,
            offline_multiplier,
            growth_multiplier,
        } => {
            let m = market_impact(*market_size, *price_change, *offline_multiplier, *growth_multiplier)?;
            emit_value(cli.format, &to_value(&m))
        }
        Command::McCheck {
            lambda,
            messages,
            trials,
        } => {
            let est = informed_fraction_monte_carlo(*lambda, *messages, *trials, cli.seed)?;
            let analytic = 1.0 - (1.0 - lambda).powi(*messages as i32);
            let deviation = (est.estimate - analytic).abs();
            let doc = json!({
                "lambda": lambda,
                "messages": messages,
                "trials": trials,
                "seed": cli.seed,
                "estimate": est.estimate,
                "std_error": est.std_error,
                "analytic": analytic,
                "abs_deviation": deviation,
                "within_3_sigma": deviation <= 3.0 * est.std_error,
            });
            emit_value(cli.format, &doc)
        }
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("documents serialize to JSON")
}

fn json_text(v: &Value) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    Ok(s)
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .flexible(false)
        .from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| Error::invalid("output", e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
}

fn csv_err(e: csv::Error) -> Error {
    Error::invalid("output", e.to_string())
}

/// Flattens nested JSON into `a.b[0].c` style keys.
fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(map) => {
            for (k, child) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, child, out);
            }
        }
        Value::Array(items) => {
            for (i, child) in items.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), child, out);
            }
        }
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        Value::Null => out.push((prefix.to_string(), String::new())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

fn emit_value(format: Format, v: &Value) -> Result<String> {
    match format {
        Format::Json => json_text(v),
        Format::Csv => {
            let mut pairs = Vec::new();
            flatten("", v, &mut pairs);
            let mut w = csv_writer();
            w.write_record(["field", "value"]).map_err(csv_err)?;
            for (k, val) in pairs {
                w.write_record([k, val]).map_err(csv_err)?;
            }
            finish(w)
        }
    }
}

fn table_doc(format: Format, id: TableId, rows: &[TableRow]) -> Result<String> {
    match format {
        Format::Json => {
            let body: Vec<Value> = ROW_LABELS
                .iter()
                .enumerate()
                .map(|(i, label)| {
                    json!({
                        "label": label,
                        "values": rows.iter().map(|r| r.values()[i]).collect::<Vec<_>>(),
                    })
                })
                .collect();
            json_text(&json!({ "id": id.to_string(), "title": id.title(), "rows": body }))
        }
        Format::Csv => {
            let mut w = csv_writer();
            let mut header = vec!["row".to_string()];
            header.extend((1..=rows.len()).map(|c| format!("col{c}")));
            w.write_record(&header).map_err(csv_err)?;
            for (i, label) in ROW_LABELS.iter().enumerate() {
                let mut rec = vec![label.to_string()];
                rec.extend(rows.iter().map(|r| r.values()[i].to_string()));
                w.write_record(&rec).map_err(csv_err)?;
            }
            finish(w)
        }
    }
}

fn table_diff_doc(format: Format, id: TableId, rows: &[TableRow]) -> Result<String> {
    let cells = diff_table(id, rows);
    match format {
        Format::Json => json_text(&json!({ "id": id.to_string(), "title": id.title(), "diff": cells })),
        Format::Csv => {
            let mut w = csv_writer();
            w.write_record(["row", "column", "computed", "rounded", "published", "abs_deviation", "note"])
                .map_err(csv_err)?;
            for c in cells {
                w.write_record([
                    c.row.to_string(),
                    c.column.to_string(),
                    c.computed.to_string(),
                    c.rounded.to_string(),
                    c.published.to_string(),
                    c.abs_deviation.to_string(),
                    c.note.unwrap_or("").to_string(),
                ])
                .map_err(csv_err)?;
            }
            finish(w)
        }
    }
}

fn sweep_doc(format: Format, spec: &SweepSpec, points: &[crate::scenarios::SweepPoint]) -> Result<String> {
    match format {
        Format::Json => {
            let body: Vec<Value> = points
                .iter()
                .map(|p| match &p.outcome {
                    Ok(r) => json!({ "value": p.value, "report": r }),
                    Err(e) => json!({ "value": p.value, "error": e.to_string() }),
                })
                .collect();
            json_text(&json!({ "param": spec.param.to_string(), "points": body }))
        }
        Format::Csv => {
            let mut w = csv_writer();
            w.write_record([
                spec.param.to_string().as_str(),
                "status",
                "uniform_ad_intensity",
                "uniform_quantity",
                "uniform_price",
                "targeted_price",
                "price_change_pct",
                "error",
            ])
            .map_err(csv_err)?;
            for p in points {
                let rec = match &p.outcome {
                    Ok(r) => vec![
                        p.value.to_string(),
                        "ok".into(),
                        r.uniform.ad_intensity.to_string(),
                        r.uniform.quantity.to_string(),
                        r.uniform.price.to_string(),
                        r.targeted.price.to_string(),
                        (100.0 * r.price_change_fraction).to_string(),
                        String::new(),
                    ],
                    Err(e) => {
                        let mut rec = vec![p.value.to_string(), "error".into()];
                        rec.extend(std::iter::repeat_n(String::new(), 5));
                        rec.push(e.to_string());
                        rec
                    }
                };
                w.write_record(&rec).map_err(csv_err)?;
            }
            finish(w)
        }
    }
}

fn phi_curve_doc(format: Format, lambda: f64, max_a: f64, step: f64) -> Result<String> {
    let tech = InfoTechnology::new(lambda)?;
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::invalid("step", format!("must be finite and > 0, got {step}")));
    }
    if !(max_a >= 0.0 && max_a.is_finite()) {
        return Err(Error::invalid("max_a", format!("must be finite and >= 0, got {max_a}")));
    }
    let count = (max_a / step + 1e-9).floor() as u64;
    if count > 10_000_000 {
        return Err(Error::invalid("step", "curve would exceed 10 million points"));
    }
    let points: Vec<(f64, f64)> = (0..=count)
        .map(|i| {
            let a = i as f64 * step;
            (a, tech.phi_unchecked(a))
        })
        .collect();
    match format {
        Format::Json => {
            let body: Vec<Value> = points.iter().map(|(a, p)| json!({ "a": a, "phi": p })).collect();
            json_text(&json!({ "lambda": lambda, "points": body }))
        }
        Format::Csv => {
            let mut w = csv_writer();
            w.write_record(["a", "phi"]).map_err(csv_err)?;
            for (a, p) in points {
                w.write_record([a.to_string(), p.to_string()]).map_err(csv_err)?;
            }
            finish(w)
        }
    }
}
