//! Command-line front end.
//!
//! Every subcommand produces a [`Report`]: the resolved configuration plus
//! one or more named tables, rendered as aligned text, CSV or JSON.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::cost::CostDistribution;
use crate::error::{Error, Result};
use crate::game::{self, StrategyProfile, DEFAULT_GRID};
use crate::mechanisms::{self, MechanismSpec, PointMass, PriceDistribution, PriceMechanism};
use crate::model::{PremiumFraction, QueueParams};
use crate::quadrature::{integrate, ABS_TOL, REL_TOL};
use crate::sim::{self, Assignment, Estimate, SimConfig};

/// Significant digits in CSV and JSON output.
pub const MACHINE_DIGITS: usize = 12;
/// Significant digits in human-readable output.
pub const HUMAN_DIGITS: usize = 6;

const DEFAULT_TABLE_POINTS: usize = 11;
const DEFAULT_CUSTOMERS: usize = 100_000;
const DEFAULT_SEED: u64 = 1;
const DEFAULT_DISCRETE_N: usize = 10;

#[derive(Debug, Parser)]
#[command(
    name = "prioq",
    version,
    about = "Priority pricing for the two-class M/M/1 queue"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate premium/ordinary waits and the value of priority over a q grid
    Formulas(Args),
    /// Dump a mechanism's price distribution or schedule with its mean
    Mechanism(Args),
    /// Enumerate equilibria for a flat price or random mechanism
    Equilibria(Args),
    /// Run the queue simulation and compare with closed forms
    Simulate(Args),
    /// Revenue of every mechanism side by side
    Compare(Args),
}

impl Command {
    fn parts(&self) -> (&'static str, &Args) {
        match self {
            Self::Formulas(a) => ("formulas", a),
            Self::Mechanism(a) => ("mechanism", a),
            Self::Equilibria(a) => ("equilibria", a),
            Self::Simulate(a) => ("simulate", a),
            Self::Compare(a) => ("compare", a),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Human,
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, clap::Args)]
pub struct Args {
    /// TOML file with default values for any of the flags below
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    /// Premium fraction
    #[arg(long)]
    pub q: Option<f64>,
    /// Flat price
    #[arg(long)]
    pub tau: Option<f64>,
    /// e.g. "flat 1.5", "random-optimal", "discrete 10", "auction",
    /// "hetero uniform 0 2"
    #[arg(long)]
    pub mechanism: Option<MechanismSpec>,
    /// e.g. "uniform 0 2", "exponential 1", "lognormal 0 1", "truncnormal 1 0.5"
    #[arg(long = "cost-dist")]
    pub cost_dist: Option<CostDistribution>,
    /// Discrete grid size
    #[arg(long)]
    pub n: Option<usize>,
    /// Customers per replication, warmup included
    #[arg(long)]
    pub customers: Option<usize>,
    /// Leading customers discarded (default 1% of customers)
    #[arg(long)]
    pub warmup: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub replications: Option<usize>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write output here instead of standard output
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Points in the output table, or the audit grid for `equilibria`
    #[arg(long)]
    pub grid: Option<usize>,
}

/// Contents of a `--config` file. Keys mirror the long flags.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub lambda: Option<f64>,
    pub mu: Option<f64>,
    pub q: Option<f64>,
    pub tau: Option<f64>,
    pub mechanism: Option<FileMechanism>,
    pub cost_dist: Option<CostDistribution>,
    pub n: Option<usize>,
    pub customers: Option<usize>,
    pub warmup: Option<usize>,
    pub seed: Option<u64>,
    pub replications: Option<usize>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub grid: Option<usize>,
}

/// A mechanism in a config file: either the flag syntax as a string or a
/// table with `kind`, `tau`, `n` and `cost_dist`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum FileMechanism {
    Text(String),
    Table(MechanismSpec),
}

impl FileMechanism {
    fn spec(&self) -> Result<MechanismSpec> {
        match self {
            Self::Text(s) => s.parse(),
            Self::Table(m) => Ok(*m),
        }
    }
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }
}

/// Fully resolved settings of one invocation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    pub lambda: f64,
    pub mu: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mechanism: Option<MechanismSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cost_dist: Option<CostDistribution>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    pub customers: usize,
    pub warmup: usize,
    pub seed: u64,
    pub replications: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    pub format: Format,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    /// Merges flags over the optional config file.
    pub fn resolve(command: &'static str, args: &Args) -> Result<Self> {
        let file = match &args.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        let lambda = args
            .lambda
            .or(file.lambda)
            .ok_or_else(|| Error::InvalidConfig("--lambda is required".into()))?;
        let customers = args
            .customers
            .or(file.customers)
            .unwrap_or(DEFAULT_CUSTOMERS);
        Ok(Self {
            command,
            lambda,
            mu: args.mu.or(file.mu).unwrap_or(1.0),
            q: args.q.or(file.q),
            tau: args.tau.or(file.tau),
            mechanism: match args.mechanism {
                Some(m) => Some(m),
                None => file
                    .mechanism
                    .as_ref()
                    .map(FileMechanism::spec)
                    .transpose()?,
            },
            cost_dist: args.cost_dist.or(file.cost_dist),
            n: args.n.or(file.n),
            customers,
            warmup: args.warmup.or(file.warmup).unwrap_or(customers / 100),
            seed: args.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            replications: args.replications.or(file.replications).unwrap_or(1),
            grid: args.grid.or(file.grid),
            format: args.format.or(file.format).unwrap_or_default(),
            out: args.out.clone().or(file.out),
        })
    }

    pub fn params(&self) -> Result<QueueParams> {
        QueueParams::new(self.lambda, self.mu)
    }

    fn mechanism(&self, params: QueueParams) -> Result<Option<PriceMechanism>> {
        self.mechanism
            .map(|m| m.build(params, self.tau, self.n, self.cost_dist))
            .transpose()
    }
}

// ---------------------------------------------------------------------------
// Tables
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Empty,
}

impl Cell {
    fn text(s: impl Into<String>) -> Self {
        Self::Text(s.into())
    }

    fn opt(x: Option<f64>) -> Self {
        x.map_or(Self::Empty, Self::Num)
    }

    fn render(&self, digits: usize) -> String {
        match self {
            Self::Num(x) => format_number(*x, digits),
            Self::Int(i) => i.to_string(),
            Self::Text(s) => s.clone(),
            Self::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Self::Num(x) => serde_json::Number::from_f64(round_sig(*x, MACHINE_DIGITS))
                .map_or(Value::Null, Value::Number),
            Self::Int(i) => Value::from(*i),
            Self::Text(s) => Value::from(s.as_str()),
            Self::Empty => Value::Null,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(name: &'static str, columns: &[&'static str]) -> Self {
        Self {
            name,
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Looks up a numeric cell by column name in `row`.
    pub fn num(&self, row: usize, column: &str) -> Option<f64> {
        let c = self.columns.iter().position(|&k| k == column)?;
        match self.rows.get(row)?.get(c)? {
            Cell::Num(x) => Some(*x),
            Cell::Int(i) => Some(*i as f64),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub config: RunConfig,
    pub tables: Vec<Table>,
}

impl Report {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Human => self.render_human(),
            Format::Csv => self.render_csv(),
            Format::Json => self.render_json(),
        }
    }

    fn render_human(&self) -> String {
        let mut out = String::new();
        for (i, t) in self.tables.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            let cells: Vec<Vec<String>> = t
                .rows
                .iter()
                .map(|r| r.iter().map(|c| c.render(HUMAN_DIGITS)).collect())
                .collect();
            let widths: Vec<usize> = (0..t.columns.len())
                .map(|j| {
                    cells
                        .iter()
                        .map(|r| r[j].len())
                        .chain(std::iter::once(t.columns[j].len()))
                        .max()
                        .unwrap_or(0)
                })
                .collect();
            let _ = writeln!(out, "[{}]", t.name);
            let line = |out: &mut String, items: &[&str]| {
                let parts: Vec<String> = items
                    .iter()
                    .zip(&widths)
                    .map(|(s, w)| format!("{s:>w$}"))
                    .collect();
                let _ = writeln!(out, "{}", parts.join("  ").trim_end());
            };
            line(&mut out, &t.columns);
            for r in &cells {
                let refs: Vec<&str> = r.iter().map(String::as_str).collect();
                line(&mut out, &refs);
            }
        }
        out
    }

    /// Tables separated by a blank line, each with its own header.
    fn render_csv(&self) -> String {
        let mut out = String::new();
        for (i, t) in self.tables.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            out.push_str(&t.columns.join(","));
            out.push('\n');
            for r in &t.rows {
                let line: Vec<String> = r
                    .iter()
                    .map(|c| csv_field(&c.render(MACHINE_DIGITS)))
                    .collect();
                out.push_str(&line.join(","));
                out.push('\n');
            }
        }
        out
    }

    fn render_json(&self) -> String {
        let mut results = Map::new();
        for t in &self.tables {
            let rows: Vec<Value> = t
                .rows
                .iter()
                .map(|r| {
                    let obj: Map<String, Value> = t
                        .columns
                        .iter()
                        .zip(r)
                        .map(|(k, c)| ((*k).to_string(), c.json()))
                        .collect();
                    Value::Object(obj)
                })
                .collect();
            results.insert(t.name.to_string(), Value::Array(rows));
        }
        let mut top = Map::new();
        top.insert(
            "config".into(),
            serde_json::to_value(&self.config).expect("config serializes"),
        );
        top.insert("results".into(), Value::Object(results));
        let mut s = serde_json::to_string_pretty(&Value::Object(top)).expect("json serializes");
        s.push('\n');
        s
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Rounds to `digits` significant digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x)
        .parse()
        .unwrap_or(x)
}

/// Shortest decimal rendering of `x` rounded to `digits` significant digits.
pub fn format_number(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let r = round_sig(x, digits);
    let a = r.abs();
    if a == 0.0 {
        "0".into()
    } else if !(1e-5..1e15).contains(&a) {
        format!("{r:e}")
    } else {
        format!("{r}")
    }
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

/// Evenly spaced points on `[a, b]`; a single point sits at `a`.
fn linspace(a: f64, b: f64, k: usize) -> Vec<f64> {
    match k {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..k)
            .map(|i| {
                if i + 1 == k {
                    b
                } else {
                    a + (b - a) * i as f64 / (k - 1) as f64
                }
            })
            .collect(),
    }
}

fn grid_points(cfg: &RunConfig) -> Result<usize> {
    match cfg.grid.unwrap_or(DEFAULT_TABLE_POINTS) {
        0 => Err(Error::InvalidConfig(
            "grid must have at least one point".into(),
        )),
        k => Ok(k),
    }
}

fn summary_row(t: &mut Table, name: &str, value: f64) {
    t.push(vec![Cell::text(name), Cell::Num(value)]);
}

fn cmd_formulas(cfg: &RunConfig) -> Result<Vec<Table>> {
    let params = cfg.params()?;
    let qs = match cfg.q {
        Some(q) => vec![PremiumFraction::new(q)?.value()],
        None => linspace(0.0, 1.0, grid_points(cfg)?),
    };
    let mut t = Table::new("formulas", &["q", "w1", "w2", "f"]);
    for q in qs {
        let q = PremiumFraction::new(q)?;
        t.push(vec![
            Cell::Num(q.value()),
            Cell::Num(params.mean_wait_premium(q)),
            Cell::Num(params.mean_wait_ordinary(q)),
            Cell::Num(params.priority_value(q)),
        ]);
    }
    Ok(vec![t])
}

fn cdf_table(dist: &dyn PriceDistribution, k: usize) -> Table {
    let (lo, hi) = dist.support();
    let mut t = Table::new("cdf", &["price", "cdf"]);
    for x in linspace(lo, hi, k) {
        t.push(vec![Cell::Num(x), Cell::Num(dist.cdf(x))]);
    }
    t
}

fn cmd_mechanism(cfg: &RunConfig) -> Result<Vec<Table>> {
    let params = cfg.params()?;
    let mech = match cfg.mechanism(params)? {
        Some(m) => m,
        None => match cfg.tau {
            Some(tau) => PriceMechanism::flat(tau)?,
            None => {
                return Err(Error::InvalidConfig(
                    "--mechanism or --tau is required".into(),
                ))
            }
        },
    };
    let k = grid_points(cfg)?;
    let mut summary = Table::new("summary", &["quantity", "value"]);
    let data = match mech {
        PriceMechanism::Flat { tau } => {
            summary_row(&mut summary, "support_low", tau);
            summary_row(&mut summary, "support_high", tau);
            cdf_table(&PointMass::new(tau), 1)
        }
        PriceMechanism::RandomOptimal { .. } => {
            let dist = mech
                .price_distribution()
                .expect("random price has a distribution");
            let (lo, hi) = dist.support();
            summary_row(&mut summary, "support_low", lo);
            summary_row(&mut summary, "support_high", hi);
            cdf_table(dist.as_ref(), k)
        }
        PriceMechanism::DiscreteOptimal { n, .. } => {
            let grid = mechanisms::discrete_grid(&params, n)?;
            summary_row(&mut summary, "support_low", grid[0].price);
            summary_row(&mut summary, "support_high", grid[grid.len() - 1].price);
            let mut t = Table::new("grid", &["price", "probability", "cdf"]);
            let mut acc = 0.0;
            for p in &grid {
                acc += p.probability;
                t.push(vec![
                    Cell::Num(p.price),
                    Cell::Num(p.probability),
                    Cell::Num(acc.min(1.0)),
                ]);
            }
            t
        }
        PriceMechanism::AuctionHomogeneous { .. } => {
            let ymax = mechanisms::auction_support_max(&params);
            summary_row(&mut summary, "support_low", 0.0);
            summary_row(&mut summary, "support_high", ymax);
            summary_row(
                &mut summary,
                "max_over_mean",
                ymax / mechanisms::auction_mean_homogeneous(&params),
            );
            let mut t = Table::new("cdf", &["payment", "cdf", "density"]);
            for y in linspace(0.0, ymax, k) {
                t.push(vec![
                    Cell::Num(y),
                    Cell::Num(mechanisms::auction_cdf_homogeneous(&params, y)),
                    Cell::Num(mechanisms::auction_density_homogeneous(&params, y)),
                ]);
            }
            t
        }
        PriceMechanism::HeteroSchedule { cost_dist, .. } => {
            let (lo, hi) = mechanisms::hetero_profit_bounds(&params, &cost_dist);
            summary_row(&mut summary, "profit_lower_bound", lo);
            summary_row(&mut summary, "profit_upper_bound", hi);
            let (a, b) = cost_dist.integration_range();
            let mut t = Table::new("schedule", &["cost", "cost_cdf", "price"]);
            for c in linspace(a, b, k) {
                t.push(vec![
                    Cell::Num(c),
                    Cell::Num(cost_dist.cdf(c)),
                    Cell::Num(mechanisms::hetero_price(&params, &cost_dist, c)),
                ]);
            }
            t
        }
        PriceMechanism::AuctionHetero { cost_dist, .. } => {
            let (a, b) = cost_dist.integration_range();
            let mut t = Table::new("payments", &["cost", "cost_cdf", "payment"]);
            for c in linspace(a, b, k) {
                let pay = mechanisms::auction_payment_hetero(&params, &cost_dist, c)?;
                t.push(vec![
                    Cell::Num(c),
                    Cell::Num(cost_dist.cdf(c)),
                    Cell::Num(pay.value),
                ]);
            }
            t
        }
    };
    summary_row(&mut summary, "mean_payment", mech.mean_payment()?);
    let mut head = Table::new("mechanism", &["name"]);
    head.push(vec![Cell::text(mech.name())]);
    Ok(vec![head, data, summary])
}

fn profile_cells(profile: &StrategyProfile) -> (Cell, Cell) {
    match profile {
        StrategyProfile::AllPay => (Cell::text("all_pay"), Cell::Empty),
        StrategyProfile::NonePay => (Cell::text("none_pay"), Cell::Empty),
        StrategyProfile::Mixed { .. } => (Cell::text("mixed"), Cell::Empty),
        StrategyProfile::Threshold { p_cut } => (Cell::text("threshold"), Cell::Num(*p_cut)),
    }
}

fn stability_cell(s: game::Stability) -> Cell {
    Cell::text(match s {
        game::Stability::Stable => "stable",
        game::Stability::Unstable => "unstable",
    })
}

const EQ_COLUMNS: [&str; 6] = [
    "profile",
    "paying_fraction",
    "price_cut",
    "stability",
    "revenue",
    "slack",
];

fn cmd_equilibria(cfg: &RunConfig) -> Result<Vec<Table>> {
    let params = cfg.params()?;
    let mech = match (cfg.mechanism(params)?, cfg.tau) {
        (Some(m), _) => m,
        (None, Some(tau)) => PriceMechanism::flat(tau)?,
        (None, None) => {
            return Err(Error::InvalidConfig(
                "--tau or --mechanism is required".into(),
            ))
        }
    };
    let mut eqs = Table::new("equilibria", &EQ_COLUMNS);
    let mut summary = Table::new("summary", &["unique", "count", "revenue_worst_case"]);
    let mut tables = Vec::new();

    if let PriceMechanism::Flat { tau } = mech {
        let report = game::flat_price_equilibria(&params, tau)?;
        for e in &report.equilibria {
            let fraction = match e.profile {
                StrategyProfile::AllPay => 1.0,
                StrategyProfile::NonePay => 0.0,
                StrategyProfile::Mixed { q } => q.value(),
                StrategyProfile::Threshold { .. } => unreachable!("flat prices have no thresholds"),
            };
            let (name, cut) = profile_cells(&e.profile);
            eqs.push(vec![
                name,
                Cell::Num(fraction),
                cut,
                stability_cell(e.stability),
                Cell::Num(e.revenue),
                Cell::Empty,
            ]);
        }
        summary.push(vec![
            Cell::text(report.unique.to_string()),
            Cell::Int(report.len() as u64),
            Cell::Num(report.revenue_worst_case),
        ]);
    } else {
        let dist = mech.price_distribution().ok_or_else(|| {
            Error::InvalidConfig(format!(
                "`{}` is not a price distribution; equilibria needs a flat or random price",
                mech.name()
            ))
        })?;
        let grid = cfg.grid.unwrap_or(DEFAULT_GRID);
        let found = game::find_threshold_equilibria(&params, dist.as_ref(), grid)?;
        for e in &found {
            let (name, cut) = profile_cells(&e.profile);
            eqs.push(vec![
                name,
                Cell::Num(e.paying_fraction),
                cut,
                stability_cell(e.stability),
                Cell::Num(e.revenue),
                Cell::Num(e.slack),
            ]);
        }
        let worst = found
            .iter()
            .map(|e| e.revenue)
            .fold(f64::INFINITY, f64::min);
        summary.push(vec![
            Cell::text((found.len() == 1).to_string()),
            Cell::Int(found.len() as u64),
            Cell::opt(worst.is_finite().then_some(worst)),
        ]);
        let audit = game::verify_unique_all_pay(&params, dist.as_ref(), grid)?;
        let mut t = Table::new(
            "audit",
            &[
                "unique_all_pay",
                "grid_points",
                "min_slack",
                "max_equality_residual",
                "counterexamples",
            ],
        );
        t.push(vec![
            Cell::text(audit.holds.to_string()),
            Cell::Int(audit.grid_points as u64),
            Cell::Num(audit.min_slack),
            Cell::Num(audit.max_equality_residual),
            Cell::Int(audit.counterexamples.len() as u64),
        ]);
        tables.push(t);
    }
    tables.insert(0, summary);
    tables.insert(0, eqs);
    Ok(tables)
}

/// Paying fraction and revenue per customer the simulation should match.
fn analytic_outcome(params: &QueueParams, mech: &PriceMechanism) -> Result<(f64, f64)> {
    if let PriceMechanism::HeteroSchedule { cost_dist, .. } = mech {
        return Ok((1.0, mechanisms::hetero_profit(params, cost_dist)?.value));
    }
    let dist: Box<dyn PriceDistribution> = match *mech {
        PriceMechanism::Flat { tau } => Box::new(PointMass::new(tau)),
        ref m => m.price_distribution().ok_or_else(|| {
            Error::InvalidConfig(format!("`{}` cannot drive class assignment", m.name()))
        })?,
    };
    let report = match *mech {
        PriceMechanism::Flat { tau } => game::flat_price_equilibria(params, tau)?,
        _ => game::mechanism_equilibria(params, dist.as_ref(), DEFAULT_GRID)?,
    };
    let worst = report
        .equilibria
        .iter()
        .min_by(|a, b| a.revenue.total_cmp(&b.revenue))
        .ok_or_else(|| Error::InvalidConfig("mechanism has no equilibrium".into()))?;
    Ok(match worst.profile {
        StrategyProfile::AllPay => (1.0, mech.mean_payment()?),
        StrategyProfile::NonePay => (0.0, 0.0),
        StrategyProfile::Mixed { q } => (q.value(), worst.revenue),
        StrategyProfile::Threshold { p_cut } => {
            // E[P; P <= cut] = cut G(cut) - ∫ G over [low, cut]
            let low = dist.support().0;
            let area = integrate(|x| dist.cdf(x), low, p_cut, ABS_TOL, REL_TOL)?.value;
            (dist.cdf(p_cut), p_cut * dist.cdf(p_cut) - area)
        }
    })
}

fn estimate_row(metric: &str, est: Option<Estimate>, analytic: f64) -> Vec<Cell> {
    match est {
        Some(e) => vec![
            Cell::text(metric),
            Cell::Num(e.mean),
            Cell::Num(e.std_error),
            Cell::Num(analytic),
            Cell::Num(e.z_score(analytic).abs()),
        ],
        None => vec![
            Cell::text(metric),
            Cell::Empty,
            Cell::Empty,
            Cell::Num(analytic),
            Cell::Empty,
        ],
    }
}

fn cmd_simulate(cfg: &RunConfig) -> Result<Vec<Table>> {
    let params = cfg.params()?;
    let (assignment, q, revenue) = match (cfg.mechanism(params)?, cfg.q) {
        (Some(mechanism), _) => {
            let (q, revenue) = analytic_outcome(&params, &mechanism)?;
            (Assignment::Mechanism { mechanism }, q, Some(revenue))
        }
        (None, Some(q)) => {
            let q = PremiumFraction::new(q)?;
            (Assignment::Fraction { q }, q.value(), None)
        }
        (None, None) => {
            return Err(Error::InvalidConfig(
                "--q or --mechanism is required".into(),
            ))
        }
    };
    let sim_cfg = SimConfig {
        params,
        assignment,
        num_customers: cfg.customers,
        warmup_customers: cfg.warmup,
        seed: cfg.seed,
        replications: cfg.replications,
    };
    let res = sim::simulate_priority_queue(&sim_cfg)?;
    let qf = PremiumFraction::clamped(q);

    let mut est = Table::new(
        "estimates",
        &["metric", "estimate", "std_error", "analytic", "abs_z"],
    );
    // Sojourn = wait in system including own service.
    est.push(estimate_row(
        "sojourn_premium",
        res.mean_sojourn_premium,
        params.mean_wait_premium(qf),
    ));
    est.push(estimate_row(
        "sojourn_ordinary",
        res.mean_sojourn_ordinary,
        params.mean_wait_ordinary(qf),
    ));
    if let Some(r) = revenue {
        est.push(estimate_row(
            "revenue_per_customer",
            res.mean_revenue_per_customer,
            r,
        ));
    }
    let mut run = Table::new(
        "run",
        &[
            "seed",
            "replications",
            "premium_count",
            "ordinary_count",
            "arrivals",
            "departures",
            "in_system",
        ],
    );
    run.push(vec![
        Cell::Int(res.seed),
        Cell::Int(res.replications as u64),
        Cell::Int(res.counts.premium as u64),
        Cell::Int(res.counts.ordinary as u64),
        Cell::Int(res.arrivals),
        Cell::Int(res.departures),
        Cell::Int(res.in_system),
    ]);
    Ok(vec![est, run])
}

fn cmd_compare(cfg: &RunConfig) -> Result<Vec<Table>> {
    let params = cfg.params()?;
    let (f0, f1) = params.value_bounds();
    let n = cfg.n.unwrap_or(DEFAULT_DISCRETE_N);
    let random = mechanisms::random_price_mean(&params);
    let discrete = mechanisms::discrete_mean(&params, n)?;
    let auction = mechanisms::auction_mean_homogeneous(&params);

    let mut rev = Table::new(
        "revenue",
        &["mechanism", "revenue", "lower_bound", "upper_bound"],
    );
    let row = |name: String, r: f64, lo: Option<f64>, hi: Option<f64>| {
        vec![Cell::Text(name), Cell::Num(r), Cell::opt(lo), Cell::opt(hi)]
    };
    rev.push(row("flat f(0)".into(), f0, None, None));
    rev.push(row(
        format!("discrete n={n}"),
        discrete,
        Some(f0),
        Some(random),
    ));
    rev.push(row("random-optimal".into(), random, Some(f0), Some(f1)));
    rev.push(row("auction".into(), auction, None, None));

    let mut ord = Table::new("orderings", &["relation", "holds"]);
    let mut check = |relation: &str, holds: bool| {
        ord.push(vec![Cell::text(relation), Cell::text(holds.to_string())]);
    };
    check("flat f(0) < random-optimal", f0 < random);
    check(
        &format!("discrete n={n} <= random-optimal"),
        discrete <= random,
    );
    check("random-optimal < f(1)", random < f1);
    check("random-optimal < auction", random < auction);

    if let Some(dist) = cfg.cost_dist {
        let profit = mechanisms::hetero_profit(&params, &dist)?.value;
        let (lo, hi) = mechanisms::hetero_profit_bounds(&params, &dist);
        let auction_h = mechanisms::auction_mean_hetero(&params, &dist)?.value;
        rev.push(row(
            format!("hetero-schedule {dist}"),
            profit,
            Some(lo),
            Some(hi),
        ));
        rev.push(row(format!("auction-hetero {dist}"), auction_h, None, None));
        check(
            "f(0) E[C] < hetero-schedule < f(1) E[C]",
            lo < profit && profit < hi,
        );
    }
    Ok(vec![rev, ord])
}

/// Runs one parsed invocation.
pub fn execute(cli: &Cli) -> Result<Report> {
    let (name, args) = cli.command.parts();
    let config = RunConfig::resolve(name, args)?;
    let tables = match cli.command {
        Command::Formulas(_) => cmd_formulas(&config)?,
        Command::Mechanism(_) => cmd_mechanism(&config)?,
        Command::Equilibria(_) => cmd_equilibria(&config)?,
        Command::Simulate(_) => cmd_simulate(&config)?,
        Command::Compare(_) => cmd_compare(&config)?,
    };
    Ok(Report { config, tables })
}

/// Parses `args`, runs the command and writes the rendered report.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let report = match execute(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    let text = report.render(report.config.format);
    let written = match &report.config.out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
        }
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| format!("cannot write output: {e}"))
        }
    };
    match written {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
