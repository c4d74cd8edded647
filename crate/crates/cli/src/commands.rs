use std::collections::BTreeMap;

use parisian_core::config::Entries;
use parisian_core::mc::{ruin_functional, simulate_ruin, McMode};
use parisian_core::{run_validation_suite, Backend, Error, McEstimate, ParisianQuery, RunConfig, ScaleFunction};
use serde::Serialize;
use serde_json::{Map, Value};

use crate::args::{BackendArg, Cli, Command, QueryArgs, ScaleArgs, TiltArgs};

pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NON_CONVERGENCE: i32 = 2;
pub const EXIT_CHECK_FAILED: i32 = 3;

#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NonConvergence(_) => EXIT_NON_CONVERGENCE,
            Error::Domain(_) | Error::Config { .. } => EXIT_INPUT,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

/// Records to print, and whether a comparison or check failed.
pub struct Outcome {
    pub records: Vec<Map<String, Value>>,
    pub failed: bool,
}

fn record<T: Serialize>(row: &T) -> Map<String, Value> {
    match serde_json::to_value(row).expect("rows serialize") {
        Value::Object(m) => m,
        other => {
            let mut m = Map::new();
            m.insert("value".into(), other);
            m
        }
    }
}

pub fn resolve_config(cli: &Cli) -> Result<RunConfig, Failure> {
    let mut overrides = Entries::new();
    for (k, v) in cli.overrides.pairs().map_err(Failure::input)? {
        overrides.insert(k, v);
    }
    Ok(RunConfig::load(cli.config.as_deref(), &overrides)?)
}

fn grid(q: &QueryArgs, nus: &[f64], x0: f64) -> Result<Vec<ParisianQuery>, Failure> {
    let mut out = Vec::new();
    for &a in &q.a {
        for &r in &q.r {
            for &z in &q.z {
                for &u in &q.u {
                    for &nu in nus {
                        let query = ParisianQuery::new(a, r, u, z).with_tilt(nu, x0);
                        query.validate()?;
                        out.push(query);
                    }
                }
            }
        }
    }
    Ok(out)
}

fn tilt_grid(t: &TiltArgs) -> Result<Vec<ParisianQuery>, Failure> {
    grid(&t.query, &t.nu, t.x0)
}

/// The parsed request of a subcommand, echoed by `--dry-run`.
pub fn request(cli: &Cli) -> Result<Value, Failure> {
    let queries = match &cli.command {
        Command::Scale(s) => {
            check_scale(s)?;
            return Ok(
                serde_json::json!({ "q": s.q, "xmax": s.xmax, "n": s.n, "backend": s.backend.map(|b| format!("{b:?}").to_lowercase()) }),
            );
        }
        Command::Validate => return Ok(Value::Null),
        Command::RuinLt(q) => grid(q, &[0.0], 0.0)?,
        Command::JointLt(t) | Command::Mc(t) => tilt_grid(t)?,
        Command::Compare(c) => tilt_grid(&c.tilt)?,
    };
    Ok(serde_json::to_value(queries).expect("queries serialize"))
}

pub fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Scale(_) => "scale",
        Command::RuinLt(_) => "ruin-lt",
        Command::JointLt(_) => "joint-lt",
        Command::Mc(_) => "mc",
        Command::Compare(_) => "compare",
        Command::Validate => "validate",
    }
}

fn check_scale(s: &ScaleArgs) -> Result<(), Failure> {
    if !(s.q >= 0.0) || !s.q.is_finite() {
        return Err(Failure::input(format!("--q must be a finite number >= 0, got {}", s.q)));
    }
    if !(s.xmax > 0.0) || !s.xmax.is_finite() {
        return Err(Failure::input(format!("--xmax must be positive, got {}", s.xmax)));
    }
    if s.n < 2 {
        return Err(Failure::input(format!("--n must be at least 2, got {}", s.n)));
    }
    Ok(())
}

#[derive(Serialize)]
struct ScaleRow {
    x: f64,
    #[serde(rename = "W")]
    w: f64,
    #[serde(rename = "Wprime")]
    w_prime: f64,
    #[serde(rename = "Wbar")]
    w_bar: f64,
}

fn scale(cfg: &RunConfig, s: &ScaleArgs) -> Result<Outcome, Failure> {
    check_scale(s)?;
    let sf = match s.backend {
        None => ScaleFunction::auto(cfg.model, s.q)?,
        Some(BackendArg::Closed) => ScaleFunction::new(cfg.model, s.q, Backend::ClosedForm)?,
        Some(BackendArg::Numeric) => ScaleFunction::new(cfg.model, s.q, Backend::NumericInversion)?,
    }
    .with_talbot_nodes(cfg.inv.nodes);
    let mut records = Vec::with_capacity(s.n);
    for i in 0..s.n {
        let x = s.xmax * i as f64 / (s.n - 1) as f64;
        records.push(record(&ScaleRow {
            x,
            w: sf.w(x)?,
            w_prime: sf.w_prime(x)?,
            w_bar: sf.w_bar(x)?,
        }));
    }
    Ok(Outcome { records, failed: false })
}

#[derive(Serialize)]
struct ValueRow {
    #[serde(flatten)]
    query: ParisianQuery,
    value: f64,
}

fn formula_rows(queries: Vec<ParisianQuery>, values: Vec<parisian_core::Result<f64>>) -> Result<Outcome, Failure> {
    let mut records = Vec::with_capacity(queries.len());
    for (query, value) in queries.into_iter().zip(values) {
        records.push(record(&ValueRow { query, value: value? }));
    }
    Ok(Outcome { records, failed: false })
}

/// Simulates once per `(a, r, z)` and evaluates every `(u, nu)` on the
/// same paths. Output order follows `queries`.
fn monte_carlo(cfg: &RunConfig, queries: &[ParisianQuery]) -> Result<Vec<McEstimate>, Failure> {
    let mut groups: BTreeMap<[u64; 4], Vec<usize>> = BTreeMap::new();
    for (i, q) in queries.iter().enumerate() {
        groups
            .entry([q.a.to_bits(), q.r.to_bits(), q.z.to_bits(), q.x0.to_bits()])
            .or_default()
            .push(i);
    }
    let mut out: Vec<Option<McEstimate>> = vec![None; queries.len()];
    for idx in groups.values() {
        let q0 = queries[idx[0]];
        let samples = simulate_ruin(&cfg.model, q0.a, q0.r, q0.z, q0.x0, &cfg.mc)?;
        for &i in idx {
            out[i] = Some(ruin_functional(&samples, queries[i].u, queries[i].nu, cfg.mc.seed));
        }
    }
    Ok(out.into_iter().map(|e| e.expect("every query is in a group")).collect())
}

#[derive(Serialize)]
struct McRow {
    #[serde(flatten)]
    query: ParisianQuery,
    #[serde(flatten)]
    estimate: McEstimate,
}

#[derive(Serialize)]
struct CompareRow {
    #[serde(flatten)]
    query: ParisianQuery,
    formula: f64,
    mc_mean: f64,
    mc_stderr: f64,
    z_score: f64,
    allowance: f64,
    pass: bool,
}

fn compare(cfg: &RunConfig, queries: Vec<ParisianQuery>, bias_c: f64) -> Result<Outcome, Failure> {
    let engine = cfg.parisian();
    let formulas = engine.joint_lt_batch(&queries);
    let estimates = monte_carlo(cfg, &queries)?;
    let bias = match cfg.mc.mode {
        McMode::Euler => bias_c * cfg.mc.dt,
        McMode::Exact => 0.0,
    };
    let mut records = Vec::new();
    let mut failed = false;
    for ((query, formula), est) in queries.into_iter().zip(formulas).zip(estimates) {
        let formula = formula?;
        let allowance = 3.0 * est.stderr + bias;
        let pass = (formula - est.mean).abs() <= allowance;
        failed |= !pass;
        records.push(record(&CompareRow {
            query,
            formula,
            mc_mean: est.mean,
            mc_stderr: est.stderr,
            z_score: est.z_score(formula),
            allowance,
            pass,
        }));
    }
    Ok(Outcome { records, failed })
}

pub fn execute(cfg: &RunConfig, cmd: &Command) -> Result<Outcome, Failure> {
    match cmd {
        Command::Scale(s) => scale(cfg, s),
        Command::RuinLt(q) => {
            let queries = grid(q, &[0.0], 0.0)?;
            let values = cfg.parisian().lt_ruin_batch(&queries);
            formula_rows(queries, values)
        }
        Command::JointLt(t) => {
            let queries = tilt_grid(t)?;
            let values = cfg.parisian().joint_lt_batch(&queries);
            formula_rows(queries, values)
        }
        Command::Mc(t) => {
            let queries = tilt_grid(t)?;
            let estimates = monte_carlo(cfg, &queries)?;
            let records = queries
                .into_iter()
                .zip(estimates)
                .map(|(query, estimate)| record(&McRow { query, estimate }))
                .collect();
            Ok(Outcome { records, failed: false })
        }
        Command::Compare(c) => compare(cfg, tilt_grid(&c.tilt)?, c.bias_c),
        Command::Validate => {
            let report = run_validation_suite(cfg)?;
            let failed = !report.all_pass();
            let records = report.checks.iter().map(record).collect();
            Ok(Outcome { records, failed })
        }
    }
}
