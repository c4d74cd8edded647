//! Flat `key = value` run configuration.
//!
//! ```text
//! # comment
//! model.kind = brownian_drift
//! model.mu = 0.5
//! model.sigma = 1
//! quad.rel_tol = 1e-8
//! mc.paths = 1e5
//! ```
//!
//! Values resolve as command-line override, then file, then default. Every
//! error names the key it concerns.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::DEFAULT_TAIL_SDS;
use crate::levy::{LevyModel, ModelKind};
use crate::mc::{McConfig, McMode};
use crate::parisian::Parisian;
use crate::quad::QuadOptions;
use crate::scale::DEFAULT_TALBOT_NODES;

/// Every key the parser accepts.
pub const KNOWN_KEYS: &[&str] = &[
    "model.kind",
    "model.mu",
    "model.sigma",
    "model.jump_rate",
    "model.jump_mean",
    "quad.rel_tol",
    "quad.abs_tol",
    "quad.max_intervals",
    "quad.zmax_sds",
    "inv.nodes",
    "mc.paths",
    "mc.dt",
    "mc.seed",
    "mc.horizon_cap",
    "mc.mode",
];

/// Parsed but unvalidated entries.
pub type Entries = BTreeMap<String, String>;

/// Parses `key = value` lines. Blank lines and `#` comments are skipped;
/// repeated keys keep the last value.
pub fn parse_entries(text: &str) -> Result<Entries> {
    let mut out = Entries::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::config(format!("line {}", n + 1), format!("expected key = value, got `{line}`")))?;
        let key = key.trim();
        if !KNOWN_KEYS.contains(&key) {
            return Err(Error::config(key, "unknown key"));
        }
        out.insert(key.to_string(), value.trim().to_string());
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadSection {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
    /// Standard deviations past the shifted Gaussian centre at which space
    /// integrals are truncated.
    pub zmax_sds: f64,
}

impl Default for QuadSection {
    fn default() -> Self {
        let q = QuadOptions::default();
        QuadSection {
            rel_tol: q.rel_tol,
            abs_tol: q.abs_tol,
            max_intervals: q.max_intervals,
            zmax_sds: DEFAULT_TAIL_SDS,
        }
    }
}

impl QuadSection {
    pub fn options(&self) -> QuadOptions {
        QuadOptions {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_intervals: self.max_intervals,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvSection {
    pub nodes: usize,
}

impl Default for InvSection {
    fn default() -> Self {
        InvSection {
            nodes: DEFAULT_TALBOT_NODES,
        }
    }
}

/// A validated configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub model: LevyModel,
    pub quad: QuadSection,
    pub inv: InvSection,
    pub mc: McConfig,
}

fn get<'a>(e: &'a Entries, key: &str) -> Option<&'a str> {
    e.get(key).map(String::as_str)
}

fn real(e: &Entries, key: &str) -> Result<Option<f64>> {
    match get(e, key) {
        None => Ok(None),
        Some(v) => match v.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(Some(x)),
            _ => Err(Error::config(key, format!("expected a finite number, got `{v}`"))),
        },
    }
}

fn required(e: &Entries, key: &str) -> Result<f64> {
    real(e, key)?.ok_or_else(|| Error::config(key, "missing"))
}

fn count(e: &Entries, key: &str) -> Result<Option<usize>> {
    match real(e, key)? {
        None => Ok(None),
        Some(x) if x >= 0.0 && x.fract() == 0.0 && x <= 1e15 => Ok(Some(x as usize)),
        Some(_) => Err(Error::config(
            key,
            format!("expected a non-negative integer, got `{}`", e[key]),
        )),
    }
}

fn positive(key: &str, v: f64) -> Result<f64> {
    if v > 0.0 {
        Ok(v)
    } else {
        Err(Error::config(key, format!("must be positive, got {v}")))
    }
}

fn parse_model(e: &Entries) -> Result<LevyModel> {
    let kind: ModelKind = get(e, "model.kind")
        .ok_or_else(|| Error::config("model.kind", "missing"))?
        .parse()?;
    let model = match kind {
        ModelKind::BrownianDrift => {
            if let Some(rate) = real(e, "model.jump_rate")? {
                if rate != 0.0 {
                    return Err(Error::config("model.jump_rate", "brownian_drift has no jumps"));
                }
            }
            let mu = required(e, "model.mu")?;
            let sigma = positive("model.sigma", required(e, "model.sigma")?)?;
            LevyModel::brownian(mu, sigma)
        }
        ModelKind::CramerLundbergExp => {
            if let Some(sigma) = real(e, "model.sigma")? {
                if sigma != 0.0 {
                    return Err(Error::config("model.sigma", "cramer_lundberg_exp has no Gaussian part"));
                }
            }
            let c = positive("model.mu", required(e, "model.mu")?)?;
            let rate = positive("model.jump_rate", required(e, "model.jump_rate")?)?;
            let mean = positive("model.jump_mean", required(e, "model.jump_mean")?)?;
            LevyModel::cramer_lundberg(c, rate, mean)
        }
        ModelKind::PerturbedClExp => {
            let mu = required(e, "model.mu")?;
            let sigma = positive("model.sigma", required(e, "model.sigma")?)?;
            let rate = positive("model.jump_rate", required(e, "model.jump_rate")?)?;
            let mean = positive("model.jump_mean", required(e, "model.jump_mean")?)?;
            LevyModel::perturbed(mu, sigma, rate, mean)
        }
    };
    model.map_err(|err| Error::config("model", err.to_string()))
}

impl RunConfig {
    /// Merges `file` and `overrides` (overrides win) over the defaults.
    pub fn resolve(file: &Entries, overrides: &Entries) -> Result<Self> {
        let mut merged = file.clone();
        for (k, v) in overrides {
            if !KNOWN_KEYS.contains(&k.as_str()) {
                return Err(Error::config(k.as_str(), "unknown key"));
            }
            merged.insert(k.clone(), v.clone());
        }
        Self::from_entries(&merged)
    }

    pub fn from_entries(e: &Entries) -> Result<Self> {
        let model = parse_model(e)?;

        let mut quad = QuadSection::default();
        if let Some(v) = real(e, "quad.rel_tol")? {
            quad.rel_tol = positive("quad.rel_tol", v)?;
        }
        if let Some(v) = real(e, "quad.abs_tol")? {
            quad.abs_tol = positive("quad.abs_tol", v)?;
        }
        if let Some(v) = count(e, "quad.max_intervals")? {
            if v == 0 {
                return Err(Error::config("quad.max_intervals", "must be at least 1"));
            }
            quad.max_intervals = v;
        }
        if let Some(v) = real(e, "quad.zmax_sds")? {
            quad.zmax_sds = positive("quad.zmax_sds", v)?;
        }

        let mut inv = InvSection::default();
        if let Some(v) = count(e, "inv.nodes")? {
            if v < 16 {
                return Err(Error::config("inv.nodes", format!("must be at least 16, got {v}")));
            }
            inv.nodes = v;
        }

        let mut mc = McConfig::for_model(&model);
        if let Some(v) = count(e, "mc.paths")? {
            mc.n_paths = v;
        }
        if let Some(v) = real(e, "mc.dt")? {
            mc.dt = v;
        }
        if let Some(v) = get(e, "mc.seed") {
            mc.seed = v
                .parse()
                .map_err(|_| Error::config("mc.seed", format!("expected an unsigned 64-bit integer, got `{v}`")))?;
        }
        if let Some(v) = real(e, "mc.horizon_cap")? {
            mc.horizon_cap = v;
        }
        if let Some(v) = get(e, "mc.mode") {
            mc.mode = v.parse::<McMode>()?;
        }
        mc.validate(&model)?;

        Ok(RunConfig { model, quad, inv, mc })
    }

    /// Reads and resolves a config file.
    pub fn load(path: Option<&std::path::Path>, overrides: &Entries) -> Result<Self> {
        let file = match path {
            None => Entries::new(),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|err| Error::config("--config", format!("cannot read {}: {err}", p.display())))?;
                parse_entries(&text)?
            }
        };
        Self::resolve(&file, overrides)
    }

    /// Evaluator configured with these numerics.
    pub fn parisian(&self) -> Parisian {
        Parisian::with_options(self.model, self.quad.options())
            .with_talbot_nodes(self.inv.nodes)
            .with_tail_sds(self.quad.zmax_sds)
    }

    /// The resolved configuration as `key = value` lines, readable by
    /// [`parse_entries`].
    pub fn to_entries(&self) -> Entries {
        let m = &self.model;
        let mut e = Entries::new();
        let mut put = |k: &str, v: String| {
            e.insert(k.to_string(), v);
        };
        put("model.kind", m.kind.to_string());
        put("model.mu", format!("{:?}", m.mu));
        match m.kind {
            ModelKind::BrownianDrift => put("model.sigma", format!("{:?}", m.sigma)),
            ModelKind::CramerLundbergExp => {
                put("model.jump_rate", format!("{:?}", m.jump_rate));
                put("model.jump_mean", format!("{:?}", m.jump_mean));
            }
            ModelKind::PerturbedClExp => {
                put("model.sigma", format!("{:?}", m.sigma));
                put("model.jump_rate", format!("{:?}", m.jump_rate));
                put("model.jump_mean", format!("{:?}", m.jump_mean));
            }
        }
        put("quad.rel_tol", format!("{:?}", self.quad.rel_tol));
        put("quad.abs_tol", format!("{:?}", self.quad.abs_tol));
        put("quad.max_intervals", self.quad.max_intervals.to_string());
        put("quad.zmax_sds", format!("{:?}", self.quad.zmax_sds));
        put("inv.nodes", self.inv.nodes.to_string());
        put("mc.paths", self.mc.n_paths.to_string());
        put("mc.dt", format!("{:?}", self.mc.dt));
        put("mc.seed", self.mc.seed.to_string());
        put("mc.horizon_cap", format!("{:?}", self.mc.horizon_cap));
        put("mc.mode", self.mc.mode.to_string());
        e
    }
}
