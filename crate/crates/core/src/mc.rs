//! Path-by-path Monte Carlo for the drawdown stopping times.
//!
//! Path `i` draws from `ChaCha8Rng::seed_from_u64(seed)` on stream `i`, and
//! per-path results are reduced in path order with pairwise summation, so an
//! estimate depends only on the seed and the path count, never on the number
//! of worker threads.
//!
//! Euler mode keeps three corrections that remove most of the `sqrt(dt)`
//! monitoring bias: the running maximum is updated with the exact maximum of
//! the Brownian bridge over each step, level crossings that happen and undo
//! themselves inside one step are detected with the bridge crossing
//! probability, and crossing times are placed by linear interpolation.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy::{LevyModel, PathSampler, SamplingMode, Segment};
use crate::parisian::ParisianQuery;
use crate::quad::pairwise_sum;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "PARISIAN_THREADS";

/// Bridge maxima are only sampled when the running maximum is within this
/// many step standard deviations; further away the correction is below
/// `e^{-32}`.
const BRIDGE_SDS: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum McMode {
    /// Event-driven simulation, exact for models without a Gaussian part.
    Exact,
    /// Fixed-step Gaussian increments with bridge corrections.
    Euler,
}

impl std::str::FromStr for McMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(McMode::Exact),
            "euler" => Ok(McMode::Euler),
            _ => Err(Error::config("mc.mode", format!("unknown mode '{s}' (exact|euler)"))),
        }
    }
}

impl std::fmt::Display for McMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            McMode::Exact => "exact",
            McMode::Euler => "euler",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub n_paths: usize,
    pub dt: f64,
    pub seed: u64,
    pub horizon_cap: f64,
    pub mode: McMode,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            n_paths: 100_000,
            dt: 1e-3,
            seed: 42,
            horizon_cap: 1000.0,
            mode: McMode::Euler,
        }
    }
}

impl McConfig {
    /// Exact mode for models without a Gaussian part, Euler otherwise.
    pub fn for_model(model: &LevyModel) -> Self {
        let mode = if model.sigma > 0.0 {
            McMode::Euler
        } else {
            McMode::Exact
        };
        McConfig {
            mode,
            ..Self::default()
        }
    }

    pub fn validate(&self, model: &LevyModel) -> Result<()> {
        if self.n_paths < 2 {
            return Err(Error::config("mc.paths", "need at least 2 paths"));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::config("mc.dt", format!("must be positive, got {}", self.dt)));
        }
        if !(self.horizon_cap > 0.0) || !self.horizon_cap.is_finite() {
            return Err(Error::config(
                "mc.horizon_cap",
                format!("must be positive, got {}", self.horizon_cap),
            ));
        }
        if self.mode == McMode::Exact && model.sigma > 0.0 {
            return Err(Error::config(
                "mc.mode",
                "exact mode needs a model without Gaussian part",
            ));
        }
        Ok(())
    }

    fn sampling(&self) -> SamplingMode {
        match self.mode {
            McMode::Exact => SamplingMode::Exact,
            McMode::Euler => SamplingMode::Euler { dt: self.dt },
        }
    }
}

/// Sample mean of a functional with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_paths: usize,
    /// Share of paths stopped by the horizon cap before the event happened.
    pub capped_fraction: f64,
    pub seed: u64,
}

impl McEstimate {
    pub fn from_values(values: &[f64], capped: usize, seed: u64) -> Self {
        let n = values.len();
        let mean = pairwise_sum(values) / n as f64;
        let dev: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
        let var = if n > 1 {
            pairwise_sum(&dev) / (n - 1) as f64
        } else {
            f64::NAN
        };
        McEstimate {
            mean,
            stderr: (var / n as f64).sqrt(),
            n_paths: n,
            capped_fraction: capped as f64 / n as f64,
            seed,
        }
    }

    /// `(target - mean) / stderr`.
    pub fn z_score(&self, target: f64) -> f64 {
        (target - self.mean) / self.stderr
    }
}

/// Worker cap from `PARISIAN_THREADS`, if set.
pub fn thread_cap() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::config(
                THREADS_ENV,
                format!("must be a positive integer, got '{v}'"),
            )),
        },
    }
}

/// Runs `f` on a pool capped by `PARISIAN_THREADS`, or on the global pool.
pub fn with_thread_cap<T, F>(f: F) -> Result<T>
where
    T: Send,
    F: FnOnce() -> T + Send,
{
    match thread_cap()? {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::config(THREADS_ENV, e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

/// Generator for path `index` of a run seeded with `seed`.
pub fn path_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn run_paths<T, F>(cfg: &McConfig, sim: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> T + Sync,
{
    (0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|i| sim(&mut path_rng(cfg.seed, i)))
        .collect()
}

/// What the drawdown did relative to a level during one step.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Event {
    None,
    /// Crossed from `<= level` to `> level`.
    Up(f64),
    /// Crossed from `> level` to `<= level`.
    Down(f64),
    /// Started and ended above, touched the level in between.
    Dip(f64),
    /// Started and ended at or below, went above in between.
    Spike(f64),
}

/// Position, running maximum and clock of one path.
struct Walker {
    t: f64,
    x: f64,
    m: f64,
    mu: f64,
    sigma: f64,
    // State at the start of the last step, for bridge interpolation.
    t0: f64,
    x0: f64,
}

impl Walker {
    fn new(model: &LevyModel, x: f64, drawdown: f64) -> Self {
        Walker {
            t: 0.0,
            x,
            m: x + drawdown,
            mu: model.mu,
            sigma: model.sigma,
            t0: 0.0,
            x0: x,
        }
    }

    fn drawdown(&self) -> f64 {
        self.m - self.x
    }

    fn advance<R: Rng>(&mut self, seg: Segment, t1: f64, level: f64, spikes: bool, rng: &mut R) -> Event {
        self.t0 = self.t;
        self.x0 = self.x;
        let y0 = self.drawdown();
        match seg {
            Segment::Jump { size } => {
                self.x += size;
                self.t = t1;
                if y0 <= level && self.drawdown() > level {
                    Event::Up(t1)
                } else {
                    Event::None
                }
            }
            Segment::Diffusive { dt: h, dx } => {
                let x0 = self.x;
                let x1 = x0 + dx;
                let t0 = self.t;
                self.x = x1;
                self.t = t1;
                if self.sigma > 0.0 {
                    let var = self.sigma * self.sigma * h;
                    if self.m - x0.max(x1) < BRIDGE_SDS * var.sqrt() {
                        let u: f64 = 1.0 - rng.random::<f64>();
                        let gap = x1 - x0;
                        let top = 0.5 * (x0 + x1 + (gap * gap - 2.0 * var * u.ln()).sqrt());
                        self.m = self.m.max(top);
                    }
                    let y1 = self.drawdown();
                    if y0 > level {
                        if y1 <= level {
                            Event::Down(t0 + h * (y0 - level) / (y0 - y1))
                        } else {
                            let p = (-2.0 * (y0 - level) * (y1 - level) / var).exp();
                            if p > 1e-300 && rng.random::<f64>() < p {
                                Event::Dip(t0 + 0.5 * h)
                            } else {
                                Event::None
                            }
                        }
                    } else if y1 > level {
                        Event::Up(t0 + h * (level - y0) / (y1 - y0))
                    } else if spikes {
                        let p = (-2.0 * (level - y0) * (level - y1) / var).exp();
                        if p > 1e-300 && rng.random::<f64>() < p {
                            Event::Spike(t0 + 0.5 * h)
                        } else {
                            Event::None
                        }
                    } else {
                        Event::None
                    }
                } else {
                    // Pure drift: the drawdown falls at rate mu until it hits 0.
                    self.m = self.m.max(x1);
                    if y0 > level && self.drawdown() <= level {
                        Event::Down(t0 + (y0 - level) / self.mu)
                    } else {
                        Event::None
                    }
                }
            }
        }
    }

    /// Position at time `s` inside the last step.
    fn position_at<R: Rng>(&self, s: f64, rng: &mut R) -> f64 {
        let h = self.t - self.t0;
        if h <= 0.0 {
            return self.x;
        }
        let w = ((s - self.t0) / h).clamp(0.0, 1.0);
        if self.sigma > 0.0 {
            let mean = self.x0 + (self.x - self.x0) * w;
            let sd = self.sigma * (h * w * (1.0 - w)).sqrt();
            let z: f64 = rng.sample(StandardNormal);
            mean + sd * z
        } else {
            self.x0 + self.mu * (s - self.t0)
        }
    }
}

/// Parisian ruin time and position of one path; `tau` is infinite when the
/// horizon cap was reached first.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RuinSample {
    pub tau: f64,
    pub x_at_tau: f64,
}

impl RuinSample {
    pub fn capped(&self) -> bool {
        !self.tau.is_finite()
    }
}

fn ruin_path(
    model: &LevyModel,
    cfg: &McConfig,
    a: f64,
    r: f64,
    z: f64,
    x0: f64,
    rng: &mut ChaCha8Rng,
) -> Result<RuinSample> {
    let mut w = Walker::new(model, x0, z);
    // Start of the current excursion above a, if any.
    let mut start = if z > a { Some(0.0) } else { None };
    let mut sampler = PathSampler::new(*model, cfg.sampling(), cfg.horizon_cap, rng)?;
    while let Some(seg) = sampler.next() {
        let t1 = sampler.time();
        let ev = w.advance(seg, t1, a, false, sampler.rng());
        let deadline = match (start, ev) {
            (Some(g), Event::Down(at)) => {
                if g + r < at {
                    Some(g + r)
                } else {
                    start = None;
                    None
                }
            }
            (Some(g), Event::Dip(at)) => {
                if g + r < at {
                    Some(g + r)
                } else {
                    start = Some(at);
                    (at + r <= t1).then_some(at + r)
                }
            }
            (Some(g), _) => (g + r <= t1).then_some(g + r),
            (None, Event::Up(at)) => {
                start = Some(at);
                (at + r <= t1).then_some(at + r)
            }
            (None, _) => None,
        };
        if let Some(tau) = deadline {
            let x = w.position_at(tau, sampler.rng());
            return Ok(RuinSample { tau, x_at_tau: x });
        }
    }
    Ok(RuinSample {
        tau: f64::INFINITY,
        x_at_tau: f64::NAN,
    })
}

fn check_ruin_args(a: f64, r: f64, z: f64, x0: f64) -> Result<()> {
    if !(a > 0.0) || !(r > 0.0) || !(z >= 0.0) || !x0.is_finite() {
        return Err(Error::domain(format!(
            "need a > 0, r > 0, z >= 0 and finite x0 (a={a}, r={r}, z={z}, x0={x0})"
        )));
    }
    Ok(())
}

/// Simulates the Parisian drawdown ruin time of `cfg.n_paths` paths started
/// at `X_0 = x0` with drawdown `z`.
pub fn simulate_ruin(model: &LevyModel, a: f64, r: f64, z: f64, x0: f64, cfg: &McConfig) -> Result<Vec<RuinSample>> {
    cfg.validate(model)?;
    check_ruin_args(a, r, z, x0)?;
    run_paths(cfg, |rng| ruin_path(model, cfg, a, r, z, x0, rng))
        .into_iter()
        .collect()
}

/// `E[e^{-u tau_r + nu X_{tau_r}}]` estimated from ruin samples.
pub fn ruin_functional(samples: &[RuinSample], u: f64, nu: f64, seed: u64) -> McEstimate {
    let values: Vec<f64> = samples
        .iter()
        .map(|s| {
            if s.capped() {
                0.0
            } else if nu == 0.0 {
                (-u * s.tau).exp()
            } else {
                (-u * s.tau + nu * s.x_at_tau).exp()
            }
        })
        .collect();
    let capped = samples.iter().filter(|s| s.capped()).count();
    McEstimate::from_values(&values, capped, seed)
}

/// Monte Carlo counterpart of `Parisian::joint_lt` (and of `lt_ruin` when
/// `nu = 0`).
pub fn estimate_lt(model: &LevyModel, q: &ParisianQuery, cfg: &McConfig) -> Result<McEstimate> {
    q.validate()?;
    let samples = simulate_ruin(model, q.a, q.r, q.z, q.x0, cfg)?;
    Ok(ruin_functional(&samples, q.u, q.nu, cfg.seed))
}

/// Runs until the drawdown first exceeds `level`; returns that time and the
/// drawdown there, or `None` at the horizon cap.
fn first_up<R: Rng>(w: &mut Walker, sampler: &mut PathSampler<'_, R>, level: f64) -> Option<(f64, f64)> {
    while let Some(seg) = sampler.next() {
        let t1 = sampler.time();
        match w.advance(seg, t1, level, true, sampler.rng()) {
            Event::Up(at) => {
                let y = if matches!(seg, Segment::Jump { .. }) {
                    w.drawdown()
                } else {
                    level
                };
                return Some((at, y));
            }
            Event::Spike(at) => return Some((at, level)),
            _ => {}
        }
    }
    None
}

/// Runs until the drawdown is at most `level`, giving up once the clock
/// passes `limit`.
fn first_down<R: Rng>(w: &mut Walker, sampler: &mut PathSampler<'_, R>, level: f64, limit: f64) -> Option<f64> {
    if w.drawdown() <= level {
        return Some(w.t);
    }
    while let Some(seg) = sampler.next() {
        let t1 = sampler.time();
        match w.advance(seg, t1, level, false, sampler.rng()) {
            Event::Down(at) | Event::Dip(at) => return (at <= limit).then_some(at),
            _ if t1 > limit => return None,
            _ => {}
        }
    }
    None
}

/// First time the drawdown exceeds `a` and the drawdown at that time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpSample {
    pub tau: f64,
    pub drawdown: f64,
}

/// Simulates `(tau_a^+, Y_{tau_a^+})` from drawdown `s`; capped paths carry
/// an infinite time.
pub fn simulate_drawdown_up(model: &LevyModel, a: f64, s: f64, cfg: &McConfig) -> Result<Vec<UpSample>> {
    cfg.validate(model)?;
    if !(a > 0.0) || !(s >= 0.0) {
        return Err(Error::domain(format!("need a > 0 and s >= 0 (a={a}, s={s})")));
    }
    run_paths(cfg, |rng| -> Result<UpSample> {
        if s > a {
            return Ok(UpSample { tau: 0.0, drawdown: s });
        }
        let mut w = Walker::new(model, 0.0, s);
        let mut sampler = PathSampler::new(*model, cfg.sampling(), cfg.horizon_cap, rng)?;
        Ok(match first_up(&mut w, &mut sampler, a) {
            Some((tau, drawdown)) => UpSample { tau, drawdown },
            None => UpSample {
                tau: f64::INFINITY,
                drawdown: f64::NAN,
            },
        })
    })
    .into_iter()
    .collect()
}

/// `E_{|s}[e^{-u tau_a^+ - nu Y_{tau_a^+}}]`.
pub fn estimate_drawdown_up(model: &LevyModel, u: f64, nu: f64, a: f64, s: f64, cfg: &McConfig) -> Result<McEstimate> {
    let samples = simulate_drawdown_up(model, a, s, cfg)?;
    let capped = samples.iter().filter(|p| !p.tau.is_finite()).count();
    let values: Vec<f64> = samples
        .iter()
        .map(|p| {
            if p.tau.is_finite() {
                (-u * p.tau - nu * p.drawdown).exp()
            } else {
                0.0
            }
        })
        .collect();
    Ok(McEstimate::from_values(&values, capped, cfg.seed))
}

/// Simulates `tau_a^-` from drawdown `y >= a`; capped paths are infinite.
pub fn simulate_drawdown_down(model: &LevyModel, a: f64, y: f64, cfg: &McConfig) -> Result<Vec<f64>> {
    cfg.validate(model)?;
    if !(a > 0.0) || !(y >= a) {
        return Err(Error::domain(format!("need y >= a > 0 (a={a}, y={y})")));
    }
    run_paths(cfg, |rng| -> Result<f64> {
        let mut w = Walker::new(model, 0.0, y);
        let mut sampler = PathSampler::new(*model, cfg.sampling(), cfg.horizon_cap, rng)?;
        Ok(first_down(&mut w, &mut sampler, a, f64::INFINITY).unwrap_or(f64::INFINITY))
    })
    .into_iter()
    .collect()
}

/// `E_{|y}[e^{-theta tau_a^-}]`.
pub fn estimate_drawdown_down(model: &LevyModel, theta: f64, a: f64, y: f64, cfg: &McConfig) -> Result<McEstimate> {
    let times = simulate_drawdown_down(model, a, y, cfg)?;
    let capped = times.iter().filter(|t| !t.is_finite()).count();
    let values: Vec<f64> = times.iter().map(|t| (-theta * t).exp()).collect();
    Ok(McEstimate::from_values(&values, capped, cfg.seed))
}

/// First passage of the drawdown above `a`, followed by the time it then
/// takes to get back to `a - eps` (infinite if longer than `r`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntrySample {
    pub tau_up: f64,
    pub back: f64,
}

/// Simulates [`EntrySample`]s from drawdown `y`.
pub fn simulate_entry_then_down(
    model: &LevyModel,
    a: f64,
    eps: f64,
    y: f64,
    r: f64,
    cfg: &McConfig,
) -> Result<Vec<EntrySample>> {
    cfg.validate(model)?;
    if !(a > 0.0) || !(eps >= 0.0) || !(eps < a) || !(y >= 0.0) || !(r > 0.0) {
        return Err(Error::domain(format!(
            "need a > 0, 0 <= eps < a, y >= 0, r > 0 (a={a}, eps={eps}, y={y}, r={r})"
        )));
    }
    run_paths(cfg, |rng| -> Result<EntrySample> {
        let mut w = Walker::new(model, 0.0, y);
        let mut sampler = PathSampler::new(*model, cfg.sampling(), cfg.horizon_cap, rng)?;
        let tau_up = if y > a {
            0.0
        } else {
            match first_up(&mut w, &mut sampler, a) {
                Some((t, _)) => t,
                None => {
                    return Ok(EntrySample {
                        tau_up: f64::INFINITY,
                        back: f64::INFINITY,
                    })
                }
            }
        };
        let back = first_down(&mut w, &mut sampler, a - eps, tau_up + r)
            .map(|t| (t - tau_up).max(0.0))
            .unwrap_or(f64::INFINITY);
        Ok(EntrySample { tau_up, back })
    })
    .into_iter()
    .collect()
}

/// `E_{|y}[e^{-u tau_a^+}; back <= r]` and
/// `E_{|y}[e^{-u (tau_a^+ + back)}; back <= r]` from the same paths.
pub fn estimate_entry_then_down(
    model: &LevyModel,
    u: f64,
    eps: f64,
    a: f64,
    y: f64,
    r: f64,
    cfg: &McConfig,
) -> Result<(McEstimate, McEstimate)> {
    let samples = simulate_entry_then_down(model, a, eps, y, r, cfg)?;
    let capped = samples.iter().filter(|s| !s.tau_up.is_finite()).count();
    let hit = |s: &EntrySample| s.tau_up.is_finite() && s.back <= r;
    let prob: Vec<f64> = samples
        .iter()
        .map(|s| if hit(s) { (-u * s.tau_up).exp() } else { 0.0 })
        .collect();
    let lt: Vec<f64> = samples
        .iter()
        .map(|s| if hit(s) { (-u * (s.tau_up + s.back)).exp() } else { 0.0 })
        .collect();
    Ok((
        McEstimate::from_values(&prob, capped, cfg.seed),
        McEstimate::from_values(&lt, capped, cfg.seed),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(mode: McMode) -> McConfig {
        McConfig {
            n_paths: 2000,
            mode,
            ..McConfig::default()
        }
    }

    #[test]
    fn exact_mode_rejected_for_gaussian_models() {
        let bm = LevyModel::brownian(0.5, 1.0).unwrap();
        assert!(matches!(
            small(McMode::Exact).validate(&bm),
            Err(Error::Config { ref key, .. }) if key == "mc.mode"
        ));
    }

    #[test]
    fn bad_config_names_key() {
        let cl = LevyModel::cramer_lundberg(1.0, 1.0, 0.5).unwrap();
        let cfg = McConfig {
            dt: -1.0,
            ..small(McMode::Exact)
        };
        assert!(matches!(cfg.validate(&cl), Err(Error::Config { ref key, .. }) if key == "mc.dt"));
        let cfg = McConfig {
            n_paths: 1,
            ..small(McMode::Exact)
        };
        assert!(matches!(cfg.validate(&cl), Err(Error::Config { ref key, .. }) if key == "mc.paths"));
    }

    #[test]
    fn start_above_level_passes_immediately() {
        let cl = LevyModel::cramer_lundberg(1.0, 1.0, 0.5).unwrap();
        let up = simulate_drawdown_up(&cl, 1.0, 1.5, &small(McMode::Exact)).unwrap();
        assert!(up.iter().all(|p| p.tau == 0.0 && p.drawdown == 1.5));
        let down = simulate_drawdown_down(&cl, 1.0, 1.0, &small(McMode::Exact)).unwrap();
        assert!(down.iter().all(|t| *t == 0.0));
    }

    #[test]
    fn pure_drift_drawdown_down_is_deterministic() {
        // Between claims Y falls at rate c, so tau_a^- <= (y - a) / c.
        let cl = LevyModel::cramer_lundberg(2.0, 1e-9, 0.5).unwrap();
        let down = simulate_drawdown_down(&cl, 1.0, 3.0, &small(McMode::Exact)).unwrap();
        assert!(down.iter().all(|t| (t - 1.0).abs() < 1e-12));
    }

    #[test]
    fn ruin_above_level_without_claims_happens_at_r() {
        // With no claims an excursion above a ends after (z - a) / c.
        let cl = LevyModel::cramer_lundberg(1.0, 1e-12, 0.5).unwrap();
        let s = simulate_ruin(&cl, 1.0, 0.5, 2.0, 0.0, &small(McMode::Exact)).unwrap();
        assert!(s.iter().all(|p| p.tau == 0.5 && (p.x_at_tau - 0.5).abs() < 1e-12));
        // Excursion lasting exactly r is not ruin.
        let s = simulate_ruin(
            &cl,
            1.0,
            1.0,
            2.0,
            0.0,
            &McConfig {
                horizon_cap: 5.0,
                ..small(McMode::Exact)
            },
        )
        .unwrap();
        assert!(s.iter().all(|p| p.capped()));
    }

    #[test]
    fn estimate_mean_and_stderr() {
        let e = McEstimate::from_values(&[1.0, 2.0, 3.0, 4.0], 1, 9);
        assert_eq!(e.mean, 2.5);
        assert!((e.stderr - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
        assert_eq!(e.capped_fraction, 0.25);
        assert_eq!(e.seed, 9);
    }

    #[test]
    fn streams_differ_between_paths() {
        let mut a = path_rng(1, 0);
        let mut b = path_rng(1, 1);
        assert_ne!(a.random::<u64>(), b.random::<u64>());
        let mut c = path_rng(1, 0);
        assert_eq!(path_rng(1, 0).random::<u64>(), c.random::<u64>());
    }
}
