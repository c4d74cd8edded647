//! Spectrally negative Lévy models with exponential downward jumps.
//!
//! Every model in the catalog has Laplace exponent
//!
//! ```text
//! psi(l) = mu * l + sigma^2 * l^2 / 2 - jump_rate * l / (alpha + l),   alpha = 1 / jump_mean
//! ```
//!
//! i.e. `X_t = mu t + sigma B_t - S_t` with `S` a compound Poisson process of
//! exponential claims. `mu` is the drift in this (bounded-variation) form, so
//! for the Cramér–Lundberg model it is the premium rate.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Exp, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{self, QuadOptions};

/// Poisson tail mass below which the Erlang mixture is truncated.
pub const POISSON_TAIL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    BrownianDrift,
    CramerLundbergExp,
    PerturbedClExp,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ModelKind::BrownianDrift => "brownian_drift",
            ModelKind::CramerLundbergExp => "cramer_lundberg_exp",
            ModelKind::PerturbedClExp => "perturbed_cl_exp",
        };
        f.write_str(s)
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .map(|c| c.to_ascii_lowercase())
            .collect();
        match norm.as_str() {
            "brownian" | "browniandrift" | "bm" => Ok(ModelKind::BrownianDrift),
            "cramerlundberg" | "cramerlundbergexp" | "cl" => Ok(ModelKind::CramerLundbergExp),
            "perturbed" | "perturbedcl" | "perturbedclexp" | "perturbedcramerlundberg" => Ok(ModelKind::PerturbedClExp),
            _ => Err(Error::config("model.kind", format!("unknown model kind `{s}`"))),
        }
    }
}

/// Parametric spectrally negative Lévy process. Immutable once built.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevyModel {
    pub kind: ModelKind,
    pub mu: f64,
    pub sigma: f64,
    pub jump_rate: f64,
    pub jump_mean: f64,
}

impl LevyModel {
    pub fn new(kind: ModelKind, mu: f64, sigma: f64, jump_rate: f64, jump_mean: f64) -> Result<Self> {
        let m = LevyModel {
            kind,
            mu,
            sigma,
            jump_rate,
            jump_mean,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn brownian(mu: f64, sigma: f64) -> Result<Self> {
        Self::new(ModelKind::BrownianDrift, mu, sigma, 0.0, 1.0)
    }

    /// Premium rate `c`, claim intensity and mean claim size.
    pub fn cramer_lundberg(c: f64, jump_rate: f64, jump_mean: f64) -> Result<Self> {
        Self::new(ModelKind::CramerLundbergExp, c, 0.0, jump_rate, jump_mean)
    }

    pub fn perturbed(mu: f64, sigma: f64, jump_rate: f64, jump_mean: f64) -> Result<Self> {
        Self::new(ModelKind::PerturbedClExp, mu, sigma, jump_rate, jump_mean)
    }

    fn validate(&self) -> Result<()> {
        let finite = [self.mu, self.sigma, self.jump_rate, self.jump_mean]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::domain("model parameters must be finite"));
        }
        if self.sigma < 0.0 || self.jump_rate < 0.0 {
            return Err(Error::domain("sigma and jump_rate must be non-negative"));
        }
        if self.jump_mean <= 0.0 {
            return Err(Error::domain("jump_mean must be positive"));
        }
        match self.kind {
            ModelKind::BrownianDrift => {
                if self.sigma <= 0.0 || self.jump_rate != 0.0 {
                    return Err(Error::domain("brownian_drift needs sigma > 0 and jump_rate = 0"));
                }
            }
            ModelKind::CramerLundbergExp => {
                if self.sigma != 0.0 || self.mu <= 0.0 || self.jump_rate <= 0.0 {
                    return Err(Error::domain(
                        "cramer_lundberg_exp needs sigma = 0, premium mu > 0 and jump_rate > 0",
                    ));
                }
            }
            ModelKind::PerturbedClExp => {
                if self.sigma <= 0.0 || self.jump_rate <= 0.0 {
                    return Err(Error::domain("perturbed_cl_exp needs sigma > 0 and jump_rate > 0"));
                }
            }
        }
        // ∫(1 ∧ x²) Π(dx) ≤ jump_rate · E[J²] = 2 · jump_rate · jump_mean².
        if !(self.jump_rate * self.jump_mean * self.jump_mean).is_finite() {
            return Err(Error::domain("Lévy measure is not integrable"));
        }
        Ok(())
    }

    pub fn has_jumps(&self) -> bool {
        self.jump_rate > 0.0
    }

    /// Rate `alpha` of the exponential claim sizes.
    pub fn jump_decay(&self) -> f64 {
        1.0 / self.jump_mean
    }

    /// Paths of bounded variation (no Gaussian part).
    pub fn bounded_variation(&self) -> bool {
        self.sigma == 0.0
    }

    /// Smallest argument at which `psi` is finite (exclusive).
    pub fn psi_domain_lower(&self) -> f64 {
        if self.has_jumps() {
            -self.jump_decay()
        } else {
            f64::NEG_INFINITY
        }
    }

    /// Laplace exponent `log E[exp(lam X_1)]`; `+∞` outside the domain.
    pub fn psi(&self, lam: f64) -> f64 {
        let mut v = self.mu * lam + 0.5 * self.sigma * self.sigma * lam * lam;
        if self.has_jumps() {
            let alpha = self.jump_decay();
            if lam <= -alpha {
                return f64::INFINITY;
            }
            v -= self.jump_rate * lam / (alpha + lam);
        }
        v
    }

    pub fn psi_prime(&self, lam: f64) -> f64 {
        let mut v = self.mu + self.sigma * self.sigma * lam;
        if self.has_jumps() {
            let alpha = self.jump_decay();
            v -= self.jump_rate * alpha / ((alpha + lam) * (alpha + lam));
        }
        v
    }

    /// Analytic continuation of `psi` to complex arguments.
    pub fn psi_complex(&self, lam: Complex64) -> Complex64 {
        let mut v = lam * self.mu + lam * lam * (0.5 * self.sigma * self.sigma);
        if self.has_jumps() {
            let alpha = self.jump_decay();
            v -= lam * self.jump_rate / (lam + alpha);
        }
        v
    }

    /// Mean drift `E[X_1] = psi'(0+)`.
    pub fn mean_drift(&self) -> f64 {
        self.psi_prime(0.0)
    }

    /// Right inverse `Phi(theta) = sup{p >= 0 : psi(p) = theta}`.
    pub fn phi(&self, theta: f64) -> Result<f64> {
        if !(theta >= 0.0) || !theta.is_finite() {
            return Err(Error::domain(format!("phi needs theta >= 0, got {theta}")));
        }
        let lo = self.psi_argmin()?;
        if theta == 0.0 && lo == 0.0 {
            return Ok(0.0);
        }
        let mut lo = lo;
        let mut hi = lo.max(1.0);
        let mut expansions = 0;
        while self.psi(hi) <= theta {
            lo = hi;
            hi *= 2.0;
            expansions += 1;
            if expansions > 1100 {
                return Err(Error::non_convergence(format!("no bracket for phi({theta})")));
            }
        }
        // Newton from the right of the root converges monotonically on a
        // convex increasing branch; bisection covers any overshoot.
        let mut p = hi;
        for _ in 0..200 {
            let f = self.psi(p) - theta;
            if f > 0.0 {
                hi = p;
            } else {
                lo = p;
            }
            if f.abs() <= 1e-14 * (1.0 + theta) {
                return Ok(p);
            }
            let d = self.psi_prime(p);
            let mut next = p - f / d;
            if !(next > lo && next < hi) || !next.is_finite() {
                next = 0.5 * (lo + hi);
            }
            if (next - p).abs() <= 1e-15 * p.abs().max(1.0) {
                return Ok(next);
            }
            p = next;
        }
        let resid = (self.psi(p) - theta).abs();
        if resid <= 1e-12 * (1.0 + theta) {
            Ok(p)
        } else {
            Err(Error::non_convergence(format!(
                "phi({theta}) residual {resid:e} after 200 iterations"
            )))
        }
    }

    /// Minimiser of `psi` on `[0, ∞)`.
    fn psi_argmin(&self) -> Result<f64> {
        if self.psi_prime(0.0) >= 0.0 {
            return Ok(0.0);
        }
        let mut lo = 0.0;
        let mut hi = 1.0;
        while self.psi_prime(hi) < 0.0 {
            lo = hi;
            hi *= 2.0;
            if hi > 1e300 {
                return Err(Error::non_convergence("psi has no minimiser"));
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.psi_prime(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-16 * hi {
                break;
            }
        }
        Ok(hi)
    }

    /// Esscher-tilted model with exponent `psi(l + nu) - psi(nu)`.
    ///
    /// The catalog is closed under tilting: drift moves to `mu + sigma² nu`,
    /// claims keep an exponential law with rate `alpha + nu` and intensity
    /// `jump_rate * alpha / (alpha + nu)`.
    pub fn esscher(&self, nu: f64) -> Result<LevyModel> {
        if !nu.is_finite() {
            return Err(Error::domain("tilt must be finite"));
        }
        if nu == 0.0 {
            return Ok(*self);
        }
        let mut tilted = *self;
        tilted.mu = self.mu + self.sigma * self.sigma * nu;
        if self.has_jumps() {
            let alpha = self.jump_decay();
            if nu <= -alpha {
                return Err(Error::domain(format!(
                    "psi({nu}) is infinite: tilt must exceed -alpha = {}",
                    -alpha
                )));
            }
            tilted.jump_rate = self.jump_rate * alpha / (alpha + nu);
            tilted.jump_mean = 1.0 / (alpha + nu);
        }
        Ok(tilted)
    }

    /// Law of `X_t` started from 0.
    pub fn transition_density(&self, t: f64) -> Result<TransitionDensity> {
        TransitionDensity::new(*self, t)
    }
}

/// Point mass of the law of `X_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub location: f64,
    pub mass: f64,
}

#[derive(Debug, Clone)]
enum DensityRepr {
    Gaussian {
        mean: f64,
        sd: f64,
    },
    /// Continuous part of `ct - S_t`: Poisson mixture of Erlang laws.
    PoissonErlang {
        end: f64,
        poisson_mean: f64,
        decay: f64,
        max_terms: usize,
    },
    Fourier {
        cutoff: f64,
    },
}

/// Law of `X_t` on the real line: a continuous density plus atoms.
#[derive(Debug, Clone)]
pub struct TransitionDensity {
    model: LevyModel,
    t: f64,
    atoms: Vec<Atom>,
    support_upper: f64,
    repr: DensityRepr,
}

impl TransitionDensity {
    fn new(model: LevyModel, t: f64) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::domain(format!("transition density needs t > 0, got {t}")));
        }
        let td = match model.kind {
            ModelKind::BrownianDrift => TransitionDensity {
                model,
                t,
                atoms: Vec::new(),
                support_upper: f64::INFINITY,
                repr: DensityRepr::Gaussian {
                    mean: model.mu * t,
                    sd: model.sigma * t.sqrt(),
                },
            },
            ModelKind::CramerLundbergExp => {
                let poisson_mean = model.jump_rate * t;
                let end = model.mu * t;
                TransitionDensity {
                    model,
                    t,
                    atoms: vec![Atom {
                        location: end,
                        mass: (-poisson_mean).exp(),
                    }],
                    support_upper: end,
                    repr: DensityRepr::PoissonErlang {
                        end,
                        poisson_mean,
                        decay: model.jump_decay(),
                        max_terms: poisson_truncation(poisson_mean, POISSON_TAIL_TOL),
                    },
                }
            }
            ModelKind::PerturbedClExp => {
                // |E exp(i w X_t)| <= exp(-sigma² t w² / 2); stop where that is e^-40.
                let cutoff = (80.0 / (model.sigma * model.sigma * t)).sqrt();
                TransitionDensity {
                    model,
                    t,
                    atoms: Vec::new(),
                    support_upper: f64::INFINITY,
                    repr: DensityRepr::Fourier { cutoff },
                }
            }
        };
        Ok(td)
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn model(&self) -> &LevyModel {
        &self.model
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// `X_t <= support_upper` almost surely.
    pub fn support_upper(&self) -> f64 {
        self.support_upper
    }

    /// Standard deviation of the Gaussian component at time `t`.
    pub fn gaussian_sd(&self) -> f64 {
        self.model.sigma * self.t.sqrt()
    }

    /// Mean of `X_t`.
    pub fn mean(&self) -> f64 {
        self.model.mean_drift() * self.t
    }

    /// Value of the continuous part of the law at `z`.
    pub fn pdf(&self, z: f64) -> Result<f64> {
        match &self.repr {
            DensityRepr::Gaussian { mean, sd } => Ok(gaussian_pdf(z, *mean, *sd)),
            DensityRepr::PoissonErlang {
                end,
                poisson_mean,
                decay,
                max_terms,
            } => Ok(poisson_erlang_pdf(end - z, *poisson_mean, *decay, *max_terms)),
            DensityRepr::Fourier { cutoff } => self.fourier_pdf(z, *cutoff),
        }
    }

    /// Inverts under the Esscher measure whose mean sits at `z`, so the
    /// quadrature error is relative to the local density rather than to its
    /// peak: `p_t(z) = e^{-nu z + t psi(nu)} p_t^nu(z)`.
    fn fourier_pdf(&self, z: f64, cutoff: f64) -> Result<f64> {
        let nu = self.saddle_tilt(z);
        if nu == 0.0 {
            return fourier_claims_pdf(&self.model, self.t, z, cutoff);
        }
        let tilted = self.model.esscher(nu)?;
        let factor = (-nu * z + self.t * self.model.psi(nu)).exp();
        if factor == 0.0 {
            return Ok(0.0);
        }
        Ok(factor * fourier_claims_pdf(&tilted, self.t, z, cutoff)?)
    }

    /// Solves `t psi'(nu) = z`, with `nu` kept inside `[-alpha/2, 50/sd]`
    /// so the tilted jump law stays well inside its domain.
    fn saddle_tilt(&self, z: f64) -> f64 {
        let m = &self.model;
        let target = z / self.t;
        let lo = -0.5 * m.jump_decay();
        let hi = 50.0 / self.gaussian_sd().max(1e-300);
        if (target - m.psi_prime(0.0)).abs() * self.t < self.gaussian_sd() {
            return 0.0;
        }
        if m.psi_prime(lo) >= target {
            return lo;
        }
        if m.psi_prime(hi) <= target {
            return hi;
        }
        let (mut a, mut b) = (lo, hi);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if m.psi_prime(mid) < target {
                a = mid;
            } else {
                b = mid;
            }
            if b - a <= 1e-12 * (1.0 + mid.abs()) {
                break;
            }
        }
        0.5 * (a + b)
    }

    /// Level below which `X_t` lies with probability under `e^{-40}`, from
    /// the Chernoff bound `P(X_t <= -b) <= e^{-s b + t psi(-s)}`.
    pub fn lower_cutoff(&self) -> f64 {
        let m = &self.model;
        let s = if m.has_jumps() {
            0.5 * m.jump_decay()
        } else {
            // Optimal s for a Gaussian law at forty nats.
            (80.0 / (m.sigma * m.sigma * self.t)).sqrt()
        };
        -(40.0 + self.t * m.psi(-s)) / s
    }

    /// `∫ continuous + Σ atom masses`; should be 1.
    pub fn total_mass(&self, opts: &QuadOptions) -> Result<f64> {
        let atoms: f64 = self.atoms.iter().map(|a| a.mass).sum();
        let centre = self.mean();
        let upper = self.support_upper;
        let lower = self.lower_cutoff();
        let continuous = if upper.is_finite() {
            quad::integrate_with_breaks(|z| self.pdf(z), lower, upper, &[centre], opts)?
        } else {
            quad::integrate_with_breaks(|z| self.pdf(z), lower, centre, &[], opts)?
                + quad::integrate_to_infinity(|z| self.pdf(z), centre, opts)?
        };
        Ok(continuous + atoms)
    }
}

/// Density of `X_t` at `z` for a perturbed model with exponential claims.
fn fourier_claims_pdf(model: &LevyModel, t: f64, z: f64, cutoff: f64) -> Result<f64> {
    let opts = QuadOptions {
        rel_tol: 1e-10,
        abs_tol: 1e-11,
        max_intervals: 4000,
    };
    // The no-claim part is Gaussian and handled exactly; only the part
    // with at least one claim is inverted. Its transform
    // e^{t(i mu w - sigma² w²/2) - lambda t} (e^{lambda t alpha/(alpha + i w)} - 1)
    // is O(lambda t), so no cancellation against the Gaussian is left for
    // small t.
    let rate_t = model.jump_rate * t;
    let alpha = model.jump_decay();
    let sd = model.sigma * t.sqrt();
    let no_claim = (-rate_t).exp() * gaussian_pdf(z, model.mu * t, sd);
    // Split the frequency range so that each panel sees a bounded number
    // of oscillations of exp(-i w z).
    let spread = (z - model.mean_drift() * t).abs() + sd + 1.0;
    let panels = ((cutoff * spread / PI).ceil() as usize).clamp(1, 400);
    let breaks: Vec<f64> = (1..panels).map(|k| cutoff * k as f64 / panels as f64).collect();
    let integral = quad::integrate_with_breaks(
        |w| {
            let iw = Complex64::new(0.0, w);
            let gauss = (model.mu * iw - 0.5 * model.sigma * model.sigma * w * w) * t - iw * z - rate_t;
            let claims = complex_exp_m1(rate_t * alpha / (alpha + iw));
            Ok((gauss.exp() * claims).re)
        },
        0.0,
        cutoff,
        &breaks,
        &opts,
    )
    .map_err(|e| Error::non_convergence(format!("Fourier inversion at z={z}: {e}")))?;
    Ok((no_claim + integral / PI).max(0.0))
}

/// `e^w - 1` without cancellation for small `|w|`.
fn complex_exp_m1(w: Complex64) -> Complex64 {
    if w.norm() > 0.5 {
        return w.exp() - 1.0;
    }
    let mut term = w;
    let mut sum = w;
    for k in 2..30 {
        term *= w / k as f64;
        sum += term;
        if term.norm() <= 1e-17 * sum.norm() {
            break;
        }
    }
    sum
}

pub(crate) fn gaussian_pdf(z: f64, mean: f64, sd: f64) -> f64 {
    let u = (z - mean) / sd;
    (-0.5 * u * u).exp() / (sd * (2.0 * PI).sqrt())
}

/// Smallest `n` with `P(N > n) < tol` for `N ~ Poisson(mean)`.
pub(crate) fn poisson_truncation(mean: f64, tol: f64) -> usize {
    let mut pmf = (-mean).exp();
    let mut cdf = pmf;
    let mut n = 0usize;
    while 1.0 - cdf >= tol && n < 10_000 {
        n += 1;
        pmf *= mean / n as f64;
        cdf += pmf;
        if pmf == 0.0 && n as f64 > mean {
            break;
        }
    }
    n.max(1)
}

/// Density at `s >= 0` of a compound Poisson sum of Exp(decay) claims,
/// excluding the atom at zero.
fn poisson_erlang_pdf(s: f64, poisson_mean: f64, decay: f64, max_terms: usize) -> f64 {
    if s < 0.0 {
        return 0.0;
    }
    // log of P(N = n) * Erlang(n, decay)(s), built up recursively in n.
    let mut log_term = (poisson_mean * decay).ln() - poisson_mean - decay * s;
    let log_step = (poisson_mean * decay * s).ln();
    let mut total = log_term.exp();
    for n in 1..max_terms {
        let n = n as f64;
        log_term += log_step - (n * (n + 1.0)).ln();
        total += log_term.exp();
    }
    total
}

/// How the path sampler discretises time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SamplingMode {
    /// Event-driven: linear drift between exponential claim times. No
    /// discretisation error; only for models without a Gaussian part.
    Exact,
    /// Gaussian increments on a grid of step `dt`, with claims placed at their
    /// exact arrival times.
    Euler { dt: f64 },
}

/// One piece of a simulated path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Segment {
    /// Continuous motion over `dt` (drift plus Gaussian increment).
    Diffusive { dt: f64, dx: f64 },
    /// Instantaneous downward jump; `size` is negative.
    Jump { size: f64 },
}

/// Generator of path increments up to a time horizon.
pub struct PathSampler<'r, R: Rng> {
    model: LevyModel,
    mode: SamplingMode,
    rng: &'r mut R,
    t: f64,
    horizon: f64,
    next_jump: f64,
    claims: Option<Exp<f64>>,
    claim_sizes: Option<Exp<f64>>,
    jump_pending: bool,
}

impl<'r, R: Rng> PathSampler<'r, R> {
    pub fn new(model: LevyModel, mode: SamplingMode, horizon: f64, rng: &'r mut R) -> Result<Self> {
        if !(horizon > 0.0) {
            return Err(Error::domain("sampler horizon must be positive"));
        }
        match mode {
            SamplingMode::Exact if model.sigma > 0.0 => {
                return Err(Error::domain("exact sampling needs a model without Gaussian part"))
            }
            SamplingMode::Euler { dt } if !(dt > 0.0) => return Err(Error::domain("Euler step must be positive")),
            _ => {}
        }
        let (claims, claim_sizes) = if model.has_jumps() {
            (
                Some(Exp::new(model.jump_rate).map_err(|e| Error::domain(e.to_string()))?),
                Some(Exp::new(model.jump_decay()).map_err(|e| Error::domain(e.to_string()))?),
            )
        } else {
            (None, None)
        };
        let mut s = PathSampler {
            model,
            mode,
            rng,
            t: 0.0,
            horizon,
            next_jump: f64::INFINITY,
            claims,
            claim_sizes,
            jump_pending: false,
        };
        if let Some(c) = s.claims {
            s.next_jump = s.rng.sample(c);
        }
        Ok(s)
    }

    /// Current time of the path.
    pub fn time(&self) -> f64 {
        self.t
    }

    /// The generator driving the path, for auxiliary draws.
    pub fn rng(&mut self) -> &mut R {
        self.rng
    }
}

impl<R: Rng> Iterator for PathSampler<'_, R> {
    type Item = Segment;

    #[inline]
    fn next(&mut self) -> Option<Segment> {
        if self.jump_pending {
            self.jump_pending = false;
            let size = -self.rng.sample(self.claim_sizes.expect("jump model"));
            self.next_jump = self.t + self.rng.sample(self.claims.expect("jump model"));
            return Some(Segment::Jump { size });
        }
        if self.t >= self.horizon {
            return None;
        }
        let max_step = match self.mode {
            SamplingMode::Exact => f64::INFINITY,
            SamplingMode::Euler { dt } => dt,
        };
        let to_jump = self.next_jump - self.t;
        let to_end = self.horizon - self.t;
        let h = max_step.min(to_jump).min(to_end);
        let mut dx = self.model.mu * h;
        if self.model.sigma > 0.0 {
            let z: f64 = self.rng.sample(StandardNormal);
            dx += self.model.sigma * h.sqrt() * z;
        }
        if h == to_jump && to_jump <= to_end {
            self.t = self.next_jump;
            self.jump_pending = true;
        } else {
            self.t += h;
        }
        Some(Segment::Diffusive { dt: h, dx })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn catalog() -> Vec<LevyModel> {
        vec![
            LevyModel::brownian(0.5, 1.0).unwrap(),
            LevyModel::cramer_lundberg(1.0, 1.0, 0.5).unwrap(),
            LevyModel::cramer_lundberg(1.0, 1.0, 1.0).unwrap(),
            LevyModel::perturbed(1.0, 0.5, 1.0, 0.5).unwrap(),
        ]
    }

    #[test]
    fn psi_examples() {
        let bm = LevyModel::brownian(0.0, 2f64.sqrt()).unwrap();
        assert_relative_eq!(bm.psi(3.0), 9.0, max_relative = 1e-15);
        let cl = LevyModel::cramer_lundberg(2.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(cl.psi(1.0), 1.5, max_relative = 1e-15);
        for m in catalog() {
            assert_eq!(m.psi(0.0), 0.0);
        }
    }

    #[test]
    fn phi_examples() {
        let bm = LevyModel::brownian(0.0, 2f64.sqrt()).unwrap();
        assert_relative_eq!(bm.phi(4.0).unwrap(), 2.0, max_relative = 1e-12);
        let cl = LevyModel::cramer_lundberg(1.0, 1.0, 0.5).unwrap();
        assert_eq!(cl.phi(0.0).unwrap(), 0.0);
        for m in catalog() {
            for lam in [0.5, 1.0, 2.0] {
                assert_relative_eq!(m.phi(m.psi(lam)).unwrap(), lam, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn phi_zero_with_negative_drift_is_positive_root() {
        let m = LevyModel::brownian(-1.0, 1.0).unwrap();
        assert_relative_eq!(m.phi(0.0).unwrap(), 2.0, max_relative = 1e-12);
        assert!(m.phi(-1.0).is_err());
    }

    #[test]
    fn invalid_models_are_rejected() {
        assert!(LevyModel::brownian(0.5, 0.0).is_err());
        assert!(LevyModel::cramer_lundberg(0.0, 1.0, 1.0).is_err());
        assert!(LevyModel::cramer_lundberg(1.0, 0.0, 1.0).is_err());
        assert!(LevyModel::perturbed(1.0, 0.0, 1.0, 1.0).is_err());
        assert!(LevyModel::new(ModelKind::CramerLundbergExp, 1.0, 0.3, 1.0, 1.0).is_err());
        assert!(LevyModel::cramer_lundberg(1.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn esscher_examples() {
        let bm = LevyModel::brownian(0.0, 1.0).unwrap();
        let t = bm.esscher(1.0).unwrap();
        assert_eq!(t.mu, 1.0);
        assert_eq!(t.sigma, 1.0);
        assert_eq!(bm.esscher(0.0).unwrap(), bm);
        let cl = LevyModel::cramer_lundberg(2.0, 1.0, 1.0).unwrap();
        let tilted = cl.esscher(0.5).unwrap();
        let lhs = tilted.psi(1.0);
        let rhs = cl.psi(1.5) - cl.psi(0.5);
        assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs());
        assert!(matches!(cl.esscher(-1.0), Err(Error::Domain(_))));
        assert!(cl.esscher(-0.9).is_ok());
    }

    #[test]
    fn gaussian_and_atom_values() {
        let bm = LevyModel::brownian(0.0, 1.0).unwrap();
        let d = bm.transition_density(1.0).unwrap();
        assert_relative_eq!(d.pdf(0.0).unwrap(), 0.398_942_280_401_432_7, max_relative = 1e-14);
        assert!(d.atoms().is_empty());
        let cl = LevyModel::cramer_lundberg(1.0, 1.0, 1.0).unwrap();
        let d = cl.transition_density(1.0).unwrap();
        assert_eq!(d.atoms().len(), 1);
        assert_eq!(d.atoms()[0].location, 1.0);
        assert_relative_eq!(d.atoms()[0].mass, 0.367_879_441_171_442_3, max_relative = 1e-15);
        assert_eq!(d.pdf(1.5).unwrap(), 0.0);
        assert!(cl.transition_density(0.0).is_err());
    }

    #[test]
    fn cl_density_matches_bessel_form() {
        // ct - X_t has density e^{-lt - a s} sqrt(l t a / s) I_1(2 sqrt(l t a s)).
        let cl = LevyModel::cramer_lundberg(1.5, 2.0, 0.5).unwrap();
        let t = 0.8;
        let d = cl.transition_density(t).unwrap();
        let (lt, a) = (2.0 * t, 2.0);
        for s in [0.05, 0.4, 1.3, 3.0] {
            let x = 2.0 * (lt * a * s).sqrt();
            // I_1 by its power series.
            let mut term = x / 2.0;
            let mut i1 = term;
            for k in 1..60 {
                term *= (x / 2.0) * (x / 2.0) / (k as f64 * (k as f64 + 1.0));
                i1 += term;
            }
            let expected = (-lt - a * s).exp() * (lt * a / s).sqrt() * i1;
            assert_relative_eq!(d.pdf(1.5 * t - s).unwrap(), expected, max_relative = 1e-11);
        }
    }

    #[test]
    fn sampler_rejects_exact_mode_with_diffusion() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let bm = LevyModel::brownian(0.5, 1.0).unwrap();
        assert!(PathSampler::new(bm, SamplingMode::Exact, 1.0, &mut rng).is_err());
        assert!(PathSampler::new(bm, SamplingMode::Euler { dt: 0.0 }, 1.0, &mut rng).is_err());
    }

    #[test]
    fn sampler_reaches_horizon_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = LevyModel::perturbed(1.0, 0.5, 3.0, 0.5).unwrap();
        let total: f64 = PathSampler::new(m, SamplingMode::Euler { dt: 0.01 }, 2.0, &mut rng)
            .unwrap()
            .map(|s| match s {
                Segment::Diffusive { dt, .. } => dt,
                Segment::Jump { .. } => 0.0,
            })
            .sum();
        assert!((total - 2.0).abs() < 1e-12);
    }

    #[test]
    fn exact_cl_sampler_is_reproducible() {
        let cl = LevyModel::cramer_lundberg(1.0, 1.0, 1.0).unwrap();
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            PathSampler::new(cl, SamplingMode::Exact, 10.0, &mut rng)
                .unwrap()
                .collect::<Vec<_>>()
        };
        assert_eq!(run(3), run(3));
        assert_ne!(run(3), run(4));
    }
}
