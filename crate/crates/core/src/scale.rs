//! q-scale functions `W^(q)`: the functions vanishing on `(-∞, 0)` whose
//! Laplace transform is `1 / (psi(lambda) - q)` for `lambda > Phi(q)`.
//!
//! Brownian and Cramér–Lundberg models have two-exponential closed forms;
//! anything else goes through a fixed-Talbot inversion of the shifted
//! transform `1 / (psi(lambda + Phi(q)) - q)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy::{LevyModel, ModelKind};
use crate::quad::{self, QuadOptions};

/// Default number of Talbot contour nodes.
pub const DEFAULT_TALBOT_NODES: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Backend {
    ClosedForm,
    NumericInversion,
}

/// `W(x) = k e^{r_lo x} (b + c (e^{gap x} - 1) / gap)`, `gap = r_hi - r_lo`,
/// where `r_hi >= r_lo` are the real roots of `psi(l) = q`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct TwoExp {
    k: f64,
    b: f64,
    c: f64,
    r_lo: f64,
    r_hi: f64,
}

impl TwoExp {
    fn for_model(model: &LevyModel, q: f64) -> Result<Self> {
        match model.kind {
            ModelKind::BrownianDrift => {
                // sigma²/2 l² + mu l - q = 0
                let s2 = model.sigma * model.sigma;
                let disc = (model.mu * model.mu + 2.0 * q * s2).sqrt();
                Ok(TwoExp {
                    k: 2.0 / s2,
                    b: 0.0,
                    c: 1.0,
                    r_lo: (-model.mu - disc) / s2,
                    r_hi: (-model.mu + disc) / s2,
                })
            }
            ModelKind::CramerLundbergExp => {
                // c l² + (c alpha - lambda - q) l - q alpha = 0
                let c = model.mu;
                let alpha = model.jump_decay();
                let bq = c * alpha - model.jump_rate - q;
                let disc = (bq * bq + 4.0 * c * q * alpha).sqrt();
                // Stable pairing of the two roots.
                let (r_lo, r_hi) = if bq >= 0.0 {
                    let lo = (-bq - disc) / (2.0 * c);
                    let hi = if lo != 0.0 { -q * alpha / (c * lo) } else { 0.0 };
                    (lo, hi)
                } else {
                    let hi = (-bq + disc) / (2.0 * c);
                    (-q * alpha / (c * hi), hi)
                };
                Ok(TwoExp {
                    k: 1.0 / c,
                    b: 1.0,
                    c: alpha + r_hi,
                    r_lo,
                    r_hi,
                })
            }
            ModelKind::PerturbedClExp => Err(Error::domain(
                "no closed-form scale function for perturbed_cl_exp; use numeric inversion",
            )),
        }
    }

    fn gap(&self) -> f64 {
        self.r_hi - self.r_lo
    }

    fn w(&self, x: f64) -> f64 {
        self.k * (self.r_lo * x).exp() * (self.b + self.c * expm1_ratio(self.gap(), x))
    }

    /// `e^{-r_hi x} W(x)`, bounded for all `x >= 0`.
    fn w_scaled(&self, x: f64) -> f64 {
        let gap = self.gap();
        self.k * (self.b * (-gap * x).exp() + self.c * expm1_ratio(-gap, x))
    }

    fn w_prime(&self, x: f64) -> f64 {
        let e = expm1_ratio(self.gap(), x);
        self.k * (self.r_lo * x).exp() * (self.r_lo * (self.b + self.c * e) + self.c * (self.gap() * x).exp())
    }

    /// `∫_0^x e^{-nu y} W(y) dy`.
    fn w_bar_discounted(&self, nu: f64, x: f64) -> f64 {
        let lo = self.r_lo - nu;
        let hi = self.r_hi - nu;
        self.k * (self.b * expm1_ratio(lo, x) + self.c * divided_expm1(lo, hi, x))
    }
}

/// `(e^{r x} - 1) / r`, equal to `∫_0^x e^{r y} dy`.
fn expm1_ratio(r: f64, x: f64) -> f64 {
    if r == 0.0 {
        x
    } else {
        (r * x).exp_m1() / r
    }
}

/// `∫_0^x e^{lo y} (e^{(hi - lo) y} - 1) / (hi - lo) dy`, stable as `hi -> lo`.
fn divided_expm1(lo: f64, hi: f64, x: f64) -> f64 {
    let gap = hi - lo;
    if (gap * x).abs() > 1e-3 {
        return (expm1_ratio(hi, x) - expm1_ratio(lo, x)) / gap;
    }
    let opts = QuadOptions {
        rel_tol: 1e-14,
        abs_tol: 0.0,
        max_intervals: 200,
    };
    quad::integrate(|y| Ok((lo * y).exp() * expm1_ratio(gap, y)), 0.0, x, &opts).unwrap_or_else(|_| {
        // Midpoint-derivative fallback, accurate to O((gap x)^2).
        let mid = 0.5 * (lo + hi);
        let ex = (mid * x).exp();
        if mid == 0.0 {
            0.5 * x * x
        } else {
            (x * mid * ex - ex + 1.0) / (mid * mid)
        }
    })
}

/// Fixed-Talbot inversion of `transform` at `t > 0` with `nodes` contour points.
pub fn talbot_invert<F>(transform: F, t: f64, nodes: usize) -> f64
where
    F: Fn(Complex64) -> Complex64,
{
    let m = nodes as f64;
    let r = 2.0 * m / (5.0 * t);
    let mut sum = 0.5 * transform(Complex64::new(r, 0.0)).re * (r * t).exp();
    for k in 1..nodes {
        let theta = k as f64 * PI / m;
        let cot = theta.cos() / theta.sin();
        let s = Complex64::new(r * theta * cot, r * theta);
        let sigma = theta + (theta * cot - 1.0) * cot;
        sum += ((s * t).exp() * transform(s) * Complex64::new(1.0, sigma)).re;
    }
    r / m * sum
}

/// Evaluator for `W^(q)` of one model. Stateless apart from precomputed roots.
#[derive(Debug, Clone)]
pub struct ScaleFunction {
    model: LevyModel,
    q: f64,
    backend: Backend,
    phi_q: f64,
    closed: Option<TwoExp>,
    nodes: usize,
    quad: QuadOptions,
}

impl ScaleFunction {
    pub fn new(model: LevyModel, q: f64, backend: Backend) -> Result<Self> {
        if !(q >= 0.0) || !q.is_finite() {
            return Err(Error::domain(format!("scale function needs q >= 0, got {q}")));
        }
        let phi_q = model.phi(q)?;
        let closed = match backend {
            Backend::ClosedForm => Some(TwoExp::for_model(&model, q)?),
            Backend::NumericInversion => None,
        };
        Ok(ScaleFunction {
            model,
            q,
            backend,
            phi_q,
            closed,
            nodes: DEFAULT_TALBOT_NODES,
            quad: QuadOptions {
                rel_tol: 1e-10,
                abs_tol: 1e-14,
                max_intervals: 2000,
            },
        })
    }

    /// Closed form where one exists, numeric inversion otherwise.
    pub fn auto(model: LevyModel, q: f64) -> Result<Self> {
        let backend = match model.kind {
            ModelKind::BrownianDrift | ModelKind::CramerLundbergExp => Backend::ClosedForm,
            ModelKind::PerturbedClExp => Backend::NumericInversion,
        };
        Self::new(model, q, backend)
    }

    pub fn with_talbot_nodes(mut self, nodes: usize) -> Self {
        self.nodes = nodes.max(2);
        self
    }

    pub fn model(&self) -> &LevyModel {
        &self.model
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    /// `Phi(q)`, the exponential growth rate of `W^(q)`.
    pub fn phi_q(&self) -> f64 {
        self.phi_q
    }

    /// `W^(q)(0+)`: `1/c` for bounded variation, 0 otherwise.
    pub fn w_at_zero(&self) -> f64 {
        if self.model.bounded_variation() {
            1.0 / self.model.mu
        } else {
            0.0
        }
    }

    /// `W^(q)'(0+)`.
    pub fn w_prime_at_zero(&self) -> f64 {
        if self.model.bounded_variation() {
            (self.q + self.model.jump_rate) / (self.model.mu * self.model.mu)
        } else {
            2.0 / (self.model.sigma * self.model.sigma)
        }
    }

    fn invert<F>(&self, transform: F, x: f64) -> Result<f64>
    where
        F: Fn(Complex64) -> Complex64,
    {
        let shift = self.phi_q;
        let shifted = |s: Complex64| transform(s + shift);
        let mut nodes = self.nodes;
        for _ in 0..2 {
            let v = talbot_invert(shifted, x, nodes) * (shift * x).exp();
            if v.is_finite() {
                return Ok(v);
            }
            nodes *= 2;
        }
        Err(Error::non_convergence(format!(
            "Talbot inversion of the scale function failed at x={x}"
        )))
    }

    /// `W^(q)(x)`, zero for `x < 0`; right-continuous at 0.
    pub fn w(&self, x: f64) -> Result<f64> {
        if x < 0.0 {
            return Ok(0.0);
        }
        if x == 0.0 {
            return Ok(self.w_at_zero());
        }
        match &self.closed {
            Some(c) => Ok(c.w(x)),
            None => {
                let model = self.model;
                let q = self.q;
                self.invert(|s| (model.psi_complex(s) - q).inv(), x)
            }
        }
    }

    /// `e^{-Phi(q) x} W^(q)(x)`, which stays bounded where `W` itself
    /// overflows.
    pub fn w_scaled(&self, x: f64) -> Result<f64> {
        if x < 0.0 {
            return Ok(0.0);
        }
        if x == 0.0 {
            return Ok(self.w_at_zero());
        }
        match &self.closed {
            Some(c) => Ok(c.w_scaled(x) * ((c.r_hi - self.phi_q) * x).exp()),
            None => {
                let (model, q, shift) = (self.model, self.q, self.phi_q);
                let v = talbot_invert(|s: Complex64| (model.psi_complex(s + shift) - q).inv(), x, self.nodes);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Ok(self.w(x)? * (-shift * x).exp())
                }
            }
        }
    }

    /// Right derivative `W^(q)'(x)`; zero for `x < 0`.
    pub fn w_prime(&self, x: f64) -> Result<f64> {
        if x < 0.0 {
            return Ok(0.0);
        }
        if x == 0.0 {
            return Ok(self.w_prime_at_zero());
        }
        match &self.closed {
            Some(c) => Ok(c.w_prime(x)),
            None => {
                // L[W'](l) = l / (psi(l) - q) - W(0+)
                let model = self.model;
                let q = self.q;
                let w0 = self.w_at_zero();
                self.invert(|s| s / (model.psi_complex(s) - q) - w0, x)
            }
        }
    }

    /// `∫_0^x W^(q)(y) dy`, zero for `x <= 0`.
    pub fn w_bar(&self, x: f64) -> Result<f64> {
        self.w_bar_discounted(0.0, x)
    }

    /// `∫_0^x e^{-nu y} W^(q)(y) dy`, zero for `x <= 0`.
    pub fn w_bar_discounted(&self, nu: f64, x: f64) -> Result<f64> {
        if x <= 0.0 {
            return Ok(0.0);
        }
        match &self.closed {
            Some(c) => Ok(c.w_bar_discounted(nu, x)),
            None => quad::integrate(|y| Ok((-nu * y).exp() * self.w(y)?), 0.0, x, &self.quad),
        }
    }
}

/// Scale function of the Esscher-tilted process, `W_nu^(u)(x) = e^{-nu x} W^(u + psi(nu))(x)`,
/// evaluated entirely under the base measure.
pub fn w_esscher(model: &LevyModel, u: f64, nu: f64, x: f64) -> Result<f64> {
    let shift = model.psi(nu);
    if !shift.is_finite() {
        return Err(Error::domain(format!("psi({nu}) is infinite")));
    }
    let q = u + shift;
    if q < 0.0 {
        return Err(Error::domain(format!("need u >= -psi(nu): u = {u}, psi(nu) = {shift}")));
    }
    if x < 0.0 {
        return Ok(0.0);
    }
    let sf = ScaleFunction::auto(*model, q)?;
    Ok((-nu * x).exp() * sf.w(x)?)
}

/// Richardson-extrapolated central difference of `f` at `x` with base step `h`.
pub fn richardson_derivative<F>(f: F, x: f64, h: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let central = |h: f64| -> Result<f64> { Ok((f(x + h)? - f(x - h)?) / (2.0 * h)) };
    let d1 = central(h)?;
    let d2 = central(0.5 * h)?;
    Ok((4.0 * d2 - d1) / 3.0)
}
