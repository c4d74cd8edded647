//! Occupation kernels built from the scale function and the law of `X_t`:
//!
//! ```text
//! Omega_eps(x, t)  = ∫_{[eps, ∞)} W(z + x - eps)  (z / t) P(X_t ∈ dz)
//! Lambda_eps(x, t) = ∫_{[eps, ∞)} W'(z + x - eps) (z / t) P(X_t ∈ dz)
//! Gamma(x, t)      = ∫_{[x, ∞)}   (z / t) P(X_t ∈ dz)
//! ```
//!
//! Atoms of the law (the no-claim mass of the Cramér–Lundberg model) enter as
//! exact point contributions. Time integrals use `t = s²`, which absorbs the
//! `t^{-1/2}` blow-up these kernels have at `t = 0` when the path has a
//! Gaussian part and `W(x) > 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy::{LevyModel, TransitionDensity};
use crate::quad::{self, QuadOptions};
use crate::scale::ScaleFunction;

/// Default number of standard deviations kept beyond the shifted Gaussian
/// centre when truncating the space integral.
pub const DEFAULT_TAIL_SDS: f64 = 12.0;

/// Parameters of a single kernel evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelQuery {
    pub u: f64,
    pub eps: f64,
    pub x: f64,
    pub t: f64,
}

impl KernelQuery {
    pub fn validate(&self) -> Result<()> {
        if !(self.t > 0.0) || !(self.eps >= 0.0) || !(self.u >= 0.0) || !self.x.is_finite() {
            return Err(Error::domain(format!(
                "kernel query needs t > 0, eps >= 0, u >= 0 (got {self:?})"
            )));
        }
        Ok(())
    }
}

/// Which derivative of the scale function a kernel integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Order {
    Value,
    Derivative,
}

/// Kernel evaluator for one model and one discount rate `u`.
#[derive(Debug, Clone)]
pub struct Kernels {
    model: LevyModel,
    scale: ScaleFunction,
    opts: QuadOptions,
    inner: QuadOptions,
    tail_sds: f64,
}

impl Kernels {
    pub fn new(model: LevyModel, u: f64, opts: QuadOptions) -> Result<Self> {
        Ok(Self::with_scale(ScaleFunction::auto(model, u)?, opts))
    }

    pub fn with_scale(scale: ScaleFunction, opts: QuadOptions) -> Self {
        Kernels {
            model: *scale.model(),
            inner: opts.tightened(1e-2),
            scale,
            opts,
            tail_sds: DEFAULT_TAIL_SDS,
        }
    }

    /// Sets how many standard deviations past the shifted centre the space
    /// integral is carried for models with a Gaussian part.
    pub fn with_tail_sds(mut self, sds: f64) -> Self {
        self.tail_sds = sds;
        self
    }

    pub fn scale(&self) -> &ScaleFunction {
        &self.scale
    }

    pub fn model(&self) -> &LevyModel {
        &self.model
    }

    pub fn u(&self) -> f64 {
        self.scale.q()
    }

    pub fn options(&self) -> &QuadOptions {
        &self.opts
    }

    /// `∫_{[lo, hi)} f(z) (z/t) P(X_t ∈ dz)`; `f` may grow at most like
    /// `e^{growth z}`.
    pub fn integrate_law<F>(&self, t: f64, lo: f64, hi: f64, growth: f64, f: F) -> Result<f64>
    where
        F: Fn(f64) -> Result<f64>,
    {
        let law = self.model.transition_density(t)?;
        self.integrate_law_with(&law, lo, hi, growth, &self.inner, f)
    }

    fn integrate_law_with<F>(
        &self,
        law: &TransitionDensity,
        lo: f64,
        hi: f64,
        growth: f64,
        opts: &QuadOptions,
        f: F,
    ) -> Result<f64>
    where
        F: Fn(f64) -> Result<f64>,
    {
        let t = law.t();
        let sd = law.gaussian_sd();
        let upper = if law.support_upper().is_finite() {
            law.support_upper().min(hi)
        } else {
            let centre = self.model.mu * t + growth.max(0.0) * sd * sd;
            (centre + self.tail_sds * sd).min(hi)
        };
        let mut total = 0.0;
        if upper > lo {
            let mean = law.mean();
            let mut breaks = vec![mean, self.model.mu * t];
            if sd > 0.0 {
                let shifted = self.model.mu * t + growth.max(0.0) * sd * sd;
                for k in [-2.0, 2.0] {
                    breaks.push(mean + k * sd);
                    breaks.push(shifted + k * sd);
                }
                breaks.push(shifted);
            }
            total += quad::integrate_with_breaks(
                |z| {
                    let d = law.pdf(z)?;
                    if d == 0.0 {
                        return Ok(0.0);
                    }
                    Ok(f(z)? * z / t * d)
                },
                lo,
                upper,
                &breaks,
                opts,
            )?;
        }
        for atom in law.atoms() {
            if atom.location >= lo && atom.location < hi {
                total += f(atom.location)? * atom.location / t * atom.mass;
            }
        }
        Ok(total)
    }

    fn kernel(&self, order: Order, x: f64, t: f64, eps: f64) -> Result<f64> {
        KernelQuery { u: self.u(), eps, x, t }.validate()?;
        // W(z + x - eps) vanishes for z < eps - x.
        let lo = eps.max(eps - x);
        let growth = self.scale.phi_q();
        let shift = x - eps;
        self.integrate_law(t, lo, f64::INFINITY, growth, |z| match order {
            Order::Value => self.scale.w(z + shift),
            Order::Derivative => self.scale.w_prime(z + shift),
        })
    }

    /// `Omega_eps^(u)(x, t)`.
    pub fn omega(&self, x: f64, t: f64, eps: f64) -> Result<f64> {
        self.kernel(Order::Value, x, t, eps)
    }

    /// `Lambda_eps^(u)(x, t) = d/dx Omega_eps^(u)(x, t)`.
    pub fn lambda(&self, x: f64, t: f64, eps: f64) -> Result<f64> {
        self.kernel(Order::Derivative, x, t, eps)
    }

    /// `Gamma(x, t) = ∫_{[x, ∞)} (z/t) P(X_t ∈ dz)`.
    pub fn gamma(&self, x: f64, t: f64) -> Result<f64> {
        self.integrate_law(t, x, f64::INFINITY, 0.0, |_| Ok(1.0))
    }

    /// `∫_{[0, eps)} W^(u)(z) (z/t) P(X_t ∈ dz)`, the part of `Omega^(u)(0, t)`
    /// cut away by the `eps`-shift.
    pub fn near_zero_mass(&self, eps: f64, t: f64) -> Result<f64> {
        if eps <= 0.0 {
            return Ok(0.0);
        }
        self.integrate_law(t, 0.0, eps, self.scale.phi_q(), |z| self.scale.w(z))
    }

    /// Break points in `s = sqrt(t)` where a kernel in `x` and `eps` bends.
    fn time_breaks(&self, x: f64, eps: f64, r: f64) -> Vec<f64> {
        let root_r = r.sqrt();
        let mut breaks = Vec::new();
        if self.model.bounded_variation() {
            // The no-claim atom at ct crosses z = eps and z = eps - x.
            let c = self.model.mu;
            for level in [eps, eps - x] {
                if level > 0.0 {
                    breaks.push((level / c).sqrt());
                }
            }
        } else {
            let sigma = self.model.sigma;
            for level in [eps, (eps - x).max(0.0), x.abs()] {
                if level > 0.0 {
                    for k in [0.25, 1.0, 4.0] {
                        breaks.push(k * level / sigma);
                    }
                }
            }
        }
        breaks.retain(|s| *s > 0.0 && *s < root_r);
        breaks
    }

    fn time_integral<F>(&self, f: F, x: f64, eps: f64, r: f64) -> Result<f64>
    where
        F: Fn(f64) -> Result<f64>,
    {
        if !(r > 0.0) {
            return Err(Error::domain(format!("time horizon must be positive, got {r}")));
        }
        let breaks = self.time_breaks(x, eps, r);
        quad::integrate_with_breaks(
            |s| {
                if s == 0.0 {
                    return Ok(0.0);
                }
                Ok(2.0 * s * f(s * s)?)
            },
            0.0,
            r.sqrt(),
            &breaks,
            &self.opts,
        )
    }

    /// `∫_0^r Omega_eps^(u)(x, t) dt`.
    pub fn omega_time_integral(&self, x: f64, r: f64, eps: f64) -> Result<f64> {
        self.time_integral(|t| self.omega(x, t, eps), x, eps, r)
    }

    /// `∫_0^r Lambda_eps^(u)(x, t) dt`.
    pub fn lambda_time_integral(&self, x: f64, r: f64, eps: f64) -> Result<f64> {
        self.time_integral(|t| self.lambda(x, t, eps), x, eps, r)
    }

    /// `∫_0^r near_zero_mass(eps, t) dt`.
    pub fn near_zero_time_integral(&self, eps: f64, r: f64) -> Result<f64> {
        self.time_integral(|t| self.near_zero_mass(eps, t), 0.0, eps, r)
    }

    /// Both sides of the integration-by-parts identity
    /// `∫_0^∞ W'(z + x) Gamma(z + eps, t) dz = Omega_eps(x, t) - W(x) Gamma(eps, t)`.
    ///
    /// Holds whenever `W` is continuous on `[x, ∞)`; for bounded-variation
    /// models and `x < 0` the jump of `W` at 0 is not captured by `W'`.
    pub fn integration_by_parts_check(&self, x: f64, eps: f64, t: f64) -> Result<(f64, f64)> {
        let law = self.model.transition_density(t)?;
        let sd = law.gaussian_sd();
        let growth = self.scale.phi_q();
        let z_end = if law.support_upper().is_finite() {
            law.support_upper() - eps
        } else {
            self.model.mu * t + growth * sd * sd + self.tail_sds * sd - eps
        };
        let lo = (-x).max(0.0);
        let lhs = if z_end > lo {
            let mut breaks = vec![law.mean() - eps];
            for atom in law.atoms() {
                breaks.push(atom.location - eps);
            }
            quad::integrate_with_breaks(
                |z| {
                    let wp = self.scale.w_prime(z + x)?;
                    if wp == 0.0 {
                        return Ok(0.0);
                    }
                    Ok(wp * self.integrate_law_with(&law, z + eps, f64::INFINITY, 0.0, &self.inner, |_| Ok(1.0))?)
                },
                lo,
                z_end,
                &breaks,
                &self.opts,
            )?
        } else {
            0.0
        };
        let rhs = self.omega(x, t, eps)? - self.scale.w(x)? * self.gamma(eps, t)?;
        Ok((lhs, rhs))
    }
}

/// `Omega_nu^(p)(x, t) = e^{-nu x} e^{-psi(nu) t} Omega^(p + psi(nu))(x, t)`,
/// computed under the base measure.
pub fn omega_esscher(model: &LevyModel, p: f64, nu: f64, x: f64, t: f64, opts: &QuadOptions) -> Result<f64> {
    let k = esscher_kernels(model, p, nu, opts)?;
    k.omega(x, t)
}

/// `Lambda_nu^(p)(x, t) = e^{-nu x} e^{-psi(nu) t} (Lambda^(u) - nu Omega^(u))(x, t)`, `u = p + psi(nu)`.
pub fn lambda_esscher(model: &LevyModel, p: f64, nu: f64, x: f64, t: f64, opts: &QuadOptions) -> Result<f64> {
    let k = esscher_kernels(model, p, nu, opts)?;
    k.lambda(x, t)
}

fn esscher_kernels(model: &LevyModel, p: f64, nu: f64, opts: &QuadOptions) -> Result<TiltedKernels> {
    let shift = model.psi(nu);
    if !shift.is_finite() {
        return Err(Error::domain(format!("psi({nu}) is infinite")));
    }
    let u = p + shift;
    if u < 0.0 {
        return Err(Error::domain(format!(
            "need p + psi(nu) >= 0: p = {p}, psi(nu) = {shift}"
        )));
    }
    Ok(TiltedKernels {
        base: Kernels::new(*model, u, *opts)?,
        nu,
        psi_nu: shift,
    })
}

/// Kernels of the Esscher-tilted process at rate `p = u - psi(nu)`, expressed
/// through base-measure kernels at rate `u`.
#[derive(Debug, Clone)]
pub struct TiltedKernels {
    base: Kernels,
    nu: f64,
    psi_nu: f64,
}

impl TiltedKernels {
    pub fn new(base: Kernels, nu: f64) -> Result<Self> {
        let psi_nu = base.model().psi(nu);
        if !psi_nu.is_finite() {
            return Err(Error::domain(format!("psi({nu}) is infinite")));
        }
        Ok(TiltedKernels { base, nu, psi_nu })
    }

    pub fn base(&self) -> &Kernels {
        &self.base
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn psi_nu(&self) -> f64 {
        self.psi_nu
    }

    /// Tilted discount rate `p = u - psi(nu)`.
    pub fn p(&self) -> f64 {
        self.base.u() - self.psi_nu
    }

    fn factor(&self, x: f64, t: f64) -> f64 {
        (-self.nu * x - self.psi_nu * t).exp()
    }

    pub fn omega(&self, x: f64, t: f64) -> Result<f64> {
        Ok(self.factor(x, t) * self.base.omega(x, t, 0.0)?)
    }

    pub fn lambda(&self, x: f64, t: f64) -> Result<f64> {
        let lam = self.base.lambda(x, t, 0.0)?;
        let om = if self.nu == 0.0 {
            0.0
        } else {
            self.nu * self.base.omega(x, t, 0.0)?
        };
        Ok(self.factor(x, t) * (lam - om))
    }

    /// `W_nu^(p)(x) = e^{-nu x} W^(u)(x)`.
    pub fn w(&self, x: f64) -> Result<f64> {
        Ok((-self.nu * x).exp() * self.base.scale().w(x)?)
    }

    /// `∫_0^x W_nu^(p)(y) dy`.
    pub fn w_bar(&self, x: f64) -> Result<f64> {
        self.base.scale().w_bar_discounted(self.nu, x)
    }

    pub fn omega_time_integral(&self, x: f64, r: f64) -> Result<f64> {
        self.base.time_integral(|t| self.omega(x, t), x, 0.0, r)
    }

    pub fn lambda_time_integral(&self, x: f64, r: f64) -> Result<f64> {
        self.base.time_integral(|t| self.lambda(x, t), x, 0.0, r)
    }
}
