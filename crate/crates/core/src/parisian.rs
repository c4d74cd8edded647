//! Laplace transforms of the Parisian drawdown ruin time `tau_r` and of the
//! one-sided drawdown exit times.
//!
//! The drawdown `Y_t = (sup_{s<=t} X_s ∨ y) - X_t` is started at `Y_0 = z`.
//! Ruin is declared the first time an excursion of `Y` above level `a` has
//! lasted `r` time units.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{Kernels, TiltedKernels, DEFAULT_TAIL_SDS};
use crate::levy::LevyModel;
use crate::quad::{self, QuadOptions};
use crate::scale::{ScaleFunction, DEFAULT_TALBOT_NODES};

/// Running maximum `y` and current position `x` of the process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DrawdownState {
    pub y: f64,
    pub x: f64,
}

impl DrawdownState {
    pub fn new(y: f64, x: f64) -> Result<Self> {
        if !y.is_finite() || !x.is_finite() || x > y {
            return Err(Error::domain(format!(
                "drawdown state needs finite x <= y, got x={x}, y={y}"
            )));
        }
        Ok(DrawdownState { y, x })
    }

    pub fn drawdown(&self) -> f64 {
        self.y - self.x
    }
}

/// One evaluation point: threshold `a`, delay `r`, discount `u`, tilt `nu`,
/// initial drawdown `z` and initial position `x0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParisianQuery {
    pub a: f64,
    pub r: f64,
    pub u: f64,
    #[serde(default)]
    pub nu: f64,
    pub z: f64,
    #[serde(default)]
    pub x0: f64,
}

impl ParisianQuery {
    pub fn new(a: f64, r: f64, u: f64, z: f64) -> Self {
        ParisianQuery {
            a,
            r,
            u,
            nu: 0.0,
            z,
            x0: 0.0,
        }
    }

    pub fn with_tilt(mut self, nu: f64, x0: f64) -> Self {
        self.nu = nu;
        self.x0 = x0;
        self
    }

    pub fn from_state(state: DrawdownState, a: f64, r: f64, u: f64) -> Self {
        ParisianQuery {
            a,
            r,
            u,
            nu: 0.0,
            z: state.drawdown(),
            x0: state.x,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.a, self.r, self.u, self.nu, self.z, self.x0]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::domain(format!("non-finite query {self:?}")));
        }
        if !(self.a > 0.0) {
            return Err(Error::domain(format!("threshold a must be positive, got {}", self.a)));
        }
        if !(self.r > 0.0) {
            return Err(Error::domain(format!("delay r must be positive, got {}", self.r)));
        }
        if !(self.u >= 0.0) {
            return Err(Error::domain(format!("discount u must be >= 0, got {}", self.u)));
        }
        if !(self.z >= 0.0) {
            return Err(Error::domain(format!("drawdown z must be >= 0, got {}", self.z)));
        }
        Ok(())
    }
}

/// The scale-function and kernel values the ruin transform is assembled from,
/// at one discount rate. Implemented for plain and tilted kernels so both
/// transforms share a single assembly path.
trait Ingredients {
    fn rate(&self) -> f64;
    fn w(&self, x: f64) -> Result<f64>;
    fn w_bar(&self, x: f64) -> Result<f64>;
    fn omega(&self, x: f64, t: f64) -> Result<f64>;
    fn lambda(&self, x: f64, t: f64) -> Result<f64>;
    fn omega_integral(&self, x: f64, r: f64) -> Result<f64>;
    fn lambda_integral(&self, x: f64, r: f64) -> Result<f64>;
}

impl Ingredients for Kernels {
    fn rate(&self) -> f64 {
        self.u()
    }
    fn w(&self, x: f64) -> Result<f64> {
        self.scale().w(x)
    }
    fn w_bar(&self, x: f64) -> Result<f64> {
        self.scale().w_bar(x)
    }
    fn omega(&self, x: f64, t: f64) -> Result<f64> {
        Kernels::omega(self, x, t, 0.0)
    }
    fn lambda(&self, x: f64, t: f64) -> Result<f64> {
        Kernels::lambda(self, x, t, 0.0)
    }
    fn omega_integral(&self, x: f64, r: f64) -> Result<f64> {
        self.omega_time_integral(x, r, 0.0)
    }
    fn lambda_integral(&self, x: f64, r: f64) -> Result<f64> {
        self.lambda_time_integral(x, r, 0.0)
    }
}

impl Ingredients for TiltedKernels {
    fn rate(&self) -> f64 {
        self.p()
    }
    fn w(&self, x: f64) -> Result<f64> {
        TiltedKernels::w(self, x)
    }
    fn w_bar(&self, x: f64) -> Result<f64> {
        TiltedKernels::w_bar(self, x)
    }
    fn omega(&self, x: f64, t: f64) -> Result<f64> {
        TiltedKernels::omega(self, x, t)
    }
    fn lambda(&self, x: f64, t: f64) -> Result<f64> {
        TiltedKernels::lambda(self, x, t)
    }
    fn omega_integral(&self, x: f64, r: f64) -> Result<f64> {
        self.omega_time_integral(x, r)
    }
    fn lambda_integral(&self, x: f64, r: f64) -> Result<f64> {
        self.lambda_time_integral(x, r)
    }
}

fn positive_lambda<I: Ingredients>(k: &I, a: f64, r: f64) -> Result<f64> {
    let lam = k.lambda(a, r)?;
    if lam > 0.0 && lam.is_finite() {
        Ok(lam)
    } else {
        Err(Error::domain(format!("Lambda(a={a}, r={r}) = {lam} is not positive")))
    }
}

fn assemble<I: Ingredients>(k: &I, a: f64, r: f64, z: f64, special_at_a: bool) -> Result<f64> {
    let p = k.rate();
    let lam_ar = positive_lambda(k, a, r)?;
    let lam_int = k.lambda_integral(a, r)?;
    let w_a = k.w(a)?;
    if special_at_a && z == a {
        // Omega(0, t) = e^{pt} collapses the general expression.
        return Ok(1.0 - p * (w_a + lam_int) / lam_ar);
    }
    let x = a - z;
    let ratio = k.omega(x, r)? / lam_ar;
    let body = k.w_bar(x)? - ratio * w_a + k.omega_integral(x, r)? - ratio * lam_int;
    Ok((-p * r).exp() * (1.0 + p * body))
}

/// Evaluator for the Parisian drawdown transforms of one model.
#[derive(Debug, Clone)]
pub struct Parisian {
    model: LevyModel,
    opts: QuadOptions,
    nodes: usize,
    tail_sds: f64,
}

impl Parisian {
    pub fn new(model: LevyModel) -> Self {
        Self::with_options(model, QuadOptions::default())
    }

    pub fn with_options(model: LevyModel, opts: QuadOptions) -> Self {
        Parisian {
            model,
            opts,
            nodes: DEFAULT_TALBOT_NODES,
            tail_sds: DEFAULT_TAIL_SDS,
        }
    }

    /// Talbot node count for numerically inverted scale functions.
    pub fn with_talbot_nodes(mut self, nodes: usize) -> Self {
        self.nodes = nodes;
        self
    }

    /// Gaussian tail width used to truncate the kernels' space integrals.
    pub fn with_tail_sds(mut self, sds: f64) -> Self {
        self.tail_sds = sds;
        self
    }

    pub fn model(&self) -> &LevyModel {
        &self.model
    }

    pub fn options(&self) -> &QuadOptions {
        &self.opts
    }

    pub fn scale(&self, u: f64) -> Result<ScaleFunction> {
        Ok(ScaleFunction::auto(self.model, u)?.with_talbot_nodes(self.nodes))
    }

    pub fn kernels(&self, u: f64) -> Result<Kernels> {
        self.kernels_with(u, &self.opts)
    }

    fn kernels_with(&self, u: f64, opts: &QuadOptions) -> Result<Kernels> {
        Ok(Kernels::with_scale(self.scale(u)?, *opts).with_tail_sds(self.tail_sds))
    }

    /// Runs `eval` and, if `Lambda(a, r)` came out non-positive, once more
    /// with tolerances tightened a hundredfold.
    fn with_retry<F>(&self, eval: F) -> Result<f64>
    where
        F: Fn(&QuadOptions) -> Result<f64>,
    {
        match eval(&self.opts) {
            Err(Error::Domain(msg)) if msg.starts_with("Lambda(") => eval(&self.opts.tightened(1e-2)),
            other => other,
        }
    }

    /// `E[e^{-u tau_r}]` for a path started at drawdown `z`.
    pub fn lt_ruin(&self, q: &ParisianQuery) -> Result<f64> {
        self.lt_ruin_inner(q, true)
    }

    /// `lt_ruin` through the general expression even at `z = a`, where
    /// `lt_ruin` uses the reduced form.
    pub fn lt_ruin_general(&self, q: &ParisianQuery) -> Result<f64> {
        self.lt_ruin_inner(q, false)
    }

    fn lt_ruin_inner(&self, q: &ParisianQuery, special_at_a: bool) -> Result<f64> {
        q.validate()?;
        self.with_retry(|opts| {
            let k = self.kernels_with(q.u, opts)?;
            assemble(&k, q.a, q.r, q.z, special_at_a)
        })
    }

    /// `E[e^{-u tau_r + nu X_{tau_r}}]` for a path started at `X_0 = x0`,
    /// drawdown `z`.
    pub fn joint_lt(&self, q: &ParisianQuery) -> Result<f64> {
        q.validate()?;
        let psi_nu = self.model.psi(q.nu);
        if !psi_nu.is_finite() {
            return Err(Error::domain(format!("psi({}) is infinite", q.nu)));
        }
        let tilt = (q.nu * q.x0).exp();
        self.with_retry(|opts| {
            let k = TiltedKernels::new(self.kernels_with(q.u, opts)?, q.nu)?;
            Ok(tilt * assemble(&k, q.a, q.r, q.z, true)?)
        })
    }

    /// `lt_ruin` over a grid, evaluated in parallel; output order follows input.
    pub fn lt_ruin_batch(&self, queries: &[ParisianQuery]) -> Vec<Result<f64>> {
        queries.par_iter().map(|q| self.lt_ruin(q)).collect()
    }

    /// `joint_lt` over a grid, evaluated in parallel; output order follows input.
    pub fn joint_lt_batch(&self, queries: &[ParisianQuery]) -> Vec<Result<f64>> {
        queries.par_iter().map(|q| self.joint_lt(q)).collect()
    }

    /// `∫_x^∞ e^{-nu z} W^(u)(z) dz` for `nu > Phi(u)`.
    fn discounted_tail(&self, sf: &ScaleFunction, nu: f64, x: f64) -> Result<f64> {
        let x = x.max(0.0);
        // The integrand decays like e^{-(nu - Phi(u)) z}; forty decay lengths
        // leave a relative remainder below 1e-17.
        let len = 1.0 / (nu - sf.phi_q());
        let opts = QuadOptions {
            rel_tol: 1e-11,
            abs_tol: 0.0,
            ..self.opts
        };
        let tail = quad::integrate(
            |v| {
                let z = x + len * v;
                Ok((-(nu - sf.phi_q()) * z).exp() * sf.w_scaled(z)?)
            },
            0.0,
            40.0,
            &opts,
        )?;
        Ok(len * tail)
    }

    /// `E_{|s}[e^{-u tau_a^+ - nu Y_{tau_a^+}}]`, where `tau_a^+` is the first
    /// time the drawdown exceeds `a`, started at drawdown `s`.
    pub fn lt_drawdown_up(&self, u: f64, nu: f64, a: f64, s: f64) -> Result<f64> {
        if !(a > 0.0) || !(s >= 0.0) || !(u >= 0.0) || !nu.is_finite() {
            return Err(Error::domain(format!(
                "drawdown-up transform needs a > 0, s >= 0, u >= 0 (a={a}, s={s}, u={u})"
            )));
        }
        let sf = self.scale(u)?;
        if !(nu > sf.phi_q()) {
            return Err(Error::domain(format!("nu = {nu} must exceed Phi(u) = {}", sf.phi_q())));
        }
        let gap = self.model.psi(nu) - u;
        let w_prime_a = sf.w_prime(a)?;
        if !(w_prime_a > 0.0) {
            return Err(Error::domain(format!("W'(a) = {w_prime_a} is not positive")));
        }
        let head = gap * (-nu * s).exp() * self.discounted_tail(&sf, nu, a - s)?;
        let tail_a = self.discounted_tail(&sf, nu, a)?;
        let ratio = sf.w(a - s)? / w_prime_a;
        Ok(head + ratio * gap * ((-nu * a).exp() * sf.w(a)? - nu * tail_a))
    }

    /// `E_{|y}[e^{-theta tau_a^-}]`, `tau_a^-` the first time the drawdown is
    /// at most `a`, started at drawdown `y >= a`.
    pub fn lt_drawdown_down(&self, theta: f64, y: f64, a: f64) -> Result<f64> {
        if !(theta >= 0.0) || !(a > 0.0) || !(y >= a) || !y.is_finite() {
            return Err(Error::domain(format!(
                "drawdown-down transform needs theta >= 0 and y >= a > 0 (theta={theta}, y={y}, a={a})"
            )));
        }
        Ok((-self.model.phi(theta)? * (y - a)).exp())
    }

    fn check_entry_args(u: f64, eps: f64, a: f64, y: f64, r: f64) -> Result<()> {
        if !(u >= 0.0) || !(eps >= 0.0) || !(eps < a) || !(y >= 0.0) || !y.is_finite() || !(r > 0.0) {
            return Err(Error::domain(format!(
                "need u >= 0, 0 <= eps < a, y >= 0, r > 0 (u={u}, eps={eps}, a={a}, y={y}, r={r})"
            )));
        }
        Ok(())
    }

    /// `E_{|y}[e^{-u tau_a^+}; tau_{a-eps}^- ∘ theta_{tau_a^+} <= r]`: discounted
    /// probability that the first excursion above `a` is followed by a return
    /// below `a - eps` within `r`. For `y > a` the excursion is already under
    /// way and `tau_a^+ = 0`.
    pub fn entry_then_down_prob(&self, u: f64, eps: f64, a: f64, y: f64, r: f64) -> Result<f64> {
        Self::check_entry_args(u, eps, a, y, r)?;
        let k = self.kernels(u)?;
        let sf = k.scale();
        let ratio = sf.w(a - y)? / sf.w_prime(a)?;
        let mut left = k.omega(a - y, r, eps)?;
        let mut right = k.lambda(a, r, eps)?;
        if u > 0.0 {
            left -= u * k.omega_time_integral(a - y, r, eps)?;
            right -= u * k.lambda_time_integral(a, r, eps)?;
        }
        Ok(left - ratio * right)
    }

    /// `E_{|y}[e^{-u (tau_a^+ + tau_{a-eps}^- ∘ theta)}; tau_{a-eps}^- ∘ theta <= r]`.
    pub fn entry_then_down_lt(&self, u: f64, eps: f64, a: f64, y: f64, r: f64) -> Result<f64> {
        Self::check_entry_args(u, eps, a, y, r)?;
        let k = self.kernels(u)?;
        let sf = k.scale();
        let ratio = sf.w(a - y)? / sf.w_prime(a)?;
        Ok((-u * r).exp() * (k.omega(a - y, r, eps)? - ratio * k.lambda(a, r, eps)?))
    }

    /// `E_{|y}[e^{-u tau_r^eps}]`, where excursions count only once the
    /// drawdown has come back below `a - eps`.
    pub fn lt_ruin_eps(&self, u: f64, eps: f64, a: f64, y: f64, r: f64) -> Result<f64> {
        if !(eps > 0.0) {
            return Err(Error::domain(format!("eps must be positive, got {eps}")));
        }
        Self::check_entry_args(u, eps, a, y, r)?;
        if y > a {
            return Err(Error::domain(format!("need y <= a, got y={y}, a={a}")));
        }
        let k = self.kernels(u)?;
        let sf = k.scale();
        let w_eps = sf.w(eps)?;
        if !(w_eps > f64::EPSILON * sf.w(a)?) {
            return Err(Error::domain(format!(
                "W(eps) = {w_eps} vanishes at eps = {eps}; use a larger eps"
            )));
        }
        let w_a = sf.w(a)?;
        let w_prime_a = sf.w_prime(a)?;
        let w_ay = sf.w(a - y)?;
        let ratio = w_ay / w_prime_a;

        let lam_r = k.lambda(a, r, eps)?;
        let lam_int = k.lambda_time_integral(a, r, eps)?;
        let om_r = k.omega(a - y, r, eps)?;
        let om_int = k.omega_time_integral(a - y, r, eps)?;

        let head = 1.0 + u * sf.w_bar(a - y)? - u * w_a / w_prime_a * w_ay + u * (om_int - ratio * lam_int);
        let numer = sf.w_bar(eps)? / w_eps
            - w_a / w_prime_a
            - (k.near_zero_time_integral(eps, r)? / w_eps + lam_int / w_prime_a);
        let denom = k.near_zero_mass(eps, r)? / w_eps + lam_r / w_prime_a;
        if !(denom > 0.0) {
            return Err(Error::domain(format!(
                "restart denominator {denom} is not positive at eps = {eps}"
            )));
        }
        let restart = om_r - ratio * lam_r;
        Ok((-u * r).exp() * (head + u * numer / denom * restart))
    }
}
