//! Identity suite behind `parisian validate`.
//!
//! Every check pairs a library value (`lhs`) with an independently computed
//! target (`rhs`). Checks that only make sense for one model family are
//! skipped for the others.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::Result;
use crate::kernels::{omega_esscher, Kernels};
use crate::levy::{LevyModel, ModelKind};
use crate::parisian::{Parisian, ParisianQuery};
use crate::quad::{self, QuadOptions};
use crate::scale::{Backend, ScaleFunction};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub identity: String,
    pub params: BTreeMap<String, f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub rel_err: f64,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub model: LevyModel,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

struct Suite<'a> {
    cfg: &'a RunConfig,
    engine: Parisian,
    checks: Vec<Check>,
}

fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

impl<'a> Suite<'a> {
    fn model(&self) -> &LevyModel {
        &self.cfg.model
    }

    fn opts(&self) -> QuadOptions {
        self.cfg.quad.options()
    }

    fn kernels(&self, u: f64) -> Result<Kernels> {
        self.engine.kernels(u)
    }

    /// Records `|lhs - rhs| / scale <= tol`.
    fn push_scaled(&mut self, identity: &str, p: &[(&str, f64)], lhs: f64, rhs: f64, scale: f64, tol: f64) {
        let rel_err = (lhs - rhs).abs() / scale;
        self.checks.push(Check {
            identity: identity.to_string(),
            params: params(p),
            lhs,
            rhs,
            rel_err,
            tol,
            pass: rel_err <= tol,
        });
    }

    fn push(&mut self, identity: &str, p: &[(&str, f64)], lhs: f64, rhs: f64, tol: f64) {
        let scale = rhs.abs().max(f64::MIN_POSITIVE);
        self.push_scaled(identity, p, lhs, rhs, scale, tol);
    }

    /// `∫_0^∞ e^{-theta t} f(t) dt` for `f` growing at most like
    /// `e^{growth t}`, on `t = s²`, which absorbs `t^{-1/2}` behaviour at the
    /// origin. The range stops after 40 decay lengths.
    fn laplace_in_time<F>(&self, theta: f64, growth: f64, f: F) -> Result<f64>
    where
        F: Fn(f64) -> Result<f64>,
    {
        self.laplace_in_time_with(theta, growth, &self.opts(), f)
    }

    fn laplace_in_time_with<F>(&self, theta: f64, growth: f64, opts: &QuadOptions, f: F) -> Result<f64>
    where
        F: Fn(f64) -> Result<f64>,
    {
        let g = |s: f64| -> Result<f64> {
            if s == 0.0 {
                return Ok(0.0);
            }
            let t = s * s;
            Ok(2.0 * s * (-theta * t).exp() * f(t)?)
        };
        let decay = theta - growth.max(0.0);
        let end = (40.0 / decay).sqrt();
        let breaks = [(1.0 / decay).sqrt(), (5.0 / decay).sqrt()];
        quad::integrate_with_breaks(g, 0.0, end, &breaks, opts)
    }

    /// `E[e^{-u T}; T <= r]` for the first passage `T` of `X` above
    /// `level > 0`, through the first-passage density `(level/t) P(X_t ∈ dlevel)`
    /// plus, without a Gaussian part, the no-claim atom at `level / c`.
    /// An infinite `r` needs `u > 0`.
    fn first_passage(&self, level: f64, u: f64, r: f64) -> Result<f64> {
        let m = *self.model();
        let density = |t: f64| -> Result<f64> {
            let law = m.transition_density(t)?;
            Ok((-u * t).exp() * level / t * law.pdf(level)?)
        };
        let mut breaks = vec![];
        let atom = if m.bounded_variation() {
            let hit = level / m.mu;
            breaks.push(hit);
            if hit <= r {
                (-(u + m.jump_rate) * hit).exp()
            } else {
                0.0
            }
        } else {
            0.0
        };
        let integral = if r.is_finite() {
            quad::integrate_with_breaks(density, 0.0, r, &breaks, &self.opts())?
        } else {
            breaks.extend([1.0 / u, 5.0 / u]);
            quad::integrate_with_breaks(density, 0.0, 40.0 / u + level, &breaks, &self.opts())?
        };
        Ok(integral + atom)
    }

    fn exponent_checks(&mut self) -> Result<()> {
        let m = *self.model();
        for theta in [0.0, 0.5, 2.0, 10.0, 50.0] {
            let phi = m.phi(theta)?;
            self.push_scaled(
                "psi_phi_inverse",
                &[("theta", theta)],
                m.psi(phi),
                theta,
                1.0 + theta,
                1e-10,
            );
        }
        let nu = 0.5;
        let tilted = m.esscher(nu)?;
        for lam in [0.5, 2.0] {
            let lhs = tilted.psi(lam);
            let rhs = m.psi(lam + nu) - m.psi(nu);
            self.push("esscher_exponent", &[("nu", nu), ("lambda", lam)], lhs, rhs, 1e-12);
        }
        let q = 0.5;
        let lhs = tilted.phi(q)?;
        let rhs = m.phi(q + m.psi(nu))? - nu;
        self.push("esscher_phi_shift", &[("nu", nu), ("q", q)], lhs, rhs, 1e-9);
        Ok(())
    }

    fn density_checks(&mut self) -> Result<()> {
        for t in [0.1, 1.0, 5.0] {
            let mass = self.model().transition_density(t)?.total_mass(&self.opts())?;
            self.push("density_total_mass", &[("t", t)], mass, 1.0, 1e-7);
        }
        Ok(())
    }

    fn scale_checks(&mut self) -> Result<()> {
        let m = *self.model();
        let mut backends = vec![Backend::NumericInversion];
        if m.kind != ModelKind::PerturbedClExp {
            backends.push(Backend::ClosedForm);
        }
        for backend in backends.iter().copied() {
            let code = if backend == Backend::ClosedForm { 0.0 } else { 1.0 };
            for q in [0.0, 0.5] {
                let sf = ScaleFunction::new(m, q, backend)?.with_talbot_nodes(self.cfg.inv.nodes);
                for step in [1.0, 2.0, 5.0] {
                    let lam = sf.phi_q() + step;
                    // The integrand decays like e^{-step x}; stop after 40 decay lengths.
                    let lhs = quad::integrate_with_breaks(
                        |x| Ok((-lam * x).exp() * sf.w(x)?),
                        0.0,
                        40.0 / step,
                        &[1.0 / step, 5.0 / step],
                        &self.opts(),
                    )?;
                    let rhs = 1.0 / (m.psi(lam) - q);
                    self.push(
                        "scale_laplace",
                        &[("numeric_backend", code), ("q", q), ("lambda", lam)],
                        lhs,
                        rhs,
                        1e-6,
                    );
                }
            }
        }
        if backends.len() == 2 {
            let q = 0.5;
            let closed = ScaleFunction::new(m, q, Backend::ClosedForm)?;
            let numeric = ScaleFunction::new(m, q, Backend::NumericInversion)?.with_talbot_nodes(self.cfg.inv.nodes);
            for x in [0.01, 0.5, 2.0, 5.0] {
                self.push(
                    "scale_backends_agree",
                    &[("q", q), ("x", x)],
                    numeric.w(x)?,
                    closed.w(x)?,
                    1e-6,
                );
            }
        }
        Ok(())
    }

    fn kernel_checks(&mut self) -> Result<()> {
        let m = *self.model();
        for u in [0.0, 0.5, 1.0] {
            let k = self.kernels(u)?;
            for t in [0.1, 1.0, 5.0] {
                self.push(
                    "omega_at_zero",
                    &[("u", u), ("t", t)],
                    k.omega(0.0, t, 0.0)?,
                    (u * t).exp(),
                    1e-6,
                );
            }
        }
        if m.bounded_variation() {
            // Dropping the no-claim atom must visibly break omega_at_zero.
            let (u, t) = (0.5, 1.0);
            let k = self.kernels(u)?;
            let atom = (-m.jump_rate * t).exp() * m.mu * k.scale().w(m.mu * t)?;
            let without = k.omega(0.0, t, 0.0)? - atom;
            let target = (u * t).exp();
            let rel = (without - target).abs() / target;
            self.checks.push(Check {
                identity: "omega_at_zero_needs_atom".into(),
                params: params(&[("u", u), ("t", t)]),
                lhs: without,
                rhs: target,
                rel_err: rel,
                tol: 1e-6,
                pass: rel > 1e-6,
            });
        }

        let (u, r) = (0.5, 1.0);
        let k = self.kernels(u)?;
        self.push(
            "omega_at_zero_time_integral",
            &[("u", u), ("r", r)],
            k.omega_time_integral(0.0, r, 0.0)?,
            ((u * r).exp() - 1.0) / u,
            1e-6,
        );

        // Exponential moment above y, Laplace in time, at alpha = c * Phi(theta).
        let k0 = self.kernels(0.0)?;
        for (theta, c, y) in [(1.0, 0.0, 0.5), (2.0, 0.5, 1.0), (1.5, -0.5, 0.25)] {
            let phi = m.phi(theta)?;
            let alpha = c * phi;
            let lhs = self.laplace_in_time(theta, m.psi(alpha), |t| {
                k0.integrate_law(t, y, f64::INFINITY, alpha, |z| Ok((alpha * (z - y)).exp()))
            })?;
            let rhs = (-phi * y).exp() / (phi - alpha);
            self.push(
                "exp_moment_laplace",
                &[("theta", theta), ("alpha", alpha), ("y", y)],
                lhs,
                rhs,
                1e-4,
            );
        }

        // Running exponential moment, Laplace in time, with the inner time integral done explicitly.
        {
            let (theta, y) = (1.0, 0.5);
            let phi = m.phi(theta)?;
            let alpha = 0.5 * phi;
            // The check only asks for 1e-4, so the two time integrals run
            // looser than the configured tolerance.
            let outer = self.opts().tightened(1e2);
            let inner = self.opts().tightened(1e1);
            let g = |s: f64| k0.integrate_law(s, y, f64::INFINITY, alpha, |z| Ok((alpha * (z - y)).exp()));
            // Running integral of g, tabulated on a grid and topped up from
            // the nearest grid point below.
            let growth = m.psi(alpha);
            let end = 40.0 / (theta - growth.max(0.0));
            let grid: Vec<f64> = (0..=128).map(|i| end * (i as f64 / 128.0).powi(2)).collect();
            let mut running = vec![0.0];
            for w in grid.windows(2) {
                running.push(running.last().unwrap() + quad::integrate(&g, w[0], w[1], &inner)?);
            }
            let cumulative = |t: f64| -> Result<f64> {
                let k = grid.partition_point(|&b| b <= t).clamp(1, grid.len()) - 1;
                Ok(running[k] + quad::integrate(&g, grid[k], t, &inner)?)
            };
            let lhs = self.laplace_in_time_with(theta, growth, &outer, cumulative)?;
            let rhs = (-phi * y).exp() / (theta * (phi - alpha));
            self.push(
                "running_exp_moment_laplace",
                &[("theta", theta), ("alpha", alpha), ("y", y)],
                lhs,
                rhs,
                1e-4,
            );
        }

        // Kendall in Laplace form: E[e^{-theta T_x^+}] = e^{-Phi(theta) x}.
        for x in [0.5, 1.0] {
            for theta in [0.5, 2.0] {
                let lhs = self.first_passage(x, theta, f64::INFINITY)?;
                let rhs = (-m.phi(theta)? * x).exp();
                self.push("kendall_laplace", &[("x", x), ("theta", theta)], lhs, rhs, 1e-6);
            }
        }

        if m.kind == ModelKind::BrownianDrift {
            let (mu, s2) = (m.mu, m.sigma * m.sigma);
            for x in [0.25, 1.0, 2.0] {
                for t in [0.5, 1.0, 3.0] {
                    let lhs = x / t * m.transition_density(t)?.pdf(x)?;
                    let rhs = x / (2.0 * PI * s2 * t.powi(3)).sqrt() * (-(x - mu * t).powi(2) / (2.0 * s2 * t)).exp();
                    self.push("kendall_inverse_gaussian", &[("x", x), ("t", t)], lhs, rhs, 1e-6);
                }
            }
        }

        // Laplace transform in t of Omega below zero.
        {
            let (x, u, theta) = (-0.5, 0.5, 2.0);
            let k = self.kernels(u)?;
            let lhs = self.laplace_in_time(theta, u, |t| k.omega(x, t, 0.0))?;
            let rhs = (m.phi(theta)? * x).exp() / (theta - u);
            self.push(
                "omega_laplace_in_t",
                &[("x", x), ("u", u), ("theta", theta)],
                lhs,
                rhs,
                1e-5,
            );
        }

        // Laplace transform in r of Lambda against the first-passage form.
        {
            let (a, eps, u, theta) = (1.0, 0.0, 0.5, 1.5);
            let k = self.kernels(u)?;
            let lhs = self.laplace_in_time(theta + u, u, |r| k.lambda(a, r, eps))?;
            let phi = m.phi(theta + u)?;
            let sf = k.scale();
            let decay = phi - sf.phi_q();
            let rhs = quad::integrate_with_breaks(
                |z| Ok((-phi * (z + eps)).exp() * sf.w_prime(z + a)?),
                0.0,
                40.0 / decay,
                &[1.0 / decay, 5.0 / decay],
                &self.opts(),
            )?;
            self.push(
                "lambda_laplace_in_r",
                &[("a", a), ("eps", eps), ("u", u), ("theta", theta)],
                lhs,
                rhs,
                1e-5,
            );
        }

        {
            let (x, h, u, t) = (0.5, 1e-5, 0.5, 1.0);
            let k = self.kernels(u)?;
            let fd = (k.omega(x + h, t, 0.0)? - k.omega(x - h, t, 0.0)?) / (2.0 * h);
            self.push(
                "lambda_finite_difference",
                &[("x", x), ("u", u), ("t", t)],
                fd,
                k.lambda(x, t, 0.0)?,
                1e-4,
            );
        }

        {
            let (eps, u, t) = (0.0, 0.5, 1.0);
            let k = self.kernels(u)?;
            let mut xs = vec![0.5];
            if !m.bounded_variation() {
                xs.push(-0.3);
            }
            for x in xs {
                let (lhs, rhs) = k.integration_by_parts_check(x, eps, t)?;
                self.push(
                    "integration_by_parts",
                    &[("x", x), ("eps", eps), ("u", u), ("t", t)],
                    lhs,
                    rhs,
                    1e-5,
                );
            }
        }

        {
            let (nu, p, x, t) = (0.5, 0.2, 0.3, 1.0);
            let base = omega_esscher(&m, p, nu, x, t, &self.opts())?;
            let tilted = Kernels::with_scale(
                ScaleFunction::auto(m.esscher(nu)?, p)?.with_talbot_nodes(self.cfg.inv.nodes),
                self.opts(),
            )
            .with_tail_sds(self.cfg.quad.zmax_sds);
            let direct = tilted.omega(x, t, 0.0)?;
            self.push(
                "esscher_omega",
                &[("nu", nu), ("p", p), ("x", x), ("t", t)],
                base,
                direct,
                1e-5,
            );
        }
        Ok(())
    }

    fn formula_checks(&mut self) -> Result<()> {
        let m = *self.model();
        let (a, r) = (1.0, 0.5);

        for z in [0.0, 0.5, a, 1.5 * a] {
            let v = self.engine.lt_ruin(&ParisianQuery::new(a, r, 0.0, z))?;
            self.push("ruin_certain", &[("a", a), ("r", r), ("z", z)], v, 1.0, 1e-8);
        }

        let q = ParisianQuery::new(a, r, 0.5, a);
        self.push(
            "z_equals_a_reduction",
            &[("a", a), ("r", r), ("u", q.u)],
            self.engine.lt_ruin(&q)?,
            self.engine.lt_ruin_general(&q)?,
            1e-10,
        );

        let q = ParisianQuery::new(a, r, 0.5, 0.5);
        self.push(
            "joint_zero_tilt",
            &[("a", a), ("r", r), ("u", q.u), ("z", q.z)],
            self.engine.joint_lt(&q.with_tilt(0.0, 0.0))?,
            self.engine.lt_ruin(&q)?,
            1e-12,
        );

        // Tilting through base-measure kernels versus working under the
        // tilted law directly.
        let (u, nu, z, x0) = (1.0, 0.25, 0.5, 0.3);
        let joint = self
            .engine
            .joint_lt(&ParisianQuery::new(a, r, u, z).with_tilt(nu, x0))?;
        let p = u - m.psi(nu);
        let tilted = Parisian::with_options(m.esscher(nu)?, self.opts())
            .with_talbot_nodes(self.cfg.inv.nodes)
            .with_tail_sds(self.cfg.quad.zmax_sds);
        let direct = (nu * x0).exp() * tilted.lt_ruin(&ParisianQuery::new(a, r, p, z))?;
        self.push(
            "joint_tilted_model",
            &[("a", a), ("r", r), ("u", u), ("nu", nu), ("z", z), ("x0", x0)],
            joint,
            direct,
            1e-5,
        );

        // Drawdown-up transform at nu = Phi(theta) through the complement
        // of the discounted integral.
        {
            let (theta, u, a, s) = (2.0, 0.5, 1.0, 0.3);
            let phi = m.phi(theta)?;
            let lhs = self.engine.lt_drawdown_up(u, phi, a, s)?;
            let sf = self.engine.scale(u)?;
            let tail = |x: f64| -> Result<f64> { Ok(1.0 / (theta - u) - sf.w_bar_discounted(phi, x)?) };
            let rhs = (theta - u) * (-phi * s).exp() * tail(a - s)?
                - sf.w(a - s)? / sf.w_prime(a)?
                    * ((u - theta) * (-phi * a).exp() * sf.w(a)? - (u - theta) * phi * tail(a)?);
            self.push(
                "drawdown_up_at_phi",
                &[("theta", theta), ("u", u), ("a", a), ("s", s)],
                lhs,
                rhs,
                1e-8,
            );
        }

        // Started above `a`, the entry-then-down functionals reduce to
        // first-passage laws of X.
        {
            let (a, y, r) = (1.0, 1.4, 1.0);
            let level = y - a;
            let p0 = self.engine.entry_then_down_prob(0.0, 0.0, a, y, r)?;
            let p1 = self.engine.entry_then_down_prob(0.5, 0.0, a, y, r)?;
            let target = self.first_passage(level, 0.0, r)?;
            self.push(
                "entry_down_probability",
                &[("a", a), ("y", y), ("r", r)],
                p0,
                target,
                1e-5,
            );
            self.push(
                "entry_down_u_invariance",
                &[("a", a), ("y", y), ("r", r), ("u", 0.5)],
                p1,
                p0,
                1e-5,
            );
            let u = 0.5;
            let lt = self.engine.entry_then_down_lt(u, 0.0, a, y, r)?;
            let target = self.first_passage(level, u, r)?;
            self.push(
                "entry_down_discounted",
                &[("a", a), ("y", y), ("r", r), ("u", u)],
                lt,
                target,
                1e-5,
            );
        }
        Ok(())
    }
}

/// Runs every identity check for `cfg.model` with the configured numerics.
/// Numerical failures inside a check propagate as errors.
pub fn run_validation_suite(cfg: &RunConfig) -> Result<Report> {
    let mut suite = Suite {
        cfg,
        engine: cfg.parisian(),
        checks: Vec::new(),
    };
    suite.exponent_checks()?;
    suite.density_checks()?;
    suite.scale_checks()?;
    suite.kernel_checks()?;
    suite.formula_checks()?;
    Ok(Report {
        model: cfg.model,
        checks: suite.checks,
    })
}
