//! Acceptance criteria 1 to 10. Each test prints a single
//! `criterion N: PASS|FAIL` line (visible with `--nocapture`) and fails if
//! any of its sub-checks does.

use std::f64::consts::PI;
use std::sync::OnceLock;

use parisian_core::mc::{
    estimate_drawdown_down, estimate_drawdown_up, estimate_lt, ruin_functional, simulate_ruin, RuinSample,
};
use parisian_core::quad::{self, QuadOptions};
use parisian_core::{Backend, Kernels, LevyModel, McConfig, McMode, Parisian, ParisianQuery, ScaleFunction};

fn bm() -> LevyModel {
    LevyModel::brownian(0.5, 1.0).unwrap()
}

fn cl() -> LevyModel {
    LevyModel::cramer_lundberg(1.0, 1.0, 0.5).unwrap()
}

fn perturbed() -> LevyModel {
    LevyModel::perturbed(1.0, 0.5, 1.0, 0.5).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Collects sub-check failures for one criterion.
struct Tally {
    id: u32,
    checks: usize,
    failures: Vec<String>,
}

impl Tally {
    fn new(id: u32) -> Self {
        Tally {
            id,
            checks: 0,
            failures: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn finish(self, summary: &str) {
        let verdict = if self.failures.is_empty() { "PASS" } else { "FAIL" };
        println!("criterion {}: {verdict} ({} checks; {summary})", self.id, self.checks);
        for f in &self.failures {
            println!("    {f}");
        }
        assert!(
            self.failures.is_empty(),
            "criterion {} failed: {:#?}",
            self.id,
            self.failures
        );
    }
}

const A: f64 = 1.0;
const R: f64 = 0.5;
const MC_Z: [f64; 3] = [0.0, 0.5, 1.5];
const MC_PATHS: usize = 200_000;

struct RuinRun {
    name: &'static str,
    model: LevyModel,
    cfg: McConfig,
    z: f64,
    samples: Vec<RuinSample>,
}

/// Ruin samples shared by criteria 4, 5 and 10: one run of `MC_PATHS`
/// paths per model and starting drawdown, default seed and horizon.
fn ruin_runs() -> &'static [RuinRun] {
    static RUNS: OnceLock<Vec<RuinRun>> = OnceLock::new();
    RUNS.get_or_init(|| {
        let mut out = Vec::new();
        for (name, model, mode) in [("cl", cl(), McMode::Exact), ("bm", bm(), McMode::Euler)] {
            let cfg = McConfig {
                n_paths: MC_PATHS,
                dt: 1e-3,
                mode,
                ..McConfig::default()
            };
            for z in MC_Z {
                let samples = simulate_ruin(&model, A, R, z, 0.0, &cfg).unwrap();
                out.push(RuinRun {
                    name,
                    model,
                    cfg,
                    z,
                    samples,
                });
            }
        }
        out
    })
}

#[test]
fn criterion_01_ruin_is_certain() {
    let mut t = Tally::new(1);
    let mut worst = 0.0f64;
    for model in [bm(), cl()] {
        let p = Parisian::new(model);
        for a in [0.5, 1.0, 2.0] {
            for r in [0.25, 1.0] {
                for z in [0.0, 0.5, a, 1.5 * a] {
                    let v = p.lt_ruin(&ParisianQuery::new(a, r, 0.0, z)).unwrap();
                    worst = worst.max((v - 1.0).abs());
                    t.check((v - 1.0).abs() <= 1e-8, || {
                        format!("{:?} a={a} r={r} z={z}: {v}", model.kind)
                    });
                }
            }
        }
    }
    t.finish(&format!("max |value - 1| = {worst:.2e}"));
}

#[test]
fn criterion_02_omega_at_zero_is_exponential() {
    let mut t = Tally::new(2);
    let mut worst = 0.0f64;
    for model in [bm(), cl(), perturbed()] {
        for u in [0.0, 0.5, 1.0] {
            let k = Kernels::new(model, u, QuadOptions::default()).unwrap();
            for time in [0.1, 1.0, 5.0] {
                let omega = k.omega(0.0, time, 0.0).unwrap();
                let target = (u * time).exp();
                let e = rel(omega, target);
                worst = worst.max(e);
                t.check(e <= 1e-6, || {
                    format!("{:?} u={u} t={time}: {omega} vs {target}", model.kind)
                });
            }
        }
    }
    t.finish(&format!("max rel err = {worst:.2e}"));
}

#[test]
fn criterion_03_scale_function_laplace_transform() {
    let mut t = Tally::new(3);
    let mut worst = 0.0f64;
    let opts = QuadOptions {
        rel_tol: 1e-10,
        abs_tol: 0.0,
        ..QuadOptions::default()
    };
    let cases = [
        (bm(), vec![Backend::ClosedForm, Backend::NumericInversion]),
        (cl(), vec![Backend::ClosedForm, Backend::NumericInversion]),
        (perturbed(), vec![Backend::NumericInversion]),
    ];
    for (model, backends) in &cases {
        for &q in &[0.0, 0.5, 2.0] {
            for &backend in backends {
                let sf = ScaleFunction::new(*model, q, backend).unwrap();
                for step in [1.0, 2.0, 5.0] {
                    let lam = sf.phi_q() + step;
                    // e^{-lam x} W(x) decays like e^{-step x}.
                    let lhs = quad::integrate_with_breaks(
                        |x| Ok((-lam * x).exp() * sf.w(x)?),
                        0.0,
                        40.0 / step,
                        &[1.0 / step, 5.0 / step],
                        &opts,
                    )
                    .unwrap();
                    let rhs = 1.0 / (model.psi(lam) - q);
                    let e = rel(lhs, rhs);
                    worst = worst.max(e);
                    t.check(e <= 1e-6, || {
                        format!("{:?} {backend:?} q={q} lambda={lam}: {lhs} vs {rhs}", model.kind)
                    });
                }
            }
            if backends.len() == 2 {
                let closed = ScaleFunction::new(*model, q, Backend::ClosedForm).unwrap();
                let numeric = ScaleFunction::new(*model, q, Backend::NumericInversion).unwrap();
                for i in 0..20 {
                    let x = 0.01 + (5.0 - 0.01) * i as f64 / 19.0;
                    let (c, n) = (closed.w(x).unwrap(), numeric.w(x).unwrap());
                    let e = rel(n, c);
                    worst = worst.max(e);
                    t.check(e <= 1e-6, || {
                        format!("{:?} q={q} x={x}: closed {c} numeric {n}", model.kind)
                    });
                }
            }
        }
    }
    t.finish(&format!("max rel err = {worst:.2e}"));
}

#[test]
fn criterion_04_ruin_transform_matches_monte_carlo() {
    let mut t = Tally::new(4);
    let mut worst = 0.0f64;
    for run in ruin_runs() {
        let p = Parisian::new(run.model);
        let bias = match run.cfg.mode {
            McMode::Euler => 1.0 * run.cfg.dt,
            McMode::Exact => 0.0,
        };
        for u in [0.5, 1.0] {
            let f = p.lt_ruin(&ParisianQuery::new(A, R, u, run.z)).unwrap();
            let e = ruin_functional(&run.samples, u, 0.0, run.cfg.seed);
            worst = worst.max(e.z_score(f).abs());
            t.check((f - e.mean).abs() <= 3.0 * e.stderr + bias, || {
                format!("{} z={} u={u}: formula {f} mc {}±{}", run.name, run.z, e.mean, e.stderr)
            });
        }
    }
    t.finish(&format!("N={MC_PATHS}, max |z-score| = {worst:.2}"));
}

#[test]
fn criterion_05_joint_transform_matches_monte_carlo() {
    let mut t = Tally::new(5);
    let mut worst = 0.0f64;
    let mut worst_identity = 0.0f64;
    for run in ruin_runs() {
        let p = Parisian::new(run.model);
        for u in [0.5, 1.0] {
            for nu in [0.25, 0.5] {
                let f = p
                    .joint_lt(&ParisianQuery::new(A, R, u, run.z).with_tilt(nu, 0.0))
                    .unwrap();
                let e = ruin_functional(&run.samples, u, nu, run.cfg.seed);
                worst = worst.max(e.z_score(f).abs());
                t.check((f - e.mean).abs() <= 3.0 * e.stderr, || {
                    format!(
                        "{} z={} u={u} nu={nu}: formula {f} mc {}±{}",
                        run.name, run.z, e.mean, e.stderr
                    )
                });
            }
            let q = ParisianQuery::new(A, R, u, run.z);
            let joint = p.joint_lt(&q.with_tilt(0.0, 0.0)).unwrap();
            let plain = p.lt_ruin(&q).unwrap();
            worst_identity = worst_identity.max(rel(joint, plain));
            t.check(rel(joint, plain) <= 1e-12, || {
                format!("{} z={} u={u}: joint {joint} vs {plain}", run.name, run.z)
            });
        }
    }
    t.finish(&format!(
        "max |z-score| = {worst:.2}, nu=0 rel gap = {worst_identity:.1e}"
    ));
}

#[test]
fn criterion_06_drawdown_exit_identities_match_monte_carlo() {
    let mut t = Tally::new(6);
    let mut worst = 0.0f64;
    for (name, model) in [("bm", bm()), ("cl", cl()), ("perturbed", perturbed())] {
        let p = Parisian::new(model);
        let cfg = McConfig {
            n_paths: 100_000,
            ..McConfig::for_model(&model)
        };
        for (theta, y) in [(1.0, 1.7), (0.5, 1.5)] {
            let f = p.lt_drawdown_down(theta, y, A).unwrap();
            let e = estimate_drawdown_down(&model, theta, A, y, &cfg).unwrap();
            worst = worst.max(e.z_score(f).abs());
            t.check((f - e.mean).abs() <= 3.0 * e.stderr, || {
                format!(
                    "{name} down theta={theta} y={y}: formula {f} mc {}±{}",
                    e.mean, e.stderr
                )
            });
        }
        for (u, nu, s) in [(0.5, 3.0, 0.0), (1.0, 2.0, 0.2)] {
            let f = p.lt_drawdown_up(u, nu, A, s).unwrap();
            let e = estimate_drawdown_up(&model, u, nu, A, s, &cfg).unwrap();
            worst = worst.max(e.z_score(f).abs());
            t.check((f - e.mean).abs() <= 3.0 * e.stderr, || {
                format!("{name} up u={u} nu={nu} s={s}: formula {f} mc {}±{}", e.mean, e.stderr)
            });
        }
    }
    t.finish(&format!("N=100000, max |z-score| = {worst:.2}"));
}

fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

#[test]
fn criterion_07_kendall_against_inverse_gaussian() {
    let mut t = Tally::new(7);
    let mut worst = 0.0f64;
    let m = bm();
    let (mu, sigma) = (m.mu, m.sigma);
    let opts = QuadOptions {
        rel_tol: 1e-11,
        abs_tol: 0.0,
        ..QuadOptions::default()
    };
    for x in [0.25, 1.0, 2.0] {
        let kendall = |s: f64| x / s * m.transition_density(s).unwrap().pdf(x).unwrap();
        for time in [0.5f64, 1.0, 3.0] {
            let ig = x / (2.0 * PI * sigma * sigma * time.powi(3)).sqrt()
                * (-(x - mu * time).powi(2) / (2.0 * sigma * sigma * time)).exp();
            let lhs = kendall(time);
            let e = rel(lhs, ig);
            worst = worst.max(e);
            t.check(e <= 1e-6, || format!("density x={x} t={time}: {lhs} vs {ig}"));

            // First-passage distribution function: integrate the Kendall
            // density on s = v^2 and compare with the inverse-Gaussian CDF.
            let cdf = quad::integrate(
                |v: f64| Ok(if v > 0.0 { 2.0 * v * kendall(v * v) } else { 0.0 }),
                0.0,
                time.sqrt(),
                &opts,
            )
            .unwrap();
            let st = sigma * time.sqrt();
            let ig_cdf = std_normal_cdf((mu * time - x) / st)
                + (2.0 * mu * x / (sigma * sigma)).exp() * std_normal_cdf((-x - mu * time) / st);
            let e = rel(cdf, ig_cdf);
            worst = worst.max(e);
            t.check(e <= 1e-6, || format!("cdf x={x} t={time}: {cdf} vs {ig_cdf}"));
        }
    }
    t.finish(&format!("max rel err = {worst:.2e}"));
}

#[test]
fn criterion_08_eps_version_converges() {
    let mut t = Tally::new(8);
    let mut finals = Vec::new();
    for (name, model) in [("cl", cl()), ("bm", bm())] {
        let p = Parisian::new(model);
        for (u, y) in [(0.5, 0.0), (1.0, 0.5)] {
            let exact = p.lt_ruin(&ParisianQuery::new(A, R, u, y)).unwrap();
            let gaps: Vec<f64> = [0.1, 0.01, 1e-3, 1e-4]
                .iter()
                .map(|&eps| (p.lt_ruin_eps(u, eps, A, y, R).unwrap() - exact).abs())
                .collect();
            let monotone = gaps.windows(2).all(|w| w[1] < w[0]);
            t.check(monotone, || format!("{name} u={u} y={y}: gaps not decreasing {gaps:?}"));
            let last = gaps[3];
            finals.push(last);
            t.check(last <= 1e-4, || format!("{name} u={u} y={y}: final gap {last}"));
        }
    }
    let worst = finals.iter().cloned().fold(0.0, f64::max);
    t.finish(&format!("max final gap = {worst:.2e}"));
}

#[test]
fn criterion_09_structural_properties() {
    let mut t = Tally::new(9);
    for (name, model) in [("bm", bm()), ("cl", cl()), ("perturbed", perturbed())] {
        let p = Parisian::new(model);
        let v = |a: f64, r: f64, u: f64, z: f64| p.lt_ruin(&ParisianQuery::new(a, r, u, z)).unwrap();

        let in_u: Vec<f64> = [0.25, 0.5, 1.0, 2.0].iter().map(|&u| v(A, R, u, 0.5)).collect();
        t.check(in_u.windows(2).all(|w| w[1] < w[0]), || {
            format!("{name}: not decreasing in u {in_u:?}")
        });
        let in_r: Vec<f64> = [0.25, 0.5, 1.0, 2.0].iter().map(|&r| v(A, r, 0.5, 0.5)).collect();
        t.check(in_r.windows(2).all(|w| w[1] < w[0]), || {
            format!("{name}: not decreasing in r {in_r:?}")
        });
        let in_z: Vec<f64> = [0.0, 0.5, 1.0, 1.5].iter().map(|&z| v(A, R, 0.5, z)).collect();
        t.check(in_z.windows(2).all(|w| w[1] > w[0]), || {
            format!("{name}: not increasing in z {in_z:?}")
        });

        for u in [0.5, 1.0] {
            let at = v(A, R, u, A);
            for z in [A - 1e-8, A + 1e-8] {
                let near = v(A, R, u, z);
                t.check((near - at).abs() <= 1e-6, || {
                    format!("{name} u={u}: jump at z=a, {near} vs {at}")
                });
            }
        }

        // Lambda against a Richardson-extrapolated central difference of Omega.
        let k = Kernels::new(model, 0.5, QuadOptions::default()).unwrap();
        for (x, time) in [(0.5, 0.5), (1.0, 1.0), (2.0, 0.25)] {
            let h = 1e-3;
            let d = |h: f64| (k.omega(x + h, time, 0.0).unwrap() - k.omega(x - h, time, 0.0).unwrap()) / (2.0 * h);
            let fd = (4.0 * d(0.5 * h) - d(h)) / 3.0;
            let lam = k.lambda(x, time, 0.0).unwrap();
            t.check(rel(fd, lam) <= 1e-4, || {
                format!("{name} x={x} t={time}: Lambda {lam} vs difference {fd}")
            });
        }
    }
    t.finish("u, r, z chains, z=a continuity, Lambda = dOmega/dx");
}

#[test]
fn criterion_10_monte_carlo_engine() {
    let mut t = Tally::new(10);
    let model = cl();
    let q = ParisianQuery::new(A, R, 0.5, 0.5);
    let cfg = McConfig {
        n_paths: 20_000,
        seed: 7,
        ..McConfig::for_model(&model)
    };

    let first = estimate_lt(&model, &q, &cfg).unwrap();
    let again = estimate_lt(&model, &q, &cfg).unwrap();
    t.check(first == again, || format!("re-run differs: {first:?} vs {again:?}"));
    for threads in [1, 3] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let pooled = pool.install(|| estimate_lt(&model, &q, &cfg).unwrap());
        t.check(
            pooled.mean.to_bits() == first.mean.to_bits() && pooled.stderr.to_bits() == first.stderr.to_bits(),
            || format!("{threads} threads: {pooled:?} vs {first:?}"),
        );
    }
    let bm_cfg = McConfig {
        n_paths: 2_000,
        seed: 7,
        ..McConfig::for_model(&bm())
    };
    let b1 = estimate_lt(&bm(), &q, &bm_cfg).unwrap();
    let b2 = rayon::ThreadPoolBuilder::new()
        .num_threads(2)
        .build()
        .unwrap()
        .install(|| estimate_lt(&bm(), &q, &bm_cfg).unwrap());
    t.check(b1 == b2, || format!("euler re-run differs: {b1:?} vs {b2:?}"));

    // Four doublings of the path count shrink the standard error fourfold.
    let small = estimate_lt(
        &model,
        &q,
        &McConfig {
            n_paths: 4_000,
            seed: 11,
            ..cfg
        },
    )
    .unwrap();
    let large = estimate_lt(
        &model,
        &q,
        &McConfig {
            n_paths: 64_000,
            seed: 11,
            ..cfg
        },
    )
    .unwrap();
    let ratio = small.stderr / large.stderr;
    t.check((ratio / 4.0 - 1.0).abs() <= 0.2, || format!("stderr ratio {ratio}"));

    let mut worst_capped = 0.0f64;
    for run in ruin_runs() {
        let e = ruin_functional(&run.samples, 0.0, 0.0, run.cfg.seed);
        worst_capped = worst_capped.max(e.capped_fraction);
        t.check(e.capped_fraction < 1e-3, || {
            format!("{} z={}: capped {}", run.name, run.z, e.capped_fraction)
        });
        t.check(run.samples.iter().all(|s| s.capped() || s.tau >= R), || {
            format!("{} z={}: tau < r", run.name, run.z)
        });
    }
    t.finish(&format!(
        "stderr ratio = {ratio:.3}, max capped fraction = {worst_capped:.1e}"
    ));
}
