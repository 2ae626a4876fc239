//! Numerical checks of the propagator inequalities: each left side is
//! evaluated on a fixed set of random parameters and divided by its stated
//! `eta`/`lambda`/`|||q|||` dependence. The resulting empirical constant must
//! stay bounded as `eta` decreases.
//!
//! All resolvents use damping that adds to the self-energy width,
//! `|alpha - e - lambda^2 Re theta + i (lambda^2 Im theta + eta)|`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::dispersion::Dispersion;
use super::dos::DensityOfStates;
use super::self_energy::{FormFactor, Model, SelfEnergy};
use super::shell::{BallShell, LatticeShell};
use crate::error::Result;
use crate::numerics::{adaptive_gk_breaks, derive_seed, seeded_rng, Rng64, RunningStats};
use crate::types::Verdict;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SuiteLevel {
    Fast,
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundSuiteConfig {
    pub level: SuiteLevel,
    pub seed: u64,
    pub kappa: f64,
    /// Decreasing regularizations; the first one is the reference.
    pub etas: Vec<f64>,
    /// Relative Monte Carlo error above which the four-denominator check is only qualitative.
    pub variance_cap: f64,
}

impl Default for BoundSuiteConfig {
    fn default() -> Self {
        Self { level: SuiteLevel::Fast, seed: 2024, kappa: 1.0 / 16.0, etas: vec![1e-1, 1e-2, 1e-3], variance_cap: 0.1 }
    }
}

impl BoundSuiteConfig {
    fn params(&self) -> usize {
        match self.level {
            SuiteLevel::Fast => 4,
            SuiteLevel::Full => 20,
        }
    }

    fn samples(&self) -> u64 {
        match self.level {
            SuiteLevel::Fast => 20_000,
            SuiteLevel::Full => 200_000,
        }
    }

    /// Coupling in the middle of the window `lambda^{2+4 kappa} <= eta <= lambda^2`.
    pub fn lambda_for(&self, eta: f64) -> f64 {
        eta.powf(1.0 / (2.0 + 2.0 * self.kappa))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub name: String,
    pub envelope: String,
    pub etas: Vec<f64>,
    /// Largest left side over the parameter set, per `eta`.
    pub lhs: Vec<f64>,
    /// Largest ratio left side / envelope over the parameter set, per `eta`.
    pub constants: Vec<f64>,
    /// `max_k C(eta_k) / C(eta_0)`.
    pub growth: f64,
    /// `max_k C(eta_k) / min_k C(eta_k)`.
    pub spread: f64,
    /// The constant shrinks by more than a factor 10: the envelope is not sharp.
    pub loose: bool,
    pub max_rel_error: f64,
    pub verdict: Verdict,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundSuiteReport {
    pub config: BoundSuiteConfig,
    pub reports: Vec<InequalityReport>,
}

impl BoundSuiteReport {
    pub fn all_pass(&self) -> bool {
        self.reports.iter().all(|r| r.verdict != Verdict::Fail)
    }
}

/// Per-`eta` outcome: (largest lhs, largest constant, largest relative MC error).
type Column = (f64, f64, f64);

fn summarize(name: &str, envelope: &str, etas: &[f64], cols: Vec<Column>, cap: Option<f64>) -> InequalityReport {
    let lhs: Vec<f64> = cols.iter().map(|c| c.0).collect();
    let constants: Vec<f64> = cols.iter().map(|c| c.1).collect();
    let max_rel_error = cols.iter().map(|c| c.2).fold(0.0, f64::max);
    let c0 = constants[0];
    let cmax = constants.iter().copied().fold(f64::MIN, f64::max);
    let cmin = constants.iter().copied().fold(f64::MAX, f64::min);
    let growth = cmax / c0;
    let spread = cmax / cmin;
    let loose = constants.last().unwrap() / c0 < 0.1;
    let finite = constants.iter().all(|c| c.is_finite() && *c > 0.0);
    let mut note = String::new();
    let verdict = match cap {
        Some(cap) if max_rel_error > cap => {
            note = format!("relative MC error {max_rel_error:.3} above cap {cap}");
            Verdict::Qualitative
        }
        _ => Verdict::from_bool(finite && growth < 10.0),
    };
    if loose {
        note = if note.is_empty() { "constant decreases: envelope not sharp".into() } else { note };
    }
    InequalityReport {
        name: name.into(),
        envelope: envelope.into(),
        etas: etas.to_vec(),
        lhs,
        constants,
        growth,
        spread,
        loose,
        max_rel_error,
        verdict,
        note,
    }
}

fn resolvent_abs(alpha: f64, e: f64, theta: Complex64, l2: f64, eta: f64) -> f64 {
    (alpha - e - l2 * theta.re).hypot(l2 * theta.im + eta)
}

fn bracket(x: f64) -> f64 {
    (2.0 + x * x).sqrt()
}

fn log_abs(x: f64) -> f64 {
    x.ln().abs()
}

/// `int rho(E) dE / |alpha - E - lambda^2 theta(E) + i eta|^2` on the `d = 3` lattice.
pub fn lattice_square_resolvent(se: &SelfEnergy, alpha: f64, lambda: f64, eta: f64) -> f64 {
    let dos = DensityOfStates::shared(3);
    let l2 = lambda * lambda;
    let breaks = [1.0, 2.0, 3.0, 4.0, 5.0, alpha - 0.05, alpha, alpha + 0.05];
    let f = |e: f64| dos.rho(e) / resolvent_abs(alpha, e, se.theta_at(e), l2, eta).powi(2);
    adaptive_gk_breaks(f, 0.0, 6.0, &breaks, 1e-12, 1e-8, 20_000).value
}

/// Value of `sup_alpha int lambda^2 dp / |alpha - omega(p) - i eta|^2` and the maximizing `alpha`.
pub fn exact1_value(se: &SelfEnergy, lambda: f64, eta: f64) -> (f64, f64) {
    let disp = Dispersion::discrete(3);
    let mut best = (f64::MIN, 0.0);
    for k in 1..240 {
        let alpha = 6.0 * k as f64 / 240.0;
        if disp.energy_norm(alpha) < 0.1 {
            continue;
        }
        let v = lambda * lambda * lattice_square_resolvent(se, alpha, lambda, eta);
        if v > best.0 {
            best = (v, alpha);
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exact1Report {
    pub lambda: f64,
    pub kappa: f64,
    /// `eta -> 0` value of the resolvent damping, self-energy taken at `theta_eta`.
    pub limit_value: f64,
    pub limit_alpha: f64,
    pub theta_eta: f64,
    /// `(eta, value)` at the two ends of the window `lambda^{2+4 kappa} <= eta <= lambda^{2+kappa}`.
    pub window: Vec<(f64, f64)>,
    pub envelope: f64,
}

/// The ladder integral on the lattice at one coupling.
pub fn exact1_report(lambda: f64, kappa: f64) -> Result<Exact1Report> {
    let theta_eta = 1e-3;
    let se = SelfEnergy::born(Model::lattice3(), theta_eta)?;
    let (limit_value, limit_alpha) = exact1_value(&se, lambda, 0.0);
    let mut window = vec![];
    for eta in [lambda.powf(2.0 + kappa), lambda.powf(2.0 + 4.0 * kappa)] {
        let se = SelfEnergy::born(Model::lattice3(), eta.max(theta_eta))?;
        window.push((eta, exact1_value(&se, lambda, eta).0));
    }
    Ok(Exact1Report {
        lambda,
        kappa,
        limit_value,
        limit_alpha,
        theta_eta,
        window,
        envelope: 1.0 + lambda.powf(1.0 - 12.0 * kappa),
    })
}

/// Radial integral of an axially symmetric weight against a radial resolvent power in `R^3`.
fn radial<F: Fn(f64) -> f64, G: Fn(f64) -> f64>(angular: F, radial_part: G, q: f64, alpha: f64) -> f64 {
    let r0 = (2.0 * alpha.max(0.0)).sqrt();
    let hi = q.max(r0) + 14.0;
    let breaks = [r0 - 0.01, r0, r0 + 0.01, q];
    adaptive_gk_breaks(|r| 2.0 * PI * r * r * angular(r) * radial_part(r), 0.0, hi, &breaks, 1e-13, 1e-8, 20_000).value
}

/// `int_{-1}^{1} exp(-s (r^2 + q^2 - 2 r q c)) dc`.
fn gaussian_angular(r: f64, q: f64, s: f64) -> f64 {
    let x = 2.0 * s * r * q;
    if x < 1e-8 {
        return 2.0 * (-s * (r * r + q * q)).exp();
    }
    ((-s * (r - q).powi(2)).exp() - (-s * (r + q).powi(2)).exp()) / x
}

fn point_on_lattice_shell(rng: &mut Rng64, a: f64) -> [f64; 3] {
    loop {
        let p1: f64 = rng.random_range(-PI..PI);
        let p2: f64 = rng.random_range(-PI..PI);
        let c = 1.0 + (1.0 - p1.cos()) + (1.0 - p2.cos()) - a;
        if c.abs() <= 1.0 {
            let p3 = c.acos();
            return [p1, p2, if rng.random::<bool>() { p3 } else { -p3 }];
        }
    }
}

fn random_direction(rng: &mut Rng64) -> [f64; 3] {
    let z: f64 = rng.random_range(-1.0..1.0);
    let phi = rng.random_range(0.0..2.0 * PI);
    let s = (1.0 - z * z).sqrt();
    [s * phi.cos(), s * phi.sin(), z]
}

fn add(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn sub(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn lattice_e(p: &[f64; 3]) -> f64 {
    p.iter().map(|x| 1.0 - x.cos()).sum()
}

fn half_sq(p: &[f64; 3]) -> f64 {
    0.5 * p.iter().map(|x| x * x).sum::<f64>()
}

fn norm(p: &[f64; 3]) -> f64 {
    p.iter().map(|x| x * x).sum::<f64>().sqrt()
}

struct Ctx<'a> {
    cfg: &'a BoundSuiteConfig,
    lattice: Vec<SelfEnergy>,
    continuum: Vec<SelfEnergy>,
}

impl Ctx<'_> {
    fn param_rng(&self, id: u64) -> Rng64 {
        seeded_rng(derive_seed(self.cfg.seed, id))
    }

    fn mc_rng(&self, id: u64, param: usize, eta: usize) -> Rng64 {
        seeded_rng(derive_seed(self.cfg.seed, 1_000_000 + id * 10_000 + param as u64 * 10 + eta as u64))
    }

    /// Runs `eval(param, eta_index) -> (lhs, constant, rel_err)` on the grid.
    fn grid<P, F: Fn(&P, usize) -> Column>(&self, params: &[P], eval: F) -> Vec<Column> {
        (0..self.cfg.etas.len())
            .map(|k| {
                params.iter().fold((f64::MIN, f64::MIN, 0.0f64), |acc, p| {
                    let (l, c, e) = eval(p, k);
                    (acc.0.max(l), acc.1.max(c), acc.2.max(e))
                })
            })
            .collect()
    }
}

fn mc<F: FnMut(&mut Rng64) -> f64>(rng: &mut Rng64, n: u64, mut f: F) -> (f64, f64) {
    let mut st = RunningStats::new();
    for _ in 0..n {
        st.push(f(rng));
    }
    let rel = if st.mean != 0.0 { st.std_error() / st.mean.abs() } else { f64::INFINITY };
    (st.mean, rel)
}

/// Runs every implemented inequality over the `eta` grid.
pub fn bound_suite(cfg: &BoundSuiteConfig) -> Result<BoundSuiteReport> {
    let lattice = cfg.etas.iter().map(|&e| SelfEnergy::born(Model::lattice3(), e.max(1e-3))).collect::<Result<Vec<_>>>()?;
    let continuum = cfg
        .etas
        .iter()
        .map(|&e| SelfEnergy::born(Model::Continuum { form: FormFactor::Gaussian }, e))
        .collect::<Result<Vec<_>>>()?;
    let ctx = Ctx { cfg, lattice, continuum };
    let etas = &cfg.etas;
    let np = cfg.params();
    let n = cfg.samples();
    let mut reports = vec![];

    // lattice L^2 bound at lambda^2 = eta
    {
        let mut rng = ctx.param_rng(1);
        let alphas: Vec<f64> = (0..np).map(|_| random_regular_energy(&mut rng, 0.2)).collect();
        let cols = ctx.grid(&alphas, |&a, k| {
            let eta = etas[k];
            let lambda = eta.sqrt();
            let v = lattice_square_resolvent(&ctx.lattice[k], a, lambda, eta);
            (v, v * lambda * lambda, 0.0)
        });
        reports.push(summarize("eq2", "lambda^-2 at lambda^2 = eta", etas, cols, None));
    }

    // continuum logarithmic L^1 bound with form factor h = exp(-k^2 / 2)
    {
        let mut rng = ctx.param_rng(2);
        let ps: Vec<(f64, f64)> = (0..np).map(|_| (rng.random_range(0.3..3.0), rng.random_range(0.1..3.0))).collect();
        let cols = ctx.grid(&ps, |&(a, q), k| {
            let eta = etas[k];
            let lambda = cfg.lambda_for(eta);
            let se = &ctx.continuum[k];
            let v = radial(
                |r| gaussian_angular(r, q, 0.5),
                |r| 1.0 / resolvent_abs(a, 0.5 * r * r, se.theta_at(0.5 * r * r), lambda * lambda, eta),
                q,
                a,
            );
            let env = log_abs(lambda) * bracket(a).ln() / (bracket(a).sqrt() * bracket(q - (2.0 * a).sqrt()));
            (v, v / env, 0.0)
        });
        reports.push(summarize("logest", "|log lambda| log<alpha> / (<alpha>^1/2 <|q| - sqrt(2 alpha)>)", etas, cols, None));
    }

    // continuum powers 2 - a of the bare resolvent
    for (id, a_exp) in [(3u64, 0.0), (4, 0.5)] {
        let mut rng = ctx.param_rng(id);
        let ps: Vec<(f64, f64)> = (0..np).map(|_| (rng.random_range(0.3..3.0), rng.random_range(0.1..3.0))).collect();
        let cols = ctx.grid(&ps, |&(a, q), k| {
            let eta = etas[k];
            let v = radial(
                |r| gaussian_angular(r, q, 0.5),
                |r| (a - 0.5 * r * r).hypot(eta).powf(-(2.0 - a_exp)),
                q,
                a,
            );
            let env = eta.powf(-2.0 * (1.0 - a_exp)) / (bracket(a).powf(0.5 * a_exp) * bracket(q - (2.0 * a).sqrt()));
            (v, v / env, 0.0)
        });
        reports.push(summarize(
            &format!("3aint(a={a_exp})"),
            "eta^{-2(1-a)} / (<alpha>^{a/2} <|q| - sqrt(2 alpha)>)",
            etas,
            cols,
            None,
        ));
    }

    // continuum ladder integral with |B^|^2 = exp(-k^2)
    {
        let mut rng = ctx.param_rng(5);
        let ps: Vec<(f64, f64)> = (0..np)
            .map(|_| {
                let a: f64 = rng.random_range(0.3..2.0);
                (a, (2.0 * a).sqrt() * (1.0 + rng.random_range(-0.05..0.05)))
            })
            .collect();
        let cols = ctx.grid(&ps, |&(a, q), k| {
            let eta = etas[k];
            let lambda = cfg.lambda_for(eta);
            let l2 = lambda * lambda;
            let se = &ctx.continuum[k];
            let v = l2
                * radial(
                    |r| gaussian_angular(r, q, 1.0),
                    |r| resolvent_abs(a, 0.5 * r * r, se.theta_at(0.5 * r * r), l2, eta).powi(-2),
                    q,
                    a,
                );
            let omega_q = Complex64::new(0.5 * q * q, 0.0) + l2 * se.theta_at(0.5 * q * q);
            let env = 1.0 + lambda.powf(-12.0 * cfg.kappa) * (lambda + (Complex64::new(a, 0.0) - omega_q).norm().sqrt());
            (v, v / env, 0.0)
        });
        reports.push(summarize("ladderint", "1 + lambda^{-12 kappa} (lambda + |alpha - omega(q)|^1/2)", etas, cols, None));
    }

    // continuum overlap of two shells in the ball |p| <= zeta
    for (id, with_point) in [(6u64, false), (7, true)] {
        let mut rng = ctx.param_rng(id);
        let ps: Vec<(f64, f64, [f64; 3], [f64; 3])> = (0..np)
            .map(|_| {
                let a: f64 = rng.random_range(0.3..2.0);
                let b = (a + rng.random_range(-0.2..0.2)).max(0.05);
                let dir = random_direction(&mut rng);
                let qn: f64 = rng.random_range(0.05..2.0);
                let rdir = random_direction(&mut rng);
                let r0 = (2.0 * a).sqrt();
                (a, b, dir.map(|x| x * qn), rdir.map(|x| x * r0))
            })
            .collect();
        let cols = ctx.grid(&ps, |&(a, b, q, r), k| {
            let eta = etas[k];
            let lambda = cfg.lambda_for(eta);
            let zeta = 3.0 * lambda.powf(-cfg.kappa);
            let shell = BallShell::multiscale(zeta, a, eta);
            let idx = ps.iter().position(|p| p.0 == a && p.1 == b).unwrap();
            let mut mrng = ctx.mc_rng(id, idx, k);
            let (v, rel) = mc(&mut mrng, n, |g| {
                let p = shell.sample(g);
                let mut f = 1.0 / ((a - half_sq(&p)).hypot(eta) * (b - half_sq(&add(&p, &q))).hypot(eta));
                if with_point {
                    f /= norm(&sub(&p, &r)) + eta;
                }
                f / shell.density(&p)
            });
            let qq = norm(&q) + eta;
            let env = log_abs(eta).powi(2) / qq * if with_point { eta.powf(-0.5) } else { 1.0 };
            (v, v / env, rel)
        });
        let (name, envelope) = if with_point {
            ("withp", "eta^-1/2 |log eta|^2 / |||q|||")
        } else {
            ("withoutp", "|log eta|^2 / |||q|||")
        };
        reports.push(summarize(name, envelope, etas, cols, None));
    }

    // lattice bounds with a point singularity and/or a shifted second shell
    let disp = Dispersion::discrete(3);
    for (id, name, envelope, two, point, power) in [
        (8u64, "1dee", "|log eta|^3", false, true, 0.0),
        (9, "nopont", "eta^-3/4 |log eta|^3 / |||q|||", true, false, 0.75),
        (10, "withp1", "eta^-7/8 |log eta|^3 / |||q|||", true, true, 0.875),
    ] {
        let mut rng = ctx.param_rng(id);
        let ps: Vec<(f64, f64, [f64; 3], [f64; 3])> = (0..np)
            .map(|_| {
                let a = random_regular_energy(&mut rng, 0.2);
                let b = (a + rng.random_range(-0.2..0.2)).clamp(0.05, 5.95);
                let dir = random_direction(&mut rng);
                let qn: f64 = rng.random_range(0.05..2.0);
                (a, b, dir.map(|x| x * qn), point_on_lattice_shell(&mut rng, a))
            })
            .collect();
        let cols = ctx.grid(&ps, |&(a, b, q, r), k| {
            let eta = etas[k];
            let shell = LatticeShell::multiscale(a, eta, 6.0);
            let idx = ps.iter().position(|p| p.0 == a && p.3 == r).unwrap();
            let mut mrng = ctx.mc_rng(id, idx, k);
            let mut p = [0.0; 3];
            let (v, rel) = mc(&mut mrng, n, |g| {
                shell.sample(g, &mut p);
                let mut f = 1.0 / (a - lattice_e(&p)).hypot(eta);
                if two {
                    f /= (b - lattice_e(&add(&p, &q))).hypot(eta);
                }
                if point {
                    f /= disp.momentum_norm(&sub(&p, &r), eta);
                }
                f / shell.density(&p)
            });
            let mut env = log_abs(eta).powi(3) * eta.powf(-power);
            if two {
                env /= disp.momentum_norm(&q, eta);
            }
            (v, v / env, rel)
        });
        reports.push(summarize(name, envelope, etas, cols, None));
    }

    // lattice ladder integral, supremum over alpha
    {
        let cols: Vec<Column> = (0..etas.len())
            .map(|k| {
                let eta = etas[k];
                let lambda = cfg.lambda_for(eta);
                let (v, _) = exact1_value(&ctx.lattice[k], lambda, eta);
                (v, v / (1.0 + lambda.powf(1.0 - 12.0 * cfg.kappa)), 0.0)
            })
            .collect();
        reports.push(summarize("exact1", "1 + lambda^{1 - 12 kappa}", etas, cols, None));
    }

    reports.push(four_denominator(&ctx)?);
    Ok(BoundSuiteReport { config: cfg.clone(), reports })
}

fn random_regular_energy(rng: &mut Rng64, margin: f64) -> f64 {
    let disp = Dispersion::discrete(3);
    loop {
        let a = rng.random_range(0.0..6.0);
        if disp.energy_norm(a) >= margin {
            return a;
        }
    }
}

/// Nine-dimensional four-denominator integral by Monte Carlo with shell sampling
/// of `p, q, r`; qualitative when the relative error exceeds the cap.
fn four_denominator(ctx: &Ctx) -> Result<InequalityReport> {
    let cfg = ctx.cfg;
    let etas = &cfg.etas;
    let mut rng = ctx.param_rng(11);
    let ps: Vec<(f64, [f64; 3])> = [1.0, 2.5]
        .iter()
        .map(|&a| (a, [rng.random_range(-PI..PI), rng.random_range(-PI..PI), rng.random_range(-PI..PI)]))
        .collect();
    let n = 2 * cfg.samples();
    let cols = ctx.grid(&ps, |&(a, u), k| {
        let eta = etas[k];
        let shell = LatticeShell::multiscale(a, eta, 6.0);
        let idx = ps.iter().position(|p| p.0 == a).unwrap();
        let mut mrng = ctx.mc_rng(11, idx, k);
        let (mut p, mut q, mut r) = ([0.0; 3], [0.0; 3], [0.0; 3]);
        let (v, rel) = mc(&mut mrng, n, |g| {
            shell.sample(g, &mut p);
            shell.sample(g, &mut q);
            shell.sample(g, &mut r);
            let s = add(&add(&sub(&p, &q), &r), &u);
            let num = [p, q, r, s].iter().map(|x| (a - lattice_e(x)).hypot(eta)).product::<f64>();
            1.0 / (num * shell.density(&p) * shell.density(&q) * shell.density(&r))
        });
        (v, v / log_abs(eta).powi(14), rel)
    });
    Ok(summarize("4dee", "|log eta|^14, |||alpha||| >= 1/2", etas, cols, Some(cfg.variance_cap)))
}
