//! One runner per subcommand. Each takes its resolved parameters and returns
//! the JSON result, CSV tables and failed invariants.

use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::json;

use qdiff_core::diagram_integrator::{
    bound_suite, brute_force_omega, resummation_check, delta_family_check, exact1_report, integration_plan, main_term_identities,
    power_count, val_monte_carlo, BoundSuiteConfig, Dispersion, FormFactor, GeneralGraph, Model, SelfEnergy, SuiteLevel,
    TorusProfile, ValConfig,
};
use qdiff_core::lattice_schrodinger::{
    build_hamiltonian, duhamel_terms, evolve, free_ballistic_fit, low_order_wigner, msd_growth, unitarity_bound_check,
    wigner, LatticeBox, LowOrderConfig, PotentialLaw, WaveFunction,
};
use qdiff_core::numerics::seeded_rng;
use qdiff_core::permutation_graphs::{
    build_matrix, check_unimodular, classify, enumerate_by_degree, IndexClass, Permutation,
};
use qdiff_core::stochastic_kinetics::{
    boltzmann_particle_sim, clt_statistics, clt_variance_vs_time, diffusion_matrix_surface, green_kubo_correlated,
    green_kubo_jump, jump_process, GreenKuboConfig, InitialLaw, JumpKernel, MarkovVelocities, StepDistribution,
    StepLaw,
};
use qdiff_core::Complex64;

use crate::run::{CliError, CliResult, Output, Table};

const DEFAULT_SEED: u64 = 2024;
const EXAMPLE_PI: &str = "1 2 7 6 5 3 4 8";

/// CSV cell text; floats round-trip exactly, in exponent form outside `[1e-4, 1e15)`.
trait Cell {
    fn cell(&self) -> String;
}

impl Cell for f64 {
    fn cell(&self) -> String {
        let a = self.abs();
        if a == 0.0 || (1e-4..1e15).contains(&a) || !a.is_finite() {
            self.to_string()
        } else {
            format!("{self:e}")
        }
    }
}

macro_rules! plain_cell {
    ($($t:ty),*) => {$(
        impl Cell for $t {
            fn cell(&self) -> String {
                self.to_string()
            }
        }
    )*};
}

plain_cell!(usize, u64, i8, &str, String);

impl<T: Cell + ?Sized> Cell for &T {
    fn cell(&self) -> String {
        (**self).cell()
    }
}

fn s(x: impl Cell) -> String {
    x.cell()
}

fn parse_pi(text: &str) -> CliResult<Permutation> {
    text.parse::<Permutation>().map_err(CliError::from)
}

fn parse_law(name: &str) -> CliResult<PotentialLaw> {
    match name {
        "bernoulli" => Ok(PotentialLaw::Bernoulli),
        "uniform" => Ok(PotentialLaw::Uniform),
        "gaussian" => Ok(PotentialLaw::Gaussian),
        _ => Err(CliError::Usage(format!("unknown potential law `{name}` (bernoulli, uniform, gaussian)"))),
    }
}

fn matrix_table(name: &str, rows: &[Vec<i8>]) -> Table {
    let k = rows.len();
    let header: Vec<String> = std::iter::once("row".to_string()).chain((1..=k).map(|j| format!("c{j}"))).collect();
    let mut t = Table { name: name.into(), header, rows: vec![] };
    for (i, r) in rows.iter().enumerate() {
        t.push(std::iter::once(s(i + 1)).chain(r.iter().map(s)));
    }
    t
}

// ---------------------------------------------------------------- perm

#[derive(Args, Serialize, Debug)]
pub struct PermArgs {
    /// One-line permutation, e.g. "1 2 7 6 5 3 4 8".
    #[arg(long)]
    pub pi: Option<String>,
}

#[derive(Serialize, Deserialize, Debug)]
pub struct PermParams {
    pub pi: String,
}

impl Default for PermParams {
    fn default() -> Self {
        Self { pi: EXAMPLE_PI.into() }
    }
}

fn class_name(c: IndexClass) -> &'static str {
    match c {
        IndexClass::Peak => "peak",
        IndexClass::Valley => "valley",
        IndexClass::Slope => "slope",
        IndexClass::Ladder => "ladder",
        IndexClass::Last => "last",
    }
}

pub fn perm(p: &PermParams) -> CliResult<Output> {
    let pi = parse_pi(&p.pi)?;
    let n = pi.n();
    let c = classify(&pi);
    let m = build_matrix(&pi);
    let mut out = Output::new(json!({
        "pi": pi.as_slice(),
        "inverse": pi.inverse().as_slice(),
        "n": n,
        "peaks": c.peaks,
        "valleys": c.valleys,
        "slopes": c.slopes,
        "ladders": c.ladders,
        "counts": { "p": c.p(), "v": c.v(), "s": c.s(), "l": c.l() },
        "degree": c.degree(),
        "matrix": m.rows(),
    }));
    let mut t = Table::new("classification", &["row", "class"]);
    for (i, cl) in c.classes.iter().enumerate() {
        t.push([s(i + 1), s(class_name(*cl))]);
    }
    out.tables.push(t);
    out.tables.push(matrix_table("matrix", &m.rows()));
    out.check(c.p() == c.v(), "number of peaks differs from number of valleys");
    out.check(c.p() + c.v() + c.s() + c.l() == n, "classes do not partition 1..n");
    out.check(2 * (c.v() + c.s()) >= c.degree(), "v + s below half the degree");
    out.check(pi.is_identity() == (c.degree() == 0), "degree zero exactly for the identity");
    out.check(c.degree() != 1, "degree equal to one");
    Ok(out)
}

// ---------------------------------------------------------------- matrix

#[derive(Args, Serialize, Debug)]
pub struct MatrixArgs {
    #[arg(long)]
    pub pi: Option<String>,
    /// Largest minor size in the unimodularity check.
    #[arg(long)]
    pub max_minor: Option<usize>,
}

#[derive(Serialize, Deserialize, Debug)]
pub struct MatrixParams {
    pub pi: String,
    pub max_minor: usize,
    pub seed: u64,
}

impl Default for MatrixParams {
    fn default() -> Self {
        Self { pi: EXAMPLE_PI.into(), max_minor: 4, seed: DEFAULT_SEED }
    }
}

pub fn matrix(p: &MatrixParams) -> CliResult<Output> {
    let pi = parse_pi(&p.pi)?;
    let m = build_matrix(&pi);
    let inv = build_matrix(&pi.inverse());
    let uni = check_unimodular(&m, p.max_minor, p.seed);
    let mut out = Output::new(json!({
        "pi": pi.as_slice(),
        "matrix": m.rows(),
        "inverse_matrix": inv.rows(),
        "inverse_of_pi_is_inverse_matrix": m.is_inverse_of(&inv),
        "towers": m.towers().iter().map(|t| json!({"column": t.column, "top": t.top, "bottom": t.bottom, "sign": t.sign})).collect::<Vec<_>>(),
        "unimodular": uni,
    }));
    out.tables.push(matrix_table("matrix", &m.rows()));
    out.tables.push(matrix_table("inverse_matrix", &inv.rows()));
    out.check(m.is_inverse_of(&inv), "M(pi^-1) is not the inverse of M(pi)");
    out.check(uni.unimodular, "a minor has determinant outside {-1, 0, 1}");
    Ok(out)
}

// ---------------------------------------------------------------- degrees

#[derive(Args, Serialize, Debug)]
pub struct DegreesArgs {
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Serialize, Deserialize, Debug)]
pub struct DegreesParams {
    pub n: usize,
}

impl Default for DegreesParams {
    fn default() -> Self {
        Self { n: 3 }
    }
}

pub fn degrees(p: &DegreesParams) -> CliResult<Output> {
    let h = enumerate_by_degree(p.n)?;
    let factorial: u64 = (1..=p.n as u64).product();
    let mut out = Output::new(json!({
        "n": h.n,
        "counts": h.counts,
        "total": h.total,
        "empirical_c": h.empirical_c,
    }));
    let mut t = Table::new("degrees", &["degree", "count"]);
    for (d, c) in &h.counts {
        t.push([s(d), s(c)]);
    }
    out.tables.push(t);
    out.check(h.total == factorial, "histogram mass differs from n!");
    out.check(!h.counts.contains_key(&1), "mass at degree one");
    out.check(h.counts.get(&0) == Some(&1), "degree zero attained other than by the identity");
    Ok(out)
}

// ---------------------------------------------------------------- val

#[derive(Args, Serialize, Debug)]
pub struct ValArgs {
    #[arg(long)]
    pub pi: Option<String>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Time; defaults to the kinetic scale 1 / lambda^2.
    #[arg(long)]
    pub t: Option<f64>,
    /// Regularization; defaults to lambda^2.
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub renormalized: Option<bool>,
    #[arg(long)]
    pub max_rel_error: Option<f64>,
}

#[derive(Serialize, Deserialize, Debug)]
pub struct ValParams {
    pub pi: String,
    pub lambda: f64,
    pub t: Option<f64>,
    pub eta: Option<f64>,
    pub dim: usize,
    pub renormalized: bool,
    pub importance: bool,
    pub samples: u64,
    pub shards: usize,
    pub max_rel_error: Option<f64>,
    pub seed: u64,
}

impl Default for ValParams {
    fn default() -> Self {
        Self {
            pi: "1 2".into(),
            lambda: 0.3,
            t: None,
            eta: None,
            dim: 3,
            renormalized: true,
            importance: true,
            samples: 200_000,
            shards: 16,
            max_rel_error: None,
            seed: DEFAULT_SEED,
        }
    }
}

pub fn val(p: &ValParams) -> CliResult<Output> {
    let pi = parse_pi(&p.pi)?;
    let mut cfg = ValConfig::kinetic(p.lambda, p.samples, p.seed);
    cfg.t = p.t.unwrap_or(cfg.t);
    cfg.eta = p.eta.unwrap_or(cfg.eta);
    cfg.dim = p.dim;
    cfg.renormalized = p.renormalized;
    cfg.importance = p.importance;
    cfg.shards = p.shards;
    cfg.max_rel_error = p.max_rel_error;
    let v = val_monte_carlo(&pi, &cfg)?;
    Ok(Output::new(json!({
        "pi": pi.as_slice(),
        "degree": classify(&pi).degree(),
        "config": cfg,
        "value": { "re": v.estimate.re, "im": v.estimate.im },
        "abs": v.estimate.norm(),
        "std_error": v.std_error,
        "rel_error": v.rel_error(),
        "samples": v.samples,
    })))
}

// ---------------------------------------------------------------- plan

#[derive(Args, Serialize, Debug)]
pub struct PlanArgs {
    #[arg(long)]
    pub pi: Option<String>,
}

pub fn plan(p: &PermParams) -> CliResult<Output> {
    let pi = parse_pi(&p.pi)?;
    let plan = integration_plan(&pi);
    let ok = plan.is_executable(&build_matrix(&pi));
    let mut t = Table::new("steps", &["step", "row", "column", "factors"]);
    for (k, st) in plan.steps.iter().enumerate() {
        t.push([s(k + 1), s(st.row), s(st.column), s(st.factors)]);
    }
    let mut out = Output::new(json!({ "pi": pi.as_slice(), "plan": plan, "executable": ok }));
    out.tables.push(t);
    out.check(ok, "plan integrates a variable against more than two factors");
    Ok(out)
}

// ---------------------------------------------------------------- power-count

#[derive(Args, Serialize, Debug)]
pub struct PowerCountArgs {
    #[arg(long)]
    pub vertices: Option<usize>,
    /// Oriented edges "tail-head", separated by spaces or commas.
    #[arg(long)]
    pub edges: Option<String>,
    /// Torus side of the propagator profile.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
}

#[derive(Serialize, Deserialize, Debug)]
pub struct PowerCountParams {
    pub vertices: usize,
    pub edges: String,
    pub m: usize,
    pub d: usize,
}

impl Default for PowerCountParams {
    fn default() -> Self {
        Self { vertices: 3, edges: "0-1 1-2 2-0 0-2".into(), m: 8, d: 2 }
    }
}

fn parse_edges(text: &str) -> CliResult<Vec<(usize, usize)>> {
    text.replace(',', " ")
        .split_whitespace()
        .map(|tok| {
            let (a, b) = tok.split_once('-').ok_or_else(|| CliError::Usage(format!("edge `{tok}` is not tail-head")))?;
            let parse = |x: &str| x.parse::<usize>().map_err(|e| CliError::Usage(format!("edge `{tok}`: {e}")));
            Ok((parse(a)?, parse(b)?))
        })
        .collect()
}

pub fn power_count_cmd(p: &PowerCountParams) -> CliResult<Output> {
    let g = GeneralGraph::new(p.vertices, parse_edges(&p.edges)?)?;
    let size = (p.m as u64).checked_pow(p.d as u32).unwrap_or(u64::MAX);
    if size.saturating_pow(p.vertices.saturating_sub(1) as u32) > 50_000_000 {
        return Err(CliError::Usage("exact summation too large: reduce m, d or the vertex count".into()));
    }
    let r = TorusProfile::lattice_lorentzian(p.m, p.d);
    let pc = power_count(&g, r.norm_1(), r.norm_inf())?;
    let omegas: Vec<f64> = (0..g.vertices).map(|w| brute_force_omega(&g, &r, w)).collect::<Result<_, _>>()?;
    let max = omegas.iter().copied().fold(f64::MIN, f64::max);
    let min = omegas.iter().copied().fold(f64::MAX, f64::min);
    let spread = (max - min) / max.abs().max(1e-300);
    let mut t = Table::new("omega", &["omitted_vertex", "omega", "bound"]);
    for (w, o) in omegas.iter().enumerate() {
        t.push([s(w), s(o), s(pc.bound)]);
    }
    let mut out = Output::new(json!({
        "graph": g,
        "profile": { "m": p.m, "d": p.d, "norm_1": r.norm_1(), "norm_inf": r.norm_inf() },
        "power_count": pc,
        "omega": omegas,
        "omega_spread": spread,
        "holds": max <= pc.bound,
    }));
    out.tables.push(t);
    out.check(spread < 1e-9, "Omega depends on the omitted vertex");
    out.check(max <= pc.bound * (1.0 + 1e-12), "exact sum exceeds the power-counting bound");
    Ok(out)
}

// ---------------------------------------------------------------- bounds

#[derive(Args, Serialize, Debug)]
pub struct BoundsArgs {
    /// fast or full.
    #[arg(long)]
    pub level: Option<String>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub etas: Option<Vec<f64>>,
    /// Coupling of the ladder integral report; negative skips it.
    #[arg(long)]
    pub exact1_lambda: Option<f64>,
}

#[derive(Serialize, Deserialize, Debug)]
pub struct BoundsParams {
    pub level: String,
    pub kappa: f64,
    pub etas: Vec<f64>,
    pub variance_cap: f64,
    pub exact1_lambda: f64,
    pub seed: u64,
}

impl Default for BoundsParams {
    fn default() -> Self {
        let c = BoundSuiteConfig::default();
        Self { level: "fast".into(), kappa: c.kappa, etas: c.etas, variance_cap: c.variance_cap, exact1_lambda: 0.2, seed: c.seed }
    }
}

pub fn bounds(p: &BoundsParams) -> CliResult<Output> {
    let level = match p.level.as_str() {
        "fast" => SuiteLevel::Fast,
        "full" => SuiteLevel::Full,
        other => return Err(CliError::Usage(format!("unknown level `{other}` (fast, full)"))),
    };
    if p.etas.is_empty() {
        return Err(CliError::Usage("need at least one eta".into()));
    }
    let cfg = BoundSuiteConfig { level, seed: p.seed, kappa: p.kappa, etas: p.etas.clone(), variance_cap: p.variance_cap };
    let suite = bound_suite(&cfg)?;
    let exact1 = if p.exact1_lambda > 0.0 { Some(exact1_report(p.exact1_lambda, p.kappa)?) } else { None };
    let mut t = Table::new("constants", &["inequality", "eta", "lhs", "constant"]);
    for r in &suite.reports {
        for k in 0..r.etas.len() {
            t.push([r.name.clone(), s(r.etas[k]), s(r.lhs[k]), s(r.constants[k])]);
        }
    }
    let mut out = Output::new(json!({ "all_pass": suite.all_pass(), "suite": suite, "exact1": exact1 }));
    out.tables.push(t);
    Ok(out)
}

// ---------------------------------------------------------------- self-energy

#[derive(Args, Serialize, Debug)]
pub struct SelfEnergyArgs {
    /// lattice, continuum-gaussian or continuum-unit.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub cutoff: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
    /// Coupling for the self-consistent refinement (lattice only).
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Serialize, Deserialize, Debug)]
pub struct SelfEnergyParams {
    pub model: String,
    pub dim: usize,
    pub cutoff: f64,
    pub eta: f64,
    pub lambda: f64,
    pub iterations: usize,
    pub points: usize,
    pub seed: u64,
}

impl Default for SelfEnergyParams {
    fn default() -> Self {
        Self { model: "lattice".into(), dim: 3, cutoff: 4.0, eta: 1e-3, lambda: 0.2, iterations: 0, points: 61, seed: DEFAULT_SEED }
    }
}

pub fn self_energy(p: &SelfEnergyParams) -> CliResult<Output> {
    let model = match p.model.as_str() {
        "lattice" => Model::Lattice { dim: p.dim },
        "continuum-gaussian" => Model::Continuum { form: FormFactor::Gaussian },
        "continuum-unit" => Model::Continuum { form: FormFactor::Unit { cutoff: p.cutoff } },
        other => {
            return Err(CliError::Usage(format!("unknown model `{other}` (lattice, continuum-gaussian, continuum-unit)")))
        }
    };
    if let Model::Lattice { dim } = model {
        if !(1..=3).contains(&dim) {
            return Err(CliError::Usage(format!("lattice dimension {dim} not in 1..=3")));
        }
    }
    if p.points < 2 {
        return Err(CliError::Usage("need at least two table points".into()));
    }
    let mut se = SelfEnergy::born(model, p.eta)?;
    if p.iterations > 0 {
        se = se.refine(p.lambda, p.iterations)?;
    }
    let mut t = Table::new("theta", &["energy", "re", "im", "level_set_measure"]);
    let mut min_im = f64::MAX;
    for k in 0..p.points {
        let a = se.a_max * k as f64 / (p.points - 1) as f64;
        let th = se.theta_at(a);
        min_im = min_im.min(th.im);
        t.push([s(a), s(th.re), s(th.im), s(model.level_set_measure(a))]);
    }
    let resummation = resummation_check(&se, p.lambda, p.eta, 20, 60, p.seed)?;
    let mut out = Output::new(json!({
        "model": model,
        "resummation": resummation,
        "eta": p.eta,
        "refinement": { "lambda": p.lambda, "iterations": p.iterations },
        "a_max": se.a_max,
        "max_im": se.max_im(),
        "min_im": min_im,
    }));
    out.tables.push(t);
    out.check(min_im >= -1e-9, "negative imaginary part of theta");
    out.check(resummation.max_rel_error <= 1e-6, "Born series misses the renormalized resolvent");
    Ok(out)
}

// ---------------------------------------------------------------- main-term

#[derive(Args, Serialize, Debug)]
pub struct MainTermArgs {
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub big_b: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
}

#[derive(Serialize, Deserialize, Debug)]
pub struct MainTermParams {
    pub a: f64,
    pub big_b: f64,
    pub t: f64,
    pub seed: u64,
}

impl Default for MainTermParams {
    fn default() -> Self {
        Self { a: 1.0, big_b: 0.1, t: 100.0, seed: DEFAULT_SEED }
    }
}

pub fn main_term(p: &MainTermParams) -> CliResult<Output> {
    let r = main_term_identities(p.a, p.big_b, p.t, p.seed)?;
    let d = delta_family_check();
    let mut t = Table::new("delta_family", &["t", "q_value", "q_rel_error", "r_re", "r_im", "r_rel_error", "r_odd_real"]);
    for row in &d.rows {
        t.push([
            s(row.t),
            s(row.q_value),
            s(row.q_rel_error),
            s(row.r_value.re),
            s(row.r_value.im),
            s(row.r_rel_error),
            s(row.r_odd_real),
        ]);
    }
    let mut out = Output::new(json!({ "identities": r, "delta_family": d }));
    out.tables.push(t);
    out.check(r.geometric_error <= 1e-8, "geometric partial sums miss the closed form");
    Ok(out)
}

// ---------------------------------------------------------------- clt

#[derive(Args, Serialize, Debug)]
pub struct CltArgs {
    #[arg(long = "T")]
    #[serde(rename = "t")]
    pub big_t: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub dim: Option<usize>,
    /// rademacher, uniform or gaussian.
    #[arg(long)]
    pub law: Option<String>,
    /// Half width (uniform) or standard deviation (gaussian).
    #[arg(long)]
    pub scale: Option<f64>,
    /// Extra times for the variance-versus-time fit.
    #[arg(long, value_delimiter = ',')]
    pub times: Option<Vec<f64>>,
}

#[derive(Serialize, Deserialize, Debug)]
pub struct CltParams {
    pub t: f64,
    pub eps: f64,
    pub dim: usize,
    pub law: String,
    pub scale: f64,
    pub trials: usize,
    pub times: Vec<f64>,
    pub seed: u64,
}

impl Default for CltParams {
    fn default() -> Self {
        Self { t: 1.0, eps: 1e-4, dim: 1, law: "rademacher".into(), scale: 1.0, trials: 10_000, times: vec![], seed: DEFAULT_SEED }
    }
}

pub fn clt(p: &CltParams) -> CliResult<Output> {
    let law = match p.law.as_str() {
        "rademacher" => StepLaw::Rademacher,
        "uniform" => StepLaw::Uniform { half_width: p.scale },
        "gaussian" => StepLaw::Gaussian { sigma: p.scale },
        other => return Err(CliError::Usage(format!("unknown step law `{other}` (rademacher, uniform, gaussian)"))),
    };
    let dist = StepDistribution::new(p.dim, law);
    let st = clt_statistics(&dist, p.t, p.eps, p.trials, p.seed)?;
    let mut result = json!({
        "law": law,
        "variance": st.covariance[0][0],
        "target_variance": st.target_variance,
        "variance_rel_error": st.variance_rel_error(),
        "ks_distance": st.ks_distance,
        "statistics": st,
    });
    let mut tables = vec![];
    if !p.times.is_empty() {
        let lin = clt_variance_vs_time(&dist, &p.times, p.eps, p.trials, p.seed)?;
        let mut t = Table::new("variance_vs_time", &["t", "variance", "target"]);
        for (tt, v) in lin.times.iter().zip(&lin.variances) {
            t.push([s(tt), s(v), s(tt * lin.sigma2)]);
        }
        tables.push(t);
        result["linearity"] = serde_json::to_value(&lin)?;
    }
    let mut out = Output::new(result);
    out.tables = tables;
    Ok(out)
}

// ---------------------------------------------------------------- green-kubo

#[derive(Args, Serialize, Debug)]
pub struct GreenKuboArgs {
    /// Switching probability of the two-state chain on {-1, +1}.
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub batch_len: Option<usize>,
    #[arg(long)]
    pub path_len: Option<usize>,
    #[arg(long)]
    pub max_lag: Option<usize>,
}

#[derive(Serialize, Deserialize, Debug)]
pub struct GreenKuboParams {
    pub q: f64,
    /// General chain; overrides `q` when both are given (config file only).
    pub values: Option<Vec<f64>>,
    pub transition: Option<Vec<Vec<f64>>>,
    pub batch_len: usize,
    pub batches: usize,
    pub path_len: usize,
    pub max_lag: usize,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for GreenKuboParams {
    fn default() -> Self {
        let c = GreenKuboConfig::default();
        Self {
            q: 0.3,
            values: None,
            transition: None,
            batch_len: c.batch_len,
            batches: c.batches,
            path_len: c.path_len,
            max_lag: c.max_lag,
            tolerance: c.tolerance,
            seed: c.seed,
        }
    }
}

pub fn green_kubo(p: &GreenKuboParams) -> CliResult<Output> {
    let chain = match (&p.values, &p.transition) {
        (Some(v), Some(t)) => MarkovVelocities::new(v.clone(), t.clone())?,
        (None, None) => MarkovVelocities::two_state(p.q)?,
        _ => return Err(CliError::Usage("`values` and `transition` must be given together".into())),
    };
    let cfg = GreenKuboConfig {
        batch_len: p.batch_len,
        batches: p.batches,
        path_len: p.path_len,
        max_lag: p.max_lag,
        tolerance: p.tolerance,
        seed: p.seed,
    };
    let r = green_kubo_correlated(&chain, &cfg)?;
    let exact = chain.exact_autocorrelation(p.max_lag);
    let mut t = Table::new("autocorrelation", &["lag", "empirical", "exact"]);
    for (k, (e, x)) in r.empirical_r.iter().zip(&exact).enumerate() {
        t.push([s(k), s(e), s(x)]);
    }
    let mut out = Output::new(json!({ "chain": { "values": chain.values, "transition": chain.transition }, "report": r }));
    out.tables.push(t);
    Ok(out)
}

// ---------------------------------------------------------------- jump / boltzmann

#[derive(Serialize, Deserialize, Debug, Clone, Copy)]
struct KernelSpec {
    kind: KernelKind,
    a: f64,
    rate: f64,
}

#[derive(Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Lattice,
    Sphere,
}

fn kernel(kind: KernelKind, a: f64, rate: f64) -> CliResult<(JumpKernel, Dispersion, f64)> {
    Ok(match kind {
        KernelKind::Lattice => {
            let disp = Dispersion::discrete(3);
            (JumpKernel::uniform_shell(disp, a, rate)?, disp, a)
        }
        KernelKind::Sphere => (JumpKernel::uniform_sphere(rate)?, Dispersion::continuum(3), 0.5),
    })
}

#[derive(Args, Serialize, Debug)]
pub struct JumpArgs {
    #[arg(long, value_enum)]
    pub kind: Option<KernelKind>,
    /// Shell energy (lattice; the sphere uses 1/2).
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub rate: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub surface_samples: Option<u64>,
    /// Length of the sample trajectory written to trajectory.csv.
    #[arg(long)]
    pub trajectory_t: Option<f64>,
}

#[derive(Serialize, Deserialize, Debug)]
pub struct JumpParams {
    pub kind: KernelKind,
    pub a: f64,
    pub rate: f64,
    pub t_max: f64,
    pub trials: usize,
    pub surface_samples: u64,
    pub trajectory_t: f64,
    pub seed: u64,
}

impl Default for JumpParams {
    fn default() -> Self {
        Self {
            kind: KernelKind::Lattice,
            a: 2.5,
            rate: 1.0,
            t_max: 8.0,
            trials: 400_000,
            surface_samples: 1_000_000,
            trajectory_t: 20.0,
            seed: DEFAULT_SEED,
        }
    }
}

pub fn jump(p: &JumpParams) -> CliResult<Output> {
    let (k, disp, a) = kernel(p.kind, p.a, p.rate)?;
    if !(p.rate > 0.0) {
        return Err(CliError::Usage("the Green-Kubo integral needs a positive collision rate".into()));
    }
    let gk = green_kubo_jump(&k, p.t_max, p.trials, p.seed)?;
    let surface = diffusion_matrix_surface(&disp, a, p.surface_samples, p.seed.wrapping_add(1))?;
    // uniform kernel: D = <grad e (x) grad e>_shell / rate
    let surface_d = surface.trace_over_d / p.rate;
    let rel_diff = (gk.trace_over_d - surface_d).abs() / surface_d;
    let traj = jump_process(&k, p.trajectory_t, p.seed.wrapping_add(2))?;
    let mut ti = Table::new("integrand", &["t", "trace"]);
    for (t, v) in gk.times.iter().zip(&gk.integrand_trace) {
        ti.push([s(t), s(v)]);
    }
    let mut tt = Table::new("trajectory", &["t", "x", "y", "z", "p1", "p2", "p3"]);
    let mut times = vec![0.0];
    times.extend(traj.jump_times.iter().copied());
    times.push(traj.t_end);
    for t in times {
        let x = traj.position_at(t);
        let v = traj.state_at(t);
        tt.push([s(t), s(x[0]), s(x[1]), s(x[2]), s(v[0]), s(v[1]), s(v[2])]);
    }
    let mut out = Output::new(json!({
        "kernel": KernelSpec { kind: p.kind, a, rate: p.rate },
        "green_kubo": gk,
        "surface": surface,
        "surface_d": surface_d,
        "relative_difference": rel_diff,
        "jumps_in_trajectory": traj.jump_times.len(),
    }));
    out.tables.push(ti);
    out.tables.push(tt);
    Ok(out)
}

#[derive(Args, Serialize, Debug)]
pub struct BoltzmannArgs {
    #[arg(long, value_enum)]
    pub kind: Option<KernelKind>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub rate: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
    /// equilibrium, fixed or gaussian.
    #[arg(long)]
    pub init: Option<String>,
    /// Width of the Gaussian initial positions.
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub bins: Option<usize>,
}

#[derive(Serialize, Deserialize, Debug)]
pub struct BoltzmannParams {
    pub kind: KernelKind,
    pub a: f64,
    pub rate: f64,
    pub t: f64,
    pub particles: usize,
    pub init: String,
    pub sigma: f64,
    pub bins: usize,
    pub seed: u64,
}

impl Default for BoltzmannParams {
    fn default() -> Self {
        Self {
            kind: KernelKind::Lattice,
            a: 2.5,
            rate: 1.0,
            t: 20.0,
            particles: 100_000,
            init: "equilibrium".into(),
            sigma: 1.0,
            bins: 40,
            seed: DEFAULT_SEED,
        }
    }
}

pub fn boltzmann(p: &BoltzmannParams) -> CliResult<Output> {
    let (k, _, a) = kernel(p.kind, p.a, p.rate)?;
    let init = match p.init.as_str() {
        "equilibrium" => InitialLaw::Equilibrium,
        "fixed" => InitialLaw::FixedMomentum { momentum: k.shell.sample(&mut seeded_rng(p.seed.wrapping_add(1))) },
        "gaussian" => InitialLaw::GaussianPosition { sigma: p.sigma },
        other => return Err(CliError::Usage(format!("unknown initial law `{other}` (equilibrium, fixed, gaussian)"))),
    };
    let ens = boltzmann_particle_sim(&k, &init, p.t, p.particles, p.seed)?;
    let cov = ens.position_covariance();
    let half_width = 4.0 * cov.iter().enumerate().map(|(i, r)| r[i]).fold(0.0, f64::max).sqrt().max(1e-6);
    let mut th = Table::new("histogram", &["axis", "left", "right", "count", "density"]);
    let mut resolved = true;
    for axis in 0..3 {
        let h = ens.position_histogram(axis, p.bins, half_width);
        resolved &= h.resolved;
        for b in 0..h.counts.len() {
            th.push([s(axis), s(h.edges[b]), s(h.edges[b + 1]), s(h.counts[b]), s(h.density[b])]);
        }
    }
    let cells = ens.velocity_cells();
    let mut tc = Table::new("velocity_cells", &["cell", "fraction"]);
    for (i, c) in cells.iter().enumerate() {
        tc.push([s(i), s(c)]);
    }
    let mut out = Output::new(json!({
        "kernel": KernelSpec { kind: p.kind, a, rate: p.rate },
        "init": init,
        "t": p.t,
        "particles": ens.len(),
        "position_covariance": cov,
        "tv_to_equilibrium": ens.tv_to_equilibrium(),
        "histograms_resolved": resolved,
    }));
    out.tables.push(th);
    out.tables.push(tc);
    Ok(out)
}

// ---------------------------------------------------------------- anderson

#[derive(Args, Serialize, Debug)]
pub struct AndersonArgs {
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub side: Option<usize>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// bernoulli, uniform or gaussian.
    #[arg(long)]
    pub law: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub times: Option<Vec<f64>>,
}

#[derive(Serialize, Deserialize, Debug)]
pub struct AndersonParams {
    pub dim: usize,
    pub side: usize,
    pub lambda: f64,
    pub law: String,
    pub realizations: usize,
    pub times: Vec<f64>,
    pub seed: u64,
}

impl Default for AndersonParams {
    fn default() -> Self {
        Self {
            dim: 1,
            side: 128,
            lambda: 0.4,
            law: "bernoulli".into(),
            realizations: 50,
            times: (1..=8).map(|k| 2.5 * k as f64).collect(),
            seed: DEFAULT_SEED,
        }
    }
}

pub fn anderson(p: &AndersonParams) -> CliResult<Output> {
    let lat = LatticeBox::new(p.dim, p.side)?;
    if p.times.len() < 2 || p.times.iter().any(|t| !(*t > 0.0)) {
        return Err(CliError::Usage("need at least two positive times".into()));
    }
    if p.realizations == 0 {
        return Err(CliError::Usage("need at least one realization".into()));
    }
    let g = msd_growth(lat, p.lambda, parse_law(&p.law)?, p.realizations, &p.times, p.seed)?;
    let free = free_ballistic_fit(lat, &p.times)?;
    let mut t = Table::new("msd", &["t", "mean_msd", "free_msd"]);
    for k in 0..g.times.len() {
        t.push([s(g.times[k]), s(g.mean_msd[k]), s(g.free_msd[k])]);
    }
    let mut out = Output::new(json!({ "growth": g, "free_fit": free }));
    out.tables.push(t);
    Ok(out)
}

// ---------------------------------------------------------------- wigner

#[derive(Args, Serialize, Debug)]
pub struct WignerArgs {
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub side: Option<usize>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub law: Option<String>,
    /// delta or gaussian.
    #[arg(long)]
    pub init: Option<String>,
    #[arg(long)]
    pub width: Option<f64>,
    /// Momentum of the Gaussian packet along every axis.
    #[arg(long)]
    pub momentum: Option<f64>,
    /// Spatial rescaling of the field.
    #[arg(long)]
    pub eps: Option<f64>,
}

#[derive(Serialize, Deserialize, Debug)]
pub struct WignerParams {
    pub dim: usize,
    pub side: usize,
    pub lambda: f64,
    pub t: f64,
    pub law: String,
    pub init: String,
    pub width: f64,
    pub momentum: f64,
    pub eps: Option<f64>,
    pub seed: u64,
}

impl Default for WignerParams {
    fn default() -> Self {
        Self {
            dim: 1,
            side: 32,
            lambda: 0.3,
            t: 2.0,
            law: "bernoulli".into(),
            init: "gaussian".into(),
            width: 2.0,
            momentum: 1.0,
            eps: None,
            seed: DEFAULT_SEED,
        }
    }
}

fn initial_state(lat: LatticeBox, init: &str, width: f64, momentum: f64) -> CliResult<WaveFunction> {
    match init {
        "delta" => Ok(WaveFunction::delta(lat, 0)),
        "gaussian" => Ok(WaveFunction::gaussian(lat, width, &vec![momentum; lat.dim])),
        other => Err(CliError::Usage(format!("unknown initial state `{other}` (delta, gaussian)"))),
    }
}

pub fn wigner_cmd(p: &WignerParams) -> CliResult<Output> {
    let lat = LatticeBox::new(p.dim, p.side)?;
    if lat.sites() > 4096 {
        return Err(CliError::Usage("Wigner transform limited to 4096 sites".into()));
    }
    let h = build_hamiltonian(lat, p.lambda, parse_law(&p.law)?, p.seed)?;
    let psi0 = initial_state(lat, &p.init, p.width, p.momentum)?;
    let psi = evolve(&h, &psi0, p.t)?;
    let w = wigner(&psi, p.eps);
    let pos = w.position_marginal();
    let mom = w.momentum_marginal();
    let mut pos_err: f64 = 0.0;
    for (i, z) in psi.amp.iter().enumerate() {
        let ix: usize = lat
            .centered(i)
            .iter()
            .rev()
            .fold(0, |acc, &c| acc * w.m + (2 * c + lat.side as i64) as usize);
        pos_err = pos_err.max((pos[ix] - z.norm_sqr()).abs());
    }
    let mass_err = (w.total() - 1.0).abs();
    let unitarity = (psi.norm() - 1.0).abs();
    let mut tm = Table::new("momentum_marginal", &["index", "density"]);
    for (i, v) in mom.iter().enumerate() {
        tm.push([s(i), s(v)]);
    }
    let mut tp = Table::new("position_marginal", &["index", "density"]);
    for (i, v) in pos.iter().enumerate() {
        tp.push([s(i), s(v)]);
    }
    let psi_flat: Vec<f64> = psi.amp.iter().flat_map(|z| [z.re, z.im]).collect();
    let meta = json!({ "dim": p.dim, "side": p.side, "seed": p.seed, "lambda": p.lambda, "t": p.t });
    let mut out = Output::new(json!({
        "m": w.m,
        "eps": w.eps,
        "total": w.total(),
        "max_imag": w.max_imag,
        "position_marginal_error": pos_err,
        "mass_error": mass_err,
        "norm_error": unitarity,
    }));
    out.tables.push(tp);
    out.tables.push(tm);
    let mut wmeta = meta.clone();
    wmeta["layout"] = json!("values[ix * m^d + iv], 2x_j = ix_j - side, v_j = -pi + 2 pi iv_j / m");
    wmeta["m"] = json!(w.m);
    wmeta["eps"] = json!(w.eps);
    out.arrays.push(("wigner.bin".into(), w.values.clone(), wmeta));
    let mut pmeta = meta;
    pmeta["layout"] = json!("interleaved (re, im) per site, first coordinate fastest");
    out.arrays.push(("psi.bin".into(), psi_flat, pmeta));
    out.check(unitarity < 1e-10, "evolution is not unitary");
    out.check(pos_err < 1e-10, "position marginal differs from |psi|^2");
    out.check(mass_err < 1e-10, "Wigner mass differs from the norm");
    Ok(out)
}

// ---------------------------------------------------------------- duhamel

#[derive(Args, Serialize, Debug)]
pub struct DuhamelArgs {
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub side: Option<usize>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
    /// Number of expansion terms N.
    #[arg(long)]
    pub terms: Option<usize>,
    #[arg(long)]
    pub law: Option<String>,
}

#[derive(Serialize, Deserialize, Debug)]
pub struct DuhamelParams {
    pub dim: usize,
    pub side: usize,
    pub lambda: f64,
    pub t: f64,
    pub terms: usize,
    pub law: String,
    pub seed: u64,
}

impl Default for DuhamelParams {
    fn default() -> Self {
        Self { dim: 1, side: 8, lambda: 0.2, t: 2.0, terms: 3, law: "bernoulli".into(), seed: DEFAULT_SEED }
    }
}

pub fn duhamel(p: &DuhamelParams) -> CliResult<Output> {
    let lat = LatticeBox::new(p.dim, p.side)?;
    let h = build_hamiltonian(lat, p.lambda, parse_law(&p.law)?, p.seed)?;
    let psi0 = WaveFunction::delta(lat, 0);
    let d = duhamel_terms(&h, &psi0, p.t, p.terms)?;
    // smooth observable J^(xi, v) = exp(-|xi|^2) (1 + cos v_1 / 2)
    let jhat = |xi: &[f64], v: &[f64]| {
        Complex64::new((-xi.iter().map(|x| x * x).sum::<f64>()).exp() * (1.0 + 0.5 * v[0].cos()), 0.0)
    };
    let bound = unitarity_bound_check(&h, &psi0, p.t, p.terms, jhat)?;
    let mut t = Table::new("terms", &["n", "norm"]);
    for (k, term) in d.terms.iter().enumerate() {
        t.push([s(k), s(term.norm())]);
    }
    t.push([s("remainder"), s(d.remainder.norm())]);
    let unitarity = (d.exact.norm() - 1.0).abs();
    let mut out = Output::new(json!({
        "t": d.t,
        "lambda": d.lambda,
        "terms": p.terms,
        "residual": d.residual,
        "quadrature_estimate": d.quadrature_estimate,
        "norm_error": unitarity,
        "unitarity_bound": bound,
    }));
    out.tables.push(t);
    out.check(unitarity < 1e-10, "evolution is not unitary");
    out.check(d.residual < 1e-8, "Duhamel identity residual above 1e-8");
    out.check(bound.holds, "unitarity bound violated");
    Ok(out)
}

// ---------------------------------------------------------------- low-order

#[derive(Args, Serialize, Debug)]
pub struct LowOrderArgs {
    #[arg(long)]
    pub side: Option<usize>,
    /// Kinetic time lambda^2 t.
    #[arg(long = "T")]
    #[serde(rename = "big_t")]
    pub big_t: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub lambdas: Option<Vec<f64>>,
    #[arg(long)]
    pub law: Option<String>,
    #[arg(long)]
    pub variance_cap: Option<f64>,
}

#[derive(Serialize, Deserialize, Debug)]
pub struct LowOrderParams {
    pub side: usize,
    pub big_t: f64,
    pub lambdas: Vec<f64>,
    pub realizations: usize,
    pub law: String,
    pub variance_cap: f64,
    pub seed: u64,
}

impl Default for LowOrderParams {
    fn default() -> Self {
        let c = LowOrderConfig::default();
        Self {
            side: c.side,
            big_t: c.big_t,
            lambdas: c.lambdas,
            realizations: c.realizations,
            law: "bernoulli".into(),
            variance_cap: c.variance_cap,
            seed: c.seed,
        }
    }
}

pub fn low_order(p: &LowOrderParams) -> CliResult<Output> {
    let cfg = LowOrderConfig {
        side: p.side,
        big_t: p.big_t,
        lambdas: p.lambdas.clone(),
        realizations: p.realizations,
        law: parse_law(&p.law)?,
        seed: p.seed,
        variance_cap: p.variance_cap,
    };
    let r = low_order_wigner(&cfg)?;
    let mut t = Table::new(
        "low_order",
        &["lambda", "t", "gain", "gain_std_error", "gain_box", "gain_limit", "gain_gap", "loss", "loss_std_error", "norm_sum"],
    );
    for row in &r.rows {
        t.push([
            s(row.lambda),
            s(row.t),
            s(row.gain),
            s(row.gain_std_error),
            s(row.gain_box),
            s(row.gain_limit),
            s(row.gain_gap),
            s(row.loss),
            s(row.loss_std_error),
            s(row.norm_sum),
        ]);
    }
    let mut out = Output::new(serde_json::to_value(&r)?);
    out.tables.push(t);
    out.check(r.norm_conserved, "second-order norm sum above tolerance");
    Ok(out)
}
