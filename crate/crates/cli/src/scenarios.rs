//! One function per scenario. Each reads its `[params]` table, calls the
//! library and returns checks, results and CSV tables.

use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::json;

use ssmp_core::conditioning::{
    condition_auto, tau0_tail_check, verify_absorb_limit, verify_avoid_limit, verify_time_limit, ConditionedModel,
    Mode, PathEvent, ResidualPool, TailOptions,
};
use ssmp_core::map::{esscher_spec, leading_eigen, spectral_data_auto, stationary, MapSpec, SpectralData, TiltData};
use ssmp_core::renewal::{
    creep_overshoot, poissonize, renewal_limit_check, renewal_measure, MarwSampler, RenewalRun, TestFn, WalkLength,
};
use ssmp_core::simulate::{simulate_map, MapSimulator, StopRule};
use ssmp_core::stable::{
    exit_direction, hit_interval_value, hit_probability_mc, rbz_f, simulate_stable_path, spectral_residuals, stable_f,
    stable_spectral, CmsSource, Direction, StableParams,
};
use ssmp_core::stats::{derive_seed, replica_rng, run_replicas, EstimateReport, Summary};

use crate::config::{ConfigSource, Model};
use crate::error::CliError;
use crate::report::{Outcome, Table};

pub const SCENARIOS: [&str; 10] = [
    "spectrum",
    "tilt",
    "simulate",
    "passage",
    "stable-prob",
    "rbz-check",
    "renewal-check",
    "conditioned",
    "tails",
    "time-limit",
];

/// Parsed model, optional config name and the scenario outcome.
pub struct Run {
    pub name: Option<String>,
    pub model: Model,
    pub outcome: Outcome,
}

pub fn run(scenario: &str, src: &ConfigSource, seed: u64) -> Result<Run, CliError> {
    match scenario {
        "spectrum" => go(src, seed, spectrum),
        "tilt" => go(src, seed, tilt),
        "simulate" => go(src, seed, simulate),
        "passage" => go(src, seed, passage),
        "stable-prob" => go(src, seed, stable_prob),
        "rbz-check" => go(src, seed, rbz_check),
        "renewal-check" => go(src, seed, renewal_check),
        "conditioned" => go(src, seed, conditioned),
        "tails" => go(src, seed, tails),
        "time-limit" => go(src, seed, time_limit),
        other => Err(CliError::Config(format!("unknown scenario '{other}'; expected one of {}", SCENARIOS.join(", ")))),
    }
}

fn go<P: DeserializeOwned>(
    src: &ConfigSource,
    seed: u64,
    f: fn(&Model, &P, u64) -> Result<Outcome, CliError>,
) -> Result<Run, CliError> {
    let cfg = src.parse::<P>()?;
    let model = src.model(&cfg.model)?;
    let outcome = f(&model, &cfg.params, seed)?;
    Ok(Run { name: cfg.name, model, outcome })
}

trait Context<T> {
    fn ctx(self, scenario: &'static str) -> Result<T, CliError>;
}

impl<T> Context<T> for ssmp_core::Result<T> {
    fn ctx(self, scenario: &'static str) -> Result<T, CliError> {
        self.map_err(|source| CliError::Library { scenario, source })
    }
}

fn need_map<'a>(model: &'a Model, scenario: &str) -> Result<&'a MapSpec, CliError> {
    match model {
        Model::Map(s) => Ok(s),
        other => Err(CliError::Config(format!("scenario {scenario} needs a map model, got {}", other.kind()))),
    }
}

fn need_stable(model: &Model, scenario: &str) -> Result<StableParams, CliError> {
    match model {
        Model::Stable(p) => Ok(*p),
        other => Err(CliError::Config(format!("scenario {scenario} needs a stable model, got {}", other.kind()))),
    }
}

fn f(x: f64) -> String {
    x.to_string()
}

fn to_json<T: serde::Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("report types serialize")
}

// ------------------------------------------------------------ spectrum

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumParams {
    pub z_grid: Vec<f64>,
    pub chi_tol: f64,
}

fn spectral_of(model: &Model, scenario: &'static str) -> Result<SpectralData, CliError> {
    match model {
        Model::Stable(p) => stable_spectral(p).ctx(scenario),
        Model::Map(s) => spectral_data_auto(Arc::new(s.clone())).ctx(scenario),
        Model::Marw(_) => Err(CliError::Config(format!("scenario {scenario} needs a map or stable model"))),
    }
}

fn spectrum(model: &Model, p: &SpectrumParams, _seed: u64) -> Result<Outcome, CliError> {
    const S: &str = "spectrum";
    let sd = spectral_of(model, S)?;
    let chi_at_theta = sd.chi(sd.theta).ctx(S)?;
    let mut checks = vec![EstimateReport::exact("chi_at_theta", chi_at_theta.abs()).judge(0.0, 0.0, p.chi_tol)];
    if let Model::Stable(params) = model {
        let (chi, angle) = spectral_residuals(params).ctx(S)?;
        checks.push(EstimateReport::exact("chi_at_theta_eigen_solve", chi).judge(0.0, 0.0, p.chi_tol));
        checks.push(EstimateReport::exact("eigenvector_angle_to_closed_form", angle).judge(0.0, 0.0, p.chi_tol));
    }
    let n = sd.n_states();
    let mut header = vec!["z".to_string(), "chi".to_string()];
    header.extend((0..n).map(|i| format!("v_{i}")));
    let mut table = Table { file: "spectrum.csv", header, rows: vec![] };
    for &z in &p.z_grid {
        let (chi, v) = sd.eigen(z).ctx(S)?;
        let mut row = vec![f(z), f(chi)];
        row.extend(v.iter().map(|x| f(*x)));
        table.push(row);
    }
    let mean_drift = match model {
        Model::Map(s) => Some(s.mean_drift().ctx(S)?),
        _ => None,
    };
    let results = json!({
        "theta": sd.theta,
        "chi_at_theta": chi_at_theta,
        "pi": sd.pi.as_slice(),
        "v_theta": sd.v_theta.as_slice(),
        "pi_theta": sd.pi_theta.as_slice(),
        "chi_prime_0": sd.chi_prime_0,
        "chi_prime_theta": sd.chi_prime_theta,
        "mu_theta_full": sd.mu_theta_full().ok(),
        "mean_drift": mean_drift,
    });
    Ok(Outcome { theorem: "cramer_root".into(), grid: p.z_grid.clone(), checks, results, tables: vec![table] })
}

// ------------------------------------------------------------ tilt

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TiltParams {
    pub gammas: Vec<f64>,
    pub z_grid: Vec<f64>,
    pub tol: f64,
}

fn tilt(model: &Model, p: &TiltParams, _seed: u64) -> Result<Outcome, CliError> {
    const S: &str = "tilt";
    let spec = need_map(model, S)?;
    let pi = stationary(spec.q()).ctx(S)?;
    let chi = |z: f64| leading_eigen(&spec.matrix_exponent(z)?, &pi).map(|e| e.0);
    let mut checks = vec![];
    let mut table = Table::new("tilt.csv", &["gamma", "z", "chi_tilted", "chi_shifted"]);
    let mut per_gamma = vec![];
    for &g in &p.gammas {
        let (tilted, conj) = esscher_spec(spec, g).ctx(S)?;
        let pi_t = stationary(tilted.q()).ctx(S)?;
        let chi_g = chi(g).ctx(S)?;
        let mut worst: f64 = 0.0;
        for &z in &p.z_grid {
            let ct = leading_eigen(&tilted.matrix_exponent(z).ctx(S)?, &pi_t).ctx(S)?.0;
            let shifted = chi(z + g).ctx(S)? - chi_g;
            worst = worst.max((ct - shifted).abs());
            table.push(vec![f(g), f(z), f(ct), f(shifted)]);
        }
        checks.push(EstimateReport::exact(format!("conjugation gamma={g}"), conj).judge(0.0, 0.0, p.tol));
        checks.push(EstimateReport::exact(format!("eigenvalue_shift gamma={g}"), worst).judge(0.0, 0.0, p.tol));
        per_gamma.push(json!({
            "gamma": g,
            "chi_gamma": chi_g,
            "tilted_mean_drift": tilted.mean_drift().ctx(S)?,
            "tilted_spec": tilted.to_toml(),
        }));
    }
    Ok(Outcome {
        theorem: "esscher_conjugation".into(),
        grid: p.gammas.clone(),
        checks,
        results: json!({ "base_mean_drift": spec.mean_drift().ctx(S)?, "tilts": per_gamma }),
        tables: vec![table],
    })
}

// ------------------------------------------------------------ simulate

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateParams {
    pub start_state: usize,
    pub x0: f64,
    pub horizon: f64,
    pub n: usize,
    /// tilts at which the Wald martingale mean is checked
    pub gammas: Vec<f64>,
    /// tolerance in standard errors
    pub k_se: f64,
    /// number of sample paths written to `paths.csv`
    pub paths: usize,
}

fn simulate(model: &Model, p: &SimulateParams, seed: u64) -> Result<Outcome, CliError> {
    const S: &str = "simulate";
    let spec = need_map(model, S)?;
    if p.start_state >= spec.n_states() {
        return Err(CliError::Config(format!("start_state {} out of range", p.start_state)));
    }
    let sim = MapSimulator::new(spec).ctx(S)?;
    let run_seed = derive_seed(seed, 1);
    let terms = run_replicas(run_seed, p.n, |rng, _| {
        sim.run(p.x0, p.start_state, StopRule::FixedHorizon(p.horizon), rng, &mut ())
    })
    .into_iter()
    .collect::<ssmp_core::Result<Vec<_>>>()
    .ctx(S)?;
    let pi = stationary(spec.q()).ctx(S)?;
    let mut checks = vec![];
    for &g in &p.gammas {
        let (chi, v) = leading_eigen(&spec.matrix_exponent(g).ctx(S)?, &pi).ctx(S)?;
        let td = TiltData { gamma: g, chi, v };
        let w: Vec<f64> = terms.iter().map(|t| td.weight(p.x0, p.start_state, t.xi, t.state, p.horizon)).collect();
        checks.push(
            EstimateReport::new(format!("wald_mean gamma={g} t={}", p.horizon), Summary::of(&w), run_seed)
                .judge(1.0, p.k_se, 0.0),
        );
    }
    let slopes: Vec<f64> = terms.iter().map(|t| (t.xi - p.x0) / p.horizon).collect();
    checks.push(EstimateReport::new("mean_slope", Summary::of(&slopes), run_seed));
    let events: Vec<f64> = terms.iter().map(|t| t.events as f64).collect();
    checks.push(EstimateReport::new("events_per_path", Summary::of(&events), run_seed));

    let mut table = Table::new("paths.csv", &["replica", "event_index", "t", "xi", "state", "event_type"]);
    let path_seed = derive_seed(seed, 2);
    for r in 0..p.paths {
        let path =
            simulate_map(spec, p.x0, p.start_state, StopRule::FixedHorizon(p.horizon), &mut replica_rng(path_seed, r as u64))
                .ctx(S)?;
        for (k, t, xi, st, kind) in path.csv_rows() {
            table.push(vec![r.to_string(), k.to_string(), f(t), f(xi), st.to_string(), kind.to_string()]);
        }
    }
    Ok(Outcome {
        theorem: "wald_martingale".into(),
        grid: p.gammas.clone(),
        checks,
        results: json!({ "mean_drift": spec.mean_drift().ctx(S)? }),
        tables: vec![table],
    })
}

// ------------------------------------------------------------ passage

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PassageParams {
    /// increasing levels `y`
    pub levels: Vec<f64>,
    pub start_state: usize,
    pub n: usize,
    pub k_se: f64,
    /// also estimate from every other state at the last level and compare
    /// ratios with `v_i(θ)/v_j(θ)`
    pub state_ratio: bool,
}

fn passage(model: &Model, p: &PassageParams, seed: u64) -> Result<Outcome, CliError> {
    const S: &str = "passage";
    let spec = need_map(model, S)?;
    let sd = spectral_data_auto(Arc::new(spec.clone())).ctx(S)?;
    let ests = creep_overshoot(spec, Some(&sd), &p.levels, p.start_state, p.n, derive_seed(seed, 1)).ctx(S)?;
    let mut checks = vec![];
    let mut table = Table::new(
        "passage.csv",
        &["y", "passage", "passage_se", "scaled", "scaled_se", "creep_share", "creep_share_se", "overshoot_mean", "overshoot_mean_se"],
    );
    let mut scaled = vec![];
    for e in &ests {
        let s = e.passage.scaled((sd.theta * e.y).exp());
        checks.push(EstimateReport::new(format!("passage y={}", e.y), e.passage, e.seed));
        table.push(vec![
            f(e.y),
            f(e.passage.mean),
            f(e.passage.stderr),
            f(s.mean),
            f(s.stderr),
            f(e.creep_share.mean),
            f(e.creep_share.stderr),
            f(e.overshoot_mean.mean),
            f(e.overshoot_mean.stderr),
        ]);
        scaled.push((e.y, s, e.seed));
    }
    for w in scaled.windows(2) {
        let ((y0, a, _), (y1, b, s1)) = (w[0], w[1]);
        checks.push(
            EstimateReport::new(format!("scaled_passage y={y1} vs y={y0}"), b, s1).judge_against(&a, p.k_se),
        );
    }
    if p.state_ratio {
        if let Some(e) = ests.last() {
            for j in (0..spec.n_states()).filter(|j| *j != p.start_state) {
                let other = creep_overshoot(spec, Some(&sd), &[e.y], j, p.n, derive_seed(seed, 10 + j as u64)).ctx(S)?;
                let r = ssmp_core::conditioning::ratio_of(&e.passage, &other[0].passage);
                let target = sd.v_theta[p.start_state] / sd.v_theta[j];
                checks.push(
                    EstimateReport::new(format!("state_ratio {}/{j} y={}", p.start_state, e.y), r, other[0].seed)
                        .judge(target, p.k_se, 0.0),
                );
            }
        }
    }
    Ok(Outcome {
        theorem: "cramer_asymptotics".into(),
        grid: p.levels.clone(),
        checks,
        results: json!({ "theta": sd.theta, "v_theta": sd.v_theta.as_slice(), "levels": to_json(&ests) }),
        tables: vec![table],
    })
}

// ------------------------------------------------------------ stable-prob

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplePaths {
    pub count: usize,
    pub x0: f64,
    pub step: f64,
    pub horizon: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StableProbParams {
    /// `x > 1` for α < 1 (hitting `(−1,1)`), `x ∈ (0,1)` for α > 1 (exit
    /// before hitting 0)
    pub starts: Vec<f64>,
    pub n: usize,
    /// step-size control of the interval race
    pub accuracy: f64,
    pub k_se: f64,
    pub sample_paths: Option<SamplePaths>,
}

fn stable_prob(model: &Model, p: &StableProbParams, seed: u64) -> Result<Outcome, CliError> {
    const S: &str = "stable-prob";
    let params = need_stable(model, S)?;
    let mut checks = vec![];
    let mut rows = vec![];
    let mut table = Table::new("stable_prob.csv", &["x", "formula", "estimate", "stderr", "horizon_margin", "direction"]);
    for (k, &x) in p.starts.iter().enumerate() {
        let s = derive_seed(seed, k as u64);
        if params.alpha < 1.0 {
            let est = hit_probability_mc(&params, x, p.n, s, p.accuracy).ctx(S)?;
            let formula = hit_interval_value(&params, x).ctx(S)?;
            checks.push(
                EstimateReport::new(format!("hit_interval x={x}"), est.summary, s).judge(formula, p.k_se, est.horizon_margin),
            );
            table.push(vec![f(x), f(formula), f(est.summary.mean), f(est.summary.stderr), f(est.horizon_margin), String::new()]);
            rows.push(to_json(&est));
        } else if params.alpha > 1.0 {
            let rep = exit_direction(&params, x, p.n, s).ctx(S)?;
            let target = match rep.direction {
                Direction::Complement => 1.0 - rep.formula,
                _ => rep.formula,
            };
            let mut check = EstimateReport::new(format!("exit_direction x={x}"), rep.exit_first, s);
            check.target = Some(target);
            check.tolerance = Some(p.k_se * rep.exit_first.stderr);
            // passes on a definite resolution, whichever it is
            check.verdict = Some(rep.resolved());
            checks.push(check);
            let dir = to_json(&rep.direction).as_str().unwrap_or_default().to_string();
            table.push(vec![f(x), f(rep.formula), f(rep.exit_first.mean), f(rep.exit_first.stderr), f(0.0), dir]);
            rows.push(to_json(&rep));
        } else {
            return Err(CliError::Config("stable-prob has no closed form at alpha = 1".into()));
        }
    }
    let mut tables = vec![table];
    if let Some(sp) = &p.sample_paths {
        let mut t = Table::new("stable_paths.csv", &["replica", "t", "x"]);
        let path_seed = derive_seed(seed, 1000);
        for r in 0..sp.count {
            let mut rng = replica_rng(path_seed, r as u64);
            let path =
                simulate_stable_path(&params, sp.x0, sp.step, sp.horizon, &[], &mut CmsSource { params, rng: &mut rng })
                    .ctx(S)?;
            for (time, x) in path.times.iter().zip(&path.xs) {
                t.push(vec![r.to_string(), f(*time), f(*x)]);
            }
        }
        tables.push(t);
    }
    Ok(Outcome {
        theorem: "stable_interval_passage".into(),
        grid: p.starts.clone(),
        checks,
        results: json!({ "alpha": params.alpha, "rho": params.rho, "starts": rows }),
        tables,
    })
}

// ------------------------------------------------------------ rbz-check

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RbzParams {
    pub z_grid: Vec<f64>,
    pub tol: f64,
}

fn rbz_check(model: &Model, p: &RbzParams, _seed: u64) -> Result<Outcome, CliError> {
    const S: &str = "rbz-check";
    let params = need_stable(model, S)?;
    let v = params.v_theta();
    let theta = params.theta();
    let mut worst: f64 = 0.0;
    let mut table = Table::new("rbz.csv", &["z", "i", "j", "dual", "conjugated", "residual"]);
    for &z in &p.z_grid {
        let d = rbz_f(&params, z).ctx(S)?;
        let fz = stable_f(&params, z + theta).ctx(S)?;
        for i in 0..2 {
            for j in 0..2 {
                let conj = fz[(i, j)] * v[j] / v[i];
                let r = (d[(i, j)] - conj).abs();
                worst = worst.max(r);
                table.push(vec![f(z), i.to_string(), j.to_string(), f(d[(i, j)]), f(conj), f(r)]);
            }
        }
    }
    Ok(Outcome {
        theorem: "dual_exponent".into(),
        grid: p.z_grid.clone(),
        checks: vec![EstimateReport::exact("max_entry_residual", worst).judge(0.0, 0.0, p.tol)],
        results: json!({ "theta": theta, "v_theta": v.as_slice(), "max_entry_residual": worst }),
        tables: vec![table],
    })
}

// ------------------------------------------------------------ renewal-check

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenewalParams {
    pub start: usize,
    /// one per state
    pub test_functions: Vec<TestFn>,
    pub t_grid: Vec<f64>,
    pub n_paths: usize,
    pub max_steps: usize,
    pub stop_above: Option<f64>,
    /// relative slack added to `3·SE`
    pub rel_margin: f64,
    /// bin edges of the renewal measure written to `renewal.csv`
    pub edges: Vec<f64>,
}

fn renewal_check(model: &Model, p: &RenewalParams, seed: u64) -> Result<Outcome, CliError> {
    const S: &str = "renewal-check";
    let poissonized;
    let sampler: &dyn MarwSampler = match model {
        Model::Marw(m) => m,
        Model::Map(spec) => {
            poissonized = poissonize(spec).ctx(S)?;
            &poissonized
        }
        Model::Stable(_) => return Err(CliError::Config("renewal-check needs a marw or map model".into())),
    };
    let len = WalkLength { max_steps: p.max_steps, stop_above: p.stop_above };
    let run = |k| RenewalRun { start: p.start, n_paths: p.n_paths, len, seed: derive_seed(seed, k) };
    let checks = renewal_limit_check(sampler, &p.test_functions, &p.t_grid, p.rel_margin, run(1)).ctx(S)?;
    let measure = renewal_measure(sampler, &p.edges, run(2)).ctx(S)?;
    let mut table = Table::new("renewal.csv", &["i", "j", "bin_lo", "bin_hi", "mass", "stderr"]);
    for (i, j, lo, hi, m, se) in measure.csv_rows() {
        table.push(vec![i.to_string(), j.to_string(), f(lo), f(hi), f(m), f(se)]);
    }
    Ok(Outcome {
        theorem: "markov_renewal_theorem".into(),
        grid: p.t_grid.clone(),
        checks,
        results: json!({
            "stationary": sampler.stationary().as_slice(),
            "mean_increments": sampler.mean_increments().as_slice(),
            "stationary_mean": sampler.stationary_mean(),
        }),
        tables: vec![table],
    })
}

// ------------------------------------------------------------ conditioning

fn conditioned_model(model: &Model, alpha: f64, scenario: &'static str) -> Result<ConditionedModel, CliError> {
    condition_auto(need_map(model, scenario)?, alpha).ctx(scenario)
}

fn model_json(m: &ConditionedModel) -> serde_json::Value {
    json!({ "theta": m.theta, "alpha": m.alpha, "mode": to_json(&m.mode), "v_theta": m.spectral.v_theta.as_slice() })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionedParams {
    /// self-similarity index
    pub alpha: f64,
    pub x: f64,
    pub t: f64,
    pub events: Vec<PathEvent>,
    /// thresholds, increasing when θ > 0 and decreasing when θ < 0
    pub a_grid: Vec<f64>,
    pub n: usize,
}

fn conditioned(model: &Model, p: &ConditionedParams, seed: u64) -> Result<Outcome, CliError> {
    const S: &str = "conditioned";
    let m = conditioned_model(model, p.alpha, S)?;
    let rep = match m.mode {
        Mode::Avoid => verify_avoid_limit(&m, p.x, p.t, &p.events, &p.a_grid, p.n, seed),
        Mode::Absorb => verify_absorb_limit(&m, p.x, p.t, &p.events, &p.a_grid, p.n, seed),
    }
    .ctx(S)?;
    let mut table = Table::new(
        "limit.csv",
        &["a", "event", "conditional", "conditional_se", "threshold_prob", "threshold_prob_se", "scaled", "scaled_se"],
    );
    for r in &rep.rows {
        for (name, c) in rep.events.iter().zip(&r.conditional) {
            table.push(vec![
                f(r.a),
                name.clone(),
                f(c.mean),
                f(c.stderr),
                f(r.threshold_prob.mean),
                f(r.threshold_prob.stderr),
                f(r.scaled.mean),
                f(r.scaled.stderr),
            ]);
        }
    }
    let theorem = match m.mode {
        Mode::Avoid => "avoid_limit",
        Mode::Absorb => "absorb_limit",
    };
    Ok(Outcome {
        theorem: theorem.into(),
        grid: p.a_grid.clone(),
        checks: rep.checks.clone(),
        results: json!({ "model": model_json(&m), "rows": to_json(&rep.rows), "target": to_json(&rep.target) }),
        tables: vec![table],
    })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailsParams {
    pub alpha: f64,
    pub starts: Vec<f64>,
    /// samples of the exponential functional per modulator state
    pub pool_n: usize,
    pub options: TailOptions,
}

fn tails(model: &Model, p: &TailsParams, seed: u64) -> Result<Outcome, CliError> {
    const S: &str = "tails";
    let m = conditioned_model(model, p.alpha, S)?;
    let pool = ResidualPool::build(&m, p.pool_n, derive_seed(seed, 1)).ctx(S)?;
    let rep = tau0_tail_check(&m, &p.starts, &pool, p.options).ctx(S)?;
    let mut table = Table::new("tails.csv", &["x", "state", "t", "survival"]);
    for c in &rep.curves {
        for (t, s) in &c.points {
            table.push(vec![f(c.x), c.state.to_string(), f(*t), f(*s)]);
        }
    }
    Ok(Outcome {
        theorem: "absorption_time_tail".into(),
        grid: p.starts.clone(),
        checks: rep.checks.clone(),
        results: json!({ "model": model_json(&m), "report": to_json(&rep) }),
        tables: vec![table],
    })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeLimitParams {
    pub alpha: f64,
    pub x: f64,
    /// second start for the tail-ratio check
    pub y: f64,
    pub t: f64,
    pub events: Vec<PathEvent>,
    pub s_grid: Vec<f64>,
    pub n: usize,
    pub pool_n: usize,
}

fn time_limit(model: &Model, p: &TimeLimitParams, seed: u64) -> Result<Outcome, CliError> {
    const S: &str = "time-limit";
    let m = conditioned_model(model, p.alpha, S)?;
    let pool = ResidualPool::build(&m, p.pool_n, derive_seed(seed, 1)).ctx(S)?;
    let rep = verify_time_limit(&m, p.x, p.y, p.t, &p.events, &p.s_grid, p.n, &pool, derive_seed(seed, 2)).ctx(S)?;
    let mut table =
        Table::new("time_limit.csv", &["s", "event", "conditional", "conditional_se", "tail_ratio", "tail_ratio_se"]);
    for r in &rep.rows {
        for (name, c) in rep.events.iter().zip(&r.conditional) {
            table.push(vec![f(r.s), name.clone(), f(c.mean), f(c.stderr), f(r.tail_ratio.mean), f(r.tail_ratio.stderr)]);
        }
    }
    Ok(Outcome {
        theorem: "survival_limit".into(),
        grid: p.s_grid.clone(),
        checks: rep.checks.clone(),
        results: json!({
            "model": model_json(&m),
            "h_ratio": rep.h_ratio,
            "rows": to_json(&rep.rows),
            "target": to_json(&rep.target),
        }),
        tables: vec![table],
    })
}
