use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::{esscher_spec, spectral_data_auto, MapSpec, SpectralData};
use crate::simulate::{ClockHit, ClockProbe, MapSimulator, StopRule, Terminal};
use crate::stable::{stable_spectral, StableParams};
use crate::stats::ReplicaRng;

/// Which way the h-transform conditions the process.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// θ > 0: conditioned to avoid the origin
    Avoid,
    /// θ < 0: conditioned to be absorbed continuously at the origin
    Absorb,
}

impl Mode {
    pub fn of(theta: f64) -> Result<Mode> {
        if theta > 0.0 {
            Ok(Mode::Avoid)
        } else if theta < 0.0 {
            Ok(Mode::Absorb)
        } else {
            Err(Error::NoCramerRoot("theta = 0".into()))
        }
    }
}

#[derive(Debug, Clone)]
pub enum BaseModel {
    Map(MapSpec),
    Stable(StableParams),
}

/// A self-similar Markov process given through its MAP, together with the
/// harmonic function `h(x) = v_{sign x}(θ)|x|^θ` and the tilted MAP that
/// drives the conditioned process.
#[derive(Debug, Clone)]
pub struct ConditionedModel {
    pub base: BaseModel,
    pub spectral: SpectralData,
    pub theta: f64,
    /// self-similarity index
    pub alpha: f64,
    pub mode: Mode,
    /// MAP tilted at θ; absent when the base is not a concrete MAP
    pub tilted: Option<MapSpec>,
    /// sign of `X` in each modulator state
    pub signs: Vec<f64>,
}

fn default_signs(n: usize) -> Vec<f64> {
    if n == 2 {
        vec![1.0, -1.0]
    } else {
        vec![1.0; n]
    }
}

/// Package a concrete MAP of index `alpha` with its h-transform data.
/// Two-state MAPs are read as (positive, negative); other sizes default to all
/// positive, see [`ConditionedModel::with_signs`].
pub fn condition(spec: &MapSpec, sd: &SpectralData, alpha: f64) -> Result<ConditionedModel> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::Domain(format!("index alpha must be positive, got {alpha}")));
    }
    if sd.n_states() != spec.n_states() {
        return Err(Error::InvalidSpec("spectral data does not belong to this MAP".into()));
    }
    let theta = sd.theta;
    let mode = Mode::of(theta)?;
    let (tilted, _) = esscher_spec(spec, theta)?;
    let base_drift = spec.mean_drift()?;
    let tilted_drift = tilted.mean_drift()?;
    if base_drift.signum() != -theta.signum() || tilted_drift.signum() != theta.signum() {
        return Err(Error::Numerical(format!(
            "drift signs inconsistent with theta = {theta}: base {base_drift}, tilted {tilted_drift}"
        )));
    }
    Ok(ConditionedModel {
        base: BaseModel::Map(spec.clone()),
        spectral: sd.clone(),
        theta,
        alpha,
        mode,
        tilted: Some(tilted),
        signs: default_signs(spec.n_states()),
    })
}

/// Like [`condition`], locating θ automatically.
pub fn condition_auto(spec: &MapSpec, alpha: f64) -> Result<ConditionedModel> {
    let sd = spectral_data_auto(std::sync::Arc::new(spec.clone()))?;
    condition(spec, &sd, alpha)
}

/// Stable process: θ = α − 1, states (positive, negative).
pub fn condition_stable(params: &StableParams) -> Result<ConditionedModel> {
    let sd = stable_spectral(params)?;
    Ok(ConditionedModel {
        base: BaseModel::Stable(*params),
        theta: sd.theta,
        alpha: params.alpha,
        mode: Mode::of(sd.theta)?,
        spectral: sd,
        tilted: None,
        signs: vec![1.0, -1.0],
    })
}

impl ConditionedModel {
    pub fn with_signs(mut self, signs: Vec<f64>) -> Result<Self> {
        if signs.len() != self.spectral.n_states() || signs.iter().any(|s| *s != 1.0 && *s != -1.0) {
            return Err(Error::InvalidSpec("signs must be ±1, one per state".into()));
        }
        self.signs = signs;
        Ok(self)
    }

    pub fn base_spec(&self) -> Result<&MapSpec> {
        match &self.base {
            BaseModel::Map(s) => Ok(s),
            BaseModel::Stable(_) => Err(Error::InvalidSpec("stable base has no concrete MAP to simulate".into())),
        }
    }

    pub fn tilted_spec(&self) -> Result<&MapSpec> {
        self.tilted
            .as_ref()
            .ok_or_else(|| Error::InvalidSpec("no concrete tilted MAP for this model".into()))
    }

    /// First state whose sign matches `x`.
    pub fn state_of(&self, x: f64) -> Result<usize> {
        if x == 0.0 || !x.is_finite() {
            return Err(Error::Domain(format!("start must be finite and nonzero, got {x}")));
        }
        self.signs
            .iter()
            .position(|s| *s == x.signum())
            .ok_or_else(|| Error::Domain(format!("no modulator state carries the sign of {x}")))
    }

    /// `v_state(θ) |x|^θ`.
    pub fn h_state(&self, state: usize, abs_x: f64) -> f64 {
        self.spectral.v_theta[state] * abs_x.powf(self.theta)
    }

    pub fn h(&self, x: f64) -> Result<f64> {
        Ok(self.h_state(self.state_of(x)?, x.abs()))
    }

    /// `h(X_t)/h(x)` in MAP coordinates.
    pub(crate) fn h_ratio(&self, xi0: f64, i0: usize, xi: f64, state: usize) -> f64 {
        let v = &self.spectral.v_theta;
        (self.theta * (xi - xi0)).exp() * v[state] / v[i0]
    }

    pub(crate) fn window(&self, hit: &ClockHit) -> ClockWindow {
        ClockWindow {
            x_t: self.signs[hit.state] * hit.xi.exp(),
            sup_abs: hit.max_xi.exp(),
            inf_abs: hit.min_xi.exp(),
        }
    }
}

/// What an event may observe of the rssMp on `[0, t]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClockWindow {
    pub x_t: f64,
    pub sup_abs: f64,
    pub inf_abs: f64,
}

/// Path events measurable from the skeleton on `[0, t]`.
pub trait PathFunctional: Sync {
    fn holds(&self, w: &ClockWindow) -> bool;
    fn label(&self) -> String;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum PathEvent {
    WholeSpace,
    PositiveAt,
    /// `sup_{u<=t} |X_u| <= level`
    SupAbsBelow { level: f64 },
    /// `lo <= X_t <= hi`
    XtIn { lo: f64, hi: f64 },
}

impl PathFunctional for PathEvent {
    fn holds(&self, w: &ClockWindow) -> bool {
        match *self {
            PathEvent::WholeSpace => true,
            PathEvent::PositiveAt => w.x_t > 0.0,
            PathEvent::SupAbsBelow { level } => w.sup_abs <= level,
            PathEvent::XtIn { lo, hi } => lo <= w.x_t && w.x_t <= hi,
        }
    }

    fn label(&self) -> String {
        match *self {
            PathEvent::WholeSpace => "whole_space".into(),
            PathEvent::PositiveAt => "x_t_positive".into(),
            PathEvent::SupAbsBelow { level } => format!("sup_abs_below_{level}"),
            PathEvent::XtIn { lo, hi } => format!("x_t_in_{lo}_{hi}"),
        }
    }
}

/// How deep below the start ξ must fall before the path counts as absorbed:
/// the clock left to run is then at most `e^{−α·depth}|x|^α` times a copy of
/// `I`.
pub const DEFAULT_ABSORB_DEPTH_ALPHA: f64 = 30.0;

/// Run a MAP from `(xi0, i0)` watching the clock for `t`, under `stop`.
pub(crate) fn probe_run(
    sim: &MapSimulator,
    alpha: f64,
    xi0: f64,
    i0: usize,
    t: f64,
    stop: StopRule,
    stop_on_hit: bool,
    rng: &mut ReplicaRng,
) -> Result<(Terminal, Option<ClockHit>)> {
    let mut probe = ClockProbe::new(alpha, t, stop_on_hit);
    let term = sim.run(xi0, i0, stop, rng, &mut probe)?;
    Ok((term, probe.hit()))
}
