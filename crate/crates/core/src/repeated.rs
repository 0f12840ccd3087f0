//! Grim-trigger equilibria of the repeated game and the stream simulation
//! that checks their thresholds.
//!
//! Every threshold is `gain / (gain + path - punish)`: the one-shot gain of a
//! deviating investor against the per-stage loss of falling from the path to
//! the punishment profile forever.

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;

use crate::cheap_talk::{most_informative_residual_variance, most_informative_profile};
use crate::error::{Error, Result};
use crate::model::{investor_payoff, policy_rule, BankerWeight, GameParams};
use crate::montecarlo::{run_sequential, uniform_symmetric, McEstimate, Replicate, RngSpec};
use crate::optimize::bisect_sign_change;
use crate::oracle::{deviation_oracle_investment, SearchSpec};
use crate::static_game::{best_response_investment, bias_for, Communication, StrategyProfile};

/// Discounting is truncated once `delta^horizon` falls below this bound.
pub const TAIL_BOUND: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriggerKind {
    /// First-best path; deviations are punished by uninformative messages.
    Discipline,
    /// First-best path; deviations revert to the static cheap-talk play.
    CollusionFirstBest,
    /// Investors mimic a single monopolist; deviations revert to the static
    /// cheap-talk play.
    CollusionMonopoly,
}

impl TriggerKind {
    pub const ALL: [TriggerKind; 3] = [
        TriggerKind::Discipline,
        TriggerKind::CollusionFirstBest,
        TriggerKind::CollusionMonopoly,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TriggerKind::Discipline => "discipline",
            TriggerKind::CollusionFirstBest => "collusion_first_best",
            TriggerKind::CollusionMonopoly => "collusion_monopoly",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriggerEquilibrium {
    pub kind: TriggerKind,
    /// The critical discount factor, `None` when no factor in `(0,1)` works.
    pub delta_star: Option<f64>,
    /// `gain / (gain + path - punish)` before the feasibility check.
    pub raw_threshold: f64,
    pub path_stage_investor_payoff: f64,
    pub punish_stage_investor_payoff: f64,
    pub one_shot_gain: f64,
}

impl TriggerEquilibrium {
    fn new(kind: TriggerKind, gain: f64, path: f64, punish: f64, condition: bool) -> Self {
        let raw = trigger_threshold(gain, path, punish);
        let feasible = condition && raw > 0.0 && raw < 1.0;
        Self {
            kind,
            delta_star: feasible.then_some(raw),
            raw_threshold: raw,
            path_stage_investor_payoff: path,
            punish_stage_investor_payoff: punish,
            one_shot_gain: gain,
        }
    }

    pub fn feasible(&self) -> bool {
        self.delta_star.is_some()
    }
}

/// `gain / (gain + path - punish)`.
pub fn trigger_threshold(gain: f64, path: f64, punish: f64) -> f64 {
    gain / (gain + path - punish)
}

/// `[alpha beta / (N - alpha)]^2`.
fn influence_sq(params: &GameParams) -> f64 {
    let g = params.alpha() * params.beta() / (params.n() - params.alpha());
    g * g
}

/// `(2N - 1 - alpha) / (1 - alpha)`.
fn k_factor(params: &GameParams) -> f64 {
    (2.0 * params.n() - 1.0 - params.alpha()) / (1.0 - params.alpha())
}

fn keep_sq(params: &GameParams) -> f64 {
    (1.0 - params.alpha()) * (1.0 - params.alpha())
}

/// Stage investor payoff on the first-best path.
fn first_best_stage(params: &GameParams) -> f64 {
    -0.5 * keep_sq(params) * params.var2()
}

/// Stage investor payoff of the static oligopoly with residual variance `s`.
fn static_stage(params: &GameParams, s: f64) -> f64 {
    -0.5 * keep_sq(params) * (s + params.var2()) + 0.5 * influence_sq(params) * k_factor(params)
}

pub fn discipline_threshold(params: &GameParams) -> TriggerEquilibrium {
    let g = influence_sq(params);
    let gain = 0.5 * g;
    let path = first_best_stage(params);
    let punish = static_stage(params, params.var1());
    let raw = g / (g * (1.0 - k_factor(params)) + params.var1() * keep_sq(params));
    let mut eq = TriggerEquilibrium::new(TriggerKind::Discipline, gain, path, punish, true);
    eq.raw_threshold = raw;
    eq.delta_star = eq.delta_star.map(|_| raw);
    eq
}

/// Smallest `phi1` for which the discipline equilibrium exists,
/// `d_abs * sqrt(3 (2N - 1 - alpha) / (1 - alpha))`.
pub fn discipline_phi1_bound(params: &GameParams) -> f64 {
    let d = bias_for(params.alpha(), params.beta(), params.n()).abs();
    d * libm::sqrt(3.0 * k_factor(params))
}

pub fn collusion_first_best_threshold(params: &GameParams) -> TriggerEquilibrium {
    let g = influence_sq(params);
    let s = most_informative_residual_variance(params, params.unbiased_banker());
    let gain = 0.5 * g;
    let path = first_best_stage(params);
    let punish = static_stage(params, s);
    let raw = g / (g * (1.0 - k_factor(params)) + keep_sq(params) * s);
    let mut eq = TriggerEquilibrium::new(TriggerKind::CollusionFirstBest, gain, path, punish, true);
    eq.raw_threshold = raw;
    eq.delta_star = eq.delta_star.map(|_| raw);
    eq
}

/// Residual variance below which first-best collusion cannot be sustained,
/// `d_abs^2 (2N - 1 - alpha) / (1 - alpha)`.
pub fn collusion_first_best_bound(params: &GameParams) -> f64 {
    influence_sq(params) / keep_sq(params) * k_factor(params)
}

/// The profile in which all investors act as one monopolist.
pub fn monopoly_path_profile(params: &GameParams) -> Result<StrategyProfile> {
    let mono = params.with_n_investors(1)?;
    let mut profile = most_informative_profile(&mono, params.unbiased_banker())?;
    if let Communication::Partition(_) = profile.communication {
        profile.investment_bias = bias_for(params.alpha(), params.beta(), 1.0);
    }
    Ok(profile)
}

pub fn collusion_monopoly_threshold(params: &GameParams) -> Result<TriggerEquilibrium> {
    if params.n_investors() < 2 {
        return Err(Error::Unsupported("monopoly collusion needs at least two investors"));
    }
    let mono = params.with_n_investors(1)?;
    let w = params.unbiased_banker();
    let s1 = most_informative_residual_variance(&mono, w);
    let sn = most_informative_residual_variance(params, w);
    let a = params.alpha();
    let x = a * params.beta() / keep_sq(params);
    let bound = x * x - collusion_first_best_bound(params);
    let condition = s1 - sn < bound;

    let profile = monopoly_path_profile(params)?;
    let spec = SearchSpec::covering(&profile, params);
    let gain = deviation_oracle_investment(&profile, params, 0, spec)?.expected_gain;
    let path = -0.5 * keep_sq(params) * (s1 + params.var2()) + 0.5 * (x * (1.0 - a)) * (x * (1.0 - a));
    let punish = static_stage(params, sn);
    Ok(TriggerEquilibrium::new(TriggerKind::CollusionMonopoly, gain, path, punish, condition))
}

pub fn trigger_equilibrium(params: &GameParams, kind: TriggerKind) -> Result<TriggerEquilibrium> {
    match kind {
        TriggerKind::Discipline => Ok(discipline_threshold(params)),
        TriggerKind::CollusionFirstBest => Ok(collusion_first_best_threshold(params)),
        TriggerKind::CollusionMonopoly => collusion_monopoly_threshold(params),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preference {
    Monopoly,
    FirstBest,
    Tie,
}

impl Preference {
    pub fn name(self) -> &'static str {
        match self {
            Preference::Monopoly => "monopoly",
            Preference::FirstBest => "first_best",
            Preference::Tie => "tie",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreferenceReport {
    /// Residual variance of the single-investor partition.
    pub residual_variance_monopoly: f64,
    /// `[alpha beta / (1 - alpha)^2]^2`.
    pub monopoly_bias_sq: f64,
    pub preference: Preference,
}

/// Which collusive path investors like better.
pub fn investor_equilibrium_preference(params: &GameParams) -> Result<PreferenceReport> {
    let mono = params.with_n_investors(1)?;
    let s1 = most_informative_residual_variance(&mono, params.unbiased_banker());
    let x = params.alpha() * params.beta() / keep_sq(params);
    let xx = x * x;
    let preference = if s1 < xx {
        Preference::Monopoly
    } else if s1 > xx {
        Preference::FirstBest
    } else {
        Preference::Tie
    };
    Ok(PreferenceReport {
        residual_variance_monopoly: s1,
        monopoly_bias_sq: xx,
        preference,
    })
}

/// Stage at which the tracked investor deviates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Deviation {
    Never,
    At(usize),
}

/// Stages needed for `delta^horizon < TAIL_BOUND`.
pub fn required_horizon(delta: f64) -> Result<usize> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param("delta", "lie in (0,1)"));
    }
    Ok(libm::ceil(libm::log(TAIL_BOUND) / libm::log(delta)) as usize)
}

/// One stage profile of the stream: how messages map to positions.
#[derive(Debug, Clone)]
struct StagePlay {
    profile: StrategyProfile,
    /// Messages are ignored and positions use the prior mean.
    babbling: bool,
}

impl StagePlay {
    fn mean(&self, omega1: f64) -> f64 {
        if self.babbling {
            return 0.0;
        }
        self.profile.communication.posterior(omega1).0
    }
}

/// Discounted payoff streams of the tracked investor under one trigger kind.
#[derive(Debug, Clone)]
pub struct TriggerStream {
    params: GameParams,
    delta: f64,
    horizon: usize,
    deviation: Deviation,
    path: StagePlay,
    punish: StagePlay,
}

/// Discounted payoffs of one simulated stream, on common shocks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StreamOutcome {
    pub with_deviation: f64,
    pub without_deviation: f64,
}

impl StreamOutcome {
    pub fn deviation_gain(&self) -> f64 {
        self.with_deviation - self.without_deviation
    }
}

impl TriggerStream {
    pub fn new(
        params: &GameParams,
        delta: f64,
        kind: TriggerKind,
        deviation: Deviation,
        horizon: usize,
    ) -> Result<Self> {
        let required = required_horizon(delta)?;
        if horizon < required {
            return Err(Error::HorizonTooShort { horizon, required });
        }
        let w = params.unbiased_banker();
        let first_best = StagePlay {
            profile: StrategyProfile {
                banker: w,
                communication: Communication::FullRevelation,
                investment_bias: 0.0,
            },
            babbling: false,
        };
        let static_play = StagePlay {
            profile: most_informative_profile(params, w)?,
            babbling: false,
        };
        let (path, punish) = match kind {
            TriggerKind::Discipline => {
                let babble = StagePlay {
                    profile: StrategyProfile {
                        investment_bias: bias_for(params.alpha(), params.beta(), params.n()),
                        ..first_best.profile.clone()
                    },
                    babbling: true,
                };
                (first_best, babble)
            }
            TriggerKind::CollusionFirstBest => (first_best, static_play),
            TriggerKind::CollusionMonopoly => {
                if params.n_investors() < 2 {
                    return Err(Error::Unsupported("monopoly collusion needs at least two investors"));
                }
                let mono = StagePlay {
                    profile: monopoly_path_profile(params)?,
                    babbling: false,
                };
                (mono, static_play)
            }
        };
        Ok(Self {
            params: *params,
            delta,
            horizon,
            deviation,
            path,
            punish,
        })
    }

    /// Plays one stream. Each stage draws the two shocks and the message a
    /// babbling bank would send, in that order, so both arms see the same
    /// draws.
    pub fn simulate(&self, rng: &mut ChaCha8Rng) -> Result<StreamOutcome> {
        let p = &self.params;
        let w: BankerWeight = p.unbiased_banker();
        let n = p.n();
        let mut discount = 1.0;
        let mut with = 0.0;
        let mut without = 0.0;
        let mut punished = false;
        for t in 0..self.horizon {
            let omega1 = uniform_symmetric(rng, p.phi1());
            let omega2 = uniform_symmetric(rng, p.phi2());
            let _message = uniform_symmetric(rng, p.phi1());
            let omega = omega1 + omega2;

            let on_path = |play: &StagePlay| {
                let x = play.mean(omega1) + play.profile.investment_bias;
                investor_payoff(x, policy_rule(omega, x, w), p.beta())
            };
            let path_payoff = on_path(&self.path);
            without += discount * path_payoff;

            let payoff = if punished {
                on_path(&self.punish)
            } else if self.deviation == Deviation::At(t) {
                let mean = self.path.mean(omega1);
                let others = mean + self.path.profile.investment_bias;
                let x = best_response_investment(mean, others, p, w)?;
                let xbar = x / n + (n - 1.0) / n * others;
                punished = true;
                investor_payoff(x, policy_rule(omega, xbar, w), p.beta())
            } else {
                path_payoff
            };
            with += discount * payoff;
            discount *= self.delta;
        }
        Ok(StreamOutcome {
            with_deviation: with,
            without_deviation: without,
        })
    }
}

/// Replication wrapper: outputs the discounted payoff with deviation,
/// without deviation, and their difference.
impl Replicate for TriggerStream {
    fn outputs(&self) -> usize {
        3
    }

    fn replicate(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) {
        match self.simulate(rng) {
            Ok(o) => {
                out[0] = o.with_deviation;
                out[1] = o.without_deviation;
                out[2] = o.deviation_gain();
            }
            Err(_) => out.fill(f64::NAN),
        }
    }
}

/// Discounted payoff comparison for a single stream of `horizon` stages.
pub fn simulate_trigger_path(
    params: &GameParams,
    delta: f64,
    kind: TriggerKind,
    deviation: Deviation,
    horizon: usize,
    rng: &mut ChaCha8Rng,
) -> Result<StreamOutcome> {
    TriggerStream::new(params, delta, kind, deviation, horizon)?.simulate(rng)
}

/// Monte Carlo estimate of the gain from deviating at stage 0 when the
/// discount factor is `delta`. Positive below the threshold.
pub fn trigger_gain_estimate(
    params: &GameParams,
    kind: TriggerKind,
    delta: f64,
    replications: u64,
    rng: RngSpec,
) -> Result<Vec<McEstimate>> {
    let horizon = required_horizon(delta)?;
    let stream = TriggerStream::new(params, delta, kind, Deviation::At(0), horizon)?;
    let estimates = run_sequential(&stream, replications, rng);
    if estimates.iter().any(|e| !e.mean.is_finite()) {
        return Err(Error::NonFinite { at: delta });
    }
    Ok(estimates)
}

/// Bisection on `delta` for the sign change of the estimated deviation gain.
/// Every evaluation reuses the same seed, so shocks are common across
/// discount factors.
pub fn bisect_trigger_threshold(
    params: &GameParams,
    kind: TriggerKind,
    bracket: (f64, f64),
    tol: f64,
    replications: u64,
    rng: RngSpec,
) -> Result<(f64, f64)> {
    bisect_sign_change(
        |delta| Ok(trigger_gain_estimate(params, kind, delta, replications, rng)?[2].mean),
        bracket.0,
        bracket.1,
        tol,
    )
}
