//! Unilateral-deviation oracles.
//!
//! These evaluate expected stage payoffs directly (means and variances over
//! the second shock, no simulation) and search over deviations numerically,
//! independent of the closed-form equilibrium conditions they check.

use crate::error::{Error, Result};
use crate::model::{BankerWeight, GameParams};
use crate::optimize::golden_section_max;
use crate::static_game::{investment_bias, Communication, StrategyProfile};

/// States used to average over the first shock under full revelation.
const REVELATION_STATES: usize = 16;

/// Message grid used against full-revelation profiles.
const MESSAGE_GRID: usize = 400;

/// Bracket and tolerance for the investor deviation search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchSpec {
    pub lo: f64,
    pub hi: f64,
    pub tol: f64,
}

impl SearchSpec {
    /// A bracket that covers `[-phi1 - 5 D, phi1 + 5 D]` with margin, where
    /// `D` bounds both the profile bias and the equilibrium bias.
    pub fn covering(profile: &StrategyProfile, params: &GameParams) -> Self {
        let d = profile.investment_bias.abs() + investment_bias(params, profile.banker).abs();
        let half = params.phi1() + 5.0 * d + 1.0;
        Self {
            lo: -half,
            hi: half,
            tol: 1e-10,
        }
    }
}

/// Expected stage utility of an investor at `x` who believes the first shock
/// has mean `mean` and variance `variance`, while the other `N - 1` investors
/// hold `others`.
pub fn expected_investor_utility(
    x: f64,
    mean: f64,
    variance: f64,
    others: f64,
    params: &GameParams,
    weight: BankerWeight,
) -> f64 {
    let a = weight.value();
    let n = params.n();
    let xbar = x / n + (n - 1.0) / n * others;
    let mean_rate = (1.0 - a) * mean + a * xbar;
    let gap = x - mean_rate;
    let keep = 1.0 - a;
    -0.5 * (gap * gap + keep * keep * (variance + params.var2())) - params.beta() * mean_rate
}

fn utility_slope(x: f64, mean: f64, others: f64, params: &GameParams, weight: BankerWeight) -> f64 {
    let a = weight.value();
    let n = params.n();
    let xbar = x / n + (n - 1.0) / n * others;
    let gap = x - (1.0 - a) * mean - a * xbar;
    -(1.0 - a / n) * gap - params.beta() * a / n
}

/// Result of the investor deviation search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvestorDeviation {
    /// Expected gain over the profile, averaged over messages.
    pub expected_gain: f64,
    /// Largest gain at any single message.
    pub max_gain: f64,
}

/// Best gain available to investor `investor` from a unilateral change of
/// position, holding the communication rule, the other investors and the
/// bank's rate rule fixed.
pub fn deviation_oracle_investment(
    profile: &StrategyProfile,
    params: &GameParams,
    investor: usize,
    search: SearchSpec,
) -> Result<InvestorDeviation> {
    if investor >= params.n_investors() as usize {
        return Err(Error::param("investor", "index an existing investor"));
    }
    let phi1 = params.phi1();
    let mut expected_gain = 0.0;
    let mut max_gain = 0.0f64;
    let mut visit = |mean: f64, variance: f64, prob: f64| -> Result<()> {
        let gain = message_gain(profile, params, mean, variance, search)?;
        expected_gain += prob * gain;
        max_gain = max_gain.max(gain);
        Ok(())
    };
    match &profile.communication {
        Communication::FullRevelation => {
            let step = 2.0 * phi1 / REVELATION_STATES as f64;
            for i in 0..REVELATION_STATES {
                let state = -phi1 + (i as f64 + 0.5) * step;
                visit(state, 0.0, 1.0 / REVELATION_STATES as f64)?;
            }
        }
        Communication::Partition(p) => {
            for k in 0..p.cell_count() {
                let length = p.cutoffs()[k + 1] - p.cutoffs()[k];
                visit(p.cell_mean(k), p.cell_variance(k), length / (2.0 * phi1))?;
            }
        }
    }
    Ok(InvestorDeviation {
        expected_gain,
        max_gain,
    })
}

fn message_gain(
    profile: &StrategyProfile,
    params: &GameParams,
    mean: f64,
    variance: f64,
    search: SearchSpec,
) -> Result<f64> {
    let on_profile = mean + profile.investment_bias;
    let w = profile.banker;
    let u = |x: f64| expected_investor_utility(x, mean, variance, on_profile, params, w);
    let best = golden_section_max(u, search.lo, search.hi, search.tol)?;
    if best.at_boundary {
        return Err(Error::BracketMiss {
            lo: search.lo,
            hi: search.hi,
            argmax: best.argmax,
        });
    }
    let slope = utility_slope(best.argmax, mean, on_profile, params, w);
    // golden section locates the argmax only to about sqrt(eps) |argmax|
    if slope.abs() > 1e-6 * (1.0 + params.beta() + best.argmax.abs()) {
        return Err(Error::OracleMismatch { derivative: slope });
    }
    let base = u(on_profile);
    Ok(best.value.max(base) - base)
}

/// Expected loss of a bank with weight `weight` when every investor holds
/// `position` and the first shock is `omega1`:
/// `alpha_tilde (1 - alpha_tilde) ((position - omega1)^2 + var2) / 2`.
pub fn expected_cb_loss_given_state(position: f64, omega1: f64, params: &GameParams, weight: BankerWeight) -> f64 {
    let a = weight.value();
    let gap = position - omega1;
    0.5 * a * (1.0 - a) * (gap * gap + params.var2())
}

/// Largest reduction of the bank's expected loss from announcing something
/// other than what the profile prescribes, over `states` evenly spaced first
/// shocks.
///
/// Investors respond to every message with its conditional mean plus the
/// profile bias. Against a partition the alternatives are the other cells;
/// against full revelation they are a grid of messages plus the message that
/// exactly offsets the bias.
pub fn deviation_oracle_message(profile: &StrategyProfile, params: &GameParams, states: usize) -> f64 {
    let phi1 = params.phi1();
    let w = profile.banker;
    let d = profile.investment_bias;
    let loss = |position: f64, omega1: f64| expected_cb_loss_given_state(position, omega1, params, w);
    let mut worst = 0.0f64;
    for i in 0..states {
        let omega1 = -phi1 + (i as f64 + 0.5) * 2.0 * phi1 / states as f64;
        let gain = match &profile.communication {
            Communication::Partition(p) => {
                let on = loss(p.cell_mean(p.cell_of(omega1)) + d, omega1);
                (0..p.cell_count())
                    .map(|k| on - loss(p.cell_mean(k) + d, omega1))
                    .fold(0.0f64, f64::max)
            }
            Communication::FullRevelation => {
                let on = loss(omega1 + d, omega1);
                let offset = (omega1 - d).clamp(-phi1, phi1);
                let grid = (0..=MESSAGE_GRID).map(|j| -phi1 + 2.0 * phi1 * j as f64 / MESSAGE_GRID as f64);
                core::iter::once(offset)
                    .chain(grid)
                    .map(|m| on - loss(m + d, omega1))
                    .fold(0.0f64, f64::max)
            }
        };
        worst = worst.max(gain);
    }
    worst
}
