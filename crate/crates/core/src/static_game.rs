//! Static-game equilibrium objects: the oligopolistic investment bias, the
//! investors' best responses, and on-path rates.
//!
//! With `N` investors each one moves the optimal rate by `alpha_tilde / N`.
//! In equilibrium every investor holds the conditional mean of the first shock
//! shifted by the bias `d = -alpha_tilde * beta / ((N - alpha_tilde)(1 - alpha_tilde))`,
//! so a profile is fully described by its communication rule, the bias, and
//! the banker weight.

use alloc::vec::Vec;

use crate::cheap_talk::Partition;
use crate::error::{Error, Result};
use crate::model::{policy_rule, BankerWeight, GameParams, ShockPair};

/// How the bank's announcement maps the first shock into messages.
#[derive(Debug, Clone, PartialEq)]
pub enum Communication {
    /// The first shock is announced exactly.
    FullRevelation,
    /// Only the cell containing the first shock is announced.
    Partition(Partition),
}

impl Communication {
    /// Conditional mean and variance of the first shock given the message
    /// induced by `omega1`.
    pub fn posterior(&self, omega1: f64) -> (f64, f64) {
        match self {
            Communication::FullRevelation => (omega1, 0.0),
            Communication::Partition(p) => {
                let k = p.cell_of(omega1);
                (p.cell_mean(k), p.cell_variance(k))
            }
        }
    }
}

/// A complete stage-game profile.
///
/// Investors hold `E[omega1 | m] + investment_bias`; the bank sets the rate
/// with [`policy_rule`] under its own weight.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyProfile {
    pub banker: BankerWeight,
    pub communication: Communication,
    pub investment_bias: f64,
}

impl StrategyProfile {
    /// Position every investor takes after the message induced by `omega1`.
    pub fn position(&self, omega1: f64) -> f64 {
        self.communication.posterior(omega1).0 + self.investment_bias
    }

    /// Realised rate when everyone follows the profile.
    pub fn rate(&self, shocks: &ShockPair) -> f64 {
        policy_rule(shocks.omega(), self.position(shocks.omega1), self.banker)
    }

    pub fn cell_count(&self) -> Option<usize> {
        match &self.communication {
            Communication::FullRevelation => None,
            Communication::Partition(p) => Some(p.cell_count()),
        }
    }
}

/// Expected utility of an unbiased investor split into its three parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UtilityDecomposition {
    pub unbiased_term: f64,
    pub readjustment_term: f64,
    pub distortion_term: f64,
}

impl UtilityDecomposition {
    pub fn total(&self) -> f64 {
        self.unbiased_term + self.readjustment_term + self.distortion_term
    }
}

/// Equilibrium investment bias `d(alpha_tilde)`, always `<= 0`.
///
/// A banker weight of 1 cannot be constructed, which rules out the
/// singularity of this map.
pub fn investment_bias(params: &GameParams, weight: BankerWeight) -> f64 {
    bias_for(weight.value(), params.beta(), params.n())
}

pub(crate) fn bias_for(alpha_tilde: f64, beta: f64, n: f64) -> f64 {
    -alpha_tilde * beta / ((n - alpha_tilde) * (1.0 - alpha_tilde))
}

/// Best response of one investor who expects `expected_omega1` and faces
/// others at mean position `mean_other_positions`.
///
/// Solves the first-order condition of the investor's expected utility under
/// the bank's optimal rate; the utility is strictly concave in the position.
pub fn best_response_investment(
    expected_omega1: f64,
    mean_other_positions: f64,
    params: &GameParams,
    weight: BankerWeight,
) -> Result<f64> {
    let a = weight.value();
    let n = params.n();
    let influence = a / n;
    let coefficient = 1.0 - influence;
    if !(coefficient > 0.0) {
        return Err(Error::DegenerateBestResponse { coefficient });
    }
    let others = a * (n - 1.0) / n * mean_other_positions;
    let rhs = (1.0 - a) * expected_omega1 + others - influence * params.beta() / coefficient;
    Ok(rhs / coefficient)
}

/// Simultaneous best-response dynamics from `start` until the largest
/// position change falls below `tol`.
///
/// Returns the final positions and the number of rounds.
pub fn best_response_dynamics(
    start: &[f64],
    expected_omega1: f64,
    params: &GameParams,
    weight: BankerWeight,
    tol: f64,
    max_rounds: usize,
) -> Result<(Vec<f64>, usize)> {
    let n = params.n_investors() as usize;
    if start.len() != n {
        return Err(Error::param("start", "hold one position per investor"));
    }
    let mut x = start.to_vec();
    let mut next = alloc::vec![0.0; n];
    for round in 1..=max_rounds {
        let total: f64 = x.iter().sum();
        let mut change = 0.0f64;
        for i in 0..n {
            let others = if n > 1 {
                (total - x[i]) / (n - 1) as f64
            } else {
                0.0
            };
            next[i] = best_response_investment(expected_omega1, others, params, weight)?;
            change = change.max((next[i] - x[i]).abs());
        }
        core::mem::swap(&mut x, &mut next);
        if change < tol {
            return Ok((x, round));
        }
    }
    Ok((x, max_rounds))
}

/// Expected utility of an investor at `x_i` when the first shock `omega1` is
/// revealed and everyone else holds `omega1`.
pub fn expected_utility_decomposition(
    x_i: f64,
    omega1: f64,
    params: &GameParams,
    weight: BankerWeight,
) -> UtilityDecomposition {
    let a = weight.value();
    let influence = a / params.n();
    let bias = x_i - omega1;
    let keep = 1.0 - influence;
    UtilityDecomposition {
        unbiased_term: -0.5 * (1.0 - a) * (1.0 - a) * params.var2() - params.beta() * omega1,
        readjustment_term: -0.5 * keep * keep * bias * bias,
        distortion_term: -params.beta() * influence * bias,
    }
}

/// On-path rate of a full-revelation profile.
pub fn on_path_rate(profile: &StrategyProfile, shocks: &ShockPair, params: &GameParams) -> Result<f64> {
    let _ = params;
    match profile.communication {
        Communication::FullRevelation => Ok(profile.rate(shocks)),
        Communication::Partition(_) => Err(Error::RequiresFullRevelation),
    }
}

/// The first-best benchmark: full revelation, unbiased positions, society
/// weight. It is an equilibrium only in the limit of infinitely many
/// investors.
pub fn competitive_profile(params: &GameParams) -> StrategyProfile {
    StrategyProfile {
        banker: params.unbiased_banker(),
        communication: Communication::FullRevelation,
        investment_bias: 0.0,
    }
}

/// Full revelation with equilibrium (biased) investment under `weight`.
pub fn transparent_profile(params: &GameParams, weight: BankerWeight) -> StrategyProfile {
    StrategyProfile {
        banker: weight,
        communication: Communication::FullRevelation,
        investment_bias: investment_bias(params, weight),
    }
}
