//! Closed-form ex-ante welfare and investor payoffs.
//!
//! Every profile in the model has positions `E[omega1 | m] + d` and the rate
//! rule of a banker with weight `alpha_tilde`. Writing
//! `Q = alpha_tilde^2 (1 - alpha) + alpha (1 - alpha_tilde)^2`, society welfare
//! is `-Q (var2 + d^2 + s) / 2` and investor payoff is
//! `-(1 - alpha_tilde)^2 (var2 + d^2 + s) / 2 - beta * alpha_tilde * d`, where
//! `s` is the residual variance left by communication. Society welfare always
//! uses the society weight `alpha`.

use crate::cheap_talk::{most_informative_residual_variance, residual_variance};
use crate::error::{Error, Result};
use crate::model::{BankerWeight, GameParams};
use crate::static_game::{investment_bias, Communication, StrategyProfile};

/// Analytic figures for one profile.
///
/// `investor_payoff` can be positive for oligopoly profiles: the expected
/// `-beta * r` term rewards the downward rate distortion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WelfareReport {
    pub welfare: f64,
    pub investor_payoff: f64,
    /// `E[r - r_com]` with `r_com = omega1 + (1 - alpha) omega2`.
    pub mean_distortion: f64,
    pub residual_variance: f64,
}

/// Weight `Q(alpha_tilde)` on the variance terms of society welfare.
pub fn variance_weight(alpha: f64, alpha_tilde: f64) -> f64 {
    alpha_tilde * alpha_tilde * (1.0 - alpha) + alpha * (1.0 - alpha_tilde) * (1.0 - alpha_tilde)
}

/// Report for a profile with banker weight `alpha_tilde`, bias `bias` and
/// residual variance `residual`.
pub fn profile_values(params: &GameParams, alpha_tilde: f64, bias: f64, residual: f64) -> WelfareReport {
    let noise = params.var2() + bias * bias + residual;
    let keep = 1.0 - alpha_tilde;
    WelfareReport {
        welfare: -0.5 * variance_weight(params.alpha(), alpha_tilde) * noise,
        investor_payoff: -0.5 * keep * keep * noise - params.beta() * alpha_tilde * bias,
        mean_distortion: alpha_tilde * bias,
        residual_variance: residual,
    }
}

pub fn competitive_values(params: &GameParams) -> WelfareReport {
    let a = params.alpha();
    WelfareReport {
        welfare: -0.5 * a * (1.0 - a) * params.var2(),
        investor_payoff: -0.5 * (1.0 - a) * (1.0 - a) * params.var2(),
        mean_distortion: 0.0,
        residual_variance: 0.0,
    }
}

pub fn transparent_oligopoly_welfare(params: &GameParams, weight: BankerWeight) -> WelfareReport {
    profile_values(params, weight.value(), investment_bias(params, weight), 0.0)
}

/// Report under the most informative partition equilibrium for `weight`.
pub fn cheap_talk_welfare(params: &GameParams, weight: BankerWeight) -> WelfareReport {
    let residual = most_informative_residual_variance(params, weight);
    profile_values(params, weight.value(), investment_bias(params, weight), residual)
}

/// Gaps of the oligopoly profiles (banker weight `alpha`) relative to the
/// competitive benchmark.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OligopolyGaps {
    pub transparent_welfare: f64,
    pub transparent_investor: f64,
    pub cheap_talk_welfare: f64,
    pub cheap_talk_investor: f64,
}

pub fn oligopoly_gaps(params: &GameParams) -> OligopolyGaps {
    let com = competitive_values(params);
    let tr = transparent_oligopoly_welfare(params, params.unbiased_banker());
    let ct = cheap_talk_welfare(params, params.unbiased_banker());
    OligopolyGaps {
        transparent_welfare: tr.welfare - com.welfare,
        transparent_investor: tr.investor_payoff - com.investor_payoff,
        cheap_talk_welfare: ct.welfare - com.welfare,
        cheap_talk_investor: ct.investor_payoff - com.investor_payoff,
    }
}

/// `-alpha^3 beta^2 / (2 (N - alpha)^2 (1 - alpha))`.
pub fn transparent_welfare_gap(params: &GameParams) -> f64 {
    let (a, b, n) = (params.alpha(), params.beta(), params.n());
    -a * a * a * b * b / (2.0 * (n - a) * (n - a) * (1.0 - a))
}

/// `(2N - 1 - alpha) alpha^2 beta^2 / (2 (N - alpha)^2 (1 - alpha))`.
pub fn transparent_investor_gain(params: &GameParams) -> f64 {
    let (a, b, n) = (params.alpha(), params.beta(), params.n());
    (2.0 * n - 1.0 - a) * a * a * b * b / (2.0 * (n - a) * (n - a) * (1.0 - a))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    Competitive,
    TransparentOligopoly,
    CheapTalkOligopoly,
}

impl ProfileKind {
    pub fn name(self) -> &'static str {
        match self {
            ProfileKind::Competitive => "competitive",
            ProfileKind::TransparentOligopoly => "transparent",
            ProfileKind::CheapTalkOligopoly => "cheap_talk",
        }
    }
}

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()))
}

pub fn classify_profile(profile: &StrategyProfile, params: &GameParams) -> Result<ProfileKind> {
    let equilibrium_bias = investment_bias(params, profile.banker);
    match &profile.communication {
        Communication::FullRevelation
            if profile.investment_bias == 0.0 && profile.banker == params.unbiased_banker() =>
        {
            Ok(ProfileKind::Competitive)
        }
        Communication::FullRevelation if same(profile.investment_bias, equilibrium_bias) => {
            Ok(ProfileKind::TransparentOligopoly)
        }
        Communication::Partition(p)
            if same(profile.investment_bias, equilibrium_bias) && same(p.phi1(), params.phi1()) =>
        {
            Ok(ProfileKind::CheapTalkOligopoly)
        }
        _ => Err(Error::UnknownProfileKind),
    }
}

/// Closed-form report for a competitive, transparent or cheap-talk profile.
///
/// Cheap-talk profiles use the residual variance of their own partition.
pub fn profile_welfare_report(profile: &StrategyProfile, params: &GameParams) -> Result<WelfareReport> {
    Ok(match classify_profile(profile, params)? {
        ProfileKind::Competitive => competitive_values(params),
        ProfileKind::TransparentOligopoly => transparent_oligopoly_welfare(params, profile.banker),
        ProfileKind::CheapTalkOligopoly => {
            let residual = match &profile.communication {
                Communication::Partition(p) => residual_variance(p),
                Communication::FullRevelation => 0.0,
            };
            profile_values(params, profile.banker.value(), profile.investment_bias, residual)
        }
    })
}
