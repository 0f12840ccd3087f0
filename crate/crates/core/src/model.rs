//! Game primitives: parameters, shocks, stage payoffs and the central bank's
//! optimal rate.
//!
//! Only the quadratic specification is represented. Investor payoffs are
//! `-(x_i - r)^2 / 2 - beta * r`, and the bank's loss with market weight
//! `alpha_tilde` is
//! `(1 - alpha_tilde)(r - omega)^2 / 2 + alpha_tilde / (2N) * sum_i (r - x_i)^2`.
//! All investors carry the same weight `1/N`.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Primitive parameters of one game instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GameParams {
    alpha: f64,
    beta: f64,
    n_investors: u32,
    phi1: f64,
    phi2: f64,
}

impl GameParams {
    pub fn new(alpha: f64, beta: f64, n_investors: u32, phi1: f64, phi2: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::param("alpha", "lie in (0,1)"));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::param("beta", "be finite and > 0"));
        }
        if n_investors < 1 {
            return Err(Error::param("n_investors", "be an integer >= 1"));
        }
        if !(phi1 > 0.0 && phi1.is_finite()) {
            return Err(Error::param("phi1", "be finite and > 0"));
        }
        if !(phi2 > 0.0 && phi2.is_finite()) {
            return Err(Error::param("phi2", "be finite and > 0"));
        }
        Ok(Self {
            alpha,
            beta,
            n_investors,
            phi1,
            phi2,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn n_investors(&self) -> u32 {
        self.n_investors
    }

    /// `N` as a float, for use in formulas.
    pub fn n(&self) -> f64 {
        f64::from(self.n_investors)
    }

    pub fn phi1(&self) -> f64 {
        self.phi1
    }

    pub fn phi2(&self) -> f64 {
        self.phi2
    }

    /// Prior variance of the first shock, `phi1^2 / 3`.
    pub fn var1(&self) -> f64 {
        self.phi1 * self.phi1 / 3.0
    }

    /// Prior variance of the second shock, `phi2^2 / 3`.
    pub fn var2(&self) -> f64 {
        self.phi2 * self.phi2 / 3.0
    }

    /// The society's own weight as a banker weight.
    pub fn unbiased_banker(&self) -> BankerWeight {
        BankerWeight(self.alpha)
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::new(alpha, self.beta, self.n_investors, self.phi1, self.phi2)
    }

    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        Self::new(self.alpha, beta, self.n_investors, self.phi1, self.phi2)
    }

    pub fn with_n_investors(&self, n: u32) -> Result<Self> {
        Self::new(self.alpha, self.beta, n, self.phi1, self.phi2)
    }

    pub fn with_phi1(&self, phi1: f64) -> Result<Self> {
        Self::new(self.alpha, self.beta, self.n_investors, phi1, self.phi2)
    }

    pub fn with_phi2(&self, phi2: f64) -> Result<Self> {
        Self::new(self.alpha, self.beta, self.n_investors, self.phi1, phi2)
    }
}

/// Market-stability weight of the (possibly delegated) central banker.
///
/// The weight 1 is excluded: the induced investment bias diverges there.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct BankerWeight(f64);

impl BankerWeight {
    pub fn new(alpha_tilde: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&alpha_tilde) {
            return Err(Error::param("alpha_tilde", "lie in [0,1)"));
        }
        Ok(Self(alpha_tilde))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// One realisation of the two shocks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShockPair {
    pub omega1: f64,
    pub omega2: f64,
}

impl ShockPair {
    pub fn new(omega1: f64, omega2: f64, params: &GameParams) -> Result<Self> {
        if !(omega1.abs() <= params.phi1()) {
            return Err(Error::param("omega1", "lie in [-phi1, phi1]"));
        }
        if !(omega2.abs() <= params.phi2()) {
            return Err(Error::param("omega2", "lie in [-phi2, phi2]"));
        }
        Ok(Self { omega1, omega2 })
    }

    /// The economy-stabilising rate `omega1 + omega2`.
    pub fn omega(&self) -> f64 {
        self.omega1 + self.omega2
    }
}

/// Investment positions of the `N` systemic investors.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketState {
    positions: Vec<f64>,
    mean_position: f64,
}

impl MarketState {
    pub fn new(positions: Vec<f64>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::param("positions", "contain at least one investor"));
        }
        // summing in sorted order makes the mean invariant to permutations
        let mut sorted = positions.clone();
        sorted.sort_by(f64::total_cmp);
        let mean_position = sorted.iter().sum::<f64>() / sorted.len() as f64;
        Ok(Self {
            positions,
            mean_position,
        })
    }

    /// All `n` investors at the same position.
    pub fn symmetric(n: usize, position: f64) -> Result<Self> {
        Self::new(alloc::vec![position; n])
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn mean_position(&self) -> f64 {
        self.mean_position
    }
}

/// Stage payoff of investor `i` holding position `x_i` when the rate is `r`.
pub fn investor_payoff(x_i: f64, r: f64, beta: f64) -> f64 {
    let surprise = x_i - r;
    -0.5 * surprise * surprise - beta * r
}

/// The two terms of the bank's loss, `(conventional, readjustment)`.
pub fn cb_loss_terms(state: &MarketState, r: f64, omega: f64, weight: BankerWeight) -> (f64, f64) {
    let a = weight.value();
    let gap = r - omega;
    let conventional = 0.5 * (1.0 - a) * gap * gap;
    let n = state.positions.len() as f64;
    let sum_sq: f64 = state.positions.iter().map(|x| (r - x) * (r - x)).sum();
    let readjustment = a / (2.0 * n) * sum_sq;
    (conventional, readjustment)
}

/// Loss of a bank with weight `weight`. With the society weight this is the
/// welfare loss.
pub fn cb_loss(state: &MarketState, r: f64, omega: f64, weight: BankerWeight) -> f64 {
    let (conventional, readjustment) = cb_loss_terms(state, r, omega, weight);
    conventional + readjustment
}

/// [`cb_loss`] for the case where every investor holds `position`.
pub fn cb_loss_symmetric(position: f64, r: f64, omega: f64, weight: BankerWeight) -> f64 {
    let a = weight.value();
    let gap = r - omega;
    let readjust = r - position;
    0.5 * (1.0 - a) * gap * gap + 0.5 * a * readjust * readjust
}

/// The bank's optimal rate, `(1 - alpha_tilde) * omega + alpha_tilde * mean_position`.
///
/// The loss depends on positions only through their mean, so this is the
/// unique minimiser for any position profile.
pub fn policy_rule(omega: f64, mean_position: f64, weight: BankerWeight) -> f64 {
    let a = weight.value();
    (1.0 - a) * omega + a * mean_position
}

/// Slope of the optimal rate in the second shock, `1 - alpha_tilde`.
///
/// Rejects the boundary weight 0, where the bank reacts one-for-one.
pub fn underreaction_slope(weight: BankerWeight) -> Result<f64> {
    let a = weight.value();
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::BoundaryWeight { alpha_tilde: a });
    }
    let slope = 1.0 - a;
    debug_assert!(slope > 0.0 && slope < 1.0);
    Ok(slope)
}

/// Forward difference of [`policy_rule`] in `omega` with step `h`.
pub fn underreaction_finite_difference(
    omega: f64,
    mean_position: f64,
    weight: BankerWeight,
    h: f64,
) -> f64 {
    (policy_rule(omega + h, mean_position, weight) - policy_rule(omega, mean_position, weight)) / h
}
