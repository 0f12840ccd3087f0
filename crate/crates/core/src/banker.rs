//! Delegation to a central banker with weight `alpha_tilde`, and
//! comparative statics.
//!
//! Society keeps its own weight `alpha` when evaluating outcomes, while the
//! bias, the partition and the rate rule all follow the banker's weight.

use alloc::vec::Vec;
use core::str::FromStr;

use crate::cheap_talk::{
    max_partitions, residual_variance_closed_form, PartitionBound, FULL_REVELATION_BIAS,
};
use crate::error::{Error, Result};
use crate::model::{BankerWeight, GameParams};
use crate::optimize::{bisect_sign_change, golden_section_max};
use crate::static_game::{bias_for, investment_bias};
use crate::welfare::{
    cheap_talk_welfare, competitive_values, transparent_oligopoly_welfare, variance_weight,
};

const TOLERANCE: f64 = 1e-10;
const TRANSITION_TOLERANCE: f64 = 1e-12;
/// Pieces searched one by one before the remainder is searched as a whole.
const MAX_PIECES: usize = 100_000;
const MIN_PIECE_START: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DelegationMode {
    Transparent,
    CheapTalk,
}

impl DelegationMode {
    pub fn name(self) -> &'static str {
        match self {
            DelegationMode::Transparent => "transparent",
            DelegationMode::CheapTalk => "cheap_talk",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelegationSolution {
    pub alpha_tilde_star: f64,
    pub society_welfare: f64,
    pub market_payoff: f64,
    pub mode: DelegationMode,
}

fn weight(alpha_tilde: f64) -> BankerWeight {
    BankerWeight::new(alpha_tilde).expect("search stays inside [0, alpha]")
}

fn d_abs(params: &GameParams, alpha_tilde: f64) -> f64 {
    -bias_for(alpha_tilde, params.beta(), params.n())
}

/// Society welfare under transparency with banker weight `alpha_tilde`.
pub fn transparent_objective(params: &GameParams, alpha_tilde: f64) -> f64 {
    let b = d_abs(params, alpha_tilde);
    -0.5 * variance_weight(params.alpha(), alpha_tilde) * (params.var2() + b * b)
}

/// Derivative of [`transparent_objective`] in `alpha_tilde`.
pub fn transparent_objective_derivative(params: &GameParams, alpha_tilde: f64) -> f64 {
    let (a, beta, n) = (params.alpha(), params.beta(), params.n());
    let t = alpha_tilde;
    let b = -d_abs(params, t);
    let db = -(n - t * t) * beta / ((1.0 - t) * (1.0 - t) * (n - t) * (n - t));
    (a - t) * (params.var2() + b * b) - variance_weight(a, t) * b * db
}

/// Society welfare under the most informative partition for `alpha_tilde`.
pub fn cheap_talk_objective(params: &GameParams, alpha_tilde: f64) -> f64 {
    cheap_talk_welfare(params, weight(alpha_tilde)).welfare
}

/// Objective with the cell count held at `p`; continuous across the point
/// where `p` cells stop being feasible.
fn piece_objective(params: &GameParams, alpha_tilde: f64, p: usize) -> f64 {
    let b = d_abs(params, alpha_tilde);
    let residual = if b < FULL_REVELATION_BIAS {
        0.0
    } else {
        residual_variance_closed_form(p, params.phi1(), b)
    };
    -0.5 * variance_weight(params.alpha(), alpha_tilde) * (params.var2() + b * b + residual)
}

fn solution(params: &GameParams, alpha_tilde: f64, mode: DelegationMode) -> DelegationSolution {
    let w = weight(alpha_tilde);
    let report = match mode {
        DelegationMode::Transparent => transparent_oligopoly_welfare(params, w),
        DelegationMode::CheapTalk => cheap_talk_welfare(params, w),
    };
    DelegationSolution {
        alpha_tilde_star: alpha_tilde,
        society_welfare: report.welfare,
        market_payoff: report.investor_payoff,
        mode,
    }
}

/// Golden-section search of the transparent objective on `[0, alpha]`.
pub fn optimal_banker_transparent(params: &GameParams) -> Result<DelegationSolution> {
    let best = golden_section_max(|t| transparent_objective(params, t), 0.0, params.alpha(), TOLERANCE)?;
    Ok(solution(params, best.argmax, DelegationMode::Transparent))
}

/// The banker weight at which `p` cells stop being feasible, i.e. where
/// `d_abs(alpha_tilde) = phi1 / (p (p - 1))`. Returns the lower end of the
/// final bracket.
fn transition(params: &GameParams, p: usize, hi: f64) -> Result<f64> {
    let target = params.phi1() / (p as f64 * (p as f64 - 1.0));
    let (lo, _) = bisect_sign_change(|t| Ok(d_abs(params, t) - target), 0.0, hi, TRANSITION_TOLERANCE)?;
    Ok(lo)
}

/// Searches `[0, alpha]` piece by piece, where each piece is a maximal
/// interval with a constant number of cells.
///
/// Pieces are visited from `alpha` leftward. The cheap-talk objective never
/// exceeds the transparent one, which increases up to its own optimum, so
/// once a piece ends left of that optimum with a transparent value below the
/// best found, no piece further left can win.
///
/// The maximiser is not always interior: when residual variance grows fast
/// in the banker weight, the conventional banker `alpha_tilde = 0` with full
/// revelation wins, and it can also lie right of the transparent optimum.
pub fn optimal_banker_cheap_talk(params: &GameParams) -> Result<DelegationSolution> {
    let alpha = params.alpha();
    let tr_star = optimal_banker_transparent(params)?.alpha_tilde_star;
    let mut p = match max_partitions(params, params.unbiased_banker()) {
        PartitionBound::Unbounded => {
            let tr = optimal_banker_transparent(params)?;
            return Ok(solution(params, tr.alpha_tilde_star, DelegationMode::CheapTalk));
        }
        PartitionBound::Finite(p) => p,
    };
    let mut upper = alpha;
    let mut best_at = alpha;
    let mut best = f64::NEG_INFINITY;
    let mut pieces = 0;
    loop {
        let next = p + 1;
        let target = params.phi1() / (next as f64 * p as f64);
        if pieces >= MAX_PIECES || upper < MIN_PIECE_START || d_abs(params, upper) <= target {
            // pieces are now too narrow to separate; search the rest whole
            let m = golden_section_max(|t| cheap_talk_objective(params, t), 0.0, upper, TOLERANCE)?;
            if m.value >= best {
                best_at = m.argmax;
            }
            break;
        }
        let lower = transition(params, next, upper)?;
        let m = golden_section_max(|t| piece_objective(params, t, p), lower, upper, TOLERANCE)?;
        // moving left, ties favour the smaller weight
        if m.value >= best {
            best = m.value;
            best_at = m.argmax;
        }
        if upper <= tr_star && transparent_objective(params, lower) < best {
            break;
        }
        upper = lower;
        p = next;
        pieces += 1;
    }
    // the conventional banker reveals everything; ties favour it
    if cheap_talk_objective(params, 0.0) >= cheap_talk_objective(params, best_at) {
        best_at = 0.0;
    }
    Ok(solution(params, best_at, DelegationMode::CheapTalk))
}

/// Outcome of the single-investor, `phi1 = 1/2` case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BabblingMonopolyReport {
    /// `alpha beta / (1 - alpha)^2`.
    pub ratio: f64,
    /// The unbiased banker's partition is a single cell.
    pub babbling_under_unbiased: bool,
    /// Investor payoff with an unbiased banker.
    pub eu_unbiased: f64,
    /// Investor payoff with a banker who ignores markets.
    pub eu_conventional: f64,
    /// The investor prefers the banker who ignores markets.
    pub prefers_kitish: bool,
}

pub fn babbling_monopoly_check(params: &GameParams) -> Result<BabblingMonopolyReport> {
    if params.n_investors() != 1 {
        return Err(Error::Unsupported("the check needs exactly one investor"));
    }
    if params.phi1() != 0.5 {
        return Err(Error::Unsupported("the check needs phi1 = 1/2"));
    }
    let a = params.alpha();
    let ratio = a * params.beta() / ((1.0 - a) * (1.0 - a));
    let eu_unbiased = cheap_talk_welfare(params, params.unbiased_banker()).investor_payoff;
    let eu_conventional = -0.5 * params.var2();
    Ok(BabblingMonopolyReport {
        ratio,
        babbling_under_unbiased: ratio > 0.25,
        eu_unbiased,
        eu_conventional,
        prefers_kitish: eu_conventional > eu_unbiased,
    })
}

/// Parameter varied by a comparative-statics scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanDimension {
    Alpha,
    Beta,
    N,
    Phi1,
    Phi2,
}

impl ScanDimension {
    pub fn name(self) -> &'static str {
        match self {
            ScanDimension::Alpha => "alpha",
            ScanDimension::Beta => "beta",
            ScanDimension::N => "N",
            ScanDimension::Phi1 => "phi1",
            ScanDimension::Phi2 => "phi2",
        }
    }

    /// `params` with this dimension set to `value`.
    pub fn apply(self, params: &GameParams, value: f64) -> Result<GameParams> {
        match self {
            ScanDimension::Alpha => params.with_alpha(value),
            ScanDimension::Beta => params.with_beta(value),
            ScanDimension::N => {
                if !(value >= 1.0 && value <= u32::MAX as f64 && libm::trunc(value) == value) {
                    return Err(Error::param("n_investors", "be an integer >= 1"));
                }
                params.with_n_investors(value as u32)
            }
            ScanDimension::Phi1 => params.with_phi1(value),
            ScanDimension::Phi2 => params.with_phi2(value),
        }
    }
}

impl FromStr for ScanDimension {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alpha" => Ok(ScanDimension::Alpha),
            "beta" => Ok(ScanDimension::Beta),
            "N" | "n" | "n_investors" => Ok(ScanDimension::N),
            "phi1" => Ok(ScanDimension::Phi1),
            "phi2" => Ok(ScanDimension::Phi2),
            _ => Err(Error::InvalidDimension),
        }
    }
}

/// Direction of a column along the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trend {
    Increasing,
    Decreasing,
    NonDecreasing,
    NonIncreasing,
    Constant,
    Mixed,
}

impl Trend {
    pub fn name(self) -> &'static str {
        match self {
            Trend::Increasing => "increasing",
            Trend::Decreasing => "decreasing",
            Trend::NonDecreasing => "non_decreasing",
            Trend::NonIncreasing => "non_increasing",
            Trend::Constant => "constant",
            Trend::Mixed => "mixed",
        }
    }

    pub fn of(values: &[f64]) -> Trend {
        let (mut up, mut down, mut flat) = (false, false, false);
        for w in values.windows(2) {
            if w[1] > w[0] {
                up = true;
            } else if w[1] < w[0] {
                down = true;
            } else {
                flat = true;
            }
        }
        match (up, down, flat) {
            (true, true, _) => Trend::Mixed,
            (true, false, false) => Trend::Increasing,
            (true, false, true) => Trend::NonDecreasing,
            (false, true, false) => Trend::Decreasing,
            (false, true, true) => Trend::NonIncreasing,
            (false, false, _) => Trend::Constant,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow {
    pub value: f64,
    pub params: GameParams,
    pub bias: f64,
    pub max_partitions: PartitionBound,
    pub residual_variance: f64,
    pub welfare_competitive: f64,
    pub welfare_transparent: f64,
    pub welfare_cheap_talk: f64,
    pub alpha_tilde_transparent: f64,
    pub alpha_tilde_cheap_talk: f64,
}

/// Columns whose monotonicity is reported, in table order.
pub const SCAN_COLUMNS: [&str; 8] = [
    "bias",
    "max_partitions",
    "residual_variance",
    "W_competitive",
    "W_transparent",
    "W_cheap_talk",
    "alpha_tilde_transparent",
    "alpha_tilde_cheap_talk",
];

impl ScanRow {
    /// Values of [`SCAN_COLUMNS`]; an unbounded cell count is infinite.
    pub fn columns(&self) -> [f64; 8] {
        [
            self.bias,
            self.max_partitions.finite().map_or(f64::INFINITY, |p| p as f64),
            self.residual_variance,
            self.welfare_competitive,
            self.welfare_transparent,
            self.welfare_cheap_talk,
            self.alpha_tilde_transparent,
            self.alpha_tilde_cheap_talk,
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanTable {
    pub dimension: ScanDimension,
    pub rows: Vec<ScanRow>,
    /// One trend per entry of [`SCAN_COLUMNS`].
    pub trends: Vec<Trend>,
}

impl ScanTable {
    pub fn trend(&self, column: &str) -> Option<Trend> {
        SCAN_COLUMNS.iter().position(|c| *c == column).map(|i| self.trends[i])
    }
}

pub fn scan_row(params: &GameParams, value: f64) -> Result<ScanRow> {
    let w = params.unbiased_banker();
    Ok(ScanRow {
        value,
        params: *params,
        bias: investment_bias(params, w),
        max_partitions: max_partitions(params, w),
        residual_variance: cheap_talk_welfare(params, w).residual_variance,
        welfare_competitive: competitive_values(params).welfare,
        welfare_transparent: transparent_oligopoly_welfare(params, w).welfare,
        welfare_cheap_talk: cheap_talk_welfare(params, w).welfare,
        alpha_tilde_transparent: optimal_banker_transparent(params)?.alpha_tilde_star,
        alpha_tilde_cheap_talk: optimal_banker_cheap_talk(params)?.alpha_tilde_star,
    })
}

/// Parameter sets of a scan, validated before any solve.
pub fn scan_params(params: &GameParams, dimension: ScanDimension, grid: &[f64]) -> Result<Vec<GameParams>> {
    grid.iter()
        .enumerate()
        .map(|(index, &value)| {
            dimension
                .apply(params, value)
                .map_err(|_| Error::InvalidGridValue { index, value })
        })
        .collect()
}

pub fn scan_table(dimension: ScanDimension, rows: Vec<ScanRow>) -> ScanTable {
    let trends = (0..SCAN_COLUMNS.len())
        .map(|c| {
            let column: Vec<f64> = rows.iter().map(|r| r.columns()[c]).collect();
            Trend::of(&column)
        })
        .collect();
    ScanTable {
        dimension,
        rows,
        trends,
    }
}

pub fn comparative_statics_scan(params: &GameParams, dimension: ScanDimension, grid: &[f64]) -> Result<ScanTable> {
    let sets = scan_params(params, dimension, grid)?;
    let rows = sets
        .iter()
        .zip(grid)
        .map(|(p, &v)| scan_row(p, v))
        .collect::<Result<Vec<_>>>()?;
    Ok(scan_table(dimension, rows))
}
