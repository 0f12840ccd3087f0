//! Seeded Monte Carlo play of strategy profiles.
//!
//! Replication `r` draws from ChaCha8 keyed by the master seed with stream
//! number `r`, so every replication is reproducible on its own. Replications
//! are grouped in fixed blocks of [`BLOCK_SIZE`]; each block is summarised by
//! Welford accumulators and blocks are merged in index order. Any driver that
//! evaluates blocks independently and merges them in order (see
//! [`merge_blocks`]) therefore returns bit-identical estimates.

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::model::{cb_loss_symmetric, investor_payoff, policy_rule, GameParams};
use crate::static_game::{Communication, StrategyProfile};

pub const BLOCK_SIZE: u64 = 4096;

pub const RNG_ALGORITHM: &str = "chacha8-stream-per-replication";

/// Generator identity recorded with every estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngSpec {
    pub algorithm_name: &'static str,
    pub master_seed: u64,
}

impl RngSpec {
    pub fn new(master_seed: u64) -> Self {
        Self {
            algorithm_name: RNG_ALGORITHM,
            master_seed,
        }
    }
}

/// The generator for replication `index`.
pub fn replication_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// A uniform draw on `[-half_width, half_width)` from the top 53 bits.
pub fn uniform_symmetric(rng: &mut impl RngCore, half_width: f64) -> f64 {
    let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    half_width * (2.0 * u - 1.0)
}

/// Streaming mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Accumulator {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Accumulator {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Accumulator) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = self.count + other.count;
        let delta = other.mean - self.mean;
        let weight = other.count as f64 / n as f64;
        self.mean += delta * weight;
        self.m2 += other.m2 + delta * delta * self.count as f64 * weight;
        self.count = n;
    }

    pub fn estimate(&self, rng: RngSpec) -> McEstimate {
        let stderr = if self.count > 1 {
            let var = self.m2 / (self.count - 1) as f64;
            libm::sqrt(var / self.count as f64)
        } else {
            0.0
        };
        McEstimate {
            mean: self.mean,
            stderr,
            replications: self.count,
            seed: rng.master_seed,
            algorithm: rng.algorithm_name,
        }
    }
}

/// A Monte Carlo estimate with its provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub replications: u64,
    pub seed: u64,
    pub algorithm: &'static str,
}

impl McEstimate {
    /// Whether `value` lies within `k` standard errors of the mean.
    pub fn covers(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.stderr
    }
}

/// One replication of an experiment producing a fixed number of outputs.
pub trait Replicate: Sync {
    fn outputs(&self) -> usize;
    fn replicate(&self, rng: &mut ChaCha8Rng, out: &mut [f64]);
}

pub fn block_count(replications: u64) -> u64 {
    replications.div_ceil(BLOCK_SIZE)
}

/// Accumulators for block `block` of a run with `replications` in total.
pub fn run_block<R: Replicate + ?Sized>(model: &R, master_seed: u64, block: u64, replications: u64) -> Vec<Accumulator> {
    let k = model.outputs();
    let mut acc = alloc::vec![Accumulator::default(); k];
    let mut out = alloc::vec![0.0; k];
    let start = block * BLOCK_SIZE;
    let end = (start + BLOCK_SIZE).min(replications);
    for index in start..end {
        let mut rng = replication_rng(master_seed, index);
        model.replicate(&mut rng, &mut out);
        for (a, &x) in acc.iter_mut().zip(&out) {
            a.push(x);
        }
    }
    acc
}

/// Merges block accumulators in the order given.
pub fn merge_blocks<I>(outputs: usize, blocks: I) -> Vec<Accumulator>
where
    I: IntoIterator<Item = Vec<Accumulator>>,
{
    let mut total = alloc::vec![Accumulator::default(); outputs];
    for block in blocks {
        for (t, b) in total.iter_mut().zip(&block) {
            t.merge(b);
        }
    }
    total
}

/// Single-threaded driver.
pub fn run_sequential<R: Replicate + ?Sized>(model: &R, replications: u64, rng: RngSpec) -> Vec<McEstimate> {
    let blocks = (0..block_count(replications)).map(|b| run_block(model, rng.master_seed, b, replications));
    merge_blocks(model.outputs(), blocks)
        .iter()
        .map(|a| a.estimate(rng))
        .collect()
}

/// Play of a single profile. Outputs, in order: welfare (negative society
/// loss), investor payoff, rate distortion against the competitive rate, and
/// squared error of the posterior mean.
#[derive(Debug, Clone)]
pub struct ProfilePlay {
    pub profile: StrategyProfile,
    pub params: GameParams,
}

pub const WELFARE: usize = 0;
pub const INVESTOR_PAYOFF: usize = 1;
pub const DISTORTION: usize = 2;
pub const RESIDUAL: usize = 3;

impl ProfilePlay {
    fn play(&self, omega1: f64, omega2: f64) -> [f64; 4] {
        let mean = match &self.profile.communication {
            Communication::FullRevelation => omega1,
            Communication::Partition(p) => p.cell_mean(p.cell_of(omega1)),
        };
        let position = mean + self.profile.investment_bias;
        let omega = omega1 + omega2;
        let r = policy_rule(omega, position, self.profile.banker);
        let society = self.params.unbiased_banker();
        let competitive = omega1 + (1.0 - self.params.alpha()) * omega2;
        [
            -cb_loss_symmetric(position, r, omega, society),
            investor_payoff(position, r, self.params.beta()),
            r - competitive,
            (omega1 - mean) * (omega1 - mean),
        ]
    }
}

fn draw_shocks(rng: &mut ChaCha8Rng, params: &GameParams) -> (f64, f64) {
    let omega1 = uniform_symmetric(rng, params.phi1());
    let omega2 = uniform_symmetric(rng, params.phi2());
    (omega1, omega2)
}

impl Replicate for ProfilePlay {
    fn outputs(&self) -> usize {
        4
    }

    fn replicate(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) {
        let (omega1, omega2) = draw_shocks(rng, &self.params);
        out.copy_from_slice(&self.play(omega1, omega2));
    }
}

/// Two profiles on common shocks. Outputs the differences `alt - base` of
/// welfare and investor payoff.
#[derive(Debug, Clone)]
pub struct PairedPlay {
    pub base: ProfilePlay,
    pub alt: ProfilePlay,
}

impl Replicate for PairedPlay {
    fn outputs(&self) -> usize {
        2
    }

    fn replicate(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) {
        let (omega1, omega2) = draw_shocks(rng, &self.base.params);
        let b = self.base.play(omega1, omega2);
        let a = self.alt.play(omega1, omega2);
        out[0] = a[WELFARE] - b[WELFARE];
        out[1] = a[INVESTOR_PAYOFF] - b[INVESTOR_PAYOFF];
    }
}

/// Monte Carlo estimates for one profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McReport {
    pub welfare: McEstimate,
    pub investor_payoff: McEstimate,
    pub mean_distortion: McEstimate,
    pub residual_variance: McEstimate,
}

impl McReport {
    pub fn from_estimates(e: &[McEstimate]) -> Self {
        Self {
            welfare: e[WELFARE],
            investor_payoff: e[INVESTOR_PAYOFF],
            mean_distortion: e[DISTORTION],
            residual_variance: e[RESIDUAL],
        }
    }
}

pub fn run_monte_carlo(profile: &StrategyProfile, params: &GameParams, replications: u64, rng: RngSpec) -> McReport {
    let model = ProfilePlay {
        profile: profile.clone(),
        params: *params,
    };
    McReport::from_estimates(&run_sequential(&model, replications, rng))
}
