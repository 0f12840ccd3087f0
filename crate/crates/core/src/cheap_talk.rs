//! Partition (cheap-talk) equilibria of the announcement stage.
//!
//! Under the uniform prior and quadratic losses the bank can only credibly
//! announce which of finitely many intervals of `[-phi1, phi1]` contains the
//! first shock. Cell lengths grow by `4 * d_abs` from left to right, where
//! `d_abs` is the magnitude of the investment bias.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::{BankerWeight, GameParams};
use crate::static_game::{investment_bias, Communication, StrategyProfile};

/// Below this bias magnitude communication is treated as fully revealing.
pub const FULL_REVELATION_BIAS: f64 = 1e-12;

/// Largest partition that [`solve_partition`] will materialise.
pub const MAX_MATERIALIZED_CELLS: usize = 1 << 24;

/// Ordered cutoffs `-phi1 = a_0 < a_1 < ... < a_P = phi1`.
///
/// States on an interior cutoff belong to the cell on its right.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    cutoffs: Vec<f64>,
}

impl Partition {
    pub fn from_cutoffs(cutoffs: Vec<f64>) -> Result<Self> {
        if cutoffs.len() < 2 {
            return Err(Error::MalformedPartition("need at least two cutoffs"));
        }
        let phi1 = cutoffs[cutoffs.len() - 1];
        if !(phi1 > 0.0 && phi1.is_finite()) || cutoffs[0] != -phi1 {
            return Err(Error::MalformedPartition("endpoints must be -phi1 and phi1"));
        }
        if cutoffs.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::MalformedPartition("cutoffs must be strictly increasing"));
        }
        Ok(Self { cutoffs })
    }

    /// The single-cell (uninformative) partition.
    pub fn babbling(phi1: f64) -> Self {
        Self {
            cutoffs: alloc::vec![-phi1, phi1],
        }
    }

    pub fn cutoffs(&self) -> &[f64] {
        &self.cutoffs
    }

    pub fn cell_count(&self) -> usize {
        self.cutoffs.len() - 1
    }

    pub fn phi1(&self) -> f64 {
        self.cutoffs[self.cutoffs.len() - 1]
    }

    pub fn is_babbling(&self) -> bool {
        self.cell_count() == 1
    }

    pub fn lengths(&self) -> Vec<f64> {
        self.cutoffs.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Index of the cell containing `omega1`. States outside the support map
    /// to the nearest cell.
    pub fn cell_of(&self, omega1: f64) -> usize {
        let interior = &self.cutoffs[1..self.cutoffs.len() - 1];
        interior.partition_point(|&a| a <= omega1)
    }

    pub fn cell_mean(&self, k: usize) -> f64 {
        0.5 * (self.cutoffs[k] + self.cutoffs[k + 1])
    }

    /// Conditional variance of the uniform first shock within cell `k`.
    pub fn cell_variance(&self, k: usize) -> f64 {
        let l = self.cutoffs[k + 1] - self.cutoffs[k];
        l * l / 12.0
    }
}

/// Bias normalised to the unit interval, `b = d_abs / (2 phi1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizedBias {
    pub b: f64,
}

pub fn normalized_bias(params: &GameParams, weight: BankerWeight) -> NormalizedBias {
    NormalizedBias {
        b: investment_bias(params, weight).abs() / (2.0 * params.phi1()),
    }
}

/// The affine map `t(x) = (x + phi1 + d_abs) / (2 phi1)` onto the unit
/// interval normalisation of the sender-receiver game.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsTransform {
    phi1: f64,
    d_abs: f64,
}

impl CsTransform {
    pub fn new(params: &GameParams, weight: BankerWeight) -> Self {
        Self {
            phi1: params.phi1(),
            d_abs: investment_bias(params, weight).abs(),
        }
    }

    pub fn apply(&self, x: f64) -> f64 {
        (x + self.phi1 + self.d_abs) / (2.0 * self.phi1)
    }

    pub fn invert(&self, t: f64) -> f64 {
        2.0 * self.phi1 * t - self.phi1 - self.d_abs
    }
}

pub fn cs_transform(x: f64, params: &GameParams, weight: BankerWeight) -> f64 {
    CsTransform::new(params, weight).apply(x)
}

/// Maximal number of partition cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartitionBound {
    Finite(usize),
    /// The bias vanishes and full revelation is an equilibrium.
    Unbounded,
}

impl PartitionBound {
    pub fn finite(self) -> Option<usize> {
        match self {
            PartitionBound::Finite(p) => Some(p),
            PartitionBound::Unbounded => None,
        }
    }
}

pub fn max_partitions(params: &GameParams, weight: BankerWeight) -> PartitionBound {
    max_partitions_for_bias(params.phi1(), investment_bias(params, weight).abs())
}

/// Largest `P` with `P (P - 1) < phi1 / d_abs`.
pub fn max_partitions_for_bias(phi1: f64, d_abs: f64) -> PartitionBound {
    if d_abs < FULL_REVELATION_BIAS {
        return PartitionBound::Unbounded;
    }
    let ratio = phi1 / d_abs;
    let guess = libm::ceil(0.5 * (libm::sqrt(1.0 + 4.0 * ratio) - 1.0));
    let mut p = if guess >= 1.0 { guess as usize } else { 1 };
    // the formula is exact in real arithmetic; fix rounding at the edges
    while p > 1 && feasible_product(p) >= ratio {
        p -= 1;
    }
    while feasible_product(p + 1) < ratio {
        p += 1;
    }
    PartitionBound::Finite(p)
}

fn feasible_product(p: usize) -> f64 {
    let p = p as f64;
    p * (p - 1.0)
}

/// Length of the first cell of a `p`-cell equilibrium.
fn first_length(p: usize, phi1: f64, d_abs: f64) -> f64 {
    let pf = p as f64;
    (2.0 * phi1 - 2.0 * pf * (pf - 1.0) * d_abs) / pf
}

pub fn solve_partition(p: usize, params: &GameParams, weight: BankerWeight) -> Result<Partition> {
    solve_partition_for_bias(p, params.phi1(), investment_bias(params, weight).abs())
}

/// The `p`-cell equilibrium partition for bias magnitude `d_abs`.
pub fn solve_partition_for_bias(p: usize, phi1: f64, d_abs: f64) -> Result<Partition> {
    let max = max_partitions_for_bias(phi1, d_abs).finite();
    if p == 0 {
        return Err(Error::InfeasiblePartition { p, max });
    }
    if p == 1 {
        return Ok(Partition::babbling(phi1));
    }
    if feasible_product(p) * d_abs >= phi1 {
        return Err(Error::InfeasiblePartition { p, max });
    }
    if p > MAX_MATERIALIZED_CELLS {
        return Err(Error::Unsupported("partition has too many cells to materialise"));
    }
    let l1 = first_length(p, phi1, d_abs);
    let mut cutoffs = Vec::with_capacity(p + 1);
    for k in 0..p {
        let kf = k as f64;
        cutoffs.push(-phi1 + kf * l1 + 2.0 * kf * (kf - 1.0) * d_abs);
    }
    cutoffs.push(phi1);
    Partition::from_cutoffs(cutoffs)
}

/// Mean conditional variance of the first shock given the cell,
/// `sum_k (l_k / 2 phi1) (l_k^2 / 12)`.
pub fn residual_variance(partition: &Partition) -> f64 {
    let phi1 = partition.phi1();
    partition
        .cutoffs
        .windows(2)
        .map(|w| {
            let l = w[1] - w[0];
            l * l * l
        })
        .sum::<f64>()
        / (24.0 * phi1)
}

/// [`residual_variance`] of the `p`-cell equilibrium without building it.
pub fn residual_variance_closed_form(p: usize, phi1: f64, d_abs: f64) -> f64 {
    let pf = p as f64;
    let l1 = first_length(p, phi1, d_abs);
    let step = 4.0 * d_abs;
    // power sums of j = 0..p-1
    let s1 = pf * (pf - 1.0) / 2.0;
    let s2 = (pf - 1.0) * pf * (2.0 * pf - 1.0) / 6.0;
    let s3 = s1 * s1;
    let cubes = pf * l1 * l1 * l1
        + 3.0 * l1 * l1 * step * s1
        + 3.0 * l1 * step * step * s2
        + step * step * step * s3;
    cubes / (24.0 * phi1)
}

/// Residual variance of the most informative equilibrium; zero when full
/// revelation is attainable.
pub fn most_informative_residual_variance(params: &GameParams, weight: BankerWeight) -> f64 {
    let d_abs = investment_bias(params, weight).abs();
    match max_partitions_for_bias(params.phi1(), d_abs) {
        PartitionBound::Unbounded => 0.0,
        PartitionBound::Finite(p) => residual_variance_closed_form(p, params.phi1(), d_abs),
    }
}

/// Largest gap, over interior cutoffs, between the bank's stage loss from
/// inducing the left-cell and the right-cell positions at the cutoff state.
///
/// Induced positions are cell means shifted down by `d_abs`; losses are in
/// units of the squared distance between mean position and state.
pub fn verify_partition(partition: &Partition, params: &GameParams, weight: BankerWeight) -> f64 {
    let d_abs = investment_bias(params, weight).abs();
    let mut worst = 0.0f64;
    for k in 1..partition.cell_count() {
        let a = partition.cutoffs[k];
        let left = partition.cell_mean(k - 1) - d_abs - a;
        let right = partition.cell_mean(k) - d_abs - a;
        worst = worst.max((left * left - right * right).abs());
    }
    worst
}

/// The maximal-`P` equilibrium profile for banker weight `weight`.
pub fn most_informative_profile(params: &GameParams, weight: BankerWeight) -> Result<StrategyProfile> {
    let communication = match max_partitions(params, weight) {
        PartitionBound::Unbounded => Communication::FullRevelation,
        PartitionBound::Finite(p) => Communication::Partition(solve_partition(p, params, weight)?),
    };
    Ok(StrategyProfile {
        banker: weight,
        communication,
        investment_bias: investment_bias(params, weight),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(a: f64, b: f64, n: u32, phi1: f64) -> GameParams {
        GameParams::new(a, b, n, phi1, 1.0).unwrap()
    }

    /// Forward recursion from a trial first cell, independent of the closed
    /// form: largest P whose cells fit with positive first length.
    fn brute_force_max(phi1: f64, d_abs: f64) -> usize {
        let mut best = 1;
        for p in 2..200 {
            // with l1 -> 0+ the p cells span 2 p (p - 1) d_abs
            let mut span = 0.0;
            let mut l = 0.0;
            for _ in 0..p {
                span += l;
                l += 4.0 * d_abs;
            }
            if span < 2.0 * phi1 {
                best = p;
            }
        }
        best
    }

    #[test]
    fn max_partition_examples() {
        let params = p(0.5, 1.0, 1, 0.5);
        assert_eq!(max_partitions(&params, params.unbiased_banker()), PartitionBound::Finite(1));
        let params = p(0.2, 0.5, 5, 1.0);
        let d = investment_bias(&params, params.unbiased_banker()).abs();
        assert_eq!(max_partitions(&params, params.unbiased_banker()), PartitionBound::Finite(6));
        assert_eq!(brute_force_max(1.0, d), 6);
        assert_eq!(
            max_partitions(&params, BankerWeight::new(0.0).unwrap()),
            PartitionBound::Unbounded
        );
    }

    #[test]
    fn solve_partition_examples() {
        let part = solve_partition_for_bias(1, 1.0, 0.3).unwrap();
        assert_eq!(part.cutoffs(), &[-1.0, 1.0]);
        let part = solve_partition_for_bias(2, 1.0, 0.1).unwrap();
        assert!((part.cutoffs()[1] + 0.2).abs() < 1e-14);
        assert!(matches!(
            solve_partition_for_bias(4, 1.0, 0.1),
            Err(Error::InfeasiblePartition { p: 4, .. })
        ));
    }

    #[test]
    fn residual_variance_examples() {
        assert!((residual_variance(&Partition::babbling(1.0)) - 1.0 / 3.0).abs() < 1e-15);
        let part = Partition::from_cutoffs(alloc::vec![-1.0, -0.2, 1.0]).unwrap();
        assert!((residual_variance(&part) - 0.093_333_333_333_333_33).abs() < 1e-12);

        let params = p(0.2, 0.5, 5, 1.0);
        let w = params.unbiased_banker();
        let part = solve_partition(6, &params, w).unwrap();
        let lengths = part.lengths();
        let l1 = 0.072_916_666_666_666_67;
        let step = 0.104_166_666_666_666_67;
        for (k, l) in lengths.iter().enumerate() {
            assert!((l - (l1 + step * k as f64)).abs() < 1e-12);
        }
        assert!((residual_variance(&part) - 0.017_171_223_958).abs() < 1e-9);
        assert!((most_informative_residual_variance(&params, w) - 0.017_171_223_958).abs() < 1e-9);
    }

    #[test]
    fn transform_examples() {
        let params = p(0.5, 1.0, 2, 1.0);
        let w = params.unbiased_banker();
        assert!((cs_transform(-1.0, &params, w) - 1.0 / 3.0).abs() < 1e-12);
        assert!((normalized_bias(&params, w).b - 1.0 / 3.0).abs() < 1e-12);
        let t = CsTransform::new(&params, w);
        assert!((t.invert(t.apply(0.123)) - 0.123).abs() < 1e-14);
    }

    #[test]
    fn verify_partition_flags_perturbation() {
        let params = p(0.2, 0.5, 5, 1.0);
        let w = params.unbiased_banker();
        let part = solve_partition(6, &params, w).unwrap();
        assert!(verify_partition(&part, &params, w) < 1e-10);
        let mut cut = part.cutoffs().to_vec();
        cut[3] += 0.01;
        let bad = Partition::from_cutoffs(cut).unwrap();
        assert!(verify_partition(&bad, &params, w) > 1e-4);
        assert_eq!(verify_partition(&Partition::babbling(1.0), &params, w), 0.0);
    }

    #[test]
    fn cell_lookup_ties_go_right() {
        let part = Partition::from_cutoffs(alloc::vec![-1.0, -0.2, 1.0]).unwrap();
        assert_eq!(part.cell_of(-0.2), 1);
        assert_eq!(part.cell_of(-0.2 - 1e-12), 0);
        assert_eq!(part.cell_of(1.0), 1);
        assert_eq!(part.cell_of(-1.0), 0);
        assert_eq!(part.cell_of(-7.0), 0);
        assert_eq!(part.cell_of(7.0), 1);
    }

    #[test]
    fn rejects_malformed_cutoffs() {
        assert!(Partition::from_cutoffs(alloc::vec![-1.0]).is_err());
        assert!(Partition::from_cutoffs(alloc::vec![-1.0, 0.5, 0.2, 1.0]).is_err());
        assert!(Partition::from_cutoffs(alloc::vec![-0.9, 1.0]).is_err());
    }

    #[test]
    fn most_informative_profiles() {
        let params = p(0.5, 1.0, 1, 0.5);
        let prof = most_informative_profile(&params, params.unbiased_banker()).unwrap();
        assert_eq!(prof.cell_count(), Some(1));
        let params = p(0.2, 0.5, 5, 1.0);
        let prof = most_informative_profile(&params, params.unbiased_banker()).unwrap();
        assert_eq!(prof.cell_count(), Some(6));
        let mut last = 0;
        for n in [10, 100, 1000, 10_000] {
            let params = p(0.2, 0.5, n, 1.0);
            let c = max_partitions(&params, params.unbiased_banker()).finite().unwrap();
            assert!(c > last);
            last = c;
        }
    }

    proptest! {
        #[test]
        fn closed_form_cells_satisfy_recursion(
            phi1 in 0.1..5.0f64,
            d_abs in 0.001..0.5f64,
            pick in 0.0..1.0f64,
        ) {
            let max = max_partitions_for_bias(phi1, d_abs).finite().unwrap();
            prop_assert_eq!(max, brute_force_max(phi1, d_abs));
            let p = 1 + ((max as f64 - 1.0) * pick) as usize;
            let part = solve_partition_for_bias(p, phi1, d_abs).unwrap();
            let a = part.cutoffs();
            for k in 1..p {
                prop_assert!((a[k + 1] - (2.0 * a[k] - a[k - 1] + 4.0 * d_abs)).abs() < 1e-10);
            }
            prop_assert!(part.lengths().iter().all(|&l| l > 0.0));
            let direct = residual_variance(&part);
            let closed = residual_variance_closed_form(p, phi1, d_abs);
            prop_assert!((direct - closed).abs() < 1e-10 * (1.0 + direct));
            prop_assert!(solve_partition_for_bias(max + 1, phi1, d_abs).is_err());
        }

        #[test]
        fn informativeness_is_monotone(
            phi1 in 0.1..5.0f64,
            d_abs in 0.001..0.2f64,
        ) {
            let max = max_partitions_for_bias(phi1, d_abs).finite().unwrap();
            let mut last = f64::INFINITY;
            for p in 1..=max {
                let v = residual_variance_closed_form(p, phi1, d_abs);
                prop_assert!(v < last);
                last = v;
            }
            if max >= 2 {
                let v = residual_variance_closed_form(2, phi1, d_abs);
                let bigger = residual_variance_closed_form(2, phi1, d_abs * 1.01);
                prop_assert!(bigger > v);
            }
            let coarser = max_partitions_for_bias(phi1, d_abs * 1.5).finite().unwrap();
            prop_assert!(coarser <= max);
        }
    }
}
