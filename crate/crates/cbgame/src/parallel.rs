//! Multi-threaded Monte Carlo driver.
//!
//! Blocks are computed in any order but merged in block-index order, so the
//! estimates are bit-identical to the sequential driver for every worker
//! count.

use cbgame_core::montecarlo::{block_count, merge_blocks, run_block, run_sequential, McEstimate, Replicate, RngSpec};
use rayon::prelude::*;
use rayon::ThreadPool;

use crate::error::{CliError, Result};

pub struct Driver {
    pool: Option<ThreadPool>,
}

impl Driver {
    pub fn new(workers: usize) -> Result<Self> {
        if workers == 0 {
            return Err(CliError::Config("--workers must be >= 1".into()));
        }
        if workers == 1 {
            return Ok(Self { pool: None });
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| CliError::Internal(e.to_string()))?;
        Ok(Self { pool: Some(pool) })
    }

    pub fn workers(&self) -> usize {
        self.pool.as_ref().map_or(1, |p| p.current_num_threads())
    }

    pub fn run<R: Replicate + ?Sized>(&self, model: &R, replications: u64, rng: RngSpec) -> Vec<McEstimate> {
        let Some(pool) = &self.pool else {
            return run_sequential(model, replications, rng);
        };
        let blocks: Vec<_> = pool.install(|| {
            (0..block_count(replications))
                .into_par_iter()
                .map(|b| run_block(model, rng.master_seed, b, replications))
                .collect()
        });
        merge_blocks(model.outputs(), blocks)
            .iter()
            .map(|a| a.estimate(rng))
            .collect()
    }
}
