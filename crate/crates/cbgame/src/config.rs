//! Scenario configuration files.
//!
//! A config is a JSON object with the five game parameters at the top level
//! and optional blocks for the commands that need more input:
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "alpha": 0.2, "beta": 0.5, "n_investors": 5, "phi1": 1.0, "phi2": 1.0,
//!   "banker": 0.1,
//!   "seed": 42,
//!   "partition": { "cells": 3 },
//!   "simulate": { "replications": 100000, "profiles": ["competitive", "cheap_talk"] },
//!   "scan": { "dimension": "N", "grid": [1, 2, 5, 10] },
//!   "repeated": { "kinds": ["discipline"], "delta_grid": [0.05, 0.1], "replications": 20000,
//!                 "bisect": true, "bracket": [0.001, 0.5], "tolerance": 1e-4 }
//! }
//! ```

use std::path::Path;

use cbgame_core::banker::ScanDimension;
use cbgame_core::banker::scan_params;
use cbgame_core::repeated::TriggerKind;
use cbgame_core::welfare::ProfileKind;
use cbgame_core::{BankerWeight, GameParams};
use serde::Deserialize;

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

const DEFAULT_STREAM_REPLICATIONS: u64 = 20_000;
const DEFAULT_BRACKET: (f64, f64) = (0.001, 0.5);
const DEFAULT_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub params: GameParams,
    /// Weight of a delegated banker; the society weight `alpha` when absent.
    pub banker: Option<BankerWeight>,
    pub seed: Option<u64>,
    pub partition: Option<PartitionBlock>,
    pub simulate: Option<SimulateBlock>,
    pub scan: Option<ScanBlock>,
    pub repeated: Option<RepeatedBlock>,
}

impl ScenarioConfig {
    pub fn minimal(params: GameParams) -> Self {
        Self {
            params,
            banker: None,
            seed: None,
            partition: None,
            simulate: None,
            scan: None,
            repeated: None,
        }
    }

    pub fn weight(&self) -> BankerWeight {
        self.banker.unwrap_or_else(|| self.params.unbiased_banker())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PartitionBlock {
    pub cells: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateBlock {
    pub replications: u64,
    pub profiles: Vec<ProfileKind>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanBlock {
    pub dimension: ScanDimension,
    pub grid: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepeatedBlock {
    pub kinds: Vec<TriggerKind>,
    pub delta_grid: Vec<f64>,
    pub replications: u64,
    pub bisect: bool,
    pub bracket: (f64, f64),
    pub tolerance: f64,
}

impl RepeatedBlock {
    pub fn needs_seed(&self) -> bool {
        self.bisect || !self.delta_grid.is_empty()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    schema_version: Option<u32>,
    alpha: f64,
    beta: f64,
    n_investors: f64,
    phi1: f64,
    phi2: f64,
    banker: Option<f64>,
    seed: Option<u64>,
    partition: Option<RawPartition>,
    simulate: Option<RawSimulate>,
    scan: Option<RawScan>,
    repeated: Option<RawRepeated>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPartition {
    cells: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSimulate {
    replications: u64,
    profiles: Option<Vec<String>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScan {
    dimension: String,
    grid: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRepeated {
    kinds: Option<Vec<String>>,
    delta_grid: Option<Vec<f64>>,
    replications: Option<u64>,
    bisect: Option<bool>,
    bracket: Option<(f64, f64)>,
    tolerance: Option<f64>,
}

pub fn parse_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    parse_config_str(&text, &path.display().to_string())
}

/// Parses and validates config text; `origin` prefixes every diagnostic.
pub fn parse_config_str(text: &str, origin: &str) -> Result<ScenarioConfig> {
    let fail = |msg: String| CliError::Config(format!("{origin}: {msg}"));
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        if path == "." {
            fail(e.into_inner().to_string())
        } else {
            fail(format!("{path}: {}", e.into_inner()))
        }
    })?;

    if let Some(v) = raw.schema_version {
        if v != SCHEMA_VERSION {
            return Err(fail(format!("schema_version must be {SCHEMA_VERSION}, found {v}")));
        }
    }
    let n = raw.n_investors;
    if !(n >= 1.0 && n <= u32::MAX as f64 && n.fract() == 0.0) {
        return Err(fail("n_investors must be an integer >= 1".into()));
    }
    let params = GameParams::new(raw.alpha, raw.beta, n as u32, raw.phi1, raw.phi2).map_err(|e| fail(e.to_string()))?;
    let banker = raw
        .banker
        .map(|b| BankerWeight::new(b).map_err(|_| fail("banker must lie in [0,1)".into())))
        .transpose()?;

    let partition = match raw.partition {
        Some(p) if p.cells == 0 => return Err(fail("partition.cells must be >= 1".into())),
        Some(p) => Some(PartitionBlock { cells: p.cells }),
        None => None,
    };

    let simulate = match raw.simulate {
        Some(s) => {
            if s.replications == 0 {
                return Err(fail("simulate.replications must be >= 1".into()));
            }
            let profiles = match s.profiles {
                Some(names) => names
                    .iter()
                    .enumerate()
                    .map(|(i, name)| {
                        profile_kind(name)
                            .ok_or_else(|| fail(format!("simulate.profiles[{i}]: unknown profile {name:?}")))
                    })
                    .collect::<Result<Vec<_>>>()?,
                None => ALL_PROFILES.to_vec(),
            };
            Some(SimulateBlock {
                replications: s.replications,
                profiles,
            })
        }
        None => None,
    };

    let scan = match raw.scan {
        Some(s) => {
            let dimension: ScanDimension = s
                .dimension
                .parse()
                .map_err(|e: cbgame_core::Error| fail(format!("scan.dimension: {e}")))?;
            if s.grid.is_empty() {
                return Err(fail("scan.grid must not be empty".into()));
            }
            scan_params(&params, dimension, &s.grid).map_err(|e| match e {
                cbgame_core::Error::InvalidGridValue { index, value } => fail(format!(
                    "scan.grid[{index}]: {value} is invalid for dimension {}",
                    dimension.name()
                )),
                other => fail(other.to_string()),
            })?;
            Some(ScanBlock {
                dimension,
                grid: s.grid,
            })
        }
        None => None,
    };

    let repeated = match raw.repeated {
        Some(r) => {
            let kinds = match r.kinds {
                Some(names) => names
                    .iter()
                    .enumerate()
                    .map(|(i, name)| {
                        trigger_kind(name)
                            .ok_or_else(|| fail(format!("repeated.kinds[{i}]: unknown kind {name:?}")))
                    })
                    .collect::<Result<Vec<_>>>()?,
                None => TriggerKind::ALL.to_vec(),
            };
            let delta_grid = r.delta_grid.unwrap_or_default();
            if let Some((i, d)) = delta_grid.iter().enumerate().find(|(_, d)| !(**d > 0.0 && **d < 1.0)) {
                return Err(fail(format!("repeated.delta_grid[{i}]: {d} must lie in (0,1)")));
            }
            let replications = r.replications.unwrap_or(DEFAULT_STREAM_REPLICATIONS);
            if replications == 0 {
                return Err(fail("repeated.replications must be >= 1".into()));
            }
            let bracket = r.bracket.unwrap_or(DEFAULT_BRACKET);
            if !(bracket.0 > 0.0 && bracket.0 < bracket.1 && bracket.1 < 1.0) {
                return Err(fail("repeated.bracket must satisfy 0 < lo < hi < 1".into()));
            }
            let tolerance = r.tolerance.unwrap_or(DEFAULT_TOLERANCE);
            if !(tolerance > 0.0) {
                return Err(fail("repeated.tolerance must be positive".into()));
            }
            Some(RepeatedBlock {
                kinds,
                delta_grid,
                replications,
                bisect: r.bisect.unwrap_or(false),
                bracket,
                tolerance,
            })
        }
        None => None,
    };

    Ok(ScenarioConfig {
        params,
        banker,
        seed: raw.seed,
        partition,
        simulate,
        scan,
        repeated,
    })
}

pub const ALL_PROFILES: [ProfileKind; 3] = [
    ProfileKind::Competitive,
    ProfileKind::TransparentOligopoly,
    ProfileKind::CheapTalkOligopoly,
];

pub fn profile_kind(name: &str) -> Option<ProfileKind> {
    ALL_PROFILES.into_iter().find(|k| k.name() == name)
}

pub fn trigger_kind(name: &str) -> Option<TriggerKind> {
    TriggerKind::ALL.into_iter().find(|k| k.name() == name)
}
