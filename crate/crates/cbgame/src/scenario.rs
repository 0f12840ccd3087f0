//! Dispatch from a command and a validated config to report tables.

use std::str::FromStr;

use cbgame_core::banker::{
    babbling_monopoly_check, comparative_statics_scan, optimal_banker_cheap_talk, optimal_banker_transparent,
    SCAN_COLUMNS,
};
use cbgame_core::cheap_talk::{
    max_partitions, most_informative_profile, normalized_bias, residual_variance, residual_variance_closed_form,
    solve_partition, verify_partition, Partition, PartitionBound,
};
use cbgame_core::montecarlo::{McReport, PairedPlay, ProfilePlay, RngSpec};
use cbgame_core::repeated::{
    collusion_first_best_bound, discipline_phi1_bound, investor_equilibrium_preference, required_horizon,
    trigger_equilibrium, Deviation, TriggerKind, TriggerStream,
};
use cbgame_core::optimize::bisect_sign_change;
use cbgame_core::static_game::{
    competitive_profile, investment_bias, on_path_rate, transparent_profile, Communication, StrategyProfile,
};
use cbgame_core::welfare::{
    cheap_talk_welfare, competitive_values, oligopoly_gaps, transparent_investor_gain, transparent_oligopoly_welfare,
    transparent_welfare_gap, ProfileKind, WelfareReport,
};
use cbgame_core::cheap_talk::most_informative_residual_variance;
use cbgame_core::{BankerWeight, Error as CoreError, GameParams, ShockPair};

use crate::config::ScenarioConfig;
use crate::error::{CliError, Result};
use crate::parallel::Driver;
use crate::report::{Cell, ReportSet, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Partition,
    Welfare,
    Banker,
    Repeated,
    Simulate,
    Scan,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Solve,
        Command::Partition,
        Command::Welfare,
        Command::Banker,
        Command::Repeated,
        Command::Simulate,
        Command::Scan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Partition => "partition",
            Command::Welfare => "welfare",
            Command::Banker => "banker",
            Command::Repeated => "repeated",
            Command::Simulate => "simulate",
            Command::Scan => "scan",
        }
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown command {s:?}"))
    }
}

/// Runs `command` on `config`. Monte Carlo work is spread over `workers`
/// threads without affecting any output.
pub fn run_scenario(config: &ScenarioConfig, command: Command, workers: usize) -> Result<ReportSet> {
    let mut reports = ReportSet::new(command.name(), config.seed);
    match command {
        Command::Solve => solve(config, &mut reports)?,
        Command::Partition => partition(config, &mut reports)?,
        Command::Welfare => welfare(config, &mut reports),
        Command::Banker => banker(config, &mut reports)?,
        Command::Repeated => repeated(config, &mut reports, workers)?,
        Command::Simulate => simulate(config, &mut reports, workers)?,
        Command::Scan => scan(config, &mut reports)?,
    }
    Ok(reports)
}

fn require_seed(config: &ScenarioConfig, command: Command) -> Result<u64> {
    config.seed.ok_or_else(|| {
        CliError::Config(format!(
            "command {} needs a seed: set \"seed\" in the config or pass --seed",
            command.name()
        ))
    })
}

fn missing_block(command: Command) -> CliError {
    CliError::Config(format!(
        "command {0} needs a \"{0}\" block in the config",
        command.name()
    ))
}

fn bound_cell(bound: PartitionBound) -> Cell {
    match bound {
        PartitionBound::Finite(p) => Cell::from(p),
        PartitionBound::Unbounded => Cell::from("unbounded"),
    }
}

fn cells_table(name: &str, partition: &Partition, params: &GameParams, w: BankerWeight) -> Table {
    let mut t = Table::new(name, &["cell", "lower", "upper", "length", "mean"]);
    let c = partition.cutoffs();
    for k in 0..partition.cell_count() {
        t.push(
            params,
            w.value(),
            vec![
                k.into(),
                c[k].into(),
                c[k + 1].into(),
                (c[k + 1] - c[k]).into(),
                partition.cell_mean(k).into(),
            ],
        );
    }
    t
}

fn solve(config: &ScenarioConfig, reports: &mut ReportSet) -> Result<()> {
    let p = &config.params;
    let w = config.weight();
    let bound = max_partitions(p, w);
    let ct = most_informative_profile(p, w)?;
    let (cells, residual) = match &ct.communication {
        Communication::FullRevelation => (Cell::from("unbounded"), 0.0),
        Communication::Partition(q) => (Cell::from(q.cell_count()), residual_variance(q)),
    };
    let mut summary = Table::new(
        "solve",
        &["bias", "normalized_bias", "max_partitions", "cells", "residual_variance"],
    );
    summary.push(
        p,
        w.value(),
        vec![
            investment_bias(p, w).into(),
            normalized_bias(p, w).b.into(),
            bound_cell(bound),
            cells,
            residual.into(),
        ],
    );
    reports.tables.push(summary);
    if let Communication::Partition(q) = &ct.communication {
        reports.tables.push(cells_table("solve_partition", q, p, w));
    }

    let tr = transparent_profile(p, w);
    let com = competitive_profile(p);
    let mut rates = Table::new(
        "solve_rates",
        &["omega1", "omega2", "rate_competitive", "rate_transparent", "rate_cheap_talk"],
    );
    for omega1 in [-p.phi1(), 0.0, p.phi1()] {
        for omega2 in [-p.phi2(), 0.0, p.phi2()] {
            let shocks = ShockPair::new(omega1, omega2, p)?;
            rates.push(
                p,
                w.value(),
                vec![
                    omega1.into(),
                    omega2.into(),
                    on_path_rate(&com, &shocks, p)?.into(),
                    on_path_rate(&tr, &shocks, p)?.into(),
                    ct.rate(&shocks).into(),
                ],
            );
        }
    }
    reports.tables.push(rates);
    Ok(())
}

fn partition(config: &ScenarioConfig, reports: &mut ReportSet) -> Result<()> {
    let p = &config.params;
    let w = config.weight();
    let bound = max_partitions(p, w);
    let cells = match (config.partition, bound) {
        (Some(block), _) => block.cells,
        (None, PartitionBound::Finite(max)) => max,
        (None, PartitionBound::Unbounded) => {
            return Err(CliError::Infeasible(CoreError::Unsupported(
                "full revelation is attainable; set partition.cells to pick a finite partition",
            )))
        }
    };
    let q = solve_partition(cells, p, w)?;
    let d_abs = investment_bias(p, w).abs();
    let mut summary = Table::new(
        "partition_summary",
        &[
            "cells",
            "max_partitions",
            "residual_variance",
            "residual_variance_closed_form",
            "indifference_residual",
        ],
    );
    summary.push(
        p,
        w.value(),
        vec![
            cells.into(),
            bound_cell(bound),
            residual_variance(&q).into(),
            residual_variance_closed_form(cells, p.phi1(), d_abs).into(),
            verify_partition(&q, p, w).into(),
        ],
    );
    reports.tables.push(summary);
    reports.tables.push(cells_table("partition", &q, p, w));
    Ok(())
}

fn welfare_row(t: &mut Table, params: &GameParams, alpha_tilde: f64, kind: ProfileKind, r: &WelfareReport) {
    t.push(
        params,
        alpha_tilde,
        vec![
            kind.name().into(),
            r.welfare.into(),
            r.investor_payoff.into(),
            r.mean_distortion.into(),
            r.residual_variance.into(),
        ],
    );
}

fn analytic_report(params: &GameParams, w: BankerWeight, kind: ProfileKind) -> (f64, WelfareReport) {
    match kind {
        ProfileKind::Competitive => (params.alpha(), competitive_values(params)),
        ProfileKind::TransparentOligopoly => (w.value(), transparent_oligopoly_welfare(params, w)),
        ProfileKind::CheapTalkOligopoly => (w.value(), cheap_talk_welfare(params, w)),
    }
}

fn welfare(config: &ScenarioConfig, reports: &mut ReportSet) {
    let p = &config.params;
    let w = config.weight();
    let mut t = Table::new(
        "welfare",
        &["profile", "W", "EU_i", "mean_distortion", "residual_variance"],
    );
    for kind in crate::config::ALL_PROFILES {
        let (at, r) = analytic_report(p, w, kind);
        welfare_row(&mut t, p, at, kind, &r);
    }
    reports.tables.push(t);

    let gaps = oligopoly_gaps(p);
    let mut g = Table::new(
        "welfare_gaps",
        &[
            "W_gap_transparent",
            "EU_gap_transparent",
            "W_gap_cheap_talk",
            "EU_gap_cheap_talk",
            "W_gap_transparent_closed_form",
            "EU_gap_transparent_closed_form",
        ],
    );
    g.push(
        p,
        p.alpha(),
        vec![
            gaps.transparent_welfare.into(),
            gaps.transparent_investor.into(),
            gaps.cheap_talk_welfare.into(),
            gaps.cheap_talk_investor.into(),
            transparent_welfare_gap(p).into(),
            transparent_investor_gain(p).into(),
        ],
    );
    reports.tables.push(g);
}

fn banker(config: &ScenarioConfig, reports: &mut ReportSet) -> Result<()> {
    let p = &config.params;
    let mut t = Table::new("banker", &["mode", "W", "EU_i"]);
    for solution in [optimal_banker_transparent(p)?, optimal_banker_cheap_talk(p)?] {
        t.push(
            p,
            solution.alpha_tilde_star,
            vec![
                solution.mode.name().into(),
                solution.society_welfare.into(),
                solution.market_payoff.into(),
            ],
        );
    }
    reports.tables.push(t);

    if p.n_investors() == 1 && p.phi1() == 0.5 {
        let r = babbling_monopoly_check(p)?;
        let mut b = Table::new(
            "babbling_monopoly",
            &[
                "ratio",
                "babbling_under_unbiased",
                "EU_unbiased",
                "EU_conventional",
                "prefers_conventional",
            ],
        );
        b.push(
            p,
            p.alpha(),
            vec![
                r.ratio.into(),
                r.babbling_under_unbiased.into(),
                r.eu_unbiased.into(),
                r.eu_conventional.into(),
                r.prefers_kitish.into(),
            ],
        );
        reports.tables.push(b);
    }
    Ok(())
}

fn repeated(config: &ScenarioConfig, reports: &mut ReportSet, workers: usize) -> Result<()> {
    let p = &config.params;
    let a = p.alpha();
    let (kinds, explicit) = match &config.repeated {
        Some(block) => (block.kinds.clone(), true),
        None => (TriggerKind::ALL.to_vec(), false),
    };
    let mut equilibria = Vec::new();
    for &kind in &kinds {
        if kind == TriggerKind::CollusionMonopoly && p.n_investors() < 2 && !explicit {
            continue;
        }
        equilibria.push(trigger_equilibrium(p, kind)?);
    }

    let mut t = Table::new(
        "repeated",
        &[
            "kind",
            "delta_star",
            "raw_threshold",
            "path_stage_payoff",
            "punish_stage_payoff",
            "one_shot_gain",
            "feasible",
        ],
    );
    for eq in &equilibria {
        t.push(
            p,
            a,
            vec![
                eq.kind.name().into(),
                eq.delta_star.map_or(Cell::from("infeasible"), Cell::from),
                eq.raw_threshold.into(),
                eq.path_stage_investor_payoff.into(),
                eq.punish_stage_investor_payoff.into(),
                eq.one_shot_gain.into(),
                eq.feasible().into(),
            ],
        );
    }
    reports.tables.push(t);

    let pref = investor_equilibrium_preference(p)?;
    let mut b = Table::new(
        "repeated_bounds",
        &[
            "discipline_phi1_bound",
            "first_best_residual_bound",
            "residual_variance",
            "residual_variance_monopoly",
            "monopoly_bias_sq",
            "preference",
        ],
    );
    b.push(
        p,
        a,
        vec![
            discipline_phi1_bound(p).into(),
            collusion_first_best_bound(p).into(),
            most_informative_residual_variance(p, p.unbiased_banker()).into(),
            pref.residual_variance_monopoly.into(),
            pref.monopoly_bias_sq.into(),
            pref.preference.name().into(),
        ],
    );
    reports.tables.push(b);

    let Some(block) = config.repeated.as_ref().filter(|b| b.needs_seed()) else {
        return Ok(());
    };
    let seed = require_seed(config, Command::Repeated)?;
    let rng = RngSpec::new(seed);
    let driver = Driver::new(workers)?;
    let gain_at = |kind: TriggerKind, delta: f64| -> cbgame_core::Result<(usize, f64, f64)> {
        let horizon = required_horizon(delta)?;
        let stream = TriggerStream::new(p, delta, kind, Deviation::At(0), horizon)?;
        let e = driver.run(&stream, block.replications, rng);
        if !e[2].mean.is_finite() {
            return Err(CoreError::NonFinite { at: delta });
        }
        Ok((horizon, e[2].mean, e[2].stderr))
    };

    if !block.delta_grid.is_empty() {
        let mut s = Table::new(
            "repeated_streams",
            &[
                "kind",
                "delta",
                "horizon",
                "gain_mean",
                "gain_stderr",
                "delta_star",
                "replications",
                "seed",
            ],
        );
        for eq in &equilibria {
            for &delta in &block.delta_grid {
                let (horizon, mean, stderr) = gain_at(eq.kind, delta)?;
                s.push(
                    p,
                    a,
                    vec![
                        eq.kind.name().into(),
                        delta.into(),
                        horizon.into(),
                        mean.into(),
                        stderr.into(),
                        eq.raw_threshold.into(),
                        block.replications.into(),
                        seed.into(),
                    ],
                );
            }
        }
        reports.tables.push(s);
    }

    if block.bisect {
        let mut s = Table::new(
            "repeated_bisection",
            &[
                "kind",
                "bracket_lo",
                "bracket_hi",
                "delta_star",
                "replications",
                "seed",
            ],
        );
        for eq in equilibria.iter().filter(|e| e.feasible()) {
            let (lo, hi) = bisect_sign_change(
                |delta| gain_at(eq.kind, delta).map(|g| g.1),
                block.bracket.0,
                block.bracket.1,
                block.tolerance,
            )?;
            s.push(
                p,
                a,
                vec![
                    eq.kind.name().into(),
                    lo.into(),
                    hi.into(),
                    eq.raw_threshold.into(),
                    block.replications.into(),
                    seed.into(),
                ],
            );
        }
        reports.tables.push(s);
    }
    Ok(())
}

fn profile_for(params: &GameParams, w: BankerWeight, kind: ProfileKind) -> Result<StrategyProfile> {
    Ok(match kind {
        ProfileKind::Competitive => competitive_profile(params),
        ProfileKind::TransparentOligopoly => transparent_profile(params, w),
        ProfileKind::CheapTalkOligopoly => most_informative_profile(params, w)?,
    })
}

fn simulate(config: &ScenarioConfig, reports: &mut ReportSet, workers: usize) -> Result<()> {
    let block = config.simulate.as_ref().ok_or_else(|| missing_block(Command::Simulate))?;
    let seed = require_seed(config, Command::Simulate)?;
    let p = &config.params;
    let w = config.weight();
    let rng = RngSpec::new(seed);
    let driver = Driver::new(workers)?;
    let reps = block.replications;

    let columns = [
        "profile",
        "quantity",
        "mc_mean",
        "mc_stderr",
        "analytic",
        "z_score",
        "replications",
        "seed",
        "rng_algorithm",
    ];
    let mut t = Table::new("simulate", &columns);
    for &kind in &block.profiles {
        let model = ProfilePlay {
            profile: profile_for(p, w, kind)?,
            params: *p,
        };
        let mc = McReport::from_estimates(&driver.run(&model, reps, rng));
        let (at, exact) = analytic_report(p, w, kind);
        for (quantity, e, analytic) in [
            ("W", mc.welfare, exact.welfare),
            ("EU_i", mc.investor_payoff, exact.investor_payoff),
            ("mean_distortion", mc.mean_distortion, exact.mean_distortion),
            ("residual_variance", mc.residual_variance, exact.residual_variance),
        ] {
            t.push(
                p,
                at,
                vec![
                    kind.name().into(),
                    quantity.into(),
                    e.mean.into(),
                    e.stderr.into(),
                    analytic.into(),
                    z_score(e.mean, e.stderr, analytic).into(),
                    reps.into(),
                    seed.into(),
                    e.algorithm.into(),
                ],
            );
        }
    }
    reports.tables.push(t);

    let mut g = Table::new("simulate_gaps", &columns);
    let base_kind = ProfileKind::Competitive;
    let (_, base_exact) = analytic_report(p, w, base_kind);
    let base = ProfilePlay {
        profile: profile_for(p, w, base_kind)?,
        params: *p,
    };
    for &kind in block.profiles.iter().filter(|k| **k != base_kind) {
        let (at, exact) = analytic_report(p, w, kind);
        let model = PairedPlay {
            base: base.clone(),
            alt: ProfilePlay {
                profile: profile_for(p, w, kind)?,
                params: *p,
            },
        };
        let e = driver.run(&model, reps, rng);
        for (quantity, est, analytic) in [
            ("W_gap", e[0], exact.welfare - base_exact.welfare),
            ("EU_gap", e[1], exact.investor_payoff - base_exact.investor_payoff),
        ] {
            g.push(
                p,
                at,
                vec![
                    kind.name().into(),
                    quantity.into(),
                    est.mean.into(),
                    est.stderr.into(),
                    analytic.into(),
                    z_score(est.mean, est.stderr, analytic).into(),
                    reps.into(),
                    seed.into(),
                    est.algorithm.into(),
                ],
            );
        }
    }
    if !g.rows.is_empty() {
        reports.tables.push(g);
    }
    Ok(())
}

/// Standardised distance of the estimate from the analytic value; zero when
/// both agree exactly, infinite when only the standard error vanishes.
fn z_score(mean: f64, stderr: f64, analytic: f64) -> f64 {
    let diff = mean - analytic;
    if diff == 0.0 {
        0.0
    } else if stderr == 0.0 {
        f64::INFINITY
    } else {
        diff / stderr
    }
}

fn scan(config: &ScenarioConfig, reports: &mut ReportSet) -> Result<()> {
    let block = config.scan.as_ref().ok_or_else(|| missing_block(Command::Scan))?;
    let table = comparative_statics_scan(&config.params, block.dimension, &block.grid)?;
    let flags = SCAN_COLUMNS
        .iter()
        .zip(&table.trends)
        .map(|(c, t)| format!("{c}:{}", t.name()))
        .collect::<Vec<_>>()
        .join(";");

    let mut columns = vec!["dimension", "value"];
    columns.extend(SCAN_COLUMNS);
    columns.push("monotonicity");
    let mut t = Table::new("scan", &columns);
    for row in &table.rows {
        let values = row.columns();
        let mut cells = vec![Cell::from(block.dimension.name()), row.value.into()];
        for (name, v) in SCAN_COLUMNS.iter().zip(values) {
            cells.push(if *name == "max_partitions" {
                bound_cell(row.max_partitions)
            } else {
                v.into()
            });
        }
        cells.push(flags.clone().into());
        t.push(&row.params, row.params.alpha(), cells);
    }
    reports.tables.push(t);

    let mut trends = Table::new("scan_trends", &["dimension", "column", "trend"]);
    for (c, trend) in SCAN_COLUMNS.iter().zip(&table.trends) {
        trends.push(
            &config.params,
            config.params.alpha(),
            vec![block.dimension.name().into(), (*c).into(), trend.name().into()],
        );
    }
    reports.tables.push(trends);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config_str;

    fn config(text: &str) -> ScenarioConfig {
        parse_config_str(text, "test").unwrap()
    }

    #[test]
    fn babbling_monopoly_solve() {
        let c = config(r#"{"alpha":0.5,"beta":1,"n_investors":1,"phi1":0.5,"phi2":0.3}"#);
        let r = run_scenario(&c, Command::Solve, 1).unwrap();
        let s = r.table("solve").unwrap();
        assert_eq!(s.num(0, "max_partitions"), Some(1.0));
        assert_eq!(s.num(0, "residual_variance"), Some(1.0 / 12.0));
    }

    #[test]
    fn repeated_discipline() {
        let c = config(r#"{"alpha":0.5,"beta":1,"n_investors":2,"phi1":10,"phi2":1}"#);
        let r = run_scenario(&c, Command::Repeated, 1).unwrap();
        let t = r.table("repeated").unwrap();
        assert_eq!(t.text(0, "kind"), Some("discipline"));
        assert!((t.num(0, "delta_star").unwrap() - 0.014_084_5).abs() < 1e-6);
        assert_eq!(t.rows.len(), 3);
        let one = config(r#"{"alpha":0.5,"beta":1,"n_investors":1,"phi1":10,"phi2":1}"#);
        assert_eq!(run_scenario(&one, Command::Repeated, 1).unwrap().table("repeated").unwrap().rows.len(), 2);
    }

    #[test]
    fn block_mismatch() {
        let c = config(r#"{"alpha":0.5,"beta":1,"n_investors":2,"phi1":1,"phi2":1,"seed":1,"scan":{"dimension":"N","grid":[1,2]}}"#);
        assert_eq!(run_scenario(&c, Command::Simulate, 1).unwrap_err().exit_code(), 1);
        let c = config(r#"{"alpha":0.5,"beta":1,"n_investors":2,"phi1":1,"phi2":1,"simulate":{"replications":10}}"#);
        let e = run_scenario(&c, Command::Simulate, 1).unwrap_err();
        assert!(e.to_string().contains("seed"));
        assert_eq!(run_scenario(&c, Command::Scan, 1).unwrap_err().exit_code(), 1);
    }

    #[test]
    fn partition_requests() {
        let c = config(r#"{"alpha":0.2,"beta":0.5,"n_investors":5,"phi1":1,"phi2":1}"#);
        let r = run_scenario(&c, Command::Partition, 1).unwrap();
        let s = r.table("partition_summary").unwrap();
        assert_eq!(s.num(0, "cells"), Some(6.0));
        assert!(s.num(0, "indifference_residual").unwrap() < 1e-10);
        assert_eq!(r.table("partition").unwrap().rows.len(), 6);
        let c = config(r#"{"alpha":0.2,"beta":0.5,"n_investors":5,"phi1":1,"phi2":1,"partition":{"cells":7}}"#);
        assert_eq!(run_scenario(&c, Command::Partition, 1).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn simulate_reports_agree_with_closed_forms() {
        let c = config(
            r#"{"alpha":0.2,"beta":0.5,"n_investors":5,"phi1":1,"phi2":1,"seed":3,"simulate":{"replications":200000}}"#,
        );
        let r = run_scenario(&c, Command::Simulate, 2).unwrap();
        for name in ["simulate", "simulate_gaps"] {
            let t = r.table(name).unwrap();
            for i in 0..t.rows.len() {
                assert!(t.num(i, "z_score").unwrap().abs() < 4.0, "{name} row {i}");
            }
        }
    }

    #[test]
    fn scan_flags() {
        let c = config(r#"{"alpha":0.5,"beta":1,"n_investors":2,"phi1":1,"phi2":1,"scan":{"dimension":"N","grid":[1,2,4,8]}}"#);
        let r = run_scenario(&c, Command::Scan, 1).unwrap();
        let t = r.table("scan").unwrap();
        assert_eq!(t.rows.len(), 4);
        assert_eq!(t.num(3, "n_investors"), Some(8.0));
        assert!(t.text(0, "monotonicity").unwrap().contains("bias:increasing"));
    }
}
