//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::fs;
use std::path::Path;
use std::process::Command as Process;
use std::time::Instant;

use cbgame::parallel::Driver;
use cbgame_core::banker::{
    babbling_monopoly_check, comparative_statics_scan, optimal_banker_cheap_talk, optimal_banker_transparent,
    ScanDimension, Trend,
};
use cbgame_core::cheap_talk::{
    max_partitions, most_informative_profile, residual_variance, solve_partition, verify_partition, PartitionBound,
};
use cbgame_core::model::{cb_loss, policy_rule, underreaction_finite_difference, underreaction_slope};
use cbgame_core::montecarlo::{replication_rng, uniform_symmetric, McReport, PairedPlay, ProfilePlay, RngSpec};
use cbgame_core::oracle::{deviation_oracle_investment, SearchSpec};
use cbgame_core::optimize::bisect_sign_change;
use cbgame_core::repeated::{
    collusion_first_best_threshold, discipline_phi1_bound, discipline_threshold, investor_equilibrium_preference,
    required_horizon, Deviation, Preference, TriggerKind, TriggerStream,
};
use cbgame_core::static_game::{best_response_dynamics, competitive_profile, investment_bias, transparent_profile};
use cbgame_core::welfare::{cheap_talk_welfare, competitive_values, transparent_oligopoly_welfare};
use cbgame_core::{BankerWeight, GameParams, MarketState};
use rand_chacha::ChaCha8Rng;

/// Uniform draw on `[lo, hi)`.
fn draw(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * (uniform_symmetric(rng, 0.5) + 0.5)
}

fn draw_n(rng: &mut ChaCha8Rng, max: u32) -> u32 {
    (1 + (draw(rng, 0.0, max as f64) as u32)).min(max)
}

/// The random-parameter distribution shared by criteria 4-6.
fn draw_params(rng: &mut ChaCha8Rng) -> GameParams {
    let alpha = draw(rng, 0.05, 0.95);
    let beta = draw(rng, 0.05, 3.0);
    let n = draw_n(rng, 20);
    let phi1 = draw(rng, 0.2, 3.0);
    let phi2 = draw(rng, 0.1, 3.0);
    GameParams::new(alpha, beta, n, phi1, phi2).unwrap()
}

fn describe(p: &GameParams) -> String {
    format!(
        "(alpha={:.4}, beta={:.4}, N={}, phi1={:.3}, phi2={:.3})",
        p.alpha(),
        p.beta(),
        p.n_investors(),
        p.phi1(),
        p.phi2()
    )
}

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

struct Outcome {
    pass: bool,
    detail: String,
}

fn criterion_1() -> Outcome {
    let mut rng = replication_rng(1, 0);
    let mut worst_slope = 0.0f64;
    let mut lower_found = 0;
    for _ in 0..1000 {
        let w = BankerWeight::new(draw(&mut rng, 0.0, 0.999)).unwrap();
        let omega = draw(&mut rng, -5.0, 5.0);
        let n = draw_n(&mut rng, 10) as usize;
        let positions: Vec<f64> = (0..n).map(|_| draw(&mut rng, -5.0, 5.0)).collect();
        let state = MarketState::new(positions).unwrap();
        let r = policy_rule(omega, state.mean_position(), w);
        let at = cb_loss(&state, r, omega, w);
        for eps in [1e-4, 1e-2] {
            for step in [eps, -eps] {
                if cb_loss(&state, r + step, omega, w) < at {
                    lower_found += 1;
                }
            }
        }
        let exact = 1.0 - w.value();
        let fd = underreaction_finite_difference(omega, state.mean_position(), w, 1e-3);
        worst_slope = worst_slope.max((fd - exact).abs());
        if let Ok(s) = underreaction_slope(w) {
            worst_slope = worst_slope.max((s - exact).abs());
        }
    }
    Outcome {
        pass: lower_found == 0 && worst_slope <= 1e-6,
        detail: format!("perturbations with lower loss: {lower_found}; max slope error {worst_slope:.2e}"),
    }
}

fn criterion_2() -> Outcome {
    let mut rng = replication_rng(2, 0);
    let mut worst_fixed_point = 0.0f64;
    let mut worst_gain = 0.0f64;
    for _ in 0..500 {
        let params = GameParams::new(
            draw(&mut rng, 0.01, 0.99),
            draw(&mut rng, 0.01, 3.0),
            draw_n(&mut rng, 30),
            draw(&mut rng, 0.1, 3.0),
            draw(&mut rng, 0.1, 3.0),
        )
        .unwrap();
        let w = BankerWeight::new(draw(&mut rng, 0.0, 0.99)).unwrap();
        let belief = draw(&mut rng, -params.phi1(), params.phi1());
        let start: Vec<f64> = (0..params.n_investors()).map(|_| draw(&mut rng, -3.0, 3.0)).collect();
        let (x, _) = best_response_dynamics(&start, belief, &params, w, 1e-15, 100_000).unwrap();
        let bias = investment_bias(&params, w);
        for xi in &x {
            worst_fixed_point = worst_fixed_point.max((xi - belief - bias).abs());
        }
        let profile = transparent_profile(&params, w);
        let spec = SearchSpec::covering(&profile, &params);
        let gain = deviation_oracle_investment(&profile, &params, 0, spec).unwrap();
        worst_gain = worst_gain.max(gain.max_gain);
    }
    Outcome {
        pass: worst_fixed_point <= 1e-10 && worst_gain <= 1e-8,
        detail: format!("max |fixed point - closed form| {worst_fixed_point:.2e}; max oracle gain {worst_gain:.2e}"),
    }
}

fn criterion_3() -> Outcome {
    let params = GameParams::new(0.2, 0.5, 5, 1.0, 1.0).unwrap();
    let w = params.unbiased_banker();
    let bound = max_partitions(&params, w);
    let partition = solve_partition(6, &params, w).unwrap();
    let s = residual_variance(&partition);
    let residual = verify_partition(&partition, &params, w);

    let mono = GameParams::new(0.5, 1.0, 1, 0.5, 0.3).unwrap();
    let mono_bound = max_partitions(&mono, mono.unbiased_banker());
    let mono_s = match most_informative_profile(&mono, mono.unbiased_banker()).unwrap().communication {
        cbgame_core::static_game::Communication::Partition(p) => residual_variance(&p),
        _ => f64::NAN,
    };
    let pass = bound == PartitionBound::Finite(6)
        && (s - 0.017_171_2).abs() <= 1e-6
        && residual < 1e-10
        && mono_bound == PartitionBound::Finite(1)
        && mono_s == 1.0 / 12.0;
    Outcome {
        pass,
        detail: format!(
            "P={:?}, sigma^2={s:.9}, indifference residual {residual:.1e}; monopoly P={:?}, sigma^2={mono_s}",
            bound.finite(),
            mono_bound.finite()
        ),
    }
}

fn criterion_4(driver: &Driver) -> Outcome {
    const REPS: u64 = 1_000_000;
    let mut rng = replication_rng(4, 0);
    let mut checks = 0;
    let mut misses = Vec::new();
    let mut check = |label: String, mean: f64, stderr: f64, exact: f64| {
        checks += 1;
        if (mean - exact).abs() > 3.0 * stderr {
            misses.push(format!("{label} z={:.2}", (mean - exact) / stderr));
        }
    };
    for set in 0..20u64 {
        let params = draw_params(&mut rng);
        let w = params.unbiased_banker();
        let seed = 4_000 + set;
        let com = ProfilePlay {
            profile: competitive_profile(&params),
            params,
        };
        let tr = ProfilePlay {
            profile: transparent_profile(&params, w),
            params,
        };
        let ct = ProfilePlay {
            profile: most_informative_profile(&params, w).unwrap(),
            params,
        };
        let exact = [
            competitive_values(&params),
            transparent_oligopoly_welfare(&params, w),
            cheap_talk_welfare(&params, w),
        ];
        for (name, model, exact) in [("com", &com, exact[0]), ("tr", &tr, exact[1]), ("ct", &ct, exact[2])] {
            let mc = McReport::from_estimates(&driver.run(model, REPS, RngSpec::new(seed)));
            check(format!("set {set} W_{name}"), mc.welfare.mean, mc.welfare.stderr, exact.welfare);
            check(
                format!("set {set} EU_{name}"),
                mc.investor_payoff.mean,
                mc.investor_payoff.stderr,
                exact.investor_payoff,
            );
        }
        for (name, alt, exact) in [("tr", &tr, exact[1]), ("ct", &ct, exact[2])] {
            let paired = PairedPlay {
                base: com.clone(),
                alt: alt.clone(),
            };
            let e = driver.run(&paired, REPS, RngSpec::new(seed));
            let com_exact = competitive_values(&params);
            check(format!("set {set} Wgap_{name}"), e[0].mean, e[0].stderr, exact.welfare - com_exact.welfare);
            check(
                format!("set {set} EUgap_{name}"),
                e[1].mean,
                e[1].stderr,
                exact.investor_payoff - com_exact.investor_payoff,
            );
        }
    }
    let bench = GameParams::new(0.5, 1.0, 2, 1.0, 1.0).unwrap();
    let exact = competitive_values(&bench).welfare;
    let model = ProfilePlay {
        profile: competitive_profile(&bench),
        params: bench,
    };
    let mc = McReport::from_estimates(&driver.run(&model, REPS, RngSpec::new(4)));
    let bench_ok = exact == -1.0 / 24.0 && mc.welfare.covers(exact, 3.0);
    Outcome {
        pass: misses.is_empty() && bench_ok,
        detail: format!(
            "{}/{checks} checks outside 3 SE{}; benchmark W={exact:.10} (MC {:.6} +- {:.1e})",
            misses.len(),
            if misses.is_empty() { String::new() } else { format!(" [{}]", misses.join(", ")) },
            mc.welfare.mean,
            mc.welfare.stderr
        ),
    }
}

fn criterion_5() -> Outcome {
    let mut rng = replication_rng(5, 0);
    let mut ranking_failures = 0;
    for _ in 0..200 {
        let p = draw_params(&mut rng);
        let w = p.unbiased_banker();
        let com = competitive_values(&p).welfare;
        let tr = transparent_oligopoly_welfare(&p, w).welfare;
        let ct = cheap_talk_welfare(&p, w).welfare;
        if !(com > tr && tr > ct) {
            ranking_failures += 1;
        }
    }
    // O(1/N^2): each tenfold increase of N shrinks the gap about a hundredfold
    let gaps = |n: u32| {
        let p = GameParams::new(0.5, 1.0, n, 1.0, 1.0).unwrap();
        let w = p.unbiased_banker();
        let com = competitive_values(&p).welfare;
        (
            com - transparent_oligopoly_welfare(&p, w).welfare,
            com - cheap_talk_welfare(&p, w).welfare,
        )
    };
    let g = [gaps(10), gaps(100), gaps(1000)];
    let ratios_tr = [g[0].0 / g[1].0, g[1].0 / g[2].0];
    let ratios_ct = [g[0].1 / g[1].1, g[1].1 / g[2].1];
    let quadratic = |r: &[f64; 2]| r.iter().all(|x| (50.0..=200.0).contains(x));
    Outcome {
        pass: ranking_failures == 0 && quadratic(&ratios_tr) && quadratic(&ratios_ct),
        detail: format!(
            "ranking failures {ranking_failures}/200; gap ratios per tenfold N: transparent {:.1}, {:.1}; cheap talk {:.1}, {:.1} (need 50-200)",
            ratios_tr[0], ratios_tr[1], ratios_ct[0], ratios_ct[1]
        ),
    }
}

fn criterion_6() -> Outcome {
    let mut rng = replication_rng(6, 0);
    let mut ordering = Vec::new();
    let mut welfare_order = 0;
    for _ in 0..50 {
        let p = draw_params(&mut rng);
        let tr = optimal_banker_transparent(&p).unwrap();
        let ct = optimal_banker_cheap_talk(&p).unwrap();
        let (t, c) = (tr.alpha_tilde_star, ct.alpha_tilde_star);
        if !(c > 1e-8 && c <= t + 1e-8 && t < p.alpha() - 1e-8) {
            ordering.push(format!("{} ct*={c:.4} tr*={t:.4}", describe(&p)));
        }
        if tr.society_welfare < ct.society_welfare - 1e-12 {
            welfare_order += 1;
        }
    }

    let base = GameParams::new(0.5, 1.0, 2, 1.0, 1.0).unwrap();
    let grids: [(ScanDimension, &[f64]); 3] = [
        (ScanDimension::Alpha, &[0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]),
        (ScanDimension::N, &[1.0, 2.0, 3.0, 5.0, 10.0, 20.0, 50.0]),
        (ScanDimension::Phi2, &[0.2, 0.5, 1.0, 2.0, 4.0]),
    ];
    let mut monotone = true;
    for (dim, grid) in grids {
        let table = comparative_statics_scan(&base, dim, grid).unwrap();
        monotone &= table.trend("alpha_tilde_transparent") == Some(Trend::Increasing);
    }

    let tiny = base.with_beta(1e-6).unwrap();
    let limit_gap = [optimal_banker_transparent(&tiny), optimal_banker_cheap_talk(&tiny)]
        .iter()
        .map(|s| (s.as_ref().unwrap().alpha_tilde_star - tiny.alpha()).abs())
        .fold(0.0f64, f64::max);

    let kitish = babbling_monopoly_check(&GameParams::new(0.1, 2.187, 1, 0.5, 0.3).unwrap()).unwrap();

    let pass = ordering.is_empty() && welfare_order == 0 && monotone && limit_gap <= 1e-4 && kitish.prefers_kitish;
    let example = ordering.first().map(|s| format!(" e.g. {s}")).unwrap_or_default();
    Outcome {
        pass,
        detail: format!(
            "ordering violated on {}/50 draws{example}; welfare order violated {welfare_order}; monotone {monotone}; beta->0 gap {limit_gap:.1e}; EU0 {:.4} > EUa {:.4}: {}",
            ordering.len(),
            kitish.eu_conventional,
            kitish.eu_unbiased,
            kitish.prefers_kitish
        ),
    }
}

fn criterion_7(driver: &Driver) -> Outcome {
    let params = GameParams::new(0.5, 1.0, 2, 10.0, 1.0).unwrap();
    let star = discipline_threshold(&params).delta_star.unwrap_or(f64::NAN);
    let closed_ok = (star - 0.014_084_5).abs() <= 1e-6;

    let rng = RngSpec::new(7);
    let gain = |delta: f64| {
        let horizon = required_horizon(delta)?;
        let stream = TriggerStream::new(&params, delta, TriggerKind::Discipline, Deviation::At(0), horizon)?;
        Ok(driver.run(&stream, 100_000, rng)[2].mean)
    };
    let bracket = bisect_sign_change(gain, 0.001, 0.5, 1e-4);
    let bisect_ok = matches!(bracket, Ok((lo, hi)) if lo - 1e-3 <= star && star <= hi + 1e-3);

    let mut flips = true;
    for (a, b, n) in [(0.5, 1.0, 2), (0.2, 0.5, 5), (0.8, 2.0, 3), (0.3, 1.5, 1)] {
        let p = GameParams::new(a, b, n, 1.0, 1.0).unwrap();
        let bound = discipline_phi1_bound(&p);
        let above = discipline_threshold(&p.with_phi1(bound * (1.0 + 1e-9)).unwrap()).feasible();
        let below = discipline_threshold(&p.with_phi1(bound * (1.0 - 1e-9)).unwrap()).feasible();
        flips &= above && !below;
    }

    let fb = GameParams::new(0.2, 0.5, 5, 1.0, 1.0).unwrap();
    let star1 = collusion_first_best_threshold(&fb).delta_star.unwrap_or(f64::NAN);
    let star1_ok = (star1 - 0.06527).abs() <= 1e-4;

    let mut worst_gain = 0.0f64;
    for (a, b, n) in [(0.5, 1.0, 2), (0.2, 0.5, 5), (0.9, 3.0, 1), (0.05, 0.1, 40)] {
        let p = GameParams::new(a, b, n, 1.0, 1.0).unwrap();
        let profile = competitive_profile(&p);
        let oracle = deviation_oracle_investment(&profile, &p, 0, SearchSpec::covering(&profile, &p))
            .unwrap()
            .expected_gain;
        let g = a * b / (n as f64 - a);
        worst_gain = worst_gain.max((oracle - 0.5 * g * g).abs());
        worst_gain = worst_gain.max((discipline_threshold(&p).one_shot_gain - oracle).abs());
    }

    let monopoly = investor_equilibrium_preference(&GameParams::new(0.5, 1.0, 3, 0.5, 1.0).unwrap()).unwrap();
    let first_best = investor_equilibrium_preference(&GameParams::new(0.05, 0.1, 3, 1.0, 1.0).unwrap()).unwrap();
    let matches = |r: &cbgame_core::repeated::PreferenceReport| {
        let expected = if r.residual_variance_monopoly < r.monopoly_bias_sq {
            Preference::Monopoly
        } else {
            Preference::FirstBest
        };
        r.preference == expected
    };
    let pref_ok = monopoly.preference == Preference::Monopoly
        && first_best.preference == Preference::FirstBest
        && matches(&monopoly)
        && matches(&first_best);

    Outcome {
        pass: closed_ok && bisect_ok && flips && star1_ok && worst_gain <= 1e-8 && pref_ok,
        detail: format!(
            "delta*={star:.7}, bisection {bracket:?}; bound flip {flips}; delta*1={star1:.6}; gain error {worst_gain:.1e}; preference {pref_ok}"
        ),
    }
}

const CONFIG: &str = r#"{
  "schema_version": 1,
  "alpha": 0.2, "beta": 0.5, "n_investors": 5, "phi1": 1.0, "phi2": 1.0,
  "seed": 20240817,
  "partition": { "cells": 4 },
  "simulate": { "replications": 50000 },
  "scan": { "dimension": "N", "grid": [1, 2, 5, 10] },
  "repeated": { "delta_grid": [0.05, 0.1], "replications": 5000, "bisect": true, "bracket": [0.001, 0.5], "tolerance": 1e-3 }
}"#;

fn run_cli(config: &Path, command: &str, out: &Path, workers: usize) -> bool {
    Process::new(env!("CARGO_BIN_EXE_cbgame"))
        .args([command, "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(["--format", "csv", "--workers", &workers.to_string()])
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn criterion_8() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    fs::write(&config, CONFIG).unwrap();
    let mut differing = Vec::new();
    let mut files = 0;
    for command in ["solve", "partition", "welfare", "banker", "repeated", "simulate", "scan"] {
        let runs: Vec<_> = [(1, "a"), (1, "b"), (4, "c")]
            .iter()
            .map(|(workers, tag)| {
                let out = dir.path().join(format!("{command}_{tag}"));
                let ok = run_cli(&config, command, &out, *workers);
                (ok, if ok { csv_files(&out) } else { Vec::new() })
            })
            .collect();
        let all_ok = runs.iter().all(|r| r.0) && !runs[0].1.is_empty();
        if !all_ok || runs[0].1 != runs[1].1 || runs[0].1 != runs[2].1 {
            differing.push(command);
        }
        files += runs[0].1.len();
    }
    Outcome {
        pass: differing.is_empty(),
        detail: format!("{files} CSV files compared across 3 runs (workers 1, 1, 4); differing commands: {differing:?}"),
    }
}

fn main() {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let driver = Driver::new(workers).unwrap();
    let criteria: Vec<Criterion> = vec![
        ("1 policy rule", Box::new(criterion_1)),
        ("2 oligopoly bias", Box::new(criterion_2)),
        ("3 partition equilibria", Box::new(criterion_3)),
        ("4 welfare vs Monte Carlo", Box::new(|| criterion_4(&driver))),
        ("5 welfare ranking and decay", Box::new(criterion_5)),
        ("6 delegation", Box::new(criterion_6)),
        ("7 repeated game", Box::new(|| criterion_7(&driver))),
        ("8 reproducibility", Box::new(criterion_8)),
    ];
    let mut failed = 0;
    for (name, run) in &criteria {
        let start = Instant::now();
        let outcome = run();
        let status = if outcome.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {name}: {status} ({:.1}s) {}",
            start.elapsed().as_secs_f64(),
            outcome.detail
        );
        failed += usize::from(!outcome.pass);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
