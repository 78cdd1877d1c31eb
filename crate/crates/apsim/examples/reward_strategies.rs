//! Reward bookkeeping under change: a lifetime average never forgets, so
//! rewards earned on a half-empty network keep steering agents long after
//! the network has filled up. Sliding-window and linearly-weighted rewards
//! fade old evidence. STAs arrive over the first 60 rounds to create
//! exactly that kind of drift.
//!
//! Run with `cargo run --release --example reward_strategies`.

use apsim::config::{ExperimentConfig, LoadModeConfig, PolicyConfig, PolicyKind, RewardKind};
use apsim::runner::run_experiment;

fn main() -> apsim::Result<()> {
    let mut config = ExperimentConfig::default();
    config.seeds = 15;
    config.stas.arrival_window = 60;
    config.load.mode = LoadModeConfig::Variable;
    let sticky = PolicyConfig {
        kind: PolicyKind::EpsSticky,
        epsilon: 0.1,
        sticky_max: 2,
        ..PolicyConfig::default()
    };
    config.policies = vec![
        PolicyConfig { kind: PolicyKind::StrongestSignal, ..PolicyConfig::default() },
        PolicyConfig { reward: RewardKind::Average, ..sticky.clone() },
        PolicyConfig { reward: RewardKind::Window, window: 60, ..sticky.clone() },
        PolicyConfig { reward: RewardKind::Weighted, ..sticky },
    ];

    let result = run_experiment(&config, 0)?;
    println!(
        "64 STAs arriving over {} rounds, variable loads, {} seeds",
        config.stas.arrival_window, config.seeds
    );
    println!(
        "{:<22} {:>10} {:>12}   mean throughput at round",
        "policy", "mean-final", "unsatisfied"
    );
    let checkpoints = [60usize, 120, config.rounds as usize - 1];
    for policy in &result.policies {
        print!(
            "{:<22} {:>10.4} {:>12.4}  ",
            policy.label,
            policy.report.mean_final.unwrap_or(f64::NAN),
            policy.report.unsatisfied_final.unwrap_or(f64::NAN),
        );
        for round in checkpoints {
            match policy.report.per_round_mean[round] {
                Some(mean) => print!(" r{round}={mean:.3}"),
                None => print!(" r{round}=-"),
            }
        }
        println!();
    }
    Ok(())
}
