//! A filling network: STAs power on at uniform random rounds across an
//! arrival window instead of all at once. Early arrivals learn rewards on
//! an empty network that stop being true as it fills; windowed-reward
//! variants forget that stale evidence and re-settle faster.
//!
//! Run with `cargo run --release --example progressive_arrivals`.

use apsim::presets::{preset, Preset};
use apsim::runner::run_experiment;

fn main() -> apsim::Result<()> {
    let Preset::Experiments(mut variants) = preset("fig13-arrivals")? else {
        unreachable!("fig13-arrivals is an experiment preset");
    };
    let (_, mut config) = variants.remove(0);
    // trimmed from the preset's 100 seeds to keep the example quick
    config.seeds = 15;

    let result = run_experiment(&config, 0)?;
    println!(
        "64 STAs arriving over rounds 0..{}, variable loads, {} seeds",
        config.stas.arrival_window, config.seeds
    );
    println!("satisfied fraction over time (range shrinks as STAs arrive, then policies recover):");
    let checkpoints = [0usize, 20, 40, 60, 120, config.rounds as usize - 1];
    print!("{:<22}", "round");
    for round in checkpoints {
        print!(" {round:>7}");
    }
    println!();
    for policy in &result.policies {
        print!("{:<22}", policy.label);
        for round in checkpoints {
            match policy.report.per_round_satisfied[round] {
                Some(fraction) => print!(" {fraction:>7.3}"),
                None => print!(" {:>7}", "-"),
            }
        }
        println!();
    }
    Ok(())
}
