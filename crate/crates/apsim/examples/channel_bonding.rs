//! Channel width trade-off: 40 and 80 MHz channels carry roughly twice and
//! four times the 20 MHz rate, but the band only holds 4 and 2 of them, so
//! co-channel contention grows as fast as the links speed up. The bandit
//! policies keep more STAs satisfied at every width.
//!
//! Run with `cargo run --release --example channel_bonding`.

use apsim::presets::{preset, Preset};
use apsim::runner::run_experiment;

fn main() -> apsim::Result<()> {
    let Preset::Experiments(variants) = preset("fig6-bonding")? else {
        unreachable!("fig6-bonding is an experiment preset");
    };
    println!(
        "{:<8} {:<18} {:>10} {:>12} {:>14}",
        "width", "policy", "mean-final", "unsatisfied", "reassoc/seed"
    );
    for (label, mut config) in variants {
        // trimmed from the preset's 100 seeds to keep the example quick
        config.seeds = 15;
        let result = run_experiment(&config, 0)?;
        for policy in &result.policies {
            println!(
                "{:<8} {:<18} {:>10.4} {:>12.4} {:>14.1}",
                label,
                policy.label,
                policy.report.mean_final.unwrap_or(f64::NAN),
                policy.report.unsatisfied_final.unwrap_or(f64::NAN),
                policy.report.mean_reassociations,
            );
        }
        println!();
    }
    println!("note: at 80 MHz only two channels exist, so half the grid shares");
    println!("each one and even the best policy cannot undo the contention.");
    Ok(())
}
