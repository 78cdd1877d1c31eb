//! The headline comparison: strongest-signal association versus the two
//! bandit policies on a 16-AP grid serving 64 clustered STAs. Clusters
//! overload their nearest AP, so the gap between policies is the value of
//! spreading load over neighboring cells. Also writes the full report file
//! set to show the output layout.
//!
//! Run with `cargo run --release --example grid_clusters`.

use apsim::presets::{preset, Preset};
use apsim::report;
use apsim::runner::{reassociation_ratio, run_experiment};

fn main() -> apsim::Result<()> {
    let Preset::Experiments(mut variants) = preset("fig4-grid-clusters")? else {
        unreachable!("fig4-grid-clusters is an experiment preset");
    };
    let (_, mut config) = variants.remove(0);
    // 20 paired seeds keep the example under a minute; the preset itself
    // uses 100
    config.seeds = 20;

    let result = run_experiment(&config, 0)?;
    println!(
        "{} APs / {} STAs / {} rounds / {} seeds",
        config.aps.count, config.stas.count, config.rounds, config.seeds
    );
    println!(
        "{:<18} {:>10} {:>12} {:>14}",
        "policy", "mean-final", "unsatisfied", "reassoc/seed"
    );
    for policy in &result.policies {
        println!(
            "{:<18} {:>10.4} {:>12.4} {:>14.1}",
            policy.label,
            policy.report.mean_final.unwrap_or(f64::NAN),
            policy.report.unsatisfied_final.unwrap_or(f64::NAN),
            policy.report.mean_reassociations,
        );
    }
    println!();

    let greedy = result.policy("eps-greedy-0.1").expect("preset defines it");
    let sticky = result.policy("eps-sticky-0.1").expect("preset defines it");
    if let Some(ratio) = reassociation_ratio(greedy, sticky) {
        println!(
            "epsilon-greedy reassociates {ratio:.1}x as often as epsilon-sticky \
             for a {:.1} point lower final mean",
            100.0
                * (sticky.report.mean_final.unwrap_or(0.0)
                    - greedy.report.mean_final.unwrap_or(0.0)),
        );
    }

    println!("\nmean normalized throughput over time:");
    print!("{:<18}", "round");
    let checkpoints = [0usize, 10, 30, 60, 120, config.rounds as usize - 1];
    for round in checkpoints {
        print!(" {round:>7}");
    }
    println!();
    for policy in &result.policies {
        print!("{:<18}", policy.label);
        for round in checkpoints {
            match policy.report.per_round_mean[round] {
                Some(mean) => print!(" {mean:>7.3}"),
                None => print!(" {:>7}", "-"),
            }
        }
        println!();
    }

    let root = report::output_root(None);
    let dir = report::fresh_dir(&root, "example-grid-clusters")?;
    report::write_experiment_report(&dir, &result)?;
    println!("\nreport files (config echo, scalars, per-round/boxplot/CDF series):");
    println!("  {}", dir.display());
    Ok(())
}
