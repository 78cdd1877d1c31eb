//! How much exploration is too much: both bandit policies swept over
//! epsilon from 0.05 to 0.75, plus decreasing-epsilon variants that start
//! at 1.0 and cool as 1/sqrt(t). Small epsilons win because every
//! exploration round costs real throughput; stickiness buys back most of
//! what exploration spends.
//!
//! Run with `cargo run --release --example epsilon_sweep`.

use apsim::metrics::paired_t_statistic;
use apsim::presets::{preset, Preset};
use apsim::runner::run_experiment;

fn main() -> apsim::Result<()> {
    let Preset::Experiments(mut variants) = preset("fig9-epsilon-sweep")? else {
        unreachable!("fig9-epsilon-sweep is an experiment preset");
    };
    let (_, mut config) = variants.remove(0);
    // the preset runs 100 seeds; a dozen is enough to see the ordering
    config.seeds = 12;

    let result = run_experiment(&config, 0)?;
    println!(
        "{:<26} {:>10} {:>12} {:>14}",
        "policy", "mean-final", "unsatisfied", "reassoc/seed"
    );
    for policy in &result.policies {
        println!(
            "{:<26} {:>10.4} {:>12.4} {:>14.1}",
            policy.label,
            policy.report.mean_final.unwrap_or(f64::NAN),
            policy.report.unsatisfied_final.unwrap_or(f64::NAN),
            policy.report.mean_reassociations,
        );
    }

    // the seeds are paired: every policy saw the same deployments and
    // loads, so per-seed differences isolate the policy effect
    let low = result.policy("eps-greedy-0.05").expect("preset defines it");
    let high = result.policy("eps-greedy-0.5").expect("preset defines it");
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for (x, y) in low.report.seed_final_means.iter().zip(&high.report.seed_final_means) {
        if let (Some(x), Some(y)) = (x, y) {
            a.push(*x);
            b.push(*y);
        }
    }
    if let Some(t) = paired_t_statistic(&a, &b) {
        println!(
            "\npaired t statistic, eps-greedy 0.05 vs 0.5 final means: {t:.2} \
             ({} paired seeds; positive favors 0.05)",
            a.len()
        );
    }
    Ok(())
}
