//! Incremental rollout: only a fraction of STAs run the epsilon-sticky
//! agent while the rest keep strongest-signal association. Agents vacating
//! overloaded channels free airtime for everyone on them, so the
//! strongest-signal holdouts improve too, and half a deployment captures
//! most of the benefit of a full one.
//!
//! Run with `cargo run --release --example partial_agents`.

use apsim::presets::{preset, Preset};
use apsim::runner::run_experiment;

fn main() -> apsim::Result<()> {
    let Preset::Experiments(mut variants) = preset("fig12-agent-fraction")? else {
        unreachable!("fig12-agent-fraction is an experiment preset");
    };
    let (_, mut config) = variants.remove(0);
    // trimmed from the preset's 100 seeds to keep the example quick
    config.seeds = 15;

    let result = run_experiment(&config, 0)?;
    println!(
        "{:<22} {:>10} {:>12} {:>12}",
        "policy", "mean-final", "agents-only", "non-agents"
    );
    for policy in &result.policies {
        let fmt = |v: Option<f64>| match v {
            Some(v) => format!("{v:.4}"),
            None => "-".to_string(),
        };
        println!(
            "{:<22} {:>10} {:>12} {:>12}",
            policy.label,
            fmt(policy.report.mean_final),
            fmt(policy.report.agent_mean_final),
            fmt(policy.report.non_agent_mean_final),
        );
    }
    println!(
        "\nthe first row is the all-strongest-signal baseline; compare its \
         mean-final\nagainst the non-agent column of the partial rollouts."
    );
    Ok(())
}
