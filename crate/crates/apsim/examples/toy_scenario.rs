//! The smallest instance that shows why association order matters: two APs
//! on the same channel, two STAs, pinned link rates. The example prints the
//! per-link budget, evaluates all four possible associations, then lets two
//! epsilon-sticky agents find the one split that satisfies both STAs.
//!
//! Run with `cargo run --release --example toy_scenario`.

use apsim::agents::AgentConfig;
use apsim::engine::{
    build_link_table, enumerate_associations, run_simulation, ScenarioInstance, SimParams,
    SimStreams,
};
use apsim::phy::required_airtime;
use apsim::presets::TOY_SCENARIO_TOML;
use apsim::rng::{substream, StreamPurpose};
use apsim::scenario::FixedScenario;

fn main() -> apsim::Result<()> {
    let fixed = FixedScenario::from_toml_str(TOY_SCENARIO_TOML)?;
    let mut params = SimParams::for_bandwidth(fixed.deployment.bandwidth);
    params.rounds = 30;
    let mut shadowing_rng = substream(0, 0, StreamPurpose::Shadowing, 0);
    let instance = ScenarioInstance::from_fixed(&fixed, &params, &mut shadowing_rng);
    let links = build_link_table(
        &instance.deployment,
        &params,
        &instance.shadowing_db,
        &instance.link_overrides,
    )?;

    println!("per-link budget (both APs share one channel):");
    for sta in 0..links.sta_count() {
        for (ap, link) in links.row(sta).iter().enumerate() {
            let airtime = required_airtime(
                &params.timing,
                fixed.sta_loads_mbps[sta] * 1e6,
                params.timing.frame_bits,
                link.data_rate_bps,
                link.legacy_rate_bps,
            )?;
            println!(
                "  STA{sta} -> AP{ap}: {:>4.1} Mb/s link, {:>4.1} Mb/s offered, needs {:.4} of the channel",
                link.data_rate_bps / 1e6,
                fixed.sta_loads_mbps[sta],
                airtime,
            );
        }
    }
    println!();

    println!("every association, evaluated:");
    let outcomes =
        enumerate_associations(&params, &instance.deployment, &links, &fixed.sta_loads_mbps)?;
    for outcome in &outcomes {
        let key: Vec<String> = outcome
            .association
            .iter()
            .enumerate()
            .map(|(sta, ap)| format!("STA{sta}->AP{ap}"))
            .collect();
        let throughput: Vec<String> =
            outcome.throughput_mbps.iter().map(|t| format!("{t:.2}")).collect();
        println!(
            "  {}  throughput {} Mb/s  {}",
            key.join(" "),
            throughput.join(" / "),
            if outcome.fully_satisfied { "<- everyone satisfied" } else { "" }
        );
    }
    println!();

    // two epsilon-sticky agents, starting from strongest signal (both pick
    // AP0), must discover the split on their own
    let agents = vec![AgentConfig::eps_sticky(0.3, 2); 2];
    let mut streams = SimStreams {
        loads: substream(0, 0, StreamPurpose::Loads, 0),
        mobility: substream(0, 0, StreamPurpose::Mobility, 0),
        decisions: substream(0, 0, StreamPurpose::Decisions, 0),
    };
    let output = run_simulation(&params, &instance, &agents, &mut streams)?;
    println!("epsilon-sticky agents (epsilon 0.3), rounds where something changed:");
    let mut last: Option<Vec<_>> = None;
    for record in &output.records {
        let now: Vec<_> = record.stas.iter().map(|s| s.ap).collect();
        if last.as_ref() != Some(&now) {
            let cells: Vec<String> = record
                .stas
                .iter()
                .enumerate()
                .map(|(sta, s)| {
                    format!(
                        "STA{sta}->AP{} ({:.2})",
                        s.ap.expect("toy STAs are always active"),
                        s.normalized_throughput
                    )
                })
                .collect();
            println!("  round {:>2}: {}", record.round, cells.join("  "));
            last = Some(now);
        }
    }
    let final_round = output.records.last().expect("simulation produced rounds");
    let all_satisfied = final_round.stas.iter().all(|s| s.satisfied);
    println!(
        "final round {}: {}",
        final_round.round,
        if all_satisfied { "both STAs fully served" } else { "still contending" }
    );
    Ok(())
}
