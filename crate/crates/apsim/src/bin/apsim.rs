//! Command-line front end for the simulator library.
//!
//! Verbs: `run` executes a TOML experiment configuration, `preset` runs a
//! named canned experiment, `enumerate` evaluates every association of a
//! fixed scenario file, and `validate` checks a configuration without
//! running anything. Exit codes: 0 on success, 2 for configuration
//! errors, 3 for runtime failures.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use apsim::config::{self, ExperimentConfig};
use apsim::engine::{
    build_link_table, enumerate_associations, AssociationOutcome, ScenarioInstance, SimParams,
};
use apsim::error::{Error, Result};
use apsim::presets::{preset, Preset, PRESET_NAMES, TOY_SCENARIO_TOML};
use apsim::report;
use apsim::rng::{substream, StreamPurpose};
use apsim::runner::{build_instance, run_experiment, run_policy, ExperimentResult};
use apsim::scenario::FixedScenario;

#[derive(Parser)]
#[command(
    name = "apsim",
    version,
    about = "Flow-level simulator of decentralized AP selection in enterprise WLANs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a TOML configuration file.
    Run {
        /// Experiment configuration; an empty file means all defaults.
        config: PathBuf,
        /// Override one configuration key, e.g. --set rounds=60 or
        /// --set policy.1.epsilon=0.25. Repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Worker threads for seed-level parallelism; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        parallelism: usize,
        /// Output root; defaults to $APSIM_OUT, then ./apsim-out.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Directory name under the output root; defaults to the config
        /// file stem. A numeric suffix is added if the name is taken.
        #[arg(long)]
        name: Option<String>,
        /// Also export full trace/occupancy/summary files for the first N
        /// seeds of every policy.
        #[arg(long, default_value_t = 0, value_name = "N")]
        trace_seeds: u32,
    },
    /// Run a named experiment preset; `apsim preset list` shows the names.
    Preset {
        name: String,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long, default_value_t = 0)]
        parallelism: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 0, value_name = "N")]
        trace_seeds: u32,
    },
    /// Evaluate every possible association of a fixed scenario file and
    /// print the outcome table.
    Enumerate {
        scenario: PathBuf,
        /// Seed for shadowing draws when the scenario enables shadowing.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the table to this CSV file.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Parse and validate a configuration file, then exit.
    Validate {
        config: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::InvalidInput(_) | Error::Parse(_) => ExitCode::from(2),
                Error::Io(_) | Error::Internal(_) => ExitCode::from(3),
            }
        }
    }
}

fn read_input(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Run { config: path, set, parallelism, out, name, trace_seeds } => {
            let config = config::with_overrides(&read_input(&path)?, &set)?;
            config.validate()?;
            let run_name = name.unwrap_or_else(|| {
                path.file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "run".to_string())
            });
            let root = report::output_root(out.as_deref());
            let dir = report::fresh_dir(&root, &run_name)?;
            run_and_report(&run_name, &config, parallelism, &dir, trace_seeds)?;
            println!("results: {}", dir.display());
            Ok(())
        }
        Command::Preset { name, set, parallelism, out, trace_seeds } => {
            if name == "list" {
                for preset_name in PRESET_NAMES {
                    println!("{preset_name}");
                }
                return Ok(());
            }
            match preset(&name)? {
                Preset::ToyEnumeration => {
                    let fixed = FixedScenario::from_toml_str(TOY_SCENARIO_TOML)?;
                    print_enumeration(&fixed, 0, None)
                }
                Preset::Experiments(variants) => {
                    let root = report::output_root(out.as_deref());
                    let dir = report::fresh_dir(&root, &name)?;
                    for (label, base) in &variants {
                        let config = if set.is_empty() {
                            base.clone()
                        } else {
                            config::with_overrides(&base.to_toml_string(), &set)?
                        };
                        config.validate()?;
                        let subdir = dir.join(label);
                        run_and_report(
                            &format!("{name}/{label}"),
                            &config,
                            parallelism,
                            &subdir,
                            trace_seeds,
                        )?;
                        println!();
                    }
                    println!("results: {}", dir.display());
                    Ok(())
                }
            }
        }
        Command::Enumerate { scenario, seed, csv } => {
            let fixed = FixedScenario::from_toml_str(&read_input(&scenario)?)?;
            print_enumeration(&fixed, seed, csv.as_deref())
        }
        Command::Validate { config: path, set } => {
            let config = config::with_overrides(&read_input(&path)?, &set)?;
            config.validate()?;
            println!(
                "ok: {} APs, {} STAs, {} policies, {} rounds, {} seeds",
                config.aps.count,
                config.stas.count,
                config.policies.len(),
                config.rounds,
                config.seeds
            );
            Ok(())
        }
    }
}

/// Run one experiment, write its report files, and print the per-policy
/// scalar table.
fn run_and_report(
    title: &str,
    config: &ExperimentConfig,
    parallelism: usize,
    dir: &Path,
    trace_seeds: u32,
) -> Result<()> {
    eprintln!(
        "running {title}: {} seeds x {} rounds, {} policies",
        config.seeds,
        config.rounds,
        config.policies.len()
    );
    let result = run_experiment(config, parallelism)?;
    report::write_experiment_report(dir, &result)?;
    if trace_seeds > 0 {
        export_traces(&dir.join("traces"), config, trace_seeds)?;
    }
    println!("== {title} ==");
    print_policy_table(&result);
    Ok(())
}

fn fmt_opt(value: Option<f64>) -> String {
    value.map(|v| format!("{v:.4}")).unwrap_or_else(|| "-".to_string())
}

fn print_policy_table(result: &ExperimentResult) {
    println!(
        "{:<26} {:>10} {:>12} {:>15}",
        "policy", "mean-final", "unsatisfied", "reassociations"
    );
    for policy in &result.policies {
        println!(
            "{:<26} {:>10} {:>12} {:>15}",
            policy.label,
            fmt_opt(policy.report.mean_final),
            fmt_opt(policy.report.unsatisfied_final),
            policy.report.total_reassociations
        );
    }
}

/// Re-run the first `seeds` seeds of every policy and export their full
/// traces. `run_policy` replays the exact runs that fed the aggregate
/// report, so the files match it bit for bit.
fn export_traces(dir: &Path, config: &ExperimentConfig, seeds: u32) -> Result<()> {
    let params = config.sim_params()?;
    for seed in 0..seeds.min(config.seeds) as u64 {
        let instance = build_instance(config, &params, seed)?;
        for (index, policy) in config.policies.iter().enumerate() {
            let (output, _) = run_policy(config, &params, &instance, seed, index)?;
            report::write_seed_artifacts(
                dir,
                config,
                &policy.display_label(),
                seed,
                &output.records,
            )?;
        }
    }
    Ok(())
}

fn association_key(outcome: &AssociationOutcome) -> String {
    outcome
        .association
        .iter()
        .enumerate()
        .map(|(sta, ap)| format!("STA{sta}->AP{ap}"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Print the exhaustive association table of a fixed scenario, flagging
/// the assignments that satisfy every STA, and optionally write the same
/// table as CSV.
fn print_enumeration(fixed: &FixedScenario, seed: u64, csv: Option<&Path>) -> Result<()> {
    let params = SimParams::for_bandwidth(fixed.deployment.bandwidth);
    let mut shadowing_rng = substream(seed, 0, StreamPurpose::Shadowing, 0);
    let instance = ScenarioInstance::from_fixed(fixed, &params, &mut shadowing_rng);
    let links = build_link_table(
        &instance.deployment,
        &params,
        &instance.shadowing_db,
        &instance.link_overrides,
    )?;
    let outcomes =
        enumerate_associations(&params, &instance.deployment, &links, &fixed.sta_loads_mbps)?;

    let stas = fixed.deployment.sta_count();
    let loads = fixed
        .sta_loads_mbps
        .iter()
        .map(|l| format!("{l}"))
        .collect::<Vec<_>>()
        .join(", ");
    println!(
        "scenario: {} APs, {} STAs, offered loads {} Mb/s",
        fixed.deployment.ap_count(),
        stas,
        loads
    );
    let key_width = outcomes.iter().map(|o| association_key(o).len()).max().unwrap_or(11).max(11);
    println!(
        "{:<key_width$}  {:<18} {:<18} {}",
        "association", "throughput (Mb/s)", "normalized", "all satisfied"
    );
    for outcome in &outcomes {
        let throughput = outcome
            .throughput_mbps
            .iter()
            .map(|t| format!("{t:.2}"))
            .collect::<Vec<_>>()
            .join(" ");
        let normalized = outcome
            .normalized_throughput
            .iter()
            .map(|n| format!("{n:.3}"))
            .collect::<Vec<_>>()
            .join(" ");
        println!(
            "{:<key_width$}  {:<18} {:<18} {}",
            association_key(outcome),
            throughput,
            normalized,
            if outcome.fully_satisfied { "yes" } else { "no" }
        );
    }
    let winners: Vec<String> =
        outcomes.iter().filter(|o| o.fully_satisfied).map(association_key).collect();
    if winners.is_empty() {
        println!("no assignment satisfies every STA");
    } else {
        println!("fully satisfying: {}", winners.join(" | "));
    }

    if let Some(path) = csv {
        let mut writer = csv::Writer::from_path(path)?;
        let mut header: Vec<String> = (0..stas).map(|s| format!("sta{s}_ap")).collect();
        header.extend((0..stas).map(|s| format!("sta{s}_throughput_mbps")));
        header.extend((0..stas).map(|s| format!("sta{s}_normalized")));
        header.push("fully_satisfied".to_string());
        writer.write_record(&header)?;
        for outcome in &outcomes {
            let mut row: Vec<String> =
                outcome.association.iter().map(|ap| ap.to_string()).collect();
            row.extend(outcome.throughput_mbps.iter().map(|t| t.to_string()));
            row.extend(outcome.normalized_throughput.iter().map(|n| n.to_string()));
            row.push(outcome.fully_satisfied.to_string());
            writer.write_record(&row)?;
        }
        writer.flush()?;
    }
    Ok(())
}
