//! Result files on disk: per-run traces, experiment-level report series,
//! resolved-configuration echoes, and collision-free output directories.
//!
//! Two layers of artifacts exist. A single `(policy, seed)` run exports a
//! round-by-round trace CSV, a parallel per-AP occupancy CSV and a JSON
//! summary ([`write_seed_artifacts`]). A full experiment exports scalar
//! results as JSON plus per-round, boxplot and CDF series as CSV
//! ([`write_experiment_report`]). Trace CSVs are lossless for everything
//! the summary statistics need: [`read_trace_csv`] reconstructs records
//! whose [`summarize_seed`] output matches the in-memory one.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::engine::{RoundRecord, StaRound};
use crate::error::{Error, Result};
use crate::metrics::{summarize_seed, SeedSummary};
use crate::runner::{reassociation_ratio, ExperimentResult};

/// Environment variable that overrides the default output root.
pub const OUTPUT_ROOT_ENV: &str = "APSIM_OUT";

/// Output root used when neither a flag nor the environment names one.
pub const DEFAULT_OUTPUT_ROOT: &str = "apsim-out";

const TRACE_HEADER: [&str; 8] = [
    "round",
    "sta_id",
    "ap_id",
    "load_mbps",
    "throughput_mbps",
    "normalized_throughput",
    "satisfied",
    "reassociated",
];

const OCCUPANCY_HEADER: [&str; 4] = ["round", "ap_id", "raw_occupancy", "offered_load_mbps"];

/// Resolve the output root: an explicit path wins, then the `APSIM_OUT`
/// environment variable, then `apsim-out` under the working directory.
pub fn output_root(explicit: Option<&Path>) -> PathBuf {
    if let Some(path) = explicit {
        return path.to_path_buf();
    }
    match std::env::var_os(OUTPUT_ROOT_ENV) {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => PathBuf::from(DEFAULT_OUTPUT_ROOT),
    }
}

/// Create and return `root/name`, falling back to `root/name-2`, `-3`, ...
/// when the name is taken. Every run writes into a directory of its own, so
/// a rerun can never overwrite or append to earlier results.
pub fn fresh_dir(root: &Path, name: &str) -> Result<PathBuf> {
    fs::create_dir_all(root)?;
    for attempt in 1..10_000u32 {
        let candidate = if attempt == 1 {
            root.join(name)
        } else {
            root.join(format!("{name}-{attempt}"))
        };
        match fs::create_dir(&candidate) {
            Ok(()) => return Ok(candidate),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(e.into()),
        }
    }
    Err(Error::Internal(format!(
        "no free directory name for {name:?} under {}",
        root.display()
    )))
}

/// Write one run's round-by-round trace: one row per `(round, STA)` pair.
/// STAs that have not arrived yet carry an empty `ap_id` and zero-valued
/// numeric columns. Floats use the shortest representation that parses back
/// to the identical value, so the file is exact.
pub fn write_trace_csv(path: &Path, records: &[RoundRecord]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(TRACE_HEADER)?;
    for record in records {
        for (sta, row) in record.stas.iter().enumerate() {
            writer.write_record(&[
                record.round.to_string(),
                sta.to_string(),
                row.ap.map(|ap| ap.to_string()).unwrap_or_default(),
                row.load_mbps.to_string(),
                row.throughput_mbps.to_string(),
                row.normalized_throughput.to_string(),
                row.satisfied.to_string(),
                row.reassociated.to_string(),
            ])?;
        }
    }
    writer.flush()?;
    Ok(())
}

/// Write the per-AP occupancy file parallel to a trace: one row per
/// `(round, AP)` with the raw occupancy and the summed offered load.
pub fn write_occupancy_csv(path: &Path, records: &[RoundRecord]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(OCCUPANCY_HEADER)?;
    for record in records {
        for (ap, row) in record.aps.iter().enumerate() {
            writer.write_record(&[
                record.round.to_string(),
                ap.to_string(),
                row.raw_occupancy.to_string(),
                row.offered_load_mbps.to_string(),
            ])?;
        }
    }
    writer.flush()?;
    Ok(())
}

fn parse_f64(field: &str, what: &str, line: u64) -> Result<f64> {
    field
        .parse()
        .map_err(|_| Error::Parse(format!("line {line}: bad {what} {field:?}")))
}

fn parse_bool(field: &str, what: &str, line: u64) -> Result<bool> {
    field
        .parse()
        .map_err(|_| Error::Parse(format!("line {line}: bad {what} {field:?}")))
}

/// Read a trace CSV back into round records. A row's STA counts as active
/// exactly when its `ap_id` field is non-empty, matching how traces are
/// written. The per-AP side of each record is not part of the trace file,
/// so `aps` comes back empty; everything [`summarize_seed`] consumes is
/// reconstructed losslessly except the out-of-range flag, which the trace
/// schema does not carry.
pub fn read_trace_csv(path: &Path) -> Result<Vec<RoundRecord>> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    if headers.iter().ne(TRACE_HEADER) {
        return Err(Error::Parse(format!(
            "unexpected trace header {:?} in {}",
            headers.iter().collect::<Vec<_>>(),
            path.display()
        )));
    }
    let mut rounds: BTreeMap<u32, BTreeMap<usize, StaRound>> = BTreeMap::new();
    let mut sta_count = 0usize;
    for (index, row) in reader.records().enumerate() {
        let line = index as u64 + 2;
        let row = row?;
        if row.len() != TRACE_HEADER.len() {
            return Err(Error::Parse(format!("line {line}: expected 8 fields")));
        }
        let round: u32 = row[0]
            .parse()
            .map_err(|_| Error::Parse(format!("line {line}: bad round {:?}", &row[0])))?;
        let sta: usize = row[1]
            .parse()
            .map_err(|_| Error::Parse(format!("line {line}: bad sta_id {:?}", &row[1])))?;
        let ap = if row[2].is_empty() {
            None
        } else {
            Some(row[2].parse().map_err(|_| {
                Error::Parse(format!("line {line}: bad ap_id {:?}", &row[2]))
            })?)
        };
        let record = StaRound {
            active: ap.is_some(),
            ap,
            load_mbps: parse_f64(&row[3], "load_mbps", line)?,
            throughput_mbps: parse_f64(&row[4], "throughput_mbps", line)?,
            normalized_throughput: parse_f64(&row[5], "normalized_throughput", line)?,
            satisfied: parse_bool(&row[6], "satisfied", line)?,
            reassociated: parse_bool(&row[7], "reassociated", line)?,
            out_of_range: false,
        };
        if rounds.entry(round).or_default().insert(sta, record).is_some() {
            return Err(Error::Parse(format!(
                "line {line}: duplicate row for round {round}, sta {sta}"
            )));
        }
        sta_count = sta_count.max(sta + 1);
    }
    let inactive = StaRound {
        active: false,
        ap: None,
        load_mbps: 0.0,
        throughput_mbps: 0.0,
        normalized_throughput: 0.0,
        satisfied: false,
        reassociated: false,
        out_of_range: false,
    };
    Ok(rounds
        .into_iter()
        .map(|(round, mut by_sta)| RoundRecord {
            round,
            stas: (0..sta_count)
                .map(|sta| by_sta.remove(&sta).unwrap_or_else(|| inactive.clone()))
                .collect(),
            aps: Vec::new(),
        })
        .collect())
}

#[derive(Serialize)]
struct SeedSummaryDoc<'a> {
    seed: u64,
    policy: &'a str,
    rounds: usize,
    final_active: usize,
    final_mean: Option<f64>,
    final_unsatisfied_fraction: Option<f64>,
    reassociations: u64,
    out_of_range_rounds: u64,
    config: &'a ExperimentConfig,
}

/// Write one run's JSON summary: headline scalars for the seed alongside an
/// echo of the resolved configuration that produced them.
pub fn write_seed_summary_json(
    path: &Path,
    config: &ExperimentConfig,
    policy: &str,
    seed: u64,
    summary: &SeedSummary,
) -> Result<()> {
    let doc = SeedSummaryDoc {
        seed,
        policy,
        rounds: summary.rounds.len(),
        final_active: summary.final_per_sta.len(),
        final_mean: summary.final_mean(),
        final_unsatisfied_fraction: summary.final_unsatisfied_fraction(),
        reassociations: summary.reassociations,
        out_of_range_rounds: summary.out_of_range_rounds,
        config,
    };
    fs::write(path, serde_json::to_string_pretty(&doc)?)?;
    Ok(())
}

/// Write one `(policy, seed)` run's full artifact set into `dir`:
/// `{policy}-seed{seed}.trace.csv`, the parallel `.occupancy.csv`, and a
/// `.summary.json` with the config echo. Returns the summary it computed.
pub fn write_seed_artifacts(
    dir: &Path,
    config: &ExperimentConfig,
    policy: &str,
    seed: u64,
    records: &[RoundRecord],
) -> Result<SeedSummary> {
    fs::create_dir_all(dir)?;
    let stem = format!("{policy}-seed{seed}");
    write_trace_csv(&dir.join(format!("{stem}.trace.csv")), records)?;
    write_occupancy_csv(&dir.join(format!("{stem}.occupancy.csv")), records)?;
    let summary = summarize_seed(records);
    write_seed_summary_json(
        &dir.join(format!("{stem}.summary.json")),
        config,
        policy,
        seed,
        &summary,
    )?;
    Ok(summary)
}

#[derive(Serialize)]
struct PolicyScalars<'a> {
    label: &'a str,
    seeds: usize,
    mean_final: Option<f64>,
    unsatisfied_final: Option<f64>,
    total_reassociations: u64,
    mean_reassociations: f64,
    total_out_of_range_rounds: u64,
    agent_mean_final: Option<f64>,
    non_agent_mean_final: Option<f64>,
}

#[derive(Serialize)]
struct ReportDoc<'a> {
    master_seed: u64,
    seeds: u32,
    rounds: u32,
    policies: Vec<PolicyScalars<'a>>,
    /// `"a/b"` maps to total reassociations of policy `a` per reassociation
    /// of policy `b` over the same paired seeds.
    reassociation_ratios: BTreeMap<String, f64>,
}

fn fmt_opt(value: Option<f64>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

/// Write a full experiment's report files into `dir`:
///
/// * `config.resolved.toml`: the configuration after defaults and overrides,
/// * `report.json`: per-policy scalars plus pairwise reassociation ratios,
/// * `per_round.csv`: across-seed mean and satisfied fraction per round,
/// * `boxplot.csv`: across-seed five-number summary per round,
/// * `cdf.csv`: empirical CDF of final-round per-STA normalized throughput.
///
/// Rounds before the first arrival have no active STAs; their numeric CSV
/// fields stay empty rather than inventing zeros.
pub fn write_experiment_report(dir: &Path, result: &ExperimentResult) -> Result<()> {
    fs::create_dir_all(dir)?;
    let config = &result.config;
    fs::write(dir.join("config.resolved.toml"), config.to_toml_string())?;

    let mut ratios = BTreeMap::new();
    for a in &result.policies {
        for b in &result.policies {
            if a.label == b.label {
                continue;
            }
            if let Some(ratio) = reassociation_ratio(a, b) {
                ratios.insert(format!("{}/{}", a.label, b.label), ratio);
            }
        }
    }
    let doc = ReportDoc {
        master_seed: config.master_seed,
        seeds: config.seeds,
        rounds: config.rounds,
        policies: result
            .policies
            .iter()
            .map(|p| PolicyScalars {
                label: &p.label,
                seeds: p.report.seeds,
                mean_final: p.report.mean_final,
                unsatisfied_final: p.report.unsatisfied_final,
                total_reassociations: p.report.total_reassociations,
                mean_reassociations: p.report.mean_reassociations,
                total_out_of_range_rounds: p.report.total_out_of_range_rounds,
                agent_mean_final: p.report.agent_mean_final,
                non_agent_mean_final: p.report.non_agent_mean_final,
            })
            .collect(),
        reassociation_ratios: ratios,
    };
    fs::write(dir.join("report.json"), serde_json::to_string_pretty(&doc)?)?;

    let mut per_round = csv::Writer::from_path(dir.join("per_round.csv"))?;
    per_round.write_record(["policy", "round", "mean_normalized_throughput", "satisfied_fraction"])?;
    for policy in &result.policies {
        let report = &policy.report;
        for round in 0..report.per_round_mean.len() {
            per_round.write_record(&[
                policy.label.clone(),
                round.to_string(),
                fmt_opt(report.per_round_mean[round]),
                fmt_opt(report.per_round_satisfied[round]),
            ])?;
        }
    }
    per_round.flush()?;

    let mut boxplot = csv::Writer::from_path(dir.join("boxplot.csv"))?;
    boxplot.write_record(["policy", "round", "min", "q1", "median", "q3", "max"])?;
    for policy in &result.policies {
        for (round, stats) in policy.report.per_round_box.iter().enumerate() {
            let fields = match stats {
                Some(b) => [
                    b.min.to_string(),
                    b.q1.to_string(),
                    b.median.to_string(),
                    b.q3.to_string(),
                    b.max.to_string(),
                ],
                None => Default::default(),
            };
            boxplot.write_record(
                [policy.label.clone(), round.to_string()].iter().chain(fields.iter()),
            )?;
        }
    }
    boxplot.flush()?;

    let mut cdf = csv::Writer::from_path(dir.join("cdf.csv"))?;
    cdf.write_record(["policy", "value", "cumulative_probability"])?;
    for policy in &result.policies {
        for &(value, probability) in &policy.report.final_ecdf {
            cdf.write_record(&[
                policy.label.clone(),
                value.to_string(),
                probability.to_string(),
            ])?;
        }
    }
    cdf.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::runner::{build_instance, run_experiment, run_policy};

    fn small_config() -> ExperimentConfig {
        let mut config = ExperimentConfig::default();
        config.seeds = 2;
        config.rounds = 30;
        config.aps.count = 4;
        config.stas.count = 10;
        config.stas.cluster_size = 5;
        config
    }

    #[test]
    fn output_root_precedence() {
        std::env::set_var(OUTPUT_ROOT_ENV, "/tmp/from-env");
        assert_eq!(output_root(Some(Path::new("/tmp/explicit"))), Path::new("/tmp/explicit"));
        assert_eq!(output_root(None), Path::new("/tmp/from-env"));
        std::env::remove_var(OUTPUT_ROOT_ENV);
        assert_eq!(output_root(None), Path::new(DEFAULT_OUTPUT_ROOT));
    }

    #[test]
    fn fresh_dir_never_reuses_a_directory() {
        let root = tempfile::tempdir().unwrap();
        let first = fresh_dir(root.path(), "run").unwrap();
        std::fs::write(first.join("sentinel"), "keep").unwrap();
        let second = fresh_dir(root.path(), "run").unwrap();
        let third = fresh_dir(root.path(), "run").unwrap();
        assert_eq!(first, root.path().join("run"));
        assert_eq!(second, root.path().join("run-2"));
        assert_eq!(third, root.path().join("run-3"));
        // earlier outputs are untouched
        assert_eq!(std::fs::read_to_string(first.join("sentinel")).unwrap(), "keep");
    }

    #[test]
    fn fresh_dir_creates_missing_roots() {
        let root = tempfile::tempdir().unwrap();
        let nested = root.path().join("a/b/c");
        let dir = fresh_dir(&nested, "run").unwrap();
        assert!(dir.is_dir());
    }

    #[test]
    fn trace_csv_round_trips_through_summarize() {
        let config = small_config();
        let params = config.sim_params().unwrap();
        let instance = build_instance(&config, &params, 0).unwrap();
        // policy 1 is an explorer, so the trace contains reassociations
        let (output, _) = run_policy(&config, &params, &instance, 0, 1).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        write_trace_csv(&path, &output.records).unwrap();

        let reread = read_trace_csv(&path).unwrap();
        assert_eq!(reread.len(), output.records.len());
        let expected = summarize_seed(&output.records);
        let mut got = summarize_seed(&reread);
        assert!(expected.reassociations > 0);
        // the trace schema does not carry the out-of-range flag; everything
        // else must match bit for bit
        got.out_of_range_rounds = expected.out_of_range_rounds;
        assert_eq!(got, expected);
    }

    #[test]
    fn trace_rows_cover_every_sta_every_round() {
        let config = small_config();
        let params = config.sim_params().unwrap();
        let instance = build_instance(&config, &params, 0).unwrap();
        let (output, _) = run_policy(&config, &params, &instance, 0, 0).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        write_trace_csv(&path, &output.records).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let rows = text.lines().count();
        assert_eq!(rows, 1 + config.rounds as usize * config.stas.count);
    }

    #[test]
    fn read_rejects_foreign_headers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "a,b,c\n1,2,3\n").unwrap();
        assert!(matches!(read_trace_csv(&path), Err(Error::Parse(_))));
    }

    #[test]
    fn occupancy_rows_cover_every_ap_every_round() {
        let config = small_config();
        let params = config.sim_params().unwrap();
        let instance = build_instance(&config, &params, 0).unwrap();
        let (output, _) = run_policy(&config, &params, &instance, 0, 0).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("occupancy.csv");
        write_occupancy_csv(&path, &output.records).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 1 + config.rounds as usize * config.aps.count);
        assert!(text.starts_with("round,ap_id,raw_occupancy,offered_load_mbps\n"));
    }

    #[test]
    fn seed_summary_json_echoes_the_config() {
        let config = small_config();
        let params = config.sim_params().unwrap();
        let instance = build_instance(&config, &params, 0).unwrap();
        let (output, _) = run_policy(&config, &params, &instance, 0, 0).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let summary = write_seed_artifacts(dir.path(), &config, "strongest-signal", 0, &output.records)
            .unwrap();
        assert_eq!(summary, summarize_seed(&output.records));

        let text =
            std::fs::read_to_string(dir.path().join("strongest-signal-seed0.summary.json"))
                .unwrap();
        let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(doc["seed"], 0);
        assert_eq!(doc["policy"], "strongest-signal");
        assert_eq!(doc["config"]["stas"]["count"], 10);
        assert_eq!(doc["config"]["master_seed"], config.master_seed);
        assert!(doc["final_mean"].is_number());
    }

    #[test]
    fn experiment_report_writes_all_files() {
        let config = small_config();
        let result = run_experiment(&config, 1).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_experiment_report(dir.path(), &result).unwrap();

        let resolved = std::fs::read_to_string(dir.path().join("config.resolved.toml")).unwrap();
        assert!(resolved.contains("rounds = 30"));

        let report: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
                .unwrap();
        assert_eq!(report["policies"].as_array().unwrap().len(), config.policies.len());
        assert_eq!(report["seeds"], 2);
        let ratios = report["reassociation_ratios"].as_object().unwrap();
        // explorer totals relative to each other are always defined
        assert!(ratios.contains_key("eps-greedy-0.05/eps-sticky-0.1"));

        let per_round = std::fs::read_to_string(dir.path().join("per_round.csv")).unwrap();
        assert_eq!(
            per_round.lines().count(),
            1 + config.policies.len() * config.rounds as usize
        );
        let boxplot = std::fs::read_to_string(dir.path().join("boxplot.csv")).unwrap();
        assert_eq!(
            boxplot.lines().count(),
            1 + config.policies.len() * config.rounds as usize
        );
        let cdf = std::fs::read_to_string(dir.path().join("cdf.csv")).unwrap();
        assert!(cdf.lines().count() > config.policies.len());
        assert!(cdf.starts_with("policy,value,cumulative_probability\n"));
    }
}
