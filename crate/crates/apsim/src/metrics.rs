//! Per-round statistics, per-seed summaries and across-seed aggregation,
//! plus the small statistical helpers (percentiles, ECDFs, paired t) the
//! experiment reports and acceptance checks are built on.

use crate::engine::RoundRecord;

/// Five-number summary of a sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxStats {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

/// Distribution of normalized throughput over the active STAs of one round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundStats {
    pub active: usize,
    pub mean: f64,
    pub satisfied_fraction: f64,
    pub box_stats: BoxStats,
}

/// Linear-interpolation percentile of an ascending-sorted sample:
/// rank `q * (n - 1)` with fractional ranks interpolated.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "percentile of an empty sample");
    assert!((0.0..=1.0).contains(&q), "quantile must lie in [0, 1]");
    let rank = q * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let frac = rank - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Five-number summary of an ascending-sorted sample.
pub fn box_stats(sorted: &[f64]) -> BoxStats {
    BoxStats {
        min: sorted[0],
        q1: percentile(sorted, 0.25),
        median: percentile(sorted, 0.5),
        q3: percentile(sorted, 0.75),
        max: sorted[sorted.len() - 1],
    }
}

/// Summarize one round; `None` when no STA is active yet.
pub fn round_stats(record: &RoundRecord) -> Option<RoundStats> {
    let mut values: Vec<f64> = record
        .stas
        .iter()
        .filter(|s| s.active)
        .map(|s| s.normalized_throughput)
        .collect();
    if values.is_empty() {
        return None;
    }
    values.sort_by(|a, b| a.partial_cmp(b).expect("throughput is never NaN"));
    let satisfied = record.stas.iter().filter(|s| s.active && s.satisfied).count();
    Some(RoundStats {
        active: values.len(),
        mean: values.iter().sum::<f64>() / values.len() as f64,
        satisfied_fraction: satisfied as f64 / values.len() as f64,
        box_stats: box_stats(&values),
    })
}

/// One policy's outcome over one seed's full trace.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedSummary {
    /// Round-by-round distribution; `None` before the first arrival.
    pub rounds: Vec<Option<RoundStats>>,
    /// `(sta, normalized throughput)` for STAs active in the final round.
    pub final_per_sta: Vec<(usize, f64)>,
    /// Final-round satisfaction per active STA, aligned with
    /// `final_per_sta`.
    pub final_satisfied: Vec<bool>,
    /// Association changes summed over all STAs and rounds.
    pub reassociations: u64,
    /// STA-rounds spent associated without any AP above sensitivity.
    pub out_of_range_rounds: u64,
}

impl SeedSummary {
    /// Mean normalized throughput over STAs active in the final round.
    pub fn final_mean(&self) -> Option<f64> {
        if self.final_per_sta.is_empty() {
            return None;
        }
        Some(
            self.final_per_sta.iter().map(|&(_, v)| v).sum::<f64>()
                / self.final_per_sta.len() as f64,
        )
    }

    /// Fraction of final-round STAs that did not get their full demand.
    pub fn final_unsatisfied_fraction(&self) -> Option<f64> {
        if self.final_satisfied.is_empty() {
            return None;
        }
        let unsatisfied = self.final_satisfied.iter().filter(|&&s| !s).count();
        Some(unsatisfied as f64 / self.final_satisfied.len() as f64)
    }

    /// Mean final normalized throughput over STAs with `mask[sta] ==
    /// in_group`.
    pub fn final_group_mean(&self, mask: &[bool], in_group: bool) -> Option<f64> {
        let values: Vec<f64> = self
            .final_per_sta
            .iter()
            .filter(|&&(sta, _)| mask[sta] == in_group)
            .map(|&(_, v)| v)
            .collect();
        if values.is_empty() {
            return None;
        }
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

/// Reduce a full trace to its summary.
pub fn summarize_seed(records: &[RoundRecord]) -> SeedSummary {
    let rounds: Vec<Option<RoundStats>> = records.iter().map(round_stats).collect();
    let (mut final_per_sta, mut final_satisfied) = (Vec::new(), Vec::new());
    if let Some(last) = records.last() {
        for (sta, row) in last.stas.iter().enumerate() {
            if row.active {
                final_per_sta.push((sta, row.normalized_throughput));
                final_satisfied.push(row.satisfied);
            }
        }
    }
    let reassociations = records
        .iter()
        .flat_map(|r| r.stas.iter())
        .filter(|s| s.reassociated)
        .count() as u64;
    let out_of_range_rounds = records
        .iter()
        .flat_map(|r| r.stas.iter())
        .filter(|s| s.active && s.out_of_range)
        .count() as u64;
    SeedSummary { rounds, final_per_sta, final_satisfied, reassociations, out_of_range_rounds }
}

/// Right-continuous empirical CDF of an ascending-sorted sample: one
/// `(value, fraction at or below)` step per distinct value.
pub fn ecdf(sorted: &[f64]) -> Vec<(f64, f64)> {
    let n = sorted.len() as f64;
    let mut steps: Vec<(f64, f64)> = Vec::new();
    for (i, &v) in sorted.iter().enumerate() {
        let frac = (i + 1) as f64 / n;
        match steps.last_mut() {
            Some(last) if last.0 == v => last.1 = frac,
            _ => steps.push((v, frac)),
        }
    }
    steps
}

/// One-sample t statistic of the paired differences `a[i] - b[i]`:
/// positive when `a` tends to exceed `b`. `None` when fewer than two
/// pairs or all differences are identical.
pub fn paired_t_statistic(a: &[f64], b: &[f64]) -> Option<f64> {
    assert_eq!(a.len(), b.len(), "paired samples must align");
    let n = a.len();
    if n < 2 {
        return None;
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = diffs.iter().sum::<f64>() / n as f64;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    if var <= 0.0 {
        return None;
    }
    Some(mean / (var / n as f64).sqrt())
}

/// Across-seed aggregate for one policy variant.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyReport {
    pub label: String,
    pub seeds: usize,
    /// Across-seed mean of each round's mean normalized throughput.
    pub per_round_mean: Vec<Option<f64>>,
    /// Across-seed mean of each round's satisfied fraction.
    pub per_round_satisfied: Vec<Option<f64>>,
    /// Across-seed average of each round's five-number summary.
    pub per_round_box: Vec<Option<BoxStats>>,
    /// Per-seed final-round means, in seed order (pairs across policies).
    pub seed_final_means: Vec<Option<f64>>,
    pub mean_final: Option<f64>,
    pub unsatisfied_final: Option<f64>,
    pub total_reassociations: u64,
    pub mean_reassociations: f64,
    pub total_out_of_range_rounds: u64,
    /// Final-round per-STA values pooled over seeds, ascending.
    pub pooled_finals: Vec<f64>,
    pub final_ecdf: Vec<(f64, f64)>,
    /// Final mean over agent STAs, when an agent mask was supplied.
    pub agent_mean_final: Option<f64>,
    /// Final mean over the remaining STAs.
    pub non_agent_mean_final: Option<f64>,
}

fn mean_of(values: impl Iterator<Item = f64>) -> Option<f64> {
    let collected: Vec<f64> = values.collect();
    if collected.is_empty() {
        None
    } else {
        Some(collected.iter().sum::<f64>() / collected.len() as f64)
    }
}

/// Fold per-seed summaries into one report. `masks`, when given, carries
/// each seed's agent assignment and fills the agent/non-agent split.
pub fn aggregate_seeds(
    label: &str,
    summaries: &[SeedSummary],
    masks: Option<&[Vec<bool>]>,
) -> PolicyReport {
    let rounds = summaries.iter().map(|s| s.rounds.len()).max().unwrap_or(0);
    let mut per_round_mean = Vec::with_capacity(rounds);
    let mut per_round_satisfied = Vec::with_capacity(rounds);
    let mut per_round_box = Vec::with_capacity(rounds);
    for round in 0..rounds {
        let stats: Vec<&RoundStats> = summaries
            .iter()
            .filter_map(|s| s.rounds.get(round).and_then(|r| r.as_ref()))
            .collect();
        if stats.is_empty() {
            per_round_mean.push(None);
            per_round_satisfied.push(None);
            per_round_box.push(None);
            continue;
        }
        let n = stats.len() as f64;
        per_round_mean.push(Some(stats.iter().map(|s| s.mean).sum::<f64>() / n));
        per_round_satisfied
            .push(Some(stats.iter().map(|s| s.satisfied_fraction).sum::<f64>() / n));
        per_round_box.push(Some(BoxStats {
            min: stats.iter().map(|s| s.box_stats.min).sum::<f64>() / n,
            q1: stats.iter().map(|s| s.box_stats.q1).sum::<f64>() / n,
            median: stats.iter().map(|s| s.box_stats.median).sum::<f64>() / n,
            q3: stats.iter().map(|s| s.box_stats.q3).sum::<f64>() / n,
            max: stats.iter().map(|s| s.box_stats.max).sum::<f64>() / n,
        }));
    }
    let seed_final_means: Vec<Option<f64>> = summaries.iter().map(|s| s.final_mean()).collect();
    let mut pooled_finals: Vec<f64> = summaries
        .iter()
        .flat_map(|s| s.final_per_sta.iter().map(|&(_, v)| v))
        .collect();
    pooled_finals.sort_by(|a, b| a.partial_cmp(b).expect("throughput is never NaN"));
    let final_ecdf = ecdf(&pooled_finals);
    let (agent_mean_final, non_agent_mean_final) = match masks {
        Some(masks) => {
            assert_eq!(masks.len(), summaries.len(), "one mask per seed");
            let agents = mean_of(
                summaries
                    .iter()
                    .zip(masks)
                    .filter_map(|(s, m)| s.final_group_mean(m, true)),
            );
            let others = mean_of(
                summaries
                    .iter()
                    .zip(masks)
                    .filter_map(|(s, m)| s.final_group_mean(m, false)),
            );
            (agents, others)
        }
        None => (None, None),
    };
    PolicyReport {
        label: label.to_string(),
        seeds: summaries.len(),
        per_round_mean,
        per_round_satisfied,
        per_round_box,
        mean_final: mean_of(seed_final_means.iter().flatten().copied()),
        seed_final_means,
        unsatisfied_final: mean_of(
            summaries.iter().filter_map(|s| s.final_unsatisfied_fraction()),
        ),
        total_reassociations: summaries.iter().map(|s| s.reassociations).sum(),
        mean_reassociations: if summaries.is_empty() {
            0.0
        } else {
            summaries.iter().map(|s| s.reassociations).sum::<u64>() as f64
                / summaries.len() as f64
        },
        total_out_of_range_rounds: summaries.iter().map(|s| s.out_of_range_rounds).sum(),
        pooled_finals,
        final_ecdf,
        agent_mean_final,
        non_agent_mean_final,
    }
}
