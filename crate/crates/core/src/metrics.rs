//! Aggregation of many runs into per-(scheme, N_T) rows.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::artifacts::RunSummary;
use crate::engine::SchemeKind;
use crate::error::{Error, Result};
use crate::stage2::Stage2Status;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GroupKey {
    pub scheme: SchemeKind,
    pub n_nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub scheme: SchemeKind,
    pub n_nodes: usize,
    pub runs: usize,
    pub t_total_mean_s: f64,
    pub t_total_min_s: f64,
    pub t_total_max_s: f64,
    pub completion_rate: f64,
    pub stage1_overcharged_mean: f64,
}

/// Groups `records` by scheme and network size, rows sorted by key.
///
/// With `groups` given, only those keys are reported; a requested key without
/// any records is dropped with a warning.
pub fn summarize(records: &[RunSummary], groups: Option<&[GroupKey]>) -> Result<Vec<SummaryRow>> {
    if records.is_empty() {
        return Err(Error::invalid("nothing to summarize"));
    }
    let mut by_key: BTreeMap<GroupKey, Vec<&RunSummary>> = BTreeMap::new();
    for r in records {
        let key = GroupKey {
            scheme: r.scheme,
            n_nodes: r.n_nodes,
        };
        by_key.entry(key).or_default().push(r);
    }
    let keys: Vec<GroupKey> = match groups {
        Some(g) => {
            let mut g = g.to_vec();
            g.sort();
            g.dedup();
            g
        }
        None => by_key.keys().copied().collect(),
    };

    let mut rows = Vec::with_capacity(keys.len());
    for key in keys {
        let Some(runs) = by_key.get(&key) else {
            log::warn!(
                "no runs for scheme {} at N_T={}, row omitted",
                key.scheme,
                key.n_nodes
            );
            continue;
        };
        let n = runs.len() as f64;
        let times = runs.iter().map(|r| r.t_total_s);
        rows.push(SummaryRow {
            scheme: key.scheme,
            n_nodes: key.n_nodes,
            runs: runs.len(),
            t_total_mean_s: times.clone().sum::<f64>() / n,
            t_total_min_s: times.clone().fold(f64::INFINITY, f64::min),
            t_total_max_s: times.fold(f64::NEG_INFINITY, f64::max),
            completion_rate: runs
                .iter()
                .filter(|r| r.status == Stage2Status::Complete)
                .count() as f64
                / n,
            stage1_overcharged_mean: runs.iter().map(|r| r.stage1_overcharged as f64).sum::<f64>()
                / n,
        });
    }
    Ok(rows)
}

pub fn summary_csv(rows: &[SummaryRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    if rows.is_empty() {
        w.write_record([
            "scheme",
            "n_nodes",
            "runs",
            "t_total_mean_s",
            "t_total_min_s",
            "t_total_max_s",
            "completion_rate",
            "stage1_overcharged_mean",
        ])?;
    }
    w.into_inner()
        .map_err(|e| Error::invalid(format!("csv buffer: {e}")))
}

pub fn summary_json(rows: &[SummaryRow]) -> String {
    let mut s = serde_json::to_string_pretty(rows).expect("rows serialize");
    s.push('\n');
    s
}
