//! Verification reports and scheme comparison tables. Node ids in these
//! reports are 1-based.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::build::BuildSpec;
use crate::mbr::{
    hbt_for_all_helper_sets, max_replication, replication_histogram, update_complexity, verify_dc_all,
    verify_repair_all, CodeError, CodeInstance, ScenarioReport, Scheme, VerifyOptions,
};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub passed: usize,
    pub total: usize,
    pub exhaustive: bool,
    pub messages: usize,
    /// First failures, `(failed node or 0, node ids, reason)`.
    pub failures: Vec<(usize, Vec<usize>, String)>,
}

impl ScenarioSummary {
    fn from_report(r: &ScenarioReport) -> Self {
        ScenarioSummary {
            passed: r.passed,
            total: r.checked,
            exhaustive: r.exhaustive,
            messages: r.messages,
            failures: r
                .failures
                .iter()
                .take(10)
                .map(|f| (f.failed.map_or(0, |j| j + 1), f.nodes.iter().map(|i| i + 1).collect(), f.reason.clone()))
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub scheme: Scheme,
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub alpha: usize,
    pub b: usize,
    pub field_bits: u32,
    pub repair: ScenarioSummary,
    pub collection: ScenarioSummary,
    /// multiplicity -> number of distinct stored symbols
    pub replication_histogram: BTreeMap<usize, usize>,
    pub max_replication: usize,
    /// node id -> help-by-transfer against every helper set
    pub hbt: BTreeMap<usize, bool>,
    /// message symbol (1-based) -> stored symbols it affects
    pub update_complexity: BTreeMap<usize, usize>,
    pub passed: bool,
}

pub fn verify_report(inst: &CodeInstance, opts: &VerifyOptions) -> Result<VerifyReport, CodeError> {
    let p = inst.params();
    let repair = verify_repair_all(inst, opts);
    let collection = verify_dc_all(inst, opts);
    let hbt = (0..p.n).map(|j| (j + 1, hbt_for_all_helper_sets(inst, j))).collect();
    let update = update_complexity(inst)?.into_iter().enumerate().map(|(i, c)| (i + 1, c)).collect();
    Ok(VerifyReport {
        scheme: inst.scheme(),
        n: p.n,
        k: p.k,
        d: p.d,
        alpha: p.alpha,
        b: p.b,
        field_bits: inst.field().bits(),
        passed: repair.all_passed() && collection.all_passed(),
        repair: ScenarioSummary::from_report(&repair),
        collection: ScenarioSummary::from_report(&collection),
        replication_histogram: replication_histogram(inst),
        max_replication: max_replication(inst),
        hbt,
        update_complexity: update,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub scheme: Scheme,
    /// Construction error when the scheme does not apply.
    pub error: Option<String>,
    pub field_bits: Option<u32>,
    pub b: Option<usize>,
    pub replication_histogram: Option<BTreeMap<usize, usize>>,
    pub hbt_nodes: Option<usize>,
    pub update_max: Option<usize>,
    pub update_mean: Option<f64>,
}

impl CompareRow {
    pub fn field_size(&self) -> Option<u128> {
        self.field_bits.map(|b| 1u128 << b)
    }
}

fn row(scheme: Scheme, n: usize, k: usize, d: usize) -> CompareRow {
    let built = BuildSpec::new(scheme, n, k, Some(d)).and_then(|s| s.build());
    let empty = CompareRow {
        scheme,
        error: None,
        field_bits: None,
        b: None,
        replication_histogram: None,
        hbt_nodes: None,
        update_max: None,
        update_mean: None,
    };
    let inst = match built {
        Ok(inst) => inst,
        Err(e) => return CompareRow { error: Some(e.to_string()), ..empty },
    };
    let update = match update_complexity(&inst) {
        Ok(u) => u,
        Err(e) => return CompareRow { error: Some(e.to_string()), ..empty },
    };
    CompareRow {
        field_bits: Some(inst.field().bits()),
        b: Some(inst.params().b),
        replication_histogram: Some(replication_histogram(&inst)),
        hbt_nodes: Some((0..n).filter(|&j| hbt_for_all_helper_sets(&inst, j)).count()),
        update_max: update.iter().copied().max(),
        update_mean: Some(update.iter().sum::<usize>() as f64 / update.len().max(1) as f64),
        ..empty
    }
}

/// One row per scheme; schemes that do not apply carry their error.
pub fn compare(schemes: &[Scheme], n: usize, k: usize, d: usize) -> Vec<CompareRow> {
    schemes.iter().map(|&s| row(s, n, k, d)).collect()
}

fn histogram_text(h: &BTreeMap<usize, usize>) -> String {
    h.iter().map(|(m, c)| format!("{m}x{c}")).collect::<Vec<_>>().join(",")
}

pub fn render_compare(rows: &[CompareRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<15} {:>8} {:>5} {:>12} {:>4} {:>7} {:>7}  note",
        "scheme", "field", "B", "replication", "hbt", "upd.max", "upd.avg"
    );
    for r in rows {
        match &r.error {
            Some(e) => {
                let _ = writeln!(out, "{:<15} {:>8} {:>5} {:>12} {:>4} {:>7} {:>7}  {e}", r.scheme.tag(), "-", "-", "-", "-", "-", "-");
            }
            None => {
                let _ = writeln!(
                    out,
                    "{:<15} {:>8} {:>5} {:>12} {:>4} {:>7} {:>7.2}",
                    r.scheme.tag(),
                    format!("2^{}", r.field_bits.unwrap_or(0)),
                    r.b.unwrap_or(0),
                    histogram_text(r.replication_histogram.as_ref().expect("histogram")),
                    r.hbt_nodes.unwrap_or(0),
                    r.update_max.unwrap_or(0),
                    r.update_mean.unwrap_or(0.0),
                );
            }
        }
    }
    out
}
