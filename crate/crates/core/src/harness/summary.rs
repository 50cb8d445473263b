use std::collections::BTreeMap;

use super::rows::ResultRow;
use crate::error::{Error, Result};
use crate::model::units::w_to_dbm;

/// Quantities that can be aggregated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    PStar,
    PH,
    RhoMean,
    GoaIters,
}

impl Metric {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "P_star" | "P_star_W" => Ok(Metric::PStar),
            "P_H" | "P_H_W" => Ok(Metric::PH),
            "rho_mean" => Ok(Metric::RhoMean),
            "goa_iters" => Ok(Metric::GoaIters),
            _ => Err(Error::Config(format!("unknown metric {s:?}"))),
        }
    }

    /// Powers are averaged in watts and reported in dBm as well.
    pub fn is_power(self) -> bool {
        matches!(self, Metric::PStar | Metric::PH)
    }

    fn value(self, r: &ResultRow) -> Option<f64> {
        match self {
            Metric::PStar => r.p_star_w,
            Metric::PH => r.p_h_w,
            Metric::RhoMean => r.rho_mean(),
            Metric::GoaIters => r.goa_iters.map(|c| c as f64),
        }
    }
}

/// Column values a row can be grouped by.
fn key_value(r: &ResultRow, col: &str) -> Result<String> {
    Ok(match col {
        "preset" => r.preset.clone(),
        "gamma_db" => r.gamma_db.to_string(),
        "N" => r.n.to_string(),
        "K" => r.k.to_string(),
        "L" => r.l.to_string(),
        "algorithm" => r.algorithm.clone(),
        "realization" => r.realization.to_string(),
        _ => return Err(Error::Config(format!("cannot group by {col:?}"))),
    })
}

/// Statistics of one group over feasible rows.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupStats {
    pub key: Vec<String>,
    pub count: usize,
    /// Rows in the group before filtering.
    pub total: usize,
    pub mean: f64,
    pub median: f64,
    /// Half-width of the normal 95% interval on the mean.
    pub ci95: f64,
    /// `10 log10(1000 mean)` for power metrics.
    pub mean_dbm: Option<f64>,
    /// Percentage by which this group's mean exceeds the baseline's.
    pub improvement_pct: Option<f64>,
}

fn stats(values: &mut [f64]) -> (f64, f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN, f64::NAN);
    }
    values.sort_by(f64::total_cmp);
    let mean = values.iter().sum::<f64>() / n as f64;
    let median = if n % 2 == 1 { values[n / 2] } else { 0.5 * (values[n / 2 - 1] + values[n / 2]) };
    let ci = if n > 1 {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        1.96 * (var / n as f64).sqrt()
    } else {
        0.0
    };
    (mean, median, ci)
}

/// `100 (a / b - 1)`, computed on linear values.
pub fn improvement_percent(a: f64, b: f64) -> f64 {
    100.0 * (a / b - 1.0)
}

/// Groups rows by `group_by` and aggregates `metric` over feasible rows.
///
/// With a `baseline` algorithm and `algorithm` among the grouping columns,
/// every group also gets its improvement over the baseline group sharing
/// the other coordinates.
pub fn summarize(rows: &[ResultRow], metric: Metric, group_by: &[String], baseline: Option<&str>) -> Result<Vec<GroupStats>> {
    let mut groups: BTreeMap<Vec<String>, (usize, Vec<f64>)> = BTreeMap::new();
    for r in rows {
        let key = group_by.iter().map(|c| key_value(r, c)).collect::<Result<Vec<_>>>()?;
        let entry = groups.entry(key).or_default();
        entry.0 += 1;
        if r.feasible {
            if let Some(v) = metric.value(r).filter(|v| v.is_finite()) {
                entry.1.push(v);
            }
        }
    }
    let mut out: Vec<GroupStats> = groups
        .into_iter()
        .map(|(key, (total, mut values))| {
            let (mean, median, ci95) = stats(&mut values);
            GroupStats {
                key,
                count: values.len(),
                total,
                mean,
                median,
                ci95,
                mean_dbm: (metric.is_power() && mean > 0.0).then(|| w_to_dbm(mean)),
                improvement_pct: None,
            }
        })
        .collect();
    if let Some(base) = baseline {
        let alg_col = group_by
            .iter()
            .position(|c| c == "algorithm")
            .ok_or_else(|| Error::Config("a baseline needs grouping by algorithm".into()))?;
        let strip = |k: &[String]| -> Vec<String> {
            k.iter().enumerate().filter(|(i, _)| *i != alg_col).map(|(_, v)| v.clone()).collect()
        };
        let base_means: BTreeMap<Vec<String>, f64> = out
            .iter()
            .filter(|g| g.key[alg_col] == base && g.count > 0)
            .map(|g| (strip(&g.key), g.mean))
            .collect();
        for g in &mut out {
            if let Some(b) = base_means.get(&strip(&g.key)) {
                g.improvement_pct = (g.count > 0).then(|| improvement_percent(g.mean, *b));
            }
        }
    }
    Ok(out)
}

/// Plain-text table of `summarize` output.
pub fn format_table(group_by: &[String], stats: &[GroupStats]) -> String {
    let mut s = group_by.join(",");
    s.push_str(",count,total,mean,median,ci95,mean_dBm,improvement_pct\n");
    for g in stats {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let fin = |v: f64| if v.is_finite() { v.to_string() } else { String::new() };
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            g.key.join(","),
            g.count,
            g.total,
            fin(g.mean),
            fin(g.median),
            fin(g.ci95),
            opt(g.mean_dbm),
            opt(g.improvement_pct)
        ));
    }
    s
}
