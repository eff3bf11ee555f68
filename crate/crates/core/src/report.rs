//! Score report: per-cell decomposition, per-profile latency and per-run
//! aggregates.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::model::{Alpha, Variant};

/// Name of an aggregate metric, e.g. `EG-1`, `nCG-p`, `GMP.50`,
/// `latency-mean`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum MetricKey {
    Eg(Variant),
    Ncg(Variant),
    Gmp(Alpha),
    LatencyMean,
    LatencyMedian,
}

impl MetricKey {
    /// Latency is the only lower-is-better metric.
    pub fn higher_is_better(self) -> bool {
        !matches!(self, MetricKey::LatencyMean | MetricKey::LatencyMedian)
    }
}

impl fmt::Display for MetricKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricKey::Eg(v) => write!(f, "EG-{}", v.suffix()),
            MetricKey::Ncg(v) => write!(f, "nCG-{}", v.suffix()),
            MetricKey::Gmp(a) => write!(f, "GMP.{:02}", a.hundredths()),
            MetricKey::LatencyMean => f.write_str("latency-mean"),
            MetricKey::LatencyMedian => f.write_str("latency-median"),
        }
    }
}

impl FromStr for MetricKey {
    type Err = ModelError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        let bad = || ModelError::Config(format!("unknown metric `{s}`"));
        if let Some(v) = lower.strip_prefix("eg-") {
            return v.parse().map(MetricKey::Eg).map_err(|_| bad());
        }
        if let Some(v) = lower.strip_prefix("ncg-") {
            return v.parse().map(MetricKey::Ncg).map_err(|_| bad());
        }
        if let Some(h) = lower.strip_prefix("gmp.") {
            let h: u8 = h.parse().map_err(|_| bad())?;
            return Alpha::from_hundredths(h).map(MetricKey::Gmp);
        }
        match lower.as_str() {
            "latency-mean" | "latency" => Ok(MetricKey::LatencyMean),
            "latency-median" => Ok(MetricKey::LatencyMedian),
            _ => Err(bad()),
        }
    }
}

impl TryFrom<String> for MetricKey {
    type Error = ModelError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<MetricKey> for String {
    fn from(k: MetricKey) -> String {
        k.to_string()
    }
}

/// One (run, profile, window) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRow {
    pub run: String,
    pub profile: String,
    pub window: usize,
    /// Counted pushes |T_i(w_j)|: pushes whose creation falls in this window.
    pub pushed: usize,
    pub gain: usize,
    /// Maximum achievable gain; zero marks a silent cell.
    pub z: usize,
    pub pain: usize,
    pub silent: bool,
    #[serde(rename = "EG-0")]
    pub eg_0: f64,
    #[serde(rename = "EG-1")]
    pub eg_1: f64,
    #[serde(rename = "EG-p")]
    pub eg_p: f64,
    #[serde(rename = "nCG-0")]
    pub ncg_0: f64,
    #[serde(rename = "nCG-1")]
    pub ncg_1: f64,
    #[serde(rename = "nCG-p")]
    pub ncg_p: f64,
    /// One value per configured alpha, in report order.
    pub gmp: Vec<f64>,
}

impl CellRow {
    pub fn eg(&self, v: Variant) -> f64 {
        match v {
            Variant::Zero => self.eg_0,
            Variant::One => self.eg_1,
            Variant::Proportional => self.eg_p,
        }
    }

    pub fn ncg(&self, v: Variant) -> f64 {
        match v {
            Variant::Zero => self.ncg_0,
            Variant::One => self.ncg_1,
            Variant::Proportional => self.ncg_p,
        }
    }

    fn floats(&self) -> impl Iterator<Item = f64> + '_ {
        [self.eg_0, self.eg_1, self.eg_p, self.ncg_0, self.ncg_1, self.ncg_p]
            .into_iter()
            .chain(self.gmp.iter().copied())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileLatency {
    pub run: String,
    pub profile: String,
    /// Sum over retrieved clusters of push time minus the cluster's
    /// earliest creation time, in seconds.
    pub latency_sum: i64,
    pub clusters_retrieved: usize,
    /// Set when nothing was retrieved: the zero latency is vacuous.
    pub no_retrieval: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunAggregate {
    pub run: String,
    pub metrics: BTreeMap<MetricKey, f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub alphas: Vec<Alpha>,
    pub cells: Vec<CellRow>,
    pub profiles: Vec<ProfileLatency>,
    pub aggregates: Vec<RunAggregate>,
    #[serde(skip)]
    pub warnings: Vec<String>,
}

impl ScoreReport {
    /// Concatenates reports of several runs scored under the same alphas.
    pub fn merge(reports: impl IntoIterator<Item = ScoreReport>) -> ScoreReport {
        let mut out = ScoreReport::default();
        for r in reports {
            if out.alphas.is_empty() {
                out.alphas = r.alphas;
            }
            out.cells.extend(r.cells);
            out.profiles.extend(r.profiles);
            out.aggregates.extend(r.aggregates);
            out.warnings.extend(r.warnings);
        }
        out
    }

    pub fn aggregate(&self, run: &str) -> Option<&RunAggregate> {
        self.aggregates.iter().find(|a| a.run == run)
    }

    pub fn score(&self, run: &str, key: MetricKey) -> Option<f64> {
        self.aggregate(run)?.metrics.get(&key).copied()
    }

    pub fn cells_of<'a>(&'a self, run: &'a str) -> impl Iterator<Item = &'a CellRow> + 'a {
        self.cells.iter().filter(move |c| c.run == run)
    }

    pub fn cell(&self, run: &str, profile: &str, window: usize) -> Option<&CellRow> {
        self.cells
            .iter()
            .find(|c| c.run == run && c.profile == profile && c.window == window)
    }

    /// Structural equality with every float compared at absolute tolerance
    /// `tol`.
    pub fn approx_eq(&self, other: &ScoreReport, tol: f64) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= tol;
        self.alphas == other.alphas
            && self.profiles == other.profiles
            && self.cells.len() == other.cells.len()
            && self.cells.iter().zip(&other.cells).all(|(a, b)| {
                a.run == b.run
                    && a.profile == b.profile
                    && a.window == b.window
                    && a.pushed == b.pushed
                    && a.gain == b.gain
                    && a.z == b.z
                    && a.pain == b.pain
                    && a.silent == b.silent
                    && a.gmp.len() == b.gmp.len()
                    && a.floats().zip(b.floats()).all(|(x, y)| close(x, y))
            })
            && self.aggregates.len() == other.aggregates.len()
            && self.aggregates.iter().zip(&other.aggregates).all(|(a, b)| {
                a.run == b.run
                    && a.metrics.len() == b.metrics.len()
                    && a.metrics
                        .iter()
                        .zip(&b.metrics)
                        .all(|((ka, va), (kb, vb))| ka == kb && close(*va, *vb))
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metric_names_round_trip() {
        for name in [
            "EG-0",
            "EG-1",
            "EG-p",
            "nCG-0",
            "nCG-1",
            "nCG-p",
            "GMP.33",
            "GMP.50",
            "GMP.66",
            "latency-mean",
            "latency-median",
        ] {
            let key: MetricKey = name.parse().unwrap();
            assert_eq!(key.to_string(), name);
        }
        assert!("EG-2".parse::<MetricKey>().is_err());
        assert!("GMP.100".parse::<MetricKey>().is_err());
    }
}
