//! Run-restriction strategies: keep at most `n` pushes per (profile, push
//! day) by taking the first ones, the best ones, or a random subset. Plus
//! the N-sweep that scores each strategy over a range of `n`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rayon::prelude::*;

use crate::error::EvalError;
use crate::ingest::fmt6;
use crate::metrics::{push_groups, Evaluator};
use crate::model::{ClusterToken, EvalConfig, GroundTruth, PushRecord, Run};
use crate::report::MetricKey;
use crate::seeding::StreamKey;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    First,
    Gold,
    Random,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::First => "first",
            Strategy::Gold => "gold",
            Strategy::Random => "random",
        })
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "first" => Ok(Strategy::First),
            "gold" => Ok(Strategy::Gold),
            "random" => Ok(Strategy::Random),
            _ => Err(format!("unknown strategy `{s}` (expected first, gold or random)")),
        }
    }
}

/// Whether Gold fills a day up to `n` with non-gaining pushes once it runs
/// out of new clusters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum GoldPadding {
    #[default]
    Always,
    Never,
}

impl fmt::Display for GoldPadding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GoldPadding::Always => "always",
            GoldPadding::Never => "never",
        })
    }
}

impl FromStr for GoldPadding {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "always" => Ok(GoldPadding::Always),
            "never" => Ok(GoldPadding::Never),
            _ => Err(format!("unknown gold padding `{s}` (expected always or never)")),
        }
    }
}

fn check_n(n: usize, cfg: &EvalConfig) -> Result<(), EvalError> {
    if n == 0 || n > cfg.cap {
        return Err(EvalError::BadRestriction { n, cap: cfg.cap });
    }
    Ok(())
}

fn rebuild(run: &Run, kept: Vec<PushRecord>) -> Run {
    let mut kept = kept;
    kept.sort_by(|a, b| (&a.profile, a.push_epoch, &a.tweet).cmp(&(&b.profile, b.push_epoch, &b.tweet)));
    Run::from_unique(run.tag.clone(), kept)
}

/// Keeps the first `n` pushes of every (profile, push day) group.
pub fn restrict_first(run: &Run, gt: &GroundTruth, cfg: &EvalConfig, n: usize) -> Result<Run, EvalError> {
    check_n(n, cfg)?;
    let kept = push_groups(run, &gt.epochs, cfg)
        .into_values()
        .flat_map(|g| g.into_iter().take(n).cloned())
        .collect();
    Ok(rebuild(run, kept))
}

/// Keeps, per group, one push for each cluster not yet retrieved (earliest
/// push per cluster, earliest clusters first), then pads with the earliest
/// remaining pushes up to `n` when `padding` is [`GoldPadding::Always`].
/// Days are processed chronologically and retrieved clusters carry over.
pub fn restrict_gold(
    run: &Run,
    gt: &GroundTruth,
    cfg: &EvalConfig,
    n: usize,
    padding: GoldPadding,
) -> Result<Run, EvalError> {
    check_n(n, cfg)?;
    let mut kept = Vec::new();
    let mut retrieved: BTreeSet<(&_, &ClusterToken)> = BTreeSet::new();
    for ((profile, _day), group) in push_groups(run, &gt.epochs, cfg) {
        let mut chosen = vec![false; group.len()];
        if group.len() <= n {
            chosen.iter_mut().for_each(|c| *c = true);
        } else {
            let mut taken = 0;
            let mut today = BTreeSet::new();
            for (i, p) in group.iter().enumerate() {
                if taken == n {
                    break;
                }
                let Some(c) = gt.cluster_of(&p.profile, &p.tweet) else {
                    continue;
                };
                if retrieved.contains(&(&profile, c)) || !today.insert(c) {
                    continue;
                }
                chosen[i] = true;
                taken += 1;
            }
            if padding == GoldPadding::Always {
                for c in chosen.iter_mut().filter(|c| !**c).take(n - taken) {
                    *c = true;
                }
            }
        }
        for (p, _) in group.iter().zip(&chosen).filter(|(_, c)| **c) {
            if let Some(c) = gt.cluster_of(&p.profile, &p.tweet) {
                retrieved.insert((&p.profile, c));
            }
            kept.push((*p).clone());
        }
    }
    Ok(rebuild(run, kept))
}

/// `draws` independent restrictions, each taking a uniform `n`-subset of
/// every group. The generator for a group is keyed by (seed, draw, profile,
/// day), so results do not depend on scheduling.
pub fn restrict_random(
    run: &Run,
    gt: &GroundTruth,
    cfg: &EvalConfig,
    n: usize,
    seed: u64,
    draws: usize,
) -> Result<Vec<Run>, EvalError> {
    check_n(n, cfg)?;
    let groups = push_groups(run, &gt.epochs, cfg);
    Ok((0..draws)
        .map(|draw| {
            let mut kept = Vec::new();
            for ((profile, day), group) in &groups {
                if group.len() <= n {
                    kept.extend(group.iter().map(|p| (*p).clone()));
                    continue;
                }
                let mut rng = StreamKey::new(seed)
                    .str("random-restriction")
                    .u64(draw as u64)
                    .str(profile.as_str())
                    .i64(*day)
                    .rng();
                let mut picked = index::sample(&mut rng, group.len(), n).into_vec();
                picked.sort_unstable();
                kept.extend(picked.into_iter().map(|i| group[i].clone()));
            }
            rebuild(run, kept)
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub strategy: Strategy,
    pub metric: MetricKey,
    pub n_min: usize,
    pub n_max: usize,
    pub seed: u64,
    pub draws: usize,
    pub padding: GoldPadding,
}

impl SweepSpec {
    pub fn new(strategy: Strategy, metric: MetricKey, n_min: usize, n_max: usize) -> Self {
        Self {
            strategy,
            metric,
            n_min,
            n_max,
            seed: 0,
            draws: 100,
            padding: GoldPadding::Always,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub n: usize,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub strategy: Strategy,
    pub metric: MetricKey,
    pub rows: Vec<SweepRow>,
    pub runs: usize,
    /// Draw count and seed; only meaningful for [`Strategy::Random`].
    pub draws: Option<(usize, u64)>,
}

impl SweepResult {
    pub fn mean_at(&self, n: usize) -> Option<f64> {
        self.rows.iter().find(|r| r.n == n).map(|r| r.mean)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("strategy\tN\tmetric\tmean\truns\tdraws\tseed\n");
        let (draws, seed) = match self.draws {
            Some((d, s)) => (d.to_string(), s.to_string()),
            None => ("-".into(), "-".into()),
        };
        for row in &self.rows {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{draws}\t{seed}\n",
                self.strategy,
                row.n,
                self.metric,
                fmt6(row.mean),
                self.runs
            ));
        }
        out
    }
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

fn score(run: &Run, ev: &Evaluator, metric: MetricKey) -> Result<f64, EvalError> {
    let report = ev.evaluate(run)?;
    report
        .score(run.tag.as_str(), metric)
        .ok_or_else(|| EvalError::MetricNotComputed(metric.to_string()))
}

/// Mean of `spec.metric` over runs for each N in `n_min..=n_max`. Random
/// restrictions are averaged over draws first, then over runs.
pub fn sweep(runs: &[Run], gt: &GroundTruth, cfg: &EvalConfig, spec: &SweepSpec) -> Result<SweepResult, EvalError> {
    if spec.n_min == 0 || spec.n_min > spec.n_max {
        return Err(EvalError::BadRestriction {
            n: spec.n_min,
            cap: cfg.cap,
        });
    }
    check_n(spec.n_max, cfg)?;
    if spec.strategy == Strategy::Random && spec.draws == 0 {
        return Err(EvalError::Config(crate::ModelError::Config(
            "random strategy needs at least one draw".into(),
        )));
    }
    let mut cfg = cfg.clone();
    match spec.metric {
        MetricKey::Eg(v) if !cfg.eg_variants.contains(&v) => cfg.eg_variants.push(v),
        MetricKey::Ncg(v) if !cfg.ncg_variants.contains(&v) => cfg.ncg_variants.push(v),
        MetricKey::Gmp(a) if !cfg.alphas.contains(&a) => cfg.alphas.push(a),
        _ => {}
    }

    let ev = Evaluator::new(gt, &cfg)?;
    let mut rows = Vec::new();
    for n in spec.n_min..=spec.n_max {
        let per_run: Vec<f64> = runs
            .par_iter()
            .map(|run| -> Result<f64, EvalError> {
                match spec.strategy {
                    Strategy::First => score(&restrict_first(run, gt, &cfg, n)?, &ev, spec.metric),
                    Strategy::Gold => score(&restrict_gold(run, gt, &cfg, n, spec.padding)?, &ev, spec.metric),
                    Strategy::Random => {
                        let draws = restrict_random(run, gt, &cfg, n, spec.seed, spec.draws)?;
                        let scores = draws
                            .par_iter()
                            .map(|r| score(r, &ev, spec.metric))
                            .collect::<Vec<_>>()
                            .into_iter()
                            .collect::<Result<Vec<_>, _>>()?;
                        Ok(mean(&scores))
                    }
                }
            })
            .collect::<Vec<_>>()
            .into_iter()
            .collect::<Result<_, _>>()?;
        rows.push(SweepRow {
            n,
            mean: mean(&per_run),
        });
    }
    Ok(SweepResult {
        strategy: spec.strategy,
        metric: spec.metric,
        rows,
        runs: runs.len(),
        draws: (spec.strategy == Strategy::Random).then_some((spec.draws, spec.seed)),
    })
}
