//! Test-collection reusability: leave-one-out rank shifts, epoch-file
//! completeness audits, and strict versus official-2016 comparisons.
//!
//! When a run's unique tweets are removed from the pool, strict mode still
//! needs their creation epochs, as it would with a complete epoch file.
//! Callers may pass the full stream epochs as `stream_epochs`; otherwise the
//! original ground-truth epochs stand in for them.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::error::EvalError;
use crate::ingest::{fmt6, merge_epochs};
use crate::metrics::{evaluate_runs, rank_runs, RankedRun};
use crate::model::{ClusterTable, EpochMap, EvalConfig, GroundTruth, Mode, PairKey, QrelsTable, Run};
use crate::report::MetricKey;

/// (profile, tweet) pairs pushed by `target` and by no other run of `all`.
/// Runs are told apart by tag; `target` itself may or may not be in `all`.
pub fn unique_tweets(target: &Run, all: &[Run]) -> BTreeSet<PairKey> {
    let others: BTreeSet<PairKey> = all
        .iter()
        .filter(|r| r.tag != target.tag)
        .flat_map(|r| r.pushes().iter().map(|p| (p.profile.clone(), p.tweet.clone())))
        .collect();
    target
        .pushes()
        .iter()
        .map(|p| (p.profile.clone(), p.tweet.clone()))
        .filter(|k| !others.contains(k))
        .collect()
}

/// Drops judgments and cluster assignments of `removed`. An epoch entry goes
/// only when its tweet keeps no judgment under any profile.
pub fn reduce_ground_truth(gt: &GroundTruth, removed: &BTreeSet<PairKey>) -> GroundTruth {
    if removed.is_empty() {
        return gt.clone();
    }
    let mut qrels = QrelsTable::default();
    for ((p, t), g) in &gt.qrels.grades {
        if !removed.contains(&(p.clone(), t.clone())) {
            qrels.insert(p.clone(), t.clone(), *g);
            if let Some(line) = gt.qrels.lines.get(&(p.clone(), t.clone())) {
                qrels.lines.insert((p.clone(), t.clone()), *line);
            }
        }
    }
    let mut clusters = ClusterTable::default();
    for ((p, t), c) in &gt.clusters.assignments {
        if !removed.contains(&(p.clone(), t.clone())) {
            clusters.insert(p.clone(), t.clone(), c.clone());
            if let Some(line) = gt.clusters.lines.get(&(p.clone(), t.clone())) {
                clusters.lines.insert((p.clone(), t.clone()), *line);
            }
        }
    }
    let still_judged: BTreeSet<_> = qrels.grades.keys().map(|(_, t)| t).collect();
    let gone: BTreeSet<_> = removed
        .iter()
        .map(|(_, t)| t)
        .filter(|t| !still_judged.contains(t))
        .collect();
    let epochs: EpochMap = gt
        .epochs
        .iter()
        .filter(|(t, _)| !gone.contains(t))
        .map(|(t, e)| (t.clone(), e))
        .collect();
    GroundTruth {
        qrels,
        clusters,
        epochs,
        sources: gt.sources.clone(),
    }
}

fn with_stream_epochs(gt: &GroundTruth, stream: &EpochMap) -> GroundTruth {
    let mut out = gt.clone();
    out.epochs = merge_epochs(&gt.epochs, stream).0;
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct LooRow {
    pub run: String,
    pub orig_rank: usize,
    pub loo_rank: usize,
    /// `orig_rank - loo_rank`; positive means the run moved up.
    pub delta: i64,
    pub orig_score: f64,
    pub loo_score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LooReport {
    pub metric: MetricKey,
    pub rows: Vec<LooRow>,
    pub mean_delta: f64,
}

impl LooReport {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("run\torig_rank\tloo_rank\tdelta\torig_score\tloo_score\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\n",
                r.run,
                r.orig_rank,
                r.loo_rank,
                r.delta,
                fmt6(r.orig_score),
                fmt6(r.loo_score)
            ));
        }
        out.push_str(&format!("#mean_delta\t{}\t{}\n", self.metric, fmt6(self.mean_delta)));
        out
    }
}

fn rank_of<'a>(ranking: &'a [RankedRun], tag: &str) -> &'a RankedRun {
    ranking
        .iter()
        .find(|r| r.tag == tag)
        .expect("every evaluated run is ranked")
}

/// For each run: remove its unique tweets from the pool, re-evaluate the
/// whole population against the reduced ground truth and record how the
/// run's rank moved. Rows follow the input order of `runs`.
pub fn leave_one_out(
    runs: &[Run],
    gt: &GroundTruth,
    cfg: &EvalConfig,
    metric: MetricKey,
    stream_epochs: Option<&EpochMap>,
) -> Result<LooReport, EvalError> {
    let stream = stream_epochs.unwrap_or(&gt.epochs);
    let prepare = |g: &GroundTruth| match cfg.mode {
        Mode::Strict => with_stream_epochs(g, stream),
        Mode::Official2016 => g.clone(),
    };
    let original = rank_runs(&evaluate_runs(runs, &prepare(gt), cfg)?, metric)?;

    let rows = runs
        .par_iter()
        .map(|run| -> Result<LooRow, EvalError> {
            let reduced = prepare(&reduce_ground_truth(gt, &unique_tweets(run, runs)));
            let ranking = rank_runs(&evaluate_runs(runs, &reduced, cfg)?, metric)?;
            let tag = run.tag.as_str();
            let (before, after) = (rank_of(&original, tag), rank_of(&ranking, tag));
            Ok(LooRow {
                run: tag.to_string(),
                orig_rank: before.rank,
                loo_rank: after.rank,
                delta: before.rank as i64 - after.rank as i64,
                orig_score: before.score,
                loo_score: after.score,
            })
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let mean_delta = if rows.is_empty() {
        0.0
    } else {
        rows.iter().map(|r| r.delta as f64).sum::<f64>() / rows.len() as f64
    };
    Ok(LooReport {
        metric,
        rows,
        mean_delta,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MissingEpoch {
    pub run: String,
    pub profile: String,
    pub tweet: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunAudit {
    pub run: String,
    pub missing: usize,
    pub total: usize,
}

impl RunAudit {
    pub fn fraction(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.missing as f64 / self.total as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EpochAudit {
    pub missing: Vec<MissingEpoch>,
    pub runs: Vec<RunAudit>,
}

impl EpochAudit {
    pub fn is_clean(&self) -> bool {
        self.missing.is_empty()
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("run\tmissing_tweet\tprofile\n");
        for m in &self.missing {
            out.push_str(&format!("{}\t{}\t{}\n", m.run, m.tweet, m.profile));
        }
        for r in &self.runs {
            out.push_str(&format!(
                "#summary\t{}\t{}\t{}\t{}\n",
                r.run,
                r.missing,
                r.total,
                fmt6(r.fraction())
            ));
        }
        out
    }
}

/// Every pushed (run, profile, tweet) whose tweet has no creation epoch.
pub fn audit_epoch(gt: &GroundTruth, runs: &[Run]) -> EpochAudit {
    let mut audit = EpochAudit::default();
    for run in runs {
        let mut missing = 0;
        for p in run.pushes() {
            if !gt.epochs.contains(&p.tweet) {
                missing += 1;
                audit.missing.push(MissingEpoch {
                    run: run.tag.to_string(),
                    profile: p.profile.to_string(),
                    tweet: p.tweet.to_string(),
                });
            }
        }
        audit.runs.push(RunAudit {
            run: run.tag.to_string(),
            missing,
            total: run.len(),
        });
    }
    audit
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeRow {
    pub run: String,
    pub strict_score: f64,
    pub strict_rank: usize,
    pub official_score: f64,
    pub official_rank: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeComparison {
    pub metric: MetricKey,
    pub rows: Vec<ModeRow>,
}

impl ModeComparison {
    pub fn to_tsv(&self) -> String {
        let mut out =
            String::from("run\tstrict_score\tstrict_rank\tofficial_score\tofficial_rank\tscore_delta\trank_delta\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                r.run,
                fmt6(r.strict_score),
                r.strict_rank,
                fmt6(r.official_score),
                r.official_rank,
                fmt6(r.official_score - r.strict_score),
                r.strict_rank as i64 - r.official_rank as i64
            ));
        }
        out
    }
}

/// Scores every run in both modes with the same windowing. Strict mode sees
/// the ground truth with `stream_epochs` merged in; official-2016 sees the
/// ground truth as given. Rows follow the input order of `runs`.
pub fn compare_modes(
    runs: &[Run],
    gt: &GroundTruth,
    cfg: &EvalConfig,
    metric: MetricKey,
    stream_epochs: Option<&EpochMap>,
) -> Result<ModeComparison, EvalError> {
    let strict_gt = match stream_epochs {
        Some(s) => with_stream_epochs(gt, s),
        None => gt.clone(),
    };
    let strict_cfg = cfg.clone().with_mode(Mode::Strict);
    let official_cfg = cfg.clone().with_mode(Mode::Official2016);
    let strict = rank_runs(&evaluate_runs(runs, &strict_gt, &strict_cfg)?, metric)?;
    let official = rank_runs(&evaluate_runs(runs, gt, &official_cfg)?, metric)?;
    let by_tag = |ranking: &[RankedRun]| -> BTreeMap<String, (usize, f64)> {
        ranking.iter().map(|r| (r.tag.clone(), (r.rank, r.score))).collect()
    };
    let (s, o) = (by_tag(&strict), by_tag(&official));
    let rows = runs
        .iter()
        .map(|r| {
            let tag = r.tag.as_str();
            ModeRow {
                run: tag.to_string(),
                strict_score: s[tag].1,
                strict_rank: s[tag].0,
                official_score: o[tag].1,
                official_rank: o[tag].0,
            }
        })
        .collect();
    Ok(ModeComparison { metric, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::{validate_ground_truth, Variant};

    #[test]
    fn unique_tweets_of_single_run_is_everything() {
        let f = fixtures::h1();
        let s1 = f.run("sysS1");
        assert_eq!(unique_tweets(s1, std::slice::from_ref(s1)).len(), 2);
        let u = unique_tweets(s1, &f.runs);
        assert_eq!(u.len(), 1);
        assert_eq!(u.iter().next().unwrap().1.as_str(), "tB");
    }

    #[test]
    fn reduce_keeps_surviving_clusters() {
        let f = fixtures::h1();
        let u = unique_tweets(f.run("sysS1"), &f.runs);
        let reduced = reduce_ground_truth(&f.gt, &u);
        assert!(validate_ground_truth(&reduced).is_empty());
        assert_eq!(reduced.clusters.len(), f.gt.clusters.len() - 1);
        assert!(!reduced.epochs.contains(&"tB".parse().unwrap()));
        assert_eq!(reduce_ground_truth(&f.gt, &BTreeSet::new()), f.gt);
    }

    #[test]
    fn identical_runs_do_not_move() {
        let f = fixtures::h1();
        let s1 = f.run("sysS1").clone();
        let twin = s1.clone().with_tag("twin".parse().unwrap());
        let loo = leave_one_out(&[s1, twin], &f.gt, &f.config(), MetricKey::Eg(Variant::One), None).unwrap();
        assert!(loo.rows.iter().all(|r| r.delta == 0));
        assert_eq!(loo.mean_delta, 0.0);
    }

    #[test]
    fn audit_counts_missing() {
        let f = fixtures::epoch_gap();
        let audit = audit_epoch(&f.gt, &f.runs);
        assert!(!audit.is_clean());
        assert_eq!(audit.missing.len(), 1);
        assert_eq!(audit.runs[0].fraction(), 0.5);
        assert_eq!(
            audit.to_tsv(),
            "run\tmissing_tweet\tprofile\ngapped\tu1\tRTS1\n\
             #summary\tgapped\t1\t2\t0.500000\n#summary\tquiet\t0\t1\t0.000000\n"
        );
        assert!(audit_epoch(&fixtures::h1().gt, &fixtures::h1().runs).is_clean());
    }
}
