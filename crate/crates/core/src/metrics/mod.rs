//! The metric engine.
//!
//! Pipeline for one run: [`enforce_cap`] → [`assign_windows`] →
//! [`classify`] → per-cell metrics → aggregates.
//!
//! Every pushed tweet is attributed to the window of its *creation* epoch,
//! not the window it was pushed in. Cluster-first status is decided per
//! profile across the whole period, in push order. A cell is silent when
//! its maximum achievable gain `Z` is zero, which makes silence depend on
//! what the run already retrieved.

pub mod oracle;

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::error::EvalError;
use crate::model::{
    ClusterToken, Epoch, EpochMap, EvalConfig, GroundTruth, Mode, PairKey, ProfileId, PushRecord, Run, TweetId, Variant,
};
use crate::report::{CellRow, MetricKey, ProfileLatency, RunAggregate, ScoreReport};

/// Pushes beyond the cap N within one (profile, push window) group.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CapReport {
    /// Pushes past the first N of their group, in push order. Strict mode
    /// removes them; official-2016 mode keeps them without gain.
    pub over_cap: Vec<PushRecord>,
    /// Groups that exceeded the cap: (profile, push day, group size).
    pub violations: Vec<(ProfileId, i64, usize)>,
}

impl CapReport {
    pub fn over_cap_keys(&self) -> BTreeSet<PairKey> {
        self.over_cap
            .iter()
            .map(|p| (p.profile.clone(), p.tweet.clone()))
            .collect()
    }
}

/// Groups pushes by (profile, push day), each group in push order. Map
/// order is chronological within a profile.
pub(crate) fn push_groups<'a>(
    run: &'a Run,
    epochs: &EpochMap,
    cfg: &EvalConfig,
) -> BTreeMap<(ProfileId, i64), Vec<&'a PushRecord>> {
    let mut groups: BTreeMap<(ProfileId, i64), Vec<&PushRecord>> = BTreeMap::new();
    for p in run.pushes() {
        let w = cfg.windowing.day_of(p.push_epoch);
        groups.entry((p.profile.clone(), w)).or_default().push(p);
    }
    for g in groups.values_mut() {
        g.sort_by_cached_key(|p| p.order_key(epochs));
    }
    groups
}

/// Applies the per-(profile, push window) cap. In strict mode the returned
/// run holds only the first N pushes of each group; in official-2016 mode the
/// run is returned unchanged and the report lists the overflow.
pub fn enforce_cap(run: &Run, epochs: &EpochMap, cfg: &EvalConfig) -> (Run, CapReport) {
    let mut report = CapReport::default();
    let mut kept = Vec::with_capacity(run.len());
    for ((profile, window), group) in push_groups(run, epochs, cfg) {
        if group.len() > cfg.cap {
            report.violations.push((profile.clone(), window, group.len()));
        }
        for (i, p) in group.into_iter().enumerate() {
            if i < cfg.cap {
                kept.push(p.clone());
            } else {
                report.over_cap.push(p.clone());
            }
        }
    }
    let out = match cfg.mode {
        Mode::Strict if !report.over_cap.is_empty() => Run::from_unique(run.tag.clone(), kept),
        _ => run.clone(),
    };
    (out, report)
}

/// A pushed tweet placed into its creation window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Placed {
    pub tweet: TweetId,
    pub push_epoch: Epoch,
    pub creation_epoch: Epoch,
    pub creation_window: usize,
    pub push_window: Option<usize>,
    pub over_cap: bool,
}

/// Per-profile lists of placed pushes, each in push order.
#[derive(Debug, Clone, Default)]
pub struct Assignment {
    pub profiles: BTreeMap<ProfileId, Vec<Placed>>,
    pub warnings: Vec<String>,
}

impl Assignment {
    /// T_i(w_j): tweets of `profile` whose creation falls in `window`.
    pub fn window_list(&self, profile: &ProfileId, window: usize) -> Vec<&Placed> {
        self.profiles
            .get(profile)
            .into_iter()
            .flatten()
            .filter(|p| p.creation_window == window)
            .collect()
    }
}

/// Places each push into the window of its creation epoch. Pushes for
/// profiles without judgments and tweets created outside the evaluation
/// period are dropped with a warning. A push with no epoch entry is an error
/// in strict mode and silently ignored in official-2016 mode.
pub fn assign_windows(
    run: &Run,
    gt: &GroundTruth,
    cfg: &EvalConfig,
    over_cap: &BTreeSet<PairKey>,
) -> Result<Assignment, EvalError> {
    let judged = gt.judged_profiles();
    let mut out = Assignment::default();
    let mut missing = Vec::new();
    let mut early = Vec::new();
    let mut unknown_profiles = BTreeSet::new();

    for p in run.pushes() {
        if !judged.contains(&p.profile) {
            unknown_profiles.insert(p.profile.clone());
            continue;
        }
        let Some(created) = gt.epochs.get(&p.tweet) else {
            if cfg.mode == Mode::Strict {
                missing.push((p.profile.clone(), p.tweet.clone()));
            }
            continue;
        };
        if cfg.mode == Mode::Strict && p.push_epoch < created {
            early.push((p, created));
            continue;
        }
        let Some(window) = cfg.windowing.window_of(created) else {
            out.warnings.push(format!(
                "run {}: {} {} created at {created}, outside the evaluation period; dropped",
                run.tag, p.profile, p.tweet
            ));
            continue;
        };
        out.profiles.entry(p.profile.clone()).or_default().push(Placed {
            tweet: p.tweet.clone(),
            push_epoch: p.push_epoch,
            creation_epoch: created,
            creation_window: window,
            push_window: cfg.windowing.window_of(p.push_epoch),
            over_cap: over_cap.contains(&(p.profile.clone(), p.tweet.clone())),
        });
    }

    if !missing.is_empty() {
        missing.sort();
        return Err(EvalError::MissingEpochs {
            run: run.tag.to_string(),
            tweets: missing,
        });
    }
    if let Some((p, created)) = early.first() {
        return Err(EvalError::PushBeforeCreation {
            run: run.tag.to_string(),
            count: early.len(),
            profile: p.profile.clone(),
            tweet: p.tweet.clone(),
            push_epoch: p.push_epoch,
            created: *created,
        });
    }
    for profile in unknown_profiles {
        out.warnings.push(format!(
            "run {}: profile {profile} has no judgments; its pushes are not scored",
            run.tag
        ));
    }
    for list in out.profiles.values_mut() {
        list.sort_by(|a, b| {
            (a.push_epoch, a.creation_epoch, &a.tweet).cmp(&(b.push_epoch, b.creation_epoch, &b.tweet))
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    /// First pushed member of its cluster.
    RelevantNew,
    /// Member of a cluster the run already retrieved.
    Redundant,
    /// Judged with grade 0.
    JudgedNonRelevant,
    /// Judged relevant but not assigned to any cluster; earns no gain.
    Unclustered,
    /// No judgment for this (profile, tweet).
    Unjudged,
    /// Past the cap in official-2016 mode: counted but never earns gain.
    OverCap,
}

impl Status {
    pub fn earns_gain(self) -> bool {
        self == Status::RelevantNew
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TweetVerdict {
    pub profile: ProfileId,
    pub tweet: TweetId,
    pub cluster: Option<ClusterToken>,
    pub push_epoch: Epoch,
    pub creation_window: usize,
    pub push_window: Option<usize>,
    pub status: Status,
}

/// Walks each profile's pushes in push order; the first member of each
/// cluster is relevant-new, later members are redundant.
pub fn classify(assignment: &Assignment, gt: &GroundTruth) -> Vec<TweetVerdict> {
    let mut out = Vec::new();
    for (profile, placed) in &assignment.profiles {
        let mut claimed: BTreeSet<&ClusterToken> = BTreeSet::new();
        for p in placed {
            let cluster = gt.cluster_of(profile, &p.tweet);
            let status = if p.over_cap {
                Status::OverCap
            } else if let Some(c) = cluster {
                if claimed.insert(c) {
                    Status::RelevantNew
                } else {
                    Status::Redundant
                }
            } else {
                match gt.grade(profile, &p.tweet) {
                    None => Status::Unjudged,
                    Some(0) => Status::JudgedNonRelevant,
                    Some(_) => Status::Unclustered,
                }
            };
            out.push(TweetVerdict {
                profile: profile.clone(),
                tweet: p.tweet.clone(),
                cluster: cluster.cloned(),
                push_epoch: p.push_epoch,
                creation_window: p.creation_window,
                push_window: p.push_window,
                status,
            });
        }
    }
    out
}

/// Counts that determine every metric of one cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CellCounts {
    /// |T_i(w_j)|
    pub pushed: usize,
    pub gain: usize,
    pub z: usize,
    pub pain: usize,
}

impl CellCounts {
    pub fn silent(&self) -> bool {
        self.z == 0
    }
}

/// G: relevant-new tweets created in the window, bounded by Z. The bound only
/// bites when more than N new clusters are sent back into one window.
pub fn window_gain(relevant_new: usize, z: usize) -> usize {
    relevant_new.min(z)
}

/// Z: clusters with a tweet created in the window that the run had not
/// retrieved in an earlier window, capped at N.
pub fn max_gain_z(
    cluster_windows: &BTreeMap<ClusterToken, BTreeSet<usize>>,
    retrieved_in: &BTreeMap<ClusterToken, usize>,
    window: usize,
    cap: usize,
) -> usize {
    cluster_windows
        .iter()
        .filter(|(c, ws)| ws.contains(&window) && retrieved_in.get(*c).is_none_or(|&r| r >= window))
        .count()
        .min(cap)
}

fn silent_score(pushed: usize, variant: Variant, cap: usize) -> f64 {
    match variant {
        Variant::Zero => 0.0,
        Variant::One => {
            if pushed == 0 {
                1.0
            } else {
                0.0
            }
        }
        Variant::Proportional => ((cap as f64 - pushed as f64) / cap as f64).max(0.0),
    }
}

/// Expected gain: G / |T| on eventful cells, the variant's silent-day rule
/// otherwise.
pub fn eg_score(cell: &CellCounts, variant: Variant, cap: usize) -> f64 {
    if cell.silent() {
        silent_score(cell.pushed, variant, cap)
    } else if cell.pushed == 0 {
        0.0
    } else {
        cell.gain as f64 / cell.pushed as f64
    }
}

/// Normalized cumulative gain: G / Z on eventful cells.
pub fn ncg_score(cell: &CellCounts, variant: Variant, cap: usize) -> f64 {
    if cell.silent() {
        silent_score(cell.pushed, variant, cap)
    } else {
        cell.gain as f64 / cell.z as f64
    }
}

/// Gain minus pain: alpha * G - (1 - alpha) * P.
pub fn gmp_score(cell: &CellCounts, alpha: f64) -> f64 {
    alpha * cell.gain as f64 - (1.0 - alpha) * cell.pain as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatencyResult {
    pub profiles: Vec<ProfileLatency>,
    pub mean: f64,
    pub median: f64,
}

/// Earliest creation epoch of each cluster, per profile.
pub type ClusterStarts = BTreeMap<ProfileId, BTreeMap<ClusterToken, Epoch>>;

/// Per profile: sum over retrieved clusters of (push epoch of the
/// relevant-new tweet − earliest creation epoch in the cluster).
pub fn latency(
    run_tag: &str,
    verdicts: &[TweetVerdict],
    starts: &ClusterStarts,
    profiles: &BTreeSet<ProfileId>,
) -> LatencyResult {
    let mut by_profile: BTreeMap<&ProfileId, Vec<&TweetVerdict>> = BTreeMap::new();
    for v in verdicts.iter().filter(|v| v.status == Status::RelevantNew) {
        by_profile.entry(&v.profile).or_default().push(v);
    }
    let mut rows = Vec::with_capacity(profiles.len());
    for profile in profiles {
        let earliest = starts.get(profile);
        let mut sum = 0;
        let mut retrieved = 0;
        for v in by_profile.get(profile).into_iter().flatten() {
            let cluster = v.cluster.as_ref().expect("relevant-new tweets are clustered");
            if let Some(first) = earliest.and_then(|e| e.get(cluster)) {
                sum += v.push_epoch - first;
                retrieved += 1;
            }
        }
        rows.push(ProfileLatency {
            run: run_tag.to_string(),
            profile: profile.to_string(),
            latency_sum: sum,
            clusters_retrieved: retrieved,
            no_retrieval: retrieved == 0,
        });
    }
    let mut sums: Vec<f64> = rows.iter().map(|r| r.latency_sum as f64).collect();
    LatencyResult {
        mean: mean(&sums),
        median: median(&mut sums),
        profiles: rows,
    }
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

fn median(xs: &mut [f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}

/// Builds a cell row from its counts.
pub fn cell_row(run: &str, profile: &str, window: usize, counts: CellCounts, cfg: &EvalConfig) -> CellRow {
    let eg = |v| eg_score(&counts, v, cfg.cap);
    let ncg = |v| ncg_score(&counts, v, cfg.cap);
    CellRow {
        run: run.to_string(),
        profile: profile.to_string(),
        window,
        pushed: counts.pushed,
        gain: counts.gain,
        z: counts.z,
        pain: counts.pain,
        silent: counts.silent(),
        eg_0: eg(Variant::Zero),
        eg_1: eg(Variant::One),
        eg_p: eg(Variant::Proportional),
        ncg_0: ncg(Variant::Zero),
        ncg_1: ncg(Variant::One),
        ncg_p: ncg(Variant::Proportional),
        gmp: cfg.alphas.iter().map(|a| gmp_score(&counts, a.value())).collect(),
    }
}

/// Averages every configured metric uniformly over cells (profiles × windows)
/// and attaches the latency mean and median.
pub fn aggregate(run: &str, cells: &[CellRow], latency: &LatencyResult, cfg: &EvalConfig) -> RunAggregate {
    let avg = |f: &dyn Fn(&CellRow) -> f64| {
        if cells.is_empty() {
            0.0
        } else {
            cells.iter().map(f).sum::<f64>() / cells.len() as f64
        }
    };
    let mut metrics = BTreeMap::new();
    for &v in &cfg.eg_variants {
        metrics.insert(MetricKey::Eg(v), avg(&|c| c.eg(v)));
    }
    for &v in &cfg.ncg_variants {
        metrics.insert(MetricKey::Ncg(v), avg(&|c| c.ncg(v)));
    }
    for (i, a) in cfg.alphas.iter().enumerate() {
        metrics.insert(MetricKey::Gmp(*a), avg(&|c| c.gmp[i]));
    }
    metrics.insert(MetricKey::LatencyMean, latency.mean);
    metrics.insert(MetricKey::LatencyMedian, latency.median);
    RunAggregate {
        run: run.to_string(),
        metrics,
    }
}

/// Per-profile cell counts for every window, from classified verdicts.
fn profile_cells(
    cluster_windows: &BTreeMap<ClusterToken, BTreeSet<usize>>,
    verdicts: &[&TweetVerdict],
    cfg: &EvalConfig,
) -> Vec<CellCounts> {
    let windows = cfg.windowing.num_windows;
    let mut retrieved_in: BTreeMap<ClusterToken, usize> = BTreeMap::new();
    let mut pushed = vec![0usize; windows];
    let mut relevant_new = vec![0usize; windows];
    for v in verdicts {
        pushed[v.creation_window] += 1;
        if v.status == Status::RelevantNew {
            relevant_new[v.creation_window] += 1;
            if let Some(c) = &v.cluster {
                retrieved_in.insert(c.clone(), v.creation_window);
            }
        }
    }
    (0..windows)
        .map(|j| {
            let z = max_gain_z(cluster_windows, &retrieved_in, j, cfg.cap);
            let gain = window_gain(relevant_new[j], z);
            CellCounts {
                pushed: pushed[j],
                gain,
                z,
                pain: pushed[j] - gain,
            }
        })
        .collect()
}

/// Scores runs against one ground truth and configuration. The tables that
/// depend only on the ground truth are built once and shared by every run.
#[derive(Debug, Clone)]
pub struct Evaluator<'a> {
    gt: &'a GroundTruth,
    cfg: &'a EvalConfig,
    profiles: BTreeSet<ProfileId>,
    cluster_windows: BTreeMap<ProfileId, BTreeMap<ClusterToken, BTreeSet<usize>>>,
    starts: ClusterStarts,
}

impl<'a> Evaluator<'a> {
    pub fn new(gt: &'a GroundTruth, cfg: &'a EvalConfig) -> Result<Self, EvalError> {
        cfg.validate()?;
        let profiles = gt.judged_profiles();
        let mut cluster_windows: BTreeMap<ProfileId, BTreeMap<ClusterToken, BTreeSet<usize>>> = BTreeMap::new();
        let mut starts: ClusterStarts = BTreeMap::new();
        for ((profile, tweet), cluster) in &gt.clusters.assignments {
            let windows = cluster_windows
                .entry(profile.clone())
                .or_default()
                .entry(cluster.clone())
                .or_default();
            let Some(created) = gt.epochs.get(tweet) else {
                continue;
            };
            if let Some(w) = cfg.windowing.window_of(created) {
                windows.insert(w);
            }
            starts
                .entry(profile.clone())
                .or_default()
                .entry(cluster.clone())
                .and_modify(|e| *e = (*e).min(created))
                .or_insert(created);
        }
        Ok(Self {
            gt,
            cfg,
            profiles,
            cluster_windows,
            starts,
        })
    }

    pub fn config(&self) -> &EvalConfig {
        self.cfg
    }

    pub fn evaluate(&self, run: &Run) -> Result<ScoreReport, EvalError> {
        let (gt, cfg) = (self.gt, self.cfg);
        let (capped, cap_report) = enforce_cap(run, &gt.epochs, cfg);
        let over_cap = match cfg.mode {
            Mode::Strict => BTreeSet::new(),
            Mode::Official2016 => cap_report.over_cap_keys(),
        };
        let assignment = assign_windows(&capped, gt, cfg, &over_cap)?;
        let verdicts = classify(&assignment, gt);
        let tag = run.tag.as_str();

        let mut by_profile: BTreeMap<&ProfileId, Vec<&TweetVerdict>> = BTreeMap::new();
        for v in &verdicts {
            by_profile.entry(&v.profile).or_default().push(v);
        }
        let no_clusters = BTreeMap::new();
        let mut cells = Vec::with_capacity(self.profiles.len() * cfg.windowing.num_windows);
        for profile in &self.profiles {
            let vs = by_profile.remove(profile).unwrap_or_default();
            let cw = self.cluster_windows.get(profile).unwrap_or(&no_clusters);
            for (j, counts) in profile_cells(cw, &vs, cfg).into_iter().enumerate() {
                cells.push(cell_row(tag, profile.as_str(), j, counts, cfg));
            }
        }
        let lat = latency(tag, &verdicts, &self.starts, &self.profiles);
        let agg = aggregate(tag, &cells, &lat, cfg);

        let mut warnings = assignment.warnings;
        for (profile, window, size) in &cap_report.violations {
            warnings.push(format!(
                "run {tag}: {size} pushes for {profile} in push day {window} exceed the cap of {}{}",
                cfg.cap,
                if cfg.mode == Mode::Strict { "; truncated" } else { "" }
            ));
        }
        Ok(ScoreReport {
            alphas: cfg.alphas.clone(),
            cells,
            profiles: lat.profiles,
            aggregates: vec![agg],
            warnings,
        })
    }

    /// Scores several runs in parallel; the merged report keeps input order.
    pub fn evaluate_all(&self, runs: &[Run]) -> Result<ScoreReport, EvalError> {
        let reports: Vec<ScoreReport> = runs
            .par_iter()
            .map(|r| self.evaluate(r))
            .collect::<Vec<_>>()
            .into_iter()
            .collect::<Result<_, _>>()?;
        Ok(ScoreReport::merge(reports))
    }
}

/// Scores one run against the ground truth.
pub fn evaluate_run(run: &Run, gt: &GroundTruth, cfg: &EvalConfig) -> Result<ScoreReport, EvalError> {
    Evaluator::new(gt, cfg)?.evaluate(run)
}

/// Scores several runs in parallel; the merged report keeps input order.
pub fn evaluate_runs(runs: &[Run], gt: &GroundTruth, cfg: &EvalConfig) -> Result<ScoreReport, EvalError> {
    Evaluator::new(gt, cfg)?.evaluate_all(runs)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedRun {
    pub rank: usize,
    pub tag: String,
    pub score: f64,
}

/// Ranks the runs of a report on one aggregate metric: best first, ties
/// ordered by tag and sharing the better rank.
pub fn rank_runs(report: &ScoreReport, key: MetricKey) -> Result<Vec<RankedRun>, EvalError> {
    let mut scored = report
        .aggregates
        .iter()
        .map(|a| {
            a.metrics
                .get(&key)
                .map(|s| (a.run.clone(), *s))
                .ok_or_else(|| EvalError::MetricNotComputed(key.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    scored.sort_by(|(ta, a), (tb, b)| {
        let by_score = if key.higher_is_better() {
            b.total_cmp(a)
        } else {
            a.total_cmp(b)
        };
        by_score.then_with(|| ta.cmp(tb))
    });
    let mut out: Vec<RankedRun> = Vec::with_capacity(scored.len());
    for (i, (tag, score)) in scored.into_iter().enumerate() {
        let rank = match out.last() {
            Some(prev) if prev.score == score => prev.rank,
            _ => i + 1,
        };
        out.push(RankedRun { rank, tag, score });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Alpha, RunTag, Windowing};
    use crate::report::{MetricKey, RunAggregate};

    fn counts(pushed: usize, gain: usize, z: usize) -> CellCounts {
        CellCounts {
            pushed,
            gain,
            z,
            pain: pushed - gain,
        }
    }

    #[test]
    fn silent_proportional_spot_values() {
        assert_eq!(eg_score(&counts(1, 0, 0), Variant::Proportional, 10), 0.9);
        assert_eq!(eg_score(&counts(2, 0, 0), Variant::Proportional, 10), 0.8);
        assert_eq!(eg_score(&counts(12, 0, 0), Variant::Proportional, 10), 0.0);
    }

    #[test]
    fn silent_rules_per_variant() {
        let quiet = counts(0, 0, 0);
        let noisy = counts(1, 0, 0);
        assert_eq!(eg_score(&quiet, Variant::Zero, 10), 0.0);
        assert_eq!(eg_score(&quiet, Variant::One, 10), 1.0);
        assert_eq!(eg_score(&quiet, Variant::Proportional, 10), 1.0);
        assert_eq!(eg_score(&noisy, Variant::One, 10), 0.0);
        assert_eq!(ncg_score(&quiet, Variant::One, 10), 1.0);
        assert_eq!(ncg_score(&noisy, Variant::Proportional, 10), 0.9);
    }

    #[test]
    fn eventful_cells() {
        assert_eq!(ncg_score(&counts(1, 1, 2), Variant::One, 10), 0.5);
        assert_eq!(eg_score(&counts(2, 1, 1), Variant::Zero, 10), 0.5);
        // nothing pushed on an eventful day
        assert_eq!(eg_score(&counts(0, 0, 1), Variant::One, 10), 0.0);
        assert_eq!(gmp_score(&counts(0, 0, 1), 0.5), 0.0);
        assert_eq!(gmp_score(&counts(2, 1, 1), 0.5), 0.0);
    }

    #[test]
    fn z_counts_unretrieved_clusters_up_to_cap() {
        let c = |s: &str| ClusterToken::new(s).unwrap();
        let mut cw = BTreeMap::new();
        cw.insert(c("C1"), BTreeSet::from([0, 1]));
        cw.insert(c("C2"), BTreeSet::from([1]));
        let mut retrieved = BTreeMap::new();
        retrieved.insert(c("C1"), 0);
        assert_eq!(max_gain_z(&cw, &retrieved, 0, 10), 1);
        assert_eq!(max_gain_z(&cw, &retrieved, 1, 10), 1);
        assert_eq!(max_gain_z(&cw, &BTreeMap::new(), 1, 10), 2);
        assert_eq!(max_gain_z(&cw, &BTreeMap::new(), 1, 1), 1);
        assert_eq!(max_gain_z(&cw, &retrieved, 2, 10), 0);
    }

    fn report_with(scores: &[(&str, f64)], key: MetricKey) -> ScoreReport {
        ScoreReport {
            aggregates: scores
                .iter()
                .map(|(t, s)| RunAggregate {
                    run: t.to_string(),
                    metrics: BTreeMap::from([(key, *s)]),
                })
                .collect(),
            ..Default::default()
        }
    }

    #[test]
    fn ranking_orders_and_ties() {
        let k = MetricKey::Eg(Variant::One);
        let r = rank_runs(&report_with(&[("a", 0.5), ("b", 0.7)], k), k).unwrap();
        assert_eq!(
            r.iter().map(|x| (x.rank, x.tag.as_str())).collect::<Vec<_>>(),
            vec![(1, "b"), (2, "a")]
        );
        let r = rank_runs(&report_with(&[("b", 0.5), ("a", 0.5), ("c", 0.1)], k), k).unwrap();
        assert_eq!(
            r.iter().map(|x| (x.rank, x.tag.as_str())).collect::<Vec<_>>(),
            vec![(1, "a"), (1, "b"), (3, "c")]
        );
    }

    #[test]
    fn latency_ranks_ascending() {
        let k = MetricKey::LatencyMean;
        let r = rank_runs(&report_with(&[("b", 115.0), ("a", 32.0)], k), k).unwrap();
        assert_eq!(r[0].tag, "a");
        assert_eq!(r[0].rank, 1);
    }

    #[test]
    fn ranking_unknown_metric_is_an_error() {
        let r = report_with(&[("a", 1.0)], MetricKey::Eg(Variant::One));
        assert!(rank_runs(&r, MetricKey::Gmp(Alpha::from_hundredths(50).unwrap())).is_err());
    }

    #[test]
    fn cap_truncates_in_strict_mode_only() {
        let p = ProfileId::new("P").unwrap();
        let pushes: Vec<PushRecord> = (0..12)
            .map(|i| PushRecord {
                profile: p.clone(),
                tweet: TweetId::new(format!("t{i:02}")).unwrap(),
                push_epoch: 100 + i,
            })
            .collect();
        let run = Run::from_unique(RunTag::new("r").unwrap(), pushes);
        let cfg = EvalConfig::new(Windowing::new(0, 86_400, 1).unwrap());
        let (strict, rep) = enforce_cap(&run, &EpochMap::new(), &cfg);
        assert_eq!(strict.len(), 10);
        assert_eq!(rep.over_cap.len(), 2);
        assert_eq!(rep.over_cap[0].tweet.as_str(), "t10");

        let official = cfg.clone().with_mode(Mode::Official2016);
        let (same, rep) = enforce_cap(&run, &EpochMap::new(), &official);
        assert_eq!(same, run);
        assert_eq!(rep.violations, vec![(p, 0, 12)]);

        let small = Run::from_unique(run.tag.clone(), run.pushes()[..10].to_vec());
        let (s, rep) = enforce_cap(&small, &EpochMap::new(), &cfg);
        assert_eq!(s, small);
        assert!(rep.over_cap.is_empty());
    }
}
