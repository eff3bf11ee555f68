//! Domain types shared by every other module: identifiers, ground truth,
//! runs, windowing and evaluation configuration.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Seconds since the Unix epoch, UTC.
pub type Epoch = i64;

fn check_token(kind: &'static str, raw: &str) -> Result<(), ModelError> {
    if raw.is_empty() || raw.chars().any(char::is_whitespace) {
        return Err(ModelError::BadToken {
            kind,
            token: raw.to_string(),
        });
    }
    Ok(())
}

macro_rules! token_type {
    ($(#[$meta:meta])* $name:ident, $kind:literal) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(try_from = "String", into = "String")]
        pub struct $name(String);

        impl $name {
            pub fn new(raw: impl Into<String>) -> Result<Self, ModelError> {
                let raw = raw.into();
                check_token($kind, &raw)?;
                Ok(Self(raw))
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl TryFrom<String> for $name {
            type Error = ModelError;
            fn try_from(raw: String) -> Result<Self, Self::Error> {
                Self::new(raw)
            }
        }

        impl From<$name> for String {
            fn from(id: $name) -> String {
                id.0
            }
        }

        impl FromStr for $name {
            type Err = ModelError;
            fn from_str(s: &str) -> Result<Self, Self::Err> {
                Self::new(s)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }
    };
}

token_type!(
    /// Opaque tweet identifier. Ordering is lexicographic and only used for
    /// deterministic tie-breaking.
    TweetId,
    "tweet id"
);
token_type!(
    /// Interest profile (topic) identifier.
    ProfileId,
    "profile id"
);
token_type!(
    /// Cluster token; only meaningful together with its profile.
    ClusterToken,
    "cluster id"
);
token_type!(RunTag, "run tag");

/// A cluster is scoped to its profile: the same token under two profiles
/// names two different clusters.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClusterId {
    pub profile: ProfileId,
    pub value: ClusterToken,
}

/// Key used for every per-(profile, tweet) table.
pub type PairKey = (ProfileId, TweetId);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Judgment {
    pub profile: ProfileId,
    pub tweet: TweetId,
    pub grade: u32,
}

impl Judgment {
    /// Grades are binarized: anything at or above 1 is relevant.
    pub fn is_relevant(&self) -> bool {
        self.grade >= 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterAssignment {
    pub cluster: ClusterId,
    pub tweet: TweetId,
}

/// Judged grades keyed by (profile, tweet), plus the source line of each
/// entry when it came from a file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QrelsTable {
    pub grades: BTreeMap<PairKey, u32>,
    pub lines: BTreeMap<PairKey, usize>,
}

impl QrelsTable {
    pub fn insert(&mut self, profile: ProfileId, tweet: TweetId, grade: u32) {
        self.grades.insert((profile, tweet), grade);
    }

    pub fn judgments(&self) -> impl Iterator<Item = Judgment> + '_ {
        self.grades.iter().map(|((p, t), g)| Judgment {
            profile: p.clone(),
            tweet: t.clone(),
            grade: *g,
        })
    }

    pub fn len(&self) -> usize {
        self.grades.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grades.is_empty()
    }
}

/// Cluster tokens keyed by (profile, tweet). A tweet belongs to at most one
/// cluster per profile by construction.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClusterTable {
    pub assignments: BTreeMap<PairKey, ClusterToken>,
    pub lines: BTreeMap<PairKey, usize>,
}

impl ClusterTable {
    pub fn insert(&mut self, profile: ProfileId, tweet: TweetId, cluster: ClusterToken) {
        self.assignments.insert((profile, tweet), cluster);
    }

    pub fn iter(&self) -> impl Iterator<Item = ClusterAssignment> + '_ {
        self.assignments.iter().map(|((p, t), c)| ClusterAssignment {
            cluster: ClusterId {
                profile: p.clone(),
                value: c.clone(),
            },
            tweet: t.clone(),
        })
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }
}

/// Tweet creation epochs.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpochMap(BTreeMap<TweetId, Epoch>);

impl EpochMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, tweet: &TweetId) -> Option<Epoch> {
        self.0.get(tweet).copied()
    }

    pub fn insert(&mut self, tweet: TweetId, epoch: Epoch) -> Option<Epoch> {
        self.0.insert(tweet, epoch)
    }

    pub fn remove(&mut self, tweet: &TweetId) -> Option<Epoch> {
        self.0.remove(tweet)
    }

    pub fn contains(&self, tweet: &TweetId) -> bool {
        self.0.contains_key(tweet)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&TweetId, Epoch)> {
        self.0.iter().map(|(t, e)| (t, *e))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<(TweetId, Epoch)> for EpochMap {
    fn from_iter<I: IntoIterator<Item = (TweetId, Epoch)>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

/// The three ground-truth files: qrels, clusters and creation epochs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroundTruth {
    pub qrels: QrelsTable,
    pub clusters: ClusterTable,
    pub epochs: EpochMap,
    /// File names used when reporting validation violations.
    pub sources: SourceNames,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SourceNames {
    pub qrels: Option<String>,
    pub clusters: Option<String>,
}

impl GroundTruth {
    pub fn new(qrels: QrelsTable, clusters: ClusterTable, epochs: EpochMap) -> Self {
        Self {
            qrels,
            clusters,
            epochs,
            sources: SourceNames::default(),
        }
    }

    pub fn grade(&self, profile: &ProfileId, tweet: &TweetId) -> Option<u32> {
        self.qrels.grades.get(&(profile.clone(), tweet.clone())).copied()
    }

    pub fn cluster_of(&self, profile: &ProfileId, tweet: &TweetId) -> Option<&ClusterToken> {
        self.clusters.assignments.get(&(profile.clone(), tweet.clone()))
    }

    /// Profiles carrying at least one judgment. These are the profiles that
    /// contribute cells to a score report.
    pub fn judged_profiles(&self) -> BTreeSet<ProfileId> {
        let mut out = BTreeSet::new();
        let mut last: Option<&ProfileId> = None;
        for (p, _) in self.qrels.grades.keys() {
            if last != Some(p) {
                out.insert(p.clone());
                last = Some(p);
            }
        }
        out
    }

    /// Every cluster of `profile` with its member tweets.
    pub fn clusters_of(&self, profile: &ProfileId) -> BTreeMap<ClusterToken, Vec<TweetId>> {
        let mut out: BTreeMap<ClusterToken, Vec<TweetId>> = BTreeMap::new();
        let from = (profile.clone(), TweetId(String::new()));
        for ((p, t), c) in self.clusters.assignments.range(from..) {
            if p != profile {
                break;
            }
            out.entry(c.clone()).or_default().push(t.clone());
        }
        out
    }
}

/// Which ground-truth rule a violation breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ViolationRule {
    ClusteredButNotRelevant,
    ClusteredButUnjudged,
    ClusteredWithoutEpoch,
    NegativeEpoch,
}

impl ViolationRule {
    pub fn name(self) -> &'static str {
        match self {
            ViolationRule::ClusteredButNotRelevant => "clustered-but-not-relevant",
            ViolationRule::ClusteredButUnjudged => "clustered-but-unjudged",
            ViolationRule::ClusteredWithoutEpoch => "clustered-without-epoch",
            ViolationRule::NegativeEpoch => "negative-epoch",
        }
    }
}

impl fmt::Display for ViolationRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub rule: ViolationRule,
    pub profile: Option<ProfileId>,
    pub tweet: TweetId,
    pub cluster: Option<ClusterToken>,
    pub file: Option<String>,
    pub line: Option<usize>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.rule)?;
        if let Some(p) = &self.profile {
            write!(f, " profile={p}")?;
        }
        if let Some(c) = &self.cluster {
            write!(f, " cluster={c}")?;
        }
        write!(f, " tweet={}", self.tweet)?;
        match (&self.file, self.line) {
            (Some(file), Some(line)) => write!(f, " ({file}:{line})"),
            (None, Some(line)) => write!(f, " (line {line})"),
            _ => Ok(()),
        }
    }
}

/// Checks referential integrity across the three ground-truth parts.
/// Returns an empty list iff the ground truth is well formed.
pub fn validate_ground_truth(gt: &GroundTruth) -> Vec<Violation> {
    let mut out = Vec::new();
    for ((profile, tweet), cluster) in &gt.clusters.assignments {
        let key = (profile.clone(), tweet.clone());
        let at = |rule| Violation {
            rule,
            profile: Some(profile.clone()),
            tweet: tweet.clone(),
            cluster: Some(cluster.clone()),
            file: gt.sources.clusters.clone(),
            line: gt.clusters.lines.get(&key).copied(),
        };
        match gt.qrels.grades.get(&key) {
            None => out.push(at(ViolationRule::ClusteredButUnjudged)),
            Some(0) => out.push(at(ViolationRule::ClusteredButNotRelevant)),
            Some(_) => {}
        }
        if !gt.epochs.contains(tweet) {
            out.push(at(ViolationRule::ClusteredWithoutEpoch));
        }
    }
    for (tweet, epoch) in gt.epochs.iter() {
        if epoch < 0 {
            out.push(Violation {
                rule: ViolationRule::NegativeEpoch,
                profile: None,
                tweet: tweet.clone(),
                cluster: None,
                file: None,
                line: None,
            });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PushRecord {
    pub profile: ProfileId,
    pub tweet: TweetId,
    pub push_epoch: Epoch,
}

/// Emitted when a run contained more than one push of the same
/// (profile, tweet); only the earliest survives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DuplicatePush {
    pub profile: ProfileId,
    pub tweet: TweetId,
    pub kept_epoch: Epoch,
    pub dropped_epoch: Epoch,
}

/// A system's pushed notifications. Pushes are unique per (profile, tweet)
/// and stored sorted by (profile, push epoch, tweet).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Run {
    pub tag: RunTag,
    pushes: Vec<PushRecord>,
}

impl Run {
    /// Builds a run, collapsing duplicate (profile, tweet) pushes to the
    /// earliest push epoch.
    pub fn new(tag: RunTag, pushes: Vec<PushRecord>) -> (Self, Vec<DuplicatePush>) {
        let mut best: BTreeMap<PairKey, Epoch> = BTreeMap::new();
        let mut dups = Vec::new();
        for p in pushes {
            let key = (p.profile.clone(), p.tweet.clone());
            match best.get_mut(&key) {
                None => {
                    best.insert(key, p.push_epoch);
                }
                Some(kept) => {
                    let (keep, drop) = if p.push_epoch < *kept {
                        (p.push_epoch, *kept)
                    } else {
                        (*kept, p.push_epoch)
                    };
                    *kept = keep;
                    dups.push(DuplicatePush {
                        profile: p.profile,
                        tweet: p.tweet,
                        kept_epoch: keep,
                        dropped_epoch: drop,
                    });
                }
            }
        }
        let mut pushes: Vec<PushRecord> = best
            .into_iter()
            .map(|((profile, tweet), push_epoch)| PushRecord {
                profile,
                tweet,
                push_epoch,
            })
            .collect();
        pushes.sort_by(|a, b| (&a.profile, a.push_epoch, &a.tweet).cmp(&(&b.profile, b.push_epoch, &b.tweet)));
        (Self { tag, pushes }, dups)
    }

    /// Builds a run from pushes already known to be unique. Falls back to
    /// [`Run::new`] if they are not.
    pub fn from_unique(tag: RunTag, mut pushes: Vec<PushRecord>) -> Self {
        let unique = {
            let mut seen = BTreeSet::new();
            pushes.iter().all(|p| seen.insert((&p.profile, &p.tweet)))
        };
        if !unique {
            return Self::new(tag, pushes).0;
        }
        pushes.sort_by(|a, b| (&a.profile, a.push_epoch, &a.tweet).cmp(&(&b.profile, b.push_epoch, &b.tweet)));
        Self { tag, pushes }
    }

    pub fn empty(tag: RunTag) -> Self {
        Self {
            tag,
            pushes: Vec::new(),
        }
    }

    pub fn pushes(&self) -> &[PushRecord] {
        &self.pushes
    }

    pub fn len(&self) -> usize {
        self.pushes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pushes.is_empty()
    }

    pub fn with_tag(mut self, tag: RunTag) -> Self {
        self.tag = tag;
        self
    }
}

/// Deterministic order on pushes of one profile: push epoch, then creation
/// epoch (unknown sorts last), then tweet id.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PushOrder<'a> {
    pub push_epoch: Epoch,
    pub creation: Option<Epoch>,
    pub tweet: &'a TweetId,
}

impl Ord for PushOrder<'_> {
    fn cmp(&self, other: &Self) -> Ordering {
        let creation = |c: Option<Epoch>| c.map_or((1, 0), |e| (0, e));
        self.push_epoch
            .cmp(&other.push_epoch)
            .then_with(|| creation(self.creation).cmp(&creation(other.creation)))
            .then_with(|| self.tweet.cmp(other.tweet))
    }
}

impl PartialOrd for PushOrder<'_> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PushRecord {
    pub fn order_key<'a>(&'a self, epochs: &EpochMap) -> PushOrder<'a> {
        PushOrder {
            push_epoch: self.push_epoch,
            creation: epochs.get(&self.tweet),
            tweet: &self.tweet,
        }
    }
}

/// Half-open, contiguous evaluation windows
/// `[start + j*len, start + (j+1)*len)` for `j` in `0..num_windows`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Windowing {
    pub start_epoch: Epoch,
    pub window_seconds: i64,
    pub num_windows: usize,
}

impl Windowing {
    pub fn new(start_epoch: Epoch, window_seconds: i64, num_windows: usize) -> Result<Self, ModelError> {
        if window_seconds <= 0 {
            return Err(ModelError::Config(format!(
                "window length must be positive, got {window_seconds}"
            )));
        }
        if num_windows == 0 {
            return Err(ModelError::Config("window count must be positive".into()));
        }
        Ok(Self {
            start_epoch,
            window_seconds,
            num_windows,
        })
    }

    /// Daily windows.
    pub fn daily(start_epoch: Epoch, days: usize) -> Result<Self, ModelError> {
        Self::new(start_epoch, 86_400, days)
    }

    /// Index of the window containing `epoch`, or `None` outside the period.
    pub fn window_of(&self, epoch: Epoch) -> Option<usize> {
        if epoch < self.start_epoch {
            return None;
        }
        let idx = (epoch - self.start_epoch) / self.window_seconds;
        usize::try_from(idx).ok().filter(|&j| j < self.num_windows)
    }

    /// Day (window-length bucket) containing `epoch`, counted from the start
    /// and unbounded on both sides. Used to group pushes; equals
    /// [`Self::window_of`] inside the period.
    pub fn day_of(&self, epoch: Epoch) -> i64 {
        (epoch - self.start_epoch).div_euclid(self.window_seconds)
    }

    pub fn window_start(&self, index: usize) -> Epoch {
        self.start_epoch + index as i64 * self.window_seconds
    }

    pub fn end_epoch(&self) -> Epoch {
        self.window_start(self.num_windows)
    }
}

/// How unassessed tweets and cap violations are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    /// Missing epochs are errors, over-cap pushes are truncated, unjudged
    /// pushes count as non-relevant.
    Strict,
    /// Reproduces the 2016 tool: pushes without an epoch entry are ignored
    /// and over-cap pushes stay in the denominator without earning gain.
    Official2016,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Strict => "strict",
            Mode::Official2016 => "official-2016",
        })
    }
}

impl FromStr for Mode {
    type Err = ModelError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "strict" => Ok(Mode::Strict),
            "official-2016" | "official" => Ok(Mode::Official2016),
            other => Err(ModelError::Config(format!("unknown mode `{other}`"))),
        }
    }
}

/// Silent-day handling of the EG and nCG families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Variant {
    Zero,
    One,
    Proportional,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Zero, Variant::One, Variant::Proportional];

    pub fn suffix(self) -> &'static str {
        match self {
            Variant::Zero => "0",
            Variant::One => "1",
            Variant::Proportional => "p",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl FromStr for Variant {
    type Err = ModelError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "0" => Ok(Variant::Zero),
            "1" => Ok(Variant::One),
            "p" => Ok(Variant::Proportional),
            other => Err(ModelError::Config(format!("unknown variant `{other}`"))),
        }
    }
}

/// GMP trade-off weight, stored in hundredths so it doubles as a stable
/// metric name (`GMP.33`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Alpha(u8);

impl Alpha {
    pub fn from_hundredths(h: u8) -> Result<Self, ModelError> {
        if h == 0 || h >= 100 {
            return Err(ModelError::Config(format!(
                "alpha must lie strictly between 0 and 1, got 0.{h:02}"
            )));
        }
        Ok(Self(h))
    }

    pub fn hundredths(self) -> u8 {
        self.0
    }

    pub fn value(self) -> f64 {
        f64::from(self.0) / 100.0
    }

    pub fn defaults() -> Vec<Alpha> {
        vec![Alpha(33), Alpha(50), Alpha(66)]
    }
}

impl FromStr for Alpha {
    type Err = ModelError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let v: f64 = s
            .trim()
            .parse()
            .map_err(|_| ModelError::Config(format!("bad alpha `{s}`")))?;
        let h = (v * 100.0).round();
        if (v * 100.0 - h).abs() > 1e-9 || !(1.0..=99.0).contains(&h) {
            return Err(ModelError::Config(format!(
                "alpha must be a two-decimal fraction in (0, 1), got `{s}`"
            )));
        }
        Self::from_hundredths(h as u8)
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0.{:02}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalConfig {
    pub windowing: Windowing,
    /// Maximum pushes per profile per window (N).
    pub cap: usize,
    pub alphas: Vec<Alpha>,
    pub mode: Mode,
    pub eg_variants: Vec<Variant>,
    pub ncg_variants: Vec<Variant>,
}

impl EvalConfig {
    /// Defaults: N = 10, alpha in {0.33, 0.50, 0.66}, strict mode, all
    /// silent-day variants reported.
    pub fn new(windowing: Windowing) -> Self {
        Self {
            windowing,
            cap: 10,
            alphas: Alpha::defaults(),
            mode: Mode::Strict,
            eg_variants: Variant::ALL.to_vec(),
            ncg_variants: Variant::ALL.to_vec(),
        }
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        self
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.cap == 0 {
            return Err(ModelError::Config("cap N must be at least 1".into()));
        }
        if self.windowing.window_seconds <= 0 || self.windowing.num_windows == 0 {
            return Err(ModelError::Config("invalid windowing".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tid(s: &str) -> TweetId {
        TweetId::new(s).unwrap()
    }
    fn pid(s: &str) -> ProfileId {
        ProfileId::new(s).unwrap()
    }

    #[test]
    fn window_boundaries_are_half_open() {
        let w = Windowing::new(0, 50, 5).unwrap();
        assert_eq!(w.window_of(0), Some(0));
        assert_eq!(w.window_of(49), Some(0));
        assert_eq!(w.window_of(50), Some(1));
        assert_eq!(w.window_of(249), Some(4));
        assert_eq!(w.window_of(250), None);
        assert_eq!(w.window_of(260), None);
        assert_eq!(w.window_of(-1), None);
    }

    #[test]
    fn windowing_rejects_degenerate_shapes() {
        assert!(Windowing::new(0, 0, 5).is_err());
        assert!(Windowing::new(0, 50, 0).is_err());
    }

    #[test]
    fn tokens_reject_whitespace_and_empty() {
        assert!(TweetId::new("").is_err());
        assert!(TweetId::new("a b").is_err());
        assert!(ProfileId::new("RTS60").is_ok());
    }

    #[test]
    fn alpha_parsing() {
        assert_eq!("0.5".parse::<Alpha>().unwrap().hundredths(), 50);
        assert_eq!("0.33".parse::<Alpha>().unwrap().to_string(), "0.33");
        assert!("1.0".parse::<Alpha>().is_err());
        assert!("0".parse::<Alpha>().is_err());
        assert!("0.335".parse::<Alpha>().is_err());
    }

    #[test]
    fn duplicate_pushes_collapse_to_earliest() {
        let p = |e| PushRecord {
            profile: pid("RTS1"),
            tweet: tid("111"),
            push_epoch: e,
        };
        let (run, dups) = Run::new(RunTag::new("s").unwrap(), vec![p(20), p(10)]);
        assert_eq!(run.len(), 1);
        assert_eq!(run.pushes()[0].push_epoch, 10);
        assert_eq!(dups.len(), 1);
        assert_eq!(dups[0].dropped_epoch, 20);

        let (again, dups2) = Run::new(run.tag.clone(), run.pushes().to_vec());
        assert_eq!(again, run);
        assert!(dups2.is_empty());
    }

    #[test]
    fn push_order_breaks_ties_by_creation_then_id() {
        let mut epochs = EpochMap::new();
        epochs.insert(tid("b"), 5);
        epochs.insert(tid("a"), 7);
        let mk = |t: &str| PushRecord {
            profile: pid("P"),
            tweet: tid(t),
            push_epoch: 10,
        };
        let (a, b, c) = (mk("a"), mk("b"), mk("c"));
        assert!(b.order_key(&epochs) < a.order_key(&epochs));
        // unknown creation sorts after known
        assert!(a.order_key(&epochs) < c.order_key(&epochs));
    }

    #[test]
    fn validation_flags_each_rule() {
        let mut gt = GroundTruth::default();
        gt.qrels.insert(pid("RTS1"), tid("1"), 0);
        gt.clusters
            .insert(pid("RTS1"), tid("1"), ClusterToken::new("C1").unwrap());
        gt.clusters
            .insert(pid("RTS1"), tid("2"), ClusterToken::new("C1").unwrap());
        gt.epochs.insert(tid("1"), 10);
        let rules: Vec<_> = validate_ground_truth(&gt).iter().map(|v| v.rule).collect();
        assert_eq!(
            rules,
            vec![
                ViolationRule::ClusteredButNotRelevant,
                ViolationRule::ClusteredButUnjudged,
                ViolationRule::ClusteredWithoutEpoch,
            ]
        );
    }
}
