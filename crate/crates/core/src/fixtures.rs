//! Small hand-built collections with known scores: the redundancy and
//! silent-day counterexamples, a five-window worked example, a cap-overflow
//! case and an epoch-gap case. All use 50-second windows starting at 0.

use crate::model::{
    ClusterToken, Epoch, EpochMap, EvalConfig, GroundTruth, ProfileId, PushRecord, Run, RunTag, TweetId, Windowing,
};

pub const PROFILE: &str = "RTS1";

#[derive(Debug, Clone)]
pub struct Fixture {
    pub gt: GroundTruth,
    pub runs: Vec<Run>,
    pub windowing: Windowing,
    /// Creation epochs of every tweet in the stream, a superset of
    /// `gt.epochs`.
    pub stream_epochs: EpochMap,
}

impl Fixture {
    pub fn config(&self) -> EvalConfig {
        EvalConfig::new(self.windowing)
    }

    pub fn run(&self, tag: &str) -> &Run {
        self.runs
            .iter()
            .find(|r| r.tag.as_str() == tag)
            .unwrap_or_else(|| panic!("fixture has no run {tag}"))
    }
}

struct Builder {
    profile: ProfileId,
    gt: GroundTruth,
    stream: EpochMap,
    runs: Vec<Run>,
}

impl Builder {
    fn new() -> Self {
        Self {
            profile: ProfileId::new(PROFILE).unwrap(),
            gt: GroundTruth::default(),
            stream: EpochMap::new(),
            runs: Vec::new(),
        }
    }

    fn relevant(mut self, cluster: &str, tweet: &str, created: Epoch) -> Self {
        let t = TweetId::new(tweet).unwrap();
        self.gt.qrels.insert(self.profile.clone(), t.clone(), 2);
        self.gt
            .clusters
            .insert(self.profile.clone(), t.clone(), ClusterToken::new(cluster).unwrap());
        self.gt.epochs.insert(t.clone(), created);
        self.stream.insert(t, created);
        self
    }

    fn non_relevant(mut self, tweet: &str, created: Epoch) -> Self {
        let t = TweetId::new(tweet).unwrap();
        self.gt.qrels.insert(self.profile.clone(), t.clone(), 0);
        self.gt.epochs.insert(t.clone(), created);
        self.stream.insert(t, created);
        self
    }

    /// A tweet nobody judged, known only to the full stream.
    fn unpooled(mut self, tweet: &str, created: Epoch) -> Self {
        self.stream.insert(TweetId::new(tweet).unwrap(), created);
        self
    }

    fn run(mut self, tag: &str, pushes: &[(&str, Epoch)]) -> Self {
        let pushes = pushes
            .iter()
            .map(|(t, e)| PushRecord {
                profile: self.profile.clone(),
                tweet: TweetId::new(*t).unwrap(),
                push_epoch: *e,
            })
            .collect();
        self.runs.push(Run::from_unique(RunTag::new(tag).unwrap(), pushes));
        self
    }

    fn build(self, windows: usize) -> Fixture {
        Fixture {
            gt: self.gt,
            runs: self.runs,
            windowing: Windowing::new(0, 50, windows).unwrap(),
            stream_epochs: self.stream,
        }
    }
}

/// Redundant versus non-relevant: both systems retrieve cluster C1 in the
/// first window; S1 then pushes a redundant C1 tweet (created in window 0,
/// pushed in window 1), S2 a non-relevant tweet created in window 1. C2 keeps
/// window 1 eventful.
pub fn h1() -> Fixture {
    Builder::new()
        .relevant("C1", "tA", 10)
        .relevant("C1", "tB", 20)
        .relevant("C2", "tC", 70)
        .non_relevant("tX", 60)
        .run("sysS1", &[("tA", 12), ("tB", 55)])
        .run("sysS2", &[("tA", 12), ("tX", 70)])
        .build(2)
}

/// Silence: all relevant tweets are created in window 0, so window 1 is
/// silent for everyone. S2 pushes its redundant tweet during window 1, yet
/// the tweet is sent back to window 0 and window 1 stays perfect.
pub fn h2() -> Fixture {
    Builder::new()
        .relevant("C1", "tA", 10)
        .relevant("C1", "tB", 20)
        .run("sysS1", &[("tA", 12)])
        .run("sysS2", &[("tA", 12), ("tB", 60)])
        .build(2)
}

/// Five windows, four clusters. S1 retrieves C1, C2, C3 with latencies
/// 2, 10, 20; S2 retrieves C1, C2, C4 with latencies 65, 40, 10.
pub fn worked_example() -> Fixture {
    Builder::new()
        .relevant("C1", "t1_1", 10)
        .relevant("C1", "t1_2", 20)
        .relevant("C1", "t1_3", 60)
        .relevant("C2", "t2_1", 160)
        .relevant("C2", "t2_2", 170)
        .relevant("C3", "t3_1", 210)
        .relevant("C4", "t4_1", 220)
        .non_relevant("n1", 30)
        .non_relevant("n2", 110)
        .non_relevant("n3", 165)
        .non_relevant("n5", 40)
        .run(
            "S1",
            &[
                ("t1_1", 12),
                ("t1_2", 25),
                ("n1", 35),
                ("t1_3", 65),
                ("n2", 115),
                ("t2_1", 170),
                ("t2_2", 175),
                ("n3", 178),
                ("t3_1", 230),
            ],
        )
        .run("S2", &[("n5", 45), ("t1_3", 75), ("t2_1", 200), ("t4_1", 230)])
        .build(5)
}

/// Twelve relevant tweets of twelve distinct clusters, all created and
/// pushed in window 0: two more than the default cap.
pub fn cap_overflow() -> Fixture {
    let mut b = Builder::new();
    let mut pushes = Vec::new();
    let names: Vec<String> = (0..12).map(|i| format!("r{i:02}")).collect();
    for (i, name) in names.iter().enumerate() {
        b = b.relevant(&format!("K{i:02}"), name, i as Epoch);
        pushes.push((name.as_str(), 20 + i as Epoch));
    }
    b.run("verbose", &pushes).build(1)
}

/// The gapped run pushes an unpooled tweet `u1` on a silent window. `u1`
/// is missing from the ground-truth epochs but present in `stream_epochs`.
pub fn epoch_gap() -> Fixture {
    Builder::new()
        .relevant("C1", "a", 10)
        .non_relevant("b", 30)
        .unpooled("u1", 60)
        .run("gapped", &[("a", 12), ("u1", 65)])
        .run("quiet", &[("a", 15)])
        .build(2)
}

/// A small random collection and configuration for cross-checking: up to 5
/// profiles, 6 windows and 30 pushes per run, with clusters spanning
/// windows, unjudged and unclustered tweets, tweets created outside the
/// period, an unjudged profile, shared tweet ids and tight caps. With
/// `allow_gaps`, some pushed tweets have no creation epoch.
pub fn random_instance(seed: u64, allow_gaps: bool) -> (Fixture, EvalConfig) {
    use rand::seq::{IndexedRandom, SliceRandom};
    use rand::Rng;

    let mut rng = crate::seeding::StreamKey::new(seed).str("random-instance").rng();
    let windows = rng.random_range(1..=6);
    let len = rng.random_range(20..=80);
    let start = 1_000;
    let end = start + len * windows as Epoch;
    let windowing = Windowing::new(start, len, windows).unwrap();
    let mut gt = GroundTruth::default();
    let mut stream = EpochMap::new();
    let mut next_id = 0u32;
    let mut fresh = |rng: &mut rand_chacha::ChaCha8Rng| {
        next_id += 1 + rng.random_range(0..3);
        TweetId::new(format!("{next_id}")).unwrap()
    };
    let created_at = |rng: &mut rand_chacha::ChaCha8Rng| {
        if rng.random_bool(0.1) {
            rng.random_range(start - 60..start)
        } else {
            rng.random_range(start..end)
        }
    };

    let profiles = rng.random_range(1..=5);
    let mut pools: Vec<(ProfileId, Vec<TweetId>)> = Vec::new();
    for i in 0..profiles {
        let profile = ProfileId::new(format!("RTS{}", i + 1)).unwrap();
        let mut pool = Vec::new();
        for c in 0..rng.random_range(0..=4) {
            let token = ClusterToken::new(format!("C{c}")).unwrap();
            for _ in 0..rng.random_range(1..=3) {
                let t = fresh(&mut rng);
                let e = created_at(&mut rng);
                gt.qrels.insert(profile.clone(), t.clone(), rng.random_range(1..=2));
                gt.clusters.insert(profile.clone(), t.clone(), token.clone());
                gt.epochs.insert(t.clone(), e);
                stream.insert(t.clone(), e);
                pool.push(t);
            }
        }
        let judged_extra = rng.random_range(0..=6);
        for k in 0..judged_extra {
            let t = fresh(&mut rng);
            let e = created_at(&mut rng);
            let grade = if k == 0 && rng.random_bool(0.3) { 1 } else { 0 };
            gt.qrels.insert(profile.clone(), t.clone(), grade);
            gt.epochs.insert(t.clone(), e);
            stream.insert(t.clone(), e);
            pool.push(t);
        }
        for _ in 0..rng.random_range(0..=4) {
            let t = fresh(&mut rng);
            let e = created_at(&mut rng);
            stream.insert(t.clone(), e);
            if !allow_gaps || rng.random_bool(0.5) {
                gt.epochs.insert(t.clone(), e);
            }
            pool.push(t);
        }
        pools.push((profile, pool));
    }
    // A tweet judged under two profiles.
    if profiles > 1 {
        if let Some(t) = pools[0].1.first().cloned() {
            gt.qrels.insert(pools[1].0.clone(), t.clone(), 0);
            pools[1].1.push(t);
        }
    }
    // A profile nobody judged.
    if rng.random_bool(0.3) {
        pools.push((ProfileId::new("RTS99").unwrap(), pools[0].1.clone()));
    }

    let mut runs = Vec::new();
    for r in 0..rng.random_range(1..=3) {
        let mut pushes = Vec::new();
        let budget = rng.random_range(0..=30usize);
        for (profile, pool) in &pools {
            let mut pool = pool.clone();
            pool.shuffle(&mut rng);
            let take = rng
                .random_range(0..=pool.len())
                .min(budget.saturating_sub(pushes.len()));
            for t in pool.into_iter().take(take) {
                let base = stream.get(&t).unwrap_or(start);
                let mut push = base + rng.random_range(0..=len * 2);
                if rng.random_bool(0.2) {
                    push -= push % 10;
                    push = push.max(base);
                }
                pushes.push(PushRecord {
                    profile: profile.clone(),
                    tweet: t,
                    push_epoch: push,
                });
            }
        }
        runs.push(Run::from_unique(RunTag::new(format!("run{r}")).unwrap(), pushes));
    }

    let cap = *[1usize, 2, 3, 5, 10].choose(&mut rng).unwrap();
    let mode = if rng.random_bool(0.5) {
        crate::model::Mode::Strict
    } else {
        crate::model::Mode::Official2016
    };
    let cfg = EvalConfig::new(windowing).with_cap(cap).with_mode(mode);
    (
        Fixture {
            gt,
            runs,
            windowing,
            stream_epochs: stream,
        },
        cfg,
    )
}
