//! Seeded synthetic collections: ground truth with clustered relevant
//! tweets and background noise, plus runs from parameterised systems.
//!
//! Every entity draws from its own stream (see [`StreamKey`]), so adding a
//! profile or a system leaves earlier draws untouched. Tweet ids are random
//! integers and carry no meaning.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::index;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::metrics::enforce_cap;
use crate::model::{
    ClusterToken, Epoch, EvalConfig, GroundTruth, Mode, ProfileId, PushRecord, Run, RunTag, TweetId, Windowing,
};
use crate::seeding::StreamKey;

/// Inclusive integer range sampled uniformly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span<T> {
    pub min: T,
    pub max: T,
}

impl<T: Copy> Span<T> {
    pub fn new(min: T, max: T) -> Self {
        Self { min, max }
    }

    pub fn fixed(v: T) -> Self {
        Self { min: v, max: v }
    }
}

impl Span<usize> {
    fn sample(&self, rng: &mut ChaCha8Rng) -> usize {
        rng.random_range(self.min..=self.max)
    }
}

impl Span<i64> {
    fn sample(&self, rng: &mut ChaCha8Rng) -> i64 {
        rng.random_range(self.min..=self.max)
    }
}

fn check_rate(name: &str, r: f64) -> Result<(), ModelError> {
    if (0.0..=1.0).contains(&r) {
        Ok(())
    } else {
        Err(ModelError::Config(format!("{name} must lie in [0, 1], got {r}")))
    }
}

fn check_span<T: PartialOrd + std::fmt::Display>(name: &str, s: &Span<T>) -> Result<(), ModelError> {
    if s.min <= s.max {
        Ok(())
    } else {
        Err(ModelError::Config(format!(
            "{name}: min {} exceeds max {}",
            s.min, s.max
        )))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub seed: u64,
    pub profiles: usize,
    pub windows: usize,
    pub start_epoch: Epoch,
    pub window_seconds: i64,
    pub clusters_per_profile: Span<usize>,
    pub tweets_per_cluster: Span<usize>,
    /// Share of (profile, window) pairs with no relevant tweet.
    pub silent_rate: f64,
    /// Judged non-relevant tweets created per (profile, window).
    pub background_per_window: Span<usize>,
}

impl SynthSpec {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            profiles: 10,
            windows: 10,
            start_epoch: 1_501_286_400,
            window_seconds: 86_400,
            clusters_per_profile: Span::new(8, 20),
            tweets_per_cluster: Span::new(1, 4),
            silent_rate: 0.3,
            background_per_window: Span::new(5, 15),
        }
    }

    pub fn windowing(&self) -> Result<Windowing, ModelError> {
        Windowing::new(self.start_epoch, self.window_seconds, self.windows)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        self.windowing()?;
        check_rate("silent_rate", self.silent_rate)?;
        check_span("clusters_per_profile", &self.clusters_per_profile)?;
        check_span("tweets_per_cluster", &self.tweets_per_cluster)?;
        check_span("background_per_window", &self.background_per_window)?;
        if self.tweets_per_cluster.min == 0 {
            return Err(ModelError::Config("tweets_per_cluster.min must be at least 1".into()));
        }
        if self.start_epoch < 0 {
            return Err(ModelError::Config("start_epoch must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub seed: u64,
    /// Probability that a push on an eventful window is a relevant tweet.
    pub precision: f64,
    /// Pushes per (profile, window), clipped to the cap.
    pub verbosity: Span<usize>,
    /// Seconds between creation and push.
    pub latency: Span<i64>,
    /// Probability of staying quiet on a window with nothing relevant.
    pub silence_respect: f64,
}

impl SystemSpec {
    pub fn validate(&self) -> Result<(), ModelError> {
        check_rate("precision", self.precision)?;
        check_rate("silence_respect", self.silence_respect)?;
        check_span("verbosity", &self.verbosity)?;
        check_span("latency", &self.latency)?;
        if self.latency.min < 0 {
            return Err(ModelError::Config("latency must be non-negative".into()));
        }
        Ok(())
    }
}

fn fresh_id(rng: &mut ChaCha8Rng, used: &mut BTreeSet<u64>) -> TweetId {
    loop {
        let id = rng.random_range(100_000_000_000_000_000u64..1_000_000_000_000_000_000);
        if used.insert(id) {
            return TweetId::new(id.to_string()).expect("digits form a valid token");
        }
    }
}

pub fn profile_name(i: usize) -> ProfileId {
    ProfileId::new(format!("SP{:03}", i + 1)).expect("valid token")
}

pub fn gen_ground_truth(spec: &SynthSpec) -> Result<GroundTruth, ModelError> {
    spec.validate()?;
    let w = spec.windowing()?;
    let mut gt = GroundTruth::default();
    let mut used = BTreeSet::new();
    for i in 0..spec.profiles {
        let profile = profile_name(i);
        let key = StreamKey::new(spec.seed).str("profile").u64(i as u64);

        let mut rng = key.str("silence").rng();
        let exact = spec.silent_rate * spec.windows as f64;
        let mut silent_count = exact.floor() as usize;
        if rng.random::<f64>() < exact - exact.floor() {
            silent_count += 1;
        }
        let silent: BTreeSet<usize> = index::sample(&mut rng, spec.windows, silent_count.min(spec.windows))
            .into_iter()
            .collect();
        let eventful: Vec<usize> = (0..spec.windows).filter(|j| !silent.contains(j)).collect();

        let mut rng = key.str("clusters").rng();
        let k = if eventful.is_empty() {
            0
        } else {
            spec.clusters_per_profile.sample(&mut rng)
        };
        for c in 0..k {
            let j = if c < eventful.len() {
                eventful[c]
            } else {
                eventful[rng.random_range(0..eventful.len())]
            };
            let (ws, we) = (w.window_start(j), w.window_start(j) + w.window_seconds);
            let token = ClusterToken::new(format!("C{:03}", c + 1)).expect("valid token");
            let first = rng.random_range(ws..we);
            for m in 0..spec.tweets_per_cluster.sample(&mut rng) {
                let created = if m == 0 { first } else { rng.random_range(first..we) };
                let t = fresh_id(&mut rng, &mut used);
                gt.qrels.insert(profile.clone(), t.clone(), rng.random_range(1..=2));
                gt.clusters.insert(profile.clone(), t.clone(), token.clone());
                gt.epochs.insert(t, created);
            }
        }

        let mut rng = key.str("background").rng();
        for j in 0..spec.windows {
            let ws = w.window_start(j);
            for _ in 0..spec.background_per_window.sample(&mut rng) {
                let t = fresh_id(&mut rng, &mut used);
                gt.qrels.insert(profile.clone(), t.clone(), 0);
                gt.epochs.insert(t, rng.random_range(ws..ws + w.window_seconds));
            }
        }
    }
    Ok(gt)
}

/// Judged tweets of one profile split by creation window.
#[derive(Default)]
struct Pools {
    relevant: BTreeMap<usize, Vec<TweetId>>,
    background: BTreeMap<usize, Vec<TweetId>>,
}

fn pools(gt: &GroundTruth, w: &Windowing) -> BTreeMap<ProfileId, Pools> {
    let mut out: BTreeMap<ProfileId, Pools> = BTreeMap::new();
    for ((p, t), grade) in &gt.qrels.grades {
        let Some(j) = gt.epochs.get(t).and_then(|e| w.window_of(e)) else {
            continue;
        };
        let pool = out.entry(p.clone()).or_default();
        let target = if *grade > 0 && gt.cluster_of(p, t).is_some() {
            &mut pool.relevant
        } else if *grade == 0 {
            &mut pool.background
        } else {
            continue;
        };
        target.entry(j).or_default().push(t.clone());
    }
    out
}

fn take_random(rng: &mut ChaCha8Rng, pool: &mut Vec<TweetId>) -> Option<TweetId> {
    if pool.is_empty() {
        None
    } else {
        let i = rng.random_range(0..pool.len());
        Some(pool.swap_remove(i))
    }
}

/// Simulates one system against a generated collection. The result is
/// truncated to the cap per (profile, push day).
pub fn gen_run(gt: &GroundTruth, sys: &SystemSpec, cfg: &EvalConfig, tag: RunTag) -> Result<Run, ModelError> {
    sys.validate()?;
    cfg.validate()?;
    let w = cfg.windowing;
    let mut pushes = Vec::new();
    for (profile, pool) in pools(gt, &w) {
        for j in 0..w.num_windows {
            let mut rng = StreamKey::new(sys.seed).str(profile.as_str()).u64(j as u64).rng();
            let mut relevant = pool.relevant.get(&j).cloned().unwrap_or_default();
            let mut background = pool.background.get(&j).cloned().unwrap_or_default();
            let k = sys.verbosity.sample(&mut rng).min(cfg.cap);
            let mut picked = Vec::new();
            if relevant.is_empty() {
                if rng.random::<f64>() >= sys.silence_respect {
                    picked.extend((0..k).map_while(|_| take_random(&mut rng, &mut background)));
                }
            } else {
                for _ in 0..k {
                    let want_relevant = rng.random::<f64>() < sys.precision;
                    let t = if want_relevant {
                        take_random(&mut rng, &mut relevant).or_else(|| take_random(&mut rng, &mut background))
                    } else {
                        take_random(&mut rng, &mut background).or_else(|| take_random(&mut rng, &mut relevant))
                    };
                    match t {
                        Some(t) => picked.push(t),
                        None => break,
                    }
                }
            }
            for t in picked {
                let created = gt.epochs.get(&t).expect("pooled tweets have epochs");
                pushes.push(PushRecord {
                    profile: profile.clone(),
                    tweet: t,
                    push_epoch: created + sys.latency.sample(&mut rng),
                });
            }
        }
    }
    let (run, _) = Run::new(tag, pushes);
    let strict = cfg.clone().with_mode(Mode::Strict);
    Ok(enforce_cap(&run, &gt.epochs, &strict).0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedSystem {
    pub tag: RunTag,
    pub spec: SystemSpec,
}

/// A varied population of systems: precision, verbosity, latency and
/// silence-respect all drawn per system.
pub fn system_population(seed: u64, count: usize, cap: usize, window_seconds: i64) -> Vec<NamedSystem> {
    (0..count)
        .map(|i| {
            let mut rng = StreamKey::new(seed).str("system").u64(i as u64).rng();
            let max_push = rng.random_range(1..=cap.max(1));
            let max_latency = rng.random_range(0..=(window_seconds / 4).max(0));
            NamedSystem {
                tag: RunTag::new(format!("sys{:02}", i + 1)).expect("valid token"),
                spec: SystemSpec {
                    seed: rng.random(),
                    precision: rng.random_range(0.1..0.95),
                    verbosity: Span::new(rng.random_range(0..=max_push.min(2)).min(max_push), max_push),
                    latency: Span::new(0, max_latency),
                    silence_respect: rng.random_range(0.0..=1.0),
                },
            }
        })
        .collect()
}

/// Everything `gen-synth` writes: the spec, the systems and the cap used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub spec: SynthSpec,
    pub cap: usize,
    pub systems: Vec<NamedSystem>,
}

#[derive(Debug, Clone)]
pub struct Corpus {
    pub gt: GroundTruth,
    pub runs: Vec<Run>,
    pub config: EvalConfig,
    pub manifest: Manifest,
}

pub fn gen_corpus(spec: &SynthSpec, systems: Vec<NamedSystem>, cap: usize) -> Result<Corpus, ModelError> {
    let gt = gen_ground_truth(spec)?;
    let config = EvalConfig::new(spec.windowing()?).with_cap(cap);
    let runs = systems
        .iter()
        .map(|s| gen_run(&gt, &s.spec, &config, s.tag.clone()))
        .collect::<Result<_, _>>()?;
    Ok(Corpus {
        gt,
        runs,
        config,
        manifest: Manifest {
            spec: spec.clone(),
            cap,
            systems,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_ground_truth;

    fn small() -> SynthSpec {
        SynthSpec {
            profiles: 3,
            windows: 4,
            ..SynthSpec::new(11)
        }
    }

    #[test]
    fn deterministic_and_valid() {
        let a = gen_ground_truth(&small()).unwrap();
        assert_eq!(a, gen_ground_truth(&small()).unwrap());
        assert!(validate_ground_truth(&a).is_empty());
        assert_ne!(a, gen_ground_truth(&SynthSpec { seed: 12, ..small() }).unwrap());
    }

    #[test]
    fn adding_profiles_keeps_earlier_ones() {
        let a = gen_ground_truth(&small()).unwrap();
        let b = gen_ground_truth(&SynthSpec { profiles: 4, ..small() }).unwrap();
        for (k, g) in &a.qrels.grades {
            assert_eq!(b.qrels.grades.get(k), Some(g));
        }
    }

    #[test]
    fn no_clusters_means_background_only() {
        let spec = SynthSpec {
            clusters_per_profile: Span::fixed(0),
            ..small()
        };
        let gt = gen_ground_truth(&spec).unwrap();
        assert!(gt.clusters.is_empty());
        assert!(gt.qrels.grades.values().all(|g| *g == 0));
    }

    #[test]
    fn quiet_system_pushes_nothing() {
        let gt = gen_ground_truth(&small()).unwrap();
        let cfg = EvalConfig::new(small().windowing().unwrap());
        let sys = SystemSpec {
            seed: 1,
            precision: 0.5,
            verbosity: Span::fixed(0),
            latency: Span::fixed(0),
            silence_respect: 0.0,
        };
        assert!(gen_run(&gt, &sys, &cfg, "q".parse().unwrap()).unwrap().is_empty());
    }

    #[test]
    fn rejects_bad_rates() {
        assert!(SynthSpec {
            silent_rate: 1.5,
            ..small()
        }
        .validate()
        .is_err());
        assert!(SynthSpec {
            tweets_per_cluster: Span::new(3, 2),
            ..small()
        }
        .validate()
        .is_err());
    }
}
