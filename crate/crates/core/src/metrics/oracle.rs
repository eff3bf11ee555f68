//! Reference scorer used to cross-check the engine.
//!
//! Recomputes every cell from the raw run and ground truth with nested
//! scans: cap position, cluster-first status and Z are re-derived from
//! scratch for each push and each window. Quadratic or worse; keep inputs
//! to about a thousand pushes. Shares no code with the engine beyond the
//! model types.

use std::collections::BTreeMap;

use crate::error::EvalError;
use crate::model::{EvalConfig, GroundTruth, Mode, PushRecord, Run};
use crate::report::{CellRow, MetricKey, ProfileLatency, RunAggregate, ScoreReport};

fn precedes(a: &PushRecord, b: &PushRecord, gt: &GroundTruth) -> bool {
    a.order_key(&gt.epochs) < b.order_key(&gt.epochs)
}

/// How many pushes of the same (profile, push window) come before `p`.
fn cap_position(p: &PushRecord, all: &[PushRecord], gt: &GroundTruth, cfg: &EvalConfig) -> usize {
    let day = (p.push_epoch - cfg.windowing.start_epoch).div_euclid(cfg.windowing.window_seconds);
    all.iter()
        .filter(|q| {
            q.profile == p.profile
                && (q.push_epoch - cfg.windowing.start_epoch).div_euclid(cfg.windowing.window_seconds) == day
                && precedes(q, p, gt)
        })
        .count()
}

struct Entry<'a> {
    push: &'a PushRecord,
    creation_window: usize,
    over_cap: bool,
}

pub fn oracle_eval(run: &Run, gt: &GroundTruth, cfg: &EvalConfig) -> Result<ScoreReport, EvalError> {
    cfg.validate()?;
    let all = run.pushes();
    let judged: Vec<_> = gt.judged_profiles().into_iter().collect();

    // Which pushes survive, and with what creation window.
    let mut entries: Vec<Entry> = Vec::new();
    let mut missing = Vec::new();
    let mut early = Vec::new();
    for p in all {
        let over = cap_position(p, all, gt, cfg) >= cfg.cap;
        if over && cfg.mode == Mode::Strict {
            continue;
        }
        if !judged.contains(&p.profile) {
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
        let Some(w) = cfg.windowing.window_of(created) else {
            continue;
        };
        entries.push(Entry {
            push: p,
            creation_window: w,
            over_cap: over,
        });
    }
    if !missing.is_empty() {
        missing.sort();
        return Err(EvalError::MissingEpochs {
            run: run.tag.to_string(),
            tweets: missing,
        });
    }
    if !early.is_empty() {
        early.sort_by(|(a, _), (b, _)| (&a.profile, a.push_epoch, &a.tweet).cmp(&(&b.profile, b.push_epoch, &b.tweet)));
        let (p, created) = early[0];
        return Err(EvalError::PushBeforeCreation {
            run: run.tag.to_string(),
            count: early.len(),
            profile: p.profile.clone(),
            tweet: p.tweet.clone(),
            push_epoch: p.push_epoch,
            created,
        });
    }

    // Is entry `e` the first gain-eligible push of its cluster?
    let is_first_of_cluster = |e: &Entry| -> bool {
        if e.over_cap {
            return false;
        }
        let Some(c) = gt.cluster_of(&e.push.profile, &e.push.tweet) else {
            return false;
        };
        !entries.iter().any(|o| {
            !o.over_cap
                && o.push.profile == e.push.profile
                && gt.cluster_of(&o.push.profile, &o.push.tweet) == Some(c)
                && precedes(o.push, e.push, gt)
        })
    };

    let tag = run.tag.to_string();
    let cap = cfg.cap as f64;
    let mut cells = Vec::new();
    let mut profiles = Vec::new();
    for profile in &judged {
        for j in 0..cfg.windowing.num_windows {
            let counted: Vec<&Entry> = entries
                .iter()
                .filter(|e| &e.push.profile == profile && e.creation_window == j)
                .collect();
            let new_here = counted.iter().filter(|e| is_first_of_cluster(e)).count();

            // Scan every cluster of the profile for Z.
            let mut z = 0usize;
            let mut seen = Vec::new();
            for ((p, _), c) in &gt.clusters.assignments {
                if p != profile || seen.contains(&c) {
                    continue;
                }
                seen.push(c);
                let members: Vec<_> = gt
                    .clusters
                    .assignments
                    .iter()
                    .filter(|((p2, _), c2)| p2 == profile && *c2 == c)
                    .map(|((_, t), _)| t)
                    .collect();
                let present = members
                    .iter()
                    .any(|t| gt.epochs.get(t).and_then(|e| cfg.windowing.window_of(e)) == Some(j));
                let retrieved_before = entries.iter().any(|e| {
                    &e.push.profile == profile
                        && e.creation_window < j
                        && gt.cluster_of(profile, &e.push.tweet) == Some(c)
                        && is_first_of_cluster(e)
                });
                if present && !retrieved_before {
                    z += 1;
                }
            }
            if z > cfg.cap {
                z = cfg.cap;
            }
            let b = counted.len();
            let g = if new_here > z { z } else { new_here };
            let pain = b - g;
            let silent = z == 0;

            let on_silent = |variant: u8| -> f64 {
                match variant {
                    0 => 0.0,
                    1 => (b == 0) as u8 as f64,
                    _ => {
                        let v = (cap - b as f64) / cap;
                        if v < 0.0 {
                            0.0
                        } else {
                            v
                        }
                    }
                }
            };
            let eg = |variant: u8| {
                if silent {
                    on_silent(variant)
                } else if b == 0 {
                    0.0
                } else {
                    g as f64 / b as f64
                }
            };
            let ncg = |variant: u8| {
                if silent {
                    on_silent(variant)
                } else {
                    g as f64 / z as f64
                }
            };
            cells.push(CellRow {
                run: tag.clone(),
                profile: profile.to_string(),
                window: j,
                pushed: b,
                gain: g,
                z,
                pain,
                silent,
                eg_0: eg(0),
                eg_1: eg(1),
                eg_p: eg(2),
                ncg_0: ncg(0),
                ncg_1: ncg(1),
                ncg_p: ncg(2),
                gmp: cfg
                    .alphas
                    .iter()
                    .map(|a| a.value() * g as f64 - (1.0 - a.value()) * pain as f64)
                    .collect(),
            });
        }

        let mut sum = 0i64;
        let mut n = 0usize;
        for e in entries.iter().filter(|e| &e.push.profile == profile) {
            if !is_first_of_cluster(e) {
                continue;
            }
            let c = gt.cluster_of(profile, &e.push.tweet).unwrap();
            let first = gt
                .clusters
                .assignments
                .iter()
                .filter(|((p2, _), c2)| p2 == profile && *c2 == c)
                .filter_map(|((_, t), _)| gt.epochs.get(t))
                .min();
            if let Some(first) = first {
                sum += e.push.push_epoch - first;
                n += 1;
            }
        }
        profiles.push(ProfileLatency {
            run: tag.clone(),
            profile: profile.to_string(),
            latency_sum: sum,
            clusters_retrieved: n,
            no_retrieval: n == 0,
        });
    }

    let total = cells.len() as f64;
    let avg = |f: &dyn Fn(&CellRow) -> f64| {
        if cells.is_empty() {
            0.0
        } else {
            let mut s = 0.0;
            for c in &cells {
                s += f(c);
            }
            s / total
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
    let mut lat: Vec<f64> = profiles.iter().map(|p| p.latency_sum as f64).collect();
    let lat_mean = if lat.is_empty() {
        0.0
    } else {
        let mut s = 0.0;
        for x in &lat {
            s += x;
        }
        s / lat.len() as f64
    };
    lat.sort_by(f64::total_cmp);
    let lat_median = match lat.len() {
        0 => 0.0,
        n if n % 2 == 1 => lat[n / 2],
        n => (lat[n / 2 - 1] + lat[n / 2]) / 2.0,
    };
    metrics.insert(MetricKey::LatencyMean, lat_mean);
    metrics.insert(MetricKey::LatencyMedian, lat_median);

    Ok(ScoreReport {
        alphas: cfg.alphas.clone(),
        cells,
        profiles,
        aggregates: vec![RunAggregate { run: tag, metrics }],
        warnings: Vec::new(),
    })
}
