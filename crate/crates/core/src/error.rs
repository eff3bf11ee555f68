use thiserror::Error;

use crate::model::{Epoch, ProfileId, TweetId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("invalid {kind} `{token}`: must be non-empty without whitespace")]
    BadToken { kind: &'static str, token: String },
    #[error("invalid configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("{}", missing_epochs_message(.run, .tweets))]
    MissingEpochs {
        run: String,
        tweets: Vec<(ProfileId, TweetId)>,
    },
    #[error("run {run}: {} push(es) precede the tweet's creation epoch, first: {profile} {tweet} pushed at {push_epoch} but created at {created}", .count)]
    PushBeforeCreation {
        run: String,
        count: usize,
        profile: ProfileId,
        tweet: TweetId,
        push_epoch: Epoch,
        created: Epoch,
    },
    #[error("metric {0} is not part of the report")]
    MetricNotComputed(String),
    #[error("n = {n} outside the allowed range 1..={cap}")]
    BadRestriction { n: usize, cap: usize },
    #[error("{0}")]
    Config(#[from] ModelError),
}

fn missing_epochs_message(run: &str, tweets: &[(ProfileId, TweetId)]) -> String {
    let listed: Vec<String> = tweets.iter().map(|(p, t)| format!("{p}:{t}")).collect();
    format!(
        "run {run}: {} pushed tweet(s) have no creation epoch: {}",
        tweets.len(),
        listed.join(" ")
    )
}
