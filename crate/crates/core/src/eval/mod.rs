//! Train/test splitting and click-through-rate evaluation.

mod metrics;

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{InteractionLog, InteractionRecord, Origin, Split};
use crate::error::{Error, Result};
use crate::recommend::{Recommender, UserHistory};

pub use metrics::{accuracy, auc, f1};

/// Scores at or above this count as a predicted click.
pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitConfig {
    pub train_fraction: f64,
    pub rng_seed: u64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            train_fraction: 0.8,
            rng_seed: 0,
        }
    }
}

/// Record-level random split. The first `round(n · train_fraction)` records of
/// a seeded shuffle go to training; held-out records from random previews
/// (origin `synthetic`) form the random test set.
pub fn split_interactions(log: &InteractionLog, config: SplitConfig) -> Result<InteractionLog> {
    if log.is_empty() {
        return Err(Error::EmptyLog);
    }
    if !(config.train_fraction > 0.0 && config.train_fraction < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "train_fraction {} not in (0, 1)",
            config.train_fraction
        )));
    }
    let n = log.len();
    let n_train = (n as f64 * config.train_fraction).round() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(config.rng_seed));
    let mut records = log.records.clone();
    for (pos, &i) in order.iter().enumerate() {
        let r = &mut records[i];
        r.split = Some(if pos < n_train {
            Split::Train
        } else if r.origin == Origin::Synthetic {
            Split::RandomTest
        } else {
            Split::Test
        });
    }
    let out = InteractionLog::new(records);
    if out.random_test().next().is_none() {
        log::warn!("random test set is empty: no held-out records come from random previews");
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestSet {
    Complete,
    Random,
}

impl TestSet {
    pub fn records(self, log: &InteractionLog) -> Vec<&InteractionRecord> {
        match self {
            TestSet::Complete => log.complete_test().collect(),
            TestSet::Random => log.random_test().collect(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TestSet::Complete => "complete",
            TestSet::Random => "random",
        }
    }
}

impl std::str::FromStr for TestSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "complete" => Ok(TestSet::Complete),
            "random" => Ok(TestSet::Random),
            other => Err(Error::InvalidConfig(format!("unknown test set {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub model_name: String,
    pub test_set: TestSet,
    pub acc: f64,
    /// `None` when the scored records contain a single class.
    pub auc: Option<f64>,
    pub f1: f64,
    pub n_records: usize,
    pub n_users: usize,
    /// Test users skipped because they have no training history.
    pub cold_users: usize,
}

/// Reading histories built from positive train records, in log order.
pub fn train_histories(log: &InteractionLog) -> BTreeMap<String, UserHistory> {
    let mut out: BTreeMap<String, UserHistory> = BTreeMap::new();
    for r in log.train().filter(|r| r.label) {
        out.entry(r.user_id.clone())
            .or_insert_with(|| UserHistory::new(r.user_id.clone(), vec![]))
            .article_ids
            .push(r.article_id.clone());
    }
    out
}

/// Fails if a clicked test article is part of the same user's profile.
pub fn check_leakage(histories: &BTreeMap<String, UserHistory>, test: &[&InteractionRecord]) -> Result<()> {
    let profile: HashSet<(&str, &str)> = histories
        .values()
        .flat_map(|h| h.article_ids.iter().map(move |a| (h.user_id.as_str(), a.as_str())))
        .collect();
    for r in test.iter().filter(|r| r.label) {
        if profile.contains(&(r.user_id.as_str(), r.article_id.as_str())) {
            return Err(Error::Leakage {
                user_id: r.user_id.clone(),
                article_id: r.article_id.clone(),
            });
        }
    }
    Ok(())
}

/// Scores every (user, article) pair of a test set against the user's train
/// history and computes ACC, AUC and F1.
pub fn evaluate(recommender: &dyn Recommender, log: &InteractionLog, test_set: TestSet) -> Result<EvalResult> {
    let histories = train_histories(log);
    evaluate_with_histories(recommender, &histories, &test_set.records(log), test_set)
}

pub fn evaluate_with_histories(
    recommender: &dyn Recommender,
    histories: &BTreeMap<String, UserHistory>,
    test: &[&InteractionRecord],
    test_set: TestSet,
) -> Result<EvalResult> {
    check_leakage(histories, test)?;
    let mut by_user: BTreeMap<&str, Vec<&InteractionRecord>> = BTreeMap::new();
    for r in test {
        by_user.entry(r.user_id.as_str()).or_default().push(r);
    }
    let cold_users = by_user.keys().filter(|u| !histories.contains_key(**u)).count();
    if cold_users > 0 {
        log::info!("{}: skipping {cold_users} cold-start users", recommender.name());
    }
    let warm: Vec<(&UserHistory, &Vec<&InteractionRecord>)> = by_user
        .iter()
        .filter_map(|(u, recs)| histories.get(*u).map(|h| (h, recs)))
        .collect();
    let scored: Vec<Vec<(f64, bool)>> = warm
        .par_iter()
        .map(|(h, recs)| {
            let candidates: Vec<&str> = recs.iter().map(|r| r.article_id.as_str()).collect();
            let scores = recommender.click_scores(h, &candidates)?;
            Ok(scores.into_iter().zip(recs.iter().map(|r| r.label)).collect())
        })
        .collect::<Result<_>>()?;
    let (scores, labels): (Vec<f64>, Vec<bool>) = scored.into_iter().flatten().unzip();
    if scores.is_empty() {
        return Err(Error::EmptyInput);
    }
    let auc = match auc(&scores, &labels) {
        Ok(v) => Some(v),
        Err(Error::SingleClass) => None,
        Err(e) => return Err(e),
    };
    Ok(EvalResult {
        model_name: recommender.name().to_string(),
        test_set,
        acc: accuracy(&scores, &labels, DEFAULT_THRESHOLD)?,
        auc,
        f1: f1(&scores, &labels, DEFAULT_THRESHOLD)?,
        n_records: scores.len(),
        n_users: warm.len(),
        cold_users,
    })
}

/// One row per (model, test set).
pub fn render_results_markdown(results: &[EvalResult]) -> String {
    let mut md = String::from("| model | test set | ACC | AUC | F1 | records |\n|---|---|---:|---:|---:|---:|\n");
    for r in results {
        let auc = r.auc.map_or("n/a".to_string(), |a| format!("{a:.4}"));
        let _ = writeln!(
            md,
            "| {} | {} | {:.4} | {} | {:.4} | {} |",
            r.model_name,
            r.test_set.as_str(),
            r.acc,
            auc,
            r.f1,
            r.n_records
        );
    }
    md
}
