//! Synthetic users following the preview-and-choose study protocol.
//!
//! Each simulated user has a latent bias `β ∈ [-1, 1]` and is assigned one
//! recommender arm. In every round they see `preview_size` articles (uniformly
//! random in round one and for the random arm, the arm's top-ranked unseen
//! articles otherwise) and pick article `a` with probability proportional to
//! `exp(β · score(a) / τ)`, where `score` is the article's sentiment or stance
//! score. The pick joins their history and is never shown again.

pub mod synthetic;

use std::collections::HashSet;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bias::BiasKind;
use crate::corpus::{Corpus, InteractionLog, InteractionRecord, Origin, QuestionId};
use crate::error::{Error, Result};
use crate::recommend::{Recommender, UserHistory};
use crate::util::mix64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arm {
    Tfidf,
    Word2vec,
    Docembed,
    Random,
}

impl Arm {
    pub const ALL: [Arm; 4] = [Arm::Tfidf, Arm::Word2vec, Arm::Docembed, Arm::Random];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum BiasDistribution {
    Uniform { low: f64, high: f64 },
    Constant { value: f64 },
    /// `±magnitude` with a fair coin for the sign.
    Symmetric { magnitude: f64 },
}

impl BiasDistribution {
    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            BiasDistribution::Uniform { low, high } if low < high => rng.random_range(low..high),
            BiasDistribution::Uniform { low, .. } => low,
            BiasDistribution::Constant { value } => value,
            BiasDistribution::Symmetric { magnitude } => {
                if rng.random_bool(0.5) {
                    magnitude
                } else {
                    -magnitude
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            BiasDistribution::Uniform { low, high } => (-1.0..=1.0).contains(&low) && (-1.0..=1.0).contains(&high) && low <= high,
            BiasDistribution::Constant { value } => (-1.0..=1.0).contains(&value),
            BiasDistribution::Symmetric { magnitude } => (0.0..=1.0).contains(&magnitude),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("bias distribution {self:?} leaves [-1, 1]")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub n_users: usize,
    pub latent_bias_kind: BiasKind,
    pub bias_distribution: BiasDistribution,
    pub temperature: f64,
    pub rounds: usize,
    pub preview_size: usize,
    /// Assignment weights per arm.
    pub assignment: Vec<(Arm, f64)>,
    pub rng_seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n_users: 100,
            latent_bias_kind: BiasKind::Stance(QuestionId::default_set().remove(0)),
            bias_distribution: BiasDistribution::Uniform { low: -1.0, high: 1.0 },
            temperature: 0.5,
            rounds: 4,
            preview_size: 6,
            assignment: vec![
                (Arm::Tfidf, 786.0),
                (Arm::Word2vec, 211.0),
                (Arm::Docembed, 209.0),
                (Arm::Random, 211.0),
            ],
            rng_seed: 0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.preview_size < 2 {
            return bad("preview_size must be at least 2".into());
        }
        if self.rounds == 0 {
            return bad("rounds must be at least 1".into());
        }
        if !(self.temperature > 0.0) {
            return bad("temperature must be positive".into());
        }
        if self.assignment.iter().any(|(_, w)| !(*w >= 0.0)) || self.assignment.iter().all(|(_, w)| *w == 0.0) {
            return bad("assignment weights must be nonnegative and not all zero".into());
        }
        self.bias_distribution.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimUser {
    pub user_id: String,
    pub beta: f64,
    pub arm: Arm,
    pub history: Vec<String>,
}

/// The latent bias a simulated user was created with.
pub fn ground_truth_bias(user: &SimUser) -> f64 {
    user.beta
}

#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub log: InteractionLog,
    pub users: Vec<SimUser>,
}

impl Simulation {
    pub fn histories(&self) -> Vec<UserHistory> {
        self.users
            .iter()
            .map(|u| UserHistory::new(u.user_id.clone(), u.history.clone()))
            .collect()
    }

    pub fn users_json(&self) -> String {
        serde_json::to_string_pretty(&self.users).expect("users serialize") + "\n"
    }
}

/// Recommenders available to the simulated arms. The random arm needs none.
#[derive(Default)]
pub struct ArmRecommenders<'a> {
    arms: Vec<(Arm, &'a dyn Recommender)>,
}

impl<'a> ArmRecommenders<'a> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, arm: Arm, recommender: &'a dyn Recommender) -> Self {
        self.arms.push((arm, recommender));
        self
    }

    fn get(&self, arm: Arm) -> Option<&'a dyn Recommender> {
        self.arms.iter().find(|(a, _)| *a == arm).map(|(_, r)| *r)
    }
}

/// Index drawn from `exp(β·score/τ)`-proportional weights.
pub fn choose<R: Rng>(scores: &[f64], beta: f64, temperature: f64, rng: &mut R) -> usize {
    let logits: Vec<f64> = scores.iter().map(|s| beta * s / temperature).collect();
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            return i;
        }
        u -= w;
    }
    weights.len() - 1
}

fn pick_arm<R: Rng>(weights: &[(Arm, f64)], rng: &mut R) -> Arm {
    let total: f64 = weights.iter().map(|(_, w)| w).sum();
    let mut u = rng.random::<f64>() * total;
    for &(arm, w) in weights {
        if u < w {
            return arm;
        }
        u -= w;
    }
    weights.iter().rev().find(|(_, w)| *w > 0.0).map(|(a, _)| *a).unwrap()
}

fn random_preview<R: Rng>(pool: &[&str], size: usize, rng: &mut R) -> Vec<String> {
    sample(rng, pool.len(), size)
        .into_iter()
        .map(|i| pool[i].to_string())
        .collect()
}

fn simulate_user(
    index: usize,
    corpus: &Corpus,
    recommenders: &ArmRecommenders<'_>,
    config: &SimConfig,
) -> Result<(SimUser, Vec<InteractionRecord>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(mix64(config.rng_seed ^ mix64(index as u64 + 1)));
    let user_id = format!("u{index:05}");
    let beta = config.bias_distribution.sample(&mut rng);
    let arm = pick_arm(&config.assignment, &mut rng);
    let mut history = UserHistory::new(user_id.clone(), vec![]);
    let mut seen: HashSet<String> = HashSet::new();
    let mut records = Vec::with_capacity(config.rounds * config.preview_size);
    for round in 0..config.rounds {
        let preview: Vec<String> = if round == 0 || arm == Arm::Random {
            let pool: Vec<&str> = corpus.ids().filter(|id| !seen.contains(*id)).collect();
            random_preview(&pool, config.preview_size, &mut rng)
        } else {
            let rec = recommenders.get(arm).ok_or_else(|| {
                Error::InvalidConfig(format!("no recommender supplied for arm {arm:?}"))
            })?;
            rec.recommend(&history, corpus, config.preview_size)?
                .into_iter()
                .map(|r| r.article_id)
                .collect()
        };
        let scores = preview
            .iter()
            .map(|id| config.latent_bias_kind.article_score(corpus.require(id)?))
            .collect::<Result<Vec<f64>>>()?;
        let pick = choose(&scores, beta, config.temperature, &mut rng);
        for (i, id) in preview.iter().enumerate() {
            let chosen = i == pick;
            let origin = match (arm, chosen) {
                (Arm::Random, _) => Origin::Synthetic,
                (_, true) => Origin::Chosen,
                (_, false) => Origin::NegativePreview,
            };
            records.push(InteractionRecord {
                user_id: user_id.clone(),
                article_id: id.clone(),
                label: chosen,
                origin,
                split: None,
            });
        }
        seen.insert(preview[pick].clone());
        history.article_ids.push(preview[pick].clone());
    }
    Ok((
        SimUser {
            user_id,
            beta,
            arm,
            history: history.article_ids,
        },
        records,
    ))
}

/// Runs the protocol for `config.n_users` users. Users are independent and
/// simulated in parallel, each from its own seeded stream.
pub fn simulate(corpus: &Corpus, recommenders: &ArmRecommenders<'_>, config: &SimConfig) -> Result<Simulation> {
    config.validate()?;
    let needed = config.preview_size + config.rounds - 1;
    if corpus.len() < needed {
        return Err(Error::CorpusTooSmall {
            needed,
            available: corpus.len(),
        });
    }
    for &(arm, w) in &config.assignment {
        if w > 0.0 && arm != Arm::Random && recommenders.get(arm).is_none() {
            return Err(Error::InvalidConfig(format!("no recommender supplied for arm {arm:?}")));
        }
    }
    let per_user: Vec<(SimUser, Vec<InteractionRecord>)> = (0..config.n_users)
        .into_par_iter()
        .map(|i| simulate_user(i, corpus, recommenders, config))
        .collect::<Result<_>>()?;
    let mut users = Vec::with_capacity(per_user.len());
    let mut records = Vec::with_capacity(per_user.len() * config.rounds * config.preview_size);
    for (u, r) in per_user {
        users.push(u);
        records.extend(r);
    }
    Ok(Simulation {
        log: InteractionLog::new(records),
        users,
    })
}
