//! Knowledge-aware recommender that propagates user preferences over
//! knowledge-graph edges.
//!
//! A user is represented by a *ripple set*: for each hop, a sample of triples
//! whose heads are the entities reached so far, starting from the entities of
//! the clicked articles. For a candidate item with embedding `v`, each hop
//! attends over its triples with weights `softmax(vᵀ R h)`, the weighted tail
//! embeddings form the hop response `o`, and the click probability is
//! `σ(uᵀ v)` with `u` the sum of hop responses.

mod checkpoint;
mod train;

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, KnowledgeGraph, NewsArticle, Vocab};
use crate::error::{Error, Result};
use crate::recommend::{Recommender, UserHistory};
use crate::util::derive_seed;

pub use checkpoint::CHECKPOINT_VERSION;
pub use train::{
    evaluate_loss, objective, train, train_model, write_training_log, EpochLoss, Gradient,
    LossParts, Sample, TrainingSet,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Optimizer {
    Sgd,
    Adam { beta1: f64, beta2: f64, eps: f64 },
}

impl Optimizer {
    pub fn adam() -> Self {
        Optimizer::Adam {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RippleConfig {
    pub hops: usize,
    pub ripple_size: usize,
    pub dim: usize,
    /// Weight of the knowledge-graph term.
    pub kg_weight: f64,
    /// Weight of the squared parameter norm.
    pub l2_weight: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub rng_seed: u64,
    pub optimizer: Optimizer,
}

impl Default for RippleConfig {
    fn default() -> Self {
        RippleConfig {
            hops: 1,
            ripple_size: 16,
            dim: 48,
            kg_weight: 0.03,
            l2_weight: 1e-5,
            learning_rate: 0.02,
            epochs: 30,
            batch_size: 32,
            rng_seed: 0,
            optimizer: Optimizer::Sgd,
        }
    }
}

impl RippleConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.hops == 0 || self.ripple_size == 0 || self.dim == 0 {
            return bad("hops, ripple_size and dim must be positive");
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return bad("epochs and batch_size must be positive");
        }
        if !(self.learning_rate > 0.0) || !(self.kg_weight >= 0.0) || !(self.l2_weight >= 0.0) {
            return bad("learning_rate must be positive, kg_weight and l2_weight nonnegative");
        }
        Ok(())
    }
}

/// Triples of one hop as parallel index lists.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hop {
    pub heads: Vec<u32>,
    pub relations: Vec<u32>,
    pub tails: Vec<u32>,
}

impl Hop {
    pub fn len(&self) -> usize {
        self.heads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heads.is_empty()
    }

    pub fn triples(&self) -> impl Iterator<Item = (u32, u32, u32)> + '_ {
        (0..self.len()).map(|i| (self.heads[i], self.relations[i], self.tails[i]))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RippleSet {
    pub hops: Vec<Hop>,
}

impl RippleSet {
    pub fn is_empty(&self) -> bool {
        self.hops.iter().all(Hop::is_empty)
    }

    pub fn n_triples(&self) -> usize {
        self.hops.iter().map(Hop::len).sum()
    }
}

/// KG indices of an article's entities; unknown entities are skipped.
pub fn resolve_entities(article: &NewsArticle, entities: &Vocab) -> Vec<u32> {
    article
        .entity_ids
        .iter()
        .filter_map(|e| entities.get(e))
        .collect()
}

/// Samples a ripple set for a reading history.
///
/// Hop 1 starts from the distinct KG entities of the history articles; every
/// hop draws `ripple_size` triples uniformly with replacement from the
/// out-edges of the current frontier, and the sampled tails become the next
/// frontier. A frontier without out-edges yields empty lists from then on.
pub fn build_ripple_sets<R: Rng>(
    history: &UserHistory,
    corpus: &Corpus,
    kg: &KnowledgeGraph,
    config: &RippleConfig,
    rng: &mut R,
) -> Result<RippleSet> {
    let mut frontier: Vec<u32> = Vec::new();
    let mut seen = HashSet::new();
    let mut unknown = 0usize;
    for id in &history.article_ids {
        let article = corpus.require(id)?;
        for e in &article.entity_ids {
            match kg.entities().get(e) {
                Some(idx) if seen.insert(idx) => frontier.push(idx),
                Some(_) => {}
                None => unknown += 1,
            }
        }
    }
    if unknown > 0 {
        log::debug!("user {}: {unknown} entities not in the graph", history.user_id);
    }
    let mut hops = Vec::with_capacity(config.hops);
    for _ in 0..config.hops {
        let edges: Vec<(u32, u32, u32)> = frontier
            .iter()
            .flat_map(|&h| kg.out_edges(h).iter().map(move |&(r, t)| (h, r, t)))
            .collect();
        let mut hop = Hop::default();
        if !edges.is_empty() {
            for _ in 0..config.ripple_size {
                let (h, r, t) = edges[rng.random_range(0..edges.len())];
                hop.heads.push(h);
                hop.relations.push(r);
                hop.tails.push(t);
            }
        }
        let mut next_seen = HashSet::new();
        frontier = hop.tails.iter().copied().filter(|t| next_seen.insert(*t)).collect();
        hops.push(hop);
    }
    Ok(RippleSet { hops })
}

/// The per-user RNG stream used for ripple sampling, in training and inference alike.
pub fn ripple_rng(config: &RippleConfig, user_id: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(config.rng_seed, user_id))
}

/// Entity embeddings (`|E| x d`) and one `d x d` matrix per relation.
#[derive(Debug, Clone, PartialEq)]
pub struct RippleModel {
    pub config: RippleConfig,
    entities: Vocab,
    relations: Vocab,
    /// Row-major `|E| x d`.
    entity_emb: Vec<f64>,
    /// `|R|` row-major `d x d` blocks.
    relation_emb: Vec<f64>,
}

impl RippleModel {
    /// All parameters zero: every prediction is exactly 0.5.
    pub fn zeros(kg: &KnowledgeGraph, config: RippleConfig) -> Result<Self> {
        config.validate()?;
        let d = config.dim;
        Ok(RippleModel {
            entity_emb: vec![0.0; kg.entities().len() * d],
            relation_emb: vec![0.0; kg.relations().len() * d * d],
            entities: kg.entities().clone(),
            relations: kg.relations().clone(),
            config,
        })
    }

    /// Entries i.i.d. uniform in `[-0.5/√d, 0.5/√d]`.
    pub fn init<R: Rng>(kg: &KnowledgeGraph, config: RippleConfig, rng: &mut R) -> Result<Self> {
        let mut m = Self::zeros(kg, config)?;
        let bound = 0.5 / (m.config.dim as f64).sqrt();
        for x in m.entity_emb.iter_mut().chain(m.relation_emb.iter_mut()) {
            *x = rng.random_range(-bound..=bound);
        }
        Ok(m)
    }

    pub(crate) fn from_parts(
        config: RippleConfig,
        entities: Vocab,
        relations: Vocab,
        entity_emb: Vec<f64>,
        relation_emb: Vec<f64>,
    ) -> Result<Self> {
        config.validate()?;
        let d = config.dim;
        if entity_emb.len() != entities.len() * d || relation_emb.len() != relations.len() * d * d {
            return Err(Error::DimensionMismatch {
                expected: entities.len() * d + relations.len() * d * d,
                found: entity_emb.len() + relation_emb.len(),
            });
        }
        if entity_emb.iter().chain(&relation_emb).any(|x| !x.is_finite()) {
            return Err(Error::InvalidConfig("non-finite parameter".into()));
        }
        Ok(RippleModel {
            config,
            entities,
            relations,
            entity_emb,
            relation_emb,
        })
    }

    pub fn dim(&self) -> usize {
        self.config.dim
    }

    pub fn entities(&self) -> &Vocab {
        &self.entities
    }

    pub fn relations(&self) -> &Vocab {
        &self.relations
    }

    pub fn entity(&self, idx: u32) -> &[f64] {
        let d = self.dim();
        &self.entity_emb[idx as usize * d..(idx as usize + 1) * d]
    }

    pub fn relation(&self, idx: u32) -> &[f64] {
        let dd = self.dim() * self.dim();
        &self.relation_emb[idx as usize * dd..(idx as usize + 1) * dd]
    }

    pub fn entity_embeddings(&self) -> &[f64] {
        &self.entity_emb
    }

    pub fn relation_embeddings(&self) -> &[f64] {
        &self.relation_emb
    }

    /// Mutable views of (entity, relation) parameters.
    pub fn params_mut(&mut self) -> (&mut [f64], &mut [f64]) {
        (&mut self.entity_emb, &mut self.relation_emb)
    }

    pub fn squared_norm(&self) -> f64 {
        self.entity_emb
            .iter()
            .chain(&self.relation_emb)
            .map(|x| x * x)
            .sum()
    }

    /// Mean of the embeddings of `entities`; zero when empty.
    pub fn mean_entity(&self, entities: &[u32]) -> Vec<f64> {
        let mut v = vec![0.0; self.dim()];
        if entities.is_empty() {
            return v;
        }
        for &e in entities {
            v.iter_mut().zip(self.entity(e)).for_each(|(a, x)| *a += x);
        }
        let n = entities.len() as f64;
        v.iter_mut().for_each(|a| *a /= n);
        v
    }

    /// `R x` for relation `r`.
    pub(crate) fn apply_relation(&self, r: u32, x: &[f64]) -> Vec<f64> {
        let d = self.dim();
        self.relation(r)
            .chunks_exact(d)
            .map(|row| dot(row, x))
            .collect()
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Item embedding: mean entity embedding of the article's KG-resolvable entities.
pub fn item_embedding(article: &NewsArticle, model: &RippleModel) -> Vec<f64> {
    model.mean_entity(&resolve_entities(article, model.entities()))
}

/// Intermediate values of one forward pass, kept for backpropagation.
#[derive(Debug, Clone)]
pub(crate) struct HopForward {
    /// `R_i h_i` per triple.
    pub rh: Vec<Vec<f64>>,
    pub probs: Vec<f64>,
}

#[derive(Debug, Clone)]
pub(crate) struct Forward {
    pub hops: Vec<HopForward>,
    pub user: Vec<f64>,
    pub prob: f64,
}

pub(crate) fn forward(ripple: &RippleSet, item: &[f64], model: &RippleModel) -> Forward {
    let d = model.dim();
    let mut user = vec![0.0; d];
    let mut hops = Vec::with_capacity(ripple.hops.len());
    for hop in &ripple.hops {
        if hop.is_empty() {
            hops.push(HopForward { rh: vec![], probs: vec![] });
            continue;
        }
        let rh: Vec<Vec<f64>> = hop
            .triples()
            .map(|(h, r, _)| model.apply_relation(r, model.entity(h)))
            .collect();
        let logits: Vec<f64> = rh.iter().map(|x| dot(item, x)).collect();
        let probs = softmax(&logits);
        for (p, &t) in probs.iter().zip(&hop.tails) {
            user.iter_mut().zip(model.entity(t)).for_each(|(u, x)| *u += p * x);
        }
        hops.push(HopForward { rh, probs });
    }
    let prob = sigmoid(dot(&user, item));
    Forward { hops, user, prob }
}

pub(crate) fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Click probability of an item with embedding `item` for a user's ripple set.
/// An empty ripple set gives exactly 0.5.
pub fn predict_click(ripple: &RippleSet, item: &[f64], model: &RippleModel) -> f64 {
    forward(ripple, item, model).prob
}

/// Attention weights of each hop for `item`; each hop's weights sum to one.
pub fn attention(ripple: &RippleSet, item: &[f64], model: &RippleModel) -> Vec<Vec<f64>> {
    forward(ripple, item, model)
        .hops
        .into_iter()
        .map(|h| h.probs)
        .collect()
}

/// Adapter that makes a trained model usable wherever a [`Recommender`] is expected.
pub struct RippleRecommender<'a> {
    model: &'a RippleModel,
    corpus: &'a Corpus,
    kg: &'a KnowledgeGraph,
}

impl<'a> RippleRecommender<'a> {
    pub fn new(model: &'a RippleModel, corpus: &'a Corpus, kg: &'a KnowledgeGraph) -> Self {
        RippleRecommender { model, corpus, kg }
    }

    pub fn ripple_set(&self, history: &UserHistory) -> Result<RippleSet> {
        let mut rng = ripple_rng(&self.model.config, &history.user_id);
        build_ripple_sets(history, self.corpus, self.kg, &self.model.config, &mut rng)
    }
}

impl Recommender for RippleRecommender<'_> {
    fn name(&self) -> &str {
        "ripplenet"
    }

    fn raw_scores(&self, history: &UserHistory, candidates: &[&str]) -> Result<Vec<f64>> {
        if history.article_ids.is_empty() {
            return Err(Error::EmptyHistory(history.user_id.clone()));
        }
        let ripple = self.ripple_set(history)?;
        candidates
            .iter()
            .map(|c| {
                let item = item_embedding(self.corpus.require(c)?, self.model);
                Ok(predict_click(&ripple, &item, self.model))
            })
            .collect()
    }

    /// Probabilities are used as click scores without rescaling.
    fn to_click_scores(&self, raw: &[f64]) -> Result<Vec<f64>> {
        Ok(raw.to_vec())
    }
}

/// Top-k by click probability, ties by ascending id.
pub fn recommend_top_k_ripple(
    history: &UserHistory,
    corpus: &Corpus,
    kg: &KnowledgeGraph,
    model: &RippleModel,
    k: usize,
) -> Result<Vec<crate::recommend::Recommendation>> {
    RippleRecommender::new(model, corpus, kg).recommend(history, corpus, k)
}
