use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    build_ripple_sets, dot, forward, resolve_entities, ripple_rng, sigmoid, Optimizer,
    RippleConfig, RippleModel, RippleSet,
};
use crate::corpus::{Corpus, InteractionLog, KnowledgeGraph};
use crate::error::{Error, Result};
use crate::recommend::UserHistory;
use crate::util::derive_seed;

/// One labelled (user, item) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    /// Index into [`TrainingSet::ripple_sets`].
    pub user: usize,
    pub item_entities: Vec<u32>,
    pub label: bool,
}

/// Training samples with each user's ripple set precomputed.
#[derive(Debug, Clone)]
pub struct TrainingSet {
    pub user_ids: Vec<String>,
    pub ripple_sets: Vec<RippleSet>,
    pub samples: Vec<Sample>,
}

impl TrainingSet {
    /// Uses the train split only. A user's history is their positive train
    /// records; every train record becomes a sample.
    pub fn build(log: &InteractionLog, corpus: &Corpus, kg: &KnowledgeGraph, config: &RippleConfig) -> Result<Self> {
        let train: Vec<_> = log.train().collect();
        if train.is_empty() {
            return Err(Error::EmptyLog);
        }
        if !train.iter().any(|r| !r.label) {
            return Err(Error::NoNegatives);
        }
        if !train.iter().any(|r| r.label) {
            return Err(Error::NoPositives);
        }
        let mut histories: BTreeMap<&str, Vec<String>> = BTreeMap::new();
        for r in &train {
            let h = histories.entry(r.user_id.as_str()).or_default();
            if r.label {
                h.push(r.article_id.clone());
            }
        }
        let mut user_ids = Vec::with_capacity(histories.len());
        let mut ripple_sets = Vec::with_capacity(histories.len());
        let mut user_index = BTreeMap::new();
        for (user, articles) in histories {
            let history = UserHistory::new(user, articles);
            let mut rng = ripple_rng(config, user);
            user_index.insert(user, user_ids.len());
            ripple_sets.push(build_ripple_sets(&history, corpus, kg, config, &mut rng)?);
            user_ids.push(user.to_string());
        }
        let samples = train
            .iter()
            .map(|r| {
                Ok(Sample {
                    user: user_index[r.user_id.as_str()],
                    item_entities: resolve_entities(corpus.require(&r.article_id)?, kg.entities()),
                    label: r.label,
                })
            })
            .collect::<Result<_>>()?;
        Ok(TrainingSet {
            user_ids,
            ripple_sets,
            samples,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Predicted click probability and label for every sample.
    pub fn predictions(&self, model: &RippleModel) -> Vec<(f64, bool)> {
        self.samples
            .iter()
            .map(|s| {
                let item = model.mean_entity(&s.item_entities);
                (forward(&self.ripple_sets[s.user], &item, model).prob, s.label)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossParts {
    /// Mean binary cross-entropy.
    pub bce: f64,
    /// `-mean σ(tᵀ R h)` over the ripple triples of the batch.
    pub kg: f64,
    /// Squared norm of all parameters.
    pub l2: f64,
    /// `bce + kg_weight·kg + l2_weight·l2`.
    pub total: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochLoss {
    pub epoch: usize,
    #[serde(flatten)]
    pub loss: LossParts,
}

/// Dense gradient with the same layout as the model parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub entity: Vec<f64>,
    pub relation: Vec<f64>,
}

impl Gradient {
    fn zeros(model: &RippleModel) -> Self {
        Gradient {
            entity: vec![0.0; model.entity_embeddings().len()],
            relation: vec![0.0; model.relation_embeddings().len()],
        }
    }
}

fn add_scaled(dst: &mut [f64], c: f64, x: &[f64]) {
    dst.iter_mut().zip(x).for_each(|(a, b)| *a += c * b);
}

/// `g[rows] += c · Rᵀ x` for relation matrix `r` and the entity row `e`.
fn add_rt_x(grad: &mut Gradient, model: &RippleModel, r: u32, e: u32, c: f64, x: &[f64]) {
    let d = model.dim();
    let rel = model.relation(r);
    let row = &mut grad.entity[e as usize * d..(e as usize + 1) * d];
    for (i, xi) in x.iter().enumerate() {
        let cx = c * xi;
        if cx != 0.0 {
            add_scaled(row, cx, &rel[i * d..(i + 1) * d]);
        }
    }
}

/// `g[R_r] += c · a bᵀ`.
fn add_outer(grad: &mut Gradient, d: usize, r: u32, c: f64, a: &[f64], b: &[f64]) {
    let block = &mut grad.relation[r as usize * d * d..(r as usize + 1) * d * d];
    for (i, ai) in a.iter().enumerate() {
        let cai = c * ai;
        if cai != 0.0 {
            add_scaled(&mut block[i * d..(i + 1) * d], cai, b);
        }
    }
}

fn add_entity(grad: &mut Gradient, d: usize, e: u32, c: f64, x: &[f64]) {
    add_scaled(&mut grad.entity[e as usize * d..(e as usize + 1) * d], c, x);
}

/// Loss of a batch and its exact gradient with respect to every parameter.
pub fn objective(model: &RippleModel, set: &TrainingSet, batch: &[usize]) -> (LossParts, Gradient) {
    let d = model.dim();
    let cfg = &model.config;
    let mut grad = Gradient::zeros(model);
    let n = batch.len().max(1) as f64;
    let n_triples: usize = batch
        .iter()
        .map(|&i| set.ripple_sets[set.samples[i].user].n_triples())
        .sum();

    let mut bce = 0.0;
    let mut kg_sum = 0.0;
    for &i in batch {
        let s = &set.samples[i];
        let ripple = &set.ripple_sets[s.user];
        let item = model.mean_entity(&s.item_entities);
        let fwd = forward(ripple, &item, model);
        let y = if s.label { 1.0 } else { 0.0 };
        let z = dot(&fwd.user, &item);
        // log σ(z) and log(1 - σ(z)) in a form that does not overflow
        let log_p = -softplus(-z);
        let log_q = -softplus(z);
        bce -= y * log_p + (1.0 - y) * log_q;

        let g_z = (fwd.prob - y) / n;
        let g_user: Vec<f64> = item.iter().map(|v| g_z * v).collect();
        let mut g_item: Vec<f64> = fwd.user.iter().map(|u| g_z * u).collect();

        for (hop, hf) in ripple.hops.iter().zip(&fwd.hops) {
            if hop.is_empty() {
                continue;
            }
            let dp: Vec<f64> = hop.tails.iter().map(|&t| dot(model.entity(t), &g_user)).collect();
            let mean_dp: f64 = hf.probs.iter().zip(&dp).map(|(p, q)| p * q).sum();
            for (j, (h, r, t)) in hop.triples().enumerate() {
                let p = hf.probs[j];
                add_entity(&mut grad, d, t, p, &g_user);
                let g_logit = p * (dp[j] - mean_dp);
                if g_logit != 0.0 {
                    add_scaled(&mut g_item, g_logit, &hf.rh[j]);
                    add_rt_x(&mut grad, model, r, h, g_logit, &item);
                    add_outer(&mut grad, d, r, g_logit, &item, model.entity(h));
                }
            }
        }
        if !s.item_entities.is_empty() {
            let c = 1.0 / s.item_entities.len() as f64;
            for &e in &s.item_entities {
                add_entity(&mut grad, d, e, c, &g_item);
            }
        }

        // knowledge-graph term over this user's triples
        for hop in &ripple.hops {
            for (h, r, t) in hop.triples() {
                let rh = model.apply_relation(r, model.entity(h));
                let sig = sigmoid(dot(model.entity(t), &rh));
                kg_sum += sig;
                if cfg.kg_weight != 0.0 {
                    let g_k = -cfg.kg_weight / n_triples as f64 * sig * (1.0 - sig);
                    add_entity(&mut grad, d, t, g_k, &rh);
                    let tail = model.entity(t).to_vec();
                    add_rt_x(&mut grad, model, r, h, g_k, &tail);
                    add_outer(&mut grad, d, r, g_k, &tail, model.entity(h));
                }
            }
        }
    }
    let bce = bce / n;
    let kg = if n_triples > 0 { -kg_sum / n_triples as f64 } else { 0.0 };
    let l2 = model.squared_norm();
    if cfg.l2_weight != 0.0 {
        let c = 2.0 * cfg.l2_weight;
        add_scaled(&mut grad.entity, c, model.entity_embeddings());
        add_scaled(&mut grad.relation, c, model.relation_embeddings());
    }
    let total = bce + cfg.kg_weight * kg + cfg.l2_weight * l2;
    (LossParts { bce, kg, l2, total }, grad)
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Loss over the whole training set at the current parameters.
pub fn evaluate_loss(model: &RippleModel, set: &TrainingSet) -> LossParts {
    let all: Vec<usize> = (0..set.len()).collect();
    objective(model, set, &all).0
}

struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    step: i32,
}

fn apply_update(model: &mut RippleModel, grad: Gradient, adam: &mut Option<AdamState>) {
    let lr = model.config.learning_rate;
    let optimizer = model.config.optimizer;
    let (ent, rel) = model.params_mut();
    let params = ent.iter_mut().chain(rel.iter_mut());
    let grads = grad.entity.iter().chain(grad.relation.iter());
    match (optimizer, adam) {
        (Optimizer::Adam { beta1, beta2, eps }, Some(state)) => {
            state.step += 1;
            let c1 = 1.0 - beta1.powi(state.step);
            let c2 = 1.0 - beta2.powi(state.step);
            for (((p, g), m), v) in params.zip(grads).zip(&mut state.m).zip(&mut state.v) {
                *m = beta1 * *m + (1.0 - beta1) * g;
                *v = beta2 * *v + (1.0 - beta2) * g * g;
                *p -= lr * (*m / c1) / ((*v / c2).sqrt() + eps);
            }
        }
        _ => {
            for (p, g) in params.zip(grads) {
                *p -= lr * g;
            }
        }
    }
}

/// Mini-batch training of an existing model. Returns the full-data loss after
/// each epoch.
pub fn train_model(model: &mut RippleModel, set: &TrainingSet) -> Result<Vec<EpochLoss>> {
    model.config.validate()?;
    let n_params = model.entity_embeddings().len() + model.relation_embeddings().len();
    let mut adam = matches!(model.config.optimizer, Optimizer::Adam { .. }).then(|| AdamState {
        m: vec![0.0; n_params],
        v: vec![0.0; n_params],
        step: 0,
    });
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(model.config.rng_seed, "shuffle"));
    let mut order: Vec<usize> = (0..set.len()).collect();
    let mut trace = Vec::with_capacity(model.config.epochs);
    for epoch in 1..=model.config.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(model.config.batch_size) {
            let (_, grad) = objective(model, set, batch);
            apply_update(model, grad, &mut adam);
        }
        let loss = evaluate_loss(model, set);
        if !loss.total.is_finite() || model.entity_embeddings().iter().any(|x| !x.is_finite()) {
            return Err(Error::DivergenceDetected { epoch });
        }
        log::debug!("epoch {epoch}: bce={:.6} total={:.6}", loss.bce, loss.total);
        trace.push(EpochLoss { epoch, loss });
    }
    Ok(trace)
}

/// Initializes a model from `config.rng_seed` and trains it on the train
/// split of `log`.
pub fn train(
    kg: &KnowledgeGraph,
    corpus: &Corpus,
    log: &InteractionLog,
    config: &RippleConfig,
) -> Result<(RippleModel, Vec<EpochLoss>)> {
    config.validate()?;
    if kg.is_empty() {
        return Err(Error::InvalidConfig("knowledge graph is empty".into()));
    }
    let set = TrainingSet::build(log, corpus, kg, config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.rng_seed, "init"));
    let mut model = RippleModel::init(kg, config.clone(), &mut rng)?;
    let trace = train_model(&mut model, &set)?;
    Ok((model, trace))
}

/// CSV with header `epoch,bce,kg_loss,l2,total`.
pub fn write_training_log(path: impl AsRef<Path>, trace: &[EpochLoss]) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("epoch,bce,kg_loss,l2,total\n");
    for e in trace {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            e.epoch, e.loss.bce, e.loss.kg, e.loss.l2, e.loss.total
        ));
    }
    std::fs::File::create(path)
        .and_then(|mut f| f.write_all(out.as_bytes()))
        .map_err(|e| Error::io(path, e))
}
