//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Tolerances and time budgets are pinned below.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use newsbias::bias::{
    audit, classify_bias_case, stance_score, user_bias, AuditConfig, BiasCase, BiasKind,
};
use newsbias::corpus::{
    corpus_stance_average, sentiment_score_from_probs, InteractionLog, InteractionRecord, KnowledgeGraph, Origin,
    Split, StanceLabel,
};
use newsbias::eval::{auc, f1};
use newsbias::recommend::{minmax_scale, tfidf_vectorize, Recommender, TextRecommender, TfidfConfig, UserHistory};
use newsbias::ripple::{objective, train, Optimizer, RippleConfig, RippleModel, TrainingSet};
use newsbias::sim::{simulate, Arm, ArmRecommenders, SimConfig};

use common::*;

const STANCE_AVERAGE_TOL: f64 = 5e-4;
const STANCE_AVERAGE_BUDGET: Duration = Duration::from_secs(1);
const AUC_TOL: f64 = 1e-12;
const AUC_BUDGET: Duration = Duration::from_secs(5);
const TFIDF_TOL: f64 = 1e-9;
const GRAD_STEP: f64 = 1e-3;
const GRAD_REL_TOL: f64 = 1e-4;
const GRAD_BUDGET: Duration = Duration::from_secs(10);
const TRAIN_AUC_MIN: f64 = 0.6;
const TRAIN_BUDGET: Duration = Duration::from_secs(60);
const CORRELATION_MIN: f64 = 0.2;
const CORRELATION_P_MAX: f64 = 0.01;
const SIMULATION_BUDGET: Duration = Duration::from_secs(120);
const PROPERTY_CASES: u32 = 10_000;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, budget: Duration) -> Result<(), String> {
    check(elapsed < budget, format!("took {elapsed:?}, budget {budget:?}"))
}

/// Stance averages from per-question favor/against counts.
fn criterion_1() -> Outcome {
    let start = Instant::now();
    let text = std::fs::read_to_string(fixtures().join("stance_counts.tsv")).map_err(|e| e.to_string())?;
    let counts: Vec<(String, usize, usize)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            (f[0].to_string(), f[1].parse().unwrap(), f[2].parse().unwrap())
        })
        .collect();
    let total = counts[0].1 + counts[0].2;
    check(counts.iter().all(|c| c.1 + c.2 == total), "rows cover different article totals")?;
    let questions = newsbias::corpus::QuestionId::default_set();
    let articles = (0..total)
        .map(|i| {
            let mut a = article(&format!("n{i:05}"), "", 0.0, StanceLabel::Against);
            for (q, (_, favor, _)) in questions.iter().zip(&counts) {
                let label = if i < *favor { StanceLabel::Favor } else { StanceLabel::Against };
                a.stances.insert(q.clone(), label);
            }
            a
        })
        .collect();
    let corpus = corpus_of(articles);
    let expected = [-0.050, -0.038, -0.030, -0.070, -0.038];
    let mut got = Vec::new();
    for (q, want) in questions.iter().zip(expected) {
        let avg = corpus_stance_average(&corpus, q).map_err(|e| e.to_string())?;
        check((avg - want).abs() <= STANCE_AVERAGE_TOL, format!("{q:?}: {avg} vs {want}"))?;
        got.push(format!("{avg:.4}"));
    }
    within(start.elapsed(), STANCE_AVERAGE_BUDGET)?;
    Ok(format!("Q1-Q5 = [{}]", got.join(", ")))
}

/// Rank-based AUC against the pairwise definition.
fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(2..=200);
        let levels = rng.random_range(2..=12);
        let mut labels: Vec<bool> = (0..n).map(|_| rng.random_bool(0.4)).collect();
        labels[0] = true;
        labels[1] = false;
        let scores: Vec<f64> = (0..n)
            .map(|_| rng.random_range(0..levels) as f64 / levels as f64)
            .collect();
        let got = auc(&scores, &labels).map_err(|e| e.to_string())?;
        worst = worst.max((got - pairwise_auc(&scores, &labels)).abs());
    }
    check(worst <= AUC_TOL, format!("max deviation {worst:e}"))?;
    within(start.elapsed(), AUC_BUDGET)?;
    Ok(format!("100 instances, max deviation {worst:e}"))
}

/// Direct evaluation of raw counts, smoothed idf and L2 normalization.
fn tfidf_oracle(docs: &[String]) -> (Vec<String>, Vec<Vec<f64>>) {
    let grams: Vec<Vec<String>> = docs
        .iter()
        .map(|d| {
            let lower = d.to_lowercase();
            let toks: Vec<&str> = lower
                .split(|c: char| !c.is_alphanumeric())
                .filter(|t| t.chars().count() >= 2)
                .collect();
            let mut g: Vec<String> = toks.iter().map(|t| t.to_string()).collect();
            g.extend(toks.windows(2).map(|w| format!("{} {}", w[0], w[1])));
            g
        })
        .collect();
    let vocab: Vec<String> = grams.iter().flatten().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let n = docs.len() as f64;
    let vectors = grams
        .iter()
        .map(|g| {
            let mut v: Vec<f64> = vocab
                .iter()
                .map(|term| {
                    let tf = g.iter().filter(|x| *x == term).count() as f64;
                    let df = grams.iter().filter(|other| other.contains(term)).count() as f64;
                    tf * (((1.0 + n) / (1.0 + df)).ln() + 1.0)
                })
                .collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter_mut().for_each(|x| *x /= norm);
            v
        })
        .collect();
    (vocab, vectors)
}

fn criterion_3() -> Outcome {
    let text = std::fs::read_to_string(fixtures().join("tfidf_documents.txt")).map_err(|e| e.to_string())?;
    let docs: Vec<String> = text.lines().map(str::to_string).collect();
    check(docs.len() == 10, format!("fixture has {} documents", docs.len()))?;
    let corpus = corpus_of(
        docs.iter()
            .enumerate()
            .map(|(i, d)| article(&format!("doc{i}"), d, 0.0, StanceLabel::Favor))
            .collect(),
    );
    let model = tfidf_vectorize(&corpus, TfidfConfig::default()).map_err(|e| e.to_string())?;
    // the library joins title and body with a newline; titles are empty here
    let texts: Vec<String> = corpus.articles().iter().map(|a| a.text()).collect();
    let (vocab, want) = tfidf_oracle(&texts);
    check(model.vocabulary == vocab, "vocabularies differ")?;
    let mut worst: f64 = 0.0;
    for (a, w) in corpus.articles().iter().zip(&want) {
        let got = model.vectors.require(&a.id).map_err(|e| e.to_string())?.to_dense();
        for (g, w) in got.iter().zip(w) {
            worst = worst.max((g - w).abs());
        }
    }
    check(worst <= TFIDF_TOL, format!("max component deviation {worst:e}"))?;
    Ok(format!("{} features, max deviation {worst:e}", vocab.len()))
}

fn gradient_fixture() -> (RippleModel, TrainingSet) {
    let kg = KnowledgeGraph::from_triples([
        ("e0", "r0", "e1"),
        ("e1", "r1", "e2"),
        ("e2", "r0", "e3"),
        ("e0", "r1", "e4"),
        ("e4", "r0", "e5"),
        ("e3", "r1", "e0"),
        ("e5", "r1", "e2"),
    ]);
    let mk = |id: &str, ents: &[&str]| {
        let mut a = article(id, "", 0.0, StanceLabel::Favor);
        a.entity_ids = ents.iter().map(|e| e.to_string()).collect();
        a
    };
    let corpus = corpus_of(vec![
        mk("a0", &["e0"]),
        mk("a1", &["e1", "e4"]),
        mk("a2", &["e2"]),
        mk("a3", &["e3", "e5"]),
        mk("a4", &["e5"]),
    ]);
    let rec = |u: &str, a: &str, label: bool| InteractionRecord {
        user_id: u.into(),
        article_id: a.into(),
        label,
        origin: if label { Origin::Chosen } else { Origin::NegativePreview },
        split: Some(Split::Train),
    };
    let log = InteractionLog::new(vec![
        rec("u0", "a0", true),
        rec("u0", "a2", false),
        rec("u0", "a3", false),
        rec("u1", "a1", true),
        rec("u1", "a3", true),
        rec("u1", "a4", false),
        rec("u1", "a0", false),
    ]);
    let config = RippleConfig {
        hops: 2,
        ripple_size: 3,
        dim: 4,
        l2_weight: 1e-2,
        kg_weight: 0.3,
        ..RippleConfig::default()
    };
    let set = TrainingSet::build(&log, &corpus, &kg, &config).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut model = RippleModel::init(&kg, config, &mut rng).unwrap();
    // spread the parameters so every term of the loss is far from flat
    let (e, r) = model.params_mut();
    for x in e.iter_mut().chain(r.iter_mut()) {
        *x = rng.random_range(-1.0..1.0);
    }
    (model, set)
}

fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let scale = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(b.iter().map(|x| x * x).sum::<f64>().sqrt());
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let (mut model, set) = gradient_fixture();
    check(model.entities().len() == 6, "toy graph must have 6 entities")?;
    let batch: Vec<usize> = (0..set.len()).collect();
    let (_, analytic) = objective(&model, &set, &batch);
    let loss_at = |m: &RippleModel| objective(m, &set, &batch).0.total;
    let mut numeric_entity = vec![0.0; analytic.entity.len()];
    let mut numeric_relation = vec![0.0; analytic.relation.len()];
    for (tensor, out) in [(0, &mut numeric_entity), (1, &mut numeric_relation)] {
        for i in 0..out.len() {
            let orig = {
                let (e, r) = model.params_mut();
                let p = if tensor == 0 { &mut e[i] } else { &mut r[i] };
                let orig = *p;
                *p = orig + GRAD_STEP;
                orig
            };
            let plus = loss_at(&model);
            {
                let (e, r) = model.params_mut();
                let p = if tensor == 0 { &mut e[i] } else { &mut r[i] };
                *p = orig - GRAD_STEP;
            }
            let minus = loss_at(&model);
            {
                let (e, r) = model.params_mut();
                let p = if tensor == 0 { &mut e[i] } else { &mut r[i] };
                *p = orig;
            }
            out[i] = (plus - minus) / (2.0 * GRAD_STEP);
        }
    }
    let err_e = relative_error(&analytic.entity, &numeric_entity);
    let err_r = relative_error(&analytic.relation, &numeric_relation);
    check(err_e <= GRAD_REL_TOL, format!("entity tensor relative error {err_e:e}"))?;
    check(err_r <= GRAD_REL_TOL, format!("relation tensor relative error {err_r:e}"))?;
    within(start.elapsed(), GRAD_BUDGET)?;
    Ok(format!("relative error entity {err_e:.2e}, relation {err_r:.2e}"))
}

/// 10 users, 4 rounds of 5 previews: 200 records, all used for training.
fn training_log(data: &Shipped) -> InteractionLog {
    let tfidf = TextRecommender::tfidf(&data.corpus, TfidfConfig::default()).unwrap();
    let arms = ArmRecommenders::new().with(Arm::Tfidf, &tfidf);
    let config = SimConfig {
        n_users: 10,
        preview_size: 5,
        rounds: 4,
        temperature: 0.2,
        latent_bias_kind: BiasKind::Stance(q1()),
        assignment: vec![(Arm::Tfidf, 1.0)],
        rng_seed: 5,
        ..SimConfig::default()
    };
    let mut log = simulate(&data.corpus, &arms, &config).unwrap().log;
    for r in &mut log.records {
        r.split = Some(Split::Train);
    }
    log
}

fn criterion_5(data: &Shipped) -> Outcome {
    let start = Instant::now();
    let log = training_log(data);
    check(log.len() == 200, format!("{} interactions", log.len()))?;
    let config = RippleConfig {
        epochs: 30,
        optimizer: Optimizer::Sgd,
        learning_rate: 2.0,
        rng_seed: 5,
        ..RippleConfig::default()
    };
    let (model, trace) = train(&data.kg, &data.corpus, &log, &config).map_err(|e| e.to_string())?;
    let set = TrainingSet::build(&log, &data.corpus, &data.kg, &config).map_err(|e| e.to_string())?;
    let (scores, labels): (Vec<f64>, Vec<bool>) = set.predictions(&model).into_iter().unzip();
    let train_auc = auc(&scores, &labels).map_err(|e| e.to_string())?;
    let (first, last) = (trace[0].loss.bce, trace[29].loss.bce);
    check(last < first, format!("BCE epoch 30 {last} >= epoch 1 {first}"))?;
    check(train_auc > TRAIN_AUC_MIN, format!("training AUC {train_auc}"))?;
    within(start.elapsed(), TRAIN_BUDGET)?;
    Ok(format!("BCE {first:.4} -> {last:.4}, training AUC {train_auc:.3}"))
}

struct SimulationAudit {
    /// (recommender, Pearson r, p, case counts)
    rows: Vec<(String, f64, f64, BTreeMap<BiasCase, usize>)>,
    elapsed: Duration,
}

fn simulation_audit(data: &Shipped) -> Result<SimulationAudit, String> {
    let start = Instant::now();
    let e = |e: newsbias::Error| e.to_string();
    let tfidf = TextRecommender::tfidf(&data.corpus, TfidfConfig::default()).map_err(e)?;
    let w2v = TextRecommender::word2vec(&data.corpus, &data.words).map_err(e)?;
    let doc = TextRecommender::docembed(&data.corpus, &data.sentences).map_err(e)?;
    let arms = ArmRecommenders::new()
        .with(Arm::Tfidf, &tfidf)
        .with(Arm::Word2vec, &w2v)
        .with(Arm::Docembed, &doc);
    let kind = BiasKind::Stance(q1());
    let config = SimConfig {
        n_users: 200,
        temperature: 0.2,
        latent_bias_kind: kind.clone(),
        rng_seed: 7,
        ..SimConfig::default()
    };
    let sim = simulate(&data.corpus, &arms, &config).map_err(e)?;
    let users = sim.histories();
    let mut rows = Vec::new();
    for rec in [&tfidf as &dyn Recommender, &w2v, &doc] {
        let report = audit(rec, &users, &data.corpus, &AuditConfig::new(vec![kind.clone()])).map_err(e)?;
        let summary = report.summary(&kind).ok_or("missing stance summary")?;
        let corr = summary.pearson.value().ok_or("Pearson undefined")?;
        rows.push((rec.name().to_string(), corr.r, corr.p_value, summary.case_counts.clone()));
    }
    Ok(SimulationAudit {
        rows,
        elapsed: start.elapsed(),
    })
}

fn criterion_6(sim: &SimulationAudit) -> Outcome {
    let mut parts = Vec::new();
    for name in ["tfidf", "word2vec"] {
        let (_, r, p, _) = sim.rows.iter().find(|row| row.0 == name).ok_or("recommender missing")?;
        check(*r > CORRELATION_MIN && *p < CORRELATION_P_MAX, format!("{name}: r={r}, p={p}"))?;
        parts.push(format!("{name} r={r:.3} p={p:.1e}"));
    }
    within(sim.elapsed, SIMULATION_BUDGET)?;
    Ok(parts.join(", "))
}

fn criterion_7(sim: &SimulationAudit) -> Outcome {
    let mut parts = Vec::new();
    for (name, _, _, cases) in &sim.rows {
        let c1 = cases.get(&BiasCase::C1).copied().unwrap_or(0);
        let rest = BiasCase::ALL[1..].iter().map(|c| cases.get(c).copied().unwrap_or(0)).max().unwrap();
        check(c1 > rest, format!("{name}: C1={c1}, next={rest}"))?;
        parts.push(format!("{name} C1={c1} next={rest}"));
    }
    Ok(parts.join(", "))
}

fn criterion_8() -> Outcome {
    let labels = [true, false, true, false, false, true];
    let scores = [0.0; 6];
    let got = f1(&scores, &labels, 0.5).map_err(|e| e.to_string())?;
    check(got == 0.0, format!("F1 = {got}"))?;
    Ok("F1 = 0".into())
}

/// Independent reading of the case definitions; exactly one must hold.
fn case_predicates(u: f64, r: f64, eps: f64) -> [bool; 5] {
    let pos = |x: f64| x > eps;
    let neg = |x: f64| x < -eps;
    let neutral = |x: f64| x.abs() <= eps;
    [
        (pos(u) && pos(r)) || (neg(u) && neg(r)),
        (pos(u) && neg(r)) || (neg(u) && pos(r)),
        !neutral(u) && neutral(r),
        neutral(u) && !neutral(r),
        neutral(u) && neutral(r),
    ]
}

fn criterion_9(data: &Shipped) -> Outcome {
    let n = data.corpus.len();
    let ids: Vec<String> = data.corpus.ids().map(str::to_string).collect();
    let kinds = BiasKind::all(data.corpus.questions());
    let strategy = (
        (0.0f64..=1.0, 0.0f64..=1.0),
        prop::collection::vec(0..n, 1..12),
        prop::collection::vec(-1e6f64..1e6, 1..20),
        (-1.0f64..=1.0, -1.0f64..=1.0, 0.0f64..0.5),
    );
    let mut runner = TestRunner::new(Config {
        cases: PROPERTY_CASES,
        failure_persistence: None,
        ..Config::default()
    });
    runner
        .run(&strategy, |((a, b), history, raw, (ub, rb, eps))| {
            let (p_pos, p_neg) = (a * (1.0 - b), (1.0 - a) * (1.0 - b));
            let s = sentiment_score_from_probs(p_pos, p_neg).unwrap();
            prop_assert!((-1.0..=1.0).contains(&s));
            for label in [StanceLabel::Favor, StanceLabel::Against] {
                let v = stance_score(label);
                prop_assert!(v == 1.0 || v == -1.0);
            }
            let h = UserHistory::new("u", history.iter().map(|&i| ids[i].clone()).collect());
            for kind in &kinds {
                let v = user_bias(&h, &data.corpus, kind).unwrap();
                prop_assert!((-1.0..=1.0).contains(&v));
            }
            for v in minmax_scale(&raw).unwrap() {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            let case = classify_bias_case(ub, rb, eps);
            let holds = case_predicates(ub, rb, eps);
            prop_assert_eq!(holds.iter().filter(|x| **x).count(), 1);
            prop_assert!(holds[case.index()]);
            Ok(())
        })
        .map_err(|e| e.to_string())?;

    let report_bytes = || -> Result<String, String> {
        let tfidf = TextRecommender::tfidf(&data.corpus, TfidfConfig::default()).map_err(|e| e.to_string())?;
        let histories = newsbias::eval::train_histories(&data.log);
        let users: Vec<UserHistory> = histories.into_values().collect();
        let config = AuditConfig::new(kinds.clone());
        Ok(audit(&tfidf, &users, &data.corpus, &config).map_err(|e| e.to_string())?.to_json())
    };
    let first = report_bytes()?;
    let second = report_bytes()?;
    check(first == second, "report.json differs between identical runs")?;
    Ok(format!("{PROPERTY_CASES} property cases, report.json {} bytes identical", first.len()))
}

fn run(name: &str, f: impl FnOnce() -> Outcome, failures: &mut usize) {
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        Err(p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panicked".into()))
    });
    match outcome {
        Ok(detail) => println!("PASS {name}: {detail}"),
        Err(why) => {
            *failures += 1;
            println!("FAIL {name}: {why}");
        }
    }
}

fn main() {
    let mut failures = 0;
    let data = shipped();
    run("criterion 1 stance averages", criterion_1, &mut failures);
    run("criterion 2 AUC oracle", criterion_2, &mut failures);
    run("criterion 3 TF-IDF oracle", criterion_3, &mut failures);
    run("criterion 4 gradient check", criterion_4, &mut failures);
    run("criterion 5 training sanity", || criterion_5(&data), &mut failures);
    let sim = simulation_audit(&data);
    run("criterion 6 bias correlation", || criterion_6(sim.as_ref().map_err(Clone::clone)?), &mut failures);
    run("criterion 7 C1 dominance", || criterion_7(sim.as_ref().map_err(Clone::clone)?), &mut failures);
    run("criterion 8 degenerate F1", criterion_8, &mut failures);
    run("criterion 9 bounds and determinism", || criterion_9(&data), &mut failures);
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
