use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{classify_bias_case, recommender_bias_per_user, user_bias, BiasCase, BiasKind, DEFAULT_EPSILON};
use crate::corpus::{corpus_sentiment_stats, corpus_stance_average, Corpus};
use crate::error::{Error, Result};
use crate::recommend::{Recommender, UserHistory, DEFAULT_K};
use crate::stats::{one_sample_t, paired_t, pearson, welch_t, Correlation, TTest};

/// Tolerances at which case counts are recomputed for the sensitivity table.
const SENSITIVITY_EPSILONS: [f64; 5] = [0.0, 0.025, 0.05, 0.1, 0.2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditConfig {
    pub k: usize,
    pub epsilon: f64,
    pub kinds: Vec<BiasKind>,
    /// Label of the user population, e.g. `complete` or `random`.
    pub test_set: String,
}

impl AuditConfig {
    pub fn new(kinds: Vec<BiasKind>) -> Self {
        AuditConfig {
            k: DEFAULT_K,
            epsilon: DEFAULT_EPSILON,
            kinds,
            test_set: "complete".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserKindBias {
    pub kind: BiasKind,
    pub user_bias: f64,
    pub rec_bias: f64,
    pub case: BiasCase,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserBias {
    pub user_id: String,
    pub history: Vec<String>,
    pub recommended: Vec<String>,
    pub kinds: Vec<UserKindBias>,
}

/// A statistic, or the reason it is undefined for this data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatOutcome<T> {
    Value(T),
    Undefined { reason: String },
}

impl<T> StatOutcome<T> {
    fn from_result(r: Result<T>) -> Self {
        match r {
            Ok(v) => StatOutcome::Value(v),
            Err(e) => StatOutcome::Undefined { reason: e.to_string() },
        }
    }

    pub fn value(&self) -> Option<&T> {
        match self {
            StatOutcome::Value(v) => Some(v),
            StatOutcome::Undefined { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KindSummary {
    pub kind: BiasKind,
    pub corpus_mean: f64,
    pub avg_user_bias: f64,
    pub avg_rec_bias: f64,
    pub case_counts: BTreeMap<BiasCase, usize>,
    pub pearson: StatOutcome<Correlation>,
    /// One-sample test of user bias against the corpus mean.
    pub user_vs_corpus: StatOutcome<TTest>,
    /// Paired test of recommender bias against user bias.
    pub rec_vs_user_paired: StatOutcome<TTest>,
    /// Welch two-sample test of recommender bias against user bias.
    pub rec_vs_user_welch: StatOutcome<TTest>,
    /// One-sample test of recommender bias against the corpus mean.
    pub rec_vs_corpus: StatOutcome<TTest>,
    /// Case counts recomputed at other tolerances.
    pub epsilon_sensitivity: Vec<(f64, BTreeMap<BiasCase, usize>)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasReport {
    pub model: String,
    pub test_set: String,
    pub k: usize,
    pub epsilon: f64,
    pub n_users: usize,
    /// Which t-test drives the significance stars for recommender vs user.
    pub rec_vs_user_test: String,
    pub kinds: Vec<KindSummary>,
    pub users: Vec<UserBias>,
}

impl BiasReport {
    pub fn summary(&self, kind: &BiasKind) -> Option<&KindSummary> {
        self.kinds.iter().find(|k| &k.kind == kind)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

fn count_cases(pairs: &[(f64, f64)], epsilon: f64) -> BTreeMap<BiasCase, usize> {
    let mut counts: BTreeMap<BiasCase, usize> = BiasCase::ALL.iter().map(|&c| (c, 0)).collect();
    for &(u, r) in pairs {
        *counts.get_mut(&classify_bias_case(u, r, epsilon)).unwrap() += 1;
    }
    counts
}

fn corpus_mean(corpus: &Corpus, kind: &BiasKind) -> Result<f64> {
    match kind {
        BiasKind::Sentiment => Ok(corpus_sentiment_stats(corpus)?.mean),
        BiasKind::Stance(q) => corpus_stance_average(corpus, q),
    }
}

/// Recommends `k` articles to every user and measures user and recommender
/// bias for each configured kind. Users are processed in parallel and folded
/// in user-id order.
pub fn audit(
    recommender: &dyn Recommender,
    users: &[UserHistory],
    corpus: &Corpus,
    config: &AuditConfig,
) -> Result<BiasReport> {
    if users.is_empty() {
        return Err(Error::EmptyInput);
    }
    if config.kinds.is_empty() {
        return Err(Error::InvalidConfig("no bias kinds selected".into()));
    }
    let mut users: Vec<&UserHistory> = users.iter().collect();
    users.sort_by(|a, b| a.user_id.cmp(&b.user_id));

    let per_user: Vec<UserBias> = users
        .par_iter()
        .map(|h| {
            let recs = recommender.recommend(h, corpus, config.k)?;
            let kinds = config
                .kinds
                .iter()
                .map(|kind| {
                    let ub = user_bias(h, corpus, kind)?;
                    let rb = recommender_bias_per_user(&recs, corpus, kind)?;
                    Ok(UserKindBias {
                        kind: kind.clone(),
                        user_bias: ub,
                        rec_bias: rb,
                        case: classify_bias_case(ub, rb, config.epsilon),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(UserBias {
                user_id: h.user_id.clone(),
                history: h.article_ids.clone(),
                recommended: recs.into_iter().map(|r| r.article_id).collect(),
                kinds,
            })
        })
        .collect::<Result<_>>()?;

    let kinds = config
        .kinds
        .iter()
        .enumerate()
        .map(|(ki, kind)| {
            let user_scores: Vec<f64> = per_user.iter().map(|u| u.kinds[ki].user_bias).collect();
            let rec_scores: Vec<f64> = per_user.iter().map(|u| u.kinds[ki].rec_bias).collect();
            let pairs: Vec<(f64, f64)> = user_scores.iter().copied().zip(rec_scores.iter().copied()).collect();
            let cm = corpus_mean(corpus, kind)?;
            Ok(KindSummary {
                kind: kind.clone(),
                corpus_mean: cm,
                avg_user_bias: crate::util::mean(&user_scores).unwrap_or(0.0),
                avg_rec_bias: crate::util::mean(&rec_scores).unwrap_or(0.0),
                case_counts: count_cases(&pairs, config.epsilon),
                pearson: StatOutcome::from_result(pearson(&user_scores, &rec_scores)),
                user_vs_corpus: StatOutcome::from_result(one_sample_t(&user_scores, cm)),
                rec_vs_user_paired: StatOutcome::from_result(paired_t(&rec_scores, &user_scores)),
                rec_vs_user_welch: StatOutcome::from_result(welch_t(&rec_scores, &user_scores)),
                rec_vs_corpus: StatOutcome::from_result(one_sample_t(&rec_scores, cm)),
                epsilon_sensitivity: SENSITIVITY_EPSILONS
                    .iter()
                    .map(|&e| (e, count_cases(&pairs, e)))
                    .collect(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(BiasReport {
        model: recommender.name().to_string(),
        test_set: config.test_set.clone(),
        k: config.k,
        epsilon: config.epsilon,
        n_users: per_user.len(),
        rec_vs_user_test: "paired".into(),
        kinds,
        users: per_user,
    })
}

/// `*` for p < 0.01, `**` for p < 0.05, `-` otherwise.
pub fn significance_mark(p: Option<f64>) -> &'static str {
    match p {
        Some(p) if p < 0.01 => "*",
        Some(p) if p < 0.05 => "**",
        _ => "-",
    }
}

fn p_of(t: &StatOutcome<TTest>) -> Option<f64> {
    t.value().map(|t| t.p_value)
}

/// Markdown tables: average bias with significance marks, case counts,
/// correlations and the tolerance sensitivity of the case counts.
pub fn render_markdown(report: &BiasReport) -> String {
    let mut md = String::new();
    let _ = writeln!(
        md,
        "# Bias audit: {} ({} test set, k={}, epsilon={})\n",
        report.model, report.test_set, report.k, report.epsilon
    );
    let _ = writeln!(md, "Users audited: {}\n", report.n_users);
    let _ = writeln!(md, "## Average bias scores\n");
    let _ = writeln!(
        md,
        "Marks: * p < 0.01, ** p < 0.05, - not significant. Recommender marks are (vs user / vs corpus), vs user uses the {} t-test.\n",
        report.rec_vs_user_test
    );
    md.push_str("| kind | corpus | avg. user | avg. recommender |\n|---|---:|---:|---:|\n");
    for k in &report.kinds {
        let _ = writeln!(
            md,
            "| {} | {:.3} | {:.3} ({}) | {:.3} ({}/{}) |",
            k.kind,
            k.corpus_mean,
            k.avg_user_bias,
            significance_mark(p_of(&k.user_vs_corpus)),
            k.avg_rec_bias,
            significance_mark(p_of(&k.rec_vs_user_paired)),
            significance_mark(p_of(&k.rec_vs_corpus)),
        );
    }
    let _ = writeln!(md, "\n## Bias cases\n");
    md.push_str("| kind | C1 | C2 | C3 | C4 | C5 |\n|---|---:|---:|---:|---:|---:|\n");
    for k in &report.kinds {
        let counts: Vec<String> = BiasCase::ALL.iter().map(|c| k.case_counts[c].to_string()).collect();
        let _ = writeln!(md, "| {} | {} |", k.kind, counts.join(" | "));
    }
    let _ = writeln!(md, "\n## Recommender-user correlation\n");
    md.push_str("| kind | Pearson r (p-value) |\n|---|---:|\n");
    for k in &report.kinds {
        let cell = match &k.pearson {
            StatOutcome::Value(c) => format!(
                "{:.3}{} ({:.3e})",
                c.r,
                match significance_mark(Some(c.p_value)) {
                    "-" => "",
                    m => m,
                },
                c.p_value
            ),
            StatOutcome::Undefined { .. } => "n/a".into(),
        };
        let _ = writeln!(md, "| {} | {} |", k.kind, cell);
    }
    let _ = writeln!(md, "\n## Case counts by tolerance\n");
    md.push_str("| kind | epsilon | C1 | C2 | C3 | C4 | C5 |\n|---|---:|---:|---:|---:|---:|---:|\n");
    for k in &report.kinds {
        for (eps, counts) in &k.epsilon_sensitivity {
            let counts: Vec<String> = BiasCase::ALL.iter().map(|c| counts[c].to_string()).collect();
            let _ = writeln!(md, "| {} | {} | {} |", k.kind, eps, counts.join(" | "));
        }
    }
    md
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{QuestionId, StanceLabel};
    use crate::recommend::RandomRecommender;
    use crate::testutil::article;

    struct FirstK;

    impl Recommender for FirstK {
        fn name(&self) -> &str {
            "first"
        }

        fn raw_scores(&self, _: &UserHistory, candidates: &[&str]) -> Result<Vec<f64>> {
            Ok((0..candidates.len()).map(|i| -(i as f64)).collect())
        }
    }

    fn against_corpus(n: usize) -> Corpus {
        let articles = (0..n)
            .map(|i| article(&format!("a{i:02}"), "", -0.3, StanceLabel::Against))
            .collect();
        Corpus::new(articles, QuestionId::default_set()).unwrap()
    }

    #[test]
    fn all_against_gives_c1_and_undefined_correlation() {
        let corpus = against_corpus(12);
        let users: Vec<UserHistory> = (0..4)
            .map(|i| UserHistory::new(format!("u{i}"), vec![format!("a{i:02}")]))
            .collect();
        let cfg = AuditConfig::new(BiasKind::all(corpus.questions()));
        let report = audit(&FirstK, &users, &corpus, &cfg).unwrap();
        for k in &report.kinds {
            assert_eq!(k.case_counts[&BiasCase::C1], 4);
            assert!(matches!(k.pearson, StatOutcome::Undefined { .. }));
            assert_eq!(k.case_counts.values().sum::<usize>(), 4);
        }
        let md = render_markdown(&report);
        assert!(md.contains("n/a"));
    }

    #[test]
    fn reports_are_reproducible() {
        let mut articles: Vec<_> = (0..30)
            .map(|i| {
                let label = if i % 3 == 0 { StanceLabel::Favor } else { StanceLabel::Against };
                article(&format!("a{i:02}"), "", (i as f64 / 15.0) - 1.0, label)
            })
            .collect();
        articles.reverse();
        let corpus = Corpus::new(articles, QuestionId::default_set()).unwrap();
        let users: Vec<UserHistory> = (0..10)
            .map(|i| UserHistory::new(format!("u{i}"), vec![format!("a{:02}", i * 2), format!("a{:02}", i * 3)]))
            .collect();
        let cfg = AuditConfig::new(BiasKind::all(corpus.questions()));
        let a = audit(&RandomRecommender::new(1), &users, &corpus, &cfg).unwrap();
        let mut shuffled = users.clone();
        shuffled.reverse();
        let b = audit(&RandomRecommender::new(1), &shuffled, &corpus, &cfg).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(a.users[0].user_id, "u0");
        assert!(matches!(a.kinds[0].user_vs_corpus, StatOutcome::Value(_)));
    }

    #[test]
    fn significance_marks() {
        assert_eq!(significance_mark(Some(0.001)), "*");
        assert_eq!(significance_mark(Some(0.03)), "**");
        assert_eq!(significance_mark(Some(0.2)), "-");
        assert_eq!(significance_mark(None), "-");
    }
}
