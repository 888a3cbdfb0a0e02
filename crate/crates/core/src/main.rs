//! `newsbias` command-line tool.
//!
//! Exit codes: 0 success, 1 usage or validation error, 2 runtime error.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use newsbias::bias::{audit, render_markdown, AuditConfig, BiasKind, BiasReport, DEFAULT_EPSILON};
use newsbias::corpus::{
    corpus_sentiment_stats, corpus_stance_average, emit_stance_triples, load_corpus_with, load_interactions, load_kg,
    stance_counts, write_interactions, write_stance_triples, Corpus, InteractionLog, KnowledgeGraph, LoadOptions,
    Manifest, QuestionId, DEFAULT_MAX_WORDS,
};
use newsbias::eval::{evaluate, render_results_markdown, split_interactions, train_histories, EvalResult, SplitConfig, TestSet};
use newsbias::layout::DataDir;
use newsbias::recommend::{
    RandomRecommender, Recommender, SentenceVectors, TextRecommender, TfidfConfig, UserHistory, WordVectors, DEFAULT_K,
};
use newsbias::ripple::{train, write_training_log, RippleConfig, RippleModel, RippleRecommender};
use newsbias::sim::synthetic::{generate, SyntheticConfig};
use newsbias::sim::{simulate, Arm, ArmRecommenders, BiasDistribution, SimConfig};

#[derive(Parser, Debug)]
#[command(name = "newsbias", version, about = "News recommenders, CTR evaluation and bias audit")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Global {
    /// Seed for every random stream of the run.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// JSON file whose keys override flags of the same name.
    #[arg(long, global = true)]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true, default_value = "info")]
    log_level: String,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate a corpus and write stance triples and corpus statistics.
    Ingest(IngestArgs),
    /// Simulate users of the preview-and-choose protocol and split the log.
    Simulate(SimulateArgs),
    /// Train the knowledge-graph recommender.
    Train(TrainArgs),
    /// CTR evaluation of recommenders on the complete and random test sets.
    Evaluate(EvaluateArgs),
    /// Sentiment and stance bias audit of one recommender.
    Audit(AuditArgs),
    /// Re-render markdown from report.json and results.json.
    Report(ReportArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Ingest(_) => "ingest",
            Command::Simulate(_) => "simulate",
            Command::Train(_) => "train",
            Command::Evaluate(_) => "evaluate",
            Command::Audit(_) => "audit",
            Command::Report(_) => "report",
        }
    }
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IngestArgs {
    /// Data directory holding corpus.jsonl and corpus_manifest.json.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Generate a synthetic data directory with this many articles into --out.
    #[arg(long, conflicts_with = "data")]
    synthetic: Option<usize>,
    #[arg(long, default_value_t = 300)]
    word_dim: usize,
    #[arg(long, default_value_t = 768)]
    sentence_dim: usize,
    /// Drop articles longer than this many words.
    #[arg(long, default_value_t = DEFAULT_MAX_WORDS)]
    max_words: usize,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimulateArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 200)]
    users: usize,
    #[arg(long, default_value_t = 0.5)]
    temperature: f64,
    /// `sentiment` or `stance:<question>`.
    #[arg(long, default_value = "stance:Q1")]
    bias_kind: String,
    #[arg(long, default_value_t = 0.8)]
    train_fraction: f64,
    #[arg(skip)]
    #[serde(default)]
    sim: SimExtras,
}

/// Simulator settings only reachable through --config.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SimExtras {
    rounds: usize,
    preview_size: usize,
    bias_distribution: BiasDistribution,
    assignment: Vec<(Arm, f64)>,
}

impl Default for SimExtras {
    fn default() -> Self {
        let d = SimConfig::default();
        SimExtras {
            rounds: d.rounds,
            preview_size: d.preview_size,
            bias_distribution: d.bias_distribution,
            assignment: d.assignment,
        }
    }
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrainArgs {
    #[arg(long)]
    data: PathBuf,
    /// Split interaction log (default: <data>/interactions.tsv).
    #[arg(long)]
    interactions: Option<PathBuf>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(skip)]
    #[serde(default)]
    ripple: RippleConfig,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EvaluateArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    interactions: Option<PathBuf>,
    /// Comma-separated: tfidf, word2vec, docembed, ripplenet, random.
    #[arg(long, value_delimiter = ',', default_value = "tfidf,word2vec,docembed,ripplenet")]
    models: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "complete,random")]
    tests: Vec<String>,
    /// Trained knowledge-graph model; trained on the fly when absent.
    #[arg(long)]
    model_file: Option<PathBuf>,
    #[arg(skip)]
    #[serde(default)]
    ripple: RippleConfig,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AuditArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    interactions: Option<PathBuf>,
    #[arg(long, default_value = "tfidf")]
    model: String,
    #[arg(long, default_value_t = DEFAULT_K)]
    k: usize,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    /// Questions to audit (default: all in the corpus manifest).
    #[arg(long, value_delimiter = ',')]
    questions: Option<Vec<String>>,
    /// Audited users: those with records in the `complete` or `random` test
    /// set, or `all` users with a reading history.
    #[arg(long, default_value = "complete")]
    users_from: String,
    #[arg(long)]
    model_file: Option<PathBuf>,
    #[arg(skip)]
    #[serde(default)]
    ripple: RippleConfig,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReportArgs {
    /// Directory with report.json and/or results.json.
    #[arg(long)]
    input: PathBuf,
}

trait CommandArgs {
    /// The global seed drives every random stream of a run.
    fn apply_seed(&mut self, _seed: u64) {}
}

impl CommandArgs for IngestArgs {}
impl CommandArgs for SimulateArgs {}
impl CommandArgs for ReportArgs {}

impl CommandArgs for TrainArgs {
    fn apply_seed(&mut self, seed: u64) {
        self.ripple.rng_seed = seed;
        if let Some(e) = self.epochs {
            self.ripple.epochs = e;
        }
    }
}

impl CommandArgs for EvaluateArgs {
    fn apply_seed(&mut self, seed: u64) {
        self.ripple.rng_seed = seed;
    }
}

impl CommandArgs for AuditArgs {
    fn apply_seed(&mut self, seed: u64) {
        self.ripple.rng_seed = seed;
    }
}

/// Failure class that decides the exit code.
#[derive(Debug)]
struct Validation(String);

impl std::fmt::Display for Validation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Validation {}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<newsbias::Error>() {
            return if e.is_validation() { 1 } else { 2 };
        }
        if cause.is::<Validation>() || cause.is::<serde_json::Error>() {
            return 1;
        }
    }
    2
}

/// The error chain joined with `: `, skipping causes the previous message
/// already spells out.
fn describe(err: &anyhow::Error) -> String {
    let mut out = String::new();
    let mut last = String::new();
    for cause in err.chain() {
        let text = cause.to_string();
        if !last.contains(&text) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&text);
        }
        last = text;
    }
    out
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = describe(&e);
            log::error!("{msg}");
            eprintln!("error: {msg}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn init_logging(level: &str) {
    let _ = env_logger::Builder::new()
        .parse_filters(level)
        .format(|buf, record| {
            writeln!(
                buf,
                "level={} target={} msg={:?}",
                record.level(),
                record.target(),
                record.args().to_string()
            )
        })
        .try_init();
}

/// Overlays `patch` onto `base`, recursing into objects. Keys absent from
/// `base` are rejected so typos in config files do not pass silently.
fn merge(base: &mut Value, patch: &Value, path: &str) -> anyhow::Result<()> {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                let here = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                match b.get_mut(k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v, &here)?,
                    Some(slot) => *slot = v.clone(),
                    None => return Err(Validation(format!("unknown config key `{here}`")).into()),
                }
            }
            Ok(())
        }
        (b, p) => {
            *b = p.clone();
            Ok(())
        }
    }
}

/// Resolves flags plus config file into one value per part. The config file
/// is a flat object holding global and command keys.
fn resolve<T: Serialize + serde::de::DeserializeOwned>(
    global: &Global,
    args: &T,
    config: Option<&Value>,
) -> anyhow::Result<(Global, T)> {
    let mut g = serde_json::to_value(global)?;
    let mut a = serde_json::to_value(args)?;
    if let Some(Value::Object(cfg)) = config {
        for (k, v) in cfg {
            let patch = json!({ k.clone(): v.clone() });
            if g.get(k).is_some() {
                merge(&mut g, &patch, "")?;
            } else {
                merge(&mut a, &patch, "")?;
            }
        }
    } else if config.is_some() {
        bail!(Validation("config file must hold a JSON object".into()));
    }
    let mut resolved_global: Global = serde_json::from_value(g).context("config")?;
    resolved_global.config = global.config.clone();
    Ok((resolved_global, serde_json::from_value(a).context("config")?))
}

struct Run {
    out: PathBuf,
    command: &'static str,
    config: Value,
    outputs: Vec<String>,
}

impl Run {
    fn write(&mut self, name: &str, contents: &str) -> anyhow::Result<()> {
        let path = self.out.join(name);
        std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.record(name);
        Ok(())
    }

    fn record(&mut self, name: &str) {
        log::info!("wrote {}", self.out.join(name).display());
        self.outputs.push(name.to_string());
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn finish(mut self) -> anyhow::Result<()> {
        let manifest = json!({
            "tool": "newsbias",
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "config": self.config,
            "outputs": self.outputs,
            "created_at": chrono::Utc::now().to_rfc3339(),
        });
        let text = serde_json::to_string_pretty(&manifest)? + "\n";
        self.outputs.clear();
        self.write("manifest.json", &text)
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let config = match &cli.global.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            Some(serde_json::from_str::<Value>(&text).with_context(|| format!("parsing {}", path.display()))?)
        }
        None => None,
    };
    let name = cli.command.name();
    macro_rules! dispatch {
        ($args:expr, $f:ident) => {{
            let (global, mut args) = resolve(&cli.global, $args, config.as_ref())?;
            args.apply_seed(global.seed);
            let mut run = start(&global, name, json!({ "global": &global, "args": &args }))?;
            $f(&global, args, &mut run)?;
            run.finish()
        }};
    }
    match &cli.command {
        Command::Ingest(a) => dispatch!(a, cmd_ingest),
        Command::Simulate(a) => dispatch!(a, cmd_simulate),
        Command::Train(a) => dispatch!(a, cmd_train),
        Command::Evaluate(a) => dispatch!(a, cmd_evaluate),
        Command::Audit(a) => dispatch!(a, cmd_audit),
        Command::Report(a) => dispatch!(a, cmd_report),
    }
}

fn start(global: &Global, command: &'static str, config: Value) -> anyhow::Result<Run> {
    init_logging(&global.log_level);
    if let Some(jobs) = global.jobs {
        if jobs == 0 {
            bail!(Validation("--jobs must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .context("configuring worker pool")?;
    }
    std::fs::create_dir_all(&global.out).with_context(|| format!("creating {}", global.out.display()))?;
    log::info!("{command}: seed={} out={}", global.seed, global.out.display());
    Ok(Run {
        out: global.out.clone(),
        command,
        config,
        outputs: Vec::new(),
    })
}

fn load_corpus_dir(data: &DataDir, max_words: Option<usize>) -> anyhow::Result<(Manifest, Corpus)> {
    let manifest = Manifest::load(data.corpus_manifest())?;
    let corpus = load_corpus_with(data.corpus(), data.corpus_manifest(), LoadOptions { max_words })?;
    log::info!("loaded {} articles", corpus.len());
    Ok((manifest, corpus))
}

fn corpus_stats(manifest: &Manifest, corpus: &Corpus) -> anyhow::Result<Value> {
    let sentiment = corpus_sentiment_stats(corpus)?;
    let mut stances = BTreeMap::new();
    for q in manifest.question_ids() {
        let (favor, against) = stance_counts(corpus, &q)?;
        stances.insert(
            q.as_str().to_string(),
            json!({ "favor": favor, "against": against, "average": corpus_stance_average(corpus, &q)? }),
        );
    }
    Ok(json!({ "articles": corpus.len(), "sentiment": sentiment, "stance": stances }))
}

fn cmd_ingest(global: &Global, args: IngestArgs, run: &mut Run) -> anyhow::Result<()> {
    let data = match (&args.data, args.synthetic) {
        (Some(dir), None) => DataDir::new(dir),
        (None, Some(n)) => {
            let cfg = SyntheticConfig {
                n_articles: n,
                word_dim: args.word_dim,
                sentence_dim: args.sentence_dim,
                seed: global.seed,
                ..SyntheticConfig::default()
            };
            generate(&cfg)?.write_to(&run.out)?;
            for f in ["corpus.jsonl", "corpus_manifest.json", "graph.tsv", "word_vectors.vec", "sentence_vectors.tsv"] {
                run.record(f);
            }
            DataDir::new(&run.out)
        }
        _ => bail!(Validation("ingest needs exactly one of --data or --synthetic".into())),
    };
    let (manifest, corpus) = load_corpus_dir(&data, Some(args.max_words))?;
    if data.root() != run.out {
        corpus.save_jsonl(run.path("corpus.jsonl"))?;
        run.record("corpus.jsonl");
        manifest.save(run.path("corpus_manifest.json"))?;
        run.record("corpus_manifest.json");
    }
    write_stance_triples(run.path("stance_triples.tsv"), &emit_stance_triples(&corpus))?;
    run.record("stance_triples.tsv");
    let stats = serde_json::to_string_pretty(&corpus_stats(&manifest, &corpus)?)? + "\n";
    run.write("corpus_stats.json", &stats)
}

/// Text recommenders are fit on the full corpus.
fn text_recommender(name: &str, data: &DataDir, corpus: &Corpus) -> anyhow::Result<TextRecommender> {
    Ok(match name {
        "tfidf" => TextRecommender::tfidf(corpus, TfidfConfig::default())?,
        "word2vec" => TextRecommender::word2vec(corpus, &WordVectors::load(data.word_vectors())?)?,
        "docembed" => TextRecommender::docembed(corpus, &SentenceVectors::load(data.sentence_vectors())?)?,
        other => bail!(Validation(format!("unknown text recommender `{other}`"))),
    })
}

fn cmd_simulate(global: &Global, args: SimulateArgs, run: &mut Run) -> anyhow::Result<()> {
    let data = DataDir::new(&args.data);
    let (_, corpus) = load_corpus_dir(&data, None)?;
    let config = SimConfig {
        n_users: args.users,
        latent_bias_kind: args.bias_kind.parse::<BiasKind>()?,
        bias_distribution: args.sim.bias_distribution,
        temperature: args.temperature,
        rounds: args.sim.rounds,
        preview_size: args.sim.preview_size,
        assignment: args.sim.assignment.clone(),
        rng_seed: global.seed,
    };
    config.validate()?;
    let mut built = Vec::new();
    for (arm, name) in [(Arm::Tfidf, "tfidf"), (Arm::Word2vec, "word2vec"), (Arm::Docembed, "docembed")] {
        if config.assignment.iter().any(|&(a, w)| a == arm && w > 0.0) {
            built.push((arm, text_recommender(name, &data, &corpus)?));
        }
    }
    let arms = built
        .iter()
        .fold(ArmRecommenders::new(), |acc, (arm, rec)| acc.with(*arm, rec));
    let sim = simulate(&corpus, &arms, &config)?;
    let log = split_interactions(
        &sim.log,
        SplitConfig {
            train_fraction: args.train_fraction,
            rng_seed: global.seed,
        },
    )?;
    write_interactions(run.path("interactions.tsv"), &log)?;
    run.record("interactions.tsv");
    run.write("users.json", &sim.users_json())
}

fn load_log(data: &DataDir, explicit: Option<&Path>, corpus: &Corpus) -> anyhow::Result<InteractionLog> {
    let path = explicit.map(Path::to_path_buf).unwrap_or_else(|| data.interactions());
    let log = load_interactions(&path, corpus)?;
    if log.records.iter().all(|r| r.split.is_none()) {
        bail!(Validation(format!(
            "{} carries no train/test split; produce it with `simulate`",
            path.display()
        )));
    }
    Ok(log)
}

fn cmd_train(_global: &Global, args: TrainArgs, run: &mut Run) -> anyhow::Result<()> {
    let data = DataDir::new(&args.data);
    let (_, corpus) = load_corpus_dir(&data, None)?;
    let kg = load_kg(data.graph())?;
    let log = load_log(&data, args.interactions.as_deref(), &corpus)?;
    let (model, trace) = train(&kg, &corpus, &log, &args.ripple)?;
    model.save(run.path("model.json"))?;
    run.record("model.json");
    write_training_log(run.path("training_log.csv"), &trace)?;
    run.record("training_log.csv");
    Ok(())
}

fn ripple_model(
    model_file: Option<&Path>,
    kg: &KnowledgeGraph,
    corpus: &Corpus,
    log: &InteractionLog,
    config: &RippleConfig,
) -> anyhow::Result<RippleModel> {
    Ok(match model_file {
        Some(path) => RippleModel::load(path)?,
        None => {
            log::info!("no --model-file; training the knowledge-graph model");
            train(kg, corpus, log, config)?.0
        }
    })
}

fn cmd_evaluate(global: &Global, args: EvaluateArgs, run: &mut Run) -> anyhow::Result<()> {
    let data = DataDir::new(&args.data);
    let (_, corpus) = load_corpus_dir(&data, None)?;
    let log = load_log(&data, args.interactions.as_deref(), &corpus)?;
    let tests = args
        .tests
        .iter()
        .map(|t| t.parse::<TestSet>())
        .collect::<newsbias::Result<Vec<_>>>()?;
    let mut results: Vec<EvalResult> = Vec::new();
    for name in &args.models {
        let mut eval_all = |rec: &dyn Recommender| -> anyhow::Result<()> {
            for &t in &tests {
                let r = evaluate(rec, &log, t)?;
                log::info!("{} on {}: auc={:?}", r.model_name, t.as_str(), r.auc);
                results.push(r);
            }
            Ok(())
        };
        match name.as_str() {
            "ripplenet" => {
                let kg = load_kg(data.graph())?;
                let model = ripple_model(args.model_file.as_deref(), &kg, &corpus, &log, &args.ripple)?;
                eval_all(&RippleRecommender::new(&model, &corpus, &kg))?;
            }
            "random" => eval_all(&RandomRecommender::new(global.seed))?,
            other => eval_all(&text_recommender(other, &data, &corpus)?)?,
        }
    }
    run.write("results.json", &(serde_json::to_string_pretty(&results)? + "\n"))?;
    run.write("results.md", &render_results_markdown(&results))
}

fn audit_users(log: &InteractionLog, users_from: &str) -> anyhow::Result<Vec<UserHistory>> {
    let histories = train_histories(log);
    let wanted: Option<std::collections::BTreeSet<&str>> = match users_from {
        "all" => None,
        t => {
            let set: TestSet = t.parse()?;
            Some(set.records(log).iter().map(|r| r.user_id.as_str()).collect())
        }
    };
    Ok(histories
        .into_values()
        .filter(|h| wanted.as_ref().is_none_or(|w| w.contains(h.user_id.as_str())))
        .collect())
}

fn cmd_audit(global: &Global, args: AuditArgs, run: &mut Run) -> anyhow::Result<()> {
    let data = DataDir::new(&args.data);
    let (manifest, corpus) = load_corpus_dir(&data, None)?;
    let log = load_log(&data, args.interactions.as_deref(), &corpus)?;
    let questions: Vec<QuestionId> = match &args.questions {
        Some(qs) => qs.iter().map(|q| q.parse()).collect::<newsbias::Result<_>>()?,
        None => manifest.question_ids(),
    };
    let mut kinds = vec![BiasKind::Sentiment];
    kinds.extend(questions.into_iter().map(BiasKind::Stance));
    let config = AuditConfig {
        k: args.k,
        epsilon: args.epsilon,
        kinds,
        test_set: args.users_from.clone(),
    };
    let users = audit_users(&log, &args.users_from)?;
    log::info!("auditing {} users", users.len());
    let report: BiasReport = match args.model.as_str() {
        "ripplenet" => {
            let kg = load_kg(data.graph())?;
            let model = ripple_model(args.model_file.as_deref(), &kg, &corpus, &log, &args.ripple)?;
            audit(&RippleRecommender::new(&model, &corpus, &kg), &users, &corpus, &config)?
        }
        "random" => audit(&RandomRecommender::new(global.seed), &users, &corpus, &config)?,
        other => audit(&text_recommender(other, &data, &corpus)?, &users, &corpus, &config)?,
    };
    run.write("report.json", &report.to_json())?;
    run.write("report.md", &render_markdown(&report))
}

fn cmd_report(_global: &Global, args: ReportArgs, run: &mut Run) -> anyhow::Result<()> {
    let mut found = false;
    let report_path = args.input.join("report.json");
    if report_path.exists() {
        let text = std::fs::read_to_string(&report_path)?;
        let report: BiasReport =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", report_path.display()))?;
        run.write("report.md", &render_markdown(&report))?;
        found = true;
    }
    let results_path = args.input.join("results.json");
    if results_path.exists() {
        let text = std::fs::read_to_string(&results_path)?;
        let results: Vec<EvalResult> =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", results_path.display()))?;
        run.write("results.md", &render_results_markdown(&results))?;
        found = true;
    }
    if !found {
        bail!(Validation(format!(
            "{} holds neither report.json nor results.json",
            args.input.display()
        )));
    }
    Ok(())
}
