//! Command-line front end: synthetic data, corpus building, training,
//! vector queries, prediction, hybrid fitting, and evaluation.

mod manifest;

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use log::info;
use serde_json::json;

use reprrec::corpus::{
    build_sentences, build_vocabulary, parse_metadata, parse_ratings, parse_tags, read_sentences,
    write_sentences, EntityToken, Namespace, RatingScale, Vocabulary, DEFAULT_MAX_ACTORS,
};
use reprrec::embedding::{
    load_embeddings, save_embeddings, train, EmbeddingConfig, LossKind, ModelKind,
};
use reprrec::eval::{evaluate, format_table, Dataset, EmbeddingPoint, EvalConfig, DEFAULT_KS};
use reprrec::hybrid::{fit_weights, HybridWeights};
use reprrec::recommender::{
    Model, NeighborOrder, Predictor, PredictorSpec, RatingsStore, SimilaritySource,
};
use reprrec::synth::{generate, write_fixture, SynthConfig};
use reprrec::vectorspace::{
    combine, format_json_lines, format_table as format_neighbors, nearest, ArithmeticQuery,
    RepresentationStore,
};

pub use manifest::{FileEntry, RunManifest, Timing};

/// Environment variable selecting the log level (error, info, debug).
pub const LOG_ENV: &str = "REPRREC_LOG";

#[derive(Debug, Parser)]
#[command(
    name = "reprrec",
    version,
    about = "Entity embeddings for collaborative filtering"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic fixture with planted clusters.
    Synth(SynthArgs),
    /// Build artificial sentences and the vocabulary from input files.
    Corpus(CorpusArgs),
    /// Train CBOW or Skip-gram representations over a sentence file.
    Train(TrainArgs),
    /// Nearest-neighbor and analogy queries over an embedding file.
    Query(QueryArgs),
    /// Predict ratings for (user, movie) pairs.
    Predict(PredictArgs),
    /// Fit hybrid blend weights from component predictions.
    FitHybrid(FitHybridArgs),
    /// Run the full tuning and cross-validation protocol.
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Output directory for ratings.csv, tags.csv, metadata.tsv, clusters.tsv.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 200)]
    pub users: usize,
    #[arg(long, default_value_t = 80)]
    pub movies: usize,
    #[arg(long, default_value_t = 4)]
    pub clusters: usize,
    #[arg(long, default_value_t = 15)]
    pub min_ratings: usize,
    #[arg(long, default_value_t = 40)]
    pub max_ratings: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Ratings CSV: userId,movieId,rating[,timestamp].
    #[arg(long)]
    pub ratings: PathBuf,
    /// Tags CSV: userId,movieId,tag[,timestamp].
    #[arg(long)]
    pub tags: Option<PathBuf>,
    /// Metadata TSV: movieId, director, actors separated by '|'.
    #[arg(long)]
    pub metadata: Option<PathBuf>,
    /// Actors kept per movie, in billing order.
    #[arg(long, default_value_t = DEFAULT_MAX_ACTORS)]
    pub max_actors: usize,
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Sentence file to write, one sentence per line.
    #[arg(long)]
    pub sentences: PathBuf,
    /// Vocabulary file to write, "token count" per line.
    #[arg(long)]
    pub vocab: PathBuf,
    /// Drop tokens seen fewer times than this.
    #[arg(long, default_value_t = 1)]
    pub min_count: u64,
    /// Manifest path; defaults to <sentences>.manifest.json.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModelArg {
    Cbow,
    Sg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum LossArg {
    Ns,
    Hs,
    Exact,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub sentences: PathBuf,
    #[arg(long)]
    pub vocab: PathBuf,
    /// Embedding file to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Flat "key = value" config file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub model: Option<ModelArg>,
    #[arg(long, value_enum)]
    pub loss: Option<LossArg>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Negative samples per example (negative sampling only).
    #[arg(long)]
    pub negatives: Option<usize>,
    /// Initial learning rate; defaults to 0.05 (cbow) or 0.025 (sg).
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub lr_final: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Manifest path; defaults to <out>.manifest.json.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    #[command(subcommand)]
    pub query: QueryKind,
}

#[derive(Debug, Args)]
pub struct QueryOutput {
    /// Embedding file to query.
    #[arg(long)]
    pub embeddings: PathBuf,
    /// Restrict results to one entity type (user, movie, director, actor, tag).
    #[arg(long = "type")]
    pub entity_type: Option<String>,
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    /// Emit JSON lines instead of a table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Subcommand)]
pub enum QueryKind {
    /// The k tokens most similar to TOKEN (canonical form, e.g. m:1).
    Similar {
        token: String,
        #[command(flatten)]
        output: QueryOutput,
    },
    /// Vector arithmetic: sum of --plus minus sum of --minus.
    Analogy {
        /// Comma-separated tokens to add.
        #[arg(long, value_delimiter = ',', required = true)]
        plus: Vec<String>,
        /// Comma-separated tokens to subtract.
        #[arg(long, value_delimiter = ',')]
        minus: Vec<String>,
        #[command(flatten)]
        output: QueryOutput,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum OrderArg {
    FilterFirst,
    TopkFirst,
}

impl From<OrderArg> for NeighborOrder {
    fn from(order: OrderArg) -> Self {
        match order {
            OrderArg::FilterFirst => NeighborOrder::FilterFirst,
            OrderArg::TopkFirst => NeighborOrder::TopKFirst,
        }
    }
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Training ratings CSV.
    #[arg(long)]
    pub ratings: PathBuf,
    /// Pairs CSV: userId,movieId per line.
    #[arg(long)]
    pub pairs: PathBuf,
    /// ubcf, ibcf, ubcb, ibcb, ubsg, ibsg, or hybrid.
    #[arg(long)]
    pub model: String,
    /// Neighborhood size; "all" for no limit.
    #[arg(long, default_value = "20", value_parser = parse_k)]
    pub k: usize,
    /// CBOW embedding file (ubcb, ibcb).
    #[arg(long)]
    pub cbow: Option<PathBuf>,
    /// Skip-gram embedding file (ubsg, ibsg).
    #[arg(long)]
    pub sg: Option<PathBuf>,
    /// Hybrid weights file (hybrid).
    #[arg(long)]
    pub weights: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "filter-first")]
    pub order: OrderArg,
    /// Prediction CSV to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Manifest path; defaults to <out>.manifest.json.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitHybridArgs {
    /// CSV with a header of model names followed by "rating"; one row per
    /// tuning pair.
    #[arg(long)]
    pub rows: PathBuf,
    /// Weights file to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Manifest path; defaults to <out>.manifest.json.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Comma-separated models to evaluate.
    #[arg(long, default_value = "ubcf,ibcf,ubcb,ibcb,ubsg,ibsg")]
    pub models: String,
    /// Neighborhood sizes, comma separated; "all" for no limit.
    #[arg(long, value_delimiter = ',', value_parser = parse_k)]
    pub ks: Vec<usize>,
    /// Representation lengths to tune over, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "100")]
    pub dims: Vec<usize>,
    /// Training epochs to tune over, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "5")]
    pub epochs: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    pub window: usize,
    #[arg(long, default_value_t = 5)]
    pub negatives: usize,
    /// Initial learning rate for both models; defaults per model.
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long, value_enum, default_value = "filter-first")]
    pub order: OrderArg,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// JSON report to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the text table here (it is always printed).
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Manifest path; defaults to <out>.manifest.json.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

fn parse_k(text: &str) -> std::result::Result<usize, String> {
    if text.eq_ignore_ascii_case("all") {
        return Ok(usize::MAX);
    }
    match text.parse::<usize>() {
        Ok(0) | Err(_) => Err(format!("invalid neighborhood size {text:?}")),
        Ok(k) => Ok(k),
    }
}

pub fn init_logging() {
    let env = env_logger::Env::new().filter_or(LOG_ENV, "warn");
    let _ = env_logger::Builder::from_env(env)
        .format_timestamp(None)
        .try_init();
}

/// Parses arguments and runs the selected subcommand. Usage errors exit
/// through clap.
pub fn run_from_args<I, T>(args: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::parse_from(args);
    run(cli)
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth(args) => cmd_synth(args),
        Command::Corpus(args) => cmd_corpus(args),
        Command::Train(args) => cmd_train(args),
        Command::Query(args) => cmd_query(args),
        Command::Predict(args) => cmd_predict(args),
        Command::FitHybrid(args) => cmd_fit_hybrid(args),
        Command::Evaluate(args) => cmd_evaluate(args),
    }
}

fn open(path: &Path, what: &str, hint: &str) -> Result<BufReader<File>> {
    if !path.exists() {
        bail!("{what} {} does not exist; {hint}", path.display());
    }
    let file =
        File::open(path).with_context(|| format!("cannot open {what} {}", path.display()))?;
    Ok(BufReader::new(file))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)
            .with_context(|| format!("cannot create {}", parent.display()))?;
    }
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn manifest_path(explicit: &Option<PathBuf>, primary: &Path) -> PathBuf {
    explicit.clone().unwrap_or_else(|| {
        let mut name = primary.as_os_str().to_owned();
        name.push(".manifest.json");
        PathBuf::from(name)
    })
}

struct Loaded {
    ratings: Vec<reprrec::corpus::RatingRecord>,
    tags: Vec<reprrec::corpus::TagRecord>,
    metadata: Vec<reprrec::corpus::ItemMetadata>,
    files: Vec<PathBuf>,
}

fn load_inputs(input: &InputArgs) -> Result<Loaded> {
    let hint = "pass an existing file (or run `reprrec synth` to generate one)";
    let ratings = parse_ratings(
        open(&input.ratings, "ratings file", hint)?,
        RatingScale::MOVIELENS,
    )
    .with_context(|| format!("in {}", input.ratings.display()))?;
    let mut files = vec![input.ratings.clone()];
    let tags = match &input.tags {
        Some(path) => {
            files.push(path.clone());
            parse_tags(open(path, "tags file", hint)?)
                .with_context(|| format!("in {}", path.display()))?
        }
        None => Vec::new(),
    };
    let metadata = match &input.metadata {
        Some(path) => {
            files.push(path.clone());
            parse_metadata(open(path, "metadata file", hint)?)
                .with_context(|| format!("in {}", path.display()))?
        }
        None => Vec::new(),
    };
    Ok(Loaded {
        ratings,
        tags,
        metadata,
        files,
    })
}

fn cmd_synth(args: SynthArgs) -> Result<()> {
    let mut manifest = RunManifest::new("synth", Some(args.seed));
    let config = SynthConfig {
        users: args.users,
        movies: args.movies,
        clusters: args.clusters,
        min_ratings: args.min_ratings,
        max_ratings: args.max_ratings,
        seed: args.seed,
        ..Default::default()
    };
    let start = Instant::now();
    let data = generate(&config)?;
    manifest.time("generate", start);
    let start = Instant::now();
    let paths = write_fixture(&data, &args.out)
        .with_context(|| format!("cannot write {}", args.out.display()))?;
    manifest.time("write", start);
    manifest.config = json!({
        "users": args.users,
        "movies": args.movies,
        "clusters": args.clusters,
        "min_ratings": args.min_ratings,
        "max_ratings": args.max_ratings,
    });
    for path in &paths {
        manifest.output(path)?;
    }
    manifest.write(&args.out.join("manifest.json"))?;
    println!(
        "{} ratings, {} tags, {} movies written to {}",
        data.ratings.len(),
        data.tags.len(),
        data.metadata.len(),
        args.out.display()
    );
    Ok(())
}

fn cmd_corpus(args: CorpusArgs) -> Result<()> {
    let mut manifest = RunManifest::new("corpus", None);
    let start = Instant::now();
    let loaded = load_inputs(&args.input)?;
    manifest.time("parse", start);
    let start = Instant::now();
    let sentences = build_sentences(
        &loaded.ratings,
        &loaded.tags,
        &loaded.metadata,
        args.input.max_actors,
    );
    let vocabulary = build_vocabulary(&sentences, args.min_count)?;
    manifest.time("build", start);
    let mut sink = create(&args.sentences)?;
    write_sentences(&sentences, &mut sink)?;
    sink.flush()?;
    let mut sink = create(&args.vocab)?;
    vocabulary.write(&mut sink)?;
    sink.flush()?;
    for path in &loaded.files {
        manifest.input(path)?;
    }
    manifest.output(&args.sentences)?;
    manifest.output(&args.vocab)?;
    manifest.config = json!({ "max_actors": args.input.max_actors, "min_count": args.min_count });
    manifest.write(&manifest_path(&args.manifest, &args.sentences))?;
    println!(
        "{} sentences, {} vocabulary tokens",
        sentences.len(),
        vocabulary.len()
    );
    Ok(())
}

fn training_config(args: &TrainArgs) -> Result<EmbeddingConfig> {
    let mut config = EmbeddingConfig::default();
    if let Some(path) = &args.config {
        config.apply_kv(open(path, "config file", "check the --config path")?)?;
    }
    if let Some(model) = args.model {
        config.model = match model {
            ModelArg::Cbow => ModelKind::Cbow,
            ModelArg::Sg => ModelKind::SkipGram,
        };
        if args.lr.is_none() {
            config.lr_initial = EmbeddingConfig::default_lr(config.model);
        }
    }
    if let Some(loss) = args.loss {
        config.loss = match loss {
            LossArg::Ns => LossKind::NegativeSampling,
            LossArg::Hs => LossKind::HierarchicalSoftmax,
            LossArg::Exact => LossKind::ExactSoftmax,
        };
    }
    if args.negatives.is_some() && config.loss != LossKind::NegativeSampling {
        Cli::command()
            .error(
                clap::error::ErrorKind::ArgumentConflict,
                format!(
                    "--negatives only applies to --loss ns (loss is {})",
                    config.loss
                ),
            )
            .exit();
    }
    let set = |slot: &mut usize, value: Option<usize>| {
        if let Some(v) = value {
            *slot = v;
        }
    };
    set(&mut config.dim, args.dim);
    set(&mut config.window, args.window);
    set(&mut config.epochs, args.epochs);
    set(&mut config.negatives, args.negatives);
    set(&mut config.workers, args.workers);
    if let Some(lr) = args.lr {
        config.lr_initial = lr;
    }
    if let Some(lr) = args.lr_final {
        config.lr_final = lr;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    config.validate()?;
    Ok(config)
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    let config = training_config(&args)?;
    let mut manifest = RunManifest::new("train", Some(config.seed));
    let hint = "run `reprrec corpus` first";
    let start = Instant::now();
    let sentences = read_sentences(open(&args.sentences, "sentence file", hint)?)?;
    let vocabulary = Vocabulary::read(open(&args.vocab, "vocabulary file", hint)?)?;
    manifest.time("load", start);
    let start = Instant::now();
    let model = train(&sentences, &vocabulary, &config)?;
    manifest.time("train", start);
    let mut sink = create(&args.out)?;
    save_embeddings(&model, &mut sink)?;
    sink.flush()?;
    manifest.input(&args.sentences)?;
    manifest.input(&args.vocab)?;
    if let Some(path) = &args.config {
        manifest.input(path)?;
    }
    manifest.output(&args.out)?;
    manifest.config = serde_json::to_value(&config)?;
    manifest.write(&manifest_path(&args.manifest, &args.out))?;
    println!(
        "{} vectors of dimension {} written to {}",
        vocabulary.len(),
        config.dim,
        args.out.display()
    );
    Ok(())
}

fn parse_token(text: &str) -> Result<EntityToken> {
    text.trim()
        .parse::<EntityToken>()
        .with_context(|| format!("invalid token {text:?}; expected <prefix>:<id> such as m:1"))
}

fn cmd_query(args: QueryArgs) -> Result<()> {
    let output = match &args.query {
        QueryKind::Similar { output, .. } | QueryKind::Analogy { output, .. } => output,
    };
    let filter = output
        .entity_type
        .as_deref()
        .map(str::parse::<Namespace>)
        .transpose()?;
    let store = load_embeddings(open(
        &output.embeddings,
        "embedding file",
        "run `reprrec train` first",
    )?)?;
    let neighbors = match &args.query {
        QueryKind::Similar { token, .. } => {
            let token = parse_token(token)?;
            let vector = store
                .vector(&token)
                .ok_or_else(|| anyhow::anyhow!("unknown token {token}"))?
                .to_vec();
            let exclude: HashSet<EntityToken> = [token.clone()].into_iter().collect();
            nearest(&store, &vector, output.k, filter, &exclude)
                .with_context(|| format!("cannot query {token}"))?
        }
        QueryKind::Analogy { plus, minus, .. } => {
            let plus = plus
                .iter()
                .map(|t| parse_token(t))
                .collect::<Result<Vec<_>>>()?;
            let minus = minus
                .iter()
                .map(|t| parse_token(t))
                .collect::<Result<Vec<_>>>()?;
            let query = ArithmeticQuery::new(plus, minus, output.k).with_filter(filter);
            combine(&query, &store)?.1
        }
    };
    if output.json {
        print!("{}", format_json_lines(&neighbors));
    } else {
        print!("{}", format_neighbors(&neighbors));
    }
    Ok(())
}

fn read_pairs(path: &Path) -> Result<Vec<(EntityToken, EntityToken)>> {
    let reader = open(path, "pairs file", "write userId,movieId lines")?;
    let mut pairs = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || (i == 0 && line.starts_with("userId")) {
            continue;
        }
        let mut fields = line.split(',');
        let (Some(user), Some(movie)) = (fields.next(), fields.next()) else {
            bail!("{}:{}: expected userId,movieId", path.display(), i + 1);
        };
        pairs.push((
            EntityToken::user(user.trim()),
            EntityToken::movie(movie.trim()),
        ));
    }
    Ok(pairs)
}

fn load_representation(
    path: &Option<PathBuf>,
    flag: &str,
    model: Model,
    manifest: &mut RunManifest,
) -> Result<Arc<RepresentationStore>> {
    let path = path.as_ref().ok_or_else(|| {
        anyhow::anyhow!("{model} needs {flag} <embedding file> (produce one with `reprrec train`)")
    })?;
    let store = load_embeddings(open(path, "embedding file", "run `reprrec train` first")?)?;
    manifest.input(path)?;
    Ok(Arc::new(store))
}

fn component_predictions(
    model: Model,
    args: &PredictArgs,
    store: &RatingsStore,
    pairs: &[(EntityToken, EntityToken)],
    manifest: &mut RunManifest,
) -> Result<Vec<f64>> {
    let source = match model.representation() {
        None => SimilaritySource::RatingVectors,
        Some(ModelKind::Cbow) => SimilaritySource::Embeddings(load_representation(
            &args.cbow, "--cbow", model, manifest,
        )?),
        Some(ModelKind::SkipGram) => {
            SimilaritySource::Embeddings(load_representation(&args.sg, "--sg", model, manifest)?)
        }
    };
    let mut spec = PredictorSpec::new(model.target(), source, args.k);
    spec.order = args.order.into();
    let predictor = Predictor::new(&spec, store);
    Ok(predictor
        .predict_batch_tokens(pairs)
        .iter()
        .map(|p| p.value)
        .collect())
}

fn cmd_predict(args: PredictArgs) -> Result<()> {
    let mut manifest = RunManifest::new("predict", None);
    let hint = "pass an existing ratings CSV";
    let records = parse_ratings(
        open(&args.ratings, "ratings file", hint)?,
        RatingScale::MOVIELENS,
    )
    .with_context(|| format!("in {}", args.ratings.display()))?;
    let store = RatingsStore::from_records(&records, RatingScale::MOVIELENS)?;
    let pairs = read_pairs(&args.pairs)?;
    manifest.input(&args.ratings)?;
    manifest.input(&args.pairs)?;
    let start = Instant::now();
    let values = if args.model.eq_ignore_ascii_case("hybrid") {
        let path = args.weights.as_ref().ok_or_else(|| {
            anyhow::anyhow!("hybrid needs --weights <file> (produce one with `reprrec fit-hybrid`)")
        })?;
        let weights = HybridWeights::read(open(
            path,
            "weights file",
            "run `reprrec fit-hybrid` first",
        )?)?;
        manifest.input(path)?;
        let mut blended = vec![0.0; pairs.len()];
        for &(model, alpha) in weights.entries() {
            if alpha == 0.0 {
                continue;
            }
            let component = component_predictions(model, &args, &store, &pairs, &mut manifest)?;
            for (b, p) in blended.iter_mut().zip(component) {
                *b += alpha * p;
            }
        }
        blended
            .into_iter()
            .map(|v| store.scale().clamp(v))
            .collect()
    } else {
        let model: Model = args.model.parse()?;
        component_predictions(model, &args, &store, &pairs, &mut manifest)?
    };
    manifest.time("predict", start);
    let mut sink = create(&args.out)?;
    writeln!(sink, "userId,movieId,prediction")?;
    for ((user, movie), value) in pairs.iter().zip(&values) {
        writeln!(sink, "{},{},{}", user.raw(), movie.raw(), value)?;
    }
    sink.flush()?;
    manifest.output(&args.out)?;
    manifest.config =
        json!({ "model": args.model, "k": args.k, "order": format!("{:?}", args.order) });
    manifest.write(&manifest_path(&args.manifest, &args.out))?;
    println!(
        "{} predictions written to {}",
        values.len(),
        args.out.display()
    );
    Ok(())
}

fn cmd_fit_hybrid(args: FitHybridArgs) -> Result<()> {
    let mut manifest = RunManifest::new("fit-hybrid", None);
    let reader = open(
        &args.rows,
        "rows file",
        "write a header of model names then rating",
    )?;
    let mut lines = reader.lines();
    let header = lines.next().transpose()?.unwrap_or_default();
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    if columns.len() < 2
        || !columns
            .last()
            .is_some_and(|c| c.eq_ignore_ascii_case("rating"))
    {
        bail!(
            "{}: header must list model names then \"rating\"",
            args.rows.display()
        );
    }
    let models = columns[..columns.len() - 1]
        .iter()
        .map(|c| c.parse::<Model>())
        .collect::<reprrec::Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let values = line
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .with_context(|| format!("{}:{}: invalid number", args.rows.display(), i + 2))?;
        if values.len() != columns.len() {
            bail!(
                "{}:{}: expected {} fields",
                args.rows.display(),
                i + 2,
                columns.len()
            );
        }
        let truth = values[values.len() - 1];
        rows.push((values[..values.len() - 1].to_vec(), truth));
    }
    let start = Instant::now();
    let fit = fit_weights(&rows)?;
    manifest.time("fit", start);
    let weights = HybridWeights::new(
        models
            .iter()
            .copied()
            .zip(fit.weights.iter().copied())
            .collect(),
    )?;
    let mut sink = create(&args.out)?;
    weights.write(&mut sink)?;
    sink.flush()?;
    manifest.input(&args.rows)?;
    manifest.output(&args.out)?;
    manifest.config = json!({ "rows": rows.len(), "rmse": fit.rmse, "iterations": fit.iterations, "converged": fit.converged });
    manifest.write(&manifest_path(&args.manifest, &args.out))?;
    for (model, alpha) in weights.entries() {
        println!("{model} = {alpha:.3}");
    }
    println!("tuning RMSE {:.4} over {} rows", fit.rmse, rows.len());
    Ok(())
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<()> {
    let mut manifest = RunManifest::new("evaluate", Some(args.seed));
    let start = Instant::now();
    let loaded = load_inputs(&args.input)?;
    let mut dataset = Dataset::new(
        &loaded.ratings,
        loaded.tags,
        loaded.metadata,
        RatingScale::MOVIELENS,
    )?;
    dataset.max_actors = args.input.max_actors;
    manifest.time("load", start);

    let mut config = EvalConfig::new(Model::parse_list(&args.models)?);
    config.ks = if args.ks.is_empty() {
        DEFAULT_KS.to_vec()
    } else {
        args.ks.clone()
    };
    config.embedding_grid = args
        .dims
        .iter()
        .flat_map(|&dim| {
            args.epochs
                .iter()
                .map(move |&epochs| EmbeddingPoint { dim, epochs })
        })
        .collect();
    config.embedding.window = args.window;
    config.embedding.negatives = args.negatives;
    config.embedding.seed = args.seed;
    config.embedding.workers = args.workers;
    config.lr = args.lr;
    config.order = args.order.into();

    let start = Instant::now();
    let report = evaluate(&dataset, &config, args.seed)?;
    manifest.time("evaluate", start);
    info!("evaluation scored {} pairs", report.test_pairs);

    let mut sink = create(&args.out)?;
    serde_json::to_writer_pretty(&mut sink, &report)?;
    writeln!(sink)?;
    sink.flush()?;
    let table = format_table(&report);
    print!("{table}");
    for path in &loaded.files {
        manifest.input(path)?;
    }
    manifest.output(&args.out)?;
    if let Some(path) = &args.table {
        let mut sink = create(path)?;
        sink.write_all(table.as_bytes())?;
        sink.flush()?;
        manifest.output(path)?;
    }
    manifest.config = json!({
        "models": config.models,
        "ks": config.ks,
        "embedding_grid": config.embedding_grid,
        "window": args.window,
        "negatives": args.negatives,
        "lr": args.lr,
        "order": format!("{:?}", args.order),
        "workers": args.workers,
        "max_actors": args.input.max_actors,
    });
    manifest.write(&manifest_path(&args.manifest, &args.out))?;
    Ok(())
}
