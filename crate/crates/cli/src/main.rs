mod query;

use std::io;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use titl_core::embeddings::train_with_report;
use titl_core::{
    build_index, load_corpus, load_index, load_model, save_index, save_model, Hyperparams,
    SearchEngine, SearchMode, TokenizerConfig,
};
use titl_service::ServiceConfig;

#[derive(Parser)]
#[command(name = "titl", version, about = "Teacher-in-the-loop corpus search")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train subword skip-gram word vectors on a corpus.
    Train(TrainArgs),
    /// Compute and store a vector for every corpus sentence.
    Index(IndexArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
    /// Interactive relevance-feedback search in the terminal.
    Query(QueryArgs),
}

#[derive(Args, Clone, Copy)]
struct TokenizerArgs {
    /// Lowercase tokens.
    #[arg(long)]
    lowercase: bool,
    /// Strip . , ; : ! ? " ( ) [ ] from token edges (apostrophes are kept).
    #[arg(long)]
    strip_punctuation: bool,
}

impl From<TokenizerArgs> for TokenizerConfig {
    fn from(a: TokenizerArgs) -> Self {
        TokenizerConfig {
            lowercase: a.lowercase,
            strip_punctuation: a.strip_punctuation,
        }
    }
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = Hyperparams::default().dim)]
    dim: u32,
    #[arg(long, default_value_t = Hyperparams::default().window)]
    window: u32,
    #[arg(long, default_value_t = Hyperparams::default().negatives)]
    negatives: u32,
    #[arg(long, default_value_t = Hyperparams::default().epochs)]
    epochs: u32,
    #[arg(long, default_value_t = Hyperparams::default().lr0)]
    lr: f64,
    #[arg(long, default_value_t = Hyperparams::default().ngram_min)]
    ngram_min: u32,
    #[arg(long, default_value_t = Hyperparams::default().ngram_max)]
    ngram_max: u32,
    #[arg(long, default_value_t = Hyperparams::default().buckets)]
    buckets: u64,
    #[arg(long, default_value_t = Hyperparams::default().min_count)]
    min_count: u32,
    #[arg(long, default_value_t = Hyperparams::default().subsample_t)]
    subsample: f64,
    #[arg(long, default_value_t = Hyperparams::default().seed)]
    seed: u64,
    #[command(flatten)]
    tokenizer: TokenizerArgs,
}

impl TrainArgs {
    fn hyperparams(&self) -> Hyperparams {
        Hyperparams {
            dim: self.dim,
            window: self.window,
            negatives: self.negatives,
            epochs: self.epochs,
            lr0: self.lr,
            ngram_min: self.ngram_min,
            ngram_max: self.ngram_max,
            buckets: self.buckets,
            min_count: self.min_count,
            subsample_t: self.subsample,
            seed: self.seed,
        }
    }
}

#[derive(Args)]
struct IndexArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    tokenizer: TokenizerArgs,
}

#[derive(Args)]
struct ServeArgs {
    /// TOML config file; flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    bind: Option<String>,
    #[arg(long)]
    index: Option<PathBuf>,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    snapshot: Option<PathBuf>,
    #[arg(long)]
    ttl_secs: Option<u64>,
    /// Allowed CORS origin; repeatable. Replaces the configured list.
    #[arg(long = "cors-origin")]
    cors_origins: Vec<String>,
    #[command(flatten)]
    tokenizer: TokenizerArgs,
}

#[derive(Args)]
struct QueryArgs {
    #[arg(long)]
    index: PathBuf,
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value = "embedding")]
    mode: String,
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long)]
    alpha: Option<f64>,
    #[command(flatten)]
    tokenizer: TokenizerArgs,
}

type CliResult = Result<(), Box<dyn std::error::Error>>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    tracing_subscriber::fmt()
        .with_writer(io::stderr)
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| "info".into()),
        )
        .init();
    let result = match cli.command {
        Command::Train(args) => train_cmd(&args),
        Command::Index(args) => index_cmd(&args),
        Command::Serve(args) => serve_cmd(args),
        Command::Query(args) => query_cmd(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn train_cmd(args: &TrainArgs) -> CliResult {
    let hp = args.hyperparams();
    hp.validate()?;
    let corpus = load_corpus(&args.corpus, args.tokenizer.into())?;
    let started = Instant::now();
    let (model, report) = train_with_report(&corpus, &hp)?;
    save_model(&model, &args.out)?;
    eprintln!("trained in {:.1}s", started.elapsed().as_secs_f64());
    println!("vocab_size\t{}", report.vocab_size);
    println!("token_count\t{}", report.token_count);
    println!("final_mean_loss\t{:.6}", report.final_loss());
    Ok(())
}

fn index_cmd(args: &IndexArgs) -> CliResult {
    let corpus = load_corpus(&args.corpus, args.tokenizer.into())?;
    let model = load_model(&args.model)?;
    let index = build_index(&model, &corpus);
    save_index(&index, &args.out)?;
    println!("sentences\t{}", index.len());
    Ok(())
}

fn serve_cmd(args: ServeArgs) -> CliResult {
    let mut config = match &args.config {
        Some(path) => ServiceConfig::from_file(path)?,
        None => ServiceConfig::default(),
    };
    if let Some(bind) = args.bind {
        config.bind = bind;
    }
    if let Some(index) = args.index {
        config.index_path = index;
    }
    if let Some(model) = args.model {
        config.model_path = model;
    }
    if let Some(k) = args.k {
        config.default_k = k;
    }
    if let Some(mode) = args.mode {
        config.default_mode = mode;
    }
    if let Some(alpha) = args.alpha {
        config.default_alpha = alpha;
    }
    if let Some(snapshot) = args.snapshot {
        config.snapshot_path = Some(snapshot);
    }
    if let Some(ttl) = args.ttl_secs {
        config.session_ttl_secs = ttl;
    }
    if !args.cors_origins.is_empty() {
        config.cors_origins = args.cors_origins;
    }
    config.lowercase |= args.tokenizer.lowercase;
    config.strip_punctuation |= args.tokenizer.strip_punctuation;

    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()?;
    runtime.block_on(titl_service::run(config))?;
    Ok(())
}

fn query_cmd(args: &QueryArgs) -> CliResult {
    let mode = SearchMode::parse(&args.mode, args.alpha)?;
    let index = load_index(&args.index)?;
    let model = load_model(&args.model)?;
    let engine = SearchEngine::new(index, Arc::new(model), args.tokenizer.into())?;
    let stdin = io::stdin();
    let stdout = io::stdout();
    query::run(&engine, mode, args.k, &mut stdin.lock(), &mut stdout.lock())?;
    Ok(())
}
