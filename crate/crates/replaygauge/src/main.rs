use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use replaygauge::config::PipelineConfig;
use replaygauge::experiment::{
    apply_filter, labeled_scores, map_cells, relevance_sets, score_lists, track_lists, train_model,
    Algorithm, CellLabels, ExperimentData, ModelParams, ModelSpec, ScoreSource,
};
use replaygauge::formats::{self, Meta, SavedModel};
use replaygauge::pipeline::run_pipeline;
use replaygauge::report;
use replaygauge_core::classify::{fit_gnb, DEFAULT_VARIANCE_FLOOR};
use replaygauge_core::eval::{composition_report, DenominatorMode, RelevanceCriterion};
use replaygauge_core::postfilter::FilterKind;
use replaygauge_core::recommend::{AlsParams, SgdParams, DEFAULT_NEIGHBORHOOD};
use replaygauge_core::signals::{dataset_stats, map_ratings, summarize_interactions};
use replaygauge_core::synth::{generate, GeneratorConfig};
use replaygauge_core::{EventLog, RatingFunction, TrainingMode};

#[derive(Parser)]
#[command(
    name = "replaygauge",
    version,
    about = "Implicit like/dislike signals, recommenders, post-filters and MAP evaluation for listening logs"
)]
struct Cli {
    /// Upper bound on worker threads.
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(1..))]
    threads: Option<u32>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic log with its ground truth.
    Generate(GenerateArgs),
    /// Print duration, replay, signal and rating statistics of a log.
    Stats(StatsArgs),
    /// Split a log into training, visible and hidden partitions.
    Split(SplitArgs),
    /// Fold a log into per-pair summaries and, optionally, ratings.
    Summarize(SummarizeArgs),
    /// Train a recommender on a log.
    Train(TrainArgs),
    /// Produce top-N lists for the users of a hidden partition.
    Recommend(RecommendArgs),
    /// Fit the like/dislike classifier and score recommendation lists.
    Classify(ClassifyArgs),
    /// Apply RANK, DEL or SWAP to scored lists.
    Filter(FilterArgs),
    /// Compute MAP@k and composition of recommendation lists.
    Evaluate(EvaluateArgs),
    /// Run every stage from a configuration file.
    Pipeline(PipelineArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Output directory for events.csv, truth.csv and generator.meta.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    users: Option<u64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    tracks: Option<u64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    genres: Option<u64>,
    /// Mean events per user.
    #[arg(long)]
    events_per_user: Option<f64>,
    #[arg(long)]
    skip_probability: Option<f64>,
    #[arg(long)]
    replay_rate: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct StatsArgs {
    log: PathBuf,
    /// Rating functions whose histograms are added, e.g. `f1,f3`.
    #[arg(long, value_delimiter = ',')]
    ratings: Vec<RatingFunction>,
    /// Also write the tables as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct SplitParams {
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    min_events: u64,
    #[arg(long, default_value_t = 0.45)]
    group_b_fraction: f64,
    #[arg(long, default_value_t = 0.5)]
    holdout_fraction: f64,
}

#[derive(Args)]
struct SplitArgs {
    log: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    params: SplitParams,
}

#[derive(Args)]
struct SummarizeArgs {
    log: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Rating function for the optional ratings file.
    #[arg(long, requires = "ratings_out")]
    ratings: Option<RatingFunction>,
    #[arg(long)]
    ratings_out: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    /// Training log.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    algorithm: Algorithm,
    /// Input mode for popularity, knn and als.
    #[arg(long)]
    mode: Option<TrainingMode>,
    /// Rating function for mf_sgd.
    #[arg(long, default_value = "f3")]
    rating_fn: RatingFunction,
    #[arg(long, default_value_t = DEFAULT_NEIGHBORHOOD)]
    neighborhood: usize,
    #[arg(long)]
    factors: Option<usize>,
    /// Epochs (mf_sgd) or sweeps (als).
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    regularization: Option<f64>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    confidence: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RecommendArgs {
    #[arg(long)]
    model: PathBuf,
    /// Hidden partition; its users receive lists.
    #[arg(long)]
    hidden: PathBuf,
    /// Visible partition; its tracks are excluded per user.
    #[arg(long)]
    visible: PathBuf,
    #[arg(long, default_value_t = 500, value_parser = clap::value_parser!(u64).range(1..))]
    n: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ClassifyArgs {
    /// SGD factorization model producing estimated ratings.
    #[arg(long)]
    model: PathBuf,
    /// Visible partition supplying the labeled pairs.
    #[arg(long)]
    visible: PathBuf,
    /// Recommendation lists to score.
    #[arg(long)]
    recs: PathBuf,
    #[arg(long, default_value = "f3")]
    rating_fn: RatingFunction,
    #[arg(long, default_value = "estimated")]
    score_source: ScoreSource,
    #[arg(long, default_value_t = DEFAULT_VARIANCE_FLOOR)]
    variance_floor: f64,
    /// Scored lists (`user,rank,track,score,dislike`).
    #[arg(long)]
    out: PathBuf,
    /// Classifier parameters.
    #[arg(long)]
    classifier_out: PathBuf,
}

#[derive(Args)]
struct FilterArgs {
    #[arg(long)]
    scored: PathBuf,
    #[arg(long)]
    filter: FilterKind,
    /// SWAP threshold.
    #[arg(long, conflicts_with = "classifier")]
    alpha: Option<f64>,
    /// Classifier file whose default threshold SWAP uses.
    #[arg(long)]
    classifier: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    recs: PathBuf,
    #[arg(long)]
    hidden: PathBuf,
    #[arg(long)]
    visible: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "10,100,500")]
    ranks: Vec<usize>,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "events,streams,likes,skips,dislikes"
    )]
    criteria: Vec<RelevanceCriterion>,
    #[arg(long, default_value = "adapted")]
    denominator: DenominatorMode,
    #[arg(long, default_value_t = 10)]
    composition_rank: usize,
    /// Labels written into the report cells.
    #[arg(long, default_value = "")]
    algorithm: String,
    #[arg(long, default_value = "")]
    input_mode: String,
    #[arg(long, default_value = "")]
    rating_fn: String,
    #[arg(long, default_value = "none")]
    filter_label: String,
    /// MAP cells as CSV; printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PipelineArgs {
    /// Configuration file of `section.key=value` lines.
    config: PathBuf,
    /// Overrides, e.g. `--set filter.kinds=none,del`.
    #[arg(long = "set")]
    overrides: Vec<String>,
}

fn load_log(path: &Path) -> Result<EventLog> {
    Ok(formats::load_event_log(path)?)
}

fn check_fraction(flag: &str, value: f64) -> Result<()> {
    if !(value > 0.0 && value < 1.0) {
        bail!("{flag} must lie strictly between 0 and 1, got {value}");
    }
    Ok(())
}

fn cmd_generate(args: GenerateArgs) -> Result<()> {
    let mut config = GeneratorConfig::default();
    if let Some(u) = args.users {
        config.user_count = u as usize;
    }
    if let Some(t) = args.tracks {
        config.track_count = t as usize;
    }
    if let Some(g) = args.genres {
        config.genre_count = g as usize;
    }
    if let Some(e) = args.events_per_user {
        if e.is_nan() || e < 1.0 {
            bail!("--events-per-user must be at least 1, got {e}");
        }
        config.events_per_user_mean = e;
    }
    for (flag, value, slot) in [
        (
            "--skip-probability",
            args.skip_probability,
            &mut config.skip_probability_given_dislike,
        ),
        (
            "--replay-rate",
            args.replay_rate,
            &mut config.replay_rate_given_like,
        ),
    ] {
        if let Some(p) = value {
            if !(0.0..=1.0).contains(&p) {
                bail!("{flag} must lie in [0, 1], got {p}");
            }
            *slot = p;
        }
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    let (log, truth) = generate(&config)?;
    formats::write_file(&args.out.join("events.csv"), |w| {
        formats::write_event_log(w, &log)
    })?;
    formats::write_file(&args.out.join("truth.csv"), |w| {
        formats::write_truth(w, &truth)
    })?;
    formats::write_file(&args.out.join("generator.meta"), |w| {
        generator_meta(&config).write(w)
    })?;
    println!("events={} users={}", log.len(), log.user_count());
    Ok(())
}

fn generator_meta(c: &GeneratorConfig) -> Meta {
    let mut m = Meta::default();
    m.push("format_version", formats::FORMAT_VERSION)
        .push("seed", c.seed)
        .push("users", c.user_count)
        .push("tracks", c.track_count)
        .push("genres", c.genre_count)
        .push("events_per_user_mean", c.events_per_user_mean)
        .push("events_per_user_cv", c.events_per_user_cv)
        .push("min_events_per_user", c.min_events_per_user)
        .push("secondary_weight_min", c.secondary_weight.0)
        .push("secondary_weight_max", c.secondary_weight.1)
        .push("genre_noise", c.genre_noise)
        .push("quality_min", c.quality.0)
        .push("quality_max", c.quality.1)
        .push("like_threshold", c.like_threshold)
        .push("popularity_exponent", c.popularity_exponent)
        .push("affinity_softening", c.affinity_softening)
        .push("affinity_sharpness", c.affinity_sharpness)
        .push(
            "skip_probability_given_dislike",
            c.skip_probability_given_dislike,
        )
        .push("replay_rate_given_like", c.replay_rate_given_like)
        .push("max_replays", c.max_replays)
        .push("track_length_mean", c.track_length_mean)
        .push("track_length_std", c.track_length_std)
        .push("track_length_min", c.track_length_min)
        .push("track_length_max", c.track_length_max);
    m
}

fn cmd_stats(args: StatsArgs) -> Result<()> {
    let log = load_log(&args.log)?;
    let table = summarize_interactions(&log);
    let stats = dataset_stats(&log, &table)?;
    let mut out = std::io::stdout().lock();
    formats::write_stats_text(&mut out, &stats, &args.ratings)?;
    if let Some(path) = &args.csv {
        formats::write_file(path, |w| {
            formats::write_stats_tables(w, &stats, &args.ratings)
        })?;
    }
    Ok(())
}

fn cmd_split(args: SplitArgs) -> Result<()> {
    let p = &args.params;
    check_fraction("--group-b-fraction", p.group_b_fraction)?;
    check_fraction("--holdout-fraction", p.holdout_fraction)?;
    let log = load_log(&args.log)?;
    let params = replaygauge::experiment::ProtocolParams {
        min_events: p.min_events as usize,
        group_b_fraction: p.group_b_fraction,
        holdout_fraction: p.holdout_fraction,
        seed: p.seed,
    };
    let split = replaygauge::experiment::ProtocolSplit::new(&log, &params)?;
    let out = &args.out;
    formats::write_file(&out.join("manifest.csv"), |w| {
        formats::write_manifest(w, &split.groups.assignment)
    })?;
    let mut meta = Meta::default();
    meta.push("seed", p.seed)
        .push("holdout_fraction", p.holdout_fraction)
        .push("group_b_fraction", p.group_b_fraction)
        .push("min_events", p.min_events)
        .push("format_version", formats::FORMAT_VERSION);
    formats::write_file(&out.join("split.meta"), |w| meta.write(w))?;
    formats::write_file(&out.join("train.csv"), |w| {
        formats::write_event_log(w, &split.train_log())
    })?;
    formats::write_file(&out.join("visible.csv"), |w| {
        formats::write_event_log(w, &split.split.visible)
    })?;
    formats::write_file(&out.join("hidden.csv"), |w| {
        formats::write_event_log(w, &split.split.hidden)
    })?;
    println!(
        "group_a_users={} group_b_users={} visible_events={} hidden_events={}",
        split.groups.group_a.user_count(),
        split.groups.group_b.user_count(),
        split.split.visible.len(),
        split.split.hidden.len()
    );
    Ok(())
}

fn cmd_summarize(args: SummarizeArgs) -> Result<()> {
    let log = load_log(&args.log)?;
    let table = summarize_interactions(&log);
    formats::write_file(&args.out, |w| formats::write_summary_table(w, &table))?;
    if let (Some(f), Some(path)) = (args.ratings, &args.ratings_out) {
        formats::write_file(path, |w| formats::write_ratings(w, &map_ratings(&table, f)))?;
    }
    println!("pairs={}", table.len());
    Ok(())
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    let log = load_log(&args.input)?;
    let table = summarize_interactions(&log);
    let default_mode = match args.algorithm {
        Algorithm::Als => TrainingMode::PlayCounts,
        _ => TrainingMode::AllEvents,
    };
    let spec = ModelSpec {
        algorithm: args.algorithm,
        input_mode: args.mode.unwrap_or(default_mode),
        rating_fn: args.rating_fn,
    };
    let sgd = SgdParams::default();
    let als = AlsParams::default();
    let params = ModelParams {
        neighborhood: args.neighborhood,
        sgd: SgdParams {
            factors: args.factors.unwrap_or(sgd.factors),
            epochs: args.iterations.unwrap_or(sgd.epochs),
            regularization: args.regularization.unwrap_or(sgd.regularization),
            learning_rate: args.learning_rate.unwrap_or(sgd.learning_rate),
            seed: args.seed,
        },
        als: AlsParams {
            factors: args.factors.unwrap_or(als.factors),
            sweeps: args.iterations.unwrap_or(als.sweeps),
            regularization: args.regularization.unwrap_or(als.regularization),
            confidence: args.confidence.unwrap_or(als.confidence),
            seed: args.seed,
        },
    };
    let model = train_model(&spec, &table, &params)?;
    formats::write_file(&args.out, |w| formats::save_model(w, &model))?;
    println!("kind={} input={}", model.kind(), spec.input_label());
    Ok(())
}

fn cmd_recommend(args: RecommendArgs) -> Result<()> {
    let model = formats::load_model(formats::open(&args.model)?)
        .with_context(|| format!("reading model {}", args.model.display()))?;
    let data = ExperimentData::from_logs(
        EventLog::default(),
        load_log(&args.visible)?,
        load_log(&args.hidden)?,
    );
    let lists = replaygauge::experiment::recommend_all(&model, &data, args.n as usize)?;
    formats::write_file(&args.out, |w| {
        formats::write_recommendations(w, lists.values())
    })?;
    println!("users={}", lists.len());
    Ok(())
}

fn cmd_classify(args: ClassifyArgs) -> Result<()> {
    let SavedModel::Factor(model) = formats::load_model(formats::open(&args.model)?)? else {
        bail!(
            "{}: classification needs a factorization model",
            args.model.display()
        );
    };
    let visible = summarize_interactions(&load_log(&args.visible)?);
    let gnb = fit_gnb(
        &labeled_scores(&visible, &model, args.rating_fn, args.score_source),
        args.variance_floor,
    )?;
    let lists = formats::read_recommendations(formats::open(&args.recs)?)?;
    let scored = score_lists(&lists, &model, &gnb);
    formats::write_file(&args.classifier_out, |w| formats::save_gnb(w, &gnb))?;
    formats::write_file(&args.out, |w| {
        formats::write_scored_lists(w, scored.values())
    })?;
    let flagged: usize = scored
        .values()
        .map(|l| l.entries.iter().filter(|e| e.dislike).count())
        .sum();
    println!(
        "mu_like={} mu_dislike={} swap_alpha={} flagged={flagged}",
        gnb.like.mean,
        gnb.dislike.mean,
        gnb.default_swap_threshold()
    );
    Ok(())
}

fn cmd_filter(args: FilterArgs) -> Result<()> {
    let alpha = match (args.alpha, &args.classifier) {
        (Some(a), _) => {
            if !a.is_finite() {
                bail!("--alpha must be finite");
            }
            a
        }
        (None, Some(path)) => formats::load_gnb(formats::open(path)?)?.default_swap_threshold(),
        (None, None) if args.filter == FilterKind::Swap => {
            bail!("swap needs --alpha or --classifier")
        }
        (None, None) => f64::INFINITY,
    };
    let scored = formats::read_scored_lists(formats::open(&args.scored)?)?;
    let out = apply_filter(&scored, args.filter.with_alpha(alpha));
    formats::write_file(&args.out, |w| {
        formats::write_filtered_lists(w, out.values())
    })?;
    println!(
        "users={} entries={}",
        out.len(),
        out.values().map(|l| l.entries.len()).sum::<usize>()
    );
    Ok(())
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<()> {
    if args.ranks.contains(&0) || args.composition_rank == 0 {
        bail!("--ranks and --composition-rank must be positive");
    }
    let hidden = summarize_interactions(&load_log(&args.hidden)?);
    let visible = summarize_interactions(&load_log(&args.visible)?);
    let lists = formats::read_recommendations(formats::open(&args.recs)?)?;
    let tracks = track_lists(&lists);
    let relevance = relevance_sets(&hidden, &visible, &args.criteria, args.denominator);
    let labels = CellLabels::new(
        &args.algorithm,
        &args.input_mode,
        &args.rating_fn,
        &args.filter_label,
    );
    let cells = map_cells(&tracks, &relevance, &args.ranks, &labels)?;
    match &args.out {
        Some(path) => formats::write_file(path, |w| report::write_map_csv(w, &cells))?,
        None => report::write_map_csv(&mut std::io::stdout().lock(), &cells)?,
    }
    let c = composition_report(&tracks, &hidden, args.composition_rank)?;
    let pct = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.2}"));
    eprintln!(
        "composition@{} recommended={} events={} streams_pct={} likes_pct={} skips_pct={} dislikes_pct={}",
        args.composition_rank,
        c.recommended,
        c.events,
        pct(c.streams_pct()),
        pct(c.likes_pct()),
        pct(c.skips_pct()),
        pct(c.dislikes_pct())
    );
    Ok(())
}

fn cmd_pipeline(args: PipelineArgs, threads: Option<u32>) -> Result<()> {
    let mut config = PipelineConfig::load(&args.config)?;
    config.apply_overrides(&args.overrides)?;
    if let Some(t) = threads {
        config.threads = Some(t as usize);
    }
    let summary = run_pipeline(&config)?;
    let mut out = std::io::stdout().lock();
    writeln!(out, "{}", report::render_text(&summary.report))?;
    writeln!(out, "stages run: {}", summary.executed.join(" "))?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n as usize)
            .build_global()
            .context("configuring thread pool")?;
    }
    match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Stats(a) => cmd_stats(a),
        Command::Split(a) => cmd_split(a),
        Command::Summarize(a) => cmd_summarize(a),
        Command::Train(a) => cmd_train(a),
        Command::Recommend(a) => cmd_recommend(a),
        Command::Classify(a) => cmd_classify(a),
        Command::Filter(a) => cmd_filter(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Pipeline(a) => cmd_pipeline(a, cli.threads),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
