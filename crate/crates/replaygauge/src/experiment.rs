//! In-memory experiment protocol: split, train, recommend, classify, filter
//! and evaluate, producing labeled MAP and composition cells.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use replaygauge_core::classify::{
    evaluate_classifier, fit_gnb, ClassifierReport, GnbModel, Label, LabeledScore,
};
use replaygauge_core::eval::{
    composition_report, criterion_relevance_with, map_at_k, Composition, DenominatorMode,
    RelevanceCriterion,
};
use replaygauge_core::event::{
    filter_min_activity, select_user_groups, split_dataset, DatasetSplit, UserGroups,
};
use replaygauge_core::postfilter::{Filter, FilterKind, ScoredEntry, ScoredList};
use replaygauge_core::recommend::{
    train_als_implicit, train_mf_sgd, train_popularity, train_user_knn, AlsParams, FactorModel,
    RecommendationList, Recommender, SgdParams, DEFAULT_NEIGHBORHOOD,
};
use replaygauge_core::signals::{build_training_input, map_ratings, summarize_interactions};
use replaygauge_core::{EventLog, RatingFunction, SummaryTable, TrackId, TrainingMode, UserId};

use crate::error::{Error, Result};
use crate::formats::SavedModel;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolParams {
    pub min_events: usize,
    pub group_b_fraction: f64,
    pub holdout_fraction: f64,
    pub seed: u64,
}

impl Default for ProtocolParams {
    fn default() -> Self {
        Self {
            min_events: 10,
            group_b_fraction: 0.45,
            holdout_fraction: 0.5,
            seed: 7,
        }
    }
}

/// Everything derived from the log before any model is trained.
#[derive(Debug, Clone)]
pub struct ExperimentData {
    /// Group A plus the visible half of group B.
    pub train_log: EventLog,
    pub visible_log: EventLog,
    pub hidden_log: EventLog,
    pub train_table: SummaryTable,
    pub visible_table: SummaryTable,
    pub hidden_table: SummaryTable,
    /// Group-B users with at least one hidden event.
    pub eval_users: Vec<UserId>,
    pub visible_tracks: BTreeMap<UserId, BTreeSet<TrackId>>,
}

/// Group assignment and visible/hidden partition of one protocol run.
#[derive(Debug, Clone)]
pub struct ProtocolSplit {
    pub groups: UserGroups,
    pub split: DatasetSplit,
}

impl ProtocolSplit {
    pub fn new(log: &EventLog, params: &ProtocolParams) -> Result<Self> {
        let active = filter_min_activity(log, params.min_events)?;
        let groups = select_user_groups(&active, params.seed, params.group_b_fraction)?;
        let split = split_dataset(&groups.group_b, params.seed, params.holdout_fraction)?;
        Ok(Self { groups, split })
    }

    pub fn train_log(&self) -> EventLog {
        self.groups.group_a.concat(&self.split.visible)
    }
}

impl ExperimentData {
    pub fn prepare(log: &EventLog, params: &ProtocolParams) -> Result<Self> {
        let p = ProtocolSplit::new(log, params)?;
        Ok(Self::from_logs(
            p.train_log(),
            p.split.visible,
            p.split.hidden,
        ))
    }

    pub fn from_logs(train_log: EventLog, visible_log: EventLog, hidden_log: EventLog) -> Self {
        let train_table = summarize_interactions(&train_log);
        let visible_table = summarize_interactions(&visible_log);
        let hidden_table = summarize_interactions(&hidden_log);
        let eval_users = hidden_log.users().collect();
        let visible_tracks = visible_log
            .users()
            .map(|u| (u, visible_log.user_tracks(u)))
            .collect();
        Self {
            train_log,
            visible_log,
            hidden_log,
            train_table,
            visible_table,
            hidden_table,
            eval_users,
            visible_tracks,
        }
    }

    pub fn exclusions(&self, user: UserId) -> &BTreeSet<TrackId> {
        static EMPTY: BTreeSet<TrackId> = BTreeSet::new();
        self.visible_tracks.get(&user).unwrap_or(&EMPTY)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Popularity,
    Knn,
    MfSgd,
    Als,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Popularity,
        Algorithm::Knn,
        Algorithm::MfSgd,
        Algorithm::Als,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Popularity => "popularity",
            Algorithm::Knn => "knn",
            Algorithm::MfSgd => "mf_sgd",
            Algorithm::Als => "als",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown algorithm `{s}`")))
    }
}

/// Which model to train and on what input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelSpec {
    pub algorithm: Algorithm,
    /// Input for popularity, KNN and ALS.
    pub input_mode: TrainingMode,
    /// Rating function for SGD factorization.
    pub rating_fn: RatingFunction,
}

impl ModelSpec {
    /// Name used in report cells and artifact file names.
    pub fn input_label(&self) -> &'static str {
        match self.algorithm {
            Algorithm::MfSgd => self.rating_fn.as_str(),
            _ => self.input_mode.as_str(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub neighborhood: usize,
    pub sgd: SgdParams,
    pub als: AlsParams,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            neighborhood: DEFAULT_NEIGHBORHOOD,
            sgd: SgdParams::default(),
            als: AlsParams::default(),
        }
    }
}

pub fn train_model(
    spec: &ModelSpec,
    table: &SummaryTable,
    params: &ModelParams,
) -> Result<SavedModel> {
    Ok(match spec.algorithm {
        Algorithm::Popularity => SavedModel::Popularity(train_popularity(&build_training_input(
            table,
            spec.input_mode,
        ))),
        Algorithm::Knn => SavedModel::Knn {
            model: train_user_knn(
                build_training_input(table, spec.input_mode),
                params.neighborhood,
            )?,
            mode: spec.input_mode,
        },
        Algorithm::MfSgd => SavedModel::Factor(train_mf_sgd(
            &map_ratings(table, spec.rating_fn),
            &params.sgd,
        )?),
        Algorithm::Als => SavedModel::Factor(train_als_implicit(
            &build_training_input(table, spec.input_mode),
            &params.als,
        )?),
    })
}

impl SavedModel {
    /// Top-`n` list; a user the model has never seen gets an empty list from
    /// KNN and the model's fallback ranking otherwise.
    pub fn recommend(
        &self,
        user: UserId,
        n: usize,
        exclude: &BTreeSet<TrackId>,
    ) -> Result<RecommendationList> {
        let list = match self {
            SavedModel::Popularity(m) => m.recommend(user, n, exclude)?,
            SavedModel::Knn { model, .. } => {
                if model.matrix.user_index(user).is_none() {
                    RecommendationList {
                        user,
                        items: Vec::new(),
                    }
                } else {
                    model.recommend(user, n, exclude)?
                }
            }
            SavedModel::Factor(m) => m.recommend(user, n, exclude)?,
        };
        Ok(list)
    }
}

pub fn recommend_all(
    model: &SavedModel,
    data: &ExperimentData,
    n: usize,
) -> Result<BTreeMap<UserId, RecommendationList>> {
    data.eval_users
        .par_iter()
        .map(|&u| model.recommend(u, n, data.exclusions(u)).map(|l| (u, l)))
        .collect()
}

/// Where the classifier's training scores come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreSource {
    /// The factorization model's estimate for the labeled pair.
    #[default]
    Estimated,
    /// The rating the mapping function assigns to the pair.
    Observed,
}

impl ScoreSource {
    pub fn as_str(self) -> &'static str {
        match self {
            ScoreSource::Estimated => "estimated",
            ScoreSource::Observed => "observed",
        }
    }
}

impl FromStr for ScoreSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "estimated" => Ok(ScoreSource::Estimated),
            "observed" => Ok(ScoreSource::Observed),
            _ => Err(Error::Config(format!("unknown score source `{s}`"))),
        }
    }
}

/// Like/dislike-labeled pairs of a summary table, scored.
pub fn labeled_scores(
    labeled: &SummaryTable,
    model: &FactorModel,
    rating_fn: RatingFunction,
    source: ScoreSource,
) -> Vec<LabeledScore> {
    labeled
        .iter()
        .filter(|s| s.like || s.dislike)
        .map(|s| LabeledScore {
            score: match source {
                ScoreSource::Estimated => model.predict(s.user, s.track),
                ScoreSource::Observed => rating_fn.rate(s) as f64,
            },
            label: if s.like { Label::Like } else { Label::Dislike },
        })
        .collect()
}

/// Attaches estimated ratings and predicted dislikes to each list.
pub fn score_lists(
    lists: &BTreeMap<UserId, RecommendationList>,
    model: &FactorModel,
    gnb: &GnbModel,
) -> BTreeMap<UserId, ScoredList> {
    lists
        .iter()
        .map(|(&user, list)| {
            let entries = list
                .tracks()
                .map(|track| {
                    let score = model.predict(user, track);
                    ScoredEntry {
                        track,
                        score,
                        dislike: gnb.is_dislike(score),
                    }
                })
                .collect();
            (user, ScoredList { user, entries })
        })
        .collect()
}

pub fn apply_filter(
    lists: &BTreeMap<UserId, ScoredList>,
    filter: Filter,
) -> BTreeMap<UserId, ScoredList> {
    lists.iter().map(|(&u, l)| (u, filter.apply(l))).collect()
}

pub fn track_lists<'a, I, L>(lists: I) -> BTreeMap<UserId, Vec<TrackId>>
where
    I: IntoIterator<Item = (&'a UserId, &'a L)>,
    L: TrackList + 'a,
{
    lists
        .into_iter()
        .map(|(&u, l)| (u, l.track_ids()))
        .collect()
}

pub trait TrackList {
    fn track_ids(&self) -> Vec<TrackId>;
}

impl TrackList for RecommendationList {
    fn track_ids(&self) -> Vec<TrackId> {
        self.tracks().collect()
    }
}

impl TrackList for ScoredList {
    fn track_ids(&self) -> Vec<TrackId> {
        self.tracks().collect()
    }
}

/// One MAP value with its labels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MapCell {
    pub criterion: RelevanceCriterionName,
    pub k: usize,
    pub algorithm: String,
    pub input_mode: String,
    pub rating_fn: String,
    pub filter: String,
    /// Absent when no user has a non-empty relevant set.
    pub map: Option<f64>,
    pub users_evaluated: usize,
    pub users_excluded: usize,
}

pub type RelevanceCriterionName = &'static str;

/// Labels shared by every cell computed from one set of lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellLabels {
    pub algorithm: String,
    pub input_mode: String,
    pub rating_fn: String,
    pub filter: String,
}

impl CellLabels {
    pub fn new(algorithm: &str, input_mode: &str, rating_fn: &str, filter: &str) -> Self {
        Self {
            algorithm: algorithm.into(),
            input_mode: input_mode.into(),
            rating_fn: rating_fn.into(),
            filter: filter.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalParams<'a> {
    pub criteria: &'a [RelevanceCriterion],
    pub ranks: &'a [usize],
    pub denominator: DenominatorMode,
}

/// Relevance sets for each criterion, with visible pairs removed.
pub fn relevance_sets(
    hidden: &SummaryTable,
    visible: &SummaryTable,
    criteria: &[RelevanceCriterion],
    denominator: DenominatorMode,
) -> Vec<replaygauge_core::eval::RelevanceSets> {
    criteria
        .iter()
        .map(|&c| criterion_relevance_with(hidden, c, Some(visible), denominator))
        .collect()
}

pub fn map_cells(
    lists: &BTreeMap<UserId, Vec<TrackId>>,
    relevance: &[replaygauge_core::eval::RelevanceSets],
    ranks: &[usize],
    labels: &CellLabels,
) -> Result<Vec<MapCell>> {
    let mut cells = Vec::new();
    for sets in relevance {
        for &k in ranks {
            let (map, users_evaluated, users_excluded) = match map_at_k(lists, sets, k) {
                Ok(r) => (Some(r.map), r.users_evaluated, r.users_excluded),
                Err(replaygauge_core::Error::NoEvaluableUsers) => (None, 0, sets.sets.len()),
                Err(e) => return Err(e.into()),
            };
            cells.push(MapCell {
                criterion: sets.criterion.as_str(),
                k,
                algorithm: labels.algorithm.clone(),
                input_mode: labels.input_mode.clone(),
                rating_fn: labels.rating_fn.clone(),
                filter: labels.filter.clone(),
                map,
                users_evaluated,
                users_excluded,
            });
        }
    }
    Ok(cells)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompositionRow {
    pub rating_fn: String,
    pub filter: String,
    pub k: usize,
    pub recommended: usize,
    pub events: usize,
    pub streams_pct: Option<f64>,
    pub likes_pct: Option<f64>,
    pub skips_pct: Option<f64>,
    pub dislikes_pct: Option<f64>,
}

impl CompositionRow {
    pub fn new(rating_fn: &str, filter: &str, k: usize, c: &Composition) -> Self {
        Self {
            rating_fn: rating_fn.into(),
            filter: filter.into(),
            k,
            recommended: c.recommended,
            events: c.events,
            streams_pct: c.streams_pct(),
            likes_pct: c.likes_pct(),
            skips_pct: c.skips_pct(),
            dislikes_pct: c.dislikes_pct(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassifierRow {
    pub rating_fn: String,
    pub score_source: &'static str,
    pub mu_like: f64,
    pub var_like: f64,
    pub mu_dislike: f64,
    pub var_dislike: f64,
    pub prior_like: f64,
    pub swap_alpha: f64,
    /// Scores on hidden labeled pairs.
    pub like_precision: Option<f64>,
    pub like_recall: Option<f64>,
    pub dislike_precision: Option<f64>,
    pub dislike_recall: Option<f64>,
}

impl ClassifierRow {
    pub fn new(
        rating_fn: RatingFunction,
        source: ScoreSource,
        gnb: &GnbModel,
        alpha: f64,
        report: &ClassifierReport,
    ) -> Self {
        Self {
            rating_fn: rating_fn.to_string(),
            score_source: source.as_str(),
            mu_like: gnb.like.mean,
            var_like: gnb.like.variance,
            mu_dislike: gnb.dislike.mean,
            var_dislike: gnb.dislike.variance,
            prior_like: gnb.like.prior,
            swap_alpha: alpha,
            like_precision: report.like.precision,
            like_recall: report.like.recall,
            dislike_precision: report.dislike.precision,
            dislike_recall: report.dislike.recall,
        }
    }
}

/// Parameters of the full experiment grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub protocol: ProtocolParams,
    pub models: ModelParams,
    pub list_length: usize,
    pub ranks: Vec<usize>,
    pub criteria: Vec<RelevanceCriterion>,
    pub denominator: DenominatorMode,
    /// Algorithms of the baseline comparison.
    pub baselines: Vec<Algorithm>,
    /// KNN inputs of the input-filtering comparison.
    pub knn_modes: Vec<TrainingMode>,
    pub als_mode: TrainingMode,
    /// Rating function of the SGD baseline.
    pub baseline_rating_fn: RatingFunction,
    /// KNN input producing the lists that are post-filtered.
    pub list_mode: TrainingMode,
    pub rating_fns: Vec<RatingFunction>,
    pub filters: Vec<FilterKind>,
    /// SWAP threshold; the classifier default when absent.
    pub swap_alpha: Option<f64>,
    pub score_source: ScoreSource,
    pub variance_floor: f64,
    pub composition_rank: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            protocol: ProtocolParams::default(),
            models: ModelParams::default(),
            list_length: 500,
            ranks: vec![10, 100, 500],
            criteria: RelevanceCriterion::ALL.to_vec(),
            denominator: DenominatorMode::Adapted,
            baselines: Algorithm::ALL.to_vec(),
            knn_modes: vec![
                TrainingMode::AllEvents,
                TrainingMode::Streams,
                TrainingMode::Likes,
            ],
            als_mode: TrainingMode::PlayCounts,
            baseline_rating_fn: RatingFunction::F3,
            list_mode: TrainingMode::AllEvents,
            rating_fns: RatingFunction::ALL.to_vec(),
            filters: vec![
                FilterKind::None,
                FilterKind::Rank,
                FilterKind::Del,
                FilterKind::Swap,
            ],
            swap_alpha: None,
            score_source: ScoreSource::Estimated,
            variance_floor: replaygauge_core::classify::DEFAULT_VARIANCE_FLOOR,
            composition_rank: 10,
        }
    }
}

impl ExperimentConfig {
    /// Checks numeric parameters before any work starts.
    pub fn validate(&self) -> Result<()> {
        let p = &self.protocol;
        let frac = |f: f64| f > 0.0 && f < 1.0;
        let positive = |x: f64| x > 0.0 && x.is_finite();
        if p.min_events == 0 {
            return Err(Error::Config("split.min_events must be at least 1".into()));
        }
        if !frac(p.group_b_fraction) {
            return Err(Error::Config(
                "split.group_b_fraction must lie strictly between 0 and 1".into(),
            ));
        }
        if !frac(p.holdout_fraction) {
            return Err(Error::Config(
                "split.holdout_fraction must lie strictly between 0 and 1".into(),
            ));
        }
        if self.list_length == 0 {
            return Err(Error::Config(
                "recommend.list_length must be at least 1".into(),
            ));
        }
        if self.ranks.is_empty() || self.ranks.contains(&0) {
            return Err(Error::Config(
                "eval.ranks must be non-empty positive integers".into(),
            ));
        }
        if self.composition_rank == 0 {
            return Err(Error::Config(
                "eval.composition_rank must be at least 1".into(),
            ));
        }
        if self.models.neighborhood == 0 {
            return Err(Error::Config("knn.neighborhood must be at least 1".into()));
        }
        if self
            .knn_modes
            .iter()
            .chain([&self.list_mode])
            .any(|m| !m.is_binary())
        {
            return Err(Error::Config(
                "knn input modes must be binary (events, streams or likes)".into(),
            ));
        }
        if self.als_mode.is_binary() {
            return Err(Error::Config(
                "als.input_mode must be a count mode (play_counts or total_plays)".into(),
            ));
        }
        if self.swap_alpha.is_some_and(|a| !a.is_finite()) {
            return Err(Error::Config("filter.alpha must be finite".into()));
        }
        if !(self.variance_floor > 0.0 && self.variance_floor.is_finite()) {
            return Err(Error::Config(
                "classify.variance_floor must be positive".into(),
            ));
        }
        let s = &self.models.sgd;
        if s.factors == 0
            || !positive(s.learning_rate)
            || s.regularization.is_nan()
            || s.regularization < 0.0
        {
            return Err(Error::Config("sgd hyperparameters out of range".into()));
        }
        let a = &self.models.als;
        if a.factors == 0 || !positive(a.regularization) || !positive(a.confidence) {
            return Err(Error::Config("als hyperparameters out of range".into()));
        }
        Ok(())
    }
}

/// Output of the full grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub baselines: Vec<MapCell>,
    pub inputs: Vec<MapCell>,
    pub filtered: Vec<MapCell>,
    pub composition: Vec<CompositionRow>,
    pub classifiers: Vec<ClassifierRow>,
}

/// Classifier fitted on visible labeled pairs, with its held-out evaluation
/// on hidden labeled pairs.
pub fn fit_classifier(
    data: &ExperimentData,
    model: &FactorModel,
    rating_fn: RatingFunction,
    source: ScoreSource,
    variance_floor: f64,
) -> Result<(GnbModel, ClassifierReport)> {
    let gnb = fit_gnb(
        &labeled_scores(&data.visible_table, model, rating_fn, source),
        variance_floor,
    )?;
    let held_out = labeled_scores(&data.hidden_table, model, rating_fn, ScoreSource::Estimated);
    Ok((gnb, evaluate_classifier(&gnb, &held_out)))
}

/// Post-filter stage for one rating function: scored lists plus every
/// requested filter's output.
pub struct FilterRun {
    pub rating_fn: RatingFunction,
    pub gnb: GnbModel,
    pub alpha: f64,
    pub report: ClassifierReport,
    pub scored: BTreeMap<UserId, ScoredList>,
    pub filtered: Vec<(FilterKind, BTreeMap<UserId, ScoredList>)>,
}

pub fn run_filters(
    data: &ExperimentData,
    lists: &BTreeMap<UserId, RecommendationList>,
    config: &ExperimentConfig,
    rating_fn: RatingFunction,
) -> Result<FilterRun> {
    let sgd = match train_model(
        &ModelSpec {
            algorithm: Algorithm::MfSgd,
            input_mode: config.list_mode,
            rating_fn,
        },
        &data.train_table,
        &config.models,
    )? {
        SavedModel::Factor(m) => m,
        _ => unreachable!("factorization spec yields a factor model"),
    };
    let (gnb, report) = fit_classifier(
        data,
        &sgd,
        rating_fn,
        config.score_source,
        config.variance_floor,
    )?;
    let alpha = config
        .swap_alpha
        .unwrap_or_else(|| gnb.default_swap_threshold());
    let scored = score_lists(lists, &sgd, &gnb);
    let filtered = config
        .filters
        .iter()
        .map(|&f| (f, apply_filter(&scored, f.with_alpha(alpha))))
        .collect();
    Ok(FilterRun {
        rating_fn,
        gnb,
        alpha,
        report,
        scored,
        filtered,
    })
}

pub fn run_experiment_matrix(
    log: &EventLog,
    config: &ExperimentConfig,
) -> Result<ExperimentReport> {
    config.validate()?;
    let data = ExperimentData::prepare(log, &config.protocol)?;
    let relevance = relevance_sets(
        &data.hidden_table,
        &data.visible_table,
        &config.criteria,
        config.denominator,
    );
    let evaluate = |lists: &BTreeMap<UserId, Vec<TrackId>>, labels: CellLabels| {
        map_cells(lists, &relevance, &config.ranks, &labels)
    };

    let mut baselines = Vec::new();
    for &algorithm in &config.baselines {
        let spec = ModelSpec {
            algorithm,
            input_mode: match algorithm {
                Algorithm::Als => config.als_mode,
                _ => TrainingMode::AllEvents,
            },
            rating_fn: config.baseline_rating_fn,
        };
        log::info!("baseline {algorithm} ({})", spec.input_label());
        let model = train_model(&spec, &data.train_table, &config.models)?;
        let lists = recommend_all(&model, &data, config.list_length)?;
        let rating_fn = if algorithm == Algorithm::MfSgd {
            spec.rating_fn.as_str()
        } else {
            ""
        };
        baselines.extend(evaluate(
            &track_lists(&lists),
            CellLabels::new(
                algorithm.as_str(),
                spec.input_mode.as_str(),
                rating_fn,
                "none",
            ),
        )?);
    }

    let knn_lists = |mode: TrainingMode| -> Result<BTreeMap<UserId, RecommendationList>> {
        log::info!("knn on {mode}");
        let spec = ModelSpec {
            algorithm: Algorithm::Knn,
            input_mode: mode,
            rating_fn: config.baseline_rating_fn,
        };
        recommend_all(
            &train_model(&spec, &data.train_table, &config.models)?,
            &data,
            config.list_length,
        )
    };
    let mut inputs = Vec::new();
    let mut filter_lists = None;
    for &mode in &config.knn_modes {
        let lists = knn_lists(mode)?;
        inputs.extend(evaluate(
            &track_lists(&lists),
            CellLabels::new("knn", mode.as_str(), "", "none"),
        )?);
        if mode == config.list_mode {
            filter_lists = Some(lists);
        }
    }
    let lists = match filter_lists {
        Some(lists) => lists,
        None => knn_lists(config.list_mode)?,
    };

    let mut filtered = Vec::new();
    let mut composition = Vec::new();
    let mut classifiers = Vec::new();
    for &rating_fn in &config.rating_fns {
        log::info!("post-filters with {rating_fn}");
        let run = run_filters(&data, &lists, config, rating_fn)?;
        classifiers.push(ClassifierRow::new(
            rating_fn,
            config.score_source,
            &run.gnb,
            run.alpha,
            &run.report,
        ));
        for (kind, out) in &run.filtered {
            let tracks = track_lists(out);
            filtered.extend(evaluate(
                &tracks,
                CellLabels::new(
                    "knn",
                    config.list_mode.as_str(),
                    rating_fn.as_str(),
                    kind.as_str(),
                ),
            )?);
            let c = composition_report(&tracks, &data.hidden_table, config.composition_rank)?;
            composition.push(CompositionRow::new(
                rating_fn.as_str(),
                kind.as_str(),
                config.composition_rank,
                &c,
            ));
        }
    }
    Ok(ExperimentReport {
        baselines,
        inputs,
        filtered,
        composition,
        classifiers,
    })
}
