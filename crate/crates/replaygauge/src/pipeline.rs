//! End-to-end pipeline over a work directory.
//!
//! Each stage persists its artifacts and records a key built from its
//! parameters and the SHA-256 of its input files under `cache/`. A stage whose
//! key is unchanged and whose outputs exist is skipped and its outputs are
//! read back from disk.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use replaygauge_core::classify::{evaluate_classifier, fit_gnb};
use replaygauge_core::eval::composition_report;
use replaygauge_core::postfilter::FilterKind;
use replaygauge_core::recommend::{FactorModel, RecommendationList};
use replaygauge_core::signals::map_ratings;
use replaygauge_core::{RatingFunction, TrainingMode, UserId};

use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::experiment::{
    apply_filter, labeled_scores, map_cells, recommend_all, relevance_sets, score_lists,
    track_lists, train_model, Algorithm, CellLabels, ClassifierRow, CompositionRow,
    ExperimentConfig, ExperimentData, ExperimentReport, ModelSpec, ProtocolSplit, ScoreSource,
};
use crate::formats::{self, Meta, SavedModel, FORMAT_VERSION};
use crate::report;

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub fn hash_file(path: &Path) -> Result<String> {
    Ok(sha256_hex(&fs::read(path).map_err(|e| Error::io(path, e))?))
}

/// Artifact locations inside the work directory.
#[derive(Debug, Clone)]
pub struct Layout {
    root: PathBuf,
}

impl Layout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.root.join(rel)
    }

    pub fn manifest(&self) -> PathBuf {
        self.path("split/manifest.csv")
    }

    pub fn split_meta(&self) -> PathBuf {
        self.path("split/split.meta")
    }

    pub fn train_log(&self) -> PathBuf {
        self.path("split/train.csv")
    }

    pub fn visible_log(&self) -> PathBuf {
        self.path("split/visible.csv")
    }

    pub fn hidden_log(&self) -> PathBuf {
        self.path("split/hidden.csv")
    }

    pub fn model(&self, name: &str) -> PathBuf {
        self.path(&format!("models/{name}.model"))
    }

    pub fn recs(&self, name: &str) -> PathBuf {
        self.path(&format!("recs/{name}.csv"))
    }

    pub fn gnb(&self, f: RatingFunction) -> PathBuf {
        self.path(&format!("classify/gnb_{f}.meta"))
    }

    pub fn scored(&self, f: RatingFunction) -> PathBuf {
        self.path(&format!("classify/scored_{f}.csv"))
    }

    pub fn filtered(&self, kind: FilterKind, f: RatingFunction) -> PathBuf {
        self.path(&format!("filtered/{kind}_{f}.csv"))
    }

    pub fn report(&self, name: &str) -> PathBuf {
        self.path(&format!("reports/{name}"))
    }

    fn cache_key(&self, stage: &str) -> PathBuf {
        self.path(&format!("cache/{stage}.key"))
    }
}

/// Cache bookkeeping for one stage.
struct Stage<'a> {
    layout: &'a Layout,
    name: String,
    key: String,
    outputs: Vec<PathBuf>,
}

impl<'a> Stage<'a> {
    fn new(
        layout: &'a Layout,
        name: impl Into<String>,
        params: &Meta,
        inputs: &[PathBuf],
        outputs: Vec<PathBuf>,
    ) -> Result<Self> {
        let name = name.into();
        let mut text = format!("stage={name}\n");
        for (k, v) in &params.0 {
            text.push_str(&format!("{k}={v}\n"));
        }
        for input in inputs {
            let rel = input.strip_prefix(layout.root()).unwrap_or(input);
            text.push_str(&format!("input:{}={}\n", rel.display(), hash_file(input)?));
        }
        Ok(Self {
            layout,
            key: sha256_hex(text.as_bytes()),
            name,
            outputs,
        })
    }

    fn is_fresh(&self) -> bool {
        let stored = fs::read_to_string(self.layout.cache_key(&self.name)).ok();
        stored.as_deref().map(str::trim) == Some(self.key.as_str())
            && self.outputs.iter().all(|p| p.exists())
    }

    fn finish(&self) -> Result<()> {
        let path = self.layout.cache_key(&self.name);
        formats::write_file(&path, |w| Ok(writeln!(w, "{}", self.key)?))
    }

    /// Runs `body` unless the cached outputs are current.
    fn run(&self, body: impl FnOnce() -> Result<()>) -> Result<bool> {
        if self.is_fresh() {
            log::info!("stage {} up to date", self.name);
            return Ok(false);
        }
        log::info!("stage {} running", self.name);
        body()?;
        self.finish()?;
        Ok(true)
    }
}

fn model_name(spec: &ModelSpec) -> String {
    format!("{}_{}", spec.algorithm, spec.input_label())
}

fn spec_params(spec: &ModelSpec, config: &ExperimentConfig) -> Meta {
    let mut m = Meta::default();
    m.push("algorithm", spec.algorithm)
        .push("input", spec.input_label());
    match spec.algorithm {
        Algorithm::Popularity => {}
        Algorithm::Knn => {
            m.push("neighborhood", config.models.neighborhood);
        }
        Algorithm::MfSgd => {
            let s = &config.models.sgd;
            m.push("factors", s.factors)
                .push("epochs", s.epochs)
                .push("regularization", s.regularization)
                .push("learning_rate", s.learning_rate)
                .push("seed", s.seed);
        }
        Algorithm::Als => {
            let a = &config.models.als;
            m.push("factors", a.factors)
                .push("sweeps", a.sweeps)
                .push("regularization", a.regularization)
                .push("confidence", a.confidence)
                .push("seed", a.seed);
        }
    }
    m
}

/// Model specs the run needs, without duplicates: baselines, KNN inputs, the
/// list generator and one SGD model per rating function.
pub fn required_models(config: &ExperimentConfig) -> Vec<ModelSpec> {
    let mut specs: Vec<ModelSpec> = Vec::new();
    let mut add = |spec: ModelSpec| {
        if !specs.iter().any(|s| model_name(s) == model_name(&spec)) {
            specs.push(spec);
        }
    };
    let f = config.baseline_rating_fn;
    for &algorithm in &config.baselines {
        let input_mode = if algorithm == Algorithm::Als {
            config.als_mode
        } else {
            TrainingMode::AllEvents
        };
        add(ModelSpec {
            algorithm,
            input_mode,
            rating_fn: f,
        });
    }
    for &mode in config.knn_modes.iter().chain([&config.list_mode]) {
        add(ModelSpec {
            algorithm: Algorithm::Knn,
            input_mode: mode,
            rating_fn: f,
        });
    }
    for &rating_fn in &config.rating_fns {
        add(ModelSpec {
            algorithm: Algorithm::MfSgd,
            input_mode: TrainingMode::AllEvents,
            rating_fn,
        });
    }
    specs
}

fn sgd_spec(rating_fn: RatingFunction) -> ModelSpec {
    ModelSpec {
        algorithm: Algorithm::MfSgd,
        input_mode: TrainingMode::AllEvents,
        rating_fn,
    }
}

fn knn_spec(mode: TrainingMode, config: &ExperimentConfig) -> ModelSpec {
    ModelSpec {
        algorithm: Algorithm::Knn,
        input_mode: mode,
        rating_fn: config.baseline_rating_fn,
    }
}

fn load_factor(path: &Path) -> Result<FactorModel> {
    match formats::load_model(formats::open(path)?)? {
        SavedModel::Factor(m) => Ok(m),
        other => Err(Error::Format(format!(
            "{}: expected a factor model, found {}",
            path.display(),
            other.kind()
        ))),
    }
}

fn load_lists(path: &Path) -> Result<BTreeMap<UserId, RecommendationList>> {
    formats::read_recommendations(formats::open(path)?)
}

/// What a pipeline run produced.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub report: ExperimentReport,
    /// Stages that executed; the rest were reused from the cache.
    pub executed: Vec<String>,
}

/// Runs every stage whose inputs or parameters changed, then evaluates.
/// `run.threads` bounds the worker pool.
pub fn run_pipeline(config: &PipelineConfig) -> Result<RunSummary> {
    config.validate()?;
    match config.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(|| run_stages(config)),
        None => run_stages(config),
    }
}

fn run_stages(config: &PipelineConfig) -> Result<RunSummary> {
    let input = config.input_log()?;
    if !input.exists() {
        return Err(Error::io(
            input,
            std::io::Error::new(std::io::ErrorKind::NotFound, "input log not found"),
        ));
    }
    let layout = Layout::new(config.work_dir()?);
    let exp = &config.experiment;
    let mut executed = Vec::new();
    let mut track = |name: &str, ran: bool| {
        if ran {
            executed.push(name.to_string());
        }
    };

    // split
    let mut split_params = Meta::default();
    split_params
        .push("seed", exp.protocol.seed)
        .push("min_events", exp.protocol.min_events)
        .push("group_b_fraction", exp.protocol.group_b_fraction)
        .push("holdout_fraction", exp.protocol.holdout_fraction);
    let split_outputs = vec![
        layout.manifest(),
        layout.split_meta(),
        layout.train_log(),
        layout.visible_log(),
        layout.hidden_log(),
    ];
    let stage = Stage::new(
        &layout,
        "split",
        &split_params,
        &[input.to_path_buf()],
        split_outputs,
    )?;
    track(
        "split",
        stage.run(|| {
            let log = formats::load_event_log(input)?;
            let p = ProtocolSplit::new(&log, &exp.protocol)?;
            formats::write_file(&layout.manifest(), |w| {
                formats::write_manifest(w, &p.groups.assignment)
            })?;
            let mut meta = Meta::default();
            meta.push("seed", exp.protocol.seed)
                .push("holdout_fraction", exp.protocol.holdout_fraction)
                .push("group_b_fraction", exp.protocol.group_b_fraction)
                .push("min_events", exp.protocol.min_events)
                .push("format_version", FORMAT_VERSION);
            formats::write_file(&layout.split_meta(), |w| meta.write(w))?;
            formats::write_file(&layout.train_log(), |w| {
                formats::write_event_log(w, &p.train_log())
            })?;
            formats::write_file(&layout.visible_log(), |w| {
                formats::write_event_log(w, &p.split.visible)
            })?;
            formats::write_file(&layout.hidden_log(), |w| {
                formats::write_event_log(w, &p.split.hidden)
            })
        })?,
    );
    let data = ExperimentData::from_logs(
        formats::load_event_log(&layout.train_log())?,
        formats::load_event_log(&layout.visible_log())?,
        formats::load_event_log(&layout.hidden_log())?,
    );

    // summarize
    let summary_outputs: Vec<PathBuf> = ["train", "visible", "hidden"]
        .iter()
        .map(|n| layout.path(&format!("summaries/{n}.csv")))
        .chain(
            exp.rating_fns
                .iter()
                .map(|f| layout.path(&format!("summaries/ratings_{f}.csv"))),
        )
        .collect();
    let stage = Stage::new(
        &layout,
        "summarize",
        &Meta::default(),
        &[
            layout.train_log(),
            layout.visible_log(),
            layout.hidden_log(),
        ],
        summary_outputs,
    )?;
    track(
        "summarize",
        stage.run(|| {
            for (name, table) in [
                ("train", &data.train_table),
                ("visible", &data.visible_table),
                ("hidden", &data.hidden_table),
            ] {
                formats::write_file(&layout.path(&format!("summaries/{name}.csv")), |w| {
                    formats::write_summary_table(w, table)
                })?;
            }
            for &f in &exp.rating_fns {
                let ratings = map_ratings(&data.train_table, f);
                formats::write_file(&layout.path(&format!("summaries/ratings_{f}.csv")), |w| {
                    formats::write_ratings(w, &ratings)
                })?;
            }
            Ok(())
        })?,
    );

    // train + recommend
    let specs = required_models(exp);
    for spec in &specs {
        let name = model_name(spec);
        let stage = Stage::new(
            &layout,
            format!("train_{name}"),
            &spec_params(spec, exp),
            &[layout.train_log()],
            vec![layout.model(&name)],
        )?;
        track(
            &format!("train_{name}"),
            stage.run(|| {
                let model = train_model(spec, &data.train_table, &exp.models)?;
                formats::write_file(&layout.model(&name), |w| formats::save_model(w, &model))
            })?,
        );
        let is_baseline_sgd =
            exp.baselines.contains(&Algorithm::MfSgd) && spec.rating_fn == exp.baseline_rating_fn;
        if spec.algorithm == Algorithm::MfSgd && !is_baseline_sgd {
            continue;
        }
        let mut params = Meta::default();
        params.push("list_length", exp.list_length);
        let stage = Stage::new(
            &layout,
            format!("recommend_{name}"),
            &params,
            &[
                layout.model(&name),
                layout.visible_log(),
                layout.hidden_log(),
            ],
            vec![layout.recs(&name)],
        )?;
        track(
            &format!("recommend_{name}"),
            stage.run(|| {
                let model = formats::load_model(formats::open(&layout.model(&name))?)?;
                let lists = recommend_all(&model, &data, exp.list_length)?;
                formats::write_file(&layout.recs(&name), |w| {
                    formats::write_recommendations(w, lists.values())
                })
            })?,
        );
    }

    // classify + filter
    let list_name = model_name(&knn_spec(exp.list_mode, exp));
    for &f in &exp.rating_fns {
        let sgd_name = model_name(&sgd_spec(f));
        let mut params = Meta::default();
        params
            .push("rating_fn", f)
            .push("score_source", exp.score_source.as_str())
            .push("variance_floor", exp.variance_floor);
        let stage = Stage::new(
            &layout,
            format!("classify_{f}"),
            &params,
            &[
                layout.model(&sgd_name),
                layout.visible_log(),
                layout.recs(&list_name),
            ],
            vec![layout.gnb(f), layout.scored(f)],
        )?;
        track(
            &format!("classify_{f}"),
            stage.run(|| {
                let sgd = load_factor(&layout.model(&sgd_name))?;
                let gnb = fit_gnb(
                    &labeled_scores(&data.visible_table, &sgd, f, exp.score_source),
                    exp.variance_floor,
                )?;
                let scored = score_lists(&load_lists(&layout.recs(&list_name))?, &sgd, &gnb);
                formats::write_file(&layout.gnb(f), |w| formats::save_gnb(w, &gnb))?;
                formats::write_file(&layout.scored(f), |w| {
                    formats::write_scored_lists(w, scored.values())
                })
            })?,
        );
        for &kind in &exp.filters {
            let mut params = Meta::default();
            params.push("filter", kind).push(
                "alpha",
                exp.swap_alpha.map_or("auto".into(), |a| a.to_string()),
            );
            let stage = Stage::new(
                &layout,
                format!("filter_{kind}_{f}"),
                &params,
                &[layout.scored(f), layout.gnb(f)],
                vec![layout.filtered(kind, f)],
            )?;
            track(
                &format!("filter_{kind}_{f}"),
                stage.run(|| {
                    let gnb = formats::load_gnb(formats::open(&layout.gnb(f))?)?;
                    let alpha = exp
                        .swap_alpha
                        .unwrap_or_else(|| gnb.default_swap_threshold());
                    let scored = formats::read_scored_lists(formats::open(&layout.scored(f))?)?;
                    let out = apply_filter(&scored, kind.with_alpha(alpha));
                    formats::write_file(&layout.filtered(kind, f), |w| {
                        formats::write_filtered_lists(w, out.values())
                    })
                })?,
            );
        }
    }

    // evaluate (always rerun; cheap relative to training)
    let report = evaluate_stage(&layout, exp, &data, &specs)?;
    executed.push("evaluate".into());
    write_reports(&layout, &report)?;
    write_run_meta(&layout, config, input)?;
    Ok(RunSummary { report, executed })
}

fn evaluate_stage(
    layout: &Layout,
    exp: &ExperimentConfig,
    data: &ExperimentData,
    specs: &[ModelSpec],
) -> Result<ExperimentReport> {
    let relevance = relevance_sets(
        &data.hidden_table,
        &data.visible_table,
        &exp.criteria,
        exp.denominator,
    );
    let evaluate = |lists: &BTreeMap<UserId, Vec<replaygauge_core::TrackId>>,
                    labels: CellLabels| {
        map_cells(lists, &relevance, &exp.ranks, &labels)
    };

    let mut baselines = Vec::new();
    for &algorithm in &exp.baselines {
        let spec = specs
            .iter()
            .find(|s| {
                s.algorithm == algorithm
                    && match algorithm {
                        Algorithm::MfSgd => s.rating_fn == exp.baseline_rating_fn,
                        Algorithm::Als => s.input_mode == exp.als_mode,
                        _ => s.input_mode == TrainingMode::AllEvents,
                    }
            })
            .expect("baseline specs are always required");
        let lists = load_lists(&layout.recs(&model_name(spec)))?;
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

    let mut inputs = Vec::new();
    for &mode in &exp.knn_modes {
        let lists = load_lists(&layout.recs(&model_name(&knn_spec(mode, exp))))?;
        inputs.extend(evaluate(
            &track_lists(&lists),
            CellLabels::new("knn", mode.as_str(), "", "none"),
        )?);
    }

    let mut filtered = Vec::new();
    let mut composition = Vec::new();
    let mut classifiers = Vec::new();
    for &f in &exp.rating_fns {
        let sgd = load_factor(&layout.model(&model_name(&sgd_spec(f))))?;
        let gnb = formats::load_gnb(formats::open(&layout.gnb(f))?)?;
        let alpha = exp
            .swap_alpha
            .unwrap_or_else(|| gnb.default_swap_threshold());
        let held_out = labeled_scores(&data.hidden_table, &sgd, f, ScoreSource::Estimated);
        classifiers.push(ClassifierRow::new(
            f,
            exp.score_source,
            &gnb,
            alpha,
            &evaluate_classifier(&gnb, &held_out),
        ));
        for &kind in &exp.filters {
            let tracks = track_lists(&load_lists(&layout.filtered(kind, f))?);
            filtered.extend(evaluate(
                &tracks,
                CellLabels::new("knn", exp.list_mode.as_str(), f.as_str(), kind.as_str()),
            )?);
            let c = composition_report(&tracks, &data.hidden_table, exp.composition_rank)?;
            composition.push(CompositionRow::new(
                f.as_str(),
                kind.as_str(),
                exp.composition_rank,
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

pub fn write_reports(layout: &Layout, report: &ExperimentReport) -> Result<()> {
    let all: Vec<_> = report
        .baselines
        .iter()
        .chain(&report.inputs)
        .chain(&report.filtered)
        .collect();
    formats::write_file(&layout.report("map.csv"), |w| {
        report::write_map_csv(w, all.iter().copied())
    })?;
    formats::write_file(&layout.report("composition.csv"), |w| {
        report::write_composition_csv(w, &report.composition)
    })?;
    formats::write_file(&layout.report("classifier.csv"), |w| {
        report::write_classifier_csv(w, &report.classifiers)
    })?;
    formats::write_file(&layout.report("tables.txt"), |w| {
        Ok(w.write_all(report::render_text(report).as_bytes())?)
    })?;
    formats::write_file(&layout.report("report.json"), |w| {
        report::write_json(w, report)
    })
}

fn write_run_meta(layout: &Layout, config: &PipelineConfig, input: &Path) -> Result<()> {
    let canonical = config.canonical();
    let mut text = Vec::new();
    canonical.write(&mut text)?;
    let exp = &config.experiment;
    let mut meta = Meta::default();
    meta.push("format_version", FORMAT_VERSION)
        .push("config_sha256", sha256_hex(&text))
        .push("input_sha256", hash_file(input)?)
        .push("split_seed", exp.protocol.seed)
        .push("sgd_seed", exp.models.sgd.seed)
        .push("als_seed", exp.models.als.seed);
    for (k, v) in &canonical.0 {
        meta.push(&format!("config.{k}"), v);
    }
    formats::write_file(&layout.path("run.meta"), |w| meta.write(w))
}

/// File names of the report artifacts, relative to the work directory.
pub const REPORT_FILES: [&str; 5] = [
    "reports/map.csv",
    "reports/composition.csv",
    "reports/classifier.csv",
    "reports/tables.txt",
    "reports/report.json",
];
