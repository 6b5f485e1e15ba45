//! Flat `section.key=value` pipeline configuration.

use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use replaygauge_core::eval::{DenominatorMode, RelevanceCriterion};
use replaygauge_core::postfilter::FilterKind;
use replaygauge_core::{RatingFunction, TrainingMode};

use crate::error::{Error, Result};
use crate::experiment::{Algorithm, ExperimentConfig, ScoreSource};
use crate::formats::{self, Meta};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PipelineConfig {
    pub input_log: Option<PathBuf>,
    pub work_dir: Option<PathBuf>,
    pub threads: Option<usize>,
    pub experiment: ExperimentConfig,
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("`{key}` has invalid value `{value}`")))
}

fn parse_with<T, E: Display>(
    key: &str,
    value: &str,
    f: impl Fn(&str) -> Result<T, E>,
) -> Result<T> {
    f(value).map_err(|e| Error::Config(format!("`{key}`: {e}")))
}

fn parse_list<T, E: Display>(
    key: &str,
    value: &str,
    f: impl Fn(&str) -> Result<T, E>,
) -> Result<Vec<T>> {
    let items = value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_with(key, s, &f))
        .collect::<Result<Vec<T>>>()?;
    if items.is_empty() {
        return Err(Error::Config(format!(
            "`{key}` must list at least one value"
        )));
    }
    Ok(items)
}

fn join<T: Display>(items: &[T]) -> String {
    items
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

impl PipelineConfig {
    /// Reads a config file; relative paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let meta = Meta::read(formats::open(path)?)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let mut config = PipelineConfig::default();
        for (k, v) in &meta.0 {
            config.set(k, v)?;
        }
        config.input_log = config.input_log.map(|p| base.join(p));
        config.work_dir = config.work_dir.map(|p| base.join(p));
        Ok(config)
    }

    /// Applies `key=value` overrides, e.g. from the command line.
    pub fn apply_overrides(&mut self, overrides: &[String]) -> Result<()> {
        for o in overrides {
            let (k, v) = Meta::parse_line(o)?
                .ok_or_else(|| Error::Config(format!("empty override `{o}`")))?;
            self.set(&k, &v)?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let e = &mut self.experiment;
        match key {
            "input.log" => self.input_log = Some(PathBuf::from(value)),
            "work.dir" => self.work_dir = Some(PathBuf::from(value)),
            "run.threads" => self.threads = Some(parse(key, value)?),
            "split.seed" => e.protocol.seed = parse(key, value)?,
            "split.min_events" => e.protocol.min_events = parse(key, value)?,
            "split.group_b_fraction" => e.protocol.group_b_fraction = parse(key, value)?,
            "split.holdout_fraction" => e.protocol.holdout_fraction = parse(key, value)?,
            "model.algorithms" => e.baselines = parse_list(key, value, Algorithm::from_str)?,
            "model.baseline_rating_fn" => {
                e.baseline_rating_fn = parse_with(key, value, RatingFunction::from_str)?
            }
            "knn.neighborhood" => e.models.neighborhood = parse(key, value)?,
            "knn.input_modes" => e.knn_modes = parse_list(key, value, TrainingMode::from_str)?,
            "sgd.factors" => e.models.sgd.factors = parse(key, value)?,
            "sgd.epochs" => e.models.sgd.epochs = parse(key, value)?,
            "sgd.regularization" => e.models.sgd.regularization = parse(key, value)?,
            "sgd.learning_rate" => e.models.sgd.learning_rate = parse(key, value)?,
            "sgd.seed" => e.models.sgd.seed = parse(key, value)?,
            "als.factors" => e.models.als.factors = parse(key, value)?,
            "als.sweeps" => e.models.als.sweeps = parse(key, value)?,
            "als.regularization" => e.models.als.regularization = parse(key, value)?,
            "als.confidence" => e.models.als.confidence = parse(key, value)?,
            "als.seed" => e.models.als.seed = parse(key, value)?,
            "als.input_mode" => e.als_mode = parse_with(key, value, TrainingMode::from_str)?,
            "recommend.list_length" => e.list_length = parse(key, value)?,
            "recommend.list_mode" => e.list_mode = parse_with(key, value, TrainingMode::from_str)?,
            "classify.rating_fns" => {
                e.rating_fns = parse_list(key, value, RatingFunction::from_str)?
            }
            "classify.score_source" => {
                e.score_source = parse_with(key, value, ScoreSource::from_str)?
            }
            "classify.variance_floor" => e.variance_floor = parse(key, value)?,
            "filter.kinds" => e.filters = parse_list(key, value, FilterKind::from_str)?,
            "filter.alpha" => {
                e.swap_alpha = match value {
                    "" | "auto" => None,
                    v => Some(parse(key, v)?),
                }
            }
            "eval.ranks" => e.ranks = parse_list(key, value, usize::from_str)?,
            "eval.criteria" => e.criteria = parse_list(key, value, RelevanceCriterion::from_str)?,
            "eval.denominator" => {
                e.denominator = parse_with(key, value, DenominatorMode::from_str)?
            }
            "eval.composition_rank" => e.composition_rank = parse(key, value)?,
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Every effective setting except paths and threads, in a fixed order.
    /// Paths and thread count do not influence results.
    pub fn canonical(&self) -> Meta {
        let e = &self.experiment;
        let mut m = Meta::default();
        m.push("split.seed", e.protocol.seed)
            .push("split.min_events", e.protocol.min_events)
            .push("split.group_b_fraction", e.protocol.group_b_fraction)
            .push("split.holdout_fraction", e.protocol.holdout_fraction)
            .push("model.algorithms", join(&e.baselines))
            .push("model.baseline_rating_fn", e.baseline_rating_fn)
            .push("knn.neighborhood", e.models.neighborhood)
            .push("knn.input_modes", join(&e.knn_modes))
            .push("sgd.factors", e.models.sgd.factors)
            .push("sgd.epochs", e.models.sgd.epochs)
            .push("sgd.regularization", e.models.sgd.regularization)
            .push("sgd.learning_rate", e.models.sgd.learning_rate)
            .push("sgd.seed", e.models.sgd.seed)
            .push("als.factors", e.models.als.factors)
            .push("als.sweeps", e.models.als.sweeps)
            .push("als.regularization", e.models.als.regularization)
            .push("als.confidence", e.models.als.confidence)
            .push("als.seed", e.models.als.seed)
            .push("als.input_mode", e.als_mode)
            .push("recommend.list_length", e.list_length)
            .push("recommend.list_mode", e.list_mode)
            .push("classify.rating_fns", join(&e.rating_fns))
            .push("classify.score_source", e.score_source.as_str())
            .push("classify.variance_floor", e.variance_floor)
            .push("filter.kinds", join(&e.filters))
            .push(
                "filter.alpha",
                e.swap_alpha.map_or("auto".to_string(), |a| a.to_string()),
            )
            .push("eval.ranks", join(&e.ranks))
            .push("eval.criteria", join(&e.criteria))
            .push("eval.denominator", e.denominator)
            .push("eval.composition_rank", e.composition_rank);
        m
    }

    pub fn input_log(&self) -> Result<&Path> {
        self.input_log
            .as_deref()
            .ok_or_else(|| Error::Config("`input.log` is required".into()))
    }

    pub fn work_dir(&self) -> Result<&Path> {
        self.work_dir
            .as_deref()
            .ok_or_else(|| Error::Config("`work.dir` is required".into()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.threads == Some(0) {
            return Err(Error::Config("`run.threads` must be at least 1".into()));
        }
        self.experiment.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_and_canonical_round_trip() {
        let mut c = PipelineConfig::default();
        c.apply_overrides(&[
            "split.seed=11".into(),
            "filter.kinds=none,del".into(),
            "eval.ranks=5,10".into(),
        ])
        .unwrap();
        assert_eq!(c.experiment.protocol.seed, 11);
        assert_eq!(
            c.experiment.filters,
            vec![FilterKind::None, FilterKind::Del]
        );

        let mut again = PipelineConfig::default();
        for (k, v) in &c.canonical().0 {
            again.set(k, v).unwrap();
        }
        assert_eq!(again.canonical(), c.canonical());
        assert_eq!(again.experiment, c.experiment);
    }

    #[test]
    fn rejects_bad_values() {
        let mut c = PipelineConfig::default();
        assert!(c.set("split.seed", "x").is_err());
        assert!(c.set("nope.key", "1").is_err());
        assert!(c.set("eval.ranks", "").is_err());
        assert!(c.set("filter.kinds", "drop").is_err());
        c.set("split.holdout_fraction", "1.5").unwrap();
        assert!(c.validate().is_err());
    }
}
