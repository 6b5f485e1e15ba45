//! One-dimensional Gaussian naive Bayes over estimated ratings.
//!
//! Each class (like, dislike) is modelled by a Gaussian on the score with a
//! class prior. Densities are compared in the log domain; ties go to like, so
//! a track is only flagged dislike on strictly stronger evidence.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use crate::Error;

pub const DEFAULT_VARIANCE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Like,
    Dislike,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Like => "like",
            Label::Dislike => "dislike",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledScore {
    pub score: f64,
    pub label: Label,
}

/// Gaussian parameters and prior of one class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassModel {
    pub mean: f64,
    pub variance: f64,
    pub prior: f64,
}

impl ClassModel {
    fn log_joint(&self, x: f64) -> f64 {
        let d = x - self.mean;
        libm::log(self.prior)
            - 0.5 * libm::log(2.0 * PI * self.variance)
            - d * d / (2.0 * self.variance)
    }

    pub fn std_dev(&self) -> f64 {
        libm::sqrt(self.variance)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GnbModel {
    pub like: ClassModel,
    pub dislike: ClassModel,
}

/// Outcome of classifying one score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classification {
    pub label: Label,
    pub posterior_like: f64,
    pub posterior_dislike: f64,
}

fn moments(scores: &[f64]) -> (f64, f64) {
    let n = scores.len() as f64;
    let mean = scores.iter().sum::<f64>() / n;
    let var = scores.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / n;
    (mean, var)
}

/// Class means, population variances (floored) and frequencies.
pub fn fit_gnb(samples: &[LabeledScore], variance_floor: f64) -> Result<GnbModel, Error> {
    let pick = |label| {
        samples
            .iter()
            .filter(|s| s.label == label)
            .map(|s| s.score)
            .collect::<Vec<f64>>()
    };
    let likes = pick(Label::Like);
    let dislikes = pick(Label::Dislike);
    if likes.is_empty() {
        return Err(Error::MissingClass(Label::Like));
    }
    if dislikes.is_empty() {
        return Err(Error::MissingClass(Label::Dislike));
    }
    let total = samples.len() as f64;
    let class = |scores: &[f64]| {
        let (mean, var) = moments(scores);
        ClassModel {
            mean,
            variance: var.max(variance_floor),
            prior: scores.len() as f64 / total,
        }
    };
    Ok(GnbModel {
        like: class(&likes),
        dislike: class(&dislikes),
    })
}

impl GnbModel {
    pub fn classify(&self, score: f64) -> Classification {
        let ll = self.like.log_joint(score);
        let ld = self.dislike.log_joint(score);
        let top = ll.max(ld);
        let (el, ed) = (libm::exp(ll - top), libm::exp(ld - top));
        let z = el + ed;
        Classification {
            label: if ld > ll { Label::Dislike } else { Label::Like },
            posterior_like: el / z,
            posterior_dislike: ed / z,
        }
    }

    pub fn is_dislike(&self, score: f64) -> bool {
        self.classify(score).label == Label::Dislike
    }

    /// Like-class mean minus one like-class standard deviation.
    pub fn default_swap_threshold(&self) -> f64 {
        self.like.mean - self.like.std_dev()
    }
}

/// Precision and recall of one class; `None` where the ratio is 0/0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassScores {
    pub precision: Option<f64>,
    pub recall: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifierReport {
    pub like: ClassScores,
    pub dislike: ClassScores,
    /// Confusion counts indexed `[truth][predicted]`, like = 0, dislike = 1.
    pub confusion: [[usize; 2]; 2],
}

pub fn evaluate_classifier(model: &GnbModel, held_out: &[LabeledScore]) -> ClassifierReport {
    let idx = |l: Label| (l == Label::Dislike) as usize;
    let mut confusion = [[0usize; 2]; 2];
    for s in held_out {
        confusion[idx(s.label)][idx(model.classify(s.score).label)] += 1;
    }
    let ratio = |num: usize, den: usize| (den > 0).then(|| num as f64 / den as f64);
    let scores = |c: usize| ClassScores {
        precision: ratio(confusion[c][c], confusion[0][c] + confusion[1][c]),
        recall: ratio(confusion[c][c], confusion[c][0] + confusion[c][1]),
    };
    ClassifierReport {
        like: scores(0),
        dislike: scores(1),
        confusion,
    }
}
