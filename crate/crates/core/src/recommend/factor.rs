use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use super::{top_n, RecommendationList, Recommender};
use crate::event::{TrackId, UserId};
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorKind {
    /// Explicit-rating factorization trained by SGD, with a global mean offset.
    Sgd,
    /// Confidence-weighted implicit ALS.
    Als,
}

impl FactorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FactorKind::Sgd => "mf_sgd",
            FactorKind::Als => "als",
        }
    }
}

/// Training settings recorded with a factor model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperparameters {
    pub factors: usize,
    pub iterations: usize,
    pub regularization: f64,
    /// SGD step size; unused by ALS.
    pub learning_rate: f64,
    /// ALS confidence weight; unused by SGD.
    pub confidence: f64,
    pub seed: u64,
}

/// Latent user and item vectors, row-major with `factors` columns.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorModel {
    pub kind: FactorKind,
    pub hyper: Hyperparameters,
    /// Mean training rating for SGD models, 0 for ALS.
    pub global_mean: f64,
    user_ids: Vec<UserId>,
    track_ids: Vec<TrackId>,
    user_pos: BTreeMap<UserId, usize>,
    track_pos: BTreeMap<TrackId, usize>,
    pub user_factors: Vec<f64>,
    pub item_factors: Vec<f64>,
}

impl FactorModel {
    /// Assembles a model; `user_ids`/`track_ids` must be ascending and
    /// factor buffers sized `ids.len() * hyper.factors`.
    pub fn from_parts(
        kind: FactorKind,
        hyper: Hyperparameters,
        global_mean: f64,
        user_ids: Vec<UserId>,
        track_ids: Vec<TrackId>,
        user_factors: Vec<f64>,
        item_factors: Vec<f64>,
    ) -> Result<Self, Error> {
        let k = hyper.factors;
        if k == 0 {
            return Err(Error::InvalidHyperparameter("factors"));
        }
        if user_factors.len() != user_ids.len() * k || item_factors.len() != track_ids.len() * k {
            return Err(Error::InvalidHyperparameter("factor matrix shape"));
        }
        if user_factors
            .iter()
            .chain(&item_factors)
            .any(|v| !v.is_finite())
            || !global_mean.is_finite()
        {
            return Err(Error::InvalidHyperparameter("non-finite factor"));
        }
        let user_pos = user_ids.iter().enumerate().map(|(i, &u)| (u, i)).collect();
        let track_pos = track_ids.iter().enumerate().map(|(i, &t)| (t, i)).collect();
        Ok(Self {
            kind,
            hyper,
            global_mean,
            user_ids,
            track_ids,
            user_pos,
            track_pos,
            user_factors,
            item_factors,
        })
    }

    pub fn factors(&self) -> usize {
        self.hyper.factors
    }

    pub fn user_ids(&self) -> &[UserId] {
        &self.user_ids
    }

    pub fn track_ids(&self) -> &[TrackId] {
        &self.track_ids
    }

    pub fn user_index(&self, user: UserId) -> Option<usize> {
        self.user_pos.get(&user).copied()
    }

    pub fn track_index(&self, track: TrackId) -> Option<usize> {
        self.track_pos.get(&track).copied()
    }

    pub fn user_vector(&self, idx: usize) -> &[f64] {
        let k = self.factors();
        &self.user_factors[idx * k..(idx + 1) * k]
    }

    pub fn item_vector(&self, idx: usize) -> &[f64] {
        let k = self.factors();
        &self.item_factors[idx * k..(idx + 1) * k]
    }

    pub(crate) fn predict_indexed(&self, ui: usize, ti: usize) -> f64 {
        self.global_mean + dot(self.user_vector(ui), self.item_vector(ti))
    }

    /// Estimated rating, unclamped. Unknown users or tracks get the global
    /// mean (0 for ALS).
    pub fn predict(&self, user: UserId, track: TrackId) -> f64 {
        match (self.user_index(user), self.track_index(track)) {
            (Some(ui), Some(ti)) => self.predict_indexed(ui, ti),
            _ => self.global_mean,
        }
    }

    /// Like [`Recommender::recommend`] but rejects users absent from training.
    pub fn recommend_strict(
        &self,
        user: UserId,
        n: usize,
        exclude: &BTreeSet<TrackId>,
    ) -> Result<RecommendationList, Error> {
        if self.user_index(user).is_none() {
            return Err(Error::UnknownUser(user));
        }
        self.recommend(user, n, exclude)
    }
}

impl Recommender for FactorModel {
    fn recommend(
        &self,
        user: UserId,
        n: usize,
        exclude: &BTreeSet<TrackId>,
    ) -> Result<RecommendationList, Error> {
        if n == 0 {
            return Err(Error::InvalidRank);
        }
        let items = match self.user_index(user) {
            Some(ui) => top_n(
                self.track_ids
                    .iter()
                    .enumerate()
                    .map(|(ti, &t)| (t, self.predict_indexed(ui, ti))),
                n,
                exclude,
            ),
            None => top_n(
                self.track_ids.iter().map(|&t| (t, self.global_mean)),
                n,
                exclude,
            ),
        };
        Ok(RecommendationList { user, items })
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
