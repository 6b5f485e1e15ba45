//! Matrix factorization of 1..5 implicit ratings by stochastic gradient descent.
//!
//! The model predicts `mean + p_u . q_i` and each epoch takes one step per
//! rating on
//!
//! ```text
//! (r - mean - p_u . q_i)^2 + reg * (|p_u|^2 + |q_i|^2)
//! ```
//!
//! with the factor 2 of the gradient folded into the learning rate.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use super::factor::dot;
use super::{FactorKind, FactorModel, Hyperparameters};
use crate::event::{TrackId, UserId};
use crate::rng::keyed_rng;
use crate::signals::RatingTriple;
use crate::Error;

const INIT_STREAM: u64 = 1;
const ORDER_STREAM: u64 = 2;
const INIT_SCALE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SgdParams {
    pub factors: usize,
    pub epochs: usize,
    pub regularization: f64,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for SgdParams {
    fn default() -> Self {
        Self {
            factors: 50,
            epochs: 20,
            regularization: 0.05,
            learning_rate: 0.005,
            seed: 0,
        }
    }
}

impl SgdParams {
    fn validate(&self) -> Result<(), Error> {
        if self.factors == 0 {
            return Err(Error::InvalidHyperparameter("factors"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidHyperparameter("learning_rate"));
        }
        if !(self.regularization >= 0.0 && self.regularization.is_finite()) {
            return Err(Error::InvalidHyperparameter("regularization"));
        }
        Ok(())
    }
}

/// A trained model and its training objective after each epoch.
#[derive(Debug, Clone)]
pub struct SgdFit {
    pub model: FactorModel,
    pub epoch_loss: Vec<f64>,
}

pub fn train_mf_sgd(ratings: &[RatingTriple], params: &SgdParams) -> Result<FactorModel, Error> {
    fit_mf_sgd(ratings, params).map(|fit| fit.model)
}

pub fn fit_mf_sgd(ratings: &[RatingTriple], params: &SgdParams) -> Result<SgdFit, Error> {
    params.validate()?;
    if ratings.is_empty() {
        return Err(Error::EmptyRatings);
    }
    let k = params.factors;

    let user_pos: BTreeMap<UserId, usize> = index_of(ratings.iter().map(|r| r.user));
    let track_pos: BTreeMap<TrackId, usize> = index_of(ratings.iter().map(|r| r.track));
    let examples: Vec<(usize, usize, f64)> = ratings
        .iter()
        .map(|r| (user_pos[&r.user], track_pos[&r.track], r.rating as f64))
        .collect();
    let global_mean = examples.iter().map(|e| e.2).sum::<f64>() / examples.len() as f64;

    let mut init = keyed_rng(params.seed, INIT_STREAM);
    let mut draw = |n: usize| -> Vec<f64> {
        (0..n)
            .map(|_| init.random_range(-INIT_SCALE..=INIT_SCALE))
            .collect()
    };
    let mut users = draw(user_pos.len() * k);
    let mut items = draw(track_pos.len() * k);

    let (lr, reg) = (params.learning_rate, params.regularization);
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut order_rng = keyed_rng(params.seed, ORDER_STREAM);
    let mut epoch_loss = Vec::with_capacity(params.epochs);
    for _ in 0..params.epochs {
        order.shuffle(&mut order_rng);
        for &e in &order {
            let (u, i, r) = examples[e];
            let p = &mut users[u * k..(u + 1) * k];
            let q = &mut items[i * k..(i + 1) * k];
            let err = r - global_mean - dot(p, q);
            for (pf, qf) in p.iter_mut().zip(q.iter_mut()) {
                let (pv, qv) = (*pf, *qf);
                *pf += lr * (err * qv - reg * pv);
                *qf += lr * (err * pv - reg * qv);
            }
        }
        epoch_loss.push(objective(&examples, global_mean, &users, &items, k, reg));
    }

    let hyper = Hyperparameters {
        factors: k,
        iterations: params.epochs,
        regularization: reg,
        learning_rate: lr,
        confidence: 0.0,
        seed: params.seed,
    };
    let model = FactorModel::from_parts(
        FactorKind::Sgd,
        hyper,
        global_mean,
        user_pos.keys().copied().collect(),
        track_pos.keys().copied().collect(),
        users,
        items,
    )?;
    Ok(SgdFit { model, epoch_loss })
}

fn index_of(ids: impl Iterator<Item = u64>) -> BTreeMap<u64, usize> {
    let mut map: BTreeMap<u64, usize> = ids.map(|id| (id, 0)).collect();
    for (i, v) in map.values_mut().enumerate() {
        *v = i;
    }
    map
}

fn objective(
    examples: &[(usize, usize, f64)],
    mean: f64,
    users: &[f64],
    items: &[f64],
    k: usize,
    reg: f64,
) -> f64 {
    examples
        .iter()
        .map(|&(u, i, r)| {
            let p = &users[u * k..(u + 1) * k];
            let q = &items[i * k..(i + 1) * k];
            let err = r - mean - dot(p, q);
            err * err + reg * (dot(p, p) + dot(q, q))
        })
        .sum()
}

fn indexed(model: &FactorModel, ratings: &[RatingTriple]) -> Vec<(usize, usize, f64)> {
    ratings
        .iter()
        .filter_map(|r| {
            Some((
                model.user_index(r.user)?,
                model.track_index(r.track)?,
                r.rating as f64,
            ))
        })
        .collect()
}

/// Training objective of `model` on `ratings` (pairs unknown to the model are ignored).
pub fn sgd_objective(model: &FactorModel, ratings: &[RatingTriple], regularization: f64) -> f64 {
    objective(
        &indexed(model, ratings),
        model.global_mean,
        &model.user_factors,
        &model.item_factors,
        model.factors(),
        regularization,
    )
}

/// Exact gradient of [`sgd_objective`] with respect to the user and item
/// factor buffers (same layout as the model's).
pub fn sgd_gradient(
    model: &FactorModel,
    ratings: &[RatingTriple],
    regularization: f64,
) -> (Vec<f64>, Vec<f64>) {
    let k = model.factors();
    let mut gu = alloc::vec![0.0; model.user_factors.len()];
    let mut gi = alloc::vec![0.0; model.item_factors.len()];
    for (u, i, r) in indexed(model, ratings) {
        let p = model.user_vector(u);
        let q = model.item_vector(i);
        let err = r - model.global_mean - dot(p, q);
        for f in 0..k {
            gu[u * k + f] += -2.0 * err * q[f] + 2.0 * regularization * p[f];
            gi[i * k + f] += -2.0 * err * p[f] + 2.0 * regularization * q[f];
        }
    }
    (gu, gi)
}
