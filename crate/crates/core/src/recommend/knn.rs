use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use super::{top_n, RecommendationList, Recommender};
use crate::event::{TrackId, UserId};
use crate::matrix::InteractionMatrix;
use crate::Error;

pub const DEFAULT_NEIGHBORHOOD: usize = 100;

/// Intersection over union; 0 when both sets are empty.
pub fn tanimoto<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    ratio(inter, union)
}

fn ratio(inter: usize, union: usize) -> f64 {
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

/// User-based neighbourhood model over a binary matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel {
    pub matrix: InteractionMatrix,
    pub neighborhood_size: usize,
}

pub fn train_user_knn(
    matrix: InteractionMatrix,
    neighborhood_size: usize,
) -> Result<KnnModel, Error> {
    if neighborhood_size == 0 {
        return Err(Error::InvalidNeighborhood);
    }
    if let Some((user, track, value)) = matrix.first_non_binary() {
        return Err(Error::NonBinaryMatrix { user, track, value });
    }
    Ok(KnnModel {
        matrix,
        neighborhood_size,
    })
}

impl KnnModel {
    /// Neighbours of a dense user index as (dense index, similarity), best
    /// first, ties by ascending user id. Zero-similarity users are skipped.
    pub fn neighbors(&self, user_idx: usize) -> Vec<(usize, f64)> {
        let m = &self.matrix;
        let own = m.row(user_idx);
        let mut overlap = alloc::vec![0usize; m.user_count()];
        let mut touched = Vec::new();
        for &(ti, _) in own {
            for &(vi, _) in m.col(ti) {
                if overlap[vi] == 0 {
                    touched.push(vi);
                }
                overlap[vi] += 1;
            }
        }
        let mut sims: Vec<(usize, f64)> = touched
            .into_iter()
            .filter(|&vi| vi != user_idx)
            .map(|vi| {
                let inter = overlap[vi];
                (vi, ratio(inter, own.len() + m.row(vi).len() - inter))
            })
            .collect();
        // dense indices follow id order, so index order is id order
        sims.sort_unstable_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        sims.truncate(self.neighborhood_size);
        sims
    }
}

/// Scores each candidate track by the summed similarity of the neighbours
/// who interacted with it, summing in neighbour rank order.
pub fn recommend_knn(
    model: &KnnModel,
    user: UserId,
    n: usize,
    exclude: &BTreeSet<TrackId>,
) -> Result<RecommendationList, Error> {
    if n == 0 {
        return Err(Error::InvalidRank);
    }
    let m = &model.matrix;
    let user_idx = m.user_index(user).ok_or(Error::UnknownUser(user))?;
    let mut scores = alloc::vec![0.0f64; m.track_count()];
    let mut seen = alloc::vec![false; m.track_count()];
    let mut candidates = Vec::new();
    for (vi, sim) in model.neighbors(user_idx) {
        for &(ti, _) in m.row(vi) {
            if !seen[ti] {
                seen[ti] = true;
                candidates.push(ti);
            }
            scores[ti] += sim;
        }
    }
    let items = top_n(
        candidates
            .into_iter()
            .map(|ti| (m.track_ids()[ti], scores[ti])),
        n,
        exclude,
    );
    Ok(RecommendationList { user, items })
}

impl Recommender for KnnModel {
    fn recommend(
        &self,
        user: UserId,
        n: usize,
        exclude: &BTreeSet<TrackId>,
    ) -> Result<RecommendationList, Error> {
        recommend_knn(self, user, n, exclude)
    }
}
