//! The four recommender families and their shared top-N interface.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::event::{TrackId, UserId};
use crate::Error;

mod als;
mod factor;
mod knn;
mod linalg;
mod popularity;
mod sgd;

pub use als::{als_objective, fit_als_implicit, train_als_implicit, AlsFit, AlsParams};
pub use factor::{FactorKind, FactorModel, Hyperparameters};
pub use knn::{recommend_knn, tanimoto, train_user_knn, KnnModel, DEFAULT_NEIGHBORHOOD};
pub use linalg::solve_spd;
pub use popularity::{train_popularity, PopularityModel};
pub use sgd::{fit_mf_sgd, sgd_gradient, sgd_objective, train_mf_sgd, SgdFit, SgdParams};

/// Ranked tracks for one user, best first.
#[derive(Debug, Clone, PartialEq)]
pub struct RecommendationList {
    pub user: UserId,
    pub items: Vec<(TrackId, f64)>,
}

impl RecommendationList {
    pub fn tracks(&self) -> impl Iterator<Item = TrackId> + '_ {
        self.items.iter().map(|&(t, _)| t)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// A model able to produce a top-N list.
pub trait Recommender {
    fn recommend(
        &self,
        user: UserId,
        n: usize,
        exclude: &BTreeSet<TrackId>,
    ) -> Result<RecommendationList, Error>;
}

/// Score descending, then track id ascending.
pub fn rank_order(a: &(TrackId, f64), b: &(TrackId, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then(a.0.cmp(&b.0))
}

/// Best `n` unexcluded candidates in [`rank_order`].
pub fn top_n(
    candidates: impl IntoIterator<Item = (TrackId, f64)>,
    n: usize,
    exclude: &BTreeSet<TrackId>,
) -> Vec<(TrackId, f64)> {
    let mut items: Vec<(TrackId, f64)> = candidates
        .into_iter()
        .filter(|(t, _)| !exclude.contains(t))
        .collect();
    if items.len() > n {
        items.select_nth_unstable_by(n, rank_order);
        items.truncate(n);
    }
    items.sort_unstable_by(rank_order);
    items
}

/// Uniform entry point over popularity and factor models.
pub fn recommend_scores<R: Recommender + ?Sized>(
    model: &R,
    user: UserId,
    n: usize,
    exclude: &BTreeSet<TrackId>,
) -> Result<RecommendationList, Error> {
    model.recommend(user, n, exclude)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn top_n_orders_and_truncates() {
        let exclude: BTreeSet<TrackId> = [4].into_iter().collect();
        let got = top_n(
            [(3, 1.0), (1, 2.0), (2, 1.0), (4, 9.0), (5, 0.5)],
            3,
            &exclude,
        );
        assert_eq!(got, alloc::vec![(1, 2.0), (2, 1.0), (3, 1.0)]);
        assert_eq!(top_n([(1, 1.0)], 10, &BTreeSet::new()).len(), 1);
    }
}
