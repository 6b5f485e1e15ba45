use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use super::{top_n, RecommendationList, Recommender};
use crate::event::{TrackId, UserId};
use crate::matrix::InteractionMatrix;
use crate::Error;

/// Tracks ranked by number of distinct listeners, ties by ascending id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PopularityModel {
    pub ranked_tracks: Vec<(TrackId, u64)>,
}

pub fn train_popularity(matrix: &InteractionMatrix) -> PopularityModel {
    let mut ranked_tracks: Vec<(TrackId, u64)> = matrix
        .track_ids()
        .iter()
        .enumerate()
        .map(|(ti, &t)| (t, matrix.col(ti).len() as u64))
        .collect();
    ranked_tracks.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    PopularityModel { ranked_tracks }
}

impl Recommender for PopularityModel {
    fn recommend(
        &self,
        user: UserId,
        n: usize,
        exclude: &BTreeSet<TrackId>,
    ) -> Result<RecommendationList, Error> {
        if n == 0 {
            return Err(Error::InvalidRank);
        }
        let items = top_n(
            self.ranked_tracks.iter().map(|&(t, s)| (t, s as f64)),
            n,
            exclude,
        );
        Ok(RecommendationList { user, items })
    }
}
