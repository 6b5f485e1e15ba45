use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::event::{TrackId, UserId};

/// Sparse user x track matrix stored by user, with a column index by track.
///
/// Dense indices follow ascending id order. Zero entries are never stored.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct InteractionMatrix {
    user_ids: Vec<UserId>,
    track_ids: Vec<TrackId>,
    user_pos: BTreeMap<UserId, usize>,
    track_pos: BTreeMap<TrackId, usize>,
    rows: Vec<Vec<(usize, f64)>>,
    cols: Vec<Vec<(usize, f64)>>,
}

impl InteractionMatrix {
    /// Later duplicates of a cell overwrite earlier ones; zeros are dropped.
    pub fn from_entries(entries: impl IntoIterator<Item = (UserId, TrackId, f64)>) -> Self {
        let mut cells: BTreeMap<(UserId, TrackId), f64> = BTreeMap::new();
        for (u, t, v) in entries {
            cells.insert((u, t), v);
        }
        cells.retain(|_, v| *v != 0.0);

        let mut user_ids: Vec<UserId> = cells.keys().map(|&(u, _)| u).collect();
        user_ids.dedup();
        let mut track_ids: Vec<TrackId> = cells.keys().map(|&(_, t)| t).collect();
        track_ids.sort_unstable();
        track_ids.dedup();
        let user_pos: BTreeMap<UserId, usize> =
            user_ids.iter().enumerate().map(|(i, &u)| (u, i)).collect();
        let track_pos: BTreeMap<TrackId, usize> =
            track_ids.iter().enumerate().map(|(i, &t)| (t, i)).collect();

        let mut rows = alloc::vec![Vec::new(); user_ids.len()];
        let mut cols = alloc::vec![Vec::new(); track_ids.len()];
        for ((u, t), v) in cells {
            let (ui, ti) = (user_pos[&u], track_pos[&t]);
            rows[ui].push((ti, v));
            cols[ti].push((ui, v));
        }
        Self {
            user_ids,
            track_ids,
            user_pos,
            track_pos,
            rows,
            cols,
        }
    }

    pub fn user_count(&self) -> usize {
        self.user_ids.len()
    }

    pub fn track_count(&self) -> usize {
        self.track_ids.len()
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.user_ids.is_empty()
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

    /// Row of a dense user index: (dense track index, value), ascending.
    pub fn row(&self, user_idx: usize) -> &[(usize, f64)] {
        &self.rows[user_idx]
    }

    /// Column of a dense track index: (dense user index, value), ascending.
    pub fn col(&self, track_idx: usize) -> &[(usize, f64)] {
        &self.cols[track_idx]
    }

    pub fn get(&self, user: UserId, track: TrackId) -> Option<f64> {
        let row = &self.rows[self.user_index(user)?];
        let ti = self.track_index(track)?;
        row.binary_search_by_key(&ti, |&(t, _)| t)
            .ok()
            .map(|p| row[p].1)
    }

    /// All stored cells as (user, track, value), ordered by user then track.
    pub fn entries(&self) -> impl Iterator<Item = (UserId, TrackId, f64)> + '_ {
        self.rows.iter().enumerate().flat_map(move |(ui, row)| {
            row.iter()
                .map(move |&(ti, v)| (self.user_ids[ui], self.track_ids[ti], v))
        })
    }

    /// First entry whose value is not exactly 1.
    pub fn first_non_binary(&self) -> Option<(UserId, TrackId, f64)> {
        self.entries().find(|&(_, _, v)| v != 1.0)
    }

    pub fn first_negative(&self) -> Option<(UserId, TrackId, f64)> {
        self.entries().find(|&(_, _, v)| v < 0.0 || v.is_nan())
    }
}
