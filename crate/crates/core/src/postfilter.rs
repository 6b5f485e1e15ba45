//! Post-filters over a recommendation list annotated with estimated ratings
//! and predicted dislikes.

use alloc::collections::BTreeSet;
use alloc::string::ToString;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::event::{TrackId, UserId};
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredEntry {
    pub track: TrackId,
    /// Estimated rating.
    pub score: f64,
    /// Predicted dislike.
    pub dislike: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredList {
    pub user: UserId,
    pub entries: Vec<ScoredEntry>,
}

impl ScoredList {
    pub fn tracks(&self) -> impl Iterator<Item = TrackId> + '_ {
        self.entries.iter().map(|e| e.track)
    }
}

/// Stable sort by estimated rating, highest first.
pub fn rank_filter(list: &ScoredList) -> ScoredList {
    let mut entries = list.entries.clone();
    entries.sort_by(|a, b| b.score.total_cmp(&a.score));
    ScoredList {
        user: list.user,
        entries,
    }
}

/// Drops predicted dislikes, keeping order.
pub fn del_filter(list: &ScoredList) -> ScoredList {
    ScoredList {
        user: list.user,
        entries: list
            .entries
            .iter()
            .filter(|e| !e.dislike)
            .copied()
            .collect(),
    }
}

/// Replaces each predicted dislike by the first later entry that is not a
/// predicted dislike, scores at least `alpha` and has not been used yet.
///
/// A promoted entry is consumed and skipped when the scan reaches its own
/// position. A dislike with no eligible replacement is dropped.
pub fn swap_filter(list: &ScoredList, alpha: f64) -> ScoredList {
    let entries = &list.entries;
    let mut consumed = alloc::vec![false; entries.len()];
    let mut out = Vec::with_capacity(entries.len());
    for (pos, e) in entries.iter().enumerate() {
        if !e.dislike {
            if !consumed[pos] {
                consumed[pos] = true;
                out.push(*e);
            }
            continue;
        }
        let replacement = (pos + 1..entries.len())
            .find(|&j| !consumed[j] && !entries[j].dislike && entries[j].score >= alpha);
        if let Some(j) = replacement {
            consumed[j] = true;
            out.push(entries[j]);
        }
    }
    ScoredList {
        user: list.user,
        entries: out,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Filter {
    None,
    Rank,
    Del,
    Swap { alpha: f64 },
}

impl Filter {
    pub fn apply(&self, list: &ScoredList) -> ScoredList {
        match *self {
            Filter::None => list.clone(),
            Filter::Rank => rank_filter(list),
            Filter::Del => del_filter(list),
            Filter::Swap { alpha } => swap_filter(list, alpha),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Filter::None => "none",
            Filter::Rank => "rank",
            Filter::Del => "del",
            Filter::Swap { .. } => "swap",
        }
    }
}

impl fmt::Display for Filter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Filter kind without its parameters, as named in configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FilterKind {
    None,
    Rank,
    Del,
    Swap,
}

impl FilterKind {
    pub fn with_alpha(self, alpha: f64) -> Filter {
        match self {
            FilterKind::None => Filter::None,
            FilterKind::Rank => Filter::Rank,
            FilterKind::Del => Filter::Del,
            FilterKind::Swap => Filter::Swap { alpha },
        }
    }

    pub fn as_str(self) -> &'static str {
        self.with_alpha(0.0).name()
    }
}

impl fmt::Display for FilterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FilterKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(FilterKind::None),
            "rank" => Ok(FilterKind::Rank),
            "del" => Ok(FilterKind::Del),
            "swap" => Ok(FilterKind::Swap),
            _ => Err(Error::UnknownFilter(s.to_string())),
        }
    }
}

/// True if no track occurs twice.
pub fn is_duplicate_free(list: &ScoredList) -> bool {
    let mut seen = BTreeSet::new();
    list.tracks().all(|t| seen.insert(t))
}
