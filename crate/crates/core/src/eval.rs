//! Criterion-specific average precision, MAP@k and list composition.
//!
//! Relevance is read off the hidden partition: a recommended track is
//! relevant for criterion "likes" when the user's hidden plays of it form an
//! implicit like, and so on for the other four criteria. The AP denominator is
//! the size of the user's criterion set, so users with an empty set cannot be
//! evaluated and are counted separately.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::ToString;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::event::{TrackId, UserId};
use crate::signals::{InteractionSummary, SummaryTable};
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RelevanceCriterion {
    Events,
    Streams,
    Likes,
    Skips,
    Dislikes,
}

impl RelevanceCriterion {
    pub const ALL: [RelevanceCriterion; 5] = [
        RelevanceCriterion::Events,
        RelevanceCriterion::Streams,
        RelevanceCriterion::Likes,
        RelevanceCriterion::Skips,
        RelevanceCriterion::Dislikes,
    ];

    pub fn matches(self, s: &InteractionSummary) -> bool {
        match self {
            RelevanceCriterion::Events => s.total_plays > 0,
            RelevanceCriterion::Streams => s.stream_count >= 1,
            RelevanceCriterion::Likes => s.like,
            RelevanceCriterion::Skips => s.skip_count >= 1,
            RelevanceCriterion::Dislikes => s.dislike,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RelevanceCriterion::Events => "events",
            RelevanceCriterion::Streams => "streams",
            RelevanceCriterion::Likes => "likes",
            RelevanceCriterion::Skips => "skips",
            RelevanceCriterion::Dislikes => "dislikes",
        }
    }

    /// One-letter tag: E, S, L, K, D.
    pub fn tag(self) -> char {
        match self {
            RelevanceCriterion::Events => 'E',
            RelevanceCriterion::Streams => 'S',
            RelevanceCriterion::Likes => 'L',
            RelevanceCriterion::Skips => 'K',
            RelevanceCriterion::Dislikes => 'D',
        }
    }
}

impl fmt::Display for RelevanceCriterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RelevanceCriterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RelevanceCriterion::ALL
            .into_iter()
            .find(|c| c.as_str() == s || s.len() == 1 && s.starts_with(c.tag()))
            .ok_or_else(|| Error::UnknownCriterion(s.to_string()))
    }
}

/// Which set size divides the AP sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DenominatorMode {
    /// Size of the criterion-specific relevant set.
    #[default]
    Adapted,
    /// Number of unique hidden tracks regardless of criterion.
    AllHidden,
}

impl DenominatorMode {
    pub fn as_str(self) -> &'static str {
        match self {
            DenominatorMode::Adapted => "adapted",
            DenominatorMode::AllHidden => "all_hidden",
        }
    }
}

impl fmt::Display for DenominatorMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DenominatorMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "adapted" => Ok(DenominatorMode::Adapted),
            "all_hidden" => Ok(DenominatorMode::AllHidden),
            other => Err(Error::UnknownDenominator(other.to_string())),
        }
    }
}

/// Per-user relevant tracks and AP denominators for one criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct RelevanceSets {
    pub criterion: RelevanceCriterion,
    pub sets: BTreeMap<UserId, BTreeSet<TrackId>>,
    pub denominators: BTreeMap<UserId, usize>,
}

impl RelevanceSets {
    pub fn get(&self, user: UserId) -> Option<&BTreeSet<TrackId>> {
        self.sets.get(&user)
    }
}

pub fn criterion_relevance(hidden: &SummaryTable, criterion: RelevanceCriterion) -> RelevanceSets {
    criterion_relevance_with(hidden, criterion, None, DenominatorMode::Adapted)
}

/// Relevance sets for every user of `hidden`. Pairs also present in
/// `visible` are dropped before anything else.
pub fn criterion_relevance_with(
    hidden: &SummaryTable,
    criterion: RelevanceCriterion,
    visible: Option<&SummaryTable>,
    denominator: DenominatorMode,
) -> RelevanceSets {
    let mut sets: BTreeMap<UserId, BTreeSet<TrackId>> = BTreeMap::new();
    let mut all_hidden: BTreeMap<UserId, usize> = BTreeMap::new();
    for s in hidden.iter() {
        let set = sets.entry(s.user).or_default();
        if visible.is_some_and(|v| v.get(s.user, s.track).is_some()) {
            continue;
        }
        *all_hidden.entry(s.user).or_default() += 1;
        if criterion.matches(s) {
            set.insert(s.track);
        }
    }
    let denominators = sets
        .iter()
        .map(|(&u, set)| {
            let d = match denominator {
                DenominatorMode::Adapted => set.len(),
                DenominatorMode::AllHidden => all_hidden.get(&u).copied().unwrap_or(0),
            };
            (u, d)
        })
        .collect();
    RelevanceSets {
        criterion,
        sets,
        denominators,
    }
}

/// Sum of precision-at-m over relevant positions among the first `k`,
/// divided by `denominator`.
pub fn average_precision_at_k(
    recs: &[TrackId],
    relevant: &BTreeSet<TrackId>,
    k: usize,
    denominator: usize,
) -> Result<f64, Error> {
    if denominator == 0 {
        return Err(Error::ZeroDenominator);
    }
    if k == 0 {
        return Err(Error::InvalidRank);
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (pos, track) in recs.iter().take(k).enumerate() {
        if relevant.contains(track) {
            hits += 1;
            sum += hits as f64 / (pos + 1) as f64;
        }
    }
    Ok(sum / denominator as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapResult {
    pub map: f64,
    pub users_evaluated: usize,
    pub users_excluded: usize,
}

/// Mean AP@k over users with a non-empty relevant set (ascending user id).
/// Users without a list are scored on an empty list.
pub fn map_at_k(
    per_user_recs: &BTreeMap<UserId, Vec<TrackId>>,
    relevance: &RelevanceSets,
    k: usize,
) -> Result<MapResult, Error> {
    if k == 0 {
        return Err(Error::InvalidRank);
    }
    let mut sum = 0.0;
    let mut evaluated = 0usize;
    let mut excluded = 0usize;
    for (user, relevant) in &relevance.sets {
        let denom = relevance.denominators.get(user).copied().unwrap_or(0);
        if relevant.is_empty() || denom == 0 {
            excluded += 1;
            continue;
        }
        let recs = per_user_recs.get(user).map_or(&[][..], Vec::as_slice);
        sum += average_precision_at_k(recs, relevant, k, denom)?;
        evaluated += 1;
    }
    if evaluated == 0 {
        return Err(Error::NoEvaluableUsers);
    }
    Ok(MapResult {
        map: sum / evaluated as f64,
        users_evaluated: evaluated,
        users_excluded: excluded,
    })
}

/// Breakdown of the top-k recommendations the user actually played in the
/// hidden partition.
///
/// `streams` and `skips` count pairs with at least one stream / skip and can
/// overlap; `likes` and `dislikes` are exclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Composition {
    pub recommended: usize,
    pub events: usize,
    pub streams: usize,
    pub likes: usize,
    pub skips: usize,
    pub dislikes: usize,
}

impl Composition {
    fn pct(&self, count: usize) -> Option<f64> {
        (self.events > 0).then(|| 100.0 * count as f64 / self.events as f64)
    }

    pub fn streams_pct(&self) -> Option<f64> {
        self.pct(self.streams)
    }

    pub fn likes_pct(&self) -> Option<f64> {
        self.pct(self.likes)
    }

    pub fn skips_pct(&self) -> Option<f64> {
        self.pct(self.skips)
    }

    pub fn dislikes_pct(&self) -> Option<f64> {
        self.pct(self.dislikes)
    }
}

pub fn composition_report(
    per_user_recs: &BTreeMap<UserId, Vec<TrackId>>,
    hidden: &SummaryTable,
    k: usize,
) -> Result<Composition, Error> {
    if k == 0 {
        return Err(Error::InvalidRank);
    }
    let mut c = Composition::default();
    for (&user, recs) in per_user_recs {
        for &track in recs.iter().take(k) {
            c.recommended += 1;
            let Some(s) = hidden.get(user, track) else {
                continue;
            };
            c.events += 1;
            c.streams += (s.stream_count >= 1) as usize;
            c.likes += s.like as usize;
            c.skips += (s.skip_count >= 1) as usize;
            c.dislikes += s.dislike as usize;
        }
    }
    Ok(c)
}
