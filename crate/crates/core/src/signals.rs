//! Per-pair interaction summaries and the implicit signals derived from them.
//!
//! An event shorter than 30 seconds is a skip, anything else a stream. A pair
//! is an implicit like when it was streamed at least twice and never skipped,
//! and an implicit dislike when it was skipped and never streamed. The two
//! flags are mutually exclusive and often both false.

use alloc::collections::BTreeMap;
use alloc::string::ToString;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::event::{EventLog, ListeningEvent, TrackId, UserId};
use crate::matrix::InteractionMatrix;
use crate::Error;

/// Aggregated counts of one user's plays of one track.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InteractionSummary {
    pub user: UserId,
    pub track: TrackId,
    /// All plays, skips included.
    pub total_plays: u32,
    pub skip_count: u32,
    pub stream_count: u32,
    pub like: bool,
    pub dislike: bool,
}

impl InteractionSummary {
    /// Builds a summary from counts, deriving the like/dislike flags.
    pub fn from_counts(user: UserId, track: TrackId, skip_count: u32, stream_count: u32) -> Self {
        let mut s = Self {
            user,
            track,
            total_plays: skip_count + stream_count,
            skip_count,
            stream_count,
            like: false,
            dislike: false,
        };
        s.like = derive_like(&s);
        s.dislike = derive_dislike(&s);
        s
    }

    fn record(&mut self, event: &ListeningEvent) {
        self.total_plays += 1;
        if event.is_skip() {
            self.skip_count += 1;
        } else {
            self.stream_count += 1;
        }
        self.like = derive_like(self);
        self.dislike = derive_dislike(self);
    }
}

/// Streamed at least twice, never skipped.
pub fn derive_like(s: &InteractionSummary) -> bool {
    s.stream_count >= 2 && s.skip_count == 0
}

/// Skipped at least once, never streamed.
pub fn derive_dislike(s: &InteractionSummary) -> bool {
    s.skip_count >= 1 && s.stream_count == 0
}

/// One summary per unique (user, track) pair, ordered by user then track.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SummaryTable {
    entries: BTreeMap<(UserId, TrackId), InteractionSummary>,
}

impl SummaryTable {
    pub fn get(&self, user: UserId, track: TrackId) -> Option<&InteractionSummary> {
        self.entries.get(&(user, track))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &InteractionSummary> + '_ {
        self.entries.values()
    }

    /// Summaries of one user, ascending by track.
    pub fn user_entries(&self, user: UserId) -> impl Iterator<Item = &InteractionSummary> + '_ {
        self.entries
            .range((user, TrackId::MIN)..=(user, TrackId::MAX))
            .map(|(_, s)| s)
    }

    /// Users present in the table, ascending.
    pub fn users(&self) -> Vec<UserId> {
        let mut users: Vec<UserId> = self.entries.keys().map(|&(u, _)| u).collect();
        users.dedup();
        users
    }

    pub fn insert(&mut self, summary: InteractionSummary) {
        self.entries.insert((summary.user, summary.track), summary);
    }
}

impl FromIterator<InteractionSummary> for SummaryTable {
    fn from_iter<I: IntoIterator<Item = InteractionSummary>>(iter: I) -> Self {
        let mut table = SummaryTable::default();
        for s in iter {
            table.insert(s);
        }
        table
    }
}

/// Folds a log into per-pair summaries.
pub fn summarize_interactions(log: &EventLog) -> SummaryTable {
    let mut entries: BTreeMap<(UserId, TrackId), InteractionSummary> = BTreeMap::new();
    for e in log {
        entries
            .entry((e.user, e.track))
            .or_insert_with(|| InteractionSummary::from_counts(e.user, e.track, 0, 0))
            .record(e);
    }
    SummaryTable { entries }
}

/// The three rules mapping a pair's counts onto a 1..=5 rating.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RatingFunction {
    /// Streams only.
    F1,
    /// Implicit like/dislike.
    F2,
    /// Streams weighed against skips.
    F3,
}

impl RatingFunction {
    pub const ALL: [RatingFunction; 3] =
        [RatingFunction::F1, RatingFunction::F2, RatingFunction::F3];

    pub fn rate(self, s: &InteractionSummary) -> u8 {
        match self {
            RatingFunction::F1 => rating_f1(s),
            RatingFunction::F2 => rating_f2(s),
            RatingFunction::F3 => rating_f3(s),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RatingFunction::F1 => "f1",
            RatingFunction::F2 => "f2",
            RatingFunction::F3 => "f3",
        }
    }
}

impl fmt::Display for RatingFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RatingFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "f1" | "F1" => Ok(RatingFunction::F1),
            "f2" | "F2" => Ok(RatingFunction::F2),
            "f3" | "F3" => Ok(RatingFunction::F3),
            other => Err(Error::UnknownFunction(other.to_string())),
        }
    }
}

pub fn rating_f1(s: &InteractionSummary) -> u8 {
    match s.stream_count {
        0 => 1,
        1 => 2,
        2 => 3,
        3 => 4,
        _ => 5,
    }
}

pub fn rating_f2(s: &InteractionSummary) -> u8 {
    if derive_like(s) {
        5
    } else if derive_dislike(s) {
        1
    } else {
        3
    }
}

pub fn rating_f3(s: &InteractionSummary) -> u8 {
    let (p, k) = (s.stream_count, s.skip_count);
    // first matching branch wins
    if p >= 4 && k < p {
        5
    } else if p >= 2 && k < p {
        4
    } else if k < p {
        3
    } else if p > 0 {
        2
    } else {
        1
    }
}

/// An implicit rating in 1..=5.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct RatingTriple {
    pub user: UserId,
    pub track: TrackId,
    pub rating: u8,
}

/// Applies `function` to every summary; output is ordered by (user, track).
pub fn map_ratings(table: &SummaryTable, function: RatingFunction) -> Vec<RatingTriple> {
    table
        .iter()
        .map(|s| RatingTriple {
            user: s.user,
            track: s.track,
            rating: function.rate(s),
        })
        .collect()
}

/// How summaries become recommender input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TrainingMode {
    /// 1 for every pair with any event.
    AllEvents,
    /// 1 for pairs with at least one stream.
    Streams,
    /// 1 for implicit likes.
    Likes,
    /// Stream count.
    PlayCounts,
    /// Count of all plays, skips included.
    TotalPlays,
}

impl TrainingMode {
    pub fn as_str(self) -> &'static str {
        match self {
            TrainingMode::AllEvents => "events",
            TrainingMode::Streams => "streams",
            TrainingMode::Likes => "likes",
            TrainingMode::PlayCounts => "play_counts",
            TrainingMode::TotalPlays => "total_plays",
        }
    }

    pub fn is_binary(self) -> bool {
        matches!(
            self,
            TrainingMode::AllEvents | TrainingMode::Streams | TrainingMode::Likes
        )
    }

    /// Matrix value for a summary; `None` leaves the cell empty.
    pub fn value(self, s: &InteractionSummary) -> Option<f64> {
        let v = match self {
            TrainingMode::AllEvents => (s.total_plays > 0) as u32,
            TrainingMode::Streams => (s.stream_count >= 1) as u32,
            TrainingMode::Likes => s.like as u32,
            TrainingMode::PlayCounts => s.stream_count,
            TrainingMode::TotalPlays => s.total_plays,
        };
        (v > 0).then_some(v as f64)
    }
}

impl fmt::Display for TrainingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TrainingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "events" | "all_events" => Ok(TrainingMode::AllEvents),
            "streams" => Ok(TrainingMode::Streams),
            "likes" => Ok(TrainingMode::Likes),
            "play_counts" => Ok(TrainingMode::PlayCounts),
            "total_plays" => Ok(TrainingMode::TotalPlays),
            other => Err(Error::UnknownMode(other.to_string())),
        }
    }
}

/// Builds the sparse user x track matrix a recommender trains on.
pub fn build_training_input(table: &SummaryTable, mode: TrainingMode) -> InteractionMatrix {
    InteractionMatrix::from_entries(
        table
            .iter()
            .filter_map(|s| mode.value(s).map(|v| (s.user, s.track, v))),
    )
}

/// Duration thresholds (seconds) of the "events shorter than" buckets.
pub const DURATION_THRESHOLDS: [u32; 4] = [5, 30, 60, 120];
/// Play-count thresholds of the replay buckets.
pub const REPLAY_THRESHOLDS: [u32; 3] = [2, 5, 10];

/// Distribution statistics of a log.
///
/// Stream and skip shares are event-level proportions; like and dislike
/// shares are proportions of unique pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct StatsReport {
    pub event_count: usize,
    pub unique_pair_count: usize,
    /// Events with duration below each of [`DURATION_THRESHOLDS`].
    pub duration_buckets: [usize; 4],
    /// Pairs with total plays at or above each of [`REPLAY_THRESHOLDS`].
    pub replay_buckets: [usize; 3],
    pub stream_events: usize,
    pub skip_events: usize,
    pub like_pairs: usize,
    pub dislike_pairs: usize,
    /// Index `r - 1` counts pairs rated `r`.
    pub rating_histograms: BTreeMap<RatingFunction, [usize; 5]>,
}

fn share(count: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        count as f64 / total as f64
    }
}

impl StatsReport {
    pub fn duration_share(&self, bucket: usize) -> f64 {
        share(self.duration_buckets[bucket], self.event_count)
    }

    /// Per event.
    pub fn stream_share(&self) -> f64 {
        share(self.stream_events, self.event_count)
    }

    /// Per event.
    pub fn skip_share(&self) -> f64 {
        share(self.skip_events, self.event_count)
    }

    /// Per unique pair.
    pub fn like_share(&self) -> f64 {
        share(self.like_pairs, self.unique_pair_count)
    }

    /// Per unique pair.
    pub fn dislike_share(&self) -> f64 {
        share(self.dislike_pairs, self.unique_pair_count)
    }

    pub fn rating_share(&self, function: RatingFunction, rating: u8) -> f64 {
        let count = self
            .rating_histograms
            .get(&function)
            .map_or(0, |h| h[rating as usize - 1]);
        share(count, self.unique_pair_count)
    }
}

pub fn dataset_stats(log: &EventLog, table: &SummaryTable) -> Result<StatsReport, Error> {
    let log_pairs = log.unique_pair_count();
    let table_plays: u64 = table.iter().map(|s| s.total_plays as u64).sum();
    if log_pairs != table.len() || table_plays != log.len() as u64 {
        return Err(Error::InconsistentInputs {
            log_pairs,
            table_pairs: table.len(),
        });
    }

    let mut duration_buckets = [0usize; 4];
    let mut skip_events = 0;
    for e in log {
        for (bucket, &limit) in duration_buckets.iter_mut().zip(&DURATION_THRESHOLDS) {
            if e.duration < limit {
                *bucket += 1;
            }
        }
        skip_events += e.is_skip() as usize;
    }

    let mut replay_buckets = [0usize; 3];
    let mut like_pairs = 0;
    let mut dislike_pairs = 0;
    let mut rating_histograms: BTreeMap<RatingFunction, [usize; 5]> =
        RatingFunction::ALL.iter().map(|&f| (f, [0; 5])).collect();
    for s in table.iter() {
        for (bucket, &limit) in replay_buckets.iter_mut().zip(&REPLAY_THRESHOLDS) {
            if s.total_plays >= limit {
                *bucket += 1;
            }
        }
        like_pairs += s.like as usize;
        dislike_pairs += s.dislike as usize;
        for (f, hist) in rating_histograms.iter_mut() {
            hist[f.rate(s) as usize - 1] += 1;
        }
    }

    Ok(StatsReport {
        event_count: log.len(),
        unique_pair_count: table.len(),
        duration_buckets,
        replay_buckets,
        stream_events: log.len() - skip_events,
        skip_events,
        like_pairs,
        dislike_pairs,
        rating_histograms,
    })
}
