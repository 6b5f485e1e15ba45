//! Listening events, logs and the train/evaluation partitioning protocol.
//!
//! A log is split twice: users are first drawn into group A (all events
//! available for training) and group B, then every group-B user's events are
//! shuffled and cut into a visible half, used for training, and a hidden half,
//! used for evaluation.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::rng::{derive_seed, keyed_rng};
use crate::Error;

pub type UserId = u64;
pub type TrackId = u64;

/// Purpose tags keep the seeded streams of the two split stages apart.
const SPLIT_STREAM: u64 = 0x5350_4c49_5400_0001;
const GROUP_STREAM: u64 = 0x4752_4f55_5000_0002;

/// One play of `track` by `user`, lasting `duration` seconds, starting at `timestamp`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ListeningEvent {
    pub user: UserId,
    pub track: TrackId,
    pub duration: u32,
    pub timestamp: u64,
}

impl ListeningEvent {
    pub fn new(user: UserId, track: TrackId, duration: u32, timestamp: u64) -> Self {
        Self {
            user,
            track,
            duration,
            timestamp,
        }
    }

    /// Shorter than the stream threshold.
    pub fn is_skip(&self) -> bool {
        self.duration < crate::STREAM_THRESHOLD_SECS
    }

    pub fn is_stream(&self) -> bool {
        !self.is_skip()
    }
}

/// An immutable multiset of events with per-user and per-track indices.
///
/// Iteration order is insertion order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EventLog {
    events: Vec<ListeningEvent>,
    user_index: BTreeMap<UserId, Vec<usize>>,
    track_index: BTreeMap<TrackId, Vec<usize>>,
}

impl EventLog {
    pub fn new(events: Vec<ListeningEvent>) -> Self {
        let mut user_index: BTreeMap<UserId, Vec<usize>> = BTreeMap::new();
        let mut track_index: BTreeMap<TrackId, Vec<usize>> = BTreeMap::new();
        for (pos, e) in events.iter().enumerate() {
            user_index.entry(e.user).or_default().push(pos);
            track_index.entry(e.track).or_default().push(pos);
        }
        Self {
            events,
            user_index,
            track_index,
        }
    }

    pub fn events(&self) -> &[ListeningEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn iter(&self) -> core::slice::Iter<'_, ListeningEvent> {
        self.events.iter()
    }

    /// Users in ascending id order.
    pub fn users(&self) -> impl Iterator<Item = UserId> + '_ {
        self.user_index.keys().copied()
    }

    pub fn user_count(&self) -> usize {
        self.user_index.len()
    }

    /// Tracks in ascending id order.
    pub fn tracks(&self) -> impl Iterator<Item = TrackId> + '_ {
        self.track_index.keys().copied()
    }

    pub fn track_count(&self) -> usize {
        self.track_index.len()
    }

    pub fn user_events(&self, user: UserId) -> impl Iterator<Item = &ListeningEvent> + '_ {
        self.user_index
            .get(&user)
            .into_iter()
            .flat_map(move |idx| idx.iter().map(move |&i| &self.events[i]))
    }

    pub fn user_event_count(&self, user: UserId) -> usize {
        self.user_index.get(&user).map_or(0, Vec::len)
    }

    pub fn track_events(&self, track: TrackId) -> impl Iterator<Item = &ListeningEvent> + '_ {
        self.track_index
            .get(&track)
            .into_iter()
            .flat_map(move |idx| idx.iter().map(move |&i| &self.events[i]))
    }

    /// Unique tracks the user interacted with.
    pub fn user_tracks(&self, user: UserId) -> BTreeSet<TrackId> {
        self.user_events(user).map(|e| e.track).collect()
    }

    /// Number of unique (user, track) pairs.
    pub fn unique_pair_count(&self) -> usize {
        self.events
            .iter()
            .map(|e| (e.user, e.track))
            .collect::<BTreeSet<_>>()
            .len()
    }

    /// Events of `self` followed by events of `other`.
    pub fn concat(&self, other: &EventLog) -> EventLog {
        let mut events = self.events.clone();
        events.extend_from_slice(&other.events);
        EventLog::new(events)
    }

    fn restrict_to(&self, keep: impl Fn(UserId) -> bool) -> EventLog {
        EventLog::new(
            self.events
                .iter()
                .filter(|e| keep(e.user))
                .copied()
                .collect(),
        )
    }
}

impl From<Vec<ListeningEvent>> for EventLog {
    fn from(events: Vec<ListeningEvent>) -> Self {
        EventLog::new(events)
    }
}

impl<'a> IntoIterator for &'a EventLog {
    type Item = &'a ListeningEvent;
    type IntoIter = core::slice::Iter<'a, ListeningEvent>;

    fn into_iter(self) -> Self::IntoIter {
        self.events.iter()
    }
}

fn check_fraction(fraction: f64) -> Result<(), Error> {
    if fraction > 0.0 && fraction < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidFraction(fraction))
    }
}

/// Keeps only users with at least `min_events` events.
pub fn filter_min_activity(log: &EventLog, min_events: usize) -> Result<EventLog, Error> {
    if min_events == 0 {
        return Err(Error::InvalidMinEvents);
    }
    Ok(log.restrict_to(|u| log.user_event_count(u) >= min_events))
}

/// Visible (training) and hidden (evaluation) halves of a set of users' events.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSplit {
    pub visible: EventLog,
    pub hidden: EventLog,
    pub seed: u64,
    pub holdout_fraction: f64,
}

/// Splits each user's events at random into visible and hidden parts.
///
/// Each user is shuffled with a generator keyed on `(seed, user)`, so adding
/// or removing a user leaves every other user's split untouched. With `n`
/// events, `floor(n * holdout_fraction)` land in the hidden part; users with
/// fewer than two events stay entirely visible.
pub fn split_dataset(
    log: &EventLog,
    seed: u64,
    holdout_fraction: f64,
) -> Result<DatasetSplit, Error> {
    check_fraction(holdout_fraction)?;
    if log.is_empty() {
        return Err(Error::EmptyLog);
    }

    let mut hidden_mask = alloc::vec![false; log.len()];
    let stream_seed = derive_seed(seed, SPLIT_STREAM);
    for (&user, positions) in &log.user_index {
        let n = positions.len();
        if n < 2 {
            continue;
        }
        let hidden_count = libm::floor(n as f64 * holdout_fraction) as usize;
        let mut shuffled = positions.clone();
        shuffled.shuffle(&mut keyed_rng(stream_seed, user));
        for &pos in &shuffled[..hidden_count] {
            hidden_mask[pos] = true;
        }
    }

    let mut visible = Vec::with_capacity(log.len());
    let mut hidden = Vec::new();
    for (e, &is_hidden) in log.events.iter().zip(&hidden_mask) {
        if is_hidden {
            hidden.push(*e);
        } else {
            visible.push(*e);
        }
    }
    Ok(DatasetSplit {
        visible: EventLog::new(visible),
        hidden: EventLog::new(hidden),
        seed,
        holdout_fraction,
    })
}

/// Which side of the user partition a user landed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Group {
    A,
    B,
}

impl Group {
    pub fn as_str(self) -> &'static str {
        match self {
            Group::A => "A",
            Group::B => "B",
        }
    }
}

/// User-level partition into a training-only group A and an evaluation group B.
#[derive(Debug, Clone, PartialEq)]
pub struct UserGroups {
    pub group_a: EventLog,
    pub group_b: EventLog,
    /// Assignment of every user, ascending by user id.
    pub assignment: BTreeMap<UserId, Group>,
}

/// Draws `floor(|U| * group_b_fraction)` users into group B (at least one
/// when there are two or more users).
///
/// Every user receives a draw from a generator keyed on `(seed, user)`; the
/// users with the smallest draws form group B, ties going to the lower id.
pub fn select_user_groups(
    log: &EventLog,
    seed: u64,
    group_b_fraction: f64,
) -> Result<UserGroups, Error> {
    check_fraction(group_b_fraction)?;
    if log.is_empty() {
        return Err(Error::EmptyLog);
    }
    let n = log.user_count();
    let mut b_count = libm::floor(n as f64 * group_b_fraction) as usize;
    if b_count == 0 && n >= 2 {
        b_count = 1;
    }

    let stream_seed = derive_seed(seed, GROUP_STREAM);
    let mut draws: Vec<(u64, UserId)> = log
        .users()
        .map(|u| (keyed_rng(stream_seed, u).random::<u64>(), u))
        .collect();
    draws.sort_unstable();

    let b_users: BTreeSet<UserId> = draws[..b_count].iter().map(|&(_, u)| u).collect();
    let assignment = log
        .users()
        .map(|u| {
            (
                u,
                if b_users.contains(&u) {
                    Group::B
                } else {
                    Group::A
                },
            )
        })
        .collect();
    Ok(UserGroups {
        group_a: log.restrict_to(|u| !b_users.contains(&u)),
        group_b: log.restrict_to(|u| b_users.contains(&u)),
        assignment,
    })
}
