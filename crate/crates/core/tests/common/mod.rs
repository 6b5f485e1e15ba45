#![allow(dead_code)]

use proptest::prelude::*;
use replaygauge_core::{EventLog, ListeningEvent};

/// Durations cluster around the 30 s boundary so both kinds of play occur.
pub fn duration() -> impl Strategy<Value = u32> {
    prop_oneof![0u32..30, 30u32..31, 29u32..31, 31u32..400]
}

pub fn event(users: u64, tracks: u64) -> impl Strategy<Value = ListeningEvent> {
    (1..=users, 1..=tracks, duration(), 0u64..1_000_000)
        .prop_map(|(u, t, d, ts)| ListeningEvent::new(u, t, d, ts))
}

pub fn log(users: u64, tracks: u64, max_events: usize) -> impl Strategy<Value = EventLog> {
    prop::collection::vec(event(users, tracks), 0..=max_events).prop_map(EventLog::new)
}

pub fn sorted_events(log: &EventLog) -> Vec<ListeningEvent> {
    let mut v = log.events().to_vec();
    v.sort_unstable();
    v
}
