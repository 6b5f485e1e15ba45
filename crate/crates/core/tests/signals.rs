mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use replaygauge_core::signals::{
    build_training_input, dataset_stats, derive_dislike, derive_like, map_ratings,
    summarize_interactions,
};
use replaygauge_core::{
    EventLog, InteractionSummary, ListeningEvent, RatingFunction, TrainingMode,
};

use common::log;

/// (skips, streams) per pair by a direct pass over the events.
fn fold(log: &EventLog) -> BTreeMap<(u64, u64), (u32, u32)> {
    let mut out: BTreeMap<(u64, u64), (u32, u32)> = BTreeMap::new();
    for e in log.iter() {
        let c = out.entry((e.user, e.track)).or_default();
        if e.duration < 30 {
            c.0 += 1;
        } else {
            c.1 += 1;
        }
    }
    out
}

fn f3_reference(streams: u32, skips: u32) -> u8 {
    if streams >= 4 && skips < streams {
        5
    } else if streams >= 2 && skips < streams {
        4
    } else if skips < streams {
        3
    } else if streams > 0 {
        2
    } else {
        1
    }
}

fn check_against_fold(log: &EventLog) {
    let table = summarize_interactions(log);
    let reference = fold(log);
    assert_eq!(table.len(), reference.len());
    for (&(u, t), &(k, p)) in &reference {
        let s = table.get(u, t).unwrap();
        assert_eq!((s.skip_count, s.stream_count, s.total_plays), (k, p, k + p));
        assert_eq!(s.like, p >= 2 && k == 0);
        assert_eq!(s.dislike, k >= 1 && p == 0);
        assert!(!(s.like && s.dislike));
        assert_eq!(RatingFunction::F1.rate(s), p.min(4) as u8 + 1);
        let f2 = if s.like {
            5
        } else if s.dislike {
            1
        } else {
            3
        };
        assert_eq!(RatingFunction::F2.rate(s), f2);
        assert_eq!(RatingFunction::F3.rate(s), f3_reference(p, k));
    }
}

#[test]
fn summaries_match_fold_on_ten_thousand_events() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let events = (0..10_000)
        .map(|i| {
            ListeningEvent::new(
                rng.random_range(1..=50),
                rng.random_range(1..=80),
                rng.random_range(0..120),
                i,
            )
        })
        .collect();
    check_against_fold(&EventLog::new(events));
}

proptest! {
    #[test]
    fn summaries_match_fold(log in log(6, 8, 400)) {
        check_against_fold(&log);
    }

    #[test]
    fn like_and_dislike_exclusive(skips in 0u32..20, streams in 0u32..20) {
        let s = InteractionSummary::from_counts(1, 1, skips, streams);
        prop_assert!(!(derive_like(&s) && derive_dislike(&s)));
    }

    #[test]
    fn ratings_in_range_and_floor_agreement(skips in 0u32..10, streams in 0u32..10) {
        prop_assume!(skips + streams > 0);
        let s = InteractionSummary::from_counts(1, 1, skips, streams);
        for f in RatingFunction::ALL {
            prop_assert!((1..=5).contains(&f.rate(&s)));
        }
        let f1_floor = RatingFunction::F1.rate(&s) == 1;
        let f3_floor = RatingFunction::F3.rate(&s) == 1;
        prop_assert_eq!(f1_floor, streams == 0);
        prop_assert_eq!(f3_floor, streams == 0);
        if RatingFunction::F2.rate(&s) == 1 {
            prop_assert!(f1_floor && skips >= 1);
        }
    }

    #[test]
    fn f1_non_decreasing_in_streams(skips in 0u32..10, streams in 0u32..20) {
        let a = InteractionSummary::from_counts(1, 1, skips, streams);
        let b = InteractionSummary::from_counts(1, 1, skips, streams + 1);
        prop_assert!(RatingFunction::F1.rate(&a) <= RatingFunction::F1.rate(&b));
    }

    #[test]
    fn stats_are_consistent(log in log(5, 10, 300)) {
        let table = summarize_interactions(&log);
        prop_assume!(!log.is_empty());
        let stats = dataset_stats(&log, &table).unwrap();
        prop_assert_eq!(stats.skip_events + stats.stream_events, log.len());
        prop_assert!(stats.replay_buckets.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(stats.duration_buckets.windows(2).all(|w| w[0] <= w[1]));
        for f in RatingFunction::ALL {
            let hist = stats.rating_histograms[&f];
            prop_assert_eq!(hist.iter().sum::<usize>(), table.len());
            for r in 1..=5u8 {
                prop_assert_eq!(hist[r as usize - 1], map_ratings(&table, f).iter().filter(|t| t.rating == r).count());
            }
            let share: f64 = (1..=5u8).map(|r| stats.rating_share(f, r)).sum();
            prop_assert!(table.is_empty() || (share - 1.0).abs() < 1e-12);
        }
        for share in [stats.skip_share(), stats.stream_share(), stats.like_share(), stats.dislike_share()] {
            prop_assert!((0.0..=1.0).contains(&share));
        }
    }

    #[test]
    fn training_inputs_have_no_zero_cells(log in log(5, 10, 200)) {
        let table = summarize_interactions(&log);
        for mode in [TrainingMode::AllEvents, TrainingMode::Streams, TrainingMode::Likes, TrainingMode::PlayCounts, TrainingMode::TotalPlays] {
            let m = build_training_input(&table, mode);
            prop_assert!(m.entries().all(|(_, _, v)| v > 0.0));
            if mode.is_binary() {
                prop_assert!(m.first_non_binary().is_none());
            }
        }
        prop_assert_eq!(build_training_input(&table, TrainingMode::AllEvents).nnz(), table.len());
    }
}

#[test]
fn thirty_seconds_is_a_stream() {
    let log = EventLog::new(vec![
        ListeningEvent::new(1, 1, 30, 0),
        ListeningEvent::new(1, 2, 29, 0),
        ListeningEvent::new(1, 3, 0, 0),
    ]);
    let t = summarize_interactions(&log);
    assert_eq!(t.get(1, 1).unwrap().stream_count, 1);
    assert_eq!(t.get(1, 2).unwrap().skip_count, 1);
    assert_eq!(t.get(1, 3).unwrap().skip_count, 1);
}
