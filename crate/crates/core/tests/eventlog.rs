mod common;

use proptest::prelude::*;
use replaygauge_core::event::{filter_min_activity, select_user_groups, split_dataset, Group};
use replaygauge_core::{Error, EventLog, ListeningEvent};

use common::{log, sorted_events};

proptest! {
    #[test]
    fn split_partitions_every_user(log in log(8, 20, 300), seed in any::<u64>(), frac in 0.05f64..0.95) {
        prop_assume!(!log.is_empty());
        let split = split_dataset(&log, seed, frac).unwrap();
        prop_assert_eq!(sorted_events(&split.visible.concat(&split.hidden)), sorted_events(&log));
        for u in log.users() {
            let n = log.user_event_count(u);
            let expected_hidden = if n < 2 { 0 } else { (n as f64 * frac).floor() as usize };
            prop_assert_eq!(split.hidden.user_event_count(u), expected_hidden);
        }
    }

    #[test]
    fn split_is_a_pure_function(log in log(6, 10, 120), seed in any::<u64>()) {
        prop_assume!(!log.is_empty());
        prop_assert_eq!(split_dataset(&log, seed, 0.5).unwrap(), split_dataset(&log, seed, 0.5).unwrap());
    }

    #[test]
    fn removing_a_user_leaves_other_splits_alone(log in log(6, 10, 150), seed in any::<u64>()) {
        let users: Vec<u64> = log.users().collect();
        prop_assume!(users.len() >= 2);
        let dropped = users[0];
        let rest = EventLog::new(log.iter().filter(|e| e.user != dropped).copied().collect());
        let full = split_dataset(&log, seed, 0.5).unwrap();
        let part = split_dataset(&rest, seed, 0.5).unwrap();
        for &u in &users[1..] {
            let a: Vec<_> = full.hidden.user_events(u).collect();
            let b: Vec<_> = part.hidden.user_events(u).collect();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn groups_partition_users(log in log(30, 10, 200), seed in any::<u64>(), frac in 0.05f64..0.95) {
        prop_assume!(!log.is_empty());
        let g = select_user_groups(&log, seed, frac).unwrap();
        prop_assert_eq!(g.group_a.len() + g.group_b.len(), log.len());
        prop_assert_eq!(g.assignment.len(), log.user_count());
        for (&u, &group) in &g.assignment {
            let (mine, other) = match group {
                Group::A => (&g.group_a, &g.group_b),
                Group::B => (&g.group_b, &g.group_a),
            };
            prop_assert_eq!(mine.user_event_count(u), log.user_event_count(u));
            prop_assert_eq!(other.user_event_count(u), 0);
        }
        let n = log.user_count();
        let b = (n as f64 * frac).floor() as usize;
        let expected = if b == 0 && n >= 2 { 1 } else { b };
        prop_assert_eq!(g.group_b.user_count(), expected);
    }

    #[test]
    fn min_activity_keeps_exactly_active_users(log in log(10, 5, 200), min in 1usize..30) {
        let kept = filter_min_activity(&log, min).unwrap();
        for u in log.users() {
            let n = log.user_event_count(u);
            prop_assert_eq!(kept.user_event_count(u), if n >= min { n } else { 0 });
        }
    }
}

#[test]
fn odd_counts_leave_the_extra_event_visible() {
    let events = (0..7).map(|i| ListeningEvent::new(1, i, 100, i)).collect();
    let split = split_dataset(&EventLog::new(events), 3, 0.5).unwrap();
    assert_eq!(split.visible.len(), 4);
    assert_eq!(split.hidden.len(), 3);
}

#[test]
fn single_event_users_stay_visible() {
    let log = EventLog::new(vec![
        ListeningEvent::new(1, 1, 10, 0),
        ListeningEvent::new(2, 1, 10, 0),
        ListeningEvent::new(2, 2, 10, 1),
    ]);
    let split = split_dataset(&log, 0, 0.5).unwrap();
    assert_eq!(split.visible.user_event_count(1), 1);
    assert_eq!(split.hidden.user_event_count(1), 0);
}

#[test]
fn rejects_bad_parameters() {
    let log = EventLog::new(vec![ListeningEvent::new(1, 1, 10, 0)]);
    assert_eq!(
        split_dataset(&log, 0, 0.0),
        Err(Error::InvalidFraction(0.0))
    );
    assert_eq!(
        split_dataset(&log, 0, 1.0),
        Err(Error::InvalidFraction(1.0))
    );
    assert_eq!(
        split_dataset(&EventLog::default(), 0, 0.5),
        Err(Error::EmptyLog)
    );
    assert!(select_user_groups(&log, 0, f64::NAN).is_err());
}
