mod common;

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use replaygauge_core::eval::{
    average_precision_at_k, composition_report, criterion_relevance, criterion_relevance_with,
    map_at_k, DenominatorMode, RelevanceCriterion,
};
use replaygauge_core::signals::summarize_interactions;
use replaygauge_core::Error;

use common::log;

/// Direct double loop: precision at every relevant position.
fn ap_oracle(recs: &[u64], relevant: &BTreeSet<u64>, k: usize, denominator: usize) -> f64 {
    let mut sum = 0.0;
    for m in 0..recs.len().min(k) {
        if relevant.contains(&recs[m]) {
            let mut hits = 0usize;
            for track in &recs[..=m] {
                hits += relevant.contains(track) as usize;
            }
            sum += hits as f64 / (m + 1) as f64;
        }
    }
    sum / denominator as f64
}

fn recs() -> impl Strategy<Value = Vec<u64>> {
    prop::collection::btree_set(1u64..40, 0..30)
        .prop_map(|s| s.into_iter().collect::<Vec<_>>())
        .prop_shuffle()
}

proptest! {
    #[test]
    fn ap_matches_oracle(list in recs(), relevant in prop::collection::btree_set(1u64..40, 1..20), k in 1usize..40) {
        let got = average_precision_at_k(&list, &relevant, k, relevant.len()).unwrap();
        prop_assert_eq!(got, ap_oracle(&list, &relevant, k, relevant.len()));
        prop_assert!((0.0..=1.0).contains(&got));
    }

    #[test]
    fn prepending_a_relevant_track_never_hurts(log in log(6, 25, 200), k in 1usize..15, lists in prop::collection::vec(recs(), 6)) {
        let hidden = summarize_interactions(&log);
        for criterion in RelevanceCriterion::ALL {
            let rel = criterion_relevance(&hidden, criterion);
            let per_user: BTreeMap<u64, Vec<u64>> = (1..=6u64).zip(lists.iter().cloned()).collect();
            let Ok(before) = map_at_k(&per_user, &rel, k) else { continue };
            let improved: BTreeMap<u64, Vec<u64>> = per_user
                .iter()
                .map(|(&u, l)| {
                    let extra = rel.get(u).and_then(|s| s.iter().find(|t| !l.contains(t)).copied());
                    (u, extra.into_iter().chain(l.iter().copied()).collect())
                })
                .collect();
            let after = map_at_k(&improved, &rel, k).unwrap();
            prop_assert!(after.map >= before.map);
            prop_assert!((0.0..=1.0).contains(&after.map));
        }
    }

    #[test]
    fn relevance_sets_come_from_hidden_criterion_pairs(log in log(5, 20, 200), visible in log(5, 20, 100)) {
        let hidden = summarize_interactions(&log);
        let vis = summarize_interactions(&visible);
        for criterion in RelevanceCriterion::ALL {
            for mode in [DenominatorMode::Adapted, DenominatorMode::AllHidden] {
                let rel = criterion_relevance_with(&hidden, criterion, Some(&vis), mode);
                for (&u, set) in &rel.sets {
                    for &t in set {
                        let s = hidden.get(u, t).unwrap();
                        prop_assert!(criterion.matches(s));
                        prop_assert!(vis.get(u, t).is_none());
                    }
                    prop_assert!(rel.denominators[&u] >= set.len());
                }
            }
        }
    }

    #[test]
    fn composition_shares_are_bounded(log in log(6, 25, 200), lists in prop::collection::vec(recs(), 6), k in 1usize..20) {
        let hidden = summarize_interactions(&log);
        let per_user: BTreeMap<u64, Vec<u64>> = (1..=6u64).zip(lists).collect();
        let c = composition_report(&per_user, &hidden, k).unwrap();
        prop_assert!(c.events <= c.recommended);
        if c.events > 0 {
            prop_assert!(c.likes_pct().unwrap() + c.dislikes_pct().unwrap() <= 100.0 + 1e-9);
            prop_assert!(c.streams_pct().unwrap() + c.skips_pct().unwrap() >= 100.0 - 1e-9);
            for p in [c.streams_pct(), c.likes_pct(), c.skips_pct(), c.dislikes_pct()] {
                prop_assert!((0.0..=100.0).contains(&p.unwrap()));
            }
        } else {
            prop_assert_eq!(c.likes_pct(), None);
        }
    }
}

#[test]
fn empty_relevance_sets_are_excluded() {
    let log = replaygauge_core::EventLog::new(vec![
        replaygauge_core::ListeningEvent::new(1, 1, 100, 0),
        replaygauge_core::ListeningEvent::new(2, 1, 5, 0),
    ]);
    let hidden = summarize_interactions(&log);
    let rel = criterion_relevance(&hidden, RelevanceCriterion::Streams);
    let recs: BTreeMap<u64, Vec<u64>> = [(1, vec![1]), (2, vec![1])].into_iter().collect();
    let r = map_at_k(&recs, &rel, 10).unwrap();
    assert_eq!((r.map, r.users_evaluated, r.users_excluded), (1.0, 1, 1));
    let likes = criterion_relevance(&hidden, RelevanceCriterion::Likes);
    assert_eq!(map_at_k(&recs, &likes, 10), Err(Error::NoEvaluableUsers));
    assert_eq!(map_at_k(&recs, &rel, 0), Err(Error::InvalidRank));
}

#[test]
fn all_hidden_denominator_counts_every_unvisited_track() {
    let e = replaygauge_core::ListeningEvent::new;
    let hidden = summarize_interactions(&replaygauge_core::EventLog::new(vec![
        e(1, 1, 100, 0),
        e(1, 1, 100, 1),
        e(1, 2, 5, 2),
        e(1, 3, 5, 3),
    ]));
    let visible = summarize_interactions(&replaygauge_core::EventLog::new(vec![e(1, 3, 100, 0)]));
    let rel = criterion_relevance_with(
        &hidden,
        RelevanceCriterion::Likes,
        Some(&visible),
        DenominatorMode::AllHidden,
    );
    assert_eq!(rel.denominators[&1], 2);
    let recs: BTreeMap<u64, Vec<u64>> = [(1, vec![1])].into_iter().collect();
    assert_eq!(map_at_k(&recs, &rel, 10).unwrap().map, 0.5);
}
