//! Seeded synthetic listening logs with known user-track affinities.
//!
//! Users and tracks carry non-negative genre vectors. A user's affinity for a
//! track is the cosine of the two vectors scaled by the track's quality, so
//! tracks of the user's favourite genres score high and poor tracks score low
//! for everyone. A pair is liked when its affinity reaches `like_threshold`.
//!
//! Each listening choice samples a track with weight
//! `popularity^popularity_exponent * (affinity + softening)^sharpness`.
//! Liked choices play the whole track and may be replayed right away;
//! other choices are skipped (1-29 s) or listened to partially.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal};

use crate::event::{EventLog, ListeningEvent, TrackId, UserId};
use crate::rng::{derive_seed, keyed_rng};
use crate::Error;

const CATALOG_STREAM: u64 = 0xC0FF_EE00;
const USER_STREAM: u64 = 0x05E5_0000;
/// 2016-09-01T00:00:00Z
const EPOCH_START: u64 = 1_472_688_000;

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub user_count: usize,
    pub track_count: usize,
    pub genre_count: usize,
    /// Mean number of events per user, replays included.
    pub events_per_user_mean: f64,
    /// Coefficient of variation of the log-normal events-per-user draw.
    pub events_per_user_cv: f64,
    pub min_events_per_user: usize,
    /// Weight of a user's second genre relative to the first, drawn uniformly.
    pub secondary_weight: (f64, f64),
    /// Off-genre noise added to every user and track vector coordinate.
    pub genre_noise: f64,
    /// Track quality range, drawn uniformly.
    pub quality: (f64, f64),
    pub like_threshold: f64,
    pub popularity_exponent: f64,
    pub affinity_softening: f64,
    pub affinity_sharpness: f64,
    pub skip_probability_given_dislike: f64,
    /// Probability of each further immediate replay of a liked track.
    pub replay_rate_given_like: f64,
    pub max_replays: usize,
    pub track_length_mean: f64,
    pub track_length_std: f64,
    pub track_length_min: u32,
    pub track_length_max: u32,
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            user_count: 2000,
            track_count: 5000,
            genre_count: 20,
            events_per_user_mean: 250.0,
            events_per_user_cv: 0.5,
            min_events_per_user: 10,
            secondary_weight: (0.2, 0.8),
            genre_noise: 0.1,
            quality: (0.0, 1.0),
            like_threshold: 0.55,
            popularity_exponent: 0.5,
            affinity_softening: 0.05,
            affinity_sharpness: 2.5,
            skip_probability_given_dislike: 0.95,
            replay_rate_given_like: 0.9,
            max_replays: 1,
            track_length_mean: 210.0,
            track_length_std: 30.0,
            track_length_min: 90,
            track_length_max: 420,
            seed: 7,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<(), Error> {
        let prob = |p: f64| (0.0..=1.0).contains(&p);
        let range = |(lo, hi): (f64, f64)| lo.is_finite() && hi.is_finite() && lo <= hi;
        if self.user_count == 0 {
            return Err(Error::InvalidConfig("users must be at least 1"));
        }
        if self.track_count == 0 {
            return Err(Error::InvalidConfig("tracks must be at least 1"));
        }
        if self.genre_count == 0 {
            return Err(Error::InvalidConfig("genres must be at least 1"));
        }
        if !(self.events_per_user_mean >= 1.0 && self.events_per_user_mean.is_finite()) {
            return Err(Error::InvalidConfig(
                "events per user mean must be at least 1",
            ));
        }
        if !(self.events_per_user_cv > 0.0 && self.events_per_user_cv.is_finite()) {
            return Err(Error::InvalidConfig("events per user cv must be positive"));
        }
        if self.min_events_per_user == 0 {
            return Err(Error::InvalidConfig(
                "minimum events per user must be at least 1",
            ));
        }
        if !prob(self.skip_probability_given_dislike) || !prob(self.replay_rate_given_like) {
            return Err(Error::InvalidConfig("probabilities must lie in [0, 1]"));
        }
        if !prob(self.like_threshold) {
            return Err(Error::InvalidConfig("like threshold must lie in [0, 1]"));
        }
        if !range(self.secondary_weight) || self.secondary_weight.0 < 0.0 {
            return Err(Error::InvalidConfig("secondary weight range"));
        }
        if !range(self.quality) || self.quality.0 < 0.0 || self.quality.1 > 1.0 {
            return Err(Error::InvalidConfig("quality range must lie in [0, 1]"));
        }
        if !(self.genre_noise >= 0.0 && self.genre_noise.is_finite()) {
            return Err(Error::InvalidConfig("genre noise must be non-negative"));
        }
        if !(self.affinity_softening > 0.0 && self.affinity_sharpness >= 0.0) {
            return Err(Error::InvalidConfig(
                "affinity softening must be positive and sharpness non-negative",
            ));
        }
        if !(self.popularity_exponent >= 0.0 && self.popularity_exponent.is_finite()) {
            return Err(Error::InvalidConfig(
                "popularity exponent must be non-negative",
            ));
        }
        if !(self.track_length_std > 0.0 && self.track_length_mean.is_finite()) {
            return Err(Error::InvalidConfig("track length stddev must be positive"));
        }
        if self.track_length_min < crate::STREAM_THRESHOLD_SECS
            || self.track_length_min > self.track_length_max
        {
            return Err(Error::InvalidConfig(
                "track length bounds must satisfy 30 <= min <= max",
            ));
        }
        Ok(())
    }
}

/// The generator's latent model and the pairs it actually produced.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub genre_count: usize,
    pub like_threshold: f64,
    /// Unit-norm genre vectors, row-major, users `1..=user_count`.
    pub user_vectors: Vec<f64>,
    /// Unit-norm genre vectors, row-major, tracks `1..=track_count`.
    pub track_vectors: Vec<f64>,
    pub track_quality: Vec<f64>,
    pub track_length: Vec<u32>,
    /// (affinity, liked) for every generated pair.
    pub pairs: BTreeMap<(UserId, TrackId), (f64, bool)>,
}

impl GroundTruth {
    pub fn user_count(&self) -> usize {
        self.user_vectors.len() / self.genre_count
    }

    pub fn track_count(&self) -> usize {
        self.track_quality.len()
    }

    /// Affinity of any pair under the latent model; `None` for ids outside the catalog.
    pub fn affinity(&self, user: UserId, track: TrackId) -> Option<f64> {
        let g = self.genre_count;
        let (u, t) = (
            user.checked_sub(1)? as usize,
            track.checked_sub(1)? as usize,
        );
        if u >= self.user_count() || t >= self.track_count() {
            return None;
        }
        let a = &self.user_vectors[u * g..(u + 1) * g];
        let b = &self.track_vectors[t * g..(t + 1) * g];
        let cos: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        Some((cos * self.track_quality[t]).clamp(0.0, 1.0))
    }

    pub fn liked(&self, user: UserId, track: TrackId) -> Option<bool> {
        self.affinity(user, track).map(|a| a >= self.like_threshold)
    }
}

fn normalized(v: &mut [f64]) {
    let norm = libm::sqrt(v.iter().map(|x| x * x).sum::<f64>());
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

fn genre_vector(
    rng: &mut ChaCha8Rng,
    genres: usize,
    noise: f64,
    primary: usize,
    secondary: Option<(usize, f64)>,
) -> Vec<f64> {
    let mut v: Vec<f64> = (0..genres)
        .map(|_| {
            if noise > 0.0 {
                rng.random_range(0.0..noise)
            } else {
                0.0
            }
        })
        .collect();
    v[primary] += 1.0;
    if let Some((g, w)) = secondary {
        v[g] += w;
    }
    normalized(&mut v);
    v
}

pub fn generate(config: &GeneratorConfig) -> Result<(EventLog, GroundTruth), Error> {
    config.validate()?;
    let g = config.genre_count;
    let mut rng = keyed_rng(config.seed, CATALOG_STREAM);

    let mut track_vectors = Vec::with_capacity(config.track_count * g);
    let mut track_quality = Vec::with_capacity(config.track_count);
    let mut track_length = Vec::with_capacity(config.track_count);
    let length_dist = Normal::new(config.track_length_mean, config.track_length_std)
        .map_err(|_| Error::InvalidConfig("track length distribution"))?;
    for _ in 0..config.track_count {
        let primary = rng.random_range(0..g);
        track_vectors.extend(genre_vector(&mut rng, g, config.genre_noise, primary, None));
        let (qlo, qhi) = config.quality;
        track_quality.push(if qhi > qlo {
            rng.random_range(qlo..=qhi)
        } else {
            qlo
        });
        let len = libm::round(length_dist.sample(&mut rng));
        track_length
            .push((len.max(0.0) as u32).clamp(config.track_length_min, config.track_length_max));
    }
    let mut ranks: Vec<usize> = (1..=config.track_count).collect();
    ranks.shuffle(&mut rng);
    let popularity: Vec<f64> = ranks
        .iter()
        .map(|&r| libm::pow(1.0 / r as f64, config.popularity_exponent))
        .collect();

    let mut user_vectors = Vec::with_capacity(config.user_count * g);
    for _ in 0..config.user_count {
        let primary = rng.random_range(0..g);
        let secondary = (g > 1).then(|| {
            let mut s = rng.random_range(0..g - 1);
            if s >= primary {
                s += 1;
            }
            let (lo, hi) = config.secondary_weight;
            (
                s,
                if hi > lo {
                    rng.random_range(lo..=hi)
                } else {
                    lo
                },
            )
        });
        user_vectors.extend(genre_vector(
            &mut rng,
            g,
            config.genre_noise,
            primary,
            secondary,
        ));
    }

    let mut truth = GroundTruth {
        genre_count: g,
        like_threshold: config.like_threshold,
        user_vectors,
        track_vectors,
        track_quality,
        track_length,
        pairs: BTreeMap::new(),
    };

    let sigma2 = libm::log(1.0 + config.events_per_user_cv * config.events_per_user_cv);
    let count_dist = LogNormal::new(
        libm::log(config.events_per_user_mean) - sigma2 / 2.0,
        libm::sqrt(sigma2),
    )
    .map_err(|_| Error::InvalidConfig("events per user distribution"))?;

    let user_seed = derive_seed(config.seed, USER_STREAM);
    let mut events = Vec::new();
    let mut affinity = alloc::vec![0.0; config.track_count];
    let mut cumulative = alloc::vec![0.0; config.track_count];
    for u in 0..config.user_count {
        let user = u as UserId + 1;
        let mut rng = keyed_rng(user_seed, user);

        let mut acc = 0.0;
        for t in 0..config.track_count {
            let a = truth.affinity(user, t as TrackId + 1).unwrap_or(0.0);
            affinity[t] = a;
            acc +=
                popularity[t] * libm::pow(a + config.affinity_softening, config.affinity_sharpness);
            cumulative[t] = acc;
        }

        let target = libm::round(count_dist.sample(&mut rng)).max(config.min_events_per_user as f64)
            as usize;
        let mut clock = EPOCH_START + rng.random_range(0..7 * 86_400);
        let mut produced = 0;
        while produced < target {
            let x = rng.random_range(0.0..acc);
            let t = cumulative
                .partition_point(|&c| c <= x)
                .min(config.track_count - 1);
            let track = t as TrackId + 1;
            let length = truth.track_length[t];
            let liked = affinity[t] >= config.like_threshold;
            truth
                .pairs
                .entry((user, track))
                .or_insert((affinity[t], liked));

            let mut play = |duration: u32, clock: &mut u64, gap: u64| {
                events.push(ListeningEvent::new(user, track, duration, *clock));
                *clock += duration as u64 + gap;
            };
            if liked {
                play(length, &mut clock, rng.random_range(0..5));
                produced += 1;
                let mut replays = 0;
                while produced < target
                    && replays < config.max_replays
                    && rng.random_bool(config.replay_rate_given_like)
                {
                    play(length, &mut clock, rng.random_range(0..5));
                    produced += 1;
                    replays += 1;
                }
            } else {
                let duration = if rng.random_bool(config.skip_probability_given_dislike) {
                    rng.random_range(1..crate::STREAM_THRESHOLD_SECS)
                } else {
                    rng.random_range(crate::STREAM_THRESHOLD_SECS..=length)
                };
                play(duration, &mut clock, rng.random_range(0..5));
                produced += 1;
            }
            clock += rng.random_range(0..600);
        }
    }
    Ok((EventLog::new(events), truth))
}

/// Mean ground-truth affinity of each user's top-k list, averaged over users
/// with a non-empty list. Pairs the generator never produced are scored by
/// the latent model.
pub fn validate_against_truth(
    recs: &BTreeMap<UserId, Vec<TrackId>>,
    truth: &GroundTruth,
    k: usize,
) -> Option<f64> {
    let per_user: Vec<f64> = recs
        .iter()
        .filter_map(|(&u, list)| {
            let scores: Vec<f64> = list
                .iter()
                .take(k)
                .filter_map(|&t| truth.affinity(u, t))
                .collect();
            (!scores.is_empty()).then(|| scores.iter().sum::<f64>() / scores.len() as f64)
        })
        .collect();
    (!per_user.is_empty()).then(|| per_user.iter().sum::<f64>() / per_user.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> GeneratorConfig {
        GeneratorConfig {
            user_count: 40,
            track_count: 200,
            genre_count: 4,
            events_per_user_mean: 60.0,
            ..Default::default()
        }
    }

    #[test]
    fn deterministic() {
        let (a, ta) = generate(&small()).unwrap();
        let (b, tb) = generate(&small()).unwrap();
        assert_eq!(a, b);
        assert_eq!(ta, tb);
        let (c, _) = generate(&GeneratorConfig { seed: 8, ..small() }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn durations_respect_track_lengths() {
        let (log, truth) = generate(&small()).unwrap();
        for e in &log {
            assert!(e.duration <= truth.track_length[e.track as usize - 1]);
            assert!(e.duration >= 1);
            assert!(truth.pairs.contains_key(&(e.user, e.track)));
        }
        for u in log.users() {
            let ts: Vec<u64> = log.user_events(u).map(|e| e.timestamp).collect();
            assert!(ts.windows(2).all(|w| w[0] < w[1]));
            assert!(ts.len() >= small().min_events_per_user);
        }
    }

    #[test]
    fn forced_skips() {
        let config = GeneratorConfig {
            like_threshold: 1.0,
            quality: (0.5, 0.9),
            skip_probability_given_dislike: 1.0,
            ..small()
        };
        let (log, _) = generate(&config).unwrap();
        assert!(log.iter().all(|e| e.duration < 30));
    }

    #[test]
    fn invalid_configs() {
        assert!(generate(&GeneratorConfig {
            user_count: 0,
            ..small()
        })
        .is_err());
        assert!(generate(&GeneratorConfig {
            skip_probability_given_dislike: 1.5,
            ..small()
        })
        .is_err());
        assert!(generate(&GeneratorConfig {
            track_length_std: 0.0,
            ..small()
        })
        .is_err());
    }

    #[test]
    fn truth_validation_bounds() {
        let (_, truth) = generate(&small()).unwrap();
        let mut oracle = BTreeMap::new();
        let mut worst = BTreeMap::new();
        for u in 1..=truth.user_count() as UserId {
            let mut ranked: Vec<(TrackId, f64)> = (1..=truth.track_count() as TrackId)
                .map(|t| (t, truth.affinity(u, t).unwrap()))
                .collect();
            ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            oracle.insert(u, ranked.iter().take(10).map(|p| p.0).collect::<Vec<_>>());
            worst.insert(
                u,
                ranked
                    .iter()
                    .rev()
                    .take(10)
                    .map(|p| p.0)
                    .collect::<Vec<_>>(),
            );
        }
        let best = validate_against_truth(&oracle, &truth, 10).unwrap();
        let low = validate_against_truth(&worst, &truth, 10).unwrap();
        assert!(best > low);
        assert!(best <= 1.0);
        assert_eq!(validate_against_truth(&BTreeMap::new(), &truth, 10), None);
    }
}
