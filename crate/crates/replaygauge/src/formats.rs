//! On-disk formats: event logs, summaries, ratings, recommendation lists,
//! persisted models and `key=value` metadata files.
//!
//! Floats are written with Rust's shortest round-trip formatting, so reading
//! a file back yields bit-identical values.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use replaygauge_core::classify::{ClassModel, GnbModel};
use replaygauge_core::event::{Group, TrackId, UserId};
use replaygauge_core::postfilter::{ScoredEntry, ScoredList};
use replaygauge_core::recommend::{
    FactorKind, FactorModel, Hyperparameters, KnnModel, PopularityModel, RecommendationList,
};
use replaygauge_core::signals::{
    RatingFunction, RatingTriple, StatsReport, SummaryTable, TrainingMode,
};
use replaygauge_core::synth::GroundTruth;
use replaygauge_core::{EventLog, InteractionMatrix, ListeningEvent};

use crate::error::{Error, Result};

pub const EVENT_HEADER: &str = "user,track,duration,timestamp";
pub const SUMMARY_HEADER: &str = "user,track,plays,skips,streams,like,dislike";
pub const RATING_HEADER: &str = "user,track,rating";
pub const LIST_HEADER: &str = "user,rank,track,score";
pub const SCORED_HEADER: &str = "user,rank,track,score,dislike";
pub const MANIFEST_HEADER: &str = "user,group";
pub const TRUTH_HEADER: &str = "user,track,affinity,liked";
pub const MODEL_FORMAT: &str = "replaygauge-model";
pub const FORMAT_VERSION: &str = "1";

pub fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

/// Writes a file through `body`, attaching the path to any IO error.
pub fn write_file(
    path: &Path,
    body: impl FnOnce(&mut BufWriter<File>) -> Result<()>,
) -> Result<()> {
    let mut w = create(path)?;
    body(&mut w)?;
    w.flush().map_err(|e| Error::io(path, e))
}

fn csv_reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(r)
}

fn check_header<R: Read>(reader: &mut csv::Reader<R>, expected: &str) -> Result<()> {
    let found = reader
        .headers()
        .map_err(|e| Error::MalformedRow {
            line: 1,
            reason: e.to_string(),
        })?
        .iter()
        .collect::<Vec<_>>()
        .join(",");
    if found.trim_start_matches('\u{feff}') != expected {
        return Err(Error::BadHeader {
            expected: expected.into(),
            found,
        });
    }
    Ok(())
}

/// Iterates data rows as (line number, fields), checking the column count.
fn rows<R: Read>(
    r: R,
    header: &'static str,
) -> Result<impl Iterator<Item = Result<(u64, csv::StringRecord)>>> {
    let mut reader = csv_reader(r);
    check_header(&mut reader, header)?;
    let columns = header.split(',').count();
    Ok(reader.into_records().map(move |rec| {
        let rec = rec.map_err(|e| Error::MalformedRow {
            line: e.position().map_or(0, |p| p.line()),
            reason: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != columns {
            return Err(Error::MalformedRow {
                line,
                reason: format!("expected {columns} columns, found {}", rec.len()),
            });
        }
        Ok((line, rec))
    }))
}

fn field<T: FromStr>(rec: &csv::StringRecord, idx: usize, line: u64, name: &str) -> Result<T> {
    let raw = &rec[idx];
    raw.parse().map_err(|_| Error::MalformedRow {
        line,
        reason: format!("field `{name}` has invalid value `{raw}`"),
    })
}

pub fn read_event_log<R: Read>(r: R) -> Result<EventLog> {
    let mut events = Vec::new();
    for row in rows(r, EVENT_HEADER)? {
        let (line, rec) = row?;
        let user: UserId = field(&rec, 0, line, "user")?;
        let track: TrackId = field(&rec, 1, line, "track")?;
        let duration: i64 = field(&rec, 2, line, "duration")?;
        let timestamp: i64 = field(&rec, 3, line, "timestamp")?;
        if duration < 0 {
            return Err(Error::NegativeDuration { line });
        }
        if timestamp < 0 {
            return Err(Error::NegativeTimestamp { line });
        }
        let duration = u32::try_from(duration).map_err(|_| Error::MalformedRow {
            line,
            reason: format!("duration {duration} out of range"),
        })?;
        events.push(ListeningEvent::new(user, track, duration, timestamp as u64));
    }
    Ok(EventLog::new(events))
}

pub fn load_event_log(path: &Path) -> Result<EventLog> {
    read_event_log(open(path)?).map_err(|e| match e {
        Error::Io { .. } => e,
        other => Error::Format(format!("{}: {other}", path.display())),
    })
}

pub fn write_event_log<W: Write>(w: &mut W, log: &EventLog) -> Result<()> {
    writeln!(w, "{EVENT_HEADER}")?;
    for e in log {
        writeln!(w, "{},{},{},{}", e.user, e.track, e.duration, e.timestamp)?;
    }
    Ok(())
}

pub fn write_summary_table<W: Write>(w: &mut W, table: &SummaryTable) -> Result<()> {
    writeln!(w, "{SUMMARY_HEADER}")?;
    for s in table.iter() {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            s.user,
            s.track,
            s.total_plays,
            s.skip_count,
            s.stream_count,
            s.like as u8,
            s.dislike as u8
        )?;
    }
    Ok(())
}

pub fn write_ratings<W: Write>(w: &mut W, ratings: &[RatingTriple]) -> Result<()> {
    writeln!(w, "{RATING_HEADER}")?;
    for r in ratings {
        writeln!(w, "{},{},{}", r.user, r.track, r.rating)?;
    }
    Ok(())
}

pub fn read_ratings<R: Read>(r: R) -> Result<Vec<RatingTriple>> {
    let mut out = Vec::new();
    for row in rows(r, RATING_HEADER)? {
        let (line, rec) = row?;
        let rating: u8 = field(&rec, 2, line, "rating")?;
        if !(1..=5).contains(&rating) {
            return Err(Error::MalformedRow {
                line,
                reason: format!("rating {rating} outside 1..=5"),
            });
        }
        out.push(RatingTriple {
            user: field(&rec, 0, line, "user")?,
            track: field(&rec, 1, line, "track")?,
            rating,
        });
    }
    Ok(out)
}

pub fn write_manifest<W: Write>(w: &mut W, assignment: &BTreeMap<UserId, Group>) -> Result<()> {
    writeln!(w, "{MANIFEST_HEADER}")?;
    for (u, g) in assignment {
        writeln!(w, "{u},{}", g.as_str())?;
    }
    Ok(())
}

pub fn read_manifest<R: Read>(r: R) -> Result<BTreeMap<UserId, Group>> {
    let mut out = BTreeMap::new();
    for row in rows(r, MANIFEST_HEADER)? {
        let (line, rec) = row?;
        let group = match &rec[1] {
            "A" => Group::A,
            "B" => Group::B,
            other => {
                return Err(Error::MalformedRow {
                    line,
                    reason: format!("unknown group `{other}`"),
                })
            }
        };
        out.insert(field(&rec, 0, line, "user")?, group);
    }
    Ok(out)
}

/// Ordered `key=value` lines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Meta(pub Vec<(String, String)>);

impl Meta {
    pub fn push(&mut self, key: &str, value: impl Display) -> &mut Self {
        self.0.push((key.to_string(), value.to_string()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| Error::Format(format!("missing key `{key}`")))
    }

    pub fn parse<T: FromStr>(&self, key: &str) -> Result<T> {
        let raw = self.require(key)?;
        raw.parse()
            .map_err(|_| Error::Format(format!("key `{key}` has invalid value `{raw}`")))
    }

    pub fn write<W: Write>(&self, w: &mut W) -> Result<()> {
        for (k, v) in &self.0 {
            writeln!(w, "{k}={v}")?;
        }
        Ok(())
    }

    /// Parses one `key=value` line; blank lines and `#` comments yield `None`.
    pub fn parse_line(line: &str) -> Result<Option<(String, String)>> {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            return Ok(None);
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("expected key=value, found `{line}`")))?;
        Ok(Some((k.trim().to_string(), v.trim().to_string())))
    }

    pub fn read<R: Read>(r: R) -> Result<Meta> {
        let mut meta = Meta::default();
        for line in BufReader::new(r).lines() {
            if let Some(kv) = Meta::parse_line(&line?)? {
                meta.0.push(kv);
            }
        }
        Ok(meta)
    }
}

/// A persisted model of any family.
#[derive(Debug, Clone, PartialEq)]
pub enum SavedModel {
    Popularity(PopularityModel),
    Knn { model: KnnModel, mode: TrainingMode },
    Factor(FactorModel),
}

impl SavedModel {
    pub fn kind(&self) -> &'static str {
        match self {
            SavedModel::Popularity(_) => "popularity",
            SavedModel::Knn { .. } => "knn",
            SavedModel::Factor(m) => m.kind.as_str(),
        }
    }
}

fn write_factor_rows<W: Write>(w: &mut W, ids: &[u64], values: &[f64], k: usize) -> Result<()> {
    let cols: Vec<String> = (1..=k).map(|f| format!("f{f}")).collect();
    writeln!(w, "id,{}", cols.join(","))?;
    for (id, row) in ids.iter().zip(values.chunks_exact(k)) {
        write!(w, "{id}")?;
        for v in row {
            write!(w, ",{v}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn save_model<W: Write>(w: &mut W, model: &SavedModel) -> Result<()> {
    let mut meta = Meta::default();
    meta.push("format", MODEL_FORMAT)
        .push("kind", model.kind())
        .push("version", FORMAT_VERSION);
    match model {
        SavedModel::Popularity(p) => {
            meta.write(w)?;
            writeln!(w, "\ntrack,score")?;
            for (t, s) in &p.ranked_tracks {
                writeln!(w, "{t},{s}")?;
            }
        }
        SavedModel::Knn { model, mode } => {
            meta.push("neighborhood_size", model.neighborhood_size)
                .push("input_mode", mode);
            meta.write(w)?;
            writeln!(w, "\nuser,track,value")?;
            for (u, t, v) in model.matrix.entries() {
                writeln!(w, "{u},{t},{v}")?;
            }
        }
        SavedModel::Factor(m) => {
            let h = &m.hyper;
            meta.push("factors", h.factors)
                .push("iterations", h.iterations)
                .push("regularization", h.regularization)
                .push("learning_rate", h.learning_rate)
                .push("confidence", h.confidence)
                .push("seed", h.seed)
                .push("global_mean", m.global_mean)
                .push("users", m.user_ids().len())
                .push("items", m.track_ids().len());
            meta.write(w)?;
            writeln!(w, "\nsection=users")?;
            write_factor_rows(w, m.user_ids(), &m.user_factors, h.factors)?;
            writeln!(w, "\nsection=items")?;
            write_factor_rows(w, m.track_ids(), &m.item_factors, h.factors)?;
        }
    }
    Ok(())
}

fn parse_num<T: FromStr>(raw: &str, what: &str) -> Result<T> {
    raw.trim()
        .parse()
        .map_err(|_| Error::Format(format!("invalid {what} `{raw}`")))
}

fn read_factor_rows(
    lines: &mut dyn Iterator<Item = String>,
    count: usize,
    k: usize,
) -> Result<(Vec<u64>, Vec<f64>)> {
    let header = lines
        .next()
        .ok_or_else(|| Error::Format("missing factor header".into()))?;
    if header.split(',').count() != k + 1 {
        return Err(Error::Format(format!(
            "factor header `{header}` does not have {} columns",
            k + 1
        )));
    }
    let mut ids = Vec::with_capacity(count);
    let mut values = Vec::with_capacity(count * k);
    for _ in 0..count {
        let line = lines
            .next()
            .ok_or_else(|| Error::Format("truncated factor matrix".into()))?;
        let mut parts = line.split(',');
        ids.push(parse_num(parts.next().unwrap_or(""), "id")?);
        let before = values.len();
        for p in parts {
            values.push(parse_num(p, "factor")?);
        }
        if values.len() - before != k {
            return Err(Error::Format(format!(
                "factor row `{line}` does not have {k} values"
            )));
        }
    }
    Ok((ids, values))
}

pub fn load_model<R: Read>(r: R) -> Result<SavedModel> {
    let mut lines = BufReader::new(r).lines().map_while(|l| l.ok()).peekable();
    let mut meta = Meta::default();
    for line in lines.by_ref() {
        if line.trim().is_empty() {
            break;
        }
        if let Some(kv) = Meta::parse_line(&line)? {
            meta.0.push(kv);
        }
    }
    if meta.require("format")? != MODEL_FORMAT {
        return Err(Error::Format(format!("not a {MODEL_FORMAT} file")));
    }
    if meta.require("version")? != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "unsupported model version `{}`",
            meta.require("version")?
        )));
    }
    let mut body = lines.filter(|l| !l.trim().is_empty());
    match meta.require("kind")? {
        "popularity" => {
            body.next();
            let mut ranked_tracks = Vec::new();
            for line in body {
                let (t, s) = line
                    .split_once(',')
                    .ok_or_else(|| Error::Format(format!("bad row `{line}`")))?;
                ranked_tracks.push((parse_num(t, "track")?, parse_num(s, "score")?));
            }
            Ok(SavedModel::Popularity(PopularityModel { ranked_tracks }))
        }
        "knn" => {
            body.next();
            let mut entries = Vec::new();
            for line in body {
                let parts: Vec<&str> = line.split(',').collect();
                if parts.len() != 3 {
                    return Err(Error::Format(format!("bad row `{line}`")));
                }
                entries.push((
                    parse_num(parts[0], "user")?,
                    parse_num(parts[1], "track")?,
                    parse_num(parts[2], "value")?,
                ));
            }
            let model = replaygauge_core::recommend::train_user_knn(
                InteractionMatrix::from_entries(entries),
                meta.parse("neighborhood_size")?,
            )?;
            Ok(SavedModel::Knn {
                model,
                mode: meta.parse("input_mode")?,
            })
        }
        kind @ ("mf_sgd" | "als") => {
            let hyper = Hyperparameters {
                factors: meta.parse("factors")?,
                iterations: meta.parse("iterations")?,
                regularization: meta.parse("regularization")?,
                learning_rate: meta.parse("learning_rate")?,
                confidence: meta.parse("confidence")?,
                seed: meta.parse("seed")?,
            };
            let k = hyper.factors;
            let next_section = |name: &str, body: &mut dyn Iterator<Item = String>| -> Result<()> {
                match body.next() {
                    Some(l) if l.trim() == format!("section={name}") => Ok(()),
                    other => Err(Error::Format(format!(
                        "expected section={name}, found {other:?}"
                    ))),
                }
            };
            next_section("users", &mut body)?;
            let (user_ids, user_factors) = read_factor_rows(&mut body, meta.parse("users")?, k)?;
            next_section("items", &mut body)?;
            let (track_ids, item_factors) = read_factor_rows(&mut body, meta.parse("items")?, k)?;
            let kind = if kind == "als" {
                FactorKind::Als
            } else {
                FactorKind::Sgd
            };
            Ok(SavedModel::Factor(FactorModel::from_parts(
                kind,
                hyper,
                meta.parse("global_mean")?,
                user_ids,
                track_ids,
                user_factors,
                item_factors,
            )?))
        }
        other => Err(Error::Format(format!("unknown model kind `{other}`"))),
    }
}

pub fn save_gnb<W: Write>(w: &mut W, model: &GnbModel) -> Result<()> {
    let mut meta = Meta::default();
    meta.push("mu_like", model.like.mean)
        .push("var_like", model.like.variance)
        .push("mu_dislike", model.dislike.mean)
        .push("var_dislike", model.dislike.variance)
        .push("prior_like", model.like.prior)
        .push("version", FORMAT_VERSION);
    meta.write(w)
}

pub fn load_gnb<R: Read>(r: R) -> Result<GnbModel> {
    let meta = Meta::read(r)?;
    if meta.require("version")? != FORMAT_VERSION {
        return Err(Error::Format("unsupported classifier version".into()));
    }
    let prior_like: f64 = meta.parse("prior_like")?;
    Ok(GnbModel {
        like: ClassModel {
            mean: meta.parse("mu_like")?,
            variance: meta.parse("var_like")?,
            prior: prior_like,
        },
        dislike: ClassModel {
            mean: meta.parse("mu_dislike")?,
            variance: meta.parse("var_dislike")?,
            prior: 1.0 - prior_like,
        },
    })
}

pub fn write_recommendations<'a, W: Write>(
    w: &mut W,
    lists: impl IntoIterator<Item = &'a RecommendationList>,
) -> Result<()> {
    writeln!(w, "{LIST_HEADER}")?;
    for list in lists {
        for (rank, (t, s)) in list.items.iter().enumerate() {
            writeln!(w, "{},{},{t},{s}", list.user, rank + 1)?;
        }
    }
    Ok(())
}

/// Reads `user,rank,track,score` rows into per-user lists ordered by rank.
pub fn read_recommendations<R: Read>(r: R) -> Result<BTreeMap<UserId, RecommendationList>> {
    let mut ranked: BTreeMap<UserId, Vec<(u64, TrackId, f64)>> = BTreeMap::new();
    for row in rows(r, LIST_HEADER)? {
        let (line, rec) = row?;
        ranked
            .entry(field(&rec, 0, line, "user")?)
            .or_default()
            .push((
                field(&rec, 1, line, "rank")?,
                field(&rec, 2, line, "track")?,
                field(&rec, 3, line, "score")?,
            ));
    }
    Ok(ranked
        .into_iter()
        .map(|(user, mut items)| {
            items.sort_by_key(|i| i.0);
            (
                user,
                RecommendationList {
                    user,
                    items: items.into_iter().map(|(_, t, s)| (t, s)).collect(),
                },
            )
        })
        .collect())
}

pub fn write_scored_lists<'a, W: Write>(
    w: &mut W,
    lists: impl IntoIterator<Item = &'a ScoredList>,
) -> Result<()> {
    writeln!(w, "{SCORED_HEADER}")?;
    for list in lists {
        for (rank, e) in list.entries.iter().enumerate() {
            writeln!(
                w,
                "{},{},{},{},{}",
                list.user,
                rank + 1,
                e.track,
                e.score,
                e.dislike as u8
            )?;
        }
    }
    Ok(())
}

pub fn read_scored_lists<R: Read>(r: R) -> Result<BTreeMap<UserId, ScoredList>> {
    let mut ranked: BTreeMap<UserId, Vec<(u64, ScoredEntry)>> = BTreeMap::new();
    for row in rows(r, SCORED_HEADER)? {
        let (line, rec) = row?;
        let flag: u8 = field(&rec, 4, line, "dislike")?;
        if flag > 1 {
            return Err(Error::MalformedRow {
                line,
                reason: "dislike flag must be 0 or 1".into(),
            });
        }
        let entry = ScoredEntry {
            track: field(&rec, 2, line, "track")?,
            score: field(&rec, 3, line, "score")?,
            dislike: flag == 1,
        };
        ranked
            .entry(field(&rec, 0, line, "user")?)
            .or_default()
            .push((field(&rec, 1, line, "rank")?, entry));
    }
    Ok(ranked
        .into_iter()
        .map(|(user, mut entries)| {
            entries.sort_by_key(|e| e.0);
            (
                user,
                ScoredList {
                    user,
                    entries: entries.into_iter().map(|(_, e)| e).collect(),
                },
            )
        })
        .collect())
}

/// Filtered lists in the plain `user,rank,track,score` layout.
pub fn write_filtered_lists<'a, W: Write>(
    w: &mut W,
    lists: impl IntoIterator<Item = &'a ScoredList>,
) -> Result<()> {
    writeln!(w, "{LIST_HEADER}")?;
    for list in lists {
        for (rank, e) in list.entries.iter().enumerate() {
            writeln!(w, "{},{},{},{}", list.user, rank + 1, e.track, e.score)?;
        }
    }
    Ok(())
}

pub fn write_truth<W: Write>(w: &mut W, truth: &GroundTruth) -> Result<()> {
    writeln!(w, "{TRUTH_HEADER}")?;
    for (&(u, t), &(affinity, liked)) in &truth.pairs {
        writeln!(w, "{u},{t},{affinity},{}", liked as u8)?;
    }
    Ok(())
}

/// Key=value rendering of a stats report.
pub fn write_stats_text<W: Write>(
    w: &mut W,
    report: &StatsReport,
    functions: &[RatingFunction],
) -> Result<()> {
    let mut meta = Meta::default();
    meta.push("events", report.event_count)
        .push("unique_pairs", report.unique_pair_count);
    for (i, limit) in replaygauge_core::signals::DURATION_THRESHOLDS
        .iter()
        .enumerate()
    {
        meta.push(&format!("events_lt_{limit}s"), report.duration_buckets[i])
            .push(
                &format!("events_lt_{limit}s_share"),
                report.duration_share(i),
            );
    }
    for (i, limit) in replaygauge_core::signals::REPLAY_THRESHOLDS
        .iter()
        .enumerate()
    {
        meta.push(&format!("pairs_p_ge_{limit}"), report.replay_buckets[i]);
    }
    meta.push("stream_events", report.stream_events)
        .push("stream_share_of_events", report.stream_share())
        .push("skip_events", report.skip_events)
        .push("skip_share_of_events", report.skip_share())
        .push("like_pairs", report.like_pairs)
        .push("like_share_of_pairs", report.like_share())
        .push("dislike_pairs", report.dislike_pairs)
        .push("dislike_share_of_pairs", report.dislike_share());
    for f in functions {
        for r in 1..=5u8 {
            let count = report.rating_histograms[f][r as usize - 1];
            meta.push(&format!("{f}_rating_{r}"), count)
                .push(&format!("{f}_rating_{r}_share"), report.rating_share(*f, r));
        }
    }
    meta.write(w)
}

/// CSV tables laid out like the duration, replay, signal and rating tables.
pub fn write_stats_tables<W: Write>(
    w: &mut W,
    report: &StatsReport,
    functions: &[RatingFunction],
) -> Result<()> {
    writeln!(w, "table,row,column,count,share")?;
    for (i, limit) in replaygauge_core::signals::DURATION_THRESHOLDS
        .iter()
        .enumerate()
    {
        writeln!(
            w,
            "durations,events,lt_{limit}s,{},{}",
            report.duration_buckets[i],
            report.duration_share(i)
        )?;
    }
    for (i, limit) in replaygauge_core::signals::REPLAY_THRESHOLDS
        .iter()
        .enumerate()
    {
        writeln!(
            w,
            "replays,pairs,p_ge_{limit},{},",
            report.replay_buckets[i]
        )?;
    }
    writeln!(
        w,
        "signals,streams,share_of_events,{},{}",
        report.stream_events,
        report.stream_share()
    )?;
    writeln!(
        w,
        "signals,likes,share_of_pairs,{},{}",
        report.like_pairs,
        report.like_share()
    )?;
    writeln!(
        w,
        "signals,skips,share_of_events,{},{}",
        report.skip_events,
        report.skip_share()
    )?;
    writeln!(
        w,
        "signals,dislikes,share_of_pairs,{},{}",
        report.dislike_pairs,
        report.dislike_share()
    )?;
    for f in functions {
        for r in 1..=5u8 {
            let count = report.rating_histograms[f][r as usize - 1];
            writeln!(
                w,
                "ratings,{f},rating_{r},{count},{}",
                report.rating_share(*f, r)
            )?;
        }
    }
    Ok(())
}
