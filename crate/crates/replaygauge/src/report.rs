//! Report rendering: CSV cells, aligned text tables and JSON.

use std::io::Write;

use replaygauge_core::eval::RelevanceCriterion;

use crate::error::Result;
use crate::experiment::{ClassifierRow, CompositionRow, ExperimentReport, MapCell};

pub const MAP_HEADER: &str =
    "criterion,k,algorithm,input_mode,rating_fn,filter,map,users_evaluated,users_excluded";
pub const COMPOSITION_HEADER: &str =
    "rating_fn,filter,k,recommended,events,streams_pct,likes_pct,skips_pct,dislikes_pct";
pub const CLASSIFIER_HEADER: &str = "rating_fn,score_source,mu_like,var_like,mu_dislike,var_dislike,prior_like,swap_alpha,like_precision,like_recall,dislike_precision,dislike_recall";

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

pub fn write_map_csv<'a, W: Write>(
    w: &mut W,
    cells: impl IntoIterator<Item = &'a MapCell>,
) -> Result<()> {
    writeln!(w, "{MAP_HEADER}")?;
    for c in cells {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            c.criterion,
            c.k,
            c.algorithm,
            c.input_mode,
            c.rating_fn,
            c.filter,
            opt(c.map),
            c.users_evaluated,
            c.users_excluded
        )?;
    }
    Ok(())
}

pub fn write_composition_csv<W: Write>(w: &mut W, rows: &[CompositionRow]) -> Result<()> {
    writeln!(w, "{COMPOSITION_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            r.rating_fn,
            r.filter,
            r.k,
            r.recommended,
            r.events,
            opt(r.streams_pct),
            opt(r.likes_pct),
            opt(r.skips_pct),
            opt(r.dislikes_pct)
        )?;
    }
    Ok(())
}

pub fn write_classifier_csv<W: Write>(w: &mut W, rows: &[ClassifierRow]) -> Result<()> {
    writeln!(w, "{CLASSIFIER_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.rating_fn,
            r.score_source,
            r.mu_like,
            r.var_like,
            r.mu_dislike,
            r.var_dislike,
            r.prior_like,
            r.swap_alpha,
            opt(r.like_precision),
            opt(r.like_recall),
            opt(r.dislike_precision),
            opt(r.dislike_recall)
        )?;
    }
    Ok(())
}

/// Left-aligned first column, right-aligned others.
pub fn render_table(title: &str, headers: &[String], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(String::len).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: &[String]| {
        cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, &w))| {
                if i == 0 {
                    format!("{c:<w$}")
                } else {
                    format!("{c:>w$}")
                }
            })
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    let mut out = format!("{title}\n{}\n", line(headers));
    out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * widths.len().saturating_sub(1)));
    out.push('\n');
    for row in rows {
        out.push_str(&line(row));
        out.push('\n');
    }
    out
}

fn fmt_map(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.5}"))
}

fn fmt_pct(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.1}%"))
}

fn distinct<T: PartialEq + Clone>(items: impl IntoIterator<Item = T>) -> Vec<T> {
    let mut out = Vec::new();
    for i in items {
        if !out.contains(&i) {
            out.push(i);
        }
    }
    out
}

/// One row per distinct `row_key`, one column per (criterion, k).
fn map_grid(
    title: &str,
    cells: &[MapCell],
    row_label: &str,
    row_key: impl Fn(&MapCell) -> String,
) -> String {
    let rows_keys = distinct(cells.iter().map(&row_key));
    let cols = distinct(cells.iter().map(|c| (c.criterion, c.k)));
    let mut headers = vec![row_label.to_string()];
    headers.extend(cols.iter().map(|(crit, k)| {
        let tag = crit.parse::<RelevanceCriterion>().map_or('?', |c| c.tag());
        format!("MAP_{tag}@{k}")
    }));
    let rows: Vec<Vec<String>> = rows_keys
        .iter()
        .map(|key| {
            let mut row = vec![key.clone()];
            row.extend(cols.iter().map(|&(crit, k)| {
                cells
                    .iter()
                    .find(|c| row_key(c) == *key && c.criterion == crit && c.k == k)
                    .map_or_else(|| "-".into(), |c| fmt_map(c.map))
            }));
            row
        })
        .collect();
    render_table(title, &headers, &rows)
}

pub fn render_text(report: &ExperimentReport) -> String {
    let mut out = String::new();
    if !report.baselines.is_empty() {
        out.push_str(&map_grid(
            "MAP@k by recommender",
            &report.baselines,
            "algorithm",
            |c| {
                let input = if c.rating_fn.is_empty() {
                    &c.input_mode
                } else {
                    &c.rating_fn
                };
                format!("{} ({input})", c.algorithm)
            },
        ));
        out.push('\n');
    }
    if !report.inputs.is_empty() {
        out.push_str(&map_grid(
            "MAP@k by KNN input",
            &report.inputs,
            "input",
            |c| c.input_mode.clone(),
        ));
        out.push('\n');
    }
    if !report.filtered.is_empty() {
        out.push_str(&map_grid(
            "MAP@k by post-filter",
            &report.filtered,
            "filter / rating",
            |c| format!("{} / {}", c.filter, c.rating_fn),
        ));
        out.push('\n');
    }
    if !report.composition.is_empty() {
        let k = report.composition[0].k;
        let headers: Vec<String> = [
            "filter / rating",
            "recommended",
            "events",
            "%streams",
            "%like",
            "%skips",
            "%dislike",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        let rows: Vec<Vec<String>> = report
            .composition
            .iter()
            .map(|r| {
                vec![
                    format!("{} / {}", r.filter, r.rating_fn),
                    r.recommended.to_string(),
                    r.events.to_string(),
                    fmt_pct(r.streams_pct),
                    fmt_pct(r.likes_pct),
                    fmt_pct(r.skips_pct),
                    fmt_pct(r.dislikes_pct),
                ]
            })
            .collect();
        let title = format!(
            "Composition of top-{k} recommendations with a hidden interaction\n\
             (events = recommended pairs with a hidden interaction; %streams and %skips are non-exclusive shares of events; %like and %dislike are exclusive)"
        );
        out.push_str(&render_table(&title, &headers, &rows));
        out.push('\n');
    }
    if !report.classifiers.is_empty() {
        let headers: Vec<String> = [
            "rating",
            "mu_like",
            "sd_like",
            "mu_dislike",
            "sd_dislike",
            "prior_like",
            "alpha",
            "P_like",
            "R_like",
            "P_dislike",
            "R_dislike",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        let f = |v: f64| format!("{v:.3}");
        let o = |v: Option<f64>| v.map_or_else(|| "-".into(), f);
        let rows: Vec<Vec<String>> = report
            .classifiers
            .iter()
            .map(|r| {
                vec![
                    r.rating_fn.clone(),
                    f(r.mu_like),
                    f(r.var_like.sqrt()),
                    f(r.mu_dislike),
                    f(r.var_dislike.sqrt()),
                    f(r.prior_like),
                    f(r.swap_alpha),
                    o(r.like_precision),
                    o(r.like_recall),
                    o(r.dislike_precision),
                    o(r.dislike_recall),
                ]
            })
            .collect();
        out.push_str(&render_table(
            "Like/dislike classifier (held-out scores on hidden labeled pairs)",
            &headers,
            &rows,
        ));
    }
    out
}

pub fn write_json<W: Write>(w: &mut W, report: &ExperimentReport) -> Result<()> {
    serde_json::to_writer_pretty(&mut *w, report)?;
    writeln!(w)?;
    Ok(())
}
