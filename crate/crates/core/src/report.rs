//! Rendering of a [`NoveltyReport`] as a text table, CSV or JSON.
//!
//! The table prints one block per past problem with the construct rows in
//! canonical order, construct novelty at three decimals and the average at
//! two, followed by the ranking. CSV and JSON carry full precision.

use std::fmt::Write as _;

use serde::Serialize;

use crate::assessment::{round_half_up, NoveltyReport, PairAssessment};
use crate::model::{ConstructLevel, ProblemCorpus};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Table,
    Csv,
    Json,
}

/// Which parts of the report to emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Detail {
    /// Pairwise construct tables plus the ranking.
    Full,
    /// Ranking only.
    Summary,
}

/// Construct score as shown in tables: three decimals, trailing zeros
/// dropped, so 0.680 prints as `0.68` and zero as `0`.
pub fn format_construct(value: f64) -> String {
    let s = format!("{:.3}", round_half_up(value, 3));
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() || s == "-0" {
        "0".to_owned()
    } else {
        s.to_owned()
    }
}

/// Average or minimum novelty as shown in tables: two decimals.
pub fn format_average(value: f64) -> String {
    format!("{:.2}", round_half_up(value, 2))
}

pub fn render(
    report: &NoveltyReport,
    past: &ProblemCorpus,
    current: &ProblemCorpus,
    format: OutputFormat,
    detail: Detail,
) -> String {
    match format {
        OutputFormat::Table => render_table(report, past, current, detail),
        OutputFormat::Csv => render_csv(report, past, current, detail),
        OutputFormat::Json => render_json(report, detail),
    }
}

fn push_row(out: &mut String, cells: &[String], widths: &[usize]) {
    let mut line = String::new();
    for (i, (cell, width)) in cells.iter().zip(widths).enumerate() {
        if i + 1 == cells.len() {
            line.push_str(cell);
        } else {
            let _ = write!(line, "{cell:<width$}  ");
        }
    }
    out.push_str(line.trim_end());
    out.push('\n');
}

fn push_table(out: &mut String, rows: &[Vec<String>]) {
    let columns = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..columns)
        .map(|c| {
            rows.iter()
                .filter_map(|r| r.get(c))
                .map(|s| s.chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    for row in rows {
        push_row(out, row, &widths);
    }
}

fn pair_column(a: &PairAssessment) -> Vec<String> {
    let mut cells = vec![format!("{}-{}", a.past_id, a.current_id)];
    for level in ConstructLevel::ALL {
        cells.push(
            a.construct_novelty
                .get(&level)
                .map(|&n| format_construct(n))
                .unwrap_or_else(|| "-".to_owned()),
        );
    }
    cells.push(match a.average_novelty {
        Some(avg) if a.reduced => format!("{}*", format_average(avg)),
        Some(avg) => format_average(avg),
        None => "-".to_owned(),
    });
    cells.push(a.band.map(|b| b.label().to_owned()).unwrap_or_else(|| "-".to_owned()));
    cells
}

fn render_table(report: &NoveltyReport, past: &ProblemCorpus, current: &ProblemCorpus, detail: Detail) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Novelty assessment");
    let _ = writeln!(out, "backend: {}", report.backend);
    let _ = writeln!(out, "action gate threshold: {}", report.threshold);

    if detail == Detail::Full {
        let mut any_reduced = false;
        for (past_id, pairs) in report.pairs_by_past(past, current) {
            let currents: Vec<&str> = pairs.iter().map(|a| a.current_id.as_str()).collect();
            let _ = writeln!(out, "\nComparison of {past_id} with {}", currents.join(", "));

            let mut labels = vec!["Constructs/ Comparison pair".to_owned()];
            labels.extend(ConstructLevel::ALL.iter().map(|l| l.display_name().to_owned()));
            labels.push("Avg. Novelty".to_owned());
            labels.push("Cumulative Decision on Novelty".to_owned());

            let columns: Vec<Vec<String>> = pairs.iter().map(|a| pair_column(a)).collect();
            any_reduced |= pairs.iter().any(|a| a.reduced);
            let rows: Vec<Vec<String>> = labels
                .into_iter()
                .enumerate()
                .map(|(i, label)| {
                    std::iter::once(label)
                        .chain(columns.iter().map(|c| c[i].clone()))
                        .collect()
                })
                .collect();
            push_table(&mut out, &rows);
        }
        if any_reduced {
            let _ = writeln!(out, "\n* averaged over fewer than six construct levels");
        }
    }

    let _ = writeln!(out, "\nRanking by minimum novelty over past problems");
    let mut rows = vec![vec![
        "Rank".to_owned(),
        "Problem".to_owned(),
        "Min. Novelty".to_owned(),
        "Decision".to_owned(),
        "Closest past".to_owned(),
    ]];
    for r in &report.ranked {
        rows.push(vec![
            r.rank.to_string(),
            r.current_id.clone(),
            format_average(r.min_novelty),
            r.band.label().to_owned(),
            r.closest_past_id.clone(),
        ]);
    }
    push_table(&mut out, &rows);

    if !report.unmatched.is_empty() {
        let _ = writeln!(out, "\nUnmatched (no scored comparison with any past problem)");
        for u in &report.unmatched {
            let _ = writeln!(out, "{}", u.current_id);
        }
    }
    out
}

const CSV_HEADER: [&str; 13] = [
    "record",
    "past_id",
    "current_id",
    "action",
    "state_change",
    "phenomena",
    "effect",
    "input",
    "organ",
    "parts",
    "avg_novelty",
    "band",
    "rank",
];

fn render_csv(report: &NoveltyReport, past: &ProblemCorpus, current: &ProblemCorpus, detail: Detail) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(CSV_HEADER).expect("in-memory write");

    if detail == Detail::Full {
        for (_, pairs) in report.pairs_by_past(past, current) {
            for a in pairs {
                let mut row = vec!["pair".to_owned(), a.past_id.clone(), a.current_id.clone()];
                for level in ConstructLevel::ALL {
                    row.push(a.construct_novelty.get(&level).map(f64::to_string).unwrap_or_default());
                }
                row.push(a.average_novelty.map(|v| v.to_string()).unwrap_or_default());
                row.push(a.band.map(|b| b.to_string()).unwrap_or_default());
                row.push(String::new());
                writer.write_record(&row).expect("in-memory write");
            }
        }
    }
    for r in &report.ranked {
        let mut row = vec!["rank".to_owned(), r.closest_past_id.clone(), r.current_id.clone()];
        row.extend(std::iter::repeat_n(String::new(), 7));
        row.push(r.min_novelty.to_string());
        row.push(r.band.to_string());
        row.push(r.rank.to_string());
        writer.write_record(&row).expect("in-memory write");
    }
    for u in &report.unmatched {
        let mut row = vec!["unmatched".to_owned(), String::new(), u.current_id.clone()];
        row.extend(std::iter::repeat_n(String::new(), 10));
        writer.write_record(&row).expect("in-memory write");
    }

    let body = String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf-8 csv");
    format!("# backend={} threshold={}\n{body}", report.backend, report.threshold)
}

#[derive(Serialize)]
struct SummaryEntry<'a> {
    rank: usize,
    current_id: &'a str,
    min_novelty: f64,
    band: crate::assessment::NoveltyBand,
    closest_past_id: &'a str,
}

#[derive(Serialize)]
struct Summary<'a> {
    backend: crate::similarity::BackendKind,
    threshold: f64,
    ranked: Vec<SummaryEntry<'a>>,
    unmatched: Vec<&'a str>,
}

fn render_json(report: &NoveltyReport, detail: Detail) -> String {
    let mut text = match detail {
        Detail::Full => serde_json::to_string_pretty(report),
        Detail::Summary => serde_json::to_string_pretty(&Summary {
            backend: report.backend,
            threshold: report.threshold,
            ranked: report
                .ranked
                .iter()
                .map(|r| SummaryEntry {
                    rank: r.rank,
                    current_id: &r.current_id,
                    min_novelty: r.min_novelty,
                    band: r.band,
                    closest_past_id: &r.closest_past_id,
                })
                .collect(),
            unmatched: report.unmatched.iter().map(|u| u.current_id.as_str()).collect(),
        }),
    }
    .expect("report serializes");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construct_formatting() {
        assert_eq!(format_construct(0.0), "0");
        assert_eq!(format_construct(1.0 - 0.314), "0.686");
        assert_eq!(format_construct(1.0 - 0.32), "0.68");
        assert_eq!(format_construct(0.5), "0.5");
        assert_eq!(format_construct(1.0), "1");
        assert_eq!(format_construct(0.0004), "0");
    }

    #[test]
    fn average_formatting() {
        assert_eq!(format_average(3.313 / 6.0), "0.55");
        assert_eq!(format_average(4.189 / 6.0), "0.70");
        assert_eq!(format_average(0.0), "0.00");
        assert_eq!(format_average(0.125), "0.13");
    }
}
