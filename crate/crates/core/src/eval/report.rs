use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{EvalError, RunRecord};
use crate::prompt::{InputConfiguration, VisualMode};

const UNDEFINED: &str = "--";
const HEADER: [&str; 9] = ["Model", "Visual", "Input", "Acc", "Prec", "Rec", "F1", "Tok", "Lat"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Table {
    Topic,
    Environment,
    Sensitive,
    Person,
    TopicMacro,
    EnvironmentMacro,
}

impl Table {
    /// The four headline task tables.
    pub const MAIN: [Table; 4] = [Table::Topic, Table::Environment, Table::Sensitive, Table::Person];
    pub const ALL: [Table; 6] = [
        Table::Topic,
        Table::Environment,
        Table::Sensitive,
        Table::Person,
        Table::TopicMacro,
        Table::EnvironmentMacro,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Table::Topic => "topic",
            Table::Environment => "environment",
            Table::Sensitive => "sensitive",
            Table::Person => "person",
            Table::TopicMacro => "topic_macro",
            Table::EnvironmentMacro => "environment_macro",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Table::Topic => "Topic",
            Table::Environment => "Environment",
            Table::Sensitive => "Sensitive content",
            Table::Person => "Person recognition",
            Table::TopicMacro => "Topic (macro averages)",
            Table::EnvironmentMacro => "Environment (macro averages)",
        }
    }
}

/// One line of a task table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub model_id: String,
    pub visual_mode: VisualMode,
    pub input: String,
    pub accuracy: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub tokens: Option<f64>,
    pub latency_ms: Option<f64>,
}

fn config_rank(mode: VisualMode, input: &str) -> usize {
    InputConfiguration::preset(mode, input).map(|c| c.rank()).unwrap_or(usize::MAX)
}

/// Rows for one table, sorted by model, pipeline and input configuration.
pub fn report_rows(runs: &[RunRecord], table: Table) -> Vec<ReportRow> {
    let mut rows: Vec<ReportRow> = runs
        .iter()
        .map(|r| {
            let m = r.metrics(table);
            ReportRow {
                model_id: r.model_id.clone(),
                visual_mode: r.input_config.visual_mode,
                input: r.input_config.name().to_string(),
                accuracy: m.accuracy,
                precision: m.precision,
                recall: m.recall,
                f1: m.f1,
                tokens: r.mean_input_tokens,
                latency_ms: r.mean_latency_ms,
            }
        })
        .collect();
    rows.sort_by(|a, b| {
        (&a.model_id, a.visual_mode, config_rank(a.visual_mode, &a.input)).cmp(&(
            &b.model_id,
            b.visual_mode,
            config_rank(b.visual_mode, &b.input),
        ))
    });
    rows
}

fn full(v: Option<f64>) -> String {
    v.map_or_else(|| UNDEFINED.to_string(), |x| x.to_string())
}

fn cells(row: &ReportRow, metric: impl Fn(Option<f64>) -> String, count: impl Fn(Option<f64>) -> String) -> Vec<String> {
    vec![
        row.model_id.clone(),
        row.visual_mode.to_string(),
        row.input.clone(),
        metric(row.accuracy),
        metric(row.precision),
        metric(row.recall),
        metric(row.f1),
        count(row.tokens),
        count(row.latency_ms),
    ]
}

/// CSV at full precision; `comment` becomes a leading `# ` line.
pub fn render_csv(rows: &[ReportRow], comment: Option<&str>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(HEADER).expect("in-memory write");
    for row in rows {
        w.write_record(cells(row, full, full)).expect("in-memory write");
    }
    let body = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input");
    match comment {
        Some(c) => format!("# {c}\n{body}"),
        None => body,
    }
}

fn parse_cell(raw: &str, line: usize) -> Result<Option<f64>, EvalError> {
    if raw == UNDEFINED {
        return Ok(None);
    }
    raw.parse()
        .map(Some)
        .map_err(|_| EvalError::Report { line, message: format!("not a number: {raw:?}") })
}

/// Reads back a table written by [`render_csv`].
pub fn parse_csv(text: &str) -> Result<Vec<ReportRow>, EvalError> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| EvalError::Report { line: 1, message: e.to_string() })?
        .clone();
    if header.iter().ne(HEADER) {
        return Err(EvalError::Report { line: 1, message: format!("unexpected header {header:?}") });
    }
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| EvalError::Report {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let visual_mode = rec[1]
            .parse()
            .map_err(|_| EvalError::Report { line, message: format!("unknown pipeline {:?}", &rec[1]) })?;
        rows.push(ReportRow {
            model_id: rec[0].to_string(),
            visual_mode,
            input: rec[2].to_string(),
            accuracy: parse_cell(&rec[3], line)?,
            precision: parse_cell(&rec[4], line)?,
            recall: parse_cell(&rec[5], line)?,
            f1: parse_cell(&rec[6], line)?,
            tokens: parse_cell(&rec[7], line)?,
            latency_ms: parse_cell(&rec[8], line)?,
        });
    }
    Ok(rows)
}

/// Aligned Markdown table: metrics to two decimals, Tok and Lat as integers.
pub fn render_markdown(table: Table, rows: &[ReportRow], comment: Option<&str>) -> String {
    let metric = |v: Option<f64>| v.map_or_else(|| UNDEFINED.to_string(), |x| format!("{x:.2}"));
    let count = |v: Option<f64>| v.map_or_else(|| UNDEFINED.to_string(), |x| format!("{:.0}", x.round()));
    let body: Vec<Vec<String>> = rows.iter().map(|r| cells(r, metric, count)).collect();
    let mut widths: Vec<usize> = HEADER.iter().map(|h| h.len()).collect();
    for row in &body {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }

    let mut out = String::new();
    if let Some(c) = comment {
        let _ = writeln!(out, "<!-- {c} -->");
    }
    let _ = writeln!(out, "### {}\n", table.title());
    let line = |cells: &[String], out: &mut String| {
        out.push('|');
        for (i, (c, w)) in cells.iter().zip(&widths).enumerate() {
            let pad = w - c.chars().count();
            // text columns left, numbers right
            if i < 3 {
                let _ = write!(out, " {c}{} |", " ".repeat(pad));
            } else {
                let _ = write!(out, " {}{c} |", " ".repeat(pad));
            }
        }
        out.push('\n');
    };
    line(&HEADER.map(String::from), &mut out);
    out.push('|');
    for (i, w) in widths.iter().enumerate() {
        if i < 3 {
            let _ = write!(out, " {} |", "-".repeat(*w));
        } else {
            let _ = write!(out, " {}: |", "-".repeat(w - 1));
        }
    }
    out.push('\n');
    for row in &body {
        line(row, &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{Averaging, TaskMetrics};

    fn tm(p: Option<f64>) -> TaskMetrics {
        TaskMetrics { accuracy: Some(0.88), precision: p, recall: Some(0.0), f1: None, support: 100, averaging: Averaging::BinaryPositive }
    }

    fn run(model: &str, cfg: &str) -> RunRecord {
        RunRecord {
            model_id: model.into(),
            input_config: InputConfiguration::preset(VisualMode::Frames, cfg).unwrap(),
            topic: tm(Some(0.1)),
            topic_macro: tm(Some(0.2)),
            environment: tm(Some(1.0 / 3.0)),
            environment_macro: tm(None),
            sensitive: tm(None),
            sensitive_category_match: None,
            person: tm(Some(0.25)),
            mean_input_tokens: Some(6224.0),
            mean_latency_ms: Some(1234.5),
        }
    }

    #[test]
    fn single_run_has_six_value_columns() {
        let rows = report_rows(&[run("m", "only")], Table::Sensitive);
        let csv = render_csv(&rows, None);
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], "Model,Visual,Input,Acc,Prec,Rec,F1,Tok,Lat");
        assert_eq!(lines[1], "m,frames,only,0.88,--,0,--,6224,1234.5");
    }

    #[test]
    fn rows_sort_by_model_then_config_order() {
        let runs = [run("b", "only"), run("a", "asr_diar_meta"), run("a", "only"), run("a", "asr")];
        let rows = report_rows(&runs, Table::Topic);
        let keys: Vec<_> = rows.iter().map(|r| (r.model_id.as_str(), r.input.as_str())).collect();
        assert_eq!(keys, [("a", "only"), ("a", "asr"), ("a", "asr_diar_meta"), ("b", "only")]);
    }

    #[test]
    fn csv_roundtrip_is_exact() {
        let runs = [run("gemini-3-pro", "asr_meta"), run("ministral", "only")];
        for table in Table::ALL {
            let rows = report_rows(&runs, table);
            let text = render_csv(&rows, Some("manifest_sha256=abc"));
            assert!(text.starts_with("# manifest_sha256=abc\n"));
            assert_eq!(parse_csv(&text).unwrap(), rows);
        }
    }

    #[test]
    fn markdown_is_aligned_with_undefined_marker() {
        let md = render_markdown(Table::Sensitive, &report_rows(&[run("ministral-3b", "only")], Table::Sensitive), None);
        let table: Vec<_> = md.lines().filter(|l| l.starts_with('|')).collect();
        assert_eq!(table.len(), 3);
        assert!(table.iter().all(|l| l.len() == table[0].len()));
        assert!(table[2].contains("| 0.88 |"));
        assert!(table[2].contains("|   -- |"));
        assert!(table[2].contains("| 6224 |"));
    }

    #[test]
    fn bad_header_is_rejected() {
        assert!(parse_csv("a,b\n1,2\n").is_err());
    }
}
