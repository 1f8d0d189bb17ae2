//! Result rows and their CSV form.

use std::path::Path;

use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::spec::Scenario;

pub const CSV_HEADER: [&str; 10] = [
    "swept_param",
    "value",
    "scenario",
    "scheme",
    "mode",
    "throughput",
    "std_error",
    "lambda",
    "rates",
    "ms",
];

/// One (swept value, scheme, mode) result. A missing throughput marks a
/// point skipped for degenerate backhaul capacity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub swept_param: String,
    pub value: f64,
    pub scenario: Scenario,
    pub scheme: String,
    pub mode: String,
    pub throughput: Option<f64>,
    pub std_error: Option<f64>,
    pub lambda: Vec<f64>,
    pub rates: Vec<f64>,
    pub ms: Option<f64>,
}

impl ResultRow {
    pub fn is_skipped(&self) -> bool {
        self.throughput.is_none()
    }

    /// Series key used by plots and ordering checks.
    pub fn series(&self) -> String {
        format!("{} / {}", self.scheme, self.mode)
    }

    /// The row as it reads back from CSV.
    pub fn rounded(&self) -> ResultRow {
        let r = |x: f64| fmt_num(x).parse::<f64>().unwrap_or(x);
        ResultRow {
            value: r(self.value),
            throughput: self.throughput.map(r),
            std_error: self.std_error.map(r),
            lambda: self.lambda.iter().map(|&x| r(x)).collect(),
            rates: self.rates.iter().map(|&x| r(x)).collect(),
            ms: self.ms.map(r),
            ..self.clone()
        }
    }
}

/// Formats `x` with 12 significant digits, like C's `%.12g`.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..12).contains(&exp) {
        let fixed = format!("{x:.*}", (11 - exp) as usize);
        trim_fraction(&fixed).to_string()
    } else {
        format!("{}e{exp}", trim_fraction(mantissa))
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn join(values: &[f64]) -> String {
    values.iter().map(|&x| fmt_num(x)).collect::<Vec<_>>().join(";")
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

/// Renders rows as CSV text, header first.
pub fn to_csv(rows: &[ResultRow]) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for row in rows {
        w.write_record([
            row.swept_param.clone(),
            fmt_num(row.value),
            row.scenario.to_string(),
            row.scheme.clone(),
            row.mode.clone(),
            opt(row.throughput),
            opt(row.std_error),
            join(&row.lambda),
            join(&row.rates),
            opt(row.ms),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV is UTF-8")
}

/// Parses CSV text produced by [`to_csv`].
pub fn parse_csv(text: &str) -> Result<Vec<ResultRow>, String> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = r.headers().map_err(|e| e.to_string())?;
    if header.iter().ne(CSV_HEADER) {
        return Err(format!("unexpected header `{}`", header.iter().collect::<Vec<_>>().join(",")));
    }
    let num = |s: &str, what: &str| s.parse::<f64>().map_err(|_| format!("bad {what} `{s}`"));
    let opt = |s: &str, what: &str| if s.is_empty() { Ok(None) } else { num(s, what).map(Some) };
    let list = |s: &str, what: &str| -> Result<Vec<f64>, String> {
        if s.is_empty() {
            Ok(Vec::new())
        } else {
            s.split(';').map(|x| num(x, what)).collect()
        }
    };
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        let f = |k: usize| rec.get(k).unwrap_or("");
        let scenario = Scenario::parse(f(2)).ok_or_else(|| format!("row {}: bad scenario `{}`", i + 1, f(2)))?;
        let row = (|| -> Result<ResultRow, String> {
            Ok(ResultRow {
                swept_param: f(0).to_string(),
                value: num(f(1), "value")?,
                scenario,
                scheme: f(3).to_string(),
                mode: f(4).to_string(),
                throughput: opt(f(5), "throughput")?,
                std_error: opt(f(6), "std_error")?,
                lambda: list(f(7), "lambda")?,
                rates: list(f(8), "rates")?,
                ms: opt(f(9), "ms")?,
            })
        })()
        .map_err(|e| format!("row {}: {e}", i + 1))?;
        rows.push(row);
    }
    Ok(rows)
}

pub fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

pub fn read_rows(path: &Path) -> CliResult<Vec<ResultRow>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_csv(&text).map_err(|message| CliError::Results {
        path: path.to_path_buf(),
        message,
    })
}
