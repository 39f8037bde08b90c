//! File formats: dense matrices, DAG edge lists, SEM parameters as JSON and
//! CSV datasets. All user-facing indices are 1-based.

use std::fs;
use std::io::Write;
use std::path::Path;

use cisdag_core::{Dag, Dataset, Ordering, PosDiagonal, SemParams, SymMatrix};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

/// Non-blank lines with `#` comments removed, paired with 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

fn parse_number(tok: &str, path: &Path, line: usize) -> Result<f64, CliError> {
    let v: f64 = tok
        .parse()
        .map_err(|_| CliError::Input(format!("{}:{line}: `{tok}` is not a number", path.display())))?;
    if !v.is_finite() {
        return Err(CliError::Input(format!("{}:{line}: non-finite value `{tok}`", path.display())));
    }
    Ok(v)
}

/// Dense numeric grid, one row per line, separated by commas and/or whitespace.
pub fn parse_matrix(text: &str, path: &Path) -> Result<Vec<Vec<f64>>, CliError> {
    let mut rows = Vec::new();
    for (line_no, line) in content_lines(text) {
        let row = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| parse_number(t, path, line_no))
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(first) = rows.first().map(Vec::len) {
            if row.len() != first {
                return Err(CliError::Input(format!(
                    "{}:{line_no}: expected {first} entries, found {}",
                    path.display(),
                    row.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::Input(format!("{}: no matrix rows", path.display())));
    }
    if rows.len() != rows[0].len() {
        return Err(CliError::Input(format!(
            "{}: matrix is {}x{}, expected square",
            path.display(),
            rows.len(),
            rows[0].len()
        )));
    }
    Ok(rows)
}

pub fn read_sym_matrix(path: &Path) -> Result<SymMatrix, CliError> {
    let rows = parse_matrix(&read_text(path)?, path)?;
    SymMatrix::from_rows(&rows).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// `m <count>` followed by one `i j` line per edge `i → j`.
pub fn parse_dag(text: &str, path: &Path) -> Result<Dag, CliError> {
    let bad = |line: usize, msg: &str| CliError::Input(format!("{}:{line}: {msg}", path.display()));
    let mut lines = content_lines(text);
    let (first_no, first) = lines.next().ok_or_else(|| bad(1, "empty DAG file"))?;
    let mut head = first.split_whitespace();
    let m: usize = match (head.next(), head.next(), head.next()) {
        (Some("m"), Some(count), None) => count.parse().map_err(|_| bad(first_no, "node count must be an integer"))?,
        _ => return Err(bad(first_no, "first line must be `m <count>`")),
    };
    let mut edges = Vec::new();
    for (no, line) in lines {
        let parts: Vec<&str> = line.split_whitespace().collect();
        let [a, b] = parts.as_slice() else {
            return Err(bad(no, "expected `i j`"));
        };
        let node = |s: &str| -> Result<usize, CliError> {
            match s.parse::<usize>() {
                Ok(v) if (1..=m).contains(&v) => Ok(v - 1),
                _ => Err(bad(no, &format!("node `{s}` is not in 1..={m}"))),
            }
        };
        edges.push((node(a)?, node(b)?));
    }
    Dag::new(m, edges).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn read_dag(path: &Path) -> Result<Dag, CliError> {
    parse_dag(&read_text(path)?, path)
}

/// SEM parameters on disk. `lambda[i][j]` is the coefficient of `x_{j+1}`
/// in the equation of `x_{i+1}`; `ordering` is 1-based.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemFile {
    pub ordering: Vec<usize>,
    pub lambda: Vec<Vec<f64>>,
    pub noise_var: Vec<f64>,
    #[serde(default)]
    pub mean: Option<Vec<f64>>,
}

impl SemFile {
    pub fn into_params(self) -> Result<SemParams, CliError> {
        let m = self.ordering.len();
        if self.lambda.len() != m || self.lambda.iter().any(|r| r.len() != m) {
            return Err(CliError::Input(format!("lambda must be {m}x{m}")));
        }
        let ordering = Ordering::from_one_based(&self.ordering)?;
        let lambda = DMatrix::from_fn(m, m, |i, j| self.lambda[i][j]);
        let noise = PosDiagonal::new(self.noise_var)?;
        Ok(SemParams::new(ordering, lambda, noise, self.mean)?)
    }

    pub fn from_params(p: &SemParams) -> Self {
        let m = p.dim();
        Self {
            ordering: p.ordering().to_one_based(),
            lambda: (0..m).map(|i| (0..m).map(|j| p.lambda()[(i, j)]).collect()).collect(),
            noise_var: p.noise_var().values().to_vec(),
            mean: Some(p.mean().to_vec()),
        }
    }
}

pub fn read_sem(path: &Path) -> Result<SemParams, CliError> {
    let file: SemFile = serde_json::from_str(&read_text(path)?)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    file.into_params()
}

/// CSV dataset; a first record that does not parse as numbers is a header.
pub fn parse_csv(text: &str, path: &Path) -> Result<Dataset, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let line = record.position().map_or(idx + 1, |p| p.line() as usize);
        let parsed: Result<Vec<f64>, _> = record.iter().map(|t| parse_number(t, path, line)).collect();
        match parsed {
            Ok(row) => rows.push(row),
            Err(_) if idx == 0 => continue,
            Err(e) => return Err(e),
        }
    }
    if rows.is_empty() {
        return Err(CliError::Input(format!("{}: no data rows", path.display())));
    }
    Dataset::from_rows(&rows).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn read_csv(path: &Path) -> Result<Dataset, CliError> {
    parse_csv(&read_text(path)?, path)
}

/// Header `x1,...,xm` then one row per sample, shortest round-trip decimals.
pub fn write_csv<W: Write>(data: &Dataset, out: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record((1..=data.m()).map(|j| format!("x{j}")))?;
    for r in 0..data.n() {
        w.write_record((0..data.m()).map(|c| data.get(r, c).to_string()))?;
    }
    w.flush()?;
    Ok(())
}
