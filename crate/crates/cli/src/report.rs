//! Human-readable formatting helpers and JSON report types.

use serde::Serialize;

/// `v` with six significant digits; scientific notation outside `[1e-4, 1e6)`.
pub fn sig6(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let mag = v.abs().log10().floor() as i32;
    if !(-4..6).contains(&mag) {
        return format!("{v:.5e}");
    }
    let decimals = (5 - mag).max(0) as usize;
    format!("{v:.decimals$}")
}

pub fn join_one_based(v: &[usize]) -> String {
    v.iter().map(|x| (x + 1).to_string()).collect::<Vec<_>>().join(",")
}

/// Right-aligned columns.
pub fn table(header: &[String], rows: &[Vec<String>]) -> String {
    let cols = header.len();
    let mut width = vec![0; cols];
    for row in std::iter::once(header).chain(rows.iter().map(Vec::as_slice)) {
        for (w, cell) in width.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    for row in std::iter::once(header).chain(rows.iter().map(Vec::as_slice)) {
        let cells: Vec<String> = row.iter().zip(&width).map(|(c, &w)| format!("{c:>w$}")).collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out
}

#[derive(Debug, Serialize)]
pub struct EntryJson {
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

#[derive(Debug, Serialize)]
pub struct CheckJson {
    pub ordering: Vec<usize>,
    pub is_cis: bool,
    pub is_mtp2: bool,
    pub is_positively_associated: bool,
    pub violating_entries: Vec<EntryJson>,
}

#[derive(Debug, Serialize)]
pub struct OrderingsJson {
    pub mode: &'static str,
    pub count: usize,
    pub orderings: Vec<Vec<usize>>,
}

#[derive(Debug, Serialize)]
pub struct StepJson {
    pub step: usize,
    pub variable: usize,
    pub min_coefficient: f64,
}

#[derive(Debug, Serialize)]
pub struct RecoverJson {
    pub ordering: Option<Vec<usize>>,
    pub n: usize,
    pub m: usize,
    pub epsilon: f64,
    pub steps: Vec<StepJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failed_step: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best_margin: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct FitJson {
    pub ordering: Vec<usize>,
    pub nonneg: bool,
    pub n: usize,
    pub exists: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_fit_variable: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub precision_diag: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub intercept: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub loglik: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual_norms: Option<Vec<f64>>,
}

#[derive(Debug, Serialize)]
pub struct EquivJson {
    pub class: &'static str,
    pub size: usize,
    pub members: Vec<Vec<[usize; 2]>>,
}

#[derive(Debug, Serialize)]
pub struct SimulateJson {
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    pub out: String,
}
