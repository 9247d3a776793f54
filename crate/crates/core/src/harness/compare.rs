//! Analytic spectra as CSV and paired comparison against computed values.

use std::fs::{self, File};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use crate::analytic::{cone_spectrum, sphere_spectrum, AnalyticSpectrum, ConeParams};
use crate::eigensolve::group_values;

/// One eigenvalue per row; `multiplicity` is that of the value it belongs to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub index: usize,
    pub eigenvalue: f64,
    pub multiplicity: u32,
    pub label: u32,
}

pub fn write_spectrum_csv<W: Write>(w: W, rows: &[SpectrumRow]) -> anyhow::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for row in rows {
        out.serialize(row)?;
    }
    if rows.is_empty() {
        out.write_record(["index", "eigenvalue", "multiplicity", "label"])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_spectrum_csv<R: Read>(r: R) -> anyhow::Result<Vec<SpectrumRow>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let mut rows = Vec::new();
    for (i, rec) in rdr.deserialize().enumerate() {
        let row: SpectrumRow = rec.with_context(|| format!("CSV record {}", i + 1))?;
        rows.push(row);
    }
    Ok(rows)
}

/// Rows repeated by multiplicity, so row `i` is the `i`-th eigenvalue.
pub fn analytic_csv(spectrum: &AnalyticSpectrum, positive: bool) -> Vec<SpectrumRow> {
    let sign = if positive { -1.0 } else { 1.0 };
    spectrum
        .entries
        .iter()
        .flat_map(|e| std::iter::repeat(e).take(e.multiplicity as usize))
        .enumerate()
        .map(|(index, e)| SpectrumRow {
            index,
            eigenvalue: sign * e.eigenvalue,
            multiplicity: e.multiplicity,
            label: e.label,
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AnalyticRequest {
    Sphere { k: usize },
    Cone { h: f64, cutoff: f64, n_max: u32 },
}

pub fn cmd_analytic(req: AnalyticRequest, positive: bool, out: Option<&Path>) -> anyhow::Result<Vec<SpectrumRow>> {
    let spectrum = match req {
        AnalyticRequest::Sphere { k } => sphere_spectrum(k)?,
        AnalyticRequest::Cone { h, cutoff, n_max } => cone_spectrum(ConeParams::new(h)?, cutoff, n_max)?,
    };
    let rows = analytic_csv(&spectrum, positive);
    if let Some(path) = out {
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        write_spectrum_csv(file, &rows)?;
    }
    Ok(rows)
}

/// Eigenvalues from an eigs JSON report (`eigenvalues` array) or a spectrum CSV.
pub fn read_computed(path: &Path) -> anyhow::Result<Vec<f64>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if text.trim_start().starts_with('{') {
        let v: serde_json::Value =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let arr = v
            .get("eigenvalues")
            .and_then(|e| e.as_array())
            .with_context(|| format!("{} has no 'eigenvalues' array", path.display()))?;
        arr.iter()
            .map(|x| x.as_f64().context("non-numeric eigenvalue"))
            .collect()
    } else {
        Ok(read_spectrum_csv(text.as_bytes())
            .with_context(|| format!("parsing {}", path.display()))?
            .into_iter()
            .map(|r| r.eigenvalue)
            .collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub index: usize,
    pub computed: f64,
    pub analytic: Option<f64>,
    /// `|computed − analytic| / |analytic|`; the absolute error when the
    /// analytic value is zero.
    pub relative_error: Option<f64>,
    /// Size of the computed eigengroup the row falls in.
    pub multiplicity: usize,
    pub group: usize,
}

#[derive(Clone, Debug)]
pub struct CompareRequest {
    pub computed: PathBuf,
    pub analytic: PathBuf,
    /// Grouping tolerance for the multiplicity column.
    pub reltol: f64,
    /// Fail when any relative error exceeds this.
    pub gate: Option<f64>,
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CompareSummary {
    pub rows: Vec<ComparisonRow>,
    pub max_relative_error: f64,
    pub computed_count: usize,
    pub analytic_count: usize,
    pub passed: bool,
}

fn by_magnitude(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    v
}

/// Pairs both lists in order of increasing magnitude, truncating to the shorter.
pub fn compare_values(computed: &[f64], analytic: &[f64], reltol: f64) -> Vec<ComparisonRow> {
    let computed = by_magnitude(computed.to_vec());
    let analytic = by_magnitude(analytic.to_vec());
    let len = computed.len().min(analytic.len());
    if computed.len() != analytic.len() {
        log::warn!(
            "computed has {} values and analytic {}; comparing the first {len}",
            computed.len(),
            analytic.len()
        );
    }
    let computed = &computed[..len];
    let mut rows = Vec::with_capacity(len);
    for (g, group) in group_values(computed, reltol).iter().enumerate() {
        for i in group.first..group.first + group.multiplicity {
            let (c, a) = (computed[i], analytic[i]);
            let err = if a == 0.0 { (c - a).abs() } else { (c - a).abs() / a.abs() };
            rows.push(ComparisonRow {
                index: i,
                computed: c,
                analytic: Some(a),
                relative_error: Some(err),
                multiplicity: group.multiplicity,
                group: g,
            });
        }
    }
    rows
}

pub fn write_comparison_csv<W: Write>(w: W, rows: &[ComparisonRow]) -> anyhow::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["index", "computed", "analytic", "relative_error", "multiplicity", "group"])?;
    let opt = |v: Option<f64>| v.map(|x| format!("{x:.10e}")).unwrap_or_default();
    for r in rows {
        out.write_record([
            r.index.to_string(),
            format!("{:.10e}", r.computed),
            opt(r.analytic),
            opt(r.relative_error),
            r.multiplicity.to_string(),
            r.group.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn cmd_compare(req: &CompareRequest) -> anyhow::Result<CompareSummary> {
    if !(req.reltol >= 0.0) {
        bail!("reltol must be non-negative");
    }
    let computed = read_computed(&req.computed)?;
    let analytic: Vec<f64> = read_spectrum_csv(
        File::open(&req.analytic).with_context(|| format!("opening {}", req.analytic.display()))?,
    )
    .with_context(|| format!("parsing {}", req.analytic.display()))?
    .into_iter()
    .map(|r| r.eigenvalue)
    .collect();
    let rows = compare_values(&computed, &analytic, req.reltol);
    let max_relative_error = rows
        .iter()
        .filter_map(|r| r.relative_error)
        .fold(0.0, f64::max);
    if let Some(path) = &req.out {
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        write_comparison_csv(file, &rows)?;
    }
    let passed = req.gate.map_or(true, |g| max_relative_error <= g);
    Ok(CompareSummary {
        rows,
        max_relative_error,
        computed_count: computed.len(),
        analytic_count: analytic.len(),
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_inputs_have_zero_error() {
        let v = [-2.0, -2.0, -2.0, -6.0];
        let rows = compare_values(&v, &v, 0.06);
        assert!(rows.iter().all(|r| r.relative_error == Some(0.0)));
        assert_eq!(rows[0].multiplicity, 3);
        assert_eq!(rows[3].group, 1);
    }

    #[test]
    fn mismatched_lengths_truncate() {
        let rows = compare_values(&[-1.0, -2.0, -3.0], &[-2.0, -1.1], 0.0);
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].analytic, Some(-1.1));
        assert!((rows[0].relative_error.unwrap() - 0.1 / 1.1).abs() < 1e-15);
    }

    #[test]
    fn zero_analytic_uses_absolute_error() {
        let rows = compare_values(&[0.0, -1e-3], &[0.0, 0.0], 0.0);
        assert_eq!(rows[0].relative_error, Some(0.0));
        assert_eq!(rows[1].relative_error, Some(1e-3));
    }

    #[test]
    fn spectrum_csv_round_trip() {
        let rows = analytic_csv(&sphere_spectrum(4).unwrap(), false);
        let mut buf = Vec::new();
        write_spectrum_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("index,eigenvalue,multiplicity,label\n0,-2.0,3,1\n"));
        assert_eq!(read_spectrum_csv(buf.as_slice()).unwrap(), rows);
    }
}
