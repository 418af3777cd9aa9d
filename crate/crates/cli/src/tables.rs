//! CSV/JSON readers and writers for the command artifacts.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use pwi_core::analysis::MarginalPlot;
use pwi_core::model::{Alternative, CriterionScale, PerformanceMatrix, PreferenceStatement, ValueFunction};
use pwi_core::sampler::PwiMatrix;

use crate::error::{CliError, CliResult};

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

/// Reads `alt_id,g1,…,gm` with one row per alternative.
pub fn read_matrix(path: &Path) -> CliResult<PerformanceMatrix> {
    let text = read_text(path)?;
    parse_matrix(&text).map_err(|msg| CliError::Input(format!("{}: {msg}", path.display())))
}

pub fn parse_matrix(text: &str) -> Result<PerformanceMatrix, String> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| e.to_string())?.clone();
    if header.len() < 2 {
        return Err("header needs an id column and at least one criterion".into());
    }
    let criteria: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let mut alternatives = Vec::new();
    let mut values = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| format!("line {line}: {e}"))?;
        let id = record.get(0).unwrap_or_default();
        if id.is_empty() {
            return Err(format!("line {line}: empty alternative id"));
        }
        let mut row = Vec::with_capacity(criteria.len());
        for (j, name) in criteria.iter().enumerate() {
            let cell = record.get(j + 1).unwrap_or_default();
            let v: f64 = cell.parse().map_err(|_| {
                format!("line {line}, column `{name}`: cannot parse `{cell}` as a number")
            })?;
            row.push(v);
        }
        alternatives.push(Alternative::new(id));
        values.push(row);
    }
    if alternatives.is_empty() {
        return Err("no data rows".into());
    }
    PerformanceMatrix::new(alternatives, criteria, values).map_err(|e| e.to_string())
}

pub fn matrix_csv(m: &PerformanceMatrix) -> String {
    let mut out = String::from("alt_id");
    for c in m.criteria() {
        out.push(',');
        out.push_str(c);
    }
    out.push('\n');
    for (alt, row) in m.alternatives().iter().zip(m.rows()) {
        out.push_str(&alt.id);
        for v in row {
            out.push(',');
            out.push_str(&fixed4(*v));
        }
        out.push('\n');
    }
    out
}

/// Four decimals, with negative zero printed as zero.
pub fn fixed4(v: f64) -> String {
    let s = format!("{v:.4}");
    if s == "-0.0000" {
        "0.0000".into()
    } else {
        s
    }
}

#[derive(Deserialize)]
struct PwiFile {
    alternatives: Vec<String>,
    values: Vec<Vec<f64>>,
}

/// Reads winning indices from JSON fractions or a percent CSV.
pub fn read_pwi(path: &Path) -> CliResult<PwiMatrix> {
    let text = read_text(path)?;
    let bad = |msg: String| CliError::Input(format!("{}: {msg}", path.display()));
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        let (ids, percent) = parse_percent(&text).map_err(bad)?;
        Ok(PwiMatrix::from_percent(ids, percent).map_err(|e| bad(e.to_string()))?)
    } else {
        let raw: PwiFile = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
        Ok(PwiMatrix::from_fractions(raw.alternatives, raw.values).map_err(|e| bad(e.to_string()))?)
    }
}

fn parse_percent(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>), String> {
    let m = parse_matrix(text)?;
    let ids = m.alternative_ids();
    if m.criteria() != ids.as_slice() {
        return Err("column headers must repeat the row ids".into());
    }
    Ok((ids, m.rows().to_vec()))
}

/// Square percent table, four decimals.
pub fn pwi_percent_csv(p: &PwiMatrix) -> String {
    let mut out = String::from("p");
    for id in p.alternatives() {
        out.push(',');
        out.push_str(id);
    }
    out.push('\n');
    for (id, row) in p.alternatives().iter().zip(p.rows()) {
        out.push_str(id);
        for v in row {
            out.push(',');
            out.push_str(&fixed4(100.0 * v));
        }
        out.push('\n');
    }
    out
}

pub fn read_preferences(path: &Path) -> CliResult<Vec<PreferenceStatement>> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Breakpoints and marginal values side by side, one row per level.
pub fn value_function_csv(u: &ValueFunction, scales: &[CriterionScale]) -> String {
    let mut out = String::from("k");
    for s in scales {
        out.push_str(&format!(",x_{0},u_{0}", s.criterion));
    }
    out.push('\n');
    let rows = scales.iter().map(CriterionScale::len).max().unwrap_or(0);
    for k in 0..rows {
        out.push_str(&k.to_string());
        for (j, s) in scales.iter().enumerate() {
            match s.levels().get(k) {
                Some(x) => out.push_str(&format!(",{},{}", fixed4(*x), fixed4(u.value(j, k)))),
                None => out.push_str(",,"),
            }
        }
        out.push('\n');
    }
    out
}

pub fn utilities_csv(utilities: &[(String, f64)]) -> String {
    let mut out = String::from("alt_id,utility\n");
    for (id, u) in utilities {
        out.push_str(&format!("{id},{}\n", fixed4(*u)));
    }
    out
}

pub fn plot_csv(plots: &[MarginalPlot]) -> String {
    let mut out = String::from("criterion,x,u\n");
    for p in plots {
        for (x, u) in &p.points {
            out.push_str(&format!("{},{},{}\n", p.criterion, fixed4(*x), fixed4(*u)));
        }
    }
    out
}

pub fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Input(format!("serialization failed: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// Artifacts collected in memory and written only once a command has
/// finished computing.
#[derive(Debug, Default)]
pub struct Outputs {
    files: Vec<(PathBuf, String)>,
}

impl Outputs {
    pub fn add(&mut self, path: PathBuf, contents: String) {
        self.files.push((path, contents));
    }

    pub fn paths(&self) -> impl Iterator<Item = &Path> {
        self.files.iter().map(|(p, _)| p.as_path())
    }

    /// Writes every file through a temporary sibling and a rename.
    pub fn commit(self) -> CliResult<Vec<PathBuf>> {
        let mut written = Vec::with_capacity(self.files.len());
        for (path, contents) in self.files {
            write_atomic(&path, contents.as_bytes())?;
            written.push(path);
        }
        Ok(written)
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{name}.tmp{}", std::process::id()));
    let result = fs::File::create(&tmp)
        .and_then(|mut f| {
            f.write_all(bytes)?;
            f.sync_all()
        })
        .and_then(|()| fs::rename(&tmp, path));
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(CliError::io(path, e));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_errors_name_the_cell() {
        let err = parse_matrix("alt_id,g1,g2\na1,0.1,abc\n").unwrap_err();
        assert!(err.contains("line 2") && err.contains("`g2`") && err.contains("abc"), "{err}");
        assert_eq!(parse_matrix("alt_id,g1\n").unwrap_err(), "no data rows");
        assert!(parse_matrix("alt_id,g1\na1,0,5\n").is_err());
    }

    #[test]
    fn matrix_round_trip() {
        let m = parse_matrix("alt_id,g1,g2\nx,0.25,-1\ny,0.5,2\n").unwrap();
        assert_eq!(m.alternative_ids(), vec!["x", "y"]);
        assert_eq!(matrix_csv(&m), "alt_id,g1,g2\nx,0.2500,-1.0000\ny,0.5000,2.0000\n");
    }

    #[test]
    fn value_function_layout_pads_short_scales() {
        let scales = vec![
            CriterionScale::new("g1", vec![0.1, 0.4]).unwrap(),
            CriterionScale::new("g2", vec![0.7]).unwrap(),
        ];
        let u = ValueFunction::from_values(vec![vec![0.0, 1.0], vec![0.0]]);
        assert_eq!(
            value_function_csv(&u, &scales),
            "k,x_g1,u_g1,x_g2,u_g2\n0,0.1000,0.0000,0.7000,0.0000\n1,0.4000,1.0000,,\n"
        );
    }

    #[test]
    fn percent_table_round_trip() {
        let text = "p,a1,a2\na1,0,41.66\na2,58.34,0\n";
        let (ids, rows) = parse_percent(text).unwrap();
        let p = PwiMatrix::from_percent(ids, rows).unwrap();
        assert_eq!(pwi_percent_csv(&p), "p,a1,a2\na1,0.0000,41.6600\na2,58.3400,0.0000\n");
        assert!(parse_percent("p,x,y\na1,0,50\na2,50,0\n").is_err());
    }

    #[test]
    fn negative_zero_is_normalized() {
        assert_eq!(fixed4(-0.00001), "0.0000");
        assert_eq!(fixed4(-0.5), "-0.5000");
    }
}
