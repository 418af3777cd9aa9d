//! One function per subcommand. Each computes everything first, stages its
//! artifacts in an [`Outputs`] and only then writes them.

use std::path::{Path, PathBuf};

use serde::Serialize;

use pwi_core::analysis::{marginal_plot_data, select_dispersed, DispersedSelection};
use pwi_core::model::{build_scales, rank, PerformanceMatrix, PreferenceStatement, ValueFunction};
use pwi_core::normalize::{standardize, ColumnStats};
use pwi_core::sampler::{compute_pwi, PwiMatrix};
use pwi_core::scoring::{
    build_base_constraints, check_all_contribute, check_all_increasing, dea_efficiency,
    enumerate_compatible, solve_lp0, BaseSystem, ConstraintCounts, DeaResult, DiagnosticResult,
    EnumerationOptions, EnumerationState, IncompatibilityReport, Lp0Outcome, StopReason,
};

use crate::config::AnalysisConfig;
use crate::error::{CliError, CliResult};
use crate::tables::{
    matrix_csv, parse_matrix, plot_csv, pwi_percent_csv, to_json, utilities_csv,
    value_function_csv, Outputs,
};

/// Result of a command: staged files plus a short human-readable summary.
#[derive(Default)]
pub struct Report {
    pub outputs: Outputs,
    pub summary: Vec<String>,
    /// Raised after the outputs have been written.
    pub deferred: Option<CliError>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    /// Writes the artifacts, then surfaces any deferred error.
    pub fn finish(self) -> CliResult<(Vec<PathBuf>, Vec<String>)> {
        let written = self.outputs.commit()?;
        match self.deferred {
            Some(e) => Err(e),
            None => Ok((written, self.summary)),
        }
    }
}

#[derive(Serialize)]
struct NormalizationJson<'a> {
    stats: &'a [ColumnStats],
    alternatives: Vec<String>,
    criteria: &'a [String],
    values: &'a [Vec<f64>],
}

/// Standardizes `raw`; returns the matrix as written to `normalized.csv`.
pub fn normalize(raw: &PerformanceMatrix, dir: &Path, report: &mut Report) -> CliResult<PerformanceMatrix> {
    let (norm, stats) = standardize(raw)?;
    let csv = matrix_csv(&norm);
    let rounded = parse_matrix(&csv).map_err(CliError::Input)?;
    report.outputs.add(
        dir.join("normalization.json"),
        to_json(&NormalizationJson {
            stats: &stats,
            alternatives: norm.alternative_ids(),
            criteria: norm.criteria(),
            values: norm.rows(),
        })?,
    );
    report.outputs.add(dir.join("normalized.csv"), csv);
    report.summary.push(format!(
        "normalized {} alternatives on {} criteria",
        norm.n_alternatives(),
        norm.n_criteria()
    ));
    Ok(rounded)
}

pub fn pwi(norm: &PerformanceMatrix, cfg: &AnalysisConfig, dir: &Path, report: &mut Report) -> CliResult<PwiMatrix> {
    let p = compute_pwi(norm, cfg.samples, cfg.seed)?;
    report.outputs.add(dir.join("pwi.json"), to_json(&p)?);
    report.outputs.add(dir.join("pwi_percent.csv"), pwi_percent_csv(&p));
    report.summary.push(format!(
        "pairwise winning indices from {} weight vectors (seed {})",
        cfg.samples, cfg.seed
    ));
    Ok(p)
}

#[derive(Serialize)]
struct UtilityRow<'a> {
    id: &'a str,
    utility: f64,
}

#[derive(Serialize)]
struct ScoreJson<'a> {
    status: &'static str,
    /// Absent for a vacuous system, where η* is unbounded.
    eta: Option<f64>,
    constraints: ConstraintCounts,
    #[serde(skip_serializing_if = "Option::is_none")]
    incompatibility: Option<&'a IncompatibilityReport>,
    all_contribute: Option<&'a DiagnosticResult>,
    all_increasing: Option<&'a DiagnosticResult>,
    utilities: Vec<UtilityRow<'a>>,
    ranking: Option<String>,
    groups: Vec<Vec<String>>,
    function: Option<&'a ValueFunction>,
}

/// A compatible starting point for enumeration.
pub struct Scored {
    pub base: BaseSystem,
    pub eta: f64,
    pub first: ValueFunction,
}

pub fn score(
    norm: &PerformanceMatrix,
    pwi: &PwiMatrix,
    prefs: &[PreferenceStatement],
    cfg: &AnalysisConfig,
    dir: &Path,
    report: &mut Report,
) -> CliResult<Option<Scored>> {
    let scales = build_scales(norm);
    let base = build_base_constraints(norm, &scales, pwi, prefs)?;
    let lp0 = solve_lp0(&base)?;
    let (status, eta, first) = match &lp0 {
        Lp0Outcome::Compatible { eta, function } => ("compatible", *eta, function.clone()),
        Lp0Outcome::Vacuous { function } => ("vacuous", f64::INFINITY, function.clone()),
        Lp0Outcome::Incompatible(r) => {
            let json = ScoreJson {
                status: "incompatible",
                eta: r.eta,
                constraints: base.counts(),
                incompatibility: Some(r),
                all_contribute: None,
                all_increasing: None,
                utilities: Vec::new(),
                ranking: None,
                groups: Vec::new(),
                function: None,
            };
            report.outputs.add(dir.join("score.json"), to_json(&json)?);
            report.summary.push(format!("incompatible: {r}"));
            report.deferred = Some(CliError::Incompatible(r.clone()));
            return Ok(None);
        }
    };
    let contr = check_all_contribute(&base, eta)?;
    let inc = check_all_increasing(&base, eta)?;
    let utilities = base.utilities(&first)?;
    let ranking = rank(&utilities, cfg.tie_tol);
    let json = ScoreJson {
        status,
        eta: eta.is_finite().then_some(eta),
        constraints: base.counts(),
        incompatibility: None,
        all_contribute: Some(&contr),
        all_increasing: Some(&inc),
        utilities: utilities
            .iter()
            .map(|(id, u)| UtilityRow { id, utility: *u })
            .collect(),
        ranking: Some(ranking.to_string()),
        groups: ranking.groups.clone(),
        function: Some(&first),
    };
    report.outputs.add(dir.join("score.json"), to_json(&json)?);
    report
        .outputs
        .add(dir.join("value_function.csv"), value_function_csv(&first, &scales));
    report.outputs.add(dir.join("utilities.csv"), utilities_csv(&utilities));
    let fmt_aux = |d: &DiagnosticResult| d.value.map_or("infeasible".to_string(), |v| format!("{v:.6}"));
    report.summary.push(if eta.is_finite() {
        format!("eta* = {eta:.6}")
    } else {
        "eta* unbounded: no statement involves eta (vacuously compatible)".to_string()
    });
    report.summary.push(format!("h* = {}, eps* = {}", fmt_aux(&contr), fmt_aux(&inc)));
    report.summary.push(format!("ranking: {ranking}"));
    Ok(Some(Scored { base, eta, first }))
}

#[derive(Serialize)]
struct DispersionJson<'a> {
    candidates: Vec<&'a str>,
    selection: Option<&'a DispersedSelection>,
}

pub fn enumerate(scored: &Scored, cfg: &AnalysisConfig, dir: &Path, report: &mut Report) -> CliResult<EnumerationState> {
    let opts = EnumerationOptions {
        delta: cfg.delta,
        big_m: cfg.big_m,
        cap: cfg.cap,
        ..EnumerationOptions::default()
    };
    let state = enumerate_compatible(&scored.base, &scored.first, scored.eta, &opts)?;
    let scales = scored.base.scales();
    for f in &state.functions {
        let label = f.label.clone().unwrap_or_default();
        report
            .outputs
            .add(dir.join("functions").join(format!("{label}.csv")), value_function_csv(f, scales));
    }

    // Selection runs over the functions found after U1.
    let candidates = &state.functions[1..];
    let n = cfg.dispersion.min(candidates.len());
    let selection = if n > 0 {
        Some(select_dispersed(candidates, n)?)
    } else {
        None
    };
    let mut plotted = vec![&state.functions[0]];
    if let Some(sel) = &selection {
        plotted.extend(sel.selected.iter().map(|&i| &candidates[i]));
    }
    for f in plotted {
        let label = f.label.clone().unwrap_or_default();
        let plots = marginal_plot_data(f, scales)?;
        let plot_dir = dir.join("plots");
        report.outputs.add(plot_dir.join(format!("{label}.csv")), plot_csv(&plots));
        report.outputs.add(
            plot_dir.join(format!("{label}.json")),
            to_json(&serde_json::json!({ "label": label, "criteria": plots }))?,
        );
    }
    report.outputs.add(
        dir.join("dispersion.json"),
        to_json(&DispersionJson {
            candidates: candidates.iter().filter_map(|f| f.label.as_deref()).collect(),
            selection: selection.as_ref(),
        })?,
    );
    report.outputs.add(dir.join("enumeration.json"), to_json(&state)?);
    report.summary.push(format!(
        "enumerated {} functions at delta = {} (stop: {})",
        state.len(),
        cfg.delta,
        stop_name(state.stop)
    ));
    if let Some(sel) = &selection {
        report.summary.push(format!("most dispersed: {}", sel.labels.join(", ")));
    }
    if state.stop == StopReason::SolverFailure {
        report.deferred = Some(CliError::Solver(
            state.failure.clone().unwrap_or_else(|| "solver failure".into()),
        ));
    }
    Ok(state)
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub delta: f64,
    pub functions: usize,
    pub stop: StopReason,
}

pub fn delta_sweep(
    scored: &Scored,
    cfg: &AnalysisConfig,
    deltas: &[f64],
    dir: &Path,
    report: &mut Report,
) -> CliResult<Vec<SweepRow>> {
    let mut rows = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let c = AnalysisConfig {
            delta,
            ..cfg.clone()
        };
        c.validate()?;
        let opts = EnumerationOptions {
            delta,
            big_m: cfg.big_m,
            cap: cfg.cap,
            ..EnumerationOptions::default()
        };
        let state = enumerate_compatible(&scored.base, &scored.first, scored.eta, &opts)?;
        report.summary.push(format!(
            "delta = {delta}: {} functions (stop: {})",
            state.len(),
            stop_name(state.stop)
        ));
        rows.push(SweepRow {
            delta,
            functions: state.len(),
            stop: state.stop,
        });
    }
    let mut csv = String::from("delta,functions,stop\n");
    for r in &rows {
        csv.push_str(&format!("{},{},{}\n", r.delta, r.functions, stop_name(r.stop)));
    }
    report.outputs.add(dir.join("sweep.csv"), csv);
    report.outputs.add(dir.join("sweep.json"), to_json(&rows)?);
    Ok(rows)
}

fn stop_name(s: StopReason) -> &'static str {
    match s {
        StopReason::Infeasible => "infeasible",
        StopReason::Cap => "cap",
        StopReason::SolverFailure => "solver-failure",
    }
}

pub fn dea(norm: &PerformanceMatrix, dir: &Path, report: &mut Report) -> CliResult<DeaResult> {
    let r = dea_efficiency(&build_scales(norm), norm)?;
    report.outputs.add(dir.join("dea.json"), to_json(&r)?);
    let eff = r.efficient_ids();
    report.summary.push(format!(
        "DEA: {} of {} efficient{}",
        eff.len(),
        r.entries.len(),
        if eff.len() < r.entries.len() {
            format!(" ({})", eff.join(", "))
        } else {
            String::new()
        }
    ));
    Ok(r)
}

/// Full run from raw evaluations. The PWI stage reads the normalized matrix
/// exactly as written to `normalized.csv`.
pub fn pipeline(
    raw: &PerformanceMatrix,
    prefs: &[PreferenceStatement],
    cfg: &AnalysisConfig,
    dir: &Path,
) -> CliResult<Report> {
    cfg.validate()?;
    let mut report = Report::new();
    report.outputs.add(dir.join("config.json"), to_json(cfg)?);
    let norm = normalize(raw, dir, &mut report)?;
    let p = pwi(&norm, cfg, dir, &mut report)?;
    dea(&norm, dir, &mut report)?;
    if let Some(scored) = score(&norm, &p, prefs, cfg, dir, &mut report)? {
        enumerate(&scored, cfg, dir, &mut report)?;
    }
    Ok(report)
}
