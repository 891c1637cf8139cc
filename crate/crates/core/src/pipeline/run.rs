//! The commands. Each takes a complete manifest, writes its artifacts and
//! returns an exit code with a human-readable summary.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::io::{read_points, write_csv, write_json, PointsFile, ARTIFACT_VERSION};
use super::manifest::{Command, RunManifest};
use crate::bounds::{
    verify_inequalities, BoundError, BoundInputs, BoundReport, Measurement, Verdict,
};
use crate::energy::{total_energy, EnergyError, EnergyMode, EnergyReport};
use crate::optimize::{
    default_schedule, minimize_energy, s_sweep_best_packing, OptimConfig, OptimError, OptimResult,
    StopReason, SweepStep,
};
use crate::quality::{
    default_probe_count, default_regions, density_check, mesh_norm, quality_report, separation,
    QualityError, QualityReport, RegionCheck, SeparationMethod, QUALITY_CSV_HEADER,
};
use crate::spaces::{SpaceDescriptor, SpaceError};
use crate::weights::{DensityField, WeightError, WeightRecord, WeightSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_MAX_ITERS: i32 = 2;
pub const EXIT_VERDICT_FAIL: i32 = 3;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error(transparent)]
    Energy(#[from] EnergyError),
    #[error(transparent)]
    Optim(#[from] OptimError),
    #[error(transparent)]
    Quality(#[from] QualityError),
    #[error(transparent)]
    Bound(#[from] BoundError),
}

impl PipelineError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        PipelineError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Every error is a usage, parse or input problem.
    pub fn exit_code(&self) -> i32 {
        EXIT_USAGE
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub summary: String,
}

/// Dispatches on `manifest.command`.
pub fn run(manifest: &RunManifest) -> Result<RunOutcome, PipelineError> {
    match manifest.command {
        Command::Generate => run_generate(manifest),
        Command::Analyze => run_analyze(manifest),
        Command::Verify => run_verify(manifest),
        Command::Sweep => run_sweep(manifest),
        Command::DensityCheck => run_density_check(manifest),
    }
}

fn weight_of(manifest: &RunManifest, space: &SpaceDescriptor) -> Result<WeightSpec, PipelineError> {
    let record = manifest
        .weight
        .clone()
        .unwrap_or(WeightRecord::Constant { c: 1.0 });
    Ok(record.build(space)?)
}

fn optim_of(manifest: &RunManifest) -> OptimConfig {
    let mut cfg = manifest.optim.clone();
    cfg.seed = manifest.seed;
    cfg.record_trace |= manifest.plot_data;
    cfg
}

fn single_size(manifest: &RunManifest) -> Result<usize, PipelineError> {
    match manifest.require_sizes()?.as_slice() {
        [n] => Ok(*n),
        _ => Err(PipelineError::Usage(format!(
            "{} takes a single --n",
            manifest.command
        ))),
    }
}

/// `dir/stem.json` -> `dir/stem.<suffix>`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerateReport {
    pub version: String,
    pub manifest: RunManifest,
    pub energy: EnergyReport,
    pub optim: OptimResult,
}

/// Minimizes the energy and writes the points file, `<stem>.report.json` and,
/// with `plot_data`, `<stem>.trace.csv`. Exit code 2 when the optimizer ran
/// out of iterations.
pub fn run_generate(manifest: &RunManifest) -> Result<RunOutcome, PipelineError> {
    let space = manifest.require_space()?;
    let n = single_size(manifest)?;
    let s = manifest.require_s()?;
    let out = manifest.require_out()?;
    let w = weight_of(manifest, &space)?;
    let cfg = optim_of(manifest);
    let (config, res) = minimize_energy(&space, n, s, &w, &cfg)?;
    let energy = total_energy(&config, s, &w, EnergyMode::Auto)?;

    write_json(out, &PointsFile::new(&config, Some(manifest)))?;
    let report_path = sibling(out, "report.json");
    let mut optim = res.clone();
    if manifest.plot_data {
        let trace_path = sibling(out, "trace.csv");
        let rows: Vec<Vec<String>> = res
            .trace
            .iter()
            .flatten()
            .enumerate()
            .map(|(k, v)| vec![k.to_string(), num(*v)])
            .collect();
        write_csv(&trace_path, manifest, &["iteration", "log_energy"], &rows)?;
    } else {
        optim.trace = None;
    }
    write_json(
        &report_path,
        &GenerateReport {
            version: ARTIFACT_VERSION.to_string(),
            manifest: manifest.clone(),
            energy: energy.clone(),
            optim,
        },
    )?;

    let mut summary = format!(
        "{n} points on {space}, s = {s}: ln E = {:.10}, {} iterations ({:?}), wrote {}",
        energy.log_energy(),
        res.iterations,
        res.stop_reason,
        out.display()
    );
    if let Some((lo, hi)) = config.meta.sigma_bounds {
        let _ = write!(summary, "; density bounds [{lo:.6}, {hi:.6}]");
    }
    Ok(RunOutcome {
        exit_code: if res.converged() {
            EXIT_OK
        } else {
            EXIT_MAX_ITERS
        },
        summary,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeFile {
    pub version: String,
    pub manifest: RunManifest,
    pub space: SpaceDescriptor,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    pub report: QualityReport,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Measures the configuration in `manifest.input`. Writes the report to
/// `out` (default `<input stem>.quality.json`) and one CSV row next to it.
pub fn run_analyze(manifest: &RunManifest) -> Result<RunOutcome, PipelineError> {
    let input = manifest
        .input
        .as_deref()
        .ok_or_else(|| PipelineError::Usage("analyze needs --input".into()))?;
    let (config, warnings) = read_points(input, manifest.space)?;
    for w in &warnings {
        log::warn!("{w}");
    }
    let probes = manifest
        .probes
        .unwrap_or_else(|| default_probe_count(config.len()));
    let report = quality_report(&config, probes)?;
    let s = config.meta.s.or(manifest.s);
    let out = manifest
        .out
        .clone()
        .unwrap_or_else(|| sibling(input, "quality.json"));
    write_json(
        &out,
        &AnalyzeFile {
            version: ARTIFACT_VERSION.to_string(),
            manifest: manifest.clone(),
            space: *config.space(),
            s,
            report: report.clone(),
            warnings: warnings.clone(),
        },
    )?;
    let csv_path = sibling(&out, "csv");
    write_csv(
        &csv_path,
        manifest,
        &QUALITY_CSV_HEADER,
        &[report.csv_row(s).to_vec()],
    )?;
    let summary = format!(
        "N = {}: delta = {:.10}, rho_hat = {:.10}, h = {:.3e}, gamma in [{:.6}, {:.6}]{}",
        report.n,
        report.separation,
        report.mesh_norm_lower,
        report.probe_resolution,
        report.mesh_ratio.lo,
        report.mesh_ratio.hi,
        if warnings.is_empty() {
            String::new()
        } else {
            format!(" ({} points retracted)", warnings.len())
        }
    );
    Ok(RunOutcome {
        exit_code: EXIT_OK,
        summary,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyRun {
    pub n: usize,
    pub delta: f64,
    pub rho_hat: f64,
    pub h: f64,
    pub log_energy: f64,
    pub iterations: usize,
    pub stop_reason: StopReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyFile {
    pub version: String,
    pub manifest: RunManifest,
    pub report: BoundReport,
    pub runs: Vec<VerifyRun>,
}

/// Minimizes at every N, measures, and checks the inequalities. Exit code 3
/// iff some verdict fails. The bound report goes to `out` when given.
pub fn run_verify(manifest: &RunManifest) -> Result<RunOutcome, PipelineError> {
    let space = manifest.require_space()?;
    let s = manifest.require_s()?;
    let w = weight_of(manifest, &space)?;
    // constants first, so that out-of-hypothesis input fails before any work
    let inputs = BoundInputs::for_space(&space, s, &w)?;
    let constants = inputs.constants()?;
    let sizes = manifest.require_sizes()?;
    let cfg = optim_of(manifest);

    let mut measurements = Vec::with_capacity(sizes.len());
    let mut runs = Vec::with_capacity(sizes.len());
    for &n in &sizes {
        let (config, res) = minimize_energy(&space, n, s, &w, &cfg)?;
        if !res.converged() {
            log::warn!("N = {n}: optimizer did not converge; verdicts use the last iterate");
        }
        let (delta, _) = separation(config.points(), SeparationMethod::Grid)?;
        let probes = manifest.probes.unwrap_or_else(|| default_probe_count(n));
        let mn = mesh_norm(config.points(), &space, probes)?;
        measurements.push(Measurement {
            n,
            delta,
            rho_hat: mn.rho_hat,
            h: mn.h,
            log_energy: Some(res.final_log_energy),
        });
        runs.push(VerifyRun {
            n,
            delta,
            rho_hat: mn.rho_hat,
            h: mn.h,
            log_energy: res.final_log_energy,
            iterations: res.iterations,
            stop_reason: res.stop_reason,
        });
    }
    let report = verify_inequalities(&measurements, &inputs)?;

    let mut summary = String::new();
    let _ = writeln!(summary, "{:<14} {:>16}  formula", "constant", "value");
    for (name, value, formula) in constants.table() {
        let _ = writeln!(summary, "{name:<14} {value:>16.8e}  {formula}");
    }
    let _ = writeln!(
        summary,
        "{:>7} {:>11} {:>11} {:>11} {:>11}",
        "N", "separation", "mesh", "energy", "mesh_ratio"
    );
    for r in &report.rows {
        let _ = writeln!(
            summary,
            "{:>7} {:>11} {:>11} {:>11} {:>11}",
            r.n,
            verdict_str(r.separation),
            verdict_str(r.mesh),
            verdict_str(r.energy),
            verdict_str(r.mesh_ratio)
        );
    }
    let verdicts: Vec<Verdict> = report
        .rows
        .iter()
        .flat_map(|r| [r.separation, r.mesh, r.energy, r.mesh_ratio])
        .collect();
    let count = |v: Verdict| verdicts.iter().filter(|&&x| x == v).count();
    let _ = write!(
        summary,
        "verdicts: {} pass, {} fail, {} skipped",
        count(Verdict::Pass),
        count(Verdict::Fail),
        count(Verdict::Skipped)
    );

    if let Some(out) = manifest.out.as_deref() {
        if manifest.plot_data {
            let mut rows = Vec::new();
            for (r, m) in report.rows.iter().zip(&measurements) {
                let n = r.n.to_string();
                let log_e = m.log_energy.unwrap_or(f64::NAN);
                let checks = [
                    ("separation", m.delta, r.separation_bound, r.separation),
                    ("mesh", m.rho_hat, r.mesh_bound, r.mesh),
                    ("energy_log", log_e, r.energy_log_bound, r.energy),
                    (
                        "mesh_ratio",
                        (m.rho_hat + m.h) / m.delta,
                        r.mesh_ratio_bound,
                        r.mesh_ratio,
                    ),
                ];
                for (name, value, bound, verdict) in checks {
                    rows.push(vec![
                        n.clone(),
                        name.into(),
                        num(value),
                        num(bound),
                        verdict_str(verdict).into(),
                    ]);
                }
            }
            write_csv(
                &sibling(out, "csv"),
                manifest,
                &["N", "check", "value", "bound", "verdict"],
                &rows,
            )?;
        }
        write_json(
            out,
            &VerifyFile {
                version: ARTIFACT_VERSION.to_string(),
                manifest: manifest.clone(),
                report: report.clone(),
                runs,
            },
        )?;
    }
    let failed = !report.failures().is_empty();
    Ok(RunOutcome {
        exit_code: if failed { EXIT_VERDICT_FAIL } else { EXIT_OK },
        summary,
    })
}

fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "pass",
        Verdict::Fail => "FAIL",
        Verdict::Skipped => "skipped",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepFile {
    pub version: String,
    pub manifest: RunManifest,
    pub steps: Vec<SweepStep>,
    /// Terminal configuration of the sweep.
    pub points: PointsFile,
}

/// Runs an increasing-`s` sweep (default `4a, 8a, ..., 128a`). Writes the
/// steps and final configuration to `out` and the `delta` vs `s` trace to
/// `<stem>.csv`. Exit code 2 when a step ran out of iterations.
pub fn run_sweep(manifest: &RunManifest) -> Result<RunOutcome, PipelineError> {
    let space = manifest.require_space()?;
    let n = single_size(manifest)?;
    let out = manifest.require_out()?;
    let schedule = manifest
        .s_schedule
        .clone()
        .or(manifest.s.map(|s| vec![s]))
        .unwrap_or_else(|| default_schedule(space.intrinsic_dim()));
    let w = weight_of(manifest, &space)?;
    let cfg = optim_of(manifest);
    let result = s_sweep_best_packing(&space, n, &schedule, &w, &cfg, None)?;

    let rows: Vec<Vec<String>> = result
        .steps
        .iter()
        .map(|st| {
            vec![
                num(st.s),
                num(st.delta),
                num(st.log_energy),
                st.log_domain.to_string(),
                stop_str(st.stop_reason).into(),
                st.bracket_ok.to_string(),
                st.drift.to_string(),
            ]
        })
        .collect();
    write_csv(
        &sibling(out, "csv"),
        manifest,
        &[
            "s",
            "delta",
            "log_energy",
            "log_domain",
            "stop_reason",
            "bracket_ok",
            "drift",
        ],
        &rows,
    )?;
    write_json(
        out,
        &SweepFile {
            version: ARTIFACT_VERSION.to_string(),
            manifest: manifest.clone(),
            steps: result.steps.clone(),
            points: PointsFile::new(result.final_config(), None),
        },
    )?;
    let last = result.steps.last().expect("non-empty schedule");
    let mut summary = String::new();
    for st in &result.steps {
        let _ = writeln!(
            summary,
            "s = {:>8}: delta = {:.10}{}{}",
            st.s,
            st.delta,
            if st.log_domain { " (log domain)" } else { "" },
            if st.drift { " DRIFT" } else { "" }
        );
    }
    let _ = write!(
        summary,
        "best-packing estimate for N = {n}: delta = {:.10}",
        last.delta
    );
    let stalled = result
        .steps
        .iter()
        .any(|st| st.stop_reason == StopReason::MaxIters);
    Ok(RunOutcome {
        exit_code: if stalled { EXIT_MAX_ITERS } else { EXIT_OK },
        summary,
    })
}

fn stop_str(r: StopReason) -> &'static str {
    match r {
        StopReason::GradTolerance => "grad_tolerance",
        StopReason::LineSearchStall => "line_search_stall",
        StopReason::MaxIters => "max_iters",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityRow {
    pub n: usize,
    pub stop_reason: StopReason,
    pub checks: Vec<RegionCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityFile {
    pub version: String,
    pub manifest: RunManifest,
    pub sigma_bounds: (f64, f64),
    pub rows: Vec<DensityRow>,
}

/// Minimizes with the weight derived from `manifest.density` at each N and
/// compares region fractions with their targets. Writes `out` and the long
/// table `<stem>.csv`.
pub fn run_density_check(manifest: &RunManifest) -> Result<RunOutcome, PipelineError> {
    let space = manifest.require_space()?;
    let s = manifest.require_s()?;
    let sizes = manifest.require_sizes()?;
    let out = manifest.require_out()?;
    let expr = match (&manifest.density, &manifest.weight) {
        (Some(e), _) => e.clone(),
        (None, Some(WeightRecord::Density { expr, .. })) => expr.clone(),
        _ => return Err(PipelineError::Usage("density-check needs --density".into())),
    };
    let field = DensityField::from_expr(&expr, &space, false)?;
    let sigma_bounds = field.bounds().ok_or(WeightError::MissingBounds)?;
    let w = WeightSpec::density(field.clone(), s, space.intrinsic_dim())?;
    let regions = manifest
        .regions
        .clone()
        .unwrap_or_else(|| default_regions(&space));
    let cfg = optim_of(manifest);

    let mut rows = Vec::with_capacity(sizes.len());
    for &n in &sizes {
        let (config, res) = minimize_energy(&space, n, s, &w, &cfg)?;
        let checks = density_check(&config, &field, &regions)?;
        rows.push(DensityRow {
            n,
            stop_reason: res.stop_reason,
            checks,
        });
    }

    let table: Vec<Vec<String>> = rows
        .iter()
        .flat_map(|r| {
            r.checks.iter().map(move |c| {
                vec![
                    r.n.to_string(),
                    c.region.to_string(),
                    num(c.observed),
                    num(c.target),
                    num(c.gap),
                ]
            })
        })
        .collect();
    write_csv(
        &sibling(out, "csv"),
        manifest,
        &["N", "region", "observed", "target", "gap"],
        &table,
    )?;
    write_json(
        out,
        &DensityFile {
            version: ARTIFACT_VERSION.to_string(),
            manifest: manifest.clone(),
            sigma_bounds,
            rows: rows.clone(),
        },
    )?;
    let mut summary = String::new();
    for r in &rows {
        for c in &r.checks {
            let _ = writeln!(
                summary,
                "N = {:>6} {:<24} observed {:.4}  target {:.4}  gap {:+.4}",
                r.n,
                c.region.to_string(),
                c.observed,
                c.target,
                c.gap
            );
        }
    }
    let stalled = rows.iter().any(|r| r.stop_reason == StopReason::MaxIters);
    Ok(RunOutcome {
        exit_code: if stalled { EXIT_MAX_ITERS } else { EXIT_OK },
        summary: summary.trim_end().to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn manifest(command: Command, dir: &Path) -> RunManifest {
        let mut m = RunManifest::new(command);
        m.space = Some(SpaceDescriptor::sphere(2));
        m.s = Some(4.0);
        m.out = Some(dir.join("out.json"));
        m
    }

    #[test]
    fn sibling_paths() {
        assert_eq!(
            sibling(Path::new("a/pts.json"), "report.json"),
            Path::new("a/pts.report.json")
        );
        assert_eq!(sibling(Path::new("pts"), "csv"), Path::new("pts.csv"));
    }

    #[test]
    fn generate_then_analyze() {
        let dir = tempfile::tempdir().unwrap();
        let mut m = manifest(Command::Generate, dir.path());
        m.n = Some(30);
        m.seed = 7;
        let outcome = run(&m).unwrap();
        assert_eq!(outcome.exit_code, EXIT_OK);
        let first = std::fs::read(dir.path().join("out.json")).unwrap();
        run(&m).unwrap();
        assert_eq!(std::fs::read(dir.path().join("out.json")).unwrap(), first);
        let report: GenerateReport =
            serde_json::from_slice(&std::fs::read(dir.path().join("out.report.json")).unwrap())
                .unwrap();
        assert_eq!(report.manifest, m);

        let mut a = RunManifest::new(Command::Analyze);
        a.input = Some(dir.path().join("out.json"));
        let outcome = run(&a).unwrap();
        assert_eq!(outcome.exit_code, EXIT_OK);
        let file: AnalyzeFile =
            serde_json::from_slice(&std::fs::read(dir.path().join("out.quality.json")).unwrap())
                .unwrap();
        assert_eq!(file.report.n, 30);
        assert!(file.report.separation > 0.0 && file.report.mesh_ratio.lo >= 0.5);
        let csv = std::fs::read_to_string(dir.path().join("out.quality.csv")).unwrap();
        assert!(csv.starts_with("# quasiuniform "));
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    fn verify_refuses_small_s() {
        let dir = tempfile::tempdir().unwrap();
        let mut m = manifest(Command::Verify, dir.path());
        m.s = Some(1.5);
        m.n_list = Some(vec![16]);
        let err = run(&m).unwrap_err();
        assert!(
            matches!(err, PipelineError::Bound(BoundError::Hypothesis(_))),
            "{err}"
        );
        assert!(err.to_string().contains("s > alpha"));
        assert_eq!(err.exit_code(), EXIT_USAGE);
    }

    #[test]
    fn usage_errors() {
        let dir = tempfile::tempdir().unwrap();
        let mut m = manifest(Command::Generate, dir.path());
        assert!(matches!(run(&m), Err(PipelineError::Usage(_))));
        m.n_list = Some(vec![10, 20]);
        assert!(matches!(run(&m), Err(PipelineError::Usage(_))));
        m.n_list = None;
        m.n = Some(10);
        m.weight = Some(WeightRecord::Density {
            expr: "x3 - 2".into(),
            s: 4.0,
            d: 2.0,
            normalized: false,
        });
        assert!(matches!(run(&m), Err(PipelineError::Weight(_))));
    }
}
