//! Run manifests, file formats and the end-to-end commands behind the CLI.

mod io;
mod manifest;
mod run;

pub use io::{
    read_points, to_json_bytes, write_atomic, write_csv, write_json, PointsFile, ARTIFACT_VERSION,
};
pub use manifest::{Command, RunManifest};
pub use run::{
    run, run_analyze, run_density_check, run_generate, run_sweep, run_verify, AnalyzeFile,
    DensityFile, DensityRow, GenerateReport, PipelineError, RunOutcome, SweepFile, VerifyFile,
    VerifyRun, EXIT_MAX_ITERS, EXIT_OK, EXIT_USAGE, EXIT_VERDICT_FAIL,
};
