//! Point files, JSON/CSV output and atomic writes.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;
use tempfile::NamedTempFile;

use super::manifest::RunManifest;
use super::run::PipelineError;
use crate::energy::{ConfigMeta, Configuration};
use crate::spaces::SpaceDescriptor;

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Serialized configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointsFile {
    pub version: String,
    pub space: SpaceDescriptor,
    pub n: usize,
    pub points: Vec<Vec<f64>>,
    #[serde(default)]
    pub meta: ConfigMeta,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<RunManifest>,
}

impl PointsFile {
    pub fn new(config: &Configuration, manifest: Option<&RunManifest>) -> Self {
        Self {
            version: ARTIFACT_VERSION.to_string(),
            space: *config.space(),
            n: config.len(),
            points: config
                .points()
                .iter()
                .map(|p| p.coords().to_vec())
                .collect(),
            meta: config.meta.clone(),
            manifest: manifest.cloned(),
        }
    }
}

/// Writes every float with 17 significant digits, which round-trips binary64.
struct ExactFloats;

impl Formatter for ExactFloats {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

/// Compact JSON with lossless floats and a trailing newline.
pub fn to_json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>, serde_json::Error> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, ExactFloats);
    value.serialize(&mut ser)?;
    out.push(b'\n');
    Ok(out)
}

/// Writes to a temporary file next to `path`, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), PipelineError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir).map_err(|e| PipelineError::io(path, e))?;
    tmp.write_all(bytes)
        .map_err(|e| PipelineError::io(path, e))?;
    tmp.as_file()
        .sync_all()
        .map_err(|e| PipelineError::io(path, e))?;
    tmp.persist(path)
        .map_err(|e| PipelineError::io(path, e.error))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), PipelineError> {
    write_atomic(path, &to_json_bytes(value)?)
}

/// Long-format CSV, preceded by one `#` comment line holding the version and
/// the manifest as compact JSON.
pub fn write_csv(
    path: &Path,
    manifest: &RunManifest,
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<(), PipelineError> {
    let mut preamble = format!("# quasiuniform {ARTIFACT_VERSION} manifest=").into_bytes();
    preamble.extend(to_json_bytes(manifest)?);
    let mut w = csv::Writer::from_writer(preamble);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| PipelineError::Usage(e.to_string()))?;
    write_atomic(path, &bytes)
}

/// Residual up to which points are accepted silently (after projection).
const SILENT_RETRACT_TOL: f64 = 1e-9;
/// Residual below which coordinates are taken as they are.
const ON_SPACE_TOL: f64 = 1e-13;

/// Reads a configuration from a points file, a JSON array of coordinate
/// rows, or whitespace/comma separated text. `space` overrides (or supplies)
/// the space. Points off the space are retracted; a warning is returned for
/// each point that was further than `1e-9` away.
pub fn read_points(
    path: &Path,
    space: Option<SpaceDescriptor>,
) -> Result<(Configuration, Vec<String>), PipelineError> {
    let text = std::fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
    let trimmed = text.trim_start();
    let (file_space, rows, meta) = if trimmed.starts_with('{') {
        #[derive(Deserialize)]
        struct Loose {
            space: Option<SpaceDescriptor>,
            points: Vec<Vec<f64>>,
            #[serde(default)]
            meta: ConfigMeta,
        }
        let loose: Loose = serde_json::from_str(&text).map_err(|e| {
            PipelineError::Usage(format!("malformed points file {}: {e}", path.display()))
        })?;
        (loose.space, loose.points, loose.meta)
    } else if trimmed.starts_with('[') {
        let rows: Vec<Vec<f64>> = serde_json::from_str(&text).map_err(|e| {
            PipelineError::Usage(format!("malformed points file {}: {e}", path.display()))
        })?;
        (None, rows, ConfigMeta::default())
    } else {
        let mut rows = Vec::new();
        for (k, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|t| !t.is_empty())
                .map(str::parse::<f64>)
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| PipelineError::Usage(format!("{}:{}: {e}", path.display(), k + 1)))?;
            rows.push(row);
        }
        (None, rows, ConfigMeta::default())
    };
    let space = space.or(file_space).ok_or_else(|| {
        PipelineError::Usage(format!(
            "{} does not name a space; pass --space",
            path.display()
        ))
    })?;
    let dim = space.ambient_dim();
    let mut warnings = Vec::new();
    let mut points = Vec::with_capacity(rows.len());
    for (i, row) in rows.into_iter().enumerate() {
        if row.len() != dim {
            return Err(PipelineError::Usage(format!(
                "point {i} has {} coordinates, {space} needs {dim}",
                row.len()
            )));
        }
        let residual = space.surface_residual(&row)?;
        if residual > SILENT_RETRACT_TOL {
            warnings.push(format!(
                "point {i} is {residual:.3e} off {space}; retracted"
            ));
        }
        // points already on the space within rounding are kept bit for bit
        points.push(if residual <= ON_SPACE_TOL * space.diameter().max(1.0) {
            space.point(row)?
        } else {
            space.retract(&row)?
        });
    }
    let config = Configuration::new(space, points, meta)?;
    Ok((config, warnings))
}
