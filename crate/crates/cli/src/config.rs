//! Run configuration: JSON on disk, validated on load.

use std::fmt;
use std::path::{Path, PathBuf};

use cauchy_core::gfunction::{GSpec, Raster};
use cauchy_core::quadrature::QuadConfig;
use cauchy_core::ComplexValue;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    #[default]
    Planar,
    Cylinder,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pair {
    #[serde(with = "cauchy_core::complex_serde")]
    pub z: ComplexValue,
    #[serde(with = "cauchy_core::complex_serde")]
    pub w: ComplexValue,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
}

fn default_gspec() -> GSpec {
    GSpec::Zero
}

fn default_pairs() -> Vec<Pair> {
    vec![Pair {
        z: ComplexValue::new(1.0, 0.0),
        w: ComplexValue::new(-1.0, 0.0),
    }]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_gspec")]
    pub gspec: GSpec,
    #[serde(default = "default_pairs")]
    pub pairs: Vec<Pair>,
    #[serde(default)]
    pub quad: QuadConfig,
    #[serde(default)]
    pub engine: Engine,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: OutputSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            gspec: default_gspec(),
            pairs: default_pairs(),
            quad: QuadConfig::default(),
            engine: Engine::default(),
            seed: 0,
            output: OutputSpec::default(),
        }
    }
}

#[derive(Debug)]
pub struct ConfigError {
    pub path: Option<PathBuf>,
    pub field: Option<String>,
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn new(message: impl Into<String>) -> Self {
        ConfigError {
            path: None,
            field: None,
            line: None,
            message: message.into(),
        }
    }

    fn field(mut self, field: impl Into<String>) -> Self {
        self.field = Some(field.into());
        self
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(p) = &self.path {
            write!(f, "{}", p.display())?;
            if let Some(l) = self.line {
                write!(f, ":{l}")?;
            }
            write!(f, ": ")?;
        }
        if let Some(field) = &self.field {
            write!(f, "field `{field}`: ")?;
        }
        write!(f, "{}", self.message)
    }
}

impl std::error::Error for ConfigError {}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new(format!("cannot read config: {e}")))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base).map_err(|mut e| {
            e.path = Some(path.to_path_buf());
            e
        })
    }

    /// Parses a config; relative raster CSV paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, ConfigError> {
        let mut value: Value = serde_json::from_str(text).map_err(|e| ConfigError {
            line: Some(e.line()),
            ..ConfigError::new(e.to_string())
        })?;
        let cfg: RunConfig = if contains_raster_csv(&value) {
            if let Some(g) = value.get_mut("gspec") {
                resolve_raster_csv(g, base, "gspec")?;
            }
            serde_path_to_error::deserialize(value).map_err(|e| {
                let field = e.path().to_string();
                ConfigError::new(e.into_inner().to_string()).field(field)
            })?
        } else {
            let mut de = serde_json::Deserializer::from_str(text);
            serde_path_to_error::deserialize(&mut de).map_err(|e| {
                let field = e.path().to_string();
                let inner = e.into_inner();
                ConfigError {
                    line: Some(inner.line()),
                    ..ConfigError::new(inner.to_string()).field(field)
                }
            })?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.quad
            .validate()
            .map_err(|e| ConfigError::new(e.to_string()).field("quad"))?;
        self.gspec
            .validate()
            .map_err(|e| ConfigError::new(e.to_string()).field("gspec"))?;
        Ok(())
    }
}

fn contains_raster_csv(v: &Value) -> bool {
    match v {
        Value::Object(m) => m.get("type").and_then(Value::as_str) == Some("raster_csv") || m.values().any(contains_raster_csv),
        Value::Array(a) => a.iter().any(contains_raster_csv),
        _ => false,
    }
}

/// Replaces every `{"type": "raster_csv", "path": …}` node with the raster
/// it names.
fn resolve_raster_csv(v: &mut Value, base: &Path, at: &str) -> Result<(), ConfigError> {
    match v {
        Value::Object(m) if m.get("type").and_then(Value::as_str) == Some("raster_csv") => {
            if let Some(k) = m.keys().find(|k| *k != "type" && *k != "path") {
                return Err(ConfigError::new(format!("unknown field `{k}`, expected `path`")).field(at));
            }
            let Some(p) = m.get("path").and_then(Value::as_str) else {
                return Err(ConfigError::new("raster_csv needs a string `path`").field(at));
            };
            let raster = load_raster_csv(&base.join(p)).map_err(|e| e.field(at))?;
            let mut node = serde_json::to_value(GSpec::Raster(raster)).expect("raster serializes");
            std::mem::swap(v, &mut node);
            Ok(())
        }
        Value::Object(m) => {
            for (k, child) in m.iter_mut() {
                resolve_raster_csv(child, base, &format!("{at}.{k}"))?;
            }
            Ok(())
        }
        _ => Ok(()),
    }
}

/// Reads a raster from CSV: a header `width,height,origin_x,origin_y,cell_size`,
/// one row with those values, then `height` rows of `width` cell values,
/// bottom row first.
pub fn load_raster_csv(path: &Path) -> Result<Raster, ConfigError> {
    let err = |m: String| ConfigError::new(format!("{}: {m}", path.display()));
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| err(e.to_string()))?;
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| err(e.to_string()))?
        .iter()
        .map(str::to_owned)
        .collect();
    if header != ["width", "height", "origin_x", "origin_y", "cell_size"] {
        return Err(err(format!("header must be width,height,origin_x,origin_y,cell_size, got {}", header.join(","))));
    }
    let mut records = rdr.records();
    let meta = records
        .next()
        .ok_or_else(|| err("missing raster dimensions row".into()))?
        .map_err(|e| err(e.to_string()))?;
    if meta.len() != 5 {
        return Err(err(format!("dimensions row has {} fields, expected 5", meta.len())));
    }
    let int = |i: usize| meta[i].parse::<usize>().map_err(|e| err(format!("{}: {e}", header[i])));
    let float = |i: usize| meta[i].parse::<f64>().map_err(|e| err(format!("{}: {e}", header[i])));
    let (width, height) = (int(0)?, int(1)?);
    let origin = ComplexValue::new(float(2)?, float(3)?);
    let cell_size = float(4)?;
    let mut values = Vec::with_capacity(width * height);
    for (row, rec) in records.enumerate() {
        let rec = rec.map_err(|e| err(e.to_string()))?;
        if rec.len() != width {
            return Err(err(format!("row {row} has {} values, expected {width}", rec.len())));
        }
        for f in rec.iter() {
            values.push(f.parse::<f64>().map_err(|e| err(format!("row {row}: {e}")))?);
        }
    }
    Raster::new(origin, cell_size, width, height, values).map_err(|e| err(e.to_string()))
}
