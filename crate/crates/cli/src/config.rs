use std::path::PathBuf;

use serde::Serialize;
use treediff::{Error as CoreError, ParamEnv, Space, TreeShape, Weight};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Tsv,
    Human,
}

pub const DEFAULT_SHAPE: &str = "homogeneous:2";
pub const DEFAULT_DEPTH: usize = 6;

/// Validated global options shared by every subcommand.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub shape: TreeShape,
    /// False when the shape is the default rather than chosen on the command line.
    pub shape_explicit: bool,
    pub depth: usize,
    pub space_text: String,
    pub weight_text: Option<String>,
    pub params: ParamEnv,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub seed: u64,
    pub timing: bool,
}

pub struct RawConfig {
    pub shape: Option<String>,
    pub depth: usize,
    pub space: String,
    pub weight: Option<String>,
    pub params: Vec<String>,
    pub output: Option<String>,
    pub format: Format,
    pub seed: u64,
    pub timing: bool,
}

impl RunConfig {
    pub fn from_raw(raw: RawConfig) -> Result<Self, CliError> {
        let shape_explicit = raw.shape.is_some();
        let shape: TreeShape = raw
            .shape
            .as_deref()
            .unwrap_or(DEFAULT_SHAPE)
            .parse()
            .map_err(CliError::usage)?;
        if raw.depth == 0 {
            return Err(CliError::Usage("--depth must be at least 1".into()));
        }
        if let Err(CoreError::LevelOverflow { max_safe_depth, .. }) = shape.level_size(raw.depth) {
            return Err(CliError::Usage(format!(
                "--depth {} is beyond the largest safe depth {max_safe_depth} for {shape}",
                raw.depth
            )));
        }
        let mut params = ParamEnv::new();
        for item in &raw.params {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("--param expects K=V, got `{item}`")))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("--param {key}: `{value}` is not a number")))?;
            params.insert(key.trim(), value);
        }
        let output = match raw.output.as_deref() {
            None | Some("-") => None,
            Some(path) => Some(PathBuf::from(path)),
        };
        Ok(RunConfig {
            shape,
            shape_explicit,
            depth: raw.depth,
            space_text: raw.space,
            weight_text: raw.weight,
            params,
            output,
            format: raw.format,
            seed: raw.seed,
            timing: raw.timing,
        })
    }

    pub fn weight(&self) -> Result<Option<Weight>, CliError> {
        self.weight_text
            .as_deref()
            .map(|w| Weight::parse(w, &self.params).map_err(CliError::from))
            .transpose()
    }

    /// `--space weighted` takes its weight from `--weight`.
    pub fn space(&self) -> Result<Space, CliError> {
        let space = if self.space_text.trim() == "weighted" {
            let weight = self
                .weight()?
                .ok_or_else(|| CliError::Usage("--space weighted needs --weight".into()))?;
            Space::Weighted(weight)
        } else {
            Space::parse(&self.space_text, &self.params)?
        };
        space.check_shape(&self.shape).map_err(CliError::usage)?;
        Ok(space)
    }

    pub fn echo(&self) -> serde_json::Value {
        let params: serde_json::Map<String, serde_json::Value> = self
            .params
            .iter()
            .map(|(k, v)| (k.to_string(), serde_json::json!(v)))
            .collect();
        serde_json::json!({
            "shape": self.shape.to_string(),
            "depth": self.depth,
            "space": self.space_text,
            "weight": self.weight_text,
            "params": params,
            "format": self.format,
            "seed": self.seed,
        })
    }
}
