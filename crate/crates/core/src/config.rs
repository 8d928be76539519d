//! Run configuration shared by every subcommand.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::TileCatalog;
use crate::error::{Error, Result};
use crate::explorer::{DEFAULT_ATTEMPT_TIMEOUT_SECS, DEFAULT_BUDGET_SECS, DEFAULT_THRESHOLD};
use crate::metrics::AxesSpec;
use crate::pathfind::PhysicsSpec;
use crate::patterns::TemplateKind;

/// Every field has a default, so a config file only lists what it changes.
/// Relative paths in a config file resolve against the file's directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub levels_dir: PathBuf,
    /// Tile catalog file; the built-in Mario catalog when absent.
    pub catalog: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub window_width: usize,
    pub window_height: usize,
    pub stride: usize,
    pub axes: AxesSpec,
    pub template: TemplateKind,
    pub threshold: usize,
    pub budget_secs: f64,
    pub attempt_timeout_secs: f64,
    pub seed: u64,
    pub workers: usize,
    pub baseline_attempts: usize,
    pub physics: PhysicsSpec,
    /// Command line of a DIMACS solver; the input file path is appended.
    pub external_solver: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            levels_dir: PathBuf::from("data/levels"),
            catalog: None,
            output_dir: PathBuf::from("out"),
            window_width: 20,
            window_height: 14,
            stride: 1,
            axes: AxesSpec::default(),
            template: TemplateKind::Ring,
            threshold: DEFAULT_THRESHOLD,
            budget_secs: DEFAULT_BUDGET_SECS,
            attempt_timeout_secs: DEFAULT_ATTEMPT_TIMEOUT_SECS,
            seed: 0,
            workers: 1,
            baseline_attempts: 200,
            physics: PhysicsSpec::default(),
            external_solver: None,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        if !path.is_file() {
            return Err(Error::MissingPath(path.to_path_buf()));
        }
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = RunConfig::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        resolve(&mut cfg.levels_dir);
        resolve(&mut cfg.output_dir);
        if let Some(c) = cfg.catalog.as_mut() {
            resolve(c);
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Range checks on numeric fields; path checks are separate because not
    /// every subcommand reads every path.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.window_width == 0 || self.window_height == 0 {
            return bad("window size must be at least 1x1");
        }
        if self.stride == 0 {
            return bad("stride must be at least 1");
        }
        if self.threshold == 0 {
            return bad("threshold must be at least 1");
        }
        if !(self.budget_secs >= 0.0 && self.budget_secs.is_finite()) {
            return bad("budget_secs must be a finite non-negative number");
        }
        if !(self.attempt_timeout_secs > 0.0 && self.attempt_timeout_secs.is_finite()) {
            return bad("attempt_timeout_secs must be a finite positive number");
        }
        if self.workers == 0 {
            return bad("workers must be at least 1");
        }
        if self.baseline_attempts == 0 {
            return bad("baseline_attempts must be at least 1");
        }
        self.axes.validate()?;
        self.physics.validate().map_err(Error::Config)
    }

    pub fn require_levels(&self) -> Result<()> {
        if !self.levels_dir.is_dir() {
            return Err(Error::MissingPath(self.levels_dir.clone()));
        }
        Ok(())
    }

    pub fn load_catalog(&self) -> Result<TileCatalog> {
        match &self.catalog {
            Some(path) if !path.is_file() => Err(Error::MissingPath(path.clone())),
            Some(path) => TileCatalog::load(path),
            None => Ok(TileCatalog::smb()),
        }
    }
}
