//! Experiment manifests and the on-disk result schema. A manifest fully
//! determines a run; re-running one reproduces its outputs byte for byte.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::GenSpec;
use crate::opt_oracle::OracleLimits;

pub const SCHEMA_VERSION: u32 = 1;

pub const CSV_HEADER: &str =
    "experiment,scheduler,m,n,seed,mode,rom_mean,rom_stderr,opt,opt_kind,ratio_lo,ratio_hi,tail_prob";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputSpec {
    Gen(GenSpec),
    File { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunModeSpec {
    Exact,
    Mc { trials: u64 },
}

impl RunModeSpec {
    pub fn label(&self) -> &'static str {
        match self {
            RunModeSpec::Exact => "exact",
            RunModeSpec::Mc { .. } => "mc",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
    #[default]
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct OutputSpec {
    /// Output directory; falls back to $ROMSCHED_OUT_DIR, then ".".
    #[serde(default)]
    pub dir: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
    /// Also write the identity-order run as JSON-lines step traces.
    #[serde(default)]
    pub emit_traces: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilitySpec {
    pub epsilon: f64,
    pub trials: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentManifest {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    /// Label for output rows and file names; defaults to the family name.
    #[serde(default)]
    pub experiment: Option<String>,
    pub schedulers: Vec<String>,
    pub input: InputSpec,
    pub mode: RunModeSpec,
    pub seed: u64,
    #[serde(default)]
    pub oracle: OracleLimits,
    #[serde(default)]
    pub tail_threshold: Option<f64>,
    /// Explicit reluctance parameter for the three-candidate scheduler;
    /// the cube-root rule applies when absent.
    #[serde(default)]
    pub h: Option<usize>,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub output: OutputSpec,
}

fn default_schema_version() -> u32 {
    SCHEMA_VERSION
}

impl ExperimentManifest {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let manifest: ExperimentManifest =
            serde_json::from_str(s).map_err(|e| Error::InvalidManifest(e.to_string()))?;
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serialization cannot fail")
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidManifest(format!(
                "unsupported schema version {}",
                self.schema_version
            )));
        }
        if self.schedulers.is_empty() {
            return Err(Error::InvalidManifest("no schedulers listed".into()));
        }
        if let RunModeSpec::Mc { trials } = self.mode {
            if trials == 0 {
                return Err(Error::InvalidManifest("mc mode needs trials >= 1".into()));
            }
        }
        if let Some(t) = self.tail_threshold {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::InvalidManifest(format!(
                    "tail threshold must be positive, got {t}"
                )));
            }
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        if let Some(name) = &self.experiment {
            return name.clone();
        }
        match &self.input {
            InputSpec::Gen(spec) => spec.label().to_string(),
            InputSpec::File { path } => path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "input".into()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{Dist, Family};

    fn sample() -> ExperimentManifest {
        ExperimentManifest {
            schema_version: SCHEMA_VERSION,
            experiment: None,
            schedulers: vec!["greedy".into(), "alg".into()],
            input: InputSpec::Gen(GenSpec {
                family: Family::RandomProper {
                    n: 200,
                    dist: Some(Dist::Uniform { lo: 1.0, hi: 2.0 }),
                },
                m: 100,
            }),
            mode: RunModeSpec::Mc { trials: 50 },
            seed: 7,
            oracle: OracleLimits::default(),
            tail_threshold: Some(1.5),
            h: None,
            threads: Some(2),
            output: OutputSpec::default(),
        }
    }

    #[test]
    fn round_trip() {
        let manifest = sample();
        let json = manifest.to_json();
        let back = ExperimentManifest::from_json_str(&json).unwrap();
        assert_eq!(back, manifest);
    }

    #[test]
    fn validation_catches_bad_manifests() {
        let mut m = sample();
        m.schedulers.clear();
        assert!(m.validate().is_err());

        let mut m = sample();
        m.mode = RunModeSpec::Mc { trials: 0 };
        assert!(m.validate().is_err());

        let mut m = sample();
        m.tail_threshold = Some(-1.0);
        assert!(m.validate().is_err());

        let mut m = sample();
        m.schema_version = 99;
        assert!(m.validate().is_err());
    }

    #[test]
    fn label_falls_back_to_family() {
        let m = sample();
        assert_eq!(m.label(), "random_proper");
        let mut named = sample();
        named.experiment = Some("exp1".into());
        assert_eq!(named.label(), "exp1");
    }
}
