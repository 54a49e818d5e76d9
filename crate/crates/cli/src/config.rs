//! Experiment configuration files.

use std::path::{Path, PathBuf};

use satjam_core::dataset::{PipelineConfig, ScenarioSpec};
use satjam_core::detectors::{CnnArch, PcaSvmConfig, TrainConfig};
use satjam_core::features::IMAGE_SIZE;
use satjam_core::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetectorKind {
    Cnn,
    PcaSvm,
}

impl DetectorKind {
    pub fn name(self) -> &'static str {
        match self {
            DetectorKind::Cnn => "cnn",
            DetectorKind::PcaSvm => "pca-svm",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CnnSettings {
    #[serde(default = "CnnArch::reference")]
    pub arch: CnnArch,
    #[serde(default)]
    pub train: TrainConfig,
}

impl Default for CnnSettings {
    fn default() -> Self {
        CnnSettings { arch: CnnArch::reference(), train: TrainConfig::default() }
    }
}

/// Replaces sample counts and sample length under `--full-scale`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaleOverride {
    pub n_train: usize,
    pub n_test: usize,
    pub frames_per_sample: usize,
}

/// Accuracies to print next to the measured ones, as fractions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceTable {
    pub cnn: Vec<f64>,
    pub pca_svm: Vec<f64>,
}

/// SNR sweep run by `reproduce`: one dataset pair per level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub snr_levels: Vec<f64>,
    #[serde(default)]
    pub reference: Option<ReferenceTable>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub scenario: ScenarioSpec,
    #[serde(default)]
    pub pipeline: PipelineConfig,
    #[serde(default = "all_detectors")]
    pub detectors: Vec<DetectorKind>,
    #[serde(default)]
    pub cnn: CnnSettings,
    #[serde(default)]
    pub pca_svm: PcaSvmConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub full_scale: Option<ScaleOverride>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
}

fn all_detectors() -> Vec<DetectorKind> {
    vec![DetectorKind::Cnn, DetectorKind::PcaSvm]
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

/// Command-line overrides applied on top of a config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub full_scale: bool,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Applies overrides and validates the result.
    pub fn resolve(mut self, o: &Overrides) -> Result<Self> {
        if o.full_scale {
            let s = self
                .full_scale
                .ok_or_else(|| Error::Config("--full-scale given but the config has no full_scale section".into()))?;
            self.scenario.n_train = s.n_train;
            self.scenario.n_test = s.n_test;
            self.pipeline.waveform.frames_per_sample = s.frames_per_sample;
            self.full_scale = None;
        }
        if let Some(seed) = o.seed {
            self.scenario.seed = seed;
            self.cnn.train.seed = seed;
            self.pca_svm.seed = seed;
        }
        if let Some(dir) = &o.out_dir {
            self.out_dir = dir.clone();
        }
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(Error::Config("config name is empty".into()));
        }
        self.scenario.validate()?;
        self.pipeline.validate()?;
        if self.detectors.is_empty() {
            return Err(Error::Config("no detectors selected".into()));
        }
        let mut kinds = self.detectors.clone();
        kinds.sort();
        kinds.dedup();
        if kinds.len() != self.detectors.len() {
            return Err(Error::Config("detector listed twice".into()));
        }
        self.cnn.arch.validate()?;
        if self.cnn.arch.input != [1, IMAGE_SIZE, IMAGE_SIZE] {
            return Err(Error::Config(format!("cnn input must be [1, {IMAGE_SIZE}, {IMAGE_SIZE}]")));
        }
        self.cnn.train.validate()?;
        let p = &self.pca_svm;
        if p.n_components == 0 || !(p.c > 0.0) || p.epochs == 0 {
            return Err(Error::Config("pca_svm needs n_components > 0, c > 0 and epochs > 0".into()));
        }
        if self.detectors.contains(&DetectorKind::PcaSvm) && self.scenario.n_train <= p.n_components {
            return Err(Error::Config(format!(
                "pca_svm needs more than {} training samples, got {}",
                p.n_components, self.scenario.n_train
            )));
        }
        if let Some(s) = &self.full_scale {
            if s.n_train == 0 || s.n_test == 0 || s.frames_per_sample == 0 {
                return Err(Error::Config("full_scale values must be positive".into()));
            }
        }
        if let Some(sweep) = &self.sweep {
            if sweep.snr_levels.is_empty() || sweep.snr_levels.iter().any(|s| !s.is_finite()) {
                return Err(Error::Config("sweep needs finite SNR levels".into()));
            }
            if let Some(r) = &sweep.reference {
                let n = sweep.snr_levels.len();
                if r.cnn.len() != n || r.pca_svm.len() != n {
                    return Err(Error::Config(format!("reference table needs {n} entries per detector")));
                }
                if r.cnn.iter().chain(&r.pca_svm).any(|v| !(0.0..=1.0).contains(v)) {
                    return Err(Error::Config("reference accuracies are fractions in [0, 1]".into()));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "name": "t",
        "scenario": {"snr_levels": [10], "sjr_levels": [-10], "attack_kinds": ["barrage"],
                     "n_train": 60, "n_test": 20, "seed": 1}
    }"#;

    #[test]
    fn defaults_fill_in() {
        let cfg = ExperimentConfig::from_json(MINIMAL).unwrap().resolve(&Overrides::default()).unwrap();
        assert_eq!(cfg.detectors, all_detectors());
        assert_eq!(cfg.cnn.train.batch_size, 40);
        assert_eq!(cfg.pca_svm.n_components, 45);
        assert_eq!(cfg.pipeline.waveform.frames_per_sample, 10);
        let again = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn overrides_apply() {
        let o = Overrides { seed: Some(9), out_dir: Some("x".into()), full_scale: false };
        let cfg = ExperimentConfig::from_json(MINIMAL).unwrap().resolve(&o).unwrap();
        assert_eq!((cfg.scenario.seed, cfg.cnn.train.seed, cfg.pca_svm.seed), (9, 9, 9));
        assert_eq!(cfg.out_dir, PathBuf::from("x"));
        let full = Overrides { full_scale: true, ..Overrides::default() };
        assert!(matches!(ExperimentConfig::from_json(MINIMAL).unwrap().resolve(&full), Err(Error::Config(_))));
    }

    #[test]
    fn rejects_bad_values() {
        assert!(ExperimentConfig::from_json(&MINIMAL.replace("\"n_train\": 60", "\"n_train\": 0"))
            .unwrap()
            .resolve(&Overrides::default())
            .is_err());
        assert!(ExperimentConfig::from_json(&MINIMAL.replace("\"name\"", "\"nmae\"")).is_err());
        let small_pca = MINIMAL.replace("\"n_train\": 60", "\"n_train\": 40");
        assert!(ExperimentConfig::from_json(&small_pca).unwrap().resolve(&Overrides::default()).is_err());
    }
}
