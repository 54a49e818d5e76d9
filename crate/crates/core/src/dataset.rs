//! Labeled spectrogram datasets: scenario-driven generation and the `SJD1`
//! file format.
//!
//! ```text
//! "SJD1" | version u8 | count u32 | height u32 | width u32
//!        | f32 pixels (count·height·width) | u8 labels (count)
//!        | manifest_len u32 | manifest JSON | CRC-32 u32
//! ```
//! Little-endian throughout; the CRC covers every preceding byte.

use std::path::Path;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use satjam_ml::Exec;
use serde::{Deserialize, Serialize};

use crate::channel::{add_awgn, apply_channel, draw_rician};
use crate::error::{Error, Result};
use crate::features::{spectrogram, ScenarioTag, Spectrogram, StftPlan, IMAGE_SIZE};
use crate::jammer::{apply_attack, AttackKind, AttackPattern, AttackSpec, JammingPattern};
use crate::seed;
use crate::waveform::{build_grid, ofdm_modulate, FrameGrid, TimeSignal, WaveformConfig};

pub const MAGIC: &[u8; 4] = b"SJD1";
pub const VERSION: u8 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub snr_levels: Vec<f64>,
    pub sjr_levels: Vec<f64>,
    pub attack_kinds: Vec<AttackKind>,
    pub n_train: usize,
    pub n_test: usize,
    pub seed: u64,
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_train == 0 || self.n_test == 0 {
            return Err(Error::Config("sample counts must be positive".into()));
        }
        if self.snr_levels.is_empty() || self.snr_levels.iter().any(|s| !s.is_finite()) {
            return Err(Error::Config("need at least one finite SNR level".into()));
        }
        if self.attack_kinds.contains(&AttackKind::None) {
            return Err(Error::Config("attack kinds list the jamming attacks only".into()));
        }
        let jammed = self.n_train.max(self.n_test) / 2;
        if jammed > 0 && (self.attack_kinds.is_empty() || self.sjr_levels.is_empty()) {
            return Err(Error::Config("jammed samples requested but no attack kinds or SJR levels given".into()));
        }
        if self.sjr_levels.iter().any(|s| !s.is_finite()) {
            return Err(Error::Config("SJR levels must be finite".into()));
        }
        Ok(())
    }

    pub fn count(&self, split: Split) -> usize {
        match split {
            Split::Train => self.n_train,
            Split::Test => self.n_test,
        }
    }

    /// Scenario of sample `index`: even indices are clean, odd are jammed;
    /// jammed samples cycle attack kind fastest, then SJR, then SNR.
    pub fn tag(&self, index: usize) -> ScenarioTag {
        let j = index / 2;
        let n_snr = self.snr_levels.len();
        if index % 2 == 0 {
            return ScenarioTag { snr_db: self.snr_levels[j % n_snr], sjr_db: None, attack: AttackKind::None };
        }
        let (k, s) = (self.attack_kinds.len(), self.sjr_levels.len());
        let cell = j % (k * s * n_snr);
        ScenarioTag {
            attack: self.attack_kinds[cell % k],
            sjr_db: Some(self.sjr_levels[(cell / k) % s]),
            snr_db: self.snr_levels[(cell / (k * s)) % n_snr],
        }
    }
}

/// Everything about sample synthesis that is not scenario-specific.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub waveform: WaveformConfig,
    pub k_factor: f64,
    pub pattern: AttackPattern,
    pub stft: StftPlan,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            waveform: WaveformConfig::default(),
            k_factor: 5.0,
            pattern: AttackPattern::default(),
            stft: StftPlan::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.waveform.validate()?;
        self.stft.validate()?;
        AttackSpec { kind: AttackKind::Intermittent, sjr_db: 0.0, pattern: self.pattern }.validate()?;
        if !(self.k_factor >= 0.0) {
            return Err(Error::Config(format!("Rician K must be non-negative, got {}", self.k_factor)));
        }
        if self.waveform.sample_len() < self.stft.window_len {
            return Err(Error::Config("a sample is shorter than one STFT window".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl Split {
    /// Seed namespace; distinct per split so partitions never share realizations.
    fn namespace(self) -> u64 {
        match self {
            Split::Train => 0x7472_6169_6e00_0001,
            Split::Test => 0x7465_7374_0000_0002,
        }
    }
}

/// Seed of sample `index` in `split`.
pub fn sample_seed(root: u64, split: Split, index: usize) -> u64 {
    seed::derive(root, split.namespace(), index as u64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    #[serde(flatten)]
    pub tag: ScenarioTag,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub scenario: ScenarioSpec,
    pub pipeline: PipelineConfig,
    pub split: Split,
    pub records: Vec<SampleRecord>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub images: Vec<Spectrogram>,
    /// 0 clean, 1 jammed.
    pub labels: Vec<u8>,
    pub manifest: Manifest,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    /// Row-major `len x IMAGE_SIZE²` pixel matrix.
    pub fn pixel_matrix(&self) -> Vec<f32> {
        self.images.iter().flat_map(|s| s.pixels.iter().copied()).collect()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(32 + self.len() * (IMAGE_SIZE * IMAGE_SIZE * 4 + 1));
        out.extend_from_slice(MAGIC);
        out.push(VERSION);
        put_u32(&mut out, self.len());
        put_u32(&mut out, IMAGE_SIZE);
        put_u32(&mut out, IMAGE_SIZE);
        for img in &self.images {
            for p in &img.pixels {
                out.extend_from_slice(&p.to_le_bytes());
            }
        }
        out.extend_from_slice(&self.labels);
        let manifest = serde_json::to_vec(&self.manifest).expect("manifest serializes");
        put_u32(&mut out, manifest.len());
        out.extend_from_slice(&manifest);
        let crc = crc32fast::hash(&out);
        out.extend_from_slice(&crc.to_le_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let fmt = |offset: usize, reason: String| Error::Format { offset, reason };
        if bytes.len() < 4 + 1 + 12 + 4 + 4 {
            return Err(fmt(bytes.len(), "file too short for an SJD1 header".into()));
        }
        if &bytes[..4] != MAGIC {
            return Err(fmt(0, "bad magic".into()));
        }
        if bytes[4] != VERSION {
            return Err(fmt(4, format!("unsupported version {}", bytes[4])));
        }
        let body = bytes.len() - 4;
        let stored = u32::from_le_bytes(bytes[body..].try_into().unwrap());
        let computed = crc32fast::hash(&bytes[..body]);
        if stored != computed {
            return Err(fmt(body, format!("checksum mismatch (stored {stored:08x}, computed {computed:08x})")));
        }
        let mut pos = 5;
        let u32_at = |pos: &mut usize| -> Result<usize> {
            if *pos + 4 > body {
                return Err(fmt(*pos, "truncated header".into()));
            }
            let v = u32::from_le_bytes(bytes[*pos..*pos + 4].try_into().unwrap()) as usize;
            *pos += 4;
            Ok(v)
        };
        let count = u32_at(&mut pos)?;
        let height = u32_at(&mut pos)?;
        let width = u32_at(&mut pos)?;
        if height != IMAGE_SIZE || width != IMAGE_SIZE {
            return Err(fmt(9, format!("image size {height}x{width}, expected {IMAGE_SIZE}x{IMAGE_SIZE}")));
        }
        let px = height * width;
        let pix_bytes = count
            .checked_mul(px * 4)
            .filter(|&n| pos + n + count <= body)
            .ok_or_else(|| fmt(pos, format!("truncated payload for {count} images")))?;
        let pixels = &bytes[pos..pos + pix_bytes];
        pos += pix_bytes;
        let labels = bytes[pos..pos + count].to_vec();
        if let Some(i) = labels.iter().position(|&l| l > 1) {
            return Err(fmt(pos + i, format!("label {} is not 0 or 1", labels[i])));
        }
        pos += count;
        let mlen = u32_at(&mut pos)?;
        if pos + mlen != body {
            return Err(fmt(pos, format!("manifest length {mlen} does not reach the trailer")));
        }
        let manifest: Manifest =
            serde_json::from_slice(&bytes[pos..pos + mlen]).map_err(|e| fmt(pos, format!("bad manifest: {e}")))?;
        if manifest.records.len() != count {
            return Err(fmt(pos, format!("manifest lists {} records for {count} images", manifest.records.len())));
        }
        let images = pixels
            .chunks_exact(px * 4)
            .zip(&manifest.records)
            .map(|(chunk, rec)| Spectrogram {
                pixels: chunk.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect(),
                meta: rec.tag,
            })
            .collect();
        Ok(Dataset { images, labels, manifest })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

fn put_u32(out: &mut Vec<u8>, v: usize) {
    out.extend_from_slice(&u32::try_from(v).expect("count fits in u32").to_le_bytes());
}

/// Per-stage seeds drawn from one sample seed.
struct StageSeeds {
    bits: u64,
    h1: u64,
    noise: u64,
    jam: u64,
    h2: u64,
}

impl StageSeeds {
    fn new(sample_seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(sample_seed);
        StageSeeds { bits: rng.next_u64(), h1: rng.next_u64(), noise: rng.next_u64(), jam: rng.next_u64(), h2: rng.next_u64() }
    }
}

/// Received frequency-domain grid `H1·X + W + H2·J` for one scenario.
pub fn received_grid(pipeline: &PipelineConfig, tag: &ScenarioTag, sample_seed: u64) -> Result<FrameGrid> {
    let seeds = StageSeeds::new(sample_seed);
    let wf = &pipeline.waveform;
    let grid = build_grid(wf, seeds.bits)?;
    let h1 = draw_rician(pipeline.k_factor, wf.frames_per_sample, seeds.h1)?;
    let grid = add_awgn(apply_channel(grid, &h1)?, tag.snr_db, seeds.noise);
    if tag.attack == AttackKind::None {
        return Ok(grid);
    }
    let spec = AttackSpec { kind: tag.attack, sjr_db: tag.sjr_db.unwrap_or(0.0), pattern: pipeline.pattern };
    let jam = JammingPattern::generate(&spec, wf, seeds.jam)?;
    let h2 = draw_rician(pipeline.k_factor, wf.frames_per_sample, seeds.h2)?;
    apply_attack(grid, &jam, &h2)
}

pub fn received_signal(pipeline: &PipelineConfig, tag: &ScenarioTag, sample_seed: u64) -> Result<TimeSignal> {
    Ok(ofdm_modulate(&received_grid(pipeline, tag, sample_seed)?))
}

/// Full pipeline for one sample: waveform, channel, noise, jammer, spectrogram.
pub fn synthesize(pipeline: &PipelineConfig, tag: &ScenarioTag, sample_seed: u64) -> Result<Spectrogram> {
    spectrogram(&received_signal(pipeline, tag, sample_seed)?, &pipeline.stft, *tag)
}

/// Generates one partition. Samples are synthesized independently and
/// assembled in index order, so the result does not depend on `exec`.
pub fn generate_split(spec: &ScenarioSpec, pipeline: &PipelineConfig, split: Split, exec: Exec) -> Result<Dataset> {
    spec.validate()?;
    pipeline.validate()?;
    let n = spec.count(split);
    let records: Vec<SampleRecord> =
        (0..n).map(|i| SampleRecord { tag: spec.tag(i), seed: sample_seed(spec.seed, split, i) }).collect();
    let images = exec
        .map_slice(&records, |r| synthesize(pipeline, &r.tag, r.seed))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let labels = records.iter().map(|r| u8::from(r.tag.attack != AttackKind::None)).collect();
    Ok(Dataset {
        images,
        labels,
        manifest: Manifest { scenario: spec.clone(), pipeline: pipeline.clone(), split, records },
    })
}

/// Train and test partitions of a scenario.
pub fn generate(spec: &ScenarioSpec, pipeline: &PipelineConfig, exec: Exec) -> Result<(Dataset, Dataset)> {
    Ok((
        generate_split(spec, pipeline, Split::Train, exec)?,
        generate_split(spec, pipeline, Split::Test, exec)?,
    ))
}
