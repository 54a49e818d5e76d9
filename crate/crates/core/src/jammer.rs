//! Barrage, pilot-tone and intermittent jamming, composed onto the received
//! grid as `Y = H1·X + W + H2·J`.
//!
//! Frequency positions are offsets within the occupied band (the same index
//! the pilot comb uses); time positions are OFDM symbol indices counted over
//! the whole sample. With the default `freq_period = 8`, `freq_phase = 4`,
//! the intermittent attack therefore hits the pilot tones, but only on every
//! `time_period`-th symbol.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{cn01, ChannelRealization};
use crate::error::{Error, Result};
use crate::waveform::{FrameGrid, WaveformConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttackKind {
    None,
    Barrage,
    PilotTone,
    Intermittent,
}

impl AttackKind {
    pub const JAMMING: [AttackKind; 3] = [AttackKind::Barrage, AttackKind::PilotTone, AttackKind::Intermittent];

    pub fn name(self) -> &'static str {
        match self {
            AttackKind::None => "none",
            AttackKind::Barrage => "barrage",
            AttackKind::PilotTone => "pilot-tone",
            AttackKind::Intermittent => "intermittent",
        }
    }
}

impl fmt::Display for AttackKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AttackKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(AttackKind::None),
            "barrage" => Ok(AttackKind::Barrage),
            "pilot-tone" | "pilot" => Ok(AttackKind::PilotTone),
            "intermittent" => Ok(AttackKind::Intermittent),
            other => Err(Error::Domain(format!("unknown attack kind '{other}'"))),
        }
    }
}

/// Intermittent-pattern parameters shared by every scenario.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct AttackPattern {
    pub freq_period: usize,
    pub freq_phase: usize,
    pub time_period: usize,
    pub time_phase: usize,
}

impl Default for AttackPattern {
    fn default() -> Self {
        AttackPattern { freq_period: 8, freq_phase: 4, time_period: 10, time_phase: 5 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackSpec {
    pub kind: AttackKind,
    pub sjr_db: f64,
    #[serde(flatten)]
    pub pattern: AttackPattern,
}

impl AttackSpec {
    pub fn new(kind: AttackKind, sjr_db: f64) -> Self {
        AttackSpec { kind, sjr_db, pattern: AttackPattern::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.pattern;
        if p.freq_period == 0 || p.freq_phase >= p.freq_period {
            return Err(Error::Config(format!("attack freq phase {} must be below period {}", p.freq_phase, p.freq_period)));
        }
        if p.time_period == 0 || p.time_phase >= p.time_period {
            return Err(Error::Config(format!("attack time phase {} must be below period {}", p.time_phase, p.time_period)));
        }
        Ok(())
    }
}

/// Boolean attack mask over `[symbol][subcarrier bin]` for a whole sample.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JamMask {
    pub n_symbols: usize,
    pub n_subcarriers: usize,
    bits: Vec<bool>,
}

impl JamMask {
    pub fn empty(n_symbols: usize, n_subcarriers: usize) -> Self {
        JamMask { n_symbols, n_subcarriers, bits: vec![false; n_symbols * n_subcarriers] }
    }

    pub fn get(&self, symbol: usize, bin: usize) -> bool {
        self.bits[symbol * self.n_subcarriers + bin]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.contains(&true)
    }

    /// Symbols with at least one active element.
    pub fn active_symbols(&self) -> Vec<usize> {
        (0..self.n_symbols)
            .filter(|&s| self.bits[s * self.n_subcarriers..(s + 1) * self.n_subcarriers].contains(&true))
            .collect()
    }

    /// Subcarrier bins active in symbol `s`.
    pub fn active_bins(&self, s: usize) -> Vec<usize> {
        (0..self.n_subcarriers).filter(|&k| self.get(s, k)).collect()
    }

    pub fn is_subset_of(&self, other: &JamMask) -> bool {
        self.bits.len() == other.bits.len() && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }
}

pub fn build_mask(spec: &AttackSpec, cfg: &WaveformConfig) -> Result<JamMask> {
    spec.validate()?;
    cfg.validate()?;
    let n_sym = cfg.symbols_per_sample();
    let n = cfg.n_subcarriers;
    let bins = cfg.occupied_bins();
    let p = &spec.pattern;
    let mut mask = JamMask::empty(n_sym, n);
    let freq_hit = |offset: usize| -> bool {
        match spec.kind {
            AttackKind::None => false,
            AttackKind::Barrage => true,
            AttackKind::PilotTone => offset % cfg.pilot_interval == cfg.pilot_phase,
            AttackKind::Intermittent => offset % p.freq_period == p.freq_phase,
        }
    };
    let time_hit = |s: usize| spec.kind != AttackKind::Intermittent || s % p.time_period == p.time_phase;
    for s in (0..n_sym).filter(|&s| time_hit(s)) {
        for (offset, bin) in bins.clone().enumerate() {
            if freq_hit(offset) {
                mask.bits[s * n + bin] = true;
            }
        }
    }
    Ok(mask)
}

/// Jamming variance per active element: `σ² = P_s / 10^(SJR/10)`.
pub fn calibrate_power(mask: &JamMask, grid_power: f64, sjr_db: f64) -> Result<f64> {
    if mask.is_empty() {
        return Err(Error::Domain("cannot calibrate jamming power on an empty mask".into()));
    }
    Ok(grid_power / 10f64.powf(sjr_db / 10.0))
}

#[derive(Clone, Debug, PartialEq)]
pub struct JammingPattern {
    pub mask: JamMask,
    /// Full `[symbol][bin]` array, zero outside the mask.
    pub values: Vec<Complex64>,
    pub sigma_sq: f64,
}

impl JammingPattern {
    /// Draws `CN(0, σ²)` jamming on the attack mask, calibrated against unit
    /// occupied-RE signal power. `AttackKind::None` yields an empty pattern.
    pub fn generate(spec: &AttackSpec, cfg: &WaveformConfig, seed: u64) -> Result<Self> {
        let mask = build_mask(spec, cfg)?;
        let mut values = vec![Complex64::default(); mask.bits.len()];
        if spec.kind == AttackKind::None {
            return Ok(JammingPattern { mask, values, sigma_sq: 0.0 });
        }
        let sigma_sq = calibrate_power(&mask, 1.0, spec.sjr_db)?;
        let sigma = sigma_sq.sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (v, &on) in values.iter_mut().zip(&mask.bits) {
            if on {
                *v = cn01(&mut rng) * sigma;
            }
        }
        Ok(JammingPattern { mask, values, sigma_sq })
    }

    /// Mean `|J|²` over active elements.
    pub fn active_power(&self) -> f64 {
        let n = self.mask.count();
        if n == 0 {
            return 0.0;
        }
        self.values.iter().zip(&self.mask.bits).filter(|(_, &on)| on).map(|(v, _)| v.norm_sqr()).sum::<f64>() / n as f64
    }
}

/// Adds the jammer-channel-scaled jamming values on masked elements.
pub fn apply_attack(mut grid: FrameGrid, pattern: &JammingPattern, h2: &ChannelRealization) -> Result<FrameGrid> {
    if pattern.values.len() != grid.units().len() {
        return Err(Error::Shape(format!(
            "jamming pattern has {} elements, grid {}",
            pattern.values.len(),
            grid.units().len()
        )));
    }
    if h2.gains.len() != grid.n_frames() {
        return Err(Error::Shape(format!("{} jammer gains for {} frames", h2.gains.len(), grid.n_frames())));
    }
    let per_frame = grid.layout().symbols_per_frame * grid.layout().n_subcarriers;
    for (i, (v, (j, &on))) in grid.units_mut().iter_mut().zip(pattern.values.iter().zip(&pattern.mask.bits)).enumerate() {
        if on {
            *v += h2.gains[i / per_frame] * j;
        }
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waveform::build_grid;

    #[test]
    fn table_mask_cardinalities() {
        let cfg = WaveformConfig::default();
        let barrage = build_mask(&AttackSpec::new(AttackKind::Barrage, 0.0), &cfg).unwrap();
        assert_eq!(barrage.count(), 705 * 600);
        let pilot = build_mask(&AttackSpec::new(AttackKind::PilotTone, 0.0), &cfg).unwrap();
        assert_eq!(pilot.count(), 88 * 600);
        let inter = build_mask(&AttackSpec::new(AttackKind::Intermittent, 0.0), &cfg).unwrap();
        assert_eq!(inter.count(), 88 * 60);
        let syms = inter.active_symbols();
        assert_eq!(syms.len(), 60);
        assert_eq!(syms[0], 5);
        assert_eq!(syms[1], 15);
        assert_eq!(*syms.last().unwrap(), 595);
        assert!(inter.is_subset_of(&pilot));
        assert!(build_mask(&AttackSpec::new(AttackKind::None, 0.0), &cfg).unwrap().is_empty());
    }

    #[test]
    fn pilot_tone_mask_equals_pilot_layout() {
        let cfg = WaveformConfig { frames_per_sample: 1, ..Default::default() };
        let pilot = build_mask(&AttackSpec::new(AttackKind::PilotTone, 0.0), &cfg).unwrap();
        let want: Vec<usize> = cfg.pilot_offsets().iter().map(|o| o + cfg.left_nulls()).collect();
        for s in 0..cfg.symbols_per_sample() {
            assert_eq!(pilot.active_bins(s), want);
        }
    }

    #[test]
    fn calibration_definition() {
        let cfg = WaveformConfig { frames_per_sample: 1, ..Default::default() };
        let m = build_mask(&AttackSpec::new(AttackKind::Barrage, 0.0), &cfg).unwrap();
        assert_eq!(calibrate_power(&m, 1.0, 0.0).unwrap(), 1.0);
        assert!((calibrate_power(&m, 1.0, -20.0).unwrap() - 100.0).abs() < 1e-12);
        let empty = JamMask::empty(2, 2);
        assert!(matches!(calibrate_power(&empty, 1.0, -10.0), Err(Error::Domain(_))));
    }

    #[test]
    fn invalid_pattern_rejected() {
        let mut spec = AttackSpec::new(AttackKind::Intermittent, 0.0);
        spec.pattern.time_period = 5;
        assert!(build_mask(&spec, &WaveformConfig::default()).is_err());
        assert!("jammer".parse::<AttackKind>().is_err());
        assert_eq!("pilot-tone".parse::<AttackKind>().unwrap(), AttackKind::PilotTone);
    }

    #[test]
    fn identity_cases() {
        let cfg = WaveformConfig { frames_per_sample: 1, ..Default::default() };
        let grid = build_grid(&cfg, 3).unwrap();
        let none = JammingPattern::generate(&AttackSpec::new(AttackKind::None, 0.0), &cfg, 1).unwrap();
        let h2 = ChannelRealization::constant(Complex64::new(1.0, 0.0), 1);
        assert_eq!(apply_attack(grid.clone(), &none, &h2).unwrap(), grid);
        let barrage = JammingPattern::generate(&AttackSpec::new(AttackKind::Barrage, -10.0), &cfg, 1).unwrap();
        let zero = ChannelRealization::constant(Complex64::default(), 1);
        assert_eq!(apply_attack(grid.clone(), &barrage, &zero).unwrap(), grid);
    }

    #[test]
    fn barrage_doubles_power_at_zero_sjr() {
        let cfg = WaveformConfig::default();
        let grid = build_grid(&cfg, 4).unwrap();
        let jam = JammingPattern::generate(&AttackSpec::new(AttackKind::Barrage, 0.0), &cfg, 5).unwrap();
        let h2 = ChannelRealization::constant(Complex64::new(1.0, 0.0), cfg.frames_per_sample);
        let out = apply_attack(grid.clone(), &jam, &h2).unwrap();
        let ratio = out.occupied_power() / grid.occupied_power();
        assert!((ratio - 2.0).abs() < 0.06, "ratio {ratio}");
        // untouched outside the mask
        let bins = cfg.occupied_bins();
        assert!(out.symbol(0)[..bins.start].iter().all(|v| v.norm() == 0.0));
    }
}
