//! OFDM telemetry/telecommand waveform: comb-pilot resource grids and their
//! cyclic-prefixed time-domain sample streams.
//!
//! Grid subcarrier index `k` is the DFT bin. The occupied band sits in the
//! middle of the `N` bins with the odd null left over on the left edge;
//! pilots are placed at occupied-band offsets `k ≡ pilot_phase (mod pilot_interval)`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Modulation {
    Bpsk,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
#[serde(deny_unknown_fields)]
pub struct WaveformConfig {
    pub n_subcarriers: usize,
    pub n_occupied: usize,
    pub pilot_interval: usize,
    pub pilot_phase: usize,
    pub n_pilots: usize,
    pub guard_len: usize,
    pub symbols_per_frame: usize,
    pub frames_per_sample: usize,
    pub modulation: Modulation,
}

impl Default for WaveformConfig {
    fn default() -> Self {
        WaveformConfig {
            n_subcarriers: 1024,
            n_occupied: 705,
            pilot_interval: 8,
            pilot_phase: 4,
            n_pilots: 88,
            guard_len: 64,
            symbols_per_frame: 60,
            frames_per_sample: 10,
            modulation: Modulation::Bpsk,
        }
    }
}

impl WaveformConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n_subcarriers == 0 || self.n_occupied == 0 || self.symbols_per_frame == 0 || self.frames_per_sample == 0 {
            return bad("waveform dimensions must be positive".into());
        }
        if self.n_occupied > self.n_subcarriers {
            return bad(format!("{} occupied subcarriers exceed N = {}", self.n_occupied, self.n_subcarriers));
        }
        if self.guard_len >= self.n_subcarriers {
            return bad(format!("guard length {} must be below N = {}", self.guard_len, self.n_subcarriers));
        }
        if self.pilot_interval == 0 || self.pilot_phase >= self.pilot_interval {
            return bad(format!("pilot phase {} must be below interval {}", self.pilot_phase, self.pilot_interval));
        }
        let count = self.pilot_offsets().len();
        if count != self.n_pilots {
            return bad(format!("pilot layout yields {count} pilots, config declares {}", self.n_pilots));
        }
        Ok(())
    }

    /// Null subcarriers below the occupied band: `ceil((N - occupied) / 2)`.
    pub fn left_nulls(&self) -> usize {
        (self.n_subcarriers - self.n_occupied).div_ceil(2)
    }

    pub fn right_nulls(&self) -> usize {
        self.n_subcarriers - self.n_occupied - self.left_nulls()
    }

    /// DFT bins of the occupied band.
    pub fn occupied_bins(&self) -> std::ops::Range<usize> {
        let lo = self.left_nulls();
        lo..lo + self.n_occupied
    }

    /// Pilot positions as offsets within the occupied band.
    pub fn pilot_offsets(&self) -> Vec<usize> {
        (0..self.n_occupied).filter(|k| k % self.pilot_interval == self.pilot_phase).collect()
    }

    /// `true` for each occupied offset carrying a pilot.
    pub fn pilot_mask(&self) -> Vec<bool> {
        (0..self.n_occupied).map(|k| k % self.pilot_interval == self.pilot_phase).collect()
    }

    pub fn symbols_per_sample(&self) -> usize {
        self.symbols_per_frame * self.frames_per_sample
    }

    pub fn symbol_len(&self) -> usize {
        self.n_subcarriers + self.guard_len
    }

    /// Time-domain samples in one full sample: `M · Q · (N + guard)`.
    pub fn sample_len(&self) -> usize {
        self.symbols_per_sample() * self.symbol_len()
    }
}

/// Frequency-domain resource grid, `[frame][symbol][subcarrier]` flattened.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameGrid {
    units: Vec<Complex64>,
    layout: WaveformConfig,
    pilot_mask: Vec<bool>,
}

impl FrameGrid {
    pub fn zeros(layout: &WaveformConfig) -> Self {
        FrameGrid {
            units: vec![Complex64::default(); layout.symbols_per_sample() * layout.n_subcarriers],
            pilot_mask: layout.pilot_mask(),
            layout: layout.clone(),
        }
    }

    pub fn layout(&self) -> &WaveformConfig {
        &self.layout
    }

    pub fn pilot_mask(&self) -> &[bool] {
        &self.pilot_mask
    }

    pub fn units(&self) -> &[Complex64] {
        &self.units
    }

    pub fn units_mut(&mut self) -> &mut [Complex64] {
        &mut self.units
    }

    /// Total OFDM symbols across all frames.
    pub fn n_symbols(&self) -> usize {
        self.layout.symbols_per_sample()
    }

    pub fn n_frames(&self) -> usize {
        self.layout.frames_per_sample
    }

    /// Symbol `s` counted across the whole sample (`s = m · Q + q`).
    pub fn symbol(&self, s: usize) -> &[Complex64] {
        let n = self.layout.n_subcarriers;
        &self.units[s * n..(s + 1) * n]
    }

    pub fn symbol_mut(&mut self, s: usize) -> &mut [Complex64] {
        let n = self.layout.n_subcarriers;
        &mut self.units[s * n..(s + 1) * n]
    }

    /// Unit `α` at subcarrier `k` of symbol `q` in frame `m`.
    pub fn unit(&self, m: usize, q: usize, k: usize) -> Complex64 {
        self.symbol(m * self.layout.symbols_per_frame + q)[k]
    }

    /// All units of frame `m`.
    pub fn frame_mut(&mut self, m: usize) -> &mut [Complex64] {
        let len = self.layout.symbols_per_frame * self.layout.n_subcarriers;
        &mut self.units[m * len..(m + 1) * len]
    }

    pub fn frame(&self, m: usize) -> &[Complex64] {
        let len = self.layout.symbols_per_frame * self.layout.n_subcarriers;
        &self.units[m * len..(m + 1) * len]
    }

    /// Mean `|α|²` over occupied resource elements.
    pub fn occupied_power(&self) -> f64 {
        let bins = self.layout.occupied_bins();
        let total: f64 = (0..self.n_symbols())
            .map(|s| self.symbol(s)[bins.clone()].iter().map(|v| v.norm_sqr()).sum::<f64>())
            .sum();
        total / (self.n_symbols() * self.layout.n_occupied) as f64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimeSignal {
    pub samples: Vec<Complex64>,
}

impl TimeSignal {
    pub fn sample_len(&self) -> usize {
        self.samples.len()
    }

    pub fn scaled(&self, alpha: f64) -> TimeSignal {
        TimeSignal { samples: self.samples.iter().map(|v| v * alpha).collect() }
    }
}

/// Fills the occupied band with all-ones pilots and seeded BPSK data.
pub fn build_grid(cfg: &WaveformConfig, seed: u64) -> Result<FrameGrid> {
    cfg.validate()?;
    let mut grid = FrameGrid::zeros(cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bins = cfg.occupied_bins();
    let mask = cfg.pilot_mask();
    for s in 0..grid.n_symbols() {
        let sym = grid.symbol_mut(s);
        for (offset, bin) in bins.clone().enumerate() {
            sym[bin] = if mask[offset] {
                Complex64::new(1.0, 0.0)
            } else if rng.random::<bool>() {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(-1.0, 0.0)
            };
        }
    }
    Ok(grid)
}

/// Unitary inverse DFT per symbol, cyclic prefix prepended, symbols
/// concatenated in `(frame, symbol)` order.
pub fn ofdm_modulate(grid: &FrameGrid) -> TimeSignal {
    let cfg = grid.layout();
    let n = cfg.n_subcarriers;
    let g = cfg.guard_len;
    let mut bodies = grid.units().to_vec();
    let ifft = FftPlanner::<f64>::new().plan_fft_inverse(n);
    ifft.process(&mut bodies);
    let scale = 1.0 / (n as f64).sqrt();
    let mut samples = Vec::with_capacity(cfg.sample_len());
    for body in bodies.chunks(n) {
        samples.extend(body[n - g..].iter().map(|v| v * scale));
        samples.extend(body.iter().map(|v| v * scale));
    }
    TimeSignal { samples }
}

/// Inverse of [`ofdm_modulate`]: strips each cyclic prefix and applies the
/// unitary forward DFT.
pub fn demodulate_grid(sig: &TimeSignal, cfg: &WaveformConfig) -> Result<FrameGrid> {
    cfg.validate()?;
    if sig.sample_len() != cfg.sample_len() {
        return Err(Error::Shape(format!(
            "signal has {} samples, layout needs {}",
            sig.sample_len(),
            cfg.sample_len()
        )));
    }
    let n = cfg.n_subcarriers;
    let mut grid = FrameGrid::zeros(cfg);
    {
        let units = grid.units_mut();
        for (dst, sym) in units.chunks_mut(n).zip(sig.samples.chunks(cfg.symbol_len())) {
            dst.copy_from_slice(&sym[cfg.guard_len..]);
        }
        let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
        fft.process(units);
        let scale = 1.0 / (n as f64).sqrt();
        units.iter_mut().for_each(|v| *v *= scale);
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> WaveformConfig {
        WaveformConfig {
            n_subcarriers: 8,
            n_occupied: 8,
            pilot_interval: 8,
            pilot_phase: 4,
            n_pilots: 1,
            guard_len: 2,
            symbols_per_frame: 1,
            frames_per_sample: 1,
            modulation: Modulation::Bpsk,
        }
    }

    #[test]
    fn table_layout() {
        let cfg = WaveformConfig::default();
        cfg.validate().unwrap();
        let pilots = cfg.pilot_offsets();
        assert_eq!(pilots.len(), 88);
        let want: Vec<usize> = (0..705).filter(|k| k % 8 == 4).collect();
        assert_eq!(pilots, want);
        assert_eq!(pilots.first(), Some(&4));
        assert_eq!(pilots.last(), Some(&700));
        assert_eq!((cfg.left_nulls(), cfg.right_nulls()), (160, 159));
        assert_eq!(cfg.sample_len(), 10 * 60 * (1024 + 64));
        assert_eq!(cfg.sample_len(), 652_800);
    }

    #[test]
    fn single_pilot_layout() {
        assert_eq!(tiny().pilot_offsets(), vec![4]);
    }

    #[test]
    fn pilot_count_mismatch_is_config_error() {
        let cfg = WaveformConfig { n_pilots: 87, ..Default::default() };
        assert!(matches!(build_grid(&cfg, 0), Err(Error::Config(_))));
        let cfg = WaveformConfig { guard_len: 1024, ..Default::default() };
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn grid_contents() {
        let cfg = WaveformConfig { frames_per_sample: 2, ..Default::default() };
        let grid = build_grid(&cfg, 42).unwrap();
        let bins = cfg.occupied_bins();
        let mask = cfg.pilot_mask();
        for s in 0..grid.n_symbols() {
            let sym = grid.symbol(s);
            assert!(sym[..bins.start].iter().all(|v| *v == Complex64::default()));
            assert!(sym[bins.end..].iter().all(|v| *v == Complex64::default()));
            for (off, bin) in bins.clone().enumerate() {
                if mask[off] {
                    assert_eq!(sym[bin], Complex64::new(1.0, 0.0));
                } else {
                    assert!(sym[bin] == Complex64::new(1.0, 0.0) || sym[bin] == Complex64::new(-1.0, 0.0));
                }
            }
        }
        assert_eq!(grid.occupied_power(), 1.0);
        assert_eq!(grid, build_grid(&cfg, 42).unwrap());
        assert_ne!(grid, build_grid(&cfg, 43).unwrap());
    }

    #[test]
    fn dc_unit_gives_constant_symbol() {
        let cfg = tiny();
        let mut grid = FrameGrid::zeros(&cfg);
        grid.symbol_mut(0)[0] = Complex64::new(1.0, 0.0);
        let sig = ofdm_modulate(&grid);
        assert_eq!(sig.sample_len(), 10);
        let want = 1.0 / 8f64.sqrt();
        for v in &sig.samples {
            assert!((v.re - want).abs() < 1e-15 && v.im.abs() < 1e-15);
        }
    }

    #[test]
    fn demodulation_matches_direct_dft_of_body() {
        let cfg = tiny();
        let body: Vec<Complex64> = (0..8).map(|i| Complex64::new(i as f64 - 3.0, (i * i) as f64 * 0.25)).collect();
        let mut samples = body[6..].to_vec();
        samples.extend_from_slice(&body);
        let grid = demodulate_grid(&TimeSignal { samples }, &cfg).unwrap();
        for k in 0..8 {
            let direct: Complex64 = body
                .iter()
                .enumerate()
                .map(|(n, x)| x * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * (k * n) as f64 / 8.0))
                .sum::<Complex64>()
                / 8f64.sqrt();
            assert!((grid.symbol(0)[k] - direct).norm() < 1e-12);
        }
    }

    #[test]
    fn round_trip_and_zero_signal() {
        let cfg = WaveformConfig { frames_per_sample: 1, ..Default::default() };
        let grid = build_grid(&cfg, 7).unwrap();
        let sig = ofdm_modulate(&grid);
        let back = demodulate_grid(&sig, &cfg).unwrap();
        let err = grid.units().iter().zip(back.units()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-9);
        let zero = TimeSignal { samples: vec![Complex64::default(); cfg.sample_len()] };
        assert!(demodulate_grid(&zero, &cfg).unwrap().units().iter().all(|v| v.norm() == 0.0));
        let short = TimeSignal { samples: vec![Complex64::default(); 5] };
        assert!(matches!(demodulate_grid(&short, &cfg), Err(Error::Shape(_))));
    }
}
