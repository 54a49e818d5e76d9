//! STFT spectrogram images: log-power, block-average pooled to a fixed
//! square size, min-max normalized per sample.

use std::io::Write;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jammer::AttackKind;
use crate::waveform::TimeSignal;

/// Side length of the square classifier input.
pub const IMAGE_SIZE: usize = 96;
/// Floor added to `|S|²` before the logarithm.
pub const LOG_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    Rect,
    Hann,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
#[serde(deny_unknown_fields)]
pub struct StftPlan {
    pub nfft: usize,
    pub window: WindowKind,
    pub window_len: usize,
    pub hop: usize,
}

impl Default for StftPlan {
    fn default() -> Self {
        StftPlan { nfft: 1024, window: WindowKind::Rect, window_len: 1024, hop: 1024 }
    }
}

impl StftPlan {
    pub fn validate(&self) -> Result<()> {
        if self.hop == 0 || self.hop > self.window_len || self.window_len > self.nfft {
            return Err(Error::Config(format!(
                "STFT needs 0 < hop ({}) <= window ({}) <= nfft ({})",
                self.hop, self.window_len, self.nfft
            )));
        }
        Ok(())
    }

    pub fn window_coeffs(&self) -> Vec<f64> {
        let n = self.window_len;
        match self.window {
            WindowKind::Rect => vec![1.0; n],
            WindowKind::Hann => (0..n)
                .map(|i| 0.5 - 0.5 * (std::f64::consts::TAU * i as f64 / n as f64).cos())
                .collect(),
        }
    }

    pub fn n_columns(&self, signal_len: usize) -> usize {
        if signal_len < self.window_len {
            0
        } else {
            (signal_len - self.window_len) / self.hop + 1
        }
    }
}

/// Complex `rows x cols` matrix, row-major; rows are frequency bins.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn at(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    pub fn column(&self, c: usize) -> Vec<Complex64> {
        (0..self.rows).map(|r| self.at(r, c)).collect()
    }
}

/// Short-time Fourier transform with an unnormalized forward DFT.
///
/// Column `t` is the DFT of the windowed segment starting at `t · hop`,
/// zero-padded to `nfft`.
pub fn stft(sig: &TimeSignal, plan: &StftPlan) -> Result<ComplexMatrix> {
    plan.validate()?;
    let len = sig.sample_len();
    if len < plan.window_len {
        return Err(Error::Shape(format!("signal of {len} samples is shorter than one {}-sample window", plan.window_len)));
    }
    let cols = plan.n_columns(len);
    let nfft = plan.nfft;
    let win = plan.window_coeffs();
    let mut buf = vec![Complex64::default(); cols * nfft];
    for (t, seg) in buf.chunks_mut(nfft).enumerate() {
        let start = t * plan.hop;
        for (i, (dst, w)) in seg.iter_mut().zip(&win).enumerate() {
            *dst = sig.samples[start + i] * w;
        }
    }
    FftPlanner::<f64>::new().plan_fft_forward(nfft).process(&mut buf);
    let mut data = vec![Complex64::default(); nfft * cols];
    for (t, col) in buf.chunks(nfft).enumerate() {
        for (r, v) in col.iter().enumerate() {
            data[r * cols + t] = *v;
        }
    }
    Ok(ComplexMatrix { rows: nfft, cols, data })
}

/// Scenario provenance carried with every spectrogram.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioTag {
    pub snr_db: f64,
    pub sjr_db: Option<f64>,
    pub attack: AttackKind,
}

impl Default for ScenarioTag {
    fn default() -> Self {
        ScenarioTag { snr_db: f64::INFINITY, sjr_db: None, attack: AttackKind::None }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Spectrogram {
    /// `IMAGE_SIZE x IMAGE_SIZE`, row-major, rows are frequency.
    pub pixels: Vec<f32>,
    pub meta: ScenarioTag,
}

impl Spectrogram {
    pub fn mean(&self) -> f64 {
        self.pixels.iter().map(|&p| p as f64).sum::<f64>() / self.pixels.len() as f64
    }

    /// Mean over image rows `rows`.
    pub fn mean_rows(&self, rows: std::ops::Range<usize>) -> f64 {
        let n = rows.len() * IMAGE_SIZE;
        rows.flat_map(|r| self.pixels[r * IMAGE_SIZE..(r + 1) * IMAGE_SIZE].iter())
            .map(|&p| p as f64)
            .sum::<f64>()
            / n as f64
    }

    /// Binary 8-bit portable graymap.
    pub fn write_pgm(&self, mut w: impl Write) -> std::io::Result<()> {
        write!(w, "P5\n{IMAGE_SIZE} {IMAGE_SIZE}\n255\n")?;
        let bytes: Vec<u8> = self.pixels.iter().map(|&p| (p.clamp(0.0, 1.0) * 255.0).round() as u8).collect();
        w.write_all(&bytes)
    }
}

/// `[lo, hi)` input range averaged into output cell `i` of `out` cells.
/// Fractional block edges are rounded outward, so neighbouring blocks share
/// their ragged edge element.
pub fn pool_range(i: usize, len: usize, out: usize) -> (usize, usize) {
    let lo = i * len / out;
    let hi = ((i + 1) * len).div_ceil(out).max(lo + 1).min(len);
    (lo, hi)
}

/// Log-power image of `s`, pooled to `IMAGE_SIZE²` and scaled to `[0, 1]`.
/// A constant image maps to all zeros.
pub fn to_image(s: &ComplexMatrix) -> Result<Spectrogram> {
    if s.rows == 0 || s.cols == 0 {
        return Err(Error::Shape("empty STFT matrix".into()));
    }
    let logp: Vec<f64> = s.data.iter().map(|v| (v.norm_sqr() + LOG_FLOOR).log10()).collect();
    let size = IMAGE_SIZE;
    // pool columns first, then rows
    let col_ranges: Vec<(usize, usize)> = (0..size).map(|j| pool_range(j, s.cols, size)).collect();
    let mut by_col = vec![0.0; s.rows * size];
    for r in 0..s.rows {
        let row = &logp[r * s.cols..(r + 1) * s.cols];
        for (j, &(lo, hi)) in col_ranges.iter().enumerate() {
            by_col[r * size + j] = row[lo..hi].iter().sum::<f64>() / (hi - lo) as f64;
        }
    }
    let mut pooled = vec![0.0; size * size];
    for i in 0..size {
        let (lo, hi) = pool_range(i, s.rows, size);
        for j in 0..size {
            pooled[i * size + j] = (lo..hi).map(|r| by_col[r * size + j]).sum::<f64>() / (hi - lo) as f64;
        }
    }
    let min = pooled.iter().copied().fold(f64::INFINITY, f64::min);
    let max = pooled.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = max - min;
    let pixels = if span > 0.0 {
        pooled.iter().map(|&v| ((v - min) / span) as f32).collect()
    } else {
        vec![0.0; size * size]
    };
    Ok(Spectrogram { pixels, meta: ScenarioTag::default() })
}

/// STFT followed by [`to_image`].
pub fn spectrogram(sig: &TimeSignal, plan: &StftPlan, meta: ScenarioTag) -> Result<Spectrogram> {
    let mut img = to_image(&stft(sig, plan)?)?;
    img.meta = meta;
    Ok(img)
}
