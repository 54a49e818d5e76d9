//! Block-fading Rician channel and AWGN, applied per resource element.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::waveform::FrameGrid;

/// One flat complex gain per frame, unit average power.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelRealization {
    pub gains: Vec<Complex64>,
    pub k_factor: f64,
}

impl ChannelRealization {
    /// A channel that applies `gain` to every frame.
    pub fn constant(gain: Complex64, frames: usize) -> Self {
        ChannelRealization { gains: vec![gain; frames], k_factor: f64::INFINITY }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub snr_db: f64,
    pub sigma_n_sq: f64,
}

impl NoiseSpec {
    pub fn new(snr_db: f64, signal_power: f64) -> Self {
        NoiseSpec { snr_db, sigma_n_sq: signal_power / 10f64.powf(snr_db / 10.0) }
    }
}

/// Circularly symmetric `CN(0, 1)` draw.
pub(crate) fn cn01(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// `sqrt(K/(K+1)) e^{jθ} + sqrt(1/(K+1)) CN(0,1)`, θ uniform on `[0, 2π)`.
/// `K = ∞` gives the pure line-of-sight unit phasor.
pub fn rician_gain(k_factor: f64, rng: &mut impl Rng) -> Complex64 {
    let theta = rng.random_range(0.0..std::f64::consts::TAU);
    let los_phasor = Complex64::from_polar(1.0, theta);
    let diffuse = cn01(rng);
    if k_factor.is_infinite() {
        return los_phasor;
    }
    los_phasor * (k_factor / (k_factor + 1.0)).sqrt() + diffuse * (1.0 / (k_factor + 1.0)).sqrt()
}

/// Draws one i.i.d. Rician gain per frame.
pub fn draw_rician(k_factor: f64, frames: usize, seed: u64) -> Result<ChannelRealization> {
    if !(k_factor >= 0.0) {
        return Err(Error::Domain(format!("Rician K must be non-negative, got {k_factor}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gains = (0..frames).map(|_| rician_gain(k_factor, &mut rng)).collect();
    Ok(ChannelRealization { gains, k_factor })
}

/// Multiplies every resource element of frame `m` by that frame's gain.
pub fn apply_channel(mut grid: FrameGrid, ch: &ChannelRealization) -> Result<FrameGrid> {
    if ch.gains.len() != grid.n_frames() {
        return Err(Error::Shape(format!(
            "{} channel gains for {} frames",
            ch.gains.len(),
            grid.n_frames()
        )));
    }
    for (m, &g) in ch.gains.iter().enumerate() {
        grid.frame_mut(m).iter_mut().for_each(|v| *v *= g);
    }
    Ok(grid)
}

/// Adds i.i.d. `CN(0, σ²)` to every resource element, null carriers
/// included, with `σ²` set against unit average occupied-RE signal power.
/// An infinite SNR is the no-noise mode.
pub fn add_awgn(mut grid: FrameGrid, snr_db: f64, seed: u64) -> FrameGrid {
    if snr_db == f64::INFINITY {
        return grid;
    }
    let spec = NoiseSpec::new(snr_db, 1.0);
    let sigma = spec.sigma_n_sq.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for v in grid.units_mut() {
        *v += cn01(&mut rng) * sigma;
    }
    grid
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waveform::{build_grid, WaveformConfig};

    #[test]
    fn infinite_k_is_unit_magnitude() {
        let ch = draw_rician(f64::INFINITY, 100, 3).unwrap();
        assert!(ch.gains.iter().all(|g| (g.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn negative_k_rejected() {
        assert!(matches!(draw_rician(-1.0, 1, 0), Err(Error::Domain(_))));
        assert!(draw_rician(f64::NAN, 1, 0).is_err());
    }

    #[test]
    fn rayleigh_mean_power() {
        let ch = draw_rician(0.0, 100_000, 11).unwrap();
        let p = ch.gains.iter().map(|g| g.norm_sqr()).sum::<f64>() / 1e5;
        assert!((p - 1.0).abs() < 0.02, "mean power {p}");
    }

    #[test]
    fn gain_rotations_and_scales() {
        let cfg = WaveformConfig { frames_per_sample: 2, ..Default::default() };
        let grid = build_grid(&cfg, 1).unwrap();
        let same = apply_channel(grid.clone(), &ChannelRealization::constant(Complex64::new(1.0, 0.0), 2)).unwrap();
        assert_eq!(same, grid);
        let rot = apply_channel(grid.clone(), &ChannelRealization::constant(Complex64::i(), 2)).unwrap();
        for (a, b) in grid.units().iter().zip(rot.units()) {
            assert_eq!(*b, a * Complex64::i());
        }
        assert!((rot.occupied_power() - 1.0).abs() < 1e-12);

        let ch = ChannelRealization { gains: vec![Complex64::new(2.0, 0.0), Complex64::new(0.5, 0.0)], k_factor: 5.0 };
        let scaled = apply_channel(grid.clone(), &ch).unwrap();
        let power = |g: &FrameGrid, m: usize| g.frame(m).iter().map(|v| v.norm_sqr()).sum::<f64>();
        assert!((power(&scaled, 0) / power(&grid, 0) - 4.0).abs() < 1e-12);
        assert!((power(&scaled, 1) / power(&grid, 1) - 0.25).abs() < 1e-12);

        let wrong = ChannelRealization::constant(Complex64::new(1.0, 0.0), 3);
        assert!(matches!(apply_channel(grid, &wrong), Err(Error::Shape(_))));
    }

    #[test]
    fn infinite_snr_is_identity() {
        let cfg = WaveformConfig { frames_per_sample: 1, ..Default::default() };
        let grid = build_grid(&cfg, 2).unwrap();
        assert_eq!(add_awgn(grid.clone(), f64::INFINITY, 9), grid);
    }

    #[test]
    fn noise_spec_definition() {
        let n = NoiseSpec::new(10.0, 2.0);
        assert!((n.sigma_n_sq - 0.2).abs() < 1e-15);
    }
}
