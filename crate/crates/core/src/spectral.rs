//! Magnitude STFT and the STFT bin lattice.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::{num_complex::Complex, Fft, FftPlanner};
use thiserror::Error;

use crate::audio::{AudioBuffer, CANONICAL_SAMPLE_RATE};
use crate::track::TimeGrid;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("invalid analysis configuration: {0}")]
    InvalidConfig(String),
    #[error("buffer holds {len} samples, shorter than one {window}-sample window")]
    TooShort { len: usize, window: usize },
    #[error("buffer is at {actual} Hz but the analysis expects {expected} Hz")]
    RateMismatch { expected: u32, actual: u32 },
    #[error("frequency {0} Hz is outside [0, Nyquist]")]
    FrequencyOutOfRange(f64),
    #[error("bin {index} is outside 0..{num_bins}")]
    BinOutOfRange { index: usize, num_bins: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WindowFunction {
    #[default]
    Hann,
    Rectangular,
}

impl WindowFunction {
    /// Periodic window of length `n`.
    pub fn coefficients(self, n: usize) -> Vec<f64> {
        match self {
            WindowFunction::Hann => (0..n)
                .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
                .collect(),
            WindowFunction::Rectangular => vec![1.0; n],
        }
    }
}

/// Frame layout shared by every analysis stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnalysisConfig {
    pub sample_rate: u32,
    pub window_size: usize,
    pub hop_size: usize,
    pub window: WindowFunction,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            sample_rate: CANONICAL_SAMPLE_RATE,
            window_size: 1024,
            hop_size: 256,
            window: WindowFunction::Hann,
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<(), SpectralError> {
        let fail = |msg: String| Err(SpectralError::InvalidConfig(msg));
        if self.sample_rate == 0 {
            return fail("sample rate must be positive".into());
        }
        if self.hop_size == 0 {
            return fail("hop size must be positive".into());
        }
        if self.window_size < self.hop_size {
            return fail(format!(
                "window size {} is smaller than hop size {}",
                self.window_size, self.hop_size
            ));
        }
        if !self.window_size.is_power_of_two() {
            return fail(format!("window size {} is not a power of two", self.window_size));
        }
        Ok(())
    }

    /// Number of complete windows in `num_samples`; a trailing partial window
    /// is dropped.
    pub fn frame_count(&self, num_samples: usize) -> usize {
        if num_samples < self.window_size {
            0
        } else {
            (num_samples - self.window_size) / self.hop_size + 1
        }
    }

    /// Time of the centre of frame `t`, in seconds.
    pub fn frame_time(&self, t: usize) -> f64 {
        (t * self.hop_size + self.window_size / 2) as f64 / self.sample_rate as f64
    }

    pub fn hop_seconds(&self) -> f64 {
        self.hop_size as f64 / self.sample_rate as f64
    }

    pub fn time_grid(&self, num_frames: usize) -> TimeGrid {
        TimeGrid::from_times(
            (0..num_frames).map(|t| self.frame_time(t)).collect(),
            self.hop_seconds(),
        )
        .expect("frame times are uniform by construction")
    }

    pub fn bin_grid(&self) -> BinGrid {
        BinGrid {
            sample_rate: self.sample_rate,
            fft_size: self.window_size,
        }
    }

    /// Checks the buffer against the configuration and returns its frame count.
    pub(crate) fn check_buffer(&self, buf: &AudioBuffer) -> Result<usize, SpectralError> {
        self.validate()?;
        if buf.sample_rate() != self.sample_rate {
            return Err(SpectralError::RateMismatch {
                expected: self.sample_rate,
                actual: buf.sample_rate(),
            });
        }
        if buf.len() < self.window_size {
            return Err(SpectralError::TooShort {
                len: buf.len(),
                window: self.window_size,
            });
        }
        Ok(self.frame_count(buf.len()))
    }
}

/// Frequencies of the one-sided FFT bins: bin `k` is centred on
/// `k * sample_rate / fft_size`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinGrid {
    sample_rate: u32,
    fft_size: usize,
}

impl Default for BinGrid {
    fn default() -> Self {
        AnalysisConfig::default().bin_grid()
    }
}

impl BinGrid {
    pub fn new(sample_rate: u32, fft_size: usize) -> Result<Self, SpectralError> {
        if sample_rate == 0 || fft_size < 2 {
            return Err(SpectralError::InvalidConfig(format!(
                "bin grid needs a positive rate and fft size >= 2 (got {sample_rate}, {fft_size})"
            )));
        }
        Ok(BinGrid {
            sample_rate,
            fft_size,
        })
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn fft_size(&self) -> usize {
        self.fft_size
    }

    pub fn num_bins(&self) -> usize {
        self.fft_size / 2 + 1
    }

    pub fn bin_width(&self) -> f64 {
        self.sample_rate as f64 / self.fft_size as f64
    }

    pub fn nyquist(&self) -> f64 {
        self.sample_rate as f64 / 2.0
    }

    /// Nearest bin to `f`, rounding exact half-bin ties upwards.
    pub fn freq_to_bin(&self, f: f64) -> Result<usize, SpectralError> {
        if !(0.0..=self.nyquist()).contains(&f) {
            return Err(SpectralError::FrequencyOutOfRange(f));
        }
        let k = (f * self.fft_size as f64 / self.sample_rate as f64 + 0.5).floor() as usize;
        Ok(k.min(self.num_bins() - 1))
    }

    pub fn bin_to_freq(&self, k: usize) -> Result<f64, SpectralError> {
        if k >= self.num_bins() {
            return Err(SpectralError::BinOutOfRange {
                index: k,
                num_bins: self.num_bins(),
            });
        }
        Ok(k as f64 * self.sample_rate as f64 / self.fft_size as f64)
    }
}

/// Frame-major magnitude spectrogram, `window_size / 2 + 1` bins per frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    magnitudes: Vec<f64>,
    num_frames: usize,
    num_bins: usize,
    config: AnalysisConfig,
}

impl Spectrogram {
    pub fn num_frames(&self) -> usize {
        self.num_frames
    }

    pub fn num_bins(&self) -> usize {
        self.num_bins
    }

    pub fn config(&self) -> &AnalysisConfig {
        &self.config
    }

    pub fn bin_grid(&self) -> BinGrid {
        self.config.bin_grid()
    }

    pub fn time_grid(&self) -> TimeGrid {
        self.config.time_grid(self.num_frames)
    }

    pub fn frame(&self, t: usize) -> &[f64] {
        &self.magnitudes[t * self.num_bins..(t + 1) * self.num_bins]
    }

    pub fn magnitude(&self, t: usize, k: usize) -> f64 {
        self.magnitudes[t * self.num_bins + k]
    }

    pub fn frames(&self) -> impl Iterator<Item = &[f64]> {
        self.magnitudes.chunks_exact(self.num_bins)
    }

    /// Builds a spectrogram from precomputed magnitudes (frame-major).
    pub fn from_magnitudes(
        magnitudes: Vec<f64>,
        config: AnalysisConfig,
    ) -> Result<Self, SpectralError> {
        config.validate()?;
        let num_bins = config.window_size / 2 + 1;
        if magnitudes.len() % num_bins != 0 {
            return Err(SpectralError::InvalidConfig(format!(
                "{} magnitudes do not divide into {num_bins}-bin frames",
                magnitudes.len()
            )));
        }
        if magnitudes.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(SpectralError::InvalidConfig(
                "magnitudes must be finite and non-negative".into(),
            ));
        }
        Ok(Spectrogram {
            num_frames: magnitudes.len() / num_bins,
            magnitudes,
            num_bins,
            config,
        })
    }
}

/// Magnitude STFT. Frame `t` covers samples `[t*hop, t*hop + window)`.
pub fn stft(buf: &AudioBuffer, config: &AnalysisConfig) -> Result<Spectrogram, SpectralError> {
    let num_frames = config.check_buffer(buf)?;
    let n = config.window_size;
    let num_bins = n / 2 + 1;
    let window = config.window.coefficients(n);
    let fft: Arc<dyn Fft<f64>> = FftPlanner::new().plan_fft_forward(n);
    let samples = buf.samples();

    let mut magnitudes = vec![0.0; num_frames * num_bins];
    magnitudes
        .par_chunks_mut(num_bins)
        .enumerate()
        .for_each_init(
            || {
                (
                    vec![Complex::new(0.0, 0.0); n],
                    vec![Complex::new(0.0, 0.0); fft.get_inplace_scratch_len()],
                )
            },
            |(buffer, scratch), (t, out)| {
                let start = t * config.hop_size;
                for ((b, &x), &w) in buffer.iter_mut().zip(&samples[start..start + n]).zip(&window) {
                    *b = Complex::new(x * w, 0.0);
                }
                fft.process_with_scratch(buffer, scratch);
                for (o, c) in out.iter_mut().zip(buffer.iter()) {
                    *o = c.norm();
                }
            },
        );
    Ok(Spectrogram {
        magnitudes,
        num_frames,
        num_bins,
        config: *config,
    })
}
