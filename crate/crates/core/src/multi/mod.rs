//! Multi-F0 estimation by harmonic summation.
//!
//! [`harmonic_salience`] scores a log-spaced F0 lattice per STFT frame,
//! [`peak_pick`] keeps the strongest distinct maxima, and [`assign_voices`]
//! links them into voices. Externally produced multi-F0 tracks enter through
//! [`crate::csv::import_multif0_csv`] instead.

mod peaks;
mod salience;
mod voices;

use thiserror::Error;

use crate::audio::AudioBuffer;
use crate::spectral::{stft, AnalysisConfig, SpectralError};
use crate::track::{MultiF0Track, TrackError};
use crate::units::pitch_lattice;

pub use peaks::{peak_pick, peak_pick_with_fundamental};
pub use salience::{harmonic_salience, SalienceMap};
pub use voices::{assign_voices, assign_voices_with_continuity, VOICE_CONTINUITY_CENTS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MultiF0Error {
    #[error("F0 lattice is empty")]
    EmptyLattice,
    #[error("invalid multi-F0 settings: {0}")]
    InvalidSettings(String),
    #[error("{frames} frame sets for a grid of {grid} frames")]
    FrameCountMismatch { frames: usize, grid: usize },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Track(#[from] TrackError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiF0Settings {
    pub f_min: f64,
    pub f_max: f64,
    pub resolution_cents: f64,
    /// Number of harmonics summed per candidate.
    pub harmonics: usize,
    /// Weight ratio between successive harmonics.
    pub decay: f64,
    /// Peaks below this fraction of the frame maximum are dropped.
    pub rel_threshold: f64,
    pub max_polyphony: usize,
    /// Smallest magnitude at a peak's own fundamental, relative to the
    /// frame's loudest bin; 0 disables the check. See
    /// [`peak_pick_with_fundamental`].
    pub fundamental_floor: f64,
    pub continuity_cents: f64,
}

impl Default for MultiF0Settings {
    fn default() -> Self {
        MultiF0Settings {
            f_min: 55.0,
            f_max: 1760.0,
            resolution_cents: 20.0,
            harmonics: 10,
            decay: 0.8,
            rel_threshold: 0.3,
            max_polyphony: 4,
            fundamental_floor: 0.1,
            continuity_cents: VOICE_CONTINUITY_CENTS,
        }
    }
}

impl MultiF0Settings {
    pub fn f0_axis(&self) -> Vec<f64> {
        pitch_lattice(self.f_min, self.f_max, self.resolution_cents)
    }
}

/// STFT, salience, peak picking and voice assignment in one call.
pub fn multif0_track(
    buf: &AudioBuffer,
    config: &AnalysisConfig,
    settings: &MultiF0Settings,
) -> Result<MultiF0Track, MultiF0Error> {
    let spec = stft(buf, config)?;
    let salience = harmonic_salience(&spec, &settings.f0_axis(), settings.harmonics, settings.decay)?;
    let sets = peak_pick_with_fundamental(
        &salience,
        &spec,
        settings.rel_threshold,
        settings.max_polyphony,
        settings.fundamental_floor,
    )?;
    assign_voices_with_continuity(&sets, salience.grid(), settings.continuity_cents)
}
