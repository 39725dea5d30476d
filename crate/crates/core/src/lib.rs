//! Pitch tracking and multi-F0 track fusion.
//!
//! The crate is organised around one shared frame grid: every analysis stage
//! (STFT, YIN/PYIN, harmonic salience) produces one value per hop, and frame
//! `t` is stamped at the centre of its analysis window. With the default
//! [`AnalysisConfig`] that is a 1024-sample Hann window advanced by 256
//! samples at 22050 Hz.
//!
//! The main stages are:
//!
//!   * [`audio`]: WAV decoding, band-limited resampling, additive synthesis
//!     of test signals with a known contour.
//!   * [`spectral`]: magnitude STFT and the [`BinGrid`] used to quantize
//!     frequencies to the nearest STFT bin.
//!   * [`mono`]: the YIN difference function, cumulative-mean normalisation,
//!     probabilistic thresholding (PYIN) and HMM/Viterbi smoothing.
//!   * [`multi`]: harmonic-summation salience, peak picking and voice
//!     assignment producing a [`MultiF0Track`] whose voice 0 is the first
//!     voice `M1`.
//!   * [`fusion`]: merging a PYIN track into `M1` on the bin grid.
//!   * [`eval`] and [`plot`]: curve metrics and SVG output.
//!
//! ```
//! use pitchfuse::{audio, mono, AnalysisConfig, F0Track, TimeGrid};
//!
//! let config = AnalysisConfig::default();
//! let grid = TimeGrid::uniform(0.0, 256.0 / 22050.0, 100);
//! let contour = F0Track::constant(&grid, 440.0);
//! let buf = audio::synthesize_harmonic(&contour, &[1.0], 22050).unwrap();
//! let track = mono::pyin_track(&buf, &config, &mono::PyinSettings::default()).unwrap();
//! assert!(track.voiced_count() > 90);
//! ```

pub mod audio;
pub mod csv;
mod error;
pub mod eval;
pub mod fusion;
pub mod mono;
pub mod multi;
pub mod plot;
pub mod spectral;
mod track;
pub mod units;

pub use audio::{AudioBuffer, CANONICAL_SAMPLE_RATE};
pub use error::{Error, Result};
pub use fusion::FusionParams;
pub use spectral::{AnalysisConfig, BinGrid, Spectrogram, WindowFunction};
pub use track::{F0Track, MultiF0Track, TimeGrid, TrackError};
