//! Monophonic F0 extraction.
//!
//! Per frame: [`difference_function`] -> [`cmndf`] -> [`pyin_candidates`]
//! (or [`yin_pick`] for the fixed-threshold variant). Across frames the
//! candidate sets are decoded by [`viterbi_decode`] on an [`HmmModel`].

mod difference;
mod hmm;
mod pyin;
pub mod viterbi;
mod yin;

use thiserror::Error;

use crate::spectral::SpectralError;
use crate::track::TrackError;

pub use difference::{cmndf, difference_function, DifferenceEngine, DifferenceFrame};
pub use hmm::{build_hmm, viterbi_decode, HmmModel, HmmSettings};
pub use pyin::{
    pyin_candidates, pyin_observations, pyin_track, FrameCandidates, PitchCandidate,
    PyinSettings, ThresholdPrior,
};
pub use yin::{local_minima, parabolic_refine, yin_pick, yin_pick_lag, LagSearch};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PitchError {
    #[error("frame of {frame_len} samples cannot hold a {window}-sample window at lag {tau_max}")]
    LagTooLarge {
        frame_len: usize,
        window: usize,
        tau_max: usize,
    },
    #[error("invalid threshold prior: {0}")]
    InvalidPrior(String),
    #[error("invalid pitch settings: {0}")]
    InvalidSettings(String),
    #[error("pitch lattice is empty")]
    EmptyLattice,
    #[error("no frames to decode")]
    NoFrames,
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Track(#[from] TrackError),
}
