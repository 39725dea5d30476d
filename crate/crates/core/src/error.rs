use thiserror::Error;

use crate::audio::AudioError;
use crate::csv::CsvError;
use crate::eval::EvalError;
use crate::mono::PitchError;
use crate::multi::MultiF0Error;
use crate::plot::PlotError;
use crate::spectral::SpectralError;
use crate::track::TrackError;

/// Any failure raised by the crate's pipelines.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Audio(#[from] AudioError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Track(#[from] TrackError),
    #[error(transparent)]
    Pitch(#[from] PitchError),
    #[error(transparent)]
    MultiF0(#[from] MultiF0Error),
    #[error(transparent)]
    Csv(#[from] CsvError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Plot(#[from] PlotError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
