use rayon::prelude::*;

use super::difference::{cmndf, DifferenceEngine};
use super::hmm::{build_hmm, viterbi_decode, HmmSettings};
use super::yin::{local_minima, parabolic_refine, LagSearch};
use super::PitchError;
use crate::audio::AudioBuffer;
use crate::spectral::AnalysisConfig;
use crate::track::F0Track;

/// Discrete distribution over YIN thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdPrior {
    thresholds: Vec<f64>,
    weights: Vec<f64>,
}

impl Default for ThresholdPrior {
    /// Beta(2, 18) (mean 0.1) over 100 thresholds 0.01, 0.02, ..., 1.0.
    fn default() -> Self {
        Self::beta(2.0, 18.0, 100).expect("default prior parameters are valid")
    }
}

impl ThresholdPrior {
    /// Normalises `weights`; thresholds must lie in (0, 1].
    pub fn new(thresholds: Vec<f64>, weights: Vec<f64>) -> Result<Self, PitchError> {
        let fail = |msg: &str| Err(PitchError::InvalidPrior(msg.into()));
        if thresholds.is_empty() || thresholds.len() != weights.len() {
            return fail("need one weight per threshold");
        }
        if thresholds.iter().any(|&s| !(s > 0.0 && s <= 1.0)) {
            return fail("thresholds must lie in (0, 1]");
        }
        if weights.iter().any(|&w| !(w >= 0.0 && w.is_finite())) {
            return fail("weights must be finite and non-negative");
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return fail("weights sum to zero");
        }
        Ok(ThresholdPrior {
            thresholds,
            weights: weights.into_iter().map(|w| w / total).collect(),
        })
    }

    /// Beta(alpha, beta) density sampled at `k / n` for `k = 1..=n`.
    pub fn beta(alpha: f64, beta: f64, n: usize) -> Result<Self, PitchError> {
        if !(alpha > 0.0 && beta > 0.0) {
            return Err(PitchError::InvalidPrior("beta shape parameters must be positive".into()));
        }
        let thresholds: Vec<f64> = (1..=n).map(|k| k as f64 / n as f64).collect();
        let weights = thresholds
            .iter()
            .map(|&s| s.powf(alpha - 1.0) * (1.0 - s).powf(beta - 1.0))
            .collect();
        Self::new(thresholds, weights)
    }

    /// All mass on a single threshold: PYIN reduces to fixed-threshold YIN.
    pub fn degenerate(threshold: f64) -> Result<Self, PitchError> {
        Self::new(vec![threshold], vec![1.0])
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mean(&self) -> f64 {
        self.thresholds.iter().zip(&self.weights).map(|(s, w)| s * w).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PitchCandidate {
    pub frequency: f64,
    pub probability: f64,
    /// Parabolic-refined lag in samples; `frequency = sample_rate / lag`.
    pub lag: f64,
}

/// Candidates of one frame, ordered by increasing lag. The mass not assigned
/// to any candidate is the frame's unvoiced probability.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FrameCandidates {
    pub candidates: Vec<PitchCandidate>,
    pub unvoiced_probability: f64,
}

impl FrameCandidates {
    pub fn unvoiced() -> Self {
        FrameCandidates {
            candidates: Vec::new(),
            unvoiced_probability: 1.0,
        }
    }

    pub fn voiced_probability(&self) -> f64 {
        self.candidates.iter().map(|c| c.probability).sum()
    }
}

/// Runs the YIN picking rule under every threshold of `prior`. Each lag that
/// gets picked becomes a candidate carrying the summed weight of the
/// thresholds that picked it; thresholds that pick nothing add their weight
/// to the unvoiced probability.
pub fn pyin_candidates(d_norm: &[f64], prior: &ThresholdPrior, search: &LagSearch) -> FrameCandidates {
    let minima: Vec<usize> = local_minima(d_norm, search).collect();
    let mut mass = vec![0.0; minima.len()];
    let mut unvoiced = 0.0;
    for (&s, &w) in prior.thresholds.iter().zip(&prior.weights) {
        match minima.iter().position(|&tau| d_norm[tau] < s) {
            Some(i) => mass[i] += w,
            None => unvoiced += w,
        }
    }
    let candidates = minima
        .iter()
        .zip(&mass)
        .filter(|(_, &m)| m > 0.0)
        .map(|(&tau, &probability)| {
            let lag = parabolic_refine(d_norm, tau);
            PitchCandidate {
                frequency: search.lag_to_frequency(lag),
                probability,
                lag,
            }
        })
        .collect();
    FrameCandidates {
        candidates,
        unvoiced_probability: unvoiced,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PyinSettings {
    /// Summation length `W` of the difference function.
    pub correlation_window: usize,
    /// Largest lag evaluated.
    pub tau_max: usize,
    pub prior: ThresholdPrior,
    /// Pitch range, lattice and transition model.
    pub hmm: HmmSettings,
}

impl Default for PyinSettings {
    fn default() -> Self {
        PyinSettings {
            correlation_window: 512,
            tau_max: 512,
            prior: ThresholdPrior::default(),
            hmm: HmmSettings::default(),
        }
    }
}

/// Per-frame candidate sets on the STFT frame grid of `config`.
pub fn pyin_observations(
    buf: &AudioBuffer,
    config: &AnalysisConfig,
    settings: &PyinSettings,
) -> Result<Vec<FrameCandidates>, PitchError> {
    let num_frames = config.check_buffer(buf)?;
    let engine = DifferenceEngine::new(settings.correlation_window, settings.tau_max)?;
    if engine.frame_len() > config.window_size {
        return Err(PitchError::InvalidSettings(format!(
            "correlation window {} plus max lag {} exceeds the {}-sample analysis window",
            settings.correlation_window, settings.tau_max, config.window_size
        )));
    }
    let search = LagSearch::for_frequency_range(
        config.sample_rate as f64,
        settings.hmm.f_min,
        settings.hmm.f_max,
        settings.tau_max,
    )?;
    let samples = buf.samples();
    (0..num_frames)
        .into_par_iter()
        .map(|t| {
            let start = t * config.hop_size;
            let frame = cmndf(engine.compute(&samples[start..start + config.window_size])?);
            let d_norm = frame.d_norm().expect("normalised above");
            Ok(pyin_candidates(d_norm, &settings.prior, &search))
        })
        .collect()
}

/// PYIN: candidates per frame, then Viterbi smoothing. The output grid equals
/// the STFT grid for the same buffer and config.
pub fn pyin_track(
    buf: &AudioBuffer,
    config: &AnalysisConfig,
    settings: &PyinSettings,
) -> Result<F0Track, PitchError> {
    let observations = pyin_observations(buf, config, settings)?;
    let model = build_hmm(&settings.hmm)?;
    viterbi_decode(&observations, &model, config.time_grid(observations.len()))
}
