use thiserror::Error;

/// Two grids are considered the same time base when every frame time agrees
/// within this many seconds. CSV files carry 6 decimals, so this leaves an
/// order of magnitude of slack over the printing error.
pub const GRID_TOLERANCE_SEC: f64 = 1e-5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrackError {
    #[error("frame step must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("frame time {time} at index {index} is not finite")]
    NonFiniteTime { index: usize, time: f64 },
    #[error("frame times are not strictly increasing at index {0}")]
    NonIncreasingTimes(usize),
    #[error("frame spacing at index {index} is {actual:.6} s, expected {expected:.6} s")]
    NonUniformStep {
        index: usize,
        actual: f64,
        expected: f64,
    },
    #[error("{field} has {actual} entries but the grid has {expected} frames")]
    LengthMismatch {
        field: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("frequency {value} at frame {index} is not a positive finite number")]
    InvalidFrequency { index: usize, value: f64 },
    #[error("voicing probability {value} at frame {index} is outside [0, 1]")]
    InvalidProbability { index: usize, value: f64 },
    #[error("time grids differ ({left} vs {right} frames, or frame times disagree)")]
    GridMismatch { left: usize, right: usize },
    #[error("a multi-F0 track needs at least one voice")]
    NoVoices,
}

/// Uniform frame time base. Times are stored explicitly so that grids parsed
/// from text round-trip without re-deriving each timestamp.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    times: Vec<f64>,
    step: f64,
}

impl TimeGrid {
    pub fn uniform(start: f64, step: f64, len: usize) -> Self {
        assert!(step > 0.0 && step.is_finite(), "step must be positive");
        TimeGrid {
            times: (0..len).map(|k| start + k as f64 * step).collect(),
            step,
        }
    }

    /// Validates explicit times against `step`. Each spacing may deviate from
    /// `step` by at most [`GRID_TOLERANCE_SEC`].
    pub fn from_times(times: Vec<f64>, step: f64) -> Result<Self, TrackError> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(TrackError::InvalidStep(step));
        }
        for (index, &time) in times.iter().enumerate() {
            if !time.is_finite() {
                return Err(TrackError::NonFiniteTime { index, time });
            }
        }
        for (i, w) in times.windows(2).enumerate() {
            let actual = w[1] - w[0];
            if actual <= 0.0 {
                return Err(TrackError::NonIncreasingTimes(i + 1));
            }
            if (actual - step).abs() > GRID_TOLERANCE_SEC {
                return Err(TrackError::NonUniformStep {
                    index: i + 1,
                    actual,
                    expected: step,
                });
            }
        }
        Ok(TimeGrid { times, step })
    }

    /// Like [`TimeGrid::from_times`] but infers the step from the first and
    /// last time. `fallback_step` is used for grids with fewer than two frames.
    pub fn infer(times: Vec<f64>, fallback_step: f64) -> Result<Self, TrackError> {
        let step = match (times.first(), times.last()) {
            (Some(&first), Some(&last)) if times.len() >= 2 => {
                (last - first) / (times.len() - 1) as f64
            }
            _ => fallback_step,
        };
        if times.len() >= 2 && step <= 0.0 {
            return Err(TrackError::NonIncreasingTimes(1));
        }
        Self::from_times(times, step)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Index of the frame whose time is nearest to `t`, provided it lies
    /// within half a step of that frame.
    pub fn nearest_frame(&self, t: f64) -> Option<usize> {
        let first = *self.times.first()?;
        let guess = ((t - first) / self.step).round();
        if guess < -1.0 || guess > self.times.len() as f64 {
            return None;
        }
        let guess = guess.clamp(0.0, (self.times.len() - 1) as f64) as usize;
        // Neighbours cover drift between the nominal and the stored times.
        let lo = guess.saturating_sub(1);
        let hi = (guess + 1).min(self.times.len() - 1);
        let best = (lo..=hi)
            .min_by(|&a, &b| {
                (self.times[a] - t)
                    .abs()
                    .total_cmp(&(self.times[b] - t).abs())
            })
            .expect("non-empty range");
        ((self.times[best] - t).abs() <= self.step / 2.0).then_some(best)
    }

    pub fn matches(&self, other: &TimeGrid) -> bool {
        self.len() == other.len()
            && self
                .times
                .iter()
                .zip(&other.times)
                .all(|(a, b)| (a - b).abs() <= GRID_TOLERANCE_SEC)
    }

    pub(crate) fn ensure_matches(&self, other: &TimeGrid) -> Result<(), TrackError> {
        if self.matches(other) {
            Ok(())
        } else {
            Err(TrackError::GridMismatch {
                left: self.len(),
                right: other.len(),
            })
        }
    }
}

/// Per-frame fundamental frequency on a uniform grid. `None` marks an
/// unvoiced frame.
#[derive(Debug, Clone, PartialEq)]
pub struct F0Track {
    grid: TimeGrid,
    values: Vec<Option<f64>>,
    voicing_prob: Vec<f64>,
}

impl F0Track {
    pub fn new(
        grid: TimeGrid,
        values: Vec<Option<f64>>,
        voicing_prob: Vec<f64>,
    ) -> Result<Self, TrackError> {
        if values.len() != grid.len() {
            return Err(TrackError::LengthMismatch {
                field: "values",
                expected: grid.len(),
                actual: values.len(),
            });
        }
        if voicing_prob.len() != grid.len() {
            return Err(TrackError::LengthMismatch {
                field: "voicing_prob",
                expected: grid.len(),
                actual: voicing_prob.len(),
            });
        }
        for (index, v) in values.iter().enumerate() {
            if let Some(value) = *v {
                if !(value > 0.0 && value.is_finite()) {
                    return Err(TrackError::InvalidFrequency { index, value });
                }
            }
        }
        for (index, &value) in voicing_prob.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(TrackError::InvalidProbability { index, value });
            }
        }
        Ok(F0Track {
            grid,
            values,
            voicing_prob,
        })
    }

    /// Track with voicing probability 1 on voiced frames and 0 elsewhere.
    pub fn from_values(grid: TimeGrid, values: Vec<Option<f64>>) -> Result<Self, TrackError> {
        let probs = values
            .iter()
            .map(|v| if v.is_some() { 1.0 } else { 0.0 })
            .collect();
        Self::new(grid, values, probs)
    }

    pub fn unvoiced(grid: &TimeGrid) -> Self {
        let n = grid.len();
        F0Track {
            grid: grid.clone(),
            values: vec![None; n],
            voicing_prob: vec![0.0; n],
        }
    }

    pub fn constant(grid: &TimeGrid, f0: f64) -> Self {
        Self::from_values(grid.clone(), vec![Some(f0); grid.len()])
            .expect("constant frequency must be positive")
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        self.grid.times()
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    pub fn voicing_prob(&self) -> &[f64] {
        &self.voicing_prob
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn voiced_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }

    pub fn voiced_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().flatten().copied()
    }
}

/// An ordered set of voices on one grid. Voice 0 is the first voice `M1`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiF0Track {
    voices: Vec<F0Track>,
}

impl MultiF0Track {
    pub fn new(voices: Vec<F0Track>) -> Result<Self, TrackError> {
        let first = voices.first().ok_or(TrackError::NoVoices)?;
        for voice in &voices[1..] {
            first.grid().ensure_matches(voice.grid())?;
        }
        Ok(MultiF0Track { voices })
    }

    pub fn voices(&self) -> &[F0Track] {
        &self.voices
    }

    pub fn into_voices(self) -> Vec<F0Track> {
        self.voices
    }

    pub fn first_voice(&self) -> &F0Track {
        &self.voices[0]
    }

    pub fn num_voices(&self) -> usize {
        self.voices.len()
    }

    pub fn grid(&self) -> &TimeGrid {
        self.voices[0].grid()
    }

    pub fn len(&self) -> usize {
        self.voices[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.voices[0].is_empty()
    }

    /// Voiced values of every voice at frame `t`, in voice order.
    pub fn frame_values(&self, t: usize) -> Vec<f64> {
        self.voices.iter().filter_map(|v| v.values()[t]).collect()
    }
}
