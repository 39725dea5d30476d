//! Curve-quality metrics.

use std::fmt;

use thiserror::Error;

use crate::track::{F0Track, TrackError};
use crate::units::cents_between;

/// Default tolerance of [`raw_pitch_accuracy`].
pub const ACCURACY_GATE_CENTS: f64 = 50.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("track has no frames")]
    EmptyTrack,
    #[error(transparent)]
    Track(#[from] TrackError),
}

/// Mean absolute pitch step, in cents, over consecutive frame pairs that are
/// both voiced. Zero when there is no such pair.
pub fn flatness(track: &F0Track) -> f64 {
    let (sum, count) = track
        .values()
        .windows(2)
        .filter_map(|w| Some(cents_between(w[0]?, w[1]?).abs()))
        .fold((0.0, 0usize), |(s, n), c| (s + c, n + 1));
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

/// Fraction of voiced frames.
pub fn completeness(track: &F0Track) -> Result<f64, EvalError> {
    if track.is_empty() {
        return Err(EvalError::EmptyTrack);
    }
    Ok(track.voiced_count() as f64 / track.len() as f64)
}

/// Fraction of reference-voiced frames on which `track` is voiced and within
/// `gate_cents`. A reference without voiced frames scores 1.
pub fn raw_pitch_accuracy_with_gate(track: &F0Track, reference: &F0Track, gate_cents: f64) -> Result<f64, EvalError> {
    track.grid().ensure_matches(reference.grid())?;
    let (hits, total) = track
        .values()
        .iter()
        .zip(reference.values())
        .filter_map(|(v, r)| r.map(|r| (*v, r)))
        .fold((0usize, 0usize), |(hits, total), (v, r)| {
            let hit = v.is_some_and(|v| cents_between(r, v).abs() <= gate_cents);
            (hits + usize::from(hit), total + 1)
        });
    Ok(if total == 0 { 1.0 } else { hits as f64 / total as f64 })
}

pub fn raw_pitch_accuracy(track: &F0Track, reference: &F0Track) -> Result<f64, EvalError> {
    raw_pitch_accuracy_with_gate(track, reference, ACCURACY_GATE_CENTS)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub flatness: f64,
    pub completeness: f64,
    pub voiced_frames: usize,
    pub total_frames: usize,
    /// Present when a reference track was given.
    pub raw_pitch_accuracy: Option<f64>,
}

impl EvalReport {
    pub fn new(track: &F0Track, reference: Option<&F0Track>) -> Result<Self, EvalError> {
        Ok(EvalReport {
            flatness: flatness(track),
            completeness: completeness(track)?,
            voiced_frames: track.voiced_count(),
            total_frames: track.len(),
            raw_pitch_accuracy: reference.map(|r| raw_pitch_accuracy(track, r)).transpose()?,
        })
    }
}

/// One `key=value` line per metric.
impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "flatness={:.4}", self.flatness)?;
        writeln!(f, "completeness={:.4}", self.completeness)?;
        writeln!(f, "voiced_frames={}", self.voiced_frames)?;
        writeln!(f, "total_frames={}", self.total_frames)?;
        if let Some(rpa) = self.raw_pitch_accuracy {
            writeln!(f, "raw_pitch_accuracy={rpa:.4}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::track::TimeGrid;

    fn track(values: Vec<Option<f64>>) -> F0Track {
        F0Track::from_values(TimeGrid::uniform(0.0, 0.01, values.len()), values).unwrap()
    }

    #[test]
    fn flatness_examples() {
        assert_eq!(flatness(&track(vec![Some(440.0); 10])), 0.0);
        assert_eq!(flatness(&track(vec![None; 10])), 0.0);
        let semitone = 440.0 * 2f64.powf(1.0 / 12.0);
        let alt = track((0..10).map(|t| Some(if t % 2 == 0 { 440.0 } else { semitone })).collect());
        assert!((flatness(&alt) - 100.0).abs() < 1e-9);
        // Pairs across a gap are ignored.
        let gapped = track(vec![Some(440.0), None, Some(880.0), Some(880.0)]);
        assert_eq!(flatness(&gapped), 0.0);
    }

    #[test]
    fn completeness_examples() {
        assert_eq!(completeness(&track(vec![Some(1.0); 4])).unwrap(), 1.0);
        assert_eq!(completeness(&track(vec![None; 4])).unwrap(), 0.0);
        let mut v = vec![None; 100];
        v[..30].fill(Some(200.0));
        assert!((completeness(&track(v)).unwrap() - 0.3).abs() < 1e-12);
        assert_eq!(completeness(&track(vec![])).unwrap_err(), EvalError::EmptyTrack);
    }

    #[test]
    fn accuracy_examples() {
        let reference = track(vec![Some(440.0), Some(220.0), None, Some(300.0)]);
        assert_eq!(raw_pitch_accuracy(&reference, &reference).unwrap(), 1.0);
        assert_eq!(raw_pitch_accuracy(&track(vec![None; 4]), &reference).unwrap(), 0.0);
        let up = 2f64.powf(25.0 / 1200.0);
        let shifted = track(reference.values().iter().map(|v| v.map(|f| f * up)).collect());
        assert_eq!(raw_pitch_accuracy(&shifted, &reference).unwrap(), 1.0);
        assert!(raw_pitch_accuracy(&track(vec![None; 3]), &reference).is_err());
    }

    #[test]
    fn report_lines() {
        let report = EvalReport::new(&track(vec![Some(440.0); 4]), None).unwrap();
        assert_eq!(
            report.to_string(),
            "flatness=0.0000\ncompleteness=1.0000\nvoiced_frames=4\ntotal_frames=4\n"
        );
    }
}
