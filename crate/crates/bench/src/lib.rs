//! Synthetic inputs shared by the benchmarks.

use pitchfuse::audio::synthesize_harmonic;
use pitchfuse::{AudioBuffer, F0Track, TimeGrid};

pub const SAMPLE_RATE: u32 = 22050;

const STEP: f64 = 0.01;

fn contour(seconds: f64, f0: impl Fn(f64) -> f64) -> F0Track {
    let grid = TimeGrid::uniform(0.0, STEP, (seconds / STEP).round() as usize);
    let values = grid.times().iter().map(|&t| Some(f0(t))).collect();
    F0Track::from_values(grid, values).expect("grid and values have equal length")
}

/// A melody with vibrato, stepping through a scale every half second.
pub fn melody(seconds: f64) -> AudioBuffer {
    let f0 = |t: f64| {
        let note = 440.0 * 2f64.powf(((t * 2.0).floor() % 7.0) / 12.0);
        note * 2f64.powf(0.3 * (2.0 * std::f64::consts::PI * 5.5 * t).sin() / 12.0)
    };
    synthesize_harmonic(&contour(seconds, f0), &[1.0, 0.6, 0.4, 0.2], SAMPLE_RATE).expect("valid contour")
}

/// The melody over a sustained 220 Hz tone.
pub fn duet(seconds: f64) -> AudioBuffer {
    let lead = melody(seconds);
    let bass = synthesize_harmonic(&contour(seconds, |_| 220.0), &[1.0, 0.6, 0.4, 0.2], SAMPLE_RATE).expect("valid contour");
    let samples = lead.samples().iter().zip(bass.samples()).map(|(a, b)| 0.5 * (a + b)).collect();
    AudioBuffer::new(samples, SAMPLE_RATE).expect("finite samples")
}
