use pitchfuse::audio::{self, synthesize_harmonic};
use pitchfuse::mono::{self, cmndf, difference_function, pyin_track, PyinSettings};
use pitchfuse::spectral::stft;
use pitchfuse::{AnalysisConfig, AudioBuffer, F0Track, TimeGrid};

fn tone(f0: f64, amps: &[f64], seconds: f64) -> AudioBuffer {
    let step = 256.0 / 22050.0;
    let grid = TimeGrid::uniform(0.0, step, (seconds / step).round() as usize);
    synthesize_harmonic(&F0Track::constant(&grid, f0), amps, 22050).unwrap()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

#[test]
fn pure_sine_is_tracked() {
    let buf = tone(440.0, &[1.0], 2.0);
    let track = pyin_track(&buf, &AnalysisConfig::default(), &PyinSettings::default()).unwrap();
    assert!(track.voiced_count() as f64 >= 0.99 * track.len() as f64);
    let m = median(track.voiced_values().collect());
    assert!((m / 440.0 - 1.0).abs() < 0.005, "median {m}");
}

#[test]
fn harmonic_tone_has_no_octave_error() {
    let buf = tone(220.0, &[1.0, 1.0, 1.0], 2.0);
    let track = pyin_track(&buf, &AnalysisConfig::default(), &PyinSettings::default()).unwrap();
    let m = median(track.voiced_values().collect());
    assert!((m / 220.0 - 1.0).abs() < 0.005, "median {m}");
    assert!(track.voiced_values().all(|f| (f / 220.0 - 1.0).abs() < 0.05));
}

#[test]
fn silence_is_unvoiced() {
    let buf = AudioBuffer::silence(22050, 22050).unwrap();
    let track = pyin_track(&buf, &AnalysisConfig::default(), &PyinSettings::default()).unwrap();
    assert_eq!(track.voiced_count(), 0);
    assert!(track.voicing_prob().iter().all(|&p| p == 0.0));
}

#[test]
fn frame_grid_matches_stft() {
    let config = AnalysisConfig::default();
    for len in [1024, 1279, 1280, 5000, 20000] {
        let buf = tone(300.0, &[1.0], 1.0);
        let buf = AudioBuffer::new(buf.samples()[..len].to_vec(), 22050).unwrap();
        let track = pyin_track(&buf, &config, &PyinSettings::default()).unwrap();
        let spec = stft(&buf, &config).unwrap();
        assert_eq!(track.len(), spec.num_frames());
        assert_eq!(track.grid(), &spec.time_grid());
    }
}

#[test]
fn voiced_values_stay_in_range() {
    let settings = PyinSettings::default();
    for f0 in [60.0, 150.0, 700.0, 1500.0] {
        let track = pyin_track(&tone(f0, &[1.0, 0.5], 0.5), &AnalysisConfig::default(), &settings).unwrap();
        for f in track.voiced_values() {
            assert!(f >= settings.hmm.f_min && f <= settings.hmm.f_max, "{f} for {f0}");
        }
        assert!(track.voiced_count() > 0, "{f0}");
    }
}

#[test]
fn amplitude_invariance() {
    let buf = tone(330.0, &[1.0, 0.6, 0.3], 1.0);
    let config = AnalysisConfig::default();
    let settings = PyinSettings::default();
    let base = pyin_track(&buf, &config, &settings).unwrap();

    // Power-of-two gains are exact in floating point.
    assert_eq!(pyin_track(&buf.scaled(0.25), &config, &settings).unwrap(), base);

    let frame = &buf.samples()[2048..3072];
    let d0 = cmndf(difference_function(frame, 512, 512).unwrap());
    for c in [0.013, 0.7, 3.3] {
        let scaled: Vec<f64> = frame.iter().map(|x| x * c).collect();
        let d1 = cmndf(difference_function(&scaled, 512, 512).unwrap());
        for (a, b) in d0.d_norm().unwrap().iter().zip(d1.d_norm().unwrap()) {
            assert!((a - b).abs() < 1e-6);
        }
        let other = pyin_track(&buf.scaled(c), &config, &settings).unwrap();
        for (a, b) in base.values().iter().zip(other.values()) {
            match (a, b) {
                (Some(a), Some(b)) => assert!((a - b).abs() <= 1e-9 * a),
                (None, None) => {}
                _ => panic!("voicing changed under gain {c}"),
            }
        }
    }
}

#[test]
fn resampled_input_gives_the_same_pitch() {
    let grid = TimeGrid::uniform(0.0, 0.01, 100);
    let buf = synthesize_harmonic(&F0Track::constant(&grid, 440.0), &[1.0, 0.5], 44100).unwrap();
    let buf = audio::canonicalize(&buf).unwrap();
    let track = pyin_track(&buf, &AnalysisConfig::default(), &PyinSettings::default()).unwrap();
    let m = median(track.voiced_values().collect());
    assert!((m / 440.0 - 1.0).abs() < 0.005, "median {m}");
}

#[test]
fn degenerate_prior_reduces_to_yin() {
    use mono::{pyin_candidates, yin_pick, yin_pick_lag, LagSearch, ThresholdPrior};
    let buf = tone(250.0, &[1.0, 0.8, 0.5], 0.3);
    let search = LagSearch::for_frequency_range(22050.0, 55.0, 1760.0, 512).unwrap();
    for start in (0..buf.len() - 1024).step_by(700) {
        let f = cmndf(difference_function(&buf.samples()[start..start + 1024], 512, 512).unwrap());
        let d_norm = f.d_norm().unwrap();
        for s in [0.05, 0.1, 0.15, 0.3] {
            let c = pyin_candidates(d_norm, &ThresholdPrior::degenerate(s).unwrap(), &search);
            match yin_pick_lag(d_norm, s, &search) {
                Some(tau) => {
                    assert_eq!(c.candidates.len(), 1);
                    assert_eq!(c.candidates[0].probability, 1.0);
                    assert!((c.candidates[0].lag - tau as f64).abs() <= 0.5);
                    assert_eq!(Some(c.candidates[0].frequency), yin_pick(d_norm, s, &search));
                }
                None => assert!(c.candidates.is_empty()),
            }
        }
    }
}
