use std::path::Path;

use hound::{SampleFormat, WavSpec, WavWriter};
use pitchfuse::audio::{self, AudioError, WavEncoding};
use pitchfuse::AudioBuffer;
use tempfile::tempdir;

fn write_int(path: &Path, channels: u16, rate: u32, bits: u16, samples: &[i32]) {
    let spec = WavSpec {
        channels,
        sample_rate: rate,
        bits_per_sample: bits,
        sample_format: SampleFormat::Int,
    };
    let mut w = WavWriter::create(path, spec).unwrap();
    for &s in samples {
        if bits == 16 {
            w.write_sample(s as i16).unwrap();
        } else {
            w.write_sample(s).unwrap();
        }
    }
    w.finalize().unwrap();
}

#[test]
fn one_second_pcm16_at_44100() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("a.wav");
    let samples: Vec<i32> = (0..44100).map(|n| (n % 200 - 100) * 50).collect();
    write_int(&path, 1, 44100, 16, &samples);
    let buf = audio::load_wav(&path).unwrap();
    assert_eq!(buf.len(), 44100);
    assert_eq!(buf.sample_rate(), 44100);
    assert_eq!(buf.samples()[0], -5000.0 / 32768.0);
}

#[test]
fn symmetric_stereo_mixes_to_silence() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("s.wav");
    let frames: Vec<i32> = (0..1000).flat_map(|_| [16384, -16384]).collect();
    write_int(&path, 2, 22050, 16, &frames);
    let buf = audio::load_wav(&path).unwrap();
    assert_eq!(buf.len(), 1000);
    assert!(buf.samples().iter().all(|&x| x == 0.0));
}

#[test]
fn pcm_scaling_convention() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("m.wav");
    write_int(&path, 1, 22050, 16, &[-32768, 32767, 0]);
    let buf = audio::load_wav(&path).unwrap();
    assert!((buf.samples()[0] + 1.0).abs() <= 1.0 / 32768.0);
    assert_eq!(buf.samples()[2], 0.0);

    let path24 = dir.path().join("m24.wav");
    write_int(&path24, 1, 22050, 24, &[-(1 << 23), (1 << 22)]);
    let buf = audio::load_wav(&path24).unwrap();
    assert_eq!(buf.samples(), &[-1.0, 0.5]);
}

#[test]
fn float_round_trip_is_exact_at_f32_precision() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("f.wav");
    let samples: Vec<f64> = (0..500).map(|n| ((n as f64) * 0.01).sin() * 0.7).collect();
    let buf = AudioBuffer::new(samples.clone(), 16000).unwrap();
    audio::write_wav(&buf, &path, WavEncoding::Float32).unwrap();
    let back = audio::load_wav(&path).unwrap();
    assert_eq!(back.sample_rate(), 16000);
    for (a, b) in back.samples().iter().zip(&samples) {
        assert_eq!(*a, *b as f32 as f64);
    }

    let pcm = dir.path().join("p.wav");
    audio::write_wav(&buf, &pcm, WavEncoding::Pcm16).unwrap();
    let back = audio::load_wav(&pcm).unwrap();
    for (a, b) in back.samples().iter().zip(&samples) {
        assert!((a - b).abs() <= 1.0 / 32768.0);
    }
}

#[test]
fn unreadable_and_unsupported_files() {
    let dir = tempdir().unwrap();
    assert!(matches!(
        audio::load_wav(dir.path().join("missing.wav")),
        Err(AudioError::Unreadable { .. })
    ));

    let junk = dir.path().join("junk.wav");
    std::fs::write(&junk, b"definitely not a RIFF file").unwrap();
    assert!(audio::load_wav(&junk).is_err());

    let eight = dir.path().join("u8.wav");
    let spec = WavSpec {
        channels: 1,
        sample_rate: 8000,
        bits_per_sample: 8,
        sample_format: SampleFormat::Int,
    };
    let mut w = WavWriter::create(&eight, spec).unwrap();
    w.write_sample(5i8).unwrap();
    w.finalize().unwrap();
    assert!(matches!(audio::load_wav(&eight), Err(AudioError::UnsupportedCodec { .. })));

    let empty = dir.path().join("empty.wav");
    write_int(&empty, 1, 22050, 16, &[]);
    assert!(matches!(audio::load_wav(&empty), Err(AudioError::Empty { .. })));
}

#[test]
fn canonical_rate_pipeline() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("c.wav");
    let samples: Vec<i32> = (0..44100)
        .map(|n| ((2.0 * std::f64::consts::PI * 440.0 * n as f64 / 44100.0).sin() * 16000.0) as i32)
        .collect();
    write_int(&path, 1, 44100, 16, &samples);
    let buf = audio::canonicalize(&audio::load_wav(&path).unwrap()).unwrap();
    assert_eq!(buf.sample_rate(), 22050);
    assert_eq!(buf.len(), 22050);
}
