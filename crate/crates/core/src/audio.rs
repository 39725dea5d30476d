//! Audio input, canonical-rate resampling and synthetic test signals.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};
use thiserror::Error;

use crate::track::F0Track;

/// Rate every analysis stage runs at.
pub const CANONICAL_SAMPLE_RATE: u32 = 22050;

/// Peak amplitude of [`synthesize_harmonic`] output.
pub const SYNTH_PEAK: f64 = 0.8;

#[derive(Debug, Error)]
pub enum AudioError {
    #[error("cannot read {}: {source}", path.display())]
    Unreadable {
        path: PathBuf,
        #[source]
        source: hound::Error,
    },
    #[error("unsupported WAV encoding in {}: {detail}", path.display())]
    UnsupportedCodec { path: PathBuf, detail: String },
    #[error("{} contains no audio frames", path.display())]
    Empty { path: PathBuf },
    #[error("cannot write {}: {source}", path.display())]
    Write {
        path: PathBuf,
        #[source]
        source: hound::Error,
    },
    #[error("sample rate must be positive")]
    ZeroSampleRate,
    #[error("sample {index} is not finite")]
    NonFiniteSample { index: usize },
    #[error("no partial amplitudes given")]
    NoPartials,
    #[error("frame {frame}: {f0} Hz with {partials} partials reaches the Nyquist frequency {nyquist} Hz")]
    Aliasing {
        frame: usize,
        f0: f64,
        partials: usize,
        nyquist: f64,
    },
}

/// Mono samples at a known rate. Samples are finite, nominally in [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl AudioBuffer {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self, AudioError> {
        if sample_rate == 0 {
            return Err(AudioError::ZeroSampleRate);
        }
        if let Some(index) = samples.iter().position(|s| !s.is_finite()) {
            return Err(AudioError::NonFiniteSample { index });
        }
        Ok(AudioBuffer {
            samples,
            sample_rate,
        })
    }

    pub fn silence(len: usize, sample_rate: u32) -> Result<Self, AudioError> {
        Self::new(vec![0.0; len], sample_rate)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_sec(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    pub fn scaled(&self, gain: f64) -> Self {
        AudioBuffer {
            samples: self.samples.iter().map(|s| s * gain).collect(),
            sample_rate: self.sample_rate,
        }
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, s| m.max(s.abs()))
    }
}

/// Decodes a RIFF/WAVE file holding 16-bit PCM, 24-bit PCM or 32-bit float
/// samples. Channels are averaged to mono; the native rate is kept.
pub fn load_wav(path: impl AsRef<Path>) -> Result<AudioBuffer, AudioError> {
    let path = path.as_ref();
    let reader = WavReader::open(path).map_err(|source| match source {
        hound::Error::Unsupported => AudioError::UnsupportedCodec {
            path: path.to_owned(),
            detail: "format tag not handled".into(),
        },
        source => AudioError::Unreadable {
            path: path.to_owned(),
            source,
        },
    })?;
    let spec = reader.spec();
    let channels = spec.channels as usize;
    let read_err = |source| AudioError::Unreadable {
        path: path.to_owned(),
        source,
    };
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, bits @ (16 | 24)) => {
            let scale = 1.0 / (1u32 << (bits - 1)) as f64;
            reader
                .into_samples::<i32>()
                .map(|s| s.map(|v| v as f64 * scale))
                .collect::<Result<_, _>>()
                .map_err(read_err)?
        }
        (SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<Result<_, _>>()
            .map_err(read_err)?,
        (format, bits) => {
            return Err(AudioError::UnsupportedCodec {
                path: path.to_owned(),
                detail: format!("{bits}-bit {format:?} samples"),
            })
        }
    };
    if channels == 0 || interleaved.len() < channels {
        return Err(AudioError::Empty {
            path: path.to_owned(),
        });
    }
    let samples: Vec<f64> = interleaved
        .chunks_exact(channels)
        .map(|frame| frame.iter().sum::<f64>() / channels as f64)
        .collect();
    AudioBuffer::new(samples, spec.sample_rate)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WavEncoding {
    Pcm16,
    #[default]
    Float32,
}

/// Writes a mono WAV file. PCM output is clipped to the 16-bit range.
pub fn write_wav(
    buf: &AudioBuffer,
    path: impl AsRef<Path>,
    encoding: WavEncoding,
) -> Result<(), AudioError> {
    let path = path.as_ref();
    let write_err = |source| AudioError::Write {
        path: path.to_owned(),
        source,
    };
    let (bits_per_sample, sample_format) = match encoding {
        WavEncoding::Pcm16 => (16, SampleFormat::Int),
        WavEncoding::Float32 => (32, SampleFormat::Float),
    };
    let spec = WavSpec {
        channels: 1,
        sample_rate: buf.sample_rate,
        bits_per_sample,
        sample_format,
    };
    let mut writer = WavWriter::create(path, spec).map_err(write_err)?;
    for &s in &buf.samples {
        match encoding {
            WavEncoding::Pcm16 => {
                let v = (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
                writer.write_sample(v).map_err(write_err)?;
            }
            WavEncoding::Float32 => writer.write_sample(s as f32).map_err(write_err)?,
        }
    }
    writer.finalize().map_err(write_err)
}

/// Zero crossings of the sinc kernel on each side of the centre tap.
const SINC_ZERO_CROSSINGS: usize = 32;
/// Cutoff as a fraction of the lower of the two Nyquist frequencies. With 32
/// zero crossings and beta = 8 the Kaiser transition band ends just below the
/// output Nyquist, where the stopband is ~80 dB down.
const RESAMPLE_ROLLOFF: f64 = 0.9;
const KAISER_BETA: f64 = 8.0;

/// Band-limited resampling with a Kaiser-windowed sinc kernel.
///
/// Output sample `n` sits at input position `n * in_rate / out_rate`; the
/// output holds `round(len * out_rate / in_rate)` samples. Equal rates return
/// the input unchanged.
pub fn resample(buf: &AudioBuffer, target_rate: u32) -> Result<AudioBuffer, AudioError> {
    if target_rate == 0 {
        return Err(AudioError::ZeroSampleRate);
    }
    if target_rate == buf.sample_rate {
        return Ok(buf.clone());
    }
    let in_rate = buf.sample_rate as u64;
    let out_rate = target_rate as u64;
    let out_len = ((buf.len() as u64 * out_rate) as f64 / in_rate as f64).round() as usize;

    // Input positions advance by in_rate/out_rate = step/phases; the
    // fractional offset cycles through `phases` distinct values.
    let g = gcd(in_rate, out_rate);
    let step = in_rate / g;
    let phases = out_rate / g;

    // Cutoff in cycles per input sample.
    let cutoff = 0.5 * RESAMPLE_ROLLOFF * (out_rate as f64 / in_rate as f64).min(1.0);
    let half_width = SINC_ZERO_CROSSINGS as f64 / (2.0 * cutoff);
    let reach = half_width.ceil() as i64;
    let taps = (2 * reach + 1) as usize;
    let i0_beta = bessel_i0(KAISER_BETA);

    let kernel = |phase: u64| -> Vec<f64> {
        let frac = phase as f64 / phases as f64;
        let mut h: Vec<f64> = (-reach..=reach)
            .map(|k| {
                let u = k as f64 - frac;
                let x = u / half_width;
                if x.abs() >= 1.0 {
                    return 0.0;
                }
                let window = bessel_i0(KAISER_BETA * (1.0 - x * x).sqrt()) / i0_beta;
                2.0 * cutoff * sinc(2.0 * cutoff * u) * window
            })
            .collect();
        let sum: f64 = h.iter().sum();
        h.iter_mut().for_each(|v| *v /= sum);
        h
    };
    let table: Vec<Vec<f64>> = (0..phases).map(kernel).collect();

    let x = &buf.samples;
    let mut out = Vec::with_capacity(out_len);
    for n in 0..out_len as u64 {
        let pos = n * step;
        let base = (pos / phases) as i64;
        let h = &table[(pos % phases) as usize];
        let first = base - reach;
        let lo = (-first).max(0) as usize;
        let hi = taps.min((x.len() as i64 - first).max(0) as usize);
        let acc: f64 = if lo < hi {
            h[lo..hi]
                .iter()
                .zip(&x[(first + lo as i64) as usize..(first + hi as i64) as usize])
                .map(|(a, b)| a * b)
                .sum()
        } else {
            0.0
        };
        out.push(acc);
    }
    AudioBuffer::new(out, target_rate)
}

/// Resamples to [`CANONICAL_SAMPLE_RATE`].
pub fn canonicalize(buf: &AudioBuffer) -> Result<AudioBuffer, AudioError> {
    resample(buf, CANONICAL_SAMPLE_RATE)
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Modified Bessel function of the first kind, order zero (power series).
fn bessel_i0(x: f64) -> f64 {
    let half_sq = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..64 {
        term *= half_sq / (k * k) as f64;
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

/// Phase-continuous additive synthesis following an F0 contour.
///
/// Frame `k` of the contour holds from its own time until the next frame's
/// (the first frame also covers everything before it); the buffer ends one
/// step after the last frame. Partial `h` (1-based) has amplitude
/// `partial_amps[h-1]` and advances its phase by `2*pi*h*f0/sample_rate` per
/// sample. Unvoiced frames are silent. The result is scaled to a peak of
/// [`SYNTH_PEAK`] unless it is all zeros.
pub fn synthesize_harmonic(
    contour: &F0Track,
    partial_amps: &[f64],
    sample_rate: u32,
) -> Result<AudioBuffer, AudioError> {
    if sample_rate == 0 {
        return Err(AudioError::ZeroSampleRate);
    }
    if partial_amps.is_empty() {
        return Err(AudioError::NoPartials);
    }
    let sr = sample_rate as f64;
    let nyquist = sr / 2.0;
    let partials = partial_amps.len();
    for (frame, v) in contour.values().iter().enumerate() {
        if let Some(f0) = *v {
            if f0 * partials as f64 >= nyquist {
                return Err(AudioError::Aliasing {
                    frame,
                    f0,
                    partials,
                    nyquist,
                });
            }
        }
    }
    let Some(&first_time) = contour.times().first() else {
        return AudioBuffer::new(Vec::new(), sample_rate);
    };
    let step = contour.grid().step();
    let last_time = *contour.times().last().unwrap();
    let num_samples = ((last_time + step) * sr).round().max(0.0) as usize;

    let mut phases = vec![0.0f64; partials];
    let mut samples = Vec::with_capacity(num_samples);
    for n in 0..num_samples {
        let t = n as f64 / sr;
        let k = ((t - first_time) / step).floor().clamp(0.0, (contour.len() - 1) as f64) as usize;
        match contour.values()[k] {
            Some(f0) => {
                let mut acc = 0.0;
                for (h, (phase, amp)) in phases.iter_mut().zip(partial_amps).enumerate() {
                    acc += amp * phase.sin();
                    *phase = (*phase + 2.0 * PI * (h + 1) as f64 * f0 / sr) % (2.0 * PI);
                }
                samples.push(acc);
            }
            None => samples.push(0.0),
        }
    }
    let peak = samples.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    if peak > 0.0 {
        let gain = SYNTH_PEAK / peak;
        samples.iter_mut().for_each(|s| *s *= gain);
    }
    AudioBuffer::new(samples, sample_rate)
}
