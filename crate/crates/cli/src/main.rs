use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use pitchfuse::csv::{self, TrackFile};
use pitchfuse::eval::EvalReport;
use pitchfuse::fusion::{fuse_first_voice, merge_into_multif0};
use pitchfuse::mono::{pyin_track, PyinSettings};
use pitchfuse::multi::{multif0_track, MultiF0Settings};
use pitchfuse::{audio, plot, spectral, AnalysisConfig, AudioBuffer, BinGrid, FusionParams};

#[derive(Parser)]
#[command(name = "pitchfuse", version, about = "Pitch tracking, multi-F0 estimation and track fusion")]
struct Cli {
    #[command(flatten)]
    analysis: AnalysisArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct AnalysisArgs {
    /// Analysis sample rate; input audio is resampled to it.
    #[arg(long, global = true, default_value_t = 22050)]
    sample_rate: u32,
    /// STFT window length in samples (power of two).
    #[arg(long, global = true, default_value_t = 1024)]
    window: usize,
    /// Hop between frames in samples.
    #[arg(long, global = true, default_value_t = 256)]
    hop: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Monophonic F0 track of a WAV file (PYIN).
    Pyin {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Multi-F0 track of a WAV file (harmonic summation).
    Multif0 {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Maximum number of simultaneous F0s per frame.
        #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..))]
        polyphony: u32,
        /// Salience peaks below this fraction of the frame maximum are dropped.
        #[arg(long, default_value_t = 0.3, value_parser = unit_interval)]
        threshold: f64,
        /// Minimum magnitude at a peak's own fundamental, relative to the
        /// frame's loudest bin (0 keeps sub-harmonic peaks).
        #[arg(long, default_value_t = 0.1, value_parser = fraction)]
        fundamental_floor: f64,
    },
    /// Merge a PYIN track into the first voice of a multi-F0 track.
    Fuse {
        #[arg(long)]
        m1: PathBuf,
        #[arg(long)]
        pyin: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value_t = 2)]
        bin_tolerance: usize,
        #[arg(long, default_value_t = 5)]
        window_before: usize,
        #[arg(long, default_value_t = 4)]
        window_after: usize,
    },
    /// Print flatness, completeness and optionally accuracy of a track.
    Eval {
        track: PathBuf,
        /// Reference track for raw pitch accuracy.
        #[arg(long = "ref")]
        reference: Option<PathBuf>,
    },
    /// Render an F0 contour as a harmonic tone.
    Synth {
        #[arg(long)]
        f0: PathBuf,
        /// Partial amplitudes, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "1")]
        partials: Vec<f64>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Draw one or more track files as SVG.
    Plot {
        #[arg(required = true)]
        tracks: Vec<PathBuf>,
        /// Audio whose spectrogram is drawn behind the tracks.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
}

fn unit_interval(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} is not strictly between 0 and 1"))
    }
}

fn fraction(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if (0.0..1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is outside [0, 1)"))
    }
}

impl AnalysisArgs {
    fn config(&self) -> AnalysisConfig {
        AnalysisConfig {
            sample_rate: self.sample_rate,
            window_size: self.window,
            hop_size: self.hop,
            ..AnalysisConfig::default()
        }
    }

    fn frame_step(&self) -> f64 {
        self.hop as f64 / self.sample_rate as f64
    }
}

fn load_audio(path: &Path, rate: u32) -> pitchfuse::Result<AudioBuffer> {
    Ok(audio::resample(&audio::load_wav(path)?, rate)?)
}

fn track_label(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn run(cli: Cli) -> pitchfuse::Result<()> {
    let config = cli.analysis.config();
    let step = cli.analysis.frame_step();
    match cli.command {
        Command::Pyin { input, output } => {
            let buf = load_audio(&input, config.sample_rate)?;
            let settings = PyinSettings {
                correlation_window: config.window_size / 2,
                tau_max: config.window_size / 2,
                ..PyinSettings::default()
            };
            csv::write_f0_csv(&pyin_track(&buf, &config, &settings)?, &output)?;
        }
        Command::Multif0 {
            input,
            output,
            polyphony,
            threshold,
            fundamental_floor,
        } => {
            let buf = load_audio(&input, config.sample_rate)?;
            let settings = MultiF0Settings {
                max_polyphony: polyphony as usize,
                rel_threshold: threshold,
                fundamental_floor,
                ..MultiF0Settings::default()
            };
            csv::write_multif0_csv(&multif0_track(&buf, &config, &settings)?, &output)?;
        }
        Command::Fuse {
            m1,
            pyin,
            output,
            bin_tolerance,
            window_before,
            window_after,
        } => {
            let p = csv::read_f0_csv(&pyin, step)?;
            let multi = csv::import_multif0_csv(&m1, p.grid())?;
            let params = FusionParams {
                bin_tolerance,
                window_before,
                window_after,
                grid: BinGrid::new(config.sample_rate, config.window_size)?,
            };
            let fused = fuse_first_voice(multi.first_voice(), &p, &params)?;
            csv::write_multif0_csv(&merge_into_multif0(&fused, &multi)?, &output)?;
        }
        Command::Eval { track, reference } => {
            let track = csv::read_track_file(&track, step)?;
            let reference = reference.map(|r| csv::read_track_file(&r, step)).transpose()?;
            let report = EvalReport::new(track.primary(), reference.as_ref().map(TrackFile::primary))?;
            print!("{report}");
        }
        Command::Synth { f0, partials, output } => {
            let contour = csv::read_f0_csv(&f0, step)?;
            let buf = audio::synthesize_harmonic(&contour, &partials, config.sample_rate)?;
            audio::write_wav(&buf, &output, audio::WavEncoding::Float32)?;
        }
        Command::Plot { tracks, spec, output } => {
            let files = tracks
                .iter()
                .map(|p| csv::read_track_file(p, step))
                .collect::<Result<Vec<_>, _>>()?;
            let mut labelled = Vec::new();
            for (path, file) in tracks.iter().zip(&files) {
                let stem = track_label(path);
                match file {
                    TrackFile::Single(t) => labelled.push((stem, t)),
                    TrackFile::Multi(m) => {
                        for (k, v) in m.voices().iter().enumerate() {
                            labelled.push((format!("{stem}:f0_{}", k + 1), v));
                        }
                    }
                }
            }
            let spectrogram = spec
                .map(|p| -> pitchfuse::Result<_> { Ok(spectral::stft(&load_audio(&p, config.sample_rate)?, &config)?) })
                .transpose()?;
            let refs: Vec<(&str, _)> = labelled.iter().map(|(l, t)| (l.as_str(), *t)).collect();
            plot::plot_tracks(&refs, spectrogram.as_ref(), &output)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    if let Err(e) = cli.analysis.config().validate() {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
