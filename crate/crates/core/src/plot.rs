//! SVG rendering of F0 tracks on a log-frequency axis.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::spectral::Spectrogram;
use crate::track::{F0Track, TrackError};

const WIDTH: f64 = 960.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 160.0;
const TOP: f64 = 24.0;
const BOTTOM: f64 = 48.0;
const MAX_COLUMNS: usize = 240;
const MAX_ROWS: usize = 120;
const DYNAMIC_RANGE_DB: f64 = 60.0;
const PALETTE: [&str; 6] = ["#d62728", "#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

#[derive(Debug, Error)]
pub enum PlotError {
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Track(#[from] TrackError),
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

struct Axes {
    t0: f64,
    t1: f64,
    log_lo: f64,
    log_hi: f64,
}

impl Axes {
    fn x(&self, t: f64) -> f64 {
        let span = (self.t1 - self.t0).max(f64::EPSILON);
        LEFT + (t - self.t0) / span * (WIDTH - LEFT - RIGHT)
    }

    fn y(&self, f: f64) -> f64 {
        let frac = (f.log2() - self.log_lo) / (self.log_hi - self.log_lo);
        HEIGHT - BOTTOM - frac * (HEIGHT - TOP - BOTTOM)
    }

    fn freq_at(&self, frac: f64) -> f64 {
        (self.log_lo + frac * (self.log_hi - self.log_lo)).exp2()
    }
}

fn choose_axes(tracks: &[(&str, &F0Track)], spec: Option<&Spectrogram>) -> Axes {
    let voiced = || tracks.iter().flat_map(|(_, t)| t.voiced_values());
    let (mut lo, mut hi) = voiced().fold((f64::INFINITY, 0.0f64), |(lo, hi), f| (lo.min(f), hi.max(f)));
    if !lo.is_finite() {
        (lo, hi) = (55.0, 1760.0);
    }
    lo = (lo / 1.5).max(20.0);
    hi = (hi * 1.5).max(lo * 2.0);
    if let Some(s) = spec {
        hi = hi.min(s.bin_grid().nyquist());
        lo = lo.min(hi / 2.0);
    }
    let times = tracks
        .first()
        .map(|(_, t)| t.times().to_vec())
        .or_else(|| spec.map(|s| s.time_grid().times().to_vec()))
        .unwrap_or_default();
    let t0 = times.first().copied().unwrap_or(0.0);
    let t1 = times.last().copied().unwrap_or(1.0).max(t0 + 1e-3);
    Axes {
        t0,
        t1,
        log_lo: lo.log2(),
        log_hi: hi.log2(),
    }
}

fn draw_spectrogram(out: &mut String, spec: &Spectrogram, axes: &Axes) {
    let frames = spec.num_frames();
    if frames == 0 {
        return;
    }
    let columns = frames.min(MAX_COLUMNS);
    let bins = spec.bin_grid();
    // Mean magnitude per column, sampled at each row's centre frequency.
    let mut cells = vec![0.0; columns * MAX_ROWS];
    for c in 0..columns {
        let (start, end) = (c * frames / columns, ((c + 1) * frames / columns).max(c * frames / columns + 1));
        for r in 0..MAX_ROWS {
            let f = axes.freq_at((r as f64 + 0.5) / MAX_ROWS as f64);
            let Ok(k) = bins.freq_to_bin(f) else { continue };
            let sum: f64 = (start..end).map(|t| spec.magnitude(t, k)).sum();
            cells[c * MAX_ROWS + r] = sum / (end - start) as f64;
        }
    }
    let peak = cells.iter().copied().fold(0.0, f64::max);
    if peak <= 0.0 {
        return;
    }
    let times = spec.time_grid();
    let x_at = |t: usize| axes.x(times.times()[t.min(frames - 1)]);
    out.push_str("<g class=\"spectrogram\" shape-rendering=\"crispEdges\">\n");
    for c in 0..columns {
        let x0 = x_at(c * frames / columns);
        let x1 = if c + 1 == columns { axes.x(axes.t1) } else { x_at((c + 1) * frames / columns) };
        for r in 0..MAX_ROWS {
            let m = cells[c * MAX_ROWS + r];
            if m <= 0.0 {
                continue;
            }
            let db = (20.0 * (m / peak).log10()).max(-DYNAMIC_RANGE_DB);
            let shade = (255.0 * (-db / DYNAMIC_RANGE_DB)).round() as u8;
            if shade == 255 {
                continue;
            }
            let y0 = axes.y(axes.freq_at((r + 1) as f64 / MAX_ROWS as f64));
            let y1 = axes.y(axes.freq_at(r as f64 / MAX_ROWS as f64));
            writeln!(
                out,
                "<rect x=\"{x0:.2}\" y=\"{y0:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"rgb({shade},{shade},{shade})\"/>",
                (x1 - x0).max(0.5),
                y1 - y0
            )
            .unwrap();
        }
    }
    out.push_str("</g>\n");
}

fn draw_axes(out: &mut String, axes: &Axes) {
    let (x0, x1) = (LEFT, WIDTH - RIGHT);
    let (y0, y1) = (TOP, HEIGHT - BOTTOM);
    writeln!(
        out,
        "<rect x=\"{x0}\" y=\"{y0}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>",
        x1 - x0,
        y1 - y0
    )
    .unwrap();
    // Octave ticks at A.
    let mut f: f64 = 27.5;
    while f.log2() <= axes.log_hi {
        if f.log2() >= axes.log_lo {
            let y = axes.y(f);
            writeln!(out, "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{x0}\" y2=\"{y:.2}\" stroke=\"black\"/>", x0 - 5.0).unwrap();
            writeln!(
                out,
                "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"end\">{f}</text>",
                x0 - 8.0,
                y + 4.0
            )
            .unwrap();
        }
        f *= 2.0;
    }
    for i in 0..=5 {
        let t = axes.t0 + (axes.t1 - axes.t0) * i as f64 / 5.0;
        let x = axes.x(t);
        writeln!(out, "<line x1=\"{x:.2}\" y1=\"{y1}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"black\"/>", y1 + 5.0).unwrap();
        writeln!(
            out,
            "<text x=\"{x:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"middle\">{t:.2}</text>",
            y1 + 18.0
        )
        .unwrap();
    }
    writeln!(
        out,
        "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"middle\">time (s)</text>",
        (x0 + x1) / 2.0,
        HEIGHT - 8.0
    )
    .unwrap();
    writeln!(
        out,
        "<text x=\"14\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 {:.2})\">frequency (Hz)</text>",
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    )
    .unwrap();
}

/// Runs of consecutive voiced frames as point lists.
fn voiced_runs(track: &F0Track) -> Vec<Vec<(f64, f64)>> {
    let mut runs = Vec::new();
    let mut current = Vec::new();
    for (&t, v) in track.times().iter().zip(track.values()) {
        match v {
            Some(f) => current.push((t, *f)),
            None if !current.is_empty() => runs.push(std::mem::take(&mut current)),
            None => {}
        }
    }
    if !current.is_empty() {
        runs.push(current);
    }
    runs
}

fn draw_track(out: &mut String, axes: &Axes, index: usize, label: &str, track: &F0Track) {
    let color = PALETTE[index % PALETTE.len()];
    writeln!(out, "<g class=\"track\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\">").unwrap();
    for run in voiced_runs(track) {
        out.push_str("<polyline points=\"");
        for (i, &(t, f)) in run.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            write!(out, "{:.2},{:.2}", axes.x(t), axes.y(f)).unwrap();
        }
        out.push_str("\"/>\n");
    }
    out.push_str("</g>\n");
    let y = TOP + 12.0 + 18.0 * index as f64;
    let x = WIDTH - RIGHT + 12.0;
    writeln!(
        out,
        "<g class=\"legend\"><line x1=\"{x}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" stroke=\"{color}\" stroke-width=\"2\"/><text x=\"{}\" y=\"{}\" font-size=\"12\">{}</text></g>",
        x + 20.0,
        x + 26.0,
        y + 4.0,
        escape(label)
    )
    .unwrap();
}

/// SVG document with one polyline per voiced run of each track and an
/// optional grayscale spectrogram behind them. All tracks must share a grid.
pub fn render_svg(tracks: &[(&str, &F0Track)], spec: Option<&Spectrogram>) -> Result<String, PlotError> {
    if let Some((_, first)) = tracks.first() {
        for (_, other) in &tracks[1..] {
            first.grid().ensure_matches(other.grid())?;
        }
    }
    let axes = choose_axes(tracks, spec);
    let mut out = String::new();
    writeln!(out, "<?xml version=\"1.0\" encoding=\"UTF-8\"?>").unwrap();
    writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\">"
    )
    .unwrap();
    writeln!(out, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>").unwrap();
    if let Some(spec) = spec {
        draw_spectrogram(&mut out, spec, &axes);
    }
    draw_axes(&mut out, &axes);
    for (i, (label, track)) in tracks.iter().enumerate() {
        draw_track(&mut out, &axes, i, label, track);
    }
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn plot_tracks(tracks: &[(&str, &F0Track)], spec: Option<&Spectrogram>, out: &Path) -> Result<(), PlotError> {
    let svg = render_svg(tracks, spec)?;
    fs::write(out, svg).map_err(|source| PlotError::Write {
        path: out.to_path_buf(),
        source,
    })
}
