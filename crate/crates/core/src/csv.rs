//! Text formats for F0 tracks.
//!
//! Single-track files have the header `time_sec,f0_hz,voicing_prob`;
//! multi-F0 files have `time_sec,f0_1,...,f0_K` with `f0_1` the first voice.
//! Times are printed with 6 decimals, frequencies and probabilities with 4,
//! and an empty frequency field marks an unvoiced frame.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use ::csv::{ReaderBuilder, StringRecord, Trim};
use thiserror::Error;

use crate::track::{F0Track, MultiF0Track, TimeGrid, TrackError};

pub const F0_HEADER: &str = "time_sec,f0_hz,voicing_prob";

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("missing header line")]
    MissingHeader,
    #[error("unrecognised header `{0}`")]
    BadHeader(String),
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: time {time:.6} s is more than half a frame away from the expected grid")]
    OffGrid { line: usize, time: f64 },
    #[error(transparent)]
    Track(#[from] TrackError),
}

fn malformed(line: usize, message: impl Into<String>) -> CsvError {
    CsvError::Malformed {
        line,
        message: message.into(),
    }
}

fn read_text(path: &Path) -> Result<String, CsvError> {
    fs::read_to_string(path).map_err(|source| CsvError::Read {
        path: path.to_path_buf(),
        source,
    })
}

fn write_text(path: &Path, text: &str) -> Result<(), CsvError> {
    fs::write(path, text).map_err(|source| CsvError::Write {
        path: path.to_path_buf(),
        source,
    })
}

fn push_freq(out: &mut String, value: Option<f64>) {
    if let Some(f) = value {
        write!(out, "{f:.4}").unwrap();
    }
}

fn parse_number(field: &str, line: usize, what: &str) -> Result<f64, CsvError> {
    let value: f64 = field
        .trim()
        .parse()
        .map_err(|_| malformed(line, format!("{what} `{field}` is not a number")))?;
    if !value.is_finite() {
        return Err(malformed(line, format!("{what} `{field}` is not finite")));
    }
    Ok(value)
}

fn parse_freq(field: &str, line: usize) -> Result<Option<f64>, CsvError> {
    if field.trim().is_empty() {
        return Ok(None);
    }
    let f = parse_number(field, line, "frequency")?;
    if f <= 0.0 {
        return Err(malformed(line, format!("frequency {f} is not positive")));
    }
    Ok(Some(f))
}

/// Header fields and data rows, with 1-based line numbers. Blank lines are
/// skipped and fields are trimmed.
fn split_rows(text: &str) -> Result<(Vec<String>, Vec<(usize, StringRecord)>), CsvError> {
    let mut reader = ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(Trim::All)
        .from_reader(text.as_bytes());
    let mut records = reader.records();
    let header = records.next().ok_or(CsvError::MissingHeader)?.map_err(syntax)?;
    let header = header.iter().map(str::to_string).collect();
    let rows = records
        .map(|r| {
            let r = r.map_err(syntax)?;
            let line = r.position().map_or(0, |p| p.line() as usize);
            Ok((line, r))
        })
        .collect::<Result<_, CsvError>>()?;
    Ok((header, rows))
}

fn syntax(e: ::csv::Error) -> CsvError {
    let line = e.position().map_or(0, |p| p.line() as usize);
    malformed(line, e.to_string())
}

/// Which of the two formats a header line belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsvKind {
    Single,
    Multi { voices: usize },
}

fn classify(header: &[String]) -> Result<CsvKind, CsvError> {
    let bad = || CsvError::BadHeader(header.join(","));
    if header.first().map(String::as_str) != Some("time_sec") {
        return Err(bad());
    }
    match header.get(1).map(String::as_str) {
        Some("f0_hz") => match header.len() {
            2 => Ok(CsvKind::Single),
            3 if header[2] == "voicing_prob" => Ok(CsvKind::Single),
            _ => Err(bad()),
        },
        Some(_) => {
            let numbered = header[1..]
                .iter()
                .enumerate()
                .all(|(k, h)| *h == format!("f0_{}", k + 1));
            if numbered {
                Ok(CsvKind::Multi {
                    voices: header.len() - 1,
                })
            } else {
                Err(bad())
            }
        }
        None => Err(bad()),
    }
}

pub fn detect_kind(text: &str) -> Result<CsvKind, CsvError> {
    classify(&split_rows(text)?.0)
}

pub fn format_f0_csv(track: &F0Track) -> String {
    let mut out = String::with_capacity(32 * (track.len() + 1));
    out.push_str(F0_HEADER);
    out.push('\n');
    for ((t, v), p) in track.times().iter().zip(track.values()).zip(track.voicing_prob()) {
        write!(out, "{t:.6},").unwrap();
        push_freq(&mut out, *v);
        writeln!(out, ",{p:.4}").unwrap();
    }
    out
}

/// Parses a single-track file. The `voicing_prob` column may be omitted, in
/// which case voiced frames get probability 1. `fallback_step` sets the grid
/// step of files with fewer than two rows.
pub fn parse_f0_csv(text: &str, fallback_step: f64) -> Result<F0Track, CsvError> {
    let (header, rows) = split_rows(text)?;
    if classify(&header)? != CsvKind::Single {
        return Err(CsvError::BadHeader(header.join(",")));
    }
    let columns = header.len();
    let mut times = Vec::with_capacity(rows.len());
    let mut values = Vec::with_capacity(rows.len());
    let mut probs = Vec::with_capacity(rows.len());
    for (line, fields) in rows {
        if fields.len() != columns {
            return Err(malformed(line, format!("expected {columns} fields, found {}", fields.len())));
        }
        times.push(parse_number(&fields[0], line, "time")?);
        let value = parse_freq(&fields[1], line)?;
        let prob = match fields.get(2) {
            Some(field) => {
                let p = parse_number(field, line, "voicing probability")?;
                if !(0.0..=1.0).contains(&p) {
                    return Err(malformed(line, format!("voicing probability {p} outside [0, 1]")));
                }
                p
            }
            None => f64::from(u8::from(value.is_some())),
        };
        values.push(value);
        probs.push(prob);
    }
    let grid = TimeGrid::infer(times, fallback_step)?;
    Ok(F0Track::new(grid, values, probs)?)
}

pub fn write_f0_csv(track: &F0Track, path: &Path) -> Result<(), CsvError> {
    write_text(path, &format_f0_csv(track))
}

pub fn read_f0_csv(path: &Path, fallback_step: f64) -> Result<F0Track, CsvError> {
    parse_f0_csv(&read_text(path)?, fallback_step)
}

pub fn format_multif0_csv(track: &MultiF0Track) -> String {
    let k = track.num_voices();
    let mut out = String::with_capacity((12 + 10 * k) * (track.len() + 1));
    out.push_str("time_sec");
    for v in 1..=k {
        write!(out, ",f0_{v}").unwrap();
    }
    out.push('\n');
    for (t, time) in track.grid().times().iter().enumerate() {
        write!(out, "{time:.6}").unwrap();
        for voice in track.voices() {
            out.push(',');
            push_freq(&mut out, voice.values()[t]);
        }
        out.push('\n');
    }
    out
}

struct MultiRows {
    times: Vec<f64>,
    lines: Vec<usize>,
    /// Row-major, one entry per voice.
    values: Vec<Vec<Option<f64>>>,
    voices: usize,
}

fn parse_multi_rows(text: &str) -> Result<MultiRows, CsvError> {
    let (header, rows) = split_rows(text)?;
    let voices = match classify(&header)? {
        CsvKind::Multi { voices } => voices,
        CsvKind::Single => return Err(CsvError::BadHeader(header.join(","))),
    };
    let mut parsed = MultiRows {
        times: Vec::with_capacity(rows.len()),
        lines: Vec::with_capacity(rows.len()),
        values: Vec::with_capacity(rows.len()),
        voices,
    };
    for (line, fields) in rows {
        if fields.len() != voices + 1 {
            return Err(malformed(line, format!("expected {} fields, found {}", voices + 1, fields.len())));
        }
        parsed.times.push(parse_number(&fields[0], line, "time")?);
        parsed.lines.push(line);
        parsed.values.push(
            fields
                .iter()
                .skip(1)
                .map(|f| parse_freq(f, line))
                .collect::<Result<_, _>>()?,
        );
    }
    Ok(parsed)
}

fn voices_from_columns(grid: &TimeGrid, columns: Vec<Vec<Option<f64>>>) -> Result<MultiF0Track, CsvError> {
    let voices = columns
        .into_iter()
        .map(|values| F0Track::from_values(grid.clone(), values))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(MultiF0Track::new(voices)?)
}

/// Parses a multi-F0 file on the grid its own time column describes.
pub fn parse_multif0_csv(text: &str, fallback_step: f64) -> Result<MultiF0Track, CsvError> {
    let rows = parse_multi_rows(text)?;
    let grid = TimeGrid::infer(rows.times, fallback_step)?;
    let mut columns = vec![Vec::with_capacity(grid.len()); rows.voices];
    for row in rows.values {
        for (column, value) in columns.iter_mut().zip(row) {
            column.push(value);
        }
    }
    voices_from_columns(&grid, columns)
}

/// Places multi-F0 rows onto `grid`. Each row goes to the frame nearest its
/// time, which must lie within half a frame step; when several rows land on
/// one frame the closest wins. Frames without a row are unvoiced.
pub fn align_multif0_csv(text: &str, grid: &TimeGrid) -> Result<MultiF0Track, CsvError> {
    let rows = parse_multi_rows(text)?;
    let mut columns = vec![vec![None; grid.len()]; rows.voices];
    let mut best = vec![f64::INFINITY; grid.len()];
    for ((&time, &line), row) in rows.times.iter().zip(&rows.lines).zip(rows.values) {
        let t = grid.nearest_frame(time).ok_or(CsvError::OffGrid { line, time })?;
        let dist = (grid.times()[t] - time).abs();
        if dist < best[t] {
            best[t] = dist;
            for (column, value) in columns.iter_mut().zip(row) {
                column[t] = value;
            }
        }
    }
    voices_from_columns(grid, columns)
}

pub fn write_multif0_csv(track: &MultiF0Track, path: &Path) -> Result<(), CsvError> {
    write_text(path, &format_multif0_csv(track))
}

pub fn read_multif0_csv(path: &Path, fallback_step: f64) -> Result<MultiF0Track, CsvError> {
    parse_multif0_csv(&read_text(path)?, fallback_step)
}

/// Reads an externally produced multi-F0 file onto the analysis grid.
pub fn import_multif0_csv(path: &Path, grid: &TimeGrid) -> Result<MultiF0Track, CsvError> {
    align_multif0_csv(&read_text(path)?, grid)
}

/// Contents of a track file of either format.
#[derive(Debug, Clone, PartialEq)]
pub enum TrackFile {
    Single(F0Track),
    Multi(MultiF0Track),
}

impl TrackFile {
    /// Every track in the file, voices in column order.
    pub fn tracks(&self) -> Vec<&F0Track> {
        match self {
            TrackFile::Single(track) => vec![track],
            TrackFile::Multi(multi) => multi.voices().iter().collect(),
        }
    }

    /// The single track, or the first voice of a multi-F0 file.
    pub fn primary(&self) -> &F0Track {
        match self {
            TrackFile::Single(track) => track,
            TrackFile::Multi(multi) => multi.first_voice(),
        }
    }
}

pub fn parse_track_file(text: &str, fallback_step: f64) -> Result<TrackFile, CsvError> {
    match detect_kind(text)? {
        CsvKind::Single => parse_f0_csv(text, fallback_step).map(TrackFile::Single),
        CsvKind::Multi { .. } => parse_multif0_csv(text, fallback_step).map(TrackFile::Multi),
    }
}

pub fn read_track_file(path: &Path, fallback_step: f64) -> Result<TrackFile, CsvError> {
    parse_track_file(&read_text(path)?, fallback_step)
}
