//! Merges a monophonic PYIN track `P` into the first voice `M1` of a
//! multi-F0 result.
//!
//! Both tracks are quantized to STFT bins. Where `M1` is voiced, `P`'s
//! frequency replaces it if the two lie within `bin_tolerance` bins. Where
//! `M1` is unvoiced, `P` fills the frame only if `M1` is unvoiced on every
//! frame from `t - window_before` to `t + window_after`; frames beyond the
//! clip count as unvoiced. The window always reads the original `M1`.

use rayon::prelude::*;

use crate::spectral::BinGrid;
use crate::track::{F0Track, MultiF0Track, TrackError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FusionParams {
    pub bin_tolerance: usize,
    pub window_before: usize,
    pub window_after: usize,
    pub grid: BinGrid,
}

impl Default for FusionParams {
    fn default() -> Self {
        FusionParams {
            bin_tolerance: 2,
            window_before: 5,
            window_after: 4,
            grid: BinGrid::default(),
        }
    }
}

/// A voiced frame's frequency together with its STFT bin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinnedValue {
    pub frequency: f64,
    pub bin: usize,
}

/// An [`F0Track`] with every voiced frame assigned to its nearest bin.
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedTrack {
    track: F0Track,
    frames: Vec<Option<BinnedValue>>,
}

impl BinnedTrack {
    pub fn track(&self) -> &F0Track {
        &self.track
    }

    pub fn frames(&self) -> &[Option<BinnedValue>] {
        &self.frames
    }

    pub fn bins(&self) -> impl Iterator<Item = Option<usize>> + '_ {
        self.frames.iter().map(|f| f.map(|b| b.bin))
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

/// Voiced frequencies above Nyquist have no bin; such frames are treated as
/// unvoiced for the comparison.
pub fn quantize_track(track: &F0Track, grid: &BinGrid) -> BinnedTrack {
    let frames = track
        .values()
        .iter()
        .map(|v| {
            v.and_then(|frequency| {
                grid.freq_to_bin(frequency)
                    .ok()
                    .map(|bin| BinnedValue { frequency, bin })
            })
        })
        .collect();
    BinnedTrack {
        track: track.clone(),
        frames,
    }
}

fn check_pair(m1: &BinnedTrack, p: &BinnedTrack) -> Result<(), TrackError> {
    m1.track.grid().ensure_matches(p.track.grid())
}

/// Frame value and voicing probability after substitution at a frame where
/// `M1` is voiced.
fn substitute_frame(m1: &F0Track, p: &F0Track, t: usize, mv: BinnedValue, pv: Option<BinnedValue>, tol: usize) -> (Option<f64>, f64) {
    match pv {
        Some(pv) if pv.bin.abs_diff(mv.bin) <= tol => (Some(pv.frequency), p.voicing_prob()[t]),
        _ => (Some(mv.frequency), m1.voicing_prob()[t]),
    }
}

/// True when `M1` is unvoiced on every frame of the window around `t`.
fn window_unvoiced(m1: &[Option<BinnedValue>], t: usize, params: &FusionParams) -> bool {
    let lo = t.saturating_sub(params.window_before);
    let hi = (t + params.window_after).min(m1.len() - 1);
    m1[lo..=hi].iter().all(Option::is_none)
}

fn fill_frame(m1: &[Option<BinnedValue>], p: &F0Track, t: usize, pv: Option<BinnedValue>, params: &FusionParams) -> (Option<f64>, f64) {
    match pv {
        Some(pv) if window_unvoiced(m1, t, params) => (Some(pv.frequency), p.voicing_prob()[t]),
        _ => (None, 0.0),
    }
}

fn assemble(template: &F0Track, frames: Vec<(Option<f64>, f64)>) -> F0Track {
    let (values, probs) = frames.into_iter().unzip();
    F0Track::new(template.grid().clone(), values, probs).expect("values come from valid tracks")
}

/// Applies the substitution rule to `M1`-voiced frames; other frames keep
/// `M1` as it is.
pub fn substitute_m1(m1: &BinnedTrack, p: &BinnedTrack, params: &FusionParams) -> Result<F0Track, TrackError> {
    check_pair(m1, p)?;
    let frames = (0..m1.len())
        .map(|t| match m1.frames[t] {
            Some(mv) => substitute_frame(&m1.track, &p.track, t, mv, p.frames[t], params.bin_tolerance),
            None => (m1.track.values()[t], m1.track.voicing_prob()[t]),
        })
        .collect();
    Ok(assemble(&m1.track, frames))
}

/// Applies the gap-filling rule to `M1`-unvoiced frames; `M1`-voiced frames
/// are passed through.
pub fn fill_gaps(m1: &BinnedTrack, p: &BinnedTrack, params: &FusionParams) -> Result<F0Track, TrackError> {
    check_pair(m1, p)?;
    let frames = (0..m1.len())
        .map(|t| match m1.frames[t] {
            Some(mv) => (Some(mv.frequency), m1.track.voicing_prob()[t]),
            None => fill_frame(&m1.frames, &p.track, t, p.frames[t], params),
        })
        .collect();
    Ok(assemble(&m1.track, frames))
}

/// Fused first voice. Values are the unquantized frequencies of whichever
/// source was chosen, with that source's voicing probability.
pub fn fuse_first_voice(m1: &F0Track, p: &F0Track, params: &FusionParams) -> Result<F0Track, TrackError> {
    m1.grid().ensure_matches(p.grid())?;
    let bm = quantize_track(m1, &params.grid);
    let bp = quantize_track(p, &params.grid);
    let frames = (0..bm.len())
        .into_par_iter()
        .map(|t| match bm.frames[t] {
            Some(mv) => substitute_frame(m1, p, t, mv, bp.frames[t], params.bin_tolerance),
            None => fill_frame(&bm.frames, p, t, bp.frames[t], params),
        })
        .collect();
    Ok(assemble(m1, frames))
}

/// `original` with its first voice replaced.
pub fn merge_into_multif0(fused_m1: &F0Track, original: &MultiF0Track) -> Result<MultiF0Track, TrackError> {
    original.grid().ensure_matches(fused_m1.grid())?;
    let mut voices = original.voices().to_vec();
    voices[0] = fused_m1.clone();
    MultiF0Track::new(voices)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::track::TimeGrid;

    fn bin_freq(k: usize) -> f64 {
        BinGrid::default().bin_to_freq(k).unwrap()
    }

    fn track(bins: &[Option<usize>]) -> F0Track {
        let grid = TimeGrid::uniform(0.0, 0.01, bins.len());
        F0Track::from_values(grid, bins.iter().map(|b| b.map(bin_freq)).collect()).unwrap()
    }

    #[test]
    fn quantize_examples() {
        let grid = BinGrid::default();
        let t = F0Track::from_values(TimeGrid::uniform(0.0, 0.01, 3), vec![Some(440.0), None, Some(bin_freq(20))]).unwrap();
        let q = quantize_track(&t, &grid);
        assert_eq!(q.bins().collect::<Vec<_>>(), vec![Some(20), None, Some(20)]);
        assert_eq!(q.frames()[0].unwrap().frequency, 440.0);
    }

    #[test]
    fn substitution_examples() {
        let params = FusionParams::default();
        let g = &params.grid;
        let m1 = quantize_track(&track(&[Some(20), Some(20), Some(20)]), g);
        let p = quantize_track(&track(&[Some(21), Some(25), None]), g);
        let out = substitute_m1(&m1, &p, &params).unwrap();
        assert_eq!(out.values(), &[Some(bin_freq(21)), Some(bin_freq(20)), Some(bin_freq(20))]);
    }

    #[test]
    fn gap_filling_examples() {
        let params = FusionParams::default();
        let g = &params.grid;
        let m1 = quantize_track(&track(&[None; 20]), g);
        let mut pb = vec![None; 20];
        pb[10] = Some(20);
        let out = fill_gaps(&m1, &quantize_track(&track(&pb), g), &params).unwrap();
        assert_eq!(out.values()[10], Some(bin_freq(20)));

        let mut mb = vec![None; 20];
        mb[12] = Some(20);
        let out = fill_gaps(&quantize_track(&track(&mb), g), &quantize_track(&track(&[Some(21); 20]), g), &params).unwrap();
        assert_eq!(out.values()[10], None);
        assert_eq!(out.values()[12], Some(bin_freq(20)));

        let mut mb = vec![None; 4];
        mb.extend(vec![Some(20); 6]);
        let out = fill_gaps(&quantize_track(&track(&mb), g), &quantize_track(&track(&[Some(21); 10]), g), &params).unwrap();
        assert!(out.values()[..4].iter().all(Option::is_none));
    }

    #[test]
    fn interleaved_example() {
        let mut mb = vec![Some(20); 10];
        mb.extend(vec![None; 20]);
        let p = track(&[Some(21); 30]);
        let out = fuse_first_voice(&track(&mb), &p, &FusionParams::default()).unwrap();
        for t in 0..30 {
            let expected = if (10..15).contains(&t) { None } else { Some(bin_freq(21)) };
            assert_eq!(out.values()[t], expected, "frame {t}");
        }
    }

    #[test]
    fn window_bounds_are_inclusive() {
        // M1 voiced at t + 4 blocks t; voiced at t + 5 does not.
        let params = FusionParams::default();
        let p = track(&[Some(21); 12]);
        let mut mb = vec![None; 12];
        mb[9] = Some(20);
        let out = fuse_first_voice(&track(&mb), &p, &params).unwrap();
        assert_eq!(out.values()[4], Some(bin_freq(21)));
        assert_eq!(out.values()[5], None);
        // ...and voiced at t - 5 blocks t; t - 6 does not.
        let mut mb = vec![None; 12];
        mb[0] = Some(20);
        let out = fuse_first_voice(&track(&mb), &p, &params).unwrap();
        assert_eq!(out.values()[5], None);
        assert_eq!(out.values()[6], Some(bin_freq(21)));
    }

    #[test]
    fn voicing_probability_follows_source() {
        let grid = TimeGrid::uniform(0.0, 0.01, 2);
        let m1 = F0Track::new(grid.clone(), vec![Some(bin_freq(20)), Some(bin_freq(20))], vec![0.7, 0.7]).unwrap();
        let p = F0Track::new(grid, vec![Some(bin_freq(21)), Some(bin_freq(30))], vec![0.9, 0.9]).unwrap();
        let out = fuse_first_voice(&m1, &p, &FusionParams::default()).unwrap();
        assert_eq!(out.voicing_prob(), &[0.9, 0.7]);
    }

    #[test]
    fn grids_must_match() {
        let err = fuse_first_voice(&track(&[None; 3]), &track(&[None; 4]), &FusionParams::default());
        assert!(matches!(err, Err(TrackError::GridMismatch { .. })));
    }

    #[test]
    fn merge_replaces_first_voice_only() {
        let a = track(&[Some(20), None]);
        let b = track(&[Some(30), Some(31)]);
        let original = MultiF0Track::new(vec![a, b.clone()]).unwrap();
        let fused = track(&[Some(21), Some(21)]);
        let merged = merge_into_multif0(&fused, &original).unwrap();
        assert_eq!(merged.voices()[0], fused);
        assert_eq!(merged.voices()[1], b);
        assert_eq!(merge_into_multif0(original.first_voice(), &original).unwrap(), original);
    }
}
