use rayon::prelude::*;

use super::salience::SalienceMap;
use super::MultiF0Error;
use crate::spectral::Spectrogram;

/// Interior local maxima of `values`, as lattice indices. A flat run that
/// rises on its left and falls on its right counts once, at its centre.
fn local_maxima(values: &[f64]) -> Vec<usize> {
    let mut peaks = Vec::new();
    let mut i = 1;
    while i + 1 < values.len() {
        if values[i] > values[i - 1] {
            let mut j = i;
            while j + 1 < values.len() && values[j + 1] == values[i] {
                j += 1;
            }
            if j + 1 < values.len() && values[j + 1] < values[i] {
                peaks.push((i + j) / 2);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    peaks
}

fn pick_frame(
    values: &[f64],
    axis: &[f64],
    rel_threshold: f64,
    max_polyphony: usize,
    min_gap_hz: f64,
    accept: impl Fn(usize) -> bool,
) -> Vec<f64> {
    let frame_max = values.iter().copied().fold(0.0, f64::max);
    if frame_max <= 0.0 {
        return Vec::new();
    }
    let floor = rel_threshold * frame_max;
    let mut peaks: Vec<usize> = local_maxima(values)
        .into_iter()
        .filter(|&k| values[k] >= floor && accept(k))
        .collect();
    peaks.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));

    // Lattice points closer than one STFT bin read the same bins, so only the
    // strongest of such a cluster is kept.
    let mut kept: Vec<f64> = Vec::with_capacity(max_polyphony);
    for k in peaks {
        if kept.len() == max_polyphony {
            break;
        }
        let f = axis[k];
        if kept.iter().all(|&g| (f - g).abs() >= min_gap_hz) {
            kept.push(f);
        }
    }
    kept.sort_by(f64::total_cmp);
    kept
}

/// Per frame, the F0s of the strongest salience peaks in ascending order.
/// Peaks below `rel_threshold` times the frame maximum are dropped and at
/// most `max_polyphony` survive; a silent frame yields an empty set.
pub fn peak_pick(
    sal: &SalienceMap,
    rel_threshold: f64,
    max_polyphony: usize,
) -> Result<Vec<Vec<f64>>, MultiF0Error> {
    check_pick_args(rel_threshold, max_polyphony)?;
    let axis = sal.f0_axis();
    Ok((0..sal.num_frames())
        .into_par_iter()
        .map(|t| pick_frame(sal.frame(t), axis, rel_threshold, max_polyphony, sal.resolution_hz(), |_| true))
        .collect())
}

/// Like [`peak_pick`], but a peak only counts if the spectrum at its own
/// fundamental reaches `fundamental_floor` times the frame's largest
/// magnitude. Harmonic summation also scores every `f0 / k` of a real tone,
/// since those lattice points collect the tone's partials; such sub-harmonic
/// ghosts have no energy at their own fundamental. Rejected peaks do not use
/// up polyphony. A floor of 0 accepts everything.
pub fn peak_pick_with_fundamental(
    sal: &SalienceMap,
    spec: &Spectrogram,
    rel_threshold: f64,
    max_polyphony: usize,
    fundamental_floor: f64,
) -> Result<Vec<Vec<f64>>, MultiF0Error> {
    check_pick_args(rel_threshold, max_polyphony)?;
    if !(0.0..1.0).contains(&fundamental_floor) {
        return Err(MultiF0Error::InvalidSettings(format!(
            "fundamental floor {fundamental_floor} outside [0, 1)"
        )));
    }
    if spec.num_frames() != sal.num_frames() {
        return Err(MultiF0Error::FrameCountMismatch {
            frames: spec.num_frames(),
            grid: sal.num_frames(),
        });
    }
    let axis = sal.f0_axis();
    let bins = spec.bin_grid();
    let fundamental_bins = axis
        .iter()
        .map(|&f| bins.freq_to_bin(f).map_err(MultiF0Error::from))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((0..sal.num_frames())
        .into_par_iter()
        .map(|t| {
            let mags = spec.frame(t);
            let loudest = mags[1..].iter().copied().fold(0.0, f64::max);
            let accept = |k: usize| mags[fundamental_bins[k]] >= fundamental_floor * loudest;
            pick_frame(sal.frame(t), axis, rel_threshold, max_polyphony, sal.resolution_hz(), accept)
        })
        .collect())
}

fn check_pick_args(rel_threshold: f64, max_polyphony: usize) -> Result<(), MultiF0Error> {
    if max_polyphony == 0 {
        return Err(MultiF0Error::InvalidSettings("max polyphony must be at least 1".into()));
    }
    if !(rel_threshold > 0.0 && rel_threshold < 1.0) {
        return Err(MultiF0Error::InvalidSettings(format!(
            "relative threshold {rel_threshold} outside (0, 1)"
        )));
    }
    Ok(())
}
