use super::MultiF0Error;
use crate::track::{F0Track, MultiF0Track, TimeGrid};
use crate::units::cents_between;

/// Largest pitch change, in cents, a voice may make between frames.
pub const VOICE_CONTINUITY_CENTS: f64 = 100.0;

/// [`assign_voices_with_continuity`] with [`VOICE_CONTINUITY_CENTS`].
pub fn assign_voices(frame_sets: &[Vec<f64>], grid: &TimeGrid) -> Result<MultiF0Track, MultiF0Error> {
    assign_voices_with_continuity(frame_sets, grid, VOICE_CONTINUITY_CENTS)
}

/// Greedy voice linking.
///
/// In voice order, each existing voice takes the unclaimed F0 nearest to its
/// last voiced value if that is within `continuity_cents`. The remaining
/// F0s, in ascending order, go to voices left unvoiced at this frame (lowest
/// index first) and then start new voices. Voice 0 is therefore the voice
/// started by the lowest F0 of the first non-empty frame. Every input value
/// lands in exactly one voice.
pub fn assign_voices_with_continuity(
    frame_sets: &[Vec<f64>],
    grid: &TimeGrid,
    continuity_cents: f64,
) -> Result<MultiF0Track, MultiF0Error> {
    if frame_sets.len() != grid.len() {
        return Err(MultiF0Error::FrameCountMismatch {
            frames: frame_sets.len(),
            grid: grid.len(),
        });
    }
    let num_frames = frame_sets.len();
    let mut voices: Vec<Vec<Option<f64>>> = Vec::new();
    let mut last: Vec<f64> = Vec::new();

    for (t, set) in frame_sets.iter().enumerate() {
        let mut f0s = set.clone();
        f0s.sort_by(f64::total_cmp);
        let mut claimed = vec![false; f0s.len()];
        let mut current: Vec<Option<f64>> = vec![None; voices.len()];

        for (v, &prev) in last.iter().enumerate() {
            let nearest = f0s
                .iter()
                .enumerate()
                .filter(|&(i, _)| !claimed[i])
                .map(|(i, &f)| (i, cents_between(prev, f).abs()))
                .min_by(|a, b| a.1.total_cmp(&b.1));
            if let Some((i, dist)) = nearest {
                if dist <= continuity_cents {
                    claimed[i] = true;
                    current[v] = Some(f0s[i]);
                }
            }
        }

        let mut free = (0..current.len()).filter(|&v| current[v].is_none()).collect::<Vec<_>>().into_iter();
        for (i, &f) in f0s.iter().enumerate() {
            if claimed[i] {
                continue;
            }
            match free.next() {
                Some(v) => current[v] = Some(f),
                None => {
                    let mut column = vec![None; num_frames];
                    column.truncate(t);
                    voices.push(column);
                    last.push(f);
                    current.push(Some(f));
                }
            }
        }

        for (v, value) in current.into_iter().enumerate() {
            voices[v].push(value);
            if let Some(f) = value {
                last[v] = f;
            }
        }
    }

    if voices.is_empty() {
        voices.push(vec![None; num_frames]);
    }
    let tracks = voices
        .into_iter()
        .map(|values| F0Track::from_values(grid.clone(), values))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(MultiF0Track::new(tracks)?)
}
