use super::pyin::FrameCandidates;
use super::viterbi::{viterbi, Transitions};
use super::PitchError;
use crate::track::{F0Track, TimeGrid};
use crate::units::{cents_between, pitch_lattice};

/// Smallest emission probability used in the log domain, so that a frame
/// with all mass on one state never zeroes out every path.
const EMISSION_FLOOR: f64 = 1e-12;

/// Pitch range, lattice resolution and transition model of the PYIN HMM.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HmmSettings {
    pub f_min: f64,
    pub f_max: f64,
    pub resolution_cents: f64,
    /// Largest pitch change between consecutive frames; the transition
    /// kernel is a triangle over this range.
    pub max_slew_cents: f64,
    /// Probability of switching between voiced and unvoiced per frame.
    pub switch_prob: f64,
}

impl Default for HmmSettings {
    fn default() -> Self {
        HmmSettings {
            f_min: 55.0,
            f_max: 1760.0,
            resolution_cents: 20.0,
            max_slew_cents: 80.0,
            switch_prob: 0.01,
        }
    }
}

/// Two copies of a log-spaced pitch lattice: state `i < n` is "voiced at
/// lattice point i", state `n + i` is "unvoiced, last near lattice point i".
#[derive(Debug, Clone, PartialEq)]
pub struct HmmModel {
    settings: HmmSettings,
    pitch_bins: Vec<f64>,
    slew_bins: usize,
    /// Triangle weight by lattice distance `0..=slew_bins`.
    kernel: Vec<f64>,
    /// Per source lattice point, the kernel mass that stays on the lattice.
    row_mass: Vec<f64>,
}

pub fn build_hmm(settings: &HmmSettings) -> Result<HmmModel, PitchError> {
    let s = settings;
    if !(s.f_min > 0.0 && s.f_max > s.f_min && s.f_max.is_finite()) {
        return Err(PitchError::InvalidSettings(format!(
            "pitch range [{}, {}] is empty",
            s.f_min, s.f_max
        )));
    }
    if !(s.resolution_cents > 0.0) {
        return Err(PitchError::InvalidSettings("resolution must be positive".into()));
    }
    if !(s.max_slew_cents >= 0.0) {
        return Err(PitchError::InvalidSettings("max slew must be non-negative".into()));
    }
    if !(0.0..=1.0).contains(&s.switch_prob) {
        return Err(PitchError::InvalidSettings("switch probability outside [0, 1]".into()));
    }
    let pitch_bins = pitch_lattice(s.f_min, s.f_max, s.resolution_cents);
    if pitch_bins.is_empty() {
        return Err(PitchError::EmptyLattice);
    }
    let n = pitch_bins.len();
    let slew_bins = (s.max_slew_cents / s.resolution_cents + 1e-9).floor() as usize;
    let kernel: Vec<f64> = (0..=slew_bins)
        .map(|d| (slew_bins + 1 - d) as f64 / (slew_bins + 1) as f64)
        .collect();
    let row_mass = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(slew_bins);
            let hi = (i + slew_bins).min(n - 1);
            (lo..=hi).map(|j| kernel[i.abs_diff(j)]).sum()
        })
        .collect();
    Ok(HmmModel {
        settings: *settings,
        pitch_bins,
        slew_bins,
        kernel,
        row_mass,
    })
}

impl HmmModel {
    pub fn settings(&self) -> &HmmSettings {
        &self.settings
    }

    pub fn pitch_bins(&self) -> &[f64] {
        &self.pitch_bins
    }

    pub fn num_pitch_bins(&self) -> usize {
        self.pitch_bins.len()
    }

    pub fn num_states(&self) -> usize {
        2 * self.pitch_bins.len()
    }

    pub fn is_voiced(&self, state: usize) -> bool {
        state < self.pitch_bins.len()
    }

    pub fn state_frequency(&self, state: usize) -> f64 {
        self.pitch_bins[state % self.pitch_bins.len()]
    }

    pub fn transition_prob(&self, from: usize, to: usize) -> f64 {
        let n = self.pitch_bins.len();
        let (pf, pt) = (from % n, to % n);
        let dist = pf.abs_diff(pt);
        if dist > self.slew_bins {
            return 0.0;
        }
        let voicing = if self.is_voiced(from) == self.is_voiced(to) {
            1.0 - self.settings.switch_prob
        } else {
            self.settings.switch_prob
        };
        voicing * self.kernel[dist] / self.row_mass[pf]
    }

    /// Full `num_states x num_states` matrix, rows indexed by source.
    pub fn transition_matrix(&self) -> Vec<Vec<f64>> {
        let m = self.num_states();
        (0..m)
            .map(|from| (0..m).map(|to| self.transition_prob(from, to)).collect())
            .collect()
    }

    pub fn transitions(&self) -> Transitions {
        let n = self.pitch_bins.len();
        let incoming = (0..self.num_states())
            .map(|to| {
                let pt = to % n;
                let lo = pt.saturating_sub(self.slew_bins);
                let hi = (pt + self.slew_bins).min(n - 1);
                [0, n]
                    .iter()
                    .flat_map(|&offset| (lo..=hi).map(move |p| p + offset))
                    .filter_map(|from| {
                        let p = self.transition_prob(from, to);
                        (p > 0.0).then(|| (from, p.ln()))
                    })
                    .collect()
            })
            .collect();
        Transitions::from_incoming(incoming)
    }

    pub fn initial_log_probs(&self) -> Vec<f64> {
        vec![-(self.num_states() as f64).ln(); self.num_states()]
    }

    /// Lattice point nearest (in cents) to `f`, or `None` outside
    /// `[f_min, f_max]`.
    pub fn nearest_bin(&self, f: f64) -> Option<usize> {
        if !(f >= self.settings.f_min && f <= self.settings.f_max) {
            return None;
        }
        let k = (cents_between(self.settings.f_min, f) / self.settings.resolution_cents).round();
        Some((k as usize).min(self.pitch_bins.len() - 1))
    }

    /// Emission probabilities of one frame. A voiced state gets the mass of
    /// the candidates nearest to its lattice point; every unvoiced state gets
    /// an equal share of the remaining mass.
    pub fn emission_probs(&self, frame: &FrameCandidates) -> Vec<f64> {
        let n = self.pitch_bins.len();
        let mut probs = vec![0.0; 2 * n];
        let mut voiced = 0.0;
        for c in &frame.candidates {
            if let Some(k) = self.nearest_bin(c.frequency) {
                probs[k] += c.probability;
                voiced += c.probability;
            }
        }
        let unvoiced = (1.0 - voiced).max(0.0) / n as f64;
        probs[n..].iter_mut().for_each(|p| *p = unvoiced);
        probs
    }

    pub fn log_emissions(&self, frame: &FrameCandidates) -> Vec<f64> {
        self.emission_probs(frame)
            .into_iter()
            .map(|p| p.max(EMISSION_FLOOR).ln())
            .collect()
    }
}

/// Maximum a posteriori pitch path.
///
/// Voiced states report their lattice frequency, replaced by the nearest
/// candidate of that frame when one lies within half a lattice step. The
/// voicing probability of a frame is its total candidate mass.
pub fn viterbi_decode(
    observations: &[FrameCandidates],
    model: &HmmModel,
    grid: TimeGrid,
) -> Result<F0Track, PitchError> {
    if observations.is_empty() {
        return Err(PitchError::NoFrames);
    }
    let log_emissions: Vec<Vec<f64>> = observations.iter().map(|o| model.log_emissions(o)).collect();
    let (path, _) = viterbi(&model.initial_log_probs(), &log_emissions, &model.transitions());
    let half_step = model.settings.resolution_cents / 2.0;
    let values = path
        .iter()
        .zip(observations)
        .map(|(&state, obs)| {
            if !model.is_voiced(state) {
                return None;
            }
            let lattice_f = model.state_frequency(state);
            let refined = obs
                .candidates
                .iter()
                .filter(|c| c.frequency >= model.settings.f_min && c.frequency <= model.settings.f_max)
                .map(|c| (cents_between(lattice_f, c.frequency).abs(), c.frequency))
                .filter(|&(dist, _)| dist <= half_step)
                .min_by(|a, b| a.0.total_cmp(&b.0))
                .map(|(_, f)| f);
            Some(refined.unwrap_or(lattice_f))
        })
        .collect();
    let voicing = observations
        .iter()
        .map(|o| o.voiced_probability().clamp(0.0, 1.0))
        .collect();
    Ok(F0Track::new(grid, values, voicing)?)
}
