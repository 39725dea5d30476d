use super::PitchError;

/// Lags eligible for picking, and the rate used to turn a lag into Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LagSearch {
    pub sample_rate: f64,
    pub min_lag: usize,
    pub max_lag: usize,
}

impl LagSearch {
    pub fn new(sample_rate: f64, min_lag: usize, max_lag: usize) -> Self {
        LagSearch {
            sample_rate,
            min_lag: min_lag.max(1),
            max_lag,
        }
    }

    /// Lags covering periods of `f_max`..`f_min`, capped so that every lag
    /// keeps a right-hand neighbour below `tau_max`.
    pub fn for_frequency_range(
        sample_rate: f64,
        f_min: f64,
        f_max: f64,
        tau_max: usize,
    ) -> Result<Self, PitchError> {
        if !(f_min > 0.0 && f_max > f_min) {
            return Err(PitchError::InvalidSettings(format!(
                "frequency range [{f_min}, {f_max}] is empty"
            )));
        }
        let min_lag = ((sample_rate / f_max).floor() as usize).max(1);
        let max_lag = ((sample_rate / f_min).ceil() as usize).min(tau_max.saturating_sub(1));
        if min_lag >= max_lag {
            return Err(PitchError::InvalidSettings(format!(
                "no lags between {min_lag} and {max_lag} for [{f_min}, {f_max}] Hz"
            )));
        }
        Ok(LagSearch::new(sample_rate, min_lag, max_lag))
    }

    pub fn lag_to_frequency(&self, lag: f64) -> f64 {
        self.sample_rate / lag
    }
}

/// Lags `tau` in the search range with `d_norm[tau] < d_norm[tau-1]` and
/// `d_norm[tau] <= d_norm[tau+1]`, in increasing order.
pub fn local_minima<'a>(d_norm: &'a [f64], search: &LagSearch) -> impl Iterator<Item = usize> + 'a {
    let lo = search.min_lag.max(1);
    let hi = search.max_lag.min(d_norm.len().saturating_sub(2));
    (lo..=hi).filter(move |&tau| d_norm[tau] < d_norm[tau - 1] && d_norm[tau] <= d_norm[tau + 1])
}

/// Smallest local-minimum lag whose normalised difference is below `threshold`.
pub fn yin_pick_lag(d_norm: &[f64], threshold: f64, search: &LagSearch) -> Option<usize> {
    local_minima(d_norm, search).find(|&tau| d_norm[tau] < threshold)
}

/// Fixed-threshold YIN: frequency of the first sub-threshold dip, refined by
/// parabolic interpolation; `None` when nothing dips below `threshold`.
pub fn yin_pick(d_norm: &[f64], threshold: f64, search: &LagSearch) -> Option<f64> {
    yin_pick_lag(d_norm, threshold, search)
        .map(|tau| search.lag_to_frequency(parabolic_refine(d_norm, tau)))
}

/// Vertex of the parabola through `(tau-1, tau, tau+1)`, clamped to
/// `tau +/- 0.5`. Flat or concave triples return `tau`.
pub fn parabolic_refine(d_norm: &[f64], tau: usize) -> f64 {
    if tau == 0 || tau + 1 >= d_norm.len() {
        return tau as f64;
    }
    let (a, b, c) = (d_norm[tau - 1], d_norm[tau], d_norm[tau + 1]);
    let curvature = a - 2.0 * b + c;
    if curvature <= 0.0 {
        return tau as f64;
    }
    let offset = (0.5 * (a - c) / curvature).clamp(-0.5, 0.5);
    tau as f64 + offset
}
