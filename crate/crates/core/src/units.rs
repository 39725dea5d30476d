//! Frequency/cents conversions and the log-spaced pitch lattice shared by the
//! HMM and the salience function.

/// Signed distance from `from` to `to` in cents.
pub fn cents_between(from: f64, to: f64) -> f64 {
    1200.0 * (to / from).log2()
}

/// Log-spaced frequencies starting at `f_min`, `resolution_cents` apart, not
/// exceeding `f_max`.
///
/// The lattice holds `floor(1200 * log2(f_max / f_min) / resolution_cents)`
/// points, so `f_max` itself is only included when the span is not an exact
/// multiple of the resolution. For 55..1760 Hz at 20 cents this gives 300
/// points, 55 Hz up to 20 cents below 1760 Hz.
pub fn pitch_lattice(f_min: f64, f_max: f64, resolution_cents: f64) -> Vec<f64> {
    if !(f_min > 0.0 && f_max > f_min && resolution_cents > 0.0) {
        return Vec::new();
    }
    let span = cents_between(f_min, f_max) / resolution_cents;
    // Absorb float noise so that exact multiples don't lose a point.
    let count = (span + 1e-9).floor() as usize;
    (0..count)
        .map(|k| f_min * (k as f64 * resolution_cents / 1200.0).exp2())
        .collect()
}
