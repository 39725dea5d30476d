use std::sync::Arc;

use rustfft::{num_complex::Complex, Fft, FftPlanner};

use super::PitchError;

/// Differences smaller than this fraction of the frame energy at that lag are
/// indistinguishable from FFT roundoff and are set to zero.
const ROUNDOFF_FLOOR: f64 = 1e-10;

/// Difference function `d` over lags `0..=tau_max`, plus its cumulative-mean
/// normalisation once [`cmndf`] has run.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferenceFrame {
    d: Vec<f64>,
    d_norm: Option<Vec<f64>>,
}

impl DifferenceFrame {
    /// Wraps a precomputed difference function. `d[0]` is forced to zero and
    /// negative entries are clamped.
    pub fn from_d(mut d: Vec<f64>) -> Self {
        d.iter_mut().for_each(|v| *v = v.max(0.0));
        if let Some(first) = d.first_mut() {
            *first = 0.0;
        }
        DifferenceFrame { d, d_norm: None }
    }

    pub fn d(&self) -> &[f64] {
        &self.d
    }

    pub fn d_norm(&self) -> Option<&[f64]> {
        self.d_norm.as_deref()
    }

    pub fn tau_max(&self) -> usize {
        self.d.len().saturating_sub(1)
    }
}

/// Reusable FFT plans for evaluating the difference function on many frames
/// with the same window and maximum lag.
///
/// `d[tau] = sum_{j<W} x_j^2 + sum_{j<W} x_{j+tau}^2 - 2 sum_{j<W} x_j x_{j+tau}`;
/// the energy terms come from prefix sums and the cross term from one FFT
/// correlation.
pub struct DifferenceEngine {
    window: usize,
    tau_max: usize,
    fft_len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl DifferenceEngine {
    pub fn new(window: usize, tau_max: usize) -> Result<Self, PitchError> {
        if window == 0 {
            return Err(PitchError::InvalidSettings("correlation window must be positive".into()));
        }
        let fft_len = (window + tau_max).next_power_of_two();
        let mut planner = FftPlanner::new();
        Ok(DifferenceEngine {
            window,
            tau_max,
            fft_len,
            forward: planner.plan_fft_forward(fft_len),
            inverse: planner.plan_fft_inverse(fft_len),
        })
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn tau_max(&self) -> usize {
        self.tau_max
    }

    /// Samples needed per frame.
    pub fn frame_len(&self) -> usize {
        self.window + self.tau_max
    }

    pub fn compute(&self, frame: &[f64]) -> Result<DifferenceFrame, PitchError> {
        let (w, tau_max, n) = (self.window, self.tau_max, self.fft_len);
        if frame.len() < w + tau_max {
            return Err(PitchError::LagTooLarge {
                frame_len: frame.len(),
                window: w,
                tau_max,
            });
        }
        let x = &frame[..w + tau_max];

        let mut head: Vec<Complex<f64>> = vec![Complex::new(0.0, 0.0); n];
        let mut full: Vec<Complex<f64>> = vec![Complex::new(0.0, 0.0); n];
        for (h, &v) in head.iter_mut().zip(&x[..w]) {
            h.re = v;
        }
        for (f, &v) in full.iter_mut().zip(x) {
            f.re = v;
        }
        self.forward.process(&mut head);
        self.forward.process(&mut full);
        for (h, f) in head.iter_mut().zip(&full) {
            *h = h.conj() * f;
        }
        self.inverse.process(&mut head);
        let scale = 1.0 / n as f64;

        let mut prefix = Vec::with_capacity(x.len() + 1);
        prefix.push(0.0);
        let mut acc = 0.0;
        for &v in x {
            acc += v * v;
            prefix.push(acc);
        }
        let r0 = prefix[w];

        let mut d = Vec::with_capacity(tau_max + 1);
        d.push(0.0);
        for tau in 1..=tau_max {
            let shifted = prefix[tau + w] - prefix[tau];
            let cross = head[tau].re * scale;
            let value = r0 + shifted - 2.0 * cross;
            let floor = ROUNDOFF_FLOOR * (r0 + shifted);
            d.push(if value <= floor { 0.0 } else { value });
        }
        Ok(DifferenceFrame { d, d_norm: None })
    }
}

/// `d[tau] = sum_{j=0}^{W-1} (x_j - x_{j+tau})^2` for `tau` in `0..=tau_max`.
///
/// The frame must hold at least `window + tau_max` samples so that every lag
/// sums the same number of terms.
pub fn difference_function(
    frame: &[f64],
    window: usize,
    tau_max: usize,
) -> Result<DifferenceFrame, PitchError> {
    DifferenceEngine::new(window, tau_max)?.compute(frame)
}

/// Cumulative-mean normalised difference:
/// `d_norm[0] = 1`, `d_norm[tau] = d[tau] * tau / sum_{j=1}^{tau} d[j]`, and 1
/// wherever that running sum is zero.
pub fn cmndf(mut frame: DifferenceFrame) -> DifferenceFrame {
    let mut d_norm = Vec::with_capacity(frame.d.len());
    let mut running = 0.0;
    for (tau, &v) in frame.d.iter().enumerate() {
        if tau == 0 {
            d_norm.push(1.0);
            continue;
        }
        running += v;
        d_norm.push(if running > 0.0 { v * tau as f64 / running } else { 1.0 });
    }
    frame.d_norm = Some(d_norm);
    frame
}
