use rayon::prelude::*;

use super::MultiF0Error;
use crate::spectral::Spectrogram;
use crate::track::TimeGrid;

/// Frame-major salience over a candidate F0 lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct SalienceMap {
    values: Vec<f64>,
    f0_axis: Vec<f64>,
    grid: TimeGrid,
    /// Width of the STFT bins the map was computed from; two F0s closer than
    /// this cannot be told apart.
    resolution_hz: f64,
}

impl SalienceMap {
    pub fn new(
        values: Vec<f64>,
        f0_axis: Vec<f64>,
        grid: TimeGrid,
        resolution_hz: f64,
    ) -> Result<Self, MultiF0Error> {
        check_axis(&f0_axis, f64::INFINITY)?;
        if values.len() != f0_axis.len() * grid.len() {
            return Err(MultiF0Error::InvalidSettings(format!(
                "{} salience values for {} frames x {} lattice points",
                values.len(),
                grid.len(),
                f0_axis.len()
            )));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(MultiF0Error::InvalidSettings(
                "salience must be finite and non-negative".into(),
            ));
        }
        Ok(SalienceMap {
            values,
            f0_axis,
            grid,
            resolution_hz,
        })
    }

    pub fn num_frames(&self) -> usize {
        self.grid.len()
    }

    pub fn f0_axis(&self) -> &[f64] {
        &self.f0_axis
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn resolution_hz(&self) -> f64 {
        self.resolution_hz
    }

    pub fn frame(&self, t: usize) -> &[f64] {
        let m = self.f0_axis.len();
        &self.values[t * m..(t + 1) * m]
    }

    pub fn frames(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.f0_axis.len())
    }
}

fn check_axis(f0_axis: &[f64], nyquist: f64) -> Result<(), MultiF0Error> {
    if f0_axis.is_empty() {
        return Err(MultiF0Error::EmptyLattice);
    }
    if f0_axis.iter().any(|&f| !(f > 0.0 && f < nyquist)) {
        return Err(MultiF0Error::InvalidSettings("F0 lattice must lie in (0, Nyquist)".into()));
    }
    if f0_axis.windows(2).any(|w| w[1] <= w[0]) {
        return Err(MultiF0Error::InvalidSettings("F0 lattice must be strictly increasing".into()));
    }
    Ok(())
}

/// `salience(t, f0) = sum_{h=1}^{H} decay^(h-1) * |X(t, bin(h * f0))|`, where
/// `bin` is the nearest STFT bin. Harmonics above Nyquist contribute nothing.
pub fn harmonic_salience(
    spec: &Spectrogram,
    f0_axis: &[f64],
    harmonics: usize,
    decay: f64,
) -> Result<SalienceMap, MultiF0Error> {
    if harmonics == 0 {
        return Err(MultiF0Error::InvalidSettings("need at least one harmonic".into()));
    }
    if !(decay > 0.0 && decay <= 1.0) {
        return Err(MultiF0Error::InvalidSettings(format!("decay {decay} outside (0, 1]")));
    }
    let bins = spec.bin_grid();
    check_axis(f0_axis, bins.nyquist())?;

    // (bin, weight) pairs per lattice point, flattened.
    let lookup: Vec<Vec<(usize, f64)>> = f0_axis
        .iter()
        .map(|&f0| {
            (1..=harmonics)
                .map_while(|h| {
                    let weight = decay.powi(h as i32 - 1);
                    bins.freq_to_bin(h as f64 * f0).ok().map(|k| (k, weight))
                })
                .collect()
        })
        .collect();

    let m = f0_axis.len();
    let mut values = vec![0.0; spec.num_frames() * m];
    values.par_chunks_mut(m).enumerate().for_each(|(t, out)| {
        let mags = spec.frame(t);
        for (o, terms) in out.iter_mut().zip(&lookup) {
            *o = terms.iter().map(|&(k, w)| w * mags[k]).sum();
        }
    });
    Ok(SalienceMap {
        values,
        f0_axis: f0_axis.to_vec(),
        grid: spec.time_grid(),
        resolution_hz: bins.bin_width(),
    })
}
