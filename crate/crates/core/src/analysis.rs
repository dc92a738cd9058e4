//! Spectral and envelope measurements on simulated series, plus the
//! steady-state power–angle sweep.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::line_models::{CompensationSpec, LineParams};
use crate::power::{steady_state_pq, BusVoltages};
use crate::transforms::{balanced_phasor, AlphaBetaPair};

const MIN_WINDOW: usize = 64;
const ZERO_PAD: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumEstimate {
    /// Hz
    pub peak_frequency: f64,
    /// Amplitude of the equivalent sinusoid, channel units.
    pub peak_amplitude: f64,
    /// Bin spacing before zero padding, Hz.
    pub resolution: f64,
}

/// Sample range `[i0, i1)` covering `[t0, t1]` on a grid starting at t = 0.
fn window_slice(series: &[f64], dt: f64, window: (f64, f64)) -> Result<&[f64]> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid("dt", "must be > 0"));
    }
    let (t0, t1) = window;
    if !(t0.is_finite() && t1.is_finite() && t0 >= 0.0 && t1 > t0) {
        return Err(Error::invalid("window", "need 0 <= t0 < t1"));
    }
    let i0 = (t0 / dt - 1e-9).ceil().max(0.0) as usize;
    let i1 = ((t1 / dt + 1e-9).floor() as usize + 1).min(series.len());
    let got = i1.saturating_sub(i0);
    if got < MIN_WINDOW {
        return Err(Error::WindowTooShort {
            got,
            need: MIN_WINDOW,
        });
    }
    let w = &series[i0..i1];
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("series", "contains non-finite samples"));
    }
    Ok(w)
}

/// Removes the least-squares straight line.
fn detrend(x: &[f64]) -> Vec<f64> {
    let n = x.len() as f64;
    let t_mean = (n - 1.0) / 2.0;
    let x_mean = x.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (i, v) in x.iter().enumerate() {
        let d = i as f64 - t_mean;
        sxy += d * (v - x_mean);
        sxx += d * d;
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    x.iter()
        .enumerate()
        .map(|(i, v)| v - x_mean - slope * (i as f64 - t_mean))
        .collect()
}

fn hann(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    (0..n)
        .map(|i| 0.5 * (1.0 - (2.0 * PI * i as f64 / (n - 1) as f64).cos()))
        .collect()
}

/// Detrended, Hann-windowed, zero-padded spectrum; returns the one-sided
/// magnitudes and the FFT length.
fn windowed_spectrum(x: &[f64]) -> (Vec<f64>, usize) {
    let y = detrend(x);
    let w = hann(y.len());
    let nfft = ZERO_PAD * y.len();
    let mut buf: Vec<Complex<f64>> = y
        .iter()
        .zip(&w)
        .map(|(v, wi)| Complex::new(v * wi, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(nfft)
        .collect();
    FftPlanner::new().plan_fft_forward(nfft).process(&mut buf);
    let mags = buf[..=nfft / 2].iter().map(|c| c.norm()).collect();
    (mags, nfft)
}

/// Strongest spectral line above the DC lobe in `window` (seconds from the
/// first sample).
pub fn dominant_frequency(series: &[f64], dt: f64, window: (f64, f64)) -> Result<SpectrumEstimate> {
    let x = window_slice(series, dt, window)?;
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let residual = detrend(x).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if residual == 0.0 || residual <= 1e-12 * scale {
        return Err(Error::NoSignal);
    }
    let (mags, nfft) = windowed_spectrum(x);
    // Skip the lobe around DC left by the detrend residual; on a strongly
    // decaying record it can outweigh the faded oscillation.
    let Some(first_valley) = (ZERO_PAD..mags.len() - 1).find(|&i| mags[i] <= mags[i + 1]) else {
        return Err(Error::NoSignal);
    };
    let (k, _) = mags
        .iter()
        .enumerate()
        .skip(first_valley)
        .fold((1, f64::NEG_INFINITY), |best, (i, m)| if *m > best.1 { (i, *m) } else { best });

    // parabolic fit on log magnitude around the peak bin
    let mut offset = 0.0;
    let mut peak = mags[k];
    if k + 1 < mags.len() && mags[k - 1] > 0.0 && mags[k + 1] > 0.0 && mags[k] > 0.0 {
        let (a, b, c) = (mags[k - 1].ln(), mags[k].ln(), mags[k + 1].ln());
        let denom = a - 2.0 * b + c;
        if denom < 0.0 {
            offset = (0.5 * (a - c) / denom).clamp(-0.5, 0.5);
            peak = (b - 0.25 * (a - c) * offset).exp();
        }
    }
    let coherent_gain: f64 = hann(x.len()).iter().sum();
    Ok(SpectrumEstimate {
        peak_frequency: (k as f64 + offset) / (nfft as f64 * dt),
        peak_amplitude: 2.0 * peak / coherent_gain,
        resolution: 1.0 / (x.len() as f64 * dt),
    })
}

/// Vertex of the parabola through three equally spaced samples, as
/// (offset in samples, value).
fn parabolic_vertex(a: f64, b: f64, c: f64) -> (f64, f64) {
    let denom = a - 2.0 * b + c;
    if denom == 0.0 {
        return (0.0, b);
    }
    let p = (0.5 * (a - c) / denom).clamp(-1.0, 1.0);
    (p, b - 0.25 * (a - c) * p)
}

/// Exponential decay rate σ (1/s) of the dominant oscillation, so the
/// envelope goes as `e^(−σt)`.
///
/// Successive extrema a half cycle apart are located (quarter-period guard
/// band, parabolic refinement) and the peak-to-peak swings between
/// neighbours are fitted with a straight line in log space. Working on
/// swings makes the estimate insensitive to a constant offset.
pub fn damping_estimate(series: &[f64], dt: f64, window: (f64, f64)) -> Result<f64> {
    let spec = dominant_frequency(series, dt, window)?;
    let x = window_slice(series, dt, window)?;
    let guard = ((0.25 / (spec.peak_frequency * dt)).round() as usize).max(1);
    if x.len() <= 2 * guard {
        return Err(Error::InsufficientCycles { found: 0 });
    }

    // (time, value, is_max)
    let mut extrema: Vec<(f64, f64, bool)> = Vec::new();
    for i in guard..x.len() - guard {
        let around = &x[i - guard..=i + guard];
        let is_max = around.iter().all(|v| *v <= x[i]) && around.iter().any(|v| *v < x[i]);
        let is_min = around.iter().all(|v| *v >= x[i]) && around.iter().any(|v| *v > x[i]);
        if !(is_max || is_min) {
            continue;
        }
        let (p, v) = parabolic_vertex(x[i - 1], x[i], x[i + 1]);
        let t = (i as f64 + p) * dt;
        match extrema.last_mut() {
            Some(last) if last.2 == is_max => {
                if (is_max && v > last.1) || (!is_max && v < last.1) {
                    *last = (t, v, is_max);
                }
            }
            _ => extrema.push((t, v, is_max)),
        }
    }

    let swings: Vec<(f64, f64)> = extrema
        .windows(2)
        .map(|w| (0.5 * (w[0].0 + w[1].0), (w[1].1 - w[0].1).abs()))
        .collect();
    let largest = swings.iter().fold(0.0f64, |m, s| m.max(s.1));
    let usable: Vec<(f64, f64)> = swings
        .into_iter()
        .filter(|s| s.1 > 1e-6 * largest && s.1 > 0.0)
        .map(|(t, s)| (t, s.ln()))
        .collect();
    if usable.len() < 4 {
        return Err(Error::InsufficientCycles {
            found: usable.len(),
        });
    }
    let n = usable.len() as f64;
    let t_mean = usable.iter().map(|s| s.0).sum::<f64>() / n;
    let y_mean = usable.iter().map(|s| s.1).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (t, y) in &usable {
        sxy += (t - t_mean) * (y - y_mean);
        sxx += (t - t_mean) * (t - t_mean);
    }
    Ok(-sxy / sxx)
}

/// Ratio of spectral energy of `a` to that of `b` in
/// `[f_center − half_bw, f_center + half_bw]`.
pub fn ssr_band_energy_ratio(a: &[f64], b: &[f64], dt: f64, f_center: f64, half_bw: f64) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::invalid("series_a", "length differs from series_b"));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid("dt", "must be > 0"));
    }
    if a.len() < MIN_WINDOW {
        return Err(Error::WindowTooShort {
            got: a.len(),
            need: MIN_WINDOW,
        });
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::invalid("series", "contains non-finite samples"));
    }
    if !(f_center > 0.0 && f_center.is_finite()) {
        return Err(Error::invalid("f_center", "must be > 0"));
    }
    let resolution = 1.0 / (a.len() as f64 * dt);
    if !(half_bw > resolution) {
        return Err(Error::invalid("half_bw", format!("must exceed the resolution {resolution} Hz")));
    }
    let band_energy = |x: &[f64]| {
        let (mags, nfft) = windowed_spectrum(x);
        let df = 1.0 / (nfft as f64 * dt);
        mags.iter()
            .enumerate()
            .filter(|(k, _)| (*k as f64 * df - f_center).abs() <= half_bw)
            .map(|(_, m)| m * m)
            .sum::<f64>()
    };
    let den = band_energy(b);
    if !(den > 0.0) {
        return Err(Error::DegenerateComparison);
    }
    Ok(band_energy(a) / den)
}

/// One row of a power–angle sweep; powers are delivered by the sending bus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PDeltaPoint {
    pub delta_deg: f64,
    pub p_w: f64,
    pub q_var: f64,
}

/// Steady-state sending power for the sending bus leading the receiving bus
/// by δ, over `steps` evenly spaced angles including both ends. Bus
/// magnitudes are αβ peak values.
pub fn p_delta_sweep(
    params: &LineParams,
    comp: &CompensationSpec,
    vs_magnitude: f64,
    vr_magnitude: f64,
    delta_deg: (f64, f64),
    steps: usize,
) -> Result<Vec<PDeltaPoint>> {
    let (lo, hi) = delta_deg;
    if !(lo > -180.0 && hi < 180.0 && lo < hi) {
        return Err(Error::invalid("delta", "range must satisfy -180 < min < max < 180"));
    }
    if steps < 2 {
        return Err(Error::invalid("steps", "must be >= 2"));
    }
    let vs = balanced_phasor(vs_magnitude, 0.0);
    (0..steps)
        .map(|i| {
            let d = lo + (hi - lo) * i as f64 / (steps - 1) as f64;
            let vr = balanced_phasor(vr_magnitude, -d.to_radians());
            let pq = steady_state_pq(&BusVoltages::new(vs, vr, AlphaBetaPair::ZERO), params, comp)?.delivered();
            Ok(PDeltaPoint {
                delta_deg: d,
                p_w: pq.p,
                q_var: pq.q,
            })
        })
        .collect()
}

/// Row with the largest delivered real power.
pub fn sweep_peak(points: &[PDeltaPoint]) -> Option<PDeltaPoint> {
    points
        .iter()
        .copied()
        .fold(None, |best: Option<PDeltaPoint>, p| match best {
            Some(b) if b.p_w >= p.p_w => Some(b),
            _ => Some(p),
        })
}
