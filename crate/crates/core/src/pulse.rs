//! Peak, width, phase and chirp of one sampled envelope.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fit::polyfit;

/// Straight-line fit of the instantaneous frequency offset around the peak.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChirpFit {
    /// dω/dτ.
    pub slope: f64,
    /// ω − ω₀ at the peak.
    pub intercept: f64,
    /// RMS residual of the line fit.
    pub residual: f64,
    /// Set when the phase is flat to round-off and the slope is reported as zero.
    pub degenerate: bool,
}

/// Parabola φ ≈ a₀ + a₁(τ − τₚ) + a₂(τ − τₚ)² over |τ − τₚ| ≤ σ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseFit {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    /// Height of the parabola above its value at τₚ ± σ, i.e. −a₂σ².
    pub peak_value: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PulseMetrics {
    /// |Ω|ₚₑₐₖ divided by the reference amplitude.
    pub peak_ratio: f64,
    pub peak_amplitude: f64,
    /// Retarded time of the peak from quadratic interpolation.
    pub arrival: f64,
    /// Gaussian width from a parabola fit of ln|Ω| around the peak.
    pub width: f64,
    pub phase_fit: PhaseFit,
    pub chirp: ChirpFit,
    #[serde(skip)]
    pub tau: Vec<f64>,
    /// Unwrapped envelope phase.
    #[serde(skip)]
    pub phase: Vec<f64>,
    /// Instantaneous frequency offset ω − ω₀ = −∂φ/∂τ.
    #[serde(skip)]
    pub inst_freq: Vec<f64>,
}

/// Remove 2π jumps between neighbouring samples.
pub fn unwrap(phase: &[f64]) -> Vec<f64> {
    use std::f64::consts::PI;
    let mut out = Vec::with_capacity(phase.len());
    let mut offset = 0.0;
    for (k, &p) in phase.iter().enumerate() {
        if k > 0 {
            let d = p - phase[k - 1];
            offset -= 2.0 * PI * ((d / (2.0 * PI)).round());
        }
        out.push(p + offset);
    }
    out
}

/// Centered-difference derivative on a uniform grid, one-sided at the ends.
pub fn derivative(y: &[f64], dx: f64) -> Vec<f64> {
    let n = y.len();
    (0..n)
        .map(|k| match k {
            0 => (y[1] - y[0]) / dx,
            k if k == n - 1 => (y[k] - y[k - 1]) / dx,
            k => (y[k + 1] - y[k - 1]) / (2.0 * dx),
        })
        .collect()
}

/// Metrics of one slice. `sigma` is the input pulse width, which sets the
/// fit window |τ − τₚ| ≤ σ and the required 3σ margin to the window edge.
pub fn measure_pulse(tau: &[f64], field: &[C64], sigma: f64, reference: f64) -> Result<PulseMetrics> {
    let n = tau.len();
    assert!(n == field.len() && n >= 3, "slice needs at least three samples");
    let dtau = tau[1] - tau[0];
    let amp: Vec<f64> = field.iter().map(|z| z.norm()).collect();

    let imax = (0..n).fold(0, |b, k| if amp[k] > amp[b] { k } else { b });
    let (arrival, peak) = if imax == 0 || imax == n - 1 {
        (tau[imax], amp[imax])
    } else {
        let (y0, y1, y2) = (amp[imax - 1], amp[imax], amp[imax + 1]);
        let den = y0 - 2.0 * y1 + y2;
        if den == 0.0 {
            (tau[imax], y1)
        } else {
            let s = 0.5 * (y0 - y2) / den;
            (tau[imax] + s * dtau, y1 - 0.25 * (y0 - y2) * s)
        }
    };
    if arrival - tau[0] < 3.0 * sigma || tau[n - 1] - arrival < 3.0 * sigma {
        return Err(Error::PeakAtBoundary { tau: arrival });
    }

    let phase = unwrap(&field.iter().map(|z| z.arg()).collect::<Vec<_>>());
    let inst_freq: Vec<f64> = derivative(&phase, dtau).into_iter().map(|d| -d).collect();

    let inside: Vec<usize> = (0..n).filter(|&k| (tau[k] - arrival).abs() <= sigma).collect();
    let xs: Vec<f64> = inside.iter().map(|&k| tau[k]).collect();
    let pick = |v: &[f64]| inside.iter().map(|&k| v[k]).collect::<Vec<f64>>();

    let log_amp = pick(&amp.iter().map(|a| a.ln()).collect::<Vec<_>>());
    let width = polyfit(&xs, &log_amp, 2, arrival)
        .map(|f| (-0.5 / f.coeffs[2]).sqrt())
        .unwrap_or(f64::NAN);

    let ph = pick(&phase);
    let spread = ph.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v)) - ph.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    let flat = spread <= 1e-12 * (1.0 + ph[0].abs());

    let phase_fit = match polyfit(&xs, &ph, 2, arrival) {
        Some(f) if !flat => PhaseFit {
            a0: f.coeffs[0],
            a1: f.coeffs[1],
            a2: f.coeffs[2],
            peak_value: -f.coeffs[2] * sigma * sigma,
            residual: f.rms,
        },
        _ => PhaseFit {
            a0: ph[ph.len() / 2],
            a1: 0.0,
            a2: 0.0,
            peak_value: 0.0,
            residual: 0.0,
        },
    };

    let chirp = match polyfit(&xs, &pick(&inst_freq), 1, arrival) {
        Some(f) if !flat => ChirpFit {
            slope: f.coeffs[1],
            intercept: f.coeffs[0],
            residual: f.rms,
            degenerate: false,
        },
        _ => ChirpFit {
            slope: 0.0,
            intercept: 0.0,
            residual: 0.0,
            degenerate: true,
        },
    };

    Ok(PulseMetrics {
        peak_ratio: peak / reference,
        peak_amplitude: peak,
        arrival,
        width,
        phase_fit,
        chirp,
        tau: tau.to_vec(),
        phase,
        inst_freq,
    })
}
