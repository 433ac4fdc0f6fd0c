//! Closed-form Gaussian pulse in the weak-probe, second-order dispersion
//! limit, and the quantities derived from it.

use num_complex::Complex64 as C64;

use crate::model::DerivedRates;

const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticPulse {
    pub amp: f64,
    pub sigma: f64,
    /// σ̃² = σ² + 2k₀z(β₁ − iβ₂) at this depth.
    pub sigma_t2: C64,
    /// k₀ times the depth.
    pub k0z: f64,
    pub beta1: f64,
    pub beta2: f64,
    /// Slow-light delay z/v_g.
    pub delay: f64,
    /// γ_dec·z/v_g.
    pub decay: f64,
    /// n_g/ω₀, the prefactor of the lowest-order polarization.
    pub ng_over_omega0: f64,
}

impl AnalyticPulse {
    /// Pulse after the fraction `z` ∈ [0, 1] of the medium.
    pub fn at_depth(rates: &DerivedRates, amp: f64, sigma: f64, z: f64) -> Self {
        let k0z = rates.units.k0z * z;
        let delay = rates.group_delay * z;
        AnalyticPulse {
            amp,
            sigma,
            sigma_t2: C64::new(sigma * sigma + 2.0 * k0z * rates.beta1, -2.0 * k0z * rates.beta2),
            k0z,
            beta1: rates.beta1,
            beta2: rates.beta2,
            delay,
            decay: rates.gamma_dec * delay,
            ng_over_omega0: rates.group_index / rates.units.omega0,
        }
    }

    /// The same pulse with the LFC coefficient β₂ removed.
    pub fn without_lfc(self) -> Self {
        AnalyticPulse {
            sigma_t2: C64::new(self.sigma_t2.re, 0.0),
            beta2: 0.0,
            ..self
        }
    }

    /// The same pulse without ground-state decoherence loss.
    pub fn without_decay(self) -> Self {
        AnalyticPulse { decay: 0.0, ..self }
    }

    /// Local width √Re σ̃².
    pub fn local_width(&self) -> f64 {
        self.sigma_t2.re.sqrt()
    }

    /// ℰ(z, t). The root σ/σ̃ = √(σ²/σ̃²) is principal; Re σ̃² ≥ σ² > 0 keeps
    /// it continuous in depth.
    pub fn envelope(&self, t: f64) -> C64 {
        let s = t - self.delay;
        let ratio = (C64::new(self.sigma * self.sigma, 0.0) / self.sigma_t2).sqrt();
        self.amp * ratio * (-self.decay - s * s / (2.0 * self.sigma_t2)).exp()
    }

    /// ∂ℰ/∂t.
    pub fn d_envelope(&self, t: f64) -> C64 {
        -(t - self.delay) / self.sigma_t2 * self.envelope(t)
    }

    /// ∂²ℰ/∂t².
    pub fn d2_envelope(&self, t: f64) -> C64 {
        let u = (t - self.delay) / self.sigma_t2;
        (u * u - 1.0 / self.sigma_t2) * self.envelope(t)
    }
}

/// Parabolic approximation of the LFC phase,
/// (β₂k₀z/σ²)·[1 − (t − z/v_g)²/σ²].
pub fn phi_lfc(t: f64, p: &AnalyticPulse) -> f64 {
    let s = (t - p.delay) / p.sigma;
    p.beta2 * p.k0z / (p.sigma * p.sigma) * (1.0 - s * s)
}

/// The two polarization contributions (P₀, P_LFC), up to the common
/// prefactor and carrier: P₀ = (n_g/ω₀)·i∂ₜℰ and P_LFC = β₂·i²∂²ₜℰ.
pub fn polarization_components(t: f64, p: &AnalyticPulse) -> (C64, C64) {
    let p0 = p.ng_over_omega0 * I * p.d_envelope(t);
    let plfc = -p.beta2 * p.d2_envelope(t);
    (p0, plfc)
}

/// Self-phase φ_NSM = n₂I(t)k₀z for I(t) = I₀·exp(−t²/σ²).
pub fn phi_nsm(t: f64, n2: f64, i0: f64, sigma: f64, k0z: f64) -> f64 {
    n2 * i0 * (-(t * t) / (sigma * sigma)).exp() * k0z
}

/// Chirp slope at the pulse centre from self-phase modulation.
pub fn alpha_nsm(n2: f64, i0: f64, k0z: f64, sigma: f64) -> f64 {
    2.0 * n2 * i0 * k0z / (sigma * sigma)
}

/// Chirp slope of the LFC phase parabola.
pub fn alpha_lfc(beta2: f64, k0z: f64, sigma: f64) -> f64 {
    2.0 * beta2 * k0z / sigma.powi(4)
}
