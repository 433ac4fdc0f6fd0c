//! Linear probe response of the Λ medium in closed form.

use num_complex::Complex64 as C64;

use crate::bloch;
use crate::error::{Diagnostic, Error, Result};
use crate::model::{derive_rates, DerivedRates, SystemConfig};

const POLE_TOL: f64 = 1e-14;

/// Probe susceptibility χ(Δ₃₁) including the LFC shift carried by `rates`.
pub fn chi(delta31: f64, rates: &DerivedRates, omega32: C64) -> Result<C64> {
    let delta = delta31 - rates.delta32;
    let dt = delta31 + rates.lfc_shift;
    let g = rates.gamma;
    let gd = rates.gamma_dec;
    let num = C64::new(delta, gd);
    let den = C64::new(
        0.5 * g * gd - dt * delta + 0.25 * omega32.norm_sqr(),
        -(dt * gd + 0.5 * delta * g),
    );
    if den.norm() < POLE_TOL {
        return Err(Error::Pole {
            delta31,
            modulus: den.norm(),
        });
    }
    Ok(1.5 * rates.l * rates.gamma31 * num / den)
}

/// Complex wave number times the full depth, k(ω)·z, from the exact
/// relation k = (ω/c)√(1 + χ) on the principal branch.
pub fn wave_number(delta31: f64, rates: &DerivedRates, omega32: C64) -> Result<C64> {
    let c = chi(delta31, rates, omega32)?;
    let arg = 1.0 + c;
    if arg.im == 0.0 && arg.re <= 0.0 {
        return Err(Error::Branch {
            re: arg.re,
            im: arg.im,
        });
    }
    Ok(carrier_factor(delta31, rates) * arg.sqrt())
}

/// Wave number times depth to first order in χ, k₀z(1 + Δ₃₁/ω₀)(1 + χ/2),
/// the form the slowly varying envelope equation propagates.
pub fn wave_number_svea(delta31: f64, rates: &DerivedRates, omega32: C64) -> Result<C64> {
    let c = chi(delta31, rates, omega32)?;
    Ok(carrier_factor(delta31, rates) * (1.0 + 0.5 * c))
}

fn carrier_factor(delta31: f64, rates: &DerivedRates) -> f64 {
    rates.units.k0z * (1.0 + delta31 / rates.units.omega0)
}

/// Taylor coefficients of k(Δ₃₁)·z about Δ₃₁ = 0 in the retarded frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionTerms {
    /// k(0)·z − k₀z; the imaginary part is the absorption exponent.
    pub offset: C64,
    /// d(kz)/dΔ₃₁ minus the vacuum transit time; the real part is the delay.
    pub linear: C64,
    /// Coefficient of Δ₃₁², ideally k₀z(iβ₁ + β₂).
    pub quadratic: C64,
}

impl ExpansionTerms {
    pub fn delay(&self) -> f64 {
        self.linear.re
    }

    pub fn absorption(&self) -> f64 {
        self.offset.im
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispersionCoefficients {
    pub closed_form: ExpansionTerms,
    pub numeric: ExpansionTerms,
    /// Relative distance between the two quadratic coefficients.
    pub quadratic_mismatch: f64,
    pub warnings: Vec<String>,
}

/// Closed-form dispersion coefficients plus a finite-difference set.
///
/// The numeric set differentiates the first-order (SVEA) wave number, which
/// is the quantity the closed-form expansion approximates.
pub fn dispersion_expansion(rates: &DerivedRates, omega32: C64) -> Result<DispersionCoefficients> {
    let k0z = rates.units.k0z;
    let w0 = rates.units.omega0;
    let mut warnings = Vec::new();

    let om2 = omega32.norm_sqr();
    let validity = rates.gamma * rates.gamma_dec / om2;
    if !(validity <= 1e-2) {
        warnings.push(format!(
            "gamma*gamma_dec/|omega32|^2 = {validity:e} exceeds 1e-2; expansion unreliable"
        ));
    }

    let closed_form = ExpansionTerms {
        offset: C64::new(0.0, rates.gamma_dec * rates.group_delay),
        linear: C64::new(rates.group_delay, 0.0),
        quadratic: k0z * C64::new(rates.beta2, rates.beta1),
    };

    // g(Δ) = k₀z·χ/2; kz = k₀z(1 + Δ/ω₀)(1 + g/k₀z).
    let g = |d: f64| -> Result<C64> { Ok(0.5 * k0z * chi(d, rates, omega32)?) };
    let h = 1e-3 * omega32.norm().max(rates.gamma31);
    let d1 = |h: f64| -> Result<C64> { Ok((g(h)? - g(-h)?) / (2.0 * h)) };
    let d2 = |h: f64| -> Result<C64> { Ok((g(h)? - 2.0 * g(0.0)? + g(-h)?) / (h * h)) };
    let g0 = g(0.0)?;
    let g1 = (4.0 * d1(0.5 * h)? - d1(h)?) / 3.0;
    let g2 = (4.0 * d2(0.5 * h)? - d2(h)?) / 3.0;
    let numeric = ExpansionTerms {
        offset: g0,
        linear: g1 + g0 / w0,
        quadratic: 0.5 * (g2 + 2.0 * g1 / w0),
    };

    let quadratic_mismatch = (numeric.quadratic - closed_form.quadratic).norm() / closed_form.quadratic.norm();
    if !(quadratic_mismatch <= 0.1) {
        warnings.push(format!(
            "closed-form and finite-difference quadratic coefficients differ by {:.1}%",
            100.0 * quadratic_mismatch
        ));
    }

    Ok(DispersionCoefficients {
        closed_form,
        numeric,
        quadratic_mismatch,
        warnings,
    })
}

/// χ recovered from the atomic steady state at constant fields, through
/// χ = 3Lγ₃₁ρ₃₁/Ω₃₁.
pub fn steady_state_chi_oracle(delta31: f64, config: &SystemConfig) -> Result<C64> {
    let limit = 1e-3 * config.omega32.norm().max(config.gamma31);
    if !(config.probe_amp > 0.0 && config.probe_amp <= limit) {
        return Err(Error::InvalidConfig(vec![Diagnostic {
            field: "probe_amp",
            value: config.probe_amp.to_string(),
            rule: format!("steady-state susceptibility requires 0 < probe_amp <= {limit:e}"),
        }]));
    }
    let cfg = SystemConfig {
        delta31,
        ..config.clone()
    };
    let rates = derive_rates(&cfg)?;
    let probe = C64::new(cfg.probe_amp, 0.0);
    let ss = bloch::steady_state(probe, cfg.omega32, &rates, cfg.use_linearized_eom)?;
    Ok(3.0 * rates.l * rates.gamma31 * ss.rho31() / probe)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SystemConfig;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn rates(cfg: &SystemConfig) -> DerivedRates {
        derive_rates(cfg).unwrap()
    }

    /// Independent evaluation of the closed form written as
    /// (3Lγ₃₁/2)·iΓ₂₁ / (Γ̃₃₁Γ₂₁ + |Ω₃₂|²/4).
    fn oracle(d: f64, r: &DerivedRates, om: C64) -> C64 {
        let i = C64::new(0.0, 1.0);
        let g21 = C64::new(r.gamma_dec, -(d - r.delta32));
        let g31 = r.gamma31_tilde(d);
        1.5 * r.l * r.gamma31 * i * g21 / (g31 * g21 + 0.25 * om.norm_sqr())
    }

    #[test]
    fn matches_factorised_form() {
        let r = rates(&SystemConfig {
            delta32: 0.2,
            ..SystemConfig::default()
        });
        for k in -40..=40 {
            let d = 0.1 * k as f64;
            let a = chi(d, &r, r.omega32).unwrap();
            let b = oracle(d, &r, r.omega32);
            assert!((a - b).norm() <= 1e-13 * b.norm().max(1e-300));
        }
    }

    #[test]
    fn vanishes_at_ideal_two_photon_resonance() {
        let r = rates(&SystemConfig {
            gamma_deph: 0.0,
            gamma_s: 0.0,
            ..SystemConfig::default()
        });
        assert_eq!(chi(0.0, &r, r.omega32).unwrap(), C64::new(0.0, 0.0));
        let k = wave_number(0.0, &r, r.omega32).unwrap();
        assert_eq!(k.im, 0.0);
    }

    #[test]
    fn two_level_absorption_peak_is_shifted() {
        let r = rates(&SystemConfig {
            gamma_deph: 0.0,
            gamma_s: 0.0,
            omega32: C64::new(0.0, 0.0),
            n_lambda3: 4.0 * PI * PI * 2.0,
            ..SystemConfig::default()
        });
        let om = C64::new(0.0, 0.0);
        let n = 200_001;
        let (lo, hi) = (-5.0, 5.0);
        let mut best = (f64::NEG_INFINITY, 0.0);
        for k in 0..n {
            let d = lo + (hi - lo) * k as f64 / (n - 1) as f64;
            // Δ = Δ₃₁ with γ_dec = 0 puts a removable zero at Δ₃₁ = 0.
            if let Ok(c) = chi(d, &r, om) {
                if c.im > best.0 {
                    best = (c.im, d);
                }
            }
        }
        let expected = -r.l * r.gamma31 / 2.0;
        assert!((best.1 - expected).abs() < 1e-4, "{} vs {}", best.1, expected);
    }

    #[test]
    fn pole_is_reported() {
        let r = rates(&SystemConfig {
            gamma_deph: 0.0,
            gamma_s: 0.0,
            gamma31: 1.0,
            gamma32: 0.0,
            omega32: C64::new(0.0, 0.0),
            n_lambda3: 0.0,
            ..SystemConfig::default()
        });
        // With γ_dec = 0 and Ω₃₂ = 0 the denominator is −Δ̃₃₁Δ − iΔγ/2, zero at Δ = 0.
        assert!(matches!(chi(0.0, &r, C64::new(0.0, 0.0)), Err(Error::Pole { .. })));
    }

    #[test]
    fn first_order_wave_number() {
        let r = rates(&SystemConfig {
            n_lambda3: 1e-3,
            ..SystemConfig::default()
        });
        for d in [-1.0, -0.3, 0.2, 2.0] {
            let c = chi(d, &r, r.omega32).unwrap();
            let k = wave_number(d, &r, r.omega32).unwrap();
            let approx = carrier_factor(d, &r) * (1.0 + 0.5 * c);
            let err = (k - approx).norm() / k.norm();
            assert!(err <= c.norm_sqr(), "{err} vs {}", c.norm_sqr());
        }
    }

    #[test]
    fn fig4_delay_and_curvature() {
        let r = rates(&SystemConfig {
            gamma_deph: 0.0,
            gamma_s: 0.0,
            trapping_on: false,
            ..SystemConfig::default()
        });
        let dc = dispersion_expansion(&r, r.omega32).unwrap();
        // 150/γ with γ = 2γ₃₁.
        let delay_gamma = dc.numeric.delay() * r.natural_linewidth();
        assert!((delay_gamma - 150.0).abs() / 150.0 < 0.02, "{delay_gamma}");
        assert!((dc.numeric.delay() - r.group_delay).abs() / r.group_delay < 0.02);
        assert!(dc.quadratic_mismatch < 0.1, "{}", dc.quadratic_mismatch);
        assert!(dc.warnings.is_empty(), "{:?}", dc.warnings);
        // β₂ ≈ 0.150/γ² = 0.0375/γ₃₁².
        let beta2_gamma = r.beta2 * r.natural_linewidth().powi(2);
        assert!((beta2_gamma - 0.150).abs() < 0.002, "{beta2_gamma}");
    }

    #[test]
    fn dilute_limit_is_carrier_only() {
        let r = rates(&SystemConfig {
            n_lambda3: 0.0,
            ..SystemConfig::default()
        });
        let dc = dispersion_expansion(&r, r.omega32).unwrap();
        for t in [dc.closed_form, dc.numeric] {
            assert_eq!(t.offset, C64::new(0.0, 0.0));
            assert!(t.linear.norm() < 1e-15);
            assert!(t.quadratic.norm() < 1e-15);
        }
    }

    #[test]
    fn oracle_linearized_agrees() {
        for name_l in [1e-5, 4.0] {
            let cfg = SystemConfig {
                n_lambda3: name_l * 4.0 * PI * PI,
                use_linearized_eom: true,
                ..SystemConfig::default()
            };
            let r = rates(&cfg);
            for d in [-3.0, -0.7, 0.0, 0.05, 1.3] {
                let a = chi(d, &r, r.omega32).unwrap();
                let b = steady_state_chi_oracle(d, &cfg).unwrap();
                assert!((a - b).norm() <= 1e-10 * a.norm(), "{a} {b}");
            }
        }
    }

    #[test]
    fn oracle_full_master_equation_agrees() {
        let cfg = SystemConfig {
            probe_amp: 1e-4,
            gamma_s: 0.0,
            trapping_on: false,
            ..SystemConfig::default()
        };
        let r = rates(&cfg);
        for d in [-2.0, -0.5, 0.0, 0.3] {
            let a = chi(d, &r, r.omega32).unwrap();
            let b = steady_state_chi_oracle(d, &cfg).unwrap();
            assert!((a - b).norm() <= 1e-4 * a.norm(), "{d}: {a} {b}");
        }
    }

    #[test]
    fn oracle_independent_of_probe_strength() {
        let base = SystemConfig {
            use_linearized_eom: true,
            ..SystemConfig::default()
        };
        let a = steady_state_chi_oracle(0.4, &SystemConfig { probe_amp: 1e-3, ..base.clone() }).unwrap();
        let b = steady_state_chi_oracle(0.4, &SystemConfig { probe_amp: 1e-7, ..base }).unwrap();
        assert!((a - b).norm() <= 1e-6 * a.norm());
    }

    proptest! {
        #[test]
        fn passive_without_trapping(
            d in -20.0f64..20.0,
            om in 0.0f64..10.0,
            gd in 0.0f64..0.1,
            gs in 0.0f64..0.1,
            nl in 0.0f64..200.0,
            d32 in -2.0f64..2.0,
        ) {
            let r = rates(&SystemConfig {
                gamma_deph: gd,
                gamma_s: gs,
                n_lambda3: nl,
                delta32: d32,
                omega32: C64::new(om, 0.0),
                trapping_on: false,
                ..SystemConfig::default()
            });
            if let Ok(c) = chi(d, &r, r.omega32) {
                prop_assert!(c.im >= -1e-12 * c.norm().max(1.0));
            }
        }

        #[test]
        fn unshifted_response_has_parity(d in 0.01f64..8.0, om in 0.5f64..6.0, nl in 0.0f64..200.0) {
            let r = rates(&SystemConfig {
                gamma_deph: 0.0,
                gamma_s: 0.0,
                n_lambda3: nl,
                omega32: C64::new(om, 0.0),
                lfc_on: false,
                ..SystemConfig::default()
            });
            let p = chi(d, &r, r.omega32).unwrap();
            let m = chi(-d, &r, r.omega32).unwrap();
            let scale = p.norm().max(1e-300);
            prop_assert!((p.re + m.re).abs() <= 1e-12 * scale);
            prop_assert!((p.im - m.im).abs() <= 1e-12 * scale);
        }
    }
}
