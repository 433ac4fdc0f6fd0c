//! Configuration, unit conventions and the quantities derived from them.
//!
//! Every rate, Rabi frequency and detuning is stored in units of the probe
//! transition decay rate γ₃₁, and every time in units of 1/γ₃₁. Lengths
//! only enter through the optical depth product k₀z, and the carrier through
//! ω₀/γ₃₁, so c and ε₀ never appear explicitly.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Diagnostic, Error, Result};

/// How the atoms at every depth are prepared before the probe arrives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    /// All population in the probe ground state |1⟩.
    Ground,
    /// The stationary state reached under the control field and the
    /// incoherent processes with the probe switched off.
    SteadyState,
}

/// All physical inputs of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    pub gamma31: f64,
    pub gamma32: f64,
    pub gamma_deph: f64,
    pub gamma_s: f64,
    pub delta31: f64,
    pub delta32: f64,
    /// Control Rabi frequency. JSON accepts a number or `[re, im]`.
    #[serde(with = "rabi_serde")]
    pub omega32: C64,
    pub probe_amp: f64,
    pub probe_width: f64,
    pub n_lambda3: f64,
    pub trap_ratio: f64,
    pub k0z: f64,
    pub omega0_over_gamma: f64,
    pub n_z: usize,
    pub n_tau: usize,
    /// Margin kept on both sides of the input pulse and of the delayed pulse.
    pub tau_half_width: f64,
    pub lfc_on: bool,
    pub lfc_control_on: bool,
    pub trapping_on: bool,
    pub propagate_control: bool,
    pub use_linearized_eom: bool,
    pub initial_state: InitialState,
}

/// Rb D1 reference values, expressed in units of γ₃₁ = γ/2.
impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            gamma31: 1.0,
            gamma32: 1.0,
            gamma_deph: 5.48046e-3,
            gamma_s: 5.53582e-5,
            delta31: 0.0,
            delta32: 0.0,
            omega32: C64::new(4.0, 0.0),
            probe_amp: 1e-3,
            probe_width: 10.0,
            n_lambda3: 50.0,
            trap_ratio: 0.99,
            k0z: 316.0,
            omega0_over_gamma: 1.31166e8,
            n_z: 200,
            n_tau: 2001,
            tau_half_width: 80.0,
            lfc_on: true,
            lfc_control_on: true,
            trapping_on: true,
            propagate_control: false,
            use_linearized_eom: false,
            initial_state: InitialState::SteadyState,
        }
    }
}

impl SystemConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn toggles(&self) -> Toggles {
        Toggles {
            lfc_on: self.lfc_on,
            lfc_control_on: self.lfc_control_on,
            trapping_on: self.trapping_on,
        }
    }
}

mod rabi_serde {
    use num_complex::Complex64 as C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Real(f64),
        Complex([f64; 2]),
    }

    pub fn serialize<S: Serializer>(v: &C64, s: S) -> Result<S::Ok, S::Error> {
        if v.im == 0.0 {
            Repr::Real(v.re).serialize(s)
        } else {
            Repr::Complex([v.re, v.im]).serialize(s)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
        Ok(match Repr::deserialize(d)? {
            Repr::Real(re) => C64::new(re, 0.0),
            Repr::Complex([re, im]) => C64::new(re, im),
        })
    }
}

/// Switches that select which cooperative corrections are active.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Toggles {
    /// Local-field correction of the probe transition.
    pub lfc_on: bool,
    /// Local-field correction of the control transition (full model only).
    pub lfc_control_on: bool,
    pub trapping_on: bool,
}

impl Default for Toggles {
    fn default() -> Self {
        Toggles {
            lfc_on: true,
            lfc_control_on: true,
            trapping_on: true,
        }
    }
}

/// The two dimensionless groups that carry length and carrier frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitSystem {
    /// k₀ times the total medium length.
    pub k0z: f64,
    /// Carrier frequency ω₀ in the stored rate unit.
    pub omega0: f64,
}

/// Quantities computed once from a validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedRates {
    pub gamma31: f64,
    pub gamma32: f64,
    pub gamma_s: f64,
    pub gamma_deph: f64,
    pub delta31: f64,
    pub delta32: f64,
    pub trap_ratio: f64,
    pub omega32: C64,
    /// Local-field strength N·λ³/(4π²).
    pub l: f64,
    /// γ₃₁ + γ₃₂ + γ_s.
    pub gamma: f64,
    /// γ_deph + γ_s.
    pub gamma_dec: f64,
    /// Γ₃₁ = γ/2 − iΔ₃₁.
    pub gamma31_c: C64,
    /// Γ₂₁ = γ_dec − iΔ.
    pub gamma21_c: C64,
    /// Two-photon detuning Δ₃₁ − Δ₃₂.
    pub delta: f64,
    /// Lγ₃₁/2 when the probe LFC is on, zero otherwise.
    pub lfc_shift: f64,
    pub delta31_tilde: f64,
    pub group_index: f64,
    /// Slow-light delay n_g·z/c over the full depth (retarded frame).
    pub group_delay: f64,
    pub beta1: f64,
    pub beta2: f64,
    /// Probe field-medium coupling g·z_total.
    pub coupling: f64,
    /// Control field-medium coupling g₃₂·z_total.
    pub coupling_control: f64,
    pub units: UnitSystem,
    pub toggles: Toggles,
}

impl DerivedRates {
    /// Detuning-dependent Γ₃₁ including the LFC shift.
    pub fn gamma31_tilde(&self, delta31: f64) -> C64 {
        C64::new(self.gamma / 2.0, -(delta31 + self.lfc_shift))
    }

    /// Largest rate or detuning scale of the atomic dynamics, floored at 1.
    pub fn fastest_scale(&self) -> f64 {
        [
            self.gamma,
            self.omega32.norm(),
            self.delta31.abs(),
            self.delta.abs(),
            1.0,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    /// Admissible fixed RK4 step for the atomic equations.
    pub fn dt_max(&self) -> f64 {
        0.05 / self.fastest_scale()
    }

    /// Natural linewidth γ₃₁ + γ₃₂, the unit the presets are quoted in.
    pub fn natural_linewidth(&self) -> f64 {
        self.gamma31 + self.gamma32
    }
}

pub fn lfc_strength(n_lambda3: f64) -> f64 {
    n_lambda3 / (4.0 * PI * PI)
}

/// Check every configuration invariant. An empty list means the config is valid.
pub fn validate_config(config: &SystemConfig) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut check = |ok: bool, field: &'static str, value: String, rule: &str| {
        if !ok {
            out.push(Diagnostic {
                field,
                value,
                rule: rule.to_string(),
            });
        }
    };

    let finite = [
        ("gamma31", config.gamma31),
        ("gamma32", config.gamma32),
        ("gamma_deph", config.gamma_deph),
        ("gamma_s", config.gamma_s),
        ("delta31", config.delta31),
        ("delta32", config.delta32),
        ("omega32", config.omega32.re),
        ("omega32", config.omega32.im),
        ("probe_amp", config.probe_amp),
        ("probe_width", config.probe_width),
        ("n_lambda3", config.n_lambda3),
        ("trap_ratio", config.trap_ratio),
        ("k0z", config.k0z),
        ("omega0_over_gamma", config.omega0_over_gamma),
        ("tau_half_width", config.tau_half_width),
    ];
    for (field, v) in finite {
        check(v.is_finite(), field, v.to_string(), "must be finite");
    }

    check(
        config.gamma31 > 0.0,
        "gamma31",
        config.gamma31.to_string(),
        "gamma31 must be > 0",
    );
    check(
        config.gamma32 >= 0.0,
        "gamma32",
        config.gamma32.to_string(),
        "gamma32 must be >= 0",
    );
    check(
        config.gamma_deph >= 0.0,
        "gamma_deph",
        config.gamma_deph.to_string(),
        "gamma_deph must be >= 0",
    );
    check(
        config.gamma_s >= 0.0,
        "gamma_s",
        config.gamma_s.to_string(),
        "gamma_s must be >= 0",
    );
    check(
        config.probe_width > 0.0,
        "probe_width",
        config.probe_width.to_string(),
        "probe_width must be > 0",
    );
    check(
        config.probe_amp >= 0.0,
        "probe_amp",
        config.probe_amp.to_string(),
        "probe_amp must be >= 0",
    );
    check(
        config.n_lambda3 >= 0.0,
        "n_lambda3",
        config.n_lambda3.to_string(),
        "n_lambda3 must be >= 0",
    );
    check(
        config.trap_ratio >= 0.0,
        "trap_ratio",
        config.trap_ratio.to_string(),
        "trap_ratio must be >= 0",
    );
    check(
        config.trap_ratio < 1.0,
        "trap_ratio",
        config.trap_ratio.to_string(),
        "trap_ratio must be < 1",
    );
    check(
        config.k0z > 0.0,
        "k0z",
        config.k0z.to_string(),
        "k0z must be > 0",
    );
    check(
        config.omega0_over_gamma > 0.0,
        "omega0_over_gamma",
        config.omega0_over_gamma.to_string(),
        "omega0_over_gamma must be > 0",
    );
    check(
        config.n_z >= 2,
        "n_z",
        config.n_z.to_string(),
        "n_z must be >= 2",
    );
    check(
        config.n_tau >= 3,
        "n_tau",
        config.n_tau.to_string(),
        "n_tau must be >= 3",
    );
    check(
        config.tau_half_width > 0.0,
        "tau_half_width",
        config.tau_half_width.to_string(),
        "tau_half_width must be > 0",
    );
    if config.use_linearized_eom {
        let limit = 1e-2 * config.omega32.norm().max(config.gamma31);
        check(
            config.probe_amp <= limit,
            "probe_amp",
            config.probe_amp.to_string(),
            &format!("linearized equations require probe_amp <= {limit:e}"),
        );
    }
    out
}

/// Validate the configuration and compute every derived quantity.
pub fn derive_rates(config: &SystemConfig) -> Result<DerivedRates> {
    let diags = validate_config(config);
    if !diags.is_empty() {
        return Err(Error::InvalidConfig(diags));
    }

    let l = lfc_strength(config.n_lambda3);
    let gamma = config.gamma31 + config.gamma32 + config.gamma_s;
    let gamma_dec = config.gamma_deph + config.gamma_s;
    let delta = config.delta31 - config.delta32;
    let lfc_shift = if config.lfc_on {
        l * config.gamma31 / 2.0
    } else {
        0.0
    };
    let om2 = config.omega32.norm_sqr();
    let omega0 = config.omega0_over_gamma * config.gamma31;

    // The dilute limit is taken before dividing by the control intensity so
    // that L = 0 with Ω₃₂ = 0 stays finite.
    let (group_index, group_delay, beta1, beta2) = if l == 0.0 {
        (0.0, 0.0, 0.0, 0.0)
    } else {
        (
            3.0 * l * config.gamma31 * omega0 / om2,
            3.0 * l * config.gamma31 * config.k0z / om2,
            6.0 * l * gamma * config.gamma31 / (om2 * om2),
            6.0 * l * l * config.gamma31 * config.gamma31 / (om2 * om2),
        )
    };

    Ok(DerivedRates {
        gamma31: config.gamma31,
        gamma32: config.gamma32,
        gamma_s: config.gamma_s,
        gamma_deph: config.gamma_deph,
        delta31: config.delta31,
        delta32: config.delta32,
        trap_ratio: config.trap_ratio,
        omega32: config.omega32,
        l,
        gamma,
        gamma_dec,
        gamma31_c: C64::new(gamma / 2.0, -config.delta31),
        gamma21_c: C64::new(gamma_dec, -delta),
        delta,
        lfc_shift,
        delta31_tilde: config.delta31 + lfc_shift,
        group_index,
        group_delay,
        beta1,
        beta2,
        coupling: 1.5 * l * config.gamma31 * config.k0z,
        coupling_control: 1.5 * l * config.gamma32 * config.k0z,
        units: UnitSystem {
            k0z: config.k0z,
            omega0,
        },
        toggles: config.toggles(),
    })
}

/// Initial Gaussian probe envelope Ω₀·exp(−t²/(2σ²)).
pub fn gaussian_input(t: f64, config: &SystemConfig) -> C64 {
    let s = config.probe_width;
    C64::new(config.probe_amp * (-t * t / (2.0 * s * s)).exp(), 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn baseline() -> SystemConfig {
        SystemConfig::default()
    }

    #[test]
    fn lfc_strength_at_reference_density() {
        let r = derive_rates(&baseline()).unwrap();
        assert!((r.l - 50.0 / (4.0 * PI * PI)).abs() < 1e-15);
        assert!((r.l - 1.2665).abs() < 1e-4);
    }

    #[test]
    fn dilute_limit_is_finite() {
        let cfg = SystemConfig {
            n_lambda3: 0.0,
            omega32: C64::new(0.0, 0.0),
            ..baseline()
        };
        let r = derive_rates(&cfg).unwrap();
        assert_eq!(r.l, 0.0);
        assert_eq!(r.beta2, 0.0);
        assert_eq!(r.group_index, 0.0);
        assert_eq!(r.coupling, 0.0);
    }

    #[test]
    fn group_delay_matches_reference_numbers() {
        // γ₃₁ = γ₃₂ = γ/2 and Ω₃₂ = 2γ give a delay of ≈150/γ = 75/γ₃₁.
        let r = derive_rates(&baseline()).unwrap();
        let direct = 3.0 * r.l * 1.0 * 316.0 / 16.0;
        assert!((r.group_delay - direct).abs() < 1e-12);
        assert!((r.group_delay - 75.0).abs() / 75.0 < 0.01);
        let in_gamma_units = r.group_delay * r.natural_linewidth();
        assert!((in_gamma_units - 150.0).abs() / 150.0 < 0.01);
    }

    #[test]
    fn lfc_shift_is_half_linewidth_at_unit_strength() {
        let cfg = SystemConfig {
            n_lambda3: 4.0 * PI * PI,
            omega32: C64::new(0.0, 0.0),
            ..baseline()
        };
        let r = derive_rates(&cfg).unwrap();
        assert!((r.delta31_tilde - r.delta31 - 0.5 * r.gamma31).abs() < 1e-15);
    }

    #[test]
    fn trap_ratio_bounds() {
        let ok = SystemConfig {
            trap_ratio: 0.99,
            ..baseline()
        };
        assert!(validate_config(&ok).is_empty());

        let bad = SystemConfig {
            trap_ratio: 1.0,
            ..baseline()
        };
        let d = validate_config(&bad);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].field, "trap_ratio");
        assert_eq!(d[0].rule, "trap_ratio must be < 1");
    }

    #[test]
    fn negative_width_is_named() {
        let bad = SystemConfig {
            probe_width: -1.0,
            ..baseline()
        };
        let d = validate_config(&bad);
        assert!(d.iter().any(|d| d.field == "probe_width"));
        match derive_rates(&bad) {
            Err(Error::InvalidConfig(list)) => assert_eq!(list, d),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn weak_probe_guard() {
        let cfg = SystemConfig {
            use_linearized_eom: true,
            probe_amp: 0.05,
            ..baseline()
        };
        let d = validate_config(&cfg);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].field, "probe_amp");
        let cfg = SystemConfig {
            probe_amp: 0.04,
            ..cfg
        };
        assert!(validate_config(&cfg).is_empty());
    }

    #[test]
    fn gaussian_input_values() {
        let cfg = baseline();
        let s = cfg.probe_width;
        assert_eq!(gaussian_input(0.0, &cfg).re, cfg.probe_amp);
        let at_sigma = gaussian_input(s, &cfg).re;
        assert!((at_sigma - cfg.probe_amp * (-0.5f64).exp()).abs() < 1e-18);
        let edge = gaussian_input(6.0 * s, &cfg).norm();
        assert!(edge < 1e-7 * cfg.probe_amp);
        let edge = gaussian_input(-6.0 * s, &cfg).norm();
        assert!(edge < 1e-7 * cfg.probe_amp);
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = SystemConfig::from_json(r#"{"gamma31": 1.0, "bogus": 2}"#).unwrap_err();
        assert!(err.is_config_error());
        assert!(err.to_string().contains("bogus"));
    }

    #[test]
    fn complex_control_field_round_trips() {
        let cfg = SystemConfig {
            omega32: C64::new(3.0, -1.5),
            ..baseline()
        };
        let back = SystemConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
        let real = SystemConfig::from_json(r#"{"omega32": 2.5}"#).unwrap();
        assert_eq!(real.omega32, C64::new(2.5, 0.0));
    }

    #[test]
    fn scale_covariance() {
        let cfg = SystemConfig {
            delta31: 0.3,
            delta32: -0.1,
            ..baseline()
        };
        let s = 2.5;
        let scaled = SystemConfig {
            gamma31: cfg.gamma31 * s,
            gamma32: cfg.gamma32 * s,
            gamma_deph: cfg.gamma_deph * s,
            gamma_s: cfg.gamma_s * s,
            delta31: cfg.delta31 * s,
            delta32: cfg.delta32 * s,
            omega32: cfg.omega32 * s,
            ..cfg.clone()
        };
        let a = derive_rates(&cfg).unwrap();
        let b = derive_rates(&scaled).unwrap();
        let rel = |x: f64, y: f64| ((x - y) / y).abs();
        assert_eq!(a.l, b.l);
        assert!(rel(b.gamma, s * a.gamma) < 1e-14);
        assert!(rel(b.gamma_dec, s * a.gamma_dec) < 1e-14);
        // β₁ ∝ γγ₃₁/Ω⁴ and β₂ ∝ γ₃₁²/Ω⁴ both scale as s⁻².
        assert!(rel(b.beta1, a.beta1 / (s * s)) < 1e-14);
        assert!(rel(b.beta2, a.beta2 / (s * s)) < 1e-14);
        // n_g ∝ γ₃₁ω₀/Ω² with ω₀/γ₃₁ fixed is scale invariant.
        assert!(rel(b.group_index, a.group_index) < 1e-14);
        assert!(rel(b.group_delay, a.group_delay / s) < 1e-14);
    }
}
