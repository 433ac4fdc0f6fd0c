use std::fmt;

use thiserror::Error;

/// A single violated configuration rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub field: &'static str,
    pub value: String,
    pub rule: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}: {}", self.field, self.value, self.rule)
    }
}

fn join(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {}", join(.0))]
    InvalidConfig(Vec<Diagnostic>),

    #[error("could not parse configuration: {0}")]
    Json(#[from] serde_json::Error),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("susceptibility pole at delta31 = {delta31} (|denominator| = {modulus:e})")]
    Pole { delta31: f64, modulus: f64 },

    #[error("1 + chi = {re} + {im}i lies on the branch cut of the square root")]
    Branch { re: f64, im: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("step size {dt} exceeds the admissible maximum {dt_max}")]
    StepTooLarge { dt: f64, dt_max: f64 },

    #[error("steady state did not converge (residual {residual:e})")]
    SteadyState { residual: f64 },

    #[error("grid resolution: {0}")]
    Resolution(String),

    #[error("solution diverged at z index {z_index}, tau index {tau_index}")]
    Divergence { z_index: usize, tau_index: usize },

    #[error("pulse peak at tau = {tau} is within 3 sigma of the window edge")]
    PeakAtBoundary { tau: f64 },

    #[error("{failed} of {total} scan cells failed")]
    ScanAborted { failed: usize, total: usize },
}

impl Error {
    /// True for errors caused by bad user input rather than by the solver.
    /// An under-resolved grid counts as input: n_z and n_tau are config fields.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidConfig(_) | Error::Json(_) | Error::UnknownPreset(_) | Error::Resolution(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
