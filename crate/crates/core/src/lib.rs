//! Pulse propagation through a dense Λ-type EIT medium with local-field
//! correction and radiation trapping.

pub mod analytic;
pub mod bloch;
pub mod contour;
pub mod error;
pub mod fit;
pub mod model;
pub mod propagation;
pub mod presets;
pub mod pulse;
pub mod scan;
pub mod susceptibility;

pub use error::{Diagnostic, Error, Result};
pub use model::{derive_rates, validate_config, DerivedRates, InitialState, SystemConfig};
