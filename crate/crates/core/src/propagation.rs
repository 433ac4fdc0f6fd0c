//! Maxwell–Bloch propagation in the retarded frame.
//!
//! The depth z is normalised to [0, 1]; the physical scale enters only
//! through g·z_total. All atoms on the z grid are advanced together in τ by
//! RK4. At every stage the field along z is rebuilt from the input and a
//! cumulative trapezoid of iρ₃₁, which is the implicit trapezoidal rule in z
//! for the field equation ∂_zΩ = i·g·ρ₃₁.

use num_complex::Complex64 as C64;

use crate::bloch::{self, AtomicModel, FullModel, LinearModel, StateVector};
use crate::error::{Error, Result};
use crate::model::{derive_rates, gaussian_input, DerivedRates, InitialState, SystemConfig};

const I: C64 = C64::new(0.0, 1.0);

/// g·z_total for the probe transition: the value that makes the weak-probe
/// gain over the full depth equal exp[i(k₀z/2)χ].
pub fn coupling_constant(rates: &DerivedRates) -> f64 {
    1.5 * rates.l * rates.gamma31 * rates.units.k0z
}

/// Uniform (z, τ) sampling of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub n_z: usize,
    pub tau0: f64,
    pub dtau: f64,
    pub n_tau: usize,
}

impl Grid {
    /// τ ∈ [−w, group_delay + w] with w = tau_half_width, so both the input
    /// and the delayed pulse keep a margin of w.
    pub fn for_config(config: &SystemConfig, rates: &DerivedRates) -> Result<Self> {
        let w = config.tau_half_width;
        let tau1 = rates.group_delay + w;
        let grid = Grid {
            n_z: config.n_z,
            tau0: -w,
            dtau: (tau1 + w) / (config.n_tau - 1) as f64,
            n_tau: config.n_tau,
        };
        let sigma = config.probe_width;
        if w < 6.0 * sigma {
            return Err(Error::Resolution(format!(
                "tau_half_width = {w} must be at least 6 probe widths ({})",
                6.0 * sigma
            )));
        }
        if sigma / grid.dtau < 40.0 {
            return Err(Error::Resolution(format!(
                "{:.1} samples per probe width; at least 40 needed (raise n_tau)",
                sigma / grid.dtau
            )));
        }
        let dz = 1.0 / (config.n_z - 1) as f64;
        if rates.group_delay * dz > 0.25 * sigma {
            return Err(Error::Resolution(format!(
                "delay per z step {:.3} exceeds a quarter probe width (raise n_z)",
                rates.group_delay * dz
            )));
        }
        Ok(grid)
    }

    pub fn tau(&self) -> Vec<f64> {
        (0..self.n_tau).map(|j| self.tau0 + j as f64 * self.dtau).collect()
    }

    pub fn z(&self) -> Vec<f64> {
        (0..self.n_z).map(|k| k as f64 / (self.n_z - 1) as f64).collect()
    }
}

/// Sampled probe (and optionally control) envelopes.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldRecord {
    /// Normalised depths of the stored slices.
    pub z: Vec<f64>,
    pub tau: Vec<f64>,
    /// `probe[i][j]` is Ω₃₁ at `z[i]`, `tau[j]`.
    pub probe: Vec<Vec<C64>>,
    pub control: Option<Vec<Vec<C64>>>,
}

impl FieldRecord {
    pub fn input(&self) -> &[C64] {
        &self.probe[0]
    }

    pub fn output(&self) -> &[C64] {
        self.probe.last().expect("record has at least one slice")
    }
}

/// Propagate the Gaussian input pulse of `config`, storing every depth.
pub fn propagate(config: &SystemConfig) -> Result<FieldRecord> {
    propagate_stored(config, 1)
}

/// As [`propagate`], keeping every `store_every`-th depth plus the exit.
pub fn propagate_stored(config: &SystemConfig, store_every: usize) -> Result<FieldRecord> {
    let rates = derive_rates(config)?;
    let grid = Grid::for_config(config, &rates)?;
    propagate_on(config, &grid, &|t| gaussian_input(t, config), store_every)
}

/// Propagate an arbitrary input envelope on an explicit grid.
pub fn propagate_on(
    config: &SystemConfig,
    grid: &Grid,
    input: &dyn Fn(f64) -> C64,
    store_every: usize,
) -> Result<FieldRecord> {
    let rates = derive_rates(config)?;
    if config.use_linearized_eom {
        let model = LinearModel { rates: &rates };
        march(&model, config, &rates, grid, input, store_every)
    } else {
        let mut model = FullModel::new(&rates);
        if config.initial_state == InitialState::SteadyState {
            model.initial = bloch::steady_state_full(C64::new(0.0, 0.0), config.omega32, &rates)?;
        }
        march(&model, config, &rates, grid, input, store_every)
    }
}

struct Line<'a, M: AtomicModel> {
    model: &'a M,
    g_dz: f64,
    gc_dz: f64,
    control0: C64,
    propagate_control: bool,
}

impl<M: AtomicModel> Line<'_, M> {
    /// Fields along z for the given atomic states and input probe.
    fn fields(&self, states: &[M::State], probe_in: C64, probe: &mut [C64], control: &mut [C64]) {
        probe[0] = probe_in;
        control[0] = self.control0;
        let mut prev31 = M::rho31(&states[0]);
        let mut prev32 = M::rho32(&states[0]);
        for k in 1..states.len() {
            let r31 = M::rho31(&states[k]);
            probe[k] = probe[k - 1] + I * (0.5 * self.g_dz) * (prev31 + r31);
            prev31 = r31;
            if self.propagate_control {
                let r32 = M::rho32(&states[k]);
                control[k] = control[k - 1] + I * (0.5 * self.gc_dz) * (prev32 + r32);
                prev32 = r32;
            } else {
                control[k] = self.control0;
            }
        }
    }

    fn derivative(&self, states: &[M::State], probe_in: C64, buf: &mut Buffers, out: &mut Vec<M::State>) {
        self.fields(states, probe_in, &mut buf.probe, &mut buf.control);
        out.clear();
        out.extend(
            states
                .iter()
                .zip(buf.probe.iter().zip(&buf.control))
                .map(|(s, (p, c))| self.model.derivative(s, *p, *c)),
        );
    }
}

struct Buffers {
    probe: Vec<C64>,
    control: Vec<C64>,
}

fn march<M: AtomicModel>(
    model: &M,
    config: &SystemConfig,
    rates: &DerivedRates,
    grid: &Grid,
    input: &dyn Fn(f64) -> C64,
    store_every: usize,
) -> Result<FieldRecord> {
    let n_z = grid.n_z;
    let dz = 1.0 / (n_z - 1) as f64;
    let line = Line {
        model,
        g_dz: coupling_constant(rates) * dz,
        gc_dz: 1.5 * rates.l * rates.gamma32 * rates.units.k0z * dz,
        control0: config.omega32,
        propagate_control: config.propagate_control,
    };

    let stride = store_every.max(1);
    let mut stored: Vec<usize> = (0..n_z).step_by(stride).collect();
    if *stored.last().unwrap() != n_z - 1 {
        stored.push(n_z - 1);
    }

    let substeps = (grid.dtau / rates.dt_max()).ceil().max(1.0) as usize;
    let h = grid.dtau / substeps as f64;

    let mut y = vec![model.initial(); n_z];
    let mut tmp = y.clone();
    let (mut k1, mut k2, mut k3, mut k4) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let mut buf = Buffers {
        probe: vec![C64::new(0.0, 0.0); n_z],
        control: vec![C64::new(0.0, 0.0); n_z],
    };

    let mut probe_out = vec![Vec::with_capacity(grid.n_tau); stored.len()];
    let mut control_out = vec![Vec::with_capacity(grid.n_tau); stored.len()];
    let mut record = |y: &[M::State], t: f64, j: usize, buf: &mut Buffers| -> Result<()> {
        line.fields(y, input(t), &mut buf.probe, &mut buf.control);
        if let Some(k) = buf.probe.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Divergence {
                z_index: k,
                tau_index: j,
            });
        }
        for (slot, &k) in stored.iter().enumerate() {
            probe_out[slot].push(buf.probe[k]);
            control_out[slot].push(buf.control[k]);
        }
        Ok(())
    };

    record(&y, grid.tau0, 0, &mut buf)?;
    for j in 1..grid.n_tau {
        for s in 0..substeps {
            let t = grid.tau0 + (j - 1) as f64 * grid.dtau + s as f64 * h;
            line.derivative(&y, input(t), &mut buf, &mut k1);
            axpy(&mut tmp, &y, &k1, 0.5 * h);
            line.derivative(&tmp, input(t + 0.5 * h), &mut buf, &mut k2);
            axpy(&mut tmp, &y, &k2, 0.5 * h);
            line.derivative(&tmp, input(t + 0.5 * h), &mut buf, &mut k3);
            axpy(&mut tmp, &y, &k3, h);
            line.derivative(&tmp, input(t + h), &mut buf, &mut k4);
            for k in 0..n_z {
                y[k] = y[k]
                    .add_scaled(&k1[k], h / 6.0)
                    .add_scaled(&k2[k], h / 3.0)
                    .add_scaled(&k3[k], h / 3.0)
                    .add_scaled(&k4[k], h / 6.0);
            }
        }
        if let Some(k) = y.iter().position(|s| !s.is_finite()) {
            return Err(Error::Divergence {
                z_index: k,
                tau_index: j,
            });
        }
        record(&y, grid.tau0 + j as f64 * grid.dtau, j, &mut buf)?;
    }

    Ok(FieldRecord {
        z: stored.iter().map(|&k| k as f64 * dz).collect(),
        tau: grid.tau(),
        probe: probe_out,
        control: config.propagate_control.then_some(control_out),
    })
}

fn axpy<S: StateVector>(out: &mut [S], y: &[S], k: &[S], h: f64) {
    for ((o, a), b) in out.iter_mut().zip(y).zip(k) {
        *o = a.add_scaled(b, h);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coupling_reference_value() {
        let r = derive_rates(&SystemConfig::default()).unwrap();
        // 1.5·L·γ₃₁·k₀z with γ₃₁ = 0.5γ gives ≈300 per γ, i.e. ≈600 per γ₃₁.
        let g = coupling_constant(&r);
        assert!((g / r.natural_linewidth() - 300.2).abs() < 0.1, "{g}");
        assert_eq!(g, r.coupling);
    }

    #[test]
    fn coupling_is_linear_in_density() {
        let a = derive_rates(&SystemConfig::default()).unwrap();
        let b = derive_rates(&SystemConfig {
            n_lambda3: 100.0,
            ..SystemConfig::default()
        })
        .unwrap();
        assert!((coupling_constant(&b) - 2.0 * coupling_constant(&a)).abs() < 1e-12);
        let z = derive_rates(&SystemConfig {
            n_lambda3: 0.0,
            ..SystemConfig::default()
        })
        .unwrap();
        assert_eq!(coupling_constant(&z), 0.0);
    }

    #[test]
    fn grid_checks() {
        let cfg = SystemConfig::default();
        let r = derive_rates(&cfg).unwrap();
        let g = Grid::for_config(&cfg, &r).unwrap();
        assert!((g.tau()[g.n_tau - 1] - (r.group_delay + cfg.tau_half_width)).abs() < 1e-9);
        let coarse = SystemConfig { n_tau: 200, ..cfg.clone() };
        assert!(matches!(Grid::for_config(&coarse, &r), Err(Error::Resolution(_))));
        let narrow = SystemConfig {
            tau_half_width: 50.0,
            ..cfg.clone()
        };
        assert!(matches!(Grid::for_config(&narrow, &r), Err(Error::Resolution(_))));
        let shallow = SystemConfig { n_z: 10, ..cfg };
        assert!(matches!(Grid::for_config(&shallow, &r), Err(Error::Resolution(_))));
    }
}
