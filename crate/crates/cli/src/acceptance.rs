//! The acceptance criteria, each evaluated at its stated tolerance.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::time::Instant;

use eit_core::analytic::{alpha_lfc, polarization_components, AnalyticPulse};
use eit_core::bloch::{self, min_eigenvalue, step_rk4, AtomicModel, FullModel, Matrix3c};
use eit_core::contour::{distance_to, polylines_cross, Polyline};
use eit_core::model::gaussian_input;
use eit_core::presets;
use eit_core::propagation::{propagate_stored, FieldRecord};
use eit_core::pulse::{measure_pulse, PulseMetrics};
use eit_core::scan::{run_scan, ScanSpec};
use eit_core::susceptibility::{chi, dispersion_expansion, steady_state_chi_oracle};
use eit_core::{derive_rates, DerivedRates, Error, SystemConfig};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub const CRITERIA: [(u8, &str); 10] = [
    (1, "transparency-window reshaping"),
    (2, "baseline transmission"),
    (3, "slow-light delay"),
    (4, "analytic-numeric envelope"),
    (5, "phase modulation"),
    (6, "broadening"),
    (7, "susceptibility oracle"),
    (8, "integrator properties"),
    (9, "scan structure"),
    (10, "polarization phase relations"),
];

#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub id: u8,
    pub name: &'static str,
    pub pass: bool,
    pub measured: String,
    pub expected: String,
    pub seconds: f64,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {:>2} {}: measured {}; expected {} ({:.1} s)",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.measured,
            self.expected,
            self.seconds
        )
    }
}

struct Check {
    pass: bool,
    measured: String,
    expected: String,
}

pub fn run(id: u8) -> Outcome {
    let name = CRITERIA
        .iter()
        .find(|(k, _)| *k == id)
        .map(|(_, n)| *n)
        .unwrap_or("unknown criterion");
    let start = Instant::now();
    let result = match id {
        1 => window_reshaping(),
        2 => baseline_transmission(),
        3 => slow_light_delay(),
        4 => envelope_equivalence(),
        5 => phase_modulation(),
        6 => broadening(),
        7 => susceptibility_oracle(),
        8 => integrator_properties(),
        9 => scan_structure(),
        10 => polarization_phases(),
        _ => Ok(Check {
            pass: false,
            measured: "-".into(),
            expected: "criterion id 1..=10".into(),
        }),
    };
    let check = result.unwrap_or_else(|e| Check {
        pass: false,
        measured: format!("error: {e}"),
        expected: "a completed run".into(),
    });
    Outcome {
        id,
        name,
        pass: check.pass,
        measured: check.measured,
        expected: check.expected,
        seconds: start.elapsed().as_secs_f64(),
    }
}

pub fn run_all(ids: &[u8]) -> Vec<Outcome> {
    ids.iter().map(|&id| run(id)).collect()
}

fn within(value: f64, target: f64, rel: f64) -> bool {
    (value - target).abs() <= rel * target.abs()
}

fn preset(name: &str) -> SystemConfig {
    presets::config(name).expect("built-in preset")
}

/// fig4 without trapping and without γ_s, the conditions of criteria 4 to 6.
fn fig4_no_gs() -> SystemConfig {
    SystemConfig {
        trapping_on: false,
        gamma_s: 0.0,
        ..preset("fig4")
    }
}

fn exit_metrics(cfg: &SystemConfig) -> Result<(FieldRecord, PulseMetrics), Error> {
    let rec = propagate_stored(cfg, usize::MAX)?;
    let m = measure_pulse(&rec.tau, rec.output(), cfg.probe_width, cfg.probe_amp)?;
    Ok((rec, m))
}

// 1

struct WindowShape {
    /// Largest |Re χ(Δ) + Re χ(−Δ)| and |Im χ(Δ) − Im χ(−Δ)|, relative to max |χ|.
    odd_error: f64,
    even_error: f64,
    /// Midpoint of the two flanking maxima of Im χ.
    centre: f64,
}

fn window_shape(cfg: &SystemConfig) -> Result<WindowShape, Error> {
    let r = derive_rates(cfg)?;
    let n = 1600;
    let h = 8.0 / n as f64;
    let xs: Vec<f64> = (-(n as i64)..=n as i64).map(|k| k as f64 * h).collect();
    let c: Vec<C64> = xs.iter().map(|&d| chi(d, &r, r.omega32)).collect::<Result<_, _>>()?;
    let scale = c.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let (mut odd, mut even) = (0.0f64, 0.0f64);
    for k in 0..c.len() {
        let m = c[c.len() - 1 - k];
        odd = odd.max((c[k].re + m.re).abs() / scale);
        even = even.max((c[k].im - m.im).abs() / scale);
    }
    let mut peaks: Vec<usize> = (1..c.len() - 1)
        .filter(|&k| c[k].im > c[k - 1].im && c[k].im >= c[k + 1].im)
        .collect();
    peaks.sort_by(|&a, &b| c[b].im.total_cmp(&c[a].im));
    let centre = if peaks.len() >= 2 {
        0.5 * (xs[peaks[0]] + xs[peaks[1]])
    } else {
        f64::NAN
    };
    Ok(WindowShape {
        odd_error: odd,
        even_error: even,
        centre,
    })
}

fn window_reshaping() -> Result<Check, Error> {
    let a = window_shape(&SystemConfig {
        lfc_on: false,
        ..preset("fig2a")
    })?;
    let a_lfc = window_shape(&preset("fig2a"))?;
    let b = window_shape(&preset("fig2b"))?;
    let sym_a = a.odd_error <= 1e-6 && a.even_error <= 1e-6;
    let sym_b = b.odd_error <= 1e-6 && b.even_error <= 1e-6;
    let shifted = b.centre.abs() >= 0.1 && a_lfc.centre.abs() < 0.1;
    Ok(Check {
        pass: sym_a && !sym_b && shifted,
        measured: format!(
            "fig2a symmetry errors {:.1e}/{:.1e}, centre {:.3}; fig2b symmetry errors {:.2}/{:.2}, centre {:.3}",
            a.odd_error, a.even_error, a_lfc.centre, b.odd_error, b.even_error, b.centre
        ),
        expected: "fig2a odd/even to 1e-6 without the LFC shift; fig2b asymmetric with centre displaced by >= 0.1".into(),
    })
}

// 2

fn baseline_transmission() -> Result<Check, Error> {
    let start = Instant::now();
    let (_, m) = exit_metrics(&preset("fig3-baseline"))?;
    let secs = start.elapsed().as_secs_f64();
    Ok(Check {
        pass: (m.peak_ratio - 0.5).abs() <= 0.1 && secs <= 60.0,
        measured: format!("peak ratio {:.4} in {secs:.1} s", m.peak_ratio),
        expected: "0.50 +/- 0.10 within 60 s".into(),
    })
}

// 3

fn slow_light_delay() -> Result<Check, Error> {
    let cfg = SystemConfig {
        gamma_deph: 0.0,
        ..fig4_no_gs()
    };
    let r = derive_rates(&cfg)?;
    let (_, m) = exit_metrics(&cfg)?;
    let in_gamma = m.arrival * r.natural_linewidth();
    let fd = dispersion_expansion(&r, r.omega32)?.numeric.delay();
    let ratio = m.arrival / r.group_delay;
    Ok(Check {
        pass: within(in_gamma, 150.0, 0.02) && within(m.arrival, fd, 0.02) && (0.98..=1.02).contains(&ratio),
        measured: format!(
            "delay {in_gamma:.2}/gamma, finite-difference delay {:.2}/gamma, ratio to n_g prediction {ratio:.4}",
            fd * r.natural_linewidth()
        ),
        expected: "150/gamma within 2%, equal to dk/dDelta31 within 2%, ratio in [0.98, 1.02]".into(),
    })
}

// 4 to 6

fn envelope_equivalence() -> Result<Check, Error> {
    let cfg = fig4_no_gs();
    let r = derive_rates(&cfg)?;
    let rec = propagate_stored(&cfg, usize::MAX)?;
    let p = AnalyticPulse::at_depth(&r, cfg.probe_amp, cfg.probe_width, 1.0);
    let exact: Vec<C64> = rec.tau.iter().map(|&t| p.envelope(t)).collect();
    let scale = exact.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let dist = rec
        .output()
        .iter()
        .zip(&exact)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
        / scale;
    Ok(Check {
        pass: dist <= 0.05,
        measured: format!("relative L-infinity distance {dist:.4}"),
        expected: "<= 0.05".into(),
    })
}

fn phase_modulation() -> Result<Check, Error> {
    let cfg = fig4_no_gs();
    let r = derive_rates(&cfg)?;
    let (_, m) = exit_metrics(&cfg)?;
    let sigma = cfg.probe_width;
    let peak_target = r.beta2 * r.units.k0z / (sigma * sigma);
    let chirp_target = alpha_lfc(r.beta2, r.units.k0z, sigma);
    let g2 = r.natural_linewidth().powi(2);
    Ok(Check {
        pass: within(m.phase_fit.peak_value, peak_target, 0.1) && within(m.chirp.slope, chirp_target, 0.1),
        measured: format!(
            "parabola peak {:.4} rad, chirp {:.3e} gamma^2",
            m.phase_fit.peak_value,
            m.chirp.slope / g2
        ),
        expected: format!("{peak_target:.4} rad and {:.3e} gamma^2, each within 10%", chirp_target / g2),
    })
}

fn broadening() -> Result<Check, Error> {
    let cfg = fig4_no_gs();
    let r = derive_rates(&cfg)?;
    let (_, m) = exit_metrics(&cfg)?;
    let target = cfg.probe_width.powi(2) + 2.0 * r.units.k0z * r.beta1;
    let g2 = r.natural_linewidth().powi(2);
    let w2 = m.width * m.width;
    Ok(Check {
        pass: within(w2, target, 0.05),
        measured: format!("width^2 {:.1}/gamma^2", w2 * g2),
        expected: format!("{:.1}/gamma^2 within 5%", target * g2),
    })
}

// 7

fn susceptibility_oracle() -> Result<Check, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut worst_linear = 0.0f64;
    for _ in 0..100 {
        let cfg = SystemConfig {
            gamma_deph: rng.gen_range(0.0..0.05),
            gamma_s: rng.gen_range(0.0..0.01),
            delta32: rng.gen_range(-1.0..1.0),
            omega32: C64::new(rng.gen_range(0.5..8.0), 0.0),
            n_lambda3: rng.gen_range(0.0..200.0),
            probe_amp: 1e-4,
            use_linearized_eom: true,
            ..SystemConfig::default()
        };
        let d = rng.gen_range(-6.0..6.0);
        let r = derive_rates(&cfg)?;
        let a = chi(d, &r, r.omega32)?;
        let b = steady_state_chi_oracle(d, &cfg)?;
        worst_linear = worst_linear.max((a - b).norm() / a.norm());
    }

    let full = SystemConfig {
        probe_amp: 2e-4,
        gamma_s: 0.0,
        trapping_on: false,
        ..preset("fig3-baseline")
    };
    let r = derive_rates(&full)?;
    let mut worst_full = 0.0f64;
    for k in -20..=20 {
        let d = 0.2 * k as f64;
        let a = chi(d, &r, r.omega32)?;
        let b = steady_state_chi_oracle(d, &full)?;
        worst_full = worst_full.max((a - b).norm() / a.norm());
    }
    Ok(Check {
        pass: worst_linear <= 1e-10 && worst_full <= 1e-4,
        measured: format!("linearized {worst_linear:.1e} over 100 draws, full master equation {worst_full:.1e}"),
        expected: "<= 1e-10 and <= 1e-4".into(),
    })
}

// 8

fn ideal_rates() -> Result<DerivedRates, Error> {
    derive_rates(&SystemConfig {
        trapping_on: false,
        gamma_s: 0.0,
        gamma_deph: 0.0,
        ..SystemConfig::default()
    })
}

fn free_decay(r: &DerivedRates, dt: f64, steps: usize) -> Result<f64, Error> {
    let model = FullModel::new(r);
    let mut s = Matrix3c::zeros();
    s[(2, 2)] = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    for n in 0..steps {
        s = step_rk4(&model, &s, |_| (zero, zero), n as f64 * dt, dt)?;
    }
    Ok(s[(2, 2)].re)
}

fn integrator_properties() -> Result<Check, Error> {
    let cfg = SystemConfig::default();
    let r = derive_rates(&cfg)?;
    let dt = r.dt_max();

    let model = FullModel::new(&r);
    let strong = SystemConfig {
        probe_amp: 0.3,
        ..cfg.clone()
    };
    let mut s = model.initial();
    for n in 0..100_000 {
        let t = n as f64 * dt;
        s = step_rk4(&model, &s, |tt| (gaussian_input(tt - 60.0, &strong), r.omega32), t, dt)?;
    }
    let drift = (s.trace() - C64::new(1.0, 0.0)).norm();

    let ideal = ideal_rates()?;
    let (h, n) = (0.0125, 80);
    let reference = free_decay(&ideal, h / 8.0, 8 * n)?;
    let e1 = (free_decay(&ideal, h, n)? - reference).abs();
    let e2 = (free_decay(&ideal, h / 2.0, 2 * n)? - reference).abs();
    let order_ratio = e1 / e2;

    let mut stationary = FullModel::new(&r);
    stationary.initial = bloch::steady_state_full(C64::new(0.0, 0.0), r.omega32, &r)?;
    let mut floor = f64::INFINITY;
    for amp in [cfg.probe_amp, 1.0] {
        let pulse = SystemConfig {
            probe_amp: amp,
            ..cfg.clone()
        };
        let mut s = stationary.initial();
        for n in 0..12_000 {
            let t = n as f64 * dt;
            s = step_rk4(&stationary, &s, |tt| (gaussian_input(tt - 80.0, &pulse), r.omega32), t, dt)?;
            floor = floor.min(min_eigenvalue(&s));
        }
    }
    Ok(Check {
        pass: drift <= 1e-9 && (order_ratio - 16.0).abs() <= 3.0 && floor >= -1e-9,
        measured: format!("trace drift {drift:.1e}, convergence ratio {order_ratio:.2}, eigenvalue floor {floor:.1e}"),
        expected: "drift <= 1e-9, ratio 16 +/- 3, floor >= -1e-9".into(),
    })
}

// 9

/// The scan runs at a reduced propagation grid; see the README.
pub fn scan_base() -> SystemConfig {
    SystemConfig {
        n_z: 40,
        n_tau: 1001,
        ..preset("fig3-baseline")
    }
}

fn scale_lines(lines: &[Polyline], dlx: f64, dy: f64) -> Vec<Polyline> {
    lines
        .iter()
        .map(|l| l.iter().map(|&(x, y)| (x.ln() / dlx, y / dy)).collect())
        .collect()
}

fn scan_structure() -> Result<Check, Error> {
    let base = scan_base();
    let spec = ScanSpec::default();
    let map = run_scan(&base, &spec)?;
    let increase = map.max_increase();
    let mut crossing = false;
    for i in 0..map.contours.len() {
        for j in i + 1..map.contours.len() {
            crossing |= polylines_cross(&map.contours[i].lines, &map.contours[j].lines);
        }
    }
    // Nested sub-level sets: a node below a level is below every higher level.
    let mut nested = true;
    for row in &map.ratio {
        for &v in row.iter().filter(|v| !v.is_nan()) {
            let below: Vec<bool> = map.contours.iter().map(|c| v < c.level).collect();
            for (a, ca) in map.contours.iter().enumerate() {
                for (b, cb) in map.contours.iter().enumerate() {
                    if ca.level < cb.level && below[a] && !below[b] {
                        nested = false;
                    }
                }
            }
        }
    }
    let dlx = map.gs[1].ln() - map.gs[0].ln();
    let dy = map.trap[1] - map.trap[0];
    let half = map.contours.iter().find(|c| c.level == 0.5).map(|c| c.lines.clone()).unwrap_or_default();
    let point = (base.gamma_s.ln() / dlx, base.trap_ratio / dy);
    let dist = distance_to(&scale_lines(&half, dlx, dy), point);
    let min = map.ratio.iter().flatten().filter(|v| !v.is_nan()).fold(f64::INFINITY, |m, &v| m.min(v));
    let counts: Vec<String> = map
        .contours
        .iter()
        .map(|c| format!("{}: {} line(s)", c.level, c.lines.len()))
        .collect();
    Ok(Check {
        pass: increase <= 0.0 && !crossing && nested && dist <= 1.0,
        measured: format!(
            "max increase {increase:.1e}, {} failed cell(s), contours crossing: {crossing}, nested: {nested}, \
             0.50 contour {dist:.2} cells from baseline, min ratio {min:.3}, [{}]",
            map.failed_cells(),
            counts.join(", ")
        ),
        expected: "monotone non-increasing, nested non-crossing contours, 0.50 contour within 1 cell".into(),
    })
}

// 10

fn polarization_phases() -> Result<Check, Error> {
    let r = derive_rates(&fig4_no_gs())?;
    let ideal = AnalyticPulse::at_depth(&r, 1.0, 10.0, 1.0).without_lfc().without_decay();
    let with_beta2 = AnalyticPulse {
        beta2: r.beta2,
        ..ideal
    };
    let w = ideal.local_width();
    let rel = |p: C64, e: C64| (p / e).arg();
    let (mut worst_p0, mut worst_out, mut worst_in) = (0.0f64, 0.0f64, 0.0f64);
    for k in 0..=800 {
        let s = -4.0 * w + 8.0 * w * k as f64 / 800.0;
        let t = ideal.delay + s;
        if s.abs() >= 0.05 * w {
            let (p0, _) = polarization_components(t, &ideal);
            let want = if s < 0.0 { FRAC_PI_2 } else { -FRAC_PI_2 };
            worst_p0 = worst_p0.max((rel(p0, ideal.envelope(t)) - want).abs());
        }
        if (s.abs() - w).abs() >= 0.1 * w {
            let (_, plfc) = polarization_components(t, &with_beta2);
            let d = rel(plfc, with_beta2.envelope(t)).abs();
            if s.abs() > w {
                worst_out = worst_out.max(PI - d);
            } else {
                worst_in = worst_in.max(d);
            }
        }
    }
    Ok(Check {
        pass: worst_p0 <= 0.2 && worst_out <= 0.2 && worst_in <= 0.2,
        measured: format!(
            "P0 offset from +/-pi/2 {worst_p0:.1e} rad; P_LFC offset from pi outside {worst_out:.1e}, from 0 inside {worst_in:.1e}"
        ),
        expected: "each <= 0.2 rad".into(),
    })
}
