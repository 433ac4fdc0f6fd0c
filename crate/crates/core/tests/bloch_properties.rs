use eit_core::bloch::{
    self, full_derivative, lindblad_rhs, min_eigenvalue, step_rk4, AtomicModel, DensityMatrix, FullModel,
    LinearModel, LinearState, LocalFields, Matrix3c, PumpRates,
};
use eit_core::model::{derive_rates, gaussian_input, DerivedRates, SystemConfig};
use num_complex::Complex64 as C64;
use proptest::prelude::*;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn unit(i: usize, j: usize) -> Matrix3c {
    let mut m = Matrix3c::zeros();
    m[(i, j)] = c(1.0);
    m
}

fn dissipator(op: &Matrix3c, rho: &Matrix3c) -> Matrix3c {
    let od = op.adjoint();
    let n = od * op;
    op * rho * od - (n * rho + rho * n) * c(0.5)
}

/// Matrix-form generator built from the Hamiltonian and jump operators.
fn generator_oracle(rho: &Matrix3c, f: &LocalFields, p: &PumpRates, r: &DerivedRates) -> Matrix3c {
    let i = C64::new(0.0, 1.0);
    let a31 = unit(2, 0);
    let a32 = unit(2, 1);
    let drive = a31 * f.omega31_mic + a32 * f.omega32_mic;
    let h = -(unit(1, 1) * c(r.delta) + unit(2, 2) * c(r.delta31)) - (drive + drive.adjoint()) * c(0.5);
    let mut d = -(h * rho - rho * h) * i;
    d += dissipator(&unit(0, 2), rho) * c(r.gamma31);
    d += dissipator(&unit(1, 2), rho) * c(r.gamma32);
    // Pumping acts in both directions: −(R/2)([A₃ⱼ,[Aⱼ₃,ρ]] + h.c.).
    d += (dissipator(&a31, rho) + dissipator(&unit(0, 2), rho)) * c(p.r31);
    d += (dissipator(&a32, rho) + dissipator(&unit(1, 2), rho)) * c(p.r32);
    d += (dissipator(&unit(0, 1), rho) + dissipator(&unit(1, 0), rho)) * c(r.gamma_s);
    let cross = unit(1, 1) * rho * unit(0, 0);
    d -= (cross + cross.adjoint()) * c(r.gamma_deph);
    d
}

fn random_state(v: &[f64]) -> Matrix3c {
    let a = Matrix3c::from_iterator((0..9).map(|k| C64::new(v[2 * k], v[2 * k + 1])));
    let m = a * a.adjoint();
    let tr = m.trace();
    let mut m = m / tr;
    for k in 0..3 {
        m[(k, k)].im = 0.0;
    }
    m
}

fn baseline() -> DerivedRates {
    derive_rates(&SystemConfig::default()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generator_is_traceless_hermitian_and_matches_matrix_form(
        v in prop::collection::vec(-1.0f64..1.0, 18),
        probe_re in -0.5f64..0.5,
        probe_im in -0.5f64..0.5,
    ) {
        let r = baseline();
        let m = random_state(&v);
        prop_assume!(m.iter().all(|z| z.norm().is_finite()));
        let rho = DensityMatrix::new(m).unwrap();
        let probe = C64::new(probe_re, probe_im);
        let fields = LocalFields::resolve(probe, r.omega32, &m, &r);
        let d = lindblad_rhs(&rho, &fields, &r);
        prop_assert!(d.trace().norm() <= 1e-13);
        prop_assert!(bloch::hermiticity_error(&d) <= 1e-13);
        let pumps = PumpRates::from_population(rho.population(3), &r);
        let o = generator_oracle(&m, &fields, &pumps, &r);
        prop_assert!((d - o).iter().map(|z| z.norm()).fold(0.0, f64::max) <= 1e-13);
    }
}

#[test]
fn local_field_substitution() {
    let r = baseline();
    let mut m = DensityMatrix::ground().into_matrix();
    m[(2, 0)] = C64::new(0.01, -0.02);
    m[(2, 1)] = C64::new(-0.03, 0.005);
    let f = LocalFields::resolve(c(0.1), r.omega32, &m, &r);
    assert_eq!(f.omega31_mic, c(0.1) + m[(2, 0)] * (r.l * r.gamma31));
    assert_eq!(f.omega32_mic, r.omega32 + m[(2, 1)] * (r.l * r.gamma32));

    let off = derive_rates(&SystemConfig {
        lfc_on: false,
        lfc_control_on: false,
        ..SystemConfig::default()
    })
    .unwrap();
    let f = LocalFields::resolve(c(0.1), off.omega32, &m, &off);
    assert_eq!(f.omega31_mic, f.omega31_ext);
    assert_eq!(f.omega32_mic, f.omega32_ext);
}

#[test]
fn pump_rates_follow_excited_population() {
    let r = baseline();
    let p = PumpRates::from_population(0.2, &r);
    assert_eq!(p.r31, r.gamma31 * 0.99 * 0.2);
    assert_eq!(p.r32, r.gamma32 * 0.99 * 0.2);
    let off = derive_rates(&SystemConfig {
        trapping_on: false,
        ..SystemConfig::default()
    })
    .unwrap();
    let p = PumpRates::from_population(0.2, &off);
    assert_eq!((p.r31, p.r32), (0.0, 0.0));
}

#[test]
fn trace_drift_over_many_steps() {
    let r = baseline();
    let model = FullModel::new(&r);
    let dt = r.dt_max();
    let cfg = SystemConfig {
        probe_amp: 0.3,
        ..SystemConfig::default()
    };
    let mut s = model.initial();
    for n in 0..100_000 {
        let t = n as f64 * dt;
        s = step_rk4(&model, &s, |tt| (gaussian_input(tt - 60.0, &cfg), r.omega32), t, dt).unwrap();
    }
    assert!((s.trace() - c(1.0)).norm() <= 1e-9);
}

fn free_decay(dt: f64, steps: usize) -> f64 {
    let r = derive_rates(&SystemConfig {
        trapping_on: false,
        gamma_s: 0.0,
        gamma_deph: 0.0,
        ..SystemConfig::default()
    })
    .unwrap();
    let model = FullModel::new(&r);
    let mut s = unit(2, 2);
    for n in 0..steps {
        s = step_rk4(&model, &s, |_| (c(0.0), c(0.0)), n as f64 * dt, dt).unwrap();
    }
    s[(2, 2)].re
}

#[test]
fn fourth_order_convergence() {
    // Step at the admissible maximum 0.05/|Ω₃₂| over t = 1.
    let dt = 0.0125;
    let n = 80;
    let reference = free_decay(dt / 8.0, 8 * n);
    let e1 = (free_decay(dt, n) - reference).abs();
    let e2 = (free_decay(dt / 2.0, 2 * n) - reference).abs();
    let ratio = e1 / e2;
    assert!((ratio - 16.0).abs() <= 3.0, "ratio {ratio}");
}

#[test]
fn positivity_along_baseline_trajectory() {
    let cfg = SystemConfig::default();
    let r = derive_rates(&cfg).unwrap();
    let mut model = FullModel::new(&r);
    model.initial = bloch::steady_state_full(c(0.0), r.omega32, &r).unwrap();
    let dt = r.dt_max();
    for amp in [cfg.probe_amp, 1.0] {
        let pulse = SystemConfig {
            probe_amp: amp,
            ..cfg.clone()
        };
        let mut s = model.initial();
        let mut floor = f64::INFINITY;
        for n in 0..12_000 {
            let t = n as f64 * dt;
            s = step_rk4(&model, &s, |tt| (gaussian_input(tt - 80.0, &pulse), r.omega32), t, dt).unwrap();
            floor = floor.min(min_eigenvalue(&s));
        }
        assert!(floor >= -1e-9, "amp {amp}: {floor}");
    }
}

#[test]
fn full_and_linearized_trajectories_agree_for_weak_probe() {
    let cfg = SystemConfig {
        probe_amp: 1e-4,
        trapping_on: false,
        gamma_s: 0.0,
        ..SystemConfig::default()
    };
    let r = derive_rates(&cfg).unwrap();
    let full = FullModel::new(&r);
    let lin = LinearModel { rates: &r };
    let dt = r.dt_max();
    let fields = |t: f64| (gaussian_input(t - 40.0, &cfg), r.omega32);
    let mut a = full.initial();
    let mut b = LinearState::default();
    let (mut diff, mut scale) = (0.0f64, 0.0f64);
    let steps = (100.0 / dt).round() as usize;
    for n in 0..steps {
        let t = n as f64 * dt;
        a = step_rk4(&full, &a, fields, t, dt).unwrap();
        b = step_rk4(&lin, &b, fields, t, dt).unwrap();
        diff = diff.max((a[(2, 0)] - b.rho31).norm());
        scale = scale.max(b.rho31.norm());
    }
    assert!(diff / scale <= 1e-3, "{}", diff / scale);
}

#[test]
fn excited_population_grows_with_trapping() {
    let mut last = -1.0;
    for trap in [0.0, 0.25, 0.5, 0.75, 0.99] {
        let r = derive_rates(&SystemConfig {
            trap_ratio: trap,
            ..SystemConfig::default()
        })
        .unwrap();
        let s = bloch::steady_state_full(c(1e-3), r.omega32, &r).unwrap();
        assert!(s.population(3) >= last, "{trap}: {} < {last}", s.population(3));
        last = s.population(3);
    }
}

#[test]
fn baseline_steady_state_matches_long_time_integration() {
    let cfg = SystemConfig::default();
    let r = derive_rates(&cfg).unwrap();
    let probe = c(cfg.probe_amp);
    let s = bloch::steady_state_full(probe, r.omega32, &r).unwrap();
    assert!(s.population(3) > 0.0);
    assert!(s.min_eigenvalue() >= -1e-12);
    assert!((s.trace() - c(1.0)).norm() < 1e-12);
    let d = full_derivative(s.matrix(), probe, r.omega32, &r);
    assert!(d.iter().all(|z| z.norm() < 1e-13));

    let model = FullModel::new(&r);
    let dt = r.dt_max();
    let mut m = model.initial();
    let steps = (2.0e5 / dt) as usize;
    for n in 0..steps {
        m = step_rk4(&model, &m, |_| (probe, r.omega32), n as f64 * dt, dt).unwrap();
    }
    let rel = (m[(2, 2)].re - s.population(3)).abs() / s.population(3);
    assert!(rel < 1e-3, "{} vs {}", m[(2, 2)].re, s.population(3));
    let rel31 = (m[(2, 0)] - s.rho31()).norm() / s.rho31().norm();
    assert!(rel31 < 1e-3, "{rel31}");
}

#[test]
fn dark_state_confirmed_by_integration() {
    let cfg = SystemConfig {
        gamma_deph: 0.0,
        gamma_s: 0.0,
        trapping_on: false,
        ..SystemConfig::default()
    };
    let r = derive_rates(&cfg).unwrap();
    let model = FullModel::new(&r);
    let dt = r.dt_max();
    let probe = c(1e-3);
    let mut m = model.initial();
    for n in 0..(2000.0 / dt) as usize {
        m = step_rk4(&model, &m, |_| (probe, r.omega32), n as f64 * dt, dt).unwrap();
    }
    assert!(m[(2, 2)].re <= 1e-10, "{}", m[(2, 2)].re);
    let s = bloch::steady_state_full(probe, r.omega32, &r).unwrap();
    assert!(s.population(3) <= 1e-10);
    let _ = FullModel::rho31(&m);
}
