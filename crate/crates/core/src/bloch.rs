//! Atomic equations of motion for the Λ system.
//!
//! Basis ordering is |1⟩, |2⟩ (ground states) and |3⟩ (excited), stored at
//! matrix indices 0, 1, 2. The probe couples |1⟩↔|3⟩, the control |2⟩↔|3⟩.
//! The full model is the master equation with local-field corrected Rabi
//! frequencies and trapping pump rates that depend on the current excited
//! population; the linearized model keeps only the two coherences ρ₃₁ and
//! ρ₂₁ to first order in the probe.

use nalgebra::{Matrix3, SMatrix, SVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::DerivedRates;

pub type Matrix3c = Matrix3<C64>;

const I: C64 = C64::new(0.0, 1.0);

/// A validated 3×3 Hermitian, unit-trace density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(Matrix3c);

impl DensityMatrix {
    pub const HERMITIAN_TOL: f64 = 1e-12;
    pub const TRACE_TOL: f64 = 1e-10;

    /// All population in |1⟩.
    pub fn ground() -> Self {
        let mut m = Matrix3c::zeros();
        m[(0, 0)] = C64::new(1.0, 0.0);
        DensityMatrix(m)
    }

    pub fn new(m: Matrix3c) -> Result<Self> {
        let herm = hermiticity_error(&m);
        if herm > Self::HERMITIAN_TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian (max deviation {herm:e})"
            )));
        }
        let tr = m.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > Self::TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        Ok(DensityMatrix(m))
    }

    /// Wrap a matrix produced by the integrator without re-validating it.
    pub(crate) fn from_raw(m: Matrix3c) -> Self {
        DensityMatrix(m)
    }

    pub fn matrix(&self) -> &Matrix3c {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix3c {
        self.0
    }

    pub fn rho31(&self) -> C64 {
        self.0[(2, 0)]
    }

    pub fn rho21(&self) -> C64 {
        self.0[(1, 0)]
    }

    pub fn rho32(&self) -> C64 {
        self.0[(2, 1)]
    }

    /// Population of level `k` (1-based, as in |1⟩, |2⟩, |3⟩).
    pub fn population(&self, k: usize) -> f64 {
        self.0[(k - 1, k - 1)].re
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        hermiticity_error(&self.0)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.0)
    }
}

pub fn hermiticity_error(m: &Matrix3c) -> f64 {
    (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Smallest eigenvalue of the Hermitian part of `m`.
pub fn min_eigenvalue(m: &Matrix3c) -> f64 {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    h.symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// External and microscopic Rabi frequencies seen by one atom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalFields {
    pub omega31_ext: C64,
    pub omega32_ext: C64,
    pub omega31_mic: C64,
    pub omega32_mic: C64,
}

impl LocalFields {
    /// Apply the Lorentz–Lorenz substitution Ω₃ⱼ → Ω₃ⱼ + Lγ₃ⱼρ₃ⱼ for the
    /// transitions whose correction is switched on.
    pub fn resolve(probe: C64, control: C64, rho: &Matrix3c, rates: &DerivedRates) -> Self {
        let t = rates.toggles;
        let omega31_mic = if t.lfc_on {
            probe + rho[(2, 0)] * (rates.l * rates.gamma31)
        } else {
            probe
        };
        let omega32_mic = if t.lfc_control_on {
            control + rho[(2, 1)] * (rates.l * rates.gamma32)
        } else {
            control
        };
        LocalFields {
            omega31_ext: probe,
            omega32_ext: control,
            omega31_mic,
            omega32_mic,
        }
    }
}

/// Incoherent pump rates modelling reabsorbed spontaneous photons.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpRates {
    pub r31: f64,
    pub r32: f64,
}

impl PumpRates {
    pub fn from_population(rho33: f64, rates: &DerivedRates) -> Self {
        if !rates.toggles.trapping_on {
            return PumpRates { r31: 0.0, r32: 0.0 };
        }
        // ρ₃₃ of a valid state is ≥ 0; the clamp only absorbs round-off.
        let p = rho33.max(0.0) * rates.trap_ratio;
        PumpRates {
            r31: rates.gamma31 * p,
            r32: rates.gamma32 * p,
        }
    }
}

/// Time derivative of ρ under the full master equation.
pub fn lindblad_rhs(rho: &DensityMatrix, fields: &LocalFields, rates: &DerivedRates) -> Matrix3c {
    let pumps = PumpRates::from_population(rho.population(3), rates);
    rhs_with(&rho.0, fields, &pumps, rates)
}

/// Full master-equation derivative for externally applied fields, resolving
/// the local fields and pump rates from `rho` itself.
pub fn full_derivative(rho: &Matrix3c, probe: C64, control: C64, rates: &DerivedRates) -> Matrix3c {
    let fields = LocalFields::resolve(probe, control, rho, rates);
    let pumps = PumpRates::from_population(rho[(2, 2)].re, rates);
    rhs_with(rho, &fields, &pumps, rates)
}

fn rhs_with(rho: &Matrix3c, f: &LocalFields, p: &PumpRates, r: &DerivedRates) -> Matrix3c {
    let h22 = C64::new(-r.delta, 0.0);
    let h33 = C64::new(-r.delta31, 0.0);
    let h31 = -0.5 * f.omega31_mic;
    let h32 = -0.5 * f.omega32_mic;
    let h13 = h31.conj();
    let h23 = h32.conj();

    let e = |i: usize, j: usize| rho[(i, j)];

    // (Hρ)ᵢⱼ and (ρH)ᵢⱼ for the lower triangle only.
    let hr = |i: usize, j: usize| match i {
        0 => h13 * e(2, j),
        1 => h22 * e(1, j) + h23 * e(2, j),
        _ => h31 * e(0, j) + h32 * e(1, j) + h33 * e(2, j),
    };
    let rh = |i: usize, j: usize| match j {
        0 => e(i, 2) * h31,
        1 => e(i, 1) * h22 + e(i, 2) * h32,
        _ => e(i, 0) * h13 + e(i, 1) * h23 + e(i, 2) * h33,
    };
    let comm = |i: usize, j: usize| -I * (hr(i, j) - rh(i, j));

    let (g31, g32, gs, gdp) = (r.gamma31, r.gamma32, r.gamma_s, r.gamma_deph);
    let (r31, r32) = (p.r31, p.r32);
    let p1 = e(0, 0).re;
    let p2 = e(1, 1).re;
    let p3 = e(2, 2).re;

    let d11 = comm(0, 0).re + g31 * p3 + r31 * (p3 - p1) + gs * (p2 - p1);
    let d22 = comm(1, 1).re + g32 * p3 + r32 * (p3 - p2) + gs * (p1 - p2);
    let d33 = comm(2, 2).re - (g31 + g32) * p3 + r31 * (p1 - p3) + r32 * (p2 - p3);

    let k21 = 0.5 * (r31 + r32) + gs + gdp;
    let k31 = 0.5 * (g31 + g32) + r31 + 0.5 * r32 + 0.5 * gs;
    let k32 = 0.5 * (g31 + g32) + r32 + 0.5 * r31 + 0.5 * gs;
    let d21 = comm(1, 0) - k21 * e(1, 0);
    let d31 = comm(2, 0) - k31 * e(2, 0);
    let d32 = comm(2, 1) - k32 * e(2, 1);

    Matrix3c::new(
        C64::new(d11, 0.0),
        d21.conj(),
        d31.conj(),
        d21,
        C64::new(d22, 0.0),
        d32.conj(),
        d31,
        d32,
        C64::new(d33, 0.0),
    )
}

/// First-order probe coherences (ρ₃₁, ρ₂₁).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LinearState {
    pub rho31: C64,
    pub rho21: C64,
}

/// Derivatives of the linearized coherence equations.
pub fn linearized_rhs(state: &LinearState, probe: C64, control: C64, rates: &DerivedRates) -> LinearState {
    let mut d31 = -rates.gamma31_c * state.rho31 + 0.5 * I * probe + 0.5 * I * control * state.rho21;
    if rates.toggles.lfc_on {
        d31 += 0.5 * I * (rates.l * rates.gamma31) * state.rho31;
    }
    let d21 = -rates.gamma21_c * state.rho21 + 0.5 * I * control.conj() * state.rho31;
    LinearState {
        rho31: d31,
        rho21: d21,
    }
}

/// State types the fixed-step integrator can advance.
pub trait StateVector: Copy {
    /// `self + h·k`
    fn add_scaled(&self, k: &Self, h: f64) -> Self;
    fn is_finite(&self) -> bool;
}

impl StateVector for Matrix3c {
    fn add_scaled(&self, k: &Self, h: f64) -> Self {
        self + k * C64::new(h, 0.0)
    }

    fn is_finite(&self) -> bool {
        self.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl StateVector for LinearState {
    fn add_scaled(&self, k: &Self, h: f64) -> Self {
        LinearState {
            rho31: self.rho31 + h * k.rho31,
            rho21: self.rho21 + h * k.rho21,
        }
    }

    fn is_finite(&self) -> bool {
        [self.rho31, self.rho21]
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// One of the two atomic models, driven by external probe and control fields.
pub trait AtomicModel {
    type State: StateVector;

    fn derivative(&self, state: &Self::State, probe: C64, control: C64) -> Self::State;
    fn rho31(state: &Self::State) -> C64;
    fn rho32(state: &Self::State) -> C64;
    fn initial(&self) -> Self::State;
    fn rates(&self) -> &DerivedRates;
}

pub struct FullModel<'a> {
    pub rates: &'a DerivedRates,
    pub initial: DensityMatrix,
}

impl<'a> FullModel<'a> {
    pub fn new(rates: &'a DerivedRates) -> Self {
        FullModel {
            rates,
            initial: DensityMatrix::ground(),
        }
    }
}

impl AtomicModel for FullModel<'_> {
    type State = Matrix3c;

    fn derivative(&self, state: &Matrix3c, probe: C64, control: C64) -> Matrix3c {
        full_derivative(state, probe, control, self.rates)
    }

    fn rho31(state: &Matrix3c) -> C64 {
        state[(2, 0)]
    }

    fn rho32(state: &Matrix3c) -> C64 {
        state[(2, 1)]
    }

    fn initial(&self) -> Matrix3c {
        self.initial.0
    }

    fn rates(&self) -> &DerivedRates {
        self.rates
    }
}

pub struct LinearModel<'a> {
    pub rates: &'a DerivedRates,
}

impl AtomicModel for LinearModel<'_> {
    type State = LinearState;

    fn derivative(&self, state: &LinearState, probe: C64, control: C64) -> LinearState {
        linearized_rhs(state, probe, control, self.rates)
    }

    fn rho31(state: &LinearState) -> C64 {
        state.rho31
    }

    fn rho32(_: &LinearState) -> C64 {
        C64::new(0.0, 0.0)
    }

    fn initial(&self) -> LinearState {
        LinearState::default()
    }

    fn rates(&self) -> &DerivedRates {
        self.rates
    }
}

/// Classical RK4 step of length `dt` starting at time `t`. `fields(t)`
/// returns the external (probe, control) Rabi frequencies; it is sampled at
/// the sub-stage times, and the trapping rates follow the sub-stage ρ₃₃.
pub fn step_rk4<M, F>(model: &M, state: &M::State, fields: F, t: f64, dt: f64) -> Result<M::State>
where
    M: AtomicModel,
    F: Fn(f64) -> (C64, C64),
{
    let dt_max = model.rates().dt_max();
    if dt > dt_max * (1.0 + 1e-12) {
        return Err(Error::StepTooLarge { dt, dt_max });
    }
    Ok(rk4_unchecked(model, state, &fields, t, dt))
}

fn rk4_unchecked<M, F>(model: &M, y: &M::State, fields: &F, t: f64, dt: f64) -> M::State
where
    M: AtomicModel,
    F: Fn(f64) -> (C64, C64),
{
    let eval = |s: &M::State, tt: f64| {
        let (p, c) = fields(tt);
        model.derivative(s, p, c)
    };
    let k1 = eval(y, t);
    let k2 = eval(&y.add_scaled(&k1, 0.5 * dt), t + 0.5 * dt);
    let k3 = eval(&y.add_scaled(&k2, 0.5 * dt), t + 0.5 * dt);
    let k4 = eval(&y.add_scaled(&k3, dt), t + dt);
    y.add_scaled(&k1, dt / 6.0)
        .add_scaled(&k2, dt / 3.0)
        .add_scaled(&k3, dt / 3.0)
        .add_scaled(&k4, dt / 6.0)
}

/// Integrate from `t0` over `steps` steps of `dt`.
pub fn integrate<M, F>(model: &M, mut state: M::State, fields: F, t0: f64, dt: f64, steps: usize) -> Result<M::State>
where
    M: AtomicModel,
    F: Fn(f64) -> (C64, C64),
{
    for n in 0..steps {
        state = step_rk4(model, &state, &fields, t0 + n as f64 * dt, dt)?;
    }
    Ok(state)
}

/// Linearized steady state for constant fields (2×2 solve).
pub fn steady_state_linear(probe: C64, control: C64, rates: &DerivedRates) -> LinearState {
    // 0 = -Γ̃₃₁ρ₃₁ + (i/2)Ω₃₂ρ₂₁ + (i/2)Ω₃₁
    // 0 = (i/2)Ω₃₂*ρ₃₁ - Γ₂₁ρ₂₁
    let g31 = rates.gamma31_tilde(rates.delta31);
    let a11 = -g31;
    let a12 = 0.5 * I * control;
    let a21 = 0.5 * I * control.conj();
    let a22 = -rates.gamma21_c;
    let b1 = -0.5 * I * probe;
    let det = a11 * a22 - a12 * a21;
    LinearState {
        rho31: b1 * a22 / det,
        rho21: -a21 * b1 / det,
    }
}

type Vec9 = SVector<f64, 9>;
type Mat9 = SMatrix<f64, 9, 9>;

fn pack(m: &Matrix3c) -> Vec9 {
    Vec9::from_column_slice(&[
        m[(0, 0)].re,
        m[(1, 1)].re,
        m[(2, 2)].re,
        m[(1, 0)].re,
        m[(1, 0)].im,
        m[(2, 0)].re,
        m[(2, 0)].im,
        m[(2, 1)].re,
        m[(2, 1)].im,
    ])
}

fn unpack(x: &Vec9) -> Matrix3c {
    let r21 = C64::new(x[3], x[4]);
    let r31 = C64::new(x[5], x[6]);
    let r32 = C64::new(x[7], x[8]);
    Matrix3c::new(
        C64::new(x[0], 0.0),
        r21.conj(),
        r31.conj(),
        r21,
        C64::new(x[1], 0.0),
        r32.conj(),
        r31,
        r32,
        C64::new(x[2], 0.0),
    )
}

/// Steady-state residual with the first population equation replaced by
/// the trace condition.
fn residual(x: &Vec9, probe: C64, control: C64, rates: &DerivedRates) -> Vec9 {
    let d = full_derivative(&unpack(x), probe, control, rates);
    let mut f = pack(&d);
    f[0] = x[0] + x[1] + x[2] - 1.0;
    f
}

fn newton(mut x: Vec9, probe: C64, control: C64, rates: &DerivedRates, max_iter: usize) -> (Vec9, f64, bool) {
    let mut f = residual(&x, probe, control, rates);
    for _ in 0..max_iter {
        // The residual is quadratic in x, so central differences give the
        // exact Jacobian up to round-off.
        let h = 1e-5;
        let mut jac = Mat9::zeros();
        for k in 0..9 {
            let mut xp = x;
            let mut xm = x;
            xp[k] += h;
            xm[k] -= h;
            let col = (residual(&xp, probe, control, rates) - residual(&xm, probe, control, rates)) / (2.0 * h);
            jac.set_column(k, &col);
        }
        let Some(step) = jac.lu().solve(&(-f)) else {
            break;
        };
        let fnorm = f.amax();
        let mut lambda = 1.0;
        let mut accepted = false;
        while lambda > 1e-4 {
            let xn = x + step * lambda;
            let fnew = residual(&xn, probe, control, rates);
            if fnew.amax() < fnorm || fnorm < 1e-14 {
                let dx = (step * lambda).amax();
                x = xn;
                f = fnew;
                accepted = true;
                if dx < 1e-12 && f.amax() < 1e-12 {
                    return (x, f.amax(), true);
                }
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let ok = f.amax() < 1e-12;
    (x, f.amax(), ok)
}

/// Steady state of the full master equation for constant external fields.
///
/// Both nonlinearities (trapping rates ∝ ρ₃₃ and the local-field terms) are
/// handled by a damped Newton iteration on the stationarity conditions;
/// if that fails the state is relaxed by long-time integration and polished.
pub fn steady_state_full(probe: C64, control: C64, rates: &DerivedRates) -> Result<DensityMatrix> {
    let x0 = pack(&DensityMatrix::ground().0);
    let (x, res, ok) = newton(x0, probe, control, rates, 200);
    if ok && physical(&x) {
        return Ok(DensityMatrix::from_raw(unpack(&x)));
    }

    let model = FullModel::new(rates);
    let dt = rates.dt_max();
    let mut state = DensityMatrix::ground().0;
    let fields = |_: f64| (probe, control);
    let chunk = 2000;
    let mut t = 0.0;
    for _ in 0..2000 {
        for _ in 0..chunk {
            state = rk4_unchecked(&model, &state, &fields, t, dt);
            t += dt;
        }
        let d = full_derivative(&state, probe, control, rates);
        if d.iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-9 {
            break;
        }
    }
    let (x, res2, ok) = newton(pack(&state), probe, control, rates, 50);
    if ok && physical(&x) {
        Ok(DensityMatrix::from_raw(unpack(&x)))
    } else {
        Err(Error::SteadyState {
            residual: res2.min(res).max(f64::MIN_POSITIVE),
        })
    }
}

fn physical(x: &Vec9) -> bool {
    min_eigenvalue(&unpack(x)) > -1e-9
}

/// Steady state in either model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SteadyState {
    Linear(LinearState),
    Full(DensityMatrix),
}

impl SteadyState {
    pub fn rho31(&self) -> C64 {
        match self {
            SteadyState::Linear(s) => s.rho31,
            SteadyState::Full(s) => s.rho31(),
        }
    }
}

pub fn steady_state(probe: C64, control: C64, rates: &DerivedRates, linearized: bool) -> Result<SteadyState> {
    if linearized {
        Ok(SteadyState::Linear(steady_state_linear(probe, control, rates)))
    } else {
        steady_state_full(probe, control, rates).map(SteadyState::Full)
    }
}
