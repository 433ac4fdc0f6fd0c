//! Subcommand implementations.

use std::path::Path;

use eit_core::analytic::{alpha_lfc, phi_lfc, phi_nsm, polarization_components, AnalyticPulse};
use eit_core::presets;
use eit_core::propagation::propagate_stored;
use eit_core::pulse::{derivative, measure_pulse, unwrap};
use eit_core::scan::{run_scan, ScanSpec};
use eit_core::susceptibility::{chi, wave_number};
use eit_core::{derive_rates, SystemConfig};
use num_complex::Complex64 as C64;
use serde_json::json;

use crate::acceptance;
use crate::output::{num, OutDir};
use crate::CliError;

pub fn susceptibility(cfg: &SystemConfig, dmin: f64, dmax: f64, steps: usize, out: &Path) -> Result<(), CliError> {
    if steps == 0 || !(dmax >= dmin) {
        return Err(CliError::Config("need --steps >= 1 and --dmax >= --dmin".into()));
    }
    let r = derive_rates(cfg)?;
    let mut dir = OutDir::create(out)?;
    let mut csv = dir.csv("susceptibility.csv", &["delta31", "re_chi", "im_chi", "re_k", "im_k"])?;
    for k in 0..steps {
        let d = if steps == 1 {
            dmin
        } else {
            dmin + (dmax - dmin) * k as f64 / (steps - 1) as f64
        };
        let c = chi(d, &r, r.omega32)?;
        let kz = wave_number(d, &r, r.omega32)?;
        csv.nums(&[d, c.re, c.im, kz.re, kz.im])?;
    }
    csv.finish()?;
    dir.finish("susceptibility", cfg, json!({"dmin": dmin, "dmax": dmax, "steps": steps}))?;
    Ok(())
}

pub fn propagate(cfg: &SystemConfig, store_every: Option<usize>, out: &Path) -> Result<(), CliError> {
    let stride = match store_every {
        Some(0) => return Err(CliError::Config("--store-every must be at least 1".into())),
        Some(k) => k,
        None => usize::MAX,
    };
    let r = derive_rates(cfg)?;
    let rec = propagate_stored(cfg, stride)?;
    let entrance = measure_pulse(&rec.tau, rec.input(), cfg.probe_width, cfg.probe_amp)?;
    let exit = measure_pulse(&rec.tau, rec.output(), cfg.probe_width, cfg.probe_amp)?;

    let mut dir = OutDir::create(out)?;
    let mut csv = dir.csv("field.csv", &["z", "tau", "re_omega31", "im_omega31"])?;
    for (z, slice) in rec.z.iter().zip(&rec.probe) {
        for (t, v) in rec.tau.iter().zip(slice) {
            csv.nums(&[*z, *t, v.re, v.im])?;
        }
    }
    csv.finish()?;
    dir.json(
        "metrics.json",
        &json!({
            "z0": entrance,
            "z_total": exit,
            "group_delay": r.group_delay,
            "vacuum_transit": r.units.k0z / r.units.omega0,
        }),
    )?;
    dir.finish("propagate", cfg, json!({"store_every": store_every}))?;
    Ok(())
}

pub fn analyze(cfg: &SystemConfig, analytic_only: bool, out: &Path) -> Result<(), CliError> {
    let r = derive_rates(cfg)?;
    let sigma = cfg.probe_width;
    let pulse = AnalyticPulse::at_depth(&r, cfg.probe_amp, sigma, 1.0);
    let mut dir = OutDir::create(out)?;
    let mut summary = json!({
        "analytic": {
            "delay": pulse.delay,
            "sigma_t2": [pulse.sigma_t2.re, pulse.sigma_t2.im],
            "phase_peak": phi_lfc(pulse.delay, &pulse),
            "alpha_lfc": alpha_lfc(r.beta2, r.units.k0z, sigma),
            "width2": sigma * sigma + 2.0 * r.units.k0z * r.beta1,
            "peak_ratio": pulse.envelope(pulse.delay).norm() / cfg.probe_amp,
        }
    });

    let tau: Vec<f64> = if analytic_only {
        let n = cfg.n_tau.max(2);
        let (t0, t1) = (-cfg.tau_half_width, pulse.delay + cfg.tau_half_width);
        (0..n).map(|k| t0 + (t1 - t0) * k as f64 / (n - 1) as f64).collect()
    } else {
        let rec = propagate_stored(cfg, usize::MAX)?;
        let m = measure_pulse(&rec.tau, rec.output(), sigma, cfg.probe_amp)?;
        let mut csv = dir.csv("envelope.csv", &["tau", "re_env", "im_env", "phase", "inst_freq"])?;
        for (k, v) in rec.output().iter().enumerate() {
            csv.nums(&[rec.tau[k], v.re, v.im, m.phase[k], m.inst_freq[k]])?;
        }
        csv.finish()?;
        let scale = rec.output().iter().map(|z| z.norm()).fold(0.0, f64::max);
        let dist = rec
            .tau
            .iter()
            .zip(rec.output())
            .map(|(&t, v)| (v - pulse.envelope(t)).norm())
            .fold(0.0, f64::max)
            / scale;
        summary["numeric"] = json!({"metrics": m, "relative_distance_to_analytic": dist});
        rec.tau
    };

    let env: Vec<C64> = tau.iter().map(|&t| pulse.envelope(t)).collect();
    let phase = unwrap(&env.iter().map(|z| z.arg()).collect::<Vec<_>>());
    let dtau = tau[1] - tau[0];
    let freq: Vec<f64> = derivative(&phase, dtau).into_iter().map(|d| -d).collect();
    let mut csv = dir.csv("analytic.csv", &["tau", "re_env", "im_env", "phase", "inst_freq"])?;
    for k in 0..tau.len() {
        csv.nums(&[tau[k], env[k].re, env[k].im, phase[k], freq[k]])?;
    }
    csv.finish()?;

    let mut csv = dir.csv("polarization.csv", &["tau", "p0_phase", "plfc_phase"])?;
    for (k, &t) in tau.iter().enumerate() {
        let (p0, plfc) = polarization_components(t, &pulse);
        csv.nums(&[t, (p0 / env[k]).arg(), (plfc / env[k]).arg()])?;
    }
    csv.finish()?;

    // Kerr comparison with n₂I₀ = β₂/σ², which gives equal chirps at the centre.
    let n2i0 = r.beta2 / (sigma * sigma);
    let alpha = alpha_lfc(r.beta2, r.units.k0z, sigma);
    let mut csv = dir.csv("nsm.csv", &["tau", "phi_lfc", "phi_nsm", "freq_lfc", "freq_nsm"])?;
    for &t in &tau {
        let s = t - pulse.delay;
        let p_nsm = phi_nsm(s, n2i0, 1.0, sigma, r.units.k0z);
        let f_nsm = 2.0 * s / (sigma * sigma) * p_nsm;
        csv.nums(&[t, phi_lfc(t, &pulse), p_nsm, alpha * s, f_nsm])?;
    }
    csv.finish()?;

    dir.json("analysis.json", &summary)?;
    dir.finish("analyze", cfg, json!({"analytic_only": analytic_only}))?;
    Ok(())
}

pub fn scan(cfg: &SystemConfig, spec: &ScanSpec, out: &Path) -> Result<(), CliError> {
    let map = run_scan(cfg, spec)?;
    let mut dir = OutDir::create(out)?;
    let mut csv = dir.csv("map.csv", &["gs", "trap_ratio", "peak_ratio", "flag"])?;
    for (i, &gs) in map.gs.iter().enumerate() {
        for (j, &trap) in map.trap.iter().enumerate() {
            let flag = match &map.flags[i][j] {
                None => "ok".to_string(),
                Some(msg) => msg.replace([',', '\n'], ";"),
            };
            csv.row(&[num(gs), num(trap), num(map.ratio[i][j]), flag])?;
        }
    }
    csv.finish()?;
    dir.json("contours.json", &map.contours)?;
    dir.finish(
        "scan",
        cfg,
        json!({
            "scan": spec,
            "failed_cells": map.failed_cells(),
            "max_increase": map.max_increase(),
        }),
    )?;
    Ok(())
}

pub fn presets_list() {
    for name in presets::names() {
        println!("{name}");
    }
}

pub fn presets_show(name: &str) -> Result<(), CliError> {
    print!("{}", presets::source(name)?);
    Ok(())
}

/// Runs the selected criteria, prints one line each, and reports whether all passed.
pub fn selftest(ids: &[u8], out: Option<&Path>) -> Result<bool, CliError> {
    let mut outcomes = Vec::new();
    for &id in ids {
        let o = acceptance::run(id);
        println!("{o}");
        outcomes.push(o);
    }
    let passed = outcomes.iter().filter(|o| o.pass).count();
    println!("{passed}/{} criteria passed", outcomes.len());
    if let Some(out) = out {
        let mut dir = OutDir::create(out)?;
        dir.json("selftest.json", &outcomes)?;
        dir.finish("selftest", &SystemConfig::default(), json!({"criteria": ids}))?;
    }
    Ok(passed == outcomes.len())
}
