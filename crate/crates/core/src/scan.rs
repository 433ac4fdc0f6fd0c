//! Transmitted peak amplitude over (γ_s, r_a/r_e).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contour::{self, Polyline};
use crate::error::{Error, Result};
use crate::model::SystemConfig;
use crate::propagation::propagate_stored;

pub const CONTOUR_LEVELS: [f64; 3] = [0.50, 0.25, 0.01];

/// Scan axes. γ_s is log-spaced, the trapping ratio linear; γ_deph is held
/// at its base value so γ_dec grows with γ_s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSpec {
    pub gs_min: f64,
    pub gs_max: f64,
    pub gs_steps: usize,
    pub trap_min: f64,
    pub trap_max: f64,
    pub trap_steps: usize,
    pub workers: usize,
}

impl Default for ScanSpec {
    /// γ_s from 1e-6γ to 1e-1γ (γ = 2γ₃₁) and r_a/r_e from 0.5 to 0.999.
    fn default() -> Self {
        ScanSpec {
            gs_min: 2e-6,
            gs_max: 2e-1,
            gs_steps: 24,
            trap_min: 0.5,
            trap_max: 0.999,
            trap_steps: 24,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }
}

impl ScanSpec {
    pub fn gs_axis(&self) -> Vec<f64> {
        let (a, b) = (self.gs_min.ln(), self.gs_max.ln());
        let n = self.gs_steps;
        (0..n)
            .map(|k| if n == 1 { self.gs_min } else { (a + (b - a) * k as f64 / (n - 1) as f64).exp() })
            .collect()
    }

    pub fn trap_axis(&self) -> Vec<f64> {
        let n = self.trap_steps;
        (0..n)
            .map(|k| {
                if n == 1 {
                    self.trap_min
                } else {
                    self.trap_min + (self.trap_max - self.trap_min) * k as f64 / (n - 1) as f64
                }
            })
            .collect()
    }

    fn check(&self) -> Result<()> {
        let mut diags = Vec::new();
        let mut bad = |field: &'static str, value: String, rule: &str| {
            diags.push(crate::error::Diagnostic {
                field,
                value,
                rule: rule.to_string(),
            })
        };
        if !(self.gs_min > 0.0 && self.gs_max >= self.gs_min) {
            bad("gs_min", self.gs_min.to_string(), "need 0 < gs_min <= gs_max");
        }
        if !(self.trap_min >= 0.0 && self.trap_max < 1.0 && self.trap_max >= self.trap_min) {
            bad("trap_min", self.trap_min.to_string(), "need 0 <= trap_min <= trap_max < 1");
        }
        if self.gs_steps == 0 || self.trap_steps == 0 {
            bad("gs_steps", self.gs_steps.to_string(), "axes need at least one point");
        }
        if self.workers == 0 {
            bad("workers", "0".into(), "need at least one worker");
        }
        if diags.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(diags))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContourSet {
    pub level: f64,
    pub lines: Vec<Polyline>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransmissionMap {
    pub gs: Vec<f64>,
    pub trap: Vec<f64>,
    /// `ratio[i][j]` at `gs[i]`, `trap[j]`; NaN where the cell failed.
    pub ratio: Vec<Vec<f64>>,
    /// Failure message per cell, `None` for converged cells.
    pub flags: Vec<Vec<Option<String>>>,
    pub contours: Vec<ContourSet>,
}

impl TransmissionMap {
    pub fn failed_cells(&self) -> usize {
        self.flags.iter().flatten().filter(|f| f.is_some()).count()
    }

    /// Largest increase of the ratio along either axis, over pairs of
    /// converged neighbours. Non-positive for a monotone non-increasing map.
    pub fn max_increase(&self) -> f64 {
        let mut worst = f64::NEG_INFINITY;
        let r = &self.ratio;
        for i in 0..self.gs.len() {
            for j in 0..self.trap.len() {
                if i + 1 < self.gs.len() && !r[i][j].is_nan() && !r[i + 1][j].is_nan() {
                    worst = worst.max(r[i + 1][j] - r[i][j]);
                }
                if j + 1 < self.trap.len() && !r[i][j].is_nan() && !r[i][j + 1].is_nan() {
                    worst = worst.max(r[i][j + 1] - r[i][j]);
                }
            }
        }
        worst
    }
}

/// Peak ratio max|Ω(z_total)|/Ω₀ of one full-model run.
pub fn cell_ratio(base: &SystemConfig, gamma_s: f64, trap_ratio: f64) -> Result<f64> {
    let cfg = SystemConfig {
        gamma_s,
        trap_ratio,
        trapping_on: true,
        use_linearized_eom: false,
        ..base.clone()
    };
    let rec = propagate_stored(&cfg, usize::MAX)?;
    let peak = rec.output().iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(peak / cfg.probe_amp)
}

pub fn run_scan(base: &SystemConfig, spec: &ScanSpec) -> Result<TransmissionMap> {
    spec.check()?;
    let gs = spec.gs_axis();
    let trap = spec.trap_axis();
    let cells: Vec<(usize, usize)> = (0..gs.len()).flat_map(|i| (0..trap.len()).map(move |j| (i, j))).collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.workers)
        .build()
        .expect("thread pool");
    // Each result lands in the slot of its cell, independent of scheduling.
    let results: Vec<Result<f64>> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(i, j)| cell_ratio(base, gs[i], trap[j]))
            .collect()
    });

    let mut ratio = vec![vec![f64::NAN; trap.len()]; gs.len()];
    let mut flags = vec![vec![None; trap.len()]; gs.len()];
    for (&(i, j), r) in cells.iter().zip(results) {
        match r {
            Ok(v) => ratio[i][j] = v,
            Err(e) => flags[i][j] = Some(e.to_string()),
        }
    }
    let failed = flags.iter().flatten().filter(|f| f.is_some()).count();
    if failed * 10 > cells.len() {
        return Err(Error::ScanAborted {
            failed,
            total: cells.len(),
        });
    }

    let mut map = TransmissionMap {
        gs,
        trap,
        ratio,
        flags,
        contours: Vec::new(),
    };
    map.contours = extract_contours(&map, &CONTOUR_LEVELS);
    Ok(map)
}

pub fn extract_contours(map: &TransmissionMap, levels: &[f64]) -> Vec<ContourSet> {
    levels
        .iter()
        .map(|&level| ContourSet {
            level,
            lines: contour::extract(&map.gs, &map.trap, &map.ratio, level, true),
        })
        .collect()
}
