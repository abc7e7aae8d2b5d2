//! Rotation error of exchange-driven Z gates from voltage inaccuracy and
//! timing jitter.
//!
//! Units: energies in eV, voltages in volts, times in seconds. Report rows
//! convert to µeV, µV and ns.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduced Planck constant, eV·s.
pub const HBAR_EV_S: f64 = 6.582119569e-16;

pub const UEV: f64 = 1e-6;
pub const UV: f64 = 1e-6;
pub const NS: f64 = 1e-9;

/// Default calibration samples: J target (µeV), voltage error (µV), exchange
/// error (eV).
pub const DEFAULT_CALIBRATION_CSV: &str = include_str!("../data/exchange_calibration.csv");

/// Z_π duration at exchange `j_target`: πħ/J.
pub fn zpi_gate_time(j_target: f64) -> Result<f64> {
    if !(j_target > 0.0) {
        return Err(Error::InvalidParameter(format!("exchange target must be positive, got {j_target}")));
    }
    Ok(std::f64::consts::PI * HBAR_EV_S / j_target)
}

/// Phase error of a Z_π gate whose exchange is off by `delta_j`.
pub fn z_rotation_error(delta_j: f64, j_target: f64) -> f64 {
    std::f64::consts::PI * delta_j / j_target
}

/// Phase error from a gate-duration error `delta_t` at exchange `j_target`.
pub fn jitter_rotation_error(delta_t: f64, j_target: f64) -> f64 {
    delta_t * j_target / HBAR_EV_S
}

pub fn total_rotation_error(delta_j: f64, delta_t: f64, j_target: f64) -> Result<f64> {
    let t = zpi_gate_time(j_target)?;
    Ok(delta_j * t / HBAR_EV_S + jitter_rotation_error(delta_t, j_target))
}

/// Small-angle estimate of the error probability, φ².
pub fn rotation_error_to_probability(phi: f64) -> f64 {
    phi * phi
}

/// Whether φ² is a reasonable estimate (|φ| ≤ 1 rad).
pub fn small_angle_regime(phi: f64) -> bool {
    phi.abs() <= 1.0
}

pub fn min_gate_time_from_jitter(delta_t: f64, max_relative_error: f64) -> Result<f64> {
    if !(max_relative_error > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "relative error bound must be positive, got {max_relative_error}"
        )));
    }
    Ok(delta_t / max_relative_error)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSample {
    #[serde(rename = "j_target_ueV")]
    pub j_target_uev: f64,
    #[serde(rename = "delta_v_uV")]
    pub delta_v_uv: f64,
    #[serde(rename = "delta_j_eV")]
    pub delta_j_ev: f64,
}

/// Exchange error samples at one J target, sorted by voltage error.
#[derive(Debug, Clone, PartialEq)]
pub struct ExchangePoint {
    pub j_target: f64,
    /// `(δV, ΔJ)` in volts and eV.
    pub samples: Vec<(f64, f64)>,
}

impl ExchangePoint {
    fn delta_j(&self, dv: f64, extrapolate: bool) -> Result<f64> {
        let s = &self.samples;
        let (lo, hi) = (s[0].0, s[s.len() - 1].0);
        if (dv < lo || dv > hi) && !extrapolate {
            return Err(Error::OutOfRange(format!(
                "voltage error {dv:e} V is outside the calibrated range [{lo:e}, {hi:e}] V"
            )));
        }
        if s.len() == 1 {
            // A single sample pins a linear response.
            return Ok(s[0].1 * dv / s[0].0);
        }
        let i = s.partition_point(|&(v, _)| v < dv).clamp(1, s.len() - 1);
        let ((v0, j0), (v1, j1)) = (s[i - 1], s[i]);
        if dv == v1 {
            return Ok(j1);
        }
        if dv == v0 {
            return Ok(j0);
        }
        Ok(log_log(v0, j0, v1, j1, dv))
    }
}

fn log_log(x0: f64, y0: f64, x1: f64, y1: f64, x: f64) -> f64 {
    let w = (x.ln() - x0.ln()) / (x1.ln() - x0.ln());
    (y0.ln() + w * (y1.ln() - y0.ln())).exp()
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExchangeModel {
    /// Calibration samples, interpolated log-log in δV within a target and
    /// log-log in J between targets.
    Table { points: Vec<ExchangePoint>, extrapolate: bool },
    /// `ΔJ = J (exp(δV / V0) − 1)` with `V0` fitted per target at one
    /// calibration δV.
    Exponential { v0: Vec<(f64, f64)>, extrapolate: bool },
}

impl ExchangeModel {
    pub fn from_samples(samples: &[CalibrationSample], extrapolate: bool) -> Result<Self> {
        let mut points: Vec<ExchangePoint> = Vec::new();
        for s in samples {
            if !(s.j_target_uev > 0.0 && s.delta_v_uv > 0.0 && s.delta_j_ev > 0.0) {
                return Err(Error::InvalidParameter(format!("calibration values must be positive: {s:?}")));
            }
            let j = s.j_target_uev * UEV;
            match points.iter_mut().find(|p| p.j_target == j) {
                Some(p) => p.samples.push((s.delta_v_uv * UV, s.delta_j_ev)),
                None => points.push(ExchangePoint { j_target: j, samples: vec![(s.delta_v_uv * UV, s.delta_j_ev)] }),
            }
        }
        if points.is_empty() {
            return Err(Error::InvalidParameter("calibration set is empty".into()));
        }
        points.sort_by(|a, b| a.j_target.total_cmp(&b.j_target));
        for p in &mut points {
            p.samples.sort_by(|a, b| a.0.total_cmp(&b.0));
            if p.samples.windows(2).any(|w| w[0].0 == w[1].0 || w[1].1 <= w[0].1) {
                return Err(Error::InvalidParameter(format!(
                    "exchange error must be strictly increasing in voltage error at J = {:e} eV",
                    p.j_target
                )));
            }
        }
        Ok(ExchangeModel::Table { points, extrapolate })
    }

    pub fn default_table() -> Self {
        let samples = read_calibration(DEFAULT_CALIBRATION_CSV.as_bytes()).expect("bundled calibration parses");
        ExchangeModel::from_samples(&samples, false).expect("bundled calibration is valid")
    }

    /// Exponential fit through each target's sample at `calibration_dv`.
    pub fn exponential_from_table(table: &ExchangeModel, calibration_dv: f64) -> Result<Self> {
        let ExchangeModel::Table { points, extrapolate } = table else {
            return Err(Error::InvalidParameter("exponential fit needs a table model".into()));
        };
        let v0 = points
            .iter()
            .map(|p| {
                let dj = p.delta_j(calibration_dv, false)?;
                Ok((p.j_target, calibration_dv / (dj / p.j_target).ln_1p()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ExchangeModel::Exponential { v0, extrapolate: *extrapolate })
    }

    fn check_target(&self, j: f64, lo: f64, hi: f64, extrapolate: bool) -> Result<()> {
        let tol = 1e-12 * hi;
        if (j < lo - tol || j > hi + tol) && !extrapolate {
            return Err(Error::OutOfRange(format!(
                "exchange target {:.4} µeV is outside the calibrated range [{:.4}, {:.4}] µeV",
                j / UEV,
                lo / UEV,
                hi / UEV
            )));
        }
        Ok(())
    }

    /// Exchange error at target `j_target` for a voltage error `delta_v`.
    pub fn delta_j(&self, j_target: f64, delta_v: f64) -> Result<f64> {
        if !(j_target > 0.0) {
            return Err(Error::InvalidParameter(format!("exchange target must be positive, got {j_target}")));
        }
        if delta_v < 0.0 {
            return Err(Error::InvalidParameter(format!("voltage error must be non-negative, got {delta_v}")));
        }
        if delta_v == 0.0 {
            return Ok(0.0);
        }
        match self {
            ExchangeModel::Table { points, extrapolate } => {
                self.check_target(j_target, points[0].j_target, points[points.len() - 1].j_target, *extrapolate)?;
                if points.len() == 1 {
                    return points[0].delta_j(delta_v, *extrapolate);
                }
                let i = points.partition_point(|p| p.j_target < j_target).clamp(1, points.len() - 1);
                let (a, b) = (&points[i - 1], &points[i]);
                if a.j_target == j_target {
                    return a.delta_j(delta_v, *extrapolate);
                }
                if b.j_target == j_target {
                    return b.delta_j(delta_v, *extrapolate);
                }
                let da = a.delta_j(delta_v, *extrapolate)?;
                let db = b.delta_j(delta_v, *extrapolate)?;
                Ok(log_log(a.j_target, da, b.j_target, db, j_target))
            }
            ExchangeModel::Exponential { v0, extrapolate } => {
                self.check_target(j_target, v0[0].0, v0[v0.len() - 1].0, *extrapolate)?;
                let scale = if v0.len() == 1 {
                    v0[0].1
                } else {
                    let i = v0.partition_point(|&(j, _)| j < j_target).clamp(1, v0.len() - 1);
                    let ((j0, s0), (j1, s1)) = (v0[i - 1], v0[i]);
                    if j_target == j0 {
                        s0
                    } else if j_target == j1 {
                        s1
                    } else {
                        log_log(j0, s0, j1, s1, j_target)
                    }
                };
                Ok(j_target * (delta_v / scale).exp_m1())
            }
        }
    }

    /// Calibrated J targets, eV.
    pub fn targets(&self) -> Vec<f64> {
        match self {
            ExchangeModel::Table { points, .. } => points.iter().map(|p| p.j_target).collect(),
            ExchangeModel::Exponential { v0, .. } => v0.iter().map(|&(j, _)| j).collect(),
        }
    }
}

pub fn read_calibration<R: Read>(reader: R) -> Result<Vec<CalibrationSample>> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut out = Vec::new();
    for row in r.deserialize() {
        out.push(row?);
    }
    Ok(out)
}

pub fn write_calibration<W: Write>(samples: &[CalibrationSample], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for s in samples {
        w.serialize(s)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationErrorRow {
    #[serde(rename = "j_target_ueV")]
    pub j_target_uev: f64,
    #[serde(rename = "gate_error_uV")]
    pub gate_error_uv: f64,
    #[serde(rename = "j_error_eV")]
    pub j_error_ev: f64,
    pub z_error_rad: f64,
    pub gate_time_ns: f64,
}

pub const DEFAULT_NOISE_LEVELS_UV: [f64; 4] = [1.0, 10.0, 100.0, 1000.0];
pub const DEFAULT_TARGETS_UEV: [f64; 4] = [0.069, 0.5, 1.0, 2.0];

// SI value in micro-units, rounded to 1e-6 of the unit to drop float noise.
fn micro(x: f64) -> f64 {
    (x * 1e12).round() / 1e6
}

/// One row per (target, noise level), targets outermost.
pub fn rotation_error_table(
    model: &ExchangeModel,
    noise_levels: &[f64],
    j_targets: &[f64],
) -> Result<Vec<RotationErrorRow>> {
    let mut rows = Vec::with_capacity(noise_levels.len() * j_targets.len());
    for &j in j_targets {
        let t = zpi_gate_time(j)?;
        for &dv in noise_levels {
            let dj = model.delta_j(j, dv)?;
            rows.push(RotationErrorRow {
                j_target_uev: micro(j),
                gate_error_uv: micro(dv),
                j_error_ev: dj,
                z_error_rad: z_rotation_error(dj, j),
                gate_time_ns: t / NS,
            });
        }
    }
    Ok(rows)
}

pub fn default_rotation_error_table(model: &ExchangeModel) -> Result<Vec<RotationErrorRow>> {
    let noise: Vec<f64> = DEFAULT_NOISE_LEVELS_UV.iter().map(|v| v * UV).collect();
    let targets: Vec<f64> = DEFAULT_TARGETS_UEV.iter().map(|j| j * UEV).collect();
    rotation_error_table(model, &noise, &targets)
}

pub fn write_rotation_error_table<W: Write>(rows: &[RotationErrorRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
