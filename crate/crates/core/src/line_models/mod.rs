//! Plant descriptions of the series-compensated line and the closed-form
//! relations used to size and analyse it.
//!
//! Compensation degree `N` is the ratio of total series capacitive reactance
//! to line inductive reactance, so the total series capacitance is
//! `C = 1 / (N ω² L)`. With that sizing the series L–C loop resonates at
//! `√N · f0`, which is the subsynchronous resonance frequency, and the
//! effective line reactance drops to `ωL(1 − N)`.

mod plant;
mod reduced;
mod transfer;

pub use plant::{build_abc_plant, build_split_pi, AbcPlantModel, LtiModel, Topology};
pub use reduced::{reduced_model, ReducedModel};
pub use transfer::{line_admittance, transfer_function_eval, TransferFunctionPoint};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Compensation degree above which installations are normally avoided.
pub const PRACTICAL_COMPENSATION_LIMIT: f64 = 0.30;

/// Per-phase line constants for the whole line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineParams {
    /// Series resistance, Ω.
    pub r_series: f64,
    /// Series inductance, H.
    pub l_series: f64,
    /// Synchronous angular frequency, rad/s.
    pub omega: f64,
    /// Shunt capacitance at each end of the equivalent π, F. Only the
    /// split-π model uses it.
    pub c_shunt_per_end: f64,
}

impl Default for LineParams {
    /// 345 kV, 250 km class line. Representative values, not measured data.
    fn default() -> Self {
        Self {
            r_series: 8.5,
            l_series: 0.25,
            omega: 2.0 * PI * 60.0,
            c_shunt_per_end: 1.1e-6,
        }
    }
}

impl LineParams {
    pub fn new(r_series: f64, l_series: f64, omega: f64, c_shunt_per_end: f64) -> Result<Self> {
        let p = Self {
            r_series,
            l_series,
            omega,
            c_shunt_per_end,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_series.is_finite() && self.r_series >= 0.0) {
            return Err(Error::invalid("r_series", "must be finite and >= 0"));
        }
        if !(self.l_series.is_finite() && self.l_series > 0.0) {
            return Err(Error::invalid("l_series", "must be finite and > 0"));
        }
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(Error::invalid("omega", "must be finite and > 0"));
        }
        if !(self.c_shunt_per_end.is_finite() && self.c_shunt_per_end >= 0.0) {
            return Err(Error::invalid("c_shunt_per_end", "must be finite and >= 0"));
        }
        Ok(())
    }

    pub fn f0(&self) -> f64 {
        self.omega / (2.0 * PI)
    }

    /// Inductive reactance ωL, Ω.
    pub fn x_l(&self) -> f64 {
        self.omega * self.l_series
    }
}

/// Series capacitor bank realising compensation degree `n_pu`.
///
/// An uncompensated line has `n_pu = 0` and an infinite (shorted)
/// `c_series_total`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompensationSpec {
    pub n_pu: f64,
    /// Equivalent single series capacitance, F.
    pub c_series_total: f64,
    /// Number of equal banks spread equidistantly along the line.
    pub num_segments: u32,
}

impl CompensationSpec {
    pub fn uncompensated() -> Self {
        Self {
            n_pu: 0.0,
            c_series_total: f64::INFINITY,
            num_segments: 1,
        }
    }

    pub fn is_compensated(&self) -> bool {
        self.n_pu > 0.0
    }

    /// Capacitance of each bank; `num_segments` banks in series give the total.
    pub fn per_segment_capacitance(&self) -> f64 {
        self.c_series_total * self.num_segments as f64
    }

    /// Total series capacitive reactance 1/(ωC), Ω. Zero when uncompensated.
    pub fn x_c(&self, omega: f64) -> f64 {
        if self.is_compensated() {
            1.0 / (omega * self.c_series_total)
        } else {
            0.0
        }
    }
}

pub fn size_series_capacitor(
    n_pu: f64,
    params: &LineParams,
    num_segments: u32,
) -> Result<CompensationSpec> {
    params.validate()?;
    if !(n_pu > 0.0 && n_pu < 1.0) {
        return Err(Error::invalid(
            "n_pu",
            format!("compensation degree {n_pu} is outside (0, 1)"),
        ));
    }
    if num_segments == 0 {
        return Err(Error::invalid("num_segments", "must be at least 1"));
    }
    let c_series_total = 1.0 / (n_pu * params.omega * params.omega * params.l_series);
    Ok(CompensationSpec {
        n_pu,
        c_series_total,
        num_segments,
    })
}

/// Builds a `CompensationSpec` for any degree in `[0, 1)`, returning the
/// uncompensated spec for zero.
pub fn compensation_for(
    n_pu: f64,
    params: &LineParams,
    num_segments: u32,
) -> Result<CompensationSpec> {
    if n_pu == 0.0 {
        Ok(CompensationSpec {
            num_segments: num_segments.max(1),
            ..CompensationSpec::uncompensated()
        })
    } else {
        size_series_capacitor(n_pu, params, num_segments)
    }
}

fn check_degree(n_pu: f64) -> Result<()> {
    if n_pu.is_finite() && (0.0..1.0).contains(&n_pu) {
        Ok(())
    } else {
        Err(Error::invalid(
            "n_pu",
            format!("compensation degree {n_pu} is outside [0, 1)"),
        ))
    }
}

/// Series resonance frequency `√N · f0`, Hz.
pub fn ssr_frequency(n_pu: f64, f0: f64) -> Result<f64> {
    check_degree(n_pu)?;
    Ok(n_pu.sqrt() * f0)
}

/// Transfer capability multiplier `1 / (1 − N)`.
pub fn loadability_gain(n_pu: f64) -> Result<f64> {
    check_degree(n_pu)?;
    Ok(1.0 / (1.0 - n_pu))
}

/// Effective series reactance `ωL(1 − N)`, Ω.
pub fn effective_reactance(params: &LineParams, comp: &CompensationSpec) -> f64 {
    params.x_l() - comp.x_c(params.omega)
}

/// Steady-state transfer limit `vs · vr / x_eff` at a 90° angle.
pub fn max_power(vs: f64, vr: f64, x_eff: f64) -> Result<f64> {
    if !(x_eff.is_finite() && x_eff > 0.0) {
        return Err(Error::invalid(
            "x_eff",
            "effective reactance must be positive (line over-compensated?)",
        ));
    }
    Ok(vs * vr / x_eff)
}
