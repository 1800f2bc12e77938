// SPDX-License-Identifier: Apache-2.0

//! Per-query inference footprint model.
//!
//! Energy is derived from the time a query keeps the serving hardware busy,
//! the effective board power of that hardware and the datacenter overhead
//! (PUE). Water and carbon are then linear in energy through the WUE and CIF
//! multipliers. Everything here is pure and safe to call from any thread.
//!
//! All outputs are modeled estimates, not measurements.

use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

const SECONDS_PER_HOUR: f64 = 3600.0;

/// Label attached to every footprint rendering.
pub const ESTIMATE_LABEL: &str = "modeled estimate";

/// Runtime and power characteristics of the model serving a query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelProfile {
    pub name: String,
    /// Time to first token, seconds.
    pub ttft_s: f64,
    /// Generation speed, tokens per second.
    pub gen_speed_tps: f64,
    /// Peak GPU board power, watts.
    pub gpu_power_w: f64,
    /// Fraction of peak GPU power drawn while serving.
    pub gpu_utilization: f64,
    /// CPU, memory and network overhead attributed to the query, watts.
    pub nongpu_power_w: f64,
}

impl ModelProfile {
    pub fn new(
        name: impl Into<String>,
        ttft_s: f64,
        gen_speed_tps: f64,
        gpu_power_w: f64,
        gpu_utilization: f64,
        nongpu_power_w: f64,
    ) -> Result<Self, ConfigError> {
        let profile = Self {
            name: name.into(),
            ttft_s,
            gen_speed_tps,
            gpu_power_w,
            gpu_utilization,
            nongpu_power_w,
        };
        profile.validate()?;
        Ok(profile)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |field: &str, reason: &str| {
            Err(ConfigError::Invalid(format!(
                "model profile '{}': {field} {reason}",
                self.name
            )))
        };
        if !(self.gen_speed_tps.is_finite() && self.gen_speed_tps > 0.0) {
            return bad("gen_speed_tps", "must be > 0");
        }
        if !(0.0..=1.0).contains(&self.gpu_utilization) {
            return bad("gpu_utilization", "must be within [0, 1]");
        }
        if !(self.gpu_power_w.is_finite() && self.gpu_power_w >= 0.0) {
            return bad("gpu_power_w", "must be >= 0");
        }
        if !(self.nongpu_power_w.is_finite() && self.nongpu_power_w >= 0.0) {
            return bad("nongpu_power_w", "must be >= 0");
        }
        if !(self.ttft_s.is_finite() && self.ttft_s >= 0.0) {
            return bad("ttft_s", "must be >= 0");
        }
        Ok(())
    }

    /// Power drawn while the query is being served, watts.
    pub fn effective_power_w(&self) -> f64 {
        self.gpu_power_w * self.gpu_utilization + self.nongpu_power_w
    }
}

/// Facility-level multipliers applied to IT energy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatacenterProfile {
    pub name: String,
    pub pue: f64,
    /// Combined on-site cooling and off-site generation water, L/kWh.
    pub wue_l_per_kwh: f64,
    /// Grid carbon intensity, gCO2e/kWh.
    pub cif_g_per_kwh: f64,
}

impl DatacenterProfile {
    pub fn new(
        name: impl Into<String>,
        pue: f64,
        wue_l_per_kwh: f64,
        cif_g_per_kwh: f64,
    ) -> Result<Self, ConfigError> {
        let dc = Self {
            name: name.into(),
            pue,
            wue_l_per_kwh,
            cif_g_per_kwh,
        };
        dc.validate()?;
        Ok(dc)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.pue.is_finite() && self.pue >= 1.0) {
            return Err(ConfigError::Invalid(format!(
                "datacenter '{}': pue must be >= 1",
                self.name
            )));
        }
        if !(self.wue_l_per_kwh.is_finite() && self.wue_l_per_kwh >= 0.0) {
            return Err(ConfigError::Invalid(format!(
                "datacenter '{}': wue_l_per_kwh must be >= 0",
                self.name
            )));
        }
        if !(self.cif_g_per_kwh.is_finite() && self.cif_g_per_kwh >= 0.0) {
            return Err(ConfigError::Invalid(format!(
                "datacenter '{}': cif_g_per_kwh must be >= 0",
                self.name
            )));
        }
        Ok(())
    }
}

/// Token usage of one query, optionally with a measured wall-clock latency.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct QueryUsage {
    pub input_tokens: u64,
    pub output_tokens: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measured_latency_s: Option<f64>,
}

impl QueryUsage {
    pub fn new(input_tokens: u64, output_tokens: u64) -> Self {
        Self {
            input_tokens,
            output_tokens,
            measured_latency_s: None,
        }
    }

    pub fn with_latency(mut self, latency_s: f64) -> Self {
        self.measured_latency_s = Some(latency_s);
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        match self.measured_latency_s {
            Some(l) if !(l.is_finite() && l >= 0.0) => Err(ConfigError::Invalid(format!(
                "measured latency must be a non-negative number, got {l}"
            ))),
            _ => Ok(()),
        }
    }
}

/// Energy, water and carbon attributed to a query (or a sum of queries).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FootprintEstimate {
    pub energy_wh: f64,
    pub water_ml: f64,
    pub carbon_g: f64,
    pub latency_s: f64,
}

impl FootprintEstimate {
    pub const ZERO: Self = Self {
        energy_wh: 0.0,
        water_ml: 0.0,
        carbon_g: 0.0,
        latency_s: 0.0,
    };

    pub fn is_valid(&self) -> bool {
        [self.energy_wh, self.water_ml, self.carbon_g, self.latency_s]
            .iter()
            .all(|v| v.is_finite() && *v >= 0.0)
    }
}

impl Add for FootprintEstimate {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        Self {
            energy_wh: self.energy_wh + rhs.energy_wh,
            water_ml: self.water_ml + rhs.water_ml,
            carbon_g: self.carbon_g + rhs.carbon_g,
            latency_s: self.latency_s + rhs.latency_s,
        }
    }
}

impl AddAssign for FootprintEstimate {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

/// Seconds the query occupies the serving hardware.
pub fn estimate_latency(profile: &ModelProfile, usage: &QueryUsage) -> f64 {
    match usage.measured_latency_s {
        Some(measured) => measured,
        None => profile.ttft_s + usage.output_tokens as f64 / profile.gen_speed_tps,
    }
}

/// Facility energy in watt-hours for `latency_s` seconds of serving.
pub fn estimate_energy(profile: &ModelProfile, dc: &DatacenterProfile, latency_s: f64) -> f64 {
    profile.effective_power_w() * latency_s / SECONDS_PER_HOUR * dc.pue
}

/// L/kWh and mL/Wh are the same ratio, so no rescaling is needed.
pub fn energy_to_water(dc: &DatacenterProfile, energy_wh: f64) -> f64 {
    energy_wh * dc.wue_l_per_kwh
}

pub fn energy_to_carbon(dc: &DatacenterProfile, energy_wh: f64) -> f64 {
    energy_wh * dc.cif_g_per_kwh / 1000.0
}

pub fn estimate_footprint(
    profile: &ModelProfile,
    dc: &DatacenterProfile,
    usage: &QueryUsage,
) -> FootprintEstimate {
    let latency_s = estimate_latency(profile, usage);
    let energy_wh = estimate_energy(profile, dc, latency_s);
    FootprintEstimate {
        energy_wh,
        water_ml: energy_to_water(dc, energy_wh),
        carbon_g: energy_to_carbon(dc, energy_wh),
        latency_s,
    }
}
