// SPDX-License-Identifier: Apache-2.0

//! Child-friendly renderings of a footprint: water drops, CO2 balloons and
//! minutes of LED light.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::footprint::FootprintEstimate;

/// Below this many drops the count is shown as "~1 drop".
const APPROX_DROP_CUTOFF: f64 = 1.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelatableConstants {
    /// Volume of one water drop, mL.
    pub drop_volume_ml: f64,
    /// CO2 held by one party balloon, g.
    pub balloon_mass_g: f64,
    /// Power of the reference LED bulb, W.
    pub led_power_w: f64,
}

impl Default for RelatableConstants {
    fn default() -> Self {
        crate::config::Config::default().relatable
    }
}

impl RelatableConstants {
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, v) in [
            ("drop_volume_ml", self.drop_volume_ml),
            ("balloon_mass_g", self.balloon_mass_g),
            ("led_power_w", self.led_power_w),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(ConfigError::Invalid(format!("relatable.{name} must be > 0")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelatableUnits {
    pub water_drops: f64,
    pub co2_balloons: f64,
    pub led_minutes: f64,
    pub water_display: String,
    pub co2_display: String,
    pub led_display: String,
}

impl RelatableUnits {
    /// One-line summary, e.g. `3 drops, 0.01 balloons, 2.3 minutes`.
    pub fn summary(&self) -> String {
        format!(
            "{}, {}, {}",
            self.water_display, self.co2_display, self.led_display
        )
    }
}

impl fmt::Display for RelatableUnits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.summary())
    }
}

pub fn to_relatable(fp: &FootprintEstimate, constants: &RelatableConstants) -> RelatableUnits {
    let water_drops = fp.water_ml / constants.drop_volume_ml;
    let co2_balloons = fp.carbon_g / constants.balloon_mass_g;
    let led_minutes = fp.energy_wh / constants.led_power_w * 60.0;
    RelatableUnits {
        water_drops,
        co2_balloons,
        led_minutes,
        water_display: format_drops(water_drops),
        co2_display: format_balloons(co2_balloons),
        led_display: format_led_minutes(led_minutes),
    }
}

pub fn format_drops(drops: f64) -> String {
    if drops <= 0.0 {
        return "0 drops".to_owned();
    }
    if drops < APPROX_DROP_CUTOFF {
        return "~1 drop".to_owned();
    }
    format!("{} drops", drops.round() as u64)
}

pub fn format_balloons(balloons: f64) -> String {
    format!("{balloons:.2} balloons")
}

pub fn format_led_minutes(minutes: f64) -> String {
    format!("{minutes:.1} minutes")
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;

    use super::*;

    fn defaults() -> RelatableConstants {
        RelatableConstants {
            drop_volume_ml: 0.25,
            balloon_mass_g: 25.0,
            led_power_w: 10.0,
        }
    }

    #[test]
    fn algebra_answer_readout() {
        let fp = FootprintEstimate {
            energy_wh: 0.38,
            water_ml: 0.77,
            carbon_g: 0.152,
            latency_s: 0.0,
        };
        let r = to_relatable(&fp, &defaults());
        assert_relative_eq!(r.water_drops, 3.08, max_relative = 1e-12);
        assert_relative_eq!(r.co2_balloons, 0.00608, max_relative = 1e-12);
        assert_relative_eq!(r.led_minutes, 2.28, max_relative = 1e-12);
        assert_eq!(r.summary(), "3 drops, 0.01 balloons, 2.3 minutes");
    }

    #[test]
    fn zero_footprint() {
        let r = to_relatable(&FootprintEstimate::ZERO, &defaults());
        assert_eq!((r.water_drops, r.co2_balloons, r.led_minutes), (0.0, 0.0, 0.0));
        assert_eq!(r.summary(), "0 drops, 0.00 balloons, 0.0 minutes");
    }

    #[test]
    fn drop_rounding() {
        assert_eq!(format_drops(0.2), "~1 drop");
        assert_eq!(format_drops(1.49), "~1 drop");
        assert_eq!(format_drops(1.5), "2 drops");
        assert_eq!(format_drops(2.12), "2 drops");
    }

    #[test]
    fn doubling_doubles() {
        let fp = FootprintEstimate {
            energy_wh: 0.3,
            water_ml: 0.6,
            carbon_g: 0.12,
            latency_s: 1.0,
        };
        let a = to_relatable(&fp, &defaults());
        let b = to_relatable(&(fp + fp), &defaults());
        assert_relative_eq!(b.water_drops, 2.0 * a.water_drops, max_relative = 1e-12);
        assert_relative_eq!(b.co2_balloons, 2.0 * a.co2_balloons, max_relative = 1e-12);
        assert_relative_eq!(b.led_minutes, 2.0 * a.led_minutes, max_relative = 1e-12);
    }
}
