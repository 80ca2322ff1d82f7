//! Energy model: solar charge, aerodynamic drag, rolling resistance,
//! gravitational work and constant system loss.
//!
//! Internal unit is the watt-hour. Speeds are m/s, distances meters, angles
//! radians unless a name says otherwise.

use alloc::vec::Vec;
use core::ops::AddAssign;

use libm::cos;
use serde::{Deserialize, Serialize};

use crate::J_PER_WH;

/// Reference cell temperature for the panel efficiency rating, °C.
pub const PANEL_REFERENCE_TEMP_C: f64 = 25.0;

fn default_temp_coefficient() -> f64 {
    0.0016
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleSpec {
    /// m²
    pub panel_area: f64,
    pub panel_efficiency: f64,
    pub system_efficiency: f64,
    /// kg
    pub mass: f64,
    pub drag_coefficient: f64,
    /// m²
    pub frontal_area: f64,
    pub rolling_resistance: f64,
    /// Wh
    pub battery_capacity: f64,
    /// W
    pub constant_power_loss: f64,
    /// Relative panel efficiency loss per °C above 25 °C.
    #[serde(default = "default_temp_coefficient")]
    pub panel_temp_coefficient: f64,
}

/// A rejected field, named as in the vehicle file.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{field}: {reason}")]
pub struct FieldError {
    pub field: &'static str,
    pub reason: &'static str,
}

impl VehicleSpec {
    /// Checks every field; returns all violations, not just the first.
    pub fn validate(&self) -> Result<(), Vec<FieldError>> {
        let mut errs = Vec::new();
        let mut positive = |field: &'static str, v: f64| {
            if !(v > 0.0) || !v.is_finite() {
                errs.push(FieldError {
                    field,
                    reason: "must be > 0",
                });
            }
        };
        positive("panel_area", self.panel_area);
        positive("panel_efficiency", self.panel_efficiency);
        positive("system_efficiency", self.system_efficiency);
        positive("mass", self.mass);
        positive("drag_coefficient", self.drag_coefficient);
        positive("frontal_area", self.frontal_area);
        positive("rolling_resistance", self.rolling_resistance);
        positive("battery_capacity", self.battery_capacity);
        positive("constant_power_loss", self.constant_power_loss);
        for (field, v) in [
            ("panel_efficiency", self.panel_efficiency),
            ("system_efficiency", self.system_efficiency),
        ] {
            if v > 1.0 {
                errs.push(FieldError {
                    field,
                    reason: "must be <= 1",
                });
            }
        }
        if !(self.panel_temp_coefficient >= 0.0) || !self.panel_temp_coefficient.is_finite() {
            errs.push(FieldError {
                field: "panel_temp_coefficient",
                reason: "must be >= 0",
            });
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }

    /// Panel efficiency corrected for ambient temperature.
    pub fn panel_efficiency_at(&self, ambient_c: f64) -> f64 {
        self.panel_efficiency
            * (1.0 - self.panel_temp_coefficient * (ambient_c - PANEL_REFERENCE_TEMP_C))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityModel {
    #[default]
    Constant,
    /// Dry-air ideal gas at sea-level pressure and the ambient temperature.
    IdealGas,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PhysicsConstants {
    /// kg/m³
    pub air_density: f64,
    /// m/s²
    pub gravity: f64,
    pub density_model: DensityModel,
    /// Fraction of negative gravitational work returned to the battery.
    pub regen_efficiency: f64,
}

impl Default for PhysicsConstants {
    fn default() -> Self {
        PhysicsConstants {
            air_density: 1.225,
            gravity: 9.81,
            density_model: DensityModel::Constant,
            regen_efficiency: 1.0,
        }
    }
}

impl PhysicsConstants {
    pub fn validate(&self) -> Result<(), Vec<FieldError>> {
        let mut errs = Vec::new();
        if !(self.air_density > 0.0) {
            errs.push(FieldError {
                field: "air_density",
                reason: "must be > 0",
            });
        }
        if !(self.gravity > 0.0) {
            errs.push(FieldError {
                field: "gravity",
                reason: "must be > 0",
            });
        }
        if !(0.0..=1.0).contains(&self.regen_efficiency) {
            errs.push(FieldError {
                field: "regen_efficiency",
                reason: "must be in [0, 1]",
            });
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }

    /// Air density at the given ambient temperature under the configured model.
    pub fn density_at(&self, ambient_c: f64) -> f64 {
        match self.density_model {
            DensityModel::Constant => self.air_density,
            DensityModel::IdealGas => 101_325.0 / (287.05 * (ambient_c + 273.15)),
        }
    }

    /// Copy with `air_density` resolved for the given temperature.
    pub fn at_temperature(&self, ambient_c: f64) -> PhysicsConstants {
        PhysicsConstants {
            air_density: self.density_at(ambient_c),
            density_model: DensityModel::Constant,
            ..*self
        }
    }
}

/// Per-component energy over a step or a whole journey, Wh.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub drag: f64,
    pub rolling: f64,
    /// Signed: negative on net descent.
    pub gravitational: f64,
    pub system: f64,
    pub consumption_total: f64,
    pub charge: f64,
    /// Solar input discarded because the battery was full.
    pub spilled: f64,
}

impl EnergyBreakdown {
    pub fn consumption(drag: f64, rolling: f64, gravitational: f64, system: f64) -> Self {
        EnergyBreakdown {
            drag,
            rolling,
            gravitational,
            system,
            consumption_total: drag + rolling + gravitational + system,
            charge: 0.0,
            spilled: 0.0,
        }
    }

    /// Battery change implied by this breakdown.
    pub fn net(&self) -> f64 {
        self.charge - self.consumption_total - self.spilled
    }
}

impl AddAssign for EnergyBreakdown {
    fn add_assign(&mut self, o: Self) {
        self.drag += o.drag;
        self.rolling += o.rolling;
        self.gravitational += o.gravitational;
        self.system += o.system;
        self.consumption_total += o.consumption_total;
        self.charge += o.charge;
        self.spilled += o.spilled;
    }
}

/// Signed wind component along the heading; positive opposes motion.
pub fn headwind_component(wind_speed: f64, wind_from_deg: f64, heading_deg: f64) -> f64 {
    wind_speed * cos((wind_from_deg - heading_deg).to_radians())
}

/// Solar charging power, W. Never negative.
pub fn charge_power(spec: &VehicleSpec, ghi: f64, ambient_c: f64) -> f64 {
    let p = spec.system_efficiency * spec.panel_efficiency_at(ambient_c) * ghi * spec.panel_area;
    p.max(0.0)
}

/// Solar energy collected over `hours`, Wh.
pub fn charge_energy(spec: &VehicleSpec, ghi: f64, hours: f64, ambient_c: f64) -> f64 {
    charge_power(spec, ghi, ambient_c) * hours
}

/// Aerodynamic drag force, N. Uses the literal square of the air speed.
pub fn drag_force(spec: &VehicleSpec, c: &PhysicsConstants, speed: f64, headwind: f64) -> f64 {
    let air = speed + headwind;
    0.5 * spec.drag_coefficient * c.air_density * spec.frontal_area * air * air
}

pub fn drag_energy(
    spec: &VehicleSpec,
    c: &PhysicsConstants,
    speed: f64,
    headwind: f64,
    distance: f64,
) -> f64 {
    drag_force(spec, c, speed, headwind) * distance / J_PER_WH
}

pub fn rolling_force(spec: &VehicleSpec, c: &PhysicsConstants, incline: f64) -> f64 {
    spec.mass * c.gravity * spec.rolling_resistance * cos(incline)
}

pub fn rolling_energy(spec: &VehicleSpec, c: &PhysicsConstants, incline: f64, distance: f64) -> f64 {
    rolling_force(spec, c, incline) * distance / J_PER_WH
}

/// Potential energy change, Wh; negative on descent.
pub fn gravitational_energy(spec: &VehicleSpec, c: &PhysicsConstants, elevation_change: f64) -> f64 {
    spec.mass * c.gravity * elevation_change / J_PER_WH
}

/// Gravitational energy drawn from the battery, with descents credited at
/// `regen_efficiency`.
pub fn effective_gravitational_energy(
    spec: &VehicleSpec,
    c: &PhysicsConstants,
    elevation_change: f64,
) -> f64 {
    let e = gravitational_energy(spec, c, elevation_change);
    if e < 0.0 {
        e * c.regen_efficiency
    } else {
        e
    }
}

pub fn system_energy(spec: &VehicleSpec, hours: f64) -> f64 {
    spec.constant_power_loss * hours
}

/// Four-part consumption for a stretch of road.
#[allow(clippy::too_many_arguments)]
pub fn consumption(
    spec: &VehicleSpec,
    c: &PhysicsConstants,
    speed: f64,
    headwind: f64,
    incline: f64,
    elevation_change: f64,
    distance: f64,
    hours: f64,
) -> EnergyBreakdown {
    EnergyBreakdown::consumption(
        drag_energy(spec, c, speed, headwind, distance),
        rolling_energy(spec, c, incline, distance),
        effective_gravitational_energy(spec, c, elevation_change),
        system_energy(spec, hours),
    )
}

/// Electrical power drawn at steady `speed` on a road with grade
/// `rise_per_meter` (= elevation change / along-road length), W.
pub fn traction_power(
    spec: &VehicleSpec,
    c: &PhysicsConstants,
    speed: f64,
    headwind: f64,
    incline: f64,
    rise_per_meter: f64,
) -> f64 {
    let grade = effective_gravitational_energy(spec, c, rise_per_meter) * J_PER_WH;
    speed * (drag_force(spec, c, speed, headwind) + rolling_force(spec, c, incline) + grade)
}
