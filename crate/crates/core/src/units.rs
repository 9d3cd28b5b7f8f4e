//! Conversion between internal units and laboratory units.
//!
//! Internally the Rabi-system cavity frequency is 1, so a time `t` is
//! measured in units of `1 / ω_cav` with `ω_cav = 2π × 13.12 GHz`.

use std::f64::consts::PI;

pub const CAVITY_FREQUENCY_GHZ: f64 = 13.12;

/// `ω_cav` in rad/ns.
pub fn omega_cav_per_ns() -> f64 {
    2.0 * PI * CAVITY_FREQUENCY_GHZ
}

pub fn to_ns(t: f64) -> f64 {
    t / omega_cav_per_ns()
}

pub fn from_ns(t_ns: f64) -> f64 {
    t_ns * omega_cav_per_ns()
}

/// Rate `2π × f` with `f` in MHz, in units of `ω_cav`.
pub fn rate_from_mhz(f_mhz: f64) -> f64 {
    f_mhz / (CAVITY_FREQUENCY_GHZ * 1e3)
}

pub fn rate_to_mhz(rate: f64) -> f64 {
    rate * CAVITY_FREQUENCY_GHZ * 1e3
}
