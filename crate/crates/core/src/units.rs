//! Parsing of frequency and wavelength strings such as `617nm`, `-2.5THz`,
//! `2pi*20kHz` or `1.2e5rad/s`.
//!
//! Hz-based units are cycle frequencies and are multiplied by 2π; the
//! optional `2pi*` prefix only makes that explicit. A bare number is rad/s.

use std::f64::consts::PI;

use crate::constants::wavelength_to_omega;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Frequency {
    /// Vacuum wavelength in metres.
    Wavelength(f64),
    /// Angular frequency in rad/s.
    Angular(f64),
}

impl Frequency {
    /// Angular frequency in rad/s.
    pub fn omega(&self) -> Result<f64> {
        match *self {
            Frequency::Angular(w) => Ok(w),
            Frequency::Wavelength(l) if l > 0.0 => Ok(wavelength_to_omega(l)),
            Frequency::Wavelength(l) => Err(Error::InvalidArgument(format!("wavelength must be positive, got {l} m"))),
        }
    }

    /// Angular frequency, rejecting wavelengths (for detunings and shifts).
    pub fn angular(&self) -> Result<f64> {
        match *self {
            Frequency::Angular(w) => Ok(w),
            Frequency::Wavelength(_) => Err(Error::InvalidArgument(
                "a frequency is required here, not a wavelength".into(),
            )),
        }
    }
}

impl std::str::FromStr for Frequency {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_frequency(s)
    }
}

const HZ_UNITS: [(&str, f64); 5] = [("THz", 1e12), ("GHz", 1e9), ("MHz", 1e6), ("kHz", 1e3), ("Hz", 1.0)];

pub fn parse_frequency(text: &str) -> Result<Frequency> {
    let bad = || Error::InvalidArgument(format!("cannot parse frequency `{text}`"));
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let (sign, body) = match compact.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, compact.strip_prefix('+').unwrap_or(&compact)),
    };
    let (two_pi, body) = match ["2pi*", "2π*", "2*pi*", "2*π*"].iter().find_map(|p| body.strip_prefix(p)) {
        Some(rest) => (true, rest),
        None => (false, body),
    };
    let number = |s: &str| s.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(bad);
    if let Some(v) = body.strip_suffix("nm") {
        if two_pi {
            return Err(bad());
        }
        return Ok(Frequency::Wavelength(sign * number(v)? / 1e9));
    }
    for (unit, scale) in HZ_UNITS {
        if let Some(v) = body.strip_suffix(unit) {
            return Ok(Frequency::Angular(sign * 2.0 * PI * scale * number(v)?));
        }
    }
    if two_pi {
        return Err(bad());
    }
    let v = body.strip_suffix("rad/s").unwrap_or(body);
    Ok(Frequency::Angular(sign * number(v)?))
}
