//! Conversions between physical units and photon numbers.
//!
//! This is the only module that deals in joules and watts. Everything else in
//! the crate counts photons per pulse (or photons per second).

use crate::error::{Error, Result};

/// Planck constant in J·s (exact SI value).
pub const PLANCK: f64 = 6.626_070_15e-34;

/// Speed of light in vacuum in m/s (exact SI value).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Center of the C-band.
pub const DEFAULT_WAVELENGTH: f64 = 1550e-9;

/// Transmitter operating point in physical units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    /// Carrier wavelength in meters.
    pub wavelength: f64,
    /// Optical launch power in watts.
    pub power: f64,
    /// Pulses per second.
    pub baud_rate: f64,
    photon_energy: f64,
}

impl PhysicalParams {
    pub fn new(wavelength: f64, power: f64, baud_rate: f64) -> Result<Self> {
        let photon_energy = photon_energy(wavelength)?;
        if !(power >= 0.0) || !power.is_finite() {
            return Err(Error::domain(format!("power must be >= 0 W, got {power}")));
        }
        if !(baud_rate > 0.0) || !baud_rate.is_finite() {
            return Err(Error::domain(format!(
                "baud rate must be > 0, got {baud_rate}"
            )));
        }
        Ok(Self {
            wavelength,
            power,
            baud_rate,
            photon_energy,
        })
    }

    /// Energy of a single photon at this wavelength, in joules.
    pub fn photon_energy(&self) -> f64 {
        self.photon_energy
    }

    pub fn photons_per_pulse(&self) -> f64 {
        self.power / (self.photon_energy * self.baud_rate)
    }

    pub fn photon_flux(&self) -> f64 {
        self.power / self.photon_energy
    }
}

/// `h·c/λ` in joules.
pub fn photon_energy(wavelength: f64) -> Result<f64> {
    if !(wavelength > 0.0) || !wavelength.is_finite() {
        return Err(Error::domain(format!(
            "wavelength must be > 0 m, got {wavelength}"
        )));
    }
    Ok(PLANCK * SPEED_OF_LIGHT / wavelength)
}

/// Mean photon number per pulse `n = w / (e_p·b)`.
pub fn photons_per_pulse(power: f64, wavelength: f64, baud_rate: f64) -> Result<f64> {
    Ok(PhysicalParams::new(wavelength, power, baud_rate)?.photons_per_pulse())
}

/// Photons per second `N = w / e_p`, independent of the baud rate.
pub fn photon_flux(power: f64, wavelength: f64) -> Result<f64> {
    let ep = photon_energy(wavelength)?;
    if !(power >= 0.0) || !power.is_finite() {
        return Err(Error::domain(format!("power must be >= 0 W, got {power}")));
    }
    Ok(power / ep)
}

/// Optical power in watts carrying `n` photons per pulse at `baud_rate`.
pub fn power_for_photons(n: f64, wavelength: f64, baud_rate: f64) -> Result<f64> {
    Ok(photon_energy(wavelength)? * n * baud_rate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn photon_energy_c_band() {
        let ep = photon_energy(1550e-9).unwrap();
        assert_relative_eq!(ep, 1.2816e-19, max_relative = 1e-4);
        // "about 0.1 attojoule"
        assert!(ep > 0.1e-18 && ep < 0.2e-18);
        assert_eq!(photon_energy(775e-9).unwrap(), 2.0 * ep);
        assert_relative_eq!(
            photon_energy(1575e-9).unwrap(),
            1.2612e-19,
            max_relative = 1e-4
        );
    }

    #[test]
    fn rejects_bad_wavelength() {
        assert!(matches!(photon_energy(0.0), Err(Error::Domain(_))));
        assert!(photon_energy(-1.0).is_err());
        assert!(photon_energy(f64::NAN).is_err());
    }

    #[test]
    fn photons_per_pulse_reference_points() {
        let n = photons_per_pulse(0.1, 1550e-9, 80e9).unwrap();
        assert_relative_eq!(n, 9.7536e6, max_relative = 1e-4);
        // rounds to 10^7
        assert_eq!(n.log10().round(), 7.0);

        let n = photons_per_pulse(1e-3, 1550e-9, 1.8e13).unwrap();
        assert_relative_eq!(n, 433.5, max_relative = 1e-3);
    }

    #[test]
    fn zero_baud_rate_is_a_domain_error() {
        assert!(photons_per_pulse(1.0, 1550e-9, 0.0).is_err());
    }

    #[test]
    fn flux_examples() {
        assert_relative_eq!(
            photon_flux(1e-3, 1550e-9).unwrap(),
            7.8028e15,
            max_relative = 1e-4
        );
        assert_eq!(photon_flux(0.0, 1300e-9).unwrap(), 0.0);
        let flux = photon_flux(1e-3, 1550e-9).unwrap();
        let per_pulse = photons_per_pulse(1e-3, 1550e-9, 1.8e13).unwrap();
        assert_relative_eq!(flux / 1.8e13, per_pulse, max_relative = 1e-14);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn round_trip(log_n in 0.0f64..12.0, lambda in 800e-9f64..2000e-9, log_b in 6.0f64..16.0) {
                let n = 10f64.powf(log_n);
                let b = 10f64.powf(log_b);
                let w = power_for_photons(n, lambda, b).unwrap();
                let back = photons_per_pulse(w, lambda, b).unwrap();
                prop_assert!(((back - n) / n).abs() < 1e-12);
            }

            #[test]
            fn flux_is_pulse_rate_times_photons(w in 1e-9f64..10.0, lambda in 800e-9f64..2000e-9, log_b in 6.0f64..16.0) {
                let b = 10f64.powf(log_b);
                let flux = photon_flux(w, lambda).unwrap();
                let via_pulses = photons_per_pulse(w, lambda, b).unwrap() * b;
                prop_assert!(((flux - via_pulses) / flux).abs() < 1e-12);
            }
        }
    }
}
