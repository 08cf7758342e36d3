//! Van der Waals reduced units.
//!
//! Lengths are measured in σ = (2μC₆/ħ²)^{1/4}, energies in ε = ħ²/(2μσ²) and
//! light intensities in β = cσ³ε/(12π α₁α₂). Inputs are SI; polarizabilities
//! are polarizability volumes in m³.

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Speed of light, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Atomic mass unit, kg.
pub const DALTON: f64 = 1.660_539_066_60e-27;
/// Bohr radius, m.
pub const BOHR: f64 = 5.291_772_109_03e-11;
/// Hartree energy, J.
pub const HARTREE: f64 = 4.359_744_722_207_1e-18;

/// Converts a mass in daltons to kg.
pub fn mass_from_dalton<T: Real>(m: T) -> T {
    m * lit(DALTON)
}

/// Converts a C₆ coefficient in E_h·a₀⁶ to J·m⁶.
pub fn c6_from_atomic<T: Real>(c6: T) -> T {
    c6 * lit(HARTREE) * lit::<T>(BOHR).powi(6)
}

/// Converts a polarizability volume in a₀³ to m³.
pub fn polarizability_from_atomic<T: Real>(alpha: T) -> T {
    alpha * lit::<T>(BOHR).powi(3)
}

/// Unit conversion factors for one atom pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitSystem<T> {
    pub mu: T,
    pub c6: T,
    pub alpha1: T,
    pub alpha2: T,
    pub sigma: T,
    pub epsilon: T,
    pub beta_intensity: T,
}

/// Builds the unit system with the SI value of ħ.
pub fn make_unit_system<T: Real>(mu: T, c6: T, alpha1: T, alpha2: T) -> Result<UnitSystem<T>> {
    make_unit_system_with_hbar(mu, c6, alpha1, alpha2, lit(HBAR))
}

/// Same as [`make_unit_system`] with an explicit ħ, for natural-unit checks.
pub fn make_unit_system_with_hbar<T: Real>(
    mu: T,
    c6: T,
    alpha1: T,
    alpha2: T,
    hbar: T,
) -> Result<UnitSystem<T>> {
    for (name, v) in [("mu", mu), ("C6", c6), ("alpha1", alpha1), ("alpha2", alpha2), ("hbar", hbar)] {
        if !(v > T::zero() && v.is_finite()) {
            return Err(Error::domain(format!("{name} must be positive, got {v}")));
        }
    }
    let two = lit::<T>(2.0);
    let sigma = (two * mu * c6 / (hbar * hbar)).sqrt().sqrt();
    let epsilon = hbar * hbar / (two * mu * sigma * sigma);
    let beta_intensity = lit::<T>(SPEED_OF_LIGHT) * sigma.powi(3) * epsilon
        / (lit::<T>(12.0) * T::PI() * alpha1 * alpha2);
    Ok(UnitSystem { mu, c6, alpha1, alpha2, sigma, epsilon, beta_intensity })
}

impl<T: Real> UnitSystem<T> {
    pub fn length_to_ru(&self, r: T) -> T {
        r / self.sigma
    }

    pub fn length_from_ru(&self, x: T) -> T {
        x * self.sigma
    }

    pub fn energy_to_ru(&self, e: T) -> T {
        e / self.epsilon
    }

    pub fn energy_from_ru(&self, e: T) -> T {
        e * self.epsilon
    }

    pub fn intensity_to_ru(&self, i: T) -> T {
        i / self.beta_intensity
    }

    pub fn intensity_from_ru(&self, i: T) -> T {
        i * self.beta_intensity
    }
}

/// Reduced dipolar intensity 3D/(εσ³) for a strength D in energy·length³.
pub fn dipole_strength_to_ru<T: Real>(d: T, u: &UnitSystem<T>) -> Result<T> {
    if !(d >= T::zero()) || !d.is_finite() {
        return Err(Error::domain(format!("dipole strength must be non-negative, got {d}")));
    }
    Ok(lit::<T>(3.0) * d / (u.epsilon * u.sigma.powi(3)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn natural_units() {
        let u = make_unit_system_with_hbar(0.5f64, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(u.sigma, 1.0, max_relative = 1e-15);
        assert_relative_eq!(u.epsilon, 1.0, max_relative = 1e-15);
        let u = make_unit_system_with_hbar(0.5f64, 16.0, 1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(u.sigma, 2.0, max_relative = 1e-15);
        assert_relative_eq!(u.epsilon, 0.25, max_relative = 1e-15);
    }

    #[test]
    fn dipole_strength() {
        let u = make_unit_system_with_hbar(0.5f64, 16.0, 1.0, 1.0, 1.0).unwrap();
        let unit: f64 = u.epsilon * u.sigma.powi(3);
        assert_eq!(dipole_strength_to_ru(0.0, &u).unwrap(), 0.0);
        assert_relative_eq!(dipole_strength_to_ru(unit, &u).unwrap(), 3.0, max_relative = 1e-15);
        assert_relative_eq!(dipole_strength_to_ru(2.5 * unit, &u).unwrap(), 7.5, max_relative = 1e-15);
        assert!(dipole_strength_to_ru(-1.0, &u).is_err());
    }

    #[test]
    fn rejects_non_positive() {
        assert!(make_unit_system(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(make_unit_system(1.0, -1.0, 1.0, 1.0).is_err());
        assert!(make_unit_system(1.0, 1.0, f64::NAN, 1.0).is_err());
    }
}
