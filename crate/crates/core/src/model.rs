//! Domain types shared by every module: material constants, the wedge
//! geometry with its loading mode, and polar sample points.
//!
//! Everything is nondimensional by default (`mu = 1`, `c = 1`), so lengths
//! are measured in units of `sqrt(c)`. Stresses scale linearly with `mu`;
//! dipolar stresses carry an extra factor `c`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{NotchError, Result};

/// Isotropic dipolar gradient material: shear modulus, Poisson ratio and
/// gradient coefficient (length squared).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialParams {
    pub mu: f64,
    pub nu: f64,
    pub c: f64,
}

impl MaterialParams {
    pub fn new(mu: f64, nu: f64, c: f64) -> Result<Self> {
        let m = Self { mu, nu, c };
        m.validate()?;
        Ok(m)
    }

    /// `mu = c = 1` with the given Poisson ratio.
    pub fn nondimensional(nu: f64) -> Self {
        Self { mu: 1.0, nu, c: 1.0 }
    }

    /// Lamé's first constant, `2 mu nu / (1 - 2 nu)`.
    pub fn lambda(&self) -> f64 {
        2.0 * self.mu * self.nu / (1.0 - 2.0 * self.nu)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(NotchError::OutOfRange { field: "mu", value: self.mu, allowed: "mu > 0" });
        }
        if !(self.nu > -1.0 && self.nu < 0.5) {
            return Err(NotchError::OutOfRange { field: "nu", value: self.nu, allowed: "-1 < nu < 0.5" });
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(NotchError::OutOfRange { field: "c", value: self.c, allowed: "c > 0" });
        }
        Ok(())
    }
}

impl Default for MaterialParams {
    fn default() -> Self {
        Self::nondimensional(0.3)
    }
}

/// Loading mode: symmetric / anti-symmetric plane strain, or the odd
/// anti-plane family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "ps-sym")]
    PlaneSym,
    #[serde(rename = "ps-anti")]
    PlaneAnti,
    #[serde(rename = "ap")]
    AntiplaneOdd,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::PlaneSym, Mode::PlaneAnti, Mode::AntiplaneOdd];

    pub fn is_plane(self) -> bool {
        !matches!(self, Mode::AntiplaneOdd)
    }

    /// Number of general-solution amplitudes (A1..A4, B1..B4 or D1, D2).
    pub fn basis_len(self) -> usize {
        if self.is_plane() {
            4
        } else {
            2
        }
    }

    /// Number of free constants of the p = 1 constant-strain solution
    /// (C1, C3 / C2 / E).
    pub fn p1_len(self) -> usize {
        match self {
            Mode::PlaneSym => 2,
            Mode::PlaneAnti | Mode::AntiplaneOdd => 1,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Mode::PlaneSym => "ps-sym",
            Mode::PlaneAnti => "ps-anti",
            Mode::AntiplaneOdd => "ap",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "ps-sym" => Ok(Mode::PlaneSym),
            "ps-anti" => Ok(Mode::PlaneAnti),
            "ap" => Ok(Mode::AntiplaneOdd),
            other => Err(format!("unknown mode '{other}' (expected ps-sym, ps-anti or ap)")),
        }
    }
}

/// Notch faces at `theta = ±half_angle`; `pi` is a crack, `pi/2` a half-space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WedgeCase {
    pub half_angle: f64,
    pub mode: Mode,
}

impl WedgeCase {
    pub fn new(half_angle: f64, mode: Mode) -> Self {
        Self { half_angle, mode }
    }

    pub fn from_degrees(deg: f64, mode: Mode) -> Self {
        Self::new(deg.to_radians(), mode)
    }

    pub fn crack(mode: Mode) -> Self {
        Self::new(PI, mode)
    }

    pub fn half_space(mode: Mode) -> Self {
        Self::new(FRAC_PI_2, mode)
    }

    pub fn validate(&self) -> Result<()> {
        // A few ulps of slack so that degree inputs of 90 and 180 are accepted.
        let slack = 1e-12;
        if !(self.half_angle >= FRAC_PI_2 - slack && self.half_angle <= PI + slack) {
            return Err(NotchError::OutOfRange { field: "a", value: self.half_angle, allowed: "pi/2 <= a <= pi" });
        }
        Ok(())
    }
}

/// Point in the notch sector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarPoint {
    pub r: f64,
    pub theta: f64,
}

impl PolarPoint {
    pub fn new(r: f64, theta: f64) -> Self {
        Self { r, theta }
    }
}

/// Checks the material and wedge invariants together.
pub fn validate_case(material: &MaterialParams, case: &WedgeCase) -> Result<()> {
    material.validate()?;
    case.validate()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn valid_crack_case() {
        let m = MaterialParams::new(1.0, 0.3, 1.0).unwrap();
        assert!(validate_case(&m, &WedgeCase::crack(Mode::PlaneSym)).is_ok());
    }

    #[test]
    fn incompressible_limit_rejected() {
        let m = MaterialParams { mu: 1.0, nu: 0.5, c: 1.0 };
        let err = validate_case(&m, &WedgeCase::crack(Mode::PlaneSym)).unwrap_err();
        assert!(matches!(err, NotchError::OutOfRange { field: "nu", .. }));
    }

    #[test]
    fn acute_wedge_rejected() {
        let m = MaterialParams::default();
        let err = validate_case(&m, &WedgeCase::new(FRAC_PI_4, Mode::PlaneSym)).unwrap_err();
        assert!(matches!(err, NotchError::OutOfRange { field: "a", .. }));
    }

    #[test]
    fn non_positive_moduli_rejected() {
        assert!(MaterialParams::new(0.0, 0.3, 1.0).is_err());
        assert!(MaterialParams::new(1.0, 0.3, -1.0).is_err());
        assert!(MaterialParams::new(1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn lambda_is_derived() {
        let m = MaterialParams::new(2.0, 0.25, 1.0).unwrap();
        assert!((m.lambda() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn degree_endpoints_validate() {
        for deg in [90.0, 180.0] {
            assert!(WedgeCase::from_degrees(deg, Mode::AntiplaneOdd).validate().is_ok());
        }
    }

    #[test]
    fn mode_round_trips_through_tag() {
        for m in Mode::ALL {
            assert_eq!(m.tag().parse::<Mode>().unwrap(), m);
        }
    }
}
