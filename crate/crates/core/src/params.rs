//! Scalar parameters of the driven two-orbital junction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the tilt parameters `lambda_x`, `lambda_y` enter the nuclear potential.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PotentialReading {
    /// `U = ½(x − λx)² + ½(y − λy)²`.
    #[default]
    Shifted,
    /// `U = ½(x − λx·x)² + ½(y − λy·y)²`.
    Literal,
}

/// All model parameters. Units: ħ = e = 1, unit harmonic curvature.
///
/// The sign of `b` selects the spin species: `b > 0` is spin-up, `b < 0`
/// spin-down.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelParams {
    /// Diabatic slope along x.
    pub a: f64,
    /// Spin-orbit slope along y.
    pub b: f64,
    /// Drive amplitude.
    pub c: f64,
    /// Drive angular frequency.
    pub omega: f64,
    /// Orbital energy gap.
    pub delta: f64,
    pub lambda_x: f64,
    pub lambda_y: f64,
    /// Wide-band coupling strength.
    pub gamma: f64,
    #[serde(rename = "kT")]
    pub kt: f64,
    pub mu_l: f64,
    pub mu_r: f64,
    /// Floquet truncation: sectors `-n..=n`.
    pub n_floquet: usize,
    /// Nuclear mass, shared by both coordinates.
    pub mass: f64,
    pub potential: PotentialReading,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            a: 1.0,
            b: 1.2,
            c: 0.0,
            omega: 1.0,
            delta: 0.0,
            lambda_x: 0.0,
            lambda_y: 1.0,
            gamma: 1.0,
            kt: 0.5,
            mu_l: 0.0,
            mu_r: 0.0,
            n_floquet: 5,
            mass: 1.0,
            potential: PotentialReading::Shifted,
        }
    }
}

impl ModelParams {
    /// Symmetric-orbital junction of the first bias sweep (Δ = 0, λy = 1).
    pub fn symmetric() -> Self {
        Self::default()
    }

    /// Asymmetric-orbital junction of the second bias sweep (Δ = 3, λy = 0.8).
    pub fn asymmetric() -> Self {
        Self {
            delta: 3.0,
            lambda_y: 0.8,
            ..Self::default()
        }
    }

    /// Sets `mu_l = mu` and `mu_r = -mu`.
    pub fn with_bias(self, mu: f64) -> Self {
        Self {
            mu_l: mu,
            mu_r: -mu,
            ..self
        }
    }

    pub fn with_drive(self, c: f64, omega: f64) -> Self {
        Self { c, omega, ..self }
    }

    /// The same junction with the opposite spin species (`b → −b`).
    pub fn spin_flipped(self) -> Self {
        Self { b: -self.b, ..self }
    }

    /// Number of Floquet sectors, `2N + 1`.
    pub fn sectors(&self) -> usize {
        2 * self.n_floquet + 1
    }

    /// Dimension of the Floquet space, `2(2N + 1)`.
    pub fn dim(&self) -> usize {
        2 * self.sectors()
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("a", self.a),
            ("b", self.b),
            ("c", self.c),
            ("omega", self.omega),
            ("delta", self.delta),
            ("lambda_x", self.lambda_x),
            ("lambda_y", self.lambda_y),
            ("gamma", self.gamma),
            ("kT", self.kt),
            ("mu_l", self.mu_l),
            ("mu_r", self.mu_r),
            ("mass", self.mass),
        ];
        for (key, v) in finite {
            if !v.is_finite() {
                return Err(Error::invalid(key, "must be finite"));
            }
        }
        if self.gamma <= 0.0 {
            return Err(Error::invalid("gamma", "must be > 0"));
        }
        if self.kt <= 0.0 {
            return Err(Error::invalid("kT", "must be > 0"));
        }
        if self.mass <= 0.0 {
            return Err(Error::invalid("mass", "must be > 0"));
        }
        if self.c != 0.0 && self.omega <= 0.0 {
            return Err(Error::invalid("omega", "must be > 0 when the drive is on"));
        }
        if self.omega < 0.0 {
            return Err(Error::invalid("omega", "must be >= 0"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn figure_defaults() {
        let p = ModelParams::default();
        assert_eq!((p.a, p.b, p.gamma, p.kt, p.n_floquet), (1.0, 1.2, 1.0, 0.5, 5));
        assert_eq!(p.dim(), 22);
        let q = ModelParams::asymmetric().with_bias(-4.0);
        assert_eq!((q.delta, q.lambda_y, q.mu_l, q.mu_r), (3.0, 0.8, -4.0, 4.0));
    }

    #[test]
    fn rejects_bad_values() {
        let bad = ModelParams {
            gamma: 0.0,
            ..Default::default()
        };
        assert!(matches!(bad.validate(), Err(Error::InvalidParameter { key: "gamma", .. })));
        let bad = ModelParams {
            c: 3.0,
            omega: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let ok = ModelParams {
            c: 0.0,
            omega: 0.0,
            ..Default::default()
        };
        assert!(ok.validate().is_ok());
    }
}
