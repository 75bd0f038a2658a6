use std::fmt;

use crate::error::{Error, Result};
use crate::fem::{Discretization, MixedSpace};
use crate::mesh::Subdomain;

/// Friction coefficient of a solution; `Infinity` marks the continuity limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Alpha {
    Finite(f64),
    Infinity,
}

impl Alpha {
    pub fn finite(self) -> Option<f64> {
        match self {
            Alpha::Finite(a) => Some(a),
            Alpha::Infinity => None,
        }
    }

    pub fn check(self) -> Result<()> {
        match self {
            Alpha::Finite(a) if !(a.is_finite() && a >= 0.0) => {
                Err(Error::param("alpha", format!("must be finite and >= 0, got {a}")))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Alpha::Finite(a) => write!(f, "{a:e}"),
            Alpha::Infinity => f.write_str("inf"),
        }
    }
}

/// Velocity and pressure of one layer over its raw dofs; constrained dofs hold
/// their prescribed values.
#[derive(Debug, Clone, PartialEq)]
pub struct SubdomainField {
    pub subdomain: Subdomain,
    /// `2 * node + component`.
    pub velocity: Vec<f64>,
    /// One value per pressure slot.
    pub pressure: Vec<f64>,
    /// Zero-mean gauge multiplier.
    pub multiplier: f64,
}

impl SubdomainField {
    pub fn zero(space: &MixedSpace) -> Self {
        SubdomainField {
            subdomain: space.subdomain,
            velocity: vec![0.0; 2 * space.n_nodes()],
            pressure: vec![0.0; space.n_pressure()],
            multiplier: 0.0,
        }
    }

    pub fn from_local(space: &MixedSpace, local: &[f64]) -> Result<Self> {
        if local.len() != space.n_local() {
            return Err(Error::DimensionMismatch {
                expected: space.n_local(),
                found: local.len(),
                context: "layer solution",
            });
        }
        let (velocity, pressure, multiplier) = space.expand(local);
        Ok(SubdomainField {
            subdomain: space.subdomain,
            velocity,
            pressure,
            multiplier,
        })
    }

    /// One velocity component over the raw nodes.
    pub fn component(&self, c: usize) -> Vec<f64> {
        self.velocity.iter().skip(c).step_by(2).copied().collect()
    }

    /// Horizontal velocity at the interface trace positions.
    pub fn trace(&self, space: &MixedSpace) -> Vec<f64> {
        space.interface_nodes.iter().map(|&k| self.velocity[2 * k]).collect()
    }

    pub fn scaled(&self, c: f64) -> Self {
        SubdomainField {
            subdomain: self.subdomain,
            velocity: self.velocity.iter().map(|v| c * v).collect(),
            pressure: self.pressure.iter().map(|v| c * v).collect(),
            multiplier: c * self.multiplier,
        }
    }
}

/// `U = (u1, p1, u2, p2)` on the two layers.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledField {
    pub upper: SubdomainField,
    pub lower: SubdomainField,
    pub alpha_used: Alpha,
}

impl CoupledField {
    pub fn zero(disc: &Discretization, alpha_used: Alpha) -> Self {
        CoupledField {
            upper: SubdomainField::zero(&disc.upper.space),
            lower: SubdomainField::zero(&disc.lower.space),
            alpha_used,
        }
    }

    pub fn layer(&self, subdomain: Subdomain) -> &SubdomainField {
        match subdomain {
            Subdomain::Upper => &self.upper,
            Subdomain::Lower => &self.lower,
        }
    }

    pub fn trace(&self, disc: &Discretization, subdomain: Subdomain) -> Vec<f64> {
        self.layer(subdomain).trace(&disc.layer(subdomain).space)
    }

    /// `u1 - u2` on the interface trace.
    pub fn jump(&self, disc: &Discretization) -> Vec<f64> {
        let up = self.trace(disc, Subdomain::Upper);
        let lo = self.trace(disc, Subdomain::Lower);
        up.iter().zip(&lo).map(|(a, b)| a - b).collect()
    }

    pub fn scaled(&self, c: f64) -> Self {
        CoupledField {
            upper: self.upper.scaled(c),
            lower: self.lower.scaled(c),
            alpha_used: self.alpha_used,
        }
    }

    /// Velocity difference `self - other`, pressures dropped.
    pub fn velocity_difference(&self, other: &CoupledField) -> CoupledField {
        let diff = |a: &SubdomainField, b: &SubdomainField| SubdomainField {
            subdomain: a.subdomain,
            velocity: a.velocity.iter().zip(&b.velocity).map(|(x, y)| x - y).collect(),
            pressure: vec![0.0; a.pressure.len()],
            multiplier: 0.0,
        };
        CoupledField {
            upper: diff(&self.upper, &other.upper),
            lower: diff(&self.lower, &other.lower),
            alpha_used: self.alpha_used,
        }
    }
}
