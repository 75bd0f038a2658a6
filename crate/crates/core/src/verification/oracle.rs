//! Closed-form horizontal velocity of the x-independent two-layer channel.
//!
//! With `f_x(z) = m + A cos(k z)` in both layers, each layer solves
//! `-nu_i u_i'' = f_x` with `u_1(z+) = u_2(z-) = 0`, the friction law
//! `nu_1 u_1'(0) = nu_2 u_2'(0) = alpha (u_1(0) - u_2(0))`, or continuity of
//! `u` for infinite `alpha`. Writing `u_i = P_i + a_i z + b_i` with the particular
//! solution `P_i = -m z^2 / (2 nu_i) + A cos(k z) / (nu_i k^2)` leaves a 4x4 system.

use crate::coupling::{Alpha, CoupledField};
use crate::error::{Error, Result};
use crate::fem::element::{p2_values, TriangleGeometry};
use crate::fem::{BodyForce, Discretization};
use crate::mesh::{Geometry, Subdomain};
use crate::quadrature::TRIANGLE_DEGREE4;

/// `f_x(z) = mean + amplitude * cos(wavenumber * z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelForcing {
    pub mean: f64,
    pub amplitude: f64,
    pub wavenumber: f64,
}

impl ChannelForcing {
    pub fn constant(mean: f64) -> Self {
        ChannelForcing {
            mean,
            amplitude: 0.0,
            wavenumber: 0.0,
        }
    }

    pub fn eval(&self, z: f64) -> f64 {
        self.mean + self.amplitude * (self.wavenumber * z).cos()
    }

    /// Body force `(f_x(z), f_z)` in both layers.
    pub fn body_force(self, fz: f64) -> BodyForce {
        if self.amplitude == 0.0 {
            BodyForce::constant([self.mean, fz], [self.mean, fz])
        } else {
            BodyForce::field(move |_, p| [self.eval(p[1]), fz])
        }
    }

    fn cosine_part(&self) -> (f64, f64) {
        if self.amplitude == 0.0 || self.wavenumber == 0.0 {
            (self.mean + self.amplitude, 0.0)
        } else {
            (self.mean, self.amplitude)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelOracle {
    pub z_plus: f64,
    pub z_minus: f64,
    pub nu1: f64,
    pub nu2: f64,
    pub forcing: ChannelForcing,
    pub alpha: Alpha,
    coeffs: [f64; 4],
}

impl ChannelOracle {
    pub fn new(geometry: &Geometry, nu1: f64, nu2: f64, forcing: ChannelForcing, alpha: Alpha) -> Result<Self> {
        geometry.check()?;
        alpha.check()?;
        for (name, nu) in [("nu1", nu1), ("nu2", nu2)] {
            if !(nu.is_finite() && nu > 0.0) {
                return Err(Error::param(name, format!("must be > 0, got {nu}")));
            }
        }
        let mut o = ChannelOracle {
            z_plus: geometry.z_plus,
            z_minus: geometry.z_minus,
            nu1,
            nu2,
            forcing,
            alpha,
            coeffs: [0.0; 4],
        };
        o.coeffs = o.solve_coefficients()?;
        Ok(o)
    }

    /// Default channel: `nu = 1`, `f_x = 1`.
    pub fn reference(alpha: Alpha) -> Self {
        Self::new(&Geometry::reference(), 1.0, 1.0, ChannelForcing::constant(1.0), alpha).expect("valid reference")
    }

    fn nu(&self, side: Subdomain) -> f64 {
        match side {
            Subdomain::Upper => self.nu1,
            Subdomain::Lower => self.nu2,
        }
    }

    fn particular(&self, z: f64, side: Subdomain) -> f64 {
        let (m, a) = self.forcing.cosine_part();
        let nu = self.nu(side);
        let k = self.forcing.wavenumber;
        let cos = if a == 0.0 { 0.0 } else { a * (k * z).cos() / (nu * k * k) };
        -m * z * z / (2.0 * nu) + cos
    }

    fn solve_coefficients(&self) -> Result<[f64; 4]> {
        // Unknowns (a1, b1, a2, b2); P_i'(0) = 0.
        let (p1_top, p2_bot) = (self.particular(self.z_plus, Subdomain::Upper), self.particular(self.z_minus, Subdomain::Lower));
        let (p1_0, p2_0) = (self.particular(0.0, Subdomain::Upper), self.particular(0.0, Subdomain::Lower));
        let mut m = [
            [self.z_plus, 1.0, 0.0, 0.0, -p1_top],
            [0.0, 0.0, self.z_minus, 1.0, -p2_bot],
            [0.0; 5],
            [-self.nu1, 0.0, self.nu2, 0.0, 0.0],
        ];
        m[2] = match self.alpha {
            Alpha::Finite(alpha) => [self.nu1, -alpha, 0.0, alpha, alpha * (p1_0 - p2_0)],
            Alpha::Infinity => [0.0, 1.0, 0.0, -1.0, p2_0 - p1_0],
        };
        dense_solve4(m)
    }

    /// Horizontal velocity at height `z` in layer `side`.
    pub fn channel_exact(&self, z: f64, side: Subdomain) -> Result<f64> {
        let (lo, hi) = match side {
            Subdomain::Upper => (0.0, self.z_plus),
            Subdomain::Lower => (self.z_minus, 0.0),
        };
        let slack = 1e-12 * (self.z_plus - self.z_minus);
        if !(z >= lo - slack && z <= hi + slack) {
            return Err(Error::OutOfRange { z, side: side.name() });
        }
        let [a1, b1, a2, b2] = self.coeffs;
        let (a, b) = match side {
            Subdomain::Upper => (a1, b1),
            Subdomain::Lower => (a2, b2),
        };
        Ok(self.particular(z, side) + a * z + b)
    }

    /// `u_1(0) - u_2(0)`.
    pub fn interface_jump(&self) -> f64 {
        self.coeffs[1] - self.coeffs[3] + self.particular(0.0, Subdomain::Upper) - self.particular(0.0, Subdomain::Lower)
    }

    /// Shear rate `u_i'(0)` in the upper layer.
    pub fn interface_shear(&self) -> f64 {
        self.coeffs[0]
    }
}

fn dense_solve4(mut m: [[f64; 5]; 4]) -> Result<[f64; 4]> {
    for col in 0..4 {
        let piv = (col..4)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap();
        if m[piv][col] == 0.0 {
            return Err(Error::SingularSystem("channel oracle".into()));
        }
        m.swap(col, piv);
        for r in col + 1..4 {
            let f = m[r][col] / m[col][col];
            for c in col..5 {
                m[r][c] -= f * m[col][c];
            }
        }
    }
    let mut x = [0.0; 4];
    for r in (0..4).rev() {
        let s: f64 = (r + 1..4).map(|c| m[r][c] * x[c]).sum();
        x[r] = (m[r][4] - s) / m[r][r];
    }
    Ok(x)
}

/// `(||u_h - u||_{L2}, ||u||_{L2})` of the horizontal velocity over both layers,
/// integrated with the degree-4 rule on every triangle.
pub fn channel_l2_error(field: &CoupledField, disc: &Discretization, oracle: &ChannelOracle) -> Result<(f64, f64)> {
    let (mut err, mut norm) = (0.0, 0.0);
    for sub in Subdomain::BOTH {
        let space = &disc.layer(sub).space;
        let u = &field.layer(sub).velocity;
        if u.len() != 2 * space.n_nodes() {
            return Err(Error::DimensionMismatch {
                expected: 2 * space.n_nodes(),
                found: u.len(),
                context: "layer velocity",
            });
        }
        for (k, &t) in space.triangles.iter().enumerate() {
            let geom = TriangleGeometry::new(disc.mesh.triangles[t].vertices.map(|v| disc.mesh.vertices[v]));
            let nodes = space.element_nodes[k];
            for q in TRIANGLE_DEGREE4.iter() {
                let w = q.weight * geom.area;
                let n = p2_values(q.bary);
                let uh: f64 = (0..6).map(|a| n[a] * u[2 * nodes[a]]).sum();
                let z = geom.point(q.bary)[1];
                let ue = oracle.channel_exact(z, sub)?;
                err += w * (uh - ue) * (uh - ue);
                norm += w * ue * ue;
            }
        }
    }
    Ok((err.sqrt(), norm.sqrt()))
}
