//! Discrete norms as quadratic forms of the exactly-integrated P2 mass and
//! stiffness matrices.

use crate::coupling::{Alpha, CoupledField, SubdomainField};
use crate::error::{Error, Result};
use crate::fem::{Discretization, LayerData};
use crate::sparse::CsrMatrix;

/// Guard for the denominator of [`energy_residual`].
pub const ENERGY_EPS: f64 = 1e-30;

/// `sum_c u_c^T A u_c` for an interleaved two-component vector.
fn vector_form(a: &CsrMatrix, velocity: &[f64]) -> f64 {
    let mut s = 0.0;
    for r in 0..a.dim() {
        for (c, v) in a.row(r) {
            s += v * (velocity[2 * r] * velocity[2 * c] + velocity[2 * r + 1] * velocity[2 * c + 1]);
        }
    }
    s
}

fn check_layer(field: &SubdomainField, layer: &LayerData) -> Result<()> {
    let expected = 2 * layer.space.n_nodes();
    if field.velocity.len() != expected || field.subdomain != layer.space.subdomain {
        return Err(Error::DimensionMismatch {
            expected,
            found: field.velocity.len(),
            context: "layer velocity",
        });
    }
    Ok(())
}

/// `||u||_{L2}` of one layer's velocity.
pub fn l2_norm(field: &SubdomainField, layer: &LayerData) -> Result<f64> {
    check_layer(field, layer)?;
    Ok(vector_form(&layer.mass, &field.velocity).max(0.0).sqrt())
}

/// `||grad u||_{L2}` of one layer's velocity.
pub fn h1_seminorm(field: &SubdomainField, layer: &LayerData) -> Result<f64> {
    check_layer(field, layer)?;
    Ok(vector_form(&layer.stiffness, &field.velocity).max(0.0).sqrt())
}

/// Combined velocity L2 norm over both layers.
pub fn velocity_l2_norm(field: &CoupledField, disc: &Discretization) -> Result<f64> {
    let a = l2_norm(&field.upper, &disc.upper)?;
    let b = l2_norm(&field.lower, &disc.lower)?;
    Ok(a.hypot(b))
}

/// `||U||_W = (nu1 ||grad u1||^2 + nu2 ||grad u2||^2)^{1/2}`.
pub fn w_norm(field: &CoupledField, disc: &Discretization) -> Result<f64> {
    let a = h1_seminorm(&field.upper, &disc.upper)?;
    let b = h1_seminorm(&field.lower, &disc.lower)?;
    Ok((disc.upper.nu * a * a + disc.lower.nu * b * b).sqrt())
}

/// `||u1 - u2||_{L2(interface)}` of the horizontal velocity.
pub fn jump_norm(field: &CoupledField, disc: &Discretization) -> Result<f64> {
    check_layer(&field.upper, &disc.upper)?;
    check_layer(&field.lower, &disc.lower)?;
    let j = field.jump(disc);
    Ok(disc.interface_mass.quadratic_form(&j, &j).max(0.0).sqrt())
}

/// `(F, U)`.
pub fn work(field: &CoupledField, disc: &Discretization) -> Result<f64> {
    let mut s = 0.0;
    for (f, layer) in [(&field.upper, &disc.upper), (&field.lower, &disc.lower)] {
        check_layer(f, layer)?;
        s += f.velocity.iter().zip(&layer.load).map(|(u, l)| u * l).sum::<f64>();
    }
    Ok(s)
}

/// Energy balance `|nu1||grad u1||^2 + nu2||grad u2||^2 + alpha||jump||^2 - (F,U)| / max(|(F,U)|, eps)`.
/// For `Alpha::Infinity` the jump term is dropped (it vanishes for continuity fields).
pub fn energy_residual(field: &CoupledField, disc: &Discretization, alpha: Alpha) -> Result<f64> {
    alpha.check()?;
    let w = w_norm(field, disc)?;
    let jump = match alpha {
        Alpha::Finite(a) => {
            let j = jump_norm(field, disc)?;
            a * j * j
        }
        Alpha::Infinity => 0.0,
    };
    let rhs = work(field, disc)?;
    Ok((w * w + jump - rhs).abs() / rhs.abs().max(ENERGY_EPS))
}
