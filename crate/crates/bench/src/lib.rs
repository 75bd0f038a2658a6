//! Fixtures shared by the benchmarks.

use couple_core::{build_layered_mesh, Discretization, Geometry, Physics};

/// Default channel discretized with `nx` columns and `4 nz : nz` layer rows.
pub fn channel(nx: usize, nz_lower: usize) -> Discretization {
    let mesh = build_layered_mesh(Geometry::reference(), nx, 4 * nz_lower, nz_lower).expect("valid mesh");
    Discretization::new(mesh, Physics::reference()).expect("valid physics")
}
