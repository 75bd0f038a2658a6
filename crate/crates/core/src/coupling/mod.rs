//! Problem drivers: monolithic friction and continuity solves, the alternating
//! Robin (Schwarz-type) iteration and the Dirichlet-exchange demonstration.

mod demo;
mod field;
mod schwarz;

pub use demo::{dirichlet_exchange_demo, TraceHistory};
pub use field::{Alpha, CoupledField, SubdomainField};
pub use schwarz::{schwarz_solve, Convergence, ConvergenceReport, IterationRecord, SchwarzConfig};

use crate::error::Result;
use crate::fem::{assemble_coupled_system, Discretization, InterfaceCoupling, SparseSystem};
use crate::mesh::Subdomain;
use crate::sparse::{solve, SolveReport, DEFAULT_TOL};

/// Monolithic solve of both layers with the given coupling, returning the
/// solver report alongside the field.
pub fn solve_monolithic(disc: &Discretization, coupling: InterfaceCoupling) -> Result<(CoupledField, SolveReport)> {
    let system = assemble_coupled_system(disc, coupling)?;
    let (x, report) = solve(&system.matrix, &system.rhs, DEFAULT_TOL)?;
    let alpha_used = match coupling {
        InterfaceCoupling::Friction(a) => Alpha::Finite(a),
        InterfaceCoupling::None => Alpha::Finite(0.0),
        InterfaceCoupling::Continuity => Alpha::Infinity,
    };
    Ok((field_from_system(disc, &system, &x, alpha_used)?, report))
}

/// Friction-coupled solution `U^alpha`.
pub fn solve_monolithic_friction(disc: &Discretization, alpha: f64) -> Result<CoupledField> {
    solve_monolithic(disc, InterfaceCoupling::Friction(alpha)).map(|(f, _)| f)
}

/// Continuity solution `U^inf` (shared horizontal interface dofs).
pub fn solve_monolithic_continuity(disc: &Discretization) -> Result<CoupledField> {
    solve_monolithic(disc, InterfaceCoupling::Continuity).map(|(f, _)| f)
}

fn field_from_system(disc: &Discretization, system: &SparseSystem, x: &[f64], alpha_used: Alpha) -> Result<CoupledField> {
    let layer = |sub: Subdomain| {
        let local = system.local_solution(x, sub).expect("layer block present");
        SubdomainField::from_local(&disc.layer(sub).space, &local)
    };
    Ok(CoupledField {
        upper: layer(Subdomain::Upper)?,
        lower: layer(Subdomain::Lower)?,
        alpha_used,
    })
}
