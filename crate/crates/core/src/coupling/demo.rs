//! Naive continuity exchange: each half-step imposes the neighbour's trace as
//! a Dirichlet value on the interface. The imposed trace is returned unchanged
//! by the solve, so the exchange never moves.

use crate::error::{Error, Result};
use crate::fem::{assemble_dirichlet_subproblem, Discretization};
use crate::mesh::Subdomain;
use crate::sparse::{solve, DEFAULT_TOL};

use super::{Alpha, CoupledField, SubdomainField};

#[derive(Debug, Clone, PartialEq)]
pub struct TraceHistory {
    /// Horizontal interface trace after each half-step; entry 0 is step 1.
    pub traces: Vec<Vec<f64>>,
    /// Layer solved at each half-step.
    pub solved: Vec<Subdomain>,
    /// Most recent solution of each layer.
    pub field: CoupledField,
}

impl TraceHistory {
    /// Largest deviation of any later trace from the step-1 trace.
    pub fn max_drift(&self) -> f64 {
        let first = &self.traces[0];
        self.traces[1..]
            .iter()
            .flat_map(|t| t.iter().zip(first).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max)
    }
}

fn solve_with_trace(disc: &Discretization, subdomain: Subdomain, trace: &[f64]) -> Result<SubdomainField> {
    let system = assemble_dirichlet_subproblem(disc, subdomain, trace)?;
    let (x, _) = solve(&system.matrix, &system.rhs, DEFAULT_TOL)?;
    let layer = disc.layer(subdomain);
    let mut local = system.local_solution(&x, subdomain).expect("layer block present");
    for (&dof, &g) in layer.trace_dofs.iter().zip(trace) {
        local[dof] = g;
    }
    SubdomainField::from_local(&layer.space, &local)
}

/// Runs `n_steps` half-steps starting with the upper layer, which sees
/// `initial_trace` (zero when `None`).
pub fn dirichlet_exchange_demo(
    disc: &Discretization,
    n_steps: usize,
    initial_trace: Option<&[f64]>,
) -> Result<TraceHistory> {
    if n_steps < 2 {
        return Err(Error::param("n_steps", format!("must be >= 2, got {n_steps}")));
    }
    let mut trace = initial_trace.map_or_else(|| vec![0.0; disc.n_trace()], <[f64]>::to_vec);
    let mut field = CoupledField::zero(disc, Alpha::Infinity);
    let mut traces = Vec::with_capacity(n_steps);
    let mut solved = Vec::with_capacity(n_steps);
    let mut sub = Subdomain::Upper;
    for _ in 0..n_steps {
        let f = solve_with_trace(disc, sub, &trace)?;
        trace = f.trace(&disc.layer(sub).space);
        match sub {
            Subdomain::Upper => field.upper = f,
            Subdomain::Lower => field.lower = f,
        }
        traces.push(trace.clone());
        solved.push(sub);
        sub = sub.other();
    }
    Ok(TraceHistory { traces, solved, field })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::solve_monolithic_continuity;
    use crate::fem::{BodyForce, Physics};
    use crate::mesh::{build_layered_mesh, Geometry};
    use crate::verification::velocity_l2_norm;

    fn disc(force: BodyForce) -> Discretization {
        let mesh = build_layered_mesh(Geometry::reference(), 4, 10, 2).unwrap();
        Discretization::new(mesh, Physics::new(1.0, 1.0, force)).unwrap()
    }

    #[test]
    fn traces_stagnate() {
        let d = disc(BodyForce::reference());
        let h = dirichlet_exchange_demo(&d, 6, Some(&vec![3.0; d.n_trace()])).unwrap();
        assert_eq!(h.traces.len(), 6);
        assert!(h.max_drift() <= 1e-12);
        assert_eq!(h.solved[..2], [Subdomain::Upper, Subdomain::Lower]);
    }

    #[test]
    fn zero_force_zero_traces() {
        let d = disc(BodyForce::zero());
        let h = dirichlet_exchange_demo(&d, 4, None).unwrap();
        assert!(h.traces.iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn continuity_trace_reproduces_continuity_solution() {
        let d = disc(BodyForce::reference());
        let c = solve_monolithic_continuity(&d).unwrap();
        let h = dirichlet_exchange_demo(&d, 2, Some(&c.trace(&d, Subdomain::Upper))).unwrap();
        let dist = velocity_l2_norm(&h.field.velocity_difference(&c), &d).unwrap();
        assert!(dist < 1e-8 * velocity_l2_norm(&c, &d).unwrap(), "{dist}");
    }

    #[test]
    fn needs_two_steps() {
        let d = disc(BodyForce::reference());
        assert!(dirichlet_exchange_demo(&d, 1, None).is_err());
    }
}
