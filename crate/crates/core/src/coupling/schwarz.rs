//! Alternating Robin iteration.
//!
//! Iteration 0 solves the upper layer against the initial neighbour trace.
//! Iteration `k >= 1` solves the lower layer against the current upper trace,
//! then the upper layer against the new lower trace, so the state after
//! iteration `k` is `(u1^k, u2^{k-1})` with `u2^{-1} = 0`. The increment is the
//! combined velocity L2 distance between consecutive states.

use crate::error::{Error, Result};
use crate::fem::{assemble_robin_subproblem, Discretization};
use crate::mesh::Subdomain;
use crate::sparse::{Factorization, DEFAULT_TOL};
use crate::verification::{energy_residual, jump_norm, l2_norm};

use super::{Alpha, CoupledField, SubdomainField};

#[derive(Debug, Clone, PartialEq)]
pub struct SchwarzConfig {
    pub alpha: f64,
    /// Stop at the first iteration whose increment is below this.
    pub tol_increment: f64,
    pub max_iter: usize,
    /// Trace seen by the first upper solve; zero when `None`.
    pub initial_neighbor_trace: Option<Vec<f64>>,
}

impl SchwarzConfig {
    pub const DEFAULT_TOL: f64 = 1e-3;
    pub const DEFAULT_MAX_ITER: usize = 100_000;

    pub fn new(alpha: f64) -> Self {
        SchwarzConfig {
            alpha,
            tol_increment: Self::DEFAULT_TOL,
            max_iter: Self::DEFAULT_MAX_ITER,
            initial_neighbor_trace: None,
        }
    }

    pub fn check(&self, n_trace: usize) -> Result<()> {
        Alpha::Finite(self.alpha).check()?;
        if !(self.tol_increment.is_finite() && self.tol_increment > 0.0) {
            return Err(Error::param("tol_increment", "must be > 0"));
        }
        if self.max_iter < 1 {
            return Err(Error::param("max_iter", "must be >= 1"));
        }
        if let Some(t) = &self.initial_neighbor_trace {
            if t.len() != n_trace {
                return Err(Error::DimensionMismatch {
                    expected: n_trace,
                    found: t.len(),
                    context: "initial neighbor trace",
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convergence {
    Converged(usize),
    DidNotConverge,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub increment_l2: f64,
    pub jump_l2: f64,
    pub energy_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub alpha: f64,
    pub iterations: Vec<IterationRecord>,
    pub convergence: Convergence,
}

impl ConvergenceReport {
    pub fn n_converged(&self) -> Option<usize> {
        match self.convergence {
            Convergence::Converged(n) => Some(n),
            Convergence::DidNotConverge => None,
        }
    }

    pub fn final_increment(&self) -> Option<f64> {
        self.iterations.last().map(|r| r.increment_l2)
    }
}

/// One layer's Robin operator, factored once; only the right-hand side
/// depends on the neighbour trace.
struct RobinSolver<'a> {
    disc: &'a Discretization,
    subdomain: Subdomain,
    alpha: f64,
    factors: Factorization,
    base_rhs: Vec<f64>,
}

impl<'a> RobinSolver<'a> {
    fn new(disc: &'a Discretization, subdomain: Subdomain, alpha: f64) -> Result<Self> {
        let system = assemble_robin_subproblem(disc, subdomain, alpha, &vec![0.0; disc.n_trace()])?;
        Ok(RobinSolver {
            disc,
            subdomain,
            alpha,
            factors: Factorization::new(system.matrix)?,
            base_rhs: system.rhs,
        })
    }

    fn solve(&self, neighbor_trace: &[f64]) -> Result<SubdomainField> {
        let layer = self.disc.layer(self.subdomain);
        let mut rhs = self.base_rhs.clone();
        let m = &self.disc.interface_mass;
        for (r, &dof) in layer.trace_dofs.iter().enumerate() {
            rhs[dof] += self.alpha * m.row(r).map(|(c, v)| v * neighbor_trace[c]).sum::<f64>();
        }
        let (x, _) = self.factors.solve(&rhs, DEFAULT_TOL)?;
        SubdomainField::from_local(&layer.space, &x)
    }
}

fn distance_sq(a: &SubdomainField, b: &SubdomainField, disc: &Discretization) -> Result<f64> {
    let diff = SubdomainField {
        subdomain: a.subdomain,
        velocity: a.velocity.iter().zip(&b.velocity).map(|(x, y)| x - y).collect(),
        pressure: Vec::new(),
        multiplier: 0.0,
    };
    let n = l2_norm(&diff, disc.layer(a.subdomain))?;
    Ok(n * n)
}

/// Runs the alternating Robin iteration; hitting `max_iter` is reported as
/// [`Convergence::DidNotConverge`], not as an error.
pub fn schwarz_solve(disc: &Discretization, config: &SchwarzConfig) -> Result<(CoupledField, ConvergenceReport)> {
    config.check(disc.n_trace())?;
    let alpha = config.alpha;
    let upper = RobinSolver::new(disc, Subdomain::Upper, alpha)?;
    let lower = RobinSolver::new(disc, Subdomain::Lower, alpha)?;

    let initial = config.initial_neighbor_trace.clone().unwrap_or_else(|| vec![0.0; disc.n_trace()]);
    let mut state = CoupledField {
        upper: upper.solve(&initial)?,
        lower: SubdomainField::zero(&disc.lower.space),
        alpha_used: Alpha::Finite(alpha),
    };
    let mut report = ConvergenceReport {
        alpha,
        iterations: Vec::new(),
        convergence: Convergence::DidNotConverge,
    };

    for k in 1..=config.max_iter {
        let u2 = lower.solve(&state.trace(disc, Subdomain::Upper))?;
        let u1 = upper.solve(&u2.trace(&disc.lower.space))?;
        let increment = (distance_sq(&u1, &state.upper, disc)? + distance_sq(&u2, &state.lower, disc)?).sqrt();
        state.upper = u1;
        state.lower = u2;
        report.iterations.push(IterationRecord {
            iteration: k,
            increment_l2: increment,
            jump_l2: jump_norm(&state, disc)?,
            energy_residual: energy_residual(&state, disc, Alpha::Finite(alpha))?,
        });
        if increment < config.tol_increment {
            report.convergence = Convergence::Converged(k);
            break;
        }
    }
    Ok((state, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::solve_monolithic_friction;
    use crate::fem::{BodyForce, Physics};
    use crate::mesh::{build_layered_mesh, Geometry};
    use crate::verification::velocity_l2_norm;

    fn disc(force: BodyForce) -> Discretization {
        let mesh = build_layered_mesh(Geometry::reference(), 4, 10, 2).unwrap();
        Discretization::new(mesh, Physics::new(1.0, 1.0, force)).unwrap()
    }

    #[test]
    fn zero_force_converges_in_one_iteration() {
        let d = disc(BodyForce::zero());
        let (f, r) = schwarz_solve(&d, &SchwarzConfig::new(10.0)).unwrap();
        assert_eq!(r.convergence, Convergence::Converged(1));
        assert!(f.upper.velocity.iter().chain(&f.lower.velocity).all(|&v| v == 0.0));
    }

    #[test]
    fn tight_tolerance_limit_is_the_monolithic_solution() {
        let d = disc(BodyForce::reference());
        let cfg = SchwarzConfig {
            tol_increment: 1e-9,
            ..SchwarzConfig::new(0.1)
        };
        let (f, r) = schwarz_solve(&d, &cfg).unwrap();
        assert!(r.n_converged().is_some());
        let m = solve_monolithic_friction(&d, 0.1).unwrap();
        let dist = velocity_l2_norm(&f.velocity_difference(&m), &d).unwrap();
        assert!(dist < 1e-6, "{dist}");
    }

    #[test]
    fn every_iteration_is_recorded() {
        let d = disc(BodyForce::reference());
        let cfg = SchwarzConfig {
            max_iter: 5,
            ..SchwarzConfig::new(10.0)
        };
        let (_, r) = schwarz_solve(&d, &cfg).unwrap();
        assert_eq!(r.convergence, Convergence::DidNotConverge);
        assert_eq!(r.iterations.len(), 5);
        assert!(r.iterations.iter().enumerate().all(|(i, rec)| rec.iteration == i + 1));
    }

    #[test]
    fn starting_from_the_monolithic_trace_is_a_fixed_point() {
        let d = disc(BodyForce::reference());
        let m = solve_monolithic_friction(&d, 10.0).unwrap();
        let cfg = SchwarzConfig {
            initial_neighbor_trace: Some(m.trace(&d, Subdomain::Lower)),
            ..SchwarzConfig::new(10.0)
        };
        let (f, r) = schwarz_solve(&d, &cfg).unwrap();
        assert_eq!(r.convergence, Convergence::Converged(2));
        let dist = velocity_l2_norm(&f.velocity_difference(&m), &d).unwrap();
        assert!(dist < 1e-8, "{dist}");
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let d = disc(BodyForce::reference());
        let bad = [
            SchwarzConfig { tol_increment: 0.0, ..SchwarzConfig::new(1.0) },
            SchwarzConfig { max_iter: 0, ..SchwarzConfig::new(1.0) },
            SchwarzConfig::new(-1.0),
            SchwarzConfig { initial_neighbor_trace: Some(vec![0.0]), ..SchwarzConfig::new(1.0) },
        ];
        for cfg in bad {
            assert!(schwarz_solve(&d, &cfg).is_err());
        }
    }
}
