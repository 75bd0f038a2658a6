use rayon::prelude::*;

use crate::coupling::{schwarz_solve, solve_monolithic_continuity, solve_monolithic_friction, Alpha, CoupledField, SchwarzConfig};
use crate::error::{Error, Result};
use crate::fem::Discretization;

use super::norms::{energy_residual, jump_norm, velocity_l2_norm, w_norm};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSettings {
    pub tol_increment: f64,
    pub max_iter: usize,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
}

impl Default for SweepSettings {
    fn default() -> Self {
        SweepSettings {
            tol_increment: SchwarzConfig::DEFAULT_TOL,
            max_iter: SchwarzConfig::DEFAULT_MAX_ITER,
            jobs: None,
        }
    }
}

/// One alpha of the sweep. The distance, jump and energy columns describe the
/// monolithic friction solution; the iteration columns describe the Schwarz run.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub alpha: f64,
    /// Schwarz iteration count when it converged.
    pub n_iterations: Option<usize>,
    /// Iterations performed (equals `max_iter` when not converged).
    pub iterations_run: usize,
    /// `||U^alpha - U^inf||_W`.
    pub w_dist_to_continuity: f64,
    /// `||u1 - u2||_{L2(interface)}`.
    pub jump_l2: f64,
    pub energy_residual: f64,
    /// `alpha ||u1 - u2||^2_{L2(interface)}`.
    pub alpha_jump_sq: f64,
    /// Velocity L2 distance between the final Schwarz iterate and `U^alpha`.
    pub schwarz_to_monolithic_l2: f64,
    pub final_increment: f64,
    /// Failure message when a solve in this row errored; the numeric columns are NaN.
    pub error: Option<String>,
}

impl SweepRow {
    pub fn converged(&self) -> bool {
        self.n_iterations.is_some()
    }

    fn failed(alpha: f64, e: Error) -> Self {
        SweepRow {
            alpha,
            n_iterations: None,
            iterations_run: 0,
            w_dist_to_continuity: f64::NAN,
            jump_l2: f64::NAN,
            energy_residual: f64::NAN,
            alpha_jump_sq: f64::NAN,
            schwarz_to_monolithic_l2: f64::NAN,
            final_increment: f64::NAN,
            error: Some(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// Sorted by ascending alpha.
    pub rows: Vec<SweepRow>,
    /// `||U^inf||_W` of the reference continuity solution.
    pub continuity_w_norm: f64,
}

fn sweep_row(disc: &Discretization, continuity: &CoupledField, alpha: f64, settings: &SweepSettings) -> Result<SweepRow> {
    let mono = solve_monolithic_friction(disc, alpha)?;
    let jump = jump_norm(&mono, disc)?;
    let cfg = SchwarzConfig {
        tol_increment: settings.tol_increment,
        max_iter: settings.max_iter,
        ..SchwarzConfig::new(alpha)
    };
    let (schwarz, report) = schwarz_solve(disc, &cfg)?;
    Ok(SweepRow {
        alpha,
        n_iterations: report.n_converged(),
        iterations_run: report.iterations.len(),
        w_dist_to_continuity: w_norm(&mono.velocity_difference(continuity), disc)?,
        jump_l2: jump,
        energy_residual: energy_residual(&mono, disc, Alpha::Finite(alpha))?,
        alpha_jump_sq: alpha * jump * jump,
        schwarz_to_monolithic_l2: velocity_l2_norm(&schwarz.velocity_difference(&mono), disc)?,
        final_increment: report.final_increment().unwrap_or(f64::NAN),
        error: None,
    })
}

/// Monolithic and Schwarz solves for every alpha against one continuity
/// reference. Row failures are recorded in [`SweepRow::error`].
pub fn run_alpha_sweep(disc: &Discretization, alphas: &[f64], settings: &SweepSettings) -> Result<SweepResult> {
    if alphas.is_empty() {
        return Err(Error::param("alphas", "must be nonempty"));
    }
    if alphas.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::param("alphas", "must be strictly ascending"));
    }
    for &a in alphas {
        Alpha::Finite(a).check()?;
    }
    let continuity = solve_monolithic_continuity(disc)?;
    let continuity_w_norm = w_norm(&continuity, disc)?;
    let run = || -> Vec<SweepRow> {
        alphas
            .par_iter()
            .map(|&a| sweep_row(disc, &continuity, a, settings).unwrap_or_else(|e| SweepRow::failed(a, e)))
            .collect()
    };
    let rows = match settings.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build()
            .map_err(|e| Error::param("jobs", e.to_string()))?
            .install(run),
        None => run(),
    };
    Ok(SweepResult { rows, continuity_w_norm })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{BodyForce, Physics};
    use crate::mesh::{build_layered_mesh, Geometry, Subdomain};

    fn disc() -> Discretization {
        let mesh = build_layered_mesh(Geometry::reference(), 4, 10, 2).unwrap();
        Discretization::new(mesh, Physics::new(1.0, 1.0, BodyForce::reference())).unwrap()
    }

    #[test]
    fn rejects_bad_alpha_lists() {
        let d = disc();
        let s = SweepSettings::default();
        assert!(run_alpha_sweep(&d, &[], &s).is_err());
        assert!(run_alpha_sweep(&d, &[10.0, 1.0], &s).is_err());
        assert!(run_alpha_sweep(&d, &[-1.0], &s).is_err());
    }

    #[test]
    fn zero_alpha_decouples() {
        let d = disc();
        let r = run_alpha_sweep(&d, &[0.0], &SweepSettings::default()).unwrap();
        let row = &r.rows[0];
        assert!(row.error.is_none());
        assert_eq!(row.n_iterations, Some(2));
        // Free-slip layers: u1(0) = 1250, u2(0) = 12.5.
        let expected = (1250.0f64 - 12.5) * 100f64.sqrt();
        assert!((row.jump_l2 - expected).abs() < 1e-8 * expected);
        assert_eq!(row.alpha_jump_sq, 0.0);
    }

    #[test]
    fn distance_to_continuity_decreases() {
        let d = disc();
        let s = SweepSettings { max_iter: 3, ..SweepSettings::default() };
        let r = run_alpha_sweep(&d, &[1.0, 10.0, 100.0], &s).unwrap();
        assert!(r.rows.windows(2).all(|w| w[1].w_dist_to_continuity < w[0].w_dist_to_continuity));
        assert!(r.rows.iter().all(|row| row.energy_residual <= 1e-8));
        let _ = Subdomain::Upper;
    }

    #[test]
    fn job_count_does_not_change_results() {
        let d = disc();
        let a = run_alpha_sweep(&d, &[1.0, 10.0], &SweepSettings { max_iter: 4, jobs: Some(1), ..Default::default() }).unwrap();
        let b = run_alpha_sweep(&d, &[1.0, 10.0], &SweepSettings { max_iter: 4, jobs: Some(2), ..Default::default() }).unwrap();
        assert_eq!(a, b);
    }
}
