//! Two incompressible Stokes layers stacked on a flat interface `z = 0`, periodic
//! in `x`, coupled either by a Navier friction law with coefficient `alpha` or by
//! continuity of the tangential velocity.
//!
//! The crate is organised bottom-up:
//!
//! * [`mesh`] builds the layered triangulation and checks its invariants.
//! * [`fem`] holds the Taylor–Hood spaces, element kernels and system assembly.
//! * [`sparse`] is the CSR storage and the residual-certified direct solver.
//! * [`coupling`] contains the monolithic friction/continuity drivers, the
//!   alternating Schwarz iteration and the Dirichlet-exchange demonstration.
//! * [`verification`] provides the channel-flow oracle, norms, energy diagnostics
//!   and the alpha sweep.
//! * [`io`] reads run configurations and writes CSV and legacy-VTK output.

// Index loops mirror the element formulas; negated comparisons reject NaN.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod coupling;
pub mod error;
pub mod fem;
pub mod io;
pub mod mesh;
pub mod quadrature;
pub mod sparse;
pub mod verification;

pub use coupling::{
    dirichlet_exchange_demo, schwarz_solve, solve_monolithic_continuity, solve_monolithic_friction,
    Alpha, CoupledField, Convergence, ConvergenceReport, IterationRecord, SchwarzConfig, SubdomainField,
    TraceHistory,
};
pub use error::{Error, Result};
pub use fem::{BodyForce, Discretization, InterfaceCoupling, MixedSpace, Physics, SparseSystem};
pub use mesh::{build_layered_mesh, mesh_size, validate_mesh, EdgeTag, Geometry, Mesh, Subdomain};
pub use sparse::{solve, spmv, CsrMatrix, SolveReport};
pub use io::{parse_config, RunConfig};
pub use verification::{run_alpha_sweep, ChannelForcing, ChannelOracle, SweepResult, SweepRow, SweepSettings};
