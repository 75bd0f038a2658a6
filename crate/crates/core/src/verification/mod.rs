//! Analytic channel oracle, discrete norms, energy diagnostics and the alpha sweep.

mod norms;
mod oracle;
mod sweep;

pub use norms::{energy_residual, h1_seminorm, jump_norm, l2_norm, velocity_l2_norm, w_norm, work, ENERGY_EPS};
pub use oracle::{channel_l2_error, ChannelForcing, ChannelOracle};
pub use sweep::{run_alpha_sweep, SweepResult, SweepRow, SweepSettings};
