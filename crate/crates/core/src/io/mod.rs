//! Configuration parsing and result export.

pub mod config;
pub mod csv;
pub mod vtk;

pub use config::{parse_config, render_config, Format, Mode, RunConfig};
pub use csv::{write_csv, write_sweep_csv};
pub use vtk::{write_vtk, FieldExport};
