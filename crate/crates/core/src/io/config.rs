//! Run configuration in sectioned `key = value` (TOML) form.
//!
//! ```toml
//! [geometry]
//! L = 100.0
//! z_plus = 50.0
//! z_minus = -5.0
//!
//! [mesh]
//! nx = 16
//! nz_upper = 20
//! nz_lower = 4
//!
//! [physics]
//! nu1 = 1.0
//! nu2 = 1.0
//! f1 = [1.0, -1.0]
//! f2 = [1.0, -1.0]
//!
//! [coupling]
//! mode = "schwarz"        # monolithic-friction | monolithic-continuity | schwarz | dirichlet-demo
//! alpha = 1e9
//!
//! [schwarz]
//! tol = 1e-3
//! max_iter = 100000
//!
//! [output]
//! directory = "out"
//! formats = ["csv", "vtk"]
//! ```
//!
//! Every key is optional; unknown keys are rejected.

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::coupling::SchwarzConfig;
use crate::error::{Error, Result};
use crate::fem::{BodyForce, Discretization, Physics};
use crate::mesh::{build_layered_mesh, Geometry, Mesh};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub geometry: GeometrySection,
    pub mesh: MeshSection,
    pub physics: PhysicsSection,
    pub coupling: CouplingSection,
    pub schwarz: SchwarzSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometrySection {
    #[serde(rename = "L")]
    pub length: f64,
    pub z_plus: f64,
    pub z_minus: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeshSection {
    pub nx: usize,
    pub nz_upper: usize,
    pub nz_lower: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicsSection {
    pub nu1: f64,
    pub nu2: f64,
    pub f1: [f64; 2],
    pub f2: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    MonolithicFriction,
    MonolithicContinuity,
    Schwarz,
    DirichletDemo,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::MonolithicFriction, Mode::MonolithicContinuity, Mode::Schwarz, Mode::DirichletDemo];

    pub fn name(self) -> &'static str {
        match self {
            Mode::MonolithicFriction => "monolithic-friction",
            Mode::MonolithicContinuity => "monolithic-continuity",
            Mode::Schwarz => "schwarz",
            Mode::DirichletDemo => "dirichlet-demo",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Mode::ALL.into_iter().find(|m| m.name() == s).ok_or_else(|| Error::Validation {
            field: "coupling.mode".into(),
            constraint: format!("one of monolithic-friction, monolithic-continuity, schwarz, dirichlet-demo; got `{s}`"),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CouplingSection {
    pub mode: Mode,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SchwarzSection {
    pub tol: f64,
    pub max_iter: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Vtk,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub directory: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for GeometrySection {
    fn default() -> Self {
        let g = Geometry::reference();
        GeometrySection {
            length: g.length,
            z_plus: g.z_plus,
            z_minus: g.z_minus,
        }
    }
}

impl Default for MeshSection {
    fn default() -> Self {
        MeshSection {
            nx: 16,
            nz_upper: 20,
            nz_lower: 4,
        }
    }
}

impl Default for PhysicsSection {
    fn default() -> Self {
        PhysicsSection {
            nu1: 1.0,
            nu2: 1.0,
            f1: [1.0, -1.0],
            f2: [1.0, -1.0],
        }
    }
}

impl Default for CouplingSection {
    fn default() -> Self {
        CouplingSection {
            mode: Mode::MonolithicFriction,
            alpha: 10.0,
        }
    }
}

impl Default for SchwarzSection {
    fn default() -> Self {
        SchwarzSection {
            tol: SchwarzConfig::DEFAULT_TOL,
            max_iter: SchwarzConfig::DEFAULT_MAX_ITER,
        }
    }
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            directory: PathBuf::from("out"),
            formats: vec![Format::Csv, Format::Vtk],
        }
    }
}

fn invalid(field: &str, constraint: impl Into<String>) -> Error {
    Error::Validation {
        field: field.into(),
        constraint: constraint.into(),
    }
}

impl RunConfig {
    /// Checks every numeric constraint; the first violation is returned.
    pub fn validate(&self) -> Result<()> {
        let g = &self.geometry;
        let positive = |field: &str, key: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(invalid(field, format!("{key} > 0, got {v}")))
            }
        };
        positive("geometry.L", "L", g.length)?;
        positive("geometry.z_plus", "z_plus", g.z_plus)?;
        if !(g.z_minus.is_finite() && g.z_minus < 0.0) {
            return Err(invalid("geometry.z_minus", format!("z_minus < 0, got {}", g.z_minus)));
        }
        let m = &self.mesh;
        if m.nx < 2 {
            return Err(invalid("mesh.nx", format!("nx ≥ 2, got {}", m.nx)));
        }
        for (field, key, v) in [("mesh.nz_upper", "nz_upper", m.nz_upper), ("mesh.nz_lower", "nz_lower", m.nz_lower)] {
            if v < 1 {
                return Err(invalid(field, format!("{key} ≥ 1")));
            }
        }
        let p = &self.physics;
        positive("physics.nu1", "nu1", p.nu1)?;
        positive("physics.nu2", "nu2", p.nu2)?;
        for (field, f) in [("physics.f1", p.f1), ("physics.f2", p.f2)] {
            if !f.iter().all(|v| v.is_finite()) {
                return Err(invalid(field, "components finite"));
            }
        }
        let a = self.coupling.alpha;
        if !(a.is_finite() && a >= 0.0) {
            return Err(invalid("coupling.alpha", format!("alpha ≥ 0 and finite, got {a}")));
        }
        positive("schwarz.tol", "tol", self.schwarz.tol)?;
        if self.schwarz.max_iter < 1 {
            return Err(invalid("schwarz.max_iter", "max_iter ≥ 1"));
        }
        if self.output.directory.as_os_str().is_empty() {
            return Err(invalid("output.directory", "nonempty path"));
        }
        Ok(())
    }

    pub fn geometry(&self) -> Result<Geometry> {
        Geometry::new(self.geometry.length, self.geometry.z_plus, self.geometry.z_minus)
    }

    pub fn build_mesh(&self) -> Result<Mesh> {
        build_layered_mesh(self.geometry()?, self.mesh.nx, self.mesh.nz_upper, self.mesh.nz_lower)
    }

    pub fn physics(&self) -> Physics {
        let p = &self.physics;
        Physics::new(p.nu1, p.nu2, BodyForce::constant(p.f1, p.f2))
    }

    pub fn discretization(&self) -> Result<Discretization> {
        self.validate()?;
        Discretization::new(self.build_mesh()?, self.physics())
    }

    pub fn schwarz_config(&self) -> SchwarzConfig {
        SchwarzConfig {
            tol_increment: self.schwarz.tol,
            max_iter: self.schwarz.max_iter,
            ..SchwarzConfig::new(self.coupling.alpha)
        }
    }

    pub fn wants(&self, format: Format) -> bool {
        self.output.formats.contains(&format)
    }
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| {
        let line = e.span().map_or(1, |s| text[..s.start.min(text.len())].matches('\n').count() + 1);
        Error::Parse {
            line,
            message: e.message().trim().to_string(),
        }
    })?;
    cfg.validate()?;
    Ok(cfg)
}

/// Renders a configuration that [`parse_config`] reads back unchanged.
pub fn render_config(cfg: &RunConfig) -> String {
    toml::to_string(cfg).expect("config is always representable")
}
