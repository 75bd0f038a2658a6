//! Legacy-VTK ASCII export of vertex fields.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::coupling::CoupledField;
use crate::error::Result;
use crate::fem::Discretization;
use crate::mesh::{Mesh, Subdomain};

/// Vertex values of a two-layer field. Interface vertices carry the upper
/// layer's values; mid-edge velocity values are not exported.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldExport {
    pub points: Vec<[f64; 2]>,
    pub cells: Vec<[usize; 3]>,
    pub subdomain: Vec<i32>,
    pub velocity: Vec<[f64; 2]>,
    pub pressure: Vec<f64>,
}

impl FieldExport {
    /// Mesh with zero fields.
    pub fn mesh_only(mesh: &Mesh) -> Self {
        FieldExport {
            points: mesh.vertices.clone(),
            cells: mesh.triangles.iter().map(|t| t.vertices).collect(),
            subdomain: mesh.triangles.iter().map(|t| t.subdomain.label()).collect(),
            velocity: vec![[0.0; 2]; mesh.n_vertices()],
            pressure: vec![0.0; mesh.n_vertices()],
        }
    }

    pub fn from_field(disc: &Discretization, field: &CoupledField) -> Self {
        let mut e = Self::mesh_only(&disc.mesh);
        // Lower first so the upper layer overwrites shared interface vertices.
        for sub in [Subdomain::Lower, Subdomain::Upper] {
            let space = &disc.layer(sub).space;
            let f = field.layer(sub);
            let slot: HashMap<usize, usize> = space.pressure_vertices.iter().enumerate().map(|(s, &v)| (v, s)).collect();
            for v in 0..disc.mesh.n_vertices() {
                if let Some(k) = space.node_of_vertex(v) {
                    e.velocity[v] = [f.velocity[2 * k], f.velocity[2 * k + 1]];
                }
                if let Some(&s) = slot.get(&v) {
                    e.pressure[v] = f.pressure[s];
                }
            }
        }
        e
    }
}

pub fn write_vtk_to<W: Write>(mut out: W, export: &FieldExport) -> Result<()> {
    let n = export.points.len();
    let m = export.cells.len();
    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "two-layer Stokes field")?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(out, "POINTS {n} double")?;
    for p in &export.points {
        writeln!(out, "{:e} {:e} 0", p[0], p[1])?;
    }
    writeln!(out, "CELLS {m} {}", 4 * m)?;
    for c in &export.cells {
        writeln!(out, "3 {} {} {}", c[0], c[1], c[2])?;
    }
    writeln!(out, "CELL_TYPES {m}")?;
    for _ in 0..m {
        writeln!(out, "5")?;
    }
    writeln!(out, "POINT_DATA {n}")?;
    writeln!(out, "VECTORS velocity double")?;
    for u in &export.velocity {
        writeln!(out, "{:e} {:e} 0", u[0], u[1])?;
    }
    writeln!(out, "SCALARS pressure double 1")?;
    writeln!(out, "LOOKUP_TABLE default")?;
    for p in &export.pressure {
        writeln!(out, "{p:e}")?;
    }
    writeln!(out, "CELL_DATA {m}")?;
    writeln!(out, "SCALARS subdomain int 1")?;
    writeln!(out, "LOOKUP_TABLE default")?;
    for s in &export.subdomain {
        writeln!(out, "{s}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_vtk(export: &FieldExport, path: &Path) -> Result<()> {
    write_vtk_to(BufWriter::new(File::create(path)?), export)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::solve_monolithic_friction;
    use crate::fem::{BodyForce, Physics};
    use crate::mesh::{build_layered_mesh, Geometry};

    fn render(e: &FieldExport) -> String {
        let mut buf = Vec::new();
        write_vtk_to(&mut buf, e).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn demo_mesh_counts() {
        let mesh = build_layered_mesh(Geometry::new(2.0, 1.0, -1.0).unwrap(), 2, 1, 1).unwrap();
        let text = render(&FieldExport::mesh_only(&mesh));
        assert!(text.contains("POINTS 9 double\n"));
        assert!(text.contains("CELLS 8 32\n"));
        assert!(text.contains("CELL_TYPES 8\n"));
        assert!(text.contains("POINT_DATA 9\nVECTORS velocity double\n"));
        assert!(text.contains("SCALARS pressure double 1\n"));
        assert!(text.contains("CELL_DATA 8\nSCALARS subdomain int 1\n"));
    }

    #[test]
    fn export_is_deterministic_and_uses_vertex_values() {
        let mesh = build_layered_mesh(Geometry::reference(), 4, 6, 2).unwrap();
        let d = Discretization::new(mesh, Physics::new(1.0, 1.0, BodyForce::reference())).unwrap();
        let f = solve_monolithic_friction(&d, 10.0).unwrap();
        let e = FieldExport::from_field(&d, &f);
        assert_eq!(render(&e), render(&FieldExport::from_field(&d, &f)));
        let jump_free_upper = 1250.0 - 50.0 * (12375.0 / 551.0);
        for (v, p) in d.mesh.vertices.iter().enumerate() {
            if p[1] == 0.0 {
                assert!((e.velocity[v][0] - jump_free_upper).abs() < 1e-8);
            }
            if p[1] == 50.0 {
                assert_eq!(e.velocity[v], [0.0, 0.0]);
            }
        }
    }
}
