//! Structured triangulation of the two stacked layers `[0, L] x [z_minus, 0]` and
//! `[0, L] x [0, z_plus]`.
//!
//! The mesh is purely geometric. Periodicity in `x` is recorded as a pairing
//! between the `x = 0` and `x = L` vertex columns; the identification itself
//! happens when degrees of freedom are numbered.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// Rectangle split by the interface `z = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    /// Horizontal period.
    pub length: f64,
    /// Height of the upper wall, `z_plus > 0`.
    pub z_plus: f64,
    /// Depth of the lower wall, `z_minus < 0`.
    pub z_minus: f64,
}

impl Geometry {
    pub fn new(length: f64, z_plus: f64, z_minus: f64) -> Result<Self> {
        let geometry = Geometry {
            length,
            z_plus,
            z_minus,
        };
        geometry.check()?;
        Ok(geometry)
    }

    /// Channel of the reference experiment: `L = 100`, `z_plus = 50`, `z_minus = -5`.
    pub fn reference() -> Self {
        Geometry {
            length: 100.0,
            z_plus: 50.0,
            z_minus: -5.0,
        }
    }

    pub fn check(&self) -> Result<()> {
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(Error::InvalidGeometry(format!("L must be > 0, got {}", self.length)));
        }
        if !(self.z_plus.is_finite() && self.z_plus > 0.0) {
            return Err(Error::InvalidGeometry(format!("z_plus must be > 0, got {}", self.z_plus)));
        }
        if !(self.z_minus.is_finite() && self.z_minus < 0.0) {
            return Err(Error::InvalidGeometry(format!("z_minus must be < 0, got {}", self.z_minus)));
        }
        Ok(())
    }

    pub fn height(&self) -> f64 {
        self.z_plus - self.z_minus
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Subdomain {
    /// `0 <= z <= z_plus`, wall `Gamma1` at the top.
    Upper,
    /// `z_minus <= z <= 0`, wall `Gamma2` at the bottom.
    Lower,
}

impl Subdomain {
    pub const BOTH: [Subdomain; 2] = [Subdomain::Upper, Subdomain::Lower];

    pub fn name(self) -> &'static str {
        match self {
            Subdomain::Upper => "upper",
            Subdomain::Lower => "lower",
        }
    }

    pub fn other(self) -> Subdomain {
        match self {
            Subdomain::Upper => Subdomain::Lower,
            Subdomain::Lower => Subdomain::Upper,
        }
    }

    /// Integer label used in exported cell data.
    pub fn label(self) -> i32 {
        match self {
            Subdomain::Upper => 1,
            Subdomain::Lower => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeTag {
    /// Upper wall `z = z_plus`.
    Gamma1,
    /// Lower wall `z = z_minus`.
    Gamma2,
    /// Interface edge seen from the upper layer.
    InterfaceUpper,
    /// Interface edge seen from the lower layer.
    InterfaceLower,
    /// `x = 0`.
    PeriodicLeft,
    /// `x = L`.
    PeriodicRight,
}

impl EdgeTag {
    pub const ALL: [EdgeTag; 6] = [
        EdgeTag::Gamma1,
        EdgeTag::Gamma2,
        EdgeTag::InterfaceUpper,
        EdgeTag::InterfaceLower,
        EdgeTag::PeriodicLeft,
        EdgeTag::PeriodicRight,
    ];
}

#[derive(Debug, Clone, PartialEq)]
pub struct Triangle {
    /// Counter-clockwise vertex indices.
    pub vertices: [usize; 3],
    pub subdomain: Subdomain,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryEdge {
    pub vertices: [usize; 2],
    pub tag: EdgeTag,
    /// Triangle owning the edge on the tagged side.
    pub triangle: usize,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub geometry: Geometry,
    pub nx: usize,
    pub nz_upper: usize,
    pub nz_lower: usize,
    /// `(x, z)` coordinates.
    pub vertices: Vec<[f64; 2]>,
    pub triangles: Vec<Triangle>,
    pub boundary_edges: Vec<BoundaryEdge>,
    /// `(left, right)` pairs with `x_left = 0`, `x_right = L`.
    pub periodic_pairs: Vec<(usize, usize)>,
    /// Vertices on `z = 0`, ordered by increasing `x`, shared by both layers.
    pub interface_vertices: Vec<usize>,
    /// Unique edges as sorted vertex pairs.
    pub edges: Vec<[usize; 2]>,
    /// Edge indices of each triangle, local edges `(0,1)`, `(1,2)`, `(2,0)`.
    pub triangle_edges: Vec<[usize; 3]>,
    edge_lookup: HashMap<(usize, usize), usize>,
}

impl Mesh {
    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_lookup.get(&sorted_pair(a, b)).copied()
    }

    pub fn triangles_of(&self, subdomain: Subdomain) -> impl Iterator<Item = usize> + '_ {
        self.triangles
            .iter()
            .enumerate()
            .filter(move |(_, t)| t.subdomain == subdomain)
            .map(|(i, _)| i)
    }

    pub fn signed_area(&self, triangle: usize) -> f64 {
        let [a, b, c] = self.triangles[triangle].vertices;
        signed_area(self.vertices[a], self.vertices[b], self.vertices[c])
    }

    /// Partner at `x = 0` of each vertex at `x = L`.
    pub fn periodic_master(&self) -> HashMap<usize, usize> {
        self.periodic_pairs.iter().map(|&(l, r)| (r, l)).collect()
    }
}

fn sorted_pair(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

pub(crate) fn signed_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

/// Uniform tensor-product mesh, each quad split along its `(i, r) -> (i+1, r+1)`
/// diagonal. Vertex `(i, r)` has index `r * (nx + 1) + i`; rows `0..=nz_lower`
/// span the lower layer and row `nz_lower` is the interface.
pub fn build_layered_mesh(geometry: Geometry, nx: usize, nz_upper: usize, nz_lower: usize) -> Result<Mesh> {
    geometry.check()?;
    if nx < 2 {
        return Err(Error::InvalidResolution(format!("nx must be >= 2, got {nx}")));
    }
    if nz_upper < 1 {
        return Err(Error::InvalidResolution("nz_upper must be >= 1".into()));
    }
    if nz_lower < 1 {
        return Err(Error::InvalidResolution("nz_lower must be >= 1".into()));
    }

    let nrows = nz_lower + nz_upper + 1;
    let ncols = nx + 1;
    let x_at = |i: usize| {
        if i == nx {
            geometry.length
        } else {
            geometry.length * i as f64 / nx as f64
        }
    };
    let z_at = |r: usize| {
        if r == 0 {
            geometry.z_minus
        } else if r == nz_lower {
            0.0
        } else if r == nrows - 1 {
            geometry.z_plus
        } else if r < nz_lower {
            geometry.z_minus * (nz_lower - r) as f64 / nz_lower as f64
        } else {
            geometry.z_plus * (r - nz_lower) as f64 / nz_upper as f64
        }
    };
    let vid = |i: usize, r: usize| r * ncols + i;

    let mut vertices = Vec::with_capacity(nrows * ncols);
    for r in 0..nrows {
        let z = z_at(r);
        for i in 0..ncols {
            vertices.push([x_at(i), z]);
        }
    }

    let mut triangles = Vec::with_capacity(2 * nx * (nrows - 1));
    let mut boundary_edges = Vec::new();
    for r in 0..nrows - 1 {
        let subdomain = if r < nz_lower {
            Subdomain::Lower
        } else {
            Subdomain::Upper
        };
        for i in 0..nx {
            let (v00, v10, v11, v01) = (vid(i, r), vid(i + 1, r), vid(i + 1, r + 1), vid(i, r + 1));
            let lower_right = triangles.len();
            triangles.push(Triangle {
                vertices: [v00, v10, v11],
                subdomain,
            });
            let upper_left = triangles.len();
            triangles.push(Triangle {
                vertices: [v00, v11, v01],
                subdomain,
            });

            // Bottom edge of the quad belongs to the lower-right triangle.
            if r == 0 {
                boundary_edges.push(BoundaryEdge {
                    vertices: [v00, v10],
                    tag: EdgeTag::Gamma2,
                    triangle: lower_right,
                });
            }
            if r == nz_lower {
                boundary_edges.push(BoundaryEdge {
                    vertices: [v00, v10],
                    tag: EdgeTag::InterfaceUpper,
                    triangle: lower_right,
                });
            }
            // Top edge belongs to the upper-left triangle.
            if r + 1 == nrows - 1 {
                boundary_edges.push(BoundaryEdge {
                    vertices: [v11, v01],
                    tag: EdgeTag::Gamma1,
                    triangle: upper_left,
                });
            }
            if r + 1 == nz_lower {
                boundary_edges.push(BoundaryEdge {
                    vertices: [v11, v01],
                    tag: EdgeTag::InterfaceLower,
                    triangle: upper_left,
                });
            }
            if i == 0 {
                boundary_edges.push(BoundaryEdge {
                    vertices: [v01, v00],
                    tag: EdgeTag::PeriodicLeft,
                    triangle: upper_left,
                });
            }
            if i + 1 == nx {
                boundary_edges.push(BoundaryEdge {
                    vertices: [v10, v11],
                    tag: EdgeTag::PeriodicRight,
                    triangle: lower_right,
                });
            }
        }
    }

    let periodic_pairs = (0..nrows).map(|r| (vid(0, r), vid(nx, r))).collect();
    let interface_vertices = (0..ncols).map(|i| vid(i, nz_lower)).collect();

    let (edges, triangle_edges, edge_lookup) = build_edges(&triangles);

    Ok(Mesh {
        geometry,
        nx,
        nz_upper,
        nz_lower,
        vertices,
        triangles,
        boundary_edges,
        periodic_pairs,
        interface_vertices,
        edges,
        triangle_edges,
        edge_lookup,
    })
}

type EdgeTables = (Vec<[usize; 2]>, Vec<[usize; 3]>, HashMap<(usize, usize), usize>);

fn build_edges(triangles: &[Triangle]) -> EdgeTables {
    let mut edges = Vec::new();
    let mut lookup = HashMap::new();
    let mut triangle_edges = Vec::with_capacity(triangles.len());
    for t in triangles {
        let [a, b, c] = t.vertices;
        let mut local = [0usize; 3];
        for (slot, (p, q)) in [(a, b), (b, c), (c, a)].into_iter().enumerate() {
            let key = sorted_pair(p, q);
            let next = edges.len();
            let idx = *lookup.entry(key).or_insert(next);
            if idx == next {
                edges.push([key.0, key.1]);
            }
            local[slot] = idx;
        }
        triangle_edges.push(local);
    }
    (edges, triangle_edges, lookup)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Invariant {
    PositiveArea,
    InteriorEdgeSharing,
    InterfaceConformity,
    TagCompleteness,
    LayerSide,
    InterfaceVertexOnLine,
    InterfaceVertexShared,
    PeriodicPair,
    TagCoordinate,
}

/// One failed mesh invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub invariant: Invariant,
    /// Index of the offending triangle, edge, vertex or pair, depending on `invariant`.
    pub index: usize,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

/// Checks every mesh invariant and reports all violations; never aborts.
pub fn validate_mesh(mesh: &Mesh) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |invariant, index, message: String| {
        out.push(Violation {
            invariant,
            index,
            message,
        })
    };
    let n = mesh.vertices.len();
    let in_range = |v: usize| v < n;
    let geom = mesh.geometry;

    for (t, tri) in mesh.triangles.iter().enumerate() {
        if !tri.vertices.iter().copied().all(in_range) {
            push(Invariant::PositiveArea, t, format!("triangle {t} references a missing vertex"));
            continue;
        }
        let area = mesh.signed_area(t);
        if !(area > 0.0) {
            push(
                Invariant::PositiveArea,
                t,
                format!("triangle {t} has non-positive signed area {area:e}"),
            );
        }
        let ok_side = tri.vertices.iter().all(|&v| {
            let z = mesh.vertices[v][1];
            match tri.subdomain {
                Subdomain::Upper => z >= 0.0,
                Subdomain::Lower => z <= 0.0,
            }
        });
        if !ok_side {
            push(
                Invariant::LayerSide,
                t,
                format!("triangle {t} ({}) crosses z=0", tri.subdomain.name()),
            );
        }
    }

    // Edge -> incident triangles, recomputed from the triangle list.
    let mut incidence: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let [a, b, c] = tri.vertices;
        for (p, q) in [(a, b), (b, c), (c, a)] {
            incidence.entry(sorted_pair(p, q)).or_default().push(t);
        }
    }
    let mut tags: HashMap<(usize, usize), Vec<EdgeTag>> = HashMap::new();
    for (e, be) in mesh.boundary_edges.iter().enumerate() {
        let key = sorted_pair(be.vertices[0], be.vertices[1]);
        if !incidence.contains_key(&key) {
            push(
                Invariant::TagCompleteness,
                e,
                format!("boundary edge {e} is not an edge of the triangulation"),
            );
            continue;
        }
        tags.entry(key).or_default().push(be.tag);

        if be.vertices.iter().copied().all(in_range) {
            let coords = be.vertices.map(|v| mesh.vertices[v]);
            let ok = coords.iter().all(|&[x, z]| match be.tag {
                EdgeTag::Gamma1 => z == geom.z_plus,
                EdgeTag::Gamma2 => z == geom.z_minus,
                EdgeTag::InterfaceUpper | EdgeTag::InterfaceLower => z == 0.0,
                EdgeTag::PeriodicLeft => x == 0.0,
                EdgeTag::PeriodicRight => x == geom.length,
            });
            if !ok {
                push(
                    Invariant::TagCoordinate,
                    e,
                    format!("boundary edge {e} tagged {:?} has a vertex off its boundary line", be.tag),
                );
            }
        }
    }

    let mut keys: Vec<_> = incidence.keys().copied().collect();
    keys.sort_unstable();
    for key in keys {
        let tris = &incidence[&key];
        let edge = mesh.edge_index(key.0, key.1).unwrap_or(usize::MAX);
        let mut edge_tags = tags.get(&key).cloned().unwrap_or_default();
        edge_tags.sort_by_key(|t| *t as u8);
        let subs: Vec<Subdomain> = tris.iter().map(|&t| mesh.triangles[t].subdomain).collect();
        match edge_tags.as_slice() {
            [] => {
                if tris.len() != 2 || subs[0] != subs[1] {
                    let msg = if tris.len() == 1 {
                        format!("edge {:?} lies on the boundary but carries no tag", key)
                    } else {
                        format!(
                            "interior edge {:?} is shared by {} triangles across {:?}",
                            key,
                            tris.len(),
                            subs
                        )
                    };
                    let inv = if tris.len() == 1 {
                        Invariant::TagCompleteness
                    } else {
                        Invariant::InteriorEdgeSharing
                    };
                    push(inv, edge, msg);
                }
            }
            [EdgeTag::InterfaceUpper, EdgeTag::InterfaceLower] => {
                let upper = subs.iter().filter(|&&s| s == Subdomain::Upper).count();
                let lower = subs.iter().filter(|&&s| s == Subdomain::Lower).count();
                if upper != 1 || lower != 1 {
                    push(
                        Invariant::InterfaceConformity,
                        edge,
                        format!("interface edge {:?} has {upper} upper and {lower} lower triangles", key),
                    );
                }
            }
            [tag] if !matches!(tag, EdgeTag::InterfaceUpper | EdgeTag::InterfaceLower) => {
                if tris.len() != 1 {
                    push(
                        Invariant::TagCompleteness,
                        edge,
                        format!("edge {:?} tagged {:?} is shared by {} triangles", key, tag, tris.len()),
                    );
                }
            }
            other => push(
                Invariant::TagCompleteness,
                edge,
                format!("edge {:?} carries inconsistent tags {:?}", key, other),
            ),
        }
    }

    let mut used_by = vec![[false; 2]; n];
    for tri in &mesh.triangles {
        for &v in tri.vertices.iter().filter(|&&v| in_range(v)) {
            used_by[v][(tri.subdomain == Subdomain::Lower) as usize] = true;
        }
    }
    for &v in &mesh.interface_vertices {
        if !in_range(v) {
            push(Invariant::InterfaceVertexOnLine, v, format!("interface vertex {v} does not exist"));
            continue;
        }
        let z = mesh.vertices[v][1];
        if z != 0.0 {
            push(
                Invariant::InterfaceVertexOnLine,
                v,
                format!("interface vertex off z=0: vertex {v} has z = {z:e}"),
            );
        }
        if !(used_by[v][0] && used_by[v][1]) {
            push(
                Invariant::InterfaceVertexShared,
                v,
                format!("interface vertex {v} is not shared by both layers"),
            );
        }
    }

    let mut left_seen = vec![false; n];
    let mut right_seen = vec![false; n];
    for (k, &(l, r)) in mesh.periodic_pairs.iter().enumerate() {
        if !in_range(l) || !in_range(r) {
            push(Invariant::PeriodicPair, k, format!("periodic pair {k} references a missing vertex"));
            continue;
        }
        let (pl, pr) = (mesh.vertices[l], mesh.vertices[r]);
        if pl[0] != 0.0 || pr[0] != geom.length || pl[1] != pr[1] {
            push(
                Invariant::PeriodicPair,
                k,
                format!("periodic pair {k} ({l}, {r}) is not a matching x=0 / x=L pair"),
            );
        }
        if std::mem::replace(&mut left_seen[l], true) || std::mem::replace(&mut right_seen[r], true) {
            push(Invariant::PeriodicPair, k, format!("periodic pair {k} repeats a vertex"));
        }
    }
    for (v, p) in mesh.vertices.iter().enumerate() {
        let on_left = p[0] == 0.0 && !left_seen[v];
        let on_right = p[0] == geom.length && !right_seen[v];
        if on_left || on_right {
            push(
                Invariant::PeriodicPair,
                v,
                format!("vertex {v} on a periodic side has no partner"),
            );
        }
    }

    out
}

/// Longest triangle edge.
pub fn mesh_size(mesh: &Mesh) -> f64 {
    mesh.triangles
        .iter()
        .flat_map(|t| {
            let [a, b, c] = t.vertices.map(|v| mesh.vertices[v]);
            [dist(a, b), dist(b, c), dist(c, a)]
        })
        .fold(0.0, f64::max)
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}
