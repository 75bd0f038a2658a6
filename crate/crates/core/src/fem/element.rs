//! Element kernels for the quadratic-velocity / linear-pressure triangle.
//!
//! Local velocity nodes are the three vertices followed by the midpoints of
//! edges `(0,1)`, `(1,2)`, `(2,0)`. Pressure uses the vertex hat functions.

use crate::mesh::signed_area;
use crate::quadrature::{segment_gauss3, TRIANGLE_DEGREE4};

pub const NODES: usize = 6;

/// Quadratic Lagrange basis values at barycentric point `l`.
pub fn p2_values(l: [f64; 3]) -> [f64; NODES] {
    [
        l[0] * (2.0 * l[0] - 1.0),
        l[1] * (2.0 * l[1] - 1.0),
        l[2] * (2.0 * l[2] - 1.0),
        4.0 * l[0] * l[1],
        4.0 * l[1] * l[2],
        4.0 * l[2] * l[0],
    ]
}

/// Physical gradients of the quadratic basis given the (constant) barycentric gradients.
pub fn p2_gradients(l: [f64; 3], gl: [[f64; 2]; 3]) -> [[f64; 2]; NODES] {
    let comb = |a: f64, ga: [f64; 2], b: f64, gb: [f64; 2]| [a * ga[0] + b * gb[0], a * ga[1] + b * gb[1]];
    [
        comb(4.0 * l[0] - 1.0, gl[0], 0.0, gl[0]),
        comb(4.0 * l[1] - 1.0, gl[1], 0.0, gl[1]),
        comb(4.0 * l[2] - 1.0, gl[2], 0.0, gl[2]),
        comb(4.0 * l[1], gl[0], 4.0 * l[0], gl[1]),
        comb(4.0 * l[2], gl[1], 4.0 * l[1], gl[2]),
        comb(4.0 * l[0], gl[2], 4.0 * l[2], gl[0]),
    ]
}

/// Geometry of one triangle: area and barycentric gradients.
#[derive(Debug, Clone, Copy)]
pub struct TriangleGeometry {
    pub coords: [[f64; 2]; 3],
    pub area: f64,
    pub grad_bary: [[f64; 2]; 3],
}

impl TriangleGeometry {
    pub fn new(coords: [[f64; 2]; 3]) -> Self {
        let area = signed_area(coords[0], coords[1], coords[2]);
        let twice = 2.0 * area;
        let mut grad_bary = [[0.0; 2]; 3];
        for i in 0..3 {
            let j = (i + 1) % 3;
            let k = (i + 2) % 3;
            grad_bary[i] = [
                (coords[j][1] - coords[k][1]) / twice,
                (coords[k][0] - coords[j][0]) / twice,
            ];
        }
        TriangleGeometry {
            coords,
            area,
            grad_bary,
        }
    }

    pub fn point(&self, l: [f64; 3]) -> [f64; 2] {
        let mut p = [0.0; 2];
        for i in 0..3 {
            p[0] += l[i] * self.coords[i][0];
            p[1] += l[i] * self.coords[i][1];
        }
        p
    }
}

/// Element matrices of one triangle.
#[derive(Debug, Clone)]
pub struct ElementMatrices {
    /// `int grad N_a . grad N_b`.
    pub stiffness: [[f64; NODES]; NODES],
    /// `int N_a N_b`.
    pub mass: [[f64; NODES]; NODES],
    /// `divergence[d][c][a] = int psi_c dN_a/dx_d`.
    pub divergence: [[[f64; NODES]; 3]; 2],
    /// `int psi_c`.
    pub pressure_mean: [f64; 3],
}

pub fn element_matrices(geom: &TriangleGeometry) -> ElementMatrices {
    let mut stiffness = [[0.0; NODES]; NODES];
    let mut mass = [[0.0; NODES]; NODES];
    let mut divergence = [[[0.0; NODES]; 3]; 2];
    for q in TRIANGLE_DEGREE4.iter() {
        let w = q.weight * geom.area;
        let n = p2_values(q.bary);
        let g = p2_gradients(q.bary, geom.grad_bary);
        for a in 0..NODES {
            for b in 0..NODES {
                stiffness[a][b] += w * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
                mass[a][b] += w * n[a] * n[b];
            }
            for c in 0..3 {
                for d in 0..2 {
                    divergence[d][c][a] += w * q.bary[c] * g[a][d];
                }
            }
        }
    }
    ElementMatrices {
        stiffness,
        mass,
        divergence,
        pressure_mean: [geom.area / 3.0; 3],
    }
}

/// `int f_d N_a` for a pointwise force.
pub fn element_load(geom: &TriangleGeometry, force: impl Fn([f64; 2]) -> [f64; 2]) -> [[f64; NODES]; 2] {
    let mut load = [[0.0; NODES]; 2];
    for q in TRIANGLE_DEGREE4.iter() {
        let w = q.weight * geom.area;
        let f = force(geom.point(q.bary));
        let n = p2_values(q.bary);
        for a in 0..NODES {
            load[0][a] += w * f[0] * n[a];
            load[1][a] += w * f[1] * n[a];
        }
    }
    load
}

/// Mass matrix of the quadratic basis on a segment of length `len`, node order
/// `(start, end, midpoint)`.
pub fn segment_mass(len: f64) -> [[f64; 3]; 3] {
    let basis = |s: f64| [(1.0 - s) * (1.0 - 2.0 * s), s * (2.0 * s - 1.0), 4.0 * s * (1.0 - s)];
    let mut m = [[0.0; 3]; 3];
    for (s, w) in segment_gauss3() {
        let n = basis(s);
        for a in 0..3 {
            for b in 0..3 {
                m[a][b] += len * w * n[a] * n[b];
            }
        }
    }
    m
}
