//! Degree-of-freedom bookkeeping for one layer.
//!
//! Raw velocity dofs are `2 * node + component` (component 0 horizontal, 1
//! vertical); raw pressure dofs follow at `2 * n_nodes + slot`. Constraints are
//! resolved into a map from raw dof to local free index:
//!
//! * `ZeroDirichlet` dofs are dropped,
//! * `PeriodicSlave` dofs share the free index of their master,
//! * the zero-mean `PressureGauge` adds one multiplier unknown after the pressures.

use std::collections::HashMap;

use crate::mesh::{Mesh, Subdomain};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Vertex(usize),
    Edge(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub coords: [f64; 2],
    pub kind: NodeKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintKind {
    ZeroDirichlet,
    PeriodicSlave { master: usize },
    /// Zero mean of the layer pressure, attached to the first pressure dof and
    /// enforced through a Lagrange multiplier row.
    PressureGauge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Constraint {
    pub dof: usize,
    pub kind: ConstraintKind,
}

#[derive(Debug, Clone)]
pub struct MixedSpace {
    pub subdomain: Subdomain,
    /// Velocity nodes sorted lexicographically by `(x, z)`.
    pub nodes: Vec<Node>,
    /// Mesh triangles of this layer.
    pub triangles: Vec<usize>,
    /// Space node of each local P2 node, per triangle.
    pub element_nodes: Vec<[usize; 6]>,
    /// Pressure slot of each vertex, per triangle.
    pub element_pressure: Vec<[usize; 3]>,
    /// Mesh vertex of each pressure slot, sorted by `(x, z)`.
    pub pressure_vertices: Vec<usize>,
    pub constraints: Vec<Constraint>,
    /// Nodes on `z = 0` with `x < L`, by increasing `x`: the interface trace layout.
    pub interface_nodes: Vec<usize>,
    free: Vec<Option<usize>>,
    n_free_velocity: usize,
    n_free_pressure: usize,
    vertex_node: HashMap<usize, usize>,
    edge_node: HashMap<usize, usize>,
}

fn lex(a: [f64; 2], b: [f64; 2]) -> std::cmp::Ordering {
    a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1]))
}

impl MixedSpace {
    pub fn build(mesh: &Mesh, subdomain: Subdomain) -> MixedSpace {
        let triangles: Vec<usize> = mesh.triangles_of(subdomain).collect();
        let geom = mesh.geometry;

        let mut vertex_set: Vec<usize> = Vec::new();
        let mut edge_set: Vec<usize> = Vec::new();
        {
            let mut seen_v = vec![false; mesh.n_vertices()];
            let mut seen_e = vec![false; mesh.edges.len()];
            for &t in &triangles {
                for &v in &mesh.triangles[t].vertices {
                    if !std::mem::replace(&mut seen_v[v], true) {
                        vertex_set.push(v);
                    }
                }
                for &e in &mesh.triangle_edges[t] {
                    if !std::mem::replace(&mut seen_e[e], true) {
                        edge_set.push(e);
                    }
                }
            }
        }

        let mut nodes: Vec<Node> = vertex_set
            .iter()
            .map(|&v| Node {
                coords: mesh.vertices[v],
                kind: NodeKind::Vertex(v),
            })
            .chain(edge_set.iter().map(|&e| {
                let [a, b] = mesh.edges[e];
                let (pa, pb) = (mesh.vertices[a], mesh.vertices[b]);
                Node {
                    coords: [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])],
                    kind: NodeKind::Edge(e),
                }
            }))
            .collect();
        nodes.sort_by(|a, b| lex(a.coords, b.coords));

        let mut vertex_node = HashMap::new();
        let mut edge_node = HashMap::new();
        for (k, n) in nodes.iter().enumerate() {
            match n.kind {
                NodeKind::Vertex(v) => vertex_node.insert(v, k),
                NodeKind::Edge(e) => edge_node.insert(e, k),
            };
        }

        let mut pressure_vertices = vertex_set.clone();
        pressure_vertices.sort_by(|&a, &b| lex(mesh.vertices[a], mesh.vertices[b]));
        let pressure_slot: HashMap<usize, usize> =
            pressure_vertices.iter().enumerate().map(|(s, &v)| (v, s)).collect();

        let element_nodes = triangles
            .iter()
            .map(|&t| {
                let [a, b, c] = mesh.triangles[t].vertices;
                let [e01, e12, e20] = mesh.triangle_edges[t];
                [
                    vertex_node[&a],
                    vertex_node[&b],
                    vertex_node[&c],
                    edge_node[&e01],
                    edge_node[&e12],
                    edge_node[&e20],
                ]
            })
            .collect();
        let element_pressure = triangles
            .iter()
            .map(|&t| mesh.triangles[t].vertices.map(|v| pressure_slot[&v]))
            .collect();

        // Periodic masters, found topologically through the vertex pairing.
        let right_to_left = mesh.periodic_master();
        let master_node = |n: &Node| -> Option<usize> {
            match n.kind {
                NodeKind::Vertex(v) => right_to_left.get(&v).map(|l| vertex_node[l]),
                NodeKind::Edge(e) => {
                    let [a, b] = mesh.edges[e];
                    let (la, lb) = (right_to_left.get(&a)?, right_to_left.get(&b)?);
                    mesh.edge_index(*la, *lb).map(|me| edge_node[&me])
                }
            }
        };
        let wall_z = match subdomain {
            Subdomain::Upper => geom.z_plus,
            Subdomain::Lower => geom.z_minus,
        };

        let n_nodes = nodes.len();
        let mut constraints = Vec::new();
        for (k, n) in nodes.iter().enumerate() {
            let [x, z] = n.coords;
            for comp in 0..2 {
                let dof = 2 * k + comp;
                if x == geom.length {
                    let m = master_node(n).expect("x = L node without an x = 0 partner");
                    constraints.push(Constraint {
                        dof,
                        kind: ConstraintKind::PeriodicSlave { master: 2 * m + comp },
                    });
                } else if z == wall_z || (z == 0.0 && comp == 1) {
                    constraints.push(Constraint {
                        dof,
                        kind: ConstraintKind::ZeroDirichlet,
                    });
                }
            }
        }
        for (s, &v) in pressure_vertices.iter().enumerate() {
            if let Some(l) = right_to_left.get(&v) {
                constraints.push(Constraint {
                    dof: 2 * n_nodes + s,
                    kind: ConstraintKind::PeriodicSlave {
                        master: 2 * n_nodes + pressure_slot[l],
                    },
                });
            }
        }
        constraints.push(Constraint {
            dof: 2 * n_nodes,
            kind: ConstraintKind::PressureGauge,
        });

        // Resolve: free dofs first in raw order, then slaves inherit their master.
        let n_raw = 2 * n_nodes + pressure_vertices.len();
        let mut kind_of: Vec<Option<ConstraintKind>> = vec![None; n_raw];
        for c in &constraints {
            if c.kind != ConstraintKind::PressureGauge {
                kind_of[c.dof] = Some(c.kind);
            }
        }
        let mut free = vec![None; n_raw];
        let mut next = 0;
        for raw in 0..2 * n_nodes {
            if kind_of[raw].is_none() {
                free[raw] = Some(next);
                next += 1;
            }
        }
        let n_free_velocity = next;
        for raw in 2 * n_nodes..n_raw {
            if kind_of[raw].is_none() {
                free[raw] = Some(next);
                next += 1;
            }
        }
        let n_free_pressure = next - n_free_velocity;
        for raw in 0..n_raw {
            if let Some(ConstraintKind::PeriodicSlave { master }) = kind_of[raw] {
                free[raw] = free[master];
            }
        }

        let mut interface_nodes: Vec<usize> = (0..n_nodes)
            .filter(|&k| nodes[k].coords[1] == 0.0 && nodes[k].coords[0] < geom.length)
            .collect();
        interface_nodes.sort_by(|&a, &b| nodes[a].coords[0].total_cmp(&nodes[b].coords[0]));

        MixedSpace {
            subdomain,
            nodes,
            triangles,
            element_nodes,
            element_pressure,
            pressure_vertices,
            constraints,
            interface_nodes,
            free,
            n_free_velocity,
            n_free_pressure,
            vertex_node,
            edge_node,
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_pressure(&self) -> usize {
        self.pressure_vertices.len()
    }

    /// Velocity plus pressure dofs before constraints.
    pub fn n_raw(&self) -> usize {
        2 * self.n_nodes() + self.n_pressure()
    }

    pub fn n_free_velocity(&self) -> usize {
        self.n_free_velocity
    }

    pub fn n_free_pressure(&self) -> usize {
        self.n_free_pressure
    }

    /// Local index of the gauge multiplier.
    pub fn gauge_index(&self) -> usize {
        self.n_free_velocity + self.n_free_pressure
    }

    /// Unknowns of the layer system: free velocities, free pressures, multiplier.
    pub fn n_local(&self) -> usize {
        self.gauge_index() + 1
    }

    pub fn velocity_dof(node: usize, component: usize) -> usize {
        2 * node + component
    }

    pub fn pressure_dof(&self, slot: usize) -> usize {
        2 * self.n_nodes() + slot
    }

    /// Local free index of a raw dof (`None` for zero Dirichlet).
    pub fn free_index(&self, raw: usize) -> Option<usize> {
        self.free[raw]
    }

    pub fn node_of_vertex(&self, v: usize) -> Option<usize> {
        self.vertex_node.get(&v).copied()
    }

    pub fn node_of_edge(&self, e: usize) -> Option<usize> {
        self.edge_node.get(&e).copied()
    }

    pub fn constraint_of(&self, raw: usize) -> Option<ConstraintKind> {
        self.constraints
            .iter()
            .find(|c| c.dof == raw && c.kind != ConstraintKind::PressureGauge)
            .map(|c| c.kind)
    }

    /// Local free index of the horizontal velocity at each trace position.
    pub fn trace_free_indices(&self) -> Vec<usize> {
        self.interface_nodes
            .iter()
            .map(|&k| self.free[Self::velocity_dof(k, 0)].expect("horizontal interface dof is free"))
            .collect()
    }

    /// Expands a local solution vector into raw velocity and pressure values.
    pub fn expand(&self, local: &[f64]) -> (Vec<f64>, Vec<f64>, f64) {
        let value = |raw: usize| self.free[raw].map_or(0.0, |i| local[i]);
        let velocity = (0..2 * self.n_nodes()).map(value).collect();
        let pressure = (0..self.n_pressure()).map(|s| value(self.pressure_dof(s))).collect();
        (velocity, pressure, local[self.gauge_index()])
    }
}
