//! Taylor–Hood discretisation of the two layers and assembly of the coupled,
//! Robin and Dirichlet-trace systems.

mod assembly;
pub mod element;
mod space;

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

pub use assembly::{
    assemble_coupled_system, assemble_dirichlet_subproblem, assemble_robin_subproblem, assemble_stokes,
    interface_friction_matrix, LayerSystem,
};
pub use space::{Constraint, ConstraintKind, MixedSpace, Node, NodeKind};

use crate::error::{Error, Result};
use crate::mesh::{Mesh, Subdomain};
use crate::sparse::{CsrMatrix, Triplets};

use element::{element_load, element_matrices, segment_mass, TriangleGeometry};

type ForceFn = dyn Fn(Subdomain, [f64; 2]) -> [f64; 2] + Send + Sync;

/// Body force per layer.
#[derive(Clone)]
pub enum BodyForce {
    Constant { upper: [f64; 2], lower: [f64; 2] },
    /// Pointwise evaluator `(layer, (x, z)) -> (f_x, f_z)`.
    Field(Arc<ForceFn>),
}

impl BodyForce {
    pub fn constant(upper: [f64; 2], lower: [f64; 2]) -> Self {
        BodyForce::Constant { upper, lower }
    }

    pub fn zero() -> Self {
        Self::constant([0.0; 2], [0.0; 2])
    }

    /// `f1 = f2 = (1, -1)`.
    pub fn reference() -> Self {
        Self::constant([1.0, -1.0], [1.0, -1.0])
    }

    pub fn field(f: impl Fn(Subdomain, [f64; 2]) -> [f64; 2] + Send + Sync + 'static) -> Self {
        BodyForce::Field(Arc::new(f))
    }

    pub fn eval(&self, subdomain: Subdomain, p: [f64; 2]) -> [f64; 2] {
        match self {
            BodyForce::Constant { upper, lower } => match subdomain {
                Subdomain::Upper => *upper,
                Subdomain::Lower => *lower,
            },
            BodyForce::Field(f) => f(subdomain, p),
        }
    }

    pub fn check(&self) -> Result<()> {
        if let BodyForce::Constant { upper, lower } = self {
            if !upper.iter().chain(lower).all(|v| v.is_finite()) {
                return Err(Error::param("force", "components must be finite"));
            }
        }
        Ok(())
    }
}

impl fmt::Debug for BodyForce {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BodyForce::Constant { upper, lower } => f
                .debug_struct("Constant")
                .field("upper", upper)
                .field("lower", lower)
                .finish(),
            BodyForce::Field(_) => f.write_str("Field(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Physics {
    pub nu1: f64,
    pub nu2: f64,
    pub force: BodyForce,
}

impl Physics {
    pub fn new(nu1: f64, nu2: f64, force: BodyForce) -> Self {
        Physics { nu1, nu2, force }
    }

    /// `nu1 = nu2 = 1`, `f = (1, -1)` in both layers.
    pub fn reference() -> Self {
        Physics::new(1.0, 1.0, BodyForce::reference())
    }

    pub fn nu(&self, subdomain: Subdomain) -> f64 {
        match subdomain {
            Subdomain::Upper => self.nu1,
            Subdomain::Lower => self.nu2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InterfaceCoupling {
    /// Navier friction law with coefficient `alpha >= 0`.
    Friction(f64),
    /// Horizontal interface dofs shared by both layers.
    Continuity,
    /// Two independent layer systems.
    None,
}

/// Everything assembled once per mesh and physics: spaces, layer Stokes systems,
/// raw-node mass/stiffness matrices for the norms, and the interface mass.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub mesh: Mesh,
    pub physics: Physics,
    pub upper: LayerData,
    pub lower: LayerData,
    /// Quadratic mass matrix on the periodic interface, indexed by trace position.
    pub interface_mass: CsrMatrix,
    /// `x` coordinate of each trace position.
    pub trace_x: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct LayerData {
    pub space: MixedSpace,
    pub nu: f64,
    /// Stokes system in local free numbering, constraints eliminated.
    pub stokes: LayerSystem,
    /// Scalar P2 mass matrix over raw nodes.
    pub mass: CsrMatrix,
    /// Scalar P2 stiffness matrix over raw nodes.
    pub stiffness: CsrMatrix,
    /// `int f . phi` over raw velocity dofs.
    pub load: Vec<f64>,
    /// Local free index of the horizontal velocity at each trace position.
    pub trace_dofs: Vec<usize>,
}

impl Discretization {
    pub fn new(mesh: Mesh, physics: Physics) -> Result<Self> {
        for (name, nu) in [("nu1", physics.nu1), ("nu2", physics.nu2)] {
            if !(nu.is_finite() && nu > 0.0) {
                return Err(Error::param(name, format!("must be > 0, got {nu}")));
            }
        }
        physics.force.check()?;
        let upper = LayerData::build(&mesh, Subdomain::Upper, &physics)?;
        let lower = LayerData::build(&mesh, Subdomain::Lower, &physics)?;

        let n_trace = upper.space.interface_nodes.len();
        let trace_x: Vec<f64> = upper
            .space
            .interface_nodes
            .iter()
            .map(|&k| upper.space.nodes[k].coords[0])
            .collect();
        let lower_x: Vec<f64> = lower
            .space
            .interface_nodes
            .iter()
            .map(|&k| lower.space.nodes[k].coords[0])
            .collect();
        if trace_x != lower_x {
            return Err(Error::param("mesh", "interface nodes of the two layers do not coincide"));
        }
        let interface_mass = build_interface_mass(&mesh, &upper.space, n_trace);

        Ok(Discretization {
            mesh,
            physics,
            upper,
            lower,
            interface_mass,
            trace_x,
        })
    }

    pub fn layer(&self, subdomain: Subdomain) -> &LayerData {
        match subdomain {
            Subdomain::Upper => &self.upper,
            Subdomain::Lower => &self.lower,
        }
    }

    pub fn n_trace(&self) -> usize {
        self.trace_x.len()
    }
}

impl LayerData {
    fn build(mesh: &Mesh, subdomain: Subdomain, physics: &Physics) -> Result<Self> {
        let space = MixedSpace::build(mesh, subdomain);
        let nu = physics.nu(subdomain);
        let stokes = assemble_stokes(&space, mesh, nu, &physics.force)?;

        let n_nodes = space.n_nodes();
        let mut mass = Triplets::with_capacity(n_nodes, 36 * space.triangles.len());
        let mut stiffness = Triplets::with_capacity(n_nodes, 36 * space.triangles.len());
        let mut load = vec![0.0; 2 * n_nodes];
        for (k, &t) in space.triangles.iter().enumerate() {
            let geom = TriangleGeometry::new(mesh.triangles[t].vertices.map(|v| mesh.vertices[v]));
            let em = element_matrices(&geom);
            let el = element_load(&geom, |p| physics.force.eval(subdomain, p));
            let nodes = space.element_nodes[k];
            for a in 0..6 {
                for b in 0..6 {
                    mass.push(nodes[a], nodes[b], em.mass[a][b]);
                    stiffness.push(nodes[a], nodes[b], em.stiffness[a][b]);
                }
                load[2 * nodes[a]] += el[0][a];
                load[2 * nodes[a] + 1] += el[1][a];
            }
        }
        let trace_dofs = space.trace_free_indices();
        Ok(LayerData {
            space,
            nu,
            stokes,
            mass: mass.to_csr(),
            stiffness: stiffness.to_csr(),
            load,
            trace_dofs,
        })
    }
}

fn build_interface_mass(mesh: &Mesh, space: &MixedSpace, n_trace: usize) -> CsrMatrix {
    let position: HashMap<usize, usize> = space
        .interface_nodes
        .iter()
        .enumerate()
        .map(|(t, &k)| (k, t))
        .collect();
    let right_to_left = mesh.periodic_master();
    let trace_of_vertex = |v: usize| {
        let v = right_to_left.get(&v).copied().unwrap_or(v);
        position[&space.node_of_vertex(v).expect("interface vertex in layer")]
    };
    let mut t = Triplets::new(n_trace);
    for w in mesh.interface_vertices.windows(2) {
        let (a, b) = (w[0], w[1]);
        let e = mesh.edge_index(a, b).expect("interface edge");
        let mid = position[&space.node_of_edge(e).expect("interface edge in layer")];
        let idx = [trace_of_vertex(a), trace_of_vertex(b), mid];
        let len = (mesh.vertices[b][0] - mesh.vertices[a][0]).abs();
        let m = segment_mass(len);
        for i in 0..3 {
            for j in 0..3 {
                t.push(idx[i], idx[j], m[i][j]);
            }
        }
    }
    t.to_csr()
}

/// Block of global unknowns belonging to one layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LayoutBlock {
    pub subdomain: Subdomain,
    /// Global row of each local free index; `None` when the local unknown is
    /// prescribed rather than solved for.
    pub local_to_global: Vec<Option<usize>>,
    /// Global row subtracted from `local_to_global` for unknowns expressed
    /// through the interface jump (`u2 = u1 - (u1 - u2)` on the trace).
    pub minus_global: Vec<Option<usize>>,
}

impl LayoutBlock {
    pub fn direct(subdomain: Subdomain, local_to_global: Vec<Option<usize>>) -> Self {
        let n = local_to_global.len();
        LayoutBlock {
            subdomain,
            local_to_global,
            minus_global: vec![None; n],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DofLayout {
    pub blocks: Vec<LayoutBlock>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Velocity { component: usize },
    Pressure,
}

impl DofLayout {
    pub fn block(&self, subdomain: Subdomain) -> Option<&LayoutBlock> {
        self.blocks.iter().find(|b| b.subdomain == subdomain)
    }

    /// Global row of `(layer, field, node)`; `node` is a velocity node or a pressure slot.
    /// For jump-expressed unknowns this is the row of the upper-layer value.
    pub fn row_of(&self, space: &MixedSpace, field: Field, node: usize) -> Option<usize> {
        let raw = match field {
            Field::Velocity { component } => MixedSpace::velocity_dof(node, component),
            Field::Pressure => space.pressure_dof(node),
        };
        let local = space.free_index(raw)?;
        self.block(space.subdomain)?.local_to_global[local]
    }
}

/// Assembled symmetric saddle-point system.
#[derive(Debug, Clone)]
pub struct SparseSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub layout: DofLayout,
}

impl SparseSystem {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Local vector of one layer from a global solution; unmapped entries are 0.
    pub fn local_solution(&self, x: &[f64], subdomain: Subdomain) -> Option<Vec<f64>> {
        let block = self.layout.block(subdomain)?;
        Some(
            block
                .local_to_global
                .iter()
                .zip(&block.minus_global)
                .map(|(g, m)| g.map_or(0.0, |g| x[g]) - m.map_or(0.0, |m| x[m]))
                .collect(),
        )
    }
}
