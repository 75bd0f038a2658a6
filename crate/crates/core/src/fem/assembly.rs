use crate::error::{Error, Result};
use crate::mesh::{Mesh, Subdomain};
use crate::sparse::{CsrMatrix, Triplets};

use super::element::{element_load, element_matrices, TriangleGeometry};
use super::space::MixedSpace;
use super::{BodyForce, Discretization, DofLayout, InterfaceCoupling, LayoutBlock, SparseSystem};

/// Layer Stokes operator in local free numbering (velocities, pressures, gauge
/// multiplier) with its load vector.
#[derive(Debug, Clone)]
pub struct LayerSystem {
    pub matrix: Triplets,
    pub rhs: Vec<f64>,
}

/// `nu int grad u : grad v - int p div v - int q div u + lambda int q + mu int p = int f . v`
/// on one layer. Dirichlet rows and columns are dropped, periodic slaves are
/// summed into their masters.
pub fn assemble_stokes(space: &MixedSpace, mesh: &Mesh, nu: f64, force: &BodyForce) -> Result<LayerSystem> {
    if !(nu.is_finite() && nu > 0.0) {
        return Err(Error::param("nu", format!("must be > 0, got {nu}")));
    }
    let n = space.n_local();
    let gauge = space.gauge_index();
    let mut matrix = Triplets::with_capacity(n, space.triangles.len() * (144 + 72 + 6));
    let mut rhs = vec![0.0; n];

    for (k, &t) in space.triangles.iter().enumerate() {
        let geom = TriangleGeometry::new(mesh.triangles[t].vertices.map(|v| mesh.vertices[v]));
        let em = element_matrices(&geom);
        let load = element_load(&geom, |p| force.eval(space.subdomain, p));
        let nodes = space.element_nodes[k];
        let vel = |a: usize, c: usize| space.free_index(MixedSpace::velocity_dof(nodes[a], c));
        let pres = space.element_pressure[k].map(|s| space.free_index(space.pressure_dof(s)));

        for c in 0..2 {
            for a in 0..6 {
                let Some(ia) = vel(a, c) else { continue };
                rhs[ia] += load[c][a];
                for b in 0..6 {
                    if let Some(ib) = vel(b, c) {
                        matrix.push(ia, ib, nu * em.stiffness[a][b]);
                    }
                }
            }
        }
        for (q, iq) in pres.iter().enumerate() {
            let Some(iq) = *iq else { continue };
            for c in 0..2 {
                for a in 0..6 {
                    if let Some(ia) = vel(a, c) {
                        let v = -em.divergence[c][q][a];
                        matrix.push(iq, ia, v);
                        matrix.push(ia, iq, v);
                    }
                }
            }
            matrix.push(gauge, iq, em.pressure_mean[q]);
            matrix.push(iq, gauge, em.pressure_mean[q]);
        }
    }
    Ok(LayerSystem { matrix, rhs })
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(Error::param("alpha", format!("must be finite and >= 0, got {alpha}")));
    }
    Ok(())
}

/// `alpha [[M, -M], [-M, M]]` acting on `(upper trace, lower trace)`, where `M`
/// is the interface mass matrix.
pub fn interface_friction_matrix(disc: &Discretization, alpha: f64) -> Result<CsrMatrix> {
    check_alpha(alpha)?;
    let nt = disc.n_trace();
    let mut t = Triplets::new(2 * nt);
    let m = &disc.interface_mass;
    for r in 0..nt {
        for (c, v) in m.row(r) {
            let v = alpha * v;
            t.push(r, c, v);
            t.push(nt + r, nt + c, v);
            t.push(r, nt + c, -v);
            t.push(nt + r, c, -v);
        }
    }
    Ok(t.to_csr())
}

/// Monolithic system of both layers for the given interface coupling.
///
/// * `None`: block-diagonal, lower unknowns after the upper ones.
/// * `Continuity`: lower horizontal trace dofs are identified with the upper ones.
/// * `Friction(alpha)`: lower horizontal trace unknowns are replaced by the jump
///   `j = u1 - u2`, i.e. the system is `T^T A T` for the substitution
///   `u2 = u1 - j`. The friction term becomes `alpha M j`, which avoids the
///   cancellation of `alpha M u1 - alpha M u2` in residuals for large `alpha`.
pub fn assemble_coupled_system(disc: &Discretization, coupling: InterfaceCoupling) -> Result<SparseSystem> {
    if let InterfaceCoupling::Friction(alpha) = coupling {
        check_alpha(alpha)?;
    }
    let (up, lo) = (&disc.upper, &disc.lower);
    let n_up = up.space.n_local();
    let n_lo = lo.space.n_local();

    // Lower local index -> (base global row, optional subtracted global row).
    let mut lo_base = vec![usize::MAX; n_lo];
    let mut lo_minus = vec![None; n_lo];
    let mut next = n_up;
    match coupling {
        InterfaceCoupling::None => {}
        InterfaceCoupling::Continuity => {
            for (t, &i) in lo.trace_dofs.iter().enumerate() {
                lo_base[i] = up.trace_dofs[t];
            }
        }
        InterfaceCoupling::Friction(_) => {
            for (t, &i) in lo.trace_dofs.iter().enumerate() {
                lo_base[i] = up.trace_dofs[t];
                lo_minus[i] = Some(next + t);
            }
            next += lo.trace_dofs.len();
        }
    }
    for slot in lo_base.iter_mut().filter(|m| **m == usize::MAX) {
        *slot = next;
        next += 1;
    }
    let n = next;

    let mut t = Triplets::with_capacity(
        n,
        up.stokes.matrix.len() + 4 * lo.stokes.matrix.len() + 3 * disc.n_trace(),
    );
    t.extend_mapped(&up.stokes.matrix, Some);
    let terms = |i: usize| {
        let mut v = vec![(lo_base[i], 1.0)];
        if let Some(m) = lo_minus[i] {
            v.push((m, -1.0));
        }
        v
    };
    for &(r, c, v) in lo.stokes.matrix.entries() {
        for (gr, sr) in terms(r) {
            for (gc, sc) in terms(c) {
                t.push(gr, gc, sr * sc * v);
            }
        }
    }
    let mut rhs = vec![0.0; n];
    rhs[..n_up].copy_from_slice(&up.stokes.rhs);
    for (i, v) in lo.stokes.rhs.iter().enumerate() {
        for (g, s) in terms(i) {
            rhs[g] += s * v;
        }
    }
    if let InterfaceCoupling::Friction(alpha) = coupling {
        if alpha != 0.0 {
            let jump: Vec<usize> = lo.trace_dofs.iter().map(|&i| lo_minus[i].unwrap()).collect();
            for r in 0..disc.n_trace() {
                for (c, v) in disc.interface_mass.row(r) {
                    t.push(jump[r], jump[c], alpha * v);
                }
            }
        }
    }

    Ok(SparseSystem {
        matrix: t.to_csr(),
        rhs,
        layout: DofLayout {
            blocks: vec![
                LayoutBlock::direct(Subdomain::Upper, (0..n_up).map(Some).collect()),
                LayoutBlock {
                    subdomain: Subdomain::Lower,
                    local_to_global: lo_base.into_iter().map(Some).collect(),
                    minus_global: lo_minus,
                },
            ],
        },
    })
}

fn check_trace(disc: &Discretization, trace: &[f64]) -> Result<()> {
    if trace.len() != disc.n_trace() {
        return Err(Error::DimensionMismatch {
            expected: disc.n_trace(),
            found: trace.len(),
            context: "neighbor trace",
        });
    }
    Ok(())
}

/// One layer with the Robin condition `nu du/dn = -alpha (u - g)` on the
/// interface, `g` being the neighbour's horizontal trace.
pub fn assemble_robin_subproblem(
    disc: &Discretization,
    subdomain: Subdomain,
    alpha: f64,
    neighbor_trace: &[f64],
) -> Result<SparseSystem> {
    check_alpha(alpha)?;
    check_trace(disc, neighbor_trace)?;
    let layer = disc.layer(subdomain);
    let n = layer.space.n_local();
    let mut t = Triplets::with_capacity(n, layer.stokes.matrix.len() + 3 * disc.n_trace());
    t.extend_mapped(&layer.stokes.matrix, Some);
    let mut rhs = layer.stokes.rhs.clone();
    let tr = &layer.trace_dofs;
    let m = &disc.interface_mass;
    for r in 0..disc.n_trace() {
        for (c, v) in m.row(r) {
            t.push(tr[r], tr[c], alpha * v);
            rhs[tr[r]] += alpha * v * neighbor_trace[c];
        }
    }
    Ok(SparseSystem {
        matrix: t.to_csr(),
        rhs,
        layout: DofLayout {
            blocks: vec![LayoutBlock::direct(subdomain, (0..n).map(Some).collect())],
        },
    })
}

/// One layer with its horizontal interface trace prescribed to `trace`. The
/// trace unknowns are eliminated symmetrically and appear as `None` in the layout.
pub fn assemble_dirichlet_subproblem(disc: &Discretization, subdomain: Subdomain, trace: &[f64]) -> Result<SparseSystem> {
    check_trace(disc, trace)?;
    let layer = disc.layer(subdomain);
    let n_local = layer.space.n_local();
    let mut prescribed = vec![None; n_local];
    for (t, &i) in layer.trace_dofs.iter().enumerate() {
        prescribed[i] = Some(trace[t]);
    }
    let mut map = vec![None; n_local];
    let mut next = 0;
    for (i, p) in prescribed.iter().enumerate() {
        if p.is_none() {
            map[i] = Some(next);
            next += 1;
        }
    }
    let mut t = Triplets::with_capacity(next, layer.stokes.matrix.len());
    let mut rhs: Vec<f64> = vec![0.0; next];
    for (i, v) in layer.stokes.rhs.iter().enumerate() {
        if let Some(g) = map[i] {
            rhs[g] += v;
        }
    }
    for &(r, c, v) in layer.stokes.matrix.entries() {
        match (map[r], map[c], prescribed[c]) {
            (Some(gr), Some(gc), _) => t.push(gr, gc, v),
            (Some(gr), None, Some(g)) => rhs[gr] -= v * g,
            _ => {}
        }
    }
    Ok(SparseSystem {
        matrix: t.to_csr(),
        rhs,
        layout: DofLayout {
            blocks: vec![LayoutBlock::direct(subdomain, map)],
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::Physics;
    use crate::mesh::{build_layered_mesh, Geometry};
    use crate::sparse::spmv;
    use rand::{rngs::StdRng, Rng, SeedableRng};

    fn disc(force: BodyForce) -> Discretization {
        let mesh = build_layered_mesh(Geometry::new(4.0, 2.0, -1.0).unwrap(), 4, 3, 2).unwrap();
        Discretization::new(mesh, Physics::new(1.5, 0.5, force)).unwrap()
    }

    #[test]
    fn zero_force_gives_zero_rhs() {
        let d = disc(BodyForce::zero());
        let sys = assemble_coupled_system(&d, InterfaceCoupling::Friction(10.0)).unwrap();
        assert!(sys.rhs.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn velocity_block_is_a_dirichlet_form() {
        let d = disc(BodyForce::reference());
        let layer = &d.upper;
        let a = layer.stokes.matrix.to_csr();
        let nv = layer.space.n_free_velocity();
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..10 {
            let mut v = vec![0.0; a.dim()];
            for x in v.iter_mut().take(nv) {
                *x = rng.gen_range(-1.0..1.0);
            }
            let q = a.quadratic_form(&v, &v);
            // Same form from the raw stiffness matrix, component-wise.
            let (vel, _, _) = layer.space.expand(&v);
            let mut raw = 0.0;
            for c in 0..2 {
                let comp: Vec<f64> = (0..layer.space.n_nodes()).map(|k| vel[2 * k + c]).collect();
                raw += layer.nu * layer.stiffness.quadratic_form(&comp, &comp);
            }
            assert!(q > 0.0);
            assert!((q - raw).abs() <= 1e-12 * raw);
        }
    }

    #[test]
    fn friction_contribution_vanishes_at_zero_alpha() {
        let d = disc(BodyForce::reference());
        let m = interface_friction_matrix(&d, 0.0).unwrap();
        assert!(m.values().iter().all(|&v| v == 0.0));
        let none = assemble_coupled_system(&d, InterfaceCoupling::None).unwrap();
        let zero = assemble_coupled_system(&d, InterfaceCoupling::Friction(0.0)).unwrap();
        let (xn, _) = crate::sparse::solve(&none.matrix, &none.rhs, 1e-10).unwrap();
        let (xz, _) = crate::sparse::solve(&zero.matrix, &zero.rhs, 1e-10).unwrap();
        for sub in Subdomain::BOTH {
            let a = none.local_solution(&xn, sub).unwrap();
            let b = zero.local_solution(&xz, sub).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-9 * 1250.0);
            }
        }
    }

    #[test]
    fn jump_variables_are_a_congruence_of_the_block_form() {
        // x^T A' x of the jump-variable system equals the block quadratic form
        // of the layer operators plus the friction matrix on the recovered traces.
        let d = disc(BodyForce::reference());
        let alpha = 4.0;
        let s = assemble_coupled_system(&d, InterfaceCoupling::Friction(alpha)).unwrap();
        let mut rng = StdRng::seed_from_u64(9);
        let x: Vec<f64> = (0..s.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let u1 = s.local_solution(&x, Subdomain::Upper).unwrap();
        let u2 = s.local_solution(&x, Subdomain::Lower).unwrap();
        let a1 = d.upper.stokes.matrix.to_csr();
        let a2 = d.lower.stokes.matrix.to_csr();
        let t1: Vec<f64> = d.upper.trace_dofs.iter().map(|&i| u1[i]).collect();
        let t2: Vec<f64> = d.lower.trace_dofs.iter().map(|&i| u2[i]).collect();
        let tt: Vec<f64> = t1.iter().chain(&t2).copied().collect();
        let friction = interface_friction_matrix(&d, alpha).unwrap();
        let block = a1.quadratic_form(&u1, &u1) + a2.quadratic_form(&u2, &u2) + friction.quadratic_form(&tt, &tt);
        let jump_form = s.matrix.quadratic_form(&x, &x);
        assert!((block - jump_form).abs() < 1e-10 * block.abs().max(1.0));
        let work = |b: &[f64], u: &[f64]| b.iter().zip(u).map(|(p, q)| p * q).sum::<f64>();
        let lhs = work(&s.rhs, &x);
        let rhs = work(&d.upper.stokes.rhs, &u1) + work(&d.lower.stokes.rhs, &u2);
        assert!((lhs - rhs).abs() < 1e-10 * rhs.abs().max(1.0));
    }

    #[test]
    fn friction_kernel_is_equal_traces() {
        let d = disc(BodyForce::reference());
        let alpha = 1e3;
        let m = interface_friction_matrix(&d, alpha).unwrap();
        let nt = d.n_trace();
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..20 {
            let t: Vec<f64> = (0..nt).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let tt: Vec<f64> = t.iter().chain(&t).copied().collect();
            let q = m.quadratic_form(&tt, &tt);
            let norm2: f64 = t.iter().map(|x| x * x).sum();
            assert!(q.abs() <= 1e-12 * alpha * norm2);
            let diff: Vec<f64> = t.iter().chain(t.iter()).enumerate().map(|(i, &x)| if i < nt { x } else { -x }).collect();
            assert!(m.quadratic_form(&diff, &diff) >= 0.0);
        }
    }

    #[test]
    fn friction_form_of_constant_jump() {
        // Hand integration: alpha * int_0^L d^2 dx = alpha L d^2; per segment alpha * len * d^2.
        let d = disc(BodyForce::reference());
        let (alpha, jump) = (7.0, 0.3);
        let m = interface_friction_matrix(&d, alpha).unwrap();
        let nt = d.n_trace();
        let v: Vec<f64> = (0..2 * nt).map(|i| if i < nt { jump } else { 0.0 }).collect();
        let q = m.quadratic_form(&v, &v);
        let exact = alpha * d.mesh.geometry.length * jump * jump;
        assert!((q - exact).abs() < 1e-12 * exact);

        // Single segment: the mass row sums give the segment length.
        let seg = crate::fem::element::segment_mass(1.25);
        let s: f64 = seg.iter().flatten().sum();
        assert!((alpha * s * jump * jump - alpha * 1.25 * jump * jump).abs() < 1e-14);
    }

    #[test]
    fn negative_alpha_is_rejected() {
        let d = disc(BodyForce::reference());
        assert!(interface_friction_matrix(&d, -1.0).is_err());
        assert!(assemble_coupled_system(&d, InterfaceCoupling::Friction(-1.0)).is_err());
        assert!(assemble_robin_subproblem(&d, Subdomain::Upper, -1.0, &vec![0.0; d.n_trace()]).is_err());
    }

    #[test]
    fn continuity_removes_one_unknown_per_trace_dof() {
        let d = disc(BodyForce::reference());
        let f = assemble_coupled_system(&d, InterfaceCoupling::Friction(1.0)).unwrap();
        let c = assemble_coupled_system(&d, InterfaceCoupling::Continuity).unwrap();
        assert_eq!(c.dim(), f.dim() - d.n_trace());
    }

    #[test]
    fn coupled_matrix_is_symmetric() {
        let d = disc(BodyForce::reference());
        for coupling in [InterfaceCoupling::Friction(1e6), InterfaceCoupling::Continuity, InterfaceCoupling::None] {
            let s = assemble_coupled_system(&d, coupling).unwrap();
            assert!(s.matrix.is_structurally_symmetric());
            assert!(s.matrix.asymmetry() <= 1e-14, "{coupling:?}");
        }
    }

    #[test]
    fn robin_with_zero_trace_is_layer_plus_mass() {
        let d = disc(BodyForce::reference());
        let nt = d.n_trace();
        let s = assemble_robin_subproblem(&d, Subdomain::Upper, 5.0, &vec![0.0; nt]).unwrap();
        assert_eq!(s.rhs, d.upper.stokes.rhs);
        let base = d.upper.stokes.matrix.to_csr();
        let tr = &d.upper.trace_dofs;
        assert!((s.matrix.get(tr[0], tr[0]) - base.get(tr[0], tr[0]) - 5.0 * d.interface_mass.get(0, 0)).abs() < 1e-14);
    }

    #[test]
    fn robin_trace_term_cancels_for_own_trace() {
        // With g equal to the vector's own trace, A_robin v - b_robin = A_layer v - b_layer.
        let d = disc(BodyForce::reference());
        let mut rng = StdRng::seed_from_u64(2);
        let n = d.lower.space.n_local();
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let g: Vec<f64> = d.lower.trace_dofs.iter().map(|&i| v[i]).collect();
        let s = assemble_robin_subproblem(&d, Subdomain::Lower, 3.0, &g).unwrap();
        let base = d.lower.stokes.matrix.to_csr();
        let r1: Vec<f64> = spmv(&s.matrix, &v).unwrap().iter().zip(&s.rhs).map(|(a, b)| a - b).collect();
        let r0: Vec<f64> = spmv(&base, &v).unwrap().iter().zip(&d.lower.stokes.rhs).map(|(a, b)| a - b).collect();
        for (a, b) in r1.iter().zip(&r0) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn trace_length_is_checked() {
        let d = disc(BodyForce::reference());
        assert!(matches!(
            assemble_robin_subproblem(&d, Subdomain::Upper, 1.0, &[0.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(assemble_dirichlet_subproblem(&d, Subdomain::Upper, &[0.0]).is_err());
    }
}
