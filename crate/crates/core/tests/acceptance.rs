//! Acceptance criteria. Each criterion prints one `PASS` or `FAIL` line; the
//! process exits nonzero if any criterion fails.

use std::process::ExitCode;

use rand::{rngs::StdRng, Rng, SeedableRng};

use couple_core::coupling::{dirichlet_exchange_demo, solve_monolithic_continuity, solve_monolithic_friction, Alpha};
use couple_core::fem::interface_friction_matrix;
use couple_core::io::{parse_config, render_config, RunConfig};
use couple_core::mesh::Subdomain;
use couple_core::sparse::{solve, spmv, DEFAULT_TOL};
use couple_core::verification::{
    channel_l2_error, energy_residual, jump_norm, velocity_l2_norm, w_norm, ChannelForcing, ChannelOracle,
    SweepResult, SweepSettings,
};
use couple_core::{build_layered_mesh, mesh_size, run_alpha_sweep, validate_mesh, BodyForce, Discretization, Geometry, InterfaceCoupling, Physics};

/// Friction coefficients of the iteration-count table.
const TABLE_ALPHAS: [f64; 7] = [1e1, 1e2, 1e3, 1e4, 1e5, 1e6, 1e9];
const TOL_INCREMENT: f64 = 1e-3;
const MAX_ITER: usize = 100_000;
const ENERGY_TOL: f64 = 1e-8;

struct Outcome {
    pass: bool,
    detail: String,
}

/// Energy residuals of every monolithic friction solve made here.
#[derive(Default)]
struct EnergyLog(Vec<(String, f64)>);

impl EnergyLog {
    fn friction(&mut self, disc: &Discretization, alpha: f64, label: &str) -> couple_core::CoupledField {
        let f = solve_monolithic_friction(disc, alpha).expect("friction solve");
        let r = energy_residual(&f, disc, Alpha::Finite(alpha)).expect("energy residual");
        self.0.push((format!("{label} alpha={alpha:e}"), r));
        f
    }
}

fn reference_disc(nx: usize, nz_upper: usize, nz_lower: usize, force: BodyForce) -> Discretization {
    let mesh = build_layered_mesh(Geometry::reference(), nx, nz_upper, nz_lower).unwrap();
    Discretization::new(mesh, Physics::new(1.0, 1.0, force)).unwrap()
}

fn criterion_analytic(log: &mut EnergyLog) -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();

    // Closed-form anchors.
    let inf = ChannelOracle::reference(Alpha::Infinity);
    let u0 = inf.channel_exact(0.0, Subdomain::Upper).unwrap();
    let umax = inf.channel_exact(22.5, Subdomain::Upper).unwrap();
    let ten = ChannelOracle::reference(Alpha::Finite(10.0));
    let anchors = (u0 - 125.0).abs() < 1e-10
        && (umax - 378.125).abs() < 1e-10
        && (ten.interface_shear() - 12375.0 / 551.0).abs() < 1e-10;
    pass &= anchors;
    detail.push(format!("u(0)={u0} max={umax} a(10)={:.6}", ten.interface_shear()));

    // Constant force on the 64 x (32 + 8) mesh.
    let disc = reference_disc(64, 32, 8, BodyForce::reference());
    for alpha in [Alpha::Finite(10.0), Alpha::Finite(1e3), Alpha::Infinity] {
        let oracle = ChannelOracle::reference(alpha);
        let field = match alpha {
            Alpha::Finite(a) => log.friction(&disc, a, "64x(32+8)"),
            Alpha::Infinity => solve_monolithic_continuity(&disc).unwrap(),
        };
        let (e, n) = channel_l2_error(&field, &disc, &oracle).unwrap();
        pass &= e / n <= 1e-3;
        detail.push(format!("rel_err(alpha={alpha})={:.2e}", e / n));
    }

    // Observed order under uniform refinement ending on the same mesh, with a
    // cosine forcing the quadratic velocity space cannot represent exactly.
    let forcing = ChannelForcing { mean: 1.0, amplitude: 1.0, wavenumber: 0.2 };
    for alpha in [Alpha::Finite(10.0), Alpha::Finite(1e3), Alpha::Infinity] {
        let oracle = ChannelOracle::new(&Geometry::reference(), 1.0, 1.0, forcing, alpha).unwrap();
        let mut prev: Option<(f64, f64)> = None;
        let mut rates = Vec::new();
        for (nx, nu, nl) in [(8, 4, 1), (16, 8, 2), (32, 16, 4), (64, 32, 8)] {
            let disc = reference_disc(nx, nu, nl, forcing.body_force(-1.0));
            let h = mesh_size(&disc.mesh);
            let field = match alpha {
                Alpha::Finite(a) => log.friction(&disc, a, "cosine"),
                Alpha::Infinity => solve_monolithic_continuity(&disc).unwrap(),
            };
            let (e, n) = channel_l2_error(&field, &disc, &oracle).unwrap();
            if let Some((pe, ph)) = prev {
                rates.push((pe / e).ln() / (ph / h).ln());
            }
            prev = Some((e, h));
            if nx == 64 {
                pass &= e / n <= 1e-3;
            }
        }
        pass &= rates.iter().all(|&r| r >= 2.5);
        let shown: Vec<String> = rates.iter().map(|r| format!("{r:.2}")).collect();
        detail.push(format!("order(alpha={alpha})=[{}]", shown.join(",")));
    }
    Outcome { pass, detail: detail.join("; ") }
}

fn criterion_energy(log: &mut EnergyLog, sweep: &SweepResult) -> Outcome {
    let disc = reference_disc(16, 20, 4, BodyForce::reference());
    for alpha in [0.0, 1.0, 1e1, 1e2, 1e3, 1e4, 1e5, 1e6, 1e9] {
        log.friction(&disc, alpha, "16x(20+4)");
    }
    let disc = reference_disc(8, 6, 3, BodyForce::field(|s, p| match s {
        Subdomain::Upper => [1.0 + 0.1 * p[0].sin(), -1.0],
        Subdomain::Lower => [0.5, 0.3 * p[1]],
    }));
    for alpha in [0.5, 10.0, 1e6] {
        log.friction(&disc, alpha, "x-dependent");
    }
    let mut all: Vec<(String, f64)> = log.0.clone();
    all.extend(sweep.rows.iter().map(|r| (format!("sweep alpha={:e}", r.alpha), r.energy_residual)));
    let (worst_label, worst) = all
        .iter()
        .fold((String::new(), 0.0f64), |(l, m), (label, r)| if *r > m || r.is_nan() { (label.clone(), *r) } else { (l, m) });
    Outcome {
        pass: all.iter().all(|(_, r)| *r <= ENERGY_TOL),
        detail: format!("{} solves, max residual {worst:.2e} ({worst_label})", all.len()),
    }
}

fn criterion_penalty(sweep: &SweepResult) -> Outcome {
    let rows: Vec<_> = sweep.rows.iter().filter(|r| r.alpha <= 1e6).collect();
    let dists: Vec<f64> = rows.iter().map(|r| r.w_dist_to_continuity).collect();
    let monotone = dists.windows(2).all(|w| w[1] <= w[0]);
    let last = *dists.last().unwrap();
    let bound = 1e-4 * sweep.continuity_w_norm;
    let base = rows[0].alpha_jump_sq;
    let bounded = rows.iter().all(|r| r.alpha_jump_sq <= 2.0 * base);
    let shown: Vec<String> = rows.iter().map(|r| format!("{:.2e}", r.w_dist_to_continuity / sweep.continuity_w_norm)).collect();
    Outcome {
        pass: monotone && last <= bound && bounded,
        detail: format!(
            "relative W-distance [{}]; alpha*jump^2 alpha=1e1 {:.3e}, alpha=1e6 {:.3e}",
            shown.join(","),
            base,
            rows.last().unwrap().alpha_jump_sq
        ),
    }
}

fn criterion_schwarz(sweep: &SweepResult) -> Outcome {
    let bound = 10.0 * TOL_INCREMENT;
    let shown: Vec<String> = sweep
        .rows
        .iter()
        .map(|r| format!("{:e}:{:.2e}", r.alpha, r.schwarz_to_monolithic_l2))
        .collect();
    Outcome {
        pass: sweep.rows.iter().all(|r| r.error.is_none() && r.schwarz_to_monolithic_l2 <= bound),
        detail: format!("bound {bound:e}; L2 distance [{}]", shown.join(", ")),
    }
}

fn criterion_table(sweep: &SweepResult) -> Outcome {
    let counts: Vec<Option<usize>> = sweep.rows.iter().map(|r| r.n_iterations).collect();
    let shown: Vec<String> = counts
        .iter()
        .zip(&sweep.rows)
        .map(|(n, r)| format!("{:e}:{}", r.alpha, n.map_or_else(|| format!(">{}", r.iterations_run), |n| n.to_string())))
        .collect();
    let all_converged = counts.iter().all(|n| n.is_some_and(|n| n > 0));
    let n: Vec<usize> = counts.iter().map(|n| n.unwrap_or(usize::MAX)).collect();
    let nonincreasing = all_converged && n.windows(2).all(|w| w[1] <= w[0]);
    let (first, last) = (counts[0], counts[counts.len() - 1]);
    let ratio = matches!((first, last), (Some(a), Some(b)) if a >= 100 * b);
    let fast = last.is_some_and(|b| b <= 20);
    Outcome {
        pass: all_converged && nonincreasing && ratio && fast,
        detail: format!(
            "n = [{}]; converged={all_converged} nonincreasing={nonincreasing} n(1e1)>=100n(1e9)={ratio} n(1e9)<=20={fast}",
            shown.join(", ")
        ),
    }
}

fn criterion_stagnation() -> Outcome {
    let disc = reference_disc(16, 20, 4, BodyForce::reference());
    let nt = disc.n_trace();
    let wavy: Vec<f64> = disc.trace_x.iter().map(|x| 100.0 + 20.0 * (x * std::f64::consts::PI / 50.0).sin()).collect();
    let mut worst = 0.0f64;
    let mut steps = 0;
    for init in [None, Some(wavy), Some(vec![125.0; nt])] {
        let h = dirichlet_exchange_demo(&disc, 6, init.as_deref()).unwrap();
        worst = worst.max(h.max_drift());
        steps = h.traces.len();
    }
    Outcome {
        pass: worst <= 1e-12,
        detail: format!("{steps} half-steps x 3 initial traces, max drift {worst:.2e}"),
    }
}

fn criterion_properties() -> Outcome {
    let mut failures = Vec::new();
    let mut rng = StdRng::seed_from_u64(2024);

    // Mesh invariants on random resolutions and geometries.
    for _ in 0..20 {
        let g = Geometry::new(rng.gen_range(1.0..200.0), rng.gen_range(0.5..80.0), -rng.gen_range(0.5..20.0)).unwrap();
        let mesh = build_layered_mesh(g, rng.gen_range(2..12), rng.gen_range(1..12), rng.gen_range(1..6)).unwrap();
        let v = validate_mesh(&mesh);
        if !v.is_empty() {
            failures.push(format!("mesh: {}", v[0].message));
        }
    }

    // Friction-matrix kernel: equal traces are annihilated, jumps are penalised.
    let disc = reference_disc(8, 6, 2, BodyForce::reference());
    let nt = disc.n_trace();
    let m = interface_friction_matrix(&disc, 1e3).unwrap();
    for _ in 0..20 {
        let t: Vec<f64> = (0..nt).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let same: Vec<f64> = t.iter().chain(&t).copied().collect();
        let y = spmv(&m, &same).unwrap();
        if y.iter().any(|v| v.abs() > 1e-10) {
            failures.push("friction kernel".into());
        }
        let jump: Vec<f64> = t.iter().copied().chain(std::iter::repeat_n(0.0, nt)).collect();
        if m.quadratic_form(&jump, &jump) <= 0.0 {
            failures.push("friction jump not penalised".into());
        }
    }

    // Solver residual certification on assembled systems with random loads.
    for coupling in [InterfaceCoupling::Friction(10.0), InterfaceCoupling::Friction(1e9), InterfaceCoupling::Continuity] {
        let sys = couple_core::fem::assemble_coupled_system(&disc, coupling).unwrap();
        let b: Vec<f64> = (0..sys.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (x, report) = solve(&sys.matrix, &b, DEFAULT_TOL).unwrap();
        let r: Vec<f64> = spmv(&sys.matrix, &x).unwrap().iter().zip(&b).map(|(a, b)| a - b).collect();
        let rel = r.iter().map(|v| v * v).sum::<f64>().sqrt() / b.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(rel <= DEFAULT_TOL && rel == report.relative_residual) {
            failures.push(format!("solver {coupling:?}: {rel:e}"));
        }
    }

    // Norm homogeneity with c = -3.
    let f = solve_monolithic_friction(&disc, 10.0).unwrap();
    let g = f.scaled(-3.0);
    for (name, a, b) in [
        ("l2", velocity_l2_norm(&f, &disc).unwrap(), velocity_l2_norm(&g, &disc).unwrap()),
        ("w", w_norm(&f, &disc).unwrap(), w_norm(&g, &disc).unwrap()),
        ("jump", jump_norm(&f, &disc).unwrap(), jump_norm(&g, &disc).unwrap()),
    ] {
        if (b - 3.0 * a).abs() > 1e-12 * b {
            failures.push(format!("homogeneity {name}"));
        }
    }

    // Config round-trip.
    for _ in 0..20 {
        let mut cfg = RunConfig::default();
        cfg.geometry.length = rng.gen_range(1.0..500.0);
        cfg.geometry.z_minus = -rng.gen_range(0.1..10.0);
        cfg.mesh.nx = rng.gen_range(2..100);
        cfg.physics.f1 = [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)];
        cfg.coupling.alpha = 10f64.powf(rng.gen_range(-3.0..9.0));
        cfg.schwarz.tol = rng.gen_range(1e-9..1e-1);
        if parse_config(&render_config(&cfg)).ok().as_ref() != Some(&cfg) {
            failures.push("config round-trip".into());
        }
    }

    Outcome {
        pass: failures.is_empty(),
        detail: if failures.is_empty() {
            "mesh invariants, friction kernel, residual certification, homogeneity, config round-trip".into()
        } else {
            failures.join("; ")
        },
    }
}

fn main() -> ExitCode {
    let mut log = EnergyLog::default();
    let sweep_disc = reference_disc(4, 10, 2, BodyForce::reference());
    let settings = SweepSettings {
        tol_increment: TOL_INCREMENT,
        max_iter: MAX_ITER,
        jobs: None,
    };
    let sweep = run_alpha_sweep(&sweep_disc, &TABLE_ALPHAS, &settings).expect("alpha sweep");

    let results = [
        ("1 analytic-oracle accuracy", criterion_analytic(&mut log)),
        ("2 energy identity", criterion_energy(&mut log, &sweep)),
        ("3 penalty convergence", criterion_penalty(&sweep)),
        ("4 schwarz correctness", criterion_schwarz(&sweep)),
        ("5 iteration-count trend", criterion_table(&sweep)),
        ("6 stagnation demonstration", criterion_stagnation()),
        ("7 property suites", criterion_properties()),
    ];
    let mut failed = 0;
    for (name, o) in &results {
        println!("{} criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
