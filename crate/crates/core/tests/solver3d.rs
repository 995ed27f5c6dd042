#![allow(clippy::needless_range_loop)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;
use viscoshell::fem::shape::p2_triangle;
use viscoshell::fem::{gauss_legendre, TriangleRule};
use viscoshell::forces::{SeparableForces, TimeProfile};
use viscoshell::geometry::*;
use viscoshell::material::{tensor3d_elastic, MaterialParams};
use viscoshell::memory::{shear_closure, TimeGrid};
use viscoshell::mesh::{Mesh2D, Mesh3D, Side};
use viscoshell::solver3d::*;
use viscoshell::{Error, Execution};

fn params() -> MaterialParams {
    MaterialParams::new(0.5, 1.5, 2.0, 0.7).unwrap()
}

fn single_prism() -> Mesh3D {
    let nodes = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.5, 0.0], [0.5, 0.5], [0.0, 0.5]];
    let base = Mesh2D::new(nodes, vec![[0, 1, 2, 3, 4, 5]], vec![]).unwrap();
    Mesh3D::extrude(&base, 1, 1).unwrap()
}

fn cylinder_mesh(n: usize, layers: usize, order: usize) -> Mesh3D {
    let base = Mesh2D::rectangle([0.0, 1.0], [0.0, 1.0], n, n, &[Side::Bottom]).unwrap();
    Mesh3D::extrude(&base, layers, order).unwrap()
}

fn cylinder() -> Arc<dyn MidsurfaceChart> {
    Arc::new(CylinderPanel { radius: 1.0 })
}

fn random_vec(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Shape values and Cartesian gradients of the P2 × P1 prism on the reference
/// triangle, with `∂_3` already divided by `eps`. Node order is level-major.
fn prism_basis(xi: [f64; 2], z: f64, eps: f64) -> (Vec<f64>, Vec<[f64; 3]>) {
    let (n, d) = p2_triangle(xi);
    let l = [0.5 * (1.0 - z), 0.5 * (1.0 + z)];
    let dl = [-0.5, 0.5];
    let mut shape = Vec::new();
    let mut grad = Vec::new();
    for k in 0..2 {
        for a in 0..6 {
            shape.push(n[a] * l[k]);
            grad.push([d[a][0] * l[k], d[a][1] * l[k], n[a] * dl[k] / eps]);
        }
    }
    (shape, grad)
}

/// Cartesian symmetric gradient of the basis field `N_k e_c`.
fn cartesian_strain(grad: &[f64; 3], c: usize) -> [[f64; 3]; 3] {
    let mut e = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let mut v = 0.0;
            if c == i {
                v += 0.5 * grad[j];
            }
            if c == j {
                v += 0.5 * grad[i];
            }
            e[i][j] = v;
        }
    }
    e
}

/// `∫ (lam tr u tr v + 2 mu u:v) dx` over the single flat prism.
fn dense_prism_oracle(eps: f64, lam: f64, mu: f64) -> DMatrix<f64> {
    let rule = TriangleRule::collapsed_gauss(4);
    let (zs, zw) = gauss_legendre(3);
    let mut k = DMatrix::zeros(36, 36);
    for (xi, w) in rule.points.iter().zip(&rule.weights) {
        for (z, wz) in zs.iter().zip(&zw) {
            let (_, grad) = prism_basis(*xi, *z, eps);
            let strains: Vec<[[f64; 3]; 3]> = (0..36).map(|p| cartesian_strain(&grad[p / 3], p % 3)).collect();
            for p in 0..36 {
                for q in 0..36 {
                    let (u, v) = (&strains[p], &strains[q]);
                    let tr = (u[0][0] + u[1][1] + u[2][2]) * (v[0][0] + v[1][1] + v[2][2]);
                    let mut dd = 0.0;
                    for i in 0..3 {
                        for j in 0..3 {
                            dd += u[i][j] * v[i][j];
                        }
                    }
                    k[(p, q)] += w * wz * (lam * tr + 2.0 * mu * dd);
                }
            }
        }
    }
    k
}

#[test]
fn flat_prism_matches_cartesian_oracle() {
    let p = params();
    let mesh = single_prism();
    let sys = assemble_3d(&mesh, Arc::new(Plane), 0.5, &p, Execution::Sequential).unwrap();
    assert_eq!(sys.num_unknowns(), 36);
    assert_eq!(mesh.element_nodes(0), (0..12).collect::<Vec<_>>());
    let k = sys.k.to_dense();
    let c = sys.c.to_dense();
    let k_ref = dense_prism_oracle(0.5, p.lambda, p.mu);
    let c_ref = dense_prism_oracle(0.5, p.theta, 0.5 * p.rho);
    assert!(
        (&k - &k_ref).amax() <= 1e-12 * k_ref.amax(),
        "K defect {}",
        (&k - &k_ref).amax()
    );
    assert!(
        (&c - &c_ref).amax() <= 1e-12 * c_ref.amax(),
        "C defect {}",
        (&c - &c_ref).amax()
    );
}

#[test]
fn stiffness_psd_and_viscosity_spd() {
    let sys = assemble_3d(&cylinder_mesh(3, 2, 1), cylinder(), 0.1, &params(), Execution::Parallel).unwrap();
    assert!(sys.k.symmetry_defect() <= 1e-12 * sys.k.norm_inf());
    assert!(sys.c.symmetry_defect() <= 1e-12 * sys.c.norm_inf());
    sys.verify_viscous_spd().unwrap();
    for seed in 0..20 {
        let x = random_vec(sys.num_unknowns(), seed);
        let xx = dot(&x, &x);
        assert!(sys.k.quad_form(&x) >= -1e-12 * sys.k.norm_inf() * xx);
        assert!(sys.c.quad_form(&x) > 0.0);
    }
}

#[test]
fn stiffness_norm_grows_with_inverse_thickness() {
    let mesh = cylinder_mesh(2, 2, 1);
    let norm = |eps: f64| {
        assemble_3d(&mesh, cylinder(), eps, &params(), Execution::Parallel)
            .unwrap()
            .k
            .norm_inf()
    };
    for eps in [0.2, 0.1] {
        let ratio = norm(eps / 2.0) / norm(eps);
        assert!((2.0..=6.0).contains(&ratio), "eps {eps}: ratio {ratio}");
    }
}

#[test]
fn invalid_thickness_parameters() {
    let mesh = cylinder_mesh(1, 1, 1);
    assert!(matches!(
        assemble_3d(&mesh, cylinder(), 0.0, &params(), Execution::Sequential),
        Err(Error::InvalidEpsilon(_))
    ));
    // x3 = -1 at eps = 1.5 puts the inner surface past the axis of a unit cylinder
    assert!(matches!(
        assemble_3d(&mesh, cylinder(), 1.5, &params(), Execution::Sequential),
        Err(Error::ThicknessTooLarge { .. })
    ));
}

#[test]
fn zero_forces_give_zero_load() {
    let sys = assemble_3d(&cylinder_mesh(2, 2, 1), cylinder(), 0.1, &params(), Execution::Parallel).unwrap();
    let l = assemble_admissible_rhs(&sys, &SeparableForces::zero(), 0.3).unwrap();
    assert!(l.iter().all(|&v| v == 0.0));
}

#[test]
fn stress_of_a_field_loads_like_the_stiffness() {
    let p = params();
    for order in [1, 2] {
        let sys = assemble_3d(&cylinder_mesh(2, 2, order), cylinder(), 0.2, &p, Execution::Parallel).unwrap();
        let w = random_vec(sys.num_unknowns(), 7);
        let full = sys.dofs.expand(&w);
        let load = sys
            .assemble_rhs_with(|ev, qp| tensor3d_elastic(&qp.geom.metric_inv, &p).apply(&qp.strain(&ev.gather(&full))))
            .unwrap();
        let kw = sys.k.mul_vec(&w);
        let defect: Vec<f64> = load.iter().zip(&kw).map(|(a, b)| a - b).collect();
        assert!(
            max_abs(&defect) <= 1e-12 * max_abs(&kw),
            "order {order}: {}",
            max_abs(&defect)
        );
    }
}

#[test]
fn transverse_normal_load_on_flat_prism() {
    let eps = 0.25;
    let sys = assemble_3d(&single_prism(), Arc::new(Plane), eps, &params(), Execution::Sequential).unwrap();
    let mut f = [[0.0; 3]; 3];
    f[2][2] = 1.0;
    let forces = SeparableForces::new(TimeProfile::Constant, move |_, _| f);
    let load = assemble_admissible_rhs(&sys, &forces, 0.0).unwrap();
    // ∫ ε⁻¹ ∂_3 (N_a ℓ_k) dx = ±ε⁻¹ ∫_T N_a: vertices 0, midpoints a third of the area 1/2
    for (dof, v) in load.iter().enumerate() {
        let (node, comp) = (dof / 3, dof % 3);
        let expected = if comp == 2 && node % 6 >= 3 {
            let sign = if node < 6 { -1.0 } else { 1.0 };
            sign / (6.0 * eps)
        } else {
            0.0
        };
        assert!((v - expected).abs() <= 1e-14, "dof {dof}: {v} vs {expected}");
    }
}

#[test]
fn zero_data_stay_at_rest() {
    let sys = assemble_3d(&cylinder_mesh(2, 2, 1), cylinder(), 0.1, &params(), Execution::Parallel).unwrap();
    let h = solve_3d(&sys, &SeparableForces::zero(), &TimeGrid::new(1.0, 5).unwrap(), None).unwrap();
    assert_eq!(h.fields.len(), 6);
    assert!(h.fields.iter().all(|f| f.iter().all(|&v| v == 0.0)));
    let bad = solve_3d(
        &sys,
        &SeparableForces::zero(),
        &TimeGrid::new(1.0, 5).unwrap(),
        Some(&[1.0]),
    );
    assert!(matches!(bad, Err(Error::DimensionMismatch { .. })));
}

#[test]
fn free_decay_dissipates_every_step() {
    for (chart, side) in [
        (cylinder(), Side::Bottom),
        (
            Arc::new(HyperbolicParaboloid { c: 0.5 }) as Arc<dyn MidsurfaceChart>,
            Side::Left,
        ),
    ] {
        let base = Mesh2D::rectangle([0.0, 1.0], [0.0, 1.0], 2, 2, &[side]).unwrap();
        let mesh = Mesh3D::extrude(&base, 2, 1).unwrap();
        let sys = assemble_3d(&mesh, chart, 0.1, &params(), Execution::Parallel).unwrap();
        let u0 = random_vec(sys.num_unknowns(), 3);
        let h = solve_3d(
            &sys,
            &SeparableForces::zero(),
            &TimeGrid::new(2.0, 20).unwrap(),
            Some(&u0),
        )
        .unwrap();
        let energies: Vec<f64> = h.fields.iter().map(|f| sys.energy(&sys.dofs.restrict(f))).collect();
        for w in energies.windows(2) {
            assert!(w[1] <= w[0], "{} > {}", w[1], w[0]);
        }
        assert!(energies[20] < energies[0]);
    }
}

#[test]
fn constant_load_approaches_static_solution() {
    let sys = assemble_3d(&cylinder_mesh(2, 2, 1), cylinder(), 0.2, &params(), Execution::Parallel).unwrap();
    let forces = SeparableForces::smooth(1.0, TimeProfile::Constant);
    let load = assemble_admissible_rhs(&sys, &forces, 0.0).unwrap();
    let k = sys.k.to_dense();
    let u_static = k.clone().cholesky().unwrap().solve(&DVector::from_vec(load));
    let h = solve_3d(&sys, &forces, &TimeGrid::new(40.0, 80).unwrap(), None).unwrap();
    // backward Euler contracts every generalized eigencomponent, so the
    // K energy norm of the error decreases monotonically
    let dist: Vec<f64> = h
        .fields
        .iter()
        .map(|f| {
            let e = DVector::from_vec(sys.dofs.restrict(f)) - &u_static;
            (e.transpose() * &k * &e)[(0, 0)].sqrt()
        })
        .collect();
    for w in dist.windows(2) {
        assert!(w[1] < w[0]);
    }
    assert!(dist[80] <= 1e-6 * dist[0], "{} vs {}", dist[80], dist[0]);
}

#[test]
fn stress_recovery_examples() {
    let p = params();
    let sys = assemble_3d(&single_prism(), Arc::new(Plane), 0.5, &p, Execution::Sequential).unwrap();
    let grid = TimeGrid::new(1.0, 2).unwrap();
    let n = sys.dofs.num_full();
    let zero = DisplacementHistory {
        grid,
        fields: vec![vec![0.0; n]; 3],
    };
    for step in stress_recovery(&sys, &zero).unwrap() {
        assert!(step.iter().all(|s| s.iter().flatten().all(|&v| v == 0.0)));
    }
    // uniaxial stretch u_1 = s y1, reached after one step and then held
    let s = 0.3;
    let mut u = vec![0.0; n];
    for node in 0..sys.mesh.num_nodes() {
        u[3 * node] = s * sys.mesh.node_coords(node)[0];
    }
    let h = DisplacementHistory {
        grid,
        fields: vec![vec![0.0; n], u.clone(), u],
    };
    let sigma = stress_recovery(&sys, &h).unwrap();
    let dt = 0.5;
    let moving = [
        (p.lambda + 2.0 * p.mu) * s + (p.theta + p.rho) * s / dt,
        p.lambda * s + p.theta * s / dt,
    ];
    let held = [(p.lambda + 2.0 * p.mu) * s, p.lambda * s];
    for (step, [axial, lateral]) in [(1, moving), (2, held)] {
        for sg in &sigma[step] {
            let expected = [[axial, 0.0, 0.0], [0.0, lateral, 0.0], [0.0, 0.0, lateral]];
            for i in 0..3 {
                for j in 0..3 {
                    assert!(
                        (sg[i][j] - expected[i][j]).abs() <= 1e-12,
                        "step {step} ({i},{j}): {}",
                        sg[i][j]
                    );
                }
            }
        }
    }
}

#[test]
fn static_stress_has_no_viscous_part() {
    let p = params();
    let sys = assemble_3d(&cylinder_mesh(2, 2, 2), cylinder(), 0.1, &p, Execution::Parallel).unwrap();
    let u = sys.dofs.expand(&random_vec(sys.num_unknowns(), 11));
    let h = DisplacementHistory {
        grid: TimeGrid::new(1.0, 1).unwrap(),
        fields: vec![u.clone(), u.clone()],
    };
    let sigma = stress_recovery(&sys, &h).unwrap();
    let expected = sys
        .map_quadrature(|ev, qp| tensor3d_elastic(&qp.geom.metric_inv, &p).apply(&qp.strain(&ev.gather(&u))))
        .unwrap();
    for (a, b) in sigma[1].iter().zip(&expected) {
        for i in 0..3 {
            for j in 0..3 {
                assert!((a[i][j] - b[i][j]).abs() <= 1e-10 * (1.0 + b[i][j].abs()));
                assert_eq!(a[i][j], a[j][i]);
            }
        }
    }
}

fn nodal_history(mesh: &Mesh3D, f: impl Fn([f64; 3]) -> [f64; 3]) -> DisplacementHistory {
    let field: Vec<f64> = (0..mesh.num_nodes()).flat_map(|n| f(mesh.node_coords(n))).collect();
    DisplacementHistory {
        grid: TimeGrid::new(1.0, 1).unwrap(),
        fields: vec![field.clone(), field],
    }
}

#[test]
fn transversal_average_examples() {
    let base = Mesh2D::rectangle([0.0, 1.0], [0.0, 1.0], 2, 2, &[Side::Bottom]).unwrap();
    let v = [0.4, -1.2, 2.5];
    for (layers, order) in [(2, 1), (4, 1), (2, 2)] {
        let mesh = Mesh3D::extrude(&base, layers, order).unwrap();
        let trace = |p: [f64; 3]| [v[0] + p[0], v[1] * p[1], v[2]];
        let avg = average_to_2d(&nodal_history(&mesh, trace), &mesh, &base).unwrap();
        for (n, p) in base.nodes().iter().enumerate() {
            let expected = trace([p[0], p[1], 0.0]);
            for c in 0..3 {
                assert!((avg.fields[1][3 * n + c] - expected[c]).abs() <= 1e-14);
            }
        }
        let odd = average_to_2d(&nodal_history(&mesh, |p| v.map(|x| x * p[2])), &mesh, &base).unwrap();
        assert!(max_abs(&odd.fields[0]) <= 1e-15);
        if order == 2 {
            let sq = average_to_2d(&nodal_history(&mesh, |p| v.map(|x| x * p[2] * p[2])), &mesh, &base).unwrap();
            for n in 0..base.num_nodes() {
                for c in 0..3 {
                    assert!((sq.fields[0][3 * n + c] - v[c] / 3.0).abs() <= 1e-14);
                }
            }
        }
    }
    let other = Mesh2D::rectangle([0.0, 1.0], [0.0, 1.0], 3, 2, &[Side::Bottom]).unwrap();
    let mesh = Mesh3D::extrude(&base, 2, 1).unwrap();
    assert!(matches!(
        average_to_2d(&nodal_history(&mesh, |_| v), &mesh, &other),
        Err(Error::IncompatibleMesh(_))
    ));
}

struct SweepRow {
    d3: f64,
    shear_discrepancy: f64,
}

/// Solves the first-kind cylinder scenario under the smooth preset and
/// compares the transverse shear strains at interior quadrature points with
/// the limit closure driven by `a_{ασ} F^{σ3}`.
fn sweep_row(eps: f64) -> SweepRow {
    let p = params();
    let mesh = cylinder_mesh(4, 4, 1);
    let chart = cylinder();
    let sys = assemble_3d(&mesh, chart.clone(), eps, &p, Execution::Parallel).unwrap();
    let forces = SeparableForces::smooth(1.0, TimeProfile::Constant);
    let grid = TimeGrid::new(1.0, 10).unwrap();
    let h = solve_3d(&sys, &forces, &grid, None).unwrap();
    let d3 = grid.trapezoid(&d3_norms(&sys, &h).unwrap());
    let strains: Vec<Vec<[[f64; 3]; 3]>> = h.fields.iter().map(|f| sys.strains(f).unwrap()).collect();
    let points = sys.map_quadrature(|_, qp| (qp.y, qp.x3)).unwrap();
    let (mut worst, mut scale) = (0.0f64, 0.0f64);
    for (q, (y, x3)) in points.iter().enumerate() {
        if y[0] < 0.25 || y[0] > 0.75 || y[1] < 0.25 || y[1] > 0.75 {
            continue;
        }
        let a = surface_frame(&*chart, *y).unwrap().metric;
        for al in 0..2 {
            let forcing: Vec<f64> = grid
                .nodes()
                .iter()
                .map(|&t| {
                    let f = forces.field.as_ref()(*y, *x3);
                    let s = forces.profile.eval(t);
                    s * (a[(al, 0)] * f[0][2] + a[(al, 1)] * f[1][2])
                })
                .collect();
            let predicted = shear_closure(&forcing, &grid, &p).unwrap();
            for (n, pred) in predicted.iter().enumerate() {
                worst = worst.max((strains[n][q][al][2] - pred).abs());
                scale = scale.max(pred.abs());
            }
        }
    }
    SweepRow {
        d3,
        shear_discrepancy: worst / scale,
    }
}

#[test]
fn thickness_sweep_decays() {
    let rows: Vec<SweepRow> = [0.2, 0.1, 0.05].into_iter().map(sweep_row).collect();
    for (r, eps) in rows.iter().zip([0.2, 0.1, 0.05]) {
        eprintln!(
            "eps {eps}: d3 {:.3e}, shear discrepancy {:.3e}",
            r.d3, r.shear_discrepancy
        );
    }
    assert!(rows[1].d3 < rows[0].d3 && rows[2].d3 < rows[1].d3);
    assert!(rows[2].shear_discrepancy < rows[0].shear_discrepancy);
}

#[test]
fn sequential_and_parallel_agree_bitwise() {
    let mesh = cylinder_mesh(3, 2, 2);
    let seq = assemble_3d(&mesh, cylinder(), 0.1, &params(), Execution::Sequential).unwrap();
    let par = in_pool(|| assemble_3d(&mesh, cylinder(), 0.1, &params(), Execution::Parallel).unwrap());
    assert_eq!(seq.k.to_dense(), par.k.to_dense());
    assert_eq!(seq.c.to_dense(), par.c.to_dense());
    let forces = SeparableForces::smooth(1.0, TimeProfile::Ramp { t_ramp: 0.5 });
    let grid = TimeGrid::new(1.0, 4).unwrap();
    let hs = solve_3d(&seq, &forces, &grid, None).unwrap();
    let hp = in_pool(|| solve_3d(&par, &forces, &grid, None).unwrap());
    assert_eq!(hs.fields, hp.fields);
}

/// Runs `f` on a four-thread pool so the parallel path fans out even on a
/// single-core host.
#[cfg(feature = "parallel")]
fn in_pool<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap()
        .install(f)
}

#[cfg(not(feature = "parallel"))]
fn in_pool<R>(f: impl FnOnce() -> R) -> R {
    f()
}
