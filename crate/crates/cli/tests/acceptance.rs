//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line and then
//! asserts on the same condition. Oracles are closed forms written here,
//! independent of the code under test.
//!
//! Run with `cargo test -p viscoshell-cli --test acceptance -- --nocapture`.

#![allow(clippy::needless_range_loop)]

use nalgebra::{Matrix2, Matrix3, SMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;
use std::time::{Duration, Instant};
use viscoshell::forces::SeparableForces;
use viscoshell::geometry::{
    expansion_residuals, surface_frame, volume_metrics, volume_metrics_at, CylinderPanel, EllipticParaboloid,
    ExpansionQuantity, ExpansionRow, MidsurfaceChart, Point2,
};
use viscoshell::kinematics::{gamma_ab, FieldJet2};
use viscoshell::material::{
    ellipticity_estimate, membrane_tensors, tensor3d_elastic, tensor3d_limits, MaterialParams, Tensor3D,
};
use viscoshell::memory::{conv_step, convolve, normal_closure, shear_closure, TimeGrid};
use viscoshell::mesh::{Mesh2D, Mesh3D, Side};
use viscoshell::solver2d::{assemble_membrane, solve_membrane, AnalyticPhi, MembraneOptions, MembraneSystem};
use viscoshell::solver3d::{assemble_3d, solve_3d};
use viscoshell::Execution;
use viscoshell_cli::convergence::{membrane_reference, run_convergence};
use viscoshell_cli::scenario::Scenario;

fn verdict(criterion: u32, title: &str, passed: bool, detail: &str, elapsed: Duration, budget: Duration) {
    let within = elapsed <= budget;
    let ok = passed && within;
    println!(
        "{} criterion {criterion} ({title}): {detail}; runtime {:.2?} (budget {:?})",
        if ok { "PASS" } else { "FAIL" },
        elapsed,
        budget
    );
    assert!(passed, "criterion {criterion} failed: {detail}");
    assert!(
        within,
        "criterion {criterion} exceeded its runtime budget: {elapsed:?} > {budget:?}"
    );
}

fn sci(v: &[f64], digits: usize) -> String {
    let items: Vec<String> = v.iter().map(|x| format!("{x:.digits$e}")).collect();
    format!("[{}]", items.join(", "))
}

/// Least-squares slope of `log y` against `log x`.
fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn grid_points(y1: [f64; 2], y2: [f64; 2], n: usize) -> Vec<Point2> {
    let mut pts = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let s = (i as f64 + 0.5) / n as f64;
            let t = (j as f64 + 0.5) / n as f64;
            pts.push([y1[0] + s * (y1[1] - y1[0]), y2[0] + t * (y2[1] - y2[0])]);
        }
    }
    pts
}

const X3: [f64; 5] = [-1.0, -0.5, 0.0, 0.5, 1.0];

/// Christoffel symbols `Γ^p_{ij}(ε)` of the unit-radius cylinder in arc-length
/// coordinates. With `s = 1 + ε x3`: `g_1 = s a_1`, `g_3 = a_3`, `∂_1 a_1 = -a_3`,
/// `∂_1 a_3 = a_1`, so the only nonzero symbols are `Γ^3_{11} = -s` and
/// `Γ^1_{13} = Γ^1_{31} = 1/s`.
fn cylinder_christoffel(eps: f64, x3: f64) -> [[[f64; 3]; 3]; 3] {
    let s = 1.0 + eps * x3;
    let mut c = [[[0.0; 3]; 3]; 3];
    c[2][0][0] = -s;
    c[0][0][2] = 1.0 / s;
    c[0][2][0] = 1.0 / s;
    c
}

#[test]
fn criterion_1_geometric_expansion_orders() {
    let start = Instant::now();
    let eps_list = [0.1, 0.05, 0.025];
    let pts = grid_points([0.0, 1.0], [0.0, 1.0], 5);
    let cylinder = CylinderPanel { radius: 1.0 };

    let mut oracle_gap = 0.0f64;
    for &eps in &eps_list {
        for &y in &pts {
            for x3 in X3 {
                let v = volume_metrics(&cylinder, eps, y, x3).unwrap();
                let c = cylinder_christoffel(eps, x3);
                for p in 0..3 {
                    for i in 0..3 {
                        for j in 0..3 {
                            oracle_gap = oracle_gap.max((v.christoffel[p][i][j] - c[p][i][j]).abs());
                        }
                    }
                }
                oracle_gap = oracle_gap.max((v.det - (1.0 + eps * x3).powi(2)).abs());
            }
        }
    }

    let rows = expansion_residuals(&cylinder, &eps_list, &pts).unwrap();
    let of = |rows: &[ExpansionRow], q: ExpansionQuantity| -> (Vec<f64>, f64) {
        let sup: Vec<f64> = rows
            .iter()
            .filter(|r| r.quantity == q)
            .map(|r| r.sup_residual)
            .collect();
        (sup.clone(), loglog_slope(&eps_list, &sup))
    };
    let (in_plane, in_plane_slope) = of(&rows, ExpansionQuantity::InPlaneChristoffel);
    let (normal, _) = of(&rows, ExpansionQuantity::NormalChristoffel);
    let (_, transverse_slope) = of(&rows, ExpansionQuantity::TransverseChristoffel);
    let (det, det_slope) = of(&rows, ExpansionQuantity::MetricDeterminant);

    // On a cylinder the curvature is covariantly constant, so the in-plane
    // expansion holds exactly and only roundoff remains to fit.
    let in_plane_exact = in_plane.iter().all(|&r| r <= 1e-13);
    let cap = EllipticParaboloid { c1: 0.5, c2: 0.5 };
    let cap_rows = expansion_residuals(&cap, &eps_list, &grid_points([-0.5, 0.5], [-0.5, 0.5], 5)).unwrap();
    let (_, cap_slope) = of(&cap_rows, ExpansionQuantity::InPlaneChristoffel);

    // closed-form determinant residual sup |(1 + ε x3)² - 1| = 2ε + ε²
    let det_gap = det
        .iter()
        .zip(&eps_list)
        .map(|(d, e)| (d - (2.0 * e + e * e)).abs())
        .fold(0.0, f64::max);
    let normal_sup = normal.iter().cloned().fold(0.0, f64::max);
    let passed = (in_plane_slope >= 1.9 || in_plane_exact)
        && cap_slope >= 1.9
        && det_slope >= 0.9
        && normal_sup <= 1e-10
        && oracle_gap <= 1e-12
        && det_gap <= 1e-12;
    let detail = format!(
        "in-plane residuals {in_plane_s} (slope {in_plane_slope:.3}, exact: {in_plane_exact}), elliptic cap in-plane slope {cap_slope:.3}, \
         transverse slope {transverse_slope:.3}, determinant slope {det_slope:.3}, normal residual {normal_sup:.1e}, \
         closed-form gap {:.1e}",
        oracle_gap.max(det_gap),
        in_plane_s = sci(&in_plane, 1),
    );
    verdict(
        1,
        "geometric expansion orders",
        passed,
        &detail,
        start.elapsed(),
        Duration::from_secs(5),
    );
}

/// Isotropic tensor with contravariant metric `m`, written out independently.
fn isotropic(m: &Matrix3<f64>, lam: f64, mu: f64) -> [[[[f64; 3]; 3]; 3]; 3] {
    let mut t = [[[[0.0; 3]; 3]; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    t[i][j][k][l] = lam * m[(i, j)] * m[(k, l)] + mu * (m[(i, k)] * m[(j, l)] + m[(i, l)] * m[(j, k)]);
                }
            }
        }
    }
    t
}

/// Exact minimum of `T t·t / |t|²` over symmetric `t`, from the matrix of
/// the form in an orthonormal basis of symmetric tensors.
fn exact_ellipticity(t: &Tensor3D) -> f64 {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let basis: Vec<[[f64; 3]; 3]> = [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)]
        .iter()
        .map(|&(i, j)| {
            let mut e = [[0.0; 3]; 3];
            if i == j {
                e[i][i] = 1.0;
            } else {
                e[i][j] = h;
                e[j][i] = h;
            }
            e
        })
        .collect();
    let m = SMatrix::<f64, 6, 6>::from_fn(|a, b| t.bilinear(&basis[a], &basis[b]));
    m.symmetric_eigenvalues().min()
}

#[test]
fn criterion_2_tensor_limits() {
    let start = Instant::now();
    let p = MaterialParams::new(1.0, 1.0, 1.0, 1.0).unwrap();
    let cylinder = CylinderPanel { radius: 1.0 };
    let eps_list = [0.2, 0.1, 0.05];
    let frames: Vec<_> = grid_points([0.0, 1.0], [0.0, 1.0], 3)
        .into_iter()
        .map(|y| surface_frame(&cylinder, y).unwrap())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(2);

    let (mut dist, mut sampled, mut exact) = (Vec::new(), Vec::new(), Vec::new());
    let (mut oracle_gap, mut below_exact) = (0.0f64, 0.0f64);
    for &eps in &eps_list {
        let (mut d, mut smin, mut emin) = (0.0f64, f64::INFINITY, f64::INFINITY);
        for f in &frames {
            let (limit, _) = tensor3d_limits(&f.metric_inv, &p);
            let limit_oracle = isotropic(&Matrix3::identity(), p.lambda, p.mu);
            for x3 in X3 {
                let a = tensor3d_elastic(&volume_metrics_at(f, eps, x3).unwrap().metric_inv, &p);
                let s = 1.0 + eps * x3;
                let oracle = isotropic(
                    &Matrix3::from_diagonal(&nalgebra::Vector3::new(1.0 / (s * s), 1.0, 1.0)),
                    p.lambda,
                    p.mu,
                );
                for (i, j, k, l) in (0..81).map(|n| (n / 27, n / 9 % 3, n / 3 % 3, n % 3)) {
                    oracle_gap = oracle_gap
                        .max((a.c[i][j][k][l] - oracle[i][j][k][l]).abs())
                        .max((limit.c[i][j][k][l] - limit_oracle[i][j][k][l]).abs());
                }
                d = d.max(a.sup_distance(&limit));
                let e = exact_ellipticity(&a);
                let m = ellipticity_estimate(&a, 1000, &mut rng).unwrap();
                below_exact = below_exact.max(e - m);
                smin = smin.min(m);
                emin = emin.min(e);
            }
        }
        dist.push(d);
        sampled.push(smin);
        exact.push(emin);
    }
    // sup distance attained at x3 = -1 on the 1111 component
    let closed: Vec<f64> = eps_list
        .iter()
        .map(|e| (p.lambda + 2.0 * p.mu) * ((1.0 - e).powi(-4) - 1.0))
        .collect();
    let closed_gap = dist
        .iter()
        .zip(&closed)
        .map(|(a, b)| (a - b).abs() / b)
        .fold(0.0, f64::max);
    let slope = loglog_slope(&eps_list, &dist);
    let (lo, hi) = sampled
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(l, h), &m| (l.min(m), h.max(m)));
    let passed = slope >= 0.9
        && lo > 0.0
        && lo >= 0.5 * hi
        && below_exact <= 1e-12
        && exact.iter().all(|&e| e > 0.0)
        && oracle_gap <= 1e-12
        && closed_gap <= 1e-12;
    let detail = format!(
        "sup distances {dist_s} (slope {slope:.3}), sampled ellipticity minima {sampled:.4?} (constant {lo:.4}), \
         exact minima {exact:.4?}, oracle gap {oracle_gap:.1e}",
        dist_s = sci(&dist, 4),
    );
    verdict(
        2,
        "tensor limits",
        passed,
        &detail,
        start.elapsed(),
        Duration::from_secs(10),
    );
}

fn five_point(v: &[f64], dt: f64) -> Vec<f64> {
    (2..v.len() - 2)
        .map(|n| (v[n - 2] - 8.0 * v[n - 1] + 8.0 * v[n + 1] - v[n + 2]) / (12.0 * dt))
        .collect()
}

#[test]
fn criterion_3_ode_closures() {
    let start = Instant::now();
    let grid = TimeGrid::new(1.0, 2048).unwrap();
    let t = grid.nodes();
    let dt = grid.dt();
    let p = MaterialParams::new(0.5, 1.0, 0.8, 1.2).unwrap();

    // Affine data: the closures integrate their interpolant exactly, so the
    // only error left is that of the difference quotient.
    let f: Vec<f64> = t.iter().map(|t| 1.0 + 2.0 * t).collect();
    let e = shear_closure(&f, &grid, &p).unwrap();
    let de = five_point(&e, dt);
    let shear = (0..de.len())
        .map(|i| (2.0 * p.mu * e[i + 2] + p.rho * de[i] - f[i + 2]).abs())
        .fold(0.0, f64::max)
        / f.iter().fold(0.0f64, |m, x| m.max(x.abs()));

    let f33: Vec<f64> = t.iter().map(|t| 0.5 - t).collect();
    let tr: Vec<f64> = t.iter().map(|t| 0.3 * t).collect();
    let e33 = normal_closure(&f33, &tr, &grid, &p).unwrap();
    let (de, dtr) = (five_point(&e33, dt), five_point(&tr, dt));
    let (mut normal, mut scale) = (0.0f64, 0.0f64);
    for i in 0..de.len() {
        let n = i + 2;
        let r =
            p.lambda * tr[n] + (p.lambda + 2.0 * p.mu) * e33[n] + p.theta * dtr[i] + (p.theta + p.rho) * de[i] - f33[n];
        normal = normal.max(r.abs());
        scale = scale.max(f33[n].abs() + p.lambda * tr[n].abs() + p.theta * dtr[i].abs());
    }
    let normal = normal / scale;

    // Smooth data: the residual is the O(Δt²) interpolation error of the
    // input; reported, not asserted.
    let fs: Vec<f64> = t.iter().map(|t| (3.0 * t).sin() + 1.0).collect();
    let es = shear_closure(&fs, &grid, &p).unwrap();
    let des = five_point(&es, dt);
    let smooth = (0..des.len())
        .map(|i| (2.0 * p.mu * es[i + 2] + p.rho * des[i] - fs[i + 2]).abs())
        .fold(0.0, f64::max)
        / 2.0;

    let ones = vec![1.0; grid.len()];
    let spot_shear = *shear_closure(&ones, &grid, &MaterialParams::new(0.0, 1.0, 1.0, 2.0).unwrap())
        .unwrap()
        .last()
        .unwrap();
    let twos = vec![2.0; grid.len()];
    let zeros = vec![0.0; grid.len()];
    let spot_normal = *normal_closure(&twos, &zeros, &grid, &MaterialParams::new(0.0, 1.0, 1.0, 1.0).unwrap())
        .unwrap()
        .last()
        .unwrap();
    let closed = 1.0 - (-1.0f64).exp();
    let spot_gap = (spot_shear - 0.5 * closed).abs().max((spot_normal - closed).abs());
    // the seven-digit decimals agree to their own rounding
    let rounded_gap = (spot_shear - 0.3160603).abs().max((spot_normal - 0.6321206).abs());

    let passed = shear <= 1e-8 && normal <= 1e-8 && spot_gap <= 1e-9 && rounded_gap <= 5e-8;
    let detail = format!(
        "relative residuals shear {shear:.2e}, normal {normal:.2e} (N = 2048, affine data); smooth-data shear residual {smooth:.2e}; \
         spot values {spot_shear:.9} and {spot_normal:.9}, closed-form gap {spot_gap:.1e}"
    );
    verdict(
        3,
        "ODE closures",
        passed,
        &detail,
        start.elapsed(),
        Duration::from_secs(1),
    );
}

/// `∫_0^1 v^m e^{-z v} dv` for `m ∈ {0, 1}`.
fn moment(m: u32, z: f64) -> f64 {
    if z < 1.0 {
        // Σ (-z)^n / (n! (n + m + 1))
        let mut term = 1.0;
        let mut sum = 0.0;
        for n in 0..40 {
            sum += term / (n + m + 1) as f64;
            term *= -z / (n + 1) as f64;
        }
        sum
    } else if m == 0 {
        (1.0 - (-z).exp()) / z
    } else {
        (1.0 - (-z).exp() * (1.0 + z)) / (z * z)
    }
}

/// `∫_0^{t_n} e^{-k(t_n - s)} f(s) ds` for the piecewise-linear interpolant
/// of `f`, segment by segment.
fn direct_history(f: &[f64], k: f64, dt: f64) -> Vec<f64> {
    let z = k * dt;
    let (m0, m1) = (moment(0, z), moment(1, z));
    (0..f.len())
        .map(|n| {
            (0..n)
                .map(|j| {
                    // u = t_{j+1} - s runs over [0, dt]; f = f_{j+1} - (f_{j+1} - f_j) u / dt
                    let decay = (-k * dt * (n - j - 1) as f64).exp();
                    decay * dt * (f[j + 1] * m0 - (f[j + 1] - f[j]) * m1)
                })
                .sum()
        })
        .collect()
}

#[test]
fn criterion_4_memory_recursion() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let z = 10f64.powf(rng.random_range(-6.0..2.0));
        let dt = 10f64.powf(rng.random_range(-3.0..0.0));
        let k = z / dt;
        let n = rng.random_range(2..=200usize);
        let grid = TimeGrid::new(dt * n as f64, n).unwrap();
        let f: Vec<f64> = (0..=n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let h = convolve(&f, k, &grid).unwrap();
        let d = direct_history(&f, k, grid.dt());
        let scale = d.iter().fold(f64::MIN_POSITIVE, |m, x| m.max(x.abs()));
        worst = h.iter().zip(&d).fold(worst, |w, (a, b)| w.max((a - b).abs() / scale));
    }

    // Restart at the midpoint with the carried state:
    // H(t) = e^{-k(t - t_m)} H(t_m) + ∫_{t_m}^t e^{-k(t - s)} f(s) ds.
    let grid = TimeGrid::new(2.0, 40).unwrap();
    let f: Vec<f64> = grid.nodes().iter().map(|t| (3.0 * t).sin() + 0.5).collect();
    let k = 1.7;
    let whole = convolve(&f, k, &grid).unwrap();
    let half = TimeGrid::new(1.0, 20).unwrap();
    let fresh = convolve(&f[20..], k, &half).unwrap();
    let mut carried = whole[20];
    let mut restart = 0.0f64;
    for (i, n) in (20..=40).enumerate() {
        let semigroup = (-k * half.node(i)).exp() * whole[20] + fresh[i];
        restart = restart
            .max((semigroup - whole[n]).abs())
            .max((carried - whole[n]).abs());
        if n < 40 {
            carried = conv_step(carried, f[n], f[n + 1], k, grid.dt()).unwrap();
        }
    }

    let passed = worst <= 1e-12 && restart <= 1e-12;
    let detail = format!("max relative defect over 100 random (k, dt, N) {worst:.2e}; restart defect {restart:.2e}");
    verdict(
        4,
        "memory recursion",
        passed,
        &detail,
        start.elapsed(),
        Duration::from_secs(1),
    );
}

/// `X(y) = (0.3 y2², 0.2 y2² y1, 0.5 y2² (1 + 0.5 y1))`, vanishing with its
/// first derivatives on `y2 = 0`.
fn shape(y: Point2) -> FieldJet2 {
    let (r, s) = (y[0], y[1]);
    FieldJet2 {
        value: [0.3 * s * s, 0.2 * s * s * r, 0.5 * s * s * (1.0 + 0.5 * r)],
        grad: [
            [0.0, 0.6 * s],
            [0.2 * s * s, 0.4 * s * r],
            [0.25 * s * s, s * (1.0 + 0.5 * r)],
        ],
        hessian3: None,
    }
}

/// `∫_0^t e^{-k(t-s)} s ds = t² ∫_0^1 e^{-kt v} (1 - v) dv`.
fn ramp_memory(k: f64, t: f64) -> f64 {
    t * t * (moment(0, k * t) - moment(1, k * t))
}

fn contract(t: &viscoshell::material::Tensor2D, g: &[[f64; 2]; 2]) -> Matrix2<f64> {
    let v = t.apply(g);
    Matrix2::new(v[0][0], v[0][1], v[1][0], v[1][1])
}

/// `|γ(ξ_h(T)) - γ(ξ*(T))|_{0,ω}` for the exact solution `ξ* = t X`.
fn manufactured_error(n: usize, steps: usize, p: &MaterialParams) -> f64 {
    let chart = CylinderPanel { radius: 1.0 };
    let mesh = Mesh2D::rectangle([0.0, 1.0], [0.0, 1.0], n, n, &[Side::Bottom]).unwrap();
    let sys = assemble_membrane(&mesh, &chart, p, Execution::default()).unwrap();
    let k = p.k();
    let phi = AnalyticPhi(|t: f64, y: Point2| {
        let geom = surface_frame(&chart, y).unwrap();
        let m = membrane_tensors(&geom.metric_inv, p);
        let g = gamma_ab(&shape(y), &geom);
        contract(&m.a, &g) * t + contract(&m.b, &g) - contract(&m.c, &g) * ramp_memory(k, t)
    });
    let grid = TimeGrid::new(1.0, steps).unwrap();
    let xi = solve_membrane(
        &sys,
        &phi,
        &grid,
        &vec![0.0; sys.num_unknowns()],
        &MembraneOptions::default(),
    )
    .unwrap();
    final_gap(&sys, xi.final_field(), &sys.analytic_strains(&chart, shape).unwrap())
}

fn final_gap(sys: &MembraneSystem, field: &[f64], exact: &[f64]) -> f64 {
    let g = sys.strains(&sys.dofs.restrict(field));
    let d: Vec<f64> = g.iter().zip(exact).map(|(a, b)| a - b).collect();
    sys.seminorm_of_strains(&d)
}

#[test]
fn criterion_5_membrane_manufactured_convergence() {
    let start = Instant::now();
    let p = MaterialParams::new(1.0, 1.0, 1.0, 1.0).unwrap();

    let meshes = [2usize, 4, 8, 16];
    let h: Vec<f64> = meshes.iter().map(|&n| 1.0 / n as f64).collect();
    let spatial: Vec<f64> = meshes.iter().map(|&n| manufactured_error(n, 64, &p)).collect();
    let spatial_slope = loglog_slope(&h, &spatial);

    // Self-convergence in Δt under a load that is not linear in time.
    let chart = CylinderPanel { radius: 1.0 };
    let mesh = Mesh2D::rectangle([0.0, 1.0], [0.0, 1.0], 4, 4, &[Side::Bottom]).unwrap();
    let sys = assemble_membrane(&mesh, &chart, &p, Execution::default()).unwrap();
    let phi = AnalyticPhi(|t: f64, y: Point2| {
        let geom = surface_frame(&chart, y).unwrap();
        let g = gamma_ab(&shape(y), &geom);
        contract(&membrane_tensors(&geom.metric_inv, &p).a, &g) * (3.0 * t).sin()
    });
    let solve = |steps: usize| {
        let grid = TimeGrid::new(1.0, steps).unwrap();
        solve_membrane(
            &sys,
            &phi,
            &grid,
            &vec![0.0; sys.num_unknowns()],
            &MembraneOptions::default(),
        )
        .unwrap()
    };
    let reference = solve(4096);
    let exact = sys.strains(&sys.dofs.restrict(reference.final_field()));
    let steps = [8usize, 16, 32, 64];
    let dts: Vec<f64> = steps.iter().map(|&n| 1.0 / n as f64).collect();
    let temporal: Vec<f64> = steps
        .iter()
        .map(|&n| final_gap(&sys, solve(n).final_field(), &exact))
        .collect();
    let temporal_slope = loglog_slope(&dts, &temporal);

    let passed = spatial_slope >= 1.8 && temporal_slope >= 0.9;
    let detail = format!(
        "spatial errors {spatial_s} (P2, h = 1/2..1/16, slope {spatial_slope:.3}); temporal errors {temporal_s} \
         (dt = 1/8..1/64, slope {temporal_slope:.3})",
        spatial_s = sci(&spatial, 3),
        temporal_s = sci(&temporal, 3),
    );
    verdict(
        5,
        "2D manufactured convergence",
        passed,
        &detail,
        start.elapsed(),
        Duration::from_secs(120),
    );
}

#[test]
fn criterion_6_dissipation_identity() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut passed = true;
    let mut parts = Vec::new();
    for name in ["cylinder-panel", "elliptic-cap", "hypar"] {
        let sc = Scenario::builtin(name).unwrap();
        let base = sc.mesh2d().unwrap();
        let mesh = sc.mesh3d(&base).unwrap();
        let sys = assemble_3d(&mesh, sc.chart(), 0.1, &sc.params().unwrap(), Execution::default()).unwrap();
        let u0: Vec<f64> = (0..sys.num_unknowns()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let h = solve_3d(
            &sys,
            &SeparableForces::zero(),
            &TimeGrid::new(1.0, 20).unwrap(),
            Some(&u0),
        )
        .unwrap();
        let energy: Vec<f64> = h
            .fields
            .iter()
            .map(|f| 0.5 * sys.k.quad_form(&sys.dofs.restrict(f)))
            .collect();
        let ok = energy.windows(2).all(|w| w[1] <= w[0]);
        passed &= ok;
        parts.push(format!(
            "{name}: {} steps non-increasing {ok}, E0 {:.3e} -> E20 {:.3e}",
            energy.len() - 1,
            energy[0],
            energy[20]
        ));
    }
    verdict(
        6,
        "3D dissipation identity",
        passed,
        &parts.join("; "),
        start.elapsed(),
        Duration::from_secs(60),
    );
}

#[test]
fn criterion_7_thickness_convergence() {
    let start = Instant::now();
    let sc = Scenario::builtin("cylinder-panel").unwrap();
    assert!(sc.first_kind && sc.mesh.n <= 24 && sc.mesh.layers <= 4);
    assert_eq!(sc.eps, vec![0.2, 0.1, 0.05]);
    let report = run_convergence(&sc, Execution::default()).unwrap();
    let dist: Vec<f64> = report.rows.iter().map(|r| r.distance).collect();
    let d3: Vec<f64> = report.rows.iter().map(|r| r.d3_norm).collect();
    let ratios: Vec<f64> = dist.windows(2).map(|w| w[0] / w[1]).collect();

    // The membrane reference against the exact limit t X: its own error
    // must sit below the distances being measured.
    let reference = membrane_reference(&sc, &sc.mesh2d().unwrap(), Execution::default()).unwrap();
    let exact = sc.exact_limit().unwrap();
    let grid = sc.grid();
    let gaps: Vec<f64> = (0..grid.len())
        .map(|n| {
            let t = grid.node(n);
            let g = reference
                .system
                .analytic_strains(&*sc.chart(), |y| exact(t, y))
                .unwrap();
            final_gap(&reference.system, &reference.history.fields[n], &g)
        })
        .collect();
    let reference_error = viscoshell::kinematics::space_time_seminorm(&gaps, &grid);

    let passed = dist.windows(2).all(|w| w[1] < w[0])
        && ratios.iter().all(|&r| r >= 1.2)
        && d3.windows(2).all(|w| w[1] < w[0])
        && reference_error < dist[dist.len() - 1];
    let k0: Vec<f64> = report.rows.iter().map(|r| r.k0).collect();
    let detail = format!(
        "distances {dist_s} (ratios {ratios:.3?}), |d3 u| {d3_s}, K0 {k0:.3?}, membrane reference error {reference_error:.2e}",
        dist_s = sci(&dist, 4),
        d3_s = sci(&d3, 4),
    );

    // Generic smooth load: reported only.
    let smooth = run_convergence(&Scenario::builtin("cylinder-smooth").unwrap(), Execution::default()).unwrap();
    let sr: Vec<String> = smooth
        .ratios()
        .iter()
        .map(|r| format!("{:.3}", r.distance_ratio))
        .collect();
    println!(
        "info criterion 7: cylinder-smooth distance ratios [{}] (diagnostic, not asserted)",
        sr.join(", ")
    );
    verdict(
        7,
        "thickness convergence to the membrane limit",
        passed,
        &detail,
        start.elapsed(),
        Duration::from_secs(900),
    );
}

/// Smooth field vanishing on `y2 = 0`; every fourth field has no `x3` dependence.
fn random_field(rng: &mut ChaCha8Rng, index: usize) -> impl Fn([f64; 3]) -> [f64; 3] {
    let c: [[f64; 6]; 3] = std::array::from_fn(|_| std::array::from_fn(|_| rng.random_range(-1.0..1.0)));
    let thin = index % 4 == 0;
    move |p: [f64; 3]| {
        let (y1, y2) = (p[0], p[1]);
        let x3 = if thin { 0.0 } else { p[2] };
        let basis = [1.0, y1, y2 * y1, x3, y1 * x3, x3 * x3];
        c.map(|row| y2 * row.iter().zip(&basis).map(|(a, b)| a * b).sum::<f64>())
    }
}

#[test]
fn criterion_8_korn_bound() {
    let start = Instant::now();
    let p = MaterialParams::new(1.0, 1.0, 1.0, 1.0).unwrap();
    let base = Mesh2D::rectangle([0.0, 1.0], [0.0, 1.0], 4, 4, &[Side::Bottom]).unwrap();
    let mesh = Mesh3D::extrude(&base, 2, 2).unwrap();
    let chart: Arc<dyn MidsurfaceChart> = Arc::new(CylinderPanel { radius: 1.0 });
    let eps_list = [0.2, 0.1, 0.05];
    let mut per_eps = Vec::new();
    for &eps in &eps_list {
        let sys = assemble_3d(&mesh, chart.clone(), eps, &p, Execution::default()).unwrap();
        let (h1, e) = sys.korn_grams().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut worst = 0.0f64;
        for i in 0..100 {
            let f = random_field(&mut rng, i);
            let full: Vec<f64> = (0..mesh.num_nodes()).flat_map(|n| f(mesh.node_coords(n))).collect();
            let v = sys.dofs.restrict(&full);
            // ‖v‖_1 / ((1/ε) ‖e(ε; v)‖)
            worst = worst.max(eps * (h1.quad_form(&v) / e.quad_form(&v)).sqrt());
        }
        per_eps.push(worst);
    }
    let c = per_eps[0];
    let passed = c.is_finite() && c > 0.0 && per_eps.iter().all(|&m| m <= c);
    let detail = format!("max ratio per eps {per_eps:.4?}; constant C = {c:.4} fixed at eps = 0.2 bounds every eps");
    verdict(
        8,
        "Korn-type bound",
        passed,
        &detail,
        start.elapsed(),
        Duration::from_secs(60),
    );
}
