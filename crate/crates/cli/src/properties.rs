//! Property suites: each module's invariants checked with fixed seeds.

use crate::convergence::phi_table;
use crate::error::{HarnessError, Result};
use crate::scenario::Scenario;
use nalgebra::{Matrix2, Matrix3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use viscoshell::fem::shape::p2_triangle;
use viscoshell::fem::{gauss_legendre, TriangleRule};
use viscoshell::forces::{SeparableForces, TimeProfile};
use viscoshell::geometry::*;
use viscoshell::kinematics::{gamma_ab, scaled_strains, transversal_average, FieldJet2, FieldJet3};
use viscoshell::material::{
    ellipticity_estimate, tensor3d_elastic, tensor3d_limits, tensor3d_viscous, MaterialParams, Tensor3D,
};
use viscoshell::memory::{conv_step, convolve, normal_closure, shear_closure, TimeGrid};
use viscoshell::mesh::{Mesh2D, Mesh3D, Side};
use viscoshell::solver2d::{
    assemble_membrane, kernel_diagnostic, solve_membrane, KernelKind, MembraneLoad, MembraneOptions, ScaledLoad,
    ZeroLoad,
};
use viscoshell::solver3d::{assemble_3d, average_to_2d, d3_norms, solve_3d, ShellSystem3D};
use viscoshell::Execution;

pub const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Geometry,
    Material,
    Kinematics,
    Memory,
    Solver2d,
    Solver3d,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Geometry,
        Suite::Material,
        Suite::Kinematics,
        Suite::Memory,
        Suite::Solver2d,
        Suite::Solver3d,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Geometry => "geometry",
            Suite::Material => "material",
            Suite::Kinematics => "kinematics",
            Suite::Memory => "memory",
            Suite::Solver2d => "solver2d",
            Suite::Solver3d => "solver3d",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Suite::ALL.iter().map(|x| x.name()).collect();
            HarnessError::Usage(format!("unknown suite `{s}`; expected one of {}", names.join(", ")))
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyReport {
    pub suite: Suite,
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl PropertyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// One `PASS`/`FAIL` line per check.
    pub fn to_text(&self) -> String {
        let mut s = format!("suite {} (seed {})\n", self.suite, self.seed);
        for c in &self.checks {
            s.push_str(&format!(
                "{} {}: {}\n",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.detail
            ));
        }
        s
    }
}

pub fn run_properties(suite: Suite, seed: u64, exec: Execution) -> Result<PropertyReport> {
    let checks = match suite {
        Suite::Geometry => geometry_suite()?,
        Suite::Material => material_suite(seed)?,
        Suite::Kinematics => kinematics_suite(seed, exec)?,
        Suite::Memory => memory_suite(seed)?,
        Suite::Solver2d => solver2d_suite(seed, exec)?,
        Suite::Solver3d => solver3d_suite(seed, exec)?,
    };
    Ok(PropertyReport { suite, seed, checks })
}

fn sample_points(y1: [f64; 2], y2: [f64; 2], n: usize) -> Vec<Point2> {
    let mut pts = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let s = (i as f64 + 0.5) / n as f64;
            let t = (j as f64 + 0.5) / n as f64;
            pts.push([y1[0] + s * (y1[1] - y1[0]), y2[0] + t * (y2[1] - y2[0])]);
        }
    }
    pts
}

fn charts() -> Vec<(&'static str, Arc<dyn MidsurfaceChart>)> {
    vec![
        ("plane", Arc::new(Plane)),
        ("cylinder", Arc::new(CylinderPanel { radius: 1.0 })),
        ("elliptic-cap", Arc::new(EllipticParaboloid { c1: 0.5, c2: 0.5 })),
        ("hypar", Arc::new(HyperbolicParaboloid { c: 0.5 })),
    ]
}

const SWEEP: [f64; 3] = [0.1, 0.05, 0.025];

fn sup_of(rows: &[ExpansionRow], q: ExpansionQuantity) -> Vec<f64> {
    rows.iter()
        .filter(|r| r.quantity == q)
        .map(|r| r.sup_residual)
        .collect()
}

fn slope_of(rows: &[ExpansionRow], q: ExpansionQuantity) -> f64 {
    rows.iter()
        .find(|r| r.quantity == q)
        .map_or(f64::NAN, |r| r.fitted_slope)
}

fn geometry_suite() -> Result<Vec<Check>> {
    let pts = sample_points([0.0, 1.0], [0.0, 1.0], 5);
    let mut out = Vec::new();

    let flat = expansion_residuals(&Plane, &SWEEP, &pts)?;
    let worst = flat.iter().map(|r| r.sup_residual).fold(0.0, f64::max);
    out.push(check(
        "flat chart expansions vanish",
        worst == 0.0,
        format!("max residual {worst:e}"),
    ));

    let (mut inverse, mut asym, mut zeros) = (0.0f64, 0.0f64, 0.0f64);
    let mut min_det = f64::INFINITY;
    for (_, chart) in charts() {
        for &y in &pts {
            let s = surface_frame(&*chart, y)?;
            inverse = inverse.max((s.metric_inv * s.metric - Matrix2::identity()).abs().max());
            for &eps in &[0.2, 0.1, 0.05] {
                for x3 in [-1.0, 0.0, 1.0] {
                    let v = volume_metrics_at(&s, eps, x3)?;
                    min_det = min_det.min(v.det);
                    for p in 0..3 {
                        for i in 0..3 {
                            for j in 0..3 {
                                asym = asym.max((v.christoffel[p][i][j] - v.christoffel[p][j][i]).abs());
                            }
                        }
                        zeros = zeros.max(v.christoffel[p][2][2].abs());
                    }
                    for al in 0..2 {
                        zeros = zeros.max(v.christoffel[2][al][2].abs());
                    }
                }
            }
        }
    }
    out.push(check(
        "contravariant metric inverts the metric",
        inverse <= 1e-12,
        format!("max defect {inverse:e}"),
    ));
    out.push(check(
        "Christoffel symbols symmetric",
        asym == 0.0,
        format!("max asymmetry {asym:e}"),
    ));
    out.push(check(
        "exact transverse zeros",
        zeros == 0.0,
        format!("max value {zeros:e}"),
    ));
    out.push(check(
        "metric determinant positive",
        min_det > 0.0,
        format!("min g(eps) {min_det:e}"),
    ));

    let cyl = expansion_residuals(&CylinderPanel { radius: 1.0 }, &SWEEP, &pts)?;
    let normal = sup_of(&cyl, ExpansionQuantity::NormalChristoffel)
        .into_iter()
        .fold(0.0, f64::max);
    out.push(check(
        "cylinder normal Christoffel exact",
        normal <= 1e-10,
        format!("max residual {normal:e}"),
    ));
    let tr = slope_of(&cyl, ExpansionQuantity::TransverseChristoffel);
    out.push(check(
        "cylinder transverse Christoffel slope >= 1.9",
        tr >= 1.9,
        format!("slope {tr:.3}"),
    ));
    let det = slope_of(&cyl, ExpansionQuantity::MetricDeterminant);
    out.push(check(
        "cylinder determinant slope >= 0.9",
        det >= 0.9,
        format!("slope {det:.3}"),
    ));
    let cap = expansion_residuals(&EllipticParaboloid { c1: 0.5, c2: 0.5 }, &SWEEP, &pts)?;
    let ip = slope_of(&cap, ExpansionQuantity::InPlaneChristoffel);
    out.push(check(
        "elliptic cap in-plane Christoffel slope >= 1.9",
        ip >= 1.9,
        format!("slope {ip:.3}"),
    ));
    Ok(out)
}

fn random_spd3(rng: &mut ChaCha8Rng) -> Matrix3<f64> {
    let b = Matrix3::from_fn(|_, _| rng.random_range(-1.0..1.0));
    b.transpose() * b + Matrix3::identity() * 0.5
}

fn max_asymmetry(t: &Tensor3D) -> f64 {
    let mut m = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    let v = t.c[i][j][k][l];
                    m = m
                        .max((v - t.c[j][i][k][l]).abs())
                        .max((v - t.c[i][j][l][k]).abs())
                        .max((v - t.c[k][l][i][j]).abs());
                }
            }
        }
    }
    m
}

fn material_suite(seed: u64) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = MaterialParams::new(1.0, 1.0, 1.0, 1.0)?;
    let mut out = Vec::new();

    let mut asym = 0.0f64;
    for _ in 0..50 {
        let g = random_spd3(&mut rng);
        asym = asym
            .max(max_asymmetry(&tensor3d_elastic(&g, &p)))
            .max(max_asymmetry(&tensor3d_viscous(&g, &p)));
    }
    out.push(check(
        "minor and major symmetries",
        asym == 0.0,
        format!("max asymmetry {asym:e}"),
    ));

    let chart = CylinderPanel { radius: 1.0 };
    let s = surface_frame(&chart, [0.3, 0.4])?;
    let mut ext = Matrix3::zeros();
    ext.fixed_view_mut::<2, 2>(0, 0).copy_from(&s.metric_inv);
    ext[(2, 2)] = 1.0;
    let (a0, _) = tensor3d_limits(&s.metric_inv, &p);
    let consistency = tensor3d_elastic(&ext, &p).sup_distance(&a0);
    out.push(check(
        "limits equal the extended-metric tensor",
        consistency <= 1e-12,
        format!("sup distance {consistency:e}"),
    ));

    let eps_list = [0.2, 0.1, 0.05];
    let mut dist = Vec::new();
    let mut minima = Vec::new();
    let frames = sample_points([0.0, 1.0], [0.0, 1.0], 3)
        .into_iter()
        .map(|y| surface_frame(&chart, y))
        .collect::<viscoshell::Result<Vec<_>>>()?;
    for &eps in &eps_list {
        // sup over ω × [-1, 1]; the ellipticity minimum over the same samples
        let (mut d, mut m) = (0.0f64, f64::INFINITY);
        for f in &frames {
            let (limit, _) = tensor3d_limits(&f.metric_inv, &p);
            for x3 in [-1.0, -0.5, 0.0, 0.5, 1.0] {
                let a = tensor3d_elastic(&volume_metrics_at(f, eps, x3)?.metric_inv, &p);
                d = d.max(a.sup_distance(&limit));
                m = m.min(ellipticity_estimate(&a, 1000, &mut rng)?);
            }
        }
        dist.push(d);
        minima.push(m);
    }
    let slope = fitted_slope(&eps_list, &dist);
    out.push(check(
        "tensor limit slope >= 0.9",
        slope >= 0.9,
        format!("slope {slope:.3}"),
    ));
    let (lo, hi) = minima
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(l, h), &m| (l.min(m), h.max(m)));
    out.push(check(
        "uniform ellipticity across eps",
        lo > 0.0 && lo >= 0.5 * hi,
        format!("minima {minima:.4?}"),
    ));
    Ok(out)
}

/// Random smooth field vanishing on `y2 = 0`, with `x3` dependence.
fn random_constrained_field(rng: &mut ChaCha8Rng) -> impl Fn([f64; 3]) -> [f64; 3] {
    let c: [[f64; 6]; 3] = std::array::from_fn(|_| std::array::from_fn(|_| rng.random_range(-1.0..1.0)));
    move |p: [f64; 3]| {
        let (y1, y2, x3) = (p[0], p[1], p[2]);
        let basis = [1.0, y1, y2, x3, y1 * x3, x3 * x3];
        c.map(|row| y2 * row.iter().zip(&basis).map(|(a, b)| a * b).sum::<f64>())
    }
}

/// `|v|_{0,ω}` of a nodal field on a P2 mesh.
fn l2_norm_2d(mesh: &Mesh2D, field: &[f64]) -> Result<f64> {
    let rule = TriangleRule::six_point();
    let mut sum = 0.0;
    for e in 0..mesh.num_elements() {
        let map = mesh.element_map(e)?;
        let nodes = mesh.elements()[e];
        for (xi, w) in rule.points.iter().zip(&rule.weights) {
            let (n, _) = p2_triangle(*xi);
            for c in 0..3 {
                let v: f64 = (0..6).map(|a| n[a] * field[3 * nodes[a] + c]).sum();
                sum += w * map.det * v * v;
            }
        }
    }
    Ok(sum.sqrt())
}

/// `|v|_{0,Ω}` of a nodal field on the prism mesh of `system`.
fn l2_norm_3d(system: &ShellSystem3D, field: &[f64]) -> Result<f64> {
    let parts = system.map_quadrature(|ev, qp| {
        let local = ev.gather(field);
        (0..3)
            .map(|c| {
                let v: f64 = qp.shape.iter().enumerate().map(|(k, n)| n * local[3 * k + c]).sum();
                qp.weight * v * v
            })
            .sum::<f64>()
    })?;
    Ok(parts.iter().sum::<f64>().sqrt())
}

fn kinematics_suite(seed: u64, exec: Execution) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();

    let (mut flat_defect, mut asym) = (0.0f64, 0.0f64);
    let cyl = CylinderPanel { radius: 1.0 };
    for _ in 0..50 {
        let y = [rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)];
        let mut jet = FieldJet3::default();
        for i in 0..2 {
            jet.value[i] = rng.random_range(-1.0..1.0);
            for a in 0..2 {
                jet.grad[i][a] = rng.random_range(-1.0..1.0);
            }
        }
        let geom = volume_metrics(&Plane, 0.1, y, rng.random_range(-1.0..1.0))?;
        let e = scaled_strains(&jet, 0.1, &geom)?;
        let eta = FieldJet2 {
            value: jet.value,
            grad: std::array::from_fn(|i| [jet.grad[i][0], jet.grad[i][1]]),
            hessian3: None,
        };
        let g = gamma_ab(&eta, &surface_frame(&Plane, y)?);
        for a in 0..2 {
            for b in 0..2 {
                flat_defect = flat_defect.max((e[a][b] - g[a][b]).abs());
            }
        }
        let full = FieldJet3 {
            value: std::array::from_fn(|_| rng.random_range(-1.0..1.0)),
            grad: std::array::from_fn(|_| std::array::from_fn(|_| rng.random_range(-1.0..1.0))),
        };
        let e = scaled_strains(&full, 0.1, &volume_metrics(&cyl, 0.1, y, 0.5)?)?;
        for i in 0..3 {
            for j in 0..3 {
                asym = asym.max((e[i][j] - e[j][i]).abs());
            }
        }
    }
    out.push(check(
        "flat reduction to the membrane strain",
        flat_defect <= 1e-12,
        format!("max defect {flat_defect:e}"),
    ));
    out.push(check(
        "scaled strains symmetric",
        asym == 0.0,
        format!("max asymmetry {asym:e}"),
    ));

    let field = |y: Point2, x3: f64| {
        let (s, c) = (y[0] + 2.0 * x3).sin_cos();
        FieldJet3 {
            value: [s * y[1], c + x3 * x3 * y[0], y[0] * y[1] * x3],
            grad: [
                [c * y[1], s, 2.0 * c * y[1]],
                [-s + x3 * x3, 0.0, -2.0 * s + 2.0 * x3 * y[0]],
                [y[1] * x3, y[0] * x3, y[0] * y[1]],
            ],
        }
    };
    let h = 1e-5;
    let mut comm = 0.0f64;
    for &y in &sample_points([0.0, 1.0], [0.0, 1.0], 3) {
        let avg = transversal_average(&field, y);
        for a in 0..2 {
            let mut yp = y;
            let mut ym = y;
            yp[a] += h;
            ym[a] -= h;
            let (vp, vm) = (transversal_average(&field, yp), transversal_average(&field, ym));
            for i in 0..3 {
                let fd = (vp.value[i] - vm.value[i]) / (2.0 * h);
                comm = comm.max((fd - avg.grad[i][a]).abs());
            }
        }
    }
    out.push(check(
        "average commutes with in-plane derivatives",
        comm <= 1e-6,
        format!("max defect {comm:e}"),
    ));

    let base = Mesh2D::rectangle([0.0, 1.0], [0.0, 1.0], 2, 2, &[Side::Bottom])?;
    let mesh = Mesh3D::extrude(&base, 2, 1)?;
    let p = MaterialParams::new(1.0, 1.0, 1.0, 1.0)?;
    let sys = assemble_3d(&mesh, Arc::new(cyl), 0.2, &p, exec)?;
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let v: Vec<f64> = (0..3 * mesh.num_nodes()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let hist = viscoshell::solver2d::DisplacementHistory {
            grid: TimeGrid::new(1.0, 1)?,
            fields: vec![v.clone()],
        };
        let avg = average_to_2d(&hist, &mesh, &base)?;
        worst = worst.max(l2_norm_2d(&base, &avg.fields[0])? / l2_norm_3d(&sys, &v)?);
    }
    let bound = std::f64::consts::FRAC_1_SQRT_2;
    out.push(check(
        "average bound |v_bar| <= |v| / sqrt(2)",
        worst <= bound * (1.0 + 1e-12),
        format!("max ratio {worst:.6} vs {bound:.6}"),
    ));

    let ratios = korn_ratios(&base, 2, &p, &[0.2, 0.1, 0.05], 100, seed, exec)?;
    let m: Vec<f64> = ratios.iter().map(|r| r.iter().cloned().fold(0.0, f64::max)).collect();
    let c = m.iter().cloned().fold(0.0, f64::max);
    out.push(check(
        "Korn-type bound with one constant across eps",
        c.is_finite() && m.iter().all(|&x| x <= 2.0 * m[0]),
        format!("max eps ||v||_1 / ||e(eps; v)|| per eps {m:.4?}"),
    ));
    Ok(out)
}

/// `ε ‖v‖_{1,Ω} / ‖e(ε; v)‖_{0,Ω}` for `count` random smooth fields
/// vanishing on the clamped bottom edge of the cylinder panel, per `ε`.
pub fn korn_ratios(
    base: &Mesh2D,
    layers: usize,
    params: &MaterialParams,
    eps_list: &[f64],
    count: usize,
    seed: u64,
    exec: Execution,
) -> Result<Vec<Vec<f64>>> {
    let mesh = Mesh3D::extrude(base, layers, 1)?;
    let mut out = Vec::new();
    for &eps in eps_list {
        let sys = assemble_3d(&mesh, Arc::new(CylinderPanel { radius: 1.0 }), eps, params, exec)?;
        let (h1, e) = sys.korn_grams()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ratios = (0..count)
            .map(|_| {
                let f = random_constrained_field(&mut rng);
                let full: Vec<f64> = (0..mesh.num_nodes()).flat_map(|n| f(mesh.node_coords(n))).collect();
                let v = sys.dofs.restrict(&full);
                eps * (h1.quad_form(&v) / e.quad_form(&v)).sqrt()
            })
            .collect();
        out.push(ratios);
    }
    Ok(out)
}

/// `∫_a^b e^{-k(t_end - s)} f(s) ds` for `f` linear between `(a, fa)` and
/// `(b, fb)`, by the antiderivative, or 16-point Gauss when `k(b - a)` is
/// small enough for the antiderivative to cancel.
pub fn segment_integral(a: f64, b: f64, fa: f64, fb: f64, k: f64, t_end: f64) -> f64 {
    let h = b - a;
    if k * h < 0.1 {
        let (x, w) = gauss_legendre(16);
        return x
            .iter()
            .zip(&w)
            .map(|(x, w)| {
                let s = a + 0.5 * h * (x + 1.0);
                let f = fa + (fb - fa) * (s - a) / h;
                0.5 * h * w * (-k * (t_end - s)).exp() * f
            })
            .sum();
    }
    let slope = (fb - fa) / h;
    // ∫ e^{k s} (fa + slope (s - a)) ds = e^{k s} [(fa + slope (s - a))/k - slope/k²]
    let anti = |s: f64| (k * (s - t_end)).exp() * ((fa + slope * (s - a)) / k - slope / (k * k));
    anti(b) - anti(a)
}

/// Forward recursion against segment-wise quadrature of the interpolant.
fn direct_convolution(samples: &[f64], k: f64, grid: &TimeGrid) -> Vec<f64> {
    (0..grid.len())
        .map(|n| {
            let t = grid.node(n);
            (0..n)
                .map(|j| segment_integral(grid.node(j), grid.node(j + 1), samples[j], samples[j + 1], k, t))
                .sum()
        })
        .collect()
}

/// Fourth-order central difference at interior nodes `2..len-2`.
pub fn five_point_derivative(v: &[f64], dt: f64) -> Vec<f64> {
    (2..v.len() - 2)
        .map(|n| (v[n - 2] - 8.0 * v[n - 1] + 8.0 * v[n + 1] - v[n + 2]) / (12.0 * dt))
        .collect()
}

fn memory_suite(seed: u64) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();

    let mut worst = 0.0f64;
    for _ in 0..100 {
        let k = 10f64.powf(rng.random_range(-2.0..1.0));
        let dt = 10f64.powf(rng.random_range(-3.0..0.0));
        let n = rng.random_range(2..60usize);
        let grid = TimeGrid::new(dt * n as f64, n)?;
        let f: Vec<f64> = (0..=n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let h = convolve(&f, k, &grid)?;
        let d = direct_convolution(&f, k, &grid);
        let scale = d.iter().fold(1e-300f64, |m, x| m.max(x.abs()));
        for (a, b) in h.iter().zip(&d) {
            worst = worst.max((a - b).abs() / scale);
        }
    }
    out.push(check(
        "recursion equals direct quadrature",
        worst <= 1e-12,
        format!("max relative defect {worst:e}"),
    ));

    let grid = TimeGrid::new(2.0, 40)?;
    let f: Vec<f64> = grid.nodes().iter().map(|t| (3.0 * t).sin() + 0.5).collect();
    let k = 1.7;
    let whole = convolve(&f, k, &grid)?;
    let mut h = whole[20];
    let mut restart = 0.0f64;
    for n in 20..40 {
        h = conv_step(h, f[n], f[n + 1], k, grid.dt())?;
        restart = restart.max((h - whole[n + 1]).abs());
    }
    out.push(check(
        "restart at the midpoint",
        restart <= 1e-12,
        format!("max defect {restart:e}"),
    ));

    let positive: Vec<f64> = (0..=40).map(|_| rng.random_range(0.0..2.0)).collect();
    let hp = convolve(&positive, k, &grid)?;
    let sup = positive.iter().cloned().fold(0.0, f64::max);
    let bounded = hp.iter().all(|&v| v >= 0.0 && v <= sup / k * (1.0 + 1e-12));
    out.push(check(
        "0 <= H <= sup f / k",
        bounded,
        format!(
            "max H {:.6}, bound {:.6}",
            hp.iter().cloned().fold(0.0, f64::max),
            sup / k
        ),
    ));

    let (shear, normal) = closure_residuals(2048)?;
    out.push(check(
        "shear closure ODE residual",
        shear <= 1e-8,
        format!("relative residual {shear:e}"),
    ));
    out.push(check(
        "normal closure ODE residual",
        normal <= 1e-8,
        format!("relative residual {normal:e}"),
    ));
    Ok(out)
}

/// Relative ODE residuals of both closures on `[0, 1]` with `steps` steps,
/// for affine data (the class the closures integrate exactly), measured
/// with the five-point derivative at interior nodes.
pub fn closure_residuals(steps: usize) -> Result<(f64, f64)> {
    let p = MaterialParams::new(0.5, 1.0, 0.8, 1.2)?;
    let grid = TimeGrid::new(1.0, steps)?;
    let t = grid.nodes();
    let dt = grid.dt();
    let f: Vec<f64> = t.iter().map(|t| 1.0 + 2.0 * t).collect();
    let e = shear_closure(&f, &grid, &p)?;
    let de = five_point_derivative(&e, dt);
    let scale = f.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let shear = de
        .iter()
        .enumerate()
        .map(|(i, d)| (2.0 * p.mu * e[i + 2] + p.rho * d - f[i + 2]).abs())
        .fold(0.0, f64::max)
        / scale;

    let f33: Vec<f64> = t.iter().map(|t| 0.5 - t).collect();
    let tr: Vec<f64> = t.iter().map(|t| 0.3 * t).collect();
    let e33 = normal_closure(&f33, &tr, &grid, &p)?;
    let de = five_point_derivative(&e33, dt);
    let dtr = five_point_derivative(&tr, dt);
    let mut normal = 0.0f64;
    let mut scale = 0.0f64;
    for i in 0..de.len() {
        let n = i + 2;
        let r =
            p.lambda * tr[n] + (p.lambda + 2.0 * p.mu) * e33[n] + p.theta * dtr[i] + (p.theta + p.rho) * de[i] - f33[n];
        normal = normal.max(r.abs());
        scale = scale.max(f33[n].abs() + p.lambda * tr[n].abs() + p.theta * dtr[i].abs());
    }
    Ok((shear, normal / scale))
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

struct Sum<'a>(&'a dyn MembraneLoad, &'a dyn MembraneLoad);

impl MembraneLoad for Sum<'_> {
    fn phi(&self, step: usize, t: f64, q: usize, qp: &viscoshell::solver2d::QuadPoint2D) -> Matrix2<f64> {
        self.0.phi(step, t, q, qp) + self.1.phi(step, t, q, qp)
    }
}

fn solver2d_suite(seed: u64, exec: Execution) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let p = MaterialParams::new(1.0, 1.0, 1.0, 1.0)?;
    let chart = CylinderPanel { radius: 1.0 };
    let mesh = Mesh2D::rectangle([0.0, 1.0], [0.0, 1.0], 4, 4, &[Side::Bottom])?;
    let sys = assemble_membrane(&mesh, &chart, &p, exec)?;

    let sym = [&sys.k_a, &sys.k_b, &sys.k_c, &sys.mass]
        .iter()
        .map(|m| m.symmetry_defect() / m.norm_inf().max(1e-300))
        .fold(0.0, f64::max);
    out.push(check(
        "assembled operators symmetric",
        sym <= 1e-14,
        format!("max relative defect {sym:e}"),
    ));

    let first = kernel_diagnostic(&sys)?;
    let generator = Mesh2D::rectangle([0.0, 1.0], [0.0, 1.0], 4, 4, &[Side::Left])?;
    let degenerate = kernel_diagnostic(&assemble_membrane(&generator, &chart, &p, exec)?)?;
    out.push(check(
        "kernel diagnostic separates the clamps",
        first.kind == KernelKind::FirstKind && degenerate.kind == KernelKind::Degenerate,
        format!(
            "curved edge {:?} ({:.2e}), generator {:?} ({:.2e})",
            first.kind, first.sigma_min, degenerate.kind, degenerate.sigma_min
        ),
    ));

    let grid = TimeGrid::new(1.0, 8)?;
    let opts = MembraneOptions::default();
    let zero = vec![0.0; sys.num_unknowns()];
    let s1 = SeparableForces::smooth(1.0, TimeProfile::Ramp { t_ramp: 0.5 });
    let s2 = SeparableForces::smooth(0.3, TimeProfile::Sine { omega: 2.0 });
    let phi1 = phi_table(&sys, &s1, &grid, exec)?;
    let phi2 = phi_table(&sys, &s2, &grid, exec)?;
    let (al, be) = (2.0, -0.5);
    let a1 = ScaledLoad(al, &phi1);
    let b2 = ScaledLoad(be, &phi2);
    let combined = solve_membrane(&sys, &Sum(&a1, &b2), &grid, &zero, &opts)?;
    let x1 = solve_membrane(&sys, &phi1, &grid, &zero, &opts)?;
    let x2 = solve_membrane(&sys, &phi2, &grid, &zero, &opts)?;
    let mut lin = 0.0f64;
    for n in 0..grid.len() {
        let expected: Vec<f64> = x1.fields[n]
            .iter()
            .zip(&x2.fields[n])
            .map(|(a, b)| al * a + be * b)
            .collect();
        let d: Vec<f64> = combined.fields[n].iter().zip(&expected).map(|(a, b)| a - b).collect();
        lin = lin.max(max_abs(&d) / max_abs(&expected).max(1e-300));
    }
    out.push(check(
        "linearity in the load",
        lin <= 1e-10,
        format!("max relative defect {lin:e}"),
    ));

    let xi0: Vec<f64> = (0..sys.num_unknowns()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let off = MembraneOptions {
        delta: 0.0,
        memory: false,
    };
    let free = solve_membrane(&sys, &ZeroLoad, &TimeGrid::new(2.0, 20)?, &xi0, &off)?;
    let energies: Vec<f64> = free.fields.iter().map(|f| sys.energy(&sys.dofs.restrict(f))).collect();
    let monotone = energies.windows(2).all(|w| w[1] <= w[0]);
    let with_memory = solve_membrane(&sys, &ZeroLoad, &TimeGrid::new(2.0, 20)?, &xi0, &opts)?;
    let first_step = sys.energy(&sys.dofs.restrict(&with_memory.fields[1])) <= energies[0];
    out.push(check(
        "zero-load dissipation",
        monotone && first_step,
        format!("memory off non-increasing: {monotone}; memory on first step: {first_step}"),
    ));

    let seq = assemble_membrane(&mesh, &chart, &p, Execution::Sequential)?;
    let par = assemble_membrane(&mesh, &chart, &p, Execution::Parallel)?;
    let hs = solve_membrane(&seq, &phi1, &grid, &zero, &opts)?;
    let hp = solve_membrane(&par, &phi1, &grid, &zero, &opts)?;
    out.push(check("sequential and parallel bit-identical", hs == hp, String::new()));
    Ok(out)
}

fn solver3d_suite(seed: u64, exec: Execution) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let p = MaterialParams::new(1.0, 1.0, 1.0, 1.0)?;
    let base = Mesh2D::rectangle([0.0, 1.0], [0.0, 1.0], 2, 2, &[Side::Bottom])?;
    let mesh = Mesh3D::extrude(&base, 2, 1)?;
    let sys = assemble_3d(&mesh, Arc::new(CylinderPanel { radius: 1.0 }), 0.1, &p, exec)?;

    let spd = sys.verify_viscous_spd();
    out.push(check("C(eps) positive definite", spd.is_ok(), format!("{spd:?}")));

    let w: Vec<f64> = (0..sys.num_unknowns()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let full = sys.dofs.expand(&w);
    let load =
        sys.assemble_rhs_with(|ev, qp| tensor3d_elastic(&qp.geom.metric_inv, &p).apply(&qp.strain(&ev.gather(&full))))?;
    let kw = sys.k.mul_vec(&w);
    let d: Vec<f64> = load.iter().zip(&kw).map(|(a, b)| a - b).collect();
    let rel = max_abs(&d) / max_abs(&kw);
    out.push(check(
        "load of A e(w) equals K w",
        rel <= 1e-12,
        format!("relative defect {rel:e}"),
    ));

    let mut dissipative = true;
    let mut names = Vec::new();
    for name in ["cylinder-panel", "elliptic-cap", "hypar"] {
        let mut sc = Scenario::builtin(name)?;
        sc.mesh.n = 2;
        sc.mesh.layers = 2;
        let m2 = sc.mesh2d()?;
        let m3 = sc.mesh3d(&m2)?;
        let s = assemble_3d(&m3, sc.chart(), 0.1, &sc.params()?, exec)?;
        let u0: Vec<f64> = (0..s.num_unknowns()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let h = solve_3d(&s, &SeparableForces::zero(), &TimeGrid::new(1.0, 10)?, Some(&u0))?;
        let e: Vec<f64> = h.fields.iter().map(|f| s.energy(&s.dofs.restrict(f))).collect();
        let ok = e.windows(2).all(|w| w[1] <= w[0]);
        dissipative &= ok;
        names.push(format!("{name}: {ok}"));
    }
    out.push(check("zero-load energy non-increasing", dissipative, names.join(", ")));

    let decay = thickness_decay(&[0.2, 0.1, 0.05], exec)?;
    let d3: Vec<f64> = decay.iter().map(|r| r.0).collect();
    let shear: Vec<f64> = decay.iter().map(|r| r.1).collect();
    out.push(check(
        "d3 norm decreases with eps",
        d3.windows(2).all(|w| w[1] < w[0]),
        format!("{:?}", d3.iter().map(|v| format!("{v:.4e}")).collect::<Vec<_>>()),
    ));
    out.push(check(
        "transverse shear approaches the closure",
        shear[2] < shear[0],
        format!("relative discrepancy {shear:.4?}"),
    ));
    Ok(out)
}

/// On the curved-edge clamped cylinder (4×4, 4 P1 layers) under the smooth
/// constant preset: the time-integrated `|∂_3 u|_{0,Ω}` and the largest
/// relative gap between `e_{α||3}(ε)` and the shear closure at interior
/// quadrature points, per `ε`.
pub fn thickness_decay(eps_list: &[f64], exec: Execution) -> Result<Vec<(f64, f64)>> {
    let p = MaterialParams::new(1.0, 1.0, 1.0, 1.0)?;
    let base = Mesh2D::rectangle([0.0, 1.0], [0.0, 1.0], 4, 4, &[Side::Bottom])?;
    let mesh = Mesh3D::extrude(&base, 4, 1)?;
    let chart: Arc<dyn MidsurfaceChart> = Arc::new(CylinderPanel { radius: 1.0 });
    let forces = SeparableForces::smooth(1.0, TimeProfile::Constant);
    let grid = TimeGrid::new(1.0, 10)?;
    let mut out = Vec::new();
    for &eps in eps_list {
        let sys = assemble_3d(&mesh, chart.clone(), eps, &p, exec)?;
        let h = solve_3d(&sys, &forces, &grid, None)?;
        let d3 = viscoshell::kinematics::space_time_seminorm(&d3_norms(&sys, &h)?, &grid);
        let strains = h
            .fields
            .iter()
            .map(|f| sys.strains(f))
            .collect::<viscoshell::Result<Vec<_>>>()?;
        let points = sys.map_quadrature(|_, qp| (qp.y, qp.x3))?;
        let (mut worst, mut scale) = (0.0f64, 0.0f64);
        for (q, (y, x3)) in points.iter().enumerate() {
            if y[0] < 0.25 || y[0] > 0.75 || y[1] < 0.25 || y[1] > 0.75 {
                continue;
            }
            let a = surface_frame(&*chart, *y)?.metric;
            let f = (forces.field)(*y, *x3);
            for al in 0..2 {
                let forcing: Vec<f64> = grid
                    .nodes()
                    .iter()
                    .map(|&t| forces.profile.eval(t) * (a[(al, 0)] * f[0][2] + a[(al, 1)] * f[1][2]))
                    .collect();
                let predicted = shear_closure(&forcing, &grid, &p)?;
                for (n, pred) in predicted.iter().enumerate() {
                    worst = worst.max((strains[n][q][al][2] - pred).abs());
                    scale = scale.max(pred.abs());
                }
            }
        }
        out.push((d3, worst / scale));
    }
    Ok(out)
}
