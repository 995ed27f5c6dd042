//! Finite elements for the scaled three-dimensional viscoelastic shell on
//! `Ω = ω × (-1, 1)`:
//!
//! `∫ A e(u) e(v) √g dx + ∫ B e(u̇) e(v) √g dx = ∫ F^{ij} e_{i||j}(ε; v) √g dx`,
//!
//! with prisms built from P2 triangles and Lagrange order 1 or 2 in `x3`.

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::fem::shape::{lagrange_1d, p2_triangle};
use crate::fem::{gauss_legendre, Factorization, SparseMatrix, TriangleRule, TripletBuilder};
use crate::forces::AdmissibleForces;
use crate::geometry::{surface_frame, volume_metrics_at, MidsurfaceChart, Point2, VolumeGeometry};
use crate::kinematics::Sym3;
use crate::material::{tensor3d_elastic, tensor3d_viscous, MaterialParams, Tensor3D};
use crate::memory::TimeGrid;
use crate::mesh::{DofMap, Mesh2D, Mesh3D};
use std::sync::Arc;

/// Element dof map with `M` dense local matrices.
type LocalBlock<const M: usize> = (Vec<Option<usize>>, [Vec<f64>; M]);
pub use crate::solver2d::DisplacementHistory;

/// Channel order of the 3D strain rows.
pub const CHANNELS: [(usize, usize); 6] = [(0, 0), (1, 1), (0, 1), (0, 2), (1, 2), (2, 2)];
/// Multiplicity of each channel in a full symmetric contraction.
pub const MULTIPLICITY: [f64; 6] = [1.0, 1.0, 2.0, 2.0, 2.0, 1.0];

/// `D[I][J] = m_I m_J T^{I J}`.
pub fn voigt3(t: &Tensor3D) -> [[f64; 6]; 6] {
    let mut d = [[0.0; 6]; 6];
    for (i, &(a, b)) in CHANNELS.iter().enumerate() {
        for (j, &(s, r)) in CHANNELS.iter().enumerate() {
            d[i][j] = MULTIPLICITY[i] * MULTIPLICITY[j] * t.c[a][b][s][r];
        }
    }
    d
}

fn channels_of(s: &Sym3) -> [f64; 6] {
    CHANNELS.map(|(a, b)| 0.5 * (s[a][b] + s[b][a]))
}

fn sym_of(c: &[f64; 6]) -> Sym3 {
    let mut s = [[0.0; 3]; 3];
    for (k, &(a, b)) in CHANNELS.iter().enumerate() {
        s[a][b] = c[k];
        s[b][a] = c[k];
    }
    s
}

/// Everything known at one quadrature point of one prism.
#[derive(Debug, Clone)]
pub struct QpEval {
    pub y: Point2,
    pub x3: f64,
    /// Quadrature weight for the measure `dx = dy dx3`.
    pub weight: f64,
    pub geom: VolumeGeometry,
    /// Shape function values per local node.
    pub shape: Vec<f64>,
    /// `[∂_1, ∂_2, ∂_{x3}]` of each shape function (no `1/ε`).
    pub grad: Vec<[f64; 3]>,
    /// Strain rows per local dof `3k + c`, channels as in [`CHANNELS`].
    pub rows: Vec<[f64; 6]>,
}

impl QpEval {
    /// Scaled strains `e_{i||j}(ε; u)` from local dof values.
    pub fn strain(&self, local: &[f64]) -> Sym3 {
        let mut c = [0.0; 6];
        for (row, &u) in self.rows.iter().zip(local) {
            for k in 0..6 {
                c[k] += row[k] * u;
            }
        }
        sym_of(&c)
    }
}

/// Local quadrature data of one prism.
#[derive(Debug, Clone)]
pub struct ElementEval {
    pub element: usize,
    pub nodes: Vec<usize>,
    pub dofs: Vec<Option<usize>>,
    pub qps: Vec<QpEval>,
}

impl ElementEval {
    /// Local dof values gathered from a full nodal vector.
    pub fn gather(&self, full: &[f64]) -> Vec<f64> {
        self.nodes
            .iter()
            .flat_map(|&n| [full[3 * n], full[3 * n + 1], full[3 * n + 2]])
            .collect()
    }
}

/// Assembled scaled forms `K(ε)` and `C(ε)` on the unknowns left after
/// clamping `Γ0`.
#[derive(Debug, Clone)]
pub struct ShellSystem3D {
    pub mesh: Mesh3D,
    pub chart: Arc<dyn MidsurfaceChart>,
    pub eps: f64,
    pub params: MaterialParams,
    pub dofs: DofMap,
    pub k: SparseMatrix,
    pub c: SparseMatrix,
    pub exec: Execution,
    rule: TriangleRule,
    z_rule: (Vec<f64>, Vec<f64>),
}

/// Assembles `K(ε)` and `C(ε)`.
pub fn assemble_3d(
    mesh: &Mesh3D,
    chart: Arc<dyn MidsurfaceChart>,
    eps: f64,
    params: &MaterialParams,
    exec: Execution,
) -> Result<ShellSystem3D> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidEpsilon(eps));
    }
    let dofs = DofMap::new(mesh.num_nodes(), |i| mesh.is_clamped(i));
    let mut system = ShellSystem3D {
        mesh: mesh.clone(),
        chart,
        eps,
        params: *params,
        dofs,
        k: SparseMatrix::zeros(0, 0),
        c: SparseMatrix::zeros(0, 0),
        exec,
        rule: TriangleRule::six_point(),
        z_rule: gauss_legendre(mesh.order() + 2),
    };
    let params = *params;
    let [k, c] = system.assemble_forms(move |qp, mats: &mut [Vec<f64>; 2]| {
        let w = qp.weight * qp.geom.sqrt_g;
        let da = voigt3(&tensor3d_elastic(&qp.geom.metric_inv, &params));
        let db = voigt3(&tensor3d_viscous(&qp.geom.metric_inv, &params));
        add_gram(&mut mats[0], &qp.rows, &da, w);
        add_gram(&mut mats[1], &qp.rows, &db, w);
    })?;
    system.k = k;
    system.c = c;
    Ok(system)
}

/// `m += w · rowsᵀ D rows`.
fn add_gram(m: &mut [f64], rows: &[[f64; 6]], d: &[[f64; 6]; 6], w: f64) {
    let n = rows.len();
    let drows: Vec<[f64; 6]> = rows
        .iter()
        .map(|r| std::array::from_fn(|i| (0..6).map(|j| d[i][j] * r[j]).sum()))
        .collect();
    for p in 0..n {
        for q in 0..n {
            let v: f64 = (0..6).map(|i| rows[p][i] * drows[q][i]).sum();
            m[p * n + q] += w * v;
        }
    }
}

impl ShellSystem3D {
    pub fn num_unknowns(&self) -> usize {
        self.dofs.num_free()
    }

    pub fn num_quadrature_points(&self) -> usize {
        self.mesh.num_elements() * self.rule.len() * self.z_rule.0.len()
    }

    /// Shape data, geometry and strain rows of prism `e`.
    pub fn element_eval(&self, e: usize) -> Result<ElementEval> {
        let mesh = &self.mesh;
        let (e2, layer) = mesh.split_element(e);
        let map = mesh.base().element_map(e2)?;
        let nodes = mesh.element_nodes(e);
        let dofs: Vec<Option<usize>> = nodes
            .iter()
            .flat_map(|&n| (0..3).map(move |c| (n, c)))
            .map(|(n, c)| self.dofs.free(n, c))
            .collect();
        let lv = mesh.layer_levels(layer);
        let (lo, hi) = (mesh.levels()[*lv.start()], mesh.levels()[*lv.end()]);
        let half = 0.5 * (hi - lo);
        let order = mesh.order();
        let nl = order + 1;
        let (zs, zw) = &self.z_rule;
        let mut qps = Vec::with_capacity(self.rule.len() * zs.len());
        for (xi, wt) in self.rule.points.iter().zip(&self.rule.weights) {
            let y = map.point(*xi);
            let surface = surface_frame(&*self.chart, y)?;
            let (n2, dref) = p2_triangle(*xi);
            let g2: [[f64; 2]; 6] = std::array::from_fn(|a| map.gradient(dref[a]));
            for (z, wz) in zs.iter().zip(zw) {
                let x3 = lo + (z + 1.0) * half;
                let geom = volume_metrics_at(&surface, self.eps, x3)?;
                let (l, dl) = lagrange_1d(order, *z);
                let mut shape = Vec::with_capacity(6 * nl);
                let mut grad = Vec::with_capacity(6 * nl);
                for k in 0..nl {
                    for a in 0..6 {
                        shape.push(n2[a] * l[k]);
                        grad.push([g2[a][0] * l[k], g2[a][1] * l[k], n2[a] * dl[k] / half]);
                    }
                }
                let rows = strain_rows(&shape, &grad, &geom, self.eps);
                qps.push(QpEval {
                    y,
                    x3,
                    weight: wt * map.det * wz * half,
                    geom,
                    shape,
                    grad,
                    rows,
                });
            }
        }
        Ok(ElementEval {
            element: e,
            nodes,
            dofs,
            qps,
        })
    }

    /// Assembles `M` bilinear forms from a per-point kernel that accumulates
    /// dense local matrices of size `(3n)²`.
    pub fn assemble_forms<const M: usize, F>(&self, kernel: F) -> Result<[SparseMatrix; M]>
    where
        F: Fn(&QpEval, &mut [Vec<f64>; M]) + Sync,
    {
        let n = self.num_unknowns();
        let local = 18 * (self.mesh.order() + 1);
        let blocks = self
            .exec
            .map_range(self.mesh.num_elements(), |e| -> Result<LocalBlock<M>> {
                let ev = self.element_eval(e)?;
                let mut mats: [Vec<f64>; M] = std::array::from_fn(|_| vec![0.0; local * local]);
                for qp in &ev.qps {
                    kernel(qp, &mut mats);
                }
                Ok((ev.dofs, mats))
            })
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        let cap = blocks.len() * local * local;
        let mut builders: [TripletBuilder; M] = std::array::from_fn(|_| TripletBuilder::with_capacity(n, n, cap));
        for (dofs, mats) in blocks {
            for (p, dp) in dofs.iter().enumerate() {
                let Some(i) = *dp else { continue };
                for (q, dq) in dofs.iter().enumerate() {
                    let Some(j) = *dq else { continue };
                    for (b, m) in builders.iter_mut().zip(&mats) {
                        b.push(i, j, m[p * local + q]);
                    }
                }
            }
        }
        Ok(builders.map(TripletBuilder::build))
    }

    /// Load vector `∫ Σ_I m_I s_I e_I(ε; ·) √g dx` for a symmetric field
    /// `s` supplied per quadrature point.
    pub fn assemble_rhs_with<F>(&self, field: F) -> Result<Vec<f64>>
    where
        F: Fn(&ElementEval, &QpEval) -> Sym3 + Sync,
    {
        let parts = self
            .exec
            .map_range(
                self.mesh.num_elements(),
                |e| -> Result<(Vec<Option<usize>>, Vec<f64>)> {
                    let ev = self.element_eval(e)?;
                    let mut local = vec![0.0; ev.dofs.len()];
                    for qp in &ev.qps {
                        let s = channels_of(&field(&ev, qp));
                        let w = qp.weight * qp.geom.sqrt_g;
                        for (l, row) in local.iter_mut().zip(&qp.rows) {
                            *l += w * (0..6).map(|k| MULTIPLICITY[k] * s[k] * row[k]).sum::<f64>();
                        }
                    }
                    Ok((ev.dofs, local))
                },
            )
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        let mut rhs = vec![0.0; self.num_unknowns()];
        for (dofs, local) in parts {
            for (d, v) in dofs.iter().zip(local) {
                if let Some(i) = *d {
                    rhs[i] += v;
                }
            }
        }
        Ok(rhs)
    }

    /// Applies `f` at every quadrature point, element-major, deterministic order.
    pub fn map_quadrature<R, F>(&self, f: F) -> Result<Vec<R>>
    where
        R: Send,
        F: Fn(&ElementEval, &QpEval) -> R + Sync,
    {
        let parts = self
            .exec
            .map_range(self.mesh.num_elements(), |e| -> Result<Vec<R>> {
                let ev = self.element_eval(e)?;
                Ok(ev.qps.iter().map(|qp| f(&ev, qp)).collect())
            })
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        Ok(parts.into_iter().flatten().collect())
    }

    /// Scaled strains of a full nodal field at every quadrature point.
    pub fn strains(&self, full: &[f64]) -> Result<Vec<Sym3>> {
        self.map_quadrature(|ev, qp| qp.strain(&ev.gather(full)))
    }

    /// `½ K u · u` on the unknowns.
    pub fn energy(&self, unknowns: &[f64]) -> f64 {
        0.5 * self.k.quad_form(unknowns)
    }

    /// Checks that `C(ε)` admits a Cholesky factorization.
    pub fn verify_viscous_spd(&self) -> Result<()> {
        Factorization::cholesky(&self.c).map(|_| ())
    }

    /// `∫ Σ_i ∂_3 v_i ∂_3 w_i dx`.
    pub fn d3_gram(&self) -> Result<SparseMatrix> {
        let [m] = self.assemble_forms(|qp, mats: &mut [Vec<f64>; 1]| {
            let n = qp.shape.len();
            let nd = 3 * n;
            for a in 0..n {
                for b in 0..n {
                    let v = qp.weight * qp.grad[a][2] * qp.grad[b][2];
                    for c in 0..3 {
                        mats[0][(3 * a + c) * nd + 3 * b + c] += v;
                    }
                }
            }
        })?;
        Ok(m)
    }

    /// Gram matrices of `‖v‖²_{1,Ω}` (components and all derivatives, `dx`)
    /// and of `‖e(ε; v)‖²_{0,Ω}` (full symmetric contraction, `dx`).
    pub fn korn_grams(&self) -> Result<(SparseMatrix, SparseMatrix)> {
        let ident: [[f64; 6]; 6] =
            std::array::from_fn(|i| std::array::from_fn(|j| if i == j { MULTIPLICITY[i] } else { 0.0 }));
        let [h1, e] = self.assemble_forms(move |qp, mats: &mut [Vec<f64>; 2]| {
            let n = qp.shape.len();
            let nd = 3 * n;
            for a in 0..n {
                for b in 0..n {
                    let dot: f64 = (0..3).map(|j| qp.grad[a][j] * qp.grad[b][j]).sum();
                    let v = qp.weight * (qp.shape[a] * qp.shape[b] + dot);
                    for c in 0..3 {
                        mats[0][(3 * a + c) * nd + 3 * b + c] += v;
                    }
                }
            }
            add_gram(&mut mats[1], &qp.rows, &ident, qp.weight);
        })?;
        Ok((h1, e))
    }
}

/// Strain rows `e_{i||j}(ε; N_k e_c)` for every local dof `3k + c`:
/// `½(δ_{ci} d_j N + δ_{cj} d_i N) − Γ^c_{ij} N` with `d_3 = ε⁻¹ ∂_{x3}`.
fn strain_rows(shape: &[f64], grad: &[[f64; 3]], geom: &VolumeGeometry, eps: f64) -> Vec<[f64; 6]> {
    let mut rows = Vec::with_capacity(3 * shape.len());
    for (n, g) in shape.iter().zip(grad) {
        let d = [g[0], g[1], g[2] / eps];
        for c in 0..3 {
            rows.push(CHANNELS.map(|(i, j)| {
                let mut v = -geom.christoffel[c][i][j] * n;
                if c == i {
                    v += 0.5 * d[j];
                }
                if c == j {
                    v += 0.5 * d[i];
                }
                v
            }));
        }
    }
    rows
}

/// Load vector `∫ F^{ij}(t) e_{i||j}(ε; ·) √g dx`.
pub fn assemble_admissible_rhs(system: &ShellSystem3D, forces: &dyn AdmissibleForces, t: f64) -> Result<Vec<f64>> {
    system.assemble_rhs_with(|_, qp| forces.stress(t, qp.y, qp.x3))
}

/// Load vector `∫ f^i v_i √g dx + ∫_{Γ±} h^i_± v_i √g dy` from body and face
/// densities. Not an admissible-forces load; used for diagnostics only.
pub fn assemble_traction_rhs(
    system: &ShellSystem3D,
    body: &(dyn Fn(Point2, f64) -> [f64; 3] + Sync),
    top: &(dyn Fn(Point2) -> [f64; 3] + Sync),
    bottom: &(dyn Fn(Point2) -> [f64; 3] + Sync),
) -> Result<Vec<f64>> {
    let mesh = &system.mesh;
    let top_level = mesh.levels().len() - 1;
    let parts = system
        .exec
        .map_range(mesh.num_elements(), |e| -> Result<(Vec<Option<usize>>, Vec<f64>)> {
            let ev = system.element_eval(e)?;
            let mut local = vec![0.0; ev.dofs.len()];
            for qp in &ev.qps {
                let f = body(qp.y, qp.x3);
                let w = qp.weight * qp.geom.sqrt_g;
                for (k, n) in qp.shape.iter().enumerate() {
                    for c in 0..3 {
                        local[3 * k + c] += w * f[c] * n;
                    }
                }
            }
            // Face terms: the bottom/top tri6 blocks of the outer layers.
            let (e2, layer) = mesh.split_element(e);
            let faces = [(0usize, 0usize, -1.0), (mesh.layers() - 1, mesh.order(), 1.0)];
            for (face_layer, block, x3) in faces {
                if layer != face_layer {
                    continue;
                }
                let map = mesh.base().element_map(e2)?;
                for (xi, wt) in system.rule.points.iter().zip(&system.rule.weights) {
                    let y = map.point(*xi);
                    let surface = surface_frame(&*system.chart, y)?;
                    let geom = volume_metrics_at(&surface, system.eps, x3)?;
                    let h = if x3 > 0.0 { top(y) } else { bottom(y) };
                    let (n, _) = p2_triangle(*xi);
                    let w = wt * map.det * geom.sqrt_g;
                    for a in 0..6 {
                        let k = 6 * block + a;
                        debug_assert_eq!(mesh.split_node(ev.nodes[k]).1, if x3 > 0.0 { top_level } else { 0 });
                        for c in 0..3 {
                            local[3 * k + c] += w * h[c] * n[a];
                        }
                    }
                }
            }
            Ok((ev.dofs, local))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let mut rhs = vec![0.0; system.num_unknowns()];
    for (dofs, local) in parts {
        for (d, v) in dofs.iter().zip(local) {
            if let Some(i) = *d {
                rhs[i] += v;
            }
        }
    }
    Ok(rhs)
}

/// Backward Euler `(C/Δt + K) u^{n+1} = L^{n+1} + C u^n / Δt` with one
/// factorization. `u0 = None` starts from rest.
pub fn solve_3d(
    system: &ShellSystem3D,
    forces: &dyn AdmissibleForces,
    grid: &TimeGrid,
    u0: Option<&[f64]>,
) -> Result<DisplacementHistory> {
    let n = system.num_unknowns();
    let mut u = match u0 {
        None => vec![0.0; n],
        Some(v) if v.len() == system.dofs.num_full() => system.dofs.restrict(v),
        Some(v) if v.len() == n => v.to_vec(),
        Some(v) => {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: v.len(),
            })
        }
    };
    let dt = grid.dt();
    let lhs = SparseMatrix::linear_combination(&[(1.0 / dt, &system.c), (1.0, &system.k)]);
    let fact = Factorization::cholesky(&lhs)?;
    let separable = match forces.separable_profile() {
        Some(p) => Some((p, assemble_admissible_rhs(system, forces, p.reference_time())?)),
        None => None,
    };
    let mut fields = Vec::with_capacity(grid.len());
    fields.push(system.dofs.expand(&u));
    for step in 0..grid.steps() {
        let t1 = grid.node(step + 1);
        let load = match &separable {
            Some((p, l0)) => {
                let s = p.eval(t1);
                l0.iter().map(|v| s * v).collect()
            }
            None => assemble_admissible_rhs(system, forces, t1)?,
        };
        let cu = system.c.mul_vec(&u);
        let rhs: Vec<f64> = load.iter().zip(&cu).map(|(l, c)| l + c / dt).collect();
        u = fact.solve(&rhs);
        fields.push(system.dofs.expand(&u));
    }
    Ok(DisplacementHistory { grid: *grid, fields })
}

/// `σ^{ij} = A e(u^n) + B (e(u^n) − e(u^{n−1})) / Δt` at every quadrature
/// point, indexed `[step][point]`; the rate at the initial step is zero.
pub fn stress_recovery(system: &ShellSystem3D, history: &DisplacementHistory) -> Result<Vec<Vec<Sym3>>> {
    let dt = history.grid.dt();
    let params = system.params;
    let tensors = system.map_quadrature(|_, qp| {
        (
            voigt_plain(&tensor3d_elastic(&qp.geom.metric_inv, &params)),
            voigt_plain(&tensor3d_viscous(&qp.geom.metric_inv, &params)),
        )
    })?;
    let mut out = Vec::with_capacity(history.fields.len());
    let mut prev: Option<Vec<Sym3>> = None;
    for field in &history.fields {
        let e = system.strains(field)?;
        let sig = e
            .iter()
            .enumerate()
            .map(|(q, eq)| {
                let ec = channels_of(eq);
                let rate = match &prev {
                    Some(p) => {
                        let pc = channels_of(&p[q]);
                        std::array::from_fn(|k| (ec[k] - pc[k]) / dt)
                    }
                    None => [0.0; 6],
                };
                let (a, b) = &tensors[q];
                let s: [f64; 6] = std::array::from_fn(|i| {
                    (0..6)
                        .map(|j| MULTIPLICITY[j] * (a[i][j] * ec[j] + b[i][j] * rate[j]))
                        .sum()
                });
                sym_of(&s)
            })
            .collect();
        out.push(sig);
        prev = Some(e);
    }
    Ok(out)
}

/// `T^{I J}` without multiplicities.
fn voigt_plain(t: &Tensor3D) -> [[f64; 6]; 6] {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let (a, b) = CHANNELS[i];
            let (s, r) = CHANNELS[j];
            t.c[a][b][s][r]
        })
    })
}

/// Weights `ω_l = ½ ∫_{-1}^{1} ℓ_l(x3) dx3` of the through-thickness nodal
/// basis; exact for the piecewise Lagrange interpolant.
pub fn thickness_weights(mesh: &Mesh3D) -> Vec<f64> {
    let mut w = vec![0.0; mesh.levels().len()];
    let (zs, zw) = gauss_legendre(3);
    for layer in 0..mesh.layers() {
        let lv = mesh.layer_levels(layer);
        let (lo, hi) = (mesh.levels()[*lv.start()], mesh.levels()[*lv.end()]);
        let half = 0.5 * (hi - lo);
        for (z, wz) in zs.iter().zip(&zw) {
            let (l, _) = lagrange_1d(mesh.order(), *z);
            for (k, level) in lv.clone().enumerate() {
                w[level] += 0.5 * wz * half * l[k];
            }
        }
    }
    w
}

/// Transversal average `ū = ½ ∫ u dx3` of every field, as nodal vectors on `mesh2d`.
pub fn average_to_2d(history: &DisplacementHistory, mesh3d: &Mesh3D, mesh2d: &Mesh2D) -> Result<DisplacementHistory> {
    if mesh3d.base().nodes() != mesh2d.nodes() || mesh3d.base().elements() != mesh2d.elements() {
        return Err(Error::IncompatibleMesh(
            "the 3D mesh is not an extrusion of the 2D mesh".into(),
        ));
    }
    let n2 = mesh2d.num_nodes();
    let w = thickness_weights(mesh3d);
    let fields = history
        .fields
        .iter()
        .map(|f| {
            if f.len() != 3 * mesh3d.num_nodes() {
                return Err(Error::DimensionMismatch {
                    expected: 3 * mesh3d.num_nodes(),
                    got: f.len(),
                });
            }
            let mut avg = vec![0.0; 3 * n2];
            for (level, wl) in w.iter().enumerate() {
                let block = &f[3 * level * n2..3 * (level + 1) * n2];
                for (a, b) in avg.iter_mut().zip(block) {
                    *a += wl * b;
                }
            }
            Ok(avg)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DisplacementHistory {
        grid: history.grid,
        fields,
    })
}

/// `|∂_3 u|_{0,Ω}` at every time node.
pub fn d3_norms(system: &ShellSystem3D, history: &DisplacementHistory) -> Result<Vec<f64>> {
    let gram = system.d3_gram()?;
    Ok(history
        .fields
        .iter()
        .map(|f| gram.quad_form(&system.dofs.restrict(f)).max(0.0).sqrt())
        .collect())
}

/// `sup_v L(v) / ‖e(ε; v)‖_{0,Ω}`, the dual norm of a load vector against
/// the scaled strain norm.
pub fn load_dual_norm(strain_gram: &SparseMatrix, load: &[f64]) -> Result<f64> {
    let fact = Factorization::cholesky(strain_gram)?;
    let x = fact.solve(load);
    Ok(load.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>().max(0.0).sqrt())
}
