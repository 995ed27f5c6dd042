//! Finite elements for the limit membrane problem with long-term memory:
//!
//! `∫ a γ(ξ) γ(η) √a + ∫ b γ(ξ̇) γ(η) √a − ∫_0^t e^{-k(t-s)} ∫ c γ(ξ(s)) γ(η) √a ds = ∫ φ γ(η) √a`.
//!
//! Strains are handled through the sparse operator `G` that maps unknowns to
//! the channels `[γ11, γ22, γ12]` at every quadrature point, so the memory
//! state is one accumulator per channel.

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::fem::lanczos::largest_eigenvalue;
use crate::fem::shape::p2_triangle;
use crate::fem::{Factorization, SparseMatrix, TriangleRule, TripletBuilder};
use crate::geometry::{surface_frame, MidsurfaceChart, Point2};
use crate::kinematics::{gamma_ab, FieldJet2, Sym2};
use crate::material::{membrane_tensors, MaterialParams, MembraneTensors2D, Tensor2D};
use crate::memory::{MemoryAccumulator, TimeGrid};
use crate::mesh::{DofMap, Mesh2D};
use nalgebra::Matrix2;

/// Channel order of the strain operator.
pub const CHANNELS: [(usize, usize); 3] = [(0, 0), (1, 1), (0, 1)];
/// Multiplicity of each channel in a full symmetric contraction.
pub const MULTIPLICITY: [f64; 3] = [1.0, 1.0, 2.0];

/// Geometry and constitutive data at one quadrature point.
#[derive(Debug, Clone)]
pub struct QuadPoint2D {
    pub element: usize,
    pub y: Point2,
    /// Quadrature weight times the element Jacobian (measure `dy`).
    pub weight: f64,
    pub sqrt_a: f64,
    pub a_ctr: Matrix2<f64>,
    pub tensors: MembraneTensors2D,
}

/// `D[I][J] = m_I m_J T^{I J}` so that `γᵀ D γ = T^{αβστ} γ_{στ} γ_{αβ}`.
pub fn voigt2(t: &Tensor2D) -> [[f64; 3]; 3] {
    let mut d = [[0.0; 3]; 3];
    for (i, &(a, b)) in CHANNELS.iter().enumerate() {
        for (j, &(s, r)) in CHANNELS.iter().enumerate() {
            d[i][j] = MULTIPLICITY[i] * MULTIPLICITY[j] * t.c[a][b][s][r];
        }
    }
    d
}

/// Assembled membrane forms on the unknowns left after clamping `γ0`.
#[derive(Debug, Clone)]
pub struct MembraneSystem {
    pub mesh: Mesh2D,
    pub params: MaterialParams,
    pub dofs: DofMap,
    pub k_a: SparseMatrix,
    pub k_b: SparseMatrix,
    pub k_c: SparseMatrix,
    /// Vector `L²` mass matrix with density `√a`.
    pub mass: SparseMatrix,
    /// Strain operator: row `3q + I` gives channel `I` at quadrature point `q`.
    pub strain: SparseMatrix,
    pub quad: Vec<QuadPoint2D>,
    pub rule: TriangleRule,
}

struct ElementBlock {
    dofs: [Option<usize>; 18],
    ka: Vec<f64>,
    kb: Vec<f64>,
    kc: Vec<f64>,
    m: Vec<f64>,
    qps: Vec<(QuadPoint2D, [[f64; 18]; 3])>,
}

/// Strain rows `B[I][3a + c]` of one P2 triangle at one point.
pub(crate) fn membrane_strain_rows(
    n: &[f64; 6],
    grads: &[[f64; 2]; 6],
    geom: &crate::geometry::SurfaceGeometry,
) -> [[f64; 18]; 3] {
    let mut rows = [[0.0; 18]; 3];
    for (i, &(al, be)) in CHANNELS.iter().enumerate() {
        for a in 0..6 {
            for s in 0..2 {
                let mut v = -geom.christoffel[s][al][be] * n[a];
                if s == al {
                    v += 0.5 * grads[a][be];
                }
                if s == be {
                    v += 0.5 * grads[a][al];
                }
                rows[i][3 * a + s] = v;
            }
            rows[i][3 * a + 2] = -geom.curvature[(al, be)] * n[a];
        }
    }
    rows
}

fn element_block<C: MidsurfaceChart + ?Sized>(
    mesh: &Mesh2D,
    e: usize,
    chart: &C,
    params: &MaterialParams,
    dofs: &DofMap,
    rule: &TriangleRule,
) -> Result<ElementBlock> {
    let map = mesh.element_map(e)?;
    let nodes = mesh.elements()[e];
    let mut ldofs = [None; 18];
    for a in 0..6 {
        for c in 0..3 {
            ldofs[3 * a + c] = dofs.free(nodes[a], c);
        }
    }
    let mut ka = vec![0.0; 18 * 18];
    let mut kb = vec![0.0; 18 * 18];
    let mut kc = vec![0.0; 18 * 18];
    let mut m = vec![0.0; 18 * 18];
    let mut qps = Vec::with_capacity(rule.len());
    for (xi, w) in rule.points.iter().zip(&rule.weights) {
        let y = map.point(*xi);
        let geom = surface_frame(chart, y)?;
        let (n, dref) = p2_triangle(*xi);
        let grads: [[f64; 2]; 6] = std::array::from_fn(|a| map.gradient(dref[a]));
        let rows = membrane_strain_rows(&n, &grads, &geom);
        let tensors = membrane_tensors(&geom.metric_inv, params);
        let wq = w * map.det;
        let wa = wq * geom.sqrt_a;
        for (target, t) in [(&mut ka, &tensors.a), (&mut kb, &tensors.b), (&mut kc, &tensors.c)] {
            let d = voigt2(t);
            // DB = D · rows
            let mut db = [[0.0; 18]; 3];
            for i in 0..3 {
                for k in 0..18 {
                    db[i][k] = (0..3).map(|j| d[i][j] * rows[j][k]).sum();
                }
            }
            for p in 0..18 {
                for q in 0..18 {
                    let v: f64 = (0..3).map(|i| rows[i][p] * db[i][q]).sum();
                    target[p * 18 + q] += wa * v;
                }
            }
        }
        for a in 0..6 {
            for b in 0..6 {
                let v = wa * n[a] * n[b];
                for c in 0..3 {
                    m[(3 * a + c) * 18 + 3 * b + c] += v;
                }
            }
        }
        qps.push((
            QuadPoint2D {
                element: e,
                y,
                weight: wq,
                sqrt_a: geom.sqrt_a,
                a_ctr: geom.metric_inv,
                tensors,
            },
            rows,
        ));
    }
    Ok(ElementBlock {
        dofs: ldofs,
        ka,
        kb,
        kc,
        m,
        qps,
    })
}

/// Assembles `K_a`, `K_b`, `K_c`, the mass matrix and the strain operator
/// with the six-point triangle rule.
pub fn assemble_membrane<C: MidsurfaceChart + ?Sized>(
    mesh: &Mesh2D,
    chart: &C,
    params: &MaterialParams,
    exec: Execution,
) -> Result<MembraneSystem> {
    let rule = TriangleRule::six_point();
    let dofs = DofMap::new(mesh.num_nodes(), |i| mesh.is_clamped(i));
    let blocks = exec
        .map_range(mesh.num_elements(), |e| {
            element_block(mesh, e, chart, params, &dofs, &rule)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let n = dofs.num_free();
    let cap = blocks.len() * 18 * 18;
    let mut builders: Vec<TripletBuilder> = (0..4).map(|_| TripletBuilder::with_capacity(n, n, cap)).collect();
    let nq = blocks.len() * rule.len();
    let mut strain = TripletBuilder::with_capacity(3 * nq, n, nq * 3 * 18);
    let mut quad = Vec::with_capacity(nq);
    for block in blocks {
        for p in 0..18 {
            let Some(i) = block.dofs[p] else { continue };
            for q in 0..18 {
                let Some(j) = block.dofs[q] else { continue };
                let k = p * 18 + q;
                builders[0].push(i, j, block.ka[k]);
                builders[1].push(i, j, block.kb[k]);
                builders[2].push(i, j, block.kc[k]);
                builders[3].push(i, j, block.m[k]);
            }
        }
        for (qp, rows) in block.qps {
            let q = quad.len();
            for (ch, row) in rows.iter().enumerate() {
                for p in 0..18 {
                    if let Some(i) = block.dofs[p] {
                        strain.push(3 * q + ch, i, row[p]);
                    }
                }
            }
            quad.push(qp);
        }
    }
    let mut mats = builders.into_iter().map(TripletBuilder::build);
    Ok(MembraneSystem {
        mesh: mesh.clone(),
        params: *params,
        dofs,
        k_a: mats.next().unwrap(),
        k_b: mats.next().unwrap(),
        k_c: mats.next().unwrap(),
        mass: mats.next().unwrap(),
        strain: strain.build(),
        quad,
        rule,
    })
}

impl MembraneSystem {
    pub fn num_unknowns(&self) -> usize {
        self.dofs.num_free()
    }

    /// Strain channels `[γ11, γ22, γ12]` at every quadrature point.
    pub fn strains(&self, unknowns: &[f64]) -> Vec<f64> {
        self.strain.mul_vec(unknowns)
    }

    /// `|η|_ω^M` for a discrete field given by its unknowns.
    pub fn seminorm(&self, unknowns: &[f64]) -> f64 {
        let g = self.strains(unknowns);
        self.seminorm_of_strains(&g)
    }

    pub fn seminorm_of_strains(&self, g: &[f64]) -> f64 {
        self.quad
            .iter()
            .enumerate()
            .map(|(q, qp)| {
                let s = &g[3 * q..3 * q + 3];
                qp.weight * (s[0] * s[0] + s[1] * s[1] + 2.0 * s[2] * s[2])
            })
            .sum::<f64>()
            .sqrt()
    }

    /// `Gᵀ r` where `r[3q + I] = w_q √a_q m_I s[3q + I]`: the discrete form
    /// `∫ s^{αβ} γ_{αβ}(·) √a dy` of a contravariant field given per channel.
    pub fn strain_adjoint(&self, s: &[f64]) -> Vec<f64> {
        let mut r = vec![0.0; s.len()];
        for (q, qp) in self.quad.iter().enumerate() {
            let w = qp.weight * qp.sqrt_a;
            for i in 0..3 {
                r[3 * q + i] = w * MULTIPLICITY[i] * s[3 * q + i];
            }
        }
        self.strain.tr_mul_vec(&r)
    }

    /// Load vector `∫ φ^{αβ} γ_{αβ}(·) √a dy` from `φ` at every quadrature point.
    pub fn load_vector(&self, phi: &[Matrix2<f64>]) -> Vec<f64> {
        assert_eq!(phi.len(), self.quad.len());
        let s: Vec<f64> = phi
            .iter()
            .flat_map(|p| CHANNELS.map(|(a, b)| 0.5 * (p[(a, b)] + p[(b, a)])))
            .collect();
        self.strain_adjoint(&s)
    }

    /// `½ K_a ξ · ξ`.
    pub fn energy(&self, unknowns: &[f64]) -> f64 {
        0.5 * self.k_a.quad_form(unknowns)
    }

    /// Unknowns of the nodal interpolant of an analytic field.
    pub fn interpolate(&self, field: impl Fn(Point2) -> [f64; 3]) -> Vec<f64> {
        let full: Vec<f64> = self.mesh.nodes().iter().flat_map(|&y| field(y)).collect();
        self.dofs.restrict(&full)
    }

    /// `γ_{αβ}` of an analytic field at every quadrature point, channel layout
    /// as in [`MembraneSystem::strains`].
    pub fn analytic_strains<C: MidsurfaceChart + ?Sized>(
        &self,
        chart: &C,
        field: impl Fn(Point2) -> FieldJet2,
    ) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(3 * self.quad.len());
        for qp in &self.quad {
            let geom = surface_frame(chart, qp.y)?;
            let g: Sym2 = gamma_ab(&field(qp.y), &geom);
            out.extend(CHANNELS.map(|(a, b)| g[a][b]));
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    /// `γ` is injective on the discrete space.
    FirstKind,
    /// The discrete space contains nonzero fields with `γ = 0`.
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelReport {
    /// Smallest eigenvalue of `K_a` on the unknowns.
    pub sigma_min: f64,
    /// Maximum absolute row sum of `K_a`.
    pub norm: f64,
    pub threshold: f64,
    pub kind: KernelKind,
}

/// Relative threshold separating a trivial from a nontrivial discrete kernel.
pub const KIND_TOLERANCE: f64 = 1e-10;

/// Smallest eigenvalue of `K_a` by Lanczos on `(K_a + s I)⁻¹` with a tiny
/// shift `s`, and the resulting classification.
pub fn kernel_diagnostic(system: &MembraneSystem) -> Result<KernelReport> {
    kernel_diagnostic_with(system, KIND_TOLERANCE)
}

pub fn kernel_diagnostic_with(system: &MembraneSystem, tol: f64) -> Result<KernelReport> {
    let n = system.num_unknowns();
    let norm = system.k_a.norm_inf();
    let threshold = tol * norm;
    if n == 0 || norm == 0.0 {
        return Ok(KernelReport {
            sigma_min: 0.0,
            norm,
            threshold,
            kind: KernelKind::Degenerate,
        });
    }
    let shift = 1e-12 * norm;
    let mut eye = TripletBuilder::with_capacity(n, n, n);
    for i in 0..n {
        eye.push(i, i, 1.0);
    }
    let eye = eye.build();
    let shifted = SparseMatrix::linear_combination(&[(1.0, &system.k_a), (shift, &eye)]);
    let fact = Factorization::cholesky(&shifted)?;
    let theta = largest_eigenvalue(n, 80, |x| fact.solve(x));
    let sigma_min = (1.0 / theta - shift).max(0.0);
    let kind = if sigma_min > threshold {
        KernelKind::FirstKind
    } else {
        KernelKind::Degenerate
    };
    Ok(KernelReport {
        sigma_min,
        norm,
        threshold,
        kind,
    })
}

/// Options of the membrane time integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MembraneOptions {
    /// Tikhonov weight `δ` of the mass matrix added to `K_b`.
    pub delta: f64,
    /// Include the long-term memory term.
    pub memory: bool,
}

impl Default for MembraneOptions {
    fn default() -> Self {
        Self {
            delta: 0.0,
            memory: true,
        }
    }
}

impl MembraneOptions {
    /// `δ = 0` for a trivial kernel, else `δ = 1e-8 · trace(K_b) / n`.
    pub fn for_kernel(system: &MembraneSystem, report: &KernelReport) -> Self {
        let delta = match report.kind {
            KernelKind::FirstKind => 0.0,
            KernelKind::Degenerate => 1e-8 * system.k_b.trace() / system.num_unknowns().max(1) as f64,
        };
        Self { delta, memory: true }
    }
}

/// Source of `φ^{αβ}` at quadrature points.
pub trait MembraneLoad {
    /// `φ` at grid node `step` (time `t`) for quadrature point `q`.
    fn phi(&self, step: usize, t: f64, q: usize, qp: &QuadPoint2D) -> Matrix2<f64>;

    /// True when `φ` vanishes identically, which skips load assembly.
    fn is_zero(&self) -> bool {
        false
    }
}

/// `φ ≡ 0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroLoad;

impl MembraneLoad for ZeroLoad {
    fn phi(&self, _: usize, _: f64, _: usize, _: &QuadPoint2D) -> Matrix2<f64> {
        Matrix2::zeros()
    }
    fn is_zero(&self) -> bool {
        true
    }
}

/// `φ` tabulated as `values[step][q]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiTable {
    pub values: Vec<Vec<Matrix2<f64>>>,
}

impl MembraneLoad for PhiTable {
    fn phi(&self, step: usize, _: f64, q: usize, _: &QuadPoint2D) -> Matrix2<f64> {
        self.values[step][q]
    }
}

/// `φ` given analytically as a function of `(t, y)`.
pub struct AnalyticPhi<F>(pub F);

impl<F: Fn(f64, Point2) -> Matrix2<f64>> MembraneLoad for AnalyticPhi<F> {
    fn phi(&self, _: usize, t: f64, _: usize, qp: &QuadPoint2D) -> Matrix2<f64> {
        (self.0)(t, qp.y)
    }
}

/// `c · φ` for another load.
pub struct ScaledLoad<'a>(pub f64, pub &'a dyn MembraneLoad);

impl MembraneLoad for ScaledLoad<'_> {
    fn phi(&self, step: usize, t: f64, q: usize, qp: &QuadPoint2D) -> Matrix2<f64> {
        self.1.phi(step, t, q, qp) * self.0
    }
    fn is_zero(&self) -> bool {
        self.0 == 0.0 || self.1.is_zero()
    }
}

/// Nodal displacement fields at every grid node (clamped entries included as zeros).
#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementHistory {
    pub grid: TimeGrid,
    pub fields: Vec<Vec<f64>>,
}

impl DisplacementHistory {
    pub fn final_field(&self) -> &[f64] {
        self.fields.last().expect("a history has at least the initial field")
    }
}

/// Backward Euler with exact exponential memory increments:
/// `(K_a + (K_b + δM)/Δt − w1 K_c) ξ^{n+1} = L^{n+1} + (K_b + δM) ξ^n/Δt + Gᵀ D_c (e^{-kΔt} H^n + w0 γ^n)`.
pub fn solve_membrane(
    system: &MembraneSystem,
    phi: &dyn MembraneLoad,
    grid: &TimeGrid,
    xi0: &[f64],
    options: &MembraneOptions,
) -> Result<DisplacementHistory> {
    integrate(system, phi, grid, xi0, options, 1.0)
}

/// The de-scaled problem: every form carries the factor `ε`, and `phi` is
/// the de-scaled load.
pub fn solve_descaled(
    system: &MembraneSystem,
    phi_eps: &dyn MembraneLoad,
    eps: f64,
    grid: &TimeGrid,
    xi0: &[f64],
    options: &MembraneOptions,
) -> Result<DisplacementHistory> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidEpsilon(eps));
    }
    integrate(system, phi_eps, grid, xi0, options, eps)
}

fn integrate(
    system: &MembraneSystem,
    phi: &dyn MembraneLoad,
    grid: &TimeGrid,
    xi0: &[f64],
    options: &MembraneOptions,
    form_scale: f64,
) -> Result<DisplacementHistory> {
    let dofs = &system.dofs;
    let n = dofs.num_free();
    let mut xi = if xi0.len() == dofs.num_full() {
        dofs.restrict(xi0)
    } else if xi0.len() == n {
        xi0.to_vec()
    } else {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: xi0.len(),
        });
    };
    let dt = grid.dt();
    let nq = system.quad.len();
    let mut memory = MemoryAccumulator::new(system.params.k(), dt, 3 * nq)?;
    let w = memory.weights();
    let w1 = if options.memory { w.w1 } else { 0.0 };

    let damping = if options.delta != 0.0 {
        SparseMatrix::linear_combination(&[(1.0, &system.k_b), (options.delta, &system.mass)])
    } else {
        system.k_b.clone()
    };
    let s = form_scale;
    let lhs = SparseMatrix::linear_combination(&[(s, &system.k_a), (s / dt, &damping), (-s * w1, &system.k_c)]);
    let fact = Factorization::new(&lhs)?;

    let dc: Vec<[[f64; 3]; 3]> = system.quad.iter().map(|qp| voigt2(&qp.tensors.c)).collect();
    let mut gamma = system.strains(&xi);
    let mut fields = Vec::with_capacity(grid.len());
    fields.push(dofs.expand(&xi));
    for step in 0..grid.steps() {
        let t1 = grid.node(step + 1);
        let mut rhs: Vec<f64> = damping.mul_vec(&xi).into_iter().map(|v| v * s / dt).collect();
        if !phi.is_zero() {
            let values: Vec<Matrix2<f64>> = system
                .quad
                .iter()
                .enumerate()
                .map(|(q, qp)| phi.phi(step + 1, t1, q, qp))
                .collect();
            for (r, l) in rhs.iter_mut().zip(system.load_vector(&values)) {
                *r += l;
            }
        }
        if options.memory {
            let h = memory.explicit_part(&gamma);
            // Unweighted c-contraction per channel; `strain_adjoint` applies w √a m_I.
            let mut ch = vec![0.0; 3 * nq];
            for q in 0..nq {
                for i in 0..3 {
                    let v: f64 = (0..3).map(|j| dc[q][i][j] * h[3 * q + j]).sum();
                    ch[3 * q + i] = v / MULTIPLICITY[i];
                }
            }
            for (r, m) in rhs.iter_mut().zip(system.strain_adjoint(&ch)) {
                *r += s * m;
            }
        }
        let next = fact.solve(&rhs);
        let gamma_next = system.strains(&next);
        if options.memory {
            memory.step(&gamma, &gamma_next);
        }
        xi = next;
        gamma = gamma_next;
        fields.push(dofs.expand(&xi));
    }
    Ok(DisplacementHistory { grid: *grid, fields })
}
