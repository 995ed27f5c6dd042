//! Strain operators of the scaled shell and of the limit membrane, the
//! transversal average and the membrane seminorms.

use crate::error::{Error, Result};
use crate::fem::{gauss_legendre, TriangleRule};
use crate::geometry::{surface_frame, MidsurfaceChart, Point2, SurfaceGeometry, VolumeGeometry};
use crate::memory::TimeGrid;
use crate::mesh::Mesh2D;

pub type Sym2 = [[f64; 2]; 2];
pub type Sym3 = [[f64; 3]; 3];

/// Covariant components of a 3D field and their derivatives at one scaled
/// point: `grad[i][j] = ∂_j v_i`, with `j = 2` the derivative in `x3`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FieldJet3 {
    pub value: [f64; 3],
    pub grad: [[f64; 3]; 3],
}

/// Covariant components of a midsurface field: `grad[i][α] = ∂_α η_i`, and
/// optionally `∂_α ∂_β η_3`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FieldJet2 {
    pub value: [f64; 3],
    pub grad: [[f64; 2]; 3],
    pub hessian3: Option<[[f64; 2]; 2]>,
}

/// A 3D displacement field on the scaled domain `ω × (-1, 1)`.
pub trait Field3D: Sync {
    fn jet(&self, y: Point2, x3: f64) -> FieldJet3;
}

/// A midsurface displacement field on `ω`.
pub trait Field2D: Sync {
    fn jet(&self, y: Point2) -> FieldJet2;
}

impl<F: Fn(Point2, f64) -> FieldJet3 + Sync> Field3D for F {
    fn jet(&self, y: Point2, x3: f64) -> FieldJet3 {
        self(y, x3)
    }
}

impl<F: Fn(Point2) -> FieldJet2 + Sync> Field2D for F {
    fn jet(&self, y: Point2) -> FieldJet2 {
        self(y)
    }
}

/// Scaled linearized strains `e_{i||j}(ε; v)`:
/// `e_{α||β} = ½(∂_β v_α + ∂_α v_β) − Γ^p_{αβ}(ε) v_p`,
/// `e_{α||3} = ½(ε⁻¹ ∂_3 v_α + ∂_α v_3) − Γ^p_{α3}(ε) v_p`,
/// `e_{3||3} = ε⁻¹ ∂_3 v_3`.
pub fn scaled_strains(v: &FieldJet3, eps: f64, geom: &VolumeGeometry) -> Result<Sym3> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidEpsilon(eps));
    }
    let g = &geom.christoffel;
    let d = &v.grad;
    let u = &v.value;
    let mut e = [[0.0; 3]; 3];
    for a in 0..2 {
        for b in a..2 {
            let c: f64 = (0..3).map(|p| g[p][a][b] * u[p]).sum();
            let val = 0.5 * (d[a][b] + d[b][a]) - c;
            e[a][b] = val;
            e[b][a] = val;
        }
        let c: f64 = (0..3).map(|p| g[p][a][2] * u[p]).sum();
        let val = 0.5 * (d[a][2] / eps + d[2][a]) - c;
        e[a][2] = val;
        e[2][a] = val;
    }
    e[2][2] = d[2][2] / eps;
    Ok(e)
}

/// Change of metric `γ_{αβ}(η) = ½(∂_β η_α + ∂_α η_β) − Γ^σ_{αβ} η_σ − b_{αβ} η_3`.
pub fn gamma_ab(eta: &FieldJet2, geom: &SurfaceGeometry) -> Sym2 {
    let mut g = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in a..2 {
            let c: f64 = (0..2).map(|s| geom.christoffel[s][a][b] * eta.value[s]).sum();
            let v = 0.5 * (eta.grad[a][b] + eta.grad[b][a]) - c - geom.curvature[(a, b)] * eta.value[2];
            g[a][b] = v;
            g[b][a] = v;
        }
    }
    g
}

/// Linearized change of curvature
/// `ρ_{αβ}(v) = ∂_{αβ} v_3 − Γ^σ_{αβ} ∂_σ v_3 − b_α^σ b_{σβ} v_3
///   + b_α^σ (∂_β v_σ − Γ^τ_{βσ} v_τ) + b_β^τ (∂_α v_τ − Γ^σ_{ατ} v_σ) + b^τ_β|_α v_τ`,
///     symmetrized.
pub fn rho_ab(v: &FieldJet2, geom: &SurfaceGeometry) -> Result<Sym2> {
    let h = v.hessian3.ok_or(Error::SecondDerivativeUnavailable)?;
    let cov = geom.curvature_derivative.ok_or(Error::RegularityUnavailable {
        what: "the change of curvature operator",
    })?;
    let gm = &geom.christoffel;
    let bm = &geom.mixed_curvature;
    let bl = &geom.curvature;
    let u = &v.value;
    let d = &v.grad;
    let raw = |a: usize, b: usize| -> f64 {
        let mut r = h[a][b];
        for s in 0..2 {
            r -= gm[s][a][b] * d[2][s];
            r -= bm[(a, s)] * bl[(s, b)] * u[2];
            let cov_bs: f64 = d[s][b] - (0..2).map(|t| gm[t][b][s] * u[t]).sum::<f64>();
            r += bm[(a, s)] * cov_bs;
            let cov_at: f64 = d[s][a] - (0..2).map(|t| gm[t][a][s] * u[t]).sum::<f64>();
            r += bm[(b, s)] * cov_at;
            r += cov[a][b][s] * u[s];
        }
        r
    };
    let off = 0.5 * (raw(0, 1) + raw(1, 0));
    Ok([[raw(0, 0), off], [off, raw(1, 1)]])
}

/// Number of Gauss points used for transversal averages of analytic fields;
/// exact for polynomials in `x3` of degree ≤ 15.
pub const AVERAGE_GAUSS_POINTS: usize = 8;

/// `v̄(y) = ½ ∫_{-1}^{1} v(y, x3) dx3` together with the averaged in-plane
/// derivatives.
pub fn transversal_average(v: &dyn Field3D, y: Point2) -> FieldJet2 {
    let (x, w) = gauss_legendre(AVERAGE_GAUSS_POINTS);
    let mut out = FieldJet2::default();
    for (x3, wq) in x.iter().zip(&w) {
        let j = v.jet(y, *x3);
        for i in 0..3 {
            out.value[i] += 0.5 * wq * j.value[i];
            for a in 0..2 {
                out.grad[i][a] += 0.5 * wq * j.grad[i][a];
            }
        }
    }
    out
}

/// `Σ_{α,β} γ_{αβ}²`, the integrand of the squared membrane seminorm.
pub fn gamma_norm2(g: &Sym2) -> f64 {
    g[0][0] * g[0][0] + g[1][1] * g[1][1] + 2.0 * g[0][1] * g[0][1]
}

/// `|η|_ω^M = (Σ_{α,β} ∫_ω |γ_{αβ}(η)|² dy)^{1/2}` for an analytic field,
/// integrated element by element over `mesh` with `rule`.
pub fn membrane_seminorm<C: MidsurfaceChart + ?Sized>(
    eta: &dyn Field2D,
    chart: &C,
    mesh: &Mesh2D,
    rule: &TriangleRule,
) -> Result<f64> {
    let mut sum = 0.0;
    for e in 0..mesh.num_elements() {
        let map = mesh.element_map(e)?;
        for (xi, w) in rule.points.iter().zip(&rule.weights) {
            let y = map.point(*xi);
            let geom = surface_frame(chart, y)?;
            let g = gamma_ab(&eta.jet(y), &geom);
            sum += w * map.det * gamma_norm2(&g);
        }
    }
    Ok(sum.sqrt())
}

/// `|η|_{T,ω}^M = (∫_0^T (|η(t)|_ω^M)² dt)^{1/2}` by the trapezoidal rule from
/// seminorm values at the grid nodes.
pub fn space_time_seminorm(seminorms: &[f64], grid: &TimeGrid) -> f64 {
    let sq: Vec<f64> = seminorms.iter().map(|s| s * s).collect();
    grid.trapezoid(&sq).sqrt()
}
