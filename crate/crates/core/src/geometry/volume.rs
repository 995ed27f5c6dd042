use super::chart::MidsurfaceChart;
use super::surface::{surface_frame, SurfaceGeometry};
use super::{Point2, Vec3};
use crate::error::{Error, Result};
use nalgebra::Matrix3;

/// Metric of the shell family `Θ(y, x3) = θ(y) + x3 a_3(y)` pulled back to the
/// scaled point `(y, x3)`, i.e. evaluated at physical thickness coordinate `ε x3`.
///
/// `christoffel[p][i][j] = Γ^p_{ij}(ε)`.
#[derive(Debug, Clone)]
pub struct VolumeGeometry {
    pub eps: f64,
    pub x3: f64,
    pub covariant_basis: [Vec3; 3],
    pub contravariant_basis: [Vec3; 3],
    pub metric: Matrix3<f64>,
    pub metric_inv: Matrix3<f64>,
    pub christoffel: [[[f64; 3]; 3]; 3],
    /// `g(ε) = det(g_ij(ε))`.
    pub det: f64,
    pub sqrt_g: f64,
}

const ORIENTATION_TOL: f64 = 1e-12;

pub fn volume_metrics<C: MidsurfaceChart + ?Sized>(chart: &C, eps: f64, y: Point2, x3: f64) -> Result<VolumeGeometry> {
    let surface = surface_frame(chart, y)?;
    volume_metrics_at(&surface, eps, x3)
}

/// Same as [`volume_metrics`], reusing an already computed surface frame.
pub fn volume_metrics_at(surface: &SurfaceGeometry, eps: f64, x3: f64) -> Result<VolumeGeometry> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidEpsilon(eps));
    }
    let x = eps * x3;
    let a = &surface.covariant_basis;
    let n = surface.normal;
    let b = &surface.mixed_curvature;
    let d2 = &surface.jet.d2;

    // ∂_α a_3 = -b_α^κ a_κ
    let dn: [Vec3; 2] = std::array::from_fn(|al| -(a[0] * b[(al, 0)] + a[1] * b[(al, 1)]));
    let g = [a[0] + dn[0] * x, a[1] + dn[1] * x, n];
    let det3 = g[0].cross(&g[1]).dot(&g[2]);
    let ref_det = surface.sqrt_a;
    if !(det3 > ORIENTATION_TOL * ref_det) {
        return Err(Error::ThicknessTooLarge {
            y1: surface.y[0],
            y2: surface.y[1],
            x3,
            eps,
            det: det3,
        });
    }
    let gc = [
        g[1].cross(&g[2]) / det3,
        g[2].cross(&g[0]) / det3,
        g[0].cross(&g[1]) / det3,
    ];
    let metric = Matrix3::from_fn(|i, j| g[i].dot(&g[j]));
    let metric_inv = Matrix3::from_fn(|i, j| gc[i].dot(&gc[j]));

    // ∂_α ∂_β a_3 = -(∂_α b_β^κ) a_κ - b_β^κ ∂_α a_κ, only needed off the midsurface.
    let mut ddn = [[Vec3::zeros(); 2]; 2];
    if x != 0.0 {
        let grad = surface.mixed_curvature_gradient.ok_or(Error::RegularityUnavailable {
            what: "off-midsurface Christoffel symbols",
        })?;
        for al in 0..2 {
            for be in 0..2 {
                let mut v = Vec3::zeros();
                for k in 0..2 {
                    v -= a[k] * grad[al][be][k] + d2[k][al] * b[(be, k)];
                }
                ddn[al][be] = v;
            }
        }
        let m = (ddn[0][1] + ddn[1][0]) * 0.5;
        ddn[0][1] = m;
        ddn[1][0] = m;
    }

    let mut christoffel = [[[0.0; 3]; 3]; 3];
    for al in 0..2 {
        for be in al..2 {
            let dg = d2[be][al] + ddn[al][be] * x;
            for p in 0..3 {
                let v = gc[p].dot(&dg);
                christoffel[p][al][be] = v;
                christoffel[p][be][al] = v;
            }
        }
        // Γ^3_{α3} and Γ^p_{33} vanish identically for this family.
        for s in 0..2 {
            let v = gc[s].dot(&dn[al]);
            christoffel[s][al][2] = v;
            christoffel[s][2][al] = v;
        }
    }

    Ok(VolumeGeometry {
        eps,
        x3,
        covariant_basis: g,
        contravariant_basis: gc,
        metric,
        metric_inv,
        christoffel,
        det: det3 * det3,
        sqrt_g: det3,
    })
}
