use super::chart::{chart_jet, ChartJet, MidsurfaceChart};
use super::{Point2, Vec3};
use crate::error::{Error, Result};
use nalgebra::Matrix2;

/// Differential geometry of the midsurface at one point.
///
/// Index layout: `christoffel[σ][α][β] = Γ^σ_{αβ}`,
/// `mixed_curvature[α][β] = b_α^β`, and
/// `curvature_derivative[α][β][σ] = b_β^σ|_α` (derivative index first).
#[derive(Debug, Clone)]
pub struct SurfaceGeometry {
    pub y: Point2,
    pub position: Vec3,
    pub covariant_basis: [Vec3; 2],
    pub normal: Vec3,
    pub contravariant_basis: [Vec3; 2],
    pub metric: Matrix2<f64>,
    pub metric_inv: Matrix2<f64>,
    pub curvature: Matrix2<f64>,
    pub mixed_curvature: Matrix2<f64>,
    pub christoffel: [[[f64; 2]; 2]; 2],
    pub curvature_derivative: Option<[[[f64; 2]; 2]; 2]>,
    /// `∂_γ b_α^β` as `[γ][α][β]`.
    pub mixed_curvature_gradient: Option<[[[f64; 2]; 2]; 2]>,
    pub sqrt_a: f64,
    pub(crate) jet: ChartJet,
}

const DEGENERACY_TOL: f64 = 1e-12;

/// Computes the surface frame, metric, curvature and Christoffel symbols at `y`.
///
/// The covariant derivative of the curvature is present exactly when the
/// chart declares `C3` regularity.
pub fn surface_frame<C: MidsurfaceChart + ?Sized>(chart: &C, y: Point2) -> Result<SurfaceGeometry> {
    let jet = chart_jet(chart, y);
    from_jet(jet, y, chart.length_scale())
}

pub(crate) fn from_jet(jet: ChartJet, y: Point2, scale: f64) -> Result<SurfaceGeometry> {
    let [a1, a2] = jet.d1;
    let cross = a1.cross(&a2);
    let cross_norm = cross.norm();
    let scale2 = (a1.norm() * a2.norm()).max(scale * scale * f64::MIN_POSITIVE);
    if !(cross_norm > DEGENERACY_TOL * scale2) {
        return Err(Error::DegenerateChart {
            y1: y[0],
            y2: y[1],
            cross_norm,
        });
    }
    let normal = cross / cross_norm;
    let metric = Matrix2::new(a1.dot(&a1), a1.dot(&a2), a2.dot(&a1), a2.dot(&a2));
    let det = metric[(0, 0)] * metric[(1, 1)] - metric[(0, 1)] * metric[(1, 0)];
    let metric_inv = Matrix2::new(metric[(1, 1)], -metric[(0, 1)], -metric[(1, 0)], metric[(0, 0)]) / det;
    let contravariant_basis = [
        a1 * metric_inv[(0, 0)] + a2 * metric_inv[(0, 1)],
        a1 * metric_inv[(1, 0)] + a2 * metric_inv[(1, 1)],
    ];
    let d2 = jet.d2;
    let curvature = Matrix2::from_fn(|a, b| 0.5 * (normal.dot(&d2[a][b]) + normal.dot(&d2[b][a])));
    let mut mixed_curvature = Matrix2::zeros();
    for a in 0..2 {
        for b in 0..2 {
            mixed_curvature[(a, b)] = (0..2).map(|s| metric_inv[(b, s)] * curvature[(s, a)]).sum();
        }
    }
    let mut christoffel = [[[0.0; 2]; 2]; 2];
    for s in 0..2 {
        for a in 0..2 {
            for b in a..2 {
                let v = contravariant_basis[s].dot(&d2[a][b]);
                christoffel[s][a][b] = v;
                christoffel[s][b][a] = v;
            }
        }
    }

    let (mixed_curvature_gradient, curvature_derivative) = match jet.d3 {
        Some(d3) => {
            let grad = mixed_gradient(&jet, &d3, &metric_inv, &curvature, &mixed_curvature, &normal);
            let mut cov = [[[0.0; 2]; 2]; 2];
            for a in 0..2 {
                for b in 0..2 {
                    for s in 0..2 {
                        let mut v = grad[a][b][s];
                        for t in 0..2 {
                            v += christoffel[s][a][t] * mixed_curvature[(b, t)];
                            v -= christoffel[t][a][b] * mixed_curvature[(t, s)];
                        }
                        cov[a][b][s] = v;
                    }
                }
            }
            (Some(grad), Some(cov))
        }
        None => (None, None),
    };

    Ok(SurfaceGeometry {
        y,
        position: jet.point,
        covariant_basis: jet.d1,
        normal,
        contravariant_basis,
        metric,
        metric_inv,
        curvature,
        mixed_curvature,
        christoffel,
        curvature_derivative,
        mixed_curvature_gradient,
        sqrt_a: det.sqrt(),
        jet,
    })
}

// ∂_γ b_α^β from ∂_γ a^{βσ} = -a^{βμ} ∂_γ a_{μν} a^{νσ} and
// ∂_γ b_{σα} = ∂_γ a_3 · ∂_α a_σ + a_3 · ∂_γ ∂_α a_σ with ∂_γ a_3 = -b_γ^κ a_κ.
fn mixed_gradient(
    jet: &ChartJet,
    d3: &[[[Vec3; 2]; 2]; 2],
    metric_inv: &Matrix2<f64>,
    curvature: &Matrix2<f64>,
    mixed: &Matrix2<f64>,
    normal: &Vec3,
) -> [[[f64; 2]; 2]; 2] {
    let d1 = &jet.d1;
    let d2 = &jet.d2;
    let mut out = [[[0.0; 2]; 2]; 2];
    for g in 0..2 {
        let dn = -(d1[0] * mixed[(g, 0)] + d1[1] * mixed[(g, 1)]);
        let dmetric = Matrix2::from_fn(|m, n| d2[m][g].dot(&d1[n]) + d1[m].dot(&d2[n][g]));
        let dinv = -(metric_inv * dmetric * metric_inv);
        let dcurv = Matrix2::from_fn(|s, a| {
            let v1 = dn.dot(&d2[s][a]) + normal.dot(&d3[g][s][a]);
            let v2 = dn.dot(&d2[a][s]) + normal.dot(&d3[g][a][s]);
            0.5 * (v1 + v2)
        });
        for a in 0..2 {
            for b in 0..2 {
                let mut v = 0.0;
                for s in 0..2 {
                    v += dinv[(b, s)] * curvature[(s, a)] + metric_inv[(b, s)] * dcurv[(s, a)];
                }
                out[g][a][b] = v;
            }
        }
    }
    out
}
