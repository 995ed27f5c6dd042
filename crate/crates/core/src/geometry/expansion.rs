use super::chart::MidsurfaceChart;
use super::surface::surface_frame;
use super::volume::volume_metrics_at;
use super::Point2;
use crate::error::{Error, Result};

/// Quantities whose small-thickness expansion is checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpansionQuantity {
    /// `Γ^σ_{αβ}(ε) - Γ^σ_{αβ} + ε x3 b^σ_β|_α`, expected `O(ε²)`.
    InPlaneChristoffel,
    /// `Γ^3_{αβ}(ε) - b_{αβ} + ε x3 b_α^σ b_{σβ}`, expected to vanish.
    NormalChristoffel,
    /// `Γ^σ_{α3}(ε) + b_α^σ + ε x3 b_α^τ b_τ^σ`, expected `O(ε²)`.
    TransverseChristoffel,
    /// `g(ε) - a`, expected `O(ε)`.
    MetricDeterminant,
}

impl ExpansionQuantity {
    pub const ALL: [ExpansionQuantity; 4] = [
        ExpansionQuantity::InPlaneChristoffel,
        ExpansionQuantity::NormalChristoffel,
        ExpansionQuantity::TransverseChristoffel,
        ExpansionQuantity::MetricDeterminant,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExpansionQuantity::InPlaneChristoffel => "christoffel_in_plane",
            ExpansionQuantity::NormalChristoffel => "christoffel_normal",
            ExpansionQuantity::TransverseChristoffel => "christoffel_transverse",
            ExpansionQuantity::MetricDeterminant => "metric_determinant",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionRow {
    pub eps: f64,
    pub quantity: ExpansionQuantity,
    pub sup_residual: f64,
    /// Least-squares slope of `log sup_residual` against `log eps` over the sweep.
    pub fitted_slope: f64,
}

const X3_SAMPLES: [f64; 5] = [-1.0, -0.5, 0.0, 0.5, 1.0];

/// Sup-norm residuals of the expansions over `points × {-1, -1/2, 0, 1/2, 1}`,
/// one row per `(eps, quantity)` in the order of `eps_list`.
pub fn expansion_residuals<C: MidsurfaceChart + ?Sized>(
    chart: &C,
    eps_list: &[f64],
    points: &[Point2],
) -> Result<Vec<ExpansionRow>> {
    let surfaces = points
        .iter()
        .map(|&y| surface_frame(chart, y))
        .collect::<Result<Vec<_>>>()?;
    let mut sup = vec![[0.0f64; 4]; eps_list.len()];
    for (ie, &eps) in eps_list.iter().enumerate() {
        for s in &surfaces {
            let cov = s.curvature_derivative.ok_or(Error::RegularityUnavailable {
                what: "expansion residuals",
            })?;
            let b = &s.mixed_curvature;
            let bl = &s.curvature;
            let a = s.sqrt_a * s.sqrt_a;
            for &x3 in &X3_SAMPLES {
                let v = volume_metrics_at(s, eps, x3)?;
                let x = eps * x3;
                let r = &mut sup[ie];
                for al in 0..2 {
                    for be in 0..2 {
                        for sg in 0..2 {
                            let e = v.christoffel[sg][al][be] - s.christoffel[sg][al][be] + x * cov[al][be][sg];
                            r[0] = r[0].max(e.abs());
                        }
                        let bb: f64 = (0..2).map(|sg| b[(al, sg)] * bl[(sg, be)]).sum();
                        let e = v.christoffel[2][al][be] - bl[(al, be)] + x * bb;
                        r[1] = r[1].max(e.abs());
                    }
                    for sg in 0..2 {
                        let bb: f64 = (0..2).map(|t| b[(al, t)] * b[(t, sg)]).sum();
                        let e = v.christoffel[sg][al][2] + b[(al, sg)] + x * bb;
                        r[2] = r[2].max(e.abs());
                    }
                }
                sup[ie][3] = sup[ie][3].max((v.det - a).abs());
            }
        }
    }
    let mut rows = Vec::with_capacity(eps_list.len() * 4);
    for (iq, &q) in ExpansionQuantity::ALL.iter().enumerate() {
        let ys: Vec<f64> = sup.iter().map(|r| r[iq]).collect();
        let slope = fitted_slope(eps_list, &ys);
        for (ie, &eps) in eps_list.iter().enumerate() {
            rows.push(ExpansionRow {
                eps,
                quantity: q,
                sup_residual: sup[ie][iq],
                fitted_slope: slope,
            });
        }
    }
    Ok(rows)
}

/// Least-squares slope of `log y` against `log x`; `NaN` for fewer than two
/// points or when a value is not positive.
pub fn fitted_slope(xs: &[f64], ys: &[f64]) -> f64 {
    if xs.len() < 2 || xs.len() != ys.len() || xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return f64::NAN;
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
