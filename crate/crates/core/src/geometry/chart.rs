use super::{Point2, Vec3};
use std::fmt::Debug;

/// Smoothness a chart can deliver. Transverse Christoffel symbols of the
/// shell family and the covariant derivative of the curvature need `C3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Regularity {
    C2,
    C3,
}

/// An injective immersion `θ: ω → R³` of the reference domain.
///
/// Only `point` is required. Missing derivatives are filled in by central
/// differences with steps proportional to `length_scale`.
pub trait MidsurfaceChart: Send + Sync + Debug {
    fn point(&self, y: Point2) -> Vec3;

    /// `[∂_1 θ, ∂_2 θ]`.
    fn first(&self, _y: Point2) -> Option<[Vec3; 2]> {
        None
    }

    /// `d[α][β] = ∂_α ∂_β θ`.
    fn second(&self, _y: Point2) -> Option<[[Vec3; 2]; 2]> {
        None
    }

    /// `d[α][β][γ] = ∂_α ∂_β ∂_γ θ`.
    fn third(&self, _y: Point2) -> Option<[[[Vec3; 2]; 2]; 2]> {
        None
    }

    fn regularity(&self) -> Regularity {
        Regularity::C3
    }

    fn length_scale(&self) -> f64 {
        1.0
    }
}

impl<C: MidsurfaceChart + ?Sized> MidsurfaceChart for &C {
    fn point(&self, y: Point2) -> Vec3 {
        (**self).point(y)
    }
    fn first(&self, y: Point2) -> Option<[Vec3; 2]> {
        (**self).first(y)
    }
    fn second(&self, y: Point2) -> Option<[[Vec3; 2]; 2]> {
        (**self).second(y)
    }
    fn third(&self, y: Point2) -> Option<[[[Vec3; 2]; 2]; 2]> {
        (**self).third(y)
    }
    fn regularity(&self) -> Regularity {
        (**self).regularity()
    }
    fn length_scale(&self) -> f64 {
        (**self).length_scale()
    }
}

impl<C: MidsurfaceChart + ?Sized> MidsurfaceChart for Box<C> {
    fn point(&self, y: Point2) -> Vec3 {
        (**self).point(y)
    }
    fn first(&self, y: Point2) -> Option<[Vec3; 2]> {
        (**self).first(y)
    }
    fn second(&self, y: Point2) -> Option<[[Vec3; 2]; 2]> {
        (**self).second(y)
    }
    fn third(&self, y: Point2) -> Option<[[[Vec3; 2]; 2]; 2]> {
        (**self).third(y)
    }
    fn regularity(&self) -> Regularity {
        (**self).regularity()
    }
    fn length_scale(&self) -> f64 {
        (**self).length_scale()
    }
}

impl<C: MidsurfaceChart + ?Sized> MidsurfaceChart for std::sync::Arc<C> {
    fn point(&self, y: Point2) -> Vec3 {
        (**self).point(y)
    }
    fn first(&self, y: Point2) -> Option<[Vec3; 2]> {
        (**self).first(y)
    }
    fn second(&self, y: Point2) -> Option<[[Vec3; 2]; 2]> {
        (**self).second(y)
    }
    fn third(&self, y: Point2) -> Option<[[[Vec3; 2]; 2]; 2]> {
        (**self).third(y)
    }
    fn regularity(&self) -> Regularity {
        (**self).regularity()
    }
    fn length_scale(&self) -> f64 {
        (**self).length_scale()
    }
}

/// Position and derivatives of a chart at one point.
#[derive(Debug, Clone, Copy)]
pub struct ChartJet {
    pub point: Vec3,
    pub d1: [Vec3; 2],
    pub d2: [[Vec3; 2]; 2],
    pub d3: Option<[[[Vec3; 2]; 2]; 2]>,
}

fn shifted(y: Point2, dir: usize, h: f64) -> Point2 {
    let mut z = y;
    z[dir] += h;
    z
}

// Central-difference steps. A difference of analytic data uses the small
// step; nested differences of `point` use larger ones to limit cancellation.
const STEP_ANALYTIC: f64 = 1e-6;
const STEP_NESTED_2: f64 = 1e-4;
const STEP_NESTED_3: f64 = 1e-3;

fn fd_first<C: MidsurfaceChart + ?Sized>(chart: &C, y: Point2) -> [Vec3; 2] {
    let h = STEP_ANALYTIC * chart.length_scale();
    std::array::from_fn(|a| (chart.point(shifted(y, a, h)) - chart.point(shifted(y, a, -h))) / (2.0 * h))
}

fn first_or_fd<C: MidsurfaceChart + ?Sized>(chart: &C, y: Point2) -> [Vec3; 2] {
    chart.first(y).unwrap_or_else(|| fd_first(chart, y))
}

fn second_or_fd<C: MidsurfaceChart + ?Sized>(chart: &C, y: Point2) -> [[Vec3; 2]; 2] {
    if let Some(d2) = chart.second(y) {
        return d2;
    }
    let s = chart.length_scale();
    if chart.first(y).is_some() {
        let h = STEP_ANALYTIC * s;
        let mut d2 = [[Vec3::zeros(); 2]; 2];
        for a in 0..2 {
            let p = first_or_fd(chart, shifted(y, a, h));
            let m = first_or_fd(chart, shifted(y, a, -h));
            for b in 0..2 {
                d2[a][b] = (p[b] - m[b]) / (2.0 * h);
            }
        }
        symmetrize2(&mut d2);
        return d2;
    }
    let h = STEP_NESTED_2 * s;
    let c = chart.point(y);
    let mut d2 = [[Vec3::zeros(); 2]; 2];
    for a in 0..2 {
        d2[a][a] = (chart.point(shifted(y, a, h)) - 2.0 * c + chart.point(shifted(y, a, -h))) / (h * h);
    }
    let pp = chart.point([y[0] + h, y[1] + h]);
    let pm = chart.point([y[0] + h, y[1] - h]);
    let mp = chart.point([y[0] - h, y[1] + h]);
    let mm = chart.point([y[0] - h, y[1] - h]);
    d2[0][1] = (pp - pm - mp + mm) / (4.0 * h * h);
    d2[1][0] = d2[0][1];
    d2
}

fn third_or_fd<C: MidsurfaceChart + ?Sized>(chart: &C, y: Point2) -> [[[Vec3; 2]; 2]; 2] {
    if let Some(d3) = chart.third(y) {
        return d3;
    }
    let s = chart.length_scale();
    let h = if chart.second(y).is_some() {
        STEP_ANALYTIC * s
    } else {
        STEP_NESTED_3 * s
    };
    let mut d3 = [[[Vec3::zeros(); 2]; 2]; 2];
    for a in 0..2 {
        let p = second_or_fd(chart, shifted(y, a, h));
        let m = second_or_fd(chart, shifted(y, a, -h));
        for b in 0..2 {
            for c in 0..2 {
                d3[a][b][c] = (p[b][c] - m[b][c]) / (2.0 * h);
            }
        }
    }
    // Third derivatives are fully symmetric; average over index orderings.
    let mut sym = [[[Vec3::zeros(); 2]; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                sym[a][b][c] = (d3[a][b][c] + d3[b][a][c] + d3[c][b][a]) / 3.0;
            }
        }
    }
    sym
}

fn symmetrize2(d: &mut [[Vec3; 2]; 2]) {
    let m = (d[0][1] + d[1][0]) * 0.5;
    d[0][1] = m;
    d[1][0] = m;
}

/// Evaluates the chart and its derivatives up to third order when the chart
/// declares `C3` regularity, and up to second order otherwise.
pub fn chart_jet<C: MidsurfaceChart + ?Sized>(chart: &C, y: Point2) -> ChartJet {
    let d3 = if chart.regularity() >= Regularity::C3 {
        Some(third_or_fd(chart, y))
    } else {
        None
    };
    ChartJet {
        point: chart.point(y),
        d1: first_or_fd(chart, y),
        d2: second_or_fd(chart, y),
        d3,
    }
}

fn zero3() -> [[[Vec3; 2]; 2]; 2] {
    [[[Vec3::zeros(); 2]; 2]; 2]
}

/// The flat chart `θ(y) = (y1, y2, 0)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Plane;

impl MidsurfaceChart for Plane {
    fn point(&self, y: Point2) -> Vec3 {
        Vec3::new(y[0], y[1], 0.0)
    }
    fn first(&self, _y: Point2) -> Option<[Vec3; 2]> {
        Some([Vec3::x(), Vec3::y()])
    }
    fn second(&self, _y: Point2) -> Option<[[Vec3; 2]; 2]> {
        Some([[Vec3::zeros(); 2]; 2])
    }
    fn third(&self, _y: Point2) -> Option<[[[Vec3; 2]; 2]; 2]> {
        Some(zero3())
    }
}

/// Circular cylinder of radius `R` in arc-length coordinates,
/// `θ(y) = (R cos(y1/R), R sin(y1/R), y2)`.
#[derive(Debug, Clone, Copy)]
pub struct CylinderPanel {
    pub radius: f64,
}

impl MidsurfaceChart for CylinderPanel {
    fn point(&self, y: Point2) -> Vec3 {
        let r = self.radius;
        let (s, c) = (y[0] / r).sin_cos();
        Vec3::new(r * c, r * s, y[1])
    }
    fn first(&self, y: Point2) -> Option<[Vec3; 2]> {
        let (s, c) = (y[0] / self.radius).sin_cos();
        Some([Vec3::new(-s, c, 0.0), Vec3::z()])
    }
    fn second(&self, y: Point2) -> Option<[[Vec3; 2]; 2]> {
        let r = self.radius;
        let (s, c) = (y[0] / r).sin_cos();
        let mut d = [[Vec3::zeros(); 2]; 2];
        d[0][0] = Vec3::new(-c / r, -s / r, 0.0);
        Some(d)
    }
    fn third(&self, y: Point2) -> Option<[[[Vec3; 2]; 2]; 2]> {
        let r = self.radius;
        let (s, c) = (y[0] / r).sin_cos();
        let mut d = zero3();
        d[0][0][0] = Vec3::new(s / (r * r), -c / (r * r), 0.0);
        Some(d)
    }
    fn length_scale(&self) -> f64 {
        self.radius
    }
}

/// Hyperbolic paraboloid `θ(y) = (y1, y2, c y1 y2)`.
#[derive(Debug, Clone, Copy)]
pub struct HyperbolicParaboloid {
    pub c: f64,
}

impl MidsurfaceChart for HyperbolicParaboloid {
    fn point(&self, y: Point2) -> Vec3 {
        Vec3::new(y[0], y[1], self.c * y[0] * y[1])
    }
    fn first(&self, y: Point2) -> Option<[Vec3; 2]> {
        Some([Vec3::new(1.0, 0.0, self.c * y[1]), Vec3::new(0.0, 1.0, self.c * y[0])])
    }
    fn second(&self, _y: Point2) -> Option<[[Vec3; 2]; 2]> {
        let mut d = [[Vec3::zeros(); 2]; 2];
        d[0][1] = Vec3::new(0.0, 0.0, self.c);
        d[1][0] = d[0][1];
        Some(d)
    }
    fn third(&self, _y: Point2) -> Option<[[[Vec3; 2]; 2]; 2]> {
        Some(zero3())
    }
}

/// Elliptic paraboloid cap `θ(y) = (y1, y2, c1 y1² + c2 y2²)`.
#[derive(Debug, Clone, Copy)]
pub struct EllipticParaboloid {
    pub c1: f64,
    pub c2: f64,
}

impl MidsurfaceChart for EllipticParaboloid {
    fn point(&self, y: Point2) -> Vec3 {
        Vec3::new(y[0], y[1], self.c1 * y[0] * y[0] + self.c2 * y[1] * y[1])
    }
    fn first(&self, y: Point2) -> Option<[Vec3; 2]> {
        Some([
            Vec3::new(1.0, 0.0, 2.0 * self.c1 * y[0]),
            Vec3::new(0.0, 1.0, 2.0 * self.c2 * y[1]),
        ])
    }
    fn second(&self, _y: Point2) -> Option<[[Vec3; 2]; 2]> {
        let mut d = [[Vec3::zeros(); 2]; 2];
        d[0][0] = Vec3::new(0.0, 0.0, 2.0 * self.c1);
        d[1][1] = Vec3::new(0.0, 0.0, 2.0 * self.c2);
        Some(d)
    }
    fn third(&self, _y: Point2) -> Option<[[[Vec3; 2]; 2]; 2]> {
        Some(zero3())
    }
}
