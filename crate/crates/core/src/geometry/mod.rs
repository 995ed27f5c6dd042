//! Midsurface charts, surface differential geometry and the metric of the
//! scaled shell family.

mod chart;
mod expansion;
mod surface;
mod volume;

pub use chart::{
    chart_jet, ChartJet, CylinderPanel, EllipticParaboloid, HyperbolicParaboloid, MidsurfaceChart, Plane, Regularity,
};
pub use expansion::{expansion_residuals, fitted_slope, ExpansionQuantity, ExpansionRow};
pub use surface::{surface_frame, SurfaceGeometry};
pub use volume::{volume_metrics, volume_metrics_at, VolumeGeometry};

pub type Vec3 = nalgebra::Vector3<f64>;
pub type Point2 = [f64; 2];
