//! Admissible forces, given directly as the symmetric field `F^{ij}(t, y, x3)`
//! tested against the scaled strains.

use crate::geometry::Point2;
use std::sync::Arc;

pub type Sym3 = [[f64; 3]; 3];

pub trait AdmissibleForces: Send + Sync {
    /// Symmetric `F^{ij}` at time `t` and scaled point `(y, x3)`.
    fn stress(&self, t: f64, y: Point2, x3: f64) -> Sym3;

    /// `Some(p)` when `F(t, ·) = p(t) G(·)` with `G = stress(t, ·) / p(t)` fixed,
    /// which lets solvers assemble the spatial load once.
    fn separable_profile(&self) -> Option<TimeProfile> {
        None
    }
}

/// Scalar time modulation of a force field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeProfile {
    Constant,
    /// `t / t_ramp` up to `t_ramp`, then 1.
    Ramp {
        t_ramp: f64,
    },
    /// `sin(ω t)`.
    Sine {
        omega: f64,
    },
    /// `t`.
    Linear,
}

impl TimeProfile {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            TimeProfile::Constant => 1.0,
            TimeProfile::Ramp { t_ramp } => (t / t_ramp).min(1.0),
            TimeProfile::Sine { omega } => (omega * t).sin(),
            TimeProfile::Linear => t,
        }
    }

    /// A time at which the profile equals 1.
    pub fn reference_time(&self) -> f64 {
        match *self {
            TimeProfile::Constant | TimeProfile::Linear => 1.0,
            TimeProfile::Ramp { t_ramp } => t_ramp,
            TimeProfile::Sine { omega } => std::f64::consts::FRAC_PI_2 / omega,
        }
    }
}

/// `F(t, y, x3) = profile(t) · field(y, x3)`.
#[derive(Clone)]
pub struct SeparableForces {
    pub profile: TimeProfile,
    pub field: Arc<dyn Fn(Point2, f64) -> Sym3 + Send + Sync>,
}

impl std::fmt::Debug for SeparableForces {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SeparableForces")
            .field("profile", &self.profile)
            .finish_non_exhaustive()
    }
}

impl SeparableForces {
    pub fn new(profile: TimeProfile, field: impl Fn(Point2, f64) -> Sym3 + Send + Sync + 'static) -> Self {
        Self {
            profile,
            field: Arc::new(field),
        }
    }

    pub fn zero() -> Self {
        Self::new(TimeProfile::Constant, |_, _| [[0.0; 3]; 3])
    }

    /// A smooth bounded family exercising every component, including the
    /// transverse ones that drive the strain closures. `scale` multiplies all
    /// components.
    pub fn smooth(scale: f64, profile: TimeProfile) -> Self {
        Self::new(profile, move |y, x3| {
            let f11 = 1.0 + 0.3 * y[1] + 0.1 * x3 * x3;
            let f22 = 0.5 + 0.2 * y[0];
            let f12 = 0.2 * (1.0 + 0.5 * y[0] * y[1]);
            let f13 = 0.1 * (1.0 + y[1]);
            let f23 = 0.1 * y[0];
            let f33 = 0.5 * (1.0 + 0.2 * y[1]);
            let s = scale;
            [
                [s * f11, s * f12, s * f13],
                [s * f12, s * f22, s * f23],
                [s * f13, s * f23, s * f33],
            ]
        })
    }
}

impl AdmissibleForces for SeparableForces {
    fn stress(&self, t: f64, y: Point2, x3: f64) -> Sym3 {
        let p = self.profile.eval(t);
        let f = (self.field)(y, x3);
        f.map(|row| row.map(|v| p * v))
    }

    fn separable_profile(&self) -> Option<TimeProfile> {
        Some(self.profile)
    }
}

impl<F> AdmissibleForces for F
where
    F: Fn(f64, Point2, f64) -> Sym3 + Send + Sync,
{
    fn stress(&self, t: f64, y: Point2, x3: f64) -> Sym3 {
        self(t, y, x3)
    }
}
