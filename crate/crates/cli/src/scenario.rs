//! Scenario configuration: chart, clamped sides, material, force preset,
//! time grid, meshes and the thickness sweep.

use crate::error::{HarnessError, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::sync::Arc;
use viscoshell::forces::{AdmissibleForces, SeparableForces, TimeProfile};
use viscoshell::geometry::{
    surface_frame, CylinderPanel, EllipticParaboloid, HyperbolicParaboloid, MidsurfaceChart, Plane, Point2,
};
use viscoshell::kinematics::{gamma_ab, FieldJet2, Sym3};
use viscoshell::material::{membrane_tensors, MaterialParams};
use viscoshell::memory::TimeGrid;
use viscoshell::mesh::{Mesh2D, Mesh3D, Side};

/// Names accepted by [`Scenario::builtin`].
pub const BUILTIN_SCENARIOS: [&str; 5] = ["cylinder-panel", "cylinder-smooth", "elliptic-cap", "hypar", "plate"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ChartSpec {
    Plane,
    Cylinder { radius: f64 },
    EllipticCap { c1: f64, c2: f64 },
    Hypar { c: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub y1: [f64; 2],
    pub y2: [f64; 2],
    /// Clamped sides of the rectangle: `bottom`, `right`, `top`, `left`.
    pub clamped: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialSpec {
    pub lambda: f64,
    pub mu: f64,
    pub theta: f64,
    pub rho: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProfileSpec {
    Constant,
    Ramp { t_ramp: f64 },
    Sine { omega: f64 },
    Linear,
}

impl ProfileSpec {
    pub fn profile(self) -> TimeProfile {
        match self {
            ProfileSpec::Constant => TimeProfile::Constant,
            ProfileSpec::Ramp { t_ramp } => TimeProfile::Ramp { t_ramp },
            ProfileSpec::Sine { omega } => TimeProfile::Sine { omega },
            ProfileSpec::Linear => TimeProfile::Linear,
        }
    }
}

/// Named families of admissible forces `F^{ij}(t, y, x3)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ForceSpec {
    Zero,
    /// Every component nonzero and smooth, separable in time.
    Smooth {
        scale: f64,
        profile: ProfileSpec,
    },
    /// In-plane stresses whose membrane load is exactly that of `ξ* = t X`,
    /// with `X` vanishing to second order on the bottom edge.
    Compatible {
        scale: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    pub t_final: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSpec {
    /// Cells per side of the in-plane rectangle.
    pub n: usize,
    pub layers: usize,
    /// Lagrange order through the thickness, 1 or 2.
    pub order: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    /// Declares a generalized membrane shell of the first kind; checked by
    /// the kernel diagnostic before a convergence run.
    pub first_kind: bool,
    /// Strictly decreasing thickness parameters.
    pub eps: Vec<f64>,
    /// Overrides the automatic Tikhonov weight of the membrane solve.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    pub chart: ChartSpec,
    pub domain: DomainSpec,
    pub material: MaterialSpec,
    pub forces: ForceSpec,
    pub time: TimeSpec,
    pub mesh: MeshSpec,
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self> {
        let s: Scenario = toml::from_str(text).map_err(|e| HarnessError::Usage(format!("config: {e}")))?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| HarnessError::Usage(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            HarnessError::Usage(m) => HarnessError::Usage(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenarios serialize")
    }

    pub fn builtin(name: &str) -> Result<Self> {
        let unit = |clamped: &[&str]| DomainSpec {
            y1: [0.0, 1.0],
            y2: [0.0, 1.0],
            clamped: clamped.iter().map(|s| s.to_string()).collect(),
        };
        let material = MaterialSpec {
            lambda: 1.0,
            mu: 1.0,
            theta: 1.0,
            rho: 1.0,
        };
        let time = TimeSpec {
            t_final: 1.0,
            steps: 10,
        };
        let mesh = MeshSpec {
            n: 8,
            layers: 4,
            order: 1,
        };
        let eps = vec![0.2, 0.1, 0.05];
        let smooth = ForceSpec::Smooth {
            scale: 1.0,
            profile: ProfileSpec::Constant,
        };
        let s = match name {
            "cylinder-panel" => Scenario {
                name: name.into(),
                first_kind: true,
                eps,
                delta: None,
                chart: ChartSpec::Cylinder { radius: 1.0 },
                domain: unit(&["bottom"]),
                material,
                forces: ForceSpec::Compatible { scale: 1.0 },
                time,
                mesh,
            },
            "cylinder-smooth" => Scenario {
                name: name.into(),
                first_kind: true,
                eps,
                delta: None,
                chart: ChartSpec::Cylinder { radius: 1.0 },
                domain: unit(&["bottom"]),
                material,
                forces: smooth,
                time,
                mesh,
            },
            "elliptic-cap" => Scenario {
                name: name.into(),
                first_kind: true,
                eps,
                delta: None,
                chart: ChartSpec::EllipticCap { c1: 0.5, c2: 0.5 },
                domain: DomainSpec {
                    y1: [-0.5, 0.5],
                    y2: [-0.5, 0.5],
                    clamped: ["bottom", "right", "top", "left"].map(String::from).to_vec(),
                },
                material,
                forces: smooth,
                time,
                mesh: MeshSpec {
                    n: 6,
                    layers: 4,
                    order: 1,
                },
            },
            "hypar" => Scenario {
                name: name.into(),
                first_kind: false,
                eps,
                delta: None,
                chart: ChartSpec::Hypar { c: 0.5 },
                domain: unit(&["left"]),
                material,
                forces: ForceSpec::Smooth {
                    scale: 1.0,
                    profile: ProfileSpec::Ramp { t_ramp: 0.5 },
                },
                time,
                mesh: MeshSpec {
                    n: 6,
                    layers: 4,
                    order: 1,
                },
            },
            "plate" => Scenario {
                name: name.into(),
                first_kind: false,
                eps,
                delta: None,
                chart: ChartSpec::Plane,
                domain: unit(&["left"]),
                material,
                forces: ForceSpec::Smooth {
                    scale: 1.0,
                    profile: ProfileSpec::Sine { omega: 3.0 },
                },
                time,
                mesh: MeshSpec {
                    n: 6,
                    layers: 4,
                    order: 1,
                },
            },
            other => {
                return Err(HarnessError::Usage(format!(
                    "unknown scenario `{other}`; built-ins: {}",
                    BUILTIN_SCENARIOS.join(", ")
                )))
            }
        };
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HarnessError::Usage(format!("scenario `{}`: {m}", self.name)));
        if self.eps.is_empty() {
            return bad("eps list is empty".into());
        }
        if self.eps.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
            return bad(format!("eps values must be positive: {:?}", self.eps));
        }
        if self.eps.windows(2).any(|w| w[1] >= w[0]) {
            return bad(format!("eps list must be strictly decreasing: {:?}", self.eps));
        }
        if let Some(d) = self.delta {
            if !(d >= 0.0) || !d.is_finite() {
                return bad(format!("delta must be nonnegative, got {d}"));
            }
        }
        self.sides()?;
        self.params()?;
        if let Err(e) = TimeGrid::new(self.time.t_final, self.time.steps) {
            return bad(e.to_string());
        }
        if self.mesh.n == 0 || self.mesh.layers == 0 || !(1..=2).contains(&self.mesh.order) {
            return bad(format!(
                "mesh needs n >= 1, layers >= 1 and order 1 or 2, got {:?}",
                self.mesh
            ));
        }
        for r in [self.domain.y1, self.domain.y2] {
            if !(r[1] > r[0]) {
                return bad(format!("empty domain interval {r:?}"));
            }
        }
        match self.chart {
            ChartSpec::Cylinder { radius } if !(radius > 0.0) => {
                return bad(format!("radius must be positive, got {radius}"))
            }
            _ => {}
        }
        if let ForceSpec::Compatible { .. } = self.forces {
            if self.sides()? != [Side::Bottom] {
                return bad("the compatible preset vanishes only on the bottom edge; clamp exactly `bottom`".into());
            }
        }
        Ok(())
    }

    pub fn sides(&self) -> Result<Vec<Side>> {
        self.domain
            .clamped
            .iter()
            .map(|s| {
                Side::parse(s).ok_or_else(|| {
                    HarnessError::Usage(format!(
                        "scenario `{}`: unknown side `{s}` (bottom, right, top, left)",
                        self.name
                    ))
                })
            })
            .collect()
    }

    pub fn params(&self) -> Result<MaterialParams> {
        let m = self.material;
        MaterialParams::new(m.lambda, m.mu, m.theta, m.rho)
            .map_err(|e| HarnessError::Usage(format!("scenario `{}`: {e}", self.name)))
    }

    pub fn grid(&self) -> TimeGrid {
        TimeGrid::new(self.time.t_final, self.time.steps).expect("validated")
    }

    pub fn chart(&self) -> Arc<dyn MidsurfaceChart> {
        match self.chart {
            ChartSpec::Plane => Arc::new(Plane),
            ChartSpec::Cylinder { radius } => Arc::new(CylinderPanel { radius }),
            ChartSpec::EllipticCap { c1, c2 } => Arc::new(EllipticParaboloid { c1, c2 }),
            ChartSpec::Hypar { c } => Arc::new(HyperbolicParaboloid { c }),
        }
    }

    pub fn mesh2d(&self) -> Result<Mesh2D> {
        let n = self.mesh.n;
        Ok(Mesh2D::rectangle(self.domain.y1, self.domain.y2, n, n, &self.sides()?)?)
    }

    pub fn mesh3d(&self, base: &Mesh2D) -> Result<Mesh3D> {
        Ok(Mesh3D::extrude(base, self.mesh.layers, self.mesh.order)?)
    }

    pub fn forces(&self) -> Result<Arc<dyn AdmissibleForces>> {
        Ok(match self.forces {
            ForceSpec::Zero => Arc::new(SeparableForces::zero()),
            ForceSpec::Smooth { scale, profile } => Arc::new(SeparableForces::smooth(scale, profile.profile())),
            ForceSpec::Compatible { scale } => Arc::new(CompatibleForces {
                chart: self.chart(),
                params: self.params()?,
                origin: [self.domain.y1[0], self.domain.y2[0]],
                scale,
            }),
        })
    }

    /// The exact limit displacement `ξ*(t, y)` and its gradient, when the
    /// force preset prescribes one.
    pub fn exact_limit(&self) -> Option<impl Fn(f64, Point2) -> FieldJet2> {
        match self.forces {
            ForceSpec::Compatible { scale } => {
                let origin = [self.domain.y1[0], self.domain.y2[0]];
                Some(move |t: f64, y: Point2| {
                    let mut jet = compatible_shape(y, origin, scale);
                    jet.value = jet.value.map(|v| t * v);
                    jet.grad = jet.grad.map(|r| r.map(|v| t * v));
                    jet
                })
            }
            _ => None,
        }
    }
}

/// `X(y) = scale · (0.3 s², 0.2 s² r, 0.5 s² (1 + 0.5 r))` with
/// `r = y1 − y1_min`, `s = y2 − y2_min`.
pub fn compatible_shape(y: Point2, origin: Point2, scale: f64) -> FieldJet2 {
    let r = y[0] - origin[0];
    let s = y[1] - origin[1];
    let c = scale;
    FieldJet2 {
        value: [c * 0.3 * s * s, c * 0.2 * s * s * r, c * 0.5 * s * s * (1.0 + 0.5 * r)],
        grad: [
            [0.0, c * 0.6 * s],
            [c * 0.2 * s * s, c * 0.4 * s * r],
            [c * 0.25 * s * s, c * s * (1.0 + 0.5 * r)],
        ],
        hessian3: None,
    }
}

/// `F^{αβ} = ½ [t a + b − m(t) c] γ(X)`, `F^{i3} = 0`, with
/// `m(t) = (k t − 1 + e^{−k t}) / k²`, so that the membrane load equals the
/// membrane stress of `ξ* = t X`.
#[derive(Debug, Clone)]
pub struct CompatibleForces {
    pub chart: Arc<dyn MidsurfaceChart>,
    pub params: MaterialParams,
    pub origin: Point2,
    pub scale: f64,
}

/// `(k t − 1 + e^{−k t}) / k² = ∫_0^t e^{−k(t−s)} s ds`.
pub fn memory_of_ramp(k: f64, t: f64) -> f64 {
    let z = k * t;
    if z < 1e-3 {
        // series: t²/2 − k t³/6 + k² t⁴/24
        t * t * (0.5 - z / 6.0 + z * z / 24.0)
    } else {
        (z - 1.0 + (-z).exp()) / (k * k)
    }
}

impl AdmissibleForces for CompatibleForces {
    fn stress(&self, t: f64, y: Point2, _x3: f64) -> Sym3 {
        let geom = surface_frame(&*self.chart, y).expect("chart is regular on the scenario domain");
        let mt = membrane_tensors(&geom.metric_inv, &self.params);
        let g = gamma_ab(&compatible_shape(y, self.origin, self.scale), &geom);
        let m = memory_of_ramp(self.params.k(), t);
        let mut f = [[0.0; 3]; 3];
        for al in 0..2 {
            for be in 0..2 {
                let mut v = 0.0;
                for s in 0..2 {
                    for r in 0..2 {
                        v += (t * mt.a.c[al][be][s][r] + mt.b.c[al][be][s][r] - m * mt.c.c[al][be][s][r]) * g[s][r];
                    }
                }
                f[al][be] = 0.5 * v;
            }
        }
        f
    }
}
