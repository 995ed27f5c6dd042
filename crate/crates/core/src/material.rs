//! Isotropic elasticity/viscosity tensors and the membrane tensors of the limit model.

use crate::error::{Error, Result};
use nalgebra::{Matrix2, Matrix3};
use rand::Rng;

/// Lamé coefficients `(λ, μ)` and viscosity coefficients `(θ, ρ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialParams {
    pub lambda: f64,
    pub mu: f64,
    pub theta: f64,
    pub rho: f64,
}

impl MaterialParams {
    /// Requires `λ ≥ 0` and `μ, θ, ρ > 0`; the purely elastic case is not supported.
    pub fn new(lambda: f64, mu: f64, theta: f64, rho: f64) -> Result<Self> {
        let all = [lambda, mu, theta, rho];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidMaterial(format!("non-finite coefficient in {all:?}")));
        }
        if lambda < 0.0 {
            return Err(Error::InvalidMaterial(format!("lambda = {lambda} < 0")));
        }
        for (name, v) in [("mu", mu), ("theta", theta), ("rho", rho)] {
            if !(v > 0.0) {
                return Err(Error::InvalidMaterial(format!("{name} = {v} must be positive")));
            }
        }
        Ok(Self { lambda, mu, theta, rho })
    }

    /// Decay rate `k = (λ + 2μ) / (θ + ρ)` of the memory kernel.
    pub fn k(&self) -> f64 {
        (self.lambda + 2.0 * self.mu) / (self.theta + self.rho)
    }

    /// `Λ = λ/θ − (λ + 2μ)/(θ + ρ)`.
    pub fn big_lambda(&self) -> f64 {
        self.lambda / self.theta - self.k()
    }

    /// Decay rate `2μ/ρ` of the transverse shear closure.
    pub fn shear_decay(&self) -> f64 {
        2.0 * self.mu / self.rho
    }
}

/// Fourth-order tensor with components `T[i][j][k][l]` in `D` dimensions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourthOrder<const D: usize> {
    pub c: [[[[f64; D]; D]; D]; D],
}

pub type Tensor3D = FourthOrder<3>;
pub type Tensor2D = FourthOrder<2>;

impl<const D: usize> FourthOrder<D> {
    pub fn zeros() -> Self {
        Self {
            c: [[[[0.0; D]; D]; D]; D],
        }
    }

    /// `λ' m^{ij} m^{kl} + μ' (m^{ik} m^{jl} + m^{il} m^{jk})`.
    pub fn isotropic(m: &[[f64; D]; D], lam: f64, mu: f64) -> Self {
        let mut t = Self::zeros();
        for i in 0..D {
            for j in 0..D {
                for k in 0..D {
                    for l in 0..D {
                        t.c[i][j][k][l] = lam * m[i][j] * m[k][l] + mu * (m[i][k] * m[j][l] + m[i][l] * m[j][k]);
                    }
                }
            }
        }
        t
    }

    /// `T^{ijkl} s_{kl} t_{ij}`.
    pub fn bilinear(&self, s: &[[f64; D]; D], t: &[[f64; D]; D]) -> f64 {
        let mut v = 0.0;
        for i in 0..D {
            for j in 0..D {
                let mut inner = 0.0;
                for k in 0..D {
                    for l in 0..D {
                        inner += self.c[i][j][k][l] * s[k][l];
                    }
                }
                v += inner * t[i][j];
            }
        }
        v
    }

    /// `T^{ijkl} t_{kl}`.
    pub fn apply(&self, t: &[[f64; D]; D]) -> [[f64; D]; D] {
        let mut out = [[0.0; D]; D];
        for i in 0..D {
            for j in 0..D {
                let mut v = 0.0;
                for k in 0..D {
                    for l in 0..D {
                        v += self.c[i][j][k][l] * t[k][l];
                    }
                }
                out[i][j] = v;
            }
        }
        out
    }

    pub fn sup_distance(&self, other: &Self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..D {
            for j in 0..D {
                for k in 0..D {
                    for l in 0..D {
                        d = d.max((self.c[i][j][k][l] - other.c[i][j][k][l]).abs());
                    }
                }
            }
        }
        d
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut t = *self;
        for i in 0..D {
            for j in 0..D {
                for k in 0..D {
                    for l in 0..D {
                        t.c[i][j][k][l] *= s;
                    }
                }
            }
        }
        t
    }
}

fn m3(g: &Matrix3<f64>) -> [[f64; 3]; 3] {
    std::array::from_fn(|i| std::array::from_fn(|j| g[(i, j)]))
}

fn m2(a: &Matrix2<f64>) -> [[f64; 2]; 2] {
    std::array::from_fn(|i| std::array::from_fn(|j| a[(i, j)]))
}

/// `A^{ijkl} = λ g^{ij} g^{kl} + μ (g^{ik} g^{jl} + g^{il} g^{jk})`.
pub fn tensor3d_elastic(gctr: &Matrix3<f64>, params: &MaterialParams) -> Tensor3D {
    Tensor3D::isotropic(&m3(gctr), params.lambda, params.mu)
}

/// `B^{ijkl} = θ g^{ij} g^{kl} + (ρ/2) (g^{ik} g^{jl} + g^{il} g^{jk})`.
pub fn tensor3d_viscous(gctr: &Matrix3<f64>, params: &MaterialParams) -> Tensor3D {
    Tensor3D::isotropic(&m3(gctr), params.theta, 0.5 * params.rho)
}

/// Limits `(A(0), B(0))` as thickness vanishes, written out component class
/// by component class; entries with an odd number of transverse indices vanish.
pub fn tensor3d_limits(a_ctr: &Matrix2<f64>, params: &MaterialParams) -> (Tensor3D, Tensor3D) {
    let build = |lam: f64, mu: f64| {
        let mut t = Tensor3D::zeros();
        let a = |i: usize, j: usize| a_ctr[(i, j)];
        for al in 0..2 {
            for be in 0..2 {
                for si in 0..2 {
                    for ta in 0..2 {
                        t.c[al][be][si][ta] =
                            lam * a(al, be) * a(si, ta) + mu * (a(al, si) * a(be, ta) + a(al, ta) * a(be, si));
                    }
                }
                t.c[al][be][2][2] = lam * a(al, be);
                t.c[2][2][al][be] = lam * a(al, be);
                // α3σ3 and its index permutations
                let shear = mu * a(al, be);
                t.c[al][2][be][2] = shear;
                t.c[2][al][be][2] = shear;
                t.c[al][2][2][be] = shear;
                t.c[2][al][2][be] = shear;
            }
        }
        t.c[2][2][2][2] = lam + 2.0 * mu;
        t
    };
    (build(params.lambda, params.mu), build(params.theta, 0.5 * params.rho))
}

/// Pointwise contravariant membrane tensors of the limit problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MembraneTensors2D {
    pub a: Tensor2D,
    pub b: Tensor2D,
    pub c: Tensor2D,
}

/// Builds `a`, `b`, `c` from the contravariant surface metric.
///
/// `a = (2λρ² + 4μθ²)/(θ+ρ)² a⊗a + 2μ(…)`, `b = 2θρ/(θ+ρ) a⊗a + ρ(…)`,
/// `c = 2(θΛ)²/(θ+ρ) a⊗a`, where `(…)` is the symmetrized product.
pub fn membrane_tensors(a_ctr: &Matrix2<f64>, params: &MaterialParams) -> MembraneTensors2D {
    let MaterialParams { lambda, mu, theta, rho } = *params;
    let s = theta + rho;
    let m = m2(a_ctr);
    let a_dyad = (2.0 * lambda * rho * rho + 4.0 * mu * theta * theta) / (s * s);
    let b_dyad = 2.0 * theta * rho / s;
    let tl = theta * params.big_lambda();
    let c_dyad = 2.0 * tl * tl / s;
    MembraneTensors2D {
        a: Tensor2D::isotropic(&m, a_dyad, 2.0 * mu),
        b: Tensor2D::isotropic(&m, b_dyad, rho),
        c: Tensor2D::isotropic(&m, c_dyad, 0.0),
    }
}

/// Smallest sampled value of `T^{ijkl} t_{kl} t_{ij}` over `n_samples` random
/// symmetric arguments of unit Frobenius norm.
///
/// For three-dimensional tensors a minimum `≤ 0` is reported as
/// [`Error::NonElliptic`]; two-dimensional tensors may legitimately be
/// degenerate (the memory tensor `c` vanishes on trace-free arguments).
pub fn ellipticity_estimate<const D: usize, R: Rng + ?Sized>(
    tensor: &FourthOrder<D>,
    n_samples: usize,
    rng: &mut R,
) -> Result<f64> {
    let mut minimum = f64::INFINITY;
    for _ in 0..n_samples {
        let mut t = [[0.0; D]; D];
        for i in 0..D {
            for j in i..D {
                let v: f64 = rng.random_range(-1.0..1.0);
                t[i][j] = v;
                t[j][i] = v;
            }
        }
        let norm2: f64 = t.iter().flatten().map(|v| v * v).sum();
        if norm2 == 0.0 {
            continue;
        }
        let q = tensor.bilinear(&t, &t) / norm2;
        minimum = minimum.min(q);
    }
    if D == 3 && !(minimum > 0.0) {
        return Err(Error::NonElliptic { minimum });
    }
    Ok(minimum)
}
