//! Exponential-kernel convolutions `H(t) = ∫_0^t e^{-k(t-s)} f(s) ds`, the
//! closures they produce for the transverse strains, and the membrane load `φ`.

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::fem::gauss_legendre;
use crate::forces::AdmissibleForces;
use crate::geometry::Point2;
use crate::material::MaterialParams;
use nalgebra::Matrix2;

/// Uniform grid `t_n = n T / N`, `n = 0..=N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t_final: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(t_final: f64, steps: usize) -> Result<Self> {
        if !(t_final > 0.0) || !t_final.is_finite() {
            return Err(Error::InvalidTimeGrid(format!("final time {t_final} must be positive")));
        }
        if steps == 0 {
            return Err(Error::InvalidTimeGrid("at least one step is required".into()));
        }
        Ok(Self { t_final, steps })
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Number of nodes, `N + 1`.
    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dt(&self) -> f64 {
        self.t_final / self.steps as f64
    }

    pub fn node(&self, n: usize) -> f64 {
        if n == self.steps {
            self.t_final
        } else {
            n as f64 * self.dt()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len()).map(|n| self.node(n)).collect()
    }

    /// Trapezoidal rule for samples on the grid nodes.
    pub fn trapezoid(&self, samples: &[f64]) -> f64 {
        assert_eq!(samples.len(), self.len());
        let inner: f64 = samples[1..self.steps].iter().sum();
        self.dt() * (inner + 0.5 * (samples[0] + samples[self.steps]))
    }
}

/// Coefficients of one exact exponential-integrator step:
/// `H_{n+1} = decay H_n + w0 f_n + w1 f_{n+1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpWeights {
    pub decay: f64,
    pub w0: f64,
    pub w1: f64,
}

// Below this value of k·dt the closed forms lose digits to cancellation and
// the Taylor series is used instead.
const SERIES_THRESHOLD: f64 = 1e-2;
// Above this value e^{-k dt} underflows; the steady-state limit is exact in f64.
const OVERFLOW_GUARD: f64 = 700.0;

/// Exact weights for `∫_{t_n}^{t_{n+1}} e^{-k(t_{n+1}-s)} f(s) ds` with `f`
/// linear between its endpoint values.
pub fn exp_weights(k: f64, dt: f64) -> Result<ExpWeights> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::InvalidDecayRate(k));
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidTimeGrid(format!("step {dt} must be positive")));
    }
    let z = k * dt;
    if z > OVERFLOW_GUARD {
        return Ok(ExpWeights {
            decay: 0.0,
            w0: 1.0 / (k * z),
            w1: (z - 1.0) / (k * z),
        });
    }
    let decay = (-z).exp();
    // w0 = dt (1 - (1+z) e^{-z}) / z²,  w1 = dt (z - 1 + e^{-z}) / z²
    let (p0, p1) = if z < SERIES_THRESHOLD {
        let mut p0 = 0.0;
        let mut p1 = 0.0;
        let mut term = 0.5; // (-z)^m / (m+2)!
        for m in 0..12 {
            p0 += (m as f64 + 1.0) * term;
            p1 += term;
            term *= -z / (m as f64 + 3.0);
        }
        (p0, p1)
    } else {
        let em1 = -(-z).exp_m1(); // 1 - e^{-z}
        ((em1 - z * decay) / (z * z), (z - em1) / (z * z))
    };
    Ok(ExpWeights {
        decay,
        w0: dt * p0,
        w1: dt * p1,
    })
}

/// One recursion step of the convolution `H`.
pub fn conv_step(h_n: f64, f_n: f64, f_np1: f64, k: f64, dt: f64) -> Result<f64> {
    let w = exp_weights(k, dt)?;
    Ok(w.decay * h_n + w.w0 * f_n + w.w1 * f_np1)
}

/// Convolution values `H_n` at every node for samples `f` on the grid.
pub fn convolve(samples: &[f64], k: f64, grid: &TimeGrid) -> Result<Vec<f64>> {
    if samples.len() != grid.len() {
        return Err(Error::HistoryLength {
            expected: grid.len(),
            got: samples.len(),
        });
    }
    let w = exp_weights(k, grid.dt())?;
    let mut h = Vec::with_capacity(samples.len());
    h.push(0.0);
    for n in 0..grid.steps() {
        let prev = h[n];
        h.push(w.decay * prev + w.w0 * samples[n] + w.w1 * samples[n + 1]);
    }
    Ok(h)
}

/// Recursive convolution state for a flat array of independent scalar channels.
#[derive(Debug, Clone)]
pub struct MemoryAccumulator {
    decay_rate: f64,
    weights: ExpWeights,
    state: Vec<f64>,
    exec: Execution,
}

impl MemoryAccumulator {
    /// All channels start at zero.
    pub fn new(decay_rate: f64, dt: f64, channels: usize) -> Result<Self> {
        Ok(Self {
            decay_rate,
            weights: exp_weights(decay_rate, dt)?,
            state: vec![0.0; channels],
            exec: Execution::Sequential,
        })
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn decay_rate(&self) -> f64 {
        self.decay_rate
    }

    pub fn weights(&self) -> ExpWeights {
        self.weights
    }

    pub fn state(&self) -> &[f64] {
        &self.state
    }

    pub fn channels(&self) -> usize {
        self.state.len()
    }

    /// The part of `H_{n+1}` known before `f_{n+1}`: `decay H_n + w0 f_n`.
    pub fn explicit_part(&self, f_n: &[f64]) -> Vec<f64> {
        let w = self.weights;
        self.state
            .iter()
            .zip(f_n)
            .map(|(h, f)| w.decay * h + w.w0 * f)
            .collect()
    }

    /// Advances every channel by one step.
    pub fn step(&mut self, f_n: &[f64], f_np1: &[f64]) {
        assert_eq!(f_n.len(), self.state.len());
        assert_eq!(f_np1.len(), self.state.len());
        let w = self.weights;
        self.exec.for_each_mut(&mut self.state, |i, h| {
            *h = w.decay * *h + w.w0 * f_n[i] + w.w1 * f_np1[i];
        });
    }
}

/// Transverse shear strain `e_{α||3}` driven by `a_{ασ} F^{σ3}`:
/// `e(t) = (1/ρ) ∫_0^t e^{-(2μ/ρ)(t-s)} f(s) ds`, the solution of
/// `2μ e + ρ ė = f`, `e(0) = 0`.
pub fn shear_closure(forcing: &[f64], grid: &TimeGrid, params: &MaterialParams) -> Result<Vec<f64>> {
    let h = convolve(forcing, params.shear_decay(), grid)?;
    Ok(h.into_iter().map(|v| v / params.rho).collect())
}

/// Transverse normal strain `e_{3||3}` from `F^{33}` and the in-plane trace
/// `a^{αβ} e_{α||β}`, the solution of
/// `λ tr + (λ+2μ) e + θ tr' + (θ+ρ) ė = F^{33}` with zero initial strain.
pub fn normal_closure(f33: &[f64], trace: &[f64], grid: &TimeGrid, params: &MaterialParams) -> Result<Vec<f64>> {
    if trace.len() != grid.len() {
        return Err(Error::HistoryLength {
            expected: grid.len(),
            got: trace.len(),
        });
    }
    let k = params.k();
    let s = params.theta + params.rho;
    let hf = convolve(f33, k, grid)?;
    let ht = convolve(trace, k, grid)?;
    let lam = params.big_lambda();
    Ok((0..grid.len())
        .map(|n| hf[n] / s - params.theta / s * (trace[n] + lam * ht[n]))
        .collect())
}

/// Number of Gauss points used for thickness integrals of force fields.
pub const THICKNESS_GAUSS_POINTS: usize = 8;

/// Membrane load `φ^{αβ}(t_n)` at `y` for every grid node:
///
/// `φ^{αβ} = ∫_{-1}^{1} F^{αβ} − θ/(θ+ρ) F^{33} a^{αβ} − θΛ/(θ+ρ) (∫_0^t e^{-k(t-s)} F^{33} ds) a^{αβ} dx3`.
///
/// The memory term carries a minus sign: it is what remains of the in-plane
/// stress after `e_{3||3}` is eliminated with [`normal_closure`].
pub fn phi_ab(
    forces: &dyn AdmissibleForces,
    y: Point2,
    a_ctr: &Matrix2<f64>,
    grid: &TimeGrid,
    params: &MaterialParams,
) -> Result<Vec<Matrix2<f64>>> {
    let (xg, wg) = gauss_legendre(THICKNESS_GAUSS_POINTS);
    let mut inplane = Vec::with_capacity(grid.len());
    let mut normal = Vec::with_capacity(grid.len());
    for t in grid.nodes() {
        let mut fab = Matrix2::zeros();
        let mut f33 = 0.0;
        for (x3, w) in xg.iter().zip(&wg) {
            let f = forces.stress(t, y, *x3);
            for a in 0..2 {
                for b in 0..2 {
                    fab[(a, b)] += w * f[a][b];
                }
            }
            f33 += w * f[2][2];
        }
        inplane.push(fab);
        normal.push(f33);
    }
    let memory = convolve(&normal, params.k(), grid)?;
    let s = params.theta + params.rho;
    let c_now = params.theta / s;
    let c_mem = params.theta * params.big_lambda() / s;
    Ok((0..grid.len())
        .map(|n| inplane[n] - a_ctr * (c_now * normal[n] + c_mem * memory[n]))
        .collect())
}
