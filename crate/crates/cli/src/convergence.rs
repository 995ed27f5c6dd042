//! The thickness sweep: 3D solutions at each `ε`, transversal averages,
//! and their distance to the membrane solution on the shared in-plane mesh.

use crate::error::{HarnessError, Result};
use crate::scenario::Scenario;
use std::time::{Duration, Instant};
use viscoshell::fem::Factorization;
use viscoshell::forces::AdmissibleForces;
use viscoshell::kinematics::space_time_seminorm;
use viscoshell::memory::{phi_ab, TimeGrid};
use viscoshell::mesh::{Mesh2D, Mesh3D};
use viscoshell::solver2d::{
    assemble_membrane, kernel_diagnostic, solve_membrane, DisplacementHistory, KernelKind, KernelReport,
    MembraneOptions, MembraneSystem, PhiTable,
};
use viscoshell::solver3d::{assemble_3d, assemble_admissible_rhs, average_to_2d, d3_norms, solve_3d, ShellSystem3D};
use viscoshell::Execution;

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub eps: f64,
    /// `|ū(ε) − ξ_h|^M_{T,ω}`.
    pub distance: f64,
    /// `(∫_0^T |∂_3 u(ε)|²_{0,Ω} dt)^{1/2}`.
    pub d3_norm: f64,
    /// Largest dual norm of the load against `‖e(ε; ·)‖_{0,Ω}` over the
    /// grid nodes: an empirical bound constant of the admissible forces.
    pub k0: f64,
    /// Wall time of the row; never written to report files.
    pub runtime: Duration,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioRow {
    pub eps_from: f64,
    pub eps_to: f64,
    pub distance_ratio: f64,
    pub d3_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub scenario: String,
    pub kernel: Option<KernelReport>,
    /// `|ξ_h|^M_{T,ω}`, for scale.
    pub reference_norm: f64,
    /// Sorted by `eps` descending.
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    pub fn empty(scenario: &str) -> Self {
        Self {
            scenario: scenario.into(),
            kernel: None,
            reference_norm: 0.0,
            rows: Vec::new(),
        }
    }

    /// Consecutive ratios `previous / next`.
    pub fn ratios(&self) -> Vec<RatioRow> {
        self.rows
            .windows(2)
            .map(|w| RatioRow {
                eps_from: w[0].eps,
                eps_to: w[1].eps,
                distance_ratio: w[0].distance / w[1].distance,
                d3_ratio: w[0].d3_norm / w[1].d3_norm,
            })
            .collect()
    }

    pub fn distances_strictly_decrease(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].distance < w[0].distance)
    }

    pub fn d3_strictly_decreases(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].d3_norm < w[0].d3_norm)
    }
}

/// The membrane solution `ξ_h` and the system it lives in.
pub struct MembraneReference {
    pub system: MembraneSystem,
    pub kernel: KernelReport,
    pub history: DisplacementHistory,
}

impl MembraneReference {
    /// `|η|^M_{T,ω}` of a nodal history on the same mesh.
    pub fn space_time(&self, fields: &[Vec<f64>], grid: &TimeGrid) -> f64 {
        let s: Vec<f64> = fields
            .iter()
            .map(|f| self.system.seminorm(&self.system.dofs.restrict(f)))
            .collect();
        space_time_seminorm(&s, grid)
    }

    /// `|ū − ξ_h|^M_{T,ω}`.
    pub fn distance(&self, average: &DisplacementHistory) -> f64 {
        let diffs: Vec<Vec<f64>> = average
            .fields
            .iter()
            .zip(&self.history.fields)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
            .collect();
        self.space_time(&diffs, &self.history.grid)
    }
}

/// `φ^{αβ}` from the scenario forces at every membrane quadrature point.
pub fn phi_table(
    system: &MembraneSystem,
    forces: &dyn AdmissibleForces,
    grid: &TimeGrid,
    exec: Execution,
) -> Result<PhiTable> {
    let params = system.params;
    let per_point = exec
        .map(&system.quad, |qp| phi_ab(forces, qp.y, &qp.a_ctr, grid, &params))
        .into_iter()
        .collect::<viscoshell::Result<Vec<_>>>()?;
    Ok(PhiTable {
        values: (0..grid.len())
            .map(|n| per_point.iter().map(|v| v[n]).collect())
            .collect(),
    })
}

/// Assembles and solves the membrane problem once. A scenario declared first
/// kind whose discrete kernel is nontrivial is rejected.
pub fn membrane_reference(scenario: &Scenario, mesh: &Mesh2D, exec: Execution) -> Result<MembraneReference> {
    let params = scenario.params()?;
    let chart = scenario.chart();
    let system = assemble_membrane(mesh, &*chart, &params, exec)?;
    let kernel = kernel_diagnostic(&system)?;
    if scenario.first_kind && kernel.kind != KernelKind::FirstKind {
        return Err(HarnessError::Failure(format!(
            "scenario `{}` is declared first kind but the discrete kernel is nontrivial (sigma_min = {:e}, threshold {:e})",
            scenario.name, kernel.sigma_min, kernel.threshold
        )));
    }
    let mut options = MembraneOptions::for_kernel(&system, &kernel);
    if let Some(d) = scenario.delta {
        options.delta = d;
    }
    let grid = scenario.grid();
    let forces = scenario.forces()?;
    let phi = phi_table(&system, &*forces, &grid, exec)?;
    let history = solve_membrane(&system, &phi, &grid, &vec![0.0; system.num_unknowns()], &options)?;
    Ok(MembraneReference {
        system,
        kernel,
        history,
    })
}

/// `max_n sup_v L(t_n)(v) / ‖e(ε; v)‖_{0,Ω}`.
pub fn load_bound_constant(system: &ShellSystem3D, forces: &dyn AdmissibleForces, grid: &TimeGrid) -> Result<f64> {
    let (_, strain_gram) = system.korn_grams()?;
    let fact = Factorization::cholesky(&strain_gram)?;
    let mut k0 = 0.0f64;
    for t in grid.nodes() {
        let load = assemble_admissible_rhs(system, forces, t)?;
        let x = fact.solve(&load);
        let dual: f64 = load.iter().zip(&x).map(|(a, b)| a * b).sum();
        k0 = k0.max(dual.max(0.0).sqrt());
    }
    Ok(k0)
}

/// One row of the sweep.
pub fn convergence_row(
    scenario: &Scenario,
    reference: &MembraneReference,
    mesh3d: &Mesh3D,
    eps: f64,
    exec: Execution,
) -> Result<ConvergenceRow> {
    let start = Instant::now();
    let params = scenario.params()?;
    let forces = scenario.forces()?;
    let grid = scenario.grid();
    let with_eps = |e: viscoshell::Error| HarnessError::Failure(format!("eps = {eps}: {e}"));
    let system = assemble_3d(mesh3d, scenario.chart(), eps, &params, exec).map_err(with_eps)?;
    let history = solve_3d(&system, &*forces, &grid, None).map_err(with_eps)?;
    let average = average_to_2d(&history, mesh3d, &reference.system.mesh).map_err(with_eps)?;
    let distance = reference.distance(&average);
    let d3_norm = space_time_seminorm(&d3_norms(&system, &history).map_err(with_eps)?, &grid);
    let k0 = load_bound_constant(&system, &*forces, &grid)?;
    Ok(ConvergenceRow {
        eps,
        distance,
        d3_norm,
        k0,
        runtime: start.elapsed(),
    })
}

/// Runs the whole sweep. The membrane reference is computed once and shared
/// by every row.
pub fn run_convergence(scenario: &Scenario, exec: Execution) -> Result<ConvergenceReport> {
    scenario.validate()?;
    let mesh2d = scenario.mesh2d()?;
    let mesh3d = scenario.mesh3d(&mesh2d)?;
    let reference = membrane_reference(scenario, &mesh2d, exec)?;
    let rows = scenario
        .eps
        .iter()
        .map(|&eps| convergence_row(scenario, &reference, &mesh3d, eps, exec))
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport {
        scenario: scenario.name.clone(),
        kernel: Some(reference.kernel),
        reference_norm: reference.space_time(&reference.history.fields, &reference.history.grid),
        rows,
    })
}
