//! Command-line interface: argument parsing and the five subcommands.

use crate::convergence::{membrane_reference, run_convergence};
use crate::error::{HarnessError, Result};
use crate::properties::{run_properties, Suite, DEFAULT_SEED};
use crate::report::{convergence_table, emit_report};
use crate::scenario::{Scenario, BUILTIN_SCENARIOS};
use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};
use viscoshell::geometry::expansion_residuals;
use viscoshell::io::{field_csv_2d, field_csv_3d, geometry_csv, table_csv, write_file};
use viscoshell::solver3d::{assemble_3d, average_to_2d, d3_norms, solve_3d};
use viscoshell::Execution;

#[derive(Debug, Parser)]
#[command(
    name = "viscoshell",
    version,
    about = "Thin viscoelastic shells: 3D solves, membrane limit and thickness sweeps"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Thickness expansions of the chart's metric and Christoffel symbols.
    GeometryCheck(Common),
    /// The limit membrane problem with long-term memory.
    Solve2d(Common),
    /// The scaled 3D Kelvin-Voigt problem at every eps of the scenario.
    Solve3d(Common),
    /// The eps sweep: distance of the 3D averages to the membrane solution.
    Converge(Common),
    /// A module property suite with fixed seeds.
    Properties(PropertiesArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Scenario file (TOML). Overrides `--scenario`.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Built-in scenario name.
    #[arg(long, default_value = "cylinder-panel")]
    pub scenario: String,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Run every loop on one thread.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Args)]
pub struct PropertiesArgs {
    /// One of geometry, material, kinematics, memory, solver2d, solver3d.
    #[arg(long)]
    pub suite: String,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub sequential: bool,
}

fn execution(sequential: bool) -> Execution {
    if sequential {
        Execution::Sequential
    } else {
        Execution::default()
    }
}

impl Common {
    pub fn scenario(&self) -> Result<Scenario> {
        match &self.config {
            Some(path) => Scenario::load(path),
            None => Scenario::builtin(&self.scenario),
        }
    }
}

/// Runs a parsed command; returns the text printed on success.
pub fn run(cli: Cli) -> Result<String> {
    match cli.command {
        Command::GeometryCheck(c) => geometry_check(&c),
        Command::Solve2d(c) => solve2d(&c),
        Command::Solve3d(c) => solve3d(&c),
        Command::Converge(c) => converge(&c),
        Command::Properties(p) => properties(&p),
    }
}

fn write(path: &Path, contents: &str) -> Result<()> {
    Ok(write_file(path, contents)?)
}

fn geometry_check(c: &Common) -> Result<String> {
    let sc = c.scenario()?;
    let (y1, y2) = (sc.domain.y1, sc.domain.y2);
    let n = 6;
    let points: Vec<[f64; 2]> = (0..n * n)
        .map(|i| {
            let s = ((i / n) as f64 + 0.5) / n as f64;
            let t = ((i % n) as f64 + 0.5) / n as f64;
            [y1[0] + s * (y1[1] - y1[0]), y2[0] + t * (y2[1] - y2[0])]
        })
        .collect();
    let rows = expansion_residuals(&*sc.chart(), &sc.eps, &points)?;
    let csv = geometry_csv(&rows);
    write(&c.out.join("geometry.csv"), &csv)?;
    let mut s = format!("scenario {}: geometry expansions over eps {:?}\n", sc.name, sc.eps);
    for r in rows.iter().filter(|r| r.eps == sc.eps[0]) {
        s.push_str(&format!("{:<24} slope {:>8.4}\n", r.quantity.name(), r.fitted_slope));
    }
    Ok(s)
}

fn solve2d(c: &Common) -> Result<String> {
    let sc = c.scenario()?;
    let exec = execution(c.sequential);
    let mesh = sc.mesh2d()?;
    let reference = membrane_reference(&sc, &mesh, exec)?;
    let sys = &reference.system;
    let grid = reference.history.grid;
    let dir = c.out.join("solve2d");
    let mut rows = Vec::new();
    for (n, field) in reference.history.fields.iter().enumerate() {
        let unknowns = sys.dofs.restrict(field);
        rows.push(vec![grid.node(n), sys.seminorm(&unknowns), sys.energy(&unknowns)]);
        write(
            &dir.join(format!("fields/step_{n:04}.csv")),
            &field_csv_2d(&mesh, field)?,
        )?;
    }
    write(
        &dir.join("summary.csv"),
        &table_csv(&["t", "seminorm", "energy"], &rows),
    )?;
    let k = reference.kernel;
    Ok(format!(
        "scenario {}: membrane kernel {:?} (sigma_min {:.3e}); final seminorm {:.6e}; wrote {}\n",
        sc.name,
        k.kind,
        k.sigma_min,
        rows.last().map_or(0.0, |r| r[1]),
        dir.display()
    ))
}

fn solve3d(c: &Common) -> Result<String> {
    let sc = c.scenario()?;
    let exec = execution(c.sequential);
    let mesh2d = sc.mesh2d()?;
    let mesh3d = sc.mesh3d(&mesh2d)?;
    let forces = sc.forces()?;
    let grid = sc.grid();
    let mut s = format!("scenario {}: 3D solves\n", sc.name);
    for &eps in &sc.eps {
        let sys = assemble_3d(&mesh3d, sc.chart(), eps, &sc.params()?, exec)?;
        let h = solve_3d(&sys, &*forces, &grid, None)?;
        let d3 = d3_norms(&sys, &h)?;
        let avg = average_to_2d(&h, &mesh3d, &mesh2d)?;
        let dir = c.out.join(format!("solve3d/eps_{eps}"));
        let rows: Vec<Vec<f64>> = h
            .fields
            .iter()
            .enumerate()
            .map(|(n, f)| vec![grid.node(n), sys.energy(&sys.dofs.restrict(f)), d3[n]])
            .collect();
        write(&dir.join("summary.csv"), &table_csv(&["t", "energy", "d3_norm"], &rows))?;
        for (n, f) in avg.fields.iter().enumerate() {
            write(
                &dir.join(format!("average/step_{n:04}.csv")),
                &field_csv_2d(&mesh2d, f)?,
            )?;
        }
        write(&dir.join("final_3d.csv"), &field_csv_3d(&mesh3d, h.final_field())?)?;
        s.push_str(&format!(
            "eps {eps}: {} unknowns, final energy {:.6e}\n",
            sys.num_unknowns(),
            rows.last().map_or(0.0, |r| r[1])
        ));
    }
    Ok(s)
}

fn converge(c: &Common) -> Result<String> {
    let sc = c.scenario()?;
    let report = run_convergence(&sc, execution(c.sequential))?;
    for r in &report.rows {
        eprintln!("eps {}: {:.2?}", r.eps, r.runtime);
    }
    emit_report(&report, &c.out)?;
    let table = convergence_table(&report);
    if !report.distances_strictly_decrease() {
        return Err(HarnessError::Failure(format!(
            "distances do not strictly decrease\n{table}"
        )));
    }
    Ok(table)
}

fn properties(p: &PropertiesArgs) -> Result<String> {
    let suite: Suite = p.suite.parse()?;
    if let Some(path) = &p.config {
        // Suites use their own fixed scenarios; a config is only validated.
        Scenario::load(path)?;
    }
    let report = run_properties(suite, p.seed, execution(p.sequential))?;
    let text = report.to_text();
    write(&p.out.join(format!("properties_{suite}.txt")), &text)?;
    if !report.all_passed() {
        return Err(HarnessError::Failure(text));
    }
    Ok(text)
}

/// Names of the built-in scenarios, for help output.
pub fn builtin_names() -> String {
    BUILTIN_SCENARIOS.join(", ")
}
