//! Plain CSV serialization. Numbers use Rust's shortest round-trip
//! formatting, so equal values always produce equal bytes.

use crate::error::{Error, Result};
use crate::geometry::ExpansionRow;
use crate::mesh::{Mesh2D, Mesh3D};
use std::fmt::Write as _;
use std::path::Path;

/// Joins `values` with commas.
pub fn csv_line(values: &[f64]) -> String {
    let mut s = String::new();
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        let _ = write!(s, "{v:e}");
    }
    s
}

/// `node_id,y1,y2,v1,v2,v3` for a full nodal field on a 2D mesh.
pub fn field_csv_2d(mesh: &Mesh2D, field: &[f64]) -> Result<String> {
    if field.len() != 3 * mesh.num_nodes() {
        return Err(Error::DimensionMismatch {
            expected: 3 * mesh.num_nodes(),
            got: field.len(),
        });
    }
    let mut s = String::from("node_id,y1,y2,v1,v2,v3\n");
    for (i, y) in mesh.nodes().iter().enumerate() {
        let _ = writeln!(
            s,
            "{i},{}",
            csv_line(&[y[0], y[1], field[3 * i], field[3 * i + 1], field[3 * i + 2]])
        );
    }
    Ok(s)
}

/// `node_id,y1,y2,x3,v1,v2,v3` for a full nodal field on a prism mesh.
pub fn field_csv_3d(mesh: &Mesh3D, field: &[f64]) -> Result<String> {
    if field.len() != 3 * mesh.num_nodes() {
        return Err(Error::DimensionMismatch {
            expected: 3 * mesh.num_nodes(),
            got: field.len(),
        });
    }
    let mut s = String::from("node_id,y1,y2,x3,v1,v2,v3\n");
    for i in 0..mesh.num_nodes() {
        let p = mesh.node_coords(i);
        let _ = writeln!(
            s,
            "{i},{}",
            csv_line(&[p[0], p[1], p[2], field[3 * i], field[3 * i + 1], field[3 * i + 2]])
        );
    }
    Ok(s)
}

/// `eps,quantity,sup_residual,fitted_slope`.
pub fn geometry_csv(rows: &[ExpansionRow]) -> String {
    let mut s = String::from("eps,quantity,sup_residual,fitted_slope\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{:e},{},{:e},{:e}",
            r.eps,
            r.quantity.name(),
            r.sup_residual,
            r.fitted_slope
        );
    }
    s
}

/// A header plus numeric rows.
pub fn table_csv(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        s.push_str(&csv_line(r));
        s.push('\n');
    }
    s
}

/// Writes `contents` to `path`, creating parent directories; errors name the path.
pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
        }
    }
    std::fs::write(path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
