//! CSV outputs. Every file is written to a temporary sibling and renamed into place.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use crate::diagnostics::CzReport;
use crate::error::{Error, Result};
use crate::problems::{Domain, ExactBundle};
use crate::study::{ConvergenceTable, SolutionField, TableRow};
use crate::Mesh;

pub const TABLE_HEADER: &str = "eps,h,l2_err,l2_order,h1_err,h1_order,lap_err,lap_order";
pub const FIELD_HEADER: &str = "x,y,u_h,u_exact,err,lap_err";
pub const CZ_HEADER: &str = "eps,h,dofs,c_h,adjoint";

/// Shortest decimal that parses back to the same `f64`.
pub fn fmt_real(v: f64) -> String {
    format!("{v:e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_real).unwrap_or_default()
}

/// Writes `contents` to `path` atomically.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn table_csv(table: &ConvergenceTable) -> String {
    let mut out = String::from(TABLE_HEADER);
    out.push('\n');
    for r in &table.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            fmt_real(r.eps),
            fmt_real(r.h),
            fmt_real(r.l2_err),
            fmt_opt(r.l2_order),
            fmt_real(r.h1_err),
            fmt_opt(r.h1_order),
            fmt_real(r.lap_err),
            fmt_opt(r.lap_order)
        );
    }
    out
}

pub fn write_table(table: &ConvergenceTable, path: &Path) -> Result<()> {
    if table.rows.is_empty() {
        return Err(Error::Format { path: path.to_path_buf(), reason: "empty table".into() });
    }
    write_atomic(path, table_csv(table).as_bytes())
}

/// Parses a table written by [`write_table`]. Orders are read back as written.
pub fn parse_table(text: &str, orders_in_eps: bool) -> std::result::Result<ConvergenceTable, String> {
    let mut lines = text.lines();
    if lines.next() != Some(TABLE_HEADER) {
        return Err("unexpected header".into());
    }
    let real = |s: &str| s.parse::<f64>().map_err(|e| format!("{s:?}: {e}"));
    let opt = |s: &str| if s.is_empty() { Ok(None) } else { real(s).map(Some) };
    let mut rows = Vec::new();
    for (k, line) in lines.enumerate() {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 8 {
            return Err(format!("row {}: expected 8 fields, found {}", k + 1, f.len()));
        }
        rows.push(TableRow {
            eps: real(f[0])?,
            h: real(f[1])?,
            l2_err: real(f[2])?,
            l2_order: opt(f[3])?,
            h1_err: real(f[4])?,
            h1_order: opt(f[5])?,
            lap_err: real(f[6])?,
            lap_order: opt(f[7])?,
            singular: false,
            failure: None,
        });
    }
    Ok(ConvergenceTable { rows, orders_in_eps })
}

pub fn read_table(path: &Path, orders_in_eps: bool) -> Result<ConvergenceTable> {
    let text = std::fs::read_to_string(path)?;
    parse_table(&text, orders_in_eps).map_err(|reason| Error::Format { path: path.to_path_buf(), reason })
}

/// Uniform sample grid over the domain's bounding box; `n` points per axis (1 row in 1-D).
pub fn sample_grid(domain: &Domain, n: usize) -> Vec<[f64; 2]> {
    let lin = |a: f64, b: f64, i: usize| if i + 1 == n { b } else { a + (b - a) * i as f64 / (n - 1) as f64 };
    match *domain {
        Domain::Interval { a, b } => (0..n).map(|i| [lin(a, b, i), 0.0]).collect(),
        Domain::Rectangle { x, y } => (0..n).flat_map(|j| (0..n).map(move |i| [lin(x.0, x.1, i), lin(y.0, y.1, j)])).collect(),
        Domain::Disk { radius } => (0..n)
            .flat_map(|j| (0..n).map(move |i| [lin(-radius, radius, i), lin(-radius, radius, j)]))
            .filter(|p| p[0].hypot(p[1]) <= radius)
            .collect(),
    }
}

pub fn field_csv(solution: &SolutionField, exact: Option<&ExactBundle>, points: &[[f64; 2]]) -> String {
    let mut out = String::from(FIELD_HEADER);
    out.push('\n');
    for &p in points {
        let Some(jet) = solution.eval(p) else { continue };
        let (ue, err, lap) = match exact {
            Some(e) => {
                let u = (e.u)(p);
                (fmt_real(u), fmt_real(jet.value - u), fmt_real(jet.laplacian() - (e.laplacian)(p)))
            }
            None => Default::default(),
        };
        let _ = writeln!(out, "{},{},{},{},{},{}", fmt_real(p[0]), fmt_real(p[1]), fmt_real(jet.value), ue, err, lap);
    }
    out
}

pub fn write_field(solution: &SolutionField, exact: Option<&ExactBundle>, domain: &Domain, grid: usize, path: &Path) -> Result<()> {
    if grid < 2 {
        return Err(Error::Config(format!("sample grid needs at least 2 points per axis, got {grid}")));
    }
    write_atomic(path, field_csv(solution, exact, &sample_grid(domain, grid)).as_bytes())
}

pub fn cz_csv(reports: &[CzReport]) -> String {
    let mut out = String::from(CZ_HEADER);
    out.push('\n');
    for r in reports {
        let _ = writeln!(out, "{},{},{},{},{}", fmt_real(r.eps), fmt_real(r.h), r.dofs, fmt_real(r.c_h), r.adjoint);
    }
    out
}

pub fn write_cz(reports: &[CzReport], path: &Path) -> Result<()> {
    write_atomic(path, cz_csv(reports).as_bytes())
}

pub fn write_mesh(mesh: &Mesh, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    mesh.write_text(&mut buf)?;
    write_atomic(path, &buf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::study::ErrorNorms;

    fn table(n: usize) -> ConvergenceTable {
        let rows = (0..n)
            .map(|k| {
                let e = 0.04 / 2f64.powi(k as i32);
                TableRow::new(e, 0.125, ErrorNorms { l2: 0.1 * e + 1e-17, h1: e.sqrt() / 3.0, lap: e.powf(0.25) })
            })
            .collect();
        ConvergenceTable::from_rows(rows, true)
    }

    #[test]
    fn one_row_table() {
        let csv = table_csv(&table(1));
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], TABLE_HEADER);
        let f: Vec<&str> = lines[1].split(',').collect();
        assert!(f[3].is_empty() && f[5].is_empty() && f[7].is_empty());
    }

    #[test]
    fn table_round_trips_bit_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let t = table(4);
        write_table(&t, &path).unwrap();
        let back = read_table(&path, true).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn empty_table_rejected() {
        let dir = tempfile::tempdir().unwrap();
        assert!(write_table(&ConvergenceTable { rows: vec![], orders_in_eps: true }, &dir.path().join("x.csv")).is_err());
    }

    #[test]
    fn disk_grid_is_clipped() {
        let pts = sample_grid(&Domain::Disk { radius: 2.0 }, 11);
        assert!(pts.iter().all(|p| p[0].hypot(p[1]) <= 2.0));
        assert!(pts.len() < 121);
    }
}
