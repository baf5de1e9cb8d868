//! CSV tables. Every file starts with one `#` comment line describing the
//! run, then a header row, then data rows. Floats carry 17 significant
//! digits. Files are written to a temporary sibling and renamed into place.

use std::io::Write;
use std::path::Path;

use densinv_core::{Closure, Grid1D, SpaceTimeField, TimeGrid};

use crate::error::{config_err, CliError, CliResult};

pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

/// Run metadata placed on the first line of every output file.
#[derive(Debug, Clone)]
pub struct Provenance {
    pub scenario_hash: String,
    pub grid: Grid1D,
    pub dt: f64,
}

impl Provenance {
    pub fn comment(&self) -> String {
        let closure = match self.grid.closure() {
            Closure::Open => "open",
            Closure::EndpointInclusive => "endpoint_inclusive",
        };
        format!(
            "# scenario_sha256={} grid=[{},{}] n_points={} closure={} dx={} dt={} densinv={} densinv-core={}",
            self.scenario_hash,
            fmt_f64(self.grid.a()),
            fmt_f64(self.grid.b()),
            self.grid.n_points(),
            closure,
            fmt_f64(self.grid.dx()),
            fmt_f64(self.dt),
            env!("CARGO_PKG_VERSION"),
            densinv_core::VERSION
        )
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let out_err = |e: std::io::Error| CliError::Output(format!("{}: {e}", path.display()));
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(out_err)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(out_err)?;
    tmp.write_all(bytes).map_err(out_err)?;
    tmp.persist(path).map_err(|e| out_err(e.error))?;
    Ok(())
}

/// Serialize a header plus rows of floats.
pub fn write_table<I>(path: &Path, prov: &Provenance, header: &[String], rows: I) -> CliResult<()>
where
    I: IntoIterator<Item = Vec<f64>>,
{
    let mut buf = prov.comment().into_bytes();
    buf.push(b'\n');
    let mut w = csv::Writer::from_writer(buf);
    let csv_err = |e: csv::Error| CliError::Output(format!("{}: {e}", path.display()));
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(row.iter().map(|v| fmt_f64(*v))).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
    write_atomic(path, &bytes)
}

/// `t, x_0, ..., x_{n-1}` header used by all space-time tables.
pub fn field_header(grid: &Grid1D) -> Vec<String> {
    std::iter::once("t".to_string())
        .chain(grid.points().into_iter().map(fmt_f64))
        .collect()
}

pub fn write_field(path: &Path, prov: &Provenance, f: &SpaceTimeField) -> CliResult<()> {
    let rows = (0..f.n_times()).map(|k| {
        let mut row = Vec::with_capacity(f.grid().n_points() + 1);
        row.push(f.times().time(k));
        row.extend_from_slice(f.slice(k));
        row
    });
    write_table(path, prov, &field_header(f.grid()), rows)
}

/// Raw contents of a table: header row and numeric rows.
pub struct RawTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

pub fn read_table(path: &Path) -> CliResult<RawTable> {
    let err = |e: String| config_err(format!("{}: {e}", path.display()));
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| err(e.to_string()))?;
    let header = r.headers().map_err(|e| err(e.to_string()))?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| err(e.to_string()))?;
        let row = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| err(format!("row {}: {e}", i + 1))))
            .collect::<CliResult<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(RawTable { header, rows })
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()))
}

/// Read a space-time table and check it against the scenario mesh.
/// With `times = None` only the first row is read.
pub fn read_field(path: &Path, grid: &Grid1D, times: Option<&TimeGrid>) -> CliResult<Vec<Vec<f64>>> {
    let err = |e: String| config_err(format!("{}: {e}", path.display()));
    let t = read_table(path)?;
    let xs: Vec<f64> = t.header.iter().skip(1).map(|s| s.parse::<f64>()).collect::<Result<_, _>>().map_err(|e| err(format!("header: {e}")))?;
    let points = grid.points();
    if xs.len() != points.len() || xs.iter().zip(&points).any(|(a, b)| !close(*a, *b)) {
        return Err(err(format!("x columns do not match the {}-point scenario grid", points.len())));
    }
    let wanted = times.map_or(1, TimeGrid::n_times);
    if t.rows.len() < wanted {
        return Err(err(format!("need {wanted} rows, found {}", t.rows.len())));
    }
    if let Some(times) = times {
        if t.rows.len() != wanted {
            return Err(err(format!("need {wanted} rows, found {}", t.rows.len())));
        }
        if let Some(k) = (0..wanted).find(|&k| !close(t.rows[k][0], times.time(k))) {
            return Err(err(format!("row {k} has t = {}, scenario has {}", t.rows[k][0], times.time(k))));
        }
    }
    Ok(t.rows.into_iter().take(wanted).map(|r| r[1..].to_vec()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let grid = Grid1D::new(-1.0, 1.0, 8).unwrap();
        let times = TimeGrid::new(0.0, 0.1, 4).unwrap();
        let f = SpaceTimeField::from_fn(grid, times, |t, x| (3.0 * x).sin() + t / 3.0);
        let prov = Provenance {
            scenario_hash: "abc".into(),
            grid,
            dt: times.dt(),
        };
        let path = dir.path().join("f.csv");
        write_field(&path, &prov, &f).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# scenario_sha256=abc "));
        let rows = read_field(&path, &grid, Some(&times)).unwrap();
        for (k, row) in rows.iter().enumerate() {
            assert_eq!(row.as_slice(), f.slice(k));
        }
        let wrong = Grid1D::new(-1.0, 1.0, 16).unwrap();
        assert!(read_field(&path, &wrong, None).is_err());
    }

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
        assert_eq!(fmt_f64(0.1).parse::<f64>().unwrap(), 0.1);
    }
}
