use std::path::Path;

use crate::error::{Error, Result};
use crate::functionals::DiagRecord;

pub const CSV_HEADER: &str = "t,mass,energy,mu,lz,sigma_norm,diss_rate,mass_drift";

/// One row per record, every value with 17 significant digits.
pub fn write_timeseries(records: &[DiagRecord]) -> String {
    let mut out = String::with_capacity(CSV_HEADER.len() + 1 + records.len() * 200);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        let row = [r.t, r.mass, r.energy, r.mu, r.lz, r.sigma_norm, r.diss_rate, r.mass_drift];
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn write_timeseries_file(path: &Path, records: &[DiagRecord]) -> Result<()> {
    std::fs::write(path, write_timeseries(records))?;
    Ok(())
}

/// Inverse of [`write_timeseries`].
pub fn read_timeseries(text: &str) -> Result<Vec<DiagRecord>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        _ => return Err(Error::Parse { line: 1, msg: format!("expected header `{CSV_HEADER}`") }),
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let v = line
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() })?;
        if v.len() != 8 {
            return Err(Error::Parse { line: i + 1, msg: format!("expected 8 columns, got {}", v.len()) });
        }
        out.push(DiagRecord {
            t: v[0],
            mass: v[1],
            energy: v[2],
            mu: v[3],
            lz: v[4],
            sigma_norm: v[5],
            diss_rate: v[6],
            mass_drift: v[7],
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(t: f64) -> DiagRecord {
        DiagRecord {
            t,
            mass: 1.0 + 1e-13,
            energy: std::f64::consts::PI,
            mu: -0.1,
            lz: 1.0 / 3.0,
            sigma_norm: 2.5e-300,
            diss_rate: 0.0,
            mass_drift: -1e-16,
        }
    }

    #[test]
    fn header_and_round_trip() {
        let rs: Vec<_> = (0..5).map(|i| rec(i as f64 * 0.1)).collect();
        let s = write_timeseries(&rs);
        assert_eq!(s.lines().next().unwrap(), CSV_HEADER);
        assert_eq!(s.lines().count(), 6);
        assert_eq!(read_timeseries(&s).unwrap(), rs);
        let row = s.lines().nth(1).unwrap();
        let first = row.split(',').nth(2).unwrap();
        assert_eq!(first, "3.1415926535897931e0");
    }

    #[test]
    fn bad_rows() {
        assert!(read_timeseries("t,mass\n").is_err());
        let bad = format!("{CSV_HEADER}\n1,2,3\n");
        assert!(matches!(read_timeseries(&bad), Err(Error::Parse { line: 2, .. })));
    }
}
