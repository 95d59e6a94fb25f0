//! Artifact writers. Every file is written to a temporary sibling and
//! renamed into place, so readers never see a partial file.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use due_core::hilbert::PathField;
use due_core::metrics::GapReport;
use due_core::Network;
use tempfile::NamedTempFile;

use crate::error::{CliError, Result};

/// Writes `path` atomically from the bytes produced by `fill`.
pub fn write_atomic<F>(path: &Path, fill: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> std::result::Result<(), Box<dyn std::error::Error>>,
{
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| CliError::write(dir, e))?;
    let tmp = NamedTempFile::new_in(dir).map_err(|e| CliError::write(path, e))?;
    {
        let mut w = BufWriter::new(tmp.as_file());
        fill(&mut w).map_err(|e| CliError::write(path, e))?;
        w.flush().map_err(|e| CliError::write(path, e))?;
    }
    tmp.persist(path).map_err(|e| CliError::write(path, e.error))?;
    Ok(())
}

/// Long-format profile: one row per (path, interval).
pub fn write_profile(path: &Path, net: &Network, columns: &[(&str, &PathField<f64>)]) -> Result<()> {
    write_atomic(path, |out| {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["path", "od", "interval", "t_start", "t_mid"];
        header.extend(columns.iter().map(|(name, _)| *name));
        w.write_record(&header)?;
        let grid = *columns[0].1.grid();
        for (p, path) in net.paths.iter().enumerate() {
            let od = &net.ods[path.od].id;
            for k in 0..grid.num_intervals() {
                let mut row = vec![path.id.clone(), od.clone(), k.to_string(), grid.start(k).to_string(), grid.midpoint(k).to_string()];
                row.extend(columns.iter().map(|(_, f)| f.get(p, k).to_string()));
                w.write_record(&row)?;
            }
        }
        w.flush()?;
        Ok(())
    })
}

pub fn write_gaps(path: &Path, net: &Network, gaps: &GapReport<f64>) -> Result<()> {
    write_atomic(path, |out| {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["od", "origin", "destination", "demand", "gap", "supported"])?;
        for (i, od) in net.ods.iter().enumerate() {
            w.write_record([
                od.id.clone(),
                net.nodes[od.origin].id.clone(),
                net.nodes[od.destination].id.clone(),
                net.trips.demand(i).to_string(),
                gaps.gaps[i].to_string(),
                (!gaps.unsupported.contains(&i)).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    })
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    write_atomic(path, |out| {
        serde_json::to_writer_pretty(&mut *out, value)?;
        out.write_all(b"\n")?;
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_and_leaves_no_temporaries() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("sub/out.txt");
        write_atomic(&file, |w| Ok(w.write_all(b"first")?)).unwrap();
        write_atomic(&file, |w| Ok(w.write_all(b"second")?)).unwrap();
        assert_eq!(fs::read_to_string(&file).unwrap(), "second");
        assert_eq!(fs::read_dir(dir.path().join("sub")).unwrap().count(), 1);
    }

    #[test]
    fn failed_fill_keeps_the_old_file() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("out.txt");
        write_atomic(&file, |w| Ok(w.write_all(b"kept")?)).unwrap();
        let err = write_atomic(&file, |_| Err("boom".into())).unwrap_err();
        assert!(err.to_string().contains("boom"));
        assert_eq!(fs::read_to_string(&file).unwrap(), "kept");
    }
}
