//! `due compare`: several solvers on one instance and grid.

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::thread;

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::output::write_atomic;
use crate::run::{execute, RunOptions, RunReport};

#[derive(Debug)]
pub struct CompareReport {
    pub runs: Vec<RunReport>,
    pub output_dir: PathBuf,
}

/// Linear-interpolation quantile of a non-empty sample.
pub fn quantile(xs: &[f64], q: f64) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
}

fn same_instance(a: &RunConfig, b: &RunConfig) -> Result<()> {
    let canon = |c: &RunConfig| c.network_path().canonicalize().unwrap_or_else(|_| c.network_path());
    if canon(a) != canon(b) {
        return Err(CliError::config(
            &b.source,
            format!("network {} differs from {} in {}", b.network_path().display(), a.network_path().display(), a.source.display()),
        ));
    }
    let (ga, gb) = (a.grid()?, b.grid()?);
    if ga != gb {
        return Err(CliError::config(
            &b.source,
            format!(
                "grid [{}, {}] with {} intervals differs from [{}, {}] with {} intervals in {}",
                gb.t0(),
                gb.t1(),
                gb.num_intervals(),
                ga.t0(),
                ga.t1(),
                ga.num_intervals(),
                a.source.display()
            ),
        ));
    }
    Ok(())
}

/// Runs every config concurrently, each into `out/<name>`, then writes the
/// aligned comparison tables into `out`.
pub fn cmd_compare(configs: &[PathBuf], out: &Path, opts: &RunOptions) -> Result<CompareReport> {
    if configs.len() < 2 {
        return Err(CliError::config(
            configs.first().cloned().unwrap_or_default(),
            "compare needs at least two configs",
        ));
    }
    let cfgs = configs.iter().map(RunConfig::load).collect::<Result<Vec<_>>>()?;
    let mut names = HashSet::new();
    for c in &cfgs {
        c.check()?;
        same_instance(&cfgs[0], c)?;
        if !names.insert(c.run_name()) {
            return Err(CliError::config(&c.source, format!("duplicate run name `{}`", c.run_name())));
        }
    }
    let results: Vec<Result<RunReport>> = thread::scope(|s| {
        let handles: Vec<_> = cfgs
            .into_iter()
            .map(|c| {
                let opts = RunOptions { output_dir: Some(out.join(c.run_name())), ..opts.clone() };
                s.spawn(move || execute(c, &opts))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("solver thread panicked")).collect()
    });
    let runs = results.into_iter().collect::<Result<Vec<_>>>()?;
    write_energies(&out.join("energies.csv"), &runs)?;
    write_gap_summary(&out.join("gap_summary.csv"), &runs)?;
    write_gaps_by_od(&out.join("gaps_by_od.csv"), &runs)?;
    Ok(CompareReport { runs, output_dir: out.to_path_buf() })
}

fn write_energies(path: &Path, runs: &[RunReport]) -> Result<()> {
    write_atomic(path, |w| {
        let mut w = csv::Writer::from_writer(w);
        let mut header = vec!["n".to_string()];
        for r in runs {
            header.extend(["energy", "tau", "residual"].map(|c| format!("{c}_{}", r.name)));
        }
        w.write_record(&header)?;
        let rows = runs.iter().map(|r| r.outcome.log.rows.len()).max().unwrap_or(0);
        for n in 0..rows {
            let mut rec = vec![n.to_string()];
            for r in runs {
                match r.outcome.log.rows.get(n) {
                    Some(row) => rec.extend([
                        row.relative_energy.map(|e| e.to_string()).unwrap_or_default(),
                        row.tau.to_string(),
                        row.residual.to_string(),
                    ]),
                    None => rec.extend([String::new(), String::new(), String::new()]),
                }
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    })
}

fn write_gap_summary(path: &Path, runs: &[RunReport]) -> Result<()> {
    write_atomic(path, |w| {
        let mut w = csv::Writer::from_writer(w);
        w.write_record(["run", "algorithm", "od_pairs", "min", "q25", "median", "q75", "max", "mean"])?;
        for r in runs {
            let g = &r.gaps.gaps;
            let mut rec = vec![r.name.clone(), r.outcome.log.algorithm.to_string(), g.len().to_string()];
            rec.extend([0.0, 0.25, 0.5, 0.75, 1.0].map(|q| quantile(g, q).to_string()));
            rec.push(r.gaps.mean().to_string());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    })
}

fn write_gaps_by_od(path: &Path, runs: &[RunReport]) -> Result<()> {
    write_atomic(path, |w| {
        let mut w = csv::Writer::from_writer(w);
        let mut header = vec!["od".to_string()];
        header.extend(runs.iter().map(|r| r.name.clone()));
        w.write_record(&header)?;
        for (i, od) in runs[0].network.ods.iter().enumerate() {
            let mut rec = vec![od.id.clone()];
            rec.extend(runs.iter().map(|r| r.gaps.gaps[i].to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles_interpolate() {
        let xs = [4.0, 1.0, 3.0, 2.0];
        assert_eq!(quantile(&xs, 0.0), 1.0);
        assert_eq!(quantile(&xs, 1.0), 4.0);
        assert_eq!(quantile(&xs, 0.5), 2.5);
        assert_eq!(quantile(&[7.0], 0.25), 7.0);
    }
}
