//! `due run` and `due validate`.

use std::path::{Path, PathBuf};

use due_core::dnl::effective_delay;
use due_core::metrics::{od_gap, GapReport};
use due_core::network::{load_dir, validate_dir, ValidationReport};
use due_core::operators::DelayOperator;
use due_core::solvers::solve;
use due_core::{DnlOperator, Network, SolveOutcome, TimeGrid};
use serde_json::json;

use crate::config::RunConfig;
use crate::error::Result;
use crate::output::{write_atomic, write_gaps, write_json, write_profile};

/// Command line overrides applied on top of a config file.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub dump_dnl: bool,
    /// Replaces `solver.seed`.
    pub seed: Option<u64>,
    /// Replaces `output_dir`.
    pub output_dir: Option<PathBuf>,
}

impl RunOptions {
    fn apply(&self, cfg: &mut RunConfig) {
        cfg.dump_dnl |= self.dump_dnl;
        if let Some(s) = self.seed {
            cfg.solver.seed = s;
        }
        if let Some(dir) = &self.output_dir {
            cfg.output_dir = std::path::absolute(dir).unwrap_or_else(|_| dir.clone());
        }
    }
}

/// Everything a finished run produced.
#[derive(Debug)]
pub struct RunReport {
    pub name: String,
    pub config: RunConfig,
    pub grid: TimeGrid,
    pub network: Network,
    pub outcome: SolveOutcome,
    pub gaps: GapReport<f64>,
    pub output_dir: PathBuf,
}

impl RunReport {
    /// First and last relative energies and their ratio.
    pub fn energy_ratio(&self) -> Option<(f64, f64, f64)> {
        let (first, last) = self.outcome.log.energy_drop()?;
        Some((first, last, first / last))
    }
}

/// Loads the network and builds the delay operator for `cfg`.
pub fn prepare(cfg: &RunConfig) -> Result<(DnlOperator, TimeGrid)> {
    cfg.check()?;
    let grid = cfg.grid()?;
    let net = load_dir::<f64>(cfg.network_path())?;
    let op = DnlOperator::new(net, grid, cfg.gamma, cfg.dnl_config()?)?;
    Ok((op, grid))
}

/// Solves one configuration and writes its artifacts.
pub fn execute(mut cfg: RunConfig, opts: &RunOptions) -> Result<RunReport> {
    opts.apply(&mut cfg);
    let (op, grid) = prepare(&cfg)?;
    let solver = cfg.solver_config()?;
    let set = op.feasible_set();
    let outcome = solve(&op, &set, &solver, &set.uniform())?;
    let net = op.network().clone();
    let h = &outcome.solution;
    let delays = op.path_delays(h)?;
    let costs = effective_delay(&delays, &net.trips, &net.partition, cfg.gamma)?;
    let gaps = od_gap(h, &costs, &net.partition, cfg.eps_support, cfg.strict_gap)?;

    let out = cfg.output_path();
    write_atomic(&out.join("iterations.csv"), |w| Ok(outcome.log.write_csv(w)?))?;
    write_profile(&out.join("flows.csv"), &net, &[("rate", h)])?;
    write_profile(&out.join("delays.csv"), &net, &[("delay", &delays), ("cost", &costs)])?;
    write_gaps(&out.join("gaps.csv"), &net, &gaps)?;
    if cfg.dump_dnl {
        let loading = op.load(h)?;
        write_atomic(&out.join("dnl.csv"), |w| Ok(loading.write_csv(&net, w)?))?;
    }
    let report = RunReport { name: cfg.run_name(), config: cfg, grid, network: net, outcome, gaps, output_dir: out };
    write_json(&report.output_dir.join("summary.json"), &summary(&report, op.evaluations()))?;
    Ok(report)
}

/// `due run -c <config>`.
pub fn cmd_run(config: impl AsRef<Path>, opts: &RunOptions) -> Result<RunReport> {
    execute(RunConfig::load(config)?, opts)
}

/// `due validate <dir>`.
pub fn cmd_validate(dir: impl AsRef<Path>) -> ValidationReport {
    validate_dir(dir)
}

fn summary(r: &RunReport, evaluations: usize) -> serde_json::Value {
    let o = &r.outcome;
    let last = o.log.rows.last();
    let energy = r.energy_ratio();
    let set_demand = r.network.trips.total_demand();
    let mass = o.solution.values().iter().sum::<f64>() * r.grid.dt();
    json!({
        "name": r.name,
        "config": r.config,
        "network": {
            "links": r.network.links.len(),
            "nodes": r.network.nodes.len(),
            "od_pairs": r.network.ods.len(),
            "paths": r.network.paths.len(),
            "total_demand": set_demand,
        },
        "grid": {
            "t0": r.grid.t0(),
            "t1": r.grid.t1(),
            "num_intervals": r.grid.num_intervals(),
            "dt": r.grid.dt(),
        },
        "solver": {
            "algorithm": o.log.algorithm.name(),
            "iterations": o.iterations,
            "stop": o.stop.name(),
            "operator_calls": o.evaluations,
            "operator_calls_total": evaluations,
            "final_tau": last.map(|row| row.tau),
            "final_residual": last.map(|row| row.residual),
            "first_relative_energy": energy.map(|e| e.0),
            "last_relative_energy": energy.map(|e| e.1),
            "energy_ratio": energy.map(|e| e.2),
            "warnings": o.warnings,
        },
        "gaps": {
            "eps_support": r.gaps.eps_support,
            "strict": r.config.strict_gap,
            "median": r.gaps.median(),
            "mean": r.gaps.mean(),
            "max": r.gaps.max(),
            "unsupported": r.gaps.unsupported.len(),
            "per_od": r.gaps.gaps,
        },
        "totals": {
            "assigned_demand": mass,
            "total_demand": set_demand,
        },
        "wall_time_seconds": o.elapsed.as_secs_f64(),
    })
}
