//! Path-based dynamic network loading.
//!
//! Links are represented only by their boundary cumulative counts
//! `N_up`/`N_down` (link transmission model). Each step computes link
//! demands and supplies from lagged counts, resolves every junction, and
//! advances the counts; origin point queues feed the first link of each
//! path. Path travel times come from composing link exit-time functions.

mod check;
mod curve;
mod junction;
mod link;
mod loading;
mod origin;
mod travel;

use std::io::Write;

pub use check::InvariantReport;
pub use curve::CumulativeCurve;
pub use junction::{junction_flows, JunctionFlows};
pub use link::{fundamental_flow, link_demand, link_supply};
pub use loading::run_dnl;
pub use origin::{origin_demand, step_origin_queue};
pub use travel::{effective_delay, exit_time, late_penalty, path_delay};

use crate::error::{Error, Result};
use crate::hilbert::TimeGrid;
use crate::network::Network;
use crate::scalar::Scalar;

/// Boundary counts of one link, aggregated and per path.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkState<T> {
    pub link: usize,
    pub up: CumulativeCurve<T>,
    pub down: CumulativeCurve<T>,
    /// Paths using the link, in increasing index order.
    pub paths: Vec<usize>,
    pub path_up: Vec<CumulativeCurve<T>>,
    pub path_down: Vec<CumulativeCurve<T>>,
}

impl<T: Scalar> LinkState<T> {
    pub fn occupancy(&self, k: usize) -> T {
        self.up.values()[k] - self.down.values()[k]
    }
}

/// Point queue in front of `first_link` at origin `node`.
///
/// `arrivals` counts departures from home, `released` the vehicles admitted
/// into the first link; their difference is the queue `q_o`.
#[derive(Debug, Clone, PartialEq)]
pub struct OriginQueue<T> {
    pub node: usize,
    pub first_link: usize,
    pub arrivals: CumulativeCurve<T>,
    pub released: CumulativeCurve<T>,
    pub paths: Vec<usize>,
    pub path_arrivals: Vec<CumulativeCurve<T>>,
    pub path_released: Vec<CumulativeCurve<T>>,
}

impl<T: Scalar> OriginQueue<T> {
    pub fn queue_sizes(&self) -> Vec<T> {
        self.arrivals
            .values()
            .iter()
            .zip(self.released.values())
            .map(|(&a, &r)| a - r)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DnlConfig<T> {
    /// Minimum loading time past `t1`; defaults to twice the longest
    /// free-flow path time.
    pub horizon_buffer: Option<T>,
    /// Hard cap on the loading length, as a multiple of the minimum number
    /// of steps. Loading stops earlier once every vehicle has exited.
    pub max_extension_factor: usize,
    /// `eps_N`: tolerance when comparing cumulative counts.
    pub curve_tolerance: T,
    /// Origin demand while a queue is present, as a multiple of the largest
    /// link capacity.
    pub big_m_factor: T,
}

impl<T: Scalar> Default for DnlConfig<T> {
    fn default() -> Self {
        DnlConfig {
            horizon_buffer: None,
            max_extension_factor: 20,
            curve_tolerance: T::lit(1e-9),
            big_m_factor: T::lit(10.0),
        }
    }
}

/// All boundary counts produced by one loading run.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadingResult<T> {
    /// Departure grid of the input profile.
    pub grid: TimeGrid<T>,
    /// Number of loading steps (`>= grid.num_intervals()`).
    pub steps: usize,
    pub links: Vec<LinkState<T>>,
    pub queues: Vec<OriginQueue<T>>,
    /// Queue serving each path.
    pub path_queue: Vec<usize>,
    /// Cumulative arrivals at each node from paths ending there.
    pub sinks: Vec<CumulativeCurve<T>>,
    pub total_departed: T,
    /// Effective `eps_N` used during the run.
    pub curve_tolerance: T,
    /// Vehicles still inside the network when the loading stopped are
    /// rounding leftovers below this count; zero if it never drained.
    pub drain_tolerance: T,
}

impl<T: Scalar> LoadingResult<T> {
    pub fn total_exited(&self) -> T {
        self.sinks.iter().map(CumulativeCurve::last).sum()
    }

    pub fn loaded_grid(&self) -> TimeGrid<T> {
        self.grid.extended(self.steps)
    }

    /// Writes every boundary curve as CSV: one row per grid point per
    /// link, origin queue and destination sink.
    pub fn write_csv<W: Write>(&self, net: &Network<T>, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Config(format!("writing network loading dump: {e}"));
        w.write_record(["kind", "id", "step", "time", "n_up", "n_down", "occupancy"]).map_err(io)?;
        for s in &self.links {
            let id = &net.links[s.link].id;
            for k in 0..=self.steps {
                let (u, d) = (s.up.values()[k], s.down.values()[k]);
                w.write_record([
                    "link".to_string(),
                    id.clone(),
                    k.to_string(),
                    s.up.time(k).to_string(),
                    u.to_string(),
                    d.to_string(),
                    (u - d).to_string(),
                ])
                .map_err(io)?;
            }
        }
        for q in &self.queues {
            let id = format!("{}->{}", net.nodes[q.node].id, net.links[q.first_link].id);
            for k in 0..=self.steps {
                let (a, r) = (q.arrivals.values()[k], q.released.values()[k]);
                w.write_record([
                    "queue".to_string(),
                    id.clone(),
                    k.to_string(),
                    q.arrivals.time(k).to_string(),
                    a.to_string(),
                    r.to_string(),
                    (a - r).to_string(),
                ])
                .map_err(io)?;
            }
        }
        for (v, sink) in self.sinks.iter().enumerate() {
            if !net.junctions[v].role.destination {
                continue;
            }
            for k in 0..=self.steps {
                let n = sink.values()[k];
                w.write_record([
                    "sink".to_string(),
                    net.nodes[v].id.clone(),
                    k.to_string(),
                    sink.time(k).to_string(),
                    n.to_string(),
                    n.to_string(),
                    "0".to_string(),
                ])
                .map_err(io)?;
            }
        }
        w.flush().map_err(|e| Error::Config(format!("writing network loading dump: {e}")))?;
        Ok(())
    }
}
