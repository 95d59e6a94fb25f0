//! Exit times, path delays and the effective delay operator.

use super::{CumulativeCurve, LoadingResult};
use crate::error::{Error, Result};
use crate::hilbert::{DelayProfile, OdPartition, PathField, TripTable};
use crate::network::Network;
use crate::scalar::Scalar;

/// `lambda(t)`: exit time of the vehicle entering a FIFO element at `t`.
///
/// The earliest `s` with `N_down(s) >= N_up(t) - eps`, never before
/// `t + free_flow`. At times with no entering flow this is the exit time of
/// an infinitesimal virtual vehicle. `None` if the downstream count never
/// reaches the level within the loaded range.
pub fn exit_time<T: Scalar>(
    up: &CumulativeCurve<T>,
    down: &CumulativeCurve<T>,
    t: T,
    free_flow: T,
    eps: T,
) -> Option<T> {
    down.first_reach(up.at(t) - eps).map(|s| s.max(t + free_flow))
}

/// Path delays `D_p(t)` at the midpoint of every departure interval.
///
/// Composes the origin queue exit time with the exit time of each link in
/// path order. A level the downstream count misses by no more than the
/// drain tolerance is a rounding leftover and is matched at that tolerance.
pub fn path_delay<T: Scalar>(result: &LoadingResult<T>, net: &Network<T>) -> Result<DelayProfile<T>> {
    let grid = result.grid;
    let eps = result.curve_tolerance;
    let slack = eps + result.drain_tolerance;
    let lookup = |up: &CumulativeCurve<T>, down: &CumulativeCurve<T>, t: T, ff: T| {
        exit_time(up, down, t, ff, eps).or_else(|| exit_time(up, down, t, ff, slack))
    };
    let np = net.paths.len();
    let mut d = PathField::zeros(grid, np);
    for p in 0..np {
        let queue = &result.queues[result.path_queue[p]];
        for k in 0..grid.num_intervals() {
            let t = grid.midpoint(k);
            let unfinished = || Error::UnfinishedTrip { path: p, interval: k };
            let mut s = lookup(&queue.arrivals, &queue.released, t, T::zero()).ok_or_else(unfinished)?;
            for &i in &net.paths[p].links {
                let state = &result.links[i];
                s = lookup(&state.up, &state.down, s, net.links[i].free_flow_time()).ok_or_else(unfinished)?;
            }
            d.set(p, k, s - t);
        }
    }
    Ok(d)
}

/// `phi(a) = gamma max(a, 0)`: penalty for arriving `a` after the target.
pub fn late_penalty<T: Scalar>(gamma: T, a: T) -> T {
    gamma * a.max(T::zero())
}

/// `A(h)_p(t) = D_p(t) + phi(t + D_p(t) - T_w)` with `t` the interval midpoint.
pub fn effective_delay<T: Scalar>(
    delay: &DelayProfile<T>,
    trips: &TripTable<T>,
    partition: &OdPartition,
    gamma: T,
) -> Result<DelayProfile<T>> {
    if partition.num_paths() != delay.num_paths() || partition.num_ods() != trips.len() {
        return Err(Error::Dimension(format!(
            "delay profile has {} paths, partition {} paths over {} O-D pairs, trip table {} entries",
            delay.num_paths(),
            partition.num_paths(),
            partition.num_ods(),
            trips.len()
        )));
    }
    let grid = *delay.grid();
    Ok(PathField::from_fn(grid, delay.num_paths(), |p, k| {
        let d = delay.get(p, k);
        let target = trips.target(partition.od_of(p));
        d + late_penalty(gamma, grid.midpoint(k) + d - target)
    }))
}
