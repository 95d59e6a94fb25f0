//! Point queues at origins.

use crate::scalar::Scalar;

/// `D_o`: a large number `big_m` while vehicles wait, else the departure rate.
pub fn origin_demand<T: Scalar>(queue: T, inflow: T, big_m: T) -> T {
    if queue > T::zero() {
        big_m
    } else {
        inflow
    }
}

/// One explicit Euler step of `dq/dt = inflow - min(D_o, S)`.
///
/// Returns `(release rate, next queue)`; the release is capped so the queue
/// stays non-negative.
pub fn step_origin_queue<T: Scalar>(queue: T, inflow: T, supply: T, demand: T, dt: T) -> (T, T) {
    let release = demand.min(supply).min(queue / dt + inflow).max(T::zero());
    let next = (queue + dt * (inflow - release)).max(T::zero());
    (release, next)
}
