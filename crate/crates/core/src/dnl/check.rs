use super::{exit_time, CumulativeCurve, LoadingResult};
use crate::network::Network;
use crate::scalar::Scalar;

/// Worst-case violations of the physical invariants of a loading run.
/// Every field is zero (up to rounding) for a consistent run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantReport<T> {
    /// Largest per-step vehicle imbalance at a node.
    pub conservation: T,
    /// Largest gap between an aggregate count and the sum of its per-path counts.
    pub path_sum: T,
    /// Largest decrease of any cumulative count over one step.
    pub monotonicity: T,
    /// Largest negative link occupancy.
    pub negative_occupancy: T,
    /// Largest occupancy above the link storage `rho_jam L`.
    pub overfill: T,
    /// Largest negative origin queue.
    pub negative_queue: T,
    /// Largest boundary flow above link capacity.
    pub capacity_excess: T,
    /// Vehicles still in the network at the end of the run.
    pub unexited: T,
    /// Largest decrease of a link exit time `lambda(t)` between grid points.
    pub fifo: T,
}

impl<T: Scalar> InvariantReport<T> {
    pub fn holds(&self, tol: T) -> bool {
        [
            self.conservation,
            self.path_sum,
            self.monotonicity,
            self.negative_occupancy,
            self.overfill,
            self.negative_queue,
            self.capacity_excess,
            self.unexited,
            self.fifo,
        ]
        .iter()
        .all(|&x| x <= tol)
    }
}

fn steps<T: Scalar>(c: &CumulativeCurve<T>) -> impl Iterator<Item = T> + '_ {
    c.values().windows(2).map(|w| w[1] - w[0])
}

fn sum_gap<T: Scalar>(agg: &CumulativeCurve<T>, parts: &[CumulativeCurve<T>]) -> T {
    (0..agg.len())
        .map(|k| (agg.values()[k] - parts.iter().map(|c| c.values()[k]).sum::<T>()).abs())
        .fold(T::zero(), T::max)
}

impl<T: Scalar> LoadingResult<T> {
    pub fn check_invariants(&self, net: &Network<T>) -> InvariantReport<T> {
        let zero = T::zero();
        let dt = self.grid.dt();
        let mut r = InvariantReport {
            conservation: zero,
            path_sum: zero,
            monotonicity: zero,
            negative_occupancy: zero,
            overfill: zero,
            negative_queue: zero,
            capacity_excess: zero,
            unexited: (self.total_departed - self.total_exited()).abs(),
            fifo: zero,
        };
        let mut curves: Vec<&CumulativeCurve<T>> = self.sinks.iter().collect();
        for s in &self.links {
            let l = &net.links[s.link];
            r.path_sum = r.path_sum.max(sum_gap(&s.up, &s.path_up)).max(sum_gap(&s.down, &s.path_down));
            for k in 0..s.up.len() {
                let occ = s.occupancy(k);
                r.negative_occupancy = r.negative_occupancy.max(-occ);
                r.overfill = r.overfill.max(occ - l.storage());
            }
            for x in steps(&s.up).chain(steps(&s.down)) {
                r.capacity_excess = r.capacity_excess.max(x / dt - l.capacity);
            }
            curves.extend([&s.up, &s.down]);
            curves.extend(s.path_up.iter().chain(&s.path_down));
            let exits = (0..=self.steps)
                .map_while(|k| exit_time(&s.up, &s.down, s.up.time(k), l.free_flow_time(), self.curve_tolerance));
            let mut last = T::neg_infinity();
            for x in exits {
                r.fifo = r.fifo.max(last - x);
                last = last.max(x);
            }
        }
        for q in &self.queues {
            r.path_sum = r.path_sum.max(sum_gap(&q.arrivals, &q.path_arrivals)).max(sum_gap(&q.released, &q.path_released));
            r.negative_queue = q.queue_sizes().into_iter().fold(r.negative_queue, |m, x| m.max(-x));
            curves.extend([&q.arrivals, &q.released]);
            curves.extend(q.path_arrivals.iter().chain(&q.path_released));
        }
        for c in curves {
            r.monotonicity = steps(c).fold(r.monotonicity, |m, x| m.max(-x));
        }

        for (v, j) in net.junctions.iter().enumerate() {
            for k in 0..self.steps {
                let d = |c: &CumulativeCurve<T>| c.values()[k + 1] - c.values()[k];
                let mut balance = d(&self.sinks[v]);
                for &i in &j.incoming {
                    balance = balance - d(&self.links[i].down);
                }
                for &i in &j.outgoing {
                    balance = balance + d(&self.links[i].up);
                }
                for q in self.queues.iter().filter(|q| q.node == v) {
                    balance = balance - d(&q.released);
                }
                r.conservation = r.conservation.max(balance.abs());
            }
        }
        r
    }
}
