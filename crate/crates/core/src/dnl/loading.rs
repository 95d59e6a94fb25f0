//! Time stepping of the link transmission model.

use super::{
    junction_flows, link_demand, link_supply, origin_demand, CumulativeCurve, DnlConfig, LinkState, LoadingResult,
    OriginQueue,
};
use crate::error::{Error, Result};
use crate::hilbert::PathFlowProfile;
use crate::network::Network;
use crate::scalar::Scalar;

#[derive(Clone, Copy)]
enum Next {
    Link { link: usize, slot: usize },
    Sink,
}

#[derive(Clone, Copy)]
enum Row {
    Link(usize),
    Queue(usize),
}

/// Static routing tables derived from the path set.
struct Topology {
    link_paths: Vec<Vec<usize>>,
    link_next: Vec<Vec<Next>>,
    queues: Vec<(usize, usize, Vec<usize>)>,
    queue_next: Vec<Vec<Next>>,
    path_queue: Vec<usize>,
    rows: Vec<Vec<Row>>,
    /// Column of each link within the outgoing list of its tail node.
    col_of: Vec<usize>,
}

impl Topology {
    fn build<T: Scalar>(net: &Network<T>) -> Result<Self> {
        let nl = net.links.len();
        let mut link_paths = vec![Vec::new(); nl];
        for (p, path) in net.paths.iter().enumerate() {
            for (pos, &i) in path.links.iter().enumerate() {
                if path.links[..pos].contains(&i) {
                    return Err(Error::Validation(format!("path {} traverses link {} twice", path.id, net.links[i].id)));
                }
                link_paths[i].push(p);
            }
        }
        let slot = |link: usize, p: usize| link_paths[link].binary_search(&p).expect("path registered on link");

        let mut link_next = vec![Vec::new(); nl];
        for (i, paths) in link_paths.iter().enumerate() {
            link_next[i] = paths
                .iter()
                .map(|&p| {
                    let links = &net.paths[p].links;
                    let pos = links.iter().position(|&x| x == i).expect("link on path");
                    match links.get(pos + 1) {
                        Some(&j) => Next::Link { link: j, slot: slot(j, p) },
                        None => Next::Sink,
                    }
                })
                .collect();
        }

        let mut queues: Vec<(usize, usize, Vec<usize>)> = Vec::new();
        let mut path_queue = Vec::with_capacity(net.paths.len());
        for (p, path) in net.paths.iter().enumerate() {
            let origin = net.ods[path.od].origin;
            let first = path.links[0];
            let q = match queues.iter().position(|(o, l, _)| *o == origin && *l == first) {
                Some(q) => q,
                None => {
                    queues.push((origin, first, Vec::new()));
                    queues.len() - 1
                }
            };
            path_queue.push(q);
            queues[q].2.push(p);
        }
        let queue_next = queues
            .iter()
            .map(|(_, first, paths)| paths.iter().map(|&p| Next::Link { link: *first, slot: slot(*first, p) }).collect())
            .collect();

        let mut rows: Vec<Vec<Row>> = net.junctions.iter().map(|j| j.incoming.iter().map(|&i| Row::Link(i)).collect()).collect();
        for (q, (origin, _, _)) in queues.iter().enumerate() {
            rows[*origin].push(Row::Queue(q));
        }
        let mut col_of = vec![0; nl];
        for j in &net.junctions {
            for (c, &i) in j.outgoing.iter().enumerate() {
                col_of[i] = c;
            }
        }
        Ok(Topology { link_paths, link_next, queues, queue_next, path_queue, rows, col_of })
    }
}

/// Splits `x` vehicles leaving a FIFO boundary among the paths present.
///
/// The chunk crossing the boundary next is the one between counts `n_a`
/// (already out) and `n_a + x`; each path's share is its upstream count at
/// the time the aggregate reaches `n_a + x`, less what it already sent.
fn composition<T: Scalar>(
    agg_up: &CumulativeCurve<T>,
    path_up: &[CumulativeCurve<T>],
    path_out: &[CumulativeCurve<T>],
    n_a: T,
    x: T,
    k: usize,
    out: &mut Vec<T>,
) -> T {
    out.clear();
    let (kk, frac) = agg_up.crossing(n_a + x).unwrap_or((agg_up.len() - 1, T::one()));
    let mut sum = T::zero();
    for (up, down) in path_up.iter().zip(path_out) {
        let raw = (up.at_crossing(kk, frac) - down.values()[k]).max(T::zero());
        sum = sum + raw;
        out.push(raw);
    }
    if sum > T::zero() {
        let scale = x / sum;
        out.iter_mut().for_each(|c| *c = *c * scale);
        x
    } else {
        T::zero()
    }
}

/// Loads the departure profile `h` onto the network.
///
/// The loading runs at least `K + ceil(buffer / dt)` steps and continues
/// until every vehicle has reached its destination, up to
/// `max_extension_factor` times that minimum.
pub fn run_dnl<T: Scalar>(h: &PathFlowProfile<T>, net: &Network<T>, cfg: &DnlConfig<T>) -> Result<LoadingResult<T>> {
    let np = net.paths.len();
    if h.num_paths() != np {
        return Err(Error::Dimension(format!("profile has {} paths, network has {np}", h.num_paths())));
    }
    if let Some((i, v)) = h.values().iter().enumerate().find(|(_, v)| !v.is_finite() || **v < T::zero()) {
        let (p, k) = (i / h.num_intervals(), i % h.num_intervals());
        return Err(Error::Validation(format!("departure rate {v} on path {p}, interval {k} must be finite and non-negative")));
    }
    let grid = *h.grid();
    let dt = grid.dt();
    let t0 = grid.t0();
    let nk = grid.num_intervals();
    net.check_cfl(dt)?;
    let topo = Topology::build(net)?;

    let buffer = cfg.horizon_buffer.unwrap_or_else(|| T::lit(2.0) * net.max_free_flow_time());
    if !(buffer >= T::zero()) || !buffer.is_finite() {
        return Err(Error::Parameter(format!("horizon buffer {buffer} must be finite and non-negative")));
    }
    let min_steps = nk + (buffer / dt).ceil().to_usize().unwrap_or(0);
    let max_steps = min_steps.max(1) * cfg.max_extension_factor.max(1);

    let total: T = h.values().iter().copied().sum::<T>() * dt;
    let eps = cfg.curve_tolerance.max(T::epsilon() * T::lit(16.0) * total.max(T::one()));
    let big_m = cfg.big_m_factor * net.max_capacity();
    // rounding leftovers scale with the number of boundaries a vehicle crosses
    let drain_tol = eps * T::from_usize_lossy(net.links.len() + np + 1);

    let new_curve = || CumulativeCurve::new(t0, dt);
    let mut links: Vec<LinkState<T>> = topo
        .link_paths
        .iter()
        .enumerate()
        .map(|(i, paths)| LinkState {
            link: i,
            up: new_curve(),
            down: new_curve(),
            paths: paths.clone(),
            path_up: vec![new_curve(); paths.len()],
            path_down: vec![new_curve(); paths.len()],
        })
        .collect();
    let mut queues: Vec<OriginQueue<T>> = topo
        .queues
        .iter()
        .map(|(node, first, paths)| OriginQueue {
            node: *node,
            first_link: *first,
            arrivals: new_curve(),
            released: new_curve(),
            paths: paths.clone(),
            path_arrivals: vec![new_curve(); paths.len()],
            path_released: vec![new_curve(); paths.len()],
        })
        .collect();
    let mut sinks: Vec<CumulativeCurve<T>> = vec![new_curve(); net.nodes.len()];

    let mut up_inc: Vec<Vec<T>> = links.iter().map(|s| vec![T::zero(); s.paths.len()]).collect();
    let mut down_inc = up_inc.clone();
    let mut rel_inc: Vec<Vec<T>> = queues.iter().map(|q| vec![T::zero(); q.paths.len()]).collect();
    let mut sink_inc = vec![T::zero(); net.nodes.len()];
    let mut link_d = vec![T::zero(); links.len()];
    let mut link_s = vec![T::zero(); links.len()];
    let mut comp: Vec<T> = Vec::new();

    let mut steps = 0;
    let mut drained = false;
    for k in 0..max_steps {
        let t = t0 + T::from_usize_lossy(k) * dt;
        for q in queues.iter_mut() {
            let mut sum = T::zero();
            for (slot, &p) in q.paths.iter().enumerate() {
                let rate = if k < nk { h.get(p, k) } else { T::zero() };
                let c = &mut q.path_arrivals[slot];
                let next = c.last() + rate * dt;
                c.push(next);
                sum = sum + rate * dt;
            }
            let next = q.arrivals.last() + sum;
            q.arrivals.push(next);
        }

        for (i, s) in links.iter().enumerate() {
            let l = &net.links[i];
            let avail = s.up.at(t + dt - l.free_flow_time()) - s.down.values()[k];
            link_d[i] = link_demand(s, l, t, eps)?.min(avail / dt).max(T::zero());
            let room = s.down.at(t + dt - l.backward_time()) + l.storage() - s.up.values()[k];
            link_s[i] = link_supply(s, l, t, eps)?.min(room / dt).max(T::zero());
        }

        up_inc.iter_mut().chain(down_inc.iter_mut()).chain(rel_inc.iter_mut()).for_each(|v| v.iter_mut().for_each(|x| *x = T::zero()));
        sink_inc.iter_mut().for_each(|x| *x = T::zero());

        for (v, rows) in topo.rows.iter().enumerate() {
            if rows.is_empty() {
                continue;
            }
            let outgoing = &net.junctions[v].outgoing;
            let n = outgoing.len() + 1;
            let mut demands = Vec::with_capacity(rows.len());
            let mut split = vec![T::zero(); rows.len() * n];
            let mut chunks: Vec<Vec<T>> = Vec::with_capacity(rows.len());
            for (r, row) in rows.iter().enumerate() {
                let (d, next) = match *row {
                    Row::Link(i) => {
                        let s = &links[i];
                        let x = composition(&s.up, &s.path_up, &s.path_down, s.down.values()[k], link_d[i] * dt, k, &mut comp);
                        (x / dt, &topo.link_next[i])
                    }
                    Row::Queue(qi) => {
                        let q = &queues[qi];
                        let (a, a1, rel) = (q.arrivals.values()[k], q.arrivals.values()[k + 1], q.released.values()[k]);
                        let queued = a - rel;
                        let inflow = (a1 - a) / dt;
                        let d_o = origin_demand(if queued > eps { queued } else { T::zero() }, inflow, big_m);
                        let d = d_o.min((a1 - rel) / dt).max(T::zero());
                        let x = composition(&q.arrivals, &q.path_arrivals, &q.path_released, rel, d * dt, k, &mut comp);
                        (x / dt, &topo.queue_next[qi])
                    }
                };
                if d > T::zero() {
                    let total_x = d * dt;
                    for (c, nx) in comp.iter().zip(next) {
                        let col = match *nx {
                            Next::Link { link, .. } => topo.col_of[link],
                            Next::Sink => n - 1,
                        };
                        split[r * n + col] = split[r * n + col] + *c / total_x;
                    }
                }
                demands.push(d);
                chunks.push(comp.clone());
            }
            let mut supplies: Vec<T> = outgoing.iter().map(|&j| link_s[j]).collect();
            supplies.push(T::infinity());
            let flows = junction_flows(&demands, &supplies, &split)?;

            for (r, row) in rows.iter().enumerate() {
                if demands[r] <= T::zero() {
                    continue;
                }
                let theta = flows.theta[r];
                let (out, next) = match *row {
                    Row::Link(i) => (&mut down_inc[i], &topo.link_next[i]),
                    Row::Queue(qi) => (&mut rel_inc[qi], &topo.queue_next[qi]),
                };
                for (slot, (&c, nx)) in chunks[r].iter().zip(next).enumerate() {
                    let x = theta * c;
                    out[slot] = x;
                    match *nx {
                        Next::Link { link, slot } => up_inc[link][slot] = up_inc[link][slot] + x,
                        Next::Sink => sink_inc[v] = sink_inc[v] + x,
                    }
                }
            }
        }

        for (i, s) in links.iter_mut().enumerate() {
            advance(&mut s.up, &mut s.path_up, &up_inc[i]);
            advance(&mut s.down, &mut s.path_down, &down_inc[i]);
        }
        for (qi, q) in queues.iter_mut().enumerate() {
            advance(&mut q.released, &mut q.path_released, &rel_inc[qi]);
        }
        for (v, sink) in sinks.iter_mut().enumerate() {
            let next = sink.last() + sink_inc[v];
            sink.push(next);
        }

        steps = k + 1;
        if steps >= min_steps {
            let exited: T = sinks.iter().map(CumulativeCurve::last).sum();
            if total - exited <= drain_tol {
                drained = true;
                break;
            }
        }
    }

    Ok(LoadingResult {
        grid,
        steps,
        links,
        queues,
        path_queue: topo.path_queue,
        sinks,
        total_departed: total,
        curve_tolerance: eps,
        drain_tolerance: if drained { drain_tol } else { T::zero() },
    })
}

fn advance<T: Scalar>(agg: &mut CumulativeCurve<T>, per_path: &mut [CumulativeCurve<T>], inc: &[T]) {
    let mut sum = T::zero();
    for (c, &x) in per_path.iter_mut().zip(inc) {
        let next = c.last() + x;
        c.push(next);
        sum = sum + x;
    }
    let next = agg.last() + sum;
    agg.push(next);
}
