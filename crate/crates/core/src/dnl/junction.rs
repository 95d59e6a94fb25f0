//! Node model: FIFO, demand-proportional supply sharing, flow maximizing.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct JunctionFlows<T> {
    /// Flow leaving each incoming link.
    pub outflow: Vec<T>,
    /// Flow entering each outgoing link.
    pub inflow: Vec<T>,
    /// Reduction factor applied to each incoming demand.
    pub theta: Vec<T>,
}

/// Resolves `(f_out, f_in) = Theta(D, S, W)` at a junction with `m` incoming
/// and `n` outgoing links.
///
/// `split` is row-major `m x n`; rows with positive demand must sum to one.
/// Supplies may be `+inf` (free exit). Each incoming link `i` sends
/// `theta_i D_i`; the outgoing link whose remaining supply is most
/// oversubscribed fixes the factor of every link feeding it, its flows are
/// deducted from all supplies, and the sweep repeats (at most `n` times).
pub fn junction_flows<T: Scalar>(demands: &[T], supplies: &[T], split: &[T]) -> Result<JunctionFlows<T>> {
    let m = demands.len();
    let n = supplies.len();
    if split.len() != m * n {
        return Err(Error::Dimension(format!("split matrix has {} entries, expected {m}x{n}", split.len())));
    }
    if demands.iter().chain(supplies).any(|&x| x.is_nan() || x < T::zero()) {
        return Err(Error::Validation("junction demands and supplies must be non-negative".into()));
    }
    if demands.iter().any(|d| d.is_infinite()) {
        return Err(Error::Validation("junction demand must be finite".into()));
    }
    let tol = T::lit(1e-9).max(T::epsilon() * T::lit(64.0));
    for i in 0..m {
        if demands[i] > T::zero() {
            let row = &split[i * n..(i + 1) * n];
            if row.iter().any(|&w| !(w >= T::zero())) {
                return Err(Error::Validation(format!("split row {i} has a negative entry")));
            }
            let sum: T = row.iter().copied().sum();
            if (sum - T::one()).abs() > tol {
                return Err(Error::Validation(format!("split row {i} sums to {sum}, expected 1")));
            }
        }
    }

    let mut theta = vec![T::one(); m];
    let mut active: Vec<bool> = demands.iter().map(|&d| d > T::zero()).collect();
    let mut remaining = supplies.to_vec();
    let mut request = vec![T::zero(); n];
    for _ in 0..n.max(1) {
        request.iter_mut().for_each(|r| *r = T::zero());
        for i in (0..m).filter(|&i| active[i]) {
            for j in 0..n {
                request[j] = request[j] + split[i * n + j] * demands[i];
            }
        }
        let mut bottleneck: Option<(usize, T)> = None;
        for j in 0..n {
            if request[j] > T::zero() && remaining[j].is_finite() {
                let ratio = remaining[j] / request[j];
                if bottleneck.map_or(true, |(_, r)| ratio < r) {
                    bottleneck = Some((j, ratio));
                }
            }
        }
        let (jstar, ratio) = match bottleneck {
            Some((j, r)) if r < T::one() => (j, r.max(T::zero())),
            _ => break,
        };
        for i in 0..m {
            if active[i] && split[i * n + jstar] > T::zero() {
                theta[i] = ratio;
                active[i] = false;
                for j in 0..n {
                    let used = split[i * n + j] * ratio * demands[i];
                    remaining[j] = (remaining[j] - used).max(T::zero());
                }
            }
        }
    }

    let outflow: Vec<T> = demands.iter().zip(&theta).map(|(&d, &th)| d * th).collect();
    let mut inflow = vec![T::zero(); n];
    for i in 0..m {
        for j in 0..n {
            inflow[j] = inflow[j] + split[i * n + j] * outflow[i];
        }
    }
    Ok(JunctionFlows { outflow, inflow, theta })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_pipe() {
        let f = junction_flows(&[2.0], &[3.0], &[1.0]).unwrap();
        assert_eq!((f.outflow[0], f.inflow[0]), (2.0, 2.0));
        let f = junction_flows(&[5.0], &[3.0], &[1.0]).unwrap();
        assert_eq!((f.outflow[0], f.inflow[0]), (3.0, 3.0));
    }

    #[test]
    fn fifo_diverge() {
        let f = junction_flows(&[4.0], &[1.0, 10.0], &[0.5, 0.5]).unwrap();
        assert_eq!(f.outflow, vec![2.0]);
        assert_eq!(f.inflow, vec![1.0, 1.0]);
    }

    #[test]
    fn merge_shares_in_proportion_to_demand() {
        let f = junction_flows(&[3.0_f64, 1.0], &[2.0], &[1.0, 1.0]).unwrap();
        assert!((f.outflow[0] - 1.5).abs() < 1e-15);
        assert!((f.outflow[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn infinite_supply_never_binds() {
        let f = junction_flows(&[3.0, 2.0], &[f64::INFINITY, 1.0], &[1.0, 0.0, 0.5, 0.5]).unwrap();
        assert_eq!(f.outflow, vec![3.0, 2.0]);
        assert_eq!(f.inflow, vec![4.0, 1.0]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(junction_flows(&[-1.0], &[1.0], &[1.0]).is_err());
        assert!(junction_flows(&[1.0], &[1.0], &[0.7]).is_err());
        // a row with zero demand need not be stochastic
        assert!(junction_flows(&[0.0], &[1.0], &[0.0]).is_ok());
    }
}
