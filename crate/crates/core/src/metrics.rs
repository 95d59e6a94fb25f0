//! Equilibrium gaps and convergence logs.

use std::io::Write;

use crate::error::{Error, Result};
use crate::hilbert::{DelayProfile, OdPartition, PathField, PathFlowProfile};
use crate::scalar::Scalar;
use crate::solvers::Algorithm;

/// `e_n = ||h_{n+1} - h_n|| / ||h_n||`; `None` when `h_n = 0`.
pub fn relative_energy<T: Scalar>(next: &PathField<T>, curr: &PathField<T>) -> Result<Option<T>> {
    let d = next.distance(curr)?;
    let n = curr.norm();
    Ok(if n > T::zero() { Some(d / n) } else { None })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapReport<T> {
    /// `GAP_w` per O-D pair.
    pub gaps: Vec<T>,
    /// Support threshold actually used.
    pub eps_support: T,
    /// O-D pairs with no cell above the threshold; their gap is reported as 0.
    pub unsupported: Vec<usize>,
}

impl<T: Scalar> GapReport<T> {
    pub fn median(&self) -> Option<T> {
        median(&self.gaps)
    }

    pub fn max(&self) -> T {
        self.gaps.iter().copied().fold(T::zero(), T::max)
    }

    pub fn mean(&self) -> T {
        if self.gaps.is_empty() {
            return T::zero();
        }
        self.gaps.iter().copied().sum::<T>() / T::from_usize_lossy(self.gaps.len())
    }
}

pub fn median<T: Scalar>(xs: &[T]) -> Option<T> {
    if xs.is_empty() {
        return None;
    }
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { (v[m - 1] + v[m]) / T::lit(2.0) })
}

/// Per-O-D range of effective delays over the used cells
/// `{(p, k) : h_p(k) > eps_support}`.
///
/// `eps_support` defaults to `1e-6 max h`. In `strict` mode the minimum runs
/// over all cells of the O-D pair, so a cheaper unused departure widens the
/// gap.
pub fn od_gap<T: Scalar>(
    h: &PathFlowProfile<T>,
    ah: &DelayProfile<T>,
    partition: &OdPartition,
    eps_support: Option<T>,
    strict: bool,
) -> Result<GapReport<T>> {
    h.check_same_shape(ah)?;
    if partition.num_paths() != h.num_paths() {
        return Err(Error::Dimension(format!("profile has {} paths, partition {}", h.num_paths(), partition.num_paths())));
    }
    let eps = eps_support.unwrap_or_else(|| T::lit(1e-6) * h.max_value().max(T::zero()));
    let mut gaps = Vec::with_capacity(partition.num_ods());
    let mut unsupported = Vec::new();
    for w in 0..partition.num_ods() {
        let mut hi = T::neg_infinity();
        let mut lo = T::infinity();
        let mut lo_all = T::infinity();
        let mut used = 0usize;
        for &p in partition.paths(w) {
            for k in 0..h.num_intervals() {
                let a = ah.get(p, k);
                lo_all = lo_all.min(a);
                if h.get(p, k) > eps {
                    used += 1;
                    hi = hi.max(a);
                    lo = lo.min(a);
                }
            }
        }
        if used == 0 {
            unsupported.push(w);
            gaps.push(T::zero());
        } else {
            let lo = if strict { lo_all } else { lo };
            gaps.push((hi - lo).max(T::zero()));
        }
    }
    Ok(GapReport { gaps, eps_support: eps, unsupported })
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRow<T> {
    pub n: usize,
    pub tau: T,
    pub alpha: Option<T>,
    pub beta: Option<T>,
    /// Projected residual at the point where the operator was evaluated.
    pub residual: T,
    pub relative_energy: Option<T>,
    /// Cumulative operator evaluations after this iteration.
    pub calls: usize,
    /// `alpha_n ||h_n - h_{n-1}||` (IFBF).
    pub inertia: Option<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceLog<T> {
    pub algorithm: Algorithm,
    pub rows: Vec<IterationRow<T>>,
    /// Final per-O-D gaps, once computed.
    pub gaps: Option<Vec<T>>,
}

fn opt<T: Scalar>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

impl<T: Scalar> ConvergenceLog<T> {
    pub fn new(algorithm: Algorithm) -> Self {
        ConvergenceLog { algorithm, rows: Vec::new(), gaps: None }
    }

    pub fn taus(&self) -> Vec<T> {
        self.rows.iter().map(|r| r.tau).collect()
    }

    pub fn energies(&self) -> Vec<Option<T>> {
        self.rows.iter().map(|r| r.relative_energy).collect()
    }

    /// First and last defined relative energies.
    pub fn energy_drop(&self) -> Option<(T, T)> {
        let mut it = self.rows.iter().filter_map(|r| r.relative_energy);
        let first = it.next()?;
        Some((first, it.last().unwrap_or(first)))
    }

    /// One CSV row per iteration. Undefined values are left empty.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let err = |e: csv::Error| Error::Config(format!("writing iteration log: {e}"));
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n", "tau", "alpha", "beta", "residual", "relative_energy", "calls", "inertia"]).map_err(err)?;
        for r in &self.rows {
            w.write_record([
                r.n.to_string(),
                r.tau.to_string(),
                opt(r.alpha),
                opt(r.beta),
                r.residual.to_string(),
                opt(r.relative_energy),
                r.calls.to_string(),
                opt(r.inertia),
            ])
            .map_err(err)?;
        }
        w.flush().map_err(|e| Error::Config(format!("writing iteration log: {e}")))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::TimeGrid;

    fn field(rows: &[&[f64]]) -> PathField<f64> {
        let grid = TimeGrid::new(0.0, rows[0].len() as f64, rows[0].len()).unwrap();
        PathField::from_values(grid, rows.len(), rows.concat()).unwrap()
    }

    #[test]
    fn gap_examples() {
        let part = OdPartition::new(1, vec![0, 0]).unwrap();
        let h = field(&[&[1.0, 1.0], &[1.0, 0.0]]);
        let equal = field(&[&[2.0, 2.0], &[2.0, 9.0]]);
        assert_eq!(od_gap(&h, &equal, &part, None, false).unwrap().gaps, vec![0.0]);
        let costs = field(&[&[3.0, 5.0], &[4.0, 1.0]]);
        let r = od_gap(&h, &costs, &part, None, false).unwrap();
        assert_eq!(r.gaps, vec![2.0]);
        // the unused cheaper cell widens the strict gap
        assert_eq!(od_gap(&h, &costs, &part, None, true).unwrap().gaps, vec![4.0]);
        let zero = field(&[&[0.0, 0.0], &[0.0, 0.0]]);
        assert_eq!(od_gap(&zero, &costs, &part, None, false).unwrap().unsupported, vec![0]);
    }

    #[test]
    fn energy_examples() {
        let h = field(&[&[1.0, 2.0]]);
        assert_eq!(relative_energy(&h, &h).unwrap(), Some(0.0));
        assert_eq!(relative_energy(&h.scaled(2.0), &h).unwrap(), Some(1.0));
        assert_eq!(relative_energy(&h, &h.scaled(0.0)).unwrap(), None);
    }

    #[test]
    fn csv_layout() {
        let mut log = ConvergenceLog::new(Algorithm::Fb);
        log.rows.push(IterationRow {
            n: 0,
            tau: 0.5,
            alpha: None,
            beta: Some(0.25),
            residual: 1.0,
            relative_energy: None,
            calls: 1,
            inertia: None,
        });
        let mut buf = Vec::new();
        log.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "n,tau,alpha,beta,residual,relative_energy,calls,inertia\n0,0.5,,0.25,1,,1,\n");
        assert_eq!(median(&[3.0, 1.0, 2.0, 10.0]), Some(2.5));
    }
}
