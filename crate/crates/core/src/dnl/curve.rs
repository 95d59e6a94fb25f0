use crate::scalar::Scalar;

/// Piecewise-linear cumulative vehicle count sampled on a uniform grid.
///
/// `values[k]` is the count at `t0 + k * dt`; the curve starts at zero and
/// never decreases. Before `t0` the count is zero; past the last sample it
/// is undefined until more samples are pushed.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulativeCurve<T> {
    t0: T,
    dt: T,
    values: Vec<T>,
}

impl<T: Scalar> CumulativeCurve<T> {
    pub fn new(t0: T, dt: T) -> Self {
        CumulativeCurve { t0, dt, values: vec![T::zero()] }
    }

    /// Curve with the given samples (first sample must be zero).
    pub fn from_samples(t0: T, dt: T, values: Vec<T>) -> Self {
        debug_assert!(!values.is_empty());
        CumulativeCurve { t0, dt, values }
    }

    pub fn push(&mut self, value: T) {
        self.values.push(value);
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn last(&self) -> T {
        *self.values.last().expect("curve has at least one sample")
    }

    pub fn t0(&self) -> T {
        self.t0
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn last_time(&self) -> T {
        self.time(self.values.len() - 1)
    }

    pub fn time(&self, k: usize) -> T {
        self.t0 + T::from_usize_lossy(k) * self.dt
    }

    /// Count at time `t` by linear interpolation; zero before `t0` and the
    /// last sample beyond the loaded range.
    pub fn at(&self, t: T) -> T {
        if t <= self.t0 {
            return self.values[0];
        }
        let x = (t - self.t0) / self.dt;
        let k = x.floor();
        let i = k.to_usize().unwrap_or(usize::MAX);
        if i + 1 >= self.values.len() {
            return self.last();
        }
        let frac = x - k;
        self.values[i] + frac * (self.values[i + 1] - self.values[i])
    }

    /// Mean slope over `[t, t + dt]`.
    pub fn mean_rate(&self, t: T) -> T {
        (self.at(t + self.dt) - self.at(t)) / self.dt
    }

    /// Position `(k, frac)` with `N(t_{k-1} + frac dt) = n` at the first
    /// crossing; `None` if the curve never reaches `n`.
    pub(crate) fn crossing(&self, n: T) -> Option<(usize, T)> {
        if self.values[0] >= n {
            return Some((0, T::zero()));
        }
        let k = self.values.partition_point(|&v| v < n);
        if k == self.values.len() {
            return None;
        }
        let (lo, hi) = (self.values[k - 1], self.values[k]);
        let frac = if hi > lo { (n - lo) / (hi - lo) } else { T::one() };
        Some((k, frac.max(T::zero()).min(T::one())))
    }

    /// Smallest `s` with `N(s) >= n`.
    pub fn first_reach(&self, n: T) -> Option<T> {
        self.crossing(n).map(|(k, frac)| {
            if k == 0 {
                self.t0
            } else {
                self.time(k - 1) + frac * self.dt
            }
        })
    }

    /// Value at a position returned by [`Self::crossing`] of a sibling curve.
    pub(crate) fn at_crossing(&self, k: usize, frac: T) -> T {
        if k == 0 {
            return self.values[0];
        }
        let (lo, hi) = (self.values[k - 1], self.values[k]);
        lo + frac * (hi - lo)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation_and_inverse() {
        let c = CumulativeCurve::from_samples(0.0, 1.0, vec![0.0, 2.0, 2.0, 5.0]);
        assert_eq!(c.at(-1.0), 0.0);
        assert_eq!(c.at(0.5), 1.0);
        assert_eq!(c.at(2.5), 3.5);
        assert_eq!(c.at(10.0), 5.0);
        assert_eq!(c.first_reach(0.0), Some(0.0));
        assert_eq!(c.first_reach(1.0), Some(0.5));
        // flat section: first time the level is reached
        assert_eq!(c.first_reach(2.0), Some(1.0));
        assert_eq!(c.first_reach(3.5), Some(2.5));
        assert_eq!(c.first_reach(5.5), None);
        assert_eq!(c.mean_rate(2.0), 3.0);
        assert_eq!(c.last_time(), 3.0);
    }
}
