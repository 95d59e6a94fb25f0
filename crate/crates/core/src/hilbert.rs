//! Piecewise-constant path profiles on a uniform time grid, the discretized
//! `L^2` geometry on them, and the projection onto the feasible flow set.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Uniform partition of `[t0, t1]` into `num_intervals` cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid<T> {
    t0: T,
    t1: T,
    num_intervals: usize,
}

impl<T: Scalar> TimeGrid<T> {
    pub fn new(t0: T, t1: T, num_intervals: usize) -> Result<Self> {
        if !t0.is_finite() || !t1.is_finite() || t1 <= t0 {
            return Err(Error::Parameter(format!(
                "time grid needs t1 > t0, got [{t0}, {t1}]"
            )));
        }
        if num_intervals == 0 {
            return Err(Error::Parameter("time grid needs at least one interval".into()));
        }
        Ok(TimeGrid { t0, t1, num_intervals })
    }

    pub fn t0(&self) -> T {
        self.t0
    }

    pub fn t1(&self) -> T {
        self.t1
    }

    pub fn num_intervals(&self) -> usize {
        self.num_intervals
    }

    pub fn dt(&self) -> T {
        (self.t1 - self.t0) / T::from_usize_lossy(self.num_intervals)
    }

    /// Left end of interval `k` (also valid for `k == num_intervals`).
    pub fn start(&self, k: usize) -> T {
        self.t0 + T::from_usize_lossy(k) * self.dt()
    }

    pub fn midpoint(&self, k: usize) -> T {
        self.start(k) + self.dt() / T::lit(2.0)
    }

    /// Same spacing, extended to `num_intervals` cells.
    pub fn extended(&self, num_intervals: usize) -> Self {
        let t1 = self.t0 + T::from_usize_lossy(num_intervals) * self.dt();
        TimeGrid { t0: self.t0, t1, num_intervals }
    }
}

/// A function `[t0, t1] -> R^P` that is constant on each grid cell.
///
/// Used for departure-rate profiles `h` as well as delay profiles `A(h)`;
/// entries may be negative (intermediate solver points leave the feasible
/// set).
#[derive(Debug, Clone, PartialEq)]
pub struct PathField<T> {
    grid: TimeGrid<T>,
    num_paths: usize,
    values: Vec<T>,
}

pub type PathFlowProfile<T> = PathField<T>;
pub type DelayProfile<T> = PathField<T>;

impl<T: Scalar> PathField<T> {
    pub fn zeros(grid: TimeGrid<T>, num_paths: usize) -> Self {
        PathField {
            grid,
            num_paths,
            values: vec![T::zero(); num_paths * grid.num_intervals()],
        }
    }

    pub fn constant(grid: TimeGrid<T>, num_paths: usize, value: T) -> Self {
        PathField {
            grid,
            num_paths,
            values: vec![value; num_paths * grid.num_intervals()],
        }
    }

    pub fn from_fn(grid: TimeGrid<T>, num_paths: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let k = grid.num_intervals();
        let values = (0..num_paths * k).map(|i| f(i / k, i % k)).collect();
        PathField { grid, num_paths, values }
    }

    /// Row-major values (`path * num_intervals + interval`).
    pub fn from_values(grid: TimeGrid<T>, num_paths: usize, values: Vec<T>) -> Result<Self> {
        if values.len() != num_paths * grid.num_intervals() {
            return Err(Error::Dimension(format!(
                "{} values for {} paths x {} intervals",
                values.len(),
                num_paths,
                grid.num_intervals()
            )));
        }
        Ok(PathField { grid, num_paths, values })
    }

    pub fn grid(&self) -> &TimeGrid<T> {
        &self.grid
    }

    pub fn num_paths(&self) -> usize {
        self.num_paths
    }

    pub fn num_intervals(&self) -> usize {
        self.grid.num_intervals()
    }

    pub fn get(&self, path: usize, interval: usize) -> T {
        self.values[path * self.num_intervals() + interval]
    }

    pub fn set(&mut self, path: usize, interval: usize, value: T) {
        let k = self.num_intervals();
        self.values[path * k + interval] = value;
    }

    pub fn row(&self, path: usize) -> &[T] {
        let k = self.num_intervals();
        &self.values[path * k..(path + 1) * k]
    }

    pub fn row_mut(&mut self, path: usize) -> &mut [T] {
        let k = self.num_intervals();
        &mut self.values[path * k..(path + 1) * k]
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn max_value(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }

    pub fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.num_paths != other.num_paths || self.grid != other.grid {
            return Err(Error::Dimension(format!(
                "profiles over {} paths x {} intervals and {} paths x {} intervals",
                self.num_paths,
                self.num_intervals(),
                other.num_paths,
                other.num_intervals()
            )));
        }
        Ok(())
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: T, other: &Self, b: T) -> Result<Self> {
        self.check_same_shape(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&x, &y)| a * x + b * y)
            .collect();
        Ok(PathField { grid: self.grid, num_paths: self.num_paths, values })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(T::one(), other, -T::one())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(T::one(), other, T::one())
    }

    pub fn scaled(&self, a: T) -> Self {
        PathField {
            grid: self.grid,
            num_paths: self.num_paths,
            values: self.values.iter().map(|&x| a * x).collect(),
        }
    }

    /// Entrywise `max(x, 0)`.
    pub fn positive_part(&self) -> Self {
        PathField {
            grid: self.grid,
            num_paths: self.num_paths,
            values: self.values.iter().map(|&x| x.max(T::zero())).collect(),
        }
    }

    pub fn inner(&self, other: &Self) -> Result<T> {
        inner(self, other)
    }

    pub fn norm(&self) -> T {
        norm(self)
    }

    pub fn distance(&self, other: &Self) -> Result<T> {
        Ok(self.sub(other)?.norm())
    }
}

/// `sum_p sum_k f[p,k] g[p,k] dt`.
pub fn inner<T: Scalar>(f: &PathField<T>, g: &PathField<T>) -> Result<T> {
    f.check_same_shape(g)?;
    let dot: T = f.values.iter().zip(&g.values).map(|(&a, &b)| a * b).sum();
    Ok(dot * f.grid.dt())
}

pub fn norm<T: Scalar>(f: &PathField<T>) -> T {
    let sq: T = f.values.iter().map(|&a| a * a).sum();
    (sq * f.grid.dt()).sqrt()
}

/// Demand `Q_w` and target arrival time `tau_w` per O-D pair.
#[derive(Debug, Clone, PartialEq)]
pub struct TripTable<T> {
    demands: Vec<T>,
    targets: Vec<T>,
}

impl<T: Scalar> TripTable<T> {
    pub fn new(demands: Vec<T>, targets: Vec<T>) -> Result<Self> {
        if demands.len() != targets.len() {
            return Err(Error::Dimension(format!(
                "{} demands but {} target times",
                demands.len(),
                targets.len()
            )));
        }
        if let Some((w, q)) = demands
            .iter()
            .enumerate()
            .find(|(_, q)| !q.is_finite() || **q <= T::zero())
        {
            return Err(Error::Validation(format!("O-D pair {w} has demand {q}; must be > 0")));
        }
        Ok(TripTable { demands, targets })
    }

    pub fn len(&self) -> usize {
        self.demands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.demands.is_empty()
    }

    pub fn demand(&self, od: usize) -> T {
        self.demands[od]
    }

    pub fn target(&self, od: usize) -> T {
        self.targets[od]
    }

    pub fn demands(&self) -> &[T] {
        &self.demands
    }

    pub fn total_demand(&self) -> T {
        self.demands.iter().copied().sum()
    }

    /// Target times must lie in the planning horizon.
    pub fn check_targets(&self, grid: &TimeGrid<T>) -> Result<()> {
        for (w, &tau) in self.targets.iter().enumerate() {
            if !(tau >= grid.t0() && tau <= grid.t1()) {
                return Err(Error::Validation(format!(
                    "O-D pair {w}: target time {tau} outside [{}, {}]",
                    grid.t0(),
                    grid.t1()
                )));
            }
        }
        Ok(())
    }
}

/// Grouping of path indices by O-D pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OdPartition {
    paths_by_od: Vec<Vec<usize>>,
    od_of_path: Vec<usize>,
}

impl OdPartition {
    /// `od_of_path[p]` is the O-D index of path `p`.
    pub fn new(num_ods: usize, od_of_path: Vec<usize>) -> Result<Self> {
        let mut paths_by_od = vec![Vec::new(); num_ods];
        for (p, &w) in od_of_path.iter().enumerate() {
            let slot = paths_by_od.get_mut(w).ok_or_else(|| {
                Error::Config(format!("path {p} refers to O-D pair {w} of {num_ods}"))
            })?;
            slot.push(p);
        }
        if let Some(w) = paths_by_od.iter().position(Vec::is_empty) {
            return Err(Error::Config(format!("O-D pair {w} has no paths")));
        }
        Ok(OdPartition { paths_by_od, od_of_path })
    }

    pub fn num_ods(&self) -> usize {
        self.paths_by_od.len()
    }

    pub fn num_paths(&self) -> usize {
        self.od_of_path.len()
    }

    pub fn paths(&self, od: usize) -> &[usize] {
        &self.paths_by_od[od]
    }

    pub fn od_of(&self, path: usize) -> usize {
        self.od_of_path[path]
    }
}

/// Euclidean projection of `v` onto `{x >= 0, sum x = total}` (`total > 0`),
/// by sorting and scanning for the threshold.
pub fn project_simplex<T: Scalar>(v: &[T], total: T, out: &mut [T]) {
    debug_assert_eq!(v.len(), out.len());
    let mut sorted = v.to_vec();
    sorted.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
    let mut cumsum = T::zero();
    let mut theta = T::zero();
    for (j, &u) in sorted.iter().enumerate() {
        cumsum = cumsum + u;
        let candidate = (cumsum - total) / T::from_usize_lossy(j + 1);
        if u - candidate > T::zero() {
            theta = candidate;
        } else {
            break;
        }
    }
    for (o, &x) in out.iter_mut().zip(v) {
        *o = (x - theta).max(T::zero());
    }
}

/// Nearest point of `X = {g >= 0, sum_{p in P_w} int g_p = Q_w}`.
pub fn project_feasible<T: Scalar>(
    f: &PathField<T>,
    trips: &TripTable<T>,
    partition: &OdPartition,
) -> Result<PathField<T>> {
    if partition.num_paths() != f.num_paths() || partition.num_ods() != trips.len() {
        return Err(Error::Dimension(format!(
            "profile has {} paths, partition {} paths / {} O-D pairs, trip table {} O-D pairs",
            f.num_paths(),
            partition.num_paths(),
            partition.num_ods(),
            trips.len()
        )));
    }
    if !f.is_finite() {
        return Err(Error::NonFinite("profile passed to projection".into()));
    }
    let k = f.num_intervals();
    let dt = f.grid().dt();
    let mut out = f.clone();
    let mut block = Vec::new();
    let mut projected = Vec::new();
    for w in 0..partition.num_ods() {
        let paths = partition.paths(w);
        block.clear();
        for &p in paths {
            block.extend_from_slice(f.row(p));
        }
        projected.resize(block.len(), T::zero());
        project_simplex(&block, trips.demand(w) / dt, &mut projected);
        for (i, &p) in paths.iter().enumerate() {
            out.row_mut(p).copy_from_slice(&projected[i * k..(i + 1) * k]);
        }
    }
    Ok(out)
}

/// `||h - P_X(h - tau A(h))||`, zero exactly at solutions of the VI.
pub fn residual_norm<T: Scalar>(
    h: &PathField<T>,
    tau: T,
    ah: &PathField<T>,
    trips: &TripTable<T>,
    partition: &OdPartition,
) -> Result<T> {
    if !(tau > T::zero()) {
        return Err(Error::Parameter(format!("residual step must be positive, got {tau}")));
    }
    let shifted = h.combine(T::one(), ah, -tau)?;
    let projected = project_feasible(&shifted, trips, partition)?;
    h.distance(&projected)
}

/// Feasible starting point: every path of `w` departs at `Q_w / (|P_w| (t1 - t0))`.
pub fn uniform_feasible<T: Scalar>(
    grid: TimeGrid<T>,
    trips: &TripTable<T>,
    partition: &OdPartition,
) -> PathField<T> {
    let span = grid.t1() - grid.t0();
    PathField::from_fn(grid, partition.num_paths(), |p, _| {
        let w = partition.od_of(p);
        trips.demand(w) / (T::from_usize_lossy(partition.paths(w).len()) * span)
    })
}

/// The feasible set `X` on a fixed grid: demands plus the path grouping.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibleSet<T> {
    pub grid: TimeGrid<T>,
    pub trips: TripTable<T>,
    pub partition: OdPartition,
}

impl<T: Scalar> FeasibleSet<T> {
    pub fn new(grid: TimeGrid<T>, trips: TripTable<T>, partition: OdPartition) -> Result<Self> {
        if trips.len() != partition.num_ods() {
            return Err(Error::Dimension(format!(
                "trip table has {} O-D pairs, partition {}",
                trips.len(),
                partition.num_ods()
            )));
        }
        Ok(FeasibleSet { grid, trips, partition })
    }

    pub fn num_paths(&self) -> usize {
        self.partition.num_paths()
    }

    pub fn project(&self, f: &PathField<T>) -> Result<PathField<T>> {
        project_feasible(f, &self.trips, &self.partition)
    }

    pub fn residual(&self, h: &PathField<T>, tau: T, ah: &PathField<T>) -> Result<T> {
        residual_norm(h, tau, ah, &self.trips, &self.partition)
    }

    pub fn uniform(&self) -> PathField<T> {
        uniform_feasible(self.grid, &self.trips, &self.partition)
    }

    /// Largest violation of the demand constraints and of non-negativity.
    pub fn infeasibility(&self, h: &PathField<T>) -> T {
        let dt = self.grid.dt();
        let mut worst = h.values().iter().fold(T::zero(), |m, &x| m.max(-x));
        for w in 0..self.partition.num_ods() {
            let total: T = self.partition.paths(w).iter().map(|&p| h.row(p).iter().copied().sum::<T>() * dt).sum();
            worst = worst.max((total - self.trips.demand(w)).abs());
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_path(values: [f64; 2]) -> (PathField<f64>, TripTable<f64>, OdPartition) {
        let grid = TimeGrid::new(0.0, 1.0, 1).unwrap();
        let f = PathField::from_values(grid, 2, values.to_vec()).unwrap();
        let trips = TripTable::new(vec![2.0], vec![0.5]).unwrap();
        let part = OdPartition::new(1, vec![0, 0]).unwrap();
        (f, trips, part)
    }

    #[test]
    fn inner_of_zero_is_zero() {
        let grid = TimeGrid::new(0.0, 2.0, 4).unwrap();
        let f = PathField::<f64>::zeros(grid, 3);
        assert_eq!(inner(&f, &f).unwrap(), 0.0);
        assert_eq!(norm(&f), 0.0);
    }

    #[test]
    fn inner_single_entry() {
        let grid = TimeGrid::new(0.0, 1.0, 2).unwrap();
        let mut f = PathField::<f64>::zeros(grid, 2);
        f.set(1, 0, 2.0);
        assert_eq!(inner(&f, &f).unwrap(), 2.0);
        let grid = TimeGrid::new(0.0, 1.0, 1).unwrap();
        let g = PathField::from_values(grid, 1, vec![3.0]).unwrap();
        assert_eq!(norm(&g), 3.0);
    }

    #[test]
    fn inner_rejects_mismatch() {
        let a = PathField::<f64>::zeros(TimeGrid::new(0.0, 1.0, 2).unwrap(), 2);
        let b = PathField::<f64>::zeros(TimeGrid::new(0.0, 1.0, 3).unwrap(), 2);
        let c = PathField::<f64>::zeros(TimeGrid::new(0.0, 1.0, 2).unwrap(), 3);
        assert!(matches!(inner(&a, &b), Err(Error::Dimension(_))));
        assert!(matches!(inner(&a, &c), Err(Error::Dimension(_))));
    }

    #[test]
    fn grid_validation() {
        assert!(TimeGrid::new(1.0, 1.0, 3).is_err());
        assert!(TimeGrid::new(0.0, 1.0, 0).is_err());
        let g = TimeGrid::new(0.0, 2.0, 4).unwrap();
        assert_eq!(g.dt(), 0.5);
        assert_eq!(g.start(3), 1.5);
        assert_eq!(g.midpoint(0), 0.25);
        assert_eq!(g.extended(8).t1(), 4.0);
    }

    #[test]
    fn projection_two_path_examples() {
        let (f, trips, part) = two_path([1.0, 1.0]);
        assert_eq!(project_feasible(&f, &trips, &part).unwrap().values(), &[1.0, 1.0]);
        let (f, trips, part) = two_path([0.0, 0.0]);
        assert_eq!(project_feasible(&f, &trips, &part).unwrap().values(), &[1.0, 1.0]);
        let (f, trips, part) = two_path([3.0, 0.0]);
        assert_eq!(project_feasible(&f, &trips, &part).unwrap().values(), &[2.0, 0.0]);
    }

    #[test]
    fn projection_scales_with_dt() {
        let grid = TimeGrid::new(0.0, 2.0, 4).unwrap();
        let f = PathField::<f64>::zeros(grid, 1);
        let trips = TripTable::new(vec![3.0], vec![1.0]).unwrap();
        let part = OdPartition::new(1, vec![0]).unwrap();
        let p = project_feasible(&f, &trips, &part).unwrap();
        assert!(p.values().iter().all(|&x| (x - 1.5).abs() < 1e-15));
    }

    #[test]
    fn partition_errors() {
        assert!(matches!(OdPartition::new(2, vec![0, 0]), Err(Error::Config(_))));
        assert!(matches!(OdPartition::new(1, vec![0, 1]), Err(Error::Config(_))));
        assert!(matches!(TripTable::new(vec![0.0], vec![0.0]), Err(Error::Validation(_))));
        assert!(matches!(TripTable::new(vec![-1.0], vec![0.0]), Err(Error::Validation(_))));
    }

    #[test]
    fn residual_examples() {
        let (h, trips, part) = two_path([1.0, 1.0]);
        let zero = PathField::zeros(*h.grid(), 2);
        assert_eq!(residual_norm(&h, 1.0, &zero, &trips, &part).unwrap(), 0.0);
        let flat = PathField::constant(*h.grid(), 2, 7.5);
        assert!(residual_norm(&h, 1.0, &flat, &trips, &part).unwrap() < 1e-14);

        let (h, trips, part) = two_path([2.0, 0.0]);
        let ah = PathField::from_values(*h.grid(), 2, vec![0.0, 10.0]).unwrap();
        assert_eq!(residual_norm(&h, 1.0, &ah, &trips, &part).unwrap(), 0.0);
        assert!(matches!(
            residual_norm(&h, 0.0, &ah, &trips, &part),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn uniform_start_is_feasible() {
        let grid = TimeGrid::new(0.0, 2.0, 5).unwrap();
        let trips = TripTable::new(vec![4.0, 6.0], vec![1.0, 1.0]).unwrap();
        let part = OdPartition::new(2, vec![0, 1, 1, 0, 1]).unwrap();
        let h = uniform_feasible(grid, &trips, &part);
        let p = project_feasible(&h, &trips, &part).unwrap();
        assert!(h.distance(&p).unwrap() < 1e-12);
    }

    #[test]
    fn works_in_f32() {
        let grid = TimeGrid::<f32>::new(0.0, 1.0, 1).unwrap();
        let f = PathField::from_values(grid, 2, vec![3.0f32, 0.0]).unwrap();
        let trips = TripTable::new(vec![2.0f32], vec![0.5]).unwrap();
        let part = OdPartition::new(1, vec![0, 0]).unwrap();
        assert_eq!(project_feasible(&f, &trips, &part).unwrap().values(), &[2.0f32, 0.0]);
    }
}
