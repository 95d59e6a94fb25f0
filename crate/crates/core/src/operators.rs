//! Delay operators `A: X -> L^2` consumed by the solvers.
//!
//! [`DnlOperator`] is the traffic model. The remaining operators are small
//! finite-dimensional test problems with known solutions.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::dnl::{effective_delay, path_delay, run_dnl, DnlConfig, LoadingResult};
use crate::error::{Error, Result};
use crate::hilbert::{DelayProfile, FeasibleSet, OdPartition, PathField, PathFlowProfile, TimeGrid, TripTable};
use crate::network::Network;
use crate::scalar::Scalar;

pub trait DelayOperator<T: Scalar>: Send + Sync {
    fn evaluate(&self, h: &PathFlowProfile<T>) -> Result<DelayProfile<T>>;

    /// Number of `evaluate` calls so far, cached or not.
    fn evaluations(&self) -> usize;

    /// Lipschitz constant, when known.
    fn lipschitz(&self) -> Option<T> {
        None
    }
}

#[derive(Debug, Default)]
pub struct CallCounter(AtomicUsize);

impl CallCounter {
    pub fn tick(&self) {
        self.0.fetch_add(1, Ordering::Relaxed);
    }

    pub fn get(&self) -> usize {
        self.0.load(Ordering::Relaxed)
    }
}

fn content_hash<T: Scalar>(h: &PathField<T>) -> u64 {
    let mut s = DefaultHasher::new();
    h.num_paths().hash(&mut s);
    for v in h.values() {
        v.as_f64().to_bits().hash(&mut s);
    }
    s.finish()
}

struct Memo<T> {
    hash: u64,
    input: PathField<T>,
    output: PathField<T>,
}

/// `A(h) = D(h) + phi(t + D(h) - T_w)` with `D` from the network loading.
///
/// Negative rates are clamped to zero before loading (loading is undefined
/// for negative departures). The most recent evaluation is memoized, so
/// re-evaluating the same profile does not reload the network; the call
/// counter still advances.
pub struct DnlOperator<T> {
    net: Network<T>,
    grid: TimeGrid<T>,
    gamma: T,
    config: DnlConfig<T>,
    calls: CallCounter,
    loads: CallCounter,
    memo: Mutex<Option<Memo<T>>>,
}

impl<T: Scalar> DnlOperator<T> {
    pub fn new(net: Network<T>, grid: TimeGrid<T>, gamma: T, config: DnlConfig<T>) -> Result<Self> {
        if !(gamma >= T::zero()) || !gamma.is_finite() {
            return Err(Error::Parameter(format!("penalty weight gamma must be finite and non-negative, got {gamma}")));
        }
        net.check_cfl(grid.dt())?;
        net.trips.check_targets(&grid)?;
        Ok(DnlOperator { net, grid, gamma, config, calls: CallCounter::default(), loads: CallCounter::default(), memo: Mutex::new(None) })
    }

    pub fn network(&self) -> &Network<T> {
        &self.net
    }

    pub fn grid(&self) -> TimeGrid<T> {
        self.grid
    }

    pub fn feasible_set(&self) -> FeasibleSet<T> {
        FeasibleSet { grid: self.grid, trips: self.net.trips.clone(), partition: self.net.partition.clone() }
    }

    /// Network loadings actually performed (cache misses).
    pub fn loads(&self) -> usize {
        self.loads.get()
    }

    fn clamp(&self, h: &PathFlowProfile<T>) -> Result<PathFlowProfile<T>> {
        if h.grid() != &self.grid || h.num_paths() != self.net.num_paths() {
            return Err(Error::Dimension(format!(
                "profile has {} paths x {} intervals, operator expects {} x {}",
                h.num_paths(),
                h.num_intervals(),
                self.net.num_paths(),
                self.grid.num_intervals()
            )));
        }
        if !h.is_finite() {
            return Err(Error::NonFinite("departure profile passed to the delay operator".into()));
        }
        Ok(h.positive_part())
    }

    /// Loads the clamped profile and returns every boundary curve.
    pub fn load(&self, h: &PathFlowProfile<T>) -> Result<LoadingResult<T>> {
        run_dnl(&self.clamp(h)?, &self.net, &self.config)
    }

    /// Path delays `D(h)` without the arrival penalty.
    pub fn path_delays(&self, h: &PathFlowProfile<T>) -> Result<DelayProfile<T>> {
        path_delay(&self.load(h)?, &self.net)
    }
}

impl<T: Scalar> DelayOperator<T> for DnlOperator<T> {
    fn evaluate(&self, h: &PathFlowProfile<T>) -> Result<DelayProfile<T>> {
        self.calls.tick();
        let hash = content_hash(h);
        {
            let memo = self.memo.lock().expect("memo lock");
            if let Some(m) = memo.as_ref() {
                if m.hash == hash && m.input.values() == h.values() {
                    return Ok(m.output.clone());
                }
            }
        }
        self.loads.tick();
        let d = self.path_delays(h)?;
        let a = effective_delay(&d, &self.net.trips, &self.net.partition, self.gamma)?;
        *self.memo.lock().expect("memo lock") = Some(Memo { hash, input: h.clone(), output: a.clone() });
        Ok(a)
    }

    fn evaluations(&self) -> usize {
        self.calls.get()
    }
}

/// `A = 0`: every feasible point solves the VI.
#[derive(Debug, Default)]
pub struct ZeroOperator {
    calls: CallCounter,
}

impl<T: Scalar> DelayOperator<T> for ZeroOperator {
    fn evaluate(&self, h: &PathFlowProfile<T>) -> Result<DelayProfile<T>> {
        self.calls.tick();
        Ok(PathField::zeros(*h.grid(), h.num_paths()))
    }

    fn evaluations(&self) -> usize {
        self.calls.get()
    }

    fn lipschitz(&self) -> Option<T> {
        Some(T::zero())
    }
}

/// `A(x) = M x + q` on the flattened profile.
#[derive(Debug)]
pub struct AffineOperator<T> {
    n: usize,
    m: Vec<T>,
    q: Vec<T>,
    lipschitz: T,
    calls: CallCounter,
}

impl<T: Scalar> AffineOperator<T> {
    /// `m` is row-major `n x n` with `n = q.len()`.
    pub fn new(m: Vec<T>, q: Vec<T>) -> Result<Self> {
        let n = q.len();
        if m.len() != n * n {
            return Err(Error::Dimension(format!("matrix has {} entries, expected {n}x{n}", m.len())));
        }
        if m.iter().chain(&q).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("affine operator coefficients".into()));
        }
        let lipschitz = spectral_norm(&m, n);
        Ok(AffineOperator { n, m, q, lipschitz, calls: CallCounter::default() })
    }

    pub fn apply(&self, x: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|i| self.m[i * self.n..(i + 1) * self.n].iter().zip(x).map(|(&a, &b)| a * b).sum::<T>() + self.q[i])
            .collect()
    }
}

impl<T: Scalar> DelayOperator<T> for AffineOperator<T> {
    fn evaluate(&self, h: &PathFlowProfile<T>) -> Result<DelayProfile<T>> {
        self.calls.tick();
        if h.values().len() != self.n {
            return Err(Error::Dimension(format!("profile has {} entries, operator {}", h.values().len(), self.n)));
        }
        PathField::from_values(*h.grid(), h.num_paths(), self.apply(h.values()))
    }

    fn evaluations(&self) -> usize {
        self.calls.get()
    }

    fn lipschitz(&self) -> Option<T> {
        Some(self.lipschitz)
    }
}

/// `||M||_2` by power iteration on `M^T M`.
pub fn spectral_norm<T: Scalar>(m: &[T], n: usize) -> T {
    if n == 0 || m.iter().all(|&x| x == T::zero()) {
        return T::zero();
    }
    let mul = |x: &[T]| -> Vec<T> { (0..n).map(|i| (0..n).map(|j| m[i * n + j] * x[j]).sum()).collect() };
    let mul_t = |x: &[T]| -> Vec<T> { (0..n).map(|j| (0..n).map(|i| m[i * n + j] * x[i]).sum()).collect() };
    let unit = |v: Vec<T>| {
        let s = v.iter().map(|&x| x * x).sum::<T>().sqrt();
        v.into_iter().map(|x| x / s).collect::<Vec<T>>()
    };
    // deterministic start with no symmetry to get stuck on
    let mut x = unit((0..n).map(|i| T::one() + T::lit(0.1) * T::from_usize_lossy(i + 1).sqrt()).collect());
    let mut rayleigh = T::zero();
    for _ in 0..100_000 {
        let y = mul_t(&mul(&x));
        let r: T = x.iter().zip(&y).map(|(&a, &b)| a * b).sum();
        let norm = y.iter().map(|&v| v * v).sum::<T>().sqrt();
        if norm == T::zero() {
            // start vector in the kernel: perturb
            x = unit((0..n).map(|i| T::from_usize_lossy((i * 7 + 3) % 11 + 1)).collect());
            continue;
        }
        x = y.into_iter().map(|v| v / norm).collect();
        let done = (r - rayleigh).abs() <= T::epsilon() * r;
        rayleigh = r;
        if done {
            break;
        }
    }
    rayleigh.max(T::zero()).sqrt()
}

/// `A'(x) = theta(x) A(x)` for a positive scalar field `theta`.
///
/// Positive scaling keeps the solution set of the VI and turns a monotone
/// `A` into a pseudo-monotone, generally non-monotone, operator.
pub struct ScaledOperator<T> {
    base: Box<dyn DelayOperator<T>>,
    theta: Box<dyn Fn(&PathField<T>) -> T + Send + Sync>,
    calls: CallCounter,
}

impl<T: Scalar> ScaledOperator<T> {
    pub fn new(base: Box<dyn DelayOperator<T>>, theta: impl Fn(&PathField<T>) -> T + Send + Sync + 'static) -> Self {
        ScaledOperator { base, theta: Box::new(theta), calls: CallCounter::default() }
    }

    /// `theta(x) = 1 / (1 + ||x||)`.
    pub fn inverse_norm(base: Box<dyn DelayOperator<T>>) -> Self {
        Self::new(base, |x| T::one() / (T::one() + x.norm()))
    }

    pub fn theta(&self, x: &PathField<T>) -> T {
        (self.theta)(x)
    }
}

impl<T: Scalar> DelayOperator<T> for ScaledOperator<T> {
    fn evaluate(&self, h: &PathFlowProfile<T>) -> Result<DelayProfile<T>> {
        self.calls.tick();
        let theta = (self.theta)(h);
        if !(theta > T::zero()) || !theta.is_finite() {
            return Err(Error::Validation(format!("scaling field must be positive, got {theta}")));
        }
        Ok(self.base.evaluate(h)?.scaled(theta))
    }

    fn evaluations(&self) -> usize {
        self.calls.get()
    }
}

/// The most negative `<A(x) - A(y), x - y>` over all pairs of `points`, with
/// the pair's indices. `None` when no pair violates monotonicity.
pub fn monotonicity_witness<T: Scalar>(
    op: &dyn DelayOperator<T>,
    points: &[PathField<T>],
) -> Result<Option<(usize, usize, T)>> {
    let values = points.iter().map(|x| op.evaluate(x)).collect::<Result<Vec<_>>>()?;
    let mut worst: Option<(usize, usize, T)> = None;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let v = values[i].sub(&values[j])?.inner(&points[i].sub(&points[j])?)?;
            if v < T::zero() && worst.map_or(true, |w| v < w.2) {
                worst = Some((i, j, v));
            }
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PseudoMonotoneAudit<T> {
    /// Pairs with `<A(x), y - x> >= 0`, the premise of pseudo-monotonicity.
    pub checked: usize,
    /// Smallest `<A(y), y - x>` over those pairs; non-negative when the
    /// implication holds.
    pub worst: T,
}

/// Samples the implication `<A(x), y - x> >= 0  =>  <A(y), y - x> >= 0`.
pub fn pseudo_monotone_audit<T: Scalar>(
    op: &dyn DelayOperator<T>,
    pairs: &[(PathField<T>, PathField<T>)],
) -> Result<PseudoMonotoneAudit<T>> {
    let mut audit = PseudoMonotoneAudit { checked: 0, worst: T::infinity() };
    for (x, y) in pairs {
        let d = y.sub(x)?;
        if op.evaluate(x)?.inner(&d)? >= T::zero() {
            audit.checked += 1;
            audit.worst = audit.worst.min(op.evaluate(y)?.inner(&d)?);
        }
    }
    Ok(audit)
}

/// A finite-dimensional VI over per-O-D simplices with a certified solution.
///
/// The profile has one interval of length one, so `x` is simply the vector
/// of path values and the feasible set is `{x >= 0, sum_{p in w} x_p = Q_w}`.
pub struct SyntheticVi<T> {
    pub set: FeasibleSet<T>,
    pub operator: Box<dyn DelayOperator<T>>,
    /// Reference solution; for degenerate problems the minimum-norm one.
    pub solution: PathField<T>,
}

impl<T: Scalar> SyntheticVi<T> {
    /// Feasible set with `blocks[w] = (number of paths, Q_w)`.
    pub fn simplex_blocks(blocks: &[(usize, T)]) -> Result<FeasibleSet<T>> {
        let grid = TimeGrid::new(T::zero(), T::one(), 1)?;
        let od_of_path: Vec<usize> = blocks.iter().enumerate().flat_map(|(w, &(n, _))| std::iter::repeat(w).take(n)).collect();
        let partition = OdPartition::new(blocks.len(), od_of_path)?;
        let trips = TripTable::new(blocks.iter().map(|b| b.1).collect(), vec![T::one(); blocks.len()])?;
        FeasibleSet::new(grid, trips, partition)
    }

    pub fn point(set: &FeasibleSet<T>, x: &[T]) -> Result<PathField<T>> {
        PathField::from_values(set.grid, set.num_paths(), x.to_vec())
    }

    /// Problem with a given solution, rejected unless it passes the
    /// residual certificate `||x - P(x - A(x))|| <= 1e-10`.
    pub fn with_solution(set: FeasibleSet<T>, operator: Box<dyn DelayOperator<T>>, solution: PathField<T>) -> Result<Self> {
        certify(&set, operator.as_ref(), &solution)?;
        Ok(SyntheticVi { set, operator, solution })
    }

    /// Problem whose reference solution is computed by the extragradient
    /// method from the uniform point, then certified.
    pub fn with_reference_solution(set: FeasibleSet<T>, operator: Box<dyn DelayOperator<T>>) -> Result<Self> {
        let l = operator.lipschitz().unwrap_or(T::one());
        let tau = if l > T::zero() { T::lit(0.5) / l } else { T::one() };
        let mut x = set.uniform();
        for _ in 0..200_000 {
            let ax = operator.evaluate(&x)?;
            let y = set.project(&x.combine(T::one(), &ax, -tau)?)?;
            let ay = operator.evaluate(&y)?;
            let next = set.project(&x.combine(T::one(), &ay, -tau)?)?;
            let step = next.distance(&x)?;
            x = next;
            if step <= T::lit(1e-15) * (T::one() + x.norm()) {
                break;
            }
        }
        Self::with_solution(set, operator, x)
    }

    /// `A = M x + q` on the given blocks.
    pub fn affine(blocks: &[(usize, T)], m: Vec<T>, q: Vec<T>) -> Result<Self> {
        let set = Self::simplex_blocks(blocks)?;
        Self::with_reference_solution(set, Box::new(AffineOperator::new(m, q)?))
    }

    /// `A = 0`; the reference solution is the minimum-norm point `P_X(0)`.
    pub fn zero(blocks: &[(usize, T)]) -> Result<Self> {
        let set = Self::simplex_blocks(blocks)?;
        let solution = set.project(&PathField::zeros(set.grid, set.num_paths()))?;
        Self::with_solution(set, Box::new(ZeroOperator::default()), solution)
    }

    /// Same problem with the operator scaled by `1 / (1 + ||x||)`.
    pub fn scaled(self) -> Result<Self> {
        let op = ScaledOperator::inverse_norm(self.operator);
        Self::with_solution(self.set, Box::new(op), self.solution)
    }
}

fn certify<T: Scalar>(set: &FeasibleSet<T>, op: &dyn DelayOperator<T>, x: &PathField<T>) -> Result<()> {
    let r = set.residual(x, T::one(), &op.evaluate(x)?)?;
    let tol = T::lit(1e-10).max(T::epsilon() * T::lit(1e3));
    if r > tol || set.infeasibility(x) > tol {
        return Err(Error::Validation(format!("reference solution fails the residual certificate: residual {r}")));
    }
    Ok(())
}
