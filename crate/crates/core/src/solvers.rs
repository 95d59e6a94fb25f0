//! Projected gradient (FB), Halpern-relaxed forward-backward-forward (FBF)
//! and inertial FBF (IFBF) for `<A(h*), h - h*> >= 0, h in X`.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::hilbert::{FeasibleSet, PathField, PathFlowProfile};
use crate::metrics::{relative_energy, ConvergenceLog, IterationRow};
use crate::operators::DelayOperator;
use crate::scalar::Scalar;
use crate::schedule::Schedule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Fb,
    Fbf,
    Ifbf,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Fb => "fb",
            Algorithm::Fbf => "fbf",
            Algorithm::Ifbf => "ifbf",
        }
    }

    /// Operator evaluations per iteration.
    pub fn calls_per_iteration(self) -> usize {
        match self {
            Algorithm::Fb => 1,
            Algorithm::Fbf | Algorithm::Ifbf => 2,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fb" => Ok(Algorithm::Fb),
            "fbf" => Ok(Algorithm::Fbf),
            "ifbf" => Ok(Algorithm::Ifbf),
            _ => Err(Error::Config(format!("unknown algorithm `{s}` (expected fb, fbf or ifbf)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig<T> {
    pub algorithm: Algorithm,
    /// Initial step `tau_0`; the fixed step for FB.
    pub tau0: T,
    /// Step-size safety factor `mu` (FBF, IFBF).
    pub mu: T,
    /// Relaxation `lambda` (IFBF).
    pub lambda: T,
    /// Inertia cap `alpha` (IFBF).
    pub inertia: T,
    /// Halpern weights `alpha_n` (FBF).
    pub alpha: Option<Schedule>,
    /// `beta_n` (FBF, IFBF).
    pub beta: Option<Schedule>,
    /// Inertia budget `eps_n` (IFBF).
    pub eps: Option<Schedule>,
    pub max_iterations: usize,
    /// Stop once the residual drops to this value; zero disables.
    pub tolerance: T,
    /// Reserved for randomized variants; no current algorithm draws from it.
    pub seed: u64,
}

impl<T: Scalar> SolverConfig<T> {
    pub fn fb(tau: T, max_iterations: usize) -> Self {
        SolverConfig {
            algorithm: Algorithm::Fb,
            tau0: tau,
            mu: T::lit(0.5),
            lambda: T::lit(0.5),
            inertia: T::zero(),
            alpha: None,
            beta: None,
            eps: None,
            max_iterations,
            tolerance: T::zero(),
            seed: 0,
        }
    }

    pub fn fbf(tau0: T, mu: T, alpha: Schedule, beta: Schedule, max_iterations: usize) -> Self {
        SolverConfig { algorithm: Algorithm::Fbf, mu, alpha: Some(alpha), beta: Some(beta), ..Self::fb(tau0, max_iterations) }
    }

    pub fn ifbf(tau0: T, mu: T, lambda: T, inertia: T, beta: Schedule, eps: Schedule, max_iterations: usize) -> Self {
        SolverConfig {
            algorithm: Algorithm::Ifbf,
            mu,
            lambda,
            inertia,
            beta: Some(beta),
            eps: Some(eps),
            ..Self::fb(tau0, max_iterations)
        }
    }

    pub fn with_tolerance(mut self, tolerance: T) -> Self {
        self.tolerance = tolerance;
        self
    }

    fn schedule(&self, s: Option<Schedule>, name: &str) -> Result<Schedule> {
        s.ok_or_else(|| Error::Config(format!("{} needs a `{name}` schedule", self.algorithm)))
    }

    /// Checks parameter ranges over the iterations that will run (errors)
    /// and the asymptotic conditions of the convergence theory (warnings).
    pub fn validate(&self) -> Result<Vec<String>> {
        let open_unit = |x: T| x > T::zero() && x < T::one();
        if !(self.tau0 > T::zero()) || !self.tau0.is_finite() {
            return Err(Error::Config(format!("step size must be positive, got {}", self.tau0)));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be at least 1".into()));
        }
        if !(self.tolerance >= T::zero()) {
            return Err(Error::Config(format!("tolerance must be non-negative, got {}", self.tolerance)));
        }
        let mut warnings = Vec::new();
        match self.algorithm {
            Algorithm::Fb => {}
            Algorithm::Fbf => {
                if !open_unit(self.mu) {
                    return Err(Error::Config(format!("mu must lie in (0, 1), got {}", self.mu)));
                }
                let alpha = self.schedule(self.alpha, "alpha")?;
                let beta = self.schedule(self.beta, "beta")?;
                for n in 0..self.max_iterations {
                    let (a, b) = (alpha.eval_f64(n), beta.eval_f64(n));
                    if !(a > 0.0 && a < 1.0) || !(b > 0.0 && b < 1.0) || a + b >= 1.0 {
                        return Err(Error::Config(format!(
                            "FBF schedules need alpha_n, beta_n in (0, 1) with alpha_n + beta_n < 1; at n = {n}: alpha = {alpha} -> {a}, beta = {beta} -> {b}"
                        )));
                    }
                }
                let (a, b) = (alpha.asymptotics(), beta.asymptotics());
                if !a.vanishes() || !a.sum_diverges() {
                    warnings.push(format!("alpha = {alpha} should tend to 0 with a divergent sum"));
                }
                if !(b.limit > 0.0) || a.limit + b.limit >= 1.0 {
                    warnings.push(format!("beta = {beta} should stay inside (b, 1 - alpha_n) for some b > 0"));
                }
            }
            Algorithm::Ifbf => {
                for (name, x) in [("mu", self.mu), ("lambda", self.lambda), ("inertia cap alpha", self.inertia)] {
                    if !open_unit(x) {
                        return Err(Error::Config(format!("{name} must lie in (0, 1), got {x}")));
                    }
                }
                let beta = self.schedule(self.beta, "beta")?;
                let eps = self.schedule(self.eps, "eps")?;
                for n in 0..=self.max_iterations {
                    let (b, e) = (beta.eval_f64(n), eps.eval_f64(n));
                    if !(b > 0.0 && b < 1.0) || !(e >= 0.0) || !e.is_finite() {
                        return Err(Error::Config(format!(
                            "IFBF schedules need beta_n in (0, 1) and eps_n >= 0; at n = {n}: beta = {beta} -> {b}, eps = {eps} -> {e}"
                        )));
                    }
                }
                let (b, e) = (beta.asymptotics(), eps.asymptotics());
                if !b.vanishes() {
                    warnings.push(format!("beta = {beta} should tend to 0"));
                }
                if !b.sum_diverges() {
                    warnings.push(format!("beta = {beta} has a finite sum; strong convergence is not guaranteed"));
                }
                if !e.negligible_against(&b) {
                    warnings.push(format!("eps = {eps} should be o(beta_n)"));
                }
            }
        }
        Ok(warnings)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    MaxIterations,
    Tolerance,
}

impl StopReason {
    pub fn name(self) -> &'static str {
        match self {
            StopReason::MaxIterations => "max_iterations",
            StopReason::Tolerance => "tolerance",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveOutcome<T> {
    /// `P_X(h_N)`, the reported profile.
    pub solution: PathFlowProfile<T>,
    /// Raw last iterate `h_N`; FBF and IFBF iterates may leave `X`.
    pub last_iterate: PathFlowProfile<T>,
    pub log: ConvergenceLog<T>,
    pub iterations: usize,
    pub stop: StopReason,
    /// Operator evaluations during this run.
    pub evaluations: usize,
    pub warnings: Vec<String>,
    pub elapsed: Duration,
}

/// Adaptive step `tau_{n+1} = min(tau_n, mu ||y - x|| / ||A(y) - A(x)||)`.
///
/// The ratio is skipped when `A(y)` and `A(x)` agree to `1e-14 ||A(x)||`.
pub fn next_step<T: Scalar>(tau: T, mu: T, dist: T, op_diff: T, op_norm: T) -> T {
    if op_diff > T::lit(1e-14) * op_norm && op_diff > T::zero() {
        tau.min(mu * dist / op_diff)
    } else {
        tau
    }
}

struct Run<'a, T: Scalar> {
    op: &'a dyn DelayOperator<T>,
    calls_before: usize,
    iteration: usize,
}

impl<'a, T: Scalar> Run<'a, T> {
    fn new(op: &'a dyn DelayOperator<T>) -> Self {
        Run { op, calls_before: op.evaluations(), iteration: 0 }
    }

    fn eval(&self, h: &PathField<T>) -> Result<PathField<T>> {
        let a = self.op.evaluate(h).map_err(|e| Error::Operator { iteration: self.iteration, source: Box::new(e) })?;
        if !a.is_finite() {
            return Err(Error::Operator {
                iteration: self.iteration,
                source: Box::new(Error::NonFinite("operator value".into())),
            });
        }
        Ok(a)
    }

    fn calls(&self) -> usize {
        self.op.evaluations() - self.calls_before
    }
}

fn check_start<T: Scalar>(set: &FeasibleSet<T>, h0: &PathField<T>) -> Result<()> {
    if h0.num_paths() != set.num_paths() || h0.grid() != &set.grid {
        return Err(Error::Dimension(format!(
            "initial profile has {} paths x {} intervals, problem {} x {}",
            h0.num_paths(),
            h0.num_intervals(),
            set.num_paths(),
            set.grid.num_intervals()
        )));
    }
    if !h0.is_finite() {
        return Err(Error::NonFinite("initial profile".into()));
    }
    Ok(())
}

fn finish<T: Scalar>(
    set: &FeasibleSet<T>,
    h: PathField<T>,
    log: ConvergenceLog<T>,
    stop: StopReason,
    evaluations: usize,
    warnings: Vec<String>,
    started: Instant,
) -> Result<SolveOutcome<T>> {
    Ok(SolveOutcome {
        solution: set.project(&h)?,
        last_iterate: h,
        iterations: log.rows.len(),
        log,
        stop,
        evaluations,
        warnings,
        elapsed: started.elapsed(),
    })
}

fn should_stop<T: Scalar>(cfg: &SolverConfig<T>, residual: T) -> bool {
    cfg.tolerance > T::zero() && residual <= cfg.tolerance
}

/// `h_{n+1} = P_X(h_n - tau A(h_n))` with fixed `tau`.
pub fn run_fb<T: Scalar>(
    op: &dyn DelayOperator<T>,
    set: &FeasibleSet<T>,
    cfg: &SolverConfig<T>,
    h0: &PathFlowProfile<T>,
) -> Result<SolveOutcome<T>> {
    let started = Instant::now();
    let warnings = cfg.validate()?;
    check_start(set, h0)?;
    let mut run = Run::new(op);
    let mut log = ConvergenceLog::new(Algorithm::Fb);
    let tau = cfg.tau0;
    let mut h = h0.clone();
    let mut stop = StopReason::MaxIterations;
    for n in 0..cfg.max_iterations {
        run.iteration = n;
        let ah = run.eval(&h)?;
        let next = set.project(&h.combine(T::one(), &ah, -tau)?)?;
        let residual = h.distance(&next)?;
        log.rows.push(IterationRow {
            n,
            tau,
            alpha: None,
            beta: None,
            residual,
            relative_energy: relative_energy(&next, &h)?,
            calls: run.calls(),
            inertia: None,
        });
        h = next;
        if should_stop(cfg, residual) {
            stop = StopReason::Tolerance;
            break;
        }
    }
    finish(set, h, log, stop, run.calls(), warnings, started)
}

/// Forward-backward-forward with Halpern relaxation towards the origin:
///
/// ```text
/// y_n     = P_X(h_n - tau_n A(h_n))
/// z_{n+1} = y_n + tau_n (A(h_n) - A(y_n))
/// h_{n+1} = (1 - alpha_n - beta_n) h_n + beta_n z_{n+1}
/// ```
pub fn run_fbf<T: Scalar>(
    op: &dyn DelayOperator<T>,
    set: &FeasibleSet<T>,
    cfg: &SolverConfig<T>,
    h0: &PathFlowProfile<T>,
) -> Result<SolveOutcome<T>> {
    let started = Instant::now();
    let warnings = cfg.validate()?;
    check_start(set, h0)?;
    let alpha = cfg.schedule(cfg.alpha, "alpha")?;
    let beta = cfg.schedule(cfg.beta, "beta")?;
    let mut run = Run::new(op);
    let mut log = ConvergenceLog::new(Algorithm::Fbf);
    let mut tau = cfg.tau0;
    let mut h = h0.clone();
    let mut stop = StopReason::MaxIterations;
    for n in 0..cfg.max_iterations {
        run.iteration = n;
        let (a_n, b_n): (T, T) = (alpha.eval(n), beta.eval(n));
        let ah = run.eval(&h)?;
        let y = set.project(&h.combine(T::one(), &ah, -tau)?)?;
        let ay = run.eval(&y)?;
        let z = y.add(&ah.sub(&ay)?.scaled(tau))?;
        let next = h.combine(T::one() - a_n - b_n, &z, b_n)?;
        let residual = h.distance(&y)?;
        log.rows.push(IterationRow {
            n,
            tau,
            alpha: Some(a_n),
            beta: Some(b_n),
            residual,
            relative_energy: relative_energy(&next, &h)?,
            calls: run.calls(),
            inertia: None,
        });
        tau = next_step(tau, cfg.mu, residual, ay.distance(&ah)?, ah.norm());
        h = next;
        if !h.is_finite() {
            return Err(Error::Operator { iteration: n, source: Box::new(Error::NonFinite("iterate".into())) });
        }
        if should_stop(cfg, residual) {
            stop = StopReason::Tolerance;
            break;
        }
    }
    finish(set, h, log, stop, run.calls(), warnings, started)
}

/// Inertial FBF with adaptive steps:
///
/// ```text
/// w_n     = (1 - beta_n) [h_n + alpha_n (h_n - h_{n-1})]
/// y_n     = P_X(w_n - tau_n A(w_n))
/// h_{n+1} = (1 - lambda) w_n + lambda (y_n + tau_n (A(w_n) - A(y_n)))
/// ```
///
/// with `alpha_{n+1} = min(alpha, eps_{n+1} / ||h_{n+1} - h_n||)`.
/// `h_minus1` defaults to `h0`.
pub fn run_ifbf<T: Scalar>(
    op: &dyn DelayOperator<T>,
    set: &FeasibleSet<T>,
    cfg: &SolverConfig<T>,
    h0: &PathFlowProfile<T>,
    h_minus1: Option<&PathFlowProfile<T>>,
) -> Result<SolveOutcome<T>> {
    let started = Instant::now();
    let warnings = cfg.validate()?;
    check_start(set, h0)?;
    let beta = cfg.schedule(cfg.beta, "beta")?;
    let eps = cfg.schedule(cfg.eps, "eps")?;
    let mut run = Run::new(op);
    let mut log = ConvergenceLog::new(Algorithm::Ifbf);
    let mut tau = cfg.tau0;
    let mut h = h0.clone();
    let mut h_prev = match h_minus1 {
        Some(p) => {
            check_start(set, p)?;
            p.clone()
        }
        None => h0.clone(),
    };
    let inertia_for = |n: usize, gap: T| -> T {
        if gap > T::zero() {
            cfg.inertia.min(eps.eval::<T>(n) / gap)
        } else {
            cfg.inertia
        }
    };
    let mut alpha_n = inertia_for(0, h.distance(&h_prev)?);
    let mut stop = StopReason::MaxIterations;
    for n in 0..cfg.max_iterations {
        run.iteration = n;
        let b_n: T = beta.eval(n);
        let momentum = h.sub(&h_prev)?;
        let w = h.combine(T::one(), &momentum, alpha_n)?.scaled(T::one() - b_n);
        let aw = run.eval(&w)?;
        let y = set.project(&w.combine(T::one(), &aw, -tau)?)?;
        let ay = run.eval(&y)?;
        let z = y.add(&aw.sub(&ay)?.scaled(tau))?;
        let next = w.combine(T::one() - cfg.lambda, &z, cfg.lambda)?;
        let residual = w.distance(&y)?;
        log.rows.push(IterationRow {
            n,
            tau,
            alpha: Some(alpha_n),
            beta: Some(b_n),
            residual,
            relative_energy: relative_energy(&next, &h)?,
            calls: run.calls(),
            inertia: Some(alpha_n * momentum.norm()),
        });
        tau = next_step(tau, cfg.mu, residual, ay.distance(&aw)?, aw.norm());
        alpha_n = inertia_for(n + 1, next.distance(&h)?);
        h_prev = std::mem::replace(&mut h, next);
        if !h.is_finite() {
            return Err(Error::Operator { iteration: n, source: Box::new(Error::NonFinite("iterate".into())) });
        }
        if should_stop(cfg, residual) {
            stop = StopReason::Tolerance;
            break;
        }
    }
    finish(set, h, log, stop, run.calls(), warnings, started)
}

/// Dispatches on `cfg.algorithm`.
pub fn solve<T: Scalar>(
    op: &dyn DelayOperator<T>,
    set: &FeasibleSet<T>,
    cfg: &SolverConfig<T>,
    h0: &PathFlowProfile<T>,
) -> Result<SolveOutcome<T>> {
    match cfg.algorithm {
        Algorithm::Fb => run_fb(op, set, cfg, h0),
        Algorithm::Fbf => run_fbf(op, set, cfg, h0),
        Algorithm::Ifbf => run_ifbf(op, set, cfg, h0, None),
    }
}
