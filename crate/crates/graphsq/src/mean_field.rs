//! Mean-field limit objects: the truncated occupancy ODE system, its
//! explicit fixed point, the limiting per-queue arrival intensity, and the
//! tagged-queue (McKean-Vlasov) path sampler.
//!
//! The occupancy vector `q` collects tail fractions: `q_j` is the fraction
//! of servers with at least `j` tasks, so `q_0 = 1` and `q` is
//! non-increasing. In the large-system limit the occupancy evolves by
//!
//! ```text
//! dq_j/dt = lambda * (q_{j-1}^d - q_j^d) - (q_j - q_{j+1}),   j >= 1,
//! ```
//!
//! truncated at level `B` with the closing rule `q_{B+1} = 0`. For
//! `lambda < 1` the flow has the fixed point
//! `q*_j = lambda^((d^j - 1)/(d - 1))`, whose doubly exponential decay makes
//! modest truncation levels essentially exact.

use rand::Rng;
use thiserror::Error;

use crate::rng::exp_variate;

#[derive(Debug, Error)]
pub enum MeanFieldError {
    #[error("invalid occupancy vector: {0}")]
    InvalidOccupancy(String),
    #[error("fixed point requires 0 <= lambda < 1, got {0}")]
    LambdaOutOfRange(f64),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("queue level {x} beyond truncation {b}")]
    OutOfTruncation { x: u32, b: usize },
    #[error("monotonicity violated at t = {t}, level {j}: {qj} -> {qj1} (step too large or truncation too small)")]
    MonotonicityViolation { t: f64, j: usize, qj: f64, qj1: f64 },
    #[error("solution covers [0, {covered}], requested {requested}")]
    HorizonNotCovered { covered: f64, requested: f64 },
}

/// Monotonicity slack allowed in ODE states; larger violations abort.
pub const MONOTONICITY_TOL: f64 = 1e-9;

/// Truncated tail vector `(q_0, ..., q_B)` with `q_0 = 1`, non-increasing
/// entries in `[0, 1]`, and `q_j = 0` implied for `j > B`.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyVector {
    q: Vec<f64>,
}

impl OccupancyVector {
    /// Validate and wrap a tail vector. The first entry must be exactly 1.
    pub fn new(q: Vec<f64>) -> Result<Self, MeanFieldError> {
        Self::with_tolerance(q, 0.0)
    }

    /// Validate with slack `tol` on monotonicity and range, for vectors
    /// produced by numerical integration.
    pub fn with_tolerance(q: Vec<f64>, tol: f64) -> Result<Self, MeanFieldError> {
        if q.is_empty() {
            return Err(MeanFieldError::InvalidOccupancy("empty vector".into()));
        }
        if q[0] != 1.0 {
            return Err(MeanFieldError::InvalidOccupancy(format!(
                "q_0 = {}, must be 1",
                q[0]
            )));
        }
        for j in 0..q.len() {
            if !q[j].is_finite() || q[j] < -tol || q[j] > 1.0 + tol {
                return Err(MeanFieldError::InvalidOccupancy(format!(
                    "q_{j} = {} out of [0, 1]",
                    q[j]
                )));
            }
            if j + 1 < q.len() && q[j + 1] > q[j] + tol {
                return Err(MeanFieldError::InvalidOccupancy(format!(
                    "q_{} = {} > q_{j} = {}",
                    j + 1,
                    q[j + 1],
                    q[j]
                )));
            }
        }
        Ok(OccupancyVector { q })
    }

    /// All mass at queue length zero: `(1, 0, ..., 0)`.
    pub fn empty_system(b: usize) -> Self {
        let mut q = vec![0.0; b + 1];
        q[0] = 1.0;
        OccupancyVector { q }
    }

    /// Truncation level `B`.
    pub fn truncation(&self) -> usize {
        self.q.len() - 1
    }

    /// Tail value `q_j`, zero beyond the truncation.
    pub fn tail(&self, j: usize) -> f64 {
        self.q.get(j).copied().unwrap_or(0.0)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.q
    }

    /// `sum_{j>=1} q_j`, the mean queue length of the tail distribution.
    pub fn total_mass(&self) -> f64 {
        self.q[1..].iter().sum()
    }

    /// Re-truncate to level `b`. Extending pads with zeros; shrinking is an
    /// error if it would drop nonzero mass.
    pub fn resize(&self, b: usize) -> Result<Self, MeanFieldError> {
        let mut q = self.q.clone();
        if b + 1 < q.len() && q[b + 1..].iter().any(|&v| v != 0.0) {
            return Err(MeanFieldError::InvalidOccupancy(format!(
                "cannot truncate to B = {b}: nonzero mass beyond"
            )));
        }
        q.resize(b + 1, 0.0);
        Ok(OccupancyVector { q })
    }
}

/// `sum_{j>=1} |a_j - b_j|` over the union of supports (missing entries are
/// zero). Level 0 is excluded since both sides are 1 there.
pub fn l1_distance(a: &OccupancyVector, b: &OccupancyVector) -> f64 {
    let len = a.q.len().max(b.q.len());
    (1..len).map(|j| (a.tail(j) - b.tail(j)).abs()).sum()
}

/// Right-hand side of the truncated occupancy ODE, components `1..=B`.
/// Component `j` is `lambda (q_{j-1}^d - q_j^d) - (q_j - q_{j+1})`, with
/// `q_{B+1} = 0`.
pub fn ode_rhs(q: &OccupancyVector, lambda: f64, d: usize) -> Vec<f64> {
    let b = q.truncation();
    let mut out = Vec::with_capacity(b);
    for j in 1..=b {
        let qjm = q.tail(j - 1);
        let qj = q.tail(j);
        let qj1 = q.tail(j + 1);
        out.push(lambda * (qjm.powi(d as i32) - qj.powi(d as i32)) - (qj - qj1));
    }
    out
}

/// Fixed-step solution of the occupancy ODE.
#[derive(Debug, Clone)]
pub struct OdeSolution {
    pub times: Vec<f64>,
    states: Vec<OccupancyVector>,
    pub lambda: f64,
    pub d: usize,
    pub b: usize,
    /// The step actually used (input `h` rounded so the grid lands on `T`).
    pub h: f64,
    /// Max over the run of the last tail component; truncation-health
    /// indicator (should be near zero for a trustworthy run).
    pub tail_mass_max: f64,
}

impl OdeSolution {
    pub fn states(&self) -> &[OccupancyVector] {
        &self.states
    }

    pub fn final_state(&self) -> &OccupancyVector {
        self.states.last().unwrap()
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// State at the largest grid time `<= t` (piecewise-constant,
    /// left-endpoint lookup).
    pub fn state_at(&self, t: f64) -> &OccupancyVector {
        let idx = if t <= 0.0 {
            0
        } else {
            ((t / self.h).floor() as usize).min(self.states.len() - 1)
        };
        &self.states[idx]
    }
}

/// Integrate the occupancy ODE from `q0` over `[0, t_end]` with classical
/// fourth-order Runge-Kutta at fixed step (the requested `h` is shrunk
/// minimally so that an integer number of steps lands exactly on `t_end`).
///
/// Every recorded state is checked against the occupancy invariants with
/// slack [`MONOTONICITY_TOL`]; a violation aborts the run rather than being
/// clipped away, since it signals a step too large or a truncation too
/// small.
pub fn integrate(
    q0: &OccupancyVector,
    lambda: f64,
    d: usize,
    t_end: f64,
    h: f64,
    b: usize,
) -> Result<OdeSolution, MeanFieldError> {
    if !(h > 0.0) || !(t_end >= 0.0) || d < 2 || b < 2 || lambda < 0.0 {
        return Err(MeanFieldError::InvalidParams(format!(
            "h = {h}, t_end = {t_end}, d = {d}, B = {b}, lambda = {lambda}"
        )));
    }
    let q0 = q0.resize(b)?;
    let n_steps = if t_end == 0.0 {
        0
    } else {
        (t_end / h).ceil() as usize
    };
    let h_eff = if n_steps == 0 {
        h
    } else {
        t_end / n_steps as f64
    };

    let mut times = Vec::with_capacity(n_steps + 1);
    let mut states = Vec::with_capacity(n_steps + 1);
    let mut tail_mass_max = q0.tail(b);
    times.push(0.0);
    states.push(q0.clone());

    let mut q = q0;
    let mut scratch = vec![0.0f64; b + 1];
    for step in 1..=n_steps {
        let k1 = ode_rhs(&q, lambda, d);
        let k2 = ode_rhs(&shifted(&q, &k1, h_eff / 2.0, &mut scratch), lambda, d);
        let k3 = ode_rhs(&shifted(&q, &k2, h_eff / 2.0, &mut scratch), lambda, d);
        let k4 = ode_rhs(&shifted(&q, &k3, h_eff, &mut scratch), lambda, d);
        let mut next = q.q.clone();
        for j in 1..=b {
            next[j] += h_eff / 6.0 * (k1[j - 1] + 2.0 * k2[j - 1] + 2.0 * k3[j - 1] + k4[j - 1]);
        }
        let t = step as f64 * h_eff;
        check_state(&next, t)?;
        let state = OccupancyVector { q: next };
        tail_mass_max = tail_mass_max.max(state.tail(b));
        times.push(t);
        states.push(state.clone());
        q = state;
    }
    Ok(OdeSolution {
        times,
        states,
        lambda,
        d,
        b,
        h: h_eff,
        tail_mass_max,
    })
}

fn shifted(q: &OccupancyVector, k: &[f64], factor: f64, scratch: &mut [f64]) -> OccupancyVector {
    scratch[0] = 1.0;
    for j in 1..q.q.len() {
        scratch[j] = q.q[j] + factor * k[j - 1];
    }
    // Intermediate RK stages may leave the constraint set slightly; only
    // recorded states are validated.
    OccupancyVector {
        q: scratch.to_vec(),
    }
}

fn check_state(q: &[f64], t: f64) -> Result<(), MeanFieldError> {
    for j in 0..q.len() {
        let next = q.get(j + 1).copied().unwrap_or(0.0);
        if !q[j].is_finite()
            || q[j] < -MONOTONICITY_TOL
            || q[j] > 1.0 + MONOTONICITY_TOL
            || next > q[j] + MONOTONICITY_TOL
        {
            return Err(MeanFieldError::MonotonicityViolation {
                t,
                j,
                qj: q[j],
                qj1: next,
            });
        }
    }
    Ok(())
}

/// The explicit fixed point `q*_j = lambda^((d^j - 1)/(d - 1))`, truncated
/// at `B`. Requires `0 <= lambda < 1` (otherwise the tail is not summable).
pub fn fixed_point(lambda: f64, d: usize, b: usize) -> Result<OccupancyVector, MeanFieldError> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(MeanFieldError::LambdaOutOfRange(lambda));
    }
    if d < 2 {
        return Err(MeanFieldError::InvalidParams(format!("d = {d}")));
    }
    let mut q = Vec::with_capacity(b + 1);
    q.push(1.0);
    for j in 1..=b {
        // exponent (d^j - 1)/(d - 1); saturates harmlessly once lambda^e
        // underflows to zero
        let e = ((d as f64).powi(j as i32) - 1.0) / (d as f64 - 1.0);
        q.push(if lambda == 0.0 { 0.0 } else { lambda.powf(e) });
    }
    OccupancyVector::new(q)
}

/// Smallest truncation level at which the fixed-point tail drops below
/// `1e-14`, floored at 20. A practical default for `B`.
pub fn default_truncation(lambda: f64, d: usize) -> usize {
    let mut b = 1usize;
    if lambda > 0.0 {
        let mut q = lambda;
        while q >= 1e-14 && b < 400 {
            q = lambda * q.powi(d as i32);
            b += 1;
        }
    }
    b.max(20)
}

/// Limiting arrival intensity of a queue at length `x` under occupancy `q`:
/// `(q_x^d - q_{x+1}^d) / (q_x - q_{x+1})`, continuously extended by its
/// limit `d * q_x^(d-1)` when the gap is below `1e-12`. Always in `[0, d]`.
///
/// `x` may equal the truncation level `B` (the closing rule `q_{B+1} = 0`
/// applies); anything beyond is an error.
pub fn arrival_intensity_limit(
    x: u32,
    q: &OccupancyVector,
    d: usize,
) -> Result<f64, MeanFieldError> {
    let b = q.truncation();
    if x as usize > b {
        return Err(MeanFieldError::OutOfTruncation { x, b });
    }
    let qx = q.tail(x as usize);
    let qx1 = q.tail(x as usize + 1);
    let gap = qx - qx1;
    let v = if gap < 1e-12 {
        d as f64 * qx.powi(d as i32 - 1)
    } else {
        (qx.powi(d as i32) - qx1.powi(d as i32)) / gap
    };
    Ok(v)
}

/// Draw a queue length from a tail law by inversion:
/// `X = max{ j : U < q_j }` for `U` uniform on `[0, 1)`.
pub fn sample_tail<R: Rng>(law: &OccupancyVector, rng: &mut R) -> u32 {
    let u: f64 = rng.gen();
    let mut x = 0u32;
    for j in 1..=law.truncation() {
        if u < law.tail(j) {
            x = j as u32;
        } else {
            break;
        }
    }
    x
}

/// Sample one path of the limiting tagged queue over `[0, t_end]`: a
/// time-inhomogeneous birth-death process with death rate `1{x > 0}` and
/// birth rate `lambda * arrival_intensity_limit(x, q(t), d)`, where `q(t)`
/// is looked up piecewise-constantly on the solution grid.
///
/// Simulated by thinning with dominating rate `lambda * d + 1`. Randomness
/// is consumed in a fixed order: the initial draw from `x0_law`, then per
/// candidate one exponential gap and one uniform mark. Returns the
/// piecewise-constant path as `(event time, new length)` pairs, starting
/// with `(0, x0)`.
pub fn simulate_mkv_path<R: Rng>(
    sol: &OdeSolution,
    lambda: f64,
    d: usize,
    t_end: f64,
    x0_law: &OccupancyVector,
    rng: &mut R,
) -> Result<Vec<(f64, u32)>, MeanFieldError> {
    if sol.horizon() < t_end - 1e-12 {
        return Err(MeanFieldError::HorizonNotCovered {
            covered: sol.horizon(),
            requested: t_end,
        });
    }
    let mut x = sample_tail(x0_law, rng);
    let mut path = vec![(0.0, x)];
    let dominating = lambda * d as f64 + 1.0;
    let mut t = 0.0;
    loop {
        t += exp_variate(rng, dominating);
        if t > t_end {
            break;
        }
        let u: f64 = rng.gen::<f64>() * dominating;
        if u < 1.0 {
            // death component
            if x > 0 {
                x -= 1;
                path.push((t, x));
            }
        } else {
            // birth component; levels above the truncation have zero birth
            // rate (implicit zero tails)
            let q = sol.state_at(t);
            let birth = if x as usize > q.truncation() {
                0.0
            } else {
                lambda * arrival_intensity_limit(x, q, d)?
            };
            if u - 1.0 < birth {
                x += 1;
                path.push((t, x));
            }
        }
    }
    Ok(path)
}

/// Value of a piecewise-constant path at time `t`.
pub fn path_value_at(path: &[(f64, u32)], t: f64) -> u32 {
    let mut v = path[0].1;
    for &(s, x) in path {
        if s <= t {
            v = x;
        } else {
            break;
        }
    }
    v
}
