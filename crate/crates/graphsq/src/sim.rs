//! Event-driven simulation of the N-server JSQ(d) system.
//!
//! Statistically exact continuous-time sampling via aggregate rates: the
//! total departure rate equals the number of busy servers (unit-mean
//! exponential services), the total arrival rate is `n * lambda`, the next
//! event time is exponential at the total rate, and the event type, origin
//! and routing are drawn in a fixed documented order. Equivalent in law to
//! per-server Poisson clocks by Poisson splitting, with O(1) dispatch.

use thiserror::Error;

use rand::Rng;

use crate::graph::{Graph, Vertex};
use crate::mean_field::{sample_tail, OccupancyVector};
use crate::rng::{exp_variate, substream, StreamPurpose};
use crate::routing::{route_arrival, FallbackPolicy};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("event budget of {0} exceeded")]
    EventBudgetExceeded(u64),
}

/// Default safety cap on events per run.
pub const DEFAULT_EVENT_BUDGET: u64 = 100_000_000;

/// Queue lengths of all servers at a time point.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemState {
    pub time: f64,
    pub queues: Vec<u32>,
}

/// Parameters of one simulation run.
#[derive(Debug, Clone)]
pub struct SimConfig {
    /// Arrival rate per server.
    pub lambda: f64,
    /// Number of queues compared per arrival, `>= 2`.
    pub d: usize,
    /// Simulated horizon.
    pub horizon: f64,
    /// Occupancy recording grid step.
    pub sample_dt: f64,
    pub seed: u64,
    pub fallback: FallbackPolicy,
    /// Tail law of the iid initial queue lengths.
    pub q_init: OccupancyVector,
    /// Servers whose full paths are recorded.
    pub tagged: Vec<Vertex>,
    /// Occupancy truncation level for recording.
    pub jmax: usize,
    pub event_budget: u64,
}

impl SimConfig {
    pub fn new(
        lambda: f64,
        d: usize,
        horizon: f64,
        sample_dt: f64,
        seed: u64,
        q_init: OccupancyVector,
    ) -> Self {
        SimConfig {
            lambda,
            d,
            horizon,
            sample_dt,
            seed,
            fallback: FallbackPolicy::SelfOnly,
            q_init,
            tagged: Vec::new(),
            jmax: 20,
            event_budget: DEFAULT_EVENT_BUDGET,
        }
    }

    pub(crate) fn validate(&self, n: usize) -> Result<(), SimError> {
        if self.lambda < 0.0 || !self.lambda.is_finite() {
            return Err(SimError::InvalidConfig(format!("lambda = {}", self.lambda)));
        }
        if self.d < 2 {
            return Err(SimError::InvalidConfig(format!("d = {}", self.d)));
        }
        if !(self.horizon >= 0.0) || !(self.sample_dt > 0.0) {
            return Err(SimError::InvalidConfig(format!(
                "horizon = {}, sample_dt = {}",
                self.horizon, self.sample_dt
            )));
        }
        if self.jmax < 1 {
            return Err(SimError::InvalidConfig("jmax < 1".into()));
        }
        if let Some(&v) = self.tagged.iter().find(|&&v| v as usize >= n) {
            return Err(SimError::InvalidConfig(format!(
                "tagged vertex {v} out of range (n = {n})"
            )));
        }
        Ok(())
    }
}

/// Recorded path of one tagged server: `(event time, new length)` pairs,
/// starting with the initial state at time 0.
#[derive(Debug, Clone, PartialEq)]
pub struct TaggedPath {
    pub server: Vertex,
    pub points: Vec<(f64, u32)>,
}

/// Output of one run: occupancy on the sample grid plus tagged paths.
///
/// The value recorded at a grid time is the state immediately after the last
/// event at or before that time.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub grid_times: Vec<f64>,
    pub occupancy_series: Vec<OccupancyVector>,
    pub tagged_paths: Vec<TaggedPath>,
    pub event_count: u64,
}

/// Draw iid initial queue lengths from a tail law by inversion.
pub fn sample_initial<R: Rng>(n: usize, q_init: &OccupancyVector, rng: &mut R) -> SystemState {
    let queues = (0..n).map(|_| sample_tail(q_init, rng)).collect();
    SystemState { time: 0.0, queues }
}

/// Tail occupancy vector of a state: `q_j` = fraction of servers with at
/// least `j` tasks, `j = 0..=jmax`.
pub fn occupancy(state: &SystemState, jmax: usize) -> OccupancyVector {
    occupancy_of_queues(&state.queues, jmax)
}

pub(crate) fn occupancy_of_queues(queues: &[u32], jmax: usize) -> OccupancyVector {
    let n = queues.len();
    let mut counts = vec![0u64; jmax + 1];
    for &x in queues {
        counts[(x as usize).min(jmax)] += 1;
    }
    // suffix sums turn the histogram into tail counts
    let mut q = vec![0.0f64; jmax + 1];
    let mut acc = 0u64;
    for j in (0..=jmax).rev() {
        acc += counts[j];
        q[j] = acc as f64 / n as f64;
    }
    q[0] = 1.0;
    OccupancyVector::with_tolerance(q, 0.0).expect("tail counts are monotone by construction")
}

/// Tail vector of the occupancy measure of the closed neighborhood of `i`:
/// the empirical distribution over `{i} ∪ neighbors(i)`.
pub fn neighborhood_occupancy(
    g: &Graph,
    state: &SystemState,
    i: Vertex,
    jmax: usize,
) -> OccupancyVector {
    let mut members: Vec<u32> = Vec::with_capacity(g.degree(i) + 1);
    members.push(state.queues[i as usize]);
    members.extend(g.neighbors(i).iter().map(|&j| state.queues[j as usize]));
    occupancy_of_queues(&members, jmax)
}

/// Run the event-driven simulation. Bit-reproducible in `(g, cfg)`.
///
/// Randomness is consumed in a fixed order: the initial draws, then per
/// event (1) the exponential waiting time, (2) the event-type uniform,
/// (3) the origin draw (arrivals) or busy-index draw (departures), and
/// (4) for arrivals the routing draws of [`route_arrival`].
pub fn run_sim(g: &Graph, cfg: &SimConfig) -> Result<Trajectory, SimError> {
    let n = g.n_vertices();
    cfg.validate(n)?;
    let mut rng = substream(cfg.seed, StreamPurpose::SimRun, 0);
    let state = sample_initial(n, &cfg.q_init, &mut rng);
    let mut queues = state.queues;

    // busy servers as a dense array with positions for O(1) swap-remove;
    // fixes the rng consumption order of departure draws
    let mut busy: Vec<Vertex> = Vec::with_capacity(n);
    let mut pos: Vec<u32> = vec![u32::MAX; n];
    for (i, &x) in queues.iter().enumerate() {
        if x > 0 {
            pos[i] = busy.len() as u32;
            busy.push(i as Vertex);
        }
    }

    let n_grid = (cfg.horizon / cfg.sample_dt + 1e-9).floor() as usize + 1;
    let grid_times: Vec<f64> = (0..n_grid).map(|k| k as f64 * cfg.sample_dt).collect();
    let mut occupancy_series: Vec<OccupancyVector> = Vec::with_capacity(n_grid);
    let mut next_grid = 0usize;

    let mut tag_slot: Vec<u32> = vec![u32::MAX; n];
    let mut tagged_paths: Vec<TaggedPath> = Vec::with_capacity(cfg.tagged.len());
    for (s, &v) in cfg.tagged.iter().enumerate() {
        tag_slot[v as usize] = s as u32;
        tagged_paths.push(TaggedPath {
            server: v,
            points: vec![(0.0, queues[v as usize])],
        });
    }

    let arrival_rate = n as f64 * cfg.lambda;
    let mut t = 0.0f64;
    let mut event_count = 0u64;
    loop {
        let total_rate = arrival_rate + busy.len() as f64;
        let t_next = if total_rate > 0.0 {
            t + exp_variate(&mut rng, total_rate)
        } else {
            f64::INFINITY
        };
        // grid times strictly before the next event see the current state
        while next_grid < n_grid && grid_times[next_grid] < t_next {
            occupancy_series.push(occupancy_of_queues(&queues, cfg.jmax));
            next_grid += 1;
        }
        if t_next > cfg.horizon {
            break;
        }
        t = t_next;
        event_count += 1;
        if event_count > cfg.event_budget {
            return Err(SimError::EventBudgetExceeded(cfg.event_budget));
        }
        let u: f64 = rng.gen::<f64>() * total_rate;
        let touched: Vertex;
        if u < arrival_rate {
            let origin = rng.gen_range(0..n) as Vertex;
            let sample = route_arrival(g, &queues, origin, cfg.d, &mut rng, cfg.fallback);
            let dest = sample.destination as usize;
            if queues[dest] == 0 {
                pos[dest] = busy.len() as u32;
                busy.push(dest as Vertex);
            }
            queues[dest] += 1;
            touched = dest as Vertex;
        } else {
            let idx = rng.gen_range(0..busy.len());
            let v = busy[idx] as usize;
            queues[v] -= 1;
            if queues[v] == 0 {
                let last = busy.len() - 1;
                busy.swap(idx, last);
                pos[busy[idx] as usize] = idx as u32;
                busy.pop();
                pos[v] = u32::MAX;
            }
            touched = v as Vertex;
        }
        let slot = tag_slot[touched as usize];
        if slot != u32::MAX {
            tagged_paths[slot as usize]
                .points
                .push((t, queues[touched as usize]));
        }
    }

    Ok(Trajectory {
        grid_times,
        occupancy_series,
        tagged_paths,
        event_count,
    })
}
