//! Pathwise coupling of the N-server system to per-server limit processes.
//!
//! Both systems are driven by the same per-server Poisson streams: a rate-1
//! service stream (firing regardless of idleness, gated by queue positivity)
//! and a marked arrival-candidate stream of rate `lambda * Ymax_i` with
//! uniform marks `y` on `[0, Ymax_i]`. A candidate `(s, y)` at server `i`
//! increments the N-system queue iff `y <= C_i^N(s-)` and the tagged limit
//! queue iff `y <= C_i(s-)`, so the two paths differ only where the two
//! intensities disagree. The per-server dominating bound
//! `Ymax_i = max(d, 1 + (d-1) rho_i)` requires every vertex to have at least
//! `d - 1` neighbors; runs on graphs violating that are refused.
//!
//! [`rate_sweep`] repeats coupled runs over a list of system sizes and
//! reports how fast the mean squared sup-discrepancy shrinks;
//! [`chaos_covariance`] estimates covariances of functionals of tagged
//! queues across independent replications of the full system.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rand::Rng;
use thiserror::Error;

use crate::graph::{generate, regularity_report, Graph, GraphError, GraphFamily, Vertex};
use crate::mean_field::{
    arrival_intensity_limit, integrate, path_value_at, simulate_mkv_path, MeanFieldError,
    OccupancyVector, OdeSolution,
};
use crate::rng::{derive_seed, exp_variate, substream, StreamPurpose};
use crate::routing::{arrival_intensity_exact, FallbackPolicy};
use crate::sim::{run_sim, sample_initial, SimConfig, SimError, SystemState};
use crate::stats::{covariance_with_stderr, RunningMoments};

#[derive(Debug, Error)]
pub enum CouplingError {
    #[error("vertex {vertex} has {degree} neighbors, coupling needs at least {needed}")]
    DegreeBelowD {
        vertex: Vertex,
        degree: usize,
        needed: usize,
    },
    #[error("dominating bound violated at server {server}, t = {t}: threshold {threshold} > Ymax {ymax}")]
    YmaxViolated {
        server: Vertex,
        t: f64,
        threshold: f64,
        ymax: f64,
    },
    #[error("event budget of {0} exceeded")]
    EventBudgetExceeded(u64),
    #[error("graph redraw budget exhausted at n = {n} after {attempts} attempts (p too small for the degree requirement)")]
    RedrawBudgetExceeded { n: usize, attempts: u32 },
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    MeanField(#[from] MeanFieldError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Shared Poisson drivers for one server.
#[derive(Debug, Clone)]
pub struct ServerDriver {
    /// Service completion times on `[0, t_end]`, rate 1.
    pub service: Vec<f64>,
    /// Arrival candidates `(s, y)`: `s` Poisson of rate `lambda * ymax`,
    /// `y` uniform on `[0, ymax]`.
    pub candidates: Vec<(f64, f64)>,
    pub ymax: f64,
}

/// Build the driver streams of one server from `(seed, server)` substreams.
/// Independent of any other server's streams.
pub fn build_driver(seed: u64, server: Vertex, lambda: f64, ymax: f64, t_end: f64) -> ServerDriver {
    let mut service = Vec::new();
    let mut svc_rng = substream(seed, StreamPurpose::Service, server as u64);
    let mut t = 0.0;
    loop {
        t += exp_variate(&mut svc_rng, 1.0);
        if t > t_end {
            break;
        }
        service.push(t);
    }
    let mut candidates = Vec::new();
    let rate = lambda * ymax;
    if rate > 0.0 {
        let mut arr_rng = substream(seed, StreamPurpose::Arrivals, server as u64);
        let mut s = 0.0;
        loop {
            s += exp_variate(&mut arr_rng, rate);
            if s > t_end {
                break;
            }
            let y: f64 = arr_rng.gen::<f64>() * ymax;
            candidates.push((s, y));
        }
    }
    ServerDriver {
        service,
        candidates,
        ymax,
    }
}

/// One limit-process path driven by an explicit driver; lets tests feed the
/// same randomness to two copies. Birth at candidate `(s, y)` iff
/// `y <= arrival_intensity_limit(x, q(s), d)`, death at service times while
/// positive.
pub fn mkv_path_with_driver(
    driver: &ServerDriver,
    sol: &OdeSolution,
    d: usize,
    x0: u32,
    t_end: f64,
) -> Result<Vec<(f64, u32)>, MeanFieldError> {
    #[derive(Clone, Copy)]
    enum Ev {
        Service(f64),
        Candidate(f64, f64),
    }
    let mut events: Vec<Ev> = driver
        .service
        .iter()
        .map(|&t| Ev::Service(t))
        .chain(driver.candidates.iter().map(|&(s, y)| Ev::Candidate(s, y)))
        .collect();
    events.sort_by(|a, b| {
        let ta = match a {
            Ev::Service(t) | Ev::Candidate(t, _) => *t,
        };
        let tb = match b {
            Ev::Service(t) | Ev::Candidate(t, _) => *t,
        };
        ta.total_cmp(&tb)
    });
    let mut x = x0;
    let mut path = vec![(0.0, x)];
    for ev in events {
        match ev {
            Ev::Service(t) => {
                if t <= t_end && x > 0 {
                    x -= 1;
                    path.push((t, x));
                }
            }
            Ev::Candidate(s, y) => {
                if s > t_end {
                    continue;
                }
                let q = sol.state_at(s);
                let c = if x as usize > q.truncation() {
                    0.0
                } else {
                    arrival_intensity_limit(x, q, d)?
                };
                if y <= c {
                    x += 1;
                    path.push((s, x));
                }
            }
        }
    }
    Ok(path)
}

/// Result of one coupled run.
#[derive(Debug, Clone)]
pub struct CoupledRun {
    /// Per tagged server, `sup_{t <= T} |X_i^N(t) - X_i(t)|`.
    pub sup_disc: Vec<u32>,
    /// Final state of the N-system (used by law-equivalence checks).
    pub final_state: SystemState,
    pub event_count: u64,
}

/// Run the N-system and, for each tagged server, its coupled limit process,
/// all from shared drivers and a shared initial state.
///
/// `cfg` supplies `lambda`, `d`, `horizon`, `fallback` and `q_init`; the
/// tagged set and seed come from the explicit arguments. `sol` must cover
/// the horizon.
pub fn run_coupled(
    g: &Graph,
    cfg: &SimConfig,
    sol: &OdeSolution,
    tagged: &[Vertex],
    seed: u64,
) -> Result<CoupledRun, CouplingError> {
    coupled_engine(g, cfg, Some((sol, tagged)), seed)
}

/// N-system alone through the same Poisson-random-measure route (no limit
/// side); the law must match the event-driven simulator's.
pub fn run_prm(g: &Graph, cfg: &SimConfig, seed: u64) -> Result<CoupledRun, CouplingError> {
    coupled_engine(g, cfg, None, seed)
}

#[derive(Clone, Copy)]
enum EventKind {
    Service,
    Candidate { y: f64 },
}

fn coupled_engine(
    g: &Graph,
    cfg: &SimConfig,
    limit: Option<(&OdeSolution, &[Vertex])>,
    seed: u64,
) -> Result<CoupledRun, CouplingError> {
    let n = g.n_vertices();
    cfg.validate(n)?;
    for i in 0..n as Vertex {
        if g.degree(i) < cfg.d - 1 {
            return Err(CouplingError::DegreeBelowD {
                vertex: i,
                degree: g.degree(i),
                needed: cfg.d - 1,
            });
        }
    }
    if let Some((sol, _)) = limit {
        if sol.horizon() < cfg.horizon - 1e-12 {
            return Err(MeanFieldError::HorizonNotCovered {
                covered: sol.horizon(),
                requested: cfg.horizon,
            }
            .into());
        }
    }

    let rep = regularity_report(g, cfg.d);
    let ymax: Vec<f64> = rep
        .rho
        .iter()
        .map(|&r| (1.0 + (cfg.d - 1) as f64 * r).max(cfg.d as f64))
        .collect();

    // shared initial state
    let mut init_rng = substream(seed, StreamPurpose::Init, 0);
    let mut queues = sample_initial(n, &cfg.q_init, &mut init_rng).queues;

    // merge all driver streams into one deterministic event order
    let mut events: Vec<(f64, Vertex, EventKind)> = Vec::new();
    for i in 0..n as Vertex {
        let driver = build_driver(seed, i, cfg.lambda, ymax[i as usize], cfg.horizon);
        events.extend(driver.service.iter().map(|&t| (t, i, EventKind::Service)));
        events.extend(
            driver
                .candidates
                .iter()
                .map(|&(s, y)| (s, i, EventKind::Candidate { y })),
        );
        if events.len() as u64 > cfg.event_budget {
            return Err(CouplingError::EventBudgetExceeded(cfg.event_budget));
        }
    }
    events.sort_by(|a, b| {
        a.0.total_cmp(&b.0)
            .then(a.1.cmp(&b.1))
            .then_with(|| kind_rank(&a.2).cmp(&kind_rank(&b.2)))
    });

    let (sol, tagged) = match limit {
        Some((sol, tagged)) => (Some(sol), tagged),
        None => (None, &[] as &[Vertex]),
    };
    let mut tag_slot: Vec<u32> = vec![u32::MAX; n];
    for (s, &v) in tagged.iter().enumerate() {
        assert!((v as usize) < n, "tagged vertex out of range");
        assert!(tag_slot[v as usize] == u32::MAX, "duplicate tagged vertex");
        tag_slot[v as usize] = s as u32;
    }
    let mut x_lim: Vec<u32> = tagged.iter().map(|&v| queues[v as usize]).collect();
    let mut sup: Vec<u32> = vec![0; tagged.len()];

    let event_count = events.len() as u64;
    for (t, i, kind) in events {
        let iu = i as usize;
        let slot = tag_slot[iu];
        match kind {
            EventKind::Service => {
                if queues[iu] > 0 {
                    queues[iu] -= 1;
                }
                if slot != u32::MAX {
                    let s = slot as usize;
                    if x_lim[s] > 0 {
                        x_lim[s] -= 1;
                    }
                }
            }
            EventKind::Candidate { y } => {
                let cn = arrival_intensity_exact(g, &queues, i, cfg.d, cfg.fallback);
                if cn > ymax[iu] + 1e-9 {
                    return Err(CouplingError::YmaxViolated {
                        server: i,
                        t,
                        threshold: cn,
                        ymax: ymax[iu],
                    });
                }
                if y <= cn {
                    queues[iu] += 1;
                }
                if slot != u32::MAX {
                    let s = slot as usize;
                    let sol = sol.expect("tagged servers imply a limit solution");
                    let q = sol.state_at(t);
                    let cl = if x_lim[s] as usize > q.truncation() {
                        0.0
                    } else {
                        arrival_intensity_limit(x_lim[s], q, cfg.d)?
                    };
                    if cl > ymax[iu] + 1e-9 {
                        return Err(CouplingError::YmaxViolated {
                            server: i,
                            t,
                            threshold: cl,
                            ymax: ymax[iu],
                        });
                    }
                    if y <= cl {
                        x_lim[s] += 1;
                    }
                }
            }
        }
        if slot != u32::MAX {
            let s = slot as usize;
            let disc = queues[iu].abs_diff(x_lim[s]);
            sup[s] = sup[s].max(disc);
        }
    }

    Ok(CoupledRun {
        sup_disc: sup,
        final_state: SystemState {
            time: cfg.horizon,
            queues,
        },
        event_count,
    })
}

fn kind_rank(k: &EventKind) -> u8 {
    match k {
        EventKind::Service => 0,
        EventKind::Candidate { .. } => 1,
    }
}

/// Connection-probability schedules for ERRG sweeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PnSpec {
    /// `p_n = n^{-1/2}`
    InvSqrt,
    /// `p_n = (ln n)^2 / n`
    LogSqOverN,
    Const(f64),
}

impl PnSpec {
    pub fn eval(&self, n: usize) -> f64 {
        let v = match self {
            PnSpec::InvSqrt => 1.0 / (n as f64).sqrt(),
            PnSpec::LogSqOverN => (n as f64).ln().powi(2) / n as f64,
            PnSpec::Const(p) => *p,
        };
        v.clamp(0.0, 1.0)
    }
}

/// Graph family swept by [`rate_sweep`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepFamily {
    Clique,
    Errg { pn: PnSpec },
}

/// Parameters shared by all cells of a sweep.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub lambda: f64,
    pub d: usize,
    pub t_end: f64,
    pub q_init: OccupancyVector,
    pub fallback: FallbackPolicy,
    /// How many (exchangeable) servers to tag per replication; their
    /// squared sup-discrepancies are averaged within the replication.
    pub tagged_count: usize,
    /// Reuse one graph per size instead of resampling per replication
    /// (quenched-style runs; the default resamples, i.e. annealed).
    pub freeze_graph: bool,
    /// Redraws allowed when an ERRG sample violates the degree requirement.
    pub redraw_budget: u32,
    /// Step for the limit ODE.
    pub ode_h: f64,
    /// Truncation level for the limit ODE.
    pub ode_b: usize,
    /// Worker threads for replications (1 = sequential). Results are merged
    /// in replication order, so the output is independent of this value.
    pub jobs: usize,
}

/// One row of a rate sweep.
#[derive(Debug, Clone)]
pub struct RateSweepRow {
    pub n: usize,
    pub p: f64,
    pub mean_sup2: f64,
    pub stderr: f64,
    /// `sqrt(n * p) * mean_sup2`; bounded in `n` when the convergence rate
    /// holds.
    pub product: f64,
    pub replications: usize,
    pub redraws: u64,
}

const GRAPH_TAG: u64 = 0x6772_6170_6800; // "graph"
const RUN_TAG: u64 = 0x7275_6e00; // "run"

/// Sweep coupled runs over system sizes. For ERRG families each replication
/// samples a fresh graph (annealed estimate) unless `freeze_graph` is set;
/// samples violating the degree requirement are redrawn and counted.
pub fn rate_sweep(
    family: &SweepFamily,
    n_list: &[usize],
    cfg: &SweepConfig,
    replications: usize,
    seed: u64,
) -> Result<Vec<RateSweepRow>, CouplingError> {
    let sol = integrate(
        &cfg.q_init,
        cfg.lambda,
        cfg.d,
        cfg.t_end,
        cfg.ode_h,
        cfg.ode_b,
    )?;
    let mut rows = Vec::with_capacity(n_list.len());
    for (k, &n) in n_list.iter().enumerate() {
        let p = match family {
            SweepFamily::Clique => 1.0,
            SweepFamily::Errg { pn } => pn.eval(n),
        };
        let frozen: Option<(Graph, u32)> =
            if cfg.freeze_graph || matches!(family, SweepFamily::Clique) {
                let cell = (k as u64) << 32;
                Some(sample_admissible_graph(
                    family,
                    n,
                    p,
                    cfg,
                    derive_seed(seed, GRAPH_TAG ^ cell),
                )?)
            } else {
                None
            };
        let frozen_ref = &frozen;
        let results: Vec<Result<(f64, u32), CouplingError>> =
            par_map(replications, cfg.jobs, |r| {
                let cell = (k as u64) << 32 | r as u64;
                let rep_seed = derive_seed(seed, cell);
                let (fresh, attempts) = match frozen_ref {
                    Some((_, a)) => (None, if r == 0 { *a } else { 0 }),
                    None => {
                        let (g, a) = sample_admissible_graph(
                            family,
                            n,
                            p,
                            cfg,
                            derive_seed(rep_seed, GRAPH_TAG),
                        )?;
                        (Some(g), a)
                    }
                };
                let graph: &Graph = fresh
                    .as_ref()
                    .unwrap_or_else(|| &frozen_ref.as_ref().unwrap().0);
                let tagged: Vec<Vertex> = (0..cfg.tagged_count.min(n) as Vertex).collect();
                let mut sim_cfg = SimConfig::new(
                    cfg.lambda,
                    cfg.d,
                    cfg.t_end,
                    cfg.t_end.max(1e-9),
                    0,
                    cfg.q_init.clone(),
                );
                sim_cfg.fallback = cfg.fallback;
                let run = run_coupled(
                    graph,
                    &sim_cfg,
                    &sol,
                    &tagged,
                    derive_seed(rep_seed, RUN_TAG),
                )?;
                let mean_sup2 = run
                    .sup_disc
                    .iter()
                    .map(|&s| (s as f64) * (s as f64))
                    .sum::<f64>()
                    / run.sup_disc.len() as f64;
                Ok((mean_sup2, attempts))
            });
        let mut moments = RunningMoments::new();
        let mut redraws = 0u64;
        for r in results {
            let (v, attempts) = r?;
            moments.push(v);
            redraws += attempts as u64;
        }
        rows.push(RateSweepRow {
            n,
            p,
            mean_sup2: moments.mean(),
            stderr: moments.stderr(),
            product: (n as f64 * p).sqrt() * moments.mean(),
            replications,
            redraws,
        });
    }
    Ok(rows)
}

/// Draw a graph of the family, redrawing ERRG samples until every vertex has
/// at least `d - 1` neighbors. Returns the graph and the number of redraws.
fn sample_admissible_graph(
    family: &SweepFamily,
    n: usize,
    p: f64,
    cfg: &SweepConfig,
    seed: u64,
) -> Result<(Graph, u32), CouplingError> {
    match family {
        SweepFamily::Clique => Ok((generate(&GraphFamily::Clique, n, seed)?, 0)),
        SweepFamily::Errg { .. } => {
            for attempt in 0..=cfg.redraw_budget {
                let g = generate(
                    &GraphFamily::Errg { p },
                    n,
                    derive_seed(seed, attempt as u64),
                )?;
                if g.min_out_degree() >= cfg.d - 1 {
                    return Ok((g, attempt));
                }
            }
            Err(CouplingError::RedrawBudgetExceeded {
                n,
                attempts: cfg.redraw_budget + 1,
            })
        }
    }
}

/// One covariance estimate.
#[derive(Debug, Clone)]
pub struct ChaosRow {
    pub i: Vertex,
    pub j: Vertex,
    pub cov: f64,
    pub stderr: f64,
    pub reps: usize,
}

/// Estimate `Cov(f(X_i(T)), f(X_j(T)))` for each requested pair across
/// independent replications of the full N-system, with `f = 1{x >= threshold}`.
/// The degenerate pair `(i, i)` yields the variance.
pub fn chaos_covariance(
    g: &Graph,
    cfg: &SimConfig,
    pairs: &[(Vertex, Vertex)],
    threshold: u32,
    replications: usize,
    seed: u64,
    jobs: usize,
) -> Result<Vec<ChaosRow>, SimError> {
    let mut tagged: Vec<Vertex> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
    tagged.sort_unstable();
    tagged.dedup();
    let slot_of = |v: Vertex| {
        tagged
            .binary_search(&v)
            .expect("tagged contains pair members")
    };

    let results: Vec<Result<Vec<u32>, SimError>> = par_map(replications, jobs, |r| {
        let mut rep_cfg = cfg.clone();
        rep_cfg.seed = derive_seed(seed, r as u64);
        rep_cfg.tagged = tagged.clone();
        rep_cfg.sample_dt = cfg.horizon.max(1e-9);
        let traj = run_sim(g, &rep_cfg)?;
        Ok(traj
            .tagged_paths
            .iter()
            .map(|p| p.points.last().unwrap().1)
            .collect())
    });
    let mut finals: Vec<Vec<u32>> = Vec::with_capacity(replications);
    for r in results {
        finals.push(r?);
    }

    let series = |v: Vertex| -> Vec<f64> {
        let s = slot_of(v);
        finals
            .iter()
            .map(|row| f64::from(row[s] >= threshold))
            .collect()
    };
    Ok(pairs
        .iter()
        .map(|&(a, b)| {
            let (cov, stderr) = covariance_with_stderr(&series(a), &series(b));
            ChaosRow {
                i: a,
                j: b,
                cov,
                stderr,
                reps: replications,
            }
        })
        .collect())
}

/// Control estimator: the same covariance computed from two *independent*
/// limit-process replications per trial; the truth is exactly zero.
pub fn chaos_covariance_mkv(
    sol: &OdeSolution,
    lambda: f64,
    d: usize,
    t_end: f64,
    x0_law: &OccupancyVector,
    threshold: u32,
    replications: usize,
    seed: u64,
    jobs: usize,
) -> Result<ChaosRow, MeanFieldError> {
    let results: Vec<Result<(f64, f64), MeanFieldError>> = par_map(replications, jobs, |r| {
        let rep_seed = derive_seed(seed, r as u64);
        let mut pair = [0.0f64; 2];
        for (c, slot) in pair.iter_mut().enumerate() {
            let mut rng = substream(rep_seed, StreamPurpose::MkvPath, c as u64);
            let path = simulate_mkv_path(sol, lambda, d, t_end, x0_law, &mut rng)?;
            *slot = f64::from(path_value_at(&path, t_end) >= threshold);
        }
        Ok((pair[0], pair[1]))
    });
    let mut xs = Vec::with_capacity(replications);
    let mut ys = Vec::with_capacity(replications);
    for r in results {
        let (x, y) = r?;
        xs.push(x);
        ys.push(y);
    }
    let (cov, stderr) = covariance_with_stderr(&xs, &ys);
    Ok(ChaosRow {
        i: 0,
        j: 1,
        cov,
        stderr,
        reps: replications,
    })
}

/// Map `f` over `0..count` on `jobs` workers, returning results in index
/// order (bitwise independent of the worker count). Replication fan-out for
/// embarrassingly parallel cells.
pub fn par_map<T, F>(count: usize, jobs: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    if jobs <= 1 || count <= 1 {
        return (0..count).map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<T>>> = (0..count).map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..jobs.min(count) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= count {
                    break;
                }
                let v = f(i);
                *slots[i].lock().unwrap() = Some(v);
            });
        }
    });
    slots
        .into_iter()
        .map(|m| m.into_inner().unwrap().expect("worker filled every slot"))
        .collect()
}
