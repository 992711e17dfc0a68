//! Simulation and numerical analysis of JSQ(d) ("power-of-d") load
//! balancing on graph topologies.
//!
//! Each vertex of a graph is a single-server queue. Tasks arrive at every
//! server as independent Poisson processes of rate `lambda`; an arrival at
//! server `i` joins the shortest queue among `i` and `d-1` neighbors sampled
//! uniformly at random, ties broken uniformly. The crate provides:
//!
//! - graph construction and degree-regularity diagnostics ([`graph`]),
//! - the routing rule, the exact per-server arrival intensity, and a
//!   brute-force enumeration oracle for it ([`routing`]),
//! - an exact event-driven simulator of the N-server Markov chain ([`sim`]),
//! - the mean-field occupancy ODE, its explicit fixed point, and the
//!   limiting tagged-queue (McKean-Vlasov) process ([`mean_field`]),
//! - pathwise coupling of the N-server system to per-server limit processes
//!   through shared Poisson drivers, rate sweeps over graph sizes, and
//!   covariance estimators for tagged pairs ([`coupling`]).
//!
//! All randomness flows through explicitly seeded ChaCha streams ([`rng`]);
//! every run is bit-reproducible from its configuration.

pub mod coupling;
pub mod graph;
pub mod mean_field;
pub mod rng;
pub mod routing;
pub mod sim;
pub mod stats;

pub use graph::{generate, regularity_report, Graph, GraphFamily, RegularityReport, Vertex};
pub use mean_field::{
    arrival_intensity_limit, fixed_point, integrate, l1_distance, ode_rhs, simulate_mkv_path,
    OccupancyVector, OdeSolution,
};
pub use routing::{
    arrival_intensity_bruteforce, arrival_intensity_exact, route_arrival, tie_break_b,
    FallbackPolicy, RoutingSample,
};
pub use sim::{
    neighborhood_occupancy, occupancy, run_sim, sample_initial, SimConfig, SystemState, Trajectory,
};
