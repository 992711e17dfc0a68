//! Task-assignment rule and per-server arrival intensities.
//!
//! An arrival at server `i` with at least `d - 1` neighbors is routed to the
//! shortest queue among `i` and `d - 1` neighbors sampled uniformly without
//! replacement, ties broken uniformly. Servers with fewer than `d - 1`
//! neighbors assign arrivals according to a [`FallbackPolicy`].
//!
//! [`arrival_intensity_exact`] evaluates the total acceptance weight
//! `C_i` of a server in closed form (hypergeometric sums over tie counts);
//! [`arrival_intensity_bruteforce`] evaluates the same quantity by literal
//! enumeration of ordered neighbor tuples and exists as an independent
//! cross-check. A server's arrival rate is `lambda * C_i`.

use rand::Rng;
use thiserror::Error;

use crate::graph::{Graph, Vertex};

#[derive(Debug, Error)]
pub enum RoutingError {
    #[error("enumeration would visit about {estimated} tuples, over budget {budget}")]
    BudgetExceeded { estimated: u128, budget: u64 },
}

/// Default tuple budget for [`arrival_intensity_bruteforce`].
pub const DEFAULT_TUPLE_BUDGET: u64 = 10_000_000;

/// What to do with arrivals at a server that has fewer than `d - 1`
/// neighbors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FallbackPolicy {
    /// The arrival joins the origin server's own queue.
    #[default]
    SelfOnly,
    /// The arrival joins the shortest queue among the origin and all of its
    /// neighbors, ties broken uniformly.
    ClosedNeighborhoodJsq,
}

/// Outcome of routing one arrival.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoutingSample {
    pub origin: Vertex,
    /// The `d - 1` sampled neighbors, in sampled order; empty when the
    /// fallback policy was used.
    pub targets: Vec<Vertex>,
    pub destination: Vertex,
}

/// Probability that the first coordinate of a queue-length tuple wins the
/// shortest-queue comparison: `1/k` if `x[0]` equals the minimum and the
/// minimum is attained `k` times, else `0`.
///
/// Panics on an empty tuple.
pub fn tie_break_b(x: &[u32]) -> f64 {
    assert!(!x.is_empty(), "tie_break_b: empty tuple");
    let min = *x.iter().min().unwrap();
    if x[0] != min {
        return 0.0;
    }
    let k = x.iter().filter(|&&v| v == min).count();
    1.0 / k as f64
}

/// Route one arrival appearing at server `origin`.
///
/// Consumes randomness in a fixed order: first the `d - 1` target draws
/// (partial Fisher-Yates over the neighbor list), then one tie-break draw if
/// and only if the minimum is attained more than once.
pub fn route_arrival<R: Rng>(
    g: &Graph,
    queues: &[u32],
    origin: Vertex,
    d: usize,
    rng: &mut R,
    fb: FallbackPolicy,
) -> RoutingSample {
    debug_assert!(d >= 2);
    let nbrs = g.neighbors(origin);
    if nbrs.len() >= d - 1 {
        let mut pool: Vec<Vertex> = nbrs.to_vec();
        for t in 0..d - 1 {
            let r = t + rng.gen_range(0..pool.len() - t);
            pool.swap(t, r);
        }
        pool.truncate(d - 1);
        let destination = pick_min(queues, origin, &pool, rng);
        RoutingSample {
            origin,
            targets: pool,
            destination,
        }
    } else {
        let destination = match fb {
            FallbackPolicy::SelfOnly => origin,
            FallbackPolicy::ClosedNeighborhoodJsq => pick_min(queues, origin, nbrs, rng),
        };
        RoutingSample {
            origin,
            targets: Vec::new(),
            destination,
        }
    }
}

/// Uniform argmin over `{first} ∪ rest`, candidates compared in the order
/// given (first, then rest).
fn pick_min<R: Rng>(queues: &[u32], first: Vertex, rest: &[Vertex], rng: &mut R) -> Vertex {
    let mut min = queues[first as usize];
    for &v in rest {
        min = min.min(queues[v as usize]);
    }
    let mut winners: Vec<Vertex> = Vec::with_capacity(4);
    if queues[first as usize] == min {
        winners.push(first);
    }
    winners.extend(rest.iter().copied().filter(|&v| queues[v as usize] == min));
    if winners.len() == 1 {
        winners[0]
    } else {
        winners[rng.gen_range(0..winners.len())]
    }
}

/// Binomial coefficient as f64; 0 when `k > n`.
fn binom(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let mut v = 1.0;
    for t in 0..k {
        v *= (n - t) as f64 / (t + 1) as f64;
    }
    v
}

/// Probability of winning a shortest-queue comparison against `m` uniform
/// draws without replacement from a pool of `total` servers of which `ties`
/// tie with the reference queue length and `greater` exceed it (the rest are
/// strictly shorter and would win outright), with `extra_ties` further
/// already-included tying candidates.
///
/// `sum_k C(ties,k) C(greater,m-k) / C(total,m) * 1/(1 + extra_ties + k)`.
fn hypergeometric_win(ties: u64, greater: u64, total: u64, m: u64, extra_ties: u64) -> f64 {
    debug_assert!(ties + greater <= total);
    let denom = binom(total, m);
    let mut p = 0.0;
    for k in 0..=m.min(ties) {
        let ways = binom(ties, k) * binom(greater, m - k);
        if ways > 0.0 {
            p += ways / denom / (1 + extra_ties + k) as f64;
        }
    }
    p
}

/// Exact arrival intensity `C_i` of server `i`: the mean number of tasks per
/// unit `lambda` that join queue `i`, summing the origin's own kept arrivals
/// and arrivals forwarded by each neighbor, including fallback contributions.
///
/// Closed form, no tuple enumeration. For graphs where every vertex has at
/// least `d - 1` (out-)neighbors, `sum_i C_i = n` and
/// `C_i <= 1 + (d - 1) * rho_i`.
pub fn arrival_intensity_exact(
    g: &Graph,
    queues: &[u32],
    i: Vertex,
    d: usize,
    fb: FallbackPolicy,
) -> f64 {
    debug_assert!(d >= 2);
    let x = queues[i as usize];
    let nbrs = g.neighbors(i);
    let deg = nbrs.len();

    // Own arrivals kept by i.
    let mut c = if deg >= d - 1 {
        let (less, equal) = count_relative(queues, nbrs, None, x);
        let greater = (deg - less - equal) as u64;
        hypergeometric_win(equal as u64, greater, deg as u64, (d - 1) as u64, 0)
    } else {
        match fb {
            FallbackPolicy::SelfOnly => 1.0,
            FallbackPolicy::ClosedNeighborhoodJsq => closed_jsq_win(queues, i, i, g),
        }
    };

    // Arrivals forwarded to i by each in-neighbor j.
    for &j in g.in_neighbors(i) {
        let dj = g.degree(j);
        if dj >= d - 1 {
            let xj = queues[j as usize];
            if xj < x {
                continue;
            }
            let extra = u64::from(xj == x);
            let m = (d - 2) as u64;
            let p = if m == 0 {
                1.0 / (1 + extra) as f64
            } else {
                let (less, equal) = count_relative(queues, g.neighbors(j), Some(i), x);
                let pool = (dj - 1) as u64;
                let greater = pool - less as u64 - equal as u64;
                hypergeometric_win(equal as u64, greater, pool, m, extra)
            };
            c += (d - 1) as f64 / dj as f64 * p;
        } else if fb == FallbackPolicy::ClosedNeighborhoodJsq {
            c += closed_jsq_win(queues, i, j, g);
        }
    }
    c
}

/// Count neighbors with queue length strictly below / equal to `x`,
/// optionally excluding one vertex.
fn count_relative(
    queues: &[u32],
    nbrs: &[Vertex],
    exclude: Option<Vertex>,
    x: u32,
) -> (usize, usize) {
    let mut less = 0;
    let mut equal = 0;
    for &v in nbrs {
        if Some(v) == exclude {
            continue;
        }
        let q = queues[v as usize];
        if q < x {
            less += 1;
        } else if q == x {
            equal += 1;
        }
    }
    (less, equal)
}

/// Probability that `candidate` wins a JSQ comparison over the closed
/// neighborhood of `owner` (owner plus all its out-neighbors), uniform
/// tie-break. `candidate` must be `owner` or one of its out-neighbors.
fn closed_jsq_win(queues: &[u32], candidate: Vertex, owner: Vertex, g: &Graph) -> f64 {
    let xc = queues[candidate as usize];
    let mut min = queues[owner as usize];
    let mut mult = 1usize;
    for &v in g.neighbors(owner) {
        let q = queues[v as usize];
        if q < min {
            min = q;
            mult = 1;
        } else if q == min {
            mult += 1;
        }
    }
    if xc == min {
        1.0 / mult as f64
    } else {
        0.0
    }
}

fn falling(n: u64, k: u64) -> u128 {
    let mut v: u128 = 1;
    for t in 0..k {
        v = v.saturating_mul((n - t) as u128);
    }
    v
}

/// Literal tuple-enumeration evaluation of the arrival intensity `C_i`:
/// sums the routing probability over every ordered tuple of distinct sampled
/// neighbors, for the origin's own arrivals and for each forwarding
/// neighbor. Cross-validation oracle for [`arrival_intensity_exact`];
/// intended for small graphs.
///
/// Refuses instances whose estimated tuple count exceeds `tuple_budget`.
pub fn arrival_intensity_bruteforce(
    g: &Graph,
    queues: &[u32],
    i: Vertex,
    d: usize,
    fb: FallbackPolicy,
    tuple_budget: u64,
) -> Result<f64, RoutingError> {
    debug_assert!(d >= 2);
    let deg = g.degree(i) as u64;
    let mut estimated: u128 = if deg >= (d - 1) as u64 {
        falling(deg, (d - 1) as u64)
    } else {
        0
    };
    for &j in g.in_neighbors(i) {
        let dj = g.degree(j) as u64;
        if dj >= (d - 1) as u64 {
            estimated += falling(dj - 1, (d - 2) as u64);
        }
    }
    if estimated > tuple_budget as u128 {
        return Err(RoutingError::BudgetExceeded {
            estimated,
            budget: tuple_budget,
        });
    }

    let x = queues[i as usize];
    let nbrs = g.neighbors(i);

    // Own-arrival term.
    let mut c = if nbrs.len() >= d - 1 {
        let weight = 1.0 / falling(nbrs.len() as u64, (d - 1) as u64) as f64;
        let mut sum = 0.0;
        let mut tuple = vec![x];
        enumerate_tuples(nbrs, &[i], d - 1, &mut Vec::new(), &mut |sampled| {
            tuple.truncate(1);
            tuple.extend(sampled.iter().map(|&v| queues[v as usize]));
            sum += weight * tie_break_b(&tuple);
        });
        sum
    } else {
        match fb {
            FallbackPolicy::SelfOnly => 1.0,
            FallbackPolicy::ClosedNeighborhoodJsq => closed_tuple_win(g, queues, i, i),
        }
    };

    // Forwarded terms: arrival at neighbor j, with i occupying one of the
    // d - 1 sampled slots (symmetry gives the factor d - 1).
    for &j in g.in_neighbors(i) {
        let dj = g.degree(j);
        if dj >= d - 1 {
            let weight = (d - 1) as f64 / falling(dj as u64, (d - 1) as u64) as f64;
            let mut sum = 0.0;
            let mut tuple = vec![x, queues[j as usize]];
            enumerate_tuples(
                g.neighbors(j),
                &[i, j],
                d - 2,
                &mut Vec::new(),
                &mut |sampled| {
                    tuple.truncate(2);
                    tuple.extend(sampled.iter().map(|&v| queues[v as usize]));
                    sum += weight * tie_break_b(&tuple);
                },
            );
            c += sum;
        } else if fb == FallbackPolicy::ClosedNeighborhoodJsq {
            c += closed_tuple_win(g, queues, i, j);
        }
    }
    Ok(c)
}

/// Ordered tuples of `len` distinct vertices from `pool`, none in `banned`.
fn enumerate_tuples(
    pool: &[Vertex],
    banned: &[Vertex],
    len: usize,
    current: &mut Vec<Vertex>,
    visit: &mut impl FnMut(&[Vertex]),
) {
    if current.len() == len {
        visit(current);
        return;
    }
    for &v in pool {
        if banned.contains(&v) || current.contains(&v) {
            continue;
        }
        current.push(v);
        enumerate_tuples(pool, banned, len, current, visit);
        current.pop();
    }
}

/// `closed_jsq_win` evaluated through [`tie_break_b`] on the assembled tuple,
/// keeping the brute-force path independent of the counting logic.
fn closed_tuple_win(g: &Graph, queues: &[u32], candidate: Vertex, owner: Vertex) -> f64 {
    let mut tuple = vec![queues[candidate as usize]];
    if owner != candidate {
        tuple.push(queues[owner as usize]);
    }
    tuple.extend(
        g.neighbors(owner)
            .iter()
            .filter(|&&v| v != candidate)
            .map(|&v| queues[v as usize]),
    );
    tie_break_b(&tuple)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, GraphFamily};
    use crate::rng;
    use rand::Rng;

    fn random_instance(seed: u64, n: usize, p: f64, qmax: u32) -> (Graph, Vec<u32>) {
        let g = generate(&GraphFamily::Errg { p }, n, seed).unwrap();
        let mut r = rng::master(seed ^ 0xabcd);
        let queues: Vec<u32> = (0..n).map(|_| r.gen_range(0..=qmax)).collect();
        (g, queues)
    }

    #[test]
    fn tie_break_basics() {
        assert_eq!(tie_break_b(&[0, 1]), 1.0);
        assert_eq!(tie_break_b(&[1, 0]), 0.0);
        assert!((tie_break_b(&[3, 3, 3]) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(tie_break_b(&[2, 5, 2]), 0.5);
    }

    #[test]
    #[should_panic(expected = "empty tuple")]
    fn tie_break_rejects_empty() {
        tie_break_b(&[]);
    }

    #[test]
    fn tie_break_symmetric_in_tail_coordinates() {
        let mut r = rng::master(5);
        for _ in 0..200 {
            let mut xs: Vec<u32> = (0..4).map(|_| r.gen_range(0..4)).collect();
            let b0 = tie_break_b(&xs);
            xs.swap(1, 3);
            assert_eq!(b0, tie_break_b(&xs));
            assert!((0.0..=1.0).contains(&b0));
        }
    }

    #[test]
    fn tie_break_one_lipschitz() {
        let mut r = rng::master(6);
        for _ in 0..500 {
            let xs: Vec<u32> = (0..3).map(|_| r.gen_range(0..4)).collect();
            let ys: Vec<u32> = (0..3).map(|_| r.gen_range(0..4)).collect();
            let linf = xs
                .iter()
                .zip(&ys)
                .map(|(a, b)| a.abs_diff(*b))
                .max()
                .unwrap() as f64;
            assert!((tie_break_b(&xs) - tie_break_b(&ys)).abs() <= linf);
        }
    }

    #[test]
    fn route_strict_minimum_wins() {
        let g = generate(&GraphFamily::Clique, 3, 0).unwrap();
        let queues = vec![5, 2, 9];
        let mut r = rng::master(1);
        for _ in 0..50 {
            let s = route_arrival(&g, &queues, 0, 2, &mut r, FallbackPolicy::SelfOnly);
            assert_eq!(s.targets.len(), 1);
            if s.targets[0] == 1 {
                assert_eq!(s.destination, 1);
            } else {
                assert_eq!(s.destination, 0, "origin 5 vs 9 keeps the arrival");
            }
        }
    }

    #[test]
    fn route_fallback_self_only() {
        // vertex 2 is isolated
        let g = Graph::undirected_from_edges(3, &[(0, 1)]).unwrap();
        let mut r = rng::master(2);
        let s = route_arrival(&g, &[4, 0, 7], 2, 2, &mut r, FallbackPolicy::SelfOnly);
        assert_eq!(s.destination, 2);
        assert!(s.targets.is_empty());
    }

    #[test]
    fn route_fallback_closed_jsq() {
        // star center 0 with 3 leaves; d = 5 forces fallback at the center
        let g = Graph::undirected_from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        let mut r = rng::master(3);
        let s = route_arrival(
            &g,
            &[9, 4, 1, 6],
            0,
            5,
            &mut r,
            FallbackPolicy::ClosedNeighborhoodJsq,
        );
        assert_eq!(s.destination, 2);
    }

    #[test]
    fn route_tie_frequency_binomial() {
        let g = generate(&GraphFamily::Clique, 2, 0).unwrap();
        let queues = vec![3, 3];
        let mut r = rng::master(7);
        let trials = 100_000;
        let mut kept = 0u32;
        for _ in 0..trials {
            let s = route_arrival(&g, &queues, 0, 2, &mut r, FallbackPolicy::SelfOnly);
            if s.destination == 0 {
                kept += 1;
            }
        }
        let freq = kept as f64 / trials as f64;
        let sigma = (0.25 / trials as f64).sqrt();
        assert!(
            (freq - 0.5).abs() <= 4.0 * sigma,
            "tie frequency {freq} vs 0.5 (sigma {sigma})"
        );
    }

    #[test]
    fn route_frequencies_match_tie_break_chi_squared() {
        // Fixed origin on a small graph with a three-way tie among
        // {origin, two of four neighbors}; compare empirical destination
        // frequencies against exact probabilities from the closed form.
        let g = Graph::undirected_from_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        let queues = vec![1, 1, 1, 2, 3];
        let d = 3;
        // Destination probabilities by enumeration over unordered pairs of
        // neighbors (all C(4,2)=6 pairs equally likely).
        let pairs = [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)];
        let mut expect = [0.0f64; 5];
        for (a, b) in pairs {
            let tuple = [queues[0], queues[a], queues[b]];
            for (slot, v) in [(0usize, 0usize), (1, a), (2, b)] {
                let mut rot = tuple;
                rot.swap(0, slot);
                expect[v] += tie_break_b(&rot) / pairs.len() as f64;
            }
        }
        let trials = 60_000u32;
        let mut counts = [0u32; 5];
        let mut r = rng::master(11);
        for _ in 0..trials {
            let s = route_arrival(&g, &queues, 0, d, &mut r, FallbackPolicy::SelfOnly);
            counts[s.destination as usize] += 1;
        }
        let mut chi2 = 0.0;
        let mut dof = 0;
        for v in 0..5 {
            let e = expect[v] * trials as f64;
            if e > 0.0 {
                let o = counts[v] as f64;
                chi2 += (o - e) * (o - e) / e;
                dof += 1;
            } else {
                assert_eq!(counts[v], 0, "impossible destination {v} reached");
            }
        }
        // chi-squared 99.9% quantile for dof-1 <= 3 is 16.27
        assert!(chi2 < 16.27, "chi2 {chi2} with {dof} cells");
    }

    #[test]
    fn intensity_clique3_uniform_is_one() {
        let g = generate(&GraphFamily::Clique, 3, 0).unwrap();
        let q = vec![0, 0, 0];
        for i in 0..3 {
            let c = arrival_intensity_exact(&g, &q, i, 2, FallbackPolicy::SelfOnly);
            assert!((c - 1.0).abs() < 1e-12, "C_{i} = {c}");
        }
    }

    #[test]
    fn intensity_clique5_strict_minimum() {
        let g = generate(&GraphFamily::Clique, 5, 0).unwrap();
        let q = vec![0, 7, 7, 7, 7];
        let c = arrival_intensity_exact(&g, &q, 0, 2, FallbackPolicy::SelfOnly);
        // own term 1 (always the strict minimum of any sample), plus each of
        // the four neighbors forwarding with probability 1/4
        assert!((c - 2.0).abs() < 1e-12, "C_0 = {c}");
        let b = arrival_intensity_bruteforce(&g, &q, 0, 2, FallbackPolicy::SelfOnly, 1_000_000)
            .unwrap();
        assert!((b - 2.0).abs() < 1e-12);
    }

    #[test]
    fn intensity_isolated_self_only_is_one() {
        let g = Graph::undirected_from_edges(3, &[(0, 1)]).unwrap();
        let q = vec![2, 0, 5];
        let c = arrival_intensity_exact(&g, &q, 2, 2, FallbackPolicy::SelfOnly);
        assert_eq!(c, 1.0);
        let b = arrival_intensity_bruteforce(&g, &q, 2, 2, FallbackPolicy::SelfOnly, 1000).unwrap();
        assert_eq!(b, 1.0);
    }

    #[test]
    fn exact_matches_bruteforce_on_random_instances() {
        let mut checked = 0;
        for seed in 0..60u64 {
            let n = 4 + (seed % 9) as usize;
            let p = 0.2 + 0.6 * (seed as f64 / 60.0);
            let (g, queues) = random_instance(seed, n, p, 3);
            for d in [2usize, 3] {
                for fb in [
                    FallbackPolicy::SelfOnly,
                    FallbackPolicy::ClosedNeighborhoodJsq,
                ] {
                    for i in 0..n as Vertex {
                        let a = arrival_intensity_exact(&g, &queues, i, d, fb);
                        let b = arrival_intensity_bruteforce(
                            &g,
                            &queues,
                            i,
                            d,
                            fb,
                            DEFAULT_TUPLE_BUDGET,
                        )
                        .unwrap();
                        assert!(
                            (a - b).abs() <= 1e-12,
                            "seed {seed} d {d} fb {fb:?} vertex {i}: exact {a} brute {b}"
                        );
                        checked += 1;
                    }
                }
            }
        }
        assert!(checked > 1000);
    }

    #[test]
    fn conservation_sums_to_n() {
        for seed in 0..20u64 {
            let n = 10 + (seed % 5) as usize;
            let (g, queues) = random_instance(seed, n, 0.3, 4);
            for d in [2usize, 3] {
                for fb in [
                    FallbackPolicy::SelfOnly,
                    FallbackPolicy::ClosedNeighborhoodJsq,
                ] {
                    let total: f64 = (0..n as Vertex)
                        .map(|i| arrival_intensity_exact(&g, &queues, i, d, fb))
                        .sum();
                    assert!(
                        (total - n as f64).abs() <= 1e-9,
                        "seed {seed} d {d} fb {fb:?}: sum {total} != {n}"
                    );
                }
            }
        }
    }

    #[test]
    fn lowering_own_queue_never_decreases_intensity() {
        for seed in 100..130u64 {
            let (g, mut queues) = random_instance(seed, 9, 0.4, 4);
            for d in [2usize, 3] {
                for i in 0..9 as Vertex {
                    if queues[i as usize] == 0 {
                        continue;
                    }
                    let before =
                        arrival_intensity_exact(&g, &queues, i, d, FallbackPolicy::SelfOnly);
                    queues[i as usize] -= 1;
                    let after =
                        arrival_intensity_exact(&g, &queues, i, d, FallbackPolicy::SelfOnly);
                    queues[i as usize] += 1;
                    assert!(
                        after >= before - 1e-12,
                        "seed {seed} d {d} vertex {i}: {before} -> {after}"
                    );
                }
            }
        }
    }

    #[test]
    fn intensity_bounded_by_rho_when_degrees_suffice() {
        for seed in 0..10u64 {
            let (g, queues) = random_instance(seed, 12, 0.6, 3);
            let d = 3;
            if (0..12).any(|i| g.degree(i) < d - 1) {
                continue;
            }
            let rep = crate::graph::regularity_report(&g, d);
            for i in 0..12 as Vertex {
                let c = arrival_intensity_exact(&g, &queues, i, d, FallbackPolicy::SelfOnly);
                let bound = 1.0 + (d - 1) as f64 * rep.rho[i as usize];
                assert!(c >= 0.0 && c <= bound + 1e-12, "C_{i} = {c} > {bound}");
            }
        }
    }

    #[test]
    fn bruteforce_budget_refusal() {
        let g = generate(&GraphFamily::Clique, 30, 0).unwrap();
        let q = vec![0u32; 30];
        let r = arrival_intensity_bruteforce(&g, &q, 0, 4, FallbackPolicy::SelfOnly, 1000);
        assert!(matches!(r, Err(RoutingError::BudgetExceeded { .. })));
    }

    #[test]
    fn directed_intensities_conserve_mass() {
        let g = generate(&GraphFamily::DirectedErrg { p: 0.4 }, 10, 8).unwrap();
        let mut r = rng::master(21);
        let queues: Vec<u32> = (0..10).map(|_| r.gen_range(0..3)).collect();
        for fb in [
            FallbackPolicy::SelfOnly,
            FallbackPolicy::ClosedNeighborhoodJsq,
        ] {
            let total: f64 = (0..10 as Vertex)
                .map(|i| arrival_intensity_exact(&g, &queues, i, 2, fb))
                .sum();
            assert!((total - 10.0).abs() <= 1e-9, "fb {fb:?}: {total}");
            for i in 0..10 as Vertex {
                let a = arrival_intensity_exact(&g, &queues, i, 2, fb);
                let b = arrival_intensity_bruteforce(&g, &queues, i, 2, fb, DEFAULT_TUPLE_BUDGET)
                    .unwrap();
                assert!((a - b).abs() <= 1e-12);
            }
        }
    }
}
