use std::path::PathBuf;

use clap::Parser;
use graphsq::coupling::par_map;
use graphsq::graph::{condition1_heuristic, generate, regularity_report};
use graphsq::mean_field::{default_truncation, integrate, l1_distance, OdeSolution};
use graphsq::rng::derive_seed;
use graphsq::sim::{run_sim, SimConfig};
use graphsq::stats::batch_moments;
use serde_json::json;

use super::{map_graph_err, parse_fallback, parse_family, parse_q0, FamilySpec};
use crate::config::{out_dir, parse_list, Resolver};
use crate::csvio::{fmt_f64, CsvWriter};
use crate::manifest::{wall_ms, ManifestWriter};
use crate::{CliError, CliResult};

#[derive(Parser, Debug)]
pub struct Args {
    /// Comma list of family specs, e.g. `clique,circulant-sqrt,cycle`.
    #[arg(long)]
    families: Option<String>,
    /// Comma list of system sizes.
    #[arg(long)]
    n_list: Option<String>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    sample_dt: Option<f64>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    q0: Option<String>,
    #[arg(long)]
    fallback: Option<String>,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

pub fn run(args: Args) -> CliResult<()> {
    let start = std::time::Instant::now();
    let mut r = Resolver::load(args.config.as_deref())?;
    let families_raw: String = r.require(args.families, "families")?;
    let n_list: Vec<usize> = parse_list(&r.require(args.n_list, "n-list")?, "n-list")?;
    let lambda: f64 = r.require(args.lambda, "lambda")?;
    let d: usize = r.get_or(args.d, "d", 2)?;
    let t_end: f64 = r.require(args.t, "t")?;
    let h: f64 = r.get_or(args.h, "h", 1e-3)?;
    let sample_dt: f64 = r.get_or(args.sample_dt, "sample-dt", 0.1)?;
    let reps: usize = r.get_or(args.reps, "reps", 10)?;
    let seed: u64 = r.require(args.seed, "seed")?;
    let q0_raw: String = r.get_or(args.q0, "q0", "empty".into())?;
    let fallback = parse_fallback(&r.get_or(args.fallback, "fallback", "self-only".into())?)?;
    let jobs: usize = r.get_or(args.jobs, "jobs", 1)?;
    let dir = out_dir(args.out_dir);
    r.note("out-dir", dir.display());

    let families: Vec<FamilySpec> = families_raw
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_family(s.trim(), None, None))
        .collect::<CliResult<_>>()?;
    if families.is_empty() || n_list.is_empty() {
        return Err(CliError::usage("need at least one family and one n"));
    }

    let b = default_truncation(lambda.min(0.99), d);
    let jmax = 2 * b;
    let q_init = parse_q0(&q0_raw, jmax)?;
    let ode_init = q_init
        .resize(b)
        .map_err(|e| CliError::usage(format!("initial law exceeds ODE truncation: {e}")))?;
    let sol: OdeSolution = integrate(&ode_init, lambda, d, t_end, h, b)
        .map_err(|e| CliError::runtime(format!("{e}")))?;

    let cells: Vec<(usize, usize)> = (0..families.len())
        .flat_map(|f| (0..n_list.len()).map(move |k| (f, k)))
        .collect();

    let mut manifest = ManifestWriter::create(&dir, "compare", r.effective())?;
    let mut summary = CsvWriter::create(
        &dir.join("compare_summary.csv"),
        "family,n,mean_sup_l1,stderr,reps,d_min,epsilon,condition1",
    )?;
    println!("family,n,avgpath_sup_l1,mean_sup_l1,stderr,condition1");
    for (f, k) in cells {
        let family = &families[f];
        let n = n_list[k];
        let label = family.label();
        let cell_tag = ((f as u64) << 40) | ((k as u64) << 20);
        let results: Vec<CliResult<(f64, Vec<Vec<f64>>, u64)>> = par_map(reps, jobs, |rep| {
            let cell_seed = derive_seed(seed, cell_tag | rep as u64);
            let g = generate(&family.resolve(n), n, derive_seed(cell_seed, 1))
                .map_err(map_graph_err)?;
            let mut cfg = SimConfig::new(
                lambda,
                d,
                t_end,
                sample_dt,
                derive_seed(cell_seed, 2),
                q_init.clone(),
            );
            cfg.jmax = jmax;
            cfg.fallback = fallback;
            let traj = run_sim(&g, &cfg).map_err(|e| CliError::runtime(format!("{e}")))?;
            let sup = traj
                .grid_times
                .iter()
                .zip(&traj.occupancy_series)
                .map(|(t, q)| l1_distance(q, sol.state_at(*t)))
                .fold(0.0, f64::max);
            let series: Vec<Vec<f64>> = traj
                .occupancy_series
                .iter()
                .map(|q| q.as_slice().to_vec())
                .collect();
            Ok((sup, series, traj.event_count))
        });

        let mut sups = Vec::with_capacity(reps);
        let mut all_series = Vec::with_capacity(reps);
        let mut events = 0u64;
        for (rep, res) in results.into_iter().enumerate() {
            let (sup, series, ev) = res?;
            let mut cell = CsvWriter::create(
                &dir.join(format!("compare_cells/{label}_n{n}_r{rep}.csv")),
                "family,n,rep,seed,sup_l1",
            )?;
            cell.row(&[
                label.clone(),
                n.to_string(),
                rep.to_string(),
                derive_seed(seed, cell_tag | rep as u64).to_string(),
                fmt_f64(sup),
            ])?;
            cell.finish()?;
            sups.push(sup);
            all_series.push(series);
            events += ev;
        }
        let m = batch_moments(&sups);
        // distance of the seed-averaged occupancy path from the limit path
        let mut avgpath_sup = 0.0f64;
        for idx in 0..all_series[0].len() {
            let q = sol.state_at(idx as f64 * sample_dt);
            let dist: f64 = (1..=jmax)
                .map(|j| {
                    let avg: f64 =
                        all_series.iter().map(|tr| tr[idx][j]).sum::<f64>() / reps as f64;
                    (avg - q.tail(j)).abs()
                })
                .sum();
            avgpath_sup = avgpath_sup.max(dist);
        }
        let rep_graph = generate(
            &family.resolve(n),
            n,
            derive_seed(derive_seed(seed, cell_tag), 1),
        )
        .map_err(map_graph_err)?;
        let reg = regularity_report(&rep_graph, d);
        let pass = condition1_heuristic(reg.d_min, n);
        let flag = if pass {
            format!("condition1: PASS (d_min={})", reg.d_min)
        } else {
            format!("condition1: FAIL (d_min={})", reg.d_min)
        };
        println!(
            "{label},{n},{avgpath_sup:.6},{:.6},{:.6},{flag}",
            m.mean(),
            m.stderr()
        );
        summary.row(&[
            label.clone(),
            n.to_string(),
            fmt_f64(avgpath_sup),
            fmt_f64(m.mean()),
            fmt_f64(m.stderr()),
            reps.to_string(),
            reg.d_min.to_string(),
            fmt_f64(reg.epsilon),
            (if pass { "PASS" } else { "FAIL" }).to_string(),
        ])?;
        manifest.cell(json!({
            "family": label,
            "n": n,
            "reps": reps,
            "events": events,
            "avgpath_sup_l1": avgpath_sup,
            "mean_sup_l1": m.mean(),
            "wall_ms": wall_ms(start) as u64,
        }))?;
    }
    summary.finish()?;
    manifest.finish()?;
    Ok(())
}
