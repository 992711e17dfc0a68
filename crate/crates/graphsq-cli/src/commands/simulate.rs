use std::path::PathBuf;

use clap::Parser;
use graphsq::graph::{generate, read_edgelist, Graph};
use graphsq::mean_field::default_truncation;
use graphsq::sim::{run_sim, SimConfig};
use graphsq::Vertex;
use serde_json::json;

use super::{map_graph_err, parse_fallback, parse_family, parse_q0};
use crate::config::{out_dir, parse_list, Resolver};
use crate::csvio::{fmt_f64, CsvWriter};
use crate::manifest::{wall_ms, ManifestWriter};
use crate::{CliError, CliResult};

#[derive(Parser, Debug)]
pub struct Args {
    /// Read the topology from an edge-list file instead of generating it.
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<u32>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    graph_seed: Option<u64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    sample_dt: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    jmax: Option<usize>,
    /// self-only | closed-jsq
    #[arg(long)]
    fallback: Option<String>,
    /// Initial tail law: `empty` or a comma list starting with 1.
    #[arg(long)]
    q0: Option<String>,
    /// Comma list of servers whose full paths are exported.
    #[arg(long)]
    tagged: Option<String>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

pub fn run(args: Args) -> CliResult<()> {
    let start = std::time::Instant::now();
    let mut r = Resolver::load(args.config.as_deref())?;
    let lambda: f64 = r.require(args.lambda, "lambda")?;
    let d: usize = r.get_or(args.d, "d", 2)?;
    let horizon: f64 = r.require(args.t, "t")?;
    let sample_dt: f64 = r.get_or(args.sample_dt, "sample-dt", 0.1)?;
    let seed: u64 = r.require(args.seed, "seed")?;
    // truncate sim occupancy at twice the analytic level so the sim side is
    // never the first to clip in sim/limit comparisons
    let default_jmax = 2 * default_truncation(lambda.min(0.99), d);
    let jmax: usize = r.get_or(args.jmax, "jmax", default_jmax)?;
    let fallback = parse_fallback(&r.get_or(args.fallback, "fallback", "self-only".into())?)?;
    let q0_raw: String = r.get_or(args.q0, "q0", "empty".into())?;
    let dir = out_dir(args.out_dir);
    r.note("out-dir", dir.display());

    let g: Graph = if let Some(path) = &args.graph {
        r.note("graph", path.display());
        let file = std::fs::File::open(path)
            .map_err(|e| CliError::usage(format!("cannot open {}: {e}", path.display())))?;
        read_edgelist(std::io::BufReader::new(file))
            .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?
    } else {
        let family_raw: String = r.require(args.family, "family")?;
        let n: usize = r.require(args.n, "n")?;
        let family = parse_family(&family_raw, r.get(args.k, "k")?, r.get(args.p, "p")?)?;
        let gseed = if family.is_random() {
            r.require(args.graph_seed, "graph-seed")?
        } else {
            r.get_or(args.graph_seed, "graph-seed", 0)?
        };
        generate(&family.resolve(n), n, gseed).map_err(map_graph_err)?
    };

    let q_init = parse_q0(&q0_raw, jmax)?;
    let tagged: Vec<Vertex> = match r.get(args.tagged, "tagged")? {
        Some(raw) => parse_list(&raw, "tagged")?,
        None => Vec::new(),
    };

    let mut cfg = SimConfig::new(lambda, d, horizon, sample_dt, seed, q_init);
    cfg.fallback = fallback;
    cfg.jmax = jmax;
    cfg.tagged = tagged;
    let traj = run_sim(&g, &cfg).map_err(|e| CliError::runtime(format!("{e}")))?;

    let mut occ = CsvWriter::create(&dir.join("occupancy.csv"), "t,j,q_j")?;
    for (t, q) in traj.grid_times.iter().zip(&traj.occupancy_series) {
        for (j, &v) in q.as_slice().iter().enumerate() {
            occ.row(&[fmt_f64(*t), j.to_string(), fmt_f64(v)])?;
        }
    }
    occ.finish()?;
    if !cfg.tagged.is_empty() {
        let mut tp = CsvWriter::create(&dir.join("tagged.csv"), "server,t,x")?;
        for path in &traj.tagged_paths {
            for &(t, x) in &path.points {
                tp.row(&[path.server.to_string(), fmt_f64(t), x.to_string()])?;
            }
        }
        tp.finish()?;
    }

    let mut manifest = ManifestWriter::create(&dir, "simulate", r.effective())?;
    manifest.cell(json!({
        "seed": seed,
        "n": g.n_vertices(),
        "events": traj.event_count,
        "wall_ms": wall_ms(start) as u64,
    }))?;
    manifest.finish()?;
    println!(
        "simulated n={} events={} final_q1={}",
        g.n_vertices(),
        traj.event_count,
        traj.occupancy_series.last().map_or(0.0, |q| q.tail(1))
    );
    Ok(())
}
