use std::path::PathBuf;

use clap::Parser;
use graphsq::coupling::{chaos_covariance, chaos_covariance_mkv};
use graphsq::graph::{generate, read_edgelist, Graph};
use graphsq::mean_field::{default_truncation, integrate};
use graphsq::sim::SimConfig;
use graphsq::Vertex;
use serde_json::json;

use super::{map_graph_err, parse_family, parse_q0};
use crate::config::{out_dir, Resolver};
use crate::csvio::{fmt_f64, CsvWriter};
use crate::manifest::{wall_ms, ManifestWriter};
use crate::{CliError, CliResult};

#[derive(Parser, Debug)]
pub struct Args {
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
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    q0: Option<String>,
    /// Colon-separated pairs, comma list: `0:1,2:3`.
    #[arg(long)]
    pairs: Option<String>,
    /// Functional threshold: f = 1{x >= threshold}.
    #[arg(long)]
    threshold: Option<u32>,
    /// Estimate the control covariance from independent limit-process
    /// replications instead of the N-system (truth is exactly zero).
    #[arg(long)]
    mkv_control: bool,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

fn parse_pairs(raw: &str) -> CliResult<Vec<(Vertex, Vertex)>> {
    raw.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            let (a, b) = s
                .trim()
                .split_once(':')
                .ok_or_else(|| CliError::usage(format!("bad pair {s:?}, expected i:j")))?;
            let parse = |v: &str| {
                v.parse::<Vertex>()
                    .map_err(|_| CliError::usage(format!("bad vertex {v:?}")))
            };
            Ok((parse(a)?, parse(b)?))
        })
        .collect()
}

pub fn run(args: Args) -> CliResult<()> {
    let start = std::time::Instant::now();
    let mut r = Resolver::load(args.config.as_deref())?;
    let lambda: f64 = r.require(args.lambda, "lambda")?;
    let d: usize = r.get_or(args.d, "d", 2)?;
    let t_end: f64 = r.require(args.t, "t")?;
    let reps: usize = r.require(args.reps, "reps")?;
    let seed: u64 = r.require(args.seed, "seed")?;
    let q0_raw: String = r.get_or(args.q0, "q0", "empty".into())?;
    let threshold: u32 = r.get_or(args.threshold, "threshold", 1)?;
    let jobs: usize = r.get_or(args.jobs, "jobs", 1)?;
    r.note("mkv-control", args.mkv_control);
    let dir = out_dir(args.out_dir);
    r.note("out-dir", dir.display());

    let jmax = 2 * default_truncation(lambda.min(0.99), d);
    let q_init = parse_q0(&q0_raw, jmax)?;

    let rows = if args.mkv_control {
        let b = default_truncation(lambda.min(0.99), d);
        let ode_init = q_init
            .resize(b)
            .map_err(|e| CliError::usage(format!("{e}")))?;
        let sol = integrate(&ode_init, lambda, d, t_end, 1e-3, b)
            .map_err(|e| CliError::runtime(format!("{e}")))?;
        vec![chaos_covariance_mkv(
            &sol, lambda, d, t_end, &ode_init, threshold, reps, seed, jobs,
        )
        .map_err(|e| CliError::runtime(format!("{e}")))?]
    } else {
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
        let pairs = parse_pairs(&r.require(args.pairs, "pairs")?)?;
        if pairs.is_empty() {
            return Err(CliError::usage("need at least one pair"));
        }
        if let Some(&(a, b)) = pairs
            .iter()
            .find(|&&(a, b)| a as usize >= g.n_vertices() || b as usize >= g.n_vertices())
        {
            return Err(CliError::usage(format!(
                "pair {a}:{b} out of range (n = {})",
                g.n_vertices()
            )));
        }
        let mut cfg = SimConfig::new(lambda, d, t_end, t_end, 0, q_init);
        cfg.jmax = jmax;
        chaos_covariance(&g, &cfg, &pairs, threshold, reps, seed, jobs)
            .map_err(|e| CliError::runtime(format!("{e}")))?
    };

    let mut csv = CsvWriter::create(&dir.join("chaos.csv"), "i,j,cov,stderr,reps")?;
    println!("i,j,cov,stderr,reps");
    for row in &rows {
        let fields = [
            row.i.to_string(),
            row.j.to_string(),
            fmt_f64(row.cov),
            fmt_f64(row.stderr),
            row.reps.to_string(),
        ];
        println!("{}", fields.join(","));
        csv.row(&fields)?;
    }
    csv.finish()?;

    let mut manifest = ManifestWriter::create(&dir, "chaos", r.effective())?;
    manifest.cell(json!({
        "reps": reps,
        "seed": seed,
        "mkv_control": args.mkv_control,
        "wall_ms": wall_ms(start) as u64,
    }))?;
    manifest.finish()?;
    Ok(())
}
