use std::path::PathBuf;

use clap::Parser;
use graphsq::coupling::{rate_sweep, PnSpec, SweepConfig, SweepFamily};
use graphsq::mean_field::default_truncation;
use graphsq::routing::FallbackPolicy;
use serde_json::json;

use super::parse_q0;
use crate::config::{out_dir, parse_list, Resolver};
use crate::csvio::{fmt_f64, CsvWriter};
use crate::manifest::{wall_ms, ManifestWriter};
use crate::{CliError, CliResult};

#[derive(Parser, Debug)]
pub struct Args {
    /// `errg` or `clique`.
    #[arg(long)]
    family: Option<String>,
    /// Connection-probability schedule for errg: `n^-1/2`, `log^2/n`,
    /// or `const:<p>`.
    #[arg(long)]
    pn: Option<String>,
    #[arg(long)]
    n_list: Option<String>,
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
    /// Exchangeable servers tagged per replication.
    #[arg(long)]
    tagged_count: Option<usize>,
    /// Reuse one graph per size (quenched-style) instead of resampling.
    #[arg(long)]
    freeze_graph: bool,
    #[arg(long)]
    redraw_budget: Option<u32>,
    #[arg(long)]
    ode_h: Option<f64>,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

pub fn parse_pn(raw: &str) -> CliResult<PnSpec> {
    match raw {
        "n^-1/2" | "inv-sqrt" => Ok(PnSpec::InvSqrt),
        "log^2/n" | "log2/n" => Ok(PnSpec::LogSqOverN),
        other => match other.strip_prefix("const:") {
            Some(p) => Ok(PnSpec::Const(p.parse().map_err(|_| {
                CliError::usage(format!("bad const probability {p:?}"))
            })?)),
            None => Err(CliError::usage(format!("unknown pn schedule {other:?}"))),
        },
    }
}

pub fn run(args: Args) -> CliResult<()> {
    let start = std::time::Instant::now();
    let mut r = Resolver::load(args.config.as_deref())?;
    let family_raw: String = r.require(args.family, "family")?;
    let n_list: Vec<usize> = parse_list(&r.require(args.n_list, "n-list")?, "n-list")?;
    let lambda: f64 = r.require(args.lambda, "lambda")?;
    let d: usize = r.get_or(args.d, "d", 2)?;
    let t_end: f64 = r.require(args.t, "t")?;
    let reps: usize = r.require(args.reps, "reps")?;
    let seed: u64 = r.require(args.seed, "seed")?;
    let q0_raw: String = r.get_or(args.q0, "q0", "empty".into())?;
    let tagged_count: usize = r.get_or(args.tagged_count, "tagged-count", 16)?;
    let redraw_budget: u32 = r.get_or(args.redraw_budget, "redraw-budget", 100)?;
    let ode_h: f64 = r.get_or(args.ode_h, "ode-h", 1e-3)?;
    let jobs: usize = r.get_or(args.jobs, "jobs", 1)?;
    r.note("freeze-graph", args.freeze_graph);
    let dir = out_dir(args.out_dir);
    r.note("out-dir", dir.display());

    let family = match family_raw.as_str() {
        "clique" => SweepFamily::Clique,
        "errg" => {
            let pn_raw: String = r.require(args.pn, "pn")?;
            SweepFamily::Errg {
                pn: parse_pn(&pn_raw)?,
            }
        }
        other => {
            return Err(CliError::usage(format!(
                "couple supports clique or errg, got {other:?}"
            )))
        }
    };
    if lambda >= 1.0 {
        return Err(CliError::usage(format!(
            "coupling sweeps need lambda < 1 for the limit truncation, got {lambda}"
        )));
    }
    let ode_b = default_truncation(lambda, d);
    let cfg = SweepConfig {
        lambda,
        d,
        t_end,
        q_init: parse_q0(&q0_raw, ode_b)?,
        fallback: FallbackPolicy::SelfOnly,
        tagged_count,
        freeze_graph: args.freeze_graph,
        redraw_budget,
        ode_h,
        ode_b,
        jobs,
    };
    let rows = rate_sweep(&family, &n_list, &cfg, reps, seed)
        .map_err(|e| CliError::runtime(format!("{e}")))?;

    let mut csv = CsvWriter::create(&dir.join("rate_sweep.csv"), "n,p,mean_sup2,stderr,product")?;
    println!("n,p,mean_sup2,stderr,product");
    let mut manifest = ManifestWriter::create(&dir, "couple", r.effective())?;
    for row in &rows {
        let fields = [
            row.n.to_string(),
            fmt_f64(row.p),
            fmt_f64(row.mean_sup2),
            fmt_f64(row.stderr),
            fmt_f64(row.product),
        ];
        println!("{}", fields.join(","));
        csv.row(&fields)?;
        manifest.cell(json!({
            "n": row.n,
            "p": row.p,
            "reps": row.replications,
            "redraws": row.redraws,
            "freeze_graph": args.freeze_graph,
            "wall_ms": wall_ms(start) as u64,
        }))?;
    }
    csv.finish()?;
    manifest.finish()?;
    Ok(())
}
