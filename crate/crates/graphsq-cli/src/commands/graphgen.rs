use std::path::PathBuf;

use clap::Parser;
use graphsq::graph::{
    generate_with_budget, regularity_report, write_edgelist, DEFAULT_RESTART_BUDGET,
};

use super::{map_graph_err, parse_family, report_lines};
use crate::config::Resolver;
use crate::{CliError, CliResult};

#[derive(Parser, Debug)]
pub struct Args {
    /// clique | cycle | circulant[:k] | circulant-sqrt | random-regular[:k] | errg[:p] | directed-errg[:p]
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<u32>,
    #[arg(long)]
    p: Option<f64>,
    /// Required for random families; never defaulted.
    #[arg(long)]
    seed: Option<u64>,
    /// Routing parameter used by the below_d report column.
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    restart_budget: Option<u32>,
    /// Edge-list output path.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

pub fn run(args: Args) -> CliResult<()> {
    let mut r = Resolver::load(args.config.as_deref())?;
    let family_raw: String = r.require(args.family, "family")?;
    let n: usize = r.require(args.n, "n")?;
    let k = r.get(args.k, "k")?;
    let p = r.get(args.p, "p")?;
    let d: usize = r.get_or(args.d, "d", 2)?;
    let budget: u32 = r.get_or(
        args.restart_budget,
        "restart-budget",
        DEFAULT_RESTART_BUDGET,
    )?;
    let out: PathBuf = r
        .require(args.out.map(|p| p.display().to_string()), "out")
        .map(PathBuf::from)?;

    let family = parse_family(&family_raw, k, p)?;
    let seed = if family.is_random() {
        r.require(args.seed, "seed")?
    } else {
        r.get_or(args.seed, "seed", 0)?
    };
    let g = generate_with_budget(&family.resolve(n), n, seed, budget).map_err(map_graph_err)?;

    if let Some(parent) = out.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut file = std::io::BufWriter::new(
        std::fs::File::create(&out)
            .map_err(|e| CliError::runtime(format!("cannot create {}: {e}", out.display())))?,
    );
    write_edgelist(&g, &mut file)?;
    use std::io::Write;
    file.flush()?;

    let rep = regularity_report(&g, d);
    for line in report_lines(&rep, n, g.is_directed(), g.edge_count()) {
        println!("{line}");
    }
    Ok(())
}
