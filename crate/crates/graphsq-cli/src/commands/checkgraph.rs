use std::path::PathBuf;

use clap::Parser;
use graphsq::graph::{read_edgelist, regularity_report};

use super::report_lines;
use crate::{CliError, CliResult};

#[derive(Parser, Debug)]
pub struct Args {
    /// Edge-list file to validate.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = 2)]
    d: usize,
}

pub fn run(args: Args) -> CliResult<()> {
    let file = std::fs::File::open(&args.input)
        .map_err(|e| CliError::usage(format!("cannot open {}: {e}", args.input.display())))?;
    let g = read_edgelist(std::io::BufReader::new(file))
        .map_err(|e| CliError::usage(format!("{}: {e}", args.input.display())))?;
    let rep = regularity_report(&g, args.d);
    for line in report_lines(&rep, g.n_vertices(), g.is_directed(), g.edge_count()) {
        println!("{line}");
    }
    Ok(())
}
