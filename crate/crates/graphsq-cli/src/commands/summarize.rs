use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Parser;
use graphsq::stats::batch_moments;

use crate::config::parse_list;
use crate::csvio::{fmt_f64, CsvTable, CsvWriter};
use crate::{CliError, CliResult};

/// Aggregate per-cell CSV files (same header) into a grouped mean/stderr
/// table, so partial sweeps can be resumed and summarized afterwards.
#[derive(Parser, Debug)]
pub struct Args {
    /// Explicit CSV files.
    #[arg(long, num_args = 1..)]
    inputs: Vec<PathBuf>,
    /// Directory whose *.csv files are all read.
    #[arg(long)]
    dir: Option<PathBuf>,
    /// Comma list of key columns.
    #[arg(long)]
    group_by: String,
    /// Value column to average.
    #[arg(long)]
    value: String,
    /// Output CSV (default: stdout only).
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: Args) -> CliResult<()> {
    let mut files = args.inputs.clone();
    if let Some(dir) = &args.dir {
        let mut from_dir: Vec<PathBuf> = std::fs::read_dir(dir)
            .map_err(|e| CliError::usage(format!("cannot read {}: {e}", dir.display())))?
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|ext| ext == "csv"))
            .collect();
        from_dir.sort();
        files.extend(from_dir);
    }
    if files.is_empty() {
        return Err(CliError::usage("no input files"));
    }
    let group_cols: Vec<String> = parse_list(&args.group_by, "group-by")?;

    let mut groups: BTreeMap<Vec<String>, Vec<f64>> = BTreeMap::new();
    for path in &files {
        let table = CsvTable::read(path)?;
        let key_idx: Vec<usize> = group_cols
            .iter()
            .map(|c| {
                table
                    .column(c)
                    .ok_or_else(|| CliError::usage(format!("{}: no column {c}", path.display())))
            })
            .collect::<CliResult<_>>()?;
        let value_idx = table.column(&args.value).ok_or_else(|| {
            CliError::usage(format!("{}: no column {}", path.display(), args.value))
        })?;
        for row in &table.rows {
            let key: Vec<String> = key_idx.iter().map(|&i| row[i].clone()).collect();
            let v: f64 = row[value_idx]
                .parse()
                .map_err(|_| CliError::usage(format!("bad value {:?}", row[value_idx])))?;
            groups.entry(key).or_default().push(v);
        }
    }

    let header = format!("{},mean,stderr,count", group_cols.join(","));
    println!("{header}");
    let mut out = match &args.out {
        Some(p) => Some(CsvWriter::create(p, &header)?),
        None => None,
    };
    for (key, values) in &groups {
        let m = batch_moments(values);
        let mut fields = key.clone();
        fields.push(fmt_f64(m.mean()));
        fields.push(fmt_f64(m.stderr()));
        fields.push(values.len().to_string());
        println!("{}", fields.join(","));
        if let Some(w) = out.as_mut() {
            w.row(&fields)?;
        }
    }
    if let Some(w) = out {
        w.finish()?;
    }
    Ok(())
}
