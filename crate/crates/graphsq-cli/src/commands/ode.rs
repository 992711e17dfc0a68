use std::path::PathBuf;

use clap::Parser;
use graphsq::mean_field::{default_truncation, fixed_point, integrate, l1_distance};
use serde_json::json;

use super::parse_q0;
use crate::config::{out_dir, Resolver};
use crate::csvio::{fmt_f64, CsvWriter};
use crate::manifest::{wall_ms, ManifestWriter};
use crate::{CliError, CliResult};

#[derive(Parser, Debug)]
pub struct Args {
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    t: Option<f64>,
    /// Integration step.
    #[arg(long)]
    h: Option<f64>,
    /// Truncation level (default: analytic level for lambda, d).
    #[arg(long)]
    b: Option<usize>,
    /// Initial condition: `empty`, `fixed-point`, or a comma tail list.
    #[arg(long)]
    init: Option<String>,
    /// Thin the exported grid to roughly this spacing (default: every step).
    #[arg(long)]
    out_dt: Option<f64>,
    /// Truncation-health threshold; exceeding it records a warning.
    #[arg(long)]
    tail_warn: Option<f64>,
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
    let t_end: f64 = r.require(args.t, "t")?;
    let h: f64 = r.get_or(args.h, "h", 1e-3)?;
    let b: usize = r.get_or(args.b, "b", default_truncation(lambda.min(0.99), d))?;
    let init: String = r.get_or(args.init, "init", "empty".into())?;
    let out_dt: f64 = r.get_or(args.out_dt, "out-dt", h)?;
    let tail_warn: f64 = r.get_or(args.tail_warn, "tail-warn", 1e-8)?;
    let dir = out_dir(args.out_dir);
    r.note("out-dir", dir.display());

    let qstar = if lambda < 1.0 {
        Some(fixed_point(lambda, d, b).map_err(|e| CliError::usage(format!("{e}")))?)
    } else {
        None
    };
    let q0 = match init.as_str() {
        "fixed-point" => qstar.clone().ok_or_else(|| {
            CliError::usage(format!("fixed point needs lambda < 1, got {lambda}"))
        })?,
        other => parse_q0(other, b)?,
    };

    let sol =
        integrate(&q0, lambda, d, t_end, h, b).map_err(|e| CliError::runtime(format!("{e}")))?;

    let mut csv = CsvWriter::create(&dir.join("ode.csv"), "t,j,q_j")?;
    let stride = (out_dt / sol.h).round().max(1.0) as usize;
    for (idx, (t, q)) in sol.times.iter().zip(sol.states()).enumerate() {
        if idx % stride != 0 && idx != sol.times.len() - 1 {
            continue;
        }
        for (j, &v) in q.as_slice().iter().enumerate() {
            csv.row(&[fmt_f64(*t), j.to_string(), fmt_f64(v)])?;
        }
    }
    csv.finish()?;

    if let Some(qstar) = &qstar {
        let mut csv = CsvWriter::create(&dir.join("fixed_point.csv"), "j,q_star")?;
        for (j, &v) in qstar.as_slice().iter().enumerate() {
            csv.row(&[j.to_string(), fmt_f64(v)])?;
        }
        csv.finish()?;
    }

    let truncation_warning = sol.tail_mass_max > tail_warn;
    let mut manifest = ManifestWriter::create(&dir, "ode", r.effective())?;
    manifest.cell(json!({
        "steps": sol.times.len() - 1,
        "h": sol.h,
        "tail_mass_max": sol.tail_mass_max,
        "truncation_warning": truncation_warning,
        "wall_ms": wall_ms(start) as u64,
    }))?;
    manifest.finish()?;

    if truncation_warning {
        eprintln!(
            "warning: tail_mass_max = {} exceeds {tail_warn}; raise --b",
            sol.tail_mass_max
        );
    }
    if init == "fixed-point" {
        let drift = sol
            .states()
            .iter()
            .map(|s| l1_distance(s, &q0))
            .fold(0.0, f64::max);
        println!("fixed-point drift sup_l1={}", fmt_f64(drift));
    }
    println!(
        "integrated t={t_end} steps={} tail_mass_max={}",
        sol.times.len() - 1,
        fmt_f64(sol.tail_mass_max)
    );
    Ok(())
}
