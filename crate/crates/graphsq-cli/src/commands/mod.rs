pub mod chaos;
pub mod checkgraph;
pub mod compare;
pub mod couple;
pub mod graphgen;
pub mod ode;
pub mod simulate;
pub mod summarize;

use graphsq::graph::{GraphError, RegularityReport};
use graphsq::mean_field::OccupancyVector;
use graphsq::routing::FallbackPolicy;
use graphsq::GraphFamily;

use crate::{CliError, CliResult};

/// Parse a family spec: `clique`, `cycle`, `circulant:<k>`, `circulant-sqrt`
/// (k = ceil(sqrt(n)), resolved per n), `random-regular:<k>`, `errg:<p>`,
/// `directed-errg:<p>`. Bare `circulant`/`random-regular`/`errg` take the
/// parameter from the separate `--k`/`--p` flags.
#[derive(Debug, Clone, PartialEq)]
pub enum FamilySpec {
    Fixed(GraphFamily),
    CirculantSqrt,
}

impl FamilySpec {
    pub fn resolve(&self, n: usize) -> GraphFamily {
        match self {
            FamilySpec::Fixed(f) => f.clone(),
            FamilySpec::CirculantSqrt => GraphFamily::Circulant {
                k: (n as f64).sqrt().ceil() as u32,
            },
        }
    }

    pub fn is_random(&self) -> bool {
        match self {
            FamilySpec::Fixed(f) => f.is_random(),
            FamilySpec::CirculantSqrt => false,
        }
    }

    pub fn label(&self) -> String {
        match self {
            FamilySpec::Fixed(GraphFamily::Clique) => "clique".into(),
            FamilySpec::Fixed(GraphFamily::Cycle) => "cycle".into(),
            FamilySpec::Fixed(GraphFamily::Circulant { k }) => format!("circulant:{k}"),
            FamilySpec::Fixed(GraphFamily::RandomRegular { k }) => format!("random-regular:{k}"),
            FamilySpec::Fixed(GraphFamily::Errg { p }) => format!("errg:{p}"),
            FamilySpec::Fixed(GraphFamily::DirectedErrg { p }) => format!("directed-errg:{p}"),
            FamilySpec::CirculantSqrt => "circulant-sqrt".into(),
        }
    }
}

pub fn parse_family(spec: &str, k: Option<u32>, p: Option<f64>) -> CliResult<FamilySpec> {
    let (name, arg) = match spec.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => (spec, None),
    };
    let parse_k = |raw: Option<&str>| -> CliResult<u32> {
        match (raw, k) {
            (Some(s), _) => s
                .parse()
                .map_err(|_| CliError::usage(format!("bad k in family spec: {s:?}"))),
            (None, Some(k)) => Ok(k),
            (None, None) => Err(CliError::usage(format!("family {name} needs --k"))),
        }
    };
    let parse_p = |raw: Option<&str>| -> CliResult<f64> {
        match (raw, p) {
            (Some(s), _) => s
                .parse()
                .map_err(|_| CliError::usage(format!("bad p in family spec: {s:?}"))),
            (None, Some(p)) => Ok(p),
            (None, None) => Err(CliError::usage(format!("family {name} needs --p"))),
        }
    };
    Ok(match name {
        "clique" => FamilySpec::Fixed(GraphFamily::Clique),
        "cycle" => FamilySpec::Fixed(GraphFamily::Cycle),
        "circulant" => FamilySpec::Fixed(GraphFamily::Circulant { k: parse_k(arg)? }),
        "circulant-sqrt" => FamilySpec::CirculantSqrt,
        "random-regular" => FamilySpec::Fixed(GraphFamily::RandomRegular { k: parse_k(arg)? }),
        "errg" => FamilySpec::Fixed(GraphFamily::Errg { p: parse_p(arg)? }),
        "directed-errg" => FamilySpec::Fixed(GraphFamily::DirectedErrg { p: parse_p(arg)? }),
        other => return Err(CliError::usage(format!("unknown family {other:?}"))),
    })
}

pub fn parse_fallback(raw: &str) -> CliResult<FallbackPolicy> {
    match raw {
        "self-only" => Ok(FallbackPolicy::SelfOnly),
        "closed-jsq" => Ok(FallbackPolicy::ClosedNeighborhoodJsq),
        other => Err(CliError::usage(format!(
            "unknown fallback {other:?} (expected self-only or closed-jsq)"
        ))),
    }
}

/// Parse an initial tail law: `empty`, or a comma list `1,0.9,0.5`.
pub fn parse_q0(raw: &str, b: usize) -> CliResult<OccupancyVector> {
    if raw == "empty" {
        return Ok(OccupancyVector::empty_system(b));
    }
    let vals: Vec<f64> = crate::config::parse_list(raw, "q0")?;
    let q = OccupancyVector::new(vals)
        .map_err(|e| CliError::usage(format!("bad initial tail law: {e}")))?;
    q.resize(b.max(q.truncation()))
        .map_err(|e| CliError::usage(format!("bad initial tail law: {e}")))
}

/// Generator failures: bad parameters are usage errors, exhausted retry
/// budgets are model errors.
pub fn map_graph_err(e: GraphError) -> CliError {
    match e {
        GraphError::RetryBudgetExhausted(_) | GraphError::Io(_) => {
            CliError::runtime(format!("{e}"))
        }
        other => CliError::usage(format!("{other}")),
    }
}

pub fn report_lines(rep: &RegularityReport, n: usize, directed: bool, edges: usize) -> Vec<String> {
    let verdict = if graphsq::graph::condition1_heuristic(rep.d_min, n) {
        format!(
            "condition1: PASS (d_min={}, epsilon={:.6})",
            rep.d_min, rep.epsilon
        )
    } else {
        format!("condition1: FAIL (d_min={})", rep.d_min)
    };
    vec![
        format!("vertices={n} edges={edges} directed={}", u8::from(directed)),
        format!(
            "d_min={} d_max={} epsilon={:.6} isolated={} below_d={}",
            rep.d_min, rep.d_max, rep.epsilon, rep.isolated_count, rep.below_d_count
        ),
        verdict,
    ]
}
