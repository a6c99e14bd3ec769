//! `discrim`: batch runs of the discrimination experiments.
//!
//! Exit codes: 0 success, 1 a checked inequality or certificate failed,
//! 2 bad input, 3 budget exceeded (partial output is still written).

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use discrim_core::bigpowers::{certify, threshold_report, PaddedWordSpec};
use discrim_core::eoc::{EocGroup, EocSpec};
use discrim_core::retraction::{compose_chain, crosscheck, minimal_discriminating_p, SearchOptions};
use discrim_core::zdiscrim::{sandwich_row, BallShape, BallSpec};
use discrim_core::Error;
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use output::{render, write_atomic, Format};

#[derive(Parser)]
#[command(name = "discrim", version, about = "Discriminating complexity experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Serialize)]
struct Common {
    /// Output file; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Enumeration cap; its meaning depends on the command.
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Shape {
    L1,
    Box,
}

#[derive(Subcommand)]
enum Command {
    /// Lower bound, exact minimum and θ upper bound for Z^n.
    Zn {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        rmax: u32,
        #[arg(long, value_enum, default_value = "l1")]
        shape: Shape,
        #[command(flatten)]
        common: Common,
    },
    /// Threshold and certification for a padded word spec.
    Bigpowers {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
        #[command(flatten)]
        common: Common,
    },
    /// p_min and complexity for R = 0..=rmax.
    Curve {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        rmax: u32,
        /// 1-based stage for the per-stage columns.
        #[arg(long, default_value_t = 1)]
        stage: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Normal form against retraction on every raw word.
    Crosscheck {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        r: u32,
        /// Longest raw word; defaults to 2R.
        #[arg(long)]
        len: Option<usize>,
        /// Force this p for every stage instead of searching.
        #[arg(long)]
        p: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Ball sizes for R = 0..=rmax.
    Ball {
        #[arg(long, conflicts_with = "rank", required_unless_present = "rank")]
        spec: Option<PathBuf>,
        /// Free group of this rank, no stages.
        #[arg(long)]
        rank: Option<u32>,
        #[arg(long)]
        rmax: u32,
        #[command(flatten)]
        common: Common,
    },
}

const EXIT_VIOLATION: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_BUDGET: u8 = 3;

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::BudgetExceeded { .. } | Error::Overflow(_)) => EXIT_BUDGET,
        Some(Error::Counterexample { .. }) => EXIT_VIOLATION,
        Some(Error::NoSolutionWithinBound { .. }) => EXIT_BUDGET,
        _ => EXIT_INPUT,
    }
}

fn wall_ms(start: Instant) -> u64 {
    start.elapsed().as_millis() as u64
}

fn read_toml<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn load_group(path: &Path) -> Result<EocGroup> {
    let spec: EocSpec = read_toml(path)?;
    Ok(EocGroup::new(spec)?)
}

#[derive(Serialize)]
struct Config<'a, P: Serialize> {
    command: &'a str,
    #[serde(flatten)]
    params: P,
    budget: Option<u64>,
    seed: u64,
}

fn emit<P: Serialize, T: Serialize>(common: &Common, command: &str, params: P, rows: &[T]) -> Result<()> {
    let config = Config {
        command,
        params,
        budget: common.budget,
        seed: common.seed,
    };
    let bytes = render(common.format, &config, common.seed, rows)?;
    write_atomic(common.out.as_deref(), &bytes)
}

/// Writes what was produced, then turns a budget error into exit code 3.
fn finish<P: Serialize, T: Serialize>(
    common: &Common,
    command: &str,
    params: P,
    rows: &[T],
    violation: bool,
    stopped: Option<anyhow::Error>,
) -> Result<u8> {
    emit(common, command, params, rows)?;
    if let Some(e) = stopped {
        eprintln!("discrim: stopped early: {e:#}");
        return Ok(exit_code(&e));
    }
    Ok(if violation { EXIT_VIOLATION } else { 0 })
}

#[derive(Serialize)]
struct ZnRow {
    n: usize,
    #[serde(rename = "R")]
    r: u32,
    lower_bound_num: String,
    lower_bound_den: String,
    exact_min: u64,
    theta_upper: String,
    wall_ms: u64,
}

fn cmd_zn(n: usize, rmax: u32, shape: Shape, common: &Common) -> Result<u8> {
    let cap = common.budget.map_or(10_000_000_000, u128::from);
    let mut rows = Vec::new();
    let mut violation = false;
    let mut stopped = None;
    for r in 0..=rmax {
        let ball = match shape {
            Shape::L1 => BallSpec::l1(r),
            Shape::Box => BallSpec::boxed(r),
        };
        let start = Instant::now();
        match sandwich_row(n, ball, cap) {
            Ok(row) => {
                violation |= !row.holds();
                rows.push(ZnRow {
                    n,
                    r,
                    exact_min: row.exact_min,
                    lower_bound_num: row.lower_bound_num,
                    lower_bound_den: row.lower_bound_den,
                    theta_upper: row.theta_upper,
                    wall_ms: wall_ms(start),
                });
            }
            Err(e @ Error::BudgetExceeded { .. }) => {
                stopped = Some(e.into());
                break;
            }
            Err(e) => return Err(e.into()),
        }
    }
    let shape_name = match shape {
        Shape::L1 => BallShape::L1,
        Shape::Box => BallShape::Box,
    };
    let params = serde_json::json!({ "n": n, "rmax": rmax, "shape": shape_name });
    finish(common, "zn", params, &rows, violation, stopped)
}

#[derive(Serialize)]
struct BigpowersRow {
    u: String,
    gs: String,
    left_flank: String,
    right_flank: String,
    threshold: u64,
    block_bound: u64,
    flank_bound: String,
    offsets: String,
    samples: u64,
    sweep_radius: u64,
    sweep_count: u64,
    trivializing: String,
    status: String,
    wall_ms: u64,
}

fn join<T: ToString>(xs: impl IntoIterator<Item = T>, sep: &str) -> String {
    xs.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(sep)
}

fn cmd_bigpowers(path: &Path, samples: u64, common: &Common) -> Result<u8> {
    let spec: PaddedWordSpec = read_toml(path)?;
    let start = Instant::now();
    let report = threshold_report(&spec)?;
    let sweep_cap = common.budget.unwrap_or(8);
    let (status, sweep, violation) = match certify(&spec, report.threshold, samples, common.seed, sweep_cap) {
        Ok(c) => ("pass".to_string(), Some(c), false),
        Err(e @ Error::Counterexample { .. }) => (e.to_string(), None, true),
        Err(e) => return Err(e.into()),
    };
    let word = |w: &Option<discrim_core::freewords::ReducedWord>| w.as_ref().map(|w| w.to_string()).unwrap_or_default();
    let row = BigpowersRow {
        u: spec.u.to_string(),
        gs: join(&spec.gs, ";"),
        left_flank: word(&spec.left_flank),
        right_flank: word(&spec.right_flank),
        threshold: report.threshold,
        block_bound: report.block_bound,
        flank_bound: report.flank_bound.map(|b| b.to_string()).unwrap_or_default(),
        offsets: join(&report.symbolic.offsets, " "),
        samples,
        sweep_radius: sweep.as_ref().map_or(0, |c| c.sweep_radius),
        sweep_count: sweep.as_ref().map_or(0, |c| c.sweep_count),
        trivializing: sweep
            .as_ref()
            .map(|c| join(c.trivializing.iter().map(|r| join(r, " ")), ";"))
            .unwrap_or_default(),
        status,
        wall_ms: wall_ms(start),
    };
    let params = serde_json::json!({ "spec": spec, "samples": samples, "sweep_cap": sweep_cap });
    finish(common, "bigpowers", params, &[row], violation, None)
}

#[derive(Serialize)]
struct CurveRow {
    #[serde(rename = "R")]
    r: u32,
    p_min: u64,
    complexity: u64,
    lower_bound_num: String,
    lower_bound_den: String,
    ball_size: usize,
    wall_ms: u64,
}

#[derive(Serialize)]
struct ChainRow {
    #[serde(rename = "R")]
    r: u32,
    p_min: u64,
    complexity: u64,
    lower_bound_num: String,
    lower_bound_den: String,
    ball_size: usize,
    chain_p: String,
    chain_complexity: u64,
    stage_product: u64,
    submultiplicative: bool,
    wall_ms: u64,
}

fn cmd_curve(path: &Path, rmax: u32, stage: usize, common: &Common) -> Result<u8> {
    let group = load_group(path)?;
    if stage == 0 || stage > group.stage_count() {
        anyhow::bail!("stage {stage} out of range: the group has {} stage(s)", group.stage_count());
    }
    let opts = SearchOptions {
        ball_cap: common.budget.map_or(10_000_000_000, u128::from),
        ..SearchOptions::default()
    };
    let multi = group.stage_count() > 1;
    let mut rows = Vec::new();
    let mut chain_rows = Vec::new();
    let mut violation = false;
    let mut stopped = None;
    let mut prev = 0;
    for r in 0..=rmax {
        let start = Instant::now();
        let step = minimal_discriminating_p(&group, stage - 1, r, opts).and_then(|rec| {
            let chain = if multi { Some(compose_chain(&group, r, opts)?) } else { None };
            Ok((rec, chain))
        });
        let (rec, chain) = match step {
            Ok(x) => x,
            Err(e @ (Error::BudgetExceeded { .. } | Error::NoSolutionWithinBound { .. })) => {
                stopped = Some(e.into());
                break;
            }
            Err(e) => return Err(e.into()),
        };
        let c = BigRational::from_integer(rec.complexity.into());
        violation |= rec.lower_bound > BigRational::zero() && c < rec.lower_bound;
        violation |= rec.complexity < prev;
        prev = rec.complexity;
        let row = CurveRow {
            r,
            p_min: rec.p_min,
            complexity: rec.complexity,
            lower_bound_num: rec.lower_bound.numer().to_string(),
            lower_bound_den: rec.lower_bound.denom().to_string(),
            ball_size: rec.ball_size,
            wall_ms: wall_ms(start),
        };
        match chain {
            Some(ch) => {
                violation |= !ch.submultiplicative() || !ch.injective;
                chain_rows.push(ChainRow {
                    r,
                    p_min: row.p_min,
                    complexity: row.complexity,
                    lower_bound_num: row.lower_bound_num,
                    lower_bound_den: row.lower_bound_den,
                    ball_size: row.ball_size,
                    chain_p: join(ch.steps.iter().map(|s| s.p), ";"),
                    chain_complexity: ch.complexity,
                    stage_product: ch.stage_product,
                    submultiplicative: ch.submultiplicative(),
                    wall_ms: wall_ms(start),
                });
            }
            None => rows.push(row),
        }
    }
    let params = serde_json::json!({ "spec": group.spec(), "rmax": rmax, "stage": stage });
    if multi {
        finish(common, "curve", params, &chain_rows, violation, stopped)
    } else {
        finish(common, "curve", params, &rows, violation, stopped)
    }
}

#[derive(Serialize)]
struct CrosscheckRow {
    #[serde(rename = "R")]
    r: u32,
    max_len: usize,
    exponents: String,
    words: u64,
    disagreements: u64,
    examples: String,
    wall_ms: u64,
}

fn cmd_crosscheck(path: &Path, r: u32, len: Option<usize>, p: Option<u64>, common: &Common) -> Result<u8> {
    let group = load_group(path)?;
    let max_len = len.unwrap_or(2 * r as usize);
    let opts = SearchOptions {
        ball_cap: common.budget.map_or(100_000_000, u128::from),
        ..SearchOptions::default()
    };
    let start = Instant::now();
    let rep = crosscheck(&group, r, max_len, p, opts)?;
    let row = CrosscheckRow {
        r,
        max_len,
        exponents: join(rep.exponents.iter().map(|e| join(e, " ")), ";"),
        words: rep.words,
        disagreements: rep.disagreements,
        examples: join(&rep.examples, ";"),
        wall_ms: wall_ms(start),
    };
    let params = serde_json::json!({ "spec": group.spec(), "r": r, "len": max_len, "p": p });
    finish(common, "crosscheck", params, &[row], rep.disagreements > 0, None)
}

#[derive(Serialize)]
struct BallRow {
    #[serde(rename = "R")]
    r: u32,
    ball_size: usize,
    wall_ms: u64,
}

fn cmd_ball(spec: Option<&Path>, rank: Option<u32>, rmax: u32, common: &Common) -> Result<u8> {
    let group = match (spec, rank) {
        (Some(p), _) => load_group(p)?,
        (None, Some(k)) => EocGroup::new(EocSpec {
            free_rank: k,
            stages: vec![],
        })?,
        (None, None) => anyhow::bail!("either --spec or --rank is required"),
    };
    let cap = common.budget.map_or(10_000_000_000, u128::from);
    let mut rows = Vec::new();
    let mut stopped = None;
    for r in 0..=rmax {
        let start = Instant::now();
        match group.enumerate_ball(r, cap) {
            Ok(b) => rows.push(BallRow {
                r,
                ball_size: b.len(),
                wall_ms: wall_ms(start),
            }),
            Err(e) => {
                stopped = Some(e.into());
                break;
            }
        }
    }
    let params = serde_json::json!({ "spec": group.spec(), "rmax": rmax });
    finish(common, "ball", params, &rows, false, stopped)
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Zn { n, rmax, shape, common } => cmd_zn(n, rmax, shape, &common),
        Command::Bigpowers { spec, samples, common } => cmd_bigpowers(&spec, samples, &common),
        Command::Curve { spec, rmax, stage, common } => cmd_curve(&spec, rmax, stage, &common),
        Command::Crosscheck { spec, r, len, p, common } => cmd_crosscheck(&spec, r, len, p, &common),
        Command::Ball { spec, rank, rmax, common } => cmd_ball(spec.as_deref(), rank, rmax, &common),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("discrim: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
