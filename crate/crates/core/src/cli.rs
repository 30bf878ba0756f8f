//! Command-line front end.
//!
//! Every subcommand prints CSV (header row first) to standard output or to
//! `--out`. Randomized commands print the seed they used on standard error
//! when none was given.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::approx::{self, ApproxParams, Profile};
use crate::error::{Error, Result};
use crate::exact;
use crate::families::{gen_family, Family, FamilySpec};
use crate::func::Func;
use crate::isoperimetry as iso;
use crate::lowerbound::{self, Sign};
use crate::oracle::QueryOracle;
use crate::rng;
use crate::suite::{self, csv_err, Ctx};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "monodist", version, about = "Distance to monotonicity: estimators, exact oracles and experiments")]
pub struct Cli {
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// One ApproxMono run: close or far at scale eps.
    Approx(ApproxArgs),
    /// Distance approximation over the halving schedule down to alpha.
    ApproxDist(ApproxDistArgs),
    /// Exact distances (monotone; optionally unate and k-junta).
    Exact(ExactArgs),
    /// Talagrand and colored objectives against the exact distance.
    Isoperimetry(IsoArgs),
    /// Lower-bound instances: erasure counts and exact farness.
    Lowerbound(LowerboundArgs),
    /// Write a family member as a truth table.
    Gen(GenArgs),
    /// Run the acceptance checks.
    Suite(SuiteArgs),
}

#[derive(Args, Debug, Clone)]
struct Source {
    /// Family: constant0, constant1, dictator:i, antidictator:i, majority,
    /// antimajority, remark, random_p:p, sparse_violation:m, dplus:kappa,
    /// dminus:kappa.
    #[arg(long, conflicts_with = "input")]
    family: Option<String>,
    /// Truth-table file.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ApproxArgs {
    #[command(flatten)]
    src: Source,
    #[arg(long)]
    eps: f64,
    #[arg(long, default_value = "experiment")]
    profile: Profile,
}

#[derive(Args, Debug)]
struct ApproxDistArgs {
    #[command(flatten)]
    src: Source,
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value = "experiment")]
    profile: Profile,
}

#[derive(Args, Debug)]
struct ExactArgs {
    #[command(flatten)]
    src: Source,
    /// Also compute the distance to unate.
    #[arg(long)]
    unate: bool,
    /// Also compute the distance to a k-junta.
    #[arg(long)]
    junta: Option<u32>,
}

#[derive(Args, Debug)]
struct IsoArgs {
    #[command(flatten)]
    src: Source,
    /// Sweep this many random functions instead of one input.
    #[arg(long)]
    trials: Option<u64>,
}

#[derive(Args, Debug)]
struct LowerboundArgs {
    #[arg(long, default_value_t = 8)]
    n: u32,
    #[arg(long, default_value_t = 0.25)]
    kappa: f64,
    #[arg(long)]
    seed: Option<u64>,
    /// Number of seeds, starting at `--seed`.
    #[arg(long, default_value_t = 1)]
    trials: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long)]
    family: String,
    #[arg(long)]
    n: u32,
    #[arg(long)]
    seed: Option<u64>,
    /// Truth-table path; lower-bound families also get `<out>.meta`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SuiteArgs {
    #[arg(long, default_value_t = suite::DEFAULT_SEED)]
    seed: u64,
    /// Comma-separated criteria (ids or names, e.g. `lemma25,c10`).
    #[arg(long)]
    only: Option<String>,
    /// Restrict size-parameterized checks to this n.
    #[arg(long)]
    n: Option<u32>,
    /// Directory for results.csv and constants.csv.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Resource { .. } => EXIT_RESOURCE,
        Error::Protocol(_) => EXIT_CHECK,
        _ => EXIT_USAGE,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return EXIT_USAGE;
            }
            let _ = write!(out, "{e}");
            return EXIT_OK;
        }
    };
    let result = match cli.workers {
        Some(k) => match rayon::ThreadPoolBuilder::new().num_threads(k.max(1)).build() {
            Ok(pool) => pool.install(|| dispatch(cli.command, out, err)),
            Err(e) => Err(Error::arg(format!("cannot start {k} workers: {e}"))),
        },
        None => dispatch(cli.command, out, err),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(command: Command, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> Result<i32> {
    match command {
        Command::Approx(a) => cmd_approx(a, out, err),
        Command::ApproxDist(a) => cmd_approx_dist(a, out, err),
        Command::Exact(a) => cmd_exact(a, out, err),
        Command::Isoperimetry(a) => cmd_isoperimetry(a, out, err),
        Command::Lowerbound(a) => cmd_lowerbound(a, out, err),
        Command::Gen(a) => cmd_gen(a, out, err),
        Command::Suite(a) => cmd_suite(a, out, err),
    }
}

fn seed_or_fresh(seed: Option<u64>, err: &mut (dyn Write + Send)) -> Result<u64> {
    Ok(match seed {
        Some(s) => s,
        None => {
            let s = rng::entropy_seed();
            writeln!(err, "seed: {s}")?;
            s
        }
    })
}

/// The function named by `--family`/`--input`, with its family and params
/// columns.
struct Loaded {
    f: Func,
    family: String,
    params: String,
    seed: Option<u64>,
}

fn load(src: &Source, err: &mut (dyn Write + Send)) -> Result<Loaded> {
    match (&src.family, &src.input) {
        (Some(name), None) => {
            let family: Family = name.parse()?;
            let n = src.n.ok_or_else(|| Error::arg("--family needs --n"))?;
            let seed = if family.is_seeded() {
                Some(seed_or_fresh(src.seed, err)?)
            } else {
                src.seed
            };
            let f = gen_family(FamilySpec::new(family, n, seed.unwrap_or(0)))?;
            Ok(Loaded {
                f,
                family: family.name().to_string(),
                params: family.params(),
                seed,
            })
        }
        (None, Some(path)) => {
            let f = Func::load(path)?;
            if let Some(n) = src.n {
                if n != f.n() {
                    return Err(Error::arg(format!("--n {n} but {} has n={}", path.display(), f.n())));
                }
            }
            Ok(Loaded {
                f,
                family: "file".to_string(),
                params: path.display().to_string(),
                seed: src.seed,
            })
        }
        _ => Err(Error::arg("give exactly one of --family or --input")),
    }
}

fn open_out<'a>(path: &Option<PathBuf>, out: &'a mut dyn Write) -> Result<Box<dyn Write + 'a>> {
    Ok(match path {
        Some(p) => Box::new(std::io::BufWriter::new(std::fs::File::create(p)?)),
        None => Box::new(out),
    })
}

fn write_csv(
    path: &Option<PathBuf>,
    out: &mut (dyn Write + Send),
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<()> {
    let mut w = csv::Writer::from_writer(open_out(path, out)?);
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn require_total(f: &Func, what: &str) -> Result<()> {
    if f.is_total() {
        Ok(())
    } else {
        Err(Error::Precondition(format!(
            "{what} needs a total function, but the input has {} erased values",
            f.erased_count()
        )))
    }
}

fn cmd_approx(a: ApproxArgs, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> Result<i32> {
    let l = load(&a.src, err)?;
    require_total(&l.f, "approx")?;
    let seed = seed_or_fresh(a.src.seed.or(l.seed), err)?;
    let params = ApproxParams::new(a.eps, a.profile, seed);
    let v = approx::approx_mono(&params, &l.f)?;
    writeln!(err, "{} ({} queries)", v.label, v.query_count)?;
    write_csv(
        &a.src.out,
        out,
        &["family", "n", "params", "eps", "label", "trigger", "query_count", "seed", "profile"],
        &[vec![
            l.family,
            l.f.n().to_string(),
            l.params,
            a.eps.to_string(),
            v.label.to_string(),
            v.trigger.to_string(),
            v.query_count.to_string(),
            seed.to_string(),
            a.profile.to_string(),
        ]],
    )?;
    Ok(EXIT_OK)
}

fn cmd_approx_dist(a: ApproxDistArgs, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> Result<i32> {
    let l = load(&a.src, err)?;
    require_total(&l.f, "approx-dist")?;
    let seed = seed_or_fresh(a.src.seed.or(l.seed), err)?;
    // eps is set per level by the schedule
    let params = ApproxParams::new(0.25, a.profile, seed);
    let g = if l.f.n() <= 20 { l.f.materialize()? } else { l.f.clone() };
    let mut oracle = QueryOracle::new(&g);
    let e = approx::approx_distance_on(a.alpha, &params, &mut oracle)?;
    writeln!(err, "eps_hat = {}", e.eps_hat)?;
    write_csv(
        &a.src.out,
        out,
        &["family", "n", "params", "alpha", "eps_hat", "eps_star", "repetitions", "query_count", "seed", "profile"],
        &[vec![
            l.family,
            l.f.n().to_string(),
            l.params,
            a.alpha.to_string(),
            e.eps_hat.to_string(),
            e.eps_star.to_string(),
            e.repetitions.to_string(),
            oracle.query_count()?.to_string(),
            seed.to_string(),
            a.profile.to_string(),
        ]],
    )?;
    Ok(EXIT_OK)
}

fn cmd_exact(a: ExactArgs, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> Result<i32> {
    let l = load(&a.src, err)?;
    let r = exact::exact_report(&l.f, a.unate, a.junta)?;
    let opt = |d: Option<exact::ExactDistance>| d.map(|d| d.value().to_string()).unwrap_or_default();
    write_csv(
        &a.src.out,
        out,
        &["family", "n", "params", "dist_mono", "dist_unate", "dist_junta", "dec_edges", "seed"],
        &[vec![
            l.family,
            r.n.to_string(),
            l.params,
            r.dist_mono.value().to_string(),
            opt(r.dist_unate),
            opt(r.dist_junta.map(|(_, d)| d)),
            r.dec_edges.map(|e| e.to_string()).unwrap_or_default(),
            l.seed.map(|s| s.to_string()).unwrap_or_default(),
        ]],
    )?;
    Ok(EXIT_OK)
}

fn iso_row(family: &str, params: &str, f: &Func) -> Result<Vec<String>> {
    let d = exact::exact_distance_to_monotone(f)?;
    let obj = iso::talagrand_objective(f)?.value;
    let (red, blue) = iso::colored_objectives(f, &iso::kms_coloring(f)?)?;
    let ratio = if d.is_zero() {
        String::new()
    } else {
        (obj.min(red + blue) / d.to_f64()).to_string()
    };
    Ok(vec![
        family.to_string(),
        f.n().to_string(),
        params.to_string(),
        d.value().to_string(),
        obj.to_string(),
        red.to_string(),
        blue.to_string(),
        ratio,
    ])
}

fn cmd_isoperimetry(a: IsoArgs, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> Result<i32> {
    use rayon::prelude::*;
    let rows = match a.trials {
        Some(trials) => {
            if a.src.family.is_some() || a.src.input.is_some() {
                return Err(Error::arg("--trials sweeps random functions; drop --family/--input"));
            }
            let n = a.src.n.ok_or_else(|| Error::arg("--trials needs --n"))?;
            let seed = seed_or_fresh(a.src.seed, err)?;
            (0..trials)
                .into_par_iter()
                .map(|i| {
                    let s = rng::derive(seed, &[i]);
                    iso_row("random", &format!("seed={s}"), &suite::sweep_function(n, s)?)
                })
                .collect::<Result<Vec<_>>>()?
        }
        None => {
            let l = load(&a.src, err)?;
            vec![iso_row(&l.family, &l.params, &l.f)?]
        }
    };
    write_csv(
        &a.src.out,
        out,
        &["family", "n", "params", "dist", "objective", "colored_red", "colored_blue", "min_ratio"],
        &rows,
    )?;
    Ok(EXIT_OK)
}

fn cmd_lowerbound(a: LowerboundArgs, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> Result<i32> {
    let first = seed_or_fresh(a.seed, err)?;
    let mut rows = Vec::new();
    for seed in first..first.saturating_add(a.trials) {
        for sign in [Sign::Plus, Sign::Minus] {
            let (inst, f) = lowerbound::sample_instance(a.n, a.kappa, sign, seed)?;
            let stats = lowerbound::erasure_stats(&inst);
            let far = if a.n <= lowerbound::FARNESS_CAP {
                Some(lowerbound::farness(&inst, &f)?)
            } else {
                None
            };
            let show = |d: Option<exact::ExactDistance>| d.map(|d| d.value().to_string()).unwrap_or_default();
            rows.push(vec![
                a.n.to_string(),
                a.kappa.to_string(),
                sign.to_string(),
                seed.to_string(),
                inst.m.to_string(),
                f.erased_count().to_string(),
                stats.count.to_string(),
                stats.fraction.to_string(),
                stats.bound.to_string(),
                show(far.map(|x| x.mono)),
                show(far.map(|x| x.unate)),
                show(far.map(|x| x.junta)),
            ]);
        }
    }
    write_csv(
        &a.out,
        out,
        &[
            "n", "kappa", "sign", "seed", "M", "erased", "erased_closed_form", "erased_fraction",
            "erasure_bound", "dist_mono", "dist_unate", "dist_junta",
        ],
        &rows,
    )?;
    Ok(EXIT_OK)
}

fn cmd_gen(a: GenArgs, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> Result<i32> {
    let family: Family = a.family.parse()?;
    let seed = if family.is_seeded() {
        seed_or_fresh(a.seed, err)?
    } else {
        a.seed.unwrap_or(0)
    };
    match family {
        Family::DPlus(kappa) | Family::DMinus(kappa) => {
            let sign = if matches!(family, Family::DPlus(_)) { Sign::Plus } else { Sign::Minus };
            let (inst, f) = lowerbound::sample_instance(a.n, kappa, sign, seed)?;
            match &a.out {
                Some(path) => lowerbound::write_instance(&inst, &f, path)?,
                None => {
                    f.write_table(&mut *out)?;
                    writeln!(err, "{}", inst.meta_line())?;
                }
            }
        }
        _ => {
            let f = gen_family(FamilySpec::new(family, a.n, seed))?;
            f.write_table(open_out(&a.out, out)?)?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_suite(a: SuiteArgs, out: &mut (dyn Write + Send), _err: &mut (dyn Write + Send)) -> Result<i32> {
    let selected = suite::select(a.only.as_deref())?;
    let ctx = Ctx { seed: a.seed, n: a.n };
    writeln!(out, "suite seed {}", a.seed)?;
    let start = std::time::Instant::now();
    let mut reports = Vec::new();
    for c in selected {
        let r = suite::run_criterion(c, &ctx);
        writeln!(out, "{r}")?;
        out.flush()?;
        reports.push(r);
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    writeln!(
        out,
        "{} of {} passed in {:.1}s",
        reports.len() - failed,
        reports.len(),
        start.elapsed().as_secs_f64()
    )?;
    if let Some(dir) = &a.out {
        std::fs::create_dir_all(dir)?;
        write_results(&reports, &dir.join("results.csv"))?;
        suite::write_constants_file(&reports, &dir.join("constants.csv"))?;
    }
    Ok(if failed == 0 { EXIT_OK } else { EXIT_CHECK })
}

fn write_results(reports: &[suite::CriterionReport], path: &Path) -> Result<()> {
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            vec![
                format!("C{}", r.id),
                r.key.to_string(),
                if r.passed { "pass" } else { "fail" }.to_string(),
                r.detail.clone(),
            ]
        })
        .collect();
    let mut sink = std::io::sink();
    write_csv(&Some(path.to_path_buf()), &mut sink, &["criterion", "name", "result", "detail"], &rows)
}

/// Used by the binary: `std::env::args_os` in, process exit code out.
pub fn main_with_env() -> i32 {
    run(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr())
}
