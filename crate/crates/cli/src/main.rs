use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, ValueEnum};
use pfmin_core::generators::{gen_example1, gen_random_rayleigh, gen_random_sum};
use pfmin_core::momentmatrix::OracleSource;
use pfmin_core::moments::pushforward_table_multi;
use pfmin_core::oracle::{grid_min, monte_carlo_min};
use pfmin_core::report::{emit_table, TableFormat};
use pfmin_core::sdp::{build_sum_pushforward, build_sum_standard};
use pfmin_core::{
    CoeffMode, FirstConstraint, HierarchyOptions, HierarchyResult, Method, Problem, SRule, SetKind,
    Sweep,
};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Generator {
    Example1,
    Rayleigh,
    Sum,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Text,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum First {
    V1,
    U1,
}

/// Upper bounds on the minimum of a sum of rational functions.
#[derive(Debug, Parser)]
#[command(name = "pfmin", version)]
struct Cli {
    /// Problem file (JSON).
    #[arg(long, conflicts_with = "generate", required_unless_present = "generate")]
    problem: Option<PathBuf>,
    /// Built-in instance family.
    #[arg(long, value_enum)]
    generate: Option<Generator>,
    /// Number of variables for generated instances.
    #[arg(long = "n", default_value_t = 2)]
    n: usize,
    /// Number of fractions for the `sum` generator.
    #[arg(long = "N", default_value_t = 2)]
    big_n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Samples for the Monte-Carlo minimum used by random generators and --oracle-check.
    #[arg(long, default_value_t = 1_000_000)]
    mc_samples: usize,
    /// One of poly, poly-push, std, push, std-sum, push-sum.
    #[arg(long, default_value = "push")]
    method: String,
    #[arg(long, default_value_t = 1)]
    dmin: u32,
    #[arg(long, default_value_t = 4)]
    dmax: u32,
    /// Truncation order of sum methods: an integer or `d`.
    #[arg(long, default_value = "d")]
    s: String,
    /// Compare every bound with sampled and gridded minima.
    #[arg(long)]
    oracle_check: bool,
    /// exact or float.
    #[arg(long, default_value = "exact")]
    coeff: String,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Directory for persisted moment tables.
    #[arg(long)]
    cache_moments: Option<PathBuf>,
    /// Multiplier of the first constraint in push-sum.
    #[arg(long, value_enum, default_value_t = First::V1)]
    first_constraint: First,
    /// Write the problem (after generation) as JSON.
    #[arg(long)]
    emit_problem: Option<PathBuf>,
    /// Write each order's LMI problem of sum methods in SDPA format into this directory.
    #[arg(long)]
    export_sdpa: Option<PathBuf>,
}

fn load_problem(cli: &Cli) -> Result<Problem> {
    if let Some(path) = &cli.problem {
        return Problem::read(path).with_context(|| format!("reading {}", path.display()));
    }
    let p = match cli.generate.expect("clap enforces a source") {
        Generator::Example1 => gen_example1(cli.n)?,
        Generator::Rayleigh => gen_random_rayleigh(cli.n, cli.seed, cli.mc_samples)?,
        Generator::Sum => gen_random_sum(cli.big_n, cli.n, cli.seed, cli.mc_samples)?,
    };
    Ok(p)
}

fn oracle_check(problem: &Problem, rows: &[HierarchyResult], cli: &Cli) -> Result<bool> {
    let mut reference = monte_carlo_min(problem, cli.mc_samples, cli.seed)?;
    eprintln!("oracle: Monte-Carlo minimum over {} samples: {reference:.8}", cli.mc_samples);
    if problem.set == SetKind::Box && problem.n <= 3 {
        let res = [1001usize, 101, 31][problem.n - 1];
        let g = grid_min(problem, res)?;
        eprintln!("oracle: grid minimum at resolution {res}: {g:.8}");
        reference = reference.min(g);
    }
    let mut ok = true;
    for r in rows.iter().filter(|r| r.value.is_finite()) {
        if r.value < reference - 1e-6 {
            ok = false;
            eprintln!(
                "oracle: {} d={} value {:.8} lies below the sampled minimum {reference:.8}",
                r.method, r.d, r.value
            );
        }
    }
    if ok {
        eprintln!("oracle: all bounds are at or above the sampled minimum");
    }
    Ok(ok)
}

fn export_sdpa(problem: &Problem, method: Method, cli: &Cli, s_rule: SRule, dir: &PathBuf) -> Result<()> {
    if !method.is_sum() {
        bail!("--export-sdpa applies to std-sum and push-sum");
    }
    std::fs::create_dir_all(dir)?;
    let fractions = problem.fraction_pairs();
    let first = match cli.first_constraint {
        First::V1 => FirstConstraint::V1,
        First::U1 => FirstConstraint::U1,
    };
    for d in cli.dmin..=cli.dmax {
        let s = s_rule.at(d);
        let sdp = if method == Method::StdSum {
            build_sum_standard(&fractions, &OracleSource { oracle: problem.oracle() }, d, s)?
        } else {
            let table = pushforward_table_multi(&fractions, 2 * d + s + 1, &problem.oracle())?;
            build_sum_pushforward(&table, d, s, first)?
        };
        let path = dir.join(format!("{}-d{d}-s{s}.dat-s", method.tag()));
        let mut w = BufWriter::new(File::create(&path)?);
        sdp.write_sdpa(&mut w)?;
        w.flush()?;
        log::info!("wrote {}", path.display());
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<bool> {
    let method: Method = cli.method.parse()?;
    let s_rule: SRule = cli.s.parse()?;
    let coeff: CoeffMode = cli.coeff.parse()?;
    if cli.dmin == 0 || cli.dmin > cli.dmax {
        bail!("need 1 <= dmin <= dmax");
    }
    let problem = load_problem(cli)?;
    if let Some(path) = &cli.emit_problem {
        problem.write(path)?;
    }
    let opts = HierarchyOptions {
        coeff,
        cache_dir: cli.cache_moments.clone(),
        first_constraint: match cli.first_constraint {
            First::V1 => FirstConstraint::V1,
            First::U1 => FirstConstraint::U1,
        },
        ..HierarchyOptions::default()
    };
    let mut sweep = Sweep::new(&problem, method, opts)?;
    let rows = sweep.run(cli.dmin..=cli.dmax, s_rule);
    let format = match cli.format {
        Format::Csv => TableFormat::Csv,
        Format::Text => TableFormat::Text,
    };
    match &cli.out {
        Some(path) => emit_table(&rows, format, BufWriter::new(File::create(path)?))?,
        None => emit_table(&rows, format, io::stdout().lock())?,
    }
    if let Some(dir) = &cli.export_sdpa {
        export_sdpa(&problem, method, cli, s_rule, dir)?;
    }
    let mut ok = true;
    if cli.oracle_check {
        ok = oracle_check(&problem, &rows, cli)?;
    }
    Ok(ok)
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => {}
        Ok(false) => std::process::exit(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(1);
        }
    }
}
