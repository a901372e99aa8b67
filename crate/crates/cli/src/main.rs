//! `hexloop`: exact enumeration, verification suites, sampling, fitting, scanning and
//! plotting for the loop O(n) model on hexagonal-lattice domains.

mod manifest;
mod plot;
mod tables;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use hexloop::analysis::{fit_decay, scan};
use hexloop::config::EdgeConfig;
use hexloop::couplings::{
    blue_spin_law, derive_params, face_bernoulli_law, holley_check_blue_spins, holley_check_lemma42, strassen_dominates,
    two_sheet, verify_decoupling, verify_prop31,
};
use hexloop::mcmc::{estimate_tail_for, Ensemble, SamplerConfig, Statistic, TailEstimate};
use hexloop::measures::{
    exact_distribution, superposition_distribution, tv_distance, verify_partition_identity, MeasureKind, WeightVector,
};
use hexloop::Domain;

use manifest::Recorder;
use tables::{read_table, Table};

const TV_TOLERANCE: f64 = 1e-10;
const EQZ_TOLERANCE: f64 = 1e-12;
const MARGINAL_TOLERANCE: f64 = 1e-9;
const TWO_SHEET_SAMPLES: u64 = 10_000;

#[derive(Parser)]
#[command(name = "hexloop", version, about = "Loop O(n) model on hexagonal-lattice domains")]
struct Cli {
    /// Master seed for every random stream.
    #[arg(long, global = true, env = "HEXLOOP_SEED", default_value_t = 0)]
    seed: u64,
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MeasureArg {
    Loop,
    Perco,
    Fk,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    Prop21,
    Prop31,
    Lemma41,
    Lemma42,
    Eqz,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum StatArg {
    Cluster,
    #[value(name = "R")]
    R,
}

#[derive(Clone, Copy, ValueEnum)]
enum EnsembleArg {
    Loop,
    Fk,
}

#[derive(clap::Args)]
struct ChainArgs {
    /// Recorded sweeps per chain.
    #[arg(long, default_value_t = 10_000)]
    sweeps: u64,
    /// Discarded sweeps per chain.
    #[arg(long, default_value_t = 1_000)]
    burn_in: u64,
    /// Sweeps between recorded samples.
    #[arg(long, default_value_t = 1)]
    thinning: u64,
    /// Independent chains.
    #[arg(long, default_value_t = 1)]
    chains: u32,
}

impl ChainArgs {
    fn config(&self, seed: u64) -> SamplerConfig {
        SamplerConfig {
            burn_in_sweeps: self.burn_in,
            sweeps: self.sweeps,
            thinning: self.thinning,
            seed,
            chains: self.chains,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Exact probability table of a measure.
    Enumerate {
        /// Preset name (single_hex, two_hex, hex_ball:R) or domain file.
        #[arg(long, value_parser = parse_domain)]
        domain: Domain,
        #[arg(long, value_enum)]
        measure: MeasureArg,
        /// Loop weight (loop measure only).
        #[arg(long, default_value_t = 1.0)]
        n: f64,
        #[arg(long)]
        x: f64,
        /// Edges carrying weight x; all other edges get weight 0.
        #[arg(long, value_delimiter = ',')]
        mask: Option<Vec<usize>>,
        /// CSV table (config_hex, probability) of the configurations with positive mass.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact verification suites; exit status 1 on any failed check.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long, value_parser = parse_domain, default_value = "two_hex")]
        domain: Domain,
        #[arg(long, default_value_t = 2.0)]
        n: f64,
        #[arg(long, default_value_t = 0.4)]
        x: f64,
        /// Also write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Derived parameters p, alpha, beta, xtilde, eps, xc.
    Params {
        #[arg(long)]
        n: f64,
        #[arg(long)]
        x: f64,
    },
    /// Monte Carlo tail P(stat >= k).
    Sample {
        #[arg(long, value_parser = parse_domain)]
        domain: Domain,
        /// Loop weight (loop ensemble only).
        #[arg(long, default_value_t = 1.0)]
        n: f64,
        #[arg(long)]
        x: f64,
        #[arg(long, value_enum)]
        stat: StatArg,
        #[arg(long)]
        kmax: usize,
        #[arg(long, value_enum, default_value = "loop")]
        ensemble: EnsembleArg,
        #[command(flatten)]
        chain: ChainArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Exponential fit of a tail table.
    Fit {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// R-tail fits over a grid of (n, x) points on hex_ball(radius).
    Scan {
        /// One `n x` pair per line.
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        radius: u32,
        /// Largest k tabulated (capped at the number of edges).
        #[arg(long, default_value_t = 60)]
        kmax: usize,
        #[command(flatten)]
        chain: ChainArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// SVG rendering of a tail or scan table.
    Plot {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_domain(s: &str) -> Result<Domain, String> {
    let path = Path::new(s);
    if path.is_file() {
        let text = fs::read_to_string(path).map_err(|e| format!("reading {s}: {e}"))?;
        return Domain::parse(&text).map_err(|e| e.to_string());
    }
    s.parse().map(Domain::preset).map_err(|e: hexloop::Error| format!("{e} (and no such file)"))
}

/// Outcome of a subcommand that completed without an I/O or argument error.
enum Status {
    Ok,
    Failed,
}

fn print_json(value: &impl Serialize) -> Result<String> {
    let text = serde_json::to_string_pretty(value)?;
    // A closed pipe on stdout is not an error worth a panic.
    let _ = writeln!(io::stdout(), "{text}");
    Ok(text)
}

fn enumerate(
    domain: &Domain,
    measure: MeasureArg,
    n: f64,
    x: f64,
    mask: Option<&[usize]>,
    out: Option<&Path>,
    params: Value,
) -> Result<Status> {
    let weights = match mask {
        Some(edges) => {
            if let Some(&e) = edges.iter().find(|&&e| e >= domain.num_edges()) {
                bail!("mask edge {e} out of range (domain has {} edges)", domain.num_edges());
            }
            WeightVector::masked(domain, x, &EdgeConfig::from_edges(domain, edges.iter().copied()))?
        }
        None => WeightVector::constant(domain, x)?,
    };
    let kind = match measure {
        MeasureArg::Loop => MeasureKind::Loop { n },
        MeasureArg::Perco => MeasureKind::Perco,
        MeasureArg::Fk => MeasureKind::Fk,
    };
    let recorder = Recorder::start("enumerate", params, None);
    let dist = exact_distribution(kind, domain, &weights)?;
    let support = dist.probs().iter().filter(|&&p| p > 0.0).count();
    print_json(&json!({
        "domain": domain.summary(),
        "normalization": dist.normalization(),
        "configurations": dist.probs().len(),
        "support": support,
        "partition_identity": verify_partition_identity(domain, &weights)?,
    }))?;
    if let Some(out) = out {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["config_hex", "probability"])?;
        for (i, &p) in dist.probs().iter().enumerate().filter(|(_, &p)| p > 0.0) {
            w.write_record([EdgeConfig::from_index(domain, i as u64).to_hex(), p.to_string()])?;
        }
        recorder.write_output(out, &w.into_inner().context("flushing csv")?)?;
    }
    Ok(Status::Ok)
}

#[derive(Serialize)]
struct Check {
    name: &'static str,
    pass: bool,
    detail: Value,
}

fn check(name: &'static str, run: impl FnOnce() -> hexloop::Result<(bool, Value)>) -> Check {
    match run() {
        Ok((pass, detail)) => Check { name, pass, detail },
        Err(e) => Check { name, pass: false, detail: json!({ "error": e.to_string() }) },
    }
}

fn suite_checks(suite: Suite, domain: &Domain, n: f64, x: f64, seed: u64) -> Vec<Check> {
    let runs = |s: Suite| suite == s || suite == Suite::All;
    let mut checks = Vec::new();
    if runs(Suite::Prop21) {
        checks.push(check("superposition_equals_fk", || {
            let w = WeightVector::constant(domain, x)?;
            let tv = tv_distance(&superposition_distribution(domain, &w)?, &exact_distribution(MeasureKind::Fk, domain, &w)?)?;
            Ok((tv <= TV_TOLERANCE, json!({ "tv": tv, "tolerance": TV_TOLERANCE })))
        }));
    }
    if runs(Suite::Eqz) {
        checks.push(check("partition_identity", || {
            let rep = verify_partition_identity(domain, &WeightVector::constant(domain, x)?)?;
            Ok((rep.relative_discrepancy <= EQZ_TOLERANCE, json!({ "report": rep, "tolerance": EQZ_TOLERANCE })))
        }));
    }
    if runs(Suite::Prop31) {
        checks.push(check("red_loops_conditional_law", || {
            let rep = verify_prop31(domain, n, x)?;
            let pass = rep.max_conditional_tv <= TV_TOLERANCE && rep.max_marginal_error <= MARGINAL_TOLERANCE;
            Ok((pass, json!({ "report": rep, "tv_tolerance": TV_TOLERANCE, "marginal_tolerance": MARGINAL_TOLERANCE })))
        }));
        checks.push(check("plus_minus_decoupling", || {
            let tv = verify_decoupling(domain, x)?;
            Ok((tv <= TV_TOLERANCE, json!({ "max_tv": tv, "tolerance": TV_TOLERANCE })))
        }));
    }
    if runs(Suite::Lemma41) {
        checks.push(check("blue_spin_face_flip_bound", || {
            let rep = holley_check_blue_spins(domain, n, x)?;
            Ok((rep.dominates, json!(rep)))
        }));
        checks.push(check("blue_spins_below_bernoulli", || {
            let beta = derive_params(n, x)?.beta;
            let rep = strassen_dominates(&blue_spin_law(domain, n, x)?, &face_bernoulli_law(domain, beta)?)?;
            Ok((rep.dominates, json!({ "beta": beta, "report": rep })))
        }));
        checks.push(check("two_sheet_invariant", || {
            let alpha = derive_params(n, x)?.alpha;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut violations = 0u64;
            for _ in 0..TWO_SHEET_SAMPLES {
                violations += u64::from(!two_sheet(domain, alpha, &mut rng)?.invariant_holds(domain));
            }
            Ok((violations == 0, json!({ "alpha": alpha, "samples": TWO_SHEET_SAMPLES, "violations": violations })))
        }));
    }
    if runs(Suite::Lemma42) {
        checks.push(check("averaged_fk_below_xtilde", || {
            let p = derive_params(n, x)?;
            let rep = holley_check_lemma42(domain, x, p.alpha)?;
            Ok((rep.dominates, json!({ "alpha": p.alpha, "xtilde": p.x_tilde, "report": rep })))
        }));
    }
    checks
}

fn verify(suite: Suite, domain: &Domain, n: f64, x: f64, seed: u64, out: Option<&Path>, params: Value) -> Result<Status> {
    let recorder = Recorder::start("verify", params, Some(seed));
    let checks = suite_checks(suite, domain, n, x, seed);
    let pass = checks.iter().all(|c| c.pass);
    let text = print_json(&json!({
        "suite": suite.to_possible_value().map(|v| v.get_name().to_string()),
        "domain": domain.summary(),
        "n": n,
        "x": x,
        "pass": pass,
        "checks": checks,
    }))?;
    if let Some(out) = out {
        recorder.write_output(out, (text + "\n").as_bytes())?;
    }
    Ok(if pass { Status::Ok } else { Status::Failed })
}

fn params(n: f64, x: f64) -> Result<Status> {
    let p = derive_params(n, x)?;
    print_json(&json!({
        "n": p.n,
        "x": p.x,
        "p": p.p,
        "alpha": p.alpha,
        "one_minus_alpha": p.one_minus_alpha,
        "beta": p.beta,
        "xtilde": p.x_tilde,
        "eps": p.epsilon,
        "xc": p.x_c,
    }))?;
    Ok(Status::Ok)
}

fn read_tail(path: &Path) -> Result<Vec<tables::TailRow>> {
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    match read_table(file)? {
        Table::Tail(rows) => Ok(rows),
        Table::Scan(_) => bail!("schema error: {} is a scan table, expected a tail table", path.display()),
    }
}

fn fit(input: &Path, out: &Path, params: Value) -> Result<Status> {
    let recorder = Recorder::start("fit", params, None);
    let rows = read_tail(input)?;
    let n_samples = rows[0].n_samples;
    if rows.iter().any(|r| r.n_samples != n_samples) {
        bail!("schema error: n_samples differs between rows");
    }
    let triples: Vec<(usize, f64, f64)> = rows.iter().map(|r| (r.k, r.estimate, r.stderr)).collect();
    // The statistic only labels the estimate; fitting treats both alike.
    let tail = TailEstimate::from_rows(Statistic::MaxLoop, &triples, n_samples)?;
    let fit = fit_decay(&tail)?;
    let text = serde_json::to_string_pretty(&json!({ "input": input.display().to_string(), "n_samples": n_samples, "fit": fit }))?;
    let _ = writeln!(io::stdout(), "{text}");
    recorder.write_output(out, (text + "\n").as_bytes())?;
    Ok(Status::Ok)
}

fn run(cli: Cli) -> Result<Status> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    }
    let seed = cli.seed;
    match cli.command {
        Command::Enumerate { domain, measure, n, x, mask, out } => {
            let params = json!({
                "domain": domain.summary(), "domain_id": domain.id(), "measure": measure.to_possible_value().map(|v| v.get_name().to_string()),
                "n": n, "x": x, "mask": mask,
            });
            enumerate(&domain, measure, n, x, mask.as_deref(), out.as_deref(), params)
        }
        Command::Verify { suite, domain, n, x, out } => {
            let params = json!({
                "suite": suite.to_possible_value().map(|v| v.get_name().to_string()),
                "domain": domain.summary(), "domain_id": domain.id(), "n": n, "x": x,
            });
            verify(suite, &domain, n, x, seed, out.as_deref(), params)
        }
        Command::Params { n, x } => params(n, x),
        Command::Sample { domain, n, x, stat, kmax, ensemble, chain, out } => {
            let cfg = chain.config(seed);
            let statistic = match stat {
                StatArg::Cluster => Statistic::ClusterSize,
                StatArg::R => Statistic::MaxLoop,
            };
            let ensemble = match ensemble {
                EnsembleArg::Loop => Ensemble::Loop { n },
                EnsembleArg::Fk => Ensemble::Fk,
            };
            let params = json!({
                "domain": domain.summary(), "domain_id": domain.id(), "ensemble": ensemble, "x": x,
                "statistic": statistic.name(), "kmax": kmax, "sampler": cfg,
            });
            let recorder = Recorder::start("sample", params, Some(seed));
            let tail = estimate_tail_for(&domain, ensemble, x, statistic, kmax, &cfg)?;
            let bytes = tables::write_csv(&tables::tail_rows(&tail), &tables::TAIL_HEADER)?;
            recorder.write_output(&out, &bytes)?;
            Ok(Status::Ok)
        }
        Command::Fit { input, out } => {
            let params = json!({ "in": input.display().to_string() });
            fit(&input, &out, params)
        }
        Command::Scan { grid, radius, kmax, chain, out } => {
            let cfg = chain.config(seed);
            let text = fs::read_to_string(&grid).with_context(|| format!("reading {}", grid.display()))?;
            let points = tables::parse_grid(&text)?;
            let params = json!({ "grid": points, "radius": radius, "kmax": kmax, "sampler": cfg });
            let recorder = Recorder::start("scan", params, Some(seed));
            let result = scan(&points, radius, kmax, &cfg)?;
            let rows: Vec<_> = result.points.iter().map(tables::scan_row).collect();
            recorder.write_output(&out, &tables::write_csv(&rows, &tables::SCAN_HEADER)?)?;
            Ok(Status::Ok)
        }
        Command::Plot { input, out } => {
            let recorder = Recorder::start("plot", json!({ "in": input.display().to_string() }), None);
            let file = fs::File::open(&input).with_context(|| format!("opening {}", input.display()))?;
            let svg = match read_table(file)? {
                Table::Tail(rows) => plot::tail_svg(&rows),
                Table::Scan(rows) => plot::scan_svg(&rows),
            };
            recorder.write_output(&out, svg.as_bytes())?;
            Ok(Status::Ok)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Failed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
