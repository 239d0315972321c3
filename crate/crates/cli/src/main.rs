//! `ghx`: scans, verdicts, bound comparisons, counterexample synthesis and
//! Fourier checks for systems of left-invariant operators on tori and SU(2).
//!
//! Exit codes: 0 ok / GH_CONSISTENT, 2 GH_VIOLATED, 3 INCONCLUSIVE, 1 for
//! usage, config and failed self checks.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use ghx_core::block::SystemSymbol;
use ghx_core::config::{load_config, SystemConfig};
use ghx_core::counterexample::{build_witness, find_violations, verify_witness};
use ghx_core::diagnostics::{scan, verdict, ScanRecord, DEFAULT_TAIL};
use ghx_core::fourier::{self, GridFunction, TrigPolynomial};
use ghx_core::group::GroupId;
use ghx_core::report::{records_csv, to_json_string};
use ghx_core::selftest;
use ghx_core::{ScalarSymbol, C64};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "ghx", version, about = "Global hypoellipticity diagnostics at the symbol level")]
struct Cli {
    /// Worker threads for scans (0 = all cores). GHX_THREADS overrides.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the system over the dual up to a cutoff.
    Scan {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long)]
        cutoff: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Classify a scan, re-scanning at twice its cutoff.
    Verdict {
        /// Records written by `ghx scan`.
        #[arg(long, conflicts_with = "config")]
        records: Option<PathBuf>,
        #[arg(long, requires = "cutoff")]
        config: Option<PathBuf>,
        #[arg(long)]
        cutoff: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_TAIL)]
        tail: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare every lower bound with the exact smallest singular value.
    Bounds {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long)]
        cutoff: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Build and verify a witness of non-hypoellipticity.
    Counterexample {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long)]
        max_cutoff: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Plancherel, round trip and quantization checks on the torus.
    FourierCheck {
        /// Grid function JSON; random trigonometric polynomials when absent.
        #[arg(long)]
        function: Option<PathBuf>,
        /// Polynomial system to test the quantization formula with.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the bound soundness, SU(2) algebra and constant suites.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct SystemArgs {
    #[arg(long)]
    config: PathBuf,
}

#[derive(Serialize, Deserialize)]
struct ScanDocument {
    tool: String,
    version: String,
    cutoff: f64,
    system: SystemConfig,
    record_count: usize,
    records: Vec<ScanRecord>,
}

fn thread_count(flag: usize) -> Result<usize> {
    match std::env::var("GHX_THREADS") {
        Ok(v) => v
            .trim()
            .parse()
            .with_context(|| format!("GHX_THREADS must be a non-negative integer, got '{v}'")),
        Err(_) => Ok(flag),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load(path: &Path) -> Result<(SystemConfig, SystemSymbol)> {
    let (cfg, sys) = load_config(path)?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    Ok((cfg.inlined(base)?, sys))
}

fn cmd_scan(system: &SystemArgs, cutoff: f64, out: Option<&Path>, csv: Option<&Path>) -> Result<i32> {
    let (cfg, sys) = load(&system.config)?;
    let records = scan(&sys, cutoff)?;
    if let Some(p) = csv {
        std::fs::write(p, records_csv(&records)?).with_context(|| format!("writing {}", p.display()))?;
    }
    let doc = ScanDocument {
        tool: "ghx".into(),
        version: VERSION.into(),
        cutoff,
        system: cfg,
        record_count: records.len(),
        records,
    };
    emit(out, &to_json_string(&doc)?)?;
    Ok(0)
}

fn cmd_verdict(
    records: Option<&Path>,
    config: Option<&Path>,
    cutoff: Option<f64>,
    tail: f64,
    out: Option<&Path>,
) -> Result<i32> {
    let (sys, cutoff, base) = match (records, config) {
        (Some(p), _) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let doc: ScanDocument = serde_json::from_str(&text)
                .map_err(|e| anyhow!("{}: line {} column {}: {e}", p.display(), e.line(), e.column()))?;
            let sys = doc.system.build(p.parent().unwrap_or_else(|| Path::new(".")))?;
            (sys, doc.cutoff, doc.records)
        }
        (None, Some(c)) => {
            let cutoff = cutoff.ok_or_else(|| anyhow!("--config needs --cutoff"))?;
            let (_, sys) = load(c)?;
            let base = scan(&sys, cutoff)?;
            (sys, cutoff, base)
        }
        (None, None) => bail!("verdict needs --records or --config with --cutoff"),
    };
    let doubled = scan(&sys, 2.0 * cutoff)?;
    let report = verdict(&sys, &base, &doubled, cutoff, tail)?;
    emit(out, &to_json_string(&report)?)?;
    eprintln!("{}", report.classification.as_str());
    Ok(report.classification.exit_code())
}

#[derive(Serialize)]
struct BoundRow<'a> {
    xi: String,
    bracket: f64,
    lambda_min: f64,
    bounds: &'a ghx_core::BoundReport,
    unsound: Vec<&'static str>,
}

fn cmd_bounds(system: &SystemArgs, cutoff: f64, out: Option<&Path>, csv: Option<&Path>) -> Result<i32> {
    let (_, sys) = load(&system.config)?;
    let records = scan(&sys, cutoff)?;
    if let Some(p) = csv {
        std::fs::write(p, records_csv(&records)?).with_context(|| format!("writing {}", p.display()))?;
    }
    let rows: Vec<BoundRow> = records
        .iter()
        .map(|r| {
            let exact = r.bounds.lambda_min_exact;
            let unsound = r
                .bounds
                .present_bounds()
                .filter(|&(_, v)| v > exact + selftest::SOUNDNESS_REL * exact.max(1.0))
                .map(|(k, _)| k)
                .collect();
            BoundRow {
                xi: r.xi.to_string(),
                bracket: r.bracket,
                lambda_min: r.lambda_min,
                bounds: &r.bounds,
                unsound,
            }
        })
        .collect();
    let mut unsound: BTreeMap<&str, usize> = BTreeMap::new();
    for row in &rows {
        for k in &row.unsound {
            *unsound.entry(k).or_default() += 1;
        }
    }
    let doc = serde_json::json!({
        "tool": "ghx",
        "version": VERSION,
        "cutoff": cutoff,
        "unsound_counts": unsound,
        "records": rows,
    });
    emit(out, &to_json_string(&doc)?)?;
    for (k, n) in &unsound {
        eprintln!("warning: {k} exceeds lambda_min at {n} representations");
    }
    Ok(0)
}

fn cmd_counterexample(system: &SystemArgs, max_cutoff: f64, out: Option<&Path>) -> Result<i32> {
    let (_, sys) = load(&system.config)?;
    let violations = find_violations(&sys, max_cutoff)?;
    if violations.is_empty() {
        emit(out, "[]\n")?;
        eprintln!("no violations up to cutoff {max_cutoff}");
        return Ok(0);
    }
    let witness = build_witness(&sys, &violations)?;
    let check = verify_witness(&sys, &witness);
    emit(out, &to_json_string(&witness.entries)?)?;
    eprintln!(
        "{} violations; witness {}",
        witness.entries.len(),
        if check.passed { "verified" } else { "FAILED verification" }
    );
    for f in &check.failures {
        eprintln!("  {f}");
    }
    Ok(if check.passed { 0 } else { 1 })
}

/// Random polynomial multiplier system of degree <= 2 on `T^r`.
fn random_poly_system(rng: &mut ChaCha8Rng, r: usize, m: usize, n: usize) -> Result<SystemSymbol> {
    let mut grid = Vec::with_capacity(m);
    for _ in 0..m {
        let mut row = Vec::with_capacity(n);
        for _ in 0..n {
            let terms = (0..rng.gen_range(1..=3))
                .map(|_| {
                    let alpha: Vec<u32> = (0..r).map(|_| rng.gen_range(0..=2)).collect();
                    (alpha, C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                })
                .collect();
            row.push(ScalarSymbol::torus_poly(terms)?);
        }
        grid.push(row);
    }
    Ok(SystemSymbol::new(GroupId::Torus(r), grid)?)
}

#[derive(Serialize)]
struct FourierRow {
    r: usize,
    grid: usize,
    n: usize,
    plancherel_error: f64,
    round_trip_error: f64,
    quantization_error: Option<f64>,
}

fn check_function(f: &GridFunction, sys: Option<&SystemSymbol>) -> Result<FourierRow> {
    let p = fourier::plancherel_check(f)?;
    let back = fourier::inverse(&fourier::forward(f)?, f.grid_size)?;
    let q = match sys {
        Some(s) => {
            let q = fourier::quantization_check(s, f)?;
            Some(q.max_error / q.scale.max(1.0))
        }
        None => None,
    };
    Ok(FourierRow {
        r: f.r,
        grid: f.grid_size,
        n: f.n,
        plancherel_error: p.relative_error,
        round_trip_error: back.max_abs_diff(f),
        quantization_error: q,
    })
}

fn cmd_fourier(
    function: Option<&Path>,
    config: Option<&Path>,
    seed: u64,
    count: usize,
    out: Option<&Path>,
) -> Result<i32> {
    let sys = config.map(load).transpose()?.map(|(_, s)| s);
    let mut rows = Vec::new();
    if let Some(p) = function {
        let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        let f: GridFunction = serde_json::from_str(&text)
            .map_err(|e| anyhow!("{}: line {} column {}: {e}", p.display(), e.line(), e.column()))?;
        f.validate()?;
        rows.push(check_function(&f, sys.as_ref())?);
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..count {
            let r = rng.gen_range(1..=2);
            let grid = if r == 1 { 2 * rng.gen_range(4..=16) } else { 2 * rng.gen_range(2..=8) };
            let n = rng.gen_range(1..=3);
            let t = TrigPolynomial::random(r, n, (grid / 2 - 1) as i64 / 2, &mut rng);
            let f = t.sample(grid)?;
            let m = rng.gen_range(1..=3);
            let s = match &sys {
                Some(s) if s.n() == n && *s.group() == GroupId::Torus(r) => s.clone(),
                _ => random_poly_system(&mut rng, r, m, n)?,
            };
            rows.push(check_function(&f, Some(&s))?);
        }
    }
    let worst = |f: fn(&FourierRow) -> f64| rows.iter().map(f).fold(0.0, f64::max);
    let plan = worst(|r| r.plancherel_error);
    let trip = worst(|r| r.round_trip_error);
    let quant = worst(|r| r.quantization_error.unwrap_or(0.0));
    let ok = plan <= 1e-10 && trip <= 1e-10 && quant <= 1e-10;
    let doc = serde_json::json!({
        "tool": "ghx",
        "version": VERSION,
        "passed": ok,
        "max_plancherel_error": plan,
        "max_round_trip_error": trip,
        "max_quantization_error": quant,
        "checks": rows,
    });
    emit(out, &to_json_string(&doc)?)?;
    eprintln!("fourier checks {}", if ok { "passed" } else { "FAILED" });
    Ok(if ok { 0 } else { 1 })
}

fn cmd_selftest(seed: u64) -> Result<i32> {
    let results = selftest::run_all(seed);
    let mut ok = true;
    for r in &results {
        ok &= r.passed;
        println!(
            "{} {} ({} checked, {} failures){}",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.checked,
            r.failures,
            if r.detail.is_empty() { String::new() } else { format!(": {}", r.detail) }
        );
    }
    Ok(if ok { 0 } else { 1 })
}

fn run(cli: Cli) -> Result<i32> {
    let threads = thread_count(cli.threads)?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
    pool.install(|| match &cli.command {
        Command::Scan {
            system,
            cutoff,
            out,
            csv,
        } => cmd_scan(system, *cutoff, out.as_deref(), csv.as_deref()),
        Command::Verdict {
            records,
            config,
            cutoff,
            tail,
            out,
        } => cmd_verdict(records.as_deref(), config.as_deref(), *cutoff, *tail, out.as_deref()),
        Command::Bounds {
            system,
            cutoff,
            out,
            csv,
        } => cmd_bounds(system, *cutoff, out.as_deref(), csv.as_deref()),
        Command::Counterexample {
            system,
            max_cutoff,
            out,
        } => cmd_counterexample(system, *max_cutoff, out.as_deref()),
        Command::FourierCheck {
            function,
            config,
            seed,
            count,
            out,
        } => cmd_fourier(function.as_deref(), config.as_deref(), *seed, *count, out.as_deref()),
        Command::Selftest { seed } => cmd_selftest(*seed),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
