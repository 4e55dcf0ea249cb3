//! `conifold-lab`: runs experiment configurations and prints weight tables.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use conifold_core::experiments::{load_run_file, region_atlas, run, EmitFormat, ExperimentConfig};
use conifold_core::link_spectra::Link;
use conifold_core::weight_calculus::{exceptional_weights, ConifoldKind};

#[derive(Parser)]
#[command(name = "conifold-lab", version, about = "Weighted-space experiments on model conifolds")]
struct Cli {
    /// Output formats (repeatable); overrides the configuration.
    #[arg(long, global = true, value_parser = parse_format)]
    emit: Vec<EmitFormat>,
    /// Seed for random test families; overrides the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; overrides the configuration.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every experiment of a JSON configuration file.
    Run { config: PathBuf },
    /// Exceptional weights of the Laplacian on the cone over a link, as JSON.
    Weights {
        #[arg(long)]
        link: String,
        #[arg(long)]
        m: usize,
        /// Interval `lo:hi`.
        #[arg(long, allow_hyphen_values = true, value_parser = parse_range)]
        range: (f64, f64),
    },
    /// Region classification over a grid of two end weights, as CSV.
    Regions {
        #[arg(long, value_parser = parse_kind)]
        kind: ConifoldKind,
        #[arg(long)]
        m: usize,
        /// Grid step.
        #[arg(long)]
        grid: f64,
        /// Link; defaults to the unit sphere of dimension `m - 1`.
        #[arg(long)]
        link: Option<String>,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_range, default_value = "-3:2")]
        range: (f64, f64),
    },
}

fn parse_format(s: &str) -> Result<EmitFormat, String> {
    s.parse().map_err(|e: conifold_core::ConifoldError| e.to_string())
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected lo:hi, got '{s}'"))?;
    let lo: f64 = a.trim().parse().map_err(|_| format!("bad lower bound '{a}'"))?;
    let hi: f64 = b.trim().parse().map_err(|_| format!("bad upper bound '{b}'"))?;
    if !(lo < hi) {
        return Err(format!("empty range {lo}:{hi}"));
    }
    Ok((lo, hi))
}

fn parse_kind(s: &str) -> Result<ConifoldKind, String> {
    match s.to_ascii_lowercase().as_str() {
        "ac" => Ok(ConifoldKind::AC),
        "cs" => Ok(ConifoldKind::CS),
        "csac" | "cs-ac" | "cs_ac" => Ok(ConifoldKind::CSAC),
        _ => Err(format!("unknown kind '{s}' (AC, CS, CSAC)")),
    }
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("CONIFOLD_LAB_THREADS") {
        let n: usize = v.parse().with_context(|| format!("CONIFOLD_LAB_THREADS = '{v}' is not a count"))?;
        if n == 0 {
            bail!("CONIFOLD_LAB_THREADS must be positive");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn output_dir(cli_out: &Option<PathBuf>, cfg: &ExperimentConfig, base: &Path) -> PathBuf {
    match (cli_out, &cfg.outputs.dir) {
        (Some(d), _) => d.clone(),
        (None, Some(d)) if d.is_absolute() => d.clone(),
        (None, Some(d)) => base.join(d),
        (None, None) => base.join("results"),
    }
}

fn run_configs(cli: &Cli, path: &Path) -> Result<bool> {
    let configs = load_run_file(path)?;
    let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let mut failing = Vec::new();
    for mut cfg in configs {
        if let Some(s) = cli.seed {
            cfg.seed = s;
        }
        let label = cfg.label();
        match run(&cfg, &base) {
            Ok(result) => {
                let formats = if cli.emit.is_empty() { cfg.outputs.formats.clone() } else { cli.emit.clone() };
                let dir = output_dir(&cli.out, &cfg, &base);
                result.emit(&formats, &dir).with_context(|| format!("writing {label} to {}", dir.display()))?;
                if result.summary.pass {
                    println!("PASS {label}");
                } else {
                    let names: Vec<String> =
                        result.failed_checks().iter().map(|c| format!("{} = {:e} > {:e}", c.name, c.value, c.bound)).collect();
                    println!("FAIL {label}: {}", names.join("; "));
                    failing.push(label);
                }
            }
            Err(e) => {
                println!("FAIL {label}: {e}");
                failing.push(label);
            }
        }
    }
    if !failing.is_empty() {
        eprintln!("failing experiments: {}", failing.join(", "));
    }
    Ok(failing.is_empty())
}

fn weights(link: &str, m: usize, range: (f64, f64)) -> Result<String> {
    let link = Link::parse_spec(link)?;
    let rows: Vec<serde_json::Value> = exceptional_weights(&link, m, range)?
        .iter()
        .map(|w| {
            serde_json::json!({
                "gamma": w.gamma,
                "mult": w.mult,
                "eigenvalue": w.source_eigenvalue,
                "end": w.end_index,
            })
        })
        .collect();
    Ok(serde_json::to_string_pretty(&rows)?)
}

/// Writes to stdout; a reader that closed the pipe early is not an error.
fn print_stdout(text: &str) -> Result<()> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = configure_threads().and_then(|_| match &cli.command {
        Command::Run { config } => run_configs(&cli, config),
        Command::Weights { link, m, range } => {
            let text = weights(link, *m, *range)?;
            match &cli.out {
                Some(dir) => {
                    std::fs::create_dir_all(dir)?;
                    std::fs::write(dir.join("weights.json"), text + "\n")?;
                }
                None => print_stdout(&(text + "\n"))?,
            }
            Ok(true)
        }
        Command::Regions { kind, m, grid, link, range } => {
            let link = Link::parse_spec(&link.clone().unwrap_or_else(|| format!("sphere:{}", m.saturating_sub(1))))?;
            let mut result = region_atlas(*kind, &link, *m, *grid, *range)?;
            if let Some(s) = cli.seed {
                result.seed = s;
            }
            match &cli.out {
                Some(dir) => {
                    let formats = if cli.emit.is_empty() { vec![EmitFormat::Csv] } else { cli.emit.clone() };
                    result.emit(&formats, dir)?;
                }
                None => print_stdout(&result.to_csv()?)?,
            }
            Ok(true)
        }
    });
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
