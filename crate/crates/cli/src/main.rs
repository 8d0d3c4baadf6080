//! `ym2d run <config.json>` executes experiments; `ym2d inspect <path>`
//! summarizes an artifact. Exit codes: 0 pass, 1 experiment failure, 2 usage
//! or config error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use ym2d::roughpath::Level2Path;
use ym2d::spectral::{GridField, FIELD_FORMAT};
use ym2d::transport::TransportPath;
use ym2d_lab::manifest::{sha256_hex, Manifest};
use ym2d_lab::report::Report;
use ym2d_lab::run::{run_file, Overrides};
use ym2d_lab::LabError;

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;

/// Tolerance of the consistency checks run by `inspect`.
const INSPECT_TOL: f64 = 1e-9;

#[derive(Parser)]
#[command(name = "ym2d", version, about = "Smooth 2D Yang-Mills experiments in axial gauge")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every task of a config and write reports plus a manifest.
    Run {
        config: PathBuf,
        /// Override the config's base seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Override the config's worker count.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Summarize a report, manifest, field or path file.
    Inspect { path: PathBuf },
}

/// An error carrying its exit code.
struct Exit(u8, anyhow::Error);

fn usage(e: impl Into<anyhow::Error>) -> Exit {
    Exit(EXIT_USAGE, e.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            seed,
            out,
            workers,
        } => cmd_run(&config, &out, &Overrides { seed, workers }),
        Command::Inspect { path } => cmd_inspect(&path),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Exit(code, e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}

fn cmd_run(config: &Path, out: &Path, overrides: &Overrides) -> std::result::Result<u8, Exit> {
    if !config.is_file() {
        return Err(usage(anyhow::anyhow!("config {} does not exist", config.display())));
    }
    let outcome = run_file(config, out, overrides).map_err(|e| match e {
        LabError::Config(_) => usage(e),
        other => Exit(EXIT_FAIL, other.into()),
    })?;
    for r in &outcome.reports {
        if r.pass {
            println!("PASS {} ({})", r.name, r.experiment);
        } else {
            println!("FAIL {} ({})", r.name, r.experiment);
            for m in r.failures() {
                println!("  metric {} = {} fails {:?}", m.name, m.estimate, m.check);
            }
        }
    }
    println!("manifest: {}", out.join(ym2d_lab::manifest::MANIFEST_FILE).display());
    Ok(if outcome.pass() { 0 } else { EXIT_FAIL })
}

fn cmd_inspect(path: &Path) -> std::result::Result<u8, Exit> {
    if !path.exists() {
        return Err(usage(anyhow::anyhow!("{} does not exist", path.display())));
    }
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    match ext {
        "json" => inspect_json(path),
        "bin" => inspect_field(path),
        "csv" => inspect_csv(path),
        _ => Err(usage(anyhow::anyhow!("unknown artifact format: {}", path.display()))),
    }
}

fn inspect_json(path: &Path) -> std::result::Result<u8, Exit> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(usage)?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .with_context(|| format!("{} is not JSON", path.display()))
        .map_err(usage)?;
    if value.get("metrics").is_some() {
        let report: Report = serde_json::from_value(value)
            .context("malformed report")
            .map_err(usage)?;
        Ok(print_report(&report))
    } else if value.get("config_sha256").is_some() {
        let manifest: Manifest = serde_json::from_value(value)
            .context("malformed manifest")
            .map_err(usage)?;
        Ok(print_manifest(&manifest))
    } else if value.get("format").and_then(|f| f.as_str()) == Some(FIELD_FORMAT) {
        inspect_field(path)
    } else {
        Err(usage(anyhow::anyhow!("unknown JSON artifact: {}", path.display())))
    }
}

fn print_report(r: &Report) -> u8 {
    println!(
        "report {} ({}), seed {}, {} samples",
        r.name, r.experiment, r.seed, r.samples
    );
    println!("{:<40} {:>14} {:>12}  pass", "metric", "estimate", "se");
    for m in &r.metrics {
        let se = m.se.map_or("-".to_string(), |s| format!("{s:.4e}"));
        println!("{:<40} {:>14.6e} {:>12}  {}", m.name, m.estimate, se, m.pass);
        if let Some(f) = &m.slope {
            println!("{:<40} R^2 = {:.4}", "", f.r2);
        }
    }
    let consistent = r.is_consistent();
    println!("overall: {}", if r.pass { "PASS" } else { "FAIL" });
    println!(
        "pass flags recomputed: {}",
        if consistent { "consistent" } else { "INCONSISTENT" }
    );
    if consistent {
        0
    } else {
        EXIT_FAIL
    }
}

fn print_manifest(m: &Manifest) -> u8 {
    println!("manifest of {} {}", m.tool, m.version);
    println!("config {} (sha256 {})", m.config_path, m.config_sha256);
    println!("seed {}, workers {}, out {}", m.seed, m.workers, m.out);
    for t in &m.tasks {
        println!(
            "  {:<24} {:<18} pass {:<5} {:.2} s",
            t.name, t.experiment, t.pass, t.runtime_s
        );
    }
    match std::fs::read(&m.config_path) {
        Ok(bytes) if sha256_hex(&bytes) == m.config_sha256 => {
            println!("config hash: matches");
            0
        }
        Ok(_) => {
            println!("config hash: MISMATCH");
            EXIT_FAIL
        }
        Err(_) => {
            println!("config hash: config file not found");
            0
        }
    }
}

fn inspect_field(path: &Path) -> std::result::Result<u8, Exit> {
    let f = GridField::read(path).map_err(usage)?;
    let g = f.grid();
    println!(
        "field: N = {}, L = {}, origin {:?}, {} channels",
        g.n(),
        g.side(),
        g.origin(),
        f.channels()
    );
    for c in 0..f.channels() {
        println!(
            "  channel {c}: L2 norm {:.6e}, max |.| {:.6e}",
            f.l2_norm(c),
            f.max_abs(c)
        );
    }
    Ok(0)
}

fn inspect_csv(path: &Path) -> std::result::Result<u8, Exit> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(usage)?;
    let header = text.lines().next().unwrap_or("");
    if header.starts_with("t,x_1") {
        let p = Level2Path::from_csv(&text).map_err(usage)?;
        let stride = (p.len() / 32).max(1);
        let scale = p.nodes().iter().map(|n| n.cc_norm()).fold(1.0, f64::max);
        let chen = p.chen_defect(stride) / (scale * scale);
        let sym = p.sym_defect(stride);
        println!("step-2 path: {} nodes, dimension {}", p.len(), p.dim());
        println!("Chen defect (relative) {chen:.3e}, symmetric-part defect {sym:.3e}");
        let ok = chen <= INSPECT_TOL && sym <= INSPECT_TOL;
        println!("Chen check: {}", if ok { "PASS" } else { "FAIL" });
        Ok(if ok { 0 } else { EXIT_FAIL })
    } else if header.starts_with("t,re_11") {
        let p = TransportPath::from_csv(&text).map_err(usage)?;
        let drift = p.unitarity_drift();
        println!("transport path: {} nodes, SU({})", p.times().len(), p.last().n());
        println!("unitarity drift {drift:.3e}, det drift {:.3e}", p.det_drift());
        println!("Re tr U(1) = {:.6}", p.last().trace().re);
        let ok = drift <= INSPECT_TOL && p.det_drift() <= INSPECT_TOL;
        Ok(if ok { 0 } else { EXIT_FAIL })
    } else {
        Err(usage(anyhow::anyhow!("unrecognized CSV header {header:?}")))
    }
}
