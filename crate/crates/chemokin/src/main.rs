use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use chemokin::config::{parse_config, EngineKind, Scale};
use chemokin::core::diagnostics::{
    diffusion_layer_marker, rescale_collapse, slice_2d, Axis, BimodalityPoint, Normalization,
    ScaledProfile, Source,
};
use chemokin::csv;
use chemokin::manifest::{write_run_dir, RunManifest, MANIFEST_FILE};
use chemokin::parallel::{pool, threads};
use chemokin::preset::{preset, run_preset};
use chemokin::sweep::{index, sweep};
use chemokin::{execute, Error, Result};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "chemokin", version, about = "Run-and-tumble chemotaxis experiments")]
struct Cli {
    /// Parent directory for run directories.
    #[arg(long, global = true, default_value = "runs")]
    out: PathBuf,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Monte Carlo run from a config file (or the manifest of an earlier run).
    McRun { config: PathBuf },
    /// Keller-Segel run.
    KsRun { config: PathBuf },
    /// Extended Keller-Segel run.
    ExksRun { config: PathBuf },
    /// Figure preset (fig1a ... fig7).
    Preset {
        name: String,
        #[arg(long, value_enum, default_value_t = ScaleArg::Desk)]
        scale: ScaleArg,
    },
    /// Every `*.conf` file in a directory.
    Sweep {
        dir: PathBuf,
        /// Concurrent runs (defaults to CHEMOKIN_THREADS or the core count).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Diagnostics on existing CSV output; results go to stdout.
    #[command(subcommand)]
    Diag(Diag),
}

#[derive(Subcommand)]
enum Diag {
    /// Centre second derivatives; inputs are PARAM=PROFILE.csv.
    Bimodality {
        #[arg(long, value_enum, default_value_t = SourceArg::Mc)]
        source: SourceArg,
        inputs: Vec<String>,
    },
    /// Rescaled-profile collapse error; inputs are BETA=PROFILE.csv.
    Collapse {
        #[arg(long, value_enum, default_value_t = NormArg::Peak)]
        norm: NormArg,
        inputs: Vec<String>,
    },
    /// Line of a 2D profile at a fixed coordinate.
    Slice {
        profile: PathBuf,
        #[arg(long, value_enum, default_value_t = AxisArg::X1)]
        axis: AxisArg,
        #[arg(long, allow_negative_numbers = true)]
        value: f64,
    },
    /// Diffusion-layer width √(ετ).
    Marker {
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        tau: f64,
    },
    /// Recompute the output digests of a run directory.
    Verify { run_dir: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum ScaleArg {
    Smoke,
    Desk,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum SourceArg {
    Mc,
    Exks,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormArg {
    Peak,
    Mean,
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    X1,
    X2,
}

/// Config text from a config file, or from a single-run manifest.
fn load_config_text(path: &Path) -> Result<String> {
    if path.extension().is_some_and(|e| e == "json") {
        let m = RunManifest::load(path)?;
        return match m.runs.as_slice() {
            [r] => Ok(r.config.clone()),
            _ => Err(Error::Input { path: path.into(), msg: "manifest does not hold exactly one run".into() }),
        };
    }
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn single_run(out: &Path, path: &Path, want: EngineKind, command: &str) -> Result<()> {
    let cfg = parse_config(&load_config_text(path)?)?;
    if cfg.engine != want {
        return Err(Error::config(format!(
            "config is for engine {}, not {}",
            cfg.engine.as_str(),
            want.as_str()
        )));
    }
    let start = Instant::now();
    let ex = pool().install(|| execute(&cfg, cfg.engine.as_str()))?;
    let (dir, _) = write_run_dir(out, command, vec![ex.record], &ex.files, start.elapsed().as_secs_f64())?;
    println!("{}", dir.display());
    Ok(())
}

fn split_input(s: &str) -> Result<(f64, PathBuf)> {
    let (k, v) = s.split_once('=').ok_or_else(|| Error::config(format!("expected VALUE=FILE, got `{s}`")))?;
    let x = k.parse::<f64>().map_err(|_| Error::config(format!("bad value `{k}` in `{s}`")))?;
    Ok((x, PathBuf::from(v)))
}

fn diag(d: Diag) -> Result<()> {
    match d {
        Diag::Bimodality { source, inputs } => {
            let src = match source {
                SourceArg::Mc => Source::Mc,
                SourceArg::Exks => Source::Exks,
            };
            let mut pts = Vec::new();
            for s in &inputs {
                let (param, path) = split_input(s)?;
                pts.push(BimodalityPoint::from_profile(param, &csv::read_profile(&path)?, src)?);
            }
            print!("{}", csv::bimodality(&pts));
        }
        Diag::Collapse { norm, inputs } => {
            let mut profiles = Vec::new();
            for s in &inputs {
                let (beta, path) = split_input(s)?;
                let p = csv::read_profile(&path)?;
                profiles.push(ScaledProfile { beta, x: p.axis_centers(), rho: p.rho });
            }
            let norm = match norm {
                NormArg::Peak => Normalization::Peak,
                NormArg::Mean => Normalization::Mean,
            };
            print!("{}", csv::report(&[("collapse_error".into(), Some(rescale_collapse(&profiles, norm)?))]));
        }
        Diag::Slice { profile, axis, value } => {
            let axis = match axis {
                AxisArg::X1 => Axis::X1,
                AxisArg::X2 => Axis::X2,
            };
            print!("{}", csv::slice(&slice_2d(&csv::read_profile(&profile)?, axis, value)?));
        }
        Diag::Marker { epsilon, tau } => {
            if !(epsilon >= 0.0 && tau >= 0.0) {
                return Err(Error::config("epsilon and tau must be non-negative"));
            }
            println!("{}", csv::num(diffusion_layer_marker(epsilon, tau)));
        }
        Diag::Verify { run_dir } => {
            let m = RunManifest::load(&run_dir.join(MANIFEST_FILE))?;
            let bad = m.verify(&run_dir);
            if !bad.is_empty() {
                return Err(Error::Input { path: run_dir, msg: format!("digest mismatch: {}", bad.join(", ")) });
            }
            println!("{} outputs verified", m.outputs.len());
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::McRun { config } => single_run(&cli.out, &config, EngineKind::Mc, "mc-run"),
        Cmd::KsRun { config } => single_run(&cli.out, &config, EngineKind::Ks, "ks-run"),
        Cmd::ExksRun { config } => single_run(&cli.out, &config, EngineKind::Exks, "exks-run"),
        Cmd::Preset { name, scale } => {
            let scale = match scale {
                ScaleArg::Smoke => Scale::Smoke,
                ScaleArg::Desk => Scale::Desk,
                ScaleArg::Full => Scale::Full,
            };
            let p = preset(&name, scale)?;
            let start = Instant::now();
            let (done, files) = pool().install(|| run_preset(&p))?;
            let records = done.into_iter().map(|e| e.record).collect();
            let command = format!("preset {} --scale {}", p.name, scale.as_str());
            let (dir, _) = write_run_dir(&cli.out, &command, records, &files, start.elapsed().as_secs_f64())?;
            println!("{}", dir.display());
            Ok(())
        }
        Cmd::Sweep { dir, jobs } => {
            let start = Instant::now();
            let entries = sweep(&dir, jobs.unwrap_or_else(threads))?;
            let mut files = vec![index(&entries)];
            let mut records = Vec::new();
            let mut failed = 0;
            for e in &entries {
                match &e.result {
                    Ok(ex) => {
                        files.extend(ex.files.iter().cloned());
                        records.push(ex.record.clone());
                    }
                    Err(err) => {
                        failed += 1;
                        eprintln!("{}: {err}", e.name);
                    }
                }
            }
            let command = format!("sweep {}", dir.display());
            let (out, _) = write_run_dir(&cli.out, &command, records, &files, start.elapsed().as_secs_f64())?;
            println!("{}", out.display());
            if failed > 0 {
                return Err(Error::Sweep { failed, total: entries.len() });
            }
            Ok(())
        }
        Cmd::Diag(d) => diag(d),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
