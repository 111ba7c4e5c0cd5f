//! Command-line surface: preset expansion, config-driven sweeps, branch
//! annotation, and time-domain cross-checks.
//!
//! Outputs are deterministic: identical config and version produce identical
//! bytes for any worker count. Files are written to a `.partial` path and
//! renamed on completion, so an interrupted run never leaves a file that
//! looks finished.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{ModelKind, RunConfig, SCHEMA_VERSION};
use crate::dressed::{analyze, SidebandReport};
use crate::model::{ArraySpec, DriveSpec};
use crate::oracle::{oracle_reflection, OracleOptions};
use crate::response::{reflection_at, sweep, SweepOptions};
use crate::{Error, Result};

#[derive(Parser)]
#[command(name = "transmon-amp", version, about = "Probe reflection spectra of driven multi-level transmons in a semi-infinite waveguide")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a named preset scenario.
    Preset {
        /// One of: fig2a, fig2b, fig3a, fig3b, fig3d, fig3e, fig4.
        name: String,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Worker thread count override.
        #[arg(long)]
        workers: Option<usize>,
        /// Active-sideband detuning window override (units of gamma10).
        #[arg(long)]
        threshold: Option<f64>,
        /// Computation route override: full, reduced, single, or oracle.
        #[arg(long)]
        model: Option<String>,
    },
    /// Run a JSON config file.
    Run {
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        model: Option<String>,
    },
    /// Summarize the sideband branches of a finished run directory.
    Annotate {
        run_dir: PathBuf,
        /// Re-identify sidebands with a different detuning window.
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Compare the linear-response route against time-domain integration at
    /// randomly sampled grid points.
    OracleCheck {
        config: PathBuf,
        #[arg(long, default_value_t = 20)]
        points: usize,
        /// Seed for the grid-point sampler.
        #[arg(long, default_value_t = 0)]
        seed_grid: u64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

/// Binary entry point.
pub fn main() {
    let cli = Cli::parse();
    if let Err(e) = dispatch(cli) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

fn parse_model(name: &str) -> Result<ModelKind> {
    match name {
        "full" => Ok(ModelKind::Full),
        "reduced" => Ok(ModelKind::Reduced),
        "single" => Ok(ModelKind::Single),
        "oracle" => Ok(ModelKind::Oracle),
        other => Err(Error::Config {
            path: "--model".to_string(),
            message: format!("unknown model `{other}` (expected full, reduced, single, or oracle)"),
        }),
    }
}

fn apply_overrides(
    config: &mut RunConfig,
    workers: Option<usize>,
    threshold: Option<f64>,
    model: Option<&str>,
) -> Result<()> {
    if let Some(w) = workers {
        config.workers = w;
    }
    if let Some(t) = threshold {
        config.sideband_threshold = t;
    }
    if let Some(m) = model {
        config.model = parse_model(m)?;
    }
    config.validate()
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Preset {
            name,
            out,
            workers,
            threshold,
            model,
        } => {
            for (stem, mut config) in crate::presets::preset(&name)? {
                apply_overrides(&mut config, workers, threshold, model.as_deref())?;
                let artifacts = execute_run(&config, &out)?;
                println!("{stem}: wrote {}", artifacts.spectrum_csv.display());
            }
            Ok(())
        }
        Command::Run {
            config,
            out,
            workers,
            threshold,
            model,
        } => {
            let mut config = RunConfig::from_path(&config)?;
            apply_overrides(&mut config, workers, threshold, model.as_deref())?;
            let artifacts = execute_run(&config, &out)?;
            println!("wrote {}", artifacts.spectrum_csv.display());
            Ok(())
        }
        Command::Annotate { run_dir, threshold } => {
            let path = annotate_run_dir(&run_dir, threshold)?;
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::OracleCheck {
            config,
            points,
            seed_grid,
            out,
        } => {
            let config = RunConfig::from_path(&config)?;
            let report = oracle_check(&config, points, seed_grid, &out)?;
            println!(
                "{} points, max |r_oracle - r_full| = {:.3e}",
                report.points.len(),
                report.max_abs_diff
            );
            if report.max_abs_diff > report.tolerance {
                return Err(Error::NonConvergence {
                    drift: report.max_abs_diff,
                });
            }
            Ok(())
        }
    }
}

/// One evaluated grid point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointRecord {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_phi: Option<f64>,
    pub drive_power: f64,
    pub omega_p: f64,
    pub r: f64,
    pub flags: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<SidebandReport>,
}

/// Files produced by [`execute_run`].
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub config_json: PathBuf,
    pub spectrum_csv: PathBuf,
    pub diagnostics_json: Option<PathBuf>,
}

/// Diagnostics file layout.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiagnosticsFile {
    pub schema_version: u32,
    pub config: RunConfig,
    pub points: Vec<PointRecord>,
}

fn with_uniform_dephasing(system: &ArraySpec, gamma_phi: f64) -> ArraySpec {
    ArraySpec {
        transmons: system
            .transmons
            .iter()
            .map(|t| t.clone().with_uniform_dephasing(gamma_phi))
            .collect(),
    }
}

/// Evaluate the full grid of a config. Rows are ordered dephasing-outer,
/// drive-power middle, probe-frequency inner.
pub fn evaluate(config: &RunConfig) -> Result<Vec<PointRecord>> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Config {
            path: "workers".to_string(),
            message: e.to_string(),
        })?;
    pool.install(|| evaluate_inner(config))
}

fn evaluate_inner(config: &RunConfig) -> Result<Vec<PointRecord>> {
    let powers = config.drive.power.points();
    let probes = config.probe.points();
    let scan: Vec<Option<f64>> = match &config.dephasing_scan {
        None => vec![None],
        Some(grid) => grid.points().into_iter().map(Some).collect(),
    };
    let gamma10 = config.system.reference().gamma10;
    let template = DriveSpec {
        omega_d: config.drive.omega_d,
        rabi: 0.0,
        photon_order: config.drive.photon_order,
    };

    let mut records = Vec::with_capacity(scan.len() * powers.len() * probes.len());
    for gamma_phi in scan {
        let system = match gamma_phi {
            Some(g) => with_uniform_dephasing(&config.system, g),
            None => config.system.clone(),
        };
        match config.model {
            ModelKind::Full => {
                let options = SweepOptions {
                    diagnostics: config.diagnostics,
                    sideband_threshold: config.sideband_threshold,
                    ..SweepOptions::default()
                };
                let result = sweep(&system, &template, &powers, &probes, &options)?;
                for (i, &power) in powers.iter().enumerate() {
                    for (j, &omega_p) in probes.iter().enumerate() {
                        let idx = i * probes.len() + j;
                        records.push(PointRecord {
                            gamma_phi,
                            drive_power: power,
                            omega_p,
                            r: result.r[idx],
                            flags: result.flags[idx].clone(),
                            report: result
                                .diagnostics
                                .as_ref()
                                .and_then(|d| d[idx].clone()),
                        });
                    }
                }
            }
            _ => {
                use rayon::prelude::*;
                let grid: Vec<(f64, f64)> = powers
                    .iter()
                    .flat_map(|&p| probes.iter().map(move |&w| (p, w)))
                    .collect();
                let rows: Vec<PointRecord> = grid
                    .par_iter()
                    .map(|&(power, omega_p)| {
                        let drive = DriveSpec {
                            rabi: power.sqrt() * gamma10,
                            ..template.clone()
                        };
                        point_record(config, &system, &drive, power, omega_p, gamma_phi)
                    })
                    .collect();
                records.extend(rows);
            }
        }
    }
    Ok(records)
}

fn point_record(
    config: &RunConfig,
    system: &ArraySpec,
    drive: &DriveSpec,
    power: f64,
    omega_p: f64,
    gamma_phi: Option<f64>,
) -> PointRecord {
    let mut flags = String::new();
    let mut report = None;
    let r = match config.model {
        ModelKind::Full => match reflection_at(system, drive, omega_p) {
            Ok(r) => r,
            Err(e) => {
                flags = e.to_string();
                f64::NAN
            }
        },
        ModelKind::Reduced | ModelKind::Single => {
            match analyze(system, drive, omega_p, config.sideband_threshold) {
                Ok(rep) => {
                    let r = match config.model {
                        ModelKind::Reduced => {
                            if config.interference {
                                rep.r_reduced
                            } else {
                                rep.r_decoupled
                            }
                        }
                        _ => match rep.r_single_best {
                            Some(r) => r,
                            None => {
                                flags = "no active sideband".to_string();
                                f64::NAN
                            }
                        },
                    };
                    report = Some(rep);
                    r
                }
                Err(e) => {
                    flags = e.to_string();
                    f64::NAN
                }
            }
        }
        ModelKind::Oracle => {
            let options = OracleOptions {
                probe_rabi: config.oracle.probe_rabi,
                settle: config.oracle.settle,
                ..OracleOptions::default()
            };
            match oracle_reflection(system, drive, omega_p, &options) {
                Ok(r) => r,
                Err(e) => {
                    flags = e.to_string();
                    f64::NAN
                }
            }
        }
    };
    if config.diagnostics && report.is_none() && flags.is_empty() {
        report = analyze(system, drive, omega_p, config.sideband_threshold).ok();
    }
    PointRecord {
        gamma_phi,
        drive_power: power,
        omega_p,
        r,
        flags,
        report,
    }
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let partial = path.with_extension(match path.extension().and_then(|e| e.to_str()) {
        Some(ext) => format!("{ext}.partial"),
        None => "partial".to_string(),
    });
    std::fs::write(&partial, contents)?;
    std::fs::rename(&partial, path)?;
    Ok(())
}

fn format_float(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else {
        format!("{v}")
    }
}

/// Render the spectrum CSV: a `#`-prefixed resolved-parameter header followed
/// by the fixed column set. Extra columns are appended after `flags` so the
/// leading four stay stable across run types.
pub fn render_csv(config: &RunConfig, records: &[PointRecord]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# schema_version = {SCHEMA_VERSION}");
    let _ = writeln!(
        out,
        "# config = {}",
        serde_json::to_string(config).expect("config serializes")
    );
    let has_scan = config.dephasing_scan.is_some();
    let has_diag = config.diagnostics;
    let mut header = vec!["drive_power", "omega_p", "r", "flags"];
    if has_scan {
        header.push("gamma_phi");
    }
    if has_diag {
        header.extend(["r_full", "r_reduced", "r_decoupled", "r_single", "classification"]);
    }
    let _ = writeln!(out, "{}", header.join(","));
    for rec in records {
        let mut fields = vec![
            format_float(rec.drive_power),
            format_float(rec.omega_p),
            format_float(rec.r),
            rec.flags.replace(',', ";"),
        ];
        if has_scan {
            fields.push(format_float(rec.gamma_phi.unwrap_or(0.0)));
        }
        if has_diag {
            match &rec.report {
                Some(rep) => {
                    fields.push(format_float(rep.r_full));
                    fields.push(format_float(rep.r_reduced));
                    fields.push(format_float(rep.r_decoupled));
                    fields.push(format_float(rep.r_single_best.unwrap_or(f64::NAN)));
                    fields.push(
                        serde_json::to_string(&rep.classification)
                            .expect("classification serializes")
                            .trim_matches('"')
                            .to_string(),
                    );
                }
                None => {
                    fields.extend(["NaN", "NaN", "NaN", "NaN", "none"].map(String::from));
                }
            }
        }
        let _ = writeln!(out, "{}", fields.join(","));
    }
    out
}

/// Execute one run config into `out_dir`: resolved config JSON, spectrum CSV,
/// and (when diagnostics are enabled) a diagnostics JSON.
pub fn execute_run(config: &RunConfig, out_dir: &Path) -> Result<RunArtifacts> {
    config.validate()?;
    std::fs::create_dir_all(out_dir)?;
    let records = evaluate(config)?;

    let stem = config
        .output
        .spectrum
        .strip_suffix(".csv")
        .unwrap_or(&config.output.spectrum);
    let config_json = out_dir.join(format!("{stem}_config.json"));
    write_atomic(
        &config_json,
        &format!("{}\n", serde_json::to_string_pretty(config)?),
    )?;

    let spectrum_csv = out_dir.join(&config.output.spectrum);
    write_atomic(&spectrum_csv, &render_csv(config, &records))?;

    let diagnostics_json = if config.diagnostics {
        let path = out_dir.join(&config.output.diagnostics);
        let file = DiagnosticsFile {
            schema_version: SCHEMA_VERSION,
            config: config.clone(),
            points: records,
        };
        write_atomic(&path, &format!("{}\n", serde_json::to_string(&file)?))?;
        Some(path)
    } else {
        None
    };

    Ok(RunArtifacts {
        config_json,
        spectrum_csv,
        diagnostics_json,
    })
}

/// Per-branch summary in an annotation file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BranchAnnotation {
    /// Dressed index of the |D, F+1> member.
    pub upper: usize,
    /// Dressed index of the |D, F> member.
    pub lower: usize,
    pub f_offset: i8,
    /// Number of grid points where this transition is active.
    pub points: usize,
    /// Gain classification counts over those points.
    pub classifications: BTreeMap<String, usize>,
    pub max_r_full: f64,
    pub min_r_full: f64,
    /// True when the transition is population-inverted at any active point.
    pub any_inversion: bool,
}

/// Annotation file layout.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnnotationFile {
    pub schema_version: u32,
    pub sideband_threshold: f64,
    pub branches: Vec<BranchAnnotation>,
    pub points_without_active_sidebands: usize,
}

/// Build branch annotations from per-point reports.
pub fn annotate_reports(
    reports: &[&SidebandReport],
    sideband_threshold: f64,
) -> AnnotationFile {
    let mut branches: BTreeMap<(usize, usize), BranchAnnotation> = BTreeMap::new();
    let mut empty = 0usize;
    for rep in reports {
        if rep.transitions.is_empty() {
            empty += 1;
            continue;
        }
        let class = serde_json::to_string(&rep.classification)
            .expect("classification serializes")
            .trim_matches('"')
            .to_string();
        for t in &rep.transitions {
            let entry = branches
                .entry((t.upper, t.lower))
                .or_insert_with(|| BranchAnnotation {
                    upper: t.upper,
                    lower: t.lower,
                    f_offset: t.f_offset,
                    points: 0,
                    classifications: BTreeMap::new(),
                    max_r_full: f64::NEG_INFINITY,
                    min_r_full: f64::INFINITY,
                    any_inversion: false,
                });
            entry.points += 1;
            *entry.classifications.entry(class.clone()).or_insert(0) += 1;
            entry.max_r_full = entry.max_r_full.max(rep.r_full);
            entry.min_r_full = entry.min_r_full.min(rep.r_full);
            entry.any_inversion |= t.inversion > 1e-6;
        }
    }
    AnnotationFile {
        schema_version: SCHEMA_VERSION,
        sideband_threshold,
        branches: branches.into_values().collect(),
        points_without_active_sidebands: empty,
    }
}

/// Annotate a finished run directory. Reads the diagnostics file when present
/// and compatible with the requested threshold; otherwise recomputes the
/// dressed analysis over the run's grid.
pub fn annotate_run_dir(run_dir: &Path, threshold: Option<f64>) -> Result<PathBuf> {
    let mut config = find_run_config(run_dir)?;
    let recompute = match threshold {
        Some(t) if (t - config.sideband_threshold).abs() > 1e-12 => {
            config.sideband_threshold = t;
            true
        }
        _ => false,
    };
    let diag_path = run_dir.join(&config.output.diagnostics);
    let points: Vec<PointRecord> = if !recompute && diag_path.is_file() {
        let file: DiagnosticsFile = serde_json::from_str(&std::fs::read_to_string(&diag_path)?)?;
        file.points
    } else {
        let mut cfg = config.clone();
        cfg.diagnostics = true;
        evaluate(&cfg)?
    };
    let reports: Vec<&SidebandReport> = points.iter().filter_map(|p| p.report.as_ref()).collect();
    if reports.is_empty() {
        return Err(Error::Config {
            path: run_dir.display().to_string(),
            message: "no dressed diagnostics available to annotate".to_string(),
        });
    }
    let annotation = annotate_reports(&reports, config.sideband_threshold);
    let stem = config
        .output
        .spectrum
        .strip_suffix(".csv")
        .unwrap_or(&config.output.spectrum);
    let path = run_dir.join(format!("{stem}_annotations.json"));
    write_atomic(&path, &format!("{}\n", serde_json::to_string_pretty(&annotation)?))?;
    Ok(path)
}

fn find_run_config(run_dir: &Path) -> Result<RunConfig> {
    let mut candidates: Vec<PathBuf> = std::fs::read_dir(run_dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.ends_with("_config.json"))
        })
        .collect();
    candidates.sort();
    let path = candidates.into_iter().next().ok_or_else(|| Error::Config {
        path: run_dir.display().to_string(),
        message: "no *_config.json found; run a sweep here first".to_string(),
    })?;
    RunConfig::from_path(&path)
}

/// One compared point in an oracle check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleCheckPoint {
    pub drive_power: f64,
    pub omega_p: f64,
    pub r_full: f64,
    pub r_oracle: f64,
    pub abs_diff: f64,
}

/// Oracle check summary.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleCheckReport {
    pub schema_version: u32,
    pub seed: u64,
    pub tolerance: f64,
    pub max_abs_diff: f64,
    pub points: Vec<OracleCheckPoint>,
}

/// Sample grid points of `config` and compare the linear-response r against
/// the time-domain demodulated r. Writes `oracle_check.csv` into `out_dir`.
pub fn oracle_check(
    config: &RunConfig,
    points: usize,
    seed: u64,
    out_dir: &Path,
) -> Result<OracleCheckReport> {
    config.validate()?;
    std::fs::create_dir_all(out_dir)?;
    let powers = config.drive.power.points();
    let probes = config.probe.points();
    let gamma10 = config.system.reference().gamma10;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let options = OracleOptions {
        probe_rabi: config.oracle.probe_rabi,
        settle: config.oracle.settle,
        ..OracleOptions::default()
    };

    let mut out_points = Vec::with_capacity(points);
    let mut max_abs_diff: f64 = 0.0;
    for _ in 0..points {
        let power = powers[rng.gen_range(0..powers.len())];
        let omega_p = probes[rng.gen_range(0..probes.len())];
        let drive = DriveSpec {
            omega_d: config.drive.omega_d,
            rabi: power.sqrt() * gamma10,
            photon_order: config.drive.photon_order,
        };
        let r_full = reflection_at(&config.system, &drive, omega_p)?;
        let r_oracle = oracle_reflection(&config.system, &drive, omega_p, &options)?;
        let abs_diff = (r_full - r_oracle).abs();
        max_abs_diff = max_abs_diff.max(abs_diff);
        out_points.push(OracleCheckPoint {
            drive_power: power,
            omega_p,
            r_full,
            r_oracle,
            abs_diff,
        });
    }

    let mut csv = String::new();
    let _ = writeln!(csv, "# schema_version = {SCHEMA_VERSION}");
    let _ = writeln!(csv, "# seed = {seed}");
    let _ = writeln!(csv, "drive_power,omega_p,r_full,r_oracle,abs_diff");
    for p in &out_points {
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            format_float(p.drive_power),
            format_float(p.omega_p),
            format_float(p.r_full),
            format_float(p.r_oracle),
            format_float(p.abs_diff)
        );
    }
    write_atomic(&out_dir.join("oracle_check.csv"), &csv)?;

    Ok(OracleCheckReport {
        schema_version: SCHEMA_VERSION,
        seed,
        tolerance: 1e-3,
        max_abs_diff,
        points: out_points,
    })
}
