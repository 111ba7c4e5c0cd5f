//! Run configuration: the JSON document consumed by the command-line surface.
//!
//! A [`RunConfig`] fully determines one sweep: the physical system, the drive
//! power grid, the probe frequency grid, an optional pure-dephasing scan, the
//! computation route, and output settings. Identical configs produce
//! byte-identical outputs for any worker count.

use serde::{Deserialize, Serialize};

use crate::model::ArraySpec;
use crate::{Error, Result};

/// Version of the config/output schema; embedded in every output file.
pub const SCHEMA_VERSION: u32 = 1;

fn default_schema_version() -> u32 {
    SCHEMA_VERSION
}

fn default_true() -> bool {
    true
}

fn default_workers() -> usize {
    1
}

fn default_threshold() -> f64 {
    1.0
}

/// A one-dimensional grid: either explicit values or a generated range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Values(Vec<f64>),
    Range {
        start: f64,
        stop: f64,
        count: usize,
        /// Log-spaced when true (start/stop must then be positive).
        #[serde(default)]
        log: bool,
    },
}

impl Grid {
    /// Materialize the grid points in order.
    pub fn points(&self) -> Vec<f64> {
        match self {
            Grid::Values(v) => v.clone(),
            Grid::Range {
                start,
                stop,
                count,
                log,
            } => {
                let n = *count;
                if n == 1 {
                    return vec![*start];
                }
                (0..n)
                    .map(|i| {
                        let t = i as f64 / (n - 1) as f64;
                        if *log {
                            (start.ln() + t * (stop.ln() - start.ln())).exp()
                        } else {
                            start + t * (stop - start)
                        }
                    })
                    .collect()
            }
        }
    }

    fn validate(&self, path: &str) -> Result<()> {
        let fail = |message: String| {
            Err(Error::Config {
                path: path.to_string(),
                message,
            })
        };
        match self {
            Grid::Values(v) => {
                if v.is_empty() {
                    return fail("grid must be nonempty".into());
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return fail("grid values must be finite".into());
                }
            }
            Grid::Range {
                start,
                stop,
                count,
                log,
            } => {
                if *count == 0 {
                    return fail("count must be at least 1".into());
                }
                if !start.is_finite() || !stop.is_finite() {
                    return fail("range bounds must be finite".into());
                }
                if *log && (*start <= 0.0 || *stop <= 0.0) {
                    return fail("log-spaced range requires positive bounds".into());
                }
            }
        }
        Ok(())
    }
}

/// Drive settings: carrier frequency, photon order of the resonance, and the
/// grid of powers Omega_d^2 / gamma10^2 to sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriveConfig {
    pub omega_d: f64,
    #[serde(default = "DriveConfig::default_order")]
    pub photon_order: usize,
    pub power: Grid,
}

impl DriveConfig {
    fn default_order() -> usize {
        1
    }
}

/// Which computation route produces the `r` column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// Steady state + linear response of the full master equation.
    #[default]
    Full,
    /// Reduced M-sideband model (respects the `interference` toggle).
    Reduced,
    /// Best single-sideband closed form among the active transitions.
    Single,
    /// Time-domain integration with lock-in demodulation.
    Oracle,
}

/// Settings for the time-domain route.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleSettings {
    /// Probe Rabi amplitude in units of gamma10.
    pub probe_rabi: f64,
    /// Settling time before demodulation, in units of 1/gamma10.
    pub settle: f64,
}

impl Default for OracleSettings {
    fn default() -> Self {
        Self {
            probe_rabi: 1e-3,
            settle: 16.0,
        }
    }
}

/// Output file names, relative to the run directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputNames {
    pub spectrum: String,
    pub diagnostics: String,
}

impl Default for OutputNames {
    fn default() -> Self {
        Self {
            spectrum: "spectrum.csv".to_string(),
            diagnostics: "diagnostics.json".to_string(),
        }
    }
}

/// One complete run description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    pub system: ArraySpec,
    pub drive: DriveConfig,
    /// Probe frequencies omega_p.
    pub probe: Grid,
    /// When present, every (power, probe) point is additionally swept over
    /// these pure-dephasing rates; the CSV gains a gamma_phi column.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dephasing_scan: Option<Grid>,
    #[serde(default)]
    pub model: ModelKind,
    /// Keep the coupling between near-degenerate sideband transitions in the
    /// reduced model; `false` solves the decoupled (interference-free) system.
    #[serde(default = "default_true")]
    pub interference: bool,
    /// Attach per-point dressed diagnostics (and extra CSV columns).
    #[serde(default)]
    pub diagnostics: bool,
    #[serde(default = "default_workers")]
    pub workers: usize,
    /// Detuning window (units of gamma10) for the active-sideband search.
    #[serde(default = "default_threshold")]
    pub sideband_threshold: f64,
    #[serde(default)]
    pub oracle: OracleSettings,
    #[serde(default)]
    pub output: OutputNames,
}

impl RunConfig {
    /// Validate every field; error messages carry the offending field path.
    pub fn validate(&self) -> Result<()> {
        let fail = |path: &str, message: String| {
            Err(Error::Config {
                path: path.to_string(),
                message,
            })
        };
        if self.schema_version != SCHEMA_VERSION {
            return fail(
                "schema_version",
                format!(
                    "unsupported version {} (this build reads {})",
                    self.schema_version, SCHEMA_VERSION
                ),
            );
        }
        self.system
            .validate()
            .map_err(|e| Error::Config {
                path: "system".to_string(),
                message: e.to_string(),
            })?;
        if self.drive.photon_order == 0 {
            return fail("drive.photon_order", "must be at least 1".into());
        }
        if !self.drive.omega_d.is_finite() || self.drive.omega_d <= 0.0 {
            return fail("drive.omega_d", "must be a positive frequency".into());
        }
        self.drive.power.validate("drive.power")?;
        if self.drive.power.points().iter().any(|&p| p < 0.0) {
            return fail("drive.power", "powers must be nonnegative".into());
        }
        self.probe.validate("probe")?;
        if let Some(scan) = &self.dephasing_scan {
            scan.validate("dephasing_scan")?;
            if scan.points().iter().any(|&g| g < 0.0) {
                return fail("dephasing_scan", "rates must be nonnegative".into());
            }
        }
        if self.workers == 0 {
            return fail("workers", "must be at least 1".into());
        }
        if !(self.sideband_threshold > 0.0) {
            return fail("sideband_threshold", "must be positive".into());
        }
        if !(self.oracle.probe_rabi > 0.0) {
            return fail("oracle.probe_rabi", "must be positive".into());
        }
        if self.output.spectrum.is_empty() || self.output.diagnostics.is_empty() {
            return fail("output", "file names must be nonempty".into());
        }
        Ok(())
    }

    /// Read and validate a config from a JSON file.
    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let config: RunConfig = serde_json::from_str(&text).map_err(|e| Error::Config {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        config.validate()?;
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TransmonSpec;

    fn minimal() -> RunConfig {
        RunConfig {
            schema_version: SCHEMA_VERSION,
            system: ArraySpec::single(TransmonSpec::canonical()),
            drive: DriveConfig {
                omega_d: 2100.0,
                photon_order: 1,
                power: Grid::Values(vec![100.0]),
            },
            probe: Grid::Range {
                start: 2090.0,
                stop: 2110.0,
                count: 5,
                log: false,
            },
            dephasing_scan: None,
            model: ModelKind::Full,
            interference: true,
            diagnostics: false,
            workers: 1,
            sideband_threshold: 1.0,
            oracle: OracleSettings::default(),
            output: OutputNames::default(),
        }
    }

    #[test]
    fn linear_and_log_grids_materialize() {
        let lin = Grid::Range {
            start: 0.0,
            stop: 1.0,
            count: 5,
            log: false,
        };
        assert_eq!(lin.points(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let log = Grid::Range {
            start: 0.1,
            stop: 1000.0,
            count: 5,
            log: true,
        };
        let pts = log.points();
        assert!((pts[0] - 0.1).abs() < 1e-12);
        assert!((pts[4] - 1000.0).abs() < 1e-9);
        assert!((pts[2] - 10.0).abs() < 1e-9);
    }

    #[test]
    fn json_round_trip_preserves_config() {
        let config = minimal();
        let text = serde_json::to_string_pretty(&config).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(config, back);
    }

    #[test]
    fn defaults_fill_optional_fields() {
        let text = r#"{
            "system": {"transmons": [{"levels": 2, "omega10": 2100.0, "alpha": 100.0,
                        "gamma10": 1.0, "position": 0.0, "dephasing": [], "bare_decay": null}]},
            "drive": {"omega_d": 2100.0, "power": [1.0]},
            "probe": [2100.0]
        }"#;
        let config: RunConfig = serde_json::from_str(text).unwrap();
        assert_eq!(config.schema_version, SCHEMA_VERSION);
        assert_eq!(config.model, ModelKind::Full);
        assert!(config.interference);
        assert_eq!(config.workers, 1);
        config.validate().unwrap();
    }

    #[test]
    fn validation_reports_field_paths() {
        let mut config = minimal();
        config.drive.power = Grid::Values(vec![]);
        match config.validate() {
            Err(crate::Error::Config { path, .. }) => assert_eq!(path, "drive.power"),
            other => panic!("expected config error, got {other:?}"),
        }
        let mut config = minimal();
        config.workers = 0;
        assert!(matches!(
            config.validate(),
            Err(crate::Error::Config { ref path, .. }) if path == "workers"
        ));
        let mut config = minimal();
        config.dephasing_scan = Some(Grid::Values(vec![-0.1]));
        assert!(config.validate().is_err());
    }

    #[test]
    fn log_grid_with_nonpositive_bounds_is_rejected() {
        let mut config = minimal();
        config.drive.power = Grid::Range {
            start: 0.0,
            stop: 10.0,
            count: 3,
            log: true,
        };
        assert!(config.validate().is_err());
    }
}
