//! Named scenario presets for the canonical six-level transmon.
//!
//! Each preset expands to one or more [`RunConfig`]s (file stem + config).
//! Maps cover a (drive power, probe frequency) plane; cuts fix the power and
//! attach dressed diagnostics so the full, reduced, and decoupled curves can
//! be emitted side by side; the dephasing presets scan the pure-dephasing
//! rate at the two pinned interference points.

use crate::config::{DriveConfig, Grid, ModelKind, OracleSettings, OutputNames, RunConfig, SCHEMA_VERSION};
use crate::model::{ArraySpec, TransmonSpec};
use crate::{Error, Result};

/// All recognized preset names.
pub const PRESET_NAMES: [&str; 7] = [
    "fig2a", "fig2b", "fig3a", "fig3b", "fig3d", "fig3e", "fig4",
];

/// Single-photon resonant drive frequency for the canonical system.
pub const OMEGA_D_K1: f64 = 2100.0;
/// Two-photon resonant drive frequency.
pub const OMEGA_D_K2: f64 = 2050.0;
/// Three-photon resonant drive frequency.
pub const OMEGA_D_K3: f64 = 2000.0;

/// Pinned two-photon interference point: power Omega_d^2/gamma10^2 and
/// probe frequency.
pub const K2_POINT: (f64, f64) = (1e2, 1998.0);
/// Pinned three-photon sideband-crossing point.
pub const K3_POINT: (f64, f64) = (5.6e3, 2087.9);

fn canonical_system() -> ArraySpec {
    ArraySpec::single(TransmonSpec::canonical())
}

fn base(omega_d: f64, photon_order: usize, power: Grid, probe: Grid) -> RunConfig {
    RunConfig {
        schema_version: SCHEMA_VERSION,
        system: canonical_system(),
        drive: DriveConfig {
            omega_d,
            photon_order,
            power,
        },
        probe,
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

fn power_map() -> Grid {
    Grid::Range {
        start: 1e-1,
        stop: 1e4,
        count: 201,
        log: true,
    }
}

fn probe_map() -> Grid {
    // omega_p - omega_10 from -150 to +50 in units of gamma10
    Grid::Range {
        start: 1950.0,
        stop: 2150.0,
        count: 201,
        log: false,
    }
}

fn linear(start: f64, stop: f64, count: usize) -> Grid {
    Grid::Range {
        start,
        stop,
        count,
        log: false,
    }
}

/// Expand a preset name into (file stem, config) jobs.
pub fn preset(name: &str) -> Result<Vec<(String, RunConfig)>> {
    let jobs = match name {
        // Single-photon resonance map: the |1><->|0> branch splitting and the
        // |2><->|1> feature near omega_p - omega_10 = -alpha.
        "fig2a" => vec![("fig2a", base(OMEGA_D_K1, 1, power_map(), probe_map()))],
        // Line cut through the split single-photon resonance.
        "fig2b" => {
            let mut config = base(
                OMEGA_D_K1,
                1,
                Grid::Values(vec![1e3]),
                linear(2050.0, 2150.0, 201),
            );
            config.diagnostics = true;
            vec![("fig2b", config)]
        }
        // Two-photon resonance map.
        "fig3a" => vec![("fig3a", base(OMEGA_D_K2, 2, power_map(), probe_map()))],
        // Line cut at the two-photon interference power.
        "fig3b" => {
            let mut config = base(
                OMEGA_D_K2,
                2,
                Grid::Values(vec![K2_POINT.0]),
                linear(1975.0, 2025.0, 201),
            );
            config.diagnostics = true;
            vec![("fig3b", config)]
        }
        // Three-photon resonance map.
        "fig3d" => vec![("fig3d", base(OMEGA_D_K3, 3, power_map(), probe_map()))],
        // Line cut at the three-photon sideband crossing.
        "fig3e" => {
            let mut config = base(
                OMEGA_D_K3,
                3,
                Grid::Values(vec![K3_POINT.0]),
                linear(2080.0, 2096.0, 201),
            );
            config.diagnostics = true;
            vec![("fig3e", config)]
        }
        // Pure-dephasing scans at both pinned points; the grid step 0.002
        // lands exactly on gamma_phi = 0.014.
        "fig4" => {
            let scan = linear(0.0, 0.1, 51);
            let mut k2 = base(
                OMEGA_D_K2,
                2,
                Grid::Values(vec![K2_POINT.0]),
                Grid::Values(vec![K2_POINT.1]),
            );
            k2.dephasing_scan = Some(scan.clone());
            let mut k3 = base(
                OMEGA_D_K3,
                3,
                Grid::Values(vec![K3_POINT.0]),
                Grid::Values(vec![K3_POINT.1]),
            );
            k3.dephasing_scan = Some(scan);
            vec![("fig4_k2", k2), ("fig4_k3", k3)]
        }
        other => return Err(Error::UnknownPreset(other.to_string())),
    };
    Ok(jobs
        .into_iter()
        .map(|(stem, mut config)| {
            config.output.spectrum = format!("{stem}.csv");
            config.output.diagnostics = format!("{stem}_diagnostics.json");
            (stem.to_string(), config)
        })
        .collect())
}
