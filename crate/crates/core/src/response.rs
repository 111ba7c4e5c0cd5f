//! Steady-state and weak-probe linear-response solvers; the full-model route
//! to the reflection amplitude.
//!
//! The probe expansion is
//! `rho(t) ~ rho0 + (Omega_p / gamma10) rho1 e^{-i (omega_p - omega_d) t}`,
//! so rho1 is Omega_p-free and the reflection amplitude is probe-power
//! independent by construction.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::{collective_rates, level_energies, ArraySpec, DriveSpec};
use crate::operators::{
    build_liouvillian0, build_probe_superops, ladder_op, unvectorize, vectorize, Operator,
    Superoperator,
};
use crate::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// The probe-free steady state rho0 of the zeroth-order Liouvillian.
#[derive(Debug, Clone)]
pub struct SteadyState {
    pub rho0: Operator,
    /// ||L0[rho0]||_2 after trace normalization.
    pub residual: f64,
}

/// First-order response rho1 at probe-drive detuning Delta_pd.
#[derive(Debug, Clone)]
pub struct LinearResponse {
    pub rho1: Operator,
    pub detuning: f64,
}

/// Flat grid of reflection amplitudes with optional per-point diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumResult {
    /// Drive powers Omega_d^2 / gamma10^2 (outer axis).
    pub drive_powers: Vec<f64>,
    /// Probe frequencies omega_p (inner axis).
    pub probe_freqs: Vec<f64>,
    /// r values, row-major over (drive, probe). NaN marks failed cells.
    pub r: Vec<f64>,
    /// Per-point flags; empty string means clean.
    pub flags: Vec<String>,
    /// Optional per-point dressed diagnostics.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<Vec<Option<crate::dressed::SidebandReport>>>,
}

impl SpectrumResult {
    pub fn at(&self, drive_idx: usize, probe_idx: usize) -> f64 {
        self.r[drive_idx * self.probe_freqs.len() + probe_idx]
    }
}

/// Solve `L0[rho0] = 0, Tr rho0 = 1` through the bordered linear system:
/// the row of L0 that propagates the (0,0) element is replaced by the trace
/// functional. Deterministic and robust near exceptional points.
pub fn steady_state(l0: &Superoperator) -> Result<SteadyState> {
    let sdim = l0.nrows();
    let dim = (sdim as f64).sqrt().round() as usize;
    debug_assert_eq!(dim * dim, sdim);
    let mut bordered = l0.clone();
    let mut rhs = DVector::zeros(sdim);
    // row 0 propagates element (0,0); overwrite with sum of diagonal elements
    for c in 0..sdim {
        bordered[(0, c)] = Complex64::default();
    }
    for j in 0..dim {
        bordered[(0, j * dim + j)] = Complex64::new(1.0, 0.0);
    }
    rhs[0] = Complex64::new(1.0, 0.0);

    let lu = bordered.lu();
    let solution = lu
        .solve(&rhs)
        .ok_or_else(|| degenerate_diagnosis(l0))
        .map_err(|e| e)?;
    let rho0 = unvectorize(&solution, dim);
    let residual = (l0 * solution).norm();
    if residual > 1e-6 {
        return Err(degenerate_diagnosis(l0));
    }
    Ok(SteadyState { rho0, residual })
}

/// Count near-null singular directions to report a useful error.
fn degenerate_diagnosis(l0: &Superoperator) -> Error {
    let tol = 1e-8;
    let svd = l0.clone().svd(false, false);
    let scale = svd.singular_values.max();
    let dim = svd
        .singular_values
        .iter()
        .filter(|&&s| s < tol * scale.max(1.0))
        .count();
    Error::DegenerateSteadyState { dim, tol }
}

/// Solve `(L0 + i Delta_pd) rho1 = -gamma10 S_plus[rho0]`.
pub fn linear_response_rho1(
    l0: &Superoperator,
    s_plus: &Superoperator,
    rho0: &Operator,
    detuning: f64,
    gamma10: f64,
) -> Result<LinearResponse> {
    let sdim = l0.nrows();
    let dim = rho0.nrows();
    let shifted = l0 + DMatrix::identity(sdim, sdim) * (I * detuning);
    let rhs = s_plus * vectorize(rho0) * Complex64::new(-gamma10, 0.0);
    let lu = shifted.lu();
    let solution = lu.solve(&rhs).ok_or(Error::SingularAtZeroDetuning)?;
    let rho1 = unvectorize(&solution, dim);
    Ok(LinearResponse {
        rho1,
        detuning,
    })
}

/// Input-output weights gamma_tilde_j(x_n) / gamma10 for every atom and
/// transition.
fn reflection_weights(array: &ArraySpec, omega_p: f64) -> Vec<Vec<f64>> {
    let spec = array.reference();
    let energies = level_energies(spec);
    array
        .transmons
        .iter()
        .map(|t| {
            (1..spec.levels)
                .map(|j| {
                    let k = energies[j] - energies[j - 1];
                    let g_mirror = t.bare_decay_rate(j) * (k * t.position).cos().powi(2);
                    let tilde = (j as f64 * omega_p * spec.gamma10 * g_mirror / spec.omega10)
                        .sqrt()
                        * (k * t.position).cos();
                    tilde / spec.gamma10
                })
                .collect()
        })
        .collect()
}

/// Weighted lowering operator W = sum_{n,j} (gamma_tilde_j(x_n)/gamma10)
/// sigma^n_{j-1,j}; the response sum is Tr(W rho).
pub fn weighted_lowering(array: &ArraySpec, omega_p: f64) -> Operator {
    let levels = array.levels();
    let n_atoms = array.len();
    let weights = reflection_weights(array, omega_p);
    let dim = array.dim();
    let mut w: Operator = DMatrix::zeros(dim, dim);
    for n in 0..n_atoms {
        for j in 1..levels {
            w += ladder_op(levels, n_atoms, n, j - 1, j)
                * Complex64::new(weights[n][j - 1], 0.0);
        }
    }
    w
}

/// Complex response sum `sum_{n,j} (gamma_tilde_j(x_n)/gamma10) Tr(sigma^n_{j-1,j} rho1)`.
pub fn response_sum(rho1: &Operator, array: &ArraySpec, omega_p: f64) -> Complex64 {
    (weighted_lowering(array, omega_p) * rho1).trace()
}

/// Reflection amplitude `r = |1 + 2i sum (gamma_tilde/gamma10) Tr(sigma_{j-1,j} rho1)|`.
pub fn reflection(rho1: &Operator, array: &ArraySpec, omega_p: f64) -> f64 {
    (Complex64::new(1.0, 0.0) + 2.0 * I * response_sum(rho1, array, omega_p)).norm()
}

/// Options for [`sweep`].
#[derive(Debug, Clone)]
pub struct SweepOptions {
    /// Nudge applied when omega_p coincides with omega_d (the shifted
    /// operator inherits the L0 zero mode there).
    pub zero_detuning_nudge: f64,
    /// Attach dressed diagnostics per point.
    pub diagnostics: bool,
    /// Near-resonance threshold for the diagnostics sideband search.
    pub sideband_threshold: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            zero_detuning_nudge: 1e-6,
            diagnostics: false,
            sideband_threshold: 1.0,
        }
    }
}

/// Full-model reflection at a single (drive, probe) point.
pub fn reflection_at(array: &ArraySpec, drive: &DriveSpec, omega_p: f64) -> Result<f64> {
    let rates = collective_rates(array)?;
    let l0 = build_liouvillian0(array, drive, &rates)?;
    let ss = steady_state(&l0)?;
    point_reflection(array, drive, &l0, &ss, omega_p, 1e-6)
}

fn point_reflection(
    array: &ArraySpec,
    drive: &DriveSpec,
    l0: &Superoperator,
    ss: &SteadyState,
    omega_p: f64,
    nudge: f64,
) -> Result<f64> {
    let gamma10 = array.reference().gamma10;
    let mut detuning = omega_p - drive.omega_d;
    if detuning == 0.0 {
        detuning = nudge * gamma10;
    }
    let (s_plus, _) = build_probe_superops(array, omega_p);
    let lr = linear_response_rho1(l0, &s_plus, &ss.rho0, detuning, gamma10)?;
    Ok(reflection(&lr.rho1, array, omega_p))
}

/// Sweep the full model over a (drive power, probe frequency) grid.
///
/// Per-point failures are recorded as NaN cells with a flag; the sweep never
/// aborts. Points are evaluated in parallel; output ordering is fixed by the
/// grid index, so results are identical for any worker count.
pub fn sweep(
    array: &ArraySpec,
    drive_template: &DriveSpec,
    drive_powers: &[f64],
    probe_freqs: &[f64],
    options: &SweepOptions,
) -> Result<SpectrumResult> {
    array.validate()?;
    let rates = collective_rates(array)?;
    let gamma10 = array.reference().gamma10;

    let rows: Vec<Vec<(f64, String, Option<crate::dressed::SidebandReport>)>> = drive_powers
        .par_iter()
        .map(|&power| {
            let drive = DriveSpec {
                rabi: power.sqrt() * gamma10,
                ..drive_template.clone()
            };
            let prep = build_liouvillian0(array, &drive, &rates)
                .and_then(|l0| steady_state(&l0).map(|ss| (l0, ss)));
            let (l0, ss) = match prep {
                Ok(v) => v,
                Err(e) => {
                    return probe_freqs
                        .iter()
                        .map(|_| (f64::NAN, e.to_string(), None))
                        .collect();
                }
            };
            probe_freqs
                .iter()
                .map(|&omega_p| {
                    match point_reflection(
                        array,
                        &drive,
                        &l0,
                        &ss,
                        omega_p,
                        options.zero_detuning_nudge,
                    ) {
                        Ok(r) => {
                            let diag = if options.diagnostics {
                                crate::dressed::analyze(
                                    array,
                                    &drive,
                                    omega_p,
                                    options.sideband_threshold,
                                )
                                .ok()
                            } else {
                                None
                            };
                            (r, String::new(), diag)
                        }
                        Err(e) => (f64::NAN, e.to_string(), None),
                    }
                })
                .collect()
        })
        .collect();

    let mut r = Vec::with_capacity(drive_powers.len() * probe_freqs.len());
    let mut flags = Vec::with_capacity(r.capacity());
    let mut diags = Vec::with_capacity(r.capacity());
    for row in rows {
        for (value, flag, diag) in row {
            r.push(value);
            flags.push(flag);
            diags.push(diag);
        }
    }
    Ok(SpectrumResult {
        drive_powers: drive_powers.to_vec(),
        probe_freqs: probe_freqs.to_vec(),
        r,
        flags,
        diagnostics: options.diagnostics.then_some(diags),
    })
}
