//! Time-domain cross-validation of the perturbative reflection calculation.
//!
//! The master equation is integrated directly with an explicit oscillating
//! probe term — no linear-response ansatz — and the reflected amplitude is
//! extracted by lock-in demodulation of the emitted field at the probe-drive
//! beat frequency. This is the independent check that the steady-state plus
//! first-order route in [`crate::response`] computes the right number.
//!
//! The superoperators are very sparse (a few thousand nonzeros out of
//! `dim^4`), so the fixed-step fourth-order integration runs on CSR
//! matrix-vector products.

use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::{CooMatrix, CsrMatrix};
use num_complex::Complex64;

use crate::model::{collective_rates, ArraySpec, DriveSpec, ProbeSpec};
use crate::operators::{build_probe_superops, vectorize, Operator, Superoperator};
use crate::response::{steady_state, weighted_lowering};
use crate::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Convert a dense superoperator to CSR, dropping exact zeros.
fn to_csr(dense: &Superoperator) -> CsrMatrix<Complex64> {
    let mut coo = CooMatrix::new(dense.nrows(), dense.ncols());
    for col in 0..dense.ncols() {
        for row in 0..dense.nrows() {
            let z = dense[(row, col)];
            if z.norm_sqr() > 0.0 {
                coo.push(row, col, z);
            }
        }
    }
    CsrMatrix::from(&coo)
}

/// Result of a time-domain integration.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Fixed integration step.
    pub dt: f64,
    /// Number of steps taken; samples exist at `t_k = k dt`, `k = 0..=n_steps`.
    pub n_steps: usize,
    /// Emitted-field response sum `S(t_k) = sum gamma_tilde_j <sigma_{j-1,j}>`
    /// at every step.
    pub response: Vec<Complex64>,
    /// Thinned density-matrix samples (empty unless requested).
    pub states: Vec<Operator>,
    /// Times of the thinned samples.
    pub sample_times: Vec<f64>,
    /// Probe amplitude used during the run.
    pub probe_rabi: f64,
    /// Base decay rate, for normalizing the demodulated projection.
    pub gamma10: f64,
}

impl Trajectory {
    pub fn t_final(&self) -> f64 {
        self.n_steps as f64 * self.dt
    }
}

/// Integrate `d rho/dt = L0 rho + Omega_p (S_plus e^{-i Delta t} +
/// S_minus e^{+i Delta t}) rho` with classic fixed-step fourth-order steps,
/// starting from `initial`. Stores the emitted response sum at every step and
/// up to `max_states` thinned density matrices.
#[allow(clippy::too_many_arguments)]
pub fn integrate_time_domain_from(
    array: &ArraySpec,
    drive: &DriveSpec,
    probe: &ProbeSpec,
    t_final: f64,
    dt: f64,
    initial: &Operator,
    max_states: usize,
) -> Result<Trajectory> {
    if !(dt > 0.0) || !(t_final > 0.0) {
        return Err(Error::InvalidSpec(
            "time-domain integration needs positive dt and t_final".into(),
        ));
    }
    probe.validate()?;
    let rates = collective_rates(array)?;
    let l0 = to_csr(&crate::operators::build_liouvillian0(array, drive, &rates)?);
    let (sp_dense, sm_dense) = build_probe_superops(array, probe.omega_p);
    let sp = to_csr(&sp_dense);
    let sm = to_csr(&sm_dense);
    let gamma10 = array.reference().gamma10;
    let delta = probe.omega_p - drive.omega_d;
    let omega_probe = probe.rabi;

    let dim = array.dim();
    let w_op = weighted_lowering(array, probe.omega_p);
    // Tr(W rho) as a flat dot product against vec(rho) (column-major)
    let mut w_flat: DVector<Complex64> = DVector::zeros(dim * dim);
    for a in 0..dim {
        for b in 0..dim {
            w_flat[a * dim + b] = w_op[(a, b)];
        }
    }
    let measure = |y: &DVector<Complex64>| -> Complex64 {
        w_flat.iter().zip(y.iter()).map(|(w, v)| w * v).sum()
    };

    let n_steps = (t_final / dt).round().max(1.0) as usize;
    let deriv = |t: f64, y: &DVector<Complex64>| -> DVector<Complex64> {
        let mut out = &l0 * y;
        if omega_probe != 0.0 {
            let phase = Complex64::from_polar(omega_probe, -delta * t);
            out += &sp * y * phase;
            out += &sm * y * phase.conj();
        }
        out
    };

    let mut y = vectorize(initial);
    let mut response = Vec::with_capacity(n_steps + 1);
    response.push(measure(&y));
    let stride = if max_states > 0 {
        (n_steps / max_states).max(1)
    } else {
        usize::MAX
    };
    let mut states = Vec::new();
    let mut sample_times = Vec::new();

    for step in 0..n_steps {
        let t = step as f64 * dt;
        let k1 = deriv(t, &y);
        let k2 = deriv(t + dt / 2.0, &(&y + &k1 * Complex64::new(dt / 2.0, 0.0)));
        let k3 = deriv(t + dt / 2.0, &(&y + &k2 * Complex64::new(dt / 2.0, 0.0)));
        let k4 = deriv(t + dt, &(&y + &k3 * Complex64::new(dt, 0.0)));
        y += (k1 + k2 * Complex64::new(2.0, 0.0) + k3 * Complex64::new(2.0, 0.0) + k4)
            * Complex64::new(dt / 6.0, 0.0);
        response.push(measure(&y));
        if (step + 1) % stride == 0 && states.len() < max_states {
            states.push(crate::operators::unvectorize(&y, dim));
            sample_times.push(t + dt);
        }
    }

    Ok(Trajectory {
        dt,
        n_steps,
        response,
        states,
        sample_times,
        probe_rabi: probe.rabi,
        gamma10,
    })
}

/// Ground-state-start convenience wrapper around
/// [`integrate_time_domain_from`].
pub fn integrate_time_domain(
    array: &ArraySpec,
    drive: &DriveSpec,
    probe: &ProbeSpec,
    t_final: f64,
    dt: f64,
) -> Result<Trajectory> {
    let dim = array.dim();
    let mut ground: Operator = DMatrix::zeros(dim, dim);
    ground[(0, 0)] = Complex64::new(1.0, 0.0);
    integrate_time_domain_from(array, drive, probe, t_final, dt, &ground, 0)
}

/// Demodulated reflection and its convergence diagnostics.
#[derive(Debug, Clone)]
pub struct Demodulated {
    pub r: f64,
    /// Lock-in projection of the response onto `e^{-i Delta t}`, normalized
    /// by Omega_p / gamma10.
    pub projection: Complex64,
    /// Change of the projection between the last two demodulation windows,
    /// in the same normalization.
    pub drift: f64,
}

/// Project the emitted response onto the probe beat `e^{-i Delta t}` over an
/// integer number of beat periods at the end of the trajectory and form
/// `r = |1 + 2i projection|`.
///
/// The step must divide the beat period (arrange this when choosing `dt`);
/// otherwise the window cannot close on a whole period and the projection
/// leaks, which is reported as [`Error::WindowMismatch`].
pub fn demodulate_reflection(traj: &Trajectory, omega_p: f64, omega_d: f64) -> Result<Demodulated> {
    let delta = omega_p - omega_d;
    if delta == 0.0 {
        return Err(Error::WindowMismatch);
    }
    if traj.probe_rabi == 0.0 {
        return Err(Error::InvalidSpec(
            "demodulation needs a nonzero probe amplitude".into(),
        ));
    }
    let period = std::f64::consts::TAU / delta.abs();
    let steps_per_period = period / traj.dt;
    let n_p = steps_per_period.round() as usize;
    if n_p == 0 || (steps_per_period - n_p as f64).abs() > 1e-6 * steps_per_period {
        return Err(Error::WindowMismatch);
    }
    // two windows at most fill the second half of the trajectory (the
    // earlier copy is the convergence reference); the first half is left for
    // the transient
    let m = (traj.n_steps / 4) / n_p;
    if m == 0 {
        return Err(Error::WindowMismatch);
    }
    let window_steps = m * n_p;

    let project = |end: usize| -> Complex64 {
        let start = end - window_steps;
        let mut acc = Complex64::default();
        for k in start..=end {
            let t = k as f64 * traj.dt;
            let weight = if k == start || k == end { 0.5 } else { 1.0 };
            acc += traj.response[k] * Complex64::from_polar(weight, delta * t);
        }
        acc * Complex64::new(traj.dt / (window_steps as f64 * traj.dt), 0.0)
    };

    let scale = Complex64::new(traj.gamma10 / traj.probe_rabi, 0.0);
    let last = project(traj.n_steps) * scale;
    let prev = project(traj.n_steps - window_steps) * scale;
    let amplitude = Complex64::new(1.0, 0.0) + 2.0 * I * last;
    Ok(Demodulated {
        r: amplitude.norm(),
        projection: last,
        drift: (last - prev).norm(),
    })
}

/// Options for [`oracle_reflection`].
#[derive(Debug, Clone)]
pub struct OracleOptions {
    /// Probe amplitude Omega_p (units of gamma10).
    pub probe_rabi: f64,
    /// Settling time before the demodulation windows (units of 1/gamma10).
    pub settle: f64,
    /// Minimum length of one demodulation window (units of 1/gamma10).
    pub min_window: f64,
    /// Minimum number of beat periods per window.
    pub min_periods: usize,
    /// Upper bound on the integration step (units of 1/gamma10).
    pub dt_cap: f64,
    /// Permitted projection drift between windows before the run is declared
    /// unsettled.
    pub drift_tolerance: f64,
    /// Start from the ground state instead of the drive-only steady state
    /// (needs a longer `settle`).
    pub start_from_ground: bool,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            probe_rabi: 1e-3,
            settle: 16.0,
            min_window: 4.0,
            min_periods: 5,
            dt_cap: 1e-3,
            drift_tolerance: 1e-3,
            start_from_ground: false,
        }
    }
}

/// Step size rule: the smallest of the cap, a twentieth of the drive period
/// scale, and a twentieth of the beat period scale.
pub fn step_size(gamma10: f64, drive_rabi: f64, delta: f64, dt_cap: f64) -> f64 {
    let mut dt = dt_cap / gamma10;
    if drive_rabi > 0.0 {
        dt = dt.min(0.05 / drive_rabi);
    }
    if delta != 0.0 {
        dt = dt.min(0.05 / delta.abs());
    }
    dt
}

/// End-to-end time-domain reflection at one spectral point: pick the step,
/// integrate past the transient, demodulate, and check convergence.
pub fn oracle_reflection(
    array: &ArraySpec,
    drive: &DriveSpec,
    omega_p: f64,
    opts: &OracleOptions,
) -> Result<f64> {
    let gamma10 = array.reference().gamma10;
    let delta = omega_p - drive.omega_d;
    let probe = ProbeSpec {
        omega_p,
        rabi: opts.probe_rabi,
    };
    let initial = if opts.start_from_ground {
        let dim = array.dim();
        let mut g: Operator = DMatrix::zeros(dim, dim);
        g[(0, 0)] = Complex64::new(1.0, 0.0);
        g
    } else {
        let rates = collective_rates(array)?;
        let l0 = crate::operators::build_liouvillian0(array, drive, &rates)?;
        steady_state(&l0)?.rho0
    };

    if delta == 0.0 {
        return oracle_reflection_dc(array, drive, &probe, &initial, opts);
    }

    let dt0 = step_size(gamma10, drive.rabi, delta, opts.dt_cap);
    // snap the step so it divides the beat period exactly
    let period = std::f64::consts::TAU / delta.abs();
    let n_p = (period / dt0).ceil() as usize;
    let dt = period / n_p as f64;
    let m = (opts.min_periods as f64).max((opts.min_window / period).ceil()) as usize;
    // two demodulation windows, preceded by a settle phase at least as long
    // so the demodulator (which uses the last half) stays clear of the
    // transient
    let settle_steps = ((opts.settle / dt).ceil() as usize).max(2 * m * n_p);
    let n_steps = settle_steps + 2 * m * n_p;
    let t_final = n_steps as f64 * dt;

    let traj = integrate_time_domain_from(array, drive, &probe, t_final, dt, &initial, 0)?;
    let demod = demodulate_reflection(&traj, omega_p, drive.omega_d)?;
    if demod.drift > opts.drift_tolerance {
        return Err(Error::NonConvergence { drift: demod.drift });
    }
    Ok(demod.r)
}

/// Zero-beat special case: with the probe exactly on the drive frequency the
/// probe term is static, so the response is read off as the settled shift of
/// the emitted field relative to the probe-free steady state.
fn oracle_reflection_dc(
    array: &ArraySpec,
    drive: &DriveSpec,
    probe: &ProbeSpec,
    initial: &Operator,
    opts: &OracleOptions,
) -> Result<f64> {
    let gamma10 = array.reference().gamma10;
    let dt = step_size(gamma10, drive.rabi, 0.0, opts.dt_cap);
    let t_final = opts.settle + 2.0 * opts.min_window;
    let traj = integrate_time_domain_from(array, drive, probe, t_final, dt, initial, 0)?;

    let window_steps = ((opts.min_window / dt).ceil() as usize).min(traj.n_steps / 2);
    let mean = |end: usize| -> Complex64 {
        let start = end - window_steps;
        let sum: Complex64 = traj.response[start..=end].iter().sum();
        sum / Complex64::new((window_steps + 1) as f64, 0.0)
    };
    let baseline = (weighted_lowering(array, probe.omega_p) * initial).trace();
    let scale = Complex64::new(gamma10 / probe.rabi, 0.0);
    let last = (mean(traj.n_steps) - baseline) * scale;
    let prev = (mean(traj.n_steps - window_steps) - baseline) * scale;
    let drift = (last - prev).norm();
    if drift > opts.drift_tolerance {
        return Err(Error::NonConvergence { drift });
    }
    Ok((Complex64::new(1.0, 0.0) + 2.0 * I * last).norm())
}
