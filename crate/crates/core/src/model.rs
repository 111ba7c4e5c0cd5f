//! Physical system description: transmon level structure, decay and dephasing
//! rates, mirror geometry, and the drive/probe field parameters.
//!
//! All scalar rate coefficients consumed by the solvers are computed here.
//! Units: `gamma10` is the base decay rate and sets the scale (1.0 by
//! convention); frequencies are angular, in units of `gamma10`; positions in
//! units of `v_g / gamma10` with `v_g = 1`.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A single transmon in front of the mirror.
///
/// The level ladder is the anharmonic-oscillator one,
/// `omega_j = j*omega10 - j(j-1)/2 * alpha`, truncated at `levels` states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransmonSpec {
    /// Number of retained levels J (>= 2).
    pub levels: usize,
    /// |0> -> |1> transition frequency.
    pub omega10: f64,
    /// Anharmonicity alpha = omega10 - omega21.
    pub alpha: f64,
    /// Base decay rate; the unit scale, 1.0 by convention.
    pub gamma10: f64,
    /// Distance from the mirror (x >= 0). x = 0 is the field antinode.
    #[serde(default)]
    pub position: f64,
    /// Per-level pure dephasing rates, one entry per level j = 0..J-1.
    /// Empty means no dephasing.
    #[serde(default)]
    pub dephasing: Vec<f64>,
    /// Optional per-transition bare decay override, entries for
    /// j = 1..J-1 (transition j <-> j-1). Default is j * gamma10.
    #[serde(default)]
    pub bare_decay: Option<Vec<f64>>,
}

impl TransmonSpec {
    /// The canonical system of the reference figures: J = 6, omega10 = 2100,
    /// alpha = 100, gamma_{j,j-1} = j, atom at the antinode, no dephasing.
    pub fn canonical() -> Self {
        Self {
            levels: 6,
            omega10: 2100.0,
            alpha: 100.0,
            gamma10: 1.0,
            position: 0.0,
            dephasing: vec![],
            bare_decay: None,
        }
    }

    /// Uniform pure dephasing `gamma_phi` on every excited level (level 0
    /// keeps zero).
    pub fn with_uniform_dephasing(mut self, gamma_phi: f64) -> Self {
        let mut deph = vec![gamma_phi; self.levels];
        deph[0] = 0.0;
        self.dephasing = deph;
        self
    }

    pub fn with_levels(mut self, levels: usize) -> Self {
        self.levels = levels;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels < 2 {
            return Err(Error::InvalidSpec(format!(
                "need at least 2 levels, got {}",
                self.levels
            )));
        }
        if self.gamma10 <= 0.0 {
            return Err(Error::InvalidSpec("gamma10 must be positive".into()));
        }
        if self.position < 0.0 {
            return Err(Error::InvalidSpec("position must be >= 0".into()));
        }
        if self.omega10 <= (self.levels as f64 - 1.0) * self.alpha {
            return Err(Error::InvalidSpec(format!(
                "omega10 = {} must exceed (J-1)*alpha = {} to keep the ladder ordered",
                self.omega10,
                (self.levels as f64 - 1.0) * self.alpha
            )));
        }
        if self.dephasing.iter().any(|&g| g < 0.0) {
            return Err(Error::InvalidSpec("dephasing rates must be >= 0".into()));
        }
        if !self.dephasing.is_empty() && self.dephasing.len() != self.levels {
            return Err(Error::InvalidSpec(format!(
                "dephasing list has {} entries, expected {} (one per level)",
                self.dephasing.len(),
                self.levels
            )));
        }
        if let Some(bare) = &self.bare_decay {
            if bare.len() != self.levels - 1 {
                return Err(Error::InvalidSpec(format!(
                    "bare_decay list has {} entries, expected J-1 = {}",
                    bare.len(),
                    self.levels - 1
                )));
            }
            if bare.iter().any(|&g| g < 0.0) {
                return Err(Error::InvalidSpec("bare decay rates must be >= 0".into()));
            }
        }
        // Level ladder must be strictly increasing.
        let energies = level_energies(self);
        if energies.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidSpec(
                "level energies are not strictly increasing (alpha too large for J)".into(),
            ));
        }
        Ok(())
    }

    /// Dephasing rate of level j (0 when no dephasing configured).
    pub fn dephasing_rate(&self, j: usize) -> f64 {
        self.dephasing.get(j).copied().unwrap_or(0.0)
    }

    /// Bare decay rate of transition j <-> j-1 for j = 1..J-1.
    /// Defaults to j * gamma10.
    pub fn bare_decay_rate(&self, j: usize) -> f64 {
        debug_assert!(j >= 1 && j < self.levels);
        match &self.bare_decay {
            Some(list) => list[j - 1],
            None => j as f64 * self.gamma10,
        }
    }
}

/// The coherent driving field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriveSpec {
    /// Carrier frequency omega_d.
    pub omega_d: f64,
    /// Rabi frequency Omega_d.
    pub rabi: f64,
    /// Pump-photon order K; used by presets to set
    /// omega_d = (omega_K - omega_0) / K. Informational otherwise.
    #[serde(default = "default_photon_order")]
    pub photon_order: usize,
}

fn default_photon_order() -> usize {
    1
}

impl DriveSpec {
    /// Drive resonant with the K-photon transition |0> -> |K>.
    pub fn k_photon(transmon: &TransmonSpec, k: usize, rabi: f64) -> Self {
        let energies = level_energies(transmon);
        Self {
            omega_d: energies[k] / k as f64,
            rabi,
            photon_order: k,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rabi < 0.0 {
            return Err(Error::InvalidSpec("drive Rabi frequency must be >= 0".into()));
        }
        if self.omega_d <= 0.0 {
            return Err(Error::InvalidSpec("drive carrier frequency must be > 0".into()));
        }
        if self.photon_order < 1 {
            return Err(Error::InvalidSpec("photon order must be >= 1".into()));
        }
        Ok(())
    }
}

/// The weak probe field. The Rabi frequency only matters for the time-domain
/// oracle; the linear-response route is independent of it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeSpec {
    /// Probe frequency omega_p.
    pub omega_p: f64,
    /// Probe Rabi frequency Omega_p.
    pub rabi: f64,
}

impl ProbeSpec {
    pub fn validate(&self) -> Result<()> {
        if self.omega_p <= 0.0 {
            return Err(Error::InvalidSpec("probe frequency must be > 0".into()));
        }
        if self.rabi < 0.0 {
            return Err(Error::InvalidSpec("probe Rabi frequency must be >= 0".into()));
        }
        Ok(())
    }
}

/// A linear array of identical transmons along the waveguide.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArraySpec {
    pub transmons: Vec<TransmonSpec>,
}

impl ArraySpec {
    pub fn single(transmon: TransmonSpec) -> Self {
        Self {
            transmons: vec![transmon],
        }
    }

    pub fn len(&self) -> usize {
        self.transmons.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transmons.is_empty()
    }

    /// Levels per transmon (identical across the array).
    pub fn levels(&self) -> usize {
        self.transmons[0].levels
    }

    /// Full Hilbert-space dimension J^N.
    pub fn dim(&self) -> usize {
        self.levels().pow(self.len() as u32)
    }

    pub fn reference(&self) -> &TransmonSpec {
        &self.transmons[0]
    }

    pub fn validate(&self) -> Result<()> {
        if self.transmons.is_empty() {
            return Err(Error::InvalidSpec("array must contain at least one transmon".into()));
        }
        for t in &self.transmons {
            t.validate()?;
        }
        let first = &self.transmons[0];
        for t in &self.transmons[1..] {
            if t.levels != first.levels || t.omega10 != first.omega10 || t.alpha != first.alpha {
                return Err(Error::InvalidSpec(
                    "all transmons in an array must share the same level structure".into(),
                ));
            }
        }
        if self
            .transmons
            .windows(2)
            .any(|w| w[1].position < w[0].position)
        {
            return Err(Error::InvalidSpec("positions must be nondecreasing".into()));
        }
        Ok(())
    }
}

/// All scalar rate coefficients consumed by the Liouvillian builder.
///
/// Indexing: transitions run over j = 1..J-1 stored at index j-1; atom pairs
/// over (n, m) with n, m = 0..N-1.
#[derive(Debug, Clone)]
pub struct RateTable {
    /// Bare decay rates gamma0_{j,j-1}.
    pub bare_decay: Vec<f64>,
    /// Mirror-modified single-atom rates gamma_{j,j-1}(x_n) per atom.
    pub mirror_decay: Vec<Vec<f64>>,
    /// Collective decay gamma^{nm}_{j,j-1}.
    pub collective_decay: Vec<Vec<Vec<f64>>>,
    /// Collective Lamb shift Delta^{nm}_{j,j-1}.
    pub lamb_shift: Vec<Vec<Vec<f64>>>,
    /// Transition wavenumbers k_{j,j-1} = omega_{j,j-1} / v_g.
    pub wavenumbers: Vec<f64>,
    /// Per-atom, per-level pure dephasing rates.
    pub dephasing: Vec<Vec<f64>>,
}

impl RateTable {
    pub fn transitions(&self) -> usize {
        self.bare_decay.len()
    }

    pub fn atoms(&self) -> usize {
        self.mirror_decay.len()
    }
}

/// Level energies omega_j = j*omega10 - j(j-1)/2 * alpha for j = 0..J-1.
///
/// Does not validate; `build_levels` is the checked entry point.
pub fn level_energies(spec: &TransmonSpec) -> Vec<f64> {
    (0..spec.levels)
        .map(|j| {
            let j = j as f64;
            j * spec.omega10 - j * (j - 1.0) / 2.0 * spec.alpha
        })
        .collect()
}

/// Checked level ladder construction.
pub fn build_levels(spec: &TransmonSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    Ok(level_energies(spec))
}

/// Mirror-modified decay rates gamma_{j,j-1}(x) = gamma0_{j,j-1} cos^2(k_{j,j-1} x)
/// for j = 1..J-1.
pub fn decay_rates(spec: &TransmonSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let energies = level_energies(spec);
    Ok((1..spec.levels)
        .map(|j| {
            let k = energies[j] - energies[j - 1];
            spec.bare_decay_rate(j) * (k * spec.position).cos().powi(2)
        })
        .collect())
}

/// Collective decay rates, Lamb shifts, and mirror-modified single-atom rates
/// for the whole array.
///
/// gamma^{nm}_{j,j-1} = gamma_{j,j-1}/2 * Re[e^{ik(x_n+x_m)} + e^{ik|x_n-x_m|}],
/// Delta^{nm}_{j,j-1} = gamma_{j,j-1}/4 * Im[same bracket],
/// with gamma_{j,j-1} the bare rate at the transition frequency.
pub fn collective_rates(array: &ArraySpec) -> Result<RateTable> {
    array.validate()?;
    let spec = array.reference();
    let n_atoms = array.len();
    let levels = spec.levels;
    let energies = level_energies(spec);
    let wavenumbers: Vec<f64> = (1..levels).map(|j| energies[j] - energies[j - 1]).collect();
    let bare_decay: Vec<f64> = (1..levels).map(|j| spec.bare_decay_rate(j)).collect();

    let mirror_decay: Vec<Vec<f64>> = array
        .transmons
        .iter()
        .map(|t| {
            wavenumbers
                .iter()
                .zip(&bare_decay)
                .map(|(&k, &g0)| g0 * (k * t.position).cos().powi(2))
                .collect()
        })
        .collect();

    let mut collective_decay = vec![vec![vec![0.0; levels - 1]; n_atoms]; n_atoms];
    let mut lamb_shift = vec![vec![vec![0.0; levels - 1]; n_atoms]; n_atoms];
    for n in 0..n_atoms {
        for m in 0..n_atoms {
            let xn = array.transmons[n].position;
            let xm = array.transmons[m].position;
            for (t, (&k, &g0)) in wavenumbers.iter().zip(&bare_decay).enumerate() {
                let sum_phase = k * (xn + xm);
                let diff_phase = k * (xn - xm).abs();
                let re = sum_phase.cos() + diff_phase.cos();
                let im = sum_phase.sin() + diff_phase.sin();
                collective_decay[n][m][t] = g0 / 2.0 * re;
                lamb_shift[n][m][t] = g0 / 4.0 * im;
            }
        }
    }

    let dephasing = array
        .transmons
        .iter()
        .map(|t| (0..levels).map(|j| t.dephasing_rate(j)).collect())
        .collect();

    Ok(RateTable {
        bare_decay,
        mirror_decay,
        collective_decay,
        lamb_shift,
        wavenumbers,
        dephasing,
    })
}

/// Advisory check that the level cutoff is justified: population of the top
/// level of each transmon in the given state.
///
/// Returns (top-level population, pass) where pass means below tolerance.
pub fn validate_cutoff(
    rho0: &nalgebra::DMatrix<num_complex::Complex64>,
    array: &ArraySpec,
    tolerance: f64,
) -> (f64, bool) {
    let levels = array.levels();
    let n_atoms = array.len();
    let dim = array.dim();
    debug_assert_eq!(rho0.nrows(), dim);
    // Sum of populations of product states where any atom sits in its top level.
    let mut top = 0.0;
    for idx in 0..dim {
        let mut rem = idx;
        let mut has_top = false;
        for _ in 0..n_atoms {
            if rem % levels == levels - 1 {
                has_top = true;
            }
            rem /= levels;
        }
        if has_top {
            top += rho0[(idx, idx)].re;
        }
    }
    (top, top <= tolerance)
}
