//! Hilbert-space operators and Liouville-space superoperators.
//!
//! Vectorization convention: column-major stacking, so the matrix element
//! (r, c) of a density matrix lives at vector index `c * dim + r` and the
//! superoperator for `A rho B` is `B^T (x) A`.
//!
//! Sign convention: the coherent part of the zeroth-order Liouvillian is
//! `-i [H_rf, .]` with the rotating-frame Hamiltonian of
//! [`rotating_frame_hamiltonian`]; the undriven two-level coherence then
//! decays as `e^{(-gamma/2 - i delta) t}` on rho_{01} with
//! `delta = omega_d - omega_10`. The dressed module inherits its signs from
//! this generator.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::model::{level_energies, ArraySpec, DriveSpec, RateTable};
use crate::{Error, Result};

pub type Operator = DMatrix<Complex64>;
pub type Superoperator = DMatrix<Complex64>;

/// Default cap on the full Hilbert-space dimension J^N.
pub const DIM_CAP: usize = 1024;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Transition operator sigma^n_{j,k} = |j><k| on atom `atom`, identity on the
/// other factors. Atom 0 owns the least significant digit of the product
/// index.
pub fn ladder_op(levels: usize, n_atoms: usize, atom: usize, j: usize, k: usize) -> Operator {
    let dim = levels.pow(n_atoms as u32);
    let stride = levels.pow(atom as u32);
    let mut op = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        if (col / stride) % levels != k {
            continue;
        }
        let row = (col as isize + (j as isize - k as isize) * stride as isize) as usize;
        op[(row, col)] = c(1.0);
    }
    op
}

/// The full indexed family sigma^n_{j,k} for one atom, as a closure-friendly
/// builder with a dimension guard.
pub fn ladder_ops(levels: usize, n_atoms: usize) -> Result<Vec<Vec<Vec<Operator>>>> {
    if levels < 2 || n_atoms < 1 {
        return Err(Error::InvalidSpec("need J >= 2 and N >= 1".into()));
    }
    let dim = levels
        .checked_pow(n_atoms as u32)
        .ok_or(Error::DimensionOverflow(usize::MAX, DIM_CAP))?;
    if dim > DIM_CAP {
        return Err(Error::DimensionOverflow(dim, DIM_CAP));
    }
    Ok((0..n_atoms)
        .map(|n| {
            (0..levels)
                .map(|j| {
                    (0..levels)
                        .map(|k| ladder_op(levels, n_atoms, n, j, k))
                        .collect()
                })
                .collect()
        })
        .collect())
}

/// vec(A rho) = (I (x) A) vec(rho).
pub fn spre(a: &Operator) -> Superoperator {
    let id = DMatrix::identity(a.nrows(), a.nrows());
    id.kronecker(a)
}

/// vec(rho A) = (A^T (x) I) vec(rho).
pub fn spost(a: &Operator) -> Superoperator {
    let id = DMatrix::identity(a.nrows(), a.nrows());
    a.transpose().kronecker(&id)
}

/// vec(A rho B) = (B^T (x) A) vec(rho).
pub fn sprepost(a: &Operator, b: &Operator) -> Superoperator {
    b.transpose().kronecker(a)
}

/// -i [H, .]
pub fn commutator_superop(h: &Operator) -> Superoperator {
    (spre(h) - spost(h)) * (-I)
}

/// Column-major vectorization.
pub fn vectorize(rho: &Operator) -> nalgebra::DVector<Complex64> {
    nalgebra::DVector::from_column_slice(rho.as_slice())
}

/// Inverse of [`vectorize`].
pub fn unvectorize(v: &nalgebra::DVector<Complex64>, dim: usize) -> Operator {
    DMatrix::from_column_slice(dim, dim, v.as_slice())
}

/// The rotating-frame atom + drive Hamiltonian whose `-i [H, .]` equals the
/// coherent part of the zeroth-order Liouvillian. Its eigenvectors are the
/// dressed states.
pub fn rotating_frame_hamiltonian(array: &ArraySpec, drive: &DriveSpec) -> Operator {
    let levels = array.levels();
    let n_atoms = array.len();
    let dim = array.dim();
    let energies = level_energies(array.reference());
    let mut h = DMatrix::zeros(dim, dim);
    for n in 0..n_atoms {
        let x = array.transmons[n].position;
        let drive_weight = drive.rabi * (drive.omega_d * x).cos() / 2.0;
        for j in 0..levels {
            let proj = ladder_op(levels, n_atoms, n, j, j);
            h += proj * c(energies[j] - j as f64 * drive.omega_d);
            if j >= 1 {
                let raise = ladder_op(levels, n_atoms, n, j, j - 1);
                let lower = ladder_op(levels, n_atoms, n, j - 1, j);
                h -= (raise + lower) * c((j as f64).sqrt() * drive_weight);
            }
        }
    }
    h
}

/// Dissipative part of the generator: collective decay, waveguide-mediated
/// dipole-dipole (Lamb) coupling, and pure dephasing. No coherent drive or
/// detuning terms.
pub fn dissipator_superop(array: &ArraySpec, rates: &RateTable) -> Superoperator {
    let levels = array.levels();
    let n_atoms = array.len();
    let dim = array.dim();
    let sdim = dim * dim;
    let mut l: Superoperator = DMatrix::zeros(sdim, sdim);

    for n in 0..n_atoms {
        for m in 0..n_atoms {
            for j in 1..levels {
                for t in 1..levels {
                    let g = rates.collective_decay[n][m][j - 1];
                    let shift = rates.lamb_shift[n][m][j - 1];
                    if g == 0.0 && shift == 0.0 {
                        continue;
                    }
                    let weight = ((j * t) as f64).sqrt();
                    // A = sigma^m_{j-1,j}, B = sigma^n_{t,t-1}
                    let a = ladder_op(levels, n_atoms, m, j - 1, j);
                    let b = ladder_op(levels, n_atoms, n, t, t - 1);
                    let a_dag = a.adjoint();
                    let b_dag = b.adjoint();
                    // decay row: (g w / 2) ([A rho, B] + H.c.)
                    // Lamb row:  (i shift w) ([A rho, B] - H.c.)
                    let fwd = c(weight) * (g / 2.0 + I * shift);
                    let bwd = c(weight) * (g / 2.0 - I * shift);
                    l += (sprepost(&a, &b) - spre(&(&b * &a))) * fwd;
                    l += (sprepost(&b_dag, &a_dag) - spost(&(&a_dag * &b_dag))) * bwd;
                }
            }
        }
        // dephasing: gamma_phi_j ([P rho, P] + H.c.) with P = sigma_jj
        for j in 0..levels {
            let g_phi = rates.dephasing[n][j];
            if g_phi == 0.0 {
                continue;
            }
            let p = ladder_op(levels, n_atoms, n, j, j);
            l += (sprepost(&p, &p) * c(2.0) - spre(&p) - spost(&p)) * c(g_phi);
        }
    }
    l
}

/// The zeroth-order (probe-free) Liouvillian in the omega_d rotating frame:
/// detuning + drive + collective dissipation + dephasing.
pub fn build_liouvillian0(
    array: &ArraySpec,
    drive: &DriveSpec,
    rates: &RateTable,
) -> Result<Superoperator> {
    array.validate()?;
    drive.validate()?;
    if array.dim() > DIM_CAP {
        return Err(Error::DimensionOverflow(array.dim(), DIM_CAP));
    }
    if rates.atoms() != array.len() || rates.transitions() != array.levels() - 1 {
        return Err(Error::InvalidSpec(
            "rate table does not match the array layout".into(),
        ));
    }
    let h = rotating_frame_hamiltonian(array, drive);
    Ok(commutator_superop(&h) + dissipator_superop(array, rates))
}

/// The main-text single-atom generator, written out row by row as an
/// independent construction path (no Lamb-shift term, plain mirror-modified
/// rates). Used to cross-check the collective builder at N = 1.
pub fn build_liouvillian0_single(
    array: &ArraySpec,
    drive: &DriveSpec,
    rates: &RateTable,
) -> Result<Superoperator> {
    array.validate()?;
    if array.len() != 1 {
        return Err(Error::InvalidSpec(
            "single-atom construction path requires N = 1".into(),
        ));
    }
    let levels = array.levels();
    let dim = levels;
    let sdim = dim * dim;
    let energies = level_energies(array.reference());
    let x = array.transmons[0].position;
    let mut l: Superoperator = DMatrix::zeros(sdim, sdim);

    // detuning row: i sum_j (j omega_d - omega_j) [sigma_jj, .]
    for j in 0..levels {
        let proj = ladder_op(levels, 1, 0, j, j);
        l += (spre(&proj) - spost(&proj)) * (I * c(j as f64 * drive.omega_d - energies[j]));
    }
    // drive row: i sum_j (sqrt(j) Omega_d cos(k_d x)/2) ([sigma_{j,j-1}, .] - H.c.)
    for j in 1..levels {
        let w = (j as f64).sqrt() * drive.rabi * (drive.omega_d * x).cos() / 2.0;
        let raise = ladder_op(levels, 1, 0, j, j - 1);
        let both = &raise + raise.adjoint();
        l += (spre(&both) - spost(&both)) * (I * c(w));
    }
    // decay row: sum_{jl} (sqrt(jl) gamma_{j,j-1}/2) ([sigma_{j-1,j} rho, sigma_{l,l-1}] + H.c.)
    for j in 1..levels {
        for t in 1..levels {
            let w = ((j * t) as f64).sqrt() * rates.mirror_decay[0][j - 1] / 2.0;
            let a = ladder_op(levels, 1, 0, j - 1, j);
            let b = ladder_op(levels, 1, 0, t, t - 1);
            let a_dag = a.adjoint();
            let b_dag = b.adjoint();
            l += (sprepost(&a, &b) - spre(&(&b * &a))) * c(w);
            l += (sprepost(&b_dag, &a_dag) - spost(&(&a_dag * &b_dag))) * c(w);
        }
    }
    // dephasing row
    for j in 0..levels {
        let g_phi = rates.dephasing[0][j];
        if g_phi == 0.0 {
            continue;
        }
        let p = ladder_op(levels, 1, 0, j, j);
        l += (sprepost(&p, &p) * c(2.0) - spre(&p) - spost(&p)) * c(g_phi);
    }
    Ok(l)
}

/// Probe source superoperators (S_plus, S_minus).
///
/// S_plus carries the coefficient of `e^{+i(omega_d - omega_p) t}` in the
/// master equation probe row, with the factor Omega_p stripped:
/// `S_plus = i sum_{n,j} sqrt(j) cos(k_p x_n)/2 [sigma^n_{j,j-1}, .]`,
/// and S_minus its Hermitian-conjugate partner.
pub fn build_probe_superops(array: &ArraySpec, omega_p: f64) -> (Superoperator, Superoperator) {
    let levels = array.levels();
    let n_atoms = array.len();
    let dim = array.dim();
    let sdim = dim * dim;
    let mut s_plus: Superoperator = DMatrix::zeros(sdim, sdim);
    let mut s_minus: Superoperator = DMatrix::zeros(sdim, sdim);
    for n in 0..n_atoms {
        let x = array.transmons[n].position;
        let weight = (omega_p * x).cos() / 2.0;
        for j in 1..levels {
            let w = c((j as f64).sqrt() * weight);
            let raise = ladder_op(levels, n_atoms, n, j, j - 1);
            let lower = raise.adjoint();
            s_plus += (spre(&raise) - spost(&raise)) * (I * w);
            s_minus += (spre(&lower) - spost(&lower)) * (I * w);
        }
    }
    (s_plus, s_minus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{collective_rates, TransmonSpec};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(dim: usize, rng: &mut impl Rng) -> Operator {
        let m = DMatrix::from_fn(dim, dim, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        (&m + m.adjoint()) * c(0.5)
    }

    fn two_level(gamma10: f64) -> ArraySpec {
        ArraySpec::single(TransmonSpec {
            levels: 2,
            omega10: 2100.0,
            alpha: 100.0,
            gamma10,
            position: 0.0,
            dephasing: vec![],
            bare_decay: None,
        })
    }

    #[test]
    fn lowering_matrix_is_textbook() {
        let op = ladder_op(2, 1, 0, 0, 1);
        assert_eq!(op[(0, 1)], c(1.0));
        assert_eq!(op[(0, 0)], c(0.0));
        assert_eq!(op[(1, 0)], c(0.0));
        assert_eq!(op[(1, 1)], c(0.0));
    }

    #[test]
    fn adjoint_swaps_indices() {
        for j in 0..3 {
            for k in 0..3 {
                let a = ladder_op(3, 2, 1, j, k);
                let b = ladder_op(3, 2, 1, k, j);
                assert_eq!(a.adjoint(), b);
            }
        }
    }

    #[test]
    fn ladder_product_rule() {
        // sigma_{j,k} sigma_{l,m} = delta_{kl} sigma_{j,m}
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    for m in 0..3 {
                        let lhs = ladder_op(3, 1, 0, j, k) * ladder_op(3, 1, 0, l, m);
                        let rhs = if k == l {
                            ladder_op(3, 1, 0, j, m)
                        } else {
                            DMatrix::zeros(3, 3)
                        };
                        assert_eq!(lhs, rhs);
                    }
                }
            }
        }
    }

    #[test]
    fn different_atoms_commute() {
        let a = ladder_op(3, 2, 0, 1, 2);
        let b = ladder_op(3, 2, 1, 0, 1);
        assert_eq!(&a * &b, &b * &a);
    }

    #[test]
    fn dimension_guard() {
        assert!(ladder_ops(6, 5).is_err());
        assert!(ladder_ops(6, 2).is_ok());
    }

    #[test]
    fn vectorization_roundtrip_and_sprepost() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_hermitian(4, &mut rng);
        let b = random_hermitian(4, &mut rng);
        let rho = random_hermitian(4, &mut rng);
        let direct = &a * &rho * &b;
        let via_super = unvectorize(&(sprepost(&a, &b) * vectorize(&rho)), 4);
        assert_relative_eq!((direct - via_super).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn undriven_two_level_spectrum() {
        // L0 eigenvalues: 0 (steady state), -gamma on rho_11,
        // -gamma/2 +- i delta on the coherences.
        let array = two_level(1.0);
        let drive = DriveSpec {
            omega_d: 2100.0 - 3.0, // delta = omega_d - omega10 = -3
            rabi: 0.0,
            photon_order: 1,
        };
        let rates = collective_rates(&array).unwrap();
        let l = build_liouvillian0(&array, &drive, &rates).unwrap();
        // act on basis matrices and read off the diagonal generator
        let coh01 = unvectorize(&(l.clone() * vectorize(&ladder_op(2, 1, 0, 0, 1))), 2);
        let lambda = coh01[(0, 1)];
        assert_relative_eq!(lambda.re, -0.5, max_relative = 1e-12);
        assert_relative_eq!(lambda.im.abs(), 3.0, max_relative = 1e-12);
        let pop = unvectorize(&(l * vectorize(&ladder_op(2, 1, 0, 1, 1))), 2);
        assert_relative_eq!(pop[(1, 1)].re, -1.0, max_relative = 1e-12);
    }

    #[test]
    fn trace_preservation_on_random_states() {
        let array = ArraySpec::single(
            TransmonSpec::canonical()
                .with_levels(4)
                .with_uniform_dephasing(0.05),
        );
        let drive = DriveSpec {
            omega_d: 2100.0,
            rabi: 12.0,
            photon_order: 1,
        };
        let rates = collective_rates(&array).unwrap();
        let l = build_liouvillian0(&array, &drive, &rates).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let rho = random_hermitian(4, &mut rng);
            let out = unvectorize(&(l.clone() * vectorize(&rho)), 4);
            assert!(out.trace().norm() < 1e-10, "trace not annihilated");
        }
    }

    #[test]
    fn hermiticity_preserved() {
        let array = ArraySpec::single(TransmonSpec::canonical().with_uniform_dephasing(0.01));
        let drive = DriveSpec {
            omega_d: 2050.0,
            rabi: 30.0,
            photon_order: 2,
        };
        let rates = collective_rates(&array).unwrap();
        let l = build_liouvillian0(&array, &drive, &rates).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let rho = random_hermitian(6, &mut rng);
            let out = unvectorize(&(l.clone() * vectorize(&rho)), 6);
            assert!((out.adjoint() - out).norm() < 1e-10);
        }
    }

    #[test]
    fn single_atom_paths_agree() {
        // Eq.-by-eq main-text construction vs the collective builder at N = 1,
        // atom at the antinode (where the self Lamb shift vanishes).
        let array = ArraySpec::single(TransmonSpec::canonical().with_uniform_dephasing(0.02));
        let drive = DriveSpec {
            omega_d: 2000.0,
            rabi: 55.0,
            photon_order: 3,
        };
        let rates = collective_rates(&array).unwrap();
        let a = build_liouvillian0(&array, &drive, &rates).unwrap();
        let b = build_liouvillian0_single(&array, &drive, &rates).unwrap();
        assert!((a - b).norm() < 1e-12);
    }

    #[test]
    fn probe_superop_at_node_vanishes() {
        let mut t = TransmonSpec::canonical();
        let omega_p = 2100.0;
        t.position = std::f64::consts::FRAC_PI_2 / omega_p;
        let array = ArraySpec::single(t);
        let (s_plus, _) = build_probe_superops(&array, omega_p);
        assert!(s_plus.norm() < 1e-12);
    }

    #[test]
    fn probe_superops_are_conjugation_partners() {
        // S_minus[rho] = (S_plus[rho^dagger])^dagger
        let array = ArraySpec::single(TransmonSpec::canonical());
        let (s_plus, s_minus) = build_probe_superops(&array, 2077.0);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let rho = DMatrix::from_fn(6, 6, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let lhs = unvectorize(&(s_minus * vectorize(&rho)), 6);
        let rhs = unvectorize(&(s_plus * vectorize(&rho.adjoint())), 6).adjoint();
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn probe_injects_coherence_on_two_level_ground_state() {
        let array = two_level(1.0);
        let (s_plus, _) = build_probe_superops(&array, 2100.0);
        let ground = ladder_op(2, 1, 0, 0, 0);
        let out = unvectorize(&(s_plus * vectorize(&ground)), 2);
        // (i/2)(sigma_{10}|0><0| - |0><0|sigma_{10}) = (i/2)|1><0|
        assert_relative_eq!(out[(1, 0)].im, 0.5, max_relative = 1e-12);
        assert!(out[(0, 1)].norm() < 1e-12);
        assert!(out[(0, 0)].norm() < 1e-12);
    }
}
