//! Permutationally invariant (PI) part of a density matrix.
//!
//! Two entries `(s, t)` and `(s', t')` are related by a simultaneous qubit
//! permutation of rows and columns exactly when they have the same counts of
//! per-qubit bit pairs `(row bit, column bit)`. Averaging over the symmetric
//! group is therefore the same as averaging each orbit of entries, which is
//! what [`pi_project`] does in two passes without touching permutations.

use itertools::Itertools;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::state::{
    apply_local_basis, check_dense_qubits, scatter_bits, DensityMatrix, LocalBasisChange,
};

/// Largest qubit count accepted by [`pi_project_naive`].
pub const NAIVE_MAX_QUBITS: usize = 6;

/// A state is reported PI when [`pi_distance`] is below this.
pub const PI_TOL: f64 = 1e-9;

/// Counts of `(row bit, column bit)` pairs over the qubits of an entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrbitKey {
    pub n00: usize,
    pub n01: usize,
    pub n10: usize,
    pub n11: usize,
}

impl OrbitKey {
    pub fn of(n_qubits: usize, row: usize, col: usize) -> Self {
        let mask = (1usize << n_qubits) - 1;
        let n11 = (row & col).count_ones() as usize;
        let n10 = (row & !col & mask).count_ones() as usize;
        let n01 = (!row & col & mask).count_ones() as usize;
        Self {
            n00: n_qubits - n11 - n10 - n01,
            n01,
            n10,
            n11,
        }
    }

    /// Position in an `(N+1)^3` table; `n00` is implied.
    fn slot(&self, n_qubits: usize) -> usize {
        let side = n_qubits + 1;
        (self.n01 * side + self.n10) * side + self.n11
    }
}

/// Orbit means of a matrix, indexed by [`OrbitKey`].
pub(crate) struct OrbitTable {
    n_qubits: usize,
    means: Vec<Complex64>,
}

impl OrbitTable {
    pub(crate) fn build(state: &DensityMatrix) -> Self {
        let n = state.n_qubits();
        let dim = state.dim();
        let side = n + 1;
        let mut sums = vec![Complex64::new(0.0, 0.0); side * side * side];
        let mut counts = vec![0u64; side * side * side];
        for r in 0..dim {
            let row = &state.data()[r * dim..(r + 1) * dim];
            for (c, &v) in row.iter().enumerate() {
                let slot = OrbitKey::of(n, r, c).slot(n);
                sums[slot] += v;
                counts[slot] += 1;
            }
        }
        let means = sums
            .into_iter()
            .zip(counts)
            .map(|(s, k)| if k == 0 { s } else { s / k as f64 })
            .collect();
        Self { n_qubits: n, means }
    }

    pub(crate) fn mean(&self, key: OrbitKey) -> Complex64 {
        self.means[key.slot(self.n_qubits)]
    }
}

/// PI part of `state` by orbit averaging, `O(N·4^N)`.
pub fn pi_project(state: &DensityMatrix) -> DensityMatrix {
    let n = state.n_qubits();
    let dim = state.dim();
    let table = OrbitTable::build(state);
    let mut data = Vec::with_capacity(dim * dim);
    for r in 0..dim {
        data.extend((0..dim).map(|c| table.mean(OrbitKey::of(n, r, c))));
    }
    DensityMatrix::from_parts(n, data)
}

/// Literal average of `Π ρ Π†` over all `N!` qubit permutations.
///
/// Exponential in `N`; kept as a reference for [`pi_project`].
pub fn pi_project_naive(state: &DensityMatrix) -> Result<DensityMatrix> {
    let n = state.n_qubits();
    if n > NAIVE_MAX_QUBITS {
        return Err(Error::Scale(format!(
            "naive projection enumerates N! permutations; N = {n} exceeds {NAIVE_MAX_QUBITS}"
        )));
    }
    let dim = state.dim();
    let mut acc = vec![Complex64::new(0.0, 0.0); dim * dim];
    let mut n_perms = 0usize;
    for perm in (0..n).permutations(n) {
        let map: Vec<usize> = (0..dim).map(|b| scatter_bits(b, &perm)).collect();
        for r in 0..dim {
            for c in 0..dim {
                acc[map[r] * dim + map[c]] += state.get(r, c);
            }
        }
        n_perms += 1;
    }
    let scale = 1.0 / n_perms as f64;
    acc.iter_mut().for_each(|z| *z *= scale);
    Ok(DensityMatrix::from_parts(n, acc))
}

/// Frobenius distance between `state` and its PI part.
pub fn pi_distance(state: &DensityMatrix) -> f64 {
    state.frobenius_distance(&pi_project(state))
}

pub fn is_pi(state: &DensityMatrix) -> bool {
    pi_distance(state) < PI_TOL
}

/// PI part taken in the basis defined by `basis`, expressed back in the
/// computational basis: `B† · PI(B ρ B†) · B`.
pub fn pi_project_in_basis(
    state: &DensityMatrix,
    basis: &LocalBasisChange,
) -> Result<DensityMatrix> {
    check_dense_qubits(state.n_qubits())?;
    let rotated = apply_local_basis(state, basis)?;
    apply_local_basis(&pi_project(&rotated), &basis.adjoint())
}
