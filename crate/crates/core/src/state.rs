//! Dense N-qubit states, Pauli strings and local basis changes.
//!
//! Basis index `b` encodes qubit `i` as bit `i` of `b`, with qubit 0 the least
//! significant bit. The single-excitation state of qubit `i` therefore sits at
//! index `1 << i`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Largest qubit count stored as a dense `2^N x 2^N` matrix.
pub const MAX_DENSE_QUBITS: usize = 12;

/// Tolerance for normalization, Hermiticity and unitarity checks.
pub const STATE_TOL: f64 = 1e-12;

/// Smallest eigenvalue accepted when loading external density matrices.
pub const PSD_TOL: f64 = -1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub(crate) fn check_dense_qubits(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 || n_qubits > MAX_DENSE_QUBITS {
        return Err(Error::Dimension(format!(
            "dense states need 1 <= N <= {MAX_DENSE_QUBITS}, got N = {n_qubits}"
        )));
    }
    Ok(())
}

/// Moves bit `i` of `x` to position `positions[i]`.
pub(crate) fn scatter_bits(x: usize, positions: &[usize]) -> usize {
    positions
        .iter()
        .enumerate()
        .fold(0, |acc, (i, &p)| acc | (((x >> i) & 1) << p))
}

/// A normalized pure state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl PureState {
    pub fn new(n_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        check_dense_qubits(n_qubits)?;
        if amplitudes.len() != 1 << n_qubits {
            return Err(Error::Dimension(format!(
                "expected {} amplitudes for N = {n_qubits}, got {}",
                1usize << n_qubits,
                amplitudes.len()
            )));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::Validation(format!(
                "state norm squared is {norm}, expected 1"
            )));
        }
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// Normalizes `amplitudes` before validating.
    pub fn normalized(n_qubits: usize, mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Validation("cannot normalize a zero vector".into()));
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Self::new(n_qubits, amplitudes)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn density(&self) -> DensityMatrix {
        let dim = self.dim();
        let mut data = vec![ZERO; dim * dim];
        for (r, &ar) in self.amplitudes.iter().enumerate() {
            if ar == ZERO {
                continue;
            }
            let row = &mut data[r * dim..(r + 1) * dim];
            for (entry, &ac) in row.iter_mut().zip(&self.amplitudes) {
                *entry = ar * ac.conj();
            }
        }
        DensityMatrix::from_parts(self.n_qubits, data)
    }

    /// Relabels qubits: qubit `q` of `self` becomes qubit `perm[q]` of the result.
    pub fn permute_qubits(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.n_qubits)?;
        let mut out = vec![ZERO; self.dim()];
        for (b, &a) in self.amplitudes.iter().enumerate() {
            out[scatter_bits(b, perm)] = a;
        }
        Ok(Self {
            n_qubits: self.n_qubits,
            amplitudes: out,
        })
    }

    /// Returns `(U_1 ⊗ ... ⊗ U_N) |ψ⟩`.
    pub fn apply_local(&self, basis: &LocalBasisChange) -> Result<Self> {
        basis.check_len(self.n_qubits)?;
        let mut amps = self.amplitudes.clone();
        for (q, u) in basis.unitaries().iter().enumerate() {
            let bit = 1 << q;
            for i in 0..amps.len() {
                if i & bit == 0 {
                    let (a0, a1) = (amps[i], amps[i | bit]);
                    amps[i] = u[0][0] * a0 + u[0][1] * a1;
                    amps[i | bit] = u[1][0] * a0 + u[1][1] * a1;
                }
            }
        }
        Ok(Self {
            n_qubits: self.n_qubits,
            amplitudes: amps,
        })
    }

    /// `self ⊗ other`, with `self` occupying the low qubits.
    pub fn tensor(&self, other: &PureState) -> Result<Self> {
        let n = self.n_qubits + other.n_qubits;
        check_dense_qubits(n)?;
        let mut amps = Vec::with_capacity(1 << n);
        for &hi in &other.amplitudes {
            amps.extend(self.amplitudes.iter().map(|&lo| lo * hi));
        }
        Ok(Self {
            n_qubits: n,
            amplitudes: amps,
        })
    }
}

pub(crate) fn check_permutation(perm: &[usize], n_qubits: usize) -> Result<()> {
    let mut seen = vec![false; n_qubits];
    if perm.len() != n_qubits {
        return Err(Error::Argument(format!(
            "permutation has length {}, expected {n_qubits}",
            perm.len()
        )));
    }
    for &p in perm {
        if p >= n_qubits || seen[p] {
            return Err(Error::Argument(format!("{perm:?} is not a permutation")));
        }
        seen[p] = true;
    }
    Ok(())
}

/// A dense density matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    data: Vec<Complex64>,
}

impl DensityMatrix {
    /// Builds a density matrix after checking size, Hermiticity and unit trace.
    pub fn new(n_qubits: usize, data: Vec<Complex64>) -> Result<Self> {
        check_dense_qubits(n_qubits)?;
        let dim = 1usize << n_qubits;
        if data.len() != dim * dim {
            return Err(Error::Dimension(format!(
                "expected {} entries for N = {n_qubits}, got {}",
                dim * dim,
                data.len()
            )));
        }
        let rho = Self { n_qubits, data };
        rho.check_hermitian_unit_trace()?;
        Ok(rho)
    }

    /// Like [`DensityMatrix::new`], additionally rejecting eigenvalues below
    /// [`PSD_TOL`]. Used for data coming from outside the library.
    pub fn new_validated(n_qubits: usize, data: Vec<Complex64>) -> Result<Self> {
        let rho = Self::new(n_qubits, data)?;
        let min = rho.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if min < PSD_TOL {
            return Err(Error::Validation(format!(
                "density matrix has eigenvalue {min} below {PSD_TOL}"
            )));
        }
        Ok(rho)
    }

    pub(crate) fn from_parts(n_qubits: usize, data: Vec<Complex64>) -> Self {
        debug_assert_eq!(data.len(), 1 << (2 * n_qubits));
        Self { n_qubits, data }
    }

    pub fn maximally_mixed(n_qubits: usize) -> Result<Self> {
        check_dense_qubits(n_qubits)?;
        let dim = 1usize << n_qubits;
        let mut data = vec![ZERO; dim * dim];
        let w = 1.0 / dim as f64;
        for i in 0..dim {
            data[i * dim + i] = Complex64::new(w, 0.0);
        }
        Ok(Self::from_parts(n_qubits, data))
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    /// Row-major entries.
    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim() + col]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    /// `Tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        // Tr(ρ²) = Σ |ρ_rc|² for Hermitian ρ.
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Largest entry-wise deviation from conjugate symmetry.
    pub fn hermiticity_error(&self) -> f64 {
        let dim = self.dim();
        let mut worst = 0.0f64;
        for r in 0..dim {
            for c in r..dim {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    fn check_hermitian_unit_trace(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > STATE_TOL {
            return Err(Error::Validation(format!(
                "matrix is not Hermitian (deviation {herm:e})"
            )));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::Validation(format!("trace is {tr}, expected 1")));
        }
        Ok(())
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let dim = self.dim();
        let m = DMatrix::from_fn(dim, dim, |r, c| self.get(r, c));
        let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Frobenius norm of `self - other`.
    pub fn frobenius_distance(&self, other: &DensityMatrix) -> f64 {
        assert_eq!(self.n_qubits, other.n_qubits);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Largest entry-wise absolute difference.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        assert_eq!(self.n_qubits, other.n_qubits);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Convex combination `w·self + (1 − w)·other`.
    pub fn mix(&self, other: &DensityMatrix, w: f64) -> Result<Self> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::Dimension("mixing states of different size".into()));
        }
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::Parameter(format!("mixing weight {w} not in [0, 1]")));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a * w + b * (1.0 - w))
            .collect();
        Ok(Self::from_parts(self.n_qubits, data))
    }

    /// `self ⊗ other`, with `self` occupying the low qubits.
    pub fn tensor(&self, other: &DensityMatrix) -> Result<Self> {
        let n = self.n_qubits + other.n_qubits;
        check_dense_qubits(n)?;
        let (da, db) = (self.dim(), other.dim());
        let dim = da * db;
        let mut data = vec![ZERO; dim * dim];
        for rb in 0..db {
            for cb in 0..db {
                let b = other.get(rb, cb);
                if b == ZERO {
                    continue;
                }
                for ra in 0..da {
                    for ca in 0..da {
                        data[(rb * da + ra) * dim + cb * da + ca] = self.get(ra, ca) * b;
                    }
                }
            }
        }
        Ok(Self::from_parts(n, data))
    }

    /// Relabels qubits: qubit `q` of `self` becomes qubit `perm[q]`, i.e.
    /// returns `Π ρ Π†` for the permutation operator `Π`.
    pub fn permute_qubits(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.n_qubits)?;
        let dim = self.dim();
        let map: Vec<usize> = (0..dim).map(|b| scatter_bits(b, perm)).collect();
        let mut data = vec![ZERO; dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                data[map[r] * dim + map[c]] = self.data[r * dim + c];
            }
        }
        Ok(Self::from_parts(self.n_qubits, data))
    }

    /// Entry-wise Hermitian part; used to remove round-off asymmetry.
    pub(crate) fn hermitize(mut self) -> Self {
        let dim = self.dim();
        for r in 0..dim {
            for c in r..dim {
                let avg = (self.data[r * dim + c] + self.data[c * dim + r].conj()) * 0.5;
                self.data[r * dim + c] = avg;
                self.data[c * dim + r] = avg.conj();
            }
        }
        self
    }
}

/// GHZ state `(|0…0⟩ + |1…1⟩)/√2`.
pub fn make_ghz(n_qubits: usize) -> Result<PureState> {
    check_dense_qubits(n_qubits)?;
    let mut amps = vec![ZERO; 1 << n_qubits];
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    amps[0] = h;
    amps[(1 << n_qubits) - 1] = h;
    PureState::new(n_qubits, amps)
}

/// W state: equal superposition of the `N` single-excitation states.
pub fn make_w(n_qubits: usize) -> Result<PureState> {
    check_dense_qubits(n_qubits)?;
    let mut amps = vec![ZERO; 1 << n_qubits];
    let a = Complex64::new(1.0 / (n_qubits as f64).sqrt(), 0.0);
    for i in 0..n_qubits {
        amps[1 << i] = a;
    }
    PureState::new(n_qubits, amps)
}

/// Computational basis state `|bits⟩`.
pub fn make_basis_state(n_qubits: usize, index: usize) -> Result<PureState> {
    check_dense_qubits(n_qubits)?;
    if index >= 1 << n_qubits {
        return Err(Error::Argument(format!(
            "basis index {index} out of range for N = {n_qubits}"
        )));
    }
    let mut amps = vec![ZERO; 1 << n_qubits];
    amps[index] = ONE;
    PureState::new(n_qubits, amps)
}

/// Haar-random pure state from a normalized complex Gaussian vector.
pub fn random_pure<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Result<PureState> {
    check_dense_qubits(n_qubits)?;
    let amps = (0..1usize << n_qubits)
        .map(|_| gaussian_complex(rng))
        .collect();
    PureState::normalized(n_qubits, amps)
}

/// Random mixed state `G G† / Tr(G G†)` with `G` a square complex Gaussian matrix.
pub fn random_mixed<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Result<DensityMatrix> {
    check_dense_qubits(n_qubits)?;
    let dim = 1usize << n_qubits;
    let g = DMatrix::<Complex64>::from_fn(dim, dim, |_, _| gaussian_complex(rng));
    let w = &g * g.adjoint();
    let tr: f64 = (0..dim).map(|i| w[(i, i)].re).sum();
    let mut data = Vec::with_capacity(dim * dim);
    for r in 0..dim {
        for c in 0..dim {
            data.push(w[(r, c)] / tr);
        }
    }
    Ok(DensityMatrix::from_parts(n_qubits, data).hermitize())
}

fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// White-noise mixture `(1 − p)ρ + p·I/2^N`.
pub fn mix_white_noise(state: &DensityMatrix, p: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Parameter(format!(
            "noise level p = {p} not in [0, 1]"
        )));
    }
    let dim = state.dim();
    let shift = p / dim as f64;
    let mut data: Vec<Complex64> = state.data.iter().map(|z| z * (1.0 - p)).collect();
    for i in 0..dim {
        data[i * dim + i] += shift;
    }
    Ok(DensityMatrix::from_parts(state.n_qubits, data))
}

/// Reduced density matrix on the qubits in `keep`.
///
/// The kept qubits are relabeled in ascending order, so the smallest kept
/// index becomes qubit 0 of the result.
pub fn partial_trace(state: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let n = state.n_qubits;
    if keep.is_empty() {
        return Err(Error::Argument("keep set is empty".into()));
    }
    let mut kept = keep.to_vec();
    kept.sort_unstable();
    if kept.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Argument(format!("duplicate qubit in {keep:?}")));
    }
    if let Some(&q) = kept.iter().find(|&&q| q >= n) {
        return Err(Error::Argument(format!(
            "qubit {q} out of range for N = {n}"
        )));
    }
    let traced: Vec<usize> = (0..n).filter(|q| !kept.contains(q)).collect();
    let kdim = 1usize << kept.len();
    let edim = 1usize << traced.len();
    let kmap: Vec<usize> = (0..kdim).map(|a| scatter_bits(a, &kept)).collect();
    let emap: Vec<usize> = (0..edim).map(|e| scatter_bits(e, &traced)).collect();
    let mut data = vec![ZERO; kdim * kdim];
    for a in 0..kdim {
        for b in 0..kdim {
            data[a * kdim + b] = emap
                .iter()
                .map(|&e| state.get(kmap[a] | e, kmap[b] | e))
                .sum();
        }
    }
    Ok(DensityMatrix::from_parts(kept.len(), data))
}

/// Single-qubit Pauli operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

/// A tensor product of single-qubit Paulis; letter `i` acts on qubit `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    letters: Vec<Pauli>,
}

/// Counts `(k, l, m, n)` of X, Y, Z and identity letters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliType {
    pub x: usize,
    pub y: usize,
    pub z: usize,
    pub id: usize,
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>) -> Self {
        Self { letters }
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self::new(vec![Pauli::I; n_qubits])
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn signature(&self) -> PauliType {
        let count = |p| self.letters.iter().filter(|&&l| l == p).count();
        PauliType {
            x: count(Pauli::X),
            y: count(Pauli::Y),
            z: count(Pauli::Z),
            id: count(Pauli::I),
        }
    }

    fn mask(&self, pred: impl Fn(Pauli) -> bool) -> usize {
        self.letters
            .iter()
            .enumerate()
            .filter(|(_, &l)| pred(l))
            .fold(0, |m, (q, _)| m | (1 << q))
    }

    /// Bits flipped by the string (X or Y letters).
    pub(crate) fn flip_mask(&self) -> usize {
        self.mask(|l| matches!(l, Pauli::X | Pauli::Y))
    }

    /// Bits picking up a sign on `|1⟩` (Y or Z letters).
    pub(crate) fn phase_mask(&self) -> usize {
        self.mask(|l| matches!(l, Pauli::Y | Pauli::Z))
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c.to_ascii_uppercase() {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(Error::Argument(format!("unknown Pauli letter {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.letters {
            let c = match l {
                Pauli::I => 'I',
                Pauli::X => 'X',
                Pauli::Y => 'Y',
                Pauli::Z => 'Z',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// `Tr(ρP)` computed column by column from the sparse action of `P`.
pub fn pauli_expectation(state: &DensityMatrix, pauli: &PauliString) -> Result<f64> {
    if pauli.len() != state.n_qubits {
        return Err(Error::Argument(format!(
            "Pauli string has length {}, state has {} qubits",
            pauli.len(),
            state.n_qubits
        )));
    }
    let z = trace_with_pauli(state, pauli);
    if z.im.abs() > 1e-9 {
        return Err(Error::NumericalConsistency(format!(
            "expectation of {pauli} has imaginary part {:e}",
            z.im
        )));
    }
    Ok(z.re)
}

/// `Tr(ρP)` without the realness check.
pub(crate) fn trace_with_pauli(state: &DensityMatrix, pauli: &PauliString) -> Complex64 {
    // P|t⟩ = i^{#Y} (-1)^{|t ∧ phase|} |t ⊕ flip⟩, so Tr(ρP) = Σ_t φ(t) ρ[t, t ⊕ flip].
    let flip = pauli.flip_mask();
    let phase = pauli.phase_mask();
    let n_y = pauli.signature().y;
    let mut acc = ZERO;
    for t in 0..state.dim() {
        let v = state.get(t, t ^ flip);
        if (t & phase).count_ones().is_multiple_of(2) {
            acc += v;
        } else {
            acc -= v;
        }
    }
    let i_pow = match n_y % 4 {
        0 => ONE,
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    };
    acc * i_pow
}

/// A 2x2 complex matrix, row-major.
pub type Mat2 = [[Complex64; 2]; 2];

/// Per-qubit unitaries `U_1 ⊗ U_2 ⊗ … ⊗ U_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalBasisChange {
    unitaries: Vec<Mat2>,
}

impl LocalBasisChange {
    pub fn new(unitaries: Vec<Mat2>) -> Result<Self> {
        for (q, u) in unitaries.iter().enumerate() {
            let err = unitarity_error(u);
            if err > STATE_TOL {
                return Err(Error::Validation(format!(
                    "factor on qubit {q} is not unitary (deviation {err:e})"
                )));
            }
        }
        Ok(Self { unitaries })
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self {
            unitaries: vec![[[ONE, ZERO], [ZERO, ONE]]; n_qubits],
        }
    }

    /// One unitary per qubit from Euler angles, `Rz(α)·Ry(β)·Rz(γ)`.
    pub fn from_euler(angles: &[[f64; 3]]) -> Self {
        Self {
            unitaries: angles
                .iter()
                .map(|&[a, b, g]| euler_unitary(a, b, g))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.unitaries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.unitaries.is_empty()
    }

    pub fn unitaries(&self) -> &[Mat2] {
        &self.unitaries
    }

    /// Replaces the factor on one qubit.
    pub fn with_factor(mut self, qubit: usize, u: Mat2) -> Result<Self> {
        if qubit >= self.unitaries.len() {
            return Err(Error::Argument(format!("qubit {qubit} out of range")));
        }
        self.unitaries[qubit] = u;
        Self::new(self.unitaries)
    }

    pub fn adjoint(&self) -> Self {
        Self {
            unitaries: self.unitaries.iter().map(adjoint2).collect(),
        }
    }

    pub(crate) fn check_len(&self, n_qubits: usize) -> Result<()> {
        if self.unitaries.len() != n_qubits {
            return Err(Error::Argument(format!(
                "basis change has {} factors, state has {n_qubits} qubits",
                self.unitaries.len()
            )));
        }
        Ok(())
    }
}

pub(crate) fn adjoint2(u: &Mat2) -> Mat2 {
    [
        [u[0][0].conj(), u[1][0].conj()],
        [u[0][1].conj(), u[1][1].conj()],
    ]
}

#[allow(clippy::needless_range_loop)]
fn unitarity_error(u: &Mat2) -> f64 {
    let ud = adjoint2(u);
    let mut worst = 0.0f64;
    for (r, row) in ud.iter().enumerate() {
        for c in 0..2 {
            let z = row[0] * u[0][c] + row[1] * u[1][c];
            let target = if r == c { ONE } else { ZERO };
            worst = worst.max((z - target).norm());
        }
    }
    worst
}

pub(crate) fn euler_unitary(alpha: f64, beta: f64, gamma: f64) -> Mat2 {
    let (c, s) = ((beta / 2.0).cos(), (beta / 2.0).sin());
    let e = |t: f64| Complex64::from_polar(1.0, t);
    [
        [
            e(-(alpha + gamma) / 2.0) * c,
            -e(-(alpha - gamma) / 2.0) * s,
        ],
        [e((alpha - gamma) / 2.0) * s, e((alpha + gamma) / 2.0) * c],
    ]
}

/// `(⊗U_i) ρ (⊗U_i)†`, applied one qubit at a time.
pub fn apply_local_basis(state: &DensityMatrix, basis: &LocalBasisChange) -> Result<DensityMatrix> {
    basis.check_len(state.n_qubits)?;
    let dim = state.dim();
    let mut data = state.data.clone();
    for (q, u) in basis.unitaries.iter().enumerate() {
        if *u == [[ONE, ZERO], [ZERO, ONE]] {
            continue;
        }
        let bit = 1 << q;
        // rows: ρ ← U ρ
        for r in (0..dim).filter(|r| r & bit == 0) {
            let (r0, r1) = (r * dim, (r | bit) * dim);
            for c in 0..dim {
                let (a0, a1) = (data[r0 + c], data[r1 + c]);
                data[r0 + c] = u[0][0] * a0 + u[0][1] * a1;
                data[r1 + c] = u[1][0] * a0 + u[1][1] * a1;
            }
        }
        // columns: ρ ← ρ U†
        let (u00, u01, u10, u11) = (
            u[0][0].conj(),
            u[0][1].conj(),
            u[1][0].conj(),
            u[1][1].conj(),
        );
        for r in 0..dim {
            let row = &mut data[r * dim..(r + 1) * dim];
            for c in (0..dim).filter(|c| c & bit == 0) {
                let (a0, a1) = (row[c], row[c | bit]);
                row[c] = a0 * u00 + a1 * u01;
                row[c | bit] = a0 * u10 + a1 * u11;
            }
        }
    }
    Ok(DensityMatrix::from_parts(state.n_qubits, data))
}
