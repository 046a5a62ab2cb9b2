//! Expansion of PI states on permutation-summed Pauli strings.
//!
//! A PI state is written as `ρ = Σ e_klmn · Π(X^k ⊗ Y^l ⊗ Z^m ⊗ I^n)` where `Π`
//! sums all `N!` qubit permutations. Each distinct string of type `(k,l,m,n)`
//! appears `k!·l!·m!·n!` times in that sum.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::state::{
    check_dense_qubits, trace_with_pauli, DensityMatrix, Pauli, PauliString, PauliType,
};
use crate::symmetry::{pi_project, OrbitKey};

/// `n!` as a float. Exact (integer) up to 20, floating product beyond.
pub fn factorial(n: usize) -> f64 {
    const EXACT: usize = 20;
    let mut acc: u64 = 1;
    for i in 2..=n.min(EXACT) as u64 {
        acc *= i;
    }
    let mut f = acc as f64;
    for i in EXACT + 1..=n {
        f *= i as f64;
    }
    f
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Multiplicity `k!·l!·m!·n!` of each distinct string of a type inside `Π(…)`.
pub fn type_multiplicity(t: PauliType) -> f64 {
    factorial(t.x) * factorial(t.y) * factorial(t.z) * factorial(t.id)
}

/// All `(k, l, m, n)` with `k + l + m + n = N`, in lexicographic order.
pub fn compositions(n_qubits: usize) -> Vec<PauliType> {
    let mut out = Vec::with_capacity(composition_count(n_qubits));
    for x in 0..=n_qubits {
        for y in 0..=n_qubits - x {
            for z in 0..=n_qubits - x - y {
                out.push(PauliType {
                    x,
                    y,
                    z,
                    id: n_qubits - x - y - z,
                });
            }
        }
    }
    out
}

/// `C(N+3, 3)`.
pub fn composition_count(n_qubits: usize) -> usize {
    (n_qubits + 3) * (n_qubits + 2) * (n_qubits + 1) / 6
}

/// One representative string of a type: X's first, then Y's, Z's, identities.
pub fn representative(t: PauliType) -> PauliString {
    let mut letters = Vec::with_capacity(t.x + t.y + t.z + t.id);
    letters.extend(std::iter::repeat_n(Pauli::X, t.x));
    letters.extend(std::iter::repeat_n(Pauli::Y, t.y));
    letters.extend(std::iter::repeat_n(Pauli::Z, t.z));
    letters.extend(std::iter::repeat_n(Pauli::I, t.id));
    PauliString::new(letters)
}

/// Table of real coefficients `e_klmn` over all compositions of `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct PICoefficients {
    n_qubits: usize,
    values: Vec<f64>,
}

impl PICoefficients {
    /// All coefficients zero except the normalization `e_{000N} = 1/(N!·2^N)`.
    pub fn maximally_mixed(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::Dimension("N must be at least 1".into()));
        }
        let mut c = Self {
            n_qubits,
            values: vec![0.0; composition_count(n_qubits)],
        };
        c.set(0, 0, 0, n_qubits, normalization(n_qubits));
        Ok(c)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn index(&self, k: usize, l: usize, m: usize) -> usize {
        // compositions with x < k, then with x = k and y < l, then z < m
        let n = self.n_qubits;
        let before_x: usize = (0..k).map(|x| tri(n - x)).sum();
        let before_y: usize = (0..l).map(|y| n - k - y + 1).sum();
        before_x + before_y + m
    }

    fn check(&self, k: usize, l: usize, m: usize, n: usize) -> Result<()> {
        if k + l + m + n != self.n_qubits {
            return Err(Error::Argument(format!(
                "({k},{l},{m},{n}) does not sum to N = {}",
                self.n_qubits
            )));
        }
        Ok(())
    }

    /// `e_klmn`. Panics if the indices do not sum to `N`.
    pub fn get(&self, k: usize, l: usize, m: usize, n: usize) -> f64 {
        self.check(k, l, m, n).expect("invalid composition");
        self.values[self.index(k, l, m)]
    }

    pub fn try_get(&self, k: usize, l: usize, m: usize, n: usize) -> Result<f64> {
        self.check(k, l, m, n)?;
        Ok(self.values[self.index(k, l, m)])
    }

    /// Sets `e_klmn`. Panics if the indices do not sum to `N`.
    pub fn set(&mut self, k: usize, l: usize, m: usize, n: usize, value: f64) {
        self.check(k, l, m, n).expect("invalid composition");
        let i = self.index(k, l, m);
        self.values[i] = value;
    }

    pub fn try_set(&mut self, k: usize, l: usize, m: usize, n: usize, value: f64) -> Result<()> {
        self.check(k, l, m, n)?;
        let i = self.index(k, l, m);
        self.values[i] = value;
        Ok(())
    }

    pub fn get_type(&self, t: PauliType) -> f64 {
        self.get(t.x, t.y, t.z, t.id)
    }

    /// `(type, e)` pairs in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (PauliType, f64)> + '_ {
        compositions(self.n_qubits)
            .into_iter()
            .zip(self.values.iter().copied())
    }
}

fn tri(r: usize) -> usize {
    // number of (y, z) with y + z <= r
    (r + 1) * (r + 2) / 2
}

/// `e_{000N} = 1/(N!·2^N)`.
pub fn normalization(n_qubits: usize) -> f64 {
    1.0 / (factorial(n_qubits) * 2f64.powi(n_qubits as i32))
}

/// Coefficients of the PI part of `state`.
///
/// `e_t = Tr(ρ P)/(k!·l!·m!·n!·2^N)` averaged over the distinct strings `P` of
/// type `t`. The average equals the value on any single string of `PI(ρ)`,
/// which is what is evaluated here.
pub fn coeffs_from_dense(state: &DensityMatrix) -> PICoefficients {
    let n = state.n_qubits();
    let pi = pi_project(state);
    let two_n = 2f64.powi(n as i32);
    let values = compositions(n)
        .into_iter()
        .map(|t| trace_with_pauli(&pi, &representative(t)).re / (type_multiplicity(t) * two_n))
        .collect();
    PICoefficients {
        n_qubits: n,
        values,
    }
}

/// Matrix element `⟨s|S_t|c⟩` of the sum `S_t` of distinct strings of type `t`,
/// for any entry `(s, c)` in orbit `key`.
fn orbit_entry(t: PauliType, key: OrbitKey) -> Complex64 {
    if t.x + t.y != key.n01 + key.n10 || t.z + t.id != key.n00 + key.n11 {
        return Complex64::new(0.0, 0.0);
    }
    // ⟨0|Y|1⟩ = -i, ⟨1|Y|0⟩ = i, ⟨1|Z|1⟩ = -1
    let mut y_sum = Complex64::new(0.0, 0.0);
    for y01 in 0..=t.y.min(key.n01) {
        let y10 = t.y - y01;
        if y10 > key.n10 {
            continue;
        }
        let w = binomial(key.n01, y01) * binomial(key.n10, y10);
        y_sum += Complex64::new(0.0, -1.0).powu(y01 as u32)
            * Complex64::new(0.0, 1.0).powu(y10 as u32)
            * w;
    }
    let mut z_sum = 0.0;
    for z11 in 0..=t.z.min(key.n11) {
        let z00 = t.z - z11;
        if z00 > key.n00 {
            continue;
        }
        let sign = if z11 % 2 == 0 { 1.0 } else { -1.0 };
        z_sum += sign * binomial(key.n00, z00) * binomial(key.n11, z11);
    }
    y_sum * z_sum
}

/// Dense PI state `Σ e_t · Π(type t)`, evaluated orbit by orbit.
pub fn dense_from_coeffs(coeffs: &PICoefficients) -> Result<DensityMatrix> {
    let n = coeffs.n_qubits;
    check_dense_qubits(n)?;
    let side = n + 1;
    let mut orbit_values = vec![Complex64::new(0.0, 0.0); side * side * side];
    for n01 in 0..=n {
        for n10 in 0..=n - n01 {
            for n11 in 0..=n - n01 - n10 {
                let key = OrbitKey {
                    n00: n - n01 - n10 - n11,
                    n01,
                    n10,
                    n11,
                };
                orbit_values[(n01 * side + n10) * side + n11] = coeffs
                    .iter()
                    .filter(|(_, e)| *e != 0.0)
                    .map(|(t, e)| orbit_entry(t, key) * (e * type_multiplicity(t)))
                    .sum();
            }
        }
    }
    let dim = 1usize << n;
    let mut data = Vec::with_capacity(dim * dim);
    for r in 0..dim {
        for c in 0..dim {
            let k = OrbitKey::of(n, r, c);
            data.push(orbit_values[(k.n01 * side + k.n10) * side + k.n11]);
        }
    }
    DensityMatrix::new(n, data).map_err(|e| Error::InconsistentCoefficients(e.to_string()))
}

/// The four distinct values a PI state takes on the entries used by the
/// k-separability criterion (0-based indices, `i ≠ j`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriterionElements {
    /// `ρ[2^i, 2^j]`
    pub offdiag: f64,
    /// `ρ[0, 0]`
    pub d0: f64,
    /// `ρ[2^i, 2^i]`
    pub d1: f64,
    /// `ρ[2^i + 2^j, 2^i + 2^j]`
    pub d2: f64,
}

pub fn criterion_elements_from_coeffs(coeffs: &PICoefficients) -> Result<CriterionElements> {
    let n = coeffs.n_qubits;
    if n < 2 {
        return Err(Error::Dimension(format!("criterion needs N >= 2, got {n}")));
    }
    let offdiag = 2.0
        * factorial(n - 2)
        * (0..=n - 2)
            .map(|m| coeffs.get(2, 0, m, n - 2 - m) + coeffs.get(0, 2, m, n - 2 - m))
            .sum::<f64>();
    let nf = n as f64;
    let diag = |scale: f64, weight: &dyn Fn(f64) -> f64| {
        let terms = (0..=n).map(|m| scale * weight(m as f64) * coeffs.get(0, 0, m, n - m));
        snap_to_zero(terms, n)
    };
    let d0 = diag(factorial(n), &|_| 1.0);
    let d1 = diag(factorial(n - 1), &|m| nf - 2.0 * m);
    let d2 = diag(factorial(n - 2), &|m| (nf - 2.0 * m).powi(2) - nf);
    Ok(CriterionElements {
        offdiag,
        d0,
        d1,
        d2,
    })
}

/// Sum of `terms`, or zero when the sum is within its own rounding error.
///
/// Populations of states such as GHZ cancel exactly in theory but leave
/// residues of order `1e-18`, which `√(d0·d2)` would inflate to `1e-9`.
fn snap_to_zero(terms: impl Iterator<Item = f64>, count: usize) -> f64 {
    let (sum, magnitude) = terms.fold((0.0, 0.0), |(s, m), t| (s + t, m + t.abs()));
    let floor = 4.0 * (count + 1) as f64 * f64::EPSILON * magnitude;
    if sum.abs() <= floor {
        0.0
    } else {
        sum
    }
}

pub(crate) fn check_direction(direction: [f64; 3]) -> Result<()> {
    let norm2: f64 = direction.iter().map(|v| v * v).sum();
    if (norm2 - 1.0).abs() > 1e-12 {
        return Err(Error::Parameter(format!(
            "direction {direction:?} is not a unit vector (|d|² = {norm2})"
        )));
    }
    Ok(())
}

/// `Tr ρ^PI Π(Â^{⊗(N−n)} ⊗ I^{⊗n})` with `Â = a·X + b·Y + c·Z`.
pub fn symmetrized_expectation(
    coeffs: &PICoefficients,
    direction: [f64; 3],
    n_identity: usize,
) -> Result<f64> {
    check_direction(direction)?;
    let n = coeffs.n_qubits;
    if n_identity > n {
        return Err(Error::Parameter(format!(
            "n_identity = {n_identity} exceeds N = {n}"
        )));
    }
    let [a, b, c] = direction;
    let j = n - n_identity;
    let mut sum = 0.0;
    for k in 0..=j {
        for l in 0..=j - k {
            let m = j - k - l;
            let e = coeffs.get(k, l, m, n_identity);
            if e != 0.0 {
                sum += e * a.powi(k as i32) * b.powi(l as i32) * c.powi(m as i32);
            }
        }
    }
    Ok(sum * factorial(j) * 2f64.powi(n as i32) * factorial(n) * factorial(n_identity))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{make_basis_state, make_w};
    use approx::assert_abs_diff_eq;

    #[test]
    fn factorials_and_binomials() {
        assert_eq!(factorial(0), 1.0);
        assert_eq!(factorial(5), 120.0);
        assert_eq!(factorial(20), 2_432_902_008_176_640_000.0);
        assert!((factorial(25) / 1.5511210043330986e25 - 1.0).abs() < 1e-15);
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(3, 4), 0.0);
    }

    #[test]
    fn table_layout() {
        for n in 1..=10 {
            let c = PICoefficients::maximally_mixed(n).unwrap();
            assert_eq!(c.len(), composition_count(n));
            let comps = compositions(n);
            assert_eq!(comps.len(), composition_count(n));
            for (i, t) in comps.iter().enumerate() {
                assert_eq!(c.index(t.x, t.y, t.z), i);
            }
        }
        assert_abs_diff_eq!(normalization(3), 1.0 / 48.0);
    }

    #[test]
    fn all_zero_state_coefficients() {
        let rho = make_basis_state(3, 0).unwrap().density();
        let c = coeffs_from_dense(&rho);
        let expect = [1.0 / 48.0, 1.0 / 16.0, 1.0 / 16.0, 1.0 / 48.0];
        for (m, e) in expect.iter().enumerate() {
            // e_{00m,3−m} for m = 3, 2, 1, 0 listed as e_0030, e_0021, e_0012, e_0003
            assert_abs_diff_eq!(c.get(0, 0, 3 - m, m), *e, epsilon = 1e-15);
        }
        for (t, e) in c.iter() {
            if t.x > 0 || t.y > 0 {
                assert_abs_diff_eq!(e, 0.0, epsilon = 1e-15);
            }
        }
        let el = criterion_elements_from_coeffs(&c).unwrap();
        assert_abs_diff_eq!(el.d0, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(el.d1, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(el.d2, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(el.offdiag, 0.0, epsilon = 1e-14);

        let back = dense_from_coeffs(&c).unwrap();
        assert!(back.max_abs_diff(&rho) < 1e-14);
    }

    #[test]
    fn maximally_mixed_round_trip() {
        let mm = DensityMatrix::maximally_mixed(3).unwrap();
        let c = coeffs_from_dense(&mm);
        assert_abs_diff_eq!(c.get(0, 0, 0, 3), 1.0 / 48.0, epsilon = 1e-16);
        for (t, e) in c.iter() {
            if t.id != 3 {
                assert_abs_diff_eq!(e, 0.0, epsilon = 1e-16);
            }
        }
        assert!(dense_from_coeffs(&c).unwrap().max_abs_diff(&mm) < 1e-15);
    }

    #[test]
    fn zzz_only_expansion() {
        let mut c = PICoefficients::maximally_mixed(3).unwrap();
        c.set(0, 0, 3, 0, 1.0 / 480.0);
        let rho = dense_from_coeffs(&c).unwrap();
        for r in 0..8 {
            for col in 0..8 {
                if r != col {
                    assert_abs_diff_eq!(rho.get(r, col).norm(), 0.0);
                }
            }
        }
        let zzz = crate::state::pauli_expectation(&rho, &"ZZZ".parse().unwrap()).unwrap();
        // Π(ZZZ) = 6·ZZZ
        assert_abs_diff_eq!(6.0 * zzz, 288.0 / 480.0, epsilon = 1e-14);
    }

    #[test]
    fn unnormalized_coefficients_rejected() {
        let mut c = PICoefficients::maximally_mixed(2).unwrap();
        c.set(0, 0, 0, 2, 1.0);
        assert!(matches!(
            dense_from_coeffs(&c),
            Err(Error::InconsistentCoefficients(_))
        ));
    }

    #[test]
    fn n3_single_excitation_diagonal_formula() {
        let rho = make_w(3).unwrap().density();
        let c = coeffs_from_dense(&rho);
        let el = criterion_elements_from_coeffs(&c).unwrap();
        let supp =
            1.0 / 8.0 + 2.0 * c.get(0, 0, 1, 2) - 2.0 * c.get(0, 0, 2, 1) - 6.0 * c.get(0, 0, 3, 0);
        assert_abs_diff_eq!(el.d1, supp, epsilon = 1e-15);
        assert_abs_diff_eq!(el.d1, 1.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(el.offdiag, 1.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn criterion_elements_need_two_qubits() {
        let c = PICoefficients::maximally_mixed(1).unwrap();
        assert!(matches!(
            criterion_elements_from_coeffs(&c),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn symmetrized_expectation_basics() {
        let rho = make_basis_state(3, 0).unwrap().density();
        let c = coeffs_from_dense(&rho);
        assert_abs_diff_eq!(
            symmetrized_expectation(&c, [0.0, 0.0, 1.0], 0).unwrap(),
            6.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(288.0 * c.get(0, 0, 3, 0), 6.0, epsilon = 1e-12);
        for n in 1..=5 {
            let mm = PICoefficients::maximally_mixed(n).unwrap();
            assert_abs_diff_eq!(
                symmetrized_expectation(&mm, [0.6, 0.0, 0.8], n).unwrap(),
                factorial(n),
                epsilon = 1e-9
            );
        }
        assert!(matches!(
            symmetrized_expectation(&c, [1.0, 1.0, 0.0], 0),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            symmetrized_expectation(&c, [1.0, 0.0, 0.0], 4),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn bad_composition_rejected() {
        let mut c = PICoefficients::maximally_mixed(3).unwrap();
        assert!(c.try_get(1, 1, 1, 1).is_err());
        assert!(c.try_set(3, 1, 0, 0, 1.0).is_err());
    }

    #[test]
    fn cancelling_populations_are_exactly_zero() {
        for n in 3..=9 {
            let ghz = crate::state::make_ghz(n).unwrap().density();
            let el = criterion_elements_from_coeffs(&coeffs_from_dense(&ghz)).unwrap();
            assert_eq!(el.d1, 0.0);
            assert_eq!(el.d2, 0.0);
            assert_abs_diff_eq!(el.d0, 0.5, epsilon = 1e-14);
        }
    }
}
