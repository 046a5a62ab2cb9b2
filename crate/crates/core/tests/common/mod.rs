//! Brute-force oracles and state generators shared by the integration tests.
#![allow(dead_code)]

use num_complex::Complex64;
use pisep::coeffs::{compositions, type_multiplicity};
use pisep::state::{random_mixed, random_pure, Pauli, PauliType};
use pisep::{pi_project, DensityMatrix, PureState};
use rand::Rng;

pub const LETTERS: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

fn single(p: Pauli, r: usize, c: usize) -> Complex64 {
    let (zero, one, i) = (
        Complex64::new(0.0, 0.0),
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 1.0),
    );
    match (p, r, c) {
        (Pauli::I, a, b) => {
            if a == b {
                one
            } else {
                zero
            }
        }
        (Pauli::X, a, b) => {
            if a != b {
                one
            } else {
                zero
            }
        }
        (Pauli::Y, 0, 1) => -i,
        (Pauli::Y, 1, 0) => i,
        (Pauli::Y, _, _) => zero,
        (Pauli::Z, a, b) if a == b => {
            if a == 0 {
                one
            } else {
                -one
            }
        }
        (Pauli::Z, _, _) => zero,
    }
}

/// Entry `(r, c)` of the Kronecker product; letter `q` acts on bit `q`.
pub fn pauli_entry(letters: &[Pauli], r: usize, c: usize) -> Complex64 {
    letters
        .iter()
        .enumerate()
        .fold(Complex64::new(1.0, 0.0), |acc, (q, &p)| {
            acc * single(p, (r >> q) & 1, (c >> q) & 1)
        })
}

/// `Tr(ρ P)` from the full matrix product.
pub fn dense_trace_with(rho: &DensityMatrix, letters: &[Pauli]) -> Complex64 {
    let dim = rho.dim();
    let mut acc = Complex64::new(0.0, 0.0);
    for r in 0..dim {
        for c in 0..dim {
            acc += rho.get(r, c) * pauli_entry(letters, c, r);
        }
    }
    acc
}

/// Every Pauli string on `n` qubits.
pub fn all_strings(n: usize) -> Vec<Vec<Pauli>> {
    (0..4usize.pow(n as u32))
        .map(|mut code| {
            (0..n)
                .map(|_| {
                    let p = LETTERS[code % 4];
                    code /= 4;
                    p
                })
                .collect()
        })
        .collect()
}

pub fn signature(letters: &[Pauli]) -> PauliType {
    let count = |p| letters.iter().filter(|&&l| l == p).count();
    PauliType {
        x: count(Pauli::X),
        y: count(Pauli::Y),
        z: count(Pauli::Z),
        id: count(Pauli::I),
    }
}

/// `e_t` as the average of `Tr(ρ s)` over all strings `s` of type `t`,
/// divided by `mult(t)·2^N`. Does not use the PI projection.
pub fn brute_coefficients(rho: &DensityMatrix) -> Vec<(PauliType, f64)> {
    let n = rho.n_qubits();
    let strings = all_strings(n);
    compositions(n)
        .into_iter()
        .map(|t| {
            let members: Vec<&Vec<Pauli>> = strings.iter().filter(|s| signature(s) == t).collect();
            let mean = members
                .iter()
                .map(|s| dense_trace_with(rho, s).re)
                .sum::<f64>()
                / members.len() as f64;
            (t, mean / (type_multiplicity(t) * 2f64.powi(n as i32)))
        })
        .collect()
}

/// `Σ_t e_t · mult(t) · Σ_{s of type t} s` as a dense matrix.
pub fn brute_dense(n: usize, coeffs: &[(PauliType, f64)]) -> Vec<Complex64> {
    let dim = 1 << n;
    let mut out = vec![Complex64::new(0.0, 0.0); dim * dim];
    for s in all_strings(n) {
        let t = signature(&s);
        let e = coeffs
            .iter()
            .find(|(u, _)| *u == t)
            .map(|(_, e)| *e)
            .unwrap();
        if e == 0.0 {
            continue;
        }
        let w = e * type_multiplicity(t);
        for r in 0..dim {
            for c in 0..dim {
                out[r * dim + c] += pauli_entry(&s, r, c) * w;
            }
        }
    }
    out
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        out.push(p.clone());
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| p[i] < p[i + 1]) else {
            return out;
        };
        let j = (i + 1..n).rev().find(|&j| p[j] > p[i]).unwrap();
        p.swap(i, j);
        p[i + 1..].reverse();
    }
}

pub fn random_pi_state<R: Rng>(n: usize, rng: &mut R) -> DensityMatrix {
    pi_project(&random_mixed(n, rng).unwrap())
}

/// Random superposition of single-excitation states.
pub fn random_single_excitation<R: Rng>(n: usize, rng: &mut R) -> PureState {
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
    for i in 0..n {
        amps[1 << i] = Complex64::new(rng.random::<f64>() + 0.2, rng.random::<f64>() * 0.6 - 0.3);
    }
    PureState::normalized(n, amps).unwrap()
}

/// Mixed states that the criterion detects in a good fraction of draws:
/// single-excitation superpositions under random-state noise.
pub fn detectable_mixed<R: Rng>(n: usize, rng: &mut R) -> DensityMatrix {
    let psi = random_single_excitation(n, rng).density();
    let noise = if rng.random::<bool>() {
        random_mixed(n, rng).unwrap()
    } else {
        random_pure(n, rng).unwrap().density()
    };
    let noise_weight = rng.random::<f64>() * 0.8;
    psi.mix(&noise, 1.0 - noise_weight).unwrap()
}

pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
