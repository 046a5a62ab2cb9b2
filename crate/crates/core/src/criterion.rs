//! The k-separability criterion hierarchy and the degree of separability.
//!
//! A k-separable N-qubit state satisfies `A ≤ B + C·(N−k)/2` with
//!
//! * `A = Σ_{i<j} |ρ[2^i, 2^j]|`
//! * `B = Σ_{i<j} √(ρ[0,0] · ρ[2^i+2^j, 2^i+2^j])`
//! * `C = Σ_i ρ[2^i, 2^i]`
//!
//! and the degree of separability is `k_eff = N − 2(A − B)/C`.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coeffs::{criterion_elements_from_coeffs, PICoefficients};
use crate::error::{Error, Result};
use crate::state::{apply_local_basis, DensityMatrix, LocalBasisChange};

/// Slack on the strict inequality before a level is flagged.
pub const DETECTION_TOL: f64 = 1e-12;

/// `k_eff` is undefined when `C` falls below this.
pub const C_TOL: f64 = 1e-12;

const DIAG_TOL: f64 = -1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "K_NONSEPARABLE")]
    KNonseparable,
    #[serde(rename = "NOT_DETECTED")]
    NotDetected,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::KNonseparable => "K_NONSEPARABLE",
            Verdict::NotDetected => "NOT_DETECTED",
        })
    }
}

/// The sums entering the criterion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Abc {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionReport {
    pub n_qubits: usize,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub k_eff: Option<f64>,
    /// `(k, verdict)` for `k = 2..=N`.
    pub verdicts: Vec<(usize, Verdict)>,
}

impl CriterionReport {
    pub fn from_abc(n_qubits: usize, abc: Abc) -> Self {
        let Abc { a, b, c } = abc;
        let n = n_qubits as f64;
        let k_eff = (c > C_TOL).then(|| n - 2.0 * (a - b) / c);
        let verdicts = (2..=n_qubits)
            .map(|k| {
                let bound = b + c * (n - k as f64) / 2.0;
                let v = if a > bound + DETECTION_TOL {
                    Verdict::KNonseparable
                } else {
                    Verdict::NotDetected
                };
                (k, v)
            })
            .collect();
        Self {
            n_qubits,
            a,
            b,
            c,
            k_eff,
            verdicts,
        }
    }

    pub fn verdict(&self, k: usize) -> Option<Verdict> {
        self.verdicts
            .iter()
            .find(|(kk, _)| *kk == k)
            .map(|(_, v)| *v)
    }

    pub fn detects(&self, k: usize) -> bool {
        self.verdict(k) == Some(Verdict::KNonseparable)
    }

    /// Genuine N-partite entanglement certified (level k = 2 violated).
    pub fn detects_gme(&self) -> bool {
        self.detects(2)
    }

    pub fn abc(&self) -> Abc {
        Abc {
            a: self.a,
            b: self.b,
            c: self.c,
        }
    }

    /// Objective for basis search: smaller means stronger evidence.
    fn score(&self) -> f64 {
        self.k_eff.unwrap_or(f64::INFINITY)
    }
}

fn check_criterion_qubits(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::Dimension(format!("criterion needs N >= 2, got {n}")));
    }
    Ok(())
}

fn clamp_diag(v: f64, what: &str) -> Result<f64> {
    if v < DIAG_TOL {
        return Err(Error::Validation(format!("negative diagonal {what} = {v}")));
    }
    Ok(v.max(0.0))
}

/// `A`, `B`, `C` read off the dense matrix.
pub fn compute_abc(state: &DensityMatrix) -> Result<Abc> {
    let n = state.n_qubits();
    check_criterion_qubits(n)?;
    let d0 = clamp_diag(state.get(0, 0).re, "rho[0,0]")?;
    let mut a = 0.0;
    let mut b = 0.0;
    let mut c = 0.0;
    for i in 0..n {
        let si = 1 << i;
        c += state.get(si, si).re;
        for j in i + 1..n {
            let sj = 1 << j;
            a += state.get(si, sj).norm();
            let d2 = clamp_diag(state.get(si | sj, si | sj).re, "rho[2^i+2^j]")?;
            b += (d0 * d2).sqrt();
        }
    }
    Ok(Abc { a, b, c })
}

/// `A`, `B`, `C` of `PI(state)`, read from orbit means of the relevant entries.
pub fn compute_abc_of_pi_part(state: &DensityMatrix) -> Result<Abc> {
    let n = state.n_qubits();
    check_criterion_qubits(n)?;
    let pairs = (n * (n - 1) / 2) as f64;
    let d0 = clamp_diag(state.get(0, 0).re, "rho[0,0]")?;
    let mut off = num_complex::Complex64::new(0.0, 0.0);
    let mut d2 = 0.0;
    let mut c = 0.0;
    for i in 0..n {
        let si = 1 << i;
        c += state.get(si, si).re;
        for j in i + 1..n {
            let sj = 1 << j;
            off += state.get(si, sj) + state.get(sj, si);
            d2 += state.get(si | sj, si | sj).re;
        }
    }
    let off = off / (2.0 * pairs);
    let d2 = clamp_diag(d2 / pairs, "mean rho[2^i+2^j]")?;
    Ok(Abc {
        a: pairs * off.norm(),
        b: pairs * (d0 * d2).sqrt(),
        c,
    })
}

/// Criterion report from the dense matrix entries.
pub fn evaluate_criterion(state: &DensityMatrix) -> Result<CriterionReport> {
    Ok(CriterionReport::from_abc(
        state.n_qubits(),
        compute_abc(state)?,
    ))
}

/// Criterion report of the PI state described by `coeffs`.
pub fn evaluate_criterion_coeffs(coeffs: &PICoefficients) -> Result<CriterionReport> {
    let n = coeffs.n_qubits();
    check_criterion_qubits(n)?;
    let el = criterion_elements_from_coeffs(coeffs)?;
    let pairs = (n * (n - 1) / 2) as f64;
    let d0 = clamp_diag(el.d0, "rho[0,0]")?;
    let d2 = clamp_diag(el.d2, "rho[2^i+2^j]")?;
    let abc = Abc {
        a: pairs * el.offdiag.abs(),
        b: pairs * (d0 * d2).sqrt(),
        c: n as f64 * el.d1,
    };
    Ok(CriterionReport::from_abc(n, abc))
}

fn check_noise_args(n: usize, p: f64) -> Result<()> {
    check_criterion_qubits(n)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Parameter(format!(
            "noise level p = {p} not in [0, 1]"
        )));
    }
    Ok(())
}

/// Closed-form `k_eff` of `(1−p)|W⟩⟨W| + p·I/2^N`.
pub fn w_noise_keff(n_qubits: usize, p: f64) -> Result<f64> {
    check_noise_args(n_qubits, p)?;
    let n = n_qubits as f64;
    let two_n = 2f64.powi(n_qubits as i32);
    Ok((two_n - (two_n + n - 2.0 * n * n) * p) / (two_n + (n - two_n) * p))
}

/// Closed-form `A`, `B`, `C` of the noisy W state, valid for any `N`.
pub fn w_noise_abc(n_qubits: usize, p: f64) -> Result<Abc> {
    check_noise_args(n_qubits, p)?;
    let n = n_qubits as f64;
    let two_n = 2f64.powi(n_qubits as i32);
    let pairs = n * (n - 1.0) / 2.0;
    Ok(Abc {
        a: (1.0 - p) * (n - 1.0) / 2.0,
        b: pairs * p / two_n,
        c: (1.0 - p) + n * p / two_n,
    })
}

/// Noise level `p*` at which the noisy W state's `k_eff` equals `k`.
///
/// Solving `k_eff(N, p) = k` gives
/// `p* = 2^N (k−1) / ((k−1)·2^N + N(2N − k − 1))`.
pub fn w_noise_detection_threshold(n_qubits: usize, k: usize) -> Result<f64> {
    check_criterion_qubits(n_qubits)?;
    if k < 2 || k > n_qubits {
        return Err(Error::Domain(format!(
            "threshold needs 2 <= k <= N, got k = {k}, N = {n_qubits}"
        )));
    }
    let n = n_qubits as f64;
    let km1 = (k - 1) as f64;
    let two_n = 2f64.powi(n_qubits as i32);
    let p = two_n * km1 / (km1 * two_n + n * (2.0 * n - k as f64 - 1.0));
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!(
            "no root in [0, 1] for N = {n_qubits}, k = {k}"
        )));
    }
    Ok(p)
}

/// Outcome of [`maximize_over_bases`].
#[derive(Debug, Clone)]
pub struct BasisSearch {
    /// Criterion of the PI part in the computational basis.
    pub identity_report: CriterionReport,
    /// Best criterion found; never worse than `identity_report`.
    pub best_report: CriterionReport,
    pub best_basis: LocalBasisChange,
    /// Euler angles `(α, β, γ)` per qubit of `best_basis`.
    pub best_angles: Vec<[f64; 3]>,
    /// Restart that produced the best report.
    pub best_restart: usize,
}

/// Line searches per restart.
pub const REFINE_ITERATIONS: usize = 200;
const GOLDEN_STEPS: usize = 40;

fn report_in_basis(state: &DensityMatrix, angles: &[[f64; 3]]) -> Result<CriterionReport> {
    let rotated = apply_local_basis(state, &LocalBasisChange::from_euler(angles))?;
    Ok(CriterionReport::from_abc(
        state.n_qubits(),
        compute_abc_of_pi_part(&rotated)?,
    ))
}

/// Heuristic search over local bases for the PI part with the smallest `k_eff`.
///
/// Each restart starts from random Euler angles (restart 0 from the identity)
/// and then runs [`REFINE_ITERATIONS`] coordinate-wise golden-section line
/// searches. The criterion is evaluated on `PI(B ρ B†)` in the rotated frame.
/// The result is a witness only; it is not claimed to be a global optimum.
pub fn maximize_over_bases(
    state: &DensityMatrix,
    restarts: usize,
    seed: u64,
) -> Result<BasisSearch> {
    let n = state.n_qubits();
    check_criterion_qubits(n)?;
    let identity_angles = vec![[0.0; 3]; n];
    let identity_report = report_in_basis(state, &identity_angles)?;
    let mut best = (identity_report.clone(), identity_angles.clone(), 0usize);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tau = std::f64::consts::TAU;
    for restart in 0..restarts.max(1) {
        let mut angles: Vec<[f64; 3]> = if restart == 0 {
            identity_angles.clone()
        } else {
            (0..n)
                .map(|_| {
                    [
                        rng.random::<f64>() * tau,
                        rng.random::<f64>() * tau,
                        rng.random::<f64>() * tau,
                    ]
                })
                .collect()
        };
        let mut current = report_in_basis(state, &angles)?.score();
        for it in 0..REFINE_ITERATIONS {
            let coord = it % (3 * n);
            let (q, a) = (coord / 3, coord % 3);
            let x0 = angles[q][a];
            let mut eval = |x: f64| -> Result<f64> {
                let mut trial = angles.clone();
                trial[q][a] = x;
                Ok(report_in_basis(state, &trial)?.score())
            };
            let (x, fx) = golden_section(
                &mut eval,
                x0 - std::f64::consts::PI,
                x0 + std::f64::consts::PI,
            )?;
            if fx < current {
                angles[q][a] = x;
                current = fx;
            }
        }
        let report = report_in_basis(state, &angles)?;
        if report.score() < best.0.score() {
            best = (report, angles, restart);
        }
    }
    let (best_report, best_angles, best_restart) = best;
    Ok(BasisSearch {
        identity_report,
        best_report,
        best_basis: LocalBasisChange::from_euler(&best_angles),
        best_angles,
        best_restart,
    })
}

fn golden_section(
    f: &mut impl FnMut(f64) -> Result<f64>,
    mut lo: f64,
    mut hi: f64,
) -> Result<(f64, f64)> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    for _ in 0..GOLDEN_STEPS {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 <= f2 { (x1, f1) } else { (x2, f2) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{make_ghz, make_w, mix_white_noise, random_mixed};
    use crate::symmetry::pi_project;
    use approx::assert_abs_diff_eq;

    #[test]
    fn w3_pure() {
        let abc = compute_abc(&make_w(3).unwrap().density()).unwrap();
        assert_abs_diff_eq!(abc.a, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(abc.b, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(abc.c, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn ghz3_has_no_single_excitations() {
        let r = evaluate_criterion(&make_ghz(3).unwrap().density()).unwrap();
        assert_eq!((r.a, r.b, r.c), (0.0, 0.0, 0.0));
        assert_eq!(r.k_eff, None);
        assert!(r.verdicts.iter().all(|(_, v)| *v == Verdict::NotDetected));
    }

    #[test]
    fn noisy_w3_half() {
        let rho = mix_white_noise(&make_w(3).unwrap().density(), 0.5).unwrap();
        let abc = compute_abc(&rho).unwrap();
        assert_abs_diff_eq!(abc.a, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(abc.b, 3.0 / 16.0, epsilon = 1e-14);
        assert_abs_diff_eq!(abc.c, 0.6875, epsilon = 1e-14);
        let closed = w_noise_abc(3, 0.5).unwrap();
        assert_abs_diff_eq!(closed.a, abc.a, epsilon = 1e-14);
        assert_abs_diff_eq!(closed.b, abc.b, epsilon = 1e-14);
        assert_abs_diff_eq!(closed.c, abc.c, epsilon = 1e-14);
        let r = evaluate_criterion(&rho).unwrap();
        assert_abs_diff_eq!(r.k_eff.unwrap(), 23.0 / 11.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w_noise_keff(3, 0.5).unwrap(), 23.0 / 11.0, epsilon = 1e-14);
    }

    #[test]
    fn w_states_are_genuinely_entangled() {
        for n in 2..=8 {
            let r = evaluate_criterion(&make_w(n).unwrap().density()).unwrap();
            assert_abs_diff_eq!(r.k_eff.unwrap(), 1.0, epsilon = 1e-12);
            assert!((2..=n).all(|k| r.detects(k)));
        }
    }

    #[test]
    fn maximally_mixed_is_not_detected() {
        for n in 2..=6 {
            let r = evaluate_criterion(&DensityMatrix::maximally_mixed(n).unwrap()).unwrap();
            assert_abs_diff_eq!(r.k_eff.unwrap(), (2 * n - 1) as f64, epsilon = 1e-12);
            assert!(r.verdicts.iter().all(|(_, v)| *v == Verdict::NotDetected));
        }
    }

    #[test]
    fn symmetric_bell_pair() {
        let r = evaluate_criterion(&make_w(2).unwrap().density()).unwrap();
        assert_abs_diff_eq!(r.a, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(r.b, 0.0);
        assert_abs_diff_eq!(r.c, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.k_eff.unwrap(), 1.0, epsilon = 1e-15);
        assert!(r.detects(2));
    }

    #[test]
    fn closed_form_endpoints() {
        for n in 2..=20 {
            assert_abs_diff_eq!(w_noise_keff(n, 0.0).unwrap(), 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(
                w_noise_keff(n, 1.0).unwrap(),
                (2 * n - 1) as f64,
                epsilon = 1e-9
            );
        }
        assert!(w_noise_keff(1, 0.5).is_err());
        assert!(w_noise_keff(3, 1.2).is_err());
    }

    fn bisect_threshold(n: usize, k: usize) -> f64 {
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if w_noise_keff(n, mid).unwrap() < k as f64 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn threshold_matches_bisection() {
        assert_abs_diff_eq!(
            w_noise_detection_threshold(3, 2).unwrap(),
            8.0 / 17.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(w_noise_keff(3, 8.0 / 17.0).unwrap(), 2.0, epsilon = 1e-12);
        for n in 2..=16 {
            for k in 2..=n {
                let p = w_noise_detection_threshold(n, k).unwrap();
                assert_abs_diff_eq!(p, bisect_threshold(n, k), epsilon = 1e-12);
            }
        }
        let p16 = w_noise_detection_threshold(16, 2).unwrap();
        assert_abs_diff_eq!(p16, 65536.0 / 66000.0, epsilon = 1e-15);
        // p*(N, 2) dips to its minimum at N = 4 and increases from there on
        let mut prev = w_noise_detection_threshold(4, 2).unwrap();
        assert!(w_noise_detection_threshold(3, 2).unwrap() > prev);
        for n in 5..=16 {
            let p = w_noise_detection_threshold(n, 2).unwrap();
            assert!(p > prev);
            prev = p;
        }
        assert!(matches!(
            w_noise_detection_threshold(4, 1),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            w_noise_detection_threshold(4, 5),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn pi_part_shortcut_matches_projection() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for n in 2..=5 {
            let rho = random_mixed(n, &mut rng).unwrap();
            let fast = compute_abc_of_pi_part(&rho).unwrap();
            let slow = compute_abc(&pi_project(&rho)).unwrap();
            assert_abs_diff_eq!(fast.a, slow.a, epsilon = 1e-14);
            assert_abs_diff_eq!(fast.b, slow.b, epsilon = 1e-14);
            assert_abs_diff_eq!(fast.c, slow.c, epsilon = 1e-14);
        }
    }

    #[test]
    fn negative_diagonal_rejected() {
        let mut c = PICoefficients::maximally_mixed(2).unwrap();
        // pushes ρ[0,0] = 2·(e_0002 + e_0011 + e_0020) negative
        c.set(0, 0, 1, 1, -0.2);
        assert!(matches!(
            evaluate_criterion_coeffs(&c),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn verdict_monotone_in_k() {
        let w = make_w(5).unwrap().density();
        for p in [0.0, 0.3, 0.6, 0.8, 0.9, 0.95] {
            let r = evaluate_criterion(&mix_white_noise(&w, p).unwrap()).unwrap();
            for k in 2..5 {
                if r.detects(k) {
                    assert!(r.detects(k + 1));
                }
            }
        }
    }
}
