//! Local measurement scheme with `2N + 1` settings and linear-inversion
//! reconstruction of the coefficients needed by the criterion.
//!
//! Every setting measures the same observable `Â = a·X + b·Y + c·Z` on all
//! qubits. For a PI state the only sufficient statistic of one shot is the
//! number `u` of `+1` outcomes, and the symmetrized correlator
//! `Π(Â^{⊗j} ⊗ I^{⊗n})` (with `j = N − n`) evaluates on a shot to
//! `j!·n!·K_j(u)`, where `K_j(u) = Σ_s (−1)^s C(N−u, s) C(u, j−s)` sums the
//! products of outcomes over all `j`-subsets of qubits.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coeffs::{
    binomial, check_direction, factorial, symmetrized_expectation, PICoefficients,
};
use crate::error::{Error, Result};
use crate::state::{apply_local_basis, DensityMatrix, LocalBasisChange, PauliType};

/// Reconstruction fails when a design matrix is conditioned worse than this.
pub const MAX_CONDITION: f64 = 1e10;

/// Name of the generator used for sampled data.
pub const RNG_NAME: &str = "ChaCha8Rng";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "Z_AXIS")]
    ZAxis,
    #[serde(rename = "YZ_PLANE")]
    YzPlane,
    #[serde(rename = "XZ_PLANE")]
    XzPlane,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementSetting {
    direction: [f64; 3],
    family: Family,
}

impl MeasurementSetting {
    pub fn new(direction: [f64; 3], family: Family) -> Result<Self> {
        check_direction(direction)?;
        let [a, b, _] = direction;
        let ok = match family {
            Family::ZAxis => a == 0.0 && b == 0.0,
            Family::YzPlane => a == 0.0,
            Family::XzPlane => b == 0.0,
        };
        if !ok {
            return Err(Error::Parameter(format!(
                "direction {direction:?} does not belong to family {family:?}"
            )));
        }
        Ok(Self { direction, family })
    }

    pub fn z_axis() -> Self {
        Self {
            direction: [0.0, 0.0, 1.0],
            family: Family::ZAxis,
        }
    }

    /// `(0, sin θ, cos θ)`.
    pub fn yz(theta: f64) -> Self {
        Self {
            direction: [0.0, theta.sin(), theta.cos()],
            family: Family::YzPlane,
        }
    }

    /// `(sin θ, 0, cos θ)`.
    pub fn xz(theta: f64) -> Self {
        Self {
            direction: [theta.sin(), 0.0, theta.cos()],
            family: Family::XzPlane,
        }
    }

    pub fn direction(&self) -> [f64; 3] {
        self.direction
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// In-plane component (`b` for YZ, `a` for XZ) and `c`.
    fn plane_coords(&self) -> (f64, f64) {
        let [a, b, c] = self.direction;
        match self.family {
            Family::XzPlane => (a, c),
            _ => (b, c),
        }
    }

    /// Human-readable observable, e.g. `0.7071·σy + 0.7071·σz`.
    pub fn describe(&self) -> String {
        let names = ["σx", "σy", "σz"];
        let mut out = String::new();
        for (v, s) in self
            .direction
            .iter()
            .zip(names)
            .filter(|(v, _)| v.abs() > 1e-15)
        {
            let sign = if *v < 0.0 { "-" } else { "+" };
            if out.is_empty() {
                out = format!("{}{:.6}·{s}", if *v < 0.0 { "-" } else { "" }, v.abs());
            } else {
                out += &format!(" {sign} {:.6}·{s}", v.abs());
            }
        }
        out
    }

    /// Local unitary mapping the `±1` eigenvectors of `Â` to `|0⟩`, `|1⟩`.
    fn eigenbasis(&self) -> [[Complex64; 2]; 2] {
        let [a, b, c] = self.direction;
        let theta = c.clamp(-1.0, 1.0).acos();
        let phi = b.atan2(a);
        let (ct, st) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        let e = |t: f64| Complex64::from_polar(1.0, t);
        [[e(0.0) * ct, e(-phi) * st], [-e(phi) * st, e(0.0) * ct]]
    }
}

/// Which settings [`design_settings_with`] produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Preset {
    /// `θ_i = (2i+1)π/(4N)` in each plane.
    #[default]
    Uniform,
    /// The seven three-qubit observables `σz, σx, σy, (σy±σz)/√2, (σx±σz)/√2`.
    Supplement,
}

/// `2N + 1` settings: `σz`, then `N` in the YZ plane, then `N` in the XZ plane.
pub fn design_settings(n_qubits: usize) -> Result<Vec<MeasurementSetting>> {
    design_settings_with(n_qubits, Preset::Uniform)
}

pub fn design_settings_with(n_qubits: usize, preset: Preset) -> Result<Vec<MeasurementSetting>> {
    if n_qubits < 2 {
        return Err(Error::Dimension(format!(
            "measurement design needs N >= 2, got {n_qubits}"
        )));
    }
    match preset {
        Preset::Uniform => {
            let thetas: Vec<f64> = (0..n_qubits)
                .map(|i| (2 * i + 1) as f64 * PI / (4 * n_qubits) as f64)
                .collect();
            let mut out = vec![MeasurementSetting::z_axis()];
            out.extend(thetas.iter().map(|&t| MeasurementSetting::yz(t)));
            out.extend(thetas.iter().map(|&t| MeasurementSetting::xz(t)));
            Ok(out)
        }
        Preset::Supplement => {
            if n_qubits != 3 {
                return Err(Error::Dimension(format!(
                    "the seven-observable preset is defined for N = 3, got {n_qubits}"
                )));
            }
            let h = FRAC_1_SQRT_2;
            Ok(vec![
                MeasurementSetting::z_axis(),
                MeasurementSetting::new([1.0, 0.0, 0.0], Family::XzPlane)?,
                MeasurementSetting::new([0.0, 1.0, 0.0], Family::YzPlane)?,
                MeasurementSetting::new([0.0, h, h], Family::YzPlane)?,
                MeasurementSetting::new([0.0, h, -h], Family::YzPlane)?,
                MeasurementSetting::new([h, 0.0, h], Family::XzPlane)?,
                MeasurementSetting::new([h, 0.0, -h], Family::XzPlane)?,
            ])
        }
    }
}

/// Number of `e_klmn` fixed by the `2N + 1` setting experiment, `N² + 2N`.
pub fn parameter_count(n_qubits: usize) -> Result<usize> {
    if n_qubits < 2 {
        return Err(Error::Dimension(format!(
            "parameter count needs N >= 2, got {n_qubits}"
        )));
    }
    let planar: usize = (0..n_qubits).map(|n| n_qubits - n).sum();
    Ok(n_qubits + 2 * planar)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shots {
    Exact,
    Finite(u64),
}

/// Symmetrized correlators of one setting, `correlators[n]` for `n = 0..N−1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SettingData {
    pub setting: MeasurementSetting,
    pub correlators: Vec<f64>,
    pub shots: Shots,
    /// Counts of shots with `u = 0..=N` outcomes equal to `+1`.
    pub histogram: Option<Vec<u64>>,
    pub seed: Option<u64>,
}

impl SettingData {
    pub fn n_qubits(&self) -> usize {
        self.correlators.len()
    }

    /// Variance of each correlator estimate; zero for exact data.
    pub fn correlator_variances(&self) -> Vec<f64> {
        let n = self.n_qubits();
        let hist = match (&self.shots, &self.histogram) {
            (Shots::Finite(_), Some(h)) => h,
            _ => return vec![0.0; n],
        };
        let total: u64 = hist.iter().sum();
        (0..n)
            .map(|n_id| {
                let scale = correlator_scale(n, n_id);
                let (mut s1, mut s2) = (0.0, 0.0);
                for (u, &count) in hist.iter().enumerate() {
                    let y = scale * krawtchouk(n, u, n - n_id);
                    s1 += count as f64 * y;
                    s2 += count as f64 * y * y;
                }
                let t = total as f64;
                let mean = s1 / t;
                let sample_var = ((s2 - t * mean * mean) / (t - 1.0).max(1.0)).max(0.0);
                sample_var / t
            })
            .collect()
    }
}

/// `K_j(u) = Σ_s (−1)^s C(N−u, s) C(u, j−s)`: sum over `j`-subsets of the
/// product of `±1` outcomes when `u` of the `N` outcomes are `+1`.
pub fn krawtchouk(n_qubits: usize, up: usize, j: usize) -> f64 {
    let down = n_qubits - up;
    (0..=j.min(down))
        .map(|s| {
            let sign = if s % 2 == 0 { 1.0 } else { -1.0 };
            sign * binomial(down, s) * binomial(up, j - s)
        })
        .sum()
}

/// `j!·n!` with `j = N − n`: the multiplicity of each subset term in `Π(Â^j ⊗ I^n)`.
fn correlator_scale(n_qubits: usize, n_identity: usize) -> f64 {
    factorial(n_qubits - n_identity) * factorial(n_identity)
}

/// Probability of each outcome string when measuring `Â` on every qubit.
/// Bit `q` of the index is 0 when qubit `q` gave `+1`.
pub fn outcome_distribution(
    state: &DensityMatrix,
    setting: &MeasurementSetting,
) -> Result<Vec<f64>> {
    let w = setting.eigenbasis();
    let basis = LocalBasisChange::new(vec![w; state.n_qubits()])?;
    let rotated = apply_local_basis(state, &basis)?;
    Ok((0..rotated.dim())
        .map(|x| rotated.get(x, x).re.max(0.0))
        .collect())
}

/// Distribution of the number `u` of `+1` outcomes.
pub fn up_count_distribution(
    state: &DensityMatrix,
    setting: &MeasurementSetting,
) -> Result<Vec<f64>> {
    let n = state.n_qubits();
    let mut dist = vec![0.0; n + 1];
    for (x, p) in outcome_distribution(state, setting)?
        .into_iter()
        .enumerate()
    {
        dist[n - x.count_ones() as usize] += p;
    }
    Ok(dist)
}

fn correlators_from_distribution(n: usize, dist: &[f64]) -> Vec<f64> {
    (0..n)
        .map(|n_id| {
            let j = n - n_id;
            correlator_scale(n, n_id)
                * dist
                    .iter()
                    .enumerate()
                    .map(|(u, &p)| p * krawtchouk(n, u, j))
                    .sum::<f64>()
        })
        .collect()
}

/// Exact correlators from the dense state's outcome statistics.
pub fn exact_setting_data(
    state: &DensityMatrix,
    setting: &MeasurementSetting,
) -> Result<SettingData> {
    let dist = up_count_distribution(state, setting)?;
    Ok(SettingData {
        setting: *setting,
        correlators: correlators_from_distribution(state.n_qubits(), &dist),
        shots: Shots::Exact,
        histogram: None,
        seed: None,
    })
}

/// Exact correlators from the coefficient expansion.
pub fn exact_setting_data_coeffs(
    coeffs: &PICoefficients,
    setting: &MeasurementSetting,
) -> Result<SettingData> {
    let n = coeffs.n_qubits();
    let correlators = (0..n)
        .map(|n_id| symmetrized_expectation(coeffs, setting.direction, n_id))
        .collect::<Result<Vec<_>>>()?;
    Ok(SettingData {
        setting: *setting,
        correlators,
        shots: Shots::Exact,
        histogram: None,
        seed: None,
    })
}

/// Simulates `shots` repetitions of the setting and estimates the correlators
/// from the histogram of `+1` counts.
pub fn sample_setting_data(
    state: &DensityMatrix,
    setting: &MeasurementSetting,
    shots: u64,
    seed: u64,
) -> Result<SettingData> {
    if shots == 0 {
        return Err(Error::Parameter("shots must be at least 1".into()));
    }
    let n = state.n_qubits();
    let dist = up_count_distribution(state, setting)?;
    let sampler = WeightedIndex::new(&dist)
        .map_err(|e| Error::NumericalConsistency(format!("bad outcome distribution: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut histogram = vec![0u64; n + 1];
    for _ in 0..shots {
        histogram[sampler.sample(&mut rng)] += 1;
    }
    let freqs: Vec<f64> = histogram.iter().map(|&c| c as f64 / shots as f64).collect();
    Ok(SettingData {
        setting: *setting,
        correlators: correlators_from_distribution(n, &freqs),
        shots: Shots::Finite(shots),
        histogram: Some(histogram),
        seed: Some(seed),
    })
}

/// Coefficients recovered from measurement data.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionResult {
    pub n_qubits: usize,
    /// `z[m−1] = e_{0,0,m,N−m}` for `m = 1..=N`.
    pub z: Vec<f64>,
    /// `yz[n][l−1] = e_{0,l,N−n−l,n}` for `n = 0..N`, `l = 1..=N−n`.
    pub yz: Vec<Vec<f64>>,
    /// `xz[n][k−1] = e_{k,0,N−n−k,n}`.
    pub xz: Vec<Vec<f64>>,
    /// Design-matrix condition numbers, YZ for `n = 0..N` then XZ.
    pub condition_numbers: Vec<f64>,
    /// Least-squares residual norms, same layout as `condition_numbers`.
    pub residuals: Vec<f64>,
    /// Propagated standard errors, same layout as the coefficients.
    pub standard_errors: Option<CoefficientErrors>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientErrors {
    pub z: Vec<f64>,
    pub yz: Vec<Vec<f64>>,
    pub xz: Vec<Vec<f64>>,
}

impl ReconstructionResult {
    /// The `3N − 2` coefficients needed by the criterion:
    /// `e_{00m,N−m}` (m = 1..N), `e_{20m,N−m−2}` and `e_{02m,N−m−2}` (m = 0..N−2).
    pub fn criterion_coefficients(&self) -> Vec<(PauliType, f64)> {
        criterion_layout(self.n_qubits, &self.z, &self.yz, &self.xz)
    }

    pub fn criterion_standard_errors(&self) -> Option<Vec<(PauliType, f64)>> {
        self.standard_errors
            .as_ref()
            .map(|e| criterion_layout(self.n_qubits, &e.z, &e.yz, &e.xz))
    }

    /// Every coefficient the data determined.
    pub fn determined(&self) -> Vec<(PauliType, f64)> {
        let n = self.n_qubits;
        let mut out = Vec::new();
        for (i, &e) in self.z.iter().enumerate() {
            let m = i + 1;
            out.push((
                PauliType {
                    x: 0,
                    y: 0,
                    z: m,
                    id: n - m,
                },
                e,
            ));
        }
        for (n_id, row) in self.yz.iter().enumerate() {
            for (i, &e) in row.iter().enumerate() {
                let l = i + 1;
                out.push((
                    PauliType {
                        x: 0,
                        y: l,
                        z: n - n_id - l,
                        id: n_id,
                    },
                    e,
                ));
            }
        }
        for (n_id, row) in self.xz.iter().enumerate() {
            for (i, &e) in row.iter().enumerate() {
                let k = i + 1;
                out.push((
                    PauliType {
                        x: k,
                        y: 0,
                        z: n - n_id - k,
                        id: n_id,
                    },
                    e,
                ));
            }
        }
        out
    }

    /// Coefficient table with the determined entries and the normalization;
    /// all other entries are zero.
    pub fn to_coefficients(&self) -> PICoefficients {
        let mut c = PICoefficients::maximally_mixed(self.n_qubits).expect("N >= 2");
        for (t, e) in self.determined() {
            c.set(t.x, t.y, t.z, t.id, e);
        }
        c
    }
}

fn criterion_layout(
    n: usize,
    z: &[f64],
    yz: &[Vec<f64>],
    xz: &[Vec<f64>],
) -> Vec<(PauliType, f64)> {
    let mut out = Vec::with_capacity(3 * n - 2);
    for m in 1..=n {
        out.push((
            PauliType {
                x: 0,
                y: 0,
                z: m,
                id: n - m,
            },
            z[m - 1],
        ));
    }
    for m in 0..=n - 2 {
        out.push((
            PauliType {
                x: 2,
                y: 0,
                z: m,
                id: n - m - 2,
            },
            xz[n - m - 2][1],
        ));
    }
    for m in 0..=n - 2 {
        out.push((
            PauliType {
                x: 0,
                y: 2,
                z: m,
                id: n - m - 2,
            },
            yz[n - m - 2][1],
        ));
    }
    out
}

struct PlanarSolve {
    solution: Vec<f64>,
    variances: Vec<f64>,
    condition: f64,
    residual: f64,
}

/// Least squares for one `n` of one plane family.
///
/// Row `s`: `Σ_l e_l · p_s^l c_s^{j−l} = corr_s[n]/scale − e_z · c_s^j`.
fn solve_planar(
    settings: &[&SettingData],
    n_qubits: usize,
    n_id: usize,
    z_value: f64,
    z_variance: f64,
) -> Result<PlanarSolve> {
    let j = n_qubits - n_id;
    let scale = factorial(j) * 2f64.powi(n_qubits as i32) * factorial(n_qubits) * factorial(n_id);
    let rows = settings.len();
    if rows < j {
        return Err(Error::Reconstruction {
            n: n_id,
            reason: format!("{rows} settings for {j} unknowns"),
        });
    }
    let coords: Vec<(f64, f64)> = settings.iter().map(|d| d.setting.plane_coords()).collect();
    let mut design = DMatrix::from_fn(rows, j, |s, col| {
        let (p, c) = coords[s];
        let l = col + 1;
        p.powi(l as i32) * c.powi((j - l) as i32)
    });
    let rhs = DVector::from_fn(rows, |s, _| {
        settings[s].correlators[n_id] / scale - z_value * coords[s].1.powi(j as i32)
    });
    // equilibrate columns
    let col_scale: Vec<f64> = (0..j)
        .map(|col| {
            let norm = design.column(col).norm();
            if norm > 0.0 {
                1.0 / norm
            } else {
                1.0
            }
        })
        .collect();
    for (col, &s) in col_scale.iter().enumerate() {
        design.column_mut(col).scale_mut(s);
    }
    let svd = design.clone().svd(true, true);
    let sv = &svd.singular_values;
    let (smax, smin) = sv.iter().fold((0.0f64, f64::INFINITY), |(hi, lo), &s| {
        (hi.max(s), lo.min(s))
    });
    let condition = if smin > 0.0 {
        smax / smin
    } else {
        f64::INFINITY
    };
    // NaN counts as ill-conditioned
    if condition.is_nan() || condition > MAX_CONDITION {
        return Err(Error::Reconstruction {
            n: n_id,
            reason: format!(
                "design matrix condition number {condition:e} exceeds {MAX_CONDITION:e}"
            ),
        });
    }
    let pinv = svd.pseudo_inverse(0.0).map_err(|e| Error::Reconstruction {
        n: n_id,
        reason: e.to_string(),
    })?;
    let scaled = &pinv * &rhs;
    let residual = (&design * &scaled - &rhs).norm();
    let solution: Vec<f64> = scaled.iter().zip(&col_scale).map(|(x, s)| x * s).collect();

    // linear map from rhs to solution, then variance of each unknown
    let setting_vars: Vec<f64> = settings
        .iter()
        .map(|d| d.correlator_variances()[n_id] / (scale * scale))
        .collect();
    let variances = (0..j)
        .map(|col| {
            let row = pinv.row(col);
            let s = col_scale[col];
            let independent: f64 = (0..rows)
                .map(|r| (s * row[r]).powi(2) * setting_vars[r])
                .sum();
            let shared: f64 = (0..rows)
                .map(|r| s * row[r] * coords[r].1.powi(j as i32))
                .sum();
            independent + shared * shared * z_variance
        })
        .collect();
    Ok(PlanarSolve {
        solution,
        variances,
        condition,
        residual,
    })
}

/// Recovers coefficients from one `σz` setting and at least `N` settings in
/// each of the YZ and XZ planes.
///
/// The `σz` correlators give `e_{0,0,N−n,n}` directly; these are moved to the
/// right-hand side of each planar system, which is then solved by least
/// squares over all available settings of that plane.
pub fn reconstruct_coefficients(
    data: &[SettingData],
    n_qubits: usize,
) -> Result<ReconstructionResult> {
    if n_qubits < 2 {
        return Err(Error::Dimension(format!(
            "reconstruction needs N >= 2, got {n_qubits}"
        )));
    }
    if let Some(d) = data.iter().find(|d| d.correlators.len() != n_qubits) {
        return Err(Error::Argument(format!(
            "setting data has {} correlators, expected {n_qubits}",
            d.correlators.len()
        )));
    }
    let of = |f: Family| {
        data.iter()
            .filter(move |d| d.setting.family == f)
            .collect::<Vec<_>>()
    };
    let z_data = of(Family::ZAxis);
    let [z] = z_data.as_slice() else {
        return Err(Error::Argument(format!(
            "expected exactly one Z_AXIS setting, got {}",
            z_data.len()
        )));
    };
    let (yz_data, xz_data) = (of(Family::YzPlane), of(Family::XzPlane));

    let two_n = 2f64.powi(n_qubits as i32);
    let nf = factorial(n_qubits);
    let z_scale = |n_id: usize| factorial(n_qubits - n_id) * two_n * nf * factorial(n_id);
    let z_vars = z.correlator_variances();
    // indexed by n: e_{0,0,N−n,n}
    let z_by_n: Vec<f64> = (0..n_qubits)
        .map(|n_id| z.correlators[n_id] / z_scale(n_id))
        .collect();
    let z_var_by_n: Vec<f64> = (0..n_qubits)
        .map(|n_id| z_vars[n_id] / z_scale(n_id).powi(2))
        .collect();

    let mut condition_numbers = Vec::with_capacity(2 * n_qubits);
    let mut residuals = Vec::with_capacity(2 * n_qubits);
    let mut planes = Vec::with_capacity(2);
    for family in [&yz_data, &xz_data] {
        let mut values = Vec::with_capacity(n_qubits);
        let mut vars = Vec::with_capacity(n_qubits);
        for n_id in 0..n_qubits {
            let solve = solve_planar(family, n_qubits, n_id, z_by_n[n_id], z_var_by_n[n_id])?;
            condition_numbers.push(solve.condition);
            residuals.push(solve.residual);
            values.push(solve.solution);
            vars.push(solve.variances);
        }
        planes.push((values, vars));
    }
    let (xz, xz_var) = planes.pop().expect("two planes");
    let (yz, yz_var) = planes.pop().expect("two planes");

    // z[m−1] = e_{0,0,m,N−m}, i.e. n = N − m
    let z_by_m: Vec<f64> = (1..=n_qubits).map(|m| z_by_n[n_qubits - m]).collect();
    let z_var_by_m: Vec<f64> = (1..=n_qubits).map(|m| z_var_by_n[n_qubits - m]).collect();
    let sampled = data.iter().any(|d| matches!(d.shots, Shots::Finite(_)));
    let sd = |v: Vec<Vec<f64>>| -> Vec<Vec<f64>> {
        v.into_iter()
            .map(|r| r.into_iter().map(f64::sqrt).collect())
            .collect()
    };
    let standard_errors = sampled.then(|| CoefficientErrors {
        z: z_var_by_m.iter().map(|v| v.sqrt()).collect(),
        yz: sd(yz_var),
        xz: sd(xz_var),
    });
    Ok(ReconstructionResult {
        n_qubits,
        z: z_by_m,
        yz,
        xz,
        condition_numbers,
        residuals,
        standard_errors,
    })
}
