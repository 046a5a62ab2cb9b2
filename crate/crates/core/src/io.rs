//! JSON documents for states, coefficient tables, criterion reports and
//! measurement data.

use std::path::Path;

use num_complex::Complex64;
use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};

use crate::coeffs::PICoefficients;
use crate::criterion::CriterionReport;
use crate::error::{Error, Result};
use crate::measurement::{
    Family, MeasurementSetting, ReconstructionResult, SettingData, Shots, RNG_NAME,
};
use crate::state::{DensityMatrix, PureState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateKind {
    Pure,
    Density,
}

/// `{"n_qubits": N, "kind": "pure"|"density", "data": [[re, im], ...]}`,
/// matrices flattened row-major.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateDoc {
    pub n_qubits: usize,
    pub kind: StateKind,
    pub data: Vec<[f64; 2]>,
}

/// A state read from disk.
#[derive(Debug, Clone, PartialEq)]
pub enum State {
    Pure(PureState),
    Density(DensityMatrix),
}

impl State {
    pub fn n_qubits(&self) -> usize {
        match self {
            State::Pure(p) => p.n_qubits(),
            State::Density(d) => d.n_qubits(),
        }
    }

    pub fn density(&self) -> DensityMatrix {
        match self {
            State::Pure(p) => p.density(),
            State::Density(d) => d.clone(),
        }
    }

    pub fn to_doc(&self) -> StateDoc {
        let pack = |zs: &[Complex64]| zs.iter().map(|z| [z.re, z.im]).collect();
        match self {
            State::Pure(p) => StateDoc {
                n_qubits: p.n_qubits(),
                kind: StateKind::Pure,
                data: pack(p.amplitudes()),
            },
            State::Density(d) => StateDoc {
                n_qubits: d.n_qubits(),
                kind: StateKind::Density,
                data: pack(d.data()),
            },
        }
    }

    /// Validates the document, including positivity for density matrices.
    pub fn from_doc(doc: StateDoc) -> Result<Self> {
        let data: Vec<Complex64> = doc
            .data
            .iter()
            .map(|&[re, im]| Complex64::new(re, im))
            .collect();
        match doc.kind {
            StateKind::Pure => PureState::new(doc.n_qubits, data).map(State::Pure),
            StateKind::Density => {
                DensityMatrix::new_validated(doc.n_qubits, data).map(State::Density)
            }
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_doc())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_doc(serde_json::from_str(text)?)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Pure state, or the dominant eigenvector of a density matrix of purity 1.
    pub fn into_pure(self) -> Result<PureState> {
        match self {
            State::Pure(p) => Ok(p),
            State::Density(d) => {
                let purity = d.purity();
                if (purity - 1.0).abs() > 1e-10 {
                    return Err(Error::UnsupportedInput(format!(
                        "mixed state (purity {purity}); the concurrence is only evaluated for pure states"
                    )));
                }
                let dim = d.dim();
                let m = nalgebra::DMatrix::from_fn(dim, dim, |r, c| d.get(r, c));
                let eig = m.symmetric_eigen();
                let top = eig.eigenvalues.imax();
                let v: Vec<Complex64> = eig.eigenvectors.column(top).iter().copied().collect();
                PureState::normalized(d.n_qubits(), v)
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoeffEntry {
    pub k: usize,
    pub l: usize,
    pub m: usize,
    pub n: usize,
    pub e: f64,
}

/// `{"n_qubits": N, "coeffs": [{"k", "l", "m", "n", "e"}, ...]}` listing the
/// nonzero entries and always `e_{000N}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoeffDoc {
    pub n_qubits: usize,
    pub coeffs: Vec<CoeffEntry>,
}

impl CoeffDoc {
    pub fn from_coeffs(c: &PICoefficients) -> Self {
        let n = c.n_qubits();
        let coeffs = c
            .iter()
            .filter(|(t, e)| *e != 0.0 || t.id == n)
            .map(|(t, e)| CoeffEntry {
                k: t.x,
                l: t.y,
                m: t.z,
                n: t.id,
                e,
            })
            .collect();
        Self {
            n_qubits: n,
            coeffs,
        }
    }

    pub fn to_coeffs(&self) -> Result<PICoefficients> {
        let mut c = PICoefficients::maximally_mixed(self.n_qubits)?;
        c.set(0, 0, 0, self.n_qubits, 0.0);
        for entry in &self.coeffs {
            c.try_set(entry.k, entry.l, entry.m, entry.n, entry.e)?;
        }
        Ok(c)
    }
}

/// Report body with `null` for an undefined `k_eff` and verdicts keyed by `k`.
impl Serialize for CriterionReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        struct Verdicts<'a>(&'a [(usize, crate::criterion::Verdict)]);
        impl Serialize for Verdicts<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                let mut map = s.serialize_map(Some(self.0.len()))?;
                for (k, v) in self.0 {
                    map.serialize_entry(&k.to_string(), v)?;
                }
                map.end()
            }
        }
        let extra = usize::from(self.k_eff.is_none());
        let mut map = serializer.serialize_map(Some(5 + extra))?;
        map.serialize_entry("A", &self.a)?;
        map.serialize_entry("B", &self.b)?;
        map.serialize_entry("C", &self.c)?;
        map.serialize_entry("k_eff", &self.k_eff)?;
        map.serialize_entry("verdicts", &Verdicts(&self.verdicts))?;
        if self.k_eff.is_none() {
            map.serialize_entry(
                "note",
                "k_eff undefined: C vanishes; verdicts come from the inequality directly",
            )?;
        }
        map.end()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ShotsDoc {
    Count(u64),
    Label(String),
}

/// `{"direction", "family", "shots", "correlators", "histogram", "seed"}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SettingDataDoc {
    pub direction: [f64; 3],
    pub family: Family,
    pub shots: ShotsDoc,
    pub correlators: Vec<f64>,
    pub histogram: Option<Vec<u64>>,
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rng: Option<String>,
}

impl SettingDataDoc {
    pub fn from_data(d: &SettingData) -> Self {
        Self {
            direction: d.setting.direction(),
            family: d.setting.family(),
            shots: match d.shots {
                Shots::Exact => ShotsDoc::Label("exact".into()),
                Shots::Finite(s) => ShotsDoc::Count(s),
            },
            correlators: d.correlators.clone(),
            histogram: d.histogram.clone(),
            seed: d.seed,
            rng: d.seed.map(|_| RNG_NAME.to_string()),
        }
    }

    pub fn to_data(&self) -> Result<SettingData> {
        let shots = match &self.shots {
            ShotsDoc::Count(s) => Shots::Finite(*s),
            ShotsDoc::Label(l) if l == "exact" => Shots::Exact,
            ShotsDoc::Label(l) => {
                return Err(Error::Validation(format!("unknown shots value {l:?}")))
            }
        };
        Ok(SettingData {
            setting: MeasurementSetting::new(self.direction, self.family)?,
            correlators: self.correlators.clone(),
            shots,
            histogram: self.histogram.clone(),
            seed: self.seed,
        })
    }
}

/// Coefficient document plus solver diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct ReconstructionDoc {
    pub n_qubits: usize,
    pub coeffs: Vec<CoeffEntry>,
    pub condition_numbers: Vec<f64>,
    pub residuals: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub standard_errors: Option<Vec<CoeffEntry>>,
}

impl ReconstructionDoc {
    pub fn from_result(r: &ReconstructionResult) -> Self {
        let entries = |v: Vec<(crate::state::PauliType, f64)>| {
            v.into_iter()
                .map(|(t, e)| CoeffEntry {
                    k: t.x,
                    l: t.y,
                    m: t.z,
                    n: t.id,
                    e,
                })
                .collect::<Vec<_>>()
        };
        let CoeffDoc { n_qubits, coeffs } = CoeffDoc::from_coeffs(&r.to_coefficients());
        Self {
            n_qubits,
            coeffs,
            condition_numbers: r.condition_numbers.clone(),
            residuals: r.residuals.clone(),
            standard_errors: r.criterion_standard_errors().map(entries),
        }
    }
}
