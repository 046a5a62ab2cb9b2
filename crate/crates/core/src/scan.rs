//! Degree of separability of the noisy W family over a grid of noise levels.

use std::fmt::Write as _;

use crate::criterion::{compute_abc, w_noise_abc, w_noise_keff, CriterionReport, C_TOL};
use crate::error::{Error, Result};
use crate::state::{make_w, mix_white_noise, MAX_DENSE_QUBITS};

/// Agreement required between the dense and closed-form `k_eff`.
pub const SCAN_CROSS_CHECK_TOL: f64 = 1e-10;

/// One `(N, p)` point.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub n_qubits: usize,
    pub p: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub k_eff: Option<f64>,
    pub detected_k2: bool,
    /// Whether `A`, `B`, `C` came from a dense matrix.
    pub dense: bool,
    /// Closed-form `k_eff` at the same point.
    pub k_eff_closed_form: f64,
}

/// Parses `start:end:step`; the end point is included when within `1e-12`.
pub fn parse_p_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [start, end, step] = parts.as_slice() else {
        return Err(Error::Argument(format!(
            "p grid {spec:?} is not start:end:step"
        )));
    };
    let parse = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|e| Error::Argument(format!("bad number {s:?} in p grid: {e}")))
    };
    let (start, end, step) = (parse(start)?, parse(end)?, parse(step)?);
    if step.is_nan() || step <= 0.0 || end < start {
        return Err(Error::Argument(format!(
            "p grid {spec:?} needs step > 0 and end >= start"
        )));
    }
    if start < 0.0 || end > 1.0 {
        return Err(Error::Parameter(format!("p grid {spec:?} leaves [0, 1]")));
    }
    let mut out = Vec::new();
    for i in 0.. {
        let p = start + i as f64 * step;
        if p > end + 1e-12 {
            break;
        }
        out.push(p.min(end));
    }
    Ok(out)
}

/// Parses a comma-separated list of qubit counts.
pub fn parse_n_list(spec: &str) -> Result<Vec<usize>> {
    spec.split(',')
        .map(|s| {
            let n: usize = s
                .trim()
                .parse()
                .map_err(|e| Error::Argument(format!("bad qubit count {s:?}: {e}")))?;
            if n < 2 {
                return Err(Error::Dimension(format!("scan needs N >= 2, got {n}")));
            }
            Ok(n)
        })
        .collect()
}

/// Rows ordered by `N` (as given) then `p`.
///
/// For `N` within the dense cap (and unless `closed_form_only`), `A`, `B`, `C`
/// are read from the dense matrix and `k_eff` is cross-checked against the
/// closed form; otherwise the closed-form sums are used.
pub fn scan_noise(n_list: &[usize], grid: &[f64], closed_form_only: bool) -> Result<Vec<ScanRow>> {
    let mut rows = Vec::with_capacity(n_list.len() * grid.len());
    for &n in n_list {
        let dense_w = (!closed_form_only && n <= MAX_DENSE_QUBITS)
            .then(|| make_w(n).map(|w| w.density()))
            .transpose()?;
        for &p in grid {
            let closed = w_noise_keff(n, p)?;
            let abc = match &dense_w {
                Some(w) => compute_abc(&mix_white_noise(w, p)?)?,
                None => w_noise_abc(n, p)?,
            };
            let report = CriterionReport::from_abc(n, abc);
            if let (Some(_), Some(k)) = (&dense_w, report.k_eff) {
                if (k - closed).abs() > SCAN_CROSS_CHECK_TOL {
                    return Err(Error::NumericalConsistency(format!(
                        "dense k_eff {k} differs from closed form {closed} at N = {n}, p = {p}"
                    )));
                }
            }
            debug_assert!(report.k_eff.is_some() || abc.c <= C_TOL);
            rows.push(ScanRow {
                n_qubits: n,
                p,
                a: abc.a,
                b: abc.b,
                c: abc.c,
                k_eff: report.k_eff,
                detected_k2: report.detects_gme(),
                dense: dense_w.is_some(),
                k_eff_closed_form: closed,
            });
        }
    }
    Ok(rows)
}

pub const CSV_HEADER: &str = "N,p,A,B,C,k_eff,detected_k2";

/// CSV with columns `N,p,A,B,C,k_eff,detected_k2`; an undefined `k_eff` is an
/// empty field.
pub fn rows_to_csv(rows: &[ScanRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let k = r.k_eff.map(|k| format!("{k:?}")).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{:?},{:?},{:?},{:?},{},{}",
            r.n_qubits, r.p, r.a, r.b, r.c, k, r.detected_k2
        );
    }
    out
}
