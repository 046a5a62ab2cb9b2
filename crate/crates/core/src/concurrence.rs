//! Pure-state k-ME concurrence by exhaustive search over k-partitions.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::state::{scatter_bits, PureState};

/// Largest `N` accepted for partition enumeration.
pub const MAX_PARTITION_QUBITS: usize = 10;

/// A partition of `{0..N−1}` into nonempty blocks, sorted by smallest element.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct KPartition {
    blocks: Vec<Vec<usize>>,
}

impl KPartition {
    /// Builds a partition from blocks, checking coverage and canonicalizing.
    pub fn new(n_qubits: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; n_qubits];
        let mut blocks: Vec<Vec<usize>> = blocks
            .into_iter()
            .map(|mut b| {
                b.sort_unstable();
                b
            })
            .collect();
        for b in &blocks {
            if b.is_empty() {
                return Err(Error::Argument("partition has an empty block".into()));
            }
            for &q in b {
                if q >= n_qubits || seen[q] {
                    return Err(Error::Argument(format!(
                        "qubit {q} repeated or out of range"
                    )));
                }
                seen[q] = true;
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Argument(
                "partition does not cover all qubits".into(),
            ));
        }
        blocks.sort_by_key(|b| b[0]);
        Ok(Self { blocks })
    }

    /// From a restricted growth string: `labels[q]` is the block of qubit `q`.
    fn from_labels(labels: &[usize], k: usize) -> Self {
        let mut blocks = vec![Vec::new(); k];
        for (q, &b) in labels.iter().enumerate() {
            blocks[b].push(q);
        }
        Self { blocks }
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn k(&self) -> usize {
        self.blocks.len()
    }
}

impl fmt::Display for KPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, b) in self.blocks.iter().enumerate() {
            if i > 0 {
                write!(f, "|")?;
            }
            let inner: Vec<String> = b.iter().map(|q| q.to_string()).collect();
            write!(f, "{{{}}}", inner.join(","))?;
        }
        Ok(())
    }
}

/// Every partition of `{0..N−1}` into exactly `k` blocks, once each.
///
/// Enumerates restricted growth strings in lexicographic order, so the
/// output order is canonical and deterministic. The count is the Stirling
/// number of the second kind `S(N, k)`.
pub fn enumerate_k_partitions(n_qubits: usize, k: usize) -> Result<Vec<KPartition>> {
    if k == 0 || k > n_qubits || n_qubits > MAX_PARTITION_QUBITS {
        return Err(Error::Argument(format!(
            "need 1 <= k <= N <= {MAX_PARTITION_QUBITS}, got k = {k}, N = {n_qubits}"
        )));
    }
    let mut out = Vec::new();
    let mut labels = vec![0usize; n_qubits];
    grow(&mut labels, 1, 1, k, &mut out);
    Ok(out)
}

fn grow(labels: &mut [usize], pos: usize, used: usize, k: usize, out: &mut Vec<KPartition>) {
    let n = labels.len();
    if pos == n {
        if used == k {
            out.push(KPartition::from_labels(labels, k));
        }
        return;
    }
    // not enough positions left to open the remaining blocks
    if used + (n - pos) < k {
        return;
    }
    for b in 0..=used.min(k - 1) {
        labels[pos] = b;
        grow(labels, pos + 1, used.max(b + 1), k, out);
    }
}

/// `1 − Tr(ρ_A²)` of the reduced state of `psi` on `block`.
///
/// With Schmidt values `σ_i` this is `2·Σ_{i<j} σ_i² σ_j²`, a sum of
/// nonnegative terms, so product states give zero to within `ε²` rather
/// than `ε`. Uses the smaller of the block and its complement as rows.
pub fn purity_deficit(psi: &PureState, block: &[usize]) -> f64 {
    let n = psi.n_qubits();
    let complement: Vec<usize> = (0..n).filter(|q| !block.contains(q)).collect();
    if complement.is_empty() || block.is_empty() {
        return 0.0;
    }
    let (small, large) = if block.len() <= complement.len() {
        (block, complement.as_slice())
    } else {
        (complement.as_slice(), block)
    };
    let (ds, dl) = (1usize << small.len(), 1usize << large.len());
    let amps = psi.amplitudes();
    let m = DMatrix::<Complex64>::from_fn(ds, dl, |a, e| {
        amps[scatter_bits(a, small) | scatter_bits(e, large)]
    });
    let weights: Vec<f64> = m.singular_values().iter().map(|s| s * s).collect();
    let mut deficit = 0.0;
    for (i, wi) in weights.iter().enumerate() {
        for wj in &weights[i + 1..] {
            deficit += 2.0 * wi * wj;
        }
    }
    deficit
}

/// `Tr(ρ_A²)` of the reduced state of `psi` on `block`.
pub fn reduced_purity(psi: &PureState, block: &[usize]) -> f64 {
    1.0 - purity_deficit(psi, block)
}

/// Value of the concurrence expression for one partition.
pub fn partition_concurrence(psi: &PureState, partition: &KPartition) -> f64 {
    let k = partition.k() as f64;
    let deficit: f64 = partition
        .blocks()
        .iter()
        .map(|b| purity_deficit(psi, b))
        .sum();
    (2.0 * deficit / k).sqrt()
}

/// `C_kME(ψ) = min_A √((2/k) Σ_t [1 − Tr ρ_{A_t}²])`, with the first minimizing
/// partition in canonical order.
pub fn kme_concurrence_pure(psi: &PureState, k: usize) -> Result<(f64, KPartition)> {
    let n = psi.n_qubits();
    if k < 2 || k > n || n > MAX_PARTITION_QUBITS {
        return Err(Error::Argument(format!(
            "need 2 <= k <= N <= {MAX_PARTITION_QUBITS}, got k = {k}, N = {n}"
        )));
    }
    let mut best: Option<(f64, KPartition)> = None;
    for part in enumerate_k_partitions(n, k)? {
        let v = partition_concurrence(psi, &part);
        if best.as_ref().is_none_or(|(bv, _)| v < *bv) {
            best = Some((v, part));
        }
    }
    Ok(best.expect("at least one partition"))
}

/// Largest change of `C_kME` under `trials` random qubit permutations.
pub fn check_permutation_invariance(
    psi: &PureState,
    k: usize,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    let (base, _) = kme_concurrence_pure(psi, k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<usize> = (0..psi.n_qubits()).collect();
    let mut worst = 0.0f64;
    for _ in 0..trials {
        perm.shuffle(&mut rng);
        let (v, _) = kme_concurrence_pure(&psi.permute_qubits(&perm)?, k)?;
        worst = worst.max((v - base).abs());
    }
    Ok(worst)
}
