//! Permutationally invariant (PI) parts of N-qubit density matrices and the
//! k-separability criteria that can be evaluated on them.
//!
//! * [`state`]: dense states, Pauli expectations, partial traces, local bases
//! * [`symmetry`]: orbit-averaged PI projection
//! * [`coeffs`]: the `e_klmn` expansion of PI states
//! * [`criterion`]: k-separability verdicts and the degree of separability
//! * [`concurrence`]: pure-state k-ME concurrence
//! * [`measurement`]: `2N + 1` setting scheme and linear-inversion reconstruction
//! * [`scan`]: noisy W scans over a noise grid
//! * [`io`]: JSON documents

pub mod coeffs;
pub mod concurrence;
pub mod criterion;
pub mod error;
pub mod io;
pub mod measurement;
pub mod scan;
pub mod state;
pub mod symmetry;

pub use coeffs::{
    coeffs_from_dense, criterion_elements_from_coeffs, dense_from_coeffs, symmetrized_expectation,
    CriterionElements, PICoefficients,
};
pub use concurrence::{
    check_permutation_invariance, enumerate_k_partitions, kme_concurrence_pure, KPartition,
};
pub use criterion::{
    compute_abc, evaluate_criterion, evaluate_criterion_coeffs, maximize_over_bases, w_noise_abc,
    w_noise_detection_threshold, w_noise_keff, Abc, BasisSearch, CriterionReport, Verdict,
};
pub use error::{Error, Result};
pub use measurement::{
    design_settings, design_settings_with, exact_setting_data, exact_setting_data_coeffs,
    parameter_count, reconstruct_coefficients, sample_setting_data, Family, MeasurementSetting,
    Preset, ReconstructionResult, SettingData, Shots,
};
pub use scan::{parse_n_list, parse_p_grid, rows_to_csv, scan_noise, ScanRow};
pub use state::{
    apply_local_basis, make_ghz, make_w, mix_white_noise, partial_trace, pauli_expectation,
    DensityMatrix, LocalBasisChange, PauliString, PureState,
};
pub use symmetry::{pi_distance, pi_project, pi_project_in_basis, pi_project_naive};
