//! Commutator diagnostics: the sequence
//! `S_n = a_{n-1}α_{n-1}u_{n-1}² + a_nα_n u_n² − (λ − b_n)α_{n-1}u_{n-1}u_n`,
//! its relative increments `F_n`, the extremal bounds `w_min ≤ S_n/Ŝ_n ≤ w_max`,
//! and graded checkers for the spectral theorems' hypotheses.

mod checks;
pub mod heuristics;
mod trace;
mod verdict;

pub use checks::{
    check_corollary_b, check_corollary_c, check_ratio_variation, check_theorem_42,
    check_theorem_43, check_theorem_a, chihara_ratio, overall, CorollaryCReport, CONCLUSION_42,
    CONCLUSION_A, MIN_CHECK_N,
};
pub use heuristics::CheckConfig;
pub use trace::{
    liminf_estimate, s_sequence, s_sequence_with, w_bounds, DiagnosticsTrace, LiminfEstimate,
    TraceRow,
};
pub use verdict::{CheckReport, Checkpoint, ConditionVerdict, Evidence, Slope, Verdict, Window};
