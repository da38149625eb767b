//! Worked case studies built on the calculus: encodings of classical
//! normed-space statements, the structure families used to probe them,
//! and the two search utilities (uniformity index, block-basis
//! distortion) the case studies motivate.

pub mod behrends;
pub mod families;
pub mod krivine;
pub mod reflexivity;
pub mod suite;
pub mod ulam;

pub use behrends::{behrends_signature, build_behrends};
pub use krivine::{
    analytic_w_fallback, build_krivine_formulas, estimate_w, krivine_search, KrivineCandidate,
    KrivineFormulas, KrivineQuery, WEstimate,
};
pub use families::{
    fuzz_structures, l1_grid, single_point_structure, standard_w_family, ulam_family,
    unit_basis_lp,
};
pub use reflexivity::build_reflexivity_sentence;
pub use suite::{fuzz_la_sentences, fuzz_pb_sentences, run_all, SuiteOutcome, SuiteReport};
pub use ulam::{build_ulam, ulam_signature};
