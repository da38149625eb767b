//! Exact evaluation: radical arithmetic, finite rational normed
//! structures, and (prefix) semantics for approximations.

pub mod eval;
pub mod radical;
pub mod structure;

pub use eval::{
    describe_witness, eval, eval_ap_prefix, eval_la_prefix, eval_term, eval_under,
    eval_with_witness, ApVerdict, Assignment, WitnessRole, WitnessStep,
};
pub use radical::{RadicalRatio, RadicalValue};
pub use structure::{
    BoundLine, FiniteNormedStructure, FnInterp, ModulusLine, Norm, RawTables, RelInterp,
};
