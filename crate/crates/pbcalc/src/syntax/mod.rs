//! Formula syntax: ASTs, canonical index domains, parsing, printing,
//! template instantiation, and variable analysis.

pub mod ast;
pub mod domains;
pub mod parse;
pub mod print;
pub mod subst;
pub mod vars;

pub use ast::{
    AtomicFormula, BoundSeq, CmpOp, IdxExpr, LAFormula, PBFormula, QuantVar, Term, VarRef,
};
pub use domains::{IndexDomain, IndexValue};
pub use parse::{parse_la, parse_pb};
pub use print::{print_la, print_pb};
